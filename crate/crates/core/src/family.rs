//! Level-indexed truncation families presenting countable posets.
//!
//! Level `N` is a [`DPoset`] window onto the intended poset. Names are
//! canonical: the same element carries the same name at every level where
//! it is visible, and level `N` embeds verbatim into level `N + 1`.

use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, Mutex};

use thiserror::Error;

use crate::dposet::{DPoset, DPosetError};
use crate::mask::Mask;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FamilyError {
    #[error("guard {guard} too large for level {level}")]
    GuardTooLarge { level: usize, guard: usize },
    #[error("level must be positive")]
    ZeroLevel,
    #[error("family `{family}` level {level}: {source}")]
    Level {
        family: String,
        level: usize,
        source: DPosetError,
    },
    #[error("family `{family}` breaks the embedding between levels {level} and {}: {reason}", level + 1)]
    Embedding {
        family: String,
        level: usize,
        reason: String,
    },
}

/// A named lower-set generator whose chain-tail membership is known exactly.
///
/// `tails_inside` lists the declaration ids whose full (infinite) chain lies
/// in the down-closure of `members`; every other declaration's tail lies
/// outside, whatever the visible window suggests.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SchemaSet {
    pub name: String,
    pub members: Mask,
    pub tails_inside: Vec<String>,
    /// Smallest level at which the set's parameters are in range; guarded
    /// evaluation only uses sets that appeared well inside the window.
    pub appears_at: usize,
}

#[derive(Debug, Clone)]
pub struct Level {
    pub level: usize,
    pub dposet: DPoset,
    pub schema: Vec<SchemaSet>,
}

impl Level {
    pub fn schema_set(&self, name: &str) -> Option<&SchemaSet> {
        self.schema.iter().find(|s| s.name == name)
    }
}

type Builder = dyn Fn(usize) -> Result<Level, DPosetError> + Send + Sync;

/// Flags the family author asserts about the intended poset.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct FamilyFlags {
    /// Every directed subset of the intended poset has a supremum.
    pub dcpo: bool,
}

#[derive(Clone)]
pub struct TruncationFamily {
    name: String,
    flags: FamilyFlags,
    builder: Arc<Builder>,
    /// `true` when every level is the same d-poset.
    constant: bool,
    cache: Arc<Mutex<HashMap<usize, Arc<Level>>>>,
}

impl fmt::Debug for TruncationFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("TruncationFamily")
            .field("name", &self.name)
            .field("flags", &self.flags)
            .finish()
    }
}

impl TruncationFamily {
    pub fn new(
        name: impl Into<String>,
        flags: FamilyFlags,
        builder: impl Fn(usize) -> Result<Level, DPosetError> + Send + Sync + 'static,
    ) -> Self {
        TruncationFamily {
            name: name.into(),
            flags,
            builder: Arc::new(builder),
            constant: false,
            cache: Arc::default(),
        }
    }

    /// A family whose every level is `dposet`, e.g. an ordinary finite poset.
    pub fn constant(name: impl Into<String>, dposet: DPoset, schema: Vec<SchemaSet>) -> Self {
        let flags = FamilyFlags { dcpo: true };
        let mut fam = TruncationFamily::new(name, flags, move |level| {
            Ok(Level {
                level,
                dposet: dposet.clone(),
                schema: schema.clone(),
            })
        });
        fam.constant = true;
        fam
    }

    pub fn with_flags(mut self, flags: FamilyFlags) -> Self {
        self.flags = flags;
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn flags(&self) -> FamilyFlags {
        self.flags
    }

    pub fn is_constant(&self) -> bool {
        self.constant
    }

    pub fn level(&self, n: usize) -> Result<Arc<Level>, FamilyError> {
        if n == 0 {
            return Err(FamilyError::ZeroLevel);
        }
        if let Some(l) = self.cache.lock().unwrap().get(&n) {
            return Ok(l.clone());
        }
        let built = (self.builder)(n).map_err(|source| FamilyError::Level {
            family: self.name.clone(),
            level: n,
            source,
        })?;
        let built = Arc::new(built);
        self.cache.lock().unwrap().insert(n, built.clone());
        Ok(built)
    }

    /// Elements of level `n` that are already visible at level `n - guard`.
    pub fn guarded_carrier(&self, n: usize, guard: usize) -> Result<Mask, FamilyError> {
        if guard >= n {
            return Err(FamilyError::GuardTooLarge { level: n, guard });
        }
        let lvl = self.level(n)?;
        let p = lvl.dposet.base();
        if guard == 0 || self.constant {
            return Ok(p.full());
        }
        let inner = self.level(n - guard)?;
        let mut m = p.empty();
        for name in inner.dposet.base().names() {
            if let Some(i) = p.index_of(name) {
                m.insert(i);
            }
        }
        Ok(m)
    }

    /// Coherence of level `n`, judged against level `n + 1`.
    pub fn validate_level(&self, n: usize) -> Result<(), FamilyError> {
        let lvl = self.level(n)?;
        let res = if self.constant {
            lvl.dposet.validate()
        } else {
            lvl.dposet.validate_against(&self.level(n + 1)?.dposet)
        };
        res.map_err(|source| FamilyError::Level {
            family: self.name.clone(),
            level: n,
            source,
        })
    }

    /// Checks that level `n` is the name-preserving restriction of level
    /// `n + 1`, including declaration prefixes.
    pub fn check_embedding(&self, n: usize) -> Result<(), FamilyError> {
        let small = self.level(n)?;
        let big = self.level(n + 1)?;
        let fail = |reason: String| FamilyError::Embedding {
            family: self.name.clone(),
            level: n,
            reason,
        };
        let (sp, bp) = (small.dposet.base(), big.dposet.base());
        if sp.len() > bp.len() {
            return Err(fail("carrier shrinks".into()));
        }
        let mut map = Vec::with_capacity(sp.len());
        for name in sp.names() {
            map.push(
                bp.index_of(name)
                    .ok_or_else(|| fail(format!("element {name} disappears")))?,
            );
        }
        for a in 0..sp.len() {
            for b in 0..sp.len() {
                if sp.leq(a, b) != bp.leq(map[a], map[b]) {
                    return Err(fail(format!(
                        "order between {} and {} changes",
                        sp.name(a),
                        sp.name(b)
                    )));
                }
            }
        }
        for d in small.dposet.decls() {
            let j = big
                .dposet
                .decl_by_id(&d.id)
                .ok_or_else(|| fail(format!("declaration {} disappears", d.id)))?;
            let e = &big.dposet.decls()[j];
            if e.limit != map[d.limit] {
                return Err(fail(format!("declaration {} changes limit", d.id)));
            }
            let prefix: Vec<usize> = d.chain.iter().map(|&c| map[c]).collect();
            if !e.chain.starts_with(&prefix) {
                return Err(fail(format!("declaration {} is not extended", d.id)));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dposet::LimitDecl;
    use crate::order::FinPoset;

    /// ℕ ∪ {ω}, level N shows 1..N.
    fn omega_chain() -> TruncationFamily {
        TruncationFamily::new("omega", FamilyFlags { dcpo: true }, |n| {
            let mut names: Vec<String> = (1..=n).map(|i| i.to_string()).collect();
            names.push("ω".into());
            let base = FinPoset::from_predicate(names, |a, b| a <= b).unwrap();
            let decl = LimitDecl {
                id: "ℕ".into(),
                chain: (0..n).collect(),
                limit: n,
            };
            Ok(Level {
                level: n,
                dposet: DPoset::new(base, vec![decl])?,
                schema: vec![],
            })
        })
    }

    #[test]
    fn guard_band() {
        let f = omega_chain();
        assert_eq!(f.guarded_carrier(5, 0).unwrap().count(), 6);
        let g = f.guarded_carrier(5, 1).unwrap();
        let lvl = f.level(5).unwrap();
        assert_eq!(lvl.dposet.base().names_of(&g), vec!["1", "2", "3", "4", "ω"]);
        assert_eq!(
            f.guarded_carrier(1, 1),
            Err(FamilyError::GuardTooLarge { level: 1, guard: 1 })
        );
    }

    #[test]
    fn embedding_and_coherence() {
        let f = omega_chain();
        for n in 1..8 {
            f.check_embedding(n).unwrap();
            f.validate_level(n).unwrap();
        }
    }

    #[test]
    fn embedding_violation_is_reported() {
        // reverses the chain order at every level
        let bad = TruncationFamily::new("bad", FamilyFlags::default(), |n| {
            let names: Vec<String> = (1..=n).map(|i| i.to_string()).collect();
            let base = FinPoset::from_predicate(names, move |a, b| {
                if n % 2 == 0 {
                    a <= b
                } else {
                    a >= b
                }
            })
            .unwrap();
            Ok(Level {
                level: n,
                dposet: DPoset::plain(base),
                schema: vec![],
            })
        });
        assert!(matches!(
            bad.check_embedding(2),
            Err(FamilyError::Embedding { .. })
        ));
    }
}
