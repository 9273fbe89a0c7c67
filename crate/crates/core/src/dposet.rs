//! Finite posets with declared ω-chain limits.
//!
//! A [`DPoset`] stands for a countable poset of which only a finite window is
//! materialized. Each [`LimitDecl`] lists the visible prefix of an ω-chain
//! together with the element that is the supremum of the whole (infinite)
//! chain. The only infinite directed suprema recognized are the declared ones;
//! every finite directed set has its maximum as supremum.
//!
//! Because the chain beyond the window is invisible, the question "does the
//! lower set `S` contain a tail of this chain" is answered by "does `S`
//! contain the last listed chain element". For a lower set the two agree
//! whenever the window is faithful; families add guard bands and tail
//! oracles for the cases where it is not (see [`crate::family`]).

use serde::Serialize;
use thiserror::Error;

use crate::mask::Mask;
use crate::order::{FinPoset, OrderError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DPosetError {
    #[error(transparent)]
    Order(#[from] OrderError),
    #[error("declaration `{decl}` is incoherent: {reason}")]
    IncoherentDeclaration { decl: String, reason: String },
    #[error("declaration `{0}` appears twice")]
    DuplicateDeclaration(String),
    /// A level could not be produced from its textual description.
    #[error("{0}")]
    Instantiation(String),
}

/// A visible chain prefix `c_1 < c_2 < ... < c_k` and the supremum of the
/// full chain.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LimitDecl {
    /// Stable identifier; names the same chain at every truncation level.
    pub id: String,
    pub chain: Vec<usize>,
    pub limit: usize,
}

impl LimitDecl {
    pub fn top(&self) -> usize {
        *self.chain.last().expect("chains are nonempty")
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DPoset {
    base: FinPoset,
    decls: Vec<LimitDecl>,
}

/// A directed supremum found inside a lower set, with its reason.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum SupWitness {
    /// The element is the maximum of the finite directed set `{x}`.
    Maximum,
    /// The element is the declared limit of this chain.
    Chain(String),
}

impl DPoset {
    /// Assembles a d-poset, checking the per-declaration shape invariants
    /// (strict chain, strict upper bound). Coherence is checked separately by
    /// [`DPoset::validate`].
    pub fn new(base: FinPoset, decls: Vec<LimitDecl>) -> Result<DPoset, DPosetError> {
        let d = DPoset { base, decls };
        d.check_shape()?;
        Ok(d)
    }

    /// A d-poset with no declarations: an ordinary finite poset.
    pub fn plain(base: FinPoset) -> DPoset {
        DPoset {
            base,
            decls: Vec::new(),
        }
    }

    pub fn base(&self) -> &FinPoset {
        &self.base
    }

    pub fn decls(&self) -> &[LimitDecl] {
        &self.decls
    }

    pub fn len(&self) -> usize {
        self.base.len()
    }

    pub fn is_empty(&self) -> bool {
        self.base.is_empty()
    }

    pub fn decl_by_id(&self, id: &str) -> Option<usize> {
        self.decls.iter().position(|d| d.id == id)
    }

    fn incoherent(&self, d: &LimitDecl, reason: impl Into<String>) -> DPosetError {
        DPosetError::IncoherentDeclaration {
            decl: d.id.clone(),
            reason: reason.into(),
        }
    }

    fn check_shape(&self) -> Result<(), DPosetError> {
        let p = &self.base;
        for (i, d) in self.decls.iter().enumerate() {
            if self.decls[..i].iter().any(|e| e.id == d.id) {
                return Err(DPosetError::DuplicateDeclaration(d.id.clone()));
            }
            if self.decls[..i]
                .iter()
                .any(|e| e.chain == d.chain && e.limit == d.limit)
            {
                return Err(DPosetError::DuplicateDeclaration(d.id.clone()));
            }
            if d.chain.is_empty() {
                return Err(self.incoherent(d, "empty chain"));
            }
            for w in d.chain.windows(2) {
                if !p.lt(w[0], w[1]) {
                    return Err(self.incoherent(
                        d,
                        format!(
                            "chain is not strictly increasing at {} -> {}",
                            p.name(w[0]),
                            p.name(w[1])
                        ),
                    ));
                }
            }
            for &c in &d.chain {
                if !p.lt(c, d.limit) {
                    return Err(self.incoherent(
                        d,
                        format!(
                            "limit {} is not a strict upper bound of {}",
                            p.name(d.limit),
                            p.name(c)
                        ),
                    ));
                }
            }
        }
        Ok(())
    }

    /// Strict upper bounds of the visible chain: upper bounds that are not
    /// chain elements themselves.
    fn strict_upper_bounds(&self, d: &LimitDecl) -> Mask {
        let p = &self.base;
        let mut ub = p.up(d.top()).clone();
        for &c in &d.chain {
            ub.remove(c);
        }
        ub
    }

    /// Full validation: shape plus coherence, i.e. every limit is the least
    /// strict upper bound of its visible chain.
    pub fn validate(&self) -> Result<(), DPosetError> {
        self.check_shape()?;
        for d in &self.decls {
            let ub = self.strict_upper_bounds(d);
            self.check_least(d, &ub)?;
        }
        Ok(())
    }

    /// Coherence judged against a larger window: an upper bound at this
    /// level only counts if it still bounds the longer chain prefix of
    /// `next`. Used by truncation families, where elements near the window
    /// edge are spurious upper bounds of a chain that continues beyond it.
    pub fn validate_against(&self, next: &DPoset) -> Result<(), DPosetError> {
        self.check_shape()?;
        for d in &self.decls {
            let mut ub = self.strict_upper_bounds(d);
            if let Some(j) = next.decl_by_id(&d.id) {
                let nd = &next.decls[j];
                let next_top = nd.top();
                for u in ub.clone().iter() {
                    let keep = next
                        .base
                        .index_of(self.base.name(u))
                        .is_some_and(|nu| next.base.leq(next_top, nu));
                    if !keep {
                        ub.remove(u);
                    }
                }
            }
            self.check_least(d, &ub)?;
        }
        Ok(())
    }

    fn check_least(&self, d: &LimitDecl, ub: &Mask) -> Result<(), DPosetError> {
        let p = &self.base;
        if !ub.contains(d.limit) {
            return Err(self.incoherent(d, "limit is not an upper bound of the chain"));
        }
        if let Some(u) = ub.iter().find(|&u| !p.leq(d.limit, u)) {
            return Err(self.incoherent(
                d,
                format!(
                    "upper bound {} is not above limit {}",
                    p.name(u),
                    p.name(d.limit)
                ),
            ));
        }
        Ok(())
    }

    /// Declarations whose visible chain top lies in `s`.
    pub fn triggered(&self, s: &Mask) -> impl Iterator<Item = usize> + '_ {
        let s = s.clone();
        self.decls
            .iter()
            .enumerate()
            .filter(move |(_, d)| s.contains(d.top()))
            .map(|(i, _)| i)
    }

    /// All directed suprema of directed subsets of the lower set `s`.
    ///
    /// Finite directed subsets contribute their maxima, which range over `s`
    /// itself; declared limits contribute when their chain top is in `s`.
    pub fn directed_sups(&self, s: &Mask) -> Vec<(usize, SupWitness)> {
        debug_assert!(self.base.is_lower(s), "directed_sups expects a lower set");
        let mut out: Vec<(usize, SupWitness)> =
            s.iter().map(|x| (x, SupWitness::Maximum)).collect();
        for i in self.triggered(s) {
            let d = &self.decls[i];
            out.push((d.limit, SupWitness::Chain(d.id.clone())));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::order::RelationMode;

    fn fig3_base() -> FinPoset {
        FinPoset::build(
            &["1", "2", "3", "ω", "a"],
            &[("1", "2"), ("2", "3"), ("3", "ω"), ("a", "ω")],
            RelationMode::Covers,
        )
        .unwrap()
    }

    fn decl(p: &FinPoset, chain: &[&str], limit: &str) -> LimitDecl {
        LimitDecl {
            id: "c".into(),
            chain: chain.iter().map(|n| p.index_of(n).unwrap()).collect(),
            limit: p.index_of(limit).unwrap(),
        }
    }

    #[test]
    fn fig3_declaration_is_coherent() {
        let p = fig3_base();
        let d = DPoset::new(p.clone(), vec![decl(&p, &["1", "2", "3"], "ω")]).unwrap();
        d.validate().unwrap();
    }

    #[test]
    fn limit_must_bound_chain() {
        let p = fig3_base();
        let err = DPoset::new(p.clone(), vec![decl(&p, &["1", "2", "3"], "a")]).unwrap_err();
        assert!(matches!(err, DPosetError::IncoherentDeclaration { .. }));
    }

    #[test]
    fn limit_must_be_least() {
        // 1 < 2 < m < w: declaring w as sup of (1,2) skips m
        let p = FinPoset::build(
            &["1", "2", "m", "w"],
            &[("1", "2"), ("2", "m"), ("m", "w")],
            RelationMode::Covers,
        )
        .unwrap();
        let d = DPoset::new(p.clone(), vec![decl(&p, &["1", "2"], "w")]).unwrap();
        let err = d.validate().unwrap_err();
        assert!(err.to_string().contains("not above limit"), "{err}");
    }

    #[test]
    fn empty_declarations_validate() {
        DPoset::plain(fig3_base()).validate().unwrap();
    }

    #[test]
    fn sups_of_naturals_in_fig3() {
        let p = fig3_base();
        let d = DPoset::new(p.clone(), vec![decl(&p, &["1", "2", "3"], "ω")]).unwrap();
        let s = p.mask_of(&["1", "2", "3"]).unwrap();
        let sups = d.directed_sups(&s);
        let values: Vec<&str> = sups.iter().map(|(x, _)| p.name(*x)).collect();
        assert_eq!(values, vec!["1", "2", "3", "ω"]);
        assert_eq!(sups[3].1, SupWitness::Chain("c".into()));
        assert!(d.directed_sups(&p.empty()).is_empty());
    }
}
