//! Exact finite partial orders.
//!
//! The order is stored as the full relation: for every element both its
//! principal filter `↑x` and principal ideal `↓x` are kept as bit masks, so
//! every downstream query is a handful of word operations.

use std::collections::{HashMap, VecDeque};

use serde::Serialize;
use thiserror::Error;

use crate::mask::Mask;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OrderError {
    #[error("duplicate element name `{0}`")]
    DuplicateName(String),
    #[error("unknown element `{0}`")]
    UnknownElement(String),
    #[error("order relation has a cycle: {}", .0.join(" <= "))]
    AntisymmetryViolation(Vec<String>),
    #[error("relation is not transitive: {0} <= {1} <= {2} but not {0} <= {2}")]
    NotTransitive(String, String, String),
}

/// How the pair list handed to [`FinPoset::build`] is interpreted.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RelationMode {
    /// Generating pairs (typically the covering relation); the
    /// reflexive-transitive closure is taken.
    Covers,
    /// The complete order relation. Reflexive pairs may be omitted but the
    /// relation must already be transitive.
    FullRelation,
}

#[derive(Clone)]
pub struct FinPoset {
    names: Vec<String>,
    index: HashMap<String, usize>,
    up: Vec<Mask>,
    down: Vec<Mask>,
}

impl std::fmt::Debug for FinPoset {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("FinPoset")
            .field("elements", &self.names)
            .field("covers", &self.cover_pairs_named())
            .finish()
    }
}

impl PartialEq for FinPoset {
    fn eq(&self, other: &Self) -> bool {
        self.names == other.names && self.up == other.up
    }
}

impl Eq for FinPoset {}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct SemilatticeFlags {
    pub meet: bool,
    pub join: bool,
}

impl FinPoset {
    /// Builds a poset from element names and order pairs `(lo, hi)` meaning
    /// `lo <= hi`.
    pub fn build<S: AsRef<str>>(
        elements: &[S],
        pairs: &[(S, S)],
        mode: RelationMode,
    ) -> Result<FinPoset, OrderError> {
        let names: Vec<String> = elements.iter().map(|s| s.as_ref().to_string()).collect();
        let mut index = HashMap::with_capacity(names.len());
        for (i, n) in names.iter().enumerate() {
            if index.insert(n.clone(), i).is_some() {
                return Err(OrderError::DuplicateName(n.clone()));
            }
        }
        let lookup = |s: &str| {
            index
                .get(s)
                .copied()
                .ok_or_else(|| OrderError::UnknownElement(s.to_string()))
        };
        let mut idx_pairs = Vec::with_capacity(pairs.len());
        for (a, b) in pairs {
            idx_pairs.push((lookup(a.as_ref())?, lookup(b.as_ref())?));
        }
        let n = names.len();
        if mode == RelationMode::FullRelation {
            let mut rel = vec![Mask::empty(n); n];
            for i in 0..n {
                rel[i].insert(i);
            }
            for &(a, b) in &idx_pairs {
                rel[a].insert(b);
            }
            for a in 0..n {
                for b in rel[a].iter() {
                    for c in rel[b].iter() {
                        if !rel[a].contains(c) {
                            return Err(OrderError::NotTransitive(
                                names[a].clone(),
                                names[b].clone(),
                                names[c].clone(),
                            ));
                        }
                    }
                }
            }
        }
        Self::from_index_pairs(names, index, &idx_pairs)
    }

    /// Closure of index pairs over an already-validated name list.
    fn from_index_pairs(
        names: Vec<String>,
        index: HashMap<String, usize>,
        pairs: &[(usize, usize)],
    ) -> Result<FinPoset, OrderError> {
        let n = names.len();
        let mut up = vec![Mask::empty(n); n];
        for (i, m) in up.iter_mut().enumerate() {
            m.insert(i);
        }
        for &(a, b) in pairs {
            up[a].insert(b);
        }
        // Warshall on rows: after step k, up[i] is closed under paths whose
        // intermediate nodes are < k+1.
        for k in 0..n {
            let row_k = up[k].clone();
            for row in up.iter_mut() {
                if row.contains(k) {
                    row.union_with(&row_k);
                }
            }
        }
        for a in 0..n {
            for b in up[a].iter() {
                if b != a && up[b].contains(a) {
                    return Err(OrderError::AntisymmetryViolation(cycle_witness(
                        &names, pairs, a, b,
                    )));
                }
            }
        }
        let mut down = vec![Mask::empty(n); n];
        for a in 0..n {
            for b in up[a].iter() {
                down[b].insert(a);
            }
        }
        Ok(FinPoset {
            names,
            index,
            up,
            down,
        })
    }

    /// Poset on `names` with order given by a predicate on indices. The
    /// predicate must describe a partial order; only antisymmetry is checked
    /// (via closure), which is enough for internally generated structures.
    pub fn from_predicate(
        names: Vec<String>,
        leq: impl Fn(usize, usize) -> bool,
    ) -> Result<FinPoset, OrderError> {
        let mut index = HashMap::with_capacity(names.len());
        for (i, n) in names.iter().enumerate() {
            if index.insert(n.clone(), i).is_some() {
                return Err(OrderError::DuplicateName(n.clone()));
            }
        }
        let n = names.len();
        let mut pairs = Vec::new();
        for a in 0..n {
            for b in 0..n {
                if a != b && leq(a, b) {
                    pairs.push((a, b));
                }
            }
        }
        Self::from_index_pairs(names, index, &pairs)
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn name(&self, i: usize) -> &str {
        &self.names[i]
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.index.get(name).copied()
    }

    /// Resolves a list of names into a mask.
    pub fn mask_of<S: AsRef<str>>(&self, names: &[S]) -> Result<Mask, OrderError> {
        let mut m = self.empty();
        for s in names {
            let i = self
                .index_of(s.as_ref())
                .ok_or_else(|| OrderError::UnknownElement(s.as_ref().to_string()))?;
            m.insert(i);
        }
        Ok(m)
    }

    pub fn names_of(&self, m: &Mask) -> Vec<String> {
        m.iter().map(|i| self.names[i].clone()).collect()
    }

    pub fn empty(&self) -> Mask {
        Mask::empty(self.len())
    }

    pub fn full(&self) -> Mask {
        Mask::full(self.len())
    }

    #[inline]
    pub fn leq(&self, a: usize, b: usize) -> bool {
        self.up[a].contains(b)
    }

    pub fn lt(&self, a: usize, b: usize) -> bool {
        a != b && self.leq(a, b)
    }

    pub fn comparable(&self, a: usize, b: usize) -> bool {
        self.leq(a, b) || self.leq(b, a)
    }

    /// `↑x`
    pub fn up(&self, x: usize) -> &Mask {
        &self.up[x]
    }

    /// `↓x`
    pub fn down(&self, x: usize) -> &Mask {
        &self.down[x]
    }

    pub fn down_closure(&self, s: &Mask) -> Mask {
        let mut out = self.empty();
        for x in s.iter() {
            out.union_with(&self.down[x]);
        }
        out
    }

    pub fn up_closure(&self, s: &Mask) -> Mask {
        let mut out = self.empty();
        for x in s.iter() {
            out.union_with(&self.up[x]);
        }
        out
    }

    pub fn is_lower(&self, s: &Mask) -> bool {
        s.iter().all(|x| self.down[x].is_subset(s))
    }

    pub fn is_upper(&self, s: &Mask) -> bool {
        s.iter().all(|x| self.up[x].is_subset(s))
    }

    /// Elements above every member of `s` (the whole carrier for `s = ∅`).
    pub fn upper_bounds(&self, s: &Mask) -> Mask {
        let mut out = self.full();
        for x in s.iter() {
            out.intersect_with(&self.up[x]);
        }
        out
    }

    pub fn lower_bounds(&self, s: &Mask) -> Mask {
        let mut out = self.full();
        for x in s.iter() {
            out.intersect_with(&self.down[x]);
        }
        out
    }

    /// The least element of `s`, if it has one.
    pub fn least_of(&self, s: &Mask) -> Option<usize> {
        s.iter().find(|&x| s.is_subset(&self.up[x]))
    }

    pub fn greatest_of(&self, s: &Mask) -> Option<usize> {
        s.iter().find(|&x| s.is_subset(&self.down[x]))
    }

    pub fn maximal(&self, s: &Mask) -> Mask {
        let mut out = self.empty();
        for x in s.iter() {
            if self.up[x].intersection(s).count() == 1 {
                out.insert(x);
            }
        }
        out
    }

    pub fn minimal(&self, s: &Mask) -> Mask {
        let mut out = self.empty();
        for x in s.iter() {
            if self.down[x].intersection(s).count() == 1 {
                out.insert(x);
            }
        }
        out
    }

    /// Least upper bound. `sup(∅)` is the bottom element when one exists.
    pub fn sup(&self, s: &Mask) -> Option<usize> {
        self.least_of(&self.upper_bounds(s))
    }

    pub fn inf(&self, s: &Mask) -> Option<usize> {
        self.greatest_of(&self.lower_bounds(s))
    }

    pub fn bottom(&self) -> Option<usize> {
        self.least_of(&self.full())
    }

    pub fn top(&self) -> Option<usize> {
        self.greatest_of(&self.full())
    }

    /// Directedness of a finite subset.
    ///
    /// Checking pairs suffices: if every pair in `s` has an upper bound in
    /// `s`, then by induction on size every finite subset does (bound the
    /// first `k` elements by `u`, then bound `{u, x_{k+1}}`).
    pub fn is_directed(&self, s: &Mask) -> bool {
        if s.is_empty() {
            return false;
        }
        let members: Vec<usize> = s.iter().collect();
        for (i, &a) in members.iter().enumerate() {
            for &b in &members[i + 1..] {
                if !self.up[a].intersection(&self.up[b]).intersects(s) {
                    return false;
                }
            }
        }
        true
    }

    pub fn is_chain(&self, s: &Mask) -> bool {
        let members: Vec<usize> = s.iter().collect();
        members
            .iter()
            .enumerate()
            .all(|(i, &a)| members[i + 1..].iter().all(|&b| self.comparable(a, b)))
    }

    /// Smyth preorder `G ⊑ H` iff `↑H ⊆ ↑G`.
    pub fn smyth_leq(&self, g: &Mask, h: &Mask) -> bool {
        // ↑H ⊆ ↑G iff H ⊆ ↑G, since ↑G is an upper set.
        h.is_subset(&self.up_closure(g))
    }

    /// Meet/join semilattice flags. Pairs suffice: `inf{a,b,c} =
    /// inf{inf{a,b},c}` whenever the binary infima exist, and dually.
    pub fn classify_semilattice(&self) -> SemilatticeFlags {
        let n = self.len();
        let mut meet = true;
        let mut join = true;
        for a in 0..n {
            for b in a + 1..n {
                let pair = Mask::from_indices(n, [a, b]);
                if meet && self.inf(&pair).is_none() {
                    meet = false;
                }
                if join && self.sup(&pair).is_none() {
                    join = false;
                }
                if !meet && !join {
                    return SemilatticeFlags { meet, join };
                }
            }
        }
        SemilatticeFlags { meet, join }
    }

    /// Covering pairs `(a, b)`: `a < b` with nothing strictly between.
    pub fn cover_pairs(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for a in 0..self.len() {
            for b in self.up[a].iter() {
                if a == b {
                    continue;
                }
                let between = self.up[a].intersection(&self.down[b]).count();
                if between == 2 {
                    out.push((a, b));
                }
            }
        }
        out
    }

    fn cover_pairs_named(&self) -> Vec<(String, String)> {
        self.cover_pairs()
            .into_iter()
            .map(|(a, b)| (self.names[a].clone(), self.names[b].clone()))
            .collect()
    }

    /// Restriction of the order to the members of `keep`, preserving their
    /// relative index order.
    pub fn restrict(&self, keep: &Mask) -> FinPoset {
        let kept: Vec<usize> = keep.iter().collect();
        let names: Vec<String> = kept.iter().map(|&i| self.names[i].clone()).collect();
        FinPoset::from_predicate(names, |a, b| self.leq(kept[a], kept[b]))
            .expect("restriction of a partial order is a partial order")
    }

    /// Visits every lower set exactly once, stopping early when `visit`
    /// returns `false`. Returns `false` iff stopped early.
    ///
    /// Elements are decided in a linear extension (fewest predecessors
    /// first); an element may join only once its whole strict down-set has,
    /// so no branch is ever dead.
    pub fn for_each_lower_set(&self, mut visit: impl FnMut(&Mask) -> bool) -> bool {
        let mut order: Vec<usize> = (0..self.len()).collect();
        order.sort_by_key(|&i| (self.down[i].count(), i));
        let mut cur = self.empty();
        self.lower_sets_rec(&order, 0, &mut cur, &mut visit)
    }

    fn lower_sets_rec(
        &self,
        order: &[usize],
        pos: usize,
        cur: &mut Mask,
        visit: &mut impl FnMut(&Mask) -> bool,
    ) -> bool {
        if pos == order.len() {
            return visit(cur);
        }
        let e = order[pos];
        if !self.lower_sets_rec(order, pos + 1, cur, visit) {
            return false;
        }
        let mut strict = self.down[e].clone();
        strict.remove(e);
        if strict.is_subset(cur) {
            cur.insert(e);
            let go_on = self.lower_sets_rec(order, pos + 1, cur, visit);
            cur.remove(e);
            if !go_on {
                return false;
            }
        }
        true
    }

    /// All lower sets, collected. Intended for small carriers.
    pub fn lower_sets(&self) -> Vec<Mask> {
        let mut out = Vec::new();
        self.for_each_lower_set(|m| {
            out.push(m.clone());
            true
        });
        out
    }
}

/// A cycle through `a` and `b` along the generating pairs.
fn cycle_witness(names: &[String], pairs: &[(usize, usize)], a: usize, b: usize) -> Vec<String> {
    let path = |from: usize, to: usize| -> Vec<usize> {
        let n = names.len();
        let mut prev = vec![usize::MAX; n];
        let mut queue = VecDeque::from([from]);
        prev[from] = from;
        while let Some(x) = queue.pop_front() {
            if x == to {
                break;
            }
            for &(p, q) in pairs {
                if p == x && prev[q] == usize::MAX {
                    prev[q] = x;
                    queue.push_back(q);
                }
            }
        }
        let mut out = vec![to];
        let mut cur = to;
        while cur != from && prev[cur] != usize::MAX {
            cur = prev[cur];
            out.push(cur);
        }
        out.reverse();
        out
    };
    let mut cyc = path(a, b);
    let back = path(b, a);
    cyc.extend(back.into_iter().skip(1));
    cyc.into_iter().map(|i| names[i].clone()).collect()
}
