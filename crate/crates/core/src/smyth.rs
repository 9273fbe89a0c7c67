//! Finite T0 spaces and their Smyth powerdomains.
//!
//! Subsets of a space are `u64` bit sets, so spaces have at most 64 points
//! (the exhaustive sweeps stay far below that). In a finite space every
//! subset is compact and every saturated set is open, which is what makes
//! the checks below finite.

use std::collections::BTreeSet;

use serde::Serialize;
use thiserror::Error;

use crate::dposet::DPoset;
use crate::mask::Mask;
use crate::order::FinPoset;
use crate::scott::{one_step_set, scott_closure};

/// Why the Smyth powerdomain of the Sorgenfrey line is out of reach here.
pub const SORGENFREY_NOTE: &str = "Q(ℝ_l) is not constructed: a finite Hausdorff space is discrete, so \
     a non-continuous Q(X) with one-step closure cannot arise from a finite space. \
     Only the finite mechanism is checked: upper Vietoris = Scott on Q(X), boxes determine opens, \
     the directed family reaching each K ∈ cl(A), and one-step closure of Q(X).";

pub type Subset = u64;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SmythError {
    #[error("spaces are limited to 64 points, got {0}")]
    TooManyPoints(usize),
    #[error("opens must contain the empty set and the whole space")]
    MissingTrivialOpens,
    #[error("opens are not closed under {op} ({a:#b}, {b:#b})")]
    NotClosed { op: &'static str, a: Subset, b: Subset },
    #[error("points {0} and {1} are not separated by any open set")]
    NotT0(String, String),
    #[error("open set {0:#b} mentions a point outside the space")]
    OutOfRange(Subset),
    #[error("K is not in the closure of the family")]
    PreconditionFailed,
}

fn full_set(n: usize) -> Subset {
    if n == 64 {
        u64::MAX
    } else {
        (1u64 << n) - 1
    }
}

fn bits(s: Subset) -> impl Iterator<Item = usize> {
    (0..64).filter(move |i| s >> i & 1 == 1)
}

fn subset(a: Subset, b: Subset) -> bool {
    a & !b == 0
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FiniteSpace {
    names: Vec<String>,
    /// Sorted, deduplicated.
    opens: Vec<Subset>,
}

impl FiniteSpace {
    pub fn new(names: Vec<String>, opens: impl IntoIterator<Item = Subset>) -> Result<Self, SmythError> {
        let n = names.len();
        if n > 64 {
            return Err(SmythError::TooManyPoints(n));
        }
        let full = full_set(n);
        let opens: BTreeSet<Subset> = opens.into_iter().collect();
        if let Some(&bad) = opens.iter().find(|&&u| !subset(u, full)) {
            return Err(SmythError::OutOfRange(bad));
        }
        if !opens.contains(&0) || !opens.contains(&full) {
            return Err(SmythError::MissingTrivialOpens);
        }
        for &a in &opens {
            for &b in &opens {
                if !opens.contains(&(a | b)) {
                    return Err(SmythError::NotClosed { op: "union", a, b });
                }
                if !opens.contains(&(a & b)) {
                    return Err(SmythError::NotClosed { op: "intersection", a, b });
                }
            }
        }
        let space = FiniteSpace {
            names,
            opens: opens.into_iter().collect(),
        };
        for x in 0..n {
            for y in x + 1..n {
                if space.opens.iter().all(|&u| (u >> x & 1) == (u >> y & 1)) {
                    return Err(SmythError::NotT0(space.names[x].clone(), space.names[y].clone()));
                }
            }
        }
        Ok(space)
    }

    /// The topology generated by `subbasis` (closed under finite
    /// intersections and unions, plus `∅` and the whole space).
    pub fn generated(names: Vec<String>, subbasis: &[Subset]) -> Result<Self, SmythError> {
        let full = full_set(names.len());
        let mut opens: BTreeSet<Subset> = subbasis.iter().copied().collect();
        opens.insert(0);
        opens.insert(full);
        loop {
            let cur: Vec<Subset> = opens.iter().copied().collect();
            let before = opens.len();
            for &a in &cur {
                for &b in &cur {
                    opens.insert(a | b);
                    opens.insert(a & b);
                }
            }
            if opens.len() == before {
                break;
            }
        }
        FiniteSpace::new(names, opens)
    }

    /// Opens are the upper sets of `p`.
    pub fn alexandrov(p: &FinPoset) -> Result<Self, SmythError> {
        if p.len() > 64 {
            return Err(SmythError::TooManyPoints(p.len()));
        }
        let opens = p
            .lower_sets()
            .into_iter()
            .map(|l| to_subset(&l.complement()));
        FiniteSpace::new(p.names().to_vec(), opens)
    }

    pub fn discrete(n: usize) -> Self {
        let names = (0..n).map(|i| format!("p{i}")).collect();
        FiniteSpace::new(names, 0..=full_set(n)).expect("discrete topology")
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

    pub fn opens(&self) -> &[Subset] {
        &self.opens
    }

    pub fn full(&self) -> Subset {
        full_set(self.len())
    }

    pub fn is_open(&self, s: Subset) -> bool {
        self.opens.binary_search(&s).is_ok()
    }

    /// Intersection of all opens containing `s`.
    pub fn saturation(&self, s: Subset) -> Subset {
        self.opens
            .iter()
            .filter(|&&u| subset(s, u))
            .fold(self.full(), |acc, &u| acc & u)
    }

    pub fn is_saturated(&self, s: Subset) -> bool {
        self.saturation(s) == s
    }

    /// `x ⊑ y` iff every open containing `x` contains `y`.
    pub fn specialization(&self) -> FinPoset {
        let sat: Vec<Subset> = (0..self.len()).map(|x| self.saturation(1 << x)).collect();
        FinPoset::from_predicate(self.names.clone(), |x, y| sat[x] >> y & 1 == 1).expect("T0 gives a partial order")
    }

    /// Every saturated subset (including `∅`), in increasing bit order.
    pub fn saturated_sets(&self) -> Vec<Subset> {
        // saturated sets are the opens: finite intersections of opens are open
        self.opens.clone()
    }

    pub fn render(&self, s: Subset) -> String {
        if s == 0 {
            return "∅".into();
        }
        let members: Vec<&str> = bits(s).map(|i| self.names[i].as_str()).collect();
        format!("{{{}}}", members.join(","))
    }
}

fn to_subset(m: &Mask) -> Subset {
    m.iter().fold(0, |acc, i| acc | 1 << i)
}

fn permute(s: Subset, perm: &[usize]) -> Subset {
    bits(s).fold(0, |acc, i| acc | 1 << perm[i])
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for pos in 0..=p.len() {
            let mut q = p.clone();
            q.insert(pos, n - 1);
            out.push(q);
        }
    }
    out
}

/// One representative of every T0 topology on `n ≤ 4` points up to
/// homeomorphism, by brute force over families of proper subsets.
pub fn enumerate_t0_topologies(n: usize) -> Vec<FiniteSpace> {
    assert!(n <= 4, "brute-force enumeration is limited to 4 points");
    let full = full_set(n);
    let proper: Vec<Subset> = (1..full).collect();
    let perms = permutations(n);
    let names: Vec<String> = (0..n).map(|i| format!("p{i}")).collect();
    let mut seen: BTreeSet<Vec<Subset>> = BTreeSet::new();
    let mut out = Vec::new();
    for choice in 0u64..(1u64 << proper.len()) {
        let mut opens: Vec<Subset> = vec![0, full];
        opens.extend(bits(choice).map(|i| proper[i]));
        let Ok(space) = FiniteSpace::new(names.clone(), opens) else {
            continue;
        };
        let canon = perms
            .iter()
            .map(|p| {
                let mut v: Vec<Subset> = space.opens.iter().map(|&u| permute(u, p)).collect();
                v.sort_unstable();
                v
            })
            .min()
            .unwrap();
        if seen.insert(canon) {
            out.push(space);
        }
    }
    out
}

/// `(Q(X), ⊇)` with its upper Vietoris topology.
#[derive(Debug, Clone)]
pub struct QSpace {
    pub space: FiniteSpace,
    /// Carrier: saturated sets, indexed as in `poset`.
    pub sets: Vec<Subset>,
    /// `K ≤ H` iff `K ⊇ H`.
    pub poset: FinPoset,
    /// Upper Vietoris opens as masks over `sets`.
    pub vietoris: Vec<Mask>,
}

pub fn build_qspace(x: &FiniteSpace, include_empty: bool) -> QSpace {
    let sets: Vec<Subset> = x
        .saturated_sets()
        .into_iter()
        .filter(|&k| include_empty || k != 0)
        .collect();
    let names = sets.iter().map(|&k| x.render(k)).collect();
    let poset = FinPoset::from_predicate(names, |a, b| subset(sets[b], sets[a])).expect("⊇ is a partial order");
    let boxes: BTreeSet<Mask> = x.opens().iter().map(|&u| box_of(&sets, u)).collect();
    let mut opens = boxes.clone();
    opens.insert(Mask::empty(sets.len()));
    loop {
        let cur: Vec<Mask> = opens.iter().cloned().collect();
        let before = opens.len();
        for a in &cur {
            for b in &boxes {
                opens.insert(a.union(b));
            }
        }
        if opens.len() == before {
            break;
        }
    }
    QSpace {
        space: x.clone(),
        sets,
        poset,
        vietoris: opens.into_iter().collect(),
    }
}

/// `□U = {K : K ⊆ U}`
fn box_of(sets: &[Subset], u: Subset) -> Mask {
    Mask::from_indices(sets.len(), (0..sets.len()).filter(|&i| subset(sets[i], u)))
}

impl QSpace {
    pub fn box_of(&self, u: Subset) -> Mask {
        box_of(&self.sets, u)
    }

    pub fn index_of(&self, k: Subset) -> Option<usize> {
        self.sets.iter().position(|&s| s == k)
    }

    /// Scott opens of the finite poset `(Q, ⊇)`: its upper sets.
    pub fn scott_opens(&self) -> Vec<Mask> {
        let mut v: Vec<Mask> = self
            .poset
            .lower_sets()
            .into_iter()
            .map(|l| l.complement())
            .collect();
        v.sort();
        v
    }
}

/// Compares the upper Vietoris topology with the Scott topology on
/// `(Q, ⊇)`; on mismatch returns a set open in exactly one of them.
pub fn vietoris_equals_scott(q: &QSpace) -> Result<(), Mask> {
    let scott = q.scott_opens();
    let vietoris: BTreeSet<&Mask> = q.vietoris.iter().collect();
    if let Some(m) = scott.iter().find(|m| !vietoris.contains(m)) {
        return Err(m.clone());
    }
    let scott: BTreeSet<&Mask> = scott.iter().collect();
    match q.vietoris.iter().find(|m| !scott.contains(m)) {
        Some(m) => Err(m.clone()),
        None => Ok(()),
    }
}

/// `□U ⊆ □V ⟹ U ⊆ V` for all opens.
pub fn claim1_check(x: &FiniteSpace) -> bool {
    let sets = x.saturated_sets();
    x.opens().iter().all(|&u| {
        x.opens().iter().all(|&v| {
            let boxed = box_of(&sets, u).is_subset(&box_of(&sets, v));
            !boxed || subset(u, v)
        })
    })
}

/// The directed family built in the one-step argument for `K ∈ cl(A)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Claim3Witness {
    /// Decreasing opens `U_1 ⊇ U_2 ⊇ ...` ending at `K`.
    pub neighborhoods: Vec<Subset>,
    /// `K_n ∈ □U_n ∩ A`.
    pub picks: Vec<Subset>,
    /// `Q_n = K ∪ ⋃_{m ≥ n} K_m`.
    pub chain: Vec<Subset>,
}

/// Runs the one-step construction for `K ∈ cl(A)` in `(Q(X), ⊇)` and
/// verifies every step: each `Q_n` is saturated, the `Q_n` decrease (so form
/// a directed set under `⊇`), `Q_n ⊇ K_n ∈ A`, and `⋂ Q_n = K`.
pub fn claim3_check(x: &FiniteSpace, k: Subset, a: &[Subset]) -> Result<Claim3Witness, SmythError> {
    // in a finite poset the Scott closure of A is ↓A; under ⊇ that means
    // K contains some member of A
    if !x.is_saturated(k) || !a.iter().any(|&m| subset(m, k)) {
        return Err(SmythError::PreconditionFailed);
    }
    let spec = x.specialization();
    // shrink X to K one minimal point at a time; each stage stays an upper set
    let mut neighborhoods = vec![x.full()];
    let mut u = x.full();
    while u != k {
        let outside = u & !k;
        let minimal = bits(outside)
            .find(|&p| bits(outside).all(|q| q == p || !spec.leq(q, p)))
            .expect("finite sets have minimal points");
        u &= !(1 << minimal);
        neighborhoods.push(u);
    }
    let picks: Vec<Subset> = neighborhoods
        .iter()
        .map(|&un| *a.iter().find(|&&m| subset(m, un)).expect("K's own neighborhood is met"))
        .collect();
    let chain: Vec<Subset> = (0..picks.len())
        .map(|n| picks[n..].iter().fold(k, |acc, &m| acc | m))
        .collect();
    let saturated = chain.iter().all(|&q| x.is_saturated(q));
    let decreasing = chain.windows(2).all(|w| subset(w[1], w[0]));
    let below_a = chain.iter().zip(&picks).all(|(&q, &m)| subset(m, q));
    let meet = chain.iter().fold(x.full(), |acc, &q| acc & q);
    let sequence_ok = neighborhoods.iter().zip(&picks).all(|(&un, &m)| subset(m, un));
    if saturated && decreasing && below_a && meet == k && sequence_ok {
        Ok(Claim3Witness {
            neighborhoods,
            picks,
            chain,
        })
    } else {
        Err(SmythError::PreconditionFailed)
    }
}

/// `cl(A) = A′` for every lower set `A` of `(Q(X), ⊇)`.
pub fn q_one_step(x: &FiniteSpace) -> bool {
    let q = build_qspace(x, true);
    let d = DPoset::plain(q.poset.clone());
    q.poset.for_each_lower_set(|a| scott_closure(&d, a).closure() == &one_step_set(&d, a))
}

/// For every filtered family `C` of saturated sets and open `U ⊇ ⋂C`,
/// some member of `C` lies in `U`. Exhaustive over families, so only for
/// spaces with few saturated sets.
pub fn well_filtered_check(x: &FiniteSpace) -> bool {
    let sets = x.saturated_sets();
    assert!(sets.len() <= 20, "too many saturated sets for an exhaustive sweep");
    for fam in 1u64..(1u64 << sets.len()) {
        let members: Vec<Subset> = bits(fam).map(|i| sets[i]).collect();
        let filtered = members.iter().all(|&k1| {
            members
                .iter()
                .all(|&k2| members.iter().any(|&k3| subset(k3, k1 & k2)))
        });
        if !filtered {
            continue;
        }
        let meet = members.iter().fold(x.full(), |acc, &k| acc & k);
        for &u in x.opens() {
            if subset(meet, u) && !members.iter().any(|&k| subset(k, u)) {
                return false;
            }
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::order::RelationMode;

    fn two_chain() -> FiniteSpace {
        let p = FinPoset::build(&["b", "t"], &[("b", "t")], RelationMode::Covers).unwrap();
        FiniteSpace::alexandrov(&p).unwrap()
    }

    #[test]
    fn t0_counts() {
        let counts: Vec<usize> = (1..=4).map(|n| enumerate_t0_topologies(n).len()).collect();
        assert_eq!(counts, vec![1, 2, 5, 16]);
    }

    #[test]
    fn saturation_is_up_closure() {
        let x = two_chain();
        assert_eq!(x.saturation(0b01), 0b11);
        assert_eq!(x.saturation(0b10), 0b10);
        assert_eq!(x.saturation(x.full()), x.full());
        let d = FiniteSpace::discrete(3);
        for s in 0..8 {
            assert_eq!(d.saturation(s), s);
        }
    }

    #[test]
    fn qspace_of_small_spaces() {
        let one = FiniteSpace::discrete(1);
        assert_eq!(build_qspace(&one, true).sets.len(), 2);
        let q = build_qspace(&two_chain(), true);
        let names: Vec<&str> = q.poset.names().iter().map(|s| s.as_str()).collect();
        assert_eq!(names, vec!["∅", "{t}", "{b,t}"]);
        assert!(q.poset.leq(2, 1) && q.poset.leq(1, 0));
        assert_eq!(build_qspace(&FiniteSpace::discrete(2), true).sets.len(), 4);
        assert_eq!(build_qspace(&two_chain(), false).sets.len(), 2);
    }

    #[test]
    fn rejects_non_topologies() {
        let names = vec!["a".to_string(), "b".to_string()];
        assert_eq!(
            FiniteSpace::new(names.clone(), [0, 0b11]),
            Err(SmythError::NotT0("a".into(), "b".into()))
        );
        assert_eq!(
            FiniteSpace::new(names.clone(), [0, 0b01]),
            Err(SmythError::MissingTrivialOpens)
        );
        let three: Vec<String> = ["a", "b", "c"].map(String::from).to_vec();
        assert!(matches!(
            FiniteSpace::new(three, [0, 0b001, 0b010, 0b111]),
            Err(SmythError::NotClosed { op: "union", .. })
        ));
        assert_eq!(FiniteSpace::new(names, [0, 0b111]), Err(SmythError::OutOfRange(0b111)));
    }

    #[test]
    fn claim3_on_two_chain() {
        let x = two_chain();
        let w = claim3_check(&x, 0b10, &[0b11]);
        // {b,t} ⊄ {t}: K = {t} is not in the closure of {X}
        assert_eq!(w, Err(SmythError::PreconditionFailed));
        let w = claim3_check(&x, 0b11, &[0b10]).unwrap();
        assert_eq!(*w.chain.last().unwrap(), 0b11);
        let w = claim3_check(&x, 0b10, &[0b10]).unwrap();
        assert!(w.chain.iter().all(|&q| q == 0b10));
    }

    #[test]
    fn sorgenfrey_note_mentions_the_limitation() {
        assert!(SORGENFREY_NOTE.contains("not constructed"));
    }
}
