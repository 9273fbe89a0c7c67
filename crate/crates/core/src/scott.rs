//! Scott-topological operators on d-posets.
//!
//! Directed suprema are maxima of finite directed sets plus declared chain
//! limits, so every operator here reduces to bit-mask arithmetic over the
//! carrier and a scan of the declarations.
//!
//! Several operators accept an optional *tail oracle*: a mask over
//! declaration indices saying exactly which chains have their whole tail
//! inside the seed set. Without one, a tail counts as inside iff the last
//! visible chain element is.

use serde::Serialize;
use thiserror::Error;

use crate::dposet::DPoset;
use crate::mask::Mask;
use crate::order::FinPoset;

/// Default carrier cap for the brute-force closed-set oracle.
pub const ORACLE_CAP: usize = 14;

/// How `cl(A)` was reached from `↓A`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClosureTrace {
    /// `stages[0] = ↓A`; every later stage either adds triggered limits or
    /// down-closes the previous stage. The last stage is `cl(A)`.
    pub stages: Vec<Mask>,
    /// Declarations fired to produce each stage (empty for down-closures).
    pub triggers: Vec<Vec<usize>>,
}

impl ClosureTrace {
    pub fn closure(&self) -> &Mask {
        self.stages.last().expect("trace has at least one stage")
    }

    pub fn named(&self, d: &DPoset) -> Vec<TraceStage> {
        self.stages
            .iter()
            .zip(&self.triggers)
            .map(|(s, t)| TraceStage {
                elements: d.base().names_of(s),
                fired: t.iter().map(|&i| d.decls()[i].id.clone()).collect(),
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TraceStage {
    pub elements: Vec<String>,
    pub fired: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ScottError {
    #[error("carrier of {size} elements exceeds the oracle cap {cap}")]
    CarrierTooLarge { size: usize, cap: usize },
    #[error("family is not filtered: no member refines both #{0} and #{1}")]
    NotFiltered(usize, usize),
    #[error("family member #{0} is empty")]
    EmptyMember(usize),
    #[error("internal error: no directed selection for a filtered family")]
    InternalError,
}

/// Scott-closed: a lower set containing the limit of every chain whose
/// (visible) top it contains.
pub fn is_scott_closed(d: &DPoset, s: &Mask) -> bool {
    d.base().is_lower(s)
        && d.decls()
            .iter()
            .all(|c| !s.contains(c.top()) || s.contains(c.limit))
}

/// Scott-open: an upper set that every chain reaching it enters.
pub fn is_scott_open(d: &DPoset, s: &Mask) -> bool {
    d.base().is_upper(s)
        && d.decls()
            .iter()
            .all(|c| !s.contains(c.limit) || c.chain.iter().any(|&x| s.contains(x)))
}

fn fires_initially(d: &DPoset, i: usize, lower: &Mask, tails: Option<&Mask>) -> bool {
    match tails {
        Some(t) => t.contains(i),
        None => lower.contains(d.decls()[i].top()),
    }
}

pub fn scott_closure(d: &DPoset, a: &Mask) -> ClosureTrace {
    scott_closure_with(d, a, None)
}

/// Least Scott-closed superset of `a`, as a fixpoint of down-closure and
/// limit triggering.
///
/// With a tail oracle, the first round of triggers comes from the oracle. A
/// chain whose top was already in `↓a` but whose tail the oracle places
/// outside is never fired later: a genuine later trigger would come from a
/// limit above the whole chain, which already dominates its supremum.
pub fn scott_closure_with(d: &DPoset, a: &Mask, tails: Option<&Mask>) -> ClosureTrace {
    let p = d.base();
    let first = p.down_closure(a);
    let mut fired = Mask::empty(d.decls().len());
    let mut stages = vec![first.clone()];
    let mut triggers = vec![Vec::new()];
    let mut cur = first.clone();
    let mut round = 0usize;
    loop {
        let mut new_limits = Vec::new();
        let mut next = cur.clone();
        for (i, c) in d.decls().iter().enumerate() {
            if fired.contains(i) {
                continue;
            }
            let fire = if round == 0 {
                fires_initially(d, i, &first, tails)
            } else {
                let suppressed = tails.is_some_and(|t| !t.contains(i) && first.contains(c.top()));
                cur.contains(c.top()) && !suppressed
            };
            if fire {
                fired.insert(i);
                if !cur.contains(c.limit) {
                    next.insert(c.limit);
                    new_limits.push(i);
                }
            }
        }
        round += 1;
        if new_limits.is_empty() {
            if round == 1 {
                continue;
            }
            break;
        }
        stages.push(next.clone());
        triggers.push(new_limits);
        let closed = p.down_closure(&next);
        if closed != next {
            stages.push(closed.clone());
            triggers.push(Vec::new());
        }
        cur = closed;
    }
    ClosureTrace { stages, triggers }
}

/// `A′`: suprema of directed subsets of `↓A`.
pub fn one_step_set(d: &DPoset, a: &Mask) -> Mask {
    one_step_set_with(d, a, None)
}

pub fn one_step_set_with(d: &DPoset, a: &Mask, tails: Option<&Mask>) -> Mask {
    let lower = d.base().down_closure(a);
    let mut out = lower.clone();
    for (i, c) in d.decls().iter().enumerate() {
        if fires_initially(d, i, &lower, tails) {
            out.insert(c.limit);
        }
    }
    out
}

/// `A″ = ↓(A′)`: everything below a directed supremum from `↓A`.
pub fn weak_one_step_set(d: &DPoset, a: &Mask) -> Mask {
    weak_one_step_set_with(d, a, None)
}

pub fn weak_one_step_set_with(d: &DPoset, a: &Mask, tails: Option<&Mask>) -> Mask {
    d.base().down_closure(&one_step_set_with(d, a, tails))
}

/// `G ≪ y`.
///
/// Directed sets come in two kinds. A finite directed set has a maximum
/// `m`, and `m ≥ y` forces `m ∈ ↑G`; taking `D = {y}` shows this is
/// equivalent to `y ∈ ↑G`, i.e. `G ⊑ {y}` in the Smyth preorder. A declared
/// chain with limit `ℓ ≥ y` must meet `↑G`; since `↑G` is upper, that
/// happens iff the visible top of the chain is in `↑G`.
pub fn way_below_set(d: &DPoset, g: &Mask, y: usize) -> bool {
    let up_g = d.base().up_closure(g);
    up_g.contains(y)
        && d.decls()
            .iter()
            .filter(|c| d.base().leq(y, c.limit))
            .all(|c| up_g.contains(c.top()))
}

pub fn way_below(d: &DPoset, x: usize, y: usize) -> bool {
    way_below_set(d, &Mask::singleton(d.len(), x), y)
}

/// `x ≪_w y`: every directed set with supremum exactly `y` meets `↑x`.
pub fn weakly_way_below(d: &DPoset, x: usize, y: usize) -> bool {
    let p = d.base();
    p.leq(x, y)
        && d.decls()
            .iter()
            .filter(|c| c.limit == y)
            .all(|c| p.leq(x, c.top()))
}

/// `⇓y`
pub fn way_below_down(d: &DPoset, y: usize) -> Mask {
    let mut out = d.base().empty();
    for x in d.base().down(y).iter() {
        if way_below(d, x, y) {
            out.insert(x);
        }
    }
    out
}

/// `⇓_w y`
pub fn weakly_way_below_down(d: &DPoset, y: usize) -> Mask {
    let mut out = d.base().empty();
    for x in d.base().down(y).iter() {
        if weakly_way_below(d, x, y) {
            out.insert(x);
        }
    }
    out
}

/// All `⊆`-minimal finite `F ⊆ candidates` with `|F| ≤ size_bound` and
/// `F ≪ x`, sorted.
///
/// `F ≪ x` is a covering condition: some member must lie below `x`, and for
/// every chain whose limit is above `x` some member must lie below its
/// visible top. The search branches on the requirement with the fewest
/// covering candidates, so every minimal cover is reached.
pub fn fin_family(d: &DPoset, x: usize, size_bound: usize, candidates: &Mask) -> Vec<Mask> {
    assert!(size_bound >= 1, "size bound must be positive");
    let p = d.base();
    let mut reqs: Vec<Mask> = vec![p.down(x).intersection(candidates)];
    for c in d.decls() {
        if p.leq(x, c.limit) {
            let cover = p.down(c.top()).intersection(candidates);
            if !reqs.contains(&cover) {
                reqs.push(cover);
            }
        }
    }
    if reqs.iter().any(|r| r.is_empty()) {
        return Vec::new();
    }
    let mut found: Vec<Vec<usize>> = Vec::new();
    let mut chosen = Vec::new();
    cover_search(&reqs, size_bound, &mut chosen, &mut found);
    found.sort();
    found.dedup();
    let is_cover = |f: &[usize]| reqs.iter().all(|r| f.iter().any(|&e| r.contains(e)));
    let n = d.len();
    found
        .into_iter()
        .filter(|f| {
            (0..f.len()).all(|skip| {
                let rest: Vec<usize> = f
                    .iter()
                    .enumerate()
                    .filter(|&(i, _)| i != skip)
                    .map(|(_, &e)| e)
                    .collect();
                !is_cover(&rest)
            })
        })
        .map(|f| Mask::from_indices(n, f))
        .collect()
}

fn cover_search(reqs: &[Mask], bound: usize, chosen: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
    let open = reqs
        .iter()
        .filter(|r| !chosen.iter().any(|&e| r.contains(e)))
        .min_by_key(|r| r.count());
    match open {
        None => {
            let mut f = chosen.clone();
            f.sort_unstable();
            out.push(f);
        }
        Some(r) if chosen.len() < bound => {
            for e in r.iter() {
                chosen.push(e);
                cover_search(reqs, bound, chosen, out);
                chosen.pop();
            }
        }
        Some(_) => {}
    }
}

/// Brute-force list of all Scott-closed sets, for small carriers.
pub fn enumerate_scott_closed(d: &DPoset, cap: usize) -> Result<Vec<Mask>, ScottError> {
    if d.len() > cap {
        return Err(ScottError::CarrierTooLarge {
            size: d.len(),
            cap,
        });
    }
    let mut out = Vec::new();
    d.base().for_each_lower_set(|s| {
        if is_scott_closed(d, s) {
            out.push(s.clone());
        }
        true
    });
    Ok(out)
}

/// Directed selection from a Smyth-filtered family of nonempty finite sets:
/// a directed `D ⊆ ⋃family` meeting every member.
///
/// A finite directed set has a maximum `m`, so a selection exists iff some
/// `m ∈ ⋃family` has a member of every set below it; `D` is then `m`
/// together with one such member per set. Candidates are tried in
/// canonical name order.
pub fn rudin_select(p: &FinPoset, family: &[Mask]) -> Result<Mask, ScottError> {
    if let Some(i) = family.iter().position(|f| f.is_empty()) {
        return Err(ScottError::EmptyMember(i));
    }
    let ups: Vec<Mask> = family.iter().map(|f| p.up_closure(f)).collect();
    for i in 0..family.len() {
        for j in i + 1..family.len() {
            let both = ups[i].intersection(&ups[j]);
            if !family.iter().any(|h| h.is_subset(&both)) {
                return Err(ScottError::NotFiltered(i, j));
            }
        }
    }
    let mut pool = p.empty();
    for f in family {
        pool.union_with(f);
    }
    let mut order: Vec<usize> = pool.iter().collect();
    order.sort_by(|&a, &b| p.name(a).cmp(p.name(b)));
    'candidates: for &m in &order {
        let mut sel = Mask::singleton(p.len(), m);
        for f in family {
            let below = f.intersection(p.down(m));
            let pick = below.iter().min_by(|&a, &b| p.name(a).cmp(p.name(b)));
            match pick {
                Some(e) => {
                    sel.insert(e);
                }
                None => continue 'candidates,
            }
        }
        return Ok(sel);
    }
    Err(ScottError::InternalError)
}
