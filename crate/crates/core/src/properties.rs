//! Property checkers over truncation families.
//!
//! Every checker is a per-level test run through [`stabilize`], so the same
//! code path yields `Holds`, `Fails` with a named witness, or `Unstable`.

use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;
use std::time::Instant;

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::dposet::DPoset;
use crate::family::{FamilyError, Level, TruncationFamily};
use crate::mask::Mask;
use crate::scott::{
    fin_family, one_step_set, one_step_set_with, scott_closure, scott_closure_with,
    way_below_down, weak_one_step_set_with, weakly_way_below_down,
};
use crate::verdict::{
    eval_ctx, stabilize, EvalCtx, LevelOutcome, Mode, StabilizeError, Verdict, Witness,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Property {
    WeakOneStep,
    OneStep,
    MeetContinuous,
    Continuous,
    Quasicontinuous,
    Exact,
    /// `D′` is a lower set for every directed `D`.
    DPrimeLower,
    /// `A′` is a lower set for every `A`.
    APrimeLower,
}

impl Property {
    pub const ALL: [Property; 8] = [
        Property::WeakOneStep,
        Property::OneStep,
        Property::MeetContinuous,
        Property::Continuous,
        Property::Quasicontinuous,
        Property::Exact,
        Property::DPrimeLower,
        Property::APrimeLower,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Property::WeakOneStep => "weak-one-step",
            Property::OneStep => "one-step",
            Property::MeetContinuous => "meet-continuous",
            Property::Continuous => "continuous",
            Property::Quasicontinuous => "quasicontinuous",
            Property::Exact => "exact",
            Property::DPrimeLower => "dprime-lower",
            Property::APrimeLower => "aprime-lower",
        }
    }
}

impl fmt::Display for Property {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unknown property `{0}`")]
pub struct UnknownProperty(pub String);

impl FromStr for Property {
    type Err = UnknownProperty;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Property::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| UnknownProperty(s.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CheckConfig {
    pub levels: Vec<usize>,
    pub guard: usize,
    /// Largest `|F|` searched when building `fin(x)`.
    pub max_f_size: usize,
    /// Sampled lower sets per level when enumeration is out of reach.
    pub samples: usize,
    pub seed: u64,
    /// Enumerate every lower set when at most this many inputs are quantified.
    pub exhaustive_cap: usize,
    /// Push the window out by doubling, up to this level, while unstable.
    pub escalation_cap: Option<usize>,
}

impl Default for CheckConfig {
    fn default() -> Self {
        CheckConfig {
            levels: vec![4, 8, 16],
            guard: 1,
            max_f_size: 3,
            samples: 1000,
            seed: 0,
            exhaustive_cap: 12,
            escalation_cap: None,
        }
    }
}

#[derive(Debug, Error)]
pub enum PropertyError {
    #[error(transparent)]
    Stabilize(#[from] StabilizeError),
    #[error(transparent)]
    Family(#[from] FamilyError),
    #[error("witness does not name a test input: {0}")]
    BadWitness(String),
}

#[derive(Debug, Clone, Serialize)]
pub struct PropertyReport {
    pub property: Property,
    pub family: String,
    pub verdict: Verdict,
    pub levels: Vec<usize>,
    pub guard: usize,
    /// Caveats attached to the verdict, e.g. search bounds.
    pub notes: Vec<String>,
    pub millis: u128,
}

/// A lower set offered to the set-quantified checkers.
#[derive(Debug, Clone)]
pub struct TestSet {
    pub name: String,
    pub members: Mask,
    /// Exact chain-tail membership, when known (schema sets only).
    pub tails: Option<Mask>,
}

fn tails_mask(d: &DPoset, ids: &[String]) -> Mask {
    let mut m = Mask::empty(d.decls().len());
    for id in ids {
        if let Some(i) = d.decl_by_id(id) {
            m.insert(i);
        }
    }
    m
}

/// Canonical name of `↓gens`.
pub fn generated_name(d: &DPoset, gens: &Mask) -> String {
    if gens.is_empty() {
        return "∅".into();
    }
    format!("↓[{}]", d.base().names_of(gens).join("; "))
}

fn parse_generated(d: &DPoset, name: &str) -> Option<Mask> {
    if name == "∅" {
        return Some(d.base().empty());
    }
    let inner = name.strip_prefix("↓[")?.strip_suffix(']')?;
    let names: Vec<&str> = inner.split("; ").collect();
    d.base().mask_of(&names).ok().map(|g| d.base().down_closure(&g))
}

/// Looks a test set up by name: a schema set, or `↓[...]` / `∅`.
/// Returns the lower set and its tail oracle, if any.
pub fn resolve_test_set(level: &Level, name: &str) -> Option<(Mask, Option<Mask>)> {
    let d = &level.dposet;
    match level.schema_set(name) {
        Some(s) => Some((
            d.base().down_closure(&s.members),
            Some(tails_mask(d, &s.tails_inside)),
        )),
        None => parse_generated(d, name).map(|m| (m, None)),
    }
}

/// Schema sets first (in declaration order), then generic lower sets
/// generated by quantified antichains: all of them when few enough inputs
/// are quantified, a seeded sample otherwise.
pub fn test_sets(ctx: &EvalCtx, cfg: &CheckConfig) -> Vec<TestSet> {
    let d = &ctx.level.dposet;
    let p = d.base();
    let mut out: Vec<TestSet> = ctx
        .schema_sets()
        .map(|s| TestSet {
            name: s.name.clone(),
            members: p.down_closure(&s.members),
            tails: Some(tails_mask(d, &s.tails_inside)),
        })
        .collect();
    let q: Vec<usize> = ctx.quantified.iter().collect();
    let mut seen = HashSet::new();
    let mut push = |gens: Mask, out: &mut Vec<TestSet>| {
        let gens = p.maximal(&gens);
        let members = p.down_closure(&gens);
        if seen.insert(members.clone()) {
            out.push(TestSet {
                name: generated_name(d, &gens),
                members,
                tails: None,
            });
        }
    };
    if q.len() <= cfg.exhaustive_cap.min(24) {
        for bits in 0u64..(1u64 << q.len()) {
            let picked = Mask::from_indices(p.len(), (0..q.len()).filter(|i| bits >> i & 1 == 1).map(|i| q[i]));
            if p.maximal(&picked) == picked {
                push(picked, &mut out);
            }
        }
    } else {
        let mode_bit = matches!(ctx.mode, Mode::Guarded) as u64;
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ ((ctx.n() as u64) << 8) ^ mode_bit);
        for _ in 0..cfg.samples {
            let k = rng.gen_range(1..=q.len().min(3));
            let picked = sample(&mut rng, q.len(), k).into_iter().map(|i| q[i]);
            push(Mask::from_indices(p.len(), picked), &mut out);
        }
    }
    out
}

fn first_quantified(ctx: &EvalCtx, m: &Mask) -> Option<usize> {
    m.intersection(&ctx.quantified).first()
}

fn fail_at(ctx: &EvalCtx) -> Witness {
    Witness::new(ctx.n())
}

fn name(ctx: &EvalCtx, i: usize) -> String {
    ctx.level.dposet.base().name(i).to_string()
}

/// `x ∈ cl(A) \ A″` for the given test set, if any.
fn weak_gap(ctx: &EvalCtx, t: &TestSet) -> Option<usize> {
    let d = &ctx.level.dposet;
    let cl = scott_closure_with(d, &t.members, t.tails.as_ref());
    let target = weak_one_step_set_with(d, &t.members, t.tails.as_ref());
    first_quantified(ctx, &cl.closure().difference(&target))
}

fn one_step_gap(ctx: &EvalCtx, t: &TestSet) -> Option<usize> {
    let d = &ctx.level.dposet;
    let cl = scott_closure_with(d, &t.members, t.tails.as_ref());
    let target = one_step_set_with(d, &t.members, t.tails.as_ref());
    first_quantified(ctx, &cl.closure().difference(&target))
}

/// An element of `↓A′ \ A′`.
fn aprime_gap(ctx: &EvalCtx, t: &TestSet) -> Option<usize> {
    let d = &ctx.level.dposet;
    let a1 = one_step_set_with(d, &t.members, t.tails.as_ref());
    first_quantified(ctx, &d.base().down_closure(&a1).difference(&a1))
}

fn set_check(ctx: &EvalCtx, cfg: &CheckConfig, gap: fn(&EvalCtx, &TestSet) -> Option<usize>) -> LevelOutcome {
    for t in test_sets(ctx, cfg) {
        if let Some(x) = gap(ctx, &t) {
            return LevelOutcome::Fail(fail_at(ctx).with("A", t.name).with("x", name(ctx, x)));
        }
    }
    LevelOutcome::Pass
}

/// Declarations whose chain starts inside the quantified region.
fn quantified_decls<'a>(ctx: &'a EvalCtx) -> impl Iterator<Item = usize> + 'a {
    let d = &ctx.level.dposet;
    (0..d.decls().len()).filter(move |&i| ctx.quantified.contains(d.decls()[i].chain[0]))
}

/// `x ≤ ℓ` but `x ∉ cl(↓C ∩ ↓x)`.
fn meet_gap(d: &DPoset, decl: usize, x: usize) -> bool {
    let p = d.base();
    let c = &d.decls()[decl];
    if !p.leq(x, c.limit) {
        return false;
    }
    let s = p.down(c.top()).intersection(p.down(x));
    !scott_closure(d, &s).closure().contains(x)
}

fn meet_check(ctx: &EvalCtx) -> LevelOutcome {
    let d = &ctx.level.dposet;
    for i in quantified_decls(ctx) {
        for x in ctx.quantified.iter() {
            if meet_gap(d, i, x) {
                return LevelOutcome::Fail(
                    fail_at(ctx)
                        .with("D", d.decls()[i].id.clone())
                        .with("x", name(ctx, x)),
                );
            }
        }
    }
    LevelOutcome::Pass
}

/// Why `approx` fails to be a directed set with supremum `x`, if it does.
fn approximation_defect(d: &DPoset, approx: &Mask, x: usize) -> Option<&'static str> {
    let p = d.base();
    if approx.is_empty() {
        return Some("empty");
    }
    if !p.is_directed(approx) {
        return Some("not directed");
    }
    let sup_is_x = approx.contains(x)
        || d
            .decls()
            .iter()
            .any(|c| c.limit == x && approx.contains(c.top()));
    if sup_is_x {
        None
    } else {
        Some("supremum below x")
    }
}

fn approximation_check(ctx: &EvalCtx, down: fn(&DPoset, usize) -> Mask) -> LevelOutcome {
    let d = &ctx.level.dposet;
    for x in ctx.quantified.iter() {
        if let Some(why) = approximation_defect(d, &down(d, x), x) {
            return LevelOutcome::Fail(fail_at(ctx).with("x", name(ctx, x)).with("reason", why));
        }
    }
    LevelOutcome::Pass
}

/// Why `fin(x)` fails to witness quasicontinuity at `x`, if it does.
///
/// `F` ranges over the whole window; the intersection `⋂↑F` is compared
/// with `↑x` on `interior` only, since elements near the edge still lie
/// above members that have no finer replacement inside the window.
pub fn quasicontinuity_defect(d: &DPoset, x: usize, size_bound: usize, interior: &Mask) -> Option<&'static str> {
    let p = d.base();
    let fam = fin_family(d, x, size_bound, &p.full());
    if fam.is_empty() {
        return Some("fin(x) is empty");
    }
    let mut meet = p.full();
    for f in &fam {
        meet.intersect_with(&p.up_closure(f));
    }
    // a finite family is directed iff it has a member refining all others
    if !fam.iter().any(|h| h.is_subset(&meet)) {
        return Some("fin(x) is not directed");
    }
    if meet.difference(p.up(x)).intersects(interior) {
        return Some("intersection exceeds ↑x");
    }
    None
}

fn quasi_check(ctx: &EvalCtx, cfg: &CheckConfig) -> LevelOutcome {
    let d = &ctx.level.dposet;
    for x in ctx.quantified.iter() {
        if let Some(why) = quasicontinuity_defect(d, x, cfg.max_f_size, &ctx.interior) {
            return LevelOutcome::Fail(fail_at(ctx).with("x", name(ctx, x)).with("reason", why));
        }
    }
    LevelOutcome::Pass
}

/// An element of `↓D′ \ D′` for the chain of declaration `decl`.
fn dprime_chain_gap(d: &DPoset, decl: usize) -> Option<usize> {
    let p = d.base();
    let chain = Mask::from_indices(d.len(), d.decls()[decl].chain.iter().copied());
    let dp = one_step_set(d, &chain);
    p.down_closure(&dp).difference(&dp).first()
}

fn dprime_check(ctx: &EvalCtx) -> LevelOutcome {
    let d = &ctx.level.dposet;
    let p = d.base();
    for i in quantified_decls(ctx) {
        if let Some(x) = dprime_chain_gap(d, i) {
            return LevelOutcome::Fail(
                fail_at(ctx)
                    .with("D", d.decls()[i].id.clone())
                    .with("x", name(ctx, x)),
            );
        }
    }
    // finite directed sets: D′ depends only on ↓D = ↓max D
    for y in ctx.quantified.iter() {
        let dp = one_step_set(d, &Mask::singleton(d.len(), y));
        if let Some(x) = p.down_closure(&dp).difference(&dp).first() {
            return LevelOutcome::Fail(
                fail_at(ctx)
                    .with("D", generated_name(d, &Mask::singleton(d.len(), y)))
                    .with("x", name(ctx, x)),
            );
        }
    }
    LevelOutcome::Pass
}

/// The per-level test for `p`.
pub fn level_check(p: Property, ctx: &EvalCtx, cfg: &CheckConfig) -> LevelOutcome {
    match p {
        Property::WeakOneStep => set_check(ctx, cfg, weak_gap),
        Property::OneStep => set_check(ctx, cfg, one_step_gap),
        Property::APrimeLower => set_check(ctx, cfg, aprime_gap),
        Property::MeetContinuous => meet_check(ctx),
        Property::Continuous => approximation_check(ctx, way_below_down),
        Property::Exact => approximation_check(ctx, weakly_way_below_down),
        Property::Quasicontinuous => quasi_check(ctx, cfg),
        Property::DPrimeLower => dprime_check(ctx),
    }
}

pub fn check(family: &TruncationFamily, p: Property, cfg: &CheckConfig) -> Result<PropertyReport, PropertyError> {
    let start = Instant::now();
    let run = |ctx: &EvalCtx| level_check(p, ctx, cfg);
    let verdict = stabilize(&run, family, &cfg.levels, cfg.guard, cfg.escalation_cap)?;
    let mut notes = Vec::new();
    if p == Property::Quasicontinuous {
        notes.push(format!("fin(x) searched up to |F| ≤ {}", cfg.max_f_size));
    }
    Ok(PropertyReport {
        property: p,
        family: family.name().to_string(),
        verdict,
        levels: cfg.levels.clone(),
        guard: cfg.guard,
        notes,
        millis: start.elapsed().as_millis(),
    })
}

pub fn check_weak_one_step(f: &TruncationFamily, cfg: &CheckConfig) -> Result<PropertyReport, PropertyError> {
    check(f, Property::WeakOneStep, cfg)
}

pub fn check_one_step(f: &TruncationFamily, cfg: &CheckConfig) -> Result<PropertyReport, PropertyError> {
    check(f, Property::OneStep, cfg)
}

pub fn check_meet_continuous(f: &TruncationFamily, cfg: &CheckConfig) -> Result<PropertyReport, PropertyError> {
    check(f, Property::MeetContinuous, cfg)
}

pub fn check_continuous(f: &TruncationFamily, cfg: &CheckConfig) -> Result<PropertyReport, PropertyError> {
    check(f, Property::Continuous, cfg)
}

pub fn check_quasicontinuous(f: &TruncationFamily, cfg: &CheckConfig) -> Result<PropertyReport, PropertyError> {
    check(f, Property::Quasicontinuous, cfg)
}

pub fn check_exact(f: &TruncationFamily, cfg: &CheckConfig) -> Result<PropertyReport, PropertyError> {
    check(f, Property::Exact, cfg)
}

pub fn check_dprime_lower(f: &TruncationFamily, cfg: &CheckConfig) -> Result<PropertyReport, PropertyError> {
    check(f, Property::DPrimeLower, cfg)
}

/// Re-verifies a failure witness in isolation at its own level.
///
/// Only the named inputs are recomputed; nothing else from the original run
/// is reused. Schema sets are looked up by name, generated sets are rebuilt
/// from their generators.
pub fn replay(family: &TruncationFamily, p: Property, w: &Witness, cfg: &CheckConfig) -> Result<bool, PropertyError> {
    let (level, _, interior) = eval_ctx(family, w.level, cfg.guard, Mode::Unguarded)?;
    let d = &level.dposet;
    let bad = |what: &str| PropertyError::BadWitness(format!("{what} in {}", w.key()));
    let elem = |key: &str| -> Result<usize, PropertyError> {
        w.get(key)
            .and_then(|n| d.base().index_of(n))
            .ok_or_else(|| bad(key))
    };
    let x = elem("x")?;
    let ok = match p {
        Property::WeakOneStep | Property::OneStep | Property::APrimeLower => {
            let (members, tails) = w
                .get("A")
                .and_then(|a| resolve_test_set(&level, a))
                .ok_or_else(|| bad("A"))?;
            let cl = scott_closure_with(d, &members, tails.as_ref());
            let a1 = one_step_set_with(d, &members, tails.as_ref());
            match p {
                Property::WeakOneStep => {
                    cl.closure().contains(x) && !d.base().down_closure(&a1).contains(x)
                }
                Property::OneStep => cl.closure().contains(x) && !a1.contains(x),
                _ => d.base().down_closure(&a1).contains(x) && !a1.contains(x),
            }
        }
        Property::MeetContinuous => {
            let id = w.get("D").ok_or_else(|| bad("D"))?;
            let i = d.decl_by_id(id).ok_or_else(|| bad("D"))?;
            meet_gap(d, i, x)
        }
        Property::Continuous => approximation_defect(d, &way_below_down(d, x), x).is_some(),
        Property::Exact => approximation_defect(d, &weakly_way_below_down(d, x), x).is_some(),
        Property::Quasicontinuous => quasicontinuity_defect(d, x, cfg.max_f_size, &interior).is_some(),
        Property::DPrimeLower => {
            let dn = w.get("D").ok_or_else(|| bad("D"))?;
            let dp = match d.decl_by_id(dn) {
                Some(i) => one_step_set(d, &Mask::from_indices(d.len(), d.decls()[i].chain.iter().copied())),
                None => one_step_set(d, &parse_generated(d, dn).ok_or_else(|| bad("D"))?),
            };
            d.base().down_closure(&dp).contains(x) && !dp.contains(x)
        }
    };
    Ok(ok)
}

/// In a meet-semilattice window: does `x ∧ ℓ` equal the supremum of the
/// image chain `{x ∧ c : c ∈ C}`?
///
/// The image is eventually constant (its last two visible values agree) or
/// climbs along some declared chain; anything else is undetermined (`None`).
pub fn meet_equation(d: &DPoset, decl: usize, x: usize) -> Option<bool> {
    let p = d.base();
    let c = &d.decls()[decl];
    let pair_inf = |a: usize, b: usize| p.inf(&Mask::from_indices(d.len(), [a, b]));
    let lhs = pair_inf(x, c.limit)?;
    let image: Vec<usize> = c.chain.iter().map(|&e| pair_inf(x, e)).collect::<Option<_>>()?;
    let last = *image.last()?;
    let sup = if image.len() >= 2 && image[image.len() - 2] == last {
        last
    } else {
        d.decls().iter().find(|e| e.top() == last)?.limit
    };
    Some(lhs == sup)
}

/// Element mapping between two families, by canonical names, per level.
#[derive(Clone)]
pub struct ScottMap {
    pub source: TruncationFamily,
    pub target: TruncationFamily,
    map: Arc<dyn Fn(usize, &str) -> Option<String> + Send + Sync>,
}

impl fmt::Debug for ScottMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ScottMap")
            .field("source", &self.source.name())
            .field("target", &self.target.name())
            .finish()
    }
}

impl ScottMap {
    pub fn new(
        source: TruncationFamily,
        target: TruncationFamily,
        map: impl Fn(usize, &str) -> Option<String> + Send + Sync + 'static,
    ) -> Self {
        ScottMap {
            source,
            target,
            map: Arc::new(map),
        }
    }

    pub fn identity(f: TruncationFamily) -> Self {
        ScottMap::new(f.clone(), f, |_, x| Some(x.to_string()))
    }

    pub fn apply(&self, level: usize, x: &str) -> Option<String> {
        (self.map)(level, x)
    }

    /// The map at level `n` as source index → target index.
    fn table(&self, n: usize) -> Result<Vec<usize>, RetractionError> {
        let src = self.source.level(n)?;
        let dst = self.target.level(n)?;
        src.dposet
            .base()
            .names()
            .iter()
            .map(|x| {
                self.apply(n, x)
                    .and_then(|y| dst.dposet.base().index_of(&y))
                    .ok_or_else(|| RetractionError::Unmapped {
                        level: n,
                        element: x.clone(),
                    })
            })
            .collect()
    }

    /// Monotone and preserving declared suprema at level `n`.
    pub fn check_level(&self, n: usize) -> Result<(), RetractionError> {
        let t = self.table(n)?;
        let src = self.source.level(n)?;
        let dst = self.target.level(n)?;
        let (sp, tp) = (src.dposet.base(), dst.dposet.base());
        for a in 0..sp.len() {
            for b in sp.up(a).iter() {
                if !tp.leq(t[a], t[b]) {
                    return Err(RetractionError::NotMonotone {
                        level: n,
                        lower: sp.name(a).into(),
                        upper: sp.name(b).into(),
                    });
                }
            }
        }
        for c in src.dposet.decls() {
            let image_top = t[c.top()];
            let k = c.chain.len();
            let constant = k >= 2 && t[c.chain[k - 2]] == image_top;
            let expected = if constant {
                Some(image_top)
            } else {
                dst.dposet
                    .decls()
                    .iter()
                    .find(|e| e.chain.contains(&image_top))
                    .map(|e| e.limit)
            };
            if expected != Some(t[c.limit]) {
                return Err(RetractionError::NotContinuous {
                    level: n,
                    decl: c.id.clone(),
                });
            }
        }
        Ok(())
    }
}

#[derive(Debug, Error)]
pub enum RetractionError {
    #[error(transparent)]
    Family(#[from] FamilyError),
    #[error("level {level}: {element} has no image")]
    Unmapped { level: usize, element: String },
    #[error("level {level}: {lower} ≤ {upper} is not preserved")]
    NotMonotone {
        level: usize,
        lower: String,
        upper: String,
    },
    #[error("level {level}: the limit of {decl} is not sent to the limit of the image chain")]
    NotContinuous { level: usize, decl: String },
    #[error("level {level}: r(s({element})) ≠ {element}")]
    NotRetraction { level: usize, element: String },
    #[error("maps do not compose: {0}")]
    Mismatch(String),
}

/// Checks that `r ∘ s = id` with both maps Scott-continuous at every level.
pub fn verify_retraction(s: &ScottMap, r: &ScottMap, levels: &[usize]) -> Result<(), RetractionError> {
    if s.target.name() != r.source.name() || s.source.name() != r.target.name() {
        return Err(RetractionError::Mismatch(format!(
            "s: {} → {}, r: {} → {}",
            s.source.name(),
            s.target.name(),
            r.source.name(),
            r.target.name()
        )));
    }
    for &n in levels {
        s.check_level(n)?;
        r.check_level(n)?;
        let l = s.source.level(n)?;
        for x in l.dposet.base().names() {
            let back = s.apply(n, x).and_then(|y| r.apply(n, &y));
            if back.as_deref() != Some(x.as_str()) {
                return Err(RetractionError::NotRetraction {
                    level: n,
                    element: x.clone(),
                });
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{fig1_family, fig2_family, fig3_family, omega_chain_level};
    use crate::family::FamilyFlags;

    fn quick() -> CheckConfig {
        CheckConfig {
            levels: vec![3, 4, 6],
            samples: 200,
            ..CheckConfig::default()
        }
    }

    fn key(v: &Verdict) -> String {
        v.witness().map(|w| w.key()).unwrap_or_default()
    }

    #[test]
    fn property_names_round_trip() {
        for p in Property::ALL {
            assert_eq!(p.name().parse::<Property>().unwrap(), p);
        }
        assert!("nope".parse::<Property>().is_err());
    }

    #[test]
    fn fig3_verdicts() {
        let f = fig3_family().family;
        let cfg = quick();
        assert!(check_weak_one_step(&f, &cfg).unwrap().verdict.holds());
        let one = check_one_step(&f, &cfg).unwrap().verdict;
        assert_eq!(key(&one), "A=ℕ; x=a");
        let meet = check_meet_continuous(&f, &cfg).unwrap().verdict;
        assert_eq!(key(&meet), "D=ℕ; x=a");
        assert!(check_exact(&f, &cfg).unwrap().verdict.holds());
    }

    #[test]
    fn fig2_weak_fails_on_naturals() {
        let f = fig2_family().family;
        let v = check_weak_one_step(&f, &quick()).unwrap().verdict;
        assert_eq!(key(&v), "A=ℕ; x=(1,ω)");
    }

    #[test]
    fn fig1_one_step_witness_replays() {
        let f = fig1_family().family;
        let cfg = quick();
        let v = check_one_step(&f, &cfg).unwrap().verdict;
        let w = v.witness().unwrap();
        assert_eq!(w.key(), "A=col(1); x=(2,1)");
        assert!(replay(&f, Property::OneStep, w, &cfg).unwrap());
    }

    #[test]
    fn replay_rejects_a_false_witness() {
        let f = fig3_family().family;
        let w = Witness::new(4).with("A", "ℕ").with("x", "ω");
        assert!(!replay(&f, Property::OneStep, &w, &quick()).unwrap());
        let junk = Witness::new(4).with("A", "nowhere").with("x", "ω");
        assert!(replay(&f, Property::OneStep, &junk, &quick()).is_err());
    }

    #[test]
    fn omega_chain_meet_equation() {
        let l = omega_chain_level(5).unwrap();
        let d = &l.dposet;
        // the last natural sits on the window edge: its image chain still climbs
        for x in (0..4).chain([5]) {
            assert_eq!(meet_equation(d, 0, x), Some(true), "x = {}", d.base().name(x));
        }
        assert_eq!(meet_equation(d, 0, 4), Some(false));
    }

    #[test]
    fn identity_is_a_retraction() {
        let f = fig3_family().family;
        let id = ScottMap::identity(f.clone());
        verify_retraction(&id, &id, &[3, 5]).unwrap();
    }

    #[test]
    fn chain_is_a_retract_of_fig3() {
        let chain = TruncationFamily::new("omega-chain", FamilyFlags { dcpo: true }, omega_chain_level);
        let fig3 = fig3_family().family;
        let s = ScottMap::new(chain.clone(), fig3.clone(), |_, x| Some(x.to_string()));
        let r = ScottMap::new(fig3, chain, |_, x| Some(if x == "a" { "1".into() } else { x.to_string() }));
        verify_retraction(&s, &r, &[3, 4, 6]).unwrap();
    }

    #[test]
    fn constant_map_is_not_a_retraction() {
        let chain = TruncationFamily::new("omega-chain", FamilyFlags { dcpo: true }, omega_chain_level);
        let fig3 = fig3_family().family;
        let s = ScottMap::new(chain.clone(), fig3.clone(), |_, x| Some(x.to_string()));
        let r = ScottMap::new(fig3, chain, |_, _| Some("2".into()));
        assert!(matches!(
            verify_retraction(&s, &r, &[4]),
            Err(RetractionError::NotRetraction { .. })
        ));
    }

    #[test]
    fn collapsing_the_limit_is_not_continuous() {
        let chain = TruncationFamily::new("omega-chain", FamilyFlags { dcpo: true }, omega_chain_level);
        let fig3 = fig3_family().family;
        // sends ω to a point strictly below the image chain's limit
        let s = ScottMap::new(chain, fig3, |_, x| Some(if x == "ω" { "a".into() } else { x.to_string() }));
        assert!(s.check_level(4).is_err());
    }
}
