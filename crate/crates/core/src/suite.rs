//! Cross-checking the implications between properties on many families,
//! and searching generated families for counterexamples to open questions.

use std::collections::BTreeMap;
use std::fmt;

use rayon::prelude::*;
use serde::Serialize;

use crate::corpus::{inflate_random, CorpusEntry, EntryFlags};
use crate::properties::{check, replay, resolve_test_set, CheckConfig, Property, PropertyError, PropertyReport};
use crate::scott::{enumerate_scott_closed, one_step_set, ORACLE_CAP};
use crate::verdict::Verdict;

use Property::*;

/// Verdicts of one entry, read as booleans (only consulted when stable).
pub struct Answers<'a> {
    verdicts: &'a BTreeMap<Property, Verdict>,
    pub flags: EntryFlags,
}

impl Answers<'_> {
    pub fn get(&self, p: Property) -> bool {
        self.verdicts[&p].holds()
    }
}

pub struct Implication {
    pub name: &'static str,
    pub uses: &'static [Property],
    pub rule: fn(&Answers) -> bool,
}

impl fmt::Debug for Implication {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name)
    }
}

fn implies(a: bool, b: bool) -> bool {
    !a || b
}

pub const IMPLICATIONS: &[Implication] = &[
    Implication {
        name: "one-step ⟹ weak-one-step",
        uses: &[OneStep, WeakOneStep],
        rule: |a| implies(a.get(OneStep), a.get(WeakOneStep)),
    },
    Implication {
        name: "one-step ⟹ meet-continuous",
        uses: &[OneStep, MeetContinuous],
        rule: |a| implies(a.get(OneStep), a.get(MeetContinuous)),
    },
    Implication {
        name: "meet-continuous ∧ weak-one-step ⟺ one-step",
        uses: &[MeetContinuous, WeakOneStep, OneStep],
        rule: |a| (a.get(MeetContinuous) && a.get(WeakOneStep)) == a.get(OneStep),
    },
    Implication {
        name: "aprime-lower ⟺ dprime-lower",
        uses: &[APrimeLower, DPrimeLower],
        rule: |a| a.get(APrimeLower) == a.get(DPrimeLower),
    },
    Implication {
        name: "dprime-lower ⟹ meet-continuous",
        uses: &[DPrimeLower, MeetContinuous],
        rule: |a| implies(a.get(DPrimeLower), a.get(MeetContinuous)),
    },
    Implication {
        name: "weak-one-step ∧ dprime-lower ⟹ one-step",
        uses: &[WeakOneStep, DPrimeLower, OneStep],
        rule: |a| implies(a.get(WeakOneStep) && a.get(DPrimeLower), a.get(OneStep)),
    },
    Implication {
        name: "one-step ∧ exact ⟹ continuous",
        uses: &[OneStep, Exact, Continuous],
        rule: |a| implies(a.get(OneStep) && a.get(Exact), a.get(Continuous)),
    },
    Implication {
        name: "continuous ⟹ one-step ∧ exact",
        uses: &[Continuous, OneStep, Exact],
        rule: |a| implies(a.get(Continuous), a.get(OneStep) && a.get(Exact)),
    },
    Implication {
        name: "quasicontinuous ∧ dcpo ⟹ weak-one-step",
        uses: &[Quasicontinuous, WeakOneStep],
        rule: |a| implies(a.get(Quasicontinuous) && a.flags.dcpo, a.get(WeakOneStep)),
    },
    Implication {
        name: "meet-continuous ∧ (semilattice ∨ sup-semilattice) ⟹ dprime-lower",
        uses: &[MeetContinuous, DPrimeLower],
        rule: |a| {
            let lattice_like = a.flags.meet_semilattice || a.flags.join_semilattice;
            implies(a.get(MeetContinuous) && lattice_like, a.get(DPrimeLower))
        },
    },
    Implication {
        name: "meet-continuous ∧ (semilattice ∨ sup-semilattice) ⟹ (continuous ⟺ exact)",
        uses: &[MeetContinuous, Continuous, Exact],
        rule: |a| {
            let lattice_like = a.flags.meet_semilattice || a.flags.join_semilattice;
            implies(a.get(MeetContinuous) && lattice_like, a.get(Continuous) == a.get(Exact))
        },
    },
];

#[derive(Debug, Clone, Serialize)]
pub struct EntryEvaluation {
    pub entry: String,
    pub reports: Vec<PropertyReport>,
}

impl EntryEvaluation {
    pub fn verdicts(&self) -> BTreeMap<Property, Verdict> {
        self.reports
            .iter()
            .map(|r| (r.property, r.verdict.clone()))
            .collect()
    }

    pub fn has_unstable(&self) -> bool {
        self.reports.iter().any(|r| r.verdict.is_unstable())
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Violation {
    pub entry: String,
    pub implication: &'static str,
    /// Every verdict of the entry, for diagnosis.
    pub verdicts: Vec<(Property, Verdict)>,
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct SuiteReport {
    pub evaluations: Vec<EntryEvaluation>,
    pub violations: Vec<Violation>,
    /// `(entry, implication)` pairs skipped because a verdict was unstable.
    pub excluded: Vec<(String, &'static str)>,
    /// Entries rejected by validation before any checking.
    pub rejected: Vec<(String, String)>,
    /// Implication instances actually evaluated.
    pub checked: usize,
}

impl SuiteReport {
    pub fn unstable_entries(&self) -> usize {
        self.evaluations.iter().filter(|e| e.has_unstable()).count()
    }
}

/// Validates the levels a check will touch, plus the one above each.
pub fn validate_entry(e: &CorpusEntry, cfg: &CheckConfig) -> Result<(), String> {
    let mut levels: Vec<usize> = cfg
        .levels
        .iter()
        .flat_map(|&n| [n.saturating_sub(cfg.guard), n])
        .filter(|&n| n > 0)
        .collect();
    levels.sort_unstable();
    levels.dedup();
    for n in levels {
        e.family.validate_level(n).map_err(|err| err.to_string())?;
        e.family.check_embedding(n).map_err(|err| err.to_string())?;
    }
    Ok(())
}

pub fn evaluate_entry(e: &CorpusEntry, cfg: &CheckConfig) -> Result<EntryEvaluation, PropertyError> {
    let reports = Property::ALL
        .iter()
        .map(|&p| check(&e.family, p, cfg))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(EntryEvaluation {
        entry: e.name().to_string(),
        reports,
    })
}

/// Evaluates every property on every entry and checks each implication
/// wherever none of its verdicts is unstable. Results follow input order.
pub fn theorem_suite(entries: &[CorpusEntry], cfg: &CheckConfig) -> Result<SuiteReport, PropertyError> {
    let outcomes: Vec<Result<EntryEvaluation, (String, String)>> = entries
        .par_iter()
        .map(|e| {
            validate_entry(e, cfg).map_err(|why| (e.name().to_string(), why))?;
            evaluate_entry(e, cfg).map_err(|err| (e.name().to_string(), err.to_string()))
        })
        .collect();
    let mut report = SuiteReport::default();
    for (e, outcome) in entries.iter().zip(outcomes) {
        let eval = match outcome {
            Ok(ev) => ev,
            Err(rejected) => {
                report.rejected.push(rejected);
                continue;
            }
        };
        let verdicts = eval.verdicts();
        let answers = Answers {
            verdicts: &verdicts,
            flags: e.flags,
        };
        for imp in IMPLICATIONS {
            if imp.uses.iter().any(|p| verdicts[p].is_unstable()) {
                report.excluded.push((eval.entry.clone(), imp.name));
                continue;
            }
            report.checked += 1;
            if !(imp.rule)(&answers) {
                report.violations.push(Violation {
                    entry: eval.entry.clone(),
                    implication: imp.name,
                    verdicts: verdicts.clone().into_iter().collect(),
                });
            }
        }
        report.evaluations.push(eval);
    }
    Ok(report)
}

/// Generated families for the suite: seeds `seed .. seed + count`.
pub fn generated_entries(seed: u64, count: usize, carrier_cap: usize, chain_count: usize) -> Vec<CorpusEntry> {
    (0..count as u64)
        .map(|i| inflate_random(seed + i, carrier_cap, chain_count))
        .collect()
}

/// The two open questions a search can target.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SearchTarget {
    /// A meet-continuous poset without one-step closure.
    MeetContinuousNotOneStep,
    /// A meet-continuous exact poset that is not continuous.
    ExactNotContinuous,
}

impl SearchTarget {
    pub fn name(self) -> &'static str {
        match self {
            SearchTarget::MeetContinuousNotOneStep => "meet-continuous-not-one-step",
            SearchTarget::ExactNotContinuous => "exact-not-continuous",
        }
    }

    fn needed(self) -> &'static [Property] {
        match self {
            SearchTarget::MeetContinuousNotOneStep => &[MeetContinuous, OneStep],
            SearchTarget::ExactNotContinuous => &[MeetContinuous, Exact, Continuous],
        }
    }

    fn negated(self) -> Property {
        match self {
            SearchTarget::MeetContinuousNotOneStep => OneStep,
            SearchTarget::ExactNotContinuous => Continuous,
        }
    }
}

impl std::str::FromStr for SearchTarget {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        [SearchTarget::MeetContinuousNotOneStep, SearchTarget::ExactNotContinuous]
            .into_iter()
            .find(|t| t.name() == s)
            .ok_or_else(|| format!("unknown search target `{s}`"))
    }
}

#[derive(Debug, Clone, Serialize)]
#[serde(tag = "outcome", rename_all = "lowercase")]
pub enum SearchOutcome {
    /// A generated family matching the pattern; every failing witness
    /// replayed and, where the carrier allowed, the closure agreed with the
    /// brute-force oracle.
    Found {
        entry: String,
        seed: u64,
        reports: Vec<PropertyReport>,
    },
    Exhausted {
        tried: usize,
        unstable: usize,
    },
}

enum Probe {
    Hit(u64, Vec<PropertyReport>),
    Miss,
    Unstable,
}

/// Searches `budget` generated families. Reports search outcomes only: an
/// exhausted search says nothing about the open question itself.
pub fn search_counterexample(
    target: SearchTarget,
    budget: usize,
    seed: u64,
    cfg: &CheckConfig,
) -> Result<SearchOutcome, PropertyError> {
    let probes: Vec<Result<Probe, PropertyError>> = (0..budget as u64)
        .into_par_iter()
        .map(|i| {
            let e = inflate_random(seed + i, 10, 2);
            let mut reports = Vec::new();
            for &p in target.needed() {
                let r = check(&e.family, p, cfg)?;
                if r.verdict.is_unstable() {
                    return Ok(Probe::Unstable);
                }
                let wanted = if p == target.negated() {
                    r.verdict.fails()
                } else {
                    r.verdict.holds()
                };
                reports.push(r);
                if !wanted {
                    return Ok(Probe::Miss);
                }
            }
            if confirm_hit(&e, target, &reports, cfg)? {
                Ok(Probe::Hit(seed + i, reports))
            } else {
                Ok(Probe::Miss)
            }
        })
        .collect();
    let mut unstable = 0;
    for probe in probes {
        match probe? {
            Probe::Hit(s, reports) => {
                return Ok(SearchOutcome::Found {
                    entry: format!("random-{s}"),
                    seed: s,
                    reports,
                })
            }
            Probe::Unstable => unstable += 1,
            Probe::Miss => {}
        }
    }
    Ok(SearchOutcome::Exhausted {
        tried: budget,
        unstable,
    })
}

/// Replays the failing witness and, for one-step failures on small
/// carriers, re-derives the closure from the list of all closed sets.
fn confirm_hit(e: &CorpusEntry, target: SearchTarget, reports: &[PropertyReport], cfg: &CheckConfig) -> Result<bool, PropertyError> {
    let Some(w) = reports
        .iter()
        .find(|r| r.property == target.negated())
        .and_then(|r| r.verdict.witness())
    else {
        return Ok(false);
    };
    if !replay(&e.family, target.negated(), w, cfg)? {
        return Ok(false);
    }
    if target != SearchTarget::MeetContinuousNotOneStep {
        return Ok(true);
    }
    let level = e.family.level(w.level)?;
    let d = &level.dposet;
    let (Some((a, None)), Some(x)) = (
        w.get("A").and_then(|n| resolve_test_set(&level, n)),
        w.get("x").and_then(|n| d.base().index_of(n)),
    ) else {
        return Ok(true);
    };
    if d.len() > ORACLE_CAP {
        return Ok(true);
    }
    let closed = enumerate_scott_closed(d, ORACLE_CAP).expect("carrier within cap");
    let least = closed
        .iter()
        .filter(|c| a.is_subset(c))
        .min_by_key(|c| c.count())
        .expect("the whole carrier is closed");
    Ok(least.contains(x) && !one_step_set(d, &a).contains(x))
}
