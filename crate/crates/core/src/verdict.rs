//! Turning per-level answers into a verdict about the presented poset.
//!
//! Each check runs twice per level: guarded (quantified inputs drawn only
//! from elements visible `g` levels earlier) and unguarded (inputs drawn from
//! the whole window). A property holds when every run at every level agrees
//! that it does; it fails when a named witness recurs at consecutive levels
//! in guarded mode and the unguarded run fails too; everything else is
//! reported as unstable.

use std::fmt;

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::family::{FamilyError, Level, TruncationFamily};
use crate::mask::Mask;

/// A counterexample at a single level, as `key = canonical name` pairs.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Witness {
    pub level: usize,
    pub items: Vec<(String, String)>,
}

impl Witness {
    pub fn new(level: usize) -> Self {
        Witness {
            level,
            items: Vec::new(),
        }
    }

    pub fn with(mut self, key: &str, value: impl Into<String>) -> Self {
        self.items.push((key.to_string(), value.into()));
        self
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.items
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }

    /// Level-independent rendering used to compare witnesses across levels.
    pub fn key(&self) -> String {
        self.items
            .iter()
            .map(|(k, v)| format!("{k}={v}"))
            .collect::<Vec<_>>()
            .join("; ")
    }
}

impl fmt::Display for Witness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} @ level {}", self.key(), self.level)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "outcome", rename_all = "lowercase")]
pub enum Verdict {
    Holds { stable_at: usize },
    Fails { witness: Witness },
    Unstable { diagnostic: String },
}

impl Verdict {
    pub fn holds(&self) -> bool {
        matches!(self, Verdict::Holds { .. })
    }

    pub fn fails(&self) -> bool {
        matches!(self, Verdict::Fails { .. })
    }

    pub fn is_unstable(&self) -> bool {
        matches!(self, Verdict::Unstable { .. })
    }

    pub fn witness(&self) -> Option<&Witness> {
        match self {
            Verdict::Fails { witness } => Some(witness),
            _ => None,
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            Verdict::Holds { .. } => "holds",
            Verdict::Fails { .. } => "fails",
            Verdict::Unstable { .. } => "unstable",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LevelOutcome {
    Pass,
    Fail(Witness),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Guarded,
    Unguarded,
}

/// Everything a per-level check may look at.
pub struct EvalCtx<'a> {
    pub level: &'a Level,
    pub mode: Mode,
    pub guard: usize,
    /// Elements that may be chosen as quantified inputs.
    pub quantified: Mask,
    /// Elements far enough from the window edge for comparisons against
    /// infinite intersections or suprema; always uses the full guard.
    pub interior: Mask,
}

impl EvalCtx<'_> {
    pub fn n(&self) -> usize {
        self.level.level
    }

    /// Largest schema parameter level usable in this mode.
    pub fn schema_horizon(&self) -> usize {
        match self.mode {
            Mode::Guarded => self.n() - self.guard,
            Mode::Unguarded => self.n(),
        }
    }

    pub fn schema_sets(&self) -> impl Iterator<Item = &crate::family::SchemaSet> {
        let h = self.schema_horizon();
        self.level.schema.iter().filter(move |s| s.appears_at <= h)
    }
}

#[derive(Debug, Error)]
pub enum StabilizeError {
    #[error("need at least 3 strictly increasing levels, got {0:?}")]
    BadLevels(Vec<usize>),
    #[error(transparent)]
    Family(#[from] FamilyError),
}

pub fn eval_ctx(
    family: &TruncationFamily,
    n: usize,
    guard: usize,
    mode: Mode,
) -> Result<(std::sync::Arc<Level>, Mask, Mask), FamilyError> {
    let level = family.level(n)?;
    let interior = family.guarded_carrier(n, guard)?;
    let quantified = match mode {
        Mode::Guarded => interior.clone(),
        Mode::Unguarded => level.dposet.base().full(),
    };
    Ok((level, quantified, interior))
}

/// Runs `check` on one level in one mode.
pub fn run_level<F>(
    family: &TruncationFamily,
    n: usize,
    guard: usize,
    mode: Mode,
    check: &F,
) -> Result<LevelOutcome, FamilyError>
where
    F: Fn(&EvalCtx) -> LevelOutcome,
{
    let (level, quantified, interior) = eval_ctx(family, n, guard, mode)?;
    let ctx = EvalCtx {
        level: &level,
        mode,
        guard,
        quantified,
        interior,
    };
    Ok(check(&ctx))
}

/// Per-level outcomes in both modes, in level order.
pub type LevelTable = Vec<(usize, LevelOutcome, LevelOutcome)>;

pub fn evaluate_levels<F>(
    check: &F,
    family: &TruncationFamily,
    levels: &[usize],
    guard: usize,
) -> Result<LevelTable, StabilizeError>
where
    F: Fn(&EvalCtx) -> LevelOutcome + Sync,
{
    if levels.len() < 3 || levels.windows(2).any(|w| w[0] >= w[1]) {
        return Err(StabilizeError::BadLevels(levels.to_vec()));
    }
    // warm the level cache sequentially so parallel workers share it
    for &n in levels {
        family.level(n)?;
        if guard > 0 && guard < n {
            family.level(n - guard)?;
        }
    }
    let rows: Result<Vec<_>, FamilyError> = levels
        .par_iter()
        .map(|&n| {
            let g = run_level(family, n, guard, Mode::Guarded, check)?;
            let u = run_level(family, n, guard, Mode::Unguarded, check)?;
            Ok((n, g, u))
        })
        .collect();
    Ok(rows?)
}

/// Combines per-level outcomes into a verdict.
pub fn combine(table: &LevelTable) -> Verdict {
    if table
        .iter()
        .all(|(_, g, u)| *g == LevelOutcome::Pass && *u == LevelOutcome::Pass)
    {
        return Verdict::Holds {
            stable_at: table[0].0,
        };
    }
    for pair in table.windows(2) {
        let (_, g0, u0) = &pair[0];
        let (_, g1, u1) = &pair[1];
        if let (LevelOutcome::Fail(w0), LevelOutcome::Fail(w1)) = (g0, g1) {
            let unguarded_fails =
                matches!(u0, LevelOutcome::Fail(_)) && matches!(u1, LevelOutcome::Fail(_));
            if w0.key() == w1.key() && unguarded_fails {
                return Verdict::Fails {
                    witness: w0.clone(),
                };
            }
        }
    }
    Verdict::Unstable {
        diagnostic: describe(table),
    }
}

fn describe(table: &LevelTable) -> String {
    let show = |o: &LevelOutcome| match o {
        LevelOutcome::Pass => "pass".to_string(),
        LevelOutcome::Fail(w) => format!("fail[{}]", w.key()),
    };
    table
        .iter()
        .map(|(n, g, u)| format!("N={n}: guarded {} / unguarded {}", show(g), show(u)))
        .collect::<Vec<_>>()
        .join("; ")
}

/// Evaluates `check` at every level in both modes and combines the results.
///
/// When the outcome is unstable and `cap` allows, the window is pushed out
/// by doubling the last level and the last three levels are re-judged.
pub fn stabilize<F>(
    check: &F,
    family: &TruncationFamily,
    levels: &[usize],
    guard: usize,
    cap: Option<usize>,
) -> Result<Verdict, StabilizeError>
where
    F: Fn(&EvalCtx) -> LevelOutcome + Sync,
{
    let mut table = evaluate_levels(check, family, levels, guard)?;
    let mut verdict = combine(&table);
    while verdict.is_unstable() {
        let last = table.last().unwrap().0;
        match cap {
            Some(c) if last * 2 <= c => {
                let n = last * 2;
                let g = run_level(family, n, guard, Mode::Guarded, check)?;
                let u = run_level(family, n, guard, Mode::Unguarded, check)?;
                table.push((n, g, u));
                let tail = table[table.len() - 3..].to_vec();
                verdict = combine(&tail);
            }
            _ => break,
        }
    }
    Ok(verdict)
}
