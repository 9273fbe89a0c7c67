//! `scottbench`: run Scott-closure operators and property checkers on
//! posets described in `.poset` files.
//!
//! Exit codes: 0 holds / ok, 1 fails, 2 unstable, 3 error.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};

use scott_core::corpus::{self, CorpusEntry};
use scott_core::dsl::{self, DslDocument};
use scott_core::family::Level;
use scott_core::properties::{check, resolve_test_set, CheckConfig, Property, PropertyReport};
use scott_core::report;
use scott_core::scott::{one_step_set_with, scott_closure_with, weak_one_step_set_with};
use scott_core::smyth::{self, build_qspace, FiniteSpace};
use scott_core::suite::{generated_entries, search_counterexample, theorem_suite, SearchOutcome, SearchTarget};
use scott_core::verdict::Verdict;
use scott_core::Mask;

const HOLDS: u8 = 0;
const FAILS: u8 = 1;
const UNSTABLE: u8 = 2;
const ERROR: u8 = 3;

#[derive(Parser)]
#[command(name = "scottbench", version, about = "Scott closure and continuity checks on finitely presented posets")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct Source {
    /// A `.poset` file, or `corpus:NAME` for a built-in description.
    file: String,
    /// Block to use when the file defines several.
    #[arg(long)]
    entry: Option<String>,
}

#[derive(clap::Args)]
struct SetArgs {
    #[command(flatten)]
    source: Source,
    /// A set defined in the file, or a literal such as `{a, b}` or `{}`.
    #[arg(long)]
    set: String,
    /// Truncation level (ignored for plain posets).
    #[arg(long, default_value_t = 3)]
    level: usize,
}

#[derive(Subcommand)]
enum Command {
    /// Scott closure cl(A) of a set, with its stages.
    Closure(SetArgs),
    /// One-step set A′ and weak one-step set A″ against cl(A).
    OneStep(SetArgs),
    /// Run a property checker across truncation levels.
    Check {
        #[command(flatten)]
        source: Source,
        /// Property name, or `all`.
        #[arg(long)]
        property: String,
        #[arg(long, env = "SCOTT_LEVELS", value_delimiter = ',', default_value = "4,8,16")]
        levels: Vec<usize>,
        #[arg(long, default_value_t = 1)]
        guard: usize,
        #[arg(long, default_value_t = 3)]
        max_f_size: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Keep doubling the top level up to this bound while unstable.
        #[arg(long)]
        escalate_to: Option<usize>,
        /// Print JSON lines instead of a table.
        #[arg(long)]
        json: bool,
        /// Also write JSON lines to this file.
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Implication suite over the built-in corpus and/or generated families.
    Suite {
        #[arg(long)]
        corpus: bool,
        /// Number of generated families.
        #[arg(long)]
        random: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 12)]
        carrier_cap: usize,
        #[arg(long, default_value_t = 2)]
        chains: usize,
        #[arg(long, env = "SCOTT_LEVELS", value_delimiter = ',', default_value = "4,8,16")]
        levels: Vec<usize>,
        #[arg(long, default_value_t = 1)]
        guard: usize,
        /// Write every verdict as JSON lines to this file.
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Search generated families for a counterexample pattern.
    Search {
        /// `meet-continuous-not-one-step` or `exact-not-continuous`.
        #[arg(long)]
        problem: SearchTarget,
        #[arg(long, default_value_t = 1000)]
        budget: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, env = "SCOTT_LEVELS", value_delimiter = ',', default_value = "4,8,16")]
        levels: Vec<usize>,
    },
    /// Smyth powerdomain Q(X) of a finite space and its checks.
    Qspace {
        #[command(flatten)]
        source: Source,
        /// Leave the empty set out of Q(X).
        #[arg(long)]
        no_empty: bool,
    },
    /// Hasse diagram (covers solid, declared limits dashed) in DOT.
    ExportDot {
        #[command(flatten)]
        source: Source,
        #[arg(long, default_value_t = 3)]
        level: usize,
    },
    /// Print one level of a family as an editable `poset` block.
    Export {
        #[command(flatten)]
        source: Source,
        #[arg(long, default_value_t = 4)]
        level: usize,
    },
}

struct Failure(String);

impl<E: std::fmt::Display> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure(e.to_string())
    }
}

type Run = Result<u8, Failure>;

fn main() -> ExitCode {
    // usage errors share the generic error code; clap's own default (2)
    // would read as "unstable"
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { ERROR } else { HOLDS });
        }
    };
    let code = match run(cli.command) {
        Ok(code) => code,
        Err(Failure(msg)) => {
            eprintln!("error: {msg}");
            ERROR
        }
    };
    ExitCode::from(code)
}

fn run(cmd: Command) -> Run {
    match cmd {
        Command::Closure(a) => closure(&a),
        Command::OneStep(a) => one_step(&a),
        Command::Check {
            source,
            property,
            levels,
            guard,
            max_f_size,
            seed,
            escalate_to,
            json,
            report,
        } => {
            let cfg = CheckConfig {
                levels,
                guard,
                max_f_size,
                seed,
                escalation_cap: escalate_to,
                ..CheckConfig::default()
            };
            check_cmd(&source, &property, &cfg, json, report.as_deref())
        }
        Command::Suite {
            corpus,
            random,
            seed,
            carrier_cap,
            chains,
            levels,
            guard,
            report,
        } => {
            let cfg = CheckConfig {
                levels,
                guard,
                ..CheckConfig::default()
            };
            suite_cmd(corpus, random, seed, carrier_cap, chains, &cfg, report.as_deref())
        }
        Command::Search {
            problem,
            budget,
            seed,
            levels,
        } => {
            let cfg = CheckConfig {
                levels,
                ..CheckConfig::default()
            };
            search_cmd(problem, budget, seed, &cfg)
        }
        Command::Qspace { source, no_empty } => qspace_cmd(&source, !no_empty),
        Command::ExportDot { source, level } => {
            let lvl = load_level(&source, level)?;
            print!("{}", dsl::export_dot(&block_name(&source)?, &lvl.dposet));
            Ok(HOLDS)
        }
        Command::Export { source, level } => {
            let lvl = load_level(&source, level)?;
            print!("{}", dsl::export_level(&block_name(&source)?, &lvl));
            Ok(HOLDS)
        }
    }
}

fn load(source: &Source) -> Result<DslDocument, Failure> {
    let (label, text) = match source.file.strip_prefix("corpus:") {
        Some(name) => (
            source.file.clone(),
            corpus::source(name)
                .ok_or_else(|| Failure(format!("no built-in description `{name}`")))?
                .to_string(),
        ),
        None => (
            source.file.clone(),
            fs::read_to_string(&source.file).map_err(|e| Failure(format!("{}: {e}", source.file)))?,
        ),
    };
    let doc = dsl::parse(&text).map_err(|e| Failure(format!("{label}:{e}")))?;
    Ok(doc)
}

fn block_name(source: &Source) -> Result<String, Failure> {
    let doc = load(source)?;
    let b = doc
        .block(source.entry.as_deref())
        .ok_or_else(|| Failure(format!("{}: no poset or family found", source.file)))?;
    Ok(b.name.clone())
}

fn load_level(source: &Source, level: usize) -> Result<Level, Failure> {
    let doc = load(source)?;
    let fam = doc
        .family(source.entry.as_deref())
        .map_err(|e| Failure(format!("{}:{e}", source.file)))?;
    Ok((*fam.level(level.max(1))?).clone())
}

fn render(level: &Level, m: &Mask) -> String {
    format!("{{{}}}", level.dposet.base().names_of(m).join(", "))
}

/// The lower set named by `--set` and, for schema sets, its tail oracle.
fn resolve_set(level: &Level, text: &str) -> Result<(Mask, Option<Mask>), Failure> {
    if let Some(found) = resolve_test_set(level, text) {
        return Ok(found);
    }
    let names = dsl::parse_names(text).map_err(|e| Failure(format!("--set {text}: {e}")))?;
    let p = level.dposet.base();
    let m = p.mask_of(&names)?;
    Ok((p.down_closure(&m), None))
}

fn closure(a: &SetArgs) -> Run {
    let lvl = load_level(&a.source, a.level)?;
    let (set, tails) = resolve_set(&lvl, &a.set)?;
    let trace = scott_closure_with(&lvl.dposet, &set, tails.as_ref());
    println!("↓A     = {}", render(&lvl, &set));
    for (i, stage) in trace.named(&lvl.dposet).iter().enumerate().skip(1) {
        if stage.fired.is_empty() {
            println!("stage {i}: down-closure");
        } else {
            println!("stage {i}: limits of {}", stage.fired.join(", "));
        }
    }
    println!("cl(A)  = {}", render(&lvl, trace.closure()));
    Ok(HOLDS)
}

fn one_step(a: &SetArgs) -> Run {
    let lvl = load_level(&a.source, a.level)?;
    let d = &lvl.dposet;
    let (set, tails) = resolve_set(&lvl, &a.set)?;
    let cl = scott_closure_with(d, &set, tails.as_ref());
    let prime = one_step_set_with(d, &set, tails.as_ref());
    let weak = weak_one_step_set_with(d, &set, tails.as_ref());
    println!("A′     = {}", render(&lvl, &prime));
    println!("A″     = {}", render(&lvl, &weak));
    println!("cl(A)  = {}", render(&lvl, cl.closure()));
    let one = &prime == cl.closure();
    println!("cl(A) = A′: {}", if one { "yes" } else { "no" });
    println!("cl(A) = A″: {}", if &weak == cl.closure() { "yes" } else { "no" });
    Ok(if one { HOLDS } else { FAILS })
}

fn exit_for(verdicts: impl IntoIterator<Item = Verdict>) -> u8 {
    verdicts
        .into_iter()
        .map(|v| match v {
            Verdict::Holds { .. } => HOLDS,
            Verdict::Fails { .. } => FAILS,
            Verdict::Unstable { .. } => UNSTABLE,
        })
        .max()
        .unwrap_or(HOLDS)
}

fn write_report(path: Option<&Path>, reports: &[PropertyReport]) -> Result<(), Failure> {
    if let Some(path) = path {
        fs::write(path, report::to_lines(reports)).map_err(|e| Failure(format!("{}: {e}", path.display())))?;
    }
    Ok(())
}

fn check_cmd(source: &Source, property: &str, cfg: &CheckConfig, json: bool, out: Option<&Path>) -> Run {
    let props: Vec<Property> = if property == "all" {
        Property::ALL.to_vec()
    } else {
        vec![property.parse::<Property>()?]
    };
    let doc = load(source)?;
    let fam = doc
        .family(source.entry.as_deref())
        .map_err(|e| Failure(format!("{}:{e}", source.file)))?;
    let mut reports = Vec::new();
    for p in props {
        reports.push(check(&fam, p, cfg)?);
    }
    if json {
        print!("{}", report::to_lines(&reports));
    } else {
        print!("{}", report::table(&reports));
        for r in &reports {
            for n in &r.notes {
                println!("note ({}): {n}", r.property.name());
            }
        }
    }
    write_report(out, &reports)?;
    Ok(exit_for(reports.into_iter().map(|r| r.verdict)))
}

fn suite_cmd(
    use_corpus: bool,
    random: Option<usize>,
    seed: u64,
    cap: usize,
    chains: usize,
    cfg: &CheckConfig,
    out: Option<&Path>,
) -> Run {
    let mut entries: Vec<CorpusEntry> = Vec::new();
    if use_corpus || random.is_none() {
        entries.extend(corpus::corpus());
    }
    if let Some(n) = random {
        entries.extend(generated_entries(seed, n, cap, chains));
    }
    let start = Instant::now();
    let rep = theorem_suite(&entries, cfg)?;
    let secs = start.elapsed().as_secs_f64();
    println!(
        "{} entries, {} implication instances checked, {} violations, {} entries with unstable verdicts, {} rejected ({secs:.1} s)",
        rep.evaluations.len(),
        rep.checked,
        rep.violations.len(),
        rep.unstable_entries(),
        rep.rejected.len(),
    );
    for v in &rep.violations {
        println!("VIOLATION {}: {}", v.entry, v.implication);
        for (p, verdict) in &v.verdicts {
            println!("  {:<18} {}", p.name(), report::outcome_name(verdict));
        }
    }
    for e in rep.evaluations.iter().filter(|e| e.has_unstable()) {
        let which: Vec<&str> = e
            .reports
            .iter()
            .filter(|r| r.verdict.is_unstable())
            .map(|r| r.property.name())
            .collect();
        println!("unstable {}: {}", e.entry, which.join(", "));
    }
    for (name, why) in &rep.rejected {
        println!("rejected {name}: {why}");
    }
    println!("limitation: {}", smyth::SORGENFREY_NOTE);
    let all: Vec<PropertyReport> = rep.evaluations.iter().flat_map(|e| e.reports.clone()).collect();
    write_report(out, &all)?;
    Ok(if rep.violations.is_empty() { HOLDS } else { FAILS })
}

fn search_cmd(target: SearchTarget, budget: usize, seed: u64, cfg: &CheckConfig) -> Run {
    match search_counterexample(target, budget, seed, cfg)? {
        SearchOutcome::Found { entry, seed, reports } => {
            println!("found {} (seed {seed}) for {}", entry, target.name());
            print!("{}", report::table(&reports));
            let fam = corpus::inflate_random(seed, 10, 2);
            print!("{}", corpus::export_entry(&fam, cfg.levels[0])?);
            Ok(HOLDS)
        }
        SearchOutcome::Exhausted { tried, unstable } => {
            println!(
                "no instance of {} among {tried} generated families ({unstable} unstable); \
                 this says nothing about the question beyond these families",
                target.name()
            );
            Ok(HOLDS)
        }
    }
}

fn qspace_cmd(source: &Source, include_empty: bool) -> Run {
    let doc = load(source)?;
    let x: FiniteSpace = doc
        .space(source.entry.as_deref())
        .map_err(|e| Failure(format!("{}:{e}", source.file)))?;
    let q = build_qspace(&x, include_empty);
    println!("X has {} points and {} opens", x.len(), x.opens().len());
    println!("Q(X) (ordered by ⊇) has {} members:", q.sets.len());
    for &k in &q.sets {
        println!("  {}", x.render(k));
    }
    let vietoris = smyth::vietoris_equals_scott(&q).is_ok();
    let boxes = smyth::claim1_check(&x);
    let one_step = smyth::q_one_step(&x);
    let sets = x.saturated_sets();
    let directed = sets.iter().all(|&k| {
        let below: Vec<u64> = sets.iter().copied().filter(|&m| m & !k == 0).collect();
        smyth::claim3_check(&x, k, &below).is_ok()
    });
    println!("upper Vietoris = Scott on Q(X): {}", yes(vietoris));
    println!("□U ⊆ □V implies U ⊆ V: {}", yes(boxes));
    println!("directed family reaches each K: {}", yes(directed));
    println!("Q(X) has one-step closure: {}", yes(one_step));
    let mut ok = vietoris && boxes && one_step && directed;
    if x.saturated_sets().len() <= 20 {
        let wf = smyth::well_filtered_check(&x);
        println!("well-filtered: {}", yes(wf));
        ok &= wf;
    } else {
        println!("well-filtered: skipped (more than 20 saturated sets)");
    }
    println!("note: {}", smyth::SORGENFREY_NOTE);
    Ok(if ok { HOLDS } else { FAILS })
}

fn yes(b: bool) -> &'static str {
    if b {
        "yes"
    } else {
        "no"
    }
}
