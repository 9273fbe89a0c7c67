//! Acceptance criteria 1-7. Runs without the libtest harness so the
//! per-criterion summary is always printed.

use std::collections::HashSet;
use std::path::PathBuf;
use std::process::Command;
use std::time::{Duration, Instant};

use scott_core::corpus::{self, fig1_family, fig2_family, fig3_family, Golden};
use scott_core::dposet::DPoset;
use scott_core::order::FinPoset;
use scott_core::properties::{check, replay, resolve_test_set, CheckConfig, Property};
use scott_core::report::normalize_lines;
use scott_core::scott::{
    one_step_set, one_step_set_with, scott_closure, way_below, weak_one_step_set, weak_one_step_set_with,
    weakly_way_below,
};
use scott_core::smyth::{self, build_qspace, enumerate_t0_topologies, Subset};
use scott_core::suite::{generated_entries, theorem_suite};
use scott_core::{Mask, TruncationFamily, Verdict};

type Check = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn err<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

fn within(start: Instant, limit: Duration, what: &str) -> Result<(), String> {
    let t = start.elapsed();
    ensure(t < limit, || format!("{what} took {:.1} s, limit {} s", t.as_secs_f64(), limit.as_secs()))
}

fn bits_of(m: &Mask) -> u32 {
    m.iter().fold(0, |acc, i| acc | (1 << i))
}

fn mask_of(n: usize, b: u32) -> Mask {
    Mask::from_indices(n, (0..n).filter(|&i| b >> i & 1 == 1))
}

/// Brute-force helpers over a carrier of at most 32 elements, written
/// against `leq` only.
struct Brute<'a> {
    d: &'a DPoset,
    n: usize,
    leq: Vec<Vec<bool>>,
}

impl<'a> Brute<'a> {
    fn new(d: &'a DPoset) -> Self {
        let p = d.base();
        let n = p.len();
        assert!(n <= 20);
        let leq = (0..n).map(|a| (0..n).map(|b| p.leq(a, b)).collect()).collect();
        Brute { d, n, leq }
    }

    fn down(&self, s: u32) -> u32 {
        let mut out = 0;
        for y in 0..self.n {
            if (0..self.n).any(|x| s >> x & 1 == 1 && self.leq[y][x]) {
                out |= 1 << y;
            }
        }
        out
    }

    fn is_lower(&self, s: u32) -> bool {
        self.down(s) == s
    }

    fn top_in(&self, k: usize, s: u32) -> bool {
        let decl = &self.d.decls()[k];
        decl.chain.iter().all(|&c| s >> c & 1 == 1)
    }

    /// Closed relative to `↓A` and an optional tail oracle: lower, contains
    /// the limit of every chain whose tail is inside (per the oracle for
    /// chains already in `↓A`, by visibility for chains entering later).
    fn closed(&self, s: u32, base: u32, tails: Option<u32>) -> bool {
        self.is_lower(s)
            && self.d.decls().iter().enumerate().all(|(k, decl)| {
                let forced = match tails {
                    Some(t) if self.top_in(k, base) => t >> k & 1 == 1,
                    Some(t) => t >> k & 1 == 1 || self.top_in(k, s),
                    None => self.top_in(k, s),
                };
                !forced || s >> decl.limit & 1 == 1
            })
    }

    fn closure(&self, a: u32, tails: Option<u32>) -> u32 {
        let base = self.down(a);
        let full = if self.n == 32 { u32::MAX } else { (1u32 << self.n) - 1 };
        let mut acc = full;
        for s in 0..=full {
            if s & base == base && acc & !s != 0 && self.closed(s, base, tails) {
                acc &= s;
            }
            if s == full {
                break;
            }
        }
        acc
    }

    fn directed_sups(&self) -> Vec<(u32, usize)> {
        let mut out = Vec::new();
        for s in 1u32..(1 << self.n) {
            let members: Vec<usize> = (0..self.n).filter(|&i| s >> i & 1 == 1).collect();
            let directed = members.iter().all(|&a| {
                members
                    .iter()
                    .all(|&b| members.iter().any(|&c| self.leq[a][c] && self.leq[b][c]))
            });
            if !directed {
                continue;
            }
            let ub: Vec<usize> = (0..self.n)
                .filter(|&u| members.iter().all(|&m| self.leq[m][u]))
                .collect();
            if let Some(&sup) = ub.iter().find(|&&u| ub.iter().all(|&v| self.leq[u][v])) {
                out.push((s, sup));
            }
        }
        out
    }

    /// `A′`: suprema of finite directed subsets of `↓A` plus limits of
    /// chains lying in `↓A`.
    fn one_step(&self, a: u32, sups: &[(u32, usize)], tails: Option<u32>) -> u32 {
        let base = self.down(a);
        let mut out = 0;
        for &(s, sup) in sups {
            if s & !base == 0 {
                out |= 1 << sup;
            }
        }
        for (k, decl) in self.d.decls().iter().enumerate() {
            let inside = match tails {
                Some(t) => t >> k & 1 == 1,
                None => self.top_in(k, base),
            };
            if inside {
                out |= 1 << decl.limit;
            }
        }
        out
    }
}

fn verdict_key(v: &Verdict) -> Option<String> {
    v.witness().map(|w| w.key())
}

fn criterion1() -> Check {
    let start = Instant::now();
    let cfg = CheckConfig::default();
    let run = |f: &TruncationFamily, p| check(f, p, &cfg).map(|r| r.verdict).map_err(err);

    let f2 = fig2_family();
    let weak = run(&f2.family, Property::WeakOneStep)?;
    ensure(verdict_key(&weak).as_deref() == Some("A=ℕ; x=(1,ω)"), || {
        format!("fig2 weak-one-step: {weak:?}")
    })?;
    let q = run(&f2.family, Property::Quasicontinuous)?;
    ensure(q.holds(), || format!("fig2 quasicontinuous: {q:?}"))?;

    let f3 = fig3_family();
    for n in 1..=16 {
        let lvl = f3.family.level(n).map_err(err)?;
        let d = &lvl.dposet;
        let (a, tails) = resolve_test_set(&lvl, "ℕ").ok_or("fig3 has no ℕ")?;
        let prime = d.base().names_of(&one_step_set_with(d, &a, tails.as_ref()));
        let mut want: Vec<String> = (1..=n).map(|k| k.to_string()).collect();
        want.push("ω".into());
        ensure(prime == want, || format!("fig3 level {n}: ℕ′ = {prime:?}"))?;
        let weak = weak_one_step_set_with(d, &a, tails.as_ref());
        ensure(weak == d.base().full(), || format!("fig3 level {n}: ℕ″ is not the carrier"))?;
    }
    let one = run(&f3.family, Property::OneStep)?;
    ensure(one.fails(), || format!("fig3 one-step: {one:?}"))?;
    let weak = run(&f3.family, Property::WeakOneStep)?;
    ensure(weak.holds(), || format!("fig3 weak-one-step: {weak:?}"))?;

    let f1 = fig1_family();
    let weak = run(&f1.family, Property::WeakOneStep)?;
    ensure(weak.holds(), || format!("fig1 weak-one-step: {weak:?}"))?;
    let q = run(&f1.family, Property::Quasicontinuous)?;
    ensure(q.fails(), || format!("fig1 quasicontinuous: {q:?}"))?;
    let one = run(&f1.family, Property::OneStep)?;
    let w = one.witness().ok_or_else(|| format!("fig1 one-step: {one:?}"))?;
    ensure(replay(&f1.family, Property::OneStep, w, &cfg).map_err(err)?, || {
        format!("fig1 witness {} does not replay", w.key())
    })?;
    // independent check at the witness level: x ∈ cl(A) \ A′
    let lvl = f1.family.level(w.level).map_err(err)?;
    let d = &lvl.dposet;
    let (a, tails) = resolve_test_set(&lvl, w.get("A").ok_or("no A")?).ok_or("unknown A")?;
    let x = d.base().index_of(w.get("x").ok_or("no x")?).ok_or("unknown x")?;
    let brute = Brute::new(d);
    let t = tails.as_ref().map(bits_of);
    let cl = brute.closure(bits_of(&a), t);
    let prime = brute.one_step(bits_of(&a), &brute.directed_sups(), t);
    ensure(cl >> x & 1 == 1 && prime >> x & 1 == 0, || {
        format!("fig1 witness {} not confirmed by brute force", w.key())
    })?;
    within(start, Duration::from_secs(10), "criterion 1")?;
    Ok(format!(
        "fig2 (ℕ, (1,ω)); fig3 ℕ′/ℕ″ on levels 1-16; fig1 one-step witness {} at level {} confirmed ({:.1} s)",
        w.key(),
        w.level,
        start.elapsed().as_secs_f64()
    ))
}

fn criterion2() -> Check {
    let start = Instant::now();
    let cfg = CheckConfig::default();
    let mut entries = corpus::corpus();
    let corpus_len = entries.len();
    entries.extend(generated_entries(0, 1000, 12, 2));
    let rep = theorem_suite(&entries, &cfg).map_err(err)?;
    for v in &rep.violations {
        println!("    violation: {} breaks {}", v.entry, v.implication);
    }
    for (name, why) in &rep.rejected {
        println!("    rejected: {name}: {why}");
    }
    let unstable: Vec<&str> = rep
        .evaluations
        .iter()
        .filter(|e| e.has_unstable())
        .map(|e| e.entry.as_str())
        .collect();
    for u in &unstable {
        println!("    unstable: {u}");
    }
    ensure(rep.violations.is_empty(), || format!("{} violations", rep.violations.len()))?;
    ensure(rep.rejected.is_empty(), || format!("{} entries rejected", rep.rejected.len()))?;
    let share = unstable.len() as f64 / entries.len() as f64;
    ensure(share <= 0.05, || format!("{} unstable entries ({:.1}%)", unstable.len(), share * 100.0))?;
    within(start, Duration::from_secs(300), "criterion 2")?;
    Ok(format!(
        "{} corpus + 1000 generated entries, {} implication instances, 0 violations, {} unstable ({:.1} s)",
        corpus_len,
        rep.checked,
        unstable.len(),
        start.elapsed().as_secs_f64()
    ))
}

fn criterion3() -> Check {
    let mut posets = Vec::new();
    let mut seed = 0u64;
    while posets.len() < 50 {
        let e = corpus::inflate_random(seed, 9, 3);
        seed += 1;
        let pick = (1..=6)
            .rev()
            .filter_map(|n| e.family.level(n).ok())
            .find(|l| (8..=12).contains(&l.dposet.len()) && !l.dposet.decls().is_empty());
        if let Some(l) = pick {
            posets.push(l.dposet.clone());
        }
        ensure(seed < 10_000, || "not enough random d-posets".into())?;
    }
    let mut subsets = 0usize;
    for d in &posets {
        let brute = Brute::new(d);
        let n = d.len();
        let closed: Vec<u32> = (0u32..(1 << n)).filter(|&s| brute.closed(s, 0, None)).collect();
        let sups = brute.directed_sups();
        let count = 512.min(1usize << n);
        for i in 0..count as u32 {
            // odd multiplier: a bijection modulo 2^n, so the sample has no repeats
            let a = i.wrapping_mul(0x9E37_79B1) & ((1u32 << n) - 1);
            let base = brute.down(a);
            let cl = closed.iter().filter(|&&s| s & base == base).fold(u32::MAX >> (32 - n), |acc, &s| acc & s);
            let prime = brute.one_step(a, &sups, None);
            let weak = brute.down(prime);
            let am = mask_of(n, a);
            ensure(bits_of(scott_closure(d, &am).closure()) == cl, || format!("closure differs on {a:#b}"))?;
            ensure(bits_of(&one_step_set(d, &am)) == prime, || format!("A′ differs on {a:#b}"))?;
            ensure(bits_of(&weak_one_step_set(d, &am)) == weak, || format!("A″ differs on {a:#b}"))?;
            subsets += 1;
        }
    }
    Ok(format!("50 d-posets (8-12 elements), {subsets} subsets, exact agreement"))
}

fn criterion4() -> Check {
    let start = Instant::now();
    let mut spaces = 0;
    let mut claim3_runs = 0usize;
    for n in 1..=4 {
        for x in enumerate_t0_topologies(n) {
            spaces += 1;
            for include_empty in [true, false] {
                let q = build_qspace(&x, include_empty);
                ensure(smyth::vietoris_equals_scott(&q).is_ok(), || {
                    format!("Vietoris ≠ Scott on {}", x.render(x.full()))
                })?;
            }
            ensure(smyth::claim1_check(&x), || "boxes do not determine opens".into())?;
            ensure(smyth::q_one_step(&x), || "Q(X) lacks one-step closure".into())?;
            ensure(smyth::well_filtered_check(&x), || "not well-filtered".into())?;
            let q = build_qspace(&x, true);
            let mut bad = None;
            q.poset.for_each_lower_set(|a| {
                let fam: Vec<Subset> = a.iter().map(|i| q.sets[i]).collect();
                for &k in &fam {
                    claim3_runs += 1;
                    if smyth::claim3_check(&x, k, &fam).is_err() {
                        bad = Some(k);
                        return false;
                    }
                }
                true
            });
            ensure(bad.is_none(), || format!("directed family construction fails for K={:?}", bad))?;
        }
    }
    ensure(spaces == 1 + 2 + 5 + 16, || format!("{spaces} spaces enumerated"))?;
    within(start, Duration::from_secs(120), "criterion 4")?;
    Ok(format!(
        "{spaces} T0 spaces on 1-4 points, {claim3_runs} (K, A) constructions ({:.1} s)",
        start.elapsed().as_secs_f64()
    ))
}

fn criterion5(smyth_ok: bool) -> Check {
    ensure(smyth_ok, || "the finite mechanism checks (criterion 4) did not pass".into())?;
    let o = bin(&["suite", "--corpus"])?;
    let out = String::from_utf8_lossy(&o.stdout).into_owned();
    ensure(out.contains(&format!("limitation: {}", smyth::SORGENFREY_NOTE)), || {
        "suite output lacks the limitation note".into()
    })?;
    Ok("non-reproducible at finite scale; limitation printed by `suite`".into())
}

fn all_posets(n: usize) -> Vec<FinPoset> {
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|a| (a + 1..n).map(move |b| (a, b))).collect();
    let perms = permutations(n);
    let names: Vec<String> = (0..n).map(|i| format!("e{i}")).collect();
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for choice in 0u32..(1 << pairs.len()) {
        let rel: Vec<(usize, usize)> = pairs
            .iter()
            .enumerate()
            .filter(|(i, _)| choice >> i & 1 == 1)
            .map(|(_, &p)| p)
            .collect();
        let p = FinPoset::from_predicate(names.clone(), |a, b| rel.contains(&(a, b))).unwrap();
        let canon = perms
            .iter()
            .map(|pi| {
                let mut v: Vec<(usize, usize)> = (0..n)
                    .flat_map(|a| (0..n).map(move |b| (a, b)))
                    .filter(|&(a, b)| p.leq(a, b))
                    .map(|(a, b)| (pi[a], pi[b]))
                    .collect();
                v.sort_unstable();
                v
            })
            .min()
            .unwrap();
        if seen.insert(canon) {
            out.push(p);
        }
    }
    out
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for i in 0..n {
            let mut q = p.clone();
            q.insert(i, n - 1);
            out.push(q);
        }
    }
    out
}

fn criterion6() -> Check {
    let cfg = CheckConfig::default();
    let mut count = 0;
    for n in 1..=5 {
        let posets = all_posets(n);
        let expected = [0, 1, 2, 5, 16, 63][n];
        ensure(posets.len() == expected, || format!("{} posets on {n} elements", posets.len()))?;
        for p in posets {
            count += 1;
            let d = DPoset::plain(p.clone());
            for a in 0u32..(1 << n) {
                let am = mask_of(n, a);
                let down = p.down_closure(&am);
                ensure(scott_closure(&d, &am).closure() == &down, || "cl ≠ ↓".into())?;
                ensure(one_step_set(&d, &am) == down, || "A′ ≠ ↓A".into())?;
                ensure(weak_one_step_set(&d, &am) == down, || "A″ ≠ ↓A".into())?;
            }
            for x in 0..n {
                for y in 0..n {
                    ensure(way_below(&d, x, y) == p.leq(x, y), || "≪ ≠ ≤".into())?;
                    ensure(weakly_way_below(&d, x, y) == p.leq(x, y), || "≪_w ≠ ≤".into())?;
                }
            }
            let fam = TruncationFamily::constant(format!("finite-{count}"), d, vec![]);
            for prop in Property::ALL {
                let r = check(&fam, prop, &cfg).map_err(err)?;
                ensure(r.verdict.holds(), || format!("{} on {:?}: {:?}", prop.name(), p, r.verdict))?;
            }
        }
    }
    Ok(format!("{count} posets on 1-5 elements up to isomorphism"))
}

fn corpus_file(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../core/corpus")
        .join(format!("{name}.poset"))
        .to_string_lossy()
        .into_owned()
}

fn bin(args: &[&str]) -> Result<std::process::Output, String> {
    Command::new(env!("CARGO_BIN_EXE_scottbench"))
        .args(args)
        .env_remove("SCOTT_LEVELS")
        .output()
        .map_err(err)
}

fn criterion7() -> Check {
    for (name, text) in corpus::SOURCES {
        let doc = scott_core::dsl::parse(text).map_err(|e| format!("{name}: {e}"))?;
        doc.check().map_err(|e| format!("{name}: {e}"))?;
    }
    let mut runs = 0;
    for e in [fig1_family(), fig2_family(), fig3_family()] {
        for (p, g) in &e.golden {
            let o = bin(&["check", &corpus_file(e.name()), "--property", p.name()])?;
            let want = if *g == Golden::Holds { 0 } else { 1 };
            ensure(o.status.code() == Some(want), || {
                format!("{} {}: exit {:?}, want {want}", e.name(), p.name(), o.status.code())
            })?;
            if let Golden::FailsWith(key) = g {
                let out = String::from_utf8_lossy(&o.stdout);
                ensure(out.contains(key), || format!("{} {}: witness {key} missing", e.name(), p.name()))?;
            }
            runs += 1;
        }
    }
    let o = bin(&["export-dot", &corpus_file("fig3")])?;
    let dot = String::from_utf8_lossy(&o.stdout).into_owned();
    let edges: Vec<&str> = dot.lines().filter(|l| l.contains("->")).collect();
    let dashed = edges.iter().filter(|l| l.contains("style=dashed")).count();
    let nodes = dot.lines().filter(|l| l.contains("[label=") && !l.contains("->")).count();
    ensure((nodes, edges.len() - dashed, dashed) == (5, 4, 1), || {
        format!("fig3 DOT has {nodes} nodes, {} solid, {dashed} dashed", edges.len() - dashed)
    })?;
    for fig in ["fig1", "fig2", "fig3"] {
        let a = bin(&["check", &corpus_file(fig), "--property", "all", "--json"])?;
        let b = bin(&["check", &corpus_file(fig), "--property", "all", "--json"])?;
        let na = normalize_lines(&String::from_utf8_lossy(&a.stdout)).map_err(err)?;
        let nb = normalize_lines(&String::from_utf8_lossy(&b.stdout)).map_err(err)?;
        ensure(na == nb, || format!("{fig} report differs between runs"))?;
        let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join(format!("tests/golden/{fig}.jsonl"));
        let golden = normalize_lines(&std::fs::read_to_string(path).map_err(err)?).map_err(err)?;
        ensure(na == golden, || format!("{fig} report differs from its golden file"))?;
    }
    Ok(format!("{} sources parse, {runs} golden exit codes, fig3 DOT 5/4/1, reports stable", corpus::SOURCES.len()))
}

fn main() {
    let mut results: Vec<(usize, Check)> = Vec::new();
    let mut report = |i: usize, r: Check| {
        match &r {
            Ok(detail) => println!("criterion {i}: PASS: {detail}"),
            Err(why) => println!("criterion {i}: FAIL: {why}"),
        }
        results.push((i, r));
    };
    report(1, criterion1());
    report(2, criterion2());
    report(3, criterion3());
    let c4 = criterion4();
    let smyth_ok = c4.is_ok();
    report(4, c4);
    report(5, criterion5(smyth_ok));
    report(6, criterion6());
    report(7, criterion7());
    let failed: Vec<usize> = results.iter().filter(|(_, r)| r.is_err()).map(|(i, _)| *i).collect();
    if failed.is_empty() {
        println!("acceptance: all 7 criteria pass");
    } else {
        println!("acceptance: failed criteria {failed:?}");
        std::process::exit(1);
    }
}
