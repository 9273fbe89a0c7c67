//! Built-in truncation families with known verdicts, and a random generator
//! of faithful families.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dposet::{DPoset, DPosetError, LimitDecl};
use crate::family::{FamilyFlags, Level, SchemaSet, TruncationFamily};
use crate::mask::Mask;
use crate::order::{FinPoset, OrderError};
use crate::properties::Property;

/// What a corpus entry is expected to produce under the default levels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Golden {
    Holds,
    Fails,
    /// Fails with exactly this witness key (see [`crate::verdict::Witness::key`]).
    FailsWith(&'static str),
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct EntryFlags {
    pub dcpo: bool,
    pub meet_semilattice: bool,
    pub join_semilattice: bool,
}

#[derive(Debug, Clone)]
pub struct CorpusEntry {
    pub family: TruncationFamily,
    pub flags: EntryFlags,
    pub golden: Vec<(Property, Golden)>,
    pub provenance: &'static str,
}

impl CorpusEntry {
    pub fn name(&self) -> &str {
        self.family.name()
    }

    pub fn golden_for(&self, p: Property) -> Option<&Golden> {
        self.golden.iter().find(|(q, _)| *q == p).map(|(_, g)| g)
    }
}

fn order_err(e: OrderError) -> DPosetError {
    DPosetError::Order(e)
}

fn idx(names: &[String], name: &str) -> usize {
    names
        .iter()
        .position(|n| n == name)
        .unwrap_or_else(|| panic!("no element {name}"))
}

fn schema(p: &FinPoset, name: String, members: &[String], tails: Vec<String>, at: usize) -> SchemaSet {
    SchemaSet {
        name,
        members: p.mask_of(members).expect("schema members exist"),
        tails_inside: tails,
        appears_at: at.max(1),
    }
}

fn pair(m: usize, n: usize) -> String {
    format!("({m},{n})")
}

/// `(ℕ × ℕ) ∪ {⊤}`: disjoint ω-chains (columns) under a common top.
pub fn fig1_level(n: usize) -> Result<Level, DPosetError> {
    let mut names = Vec::new();
    let mut coord = Vec::new();
    for m in 1..=n {
        for k in 1..=n {
            names.push(pair(m, k));
            coord.push(Some((m, k)));
        }
    }
    names.push("⊤".to_string());
    coord.push(None);
    let p = FinPoset::from_predicate(names.clone(), |a, b| match (coord[a], coord[b]) {
        (_, None) => true,
        (Some((m1, k1)), Some((m2, k2))) => m1 == m2 && k1 <= k2,
        (None, Some(_)) => false,
    })
    .map_err(order_err)?;
    let top = idx(&names, "⊤");
    let decls = (1..=n)
        .map(|m| LimitDecl {
            id: format!("col({m})"),
            chain: (1..=n).map(|k| idx(&names, &pair(m, k))).collect(),
            limit: top,
        })
        .collect();
    let mut sets = Vec::new();
    for m in 1..=n {
        let col: Vec<String> = (1..=n).map(|k| pair(m, k)).collect();
        sets.push(schema(&p, format!("col({m})"), &col, vec![format!("col({m})")], m));
    }
    for k in 1..=n {
        let row: Vec<String> = (1..=n).map(|m| pair(m, k)).collect();
        sets.push(schema(&p, format!("row({k})"), &row, vec![], k));
    }
    let diag: Vec<String> = (1..=n).map(|m| pair(m, m)).collect();
    sets.push(schema(&p, "diag".into(), &diag, vec![], 1));
    Ok(Level {
        level: n,
        dposet: DPoset::new(p, decls)?,
        schema: sets,
    })
}

pub fn fig1_family() -> CorpusEntry {
    CorpusEntry {
        family: TruncationFamily::new("fig1", FamilyFlags { dcpo: true }, fig1_level),
        flags: EntryFlags {
            dcpo: true,
            meet_semilattice: false,
            join_semilattice: true,
        },
        golden: vec![
            (Property::WeakOneStep, Golden::Holds),
            (Property::OneStep, Golden::FailsWith("A=col(1); x=(2,1)")),
            (Property::Quasicontinuous, Golden::Fails),
            (Property::MeetContinuous, Golden::FailsWith("D=col(1); x=(2,1)")),
            (Property::Continuous, Golden::Fails),
            (Property::DPrimeLower, Golden::FailsWith("D=col(1); x=(2,1)")),
        ],
        provenance: "dcpo of disjoint ω-chains under a top: weak one-step closure without quasicontinuity",
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum F2 {
    /// `(m, n)` with `n` finite
    P(usize, usize),
    /// `(m, ω)`
    W(usize),
    /// `k ∈ ℕ`
    K(usize),
}

fn fig2_leq(x: F2, y: F2) -> bool {
    use F2::*;
    match (x, y) {
        (P(m1, n1), P(m2, n2)) => (m1 == m2 && n1 <= n2) || (n1 == n2 && m1 >= 2 && m1 <= m2),
        (P(m1, n1), W(m2)) => m1 == m2 || (m1 == 1 && m2 >= n1),
        (K(a), K(b)) => a <= b,
        (P(m, n), K(k)) => m >= 2 && k >= n,
        (W(m1), W(m2)) => m1 == m2 || (m1 >= 2 && m1 <= m2),
        _ => false,
    }
}

/// `(ℕ × (ℕ ∪ {ω})) ∪ ℕ`: a quasicontinuous poset without weak one-step
/// closure.
pub fn fig2_level(n: usize) -> Result<Level, DPosetError> {
    fig2_level_with(n, true)
}

/// `row_limits = false` drops the row-chain declarations (sensitivity runs).
pub fn fig2_level_with(n: usize, row_limits: bool) -> Result<Level, DPosetError> {
    let mut elems = Vec::new();
    for m in 1..=n {
        for k in 1..=n {
            elems.push(F2::P(m, k));
        }
    }
    for m in 1..=n {
        elems.push(F2::W(m));
    }
    for k in 1..=n {
        elems.push(F2::K(k));
    }
    let name = |e: &F2| match *e {
        F2::P(m, k) => pair(m, k),
        F2::W(m) => format!("({m},ω)"),
        F2::K(k) => k.to_string(),
    };
    let names: Vec<String> = elems.iter().map(name).collect();
    let p = FinPoset::from_predicate(names.clone(), |a, b| fig2_leq(elems[a], elems[b]))
        .map_err(order_err)?;
    let mut decls = Vec::new();
    for m in 1..=n {
        decls.push(LimitDecl {
            id: format!("col({m})"),
            chain: (1..=n).map(|k| idx(&names, &pair(m, k))).collect(),
            limit: idx(&names, &format!("({m},ω)")),
        });
    }
    if row_limits && n >= 2 {
        for k in 1..=n {
            decls.push(LimitDecl {
                id: format!("row({k})"),
                chain: (2..=n).map(|m| idx(&names, &pair(m, k))).collect(),
                limit: idx(&names, &k.to_string()),
            });
        }
    }
    let mut sets = Vec::new();
    let naturals: Vec<String> = (1..=n).map(|k| k.to_string()).collect();
    let mut nat_tails: Vec<String> = (2..=n).map(|m| format!("col({m})")).collect();
    if row_limits && n >= 2 {
        nat_tails.extend((1..=n).map(|k| format!("row({k})")));
    }
    sets.push(schema(&p, "ℕ".into(), &naturals, nat_tails, 1));
    for m in 1..=n {
        let col: Vec<String> = (1..=n).map(|k| pair(m, k)).collect();
        sets.push(schema(&p, format!("col({m})"), &col, vec![format!("col({m})")], m));
    }
    if n >= 2 {
        for k in 1..=n {
            let row: Vec<String> = (2..=n).map(|m| pair(m, k)).collect();
            let tails = if row_limits {
                (1..=k).map(|j| format!("row({j})")).collect()
            } else {
                vec![]
            };
            sets.push(schema(&p, format!("row({k})"), &row, tails, k));
        }
    }
    Ok(Level {
        level: n,
        dposet: DPoset::new(p, decls)?,
        schema: sets,
    })
}

pub fn fig2_family() -> CorpusEntry {
    CorpusEntry {
        family: TruncationFamily::new("fig2", FamilyFlags { dcpo: false }, fig2_level),
        flags: EntryFlags {
            dcpo: false,
            meet_semilattice: false,
            join_semilattice: false,
        },
        golden: vec![
            (Property::WeakOneStep, Golden::FailsWith("A=ℕ; x=(1,ω)")),
            (Property::Quasicontinuous, Golden::Holds),
            (Property::OneStep, Golden::Fails),
        ],
        provenance: "quasicontinuous poset (not a dcpo) without weak one-step closure",
    }
}

/// `ℕ ∪ {ω, a}` with `a < ω` only.
pub fn fig3_level(n: usize) -> Result<Level, DPosetError> {
    let mut names: Vec<String> = (1..=n).map(|k| k.to_string()).collect();
    names.push("ω".into());
    names.push("a".into());
    let (w, a) = (n, n + 1);
    let p = FinPoset::from_predicate(names.clone(), |x, y| {
        (x < n && y < n && x <= y) || y == w || (x == a && y == a)
    })
    .map_err(order_err)?;
    let decl = LimitDecl {
        id: "ℕ".into(),
        chain: (0..n).collect(),
        limit: w,
    };
    let naturals = names[..n].to_vec();
    let sets = vec![schema(&p, "ℕ".into(), &naturals, vec!["ℕ".into()], 1)];
    Ok(Level {
        level: n,
        dposet: DPoset::new(p, vec![decl])?,
        schema: sets,
    })
}

pub fn fig3_family() -> CorpusEntry {
    CorpusEntry {
        family: TruncationFamily::new("fig3", FamilyFlags { dcpo: true }, fig3_level),
        flags: EntryFlags {
            dcpo: true,
            meet_semilattice: false,
            join_semilattice: true,
        },
        golden: vec![
            (Property::WeakOneStep, Golden::Holds),
            (Property::OneStep, Golden::FailsWith("A=ℕ; x=a")),
            (Property::MeetContinuous, Golden::FailsWith("D=ℕ; x=a")),
            (Property::DPrimeLower, Golden::FailsWith("D=ℕ; x=a")),
            (Property::Continuous, Golden::Fails),
            (Property::Exact, Golden::Holds),
        ],
        provenance: "weak one-step closure without one-step closure",
    }
}

/// `ℕ ∪ {ω}` as a single chain.
pub fn omega_chain_level(n: usize) -> Result<Level, DPosetError> {
    let mut names: Vec<String> = (1..=n).map(|k| k.to_string()).collect();
    names.push("ω".into());
    let p = FinPoset::from_predicate(names.clone(), |a, b| a <= b).map_err(order_err)?;
    let decl = LimitDecl {
        id: "ℕ".into(),
        chain: (0..n).collect(),
        limit: n,
    };
    let sets = vec![schema(&p, "ℕ".into(), &names[..n], vec!["ℕ".into()], 1)];
    Ok(Level {
        level: n,
        dposet: DPoset::new(p, vec![decl])?,
        schema: sets,
    })
}

/// `ℕ⊥`: a bottom under an antichain of naturals, no limits.
pub fn flat_naturals_level(n: usize) -> Result<Level, DPosetError> {
    let mut names = vec!["⊥".to_string()];
    names.extend((1..=n).map(|k| k.to_string()));
    let p = FinPoset::from_predicate(names, |a, b| a == b || a == 0).map_err(order_err)?;
    Ok(Level {
        level: n,
        dposet: DPoset::plain(p),
        schema: vec![],
    })
}

fn all_hold() -> Vec<(Property, Golden)> {
    Property::ALL.iter().map(|&p| (p, Golden::Holds)).collect()
}

/// The Boolean lattice on `k` atoms.
pub fn boolean_lattice(k: usize) -> FinPoset {
    let names: Vec<String> = (0..1usize << k)
        .map(|s| {
            let members: Vec<String> = (0..k).filter(|i| s >> i & 1 == 1).map(|i| i.to_string()).collect();
            format!("{{{}}}", members.join(","))
        })
        .collect();
    FinPoset::from_predicate(names, |a, b| a & !b == 0).expect("subset order")
}

/// The non-modular five-element lattice.
pub fn pentagon() -> FinPoset {
    FinPoset::build(
        &["0", "a", "b", "c", "1"],
        &[("0", "a"), ("a", "b"), ("b", "1"), ("0", "c"), ("c", "1")],
        crate::order::RelationMode::Covers,
    )
    .expect("pentagon")
}

pub fn baseline_entries() -> Vec<CorpusEntry> {
    let lattice_flags = EntryFlags {
        dcpo: true,
        meet_semilattice: true,
        join_semilattice: true,
    };
    vec![
        CorpusEntry {
            family: TruncationFamily::new("omega-chain", FamilyFlags { dcpo: true }, omega_chain_level),
            flags: lattice_flags,
            golden: all_hold(),
            provenance: "a chain dcpo, hence continuous",
        },
        CorpusEntry {
            family: TruncationFamily::constant("boolean-3", DPoset::plain(boolean_lattice(3)), vec![]),
            flags: lattice_flags,
            golden: all_hold(),
            provenance: "finite Boolean lattice",
        },
        CorpusEntry {
            family: TruncationFamily::constant("pentagon", DPoset::plain(pentagon()), vec![]),
            flags: lattice_flags,
            golden: all_hold(),
            provenance: "finite non-modular lattice",
        },
        CorpusEntry {
            family: TruncationFamily::new("flat-naturals", FamilyFlags { dcpo: true }, flat_naturals_level),
            flags: EntryFlags {
                dcpo: true,
                meet_semilattice: true,
                join_semilattice: false,
            },
            golden: all_hold(),
            provenance: "flat domain: antichain with bottom, no limits",
        },
    ]
}

/// Every built-in entry: the three figures followed by the baselines.
/// Text descriptions of the figure families and of the empty poset.
pub const SOURCES: [(&str, &str); 4] = [
    ("fig1", include_str!("../corpus/fig1.poset")),
    ("fig2", include_str!("../corpus/fig2.poset")),
    ("fig3", include_str!("../corpus/fig3.poset")),
    ("empty", include_str!("../corpus/empty.poset")),
];

pub fn source(name: &str) -> Option<&'static str> {
    SOURCES.iter().find(|(n, _)| *n == name).map(|(_, s)| *s)
}

/// Level `n` of an entry as an editable `poset` block.
pub fn export_entry(entry: &CorpusEntry, n: usize) -> Result<String, crate::family::FamilyError> {
    let lvl = entry.family.level(n)?;
    Ok(crate::dsl::export_level(entry.name(), &lvl))
}

pub fn corpus() -> Vec<CorpusEntry> {
    let mut v = vec![fig1_family(), fig2_family(), fig3_family()];
    v.extend(baseline_entries());
    v
}

/// Where an inflated chain's supremum lives.
#[derive(Debug, Clone)]
enum Cap {
    /// A fresh element `ℓ` whose strict up-set is the base up-closure of
    /// these generators, with the listed base elements placed below it.
    Fresh { above: Vec<usize>, below: Vec<usize> },
    /// An existing base element strictly above the anchor.
    Existing(usize),
    /// No supremum: the chain is unbounded.
    Open,
}

/// One inflated chain: an ω-tail `t.1 < t.2 < ...` above `anchor`.
#[derive(Debug, Clone)]
struct Tail {
    anchor: usize,
    cap: Cap,
    /// `(b, j)`: base element `b` lies below `t.j` and everything above it.
    feeders: Vec<(usize, usize)>,
}

#[derive(Debug, Clone)]
struct RandomShape {
    base: FinPoset,
    tails: Vec<Tail>,
}

fn random_shape(seed: u64, carrier_cap: usize, chain_count: usize) -> RandomShape {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let size = rng.gen_range(1..=carrier_cap.max(1));
    let density: f64 = rng.gen_range(0.15..0.6);
    let mut edges = vec![vec![false; size]; size];
    for (a, row) in edges.iter_mut().enumerate() {
        for (b, e) in row.iter_mut().enumerate() {
            *e = a < b && rng.gen_bool(density);
        }
    }
    let names: Vec<String> = (0..size).map(|i| format!("b{i}")).collect();
    let base = FinPoset::from_predicate(names, |a, b| edges[a][b]).expect("edges go upward");

    let count = if chain_count == 0 {
        0
    } else {
        rng.gen_range(1..=chain_count)
    };
    let covers = base.cover_pairs();
    let mut tails = Vec::with_capacity(count);
    for _ in 0..count {
        // climb a random maximal-chain segment through covers
        let mut anchor = rng.gen_range(0..size);
        while rng.gen_bool(0.5) {
            let ups: Vec<usize> = covers.iter().filter(|c| c.0 == anchor).map(|c| c.1).collect();
            match ups.choose(&mut rng) {
                Some(&u) => anchor = u,
                None => break,
            }
        }
        let strict: Vec<usize> = base.up(anchor).iter().filter(|&u| u != anchor).collect();
        let roll: f64 = rng.gen();
        let cap = if roll < 0.25 {
            Cap::Open
        } else if roll < 0.5 && !strict.is_empty() {
            Cap::Existing(*strict.choose(&mut rng).unwrap())
        } else {
            let above: Vec<usize> = strict.iter().copied().filter(|_| rng.gen_bool(0.3)).collect();
            let up = base.up_closure(&Mask::from_indices(size, above.iter().copied()));
            let below = (0..size)
                .filter(|&b| !up.contains(b) && !base.leq(b, anchor) && rng.gen_bool(0.15))
                .collect();
            Cap::Fresh { above, below }
        };
        let mut feeders = Vec::new();
        for b in 0..size {
            if !base.comparable(anchor, b) && rng.gen_bool(0.15) {
                feeders.push((b, rng.gen_range(1..=2)));
            }
        }
        tails.push(Tail { anchor, cap, feeders });
    }
    let mut shape = RandomShape { base, tails };
    // extra relations may close a cycle through several tails; drop them
    if random_level(&shape, 3).is_err() {
        for t in &mut shape.tails {
            t.feeders.clear();
            if let Cap::Fresh { below, .. } = &mut t.cap {
                below.clear();
            }
        }
    }
    shape
}

fn random_level(shape: &RandomShape, n: usize) -> Result<Level, DPosetError> {
    let base = &shape.base;
    let mut names: Vec<String> = base.names().to_vec();
    #[derive(Clone, Copy)]
    enum K {
        Base(usize),
        Step(usize, usize),
        Lim(usize),
    }
    let mut kinds: Vec<K> = (0..base.len()).map(K::Base).collect();
    for (t, tail) in shape.tails.iter().enumerate() {
        for k in 1..=n {
            names.push(format!("t{t}.{k}"));
            kinds.push(K::Step(t, k));
        }
        if matches!(tail.cap, Cap::Fresh { .. }) {
            names.push(format!("ℓ{t}"));
            kinds.push(K::Lim(t));
        }
    }
    // generating relations; the closure supplies the rest
    let p = FinPoset::from_predicate(names.clone(), |a, b| {
        let tails = &shape.tails;
        match (kinds[a], kinds[b]) {
            (K::Base(x), K::Base(y)) => {
                // a feeder reaches an existing supremum at every level,
                // even before its entry step is visible
                base.leq(x, y)
                    || tails.iter().any(|t| {
                        matches!(t.cap, Cap::Existing(e) if e == y)
                            && t.feeders.iter().any(|&(f, _)| f == x)
                    })
            }
            (K::Base(x), K::Step(t, k)) => {
                x == tails[t].anchor || tails[t].feeders.iter().any(|&(f, j)| f == x && k >= j)
            }
            (K::Base(x), K::Lim(t)) => match &tails[t].cap {
                Cap::Fresh { below, .. } => {
                    below.contains(&x) || tails[t].feeders.iter().any(|&(f, _)| f == x)
                }
                _ => false,
            },
            (K::Step(t, i), K::Step(s, j)) => t == s && i + 1 == j,
            (K::Step(t, k), K::Lim(s)) => t == s && k == n,
            (K::Step(t, k), K::Base(y)) => k == n && matches!(tails[t].cap, Cap::Existing(e) if e == y),
            (K::Lim(t), K::Base(y)) => match &tails[t].cap {
                Cap::Fresh { above, .. } => above.contains(&y),
                _ => false,
            },
            _ => false,
        }
    })
    .map_err(order_err)?;
    let mut decls = Vec::new();
    let mut sets = Vec::new();
    for (t, tail) in shape.tails.iter().enumerate() {
        let members: Vec<String> = (1..=n).map(|k| format!("t{t}.{k}")).collect();
        let chain: Vec<usize> = members.iter().map(|m| idx(&names, m)).collect();
        let limit = match tail.cap {
            Cap::Fresh { .. } => Some(idx(&names, &format!("ℓ{t}"))),
            Cap::Existing(e) => Some(e),
            Cap::Open => None,
        };
        if let Some(limit) = limit {
            decls.push(LimitDecl {
                id: format!("tail({t})"),
                chain,
                limit,
            });
        }
        sets.push(schema(&p, format!("tail({t})"), &members, vec![], 1));
    }
    // a chain lies inside ↓tail(t) exactly when its supremum does
    for set in &mut sets {
        let down = p.down_closure(&set.members);
        let own = set.name.clone();
        set.tails_inside = decls
            .iter()
            .filter(|d| d.id == own || down.contains(d.limit))
            .map(|d| d.id.clone())
            .collect();
    }
    Ok(Level {
        level: n,
        dposet: DPoset::new(p, decls)?,
        schema: sets,
    })
}

/// A random finite poset with up to `chain_count` ω-tails attached. A tail
/// gets a fresh supremum, an existing one, or none; extra base elements may
/// feed into the tail from some step on, or sit below a fresh supremum
/// without reaching the tail. Deterministic in `seed`.
pub fn inflate_random(seed: u64, carrier_cap: usize, chain_count: usize) -> CorpusEntry {
    let shape = random_shape(seed, carrier_cap, chain_count);
    let dcpo = shape.tails.iter().all(|t| !matches!(t.cap, Cap::Open));
    let name = format!("random-{seed}");
    let family = if shape.tails.is_empty() {
        TruncationFamily::constant(name, DPoset::plain(shape.base.clone()), vec![])
    } else {
        let s = shape.clone();
        TruncationFamily::new(name, FamilyFlags { dcpo }, move |n| random_level(&s, n))
    };
    // semilattice flags of the intended poset: judged on two windows, which
    // agree once every tail shows at least two steps
    let (meet, join) = [3usize, 4]
        .iter()
        .map(|&n| {
            let f = family
                .level(n)
                .expect("random levels are valid")
                .dposet
                .base()
                .classify_semilattice();
            (f.meet, f.join)
        })
        .fold((true, true), |acc, f| (acc.0 && f.0, acc.1 && f.1));
    CorpusEntry {
        family,
        flags: EntryFlags {
            dcpo,
            meet_semilattice: meet,
            join_semilattice: join,
        },
        golden: if shape.tails.is_empty() { all_hold() } else { vec![] },
        provenance: "random chain inflation",
    }
}
