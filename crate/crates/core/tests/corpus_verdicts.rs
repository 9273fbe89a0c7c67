use scott_core::corpus::{corpus, Golden};
use scott_core::properties::{check, replay, CheckConfig, Property};

#[test]
fn golden_verdicts_at_default_levels() {
    let cfg = CheckConfig::default();
    for e in corpus() {
        for p in Property::ALL {
            let r = check(&e.family, p, &cfg).unwrap();
            println!("{:14} {:16} {:?} ({} ms)", e.name(), p.name(), r.verdict, r.millis);
            if let Some(w) = r.verdict.witness() {
                assert!(replay(&e.family, p, w, &cfg).unwrap(), "{} {p}: witness {w} does not replay", e.name());
            }
            match e.golden_for(p) {
                Some(Golden::Holds) => assert!(r.verdict.holds(), "{} {p}: {:?}", e.name(), r.verdict),
                Some(Golden::Fails) => assert!(r.verdict.fails(), "{} {p}: {:?}", e.name(), r.verdict),
                Some(Golden::FailsWith(k)) => {
                    assert_eq!(r.verdict.witness().map(|w| w.key()).as_deref(), Some(*k), "{} {p}", e.name())
                }
                None => {}
            }
        }
    }
}
