use std::sync::OnceLock;

use proptest::prelude::*;

use fracwell::io::{fmt_sig, record_from_json, record_to_json, run_point, PointSpec, RunRecord};
use fracwell::StateKind;

fn base() -> &'static RunRecord {
    static BASE: OnceLock<RunRecord> = OnceLock::new();
    BASE.get_or_init(|| {
        run_point(&PointSpec::new(1.2, 4.0, StateKind::FirstExcited).with_intervals(64)).unwrap().record
    })
}

#[test]
fn real_record_round_trips() {
    let rec = base();
    let back = record_from_json(&record_to_json(rec).unwrap()).unwrap();
    assert_eq!(&back, rec);
}

#[test]
fn record_has_reference_columns() {
    let rec = base();
    let r = &rec.reference;
    assert!(r.chen_lower < r.chen_upper);
    assert!(r.banuelos_lower.is_none());
    assert!(r.thomas_fermi_mu.unwrap() > 4.0);
    assert_eq!(rec.tool_version, env!("CARGO_PKG_VERSION"));
}

proptest! {
    #[test]
    fn json_round_trip_is_exact(
        mu in proptest::num::f64::NORMAL,
        var in 0.0f64..1.0,
        xc in proptest::option::of(-1.0f64..1.0),
        iters in 0usize..1_000_000,
        converged: bool,
        resid in proptest::num::f64::POSITIVE,
    ) {
        let mut rec = base().clone();
        rec.observables.mu = mu;
        rec.observables.variance_x = var;
        rec.observables.x_c = xc;
        rec.flow.iterations = iters;
        rec.flow.converged = converged;
        rec.flow.final_residual = resid;
        let back = record_from_json(&record_to_json(&rec).unwrap()).unwrap();
        prop_assert_eq!(back, rec);
    }

    #[test]
    fn six_significant_digits(x in proptest::num::f64::NORMAL) {
        let s = fmt_sig(x);
        let y: f64 = s.parse().unwrap();
        prop_assert!((y - x).abs() <= 5.000_001e-6 * x.abs(), "{} -> {}", x, s);
        let digits = s.split('e').next().unwrap().chars().filter(|c| c.is_ascii_digit()).collect::<String>();
        prop_assert!(digits.trim_start_matches('0').len() <= 6);
    }
}
