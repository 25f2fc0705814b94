use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use fracwell::{assemble, make_discretization, StateKind, WellConfig};

fn rel_err(a: &[f64], b: &[f64]) -> f64 {
    let scale = a.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    a.iter().zip(b).fold(0.0f64, |m, (x, y)| m.max((x - y).abs())) / scale
}

#[test]
fn fast_matches_dense_across_orders() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for j in [64usize, 256, 1024] {
        for alpha in [0.05, 0.7, 1.0, 1.5, 1.99] {
            let cfg = WellConfig::new(1.0, alpha, 0.0, StateKind::Ground).unwrap();
            let disc = make_discretization(&cfg, j, 0.005, 1e-5, 1, None).unwrap();
            let op = assemble(&cfg, &disc).unwrap();
            for _ in 0..50 {
                let v: Vec<f64> = (0..op.dim()).map(|_| rng.gen_range(-1.0..1.0)).collect();
                let e = rel_err(&op.matvec_dense(&v).unwrap(), &op.matvec_fast(&v).unwrap());
                assert!(e <= 1e-10, "J {j} alpha {alpha}: {e:e}");
            }
        }
    }
}

#[test]
fn fast_matches_dense_on_structured_inputs() {
    let cfg = WellConfig::new(0.5, 1.3, 0.0, StateKind::Ground).unwrap();
    let disc = make_discretization(&cfg, 300, 0.005, 1e-5, 1, None).unwrap();
    let op = assemble(&cfg, &disc).unwrap();
    let n = op.dim();
    let mut unit = vec![0.0; n];
    unit[n - 1] = 1.0;
    let alternating: Vec<f64> = (0..n).map(|i| if i % 2 == 0 { 1.0 } else { -1.0 }).collect();
    let ones = vec![1.0; n];
    for v in [unit, alternating, ones] {
        assert!(rel_err(&op.matvec_dense(&v).unwrap(), &op.matvec_fast(&v).unwrap()) <= 1e-12);
    }
    assert!(op.matvec_fast(&[1.0; 3]).is_err());
}

#[test]
fn single_precision_operator_tracks_double() {
    let c32 = fracwell::grid::WellConfig::<f32>::new(1.0, 0.8, 0.0, StateKind::Ground).unwrap();
    let d32 = make_discretization(&c32, 128, 0.005, 1e-5, 1, None).unwrap();
    let op32 = assemble(&c32, &d32).unwrap();
    let c64 = WellConfig::new(1.0, 0.8, 0.0, StateKind::Ground).unwrap();
    let d64 = make_discretization(&c64, 128, 0.005, 1e-5, 1, None).unwrap();
    let op64 = assemble(&c64, &d64).unwrap();
    assert!(((op32.diag() as f64) - op64.diag()).abs() < 1e-5 * op64.diag().abs());
    for (a, b) in op32.offdiag().iter().zip(op64.offdiag()) {
        assert!(((*a as f64) - b).abs() < 1e-5 * b.abs());
    }
}
