//! Quantities reported for a converged state.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::flow::StateVector;
use crate::grid::{Grid, StateKind};
use crate::operator::FractionalOperator;
use crate::scalar::Scalar;

/// Default slope threshold for the boundary-layer width.
pub const DEFAULT_ETA: f64 = std::f64::consts::FRAC_1_SQRT_2;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Observables {
    pub mu: f64,
    pub mu_kin: f64,
    pub mu_int: f64,
    pub energy: f64,
    pub expected_x: f64,
    pub variance_x: f64,
    /// Location of the density maximum on `(0, L)`; first excited states only.
    pub x_c: Option<f64>,
    pub rho_max: Option<f64>,
    /// Boundary-layer width; ground states only, `None` when no layer is detected.
    pub layer_width: Option<f64>,
}

/// `(μ, μ_kin, μ_int)` with `μ_kin = −h Φᵀ D Φ` and `μ_int = β h Σ φ⁴`.
pub fn chemical_potential<T: Scalar>(op: &FractionalOperator<T>, phi: &StateVector<T>, beta: T) -> Result<(T, T, T)> {
    let dphi = op.matvec_fast(&phi.values)?;
    let kin = -phi.h * phi.values.iter().zip(&dphi).map(|(&a, &b)| a * b).sum::<T>();
    let int = beta * quartic(phi);
    Ok((kin + int, kin, int))
}

fn quartic<T: Scalar>(phi: &StateVector<T>) -> T {
    phi.h * phi.values.iter().map(|&p| p * p * p * p).sum::<T>()
}

/// `E = μ_kin + (β/2) h Σ φ⁴` (the potential vanishes inside the well).
pub fn total_energy<T: Scalar>(op: &FractionalOperator<T>, phi: &StateVector<T>, beta: T) -> Result<T> {
    let (_, kin, _) = chemical_potential(op, phi, beta)?;
    Ok(kin + beta * quartic(phi) / T::lit(2.0))
}

/// `(⟨x⟩, Var(x))` by the rectangle rule over the interior points.
pub fn position_moments<T: Scalar>(phi: &StateVector<T>, grid: &Grid<T>) -> (T, T) {
    let h = phi.h;
    let mean = h * grid.points().iter().zip(&phi.values).map(|(&x, &p)| x * p * p).sum::<T>();
    let var = h * grid
        .points()
        .iter()
        .zip(&phi.values)
        .map(|(&x, &p)| (x - mean) * (x - mean) * p * p)
        .sum::<T>();
    (mean, var)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensityPeak<T> {
    pub x_c: T,
    pub rho_max: T,
    /// Points (contiguous with the maximum) whose density equals the maximum to 1e−9 relative.
    pub plateau: usize,
    /// Plateau wider than three cells: the location is not well defined.
    pub ambiguous: bool,
}

/// Grid argmax of `φ²` on `x > 0`.
pub fn density_peak<T: Scalar>(phi: &StateVector<T>, grid: &Grid<T>) -> Option<DensityPeak<T>> {
    let pts = grid.points();
    let start = pts.iter().position(|&x| x > T::zero())?;
    let mut best = start;
    for i in start..pts.len() {
        if phi.values[i] * phi.values[i] > phi.values[best] * phi.values[best] {
            best = i;
        }
    }
    let rho = phi.values[best] * phi.values[best];
    let flat = |i: usize| rho - phi.values[i] * phi.values[i] <= T::lit(1e-9) * rho;
    let mut lo = best;
    while lo > start && flat(lo - 1) {
        lo -= 1;
    }
    let mut hi = best;
    while hi + 1 < pts.len() && flat(hi + 1) {
        hi += 1;
    }
    let plateau = hi - lo + 1;
    Some(DensityPeak { x_c: pts[best], rho_max: rho, plateau, ambiguous: plateau > 3 })
}

/// Central-difference derivative, one-sided at the two end points.
pub fn derivative<T: Scalar>(values: &[T], h: T) -> Vec<T> {
    let n = values.len();
    if n < 2 {
        return vec![T::zero(); n];
    }
    let two_h = T::lit(2.0) * h;
    (0..n)
        .map(|i| match i {
            0 => (values[1] - values[0]) / h,
            i if i == n - 1 => (values[n - 1] - values[n - 2]) / h,
            i => (values[i + 1] - values[i - 1]) / two_h,
        })
        .collect()
}

fn crossing<T: Scalar, I: Iterator<Item = usize>>(d: &[T], pts: &[T], order: I, eta: T) -> Option<T> {
    let mut prev: Option<usize> = None;
    for i in order {
        if let Some(p) = prev {
            let (a, b) = (d[p].abs(), d[i].abs());
            if a >= eta && b < eta {
                let t = (a - eta) / (a - b);
                return Some(pts[p] + t * (pts[i] - pts[p]));
            }
        }
        prev = Some(i);
    }
    None
}

/// Boundary-layer width `w = L − |x̄|`, where `x̄` is the first point, scanning
/// inward from `−L`, at which `|φ′|` falls through `eta`. `x̄` is linearly
/// interpolated between grid points. Returns `None` when no crossing exists.
pub fn layer_width<T: Scalar>(phi: &StateVector<T>, grid: &Grid<T>, half_width: T, eta: T) -> Option<T> {
    let d = derivative(&phi.values, phi.h);
    let pts = grid.points();
    crossing(&d, pts, 0..grid.center() + 1, eta).map(|x| half_width - x.abs())
}

/// Same as [`layer_width`] but scanning inward from `+L`.
pub fn layer_width_right<T: Scalar>(phi: &StateVector<T>, grid: &Grid<T>, half_width: T, eta: T) -> Option<T> {
    let d = derivative(&phi.values, phi.h);
    let pts = grid.points();
    crossing(&d, pts, (grid.center()..pts.len()).rev(), eta).map(|x| half_width - x.abs())
}

/// All observables of a converged state.
pub fn compute<T: Scalar>(
    op: &FractionalOperator<T>,
    phi: &StateVector<T>,
    grid: &Grid<T>,
    beta: T,
    state: StateKind,
) -> Result<Observables> {
    let (mu, kin, int) = chemical_potential(op, phi, beta)?;
    let energy = kin + beta * quartic(phi) / T::lit(2.0);
    let (mean, var) = position_moments(phi, grid);
    let half_width = op.config().half_width();
    let (x_c, rho_max) = match state {
        StateKind::FirstExcited => match density_peak(phi, grid) {
            Some(p) => (Some(p.x_c.to_f64_lossy()), Some(p.rho_max.to_f64_lossy())),
            None => (None, None),
        },
        StateKind::Ground => (None, None),
    };
    let layer = match state {
        StateKind::Ground => layer_width(phi, grid, half_width, T::lit(DEFAULT_ETA)).map(|w| w.to_f64_lossy()),
        StateKind::FirstExcited => None,
    };
    Ok(Observables {
        mu: mu.to_f64_lossy(),
        mu_kin: kin.to_f64_lossy(),
        mu_int: int.to_f64_lossy(),
        energy: energy.to_f64_lossy(),
        expected_x: mean.to_f64_lossy(),
        variance_x: var.to_f64_lossy(),
        x_c,
        rho_max,
        layer_width: layer,
    })
}

/// `‖−DΦ + β Φ³ − μΦ‖_∞`.
pub fn eigen_residual<T: Scalar>(op: &FractionalOperator<T>, phi: &StateVector<T>, beta: T, mu: T) -> Result<T> {
    let dphi = op.matvec_fast(&phi.values)?;
    Ok(phi
        .values
        .iter()
        .zip(&dphi)
        .fold(T::zero(), |m, (&p, &d)| m.max((-d + beta * p * p * p - mu * p).abs())))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{make_discretization, WellConfig};
    use crate::operator::assemble;

    fn grid(j: usize) -> Grid<f64> {
        let cfg = WellConfig::new(1.0, 1.0, 0.0, StateKind::Ground).unwrap();
        Grid::new(&make_discretization(&cfg, j, 0.005, 1e-5, 10, None).unwrap())
    }

    fn sampled(g: &Grid<f64>, f: impl Fn(f64) -> f64) -> StateVector<f64> {
        crate::flow::project(&StateVector::new(g.points().iter().map(|&x| f(x)).collect(), g.h())).unwrap()
    }

    #[test]
    fn even_state_has_zero_mean() {
        let g = grid(128);
        let phi = sampled(&g, |x| (1.0 - x * x).powf(0.3) + 0.2 * x.powi(4));
        let (m, v) = position_moments(&phi, &g);
        assert!(m.abs() < 1e-10);
        assert!(v > 0.0 && v < 1.0);
    }

    #[test]
    fn standard_sine_variance() {
        let g = grid(2048);
        let phi = sampled(&g, |x| (std::f64::consts::FRAC_PI_2 * (1.0 + x)).sin());
        let (_, v) = position_moments(&phi, &g);
        let exact = (1.0 - 6.0 / std::f64::consts::PI.powi(2)) / 3.0;
        assert!((v - exact).abs() < 1e-6);
    }

    #[test]
    fn sine_peak_on_grid() {
        let g = grid(256);
        let phi = sampled(&g, |x| (std::f64::consts::PI * (1.0 + x)).sin());
        let p = density_peak(&phi, &g).unwrap();
        assert_eq!(p.x_c, g.points()[g.nearest(0.5)]);
        assert!(!p.ambiguous);
        assert!((p.rho_max - 1.0).abs() < 1e-3);
    }

    #[test]
    fn flat_peak_is_flagged() {
        let g = grid(64);
        let phi = sampled(&g, |x| if x.abs() < 0.05 { 0.0 } else if x > 0.0 { -1.0 } else { 1.0 });
        assert!(density_peak(&phi, &g).unwrap().ambiguous);
    }

    #[test]
    fn synthetic_tanh_layer() {
        // 40-digit reference: crossing of the normalised profile's exact derivative
        let want = 0.109_571_213_182_017_9;
        let delta = 0.05;
        let g = grid(2048);
        let phi = sampled(&g, |x| ((1.0 + x) / delta).tanh() * ((1.0 - x) / delta).tanh());
        let w = layer_width(&phi, &g, 1.0, DEFAULT_ETA).unwrap();
        assert!((w - want).abs() / want < 0.2, "w = {w}");
        let wr = layer_width_right(&phi, &g, 1.0, DEFAULT_ETA).unwrap();
        assert!((w - wr).abs() <= 2.0 * g.h());
    }

    #[test]
    fn flat_state_has_no_layer() {
        let g = grid(64);
        let phi = sampled(&g, |x| 1.0 + 0.01 * x * x);
        assert!(layer_width(&phi, &g, 1.0, DEFAULT_ETA).is_none());
    }

    #[test]
    fn identities_on_arbitrary_state() {
        let cfg = WellConfig::new(1.0, 1.2, 2.0, StateKind::Ground).unwrap();
        let disc = make_discretization(&cfg, 128, 0.005, 1e-5, 10, None).unwrap();
        let op = assemble(&cfg, &disc).unwrap();
        let g = Grid::new(&disc);
        let phi = sampled(&g, |x| (1.0 - x * x).sqrt());
        let (mu, kin, int) = chemical_potential(&op, &phi, 2.0).unwrap();
        assert!(kin > 0.0);
        assert!((mu - kin - int).abs() < 1e-12);
        let e = total_energy(&op, &phi, 2.0).unwrap();
        assert!((e - (mu - int / 2.0)).abs() < 1e-12);
        let (mu0, kin0, int0) = chemical_potential(&op, &phi, 0.0).unwrap();
        assert_eq!(int0, 0.0);
        assert_eq!(mu0, kin0);
        assert_eq!(total_energy(&op, &phi, 0.0).unwrap(), kin0);
    }
}
