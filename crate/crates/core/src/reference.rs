//! Closed-form standard-Laplacian results and published eigenvalue estimates.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::special;

/// Below this interaction strength the Thomas–Fermi profile is a poor approximation.
pub const THOMAS_FERMI_MIN_BETA: f64 = 10.0;

fn check_state(s: usize) -> Result<()> {
    if s > 1 {
        return Err(Error::Domain(format!("only s = 0 or s = 1 is supported, got {s}")));
    }
    Ok(())
}

fn check_alpha<T: Scalar>(alpha: T) -> Result<()> {
    if !(alpha > T::zero() && alpha <= T::lit(2.0)) {
        return Err(Error::Domain(format!("alpha must lie in (0, 2], got {alpha}")));
    }
    Ok(())
}

/// `(φ_s(x), μ_s)` for the standard Laplacian: `√(1/L) sin((s+1)π(1+x/L)/2)` and `((s+1)π/2L)²`.
pub fn standard_eigenpair<T: Scalar>(s: usize, half_width: T, x: T) -> Result<(T, T)> {
    check_state(s)?;
    if x.abs() > half_width {
        return Err(Error::Domain(format!("x = {x} lies outside the well")));
    }
    let k = T::of(s + 1) * T::PI() / T::lit(2.0);
    let phi = half_width.recip().sqrt() * (k * (T::one() + x / half_width)).sin();
    let mu = (k / half_width).powi(2);
    Ok((phi, mu))
}

/// Leading-order eigenvalue in the strong-interaction limit.
pub fn thomas_fermi_mu<T: Scalar>(s: usize, beta: T, half_width: T) -> T {
    let l = half_width;
    let s2 = T::of(s + 2);
    (l * beta / T::lit(2.0) + s2 * (beta * l + s2 * s2).sqrt() + s2 * s2) / (l * l)
}

/// `(φ_s^a(x), μ_s^a)`: tanh-sum Thomas–Fermi profile and its eigenvalue.
pub fn thomas_fermi<T: Scalar>(s: usize, beta: T, half_width: T, x: T) -> Result<(T, T)> {
    check_state(s)?;
    if !(beta > T::zero()) {
        return Err(Error::Domain(format!("Thomas-Fermi profile needs beta > 0, got {beta}")));
    }
    let mu = thomas_fermi_mu(s, beta, half_width);
    let k = (T::lit(2.0) * mu).sqrt() * half_width / T::lit(2.0);
    let y = T::one() + x / half_width;
    let sp1 = T::of(s + 1);
    let mut acc = T::zero();
    for r in 0..=s.div_ceil(2) {
        acc += (k * (y - T::of(4 * r) / sp1)).tanh();
    }
    for r in 0..=s / 2 {
        acc += (k * (T::of(4 * r + 2) / sp1 - y)).tanh();
    }
    if s.is_multiple_of(2) {
        acc -= k.tanh();
    }
    Ok(((mu / beta).sqrt() * acc, mu))
}

/// Bounds `½((s+1)π/l)^α ≤ μ_s ≤ ((s+1)π/l)^α` for an interval of length `l`.
pub fn chen_bounds<T: Scalar>(s: usize, alpha: T, interval: T) -> Result<(T, T)> {
    check_alpha(alpha)?;
    let upper = (T::of(s + 1) * T::PI() / interval).powf(alpha);
    Ok((upper / T::lit(2.0), upper))
}

/// Ground-state bounds `p(α) ≤ μ₀ ≤ p(α) B(½, 1+α/2) / B(½, 1+α)` on `(−1, 1)`.
pub fn banuelos_bounds<T: Scalar>(alpha: T) -> Result<(T, T)> {
    check_alpha(alpha)?;
    let a = alpha.to_f64_lossy();
    let p = 2f64.powf(a) * special::gamma(1.0 + a / 2.0) * special::gamma((1.0 + a) / 2.0) / special::gamma(0.5);
    let upper = p * special::beta(0.5, 1.0 + a / 2.0) / special::beta(0.5, 1.0 + a);
    Ok((T::lit(p), T::lit(upper)))
}

/// Leading asymptotic term `((s+1)π/2 − (2−α)π/8)^α` on `(−1, 1)`.
pub fn kwasnicki_mu<T: Scalar>(s: usize, alpha: T) -> Result<T> {
    check_state(s)?;
    check_alpha(alpha)?;
    let pi = T::PI();
    Ok((T::of(s + 1) * pi / T::lit(2.0) - (T::lit(2.0) - alpha) * pi / T::lit(8.0)).powf(alpha))
}

/// `Var_s = (L²/3)(1 − 6/(π²(s+1)²))` for the standard eigenfunctions.
pub fn standard_variance<T: Scalar>(s: usize, half_width: T) -> T {
    let k = T::PI() * T::of(s + 1);
    half_width * half_width / T::lit(3.0) * (T::one() - T::lit(6.0) / (k * k))
}

/// Reference columns for one `(α, s)` pair on `(−1, 1)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundsRow {
    pub alpha: f64,
    pub s: usize,
    pub chen_lower: f64,
    pub chen_upper: f64,
    /// Ground state only.
    pub banuelos_lower: Option<f64>,
    pub banuelos_upper: Option<f64>,
    pub kwasnicki: f64,
}

impl BoundsRow {
    pub fn new(alpha: f64, s: usize) -> Result<Self> {
        let (chen_lower, chen_upper) = chen_bounds(s, alpha, 2.0)?;
        let (bl, bu) = if s == 0 {
            let (l, u) = banuelos_bounds(alpha)?;
            (Some(l), Some(u))
        } else {
            (None, None)
        };
        Ok(Self {
            alpha,
            s,
            chen_lower,
            chen_upper,
            banuelos_lower: bl,
            banuelos_upper: bu,
            kwasnicki: kwasnicki_mu(s, alpha)?,
        })
    }

    /// Tightest available bracket: Bañuelos for the ground state, Chen otherwise.
    pub fn lower(&self) -> f64 {
        self.banuelos_lower.unwrap_or(self.chen_lower)
    }

    pub fn upper(&self) -> f64 {
        self.banuelos_upper.unwrap_or(self.chen_upper)
    }
}
