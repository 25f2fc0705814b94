//! Physical parameters, numerical parameters and the interior grid.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::special;

/// Which stationary state the flow targets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StateKind {
    Ground,
    FirstExcited,
}

impl StateKind {
    /// State index `s` (0 for ground, 1 for first excited).
    pub fn index(self) -> usize {
        match self {
            StateKind::Ground => 0,
            StateKind::FirstExcited => 1,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            StateKind::Ground => "ground",
            StateKind::FirstExcited => "first",
        }
    }
}

impl std::str::FromStr for StateKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ground" | "g" | "0" => Ok(StateKind::Ground),
            "first" | "first-excited" | "excited" | "1" => Ok(StateKind::FirstExcited),
            other => Err(Error::InvalidParameter(format!("unknown state `{other}`"))),
        }
    }
}

/// Physical problem: well half-width `L`, fractional order `α`, interaction `β`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WellConfig<T> {
    half_width: T,
    alpha: T,
    beta: T,
    state: StateKind,
}

impl<T: Scalar> WellConfig<T> {
    pub fn new(half_width: T, alpha: T, beta: T, state: StateKind) -> Result<Self> {
        if !(half_width > T::zero()) || !half_width.is_finite() {
            return Err(Error::Domain(format!("well half-width must be positive, got {half_width}")));
        }
        if !(alpha > T::zero() && alpha < T::lit(2.0)) {
            return Err(Error::Domain(format!("alpha must lie in (0, 2), got {alpha}")));
        }
        if !(beta >= T::zero()) || !beta.is_finite() {
            return Err(Error::Domain(format!("beta must be non-negative, got {beta}")));
        }
        Ok(Self { half_width, alpha, beta, state })
    }

    pub fn half_width(&self) -> T {
        self.half_width
    }

    pub fn alpha(&self) -> T {
        self.alpha
    }

    pub fn beta(&self) -> T {
        self.beta
    }

    pub fn state(&self) -> StateKind {
        self.state
    }
}

/// Numerical parameters of the quadrature and the time stepping.
///
/// `tail_index` is `M = J` and `truncation` is `A = M h = 2L`; the splitting
/// exponent satisfies `σ = 2 − α − γ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Discretization<T> {
    pub intervals: usize,
    pub h: T,
    pub tail_index: usize,
    pub truncation: T,
    pub gamma: T,
    pub sigma: T,
    pub dt: T,
    pub eps: T,
    pub max_iters: usize,
}

impl<T: Scalar> Discretization<T> {
    /// Number of interior unknowns, `J − 1`.
    pub fn unknowns(&self) -> usize {
        self.intervals - 1
    }
}

/// Default splitting exponent `γ = 1 − α/2`.
pub fn default_gamma<T: Scalar>(alpha: T) -> T {
    T::one() - alpha / T::lit(2.0)
}

pub fn make_discretization<T: Scalar>(
    cfg: &WellConfig<T>,
    intervals: usize,
    dt: T,
    eps: T,
    max_iters: usize,
    gamma_override: Option<T>,
) -> Result<Discretization<T>> {
    if intervals < 8 || !intervals.is_multiple_of(2) {
        return Err(Error::InvalidParameter(format!(
            "J must be an even integer >= 8, got {intervals}"
        )));
    }
    if !(dt > T::zero()) || !dt.is_finite() {
        return Err(Error::InvalidParameter(format!("time step must be positive, got {dt}")));
    }
    if !(eps > T::zero()) {
        return Err(Error::InvalidParameter(format!("tolerance must be positive, got {eps}")));
    }
    if max_iters == 0 {
        return Err(Error::InvalidParameter("max_iters must be positive".into()));
    }
    let alpha = cfg.alpha();
    let upper = T::lit(2.0) - alpha;
    let gamma = match gamma_override {
        Some(g) if g > T::zero() && g < upper => g,
        Some(g) => {
            return Err(Error::InvalidParameter(format!(
                "gamma must lie in (0, {upper}) for alpha = {alpha}; {g} makes the weight integral diverge"
            )))
        }
        None => default_gamma(alpha),
    };
    let sigma = upper - gamma;
    let h = T::lit(2.0) * cfg.half_width() / T::of(intervals);
    Ok(Discretization {
        intervals,
        h,
        tail_index: intervals,
        truncation: T::lit(2.0) * cfg.half_width(),
        gamma,
        sigma,
        dt,
        eps,
        max_iters,
    })
}

/// Normalisation constant `C₁,α = Γ(1+α) sin(απ/2) / π`.
pub fn c1_alpha<T: Scalar>(alpha: T) -> Result<T> {
    if !(alpha > T::zero() && alpha < T::lit(2.0)) {
        return Err(Error::Domain(format!("C1,alpha needs alpha in (0, 2), got {alpha}")));
    }
    let a = alpha.to_f64_lossy();
    let c = special::gamma(1.0 + a) * (a * std::f64::consts::FRAC_PI_2).sin() / std::f64::consts::PI;
    Ok(T::lit(c))
}

/// Interior grid `x_j = −L + j h`, `j = 1..J−1`. The endpoints are excluded.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid<T> {
    points: Vec<T>,
    h: T,
}

impl<T: Scalar> Grid<T> {
    pub fn new(disc: &Discretization<T>) -> Self {
        let half = (disc.intervals / 2) as isize;
        // (j − J/2) h is exactly antisymmetric under j ↦ J − j
        let points = (1..disc.intervals)
            .map(|j| {
                let k = j as isize - half;
                let x = T::of(k.unsigned_abs()) * disc.h;
                if k < 0 { -x } else { x }
            })
            .collect();
        Self { points, h: disc.h }
    }

    pub fn points(&self) -> &[T] {
        &self.points
    }

    pub fn h(&self) -> T {
        self.h
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Index of the centre point `x = 0`.
    pub fn center(&self) -> usize {
        self.points.len() / 2
    }

    /// Index of the grid point nearest to `x`.
    pub fn nearest(&self, x: T) -> usize {
        let mut best = 0;
        for (i, &p) in self.points.iter().enumerate() {
            if (p - x).abs() < (self.points[best] - x).abs() {
                best = i;
            }
        }
        best
    }
}
