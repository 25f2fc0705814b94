//! Discrete Riesz fractional Laplacian on the interior grid.
//!
//! The quadrature splits the principal-value integral at `A = 2L`. The part
//! beyond `A` only sees the zero exterior and integrates exactly to
//! `−2 C₁,α / (α Aᵅ) φ_j`. The part on `[0, A]` uses weights
//!
//! ```text
//! w_l = ((l+1)^σ − (l−1)^σ) / l^(2−γ)
//! ```
//!
//! giving a symmetric Toeplitz matrix `D` with
//!
//! ```text
//! D_jk = C₁,α / (2σhᵅ) · w_|j−k|                                   (j ≠ k)
//! D_jj = −C₁,α / (σhᵅ) · (Σ_{l<M} w_l + (M^σ − (M−1)^σ)/M^(2−γ)) − 2C₁,α/(αAᵅ)
//! ```
//!
//! The innermost cell contribution vanishes as `h → 0` for smooth data and is
//! dropped. `D` approximates `−(−Δ)^{α/2}`, so it is negative definite.

use std::io::Write;
use std::sync::Arc;

use num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::grid::{c1_alpha, Discretization, WellConfig};
use crate::scalar::Scalar;

/// `(l+1)^σ − (l−1)^σ`, evaluated without cancellation for large `l`.
fn power_difference<T: Scalar>(l: usize, sigma: T) -> T {
    let lf = T::of(l);
    if l < 2 {
        return (lf + T::one()).powf(sigma) - (lf - T::one()).powf(sigma);
    }
    let inv = lf.recip();
    let up = (sigma * inv.ln_1p()).exp_m1();
    let down = (sigma * (-inv).ln_1p()).exp_m1();
    lf.powf(sigma) * (up - down)
}

/// Quadrature weight `w_l` for lag `l ≥ 1`.
pub fn lag_weight<T: Scalar>(l: usize, sigma: T, gamma: T) -> T {
    power_difference(l, sigma) / T::of(l).powf(T::lit(2.0) - gamma)
}

/// FFT machinery for the circulant embedding of a symmetric Toeplitz matrix.
pub(crate) struct ToeplitzFft<T: Scalar> {
    n: usize,
    symbol: Vec<T>,
    forward: Arc<dyn Fft<T>>,
    inverse: Arc<dyn Fft<T>>,
}

impl<T: Scalar> ToeplitzFft<T> {
    /// `column` is the first column `(a_0, a_1, …, a_{n−1})`.
    pub(crate) fn new(column: &[T]) -> Self {
        let n = column.len();
        let padded = (2 * n).next_power_of_two().max(2);
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(padded);
        let inverse = planner.plan_fft_inverse(padded);
        let mut c = vec![Complex::new(T::zero(), T::zero()); padded];
        c[0].re = column[0];
        for k in 1..n {
            c[k].re = column[k];
            c[padded - k].re = column[k];
        }
        forward.process(&mut c);
        let scale = T::of(padded).recip();
        let symbol = c.iter().map(|z| z.re * scale).collect();
        Self { n, symbol, forward, inverse }
    }

    pub(crate) fn scratch(&self) -> Vec<Complex<T>> {
        vec![Complex::new(T::zero(), T::zero()); self.symbol.len()]
    }

    pub(crate) fn apply(&self, v: &[T], out: &mut [T], buf: &mut [Complex<T>]) {
        debug_assert_eq!(v.len(), self.n);
        for (b, &x) in buf.iter_mut().zip(v) {
            *b = Complex::new(x, T::zero());
        }
        for b in buf[self.n..].iter_mut() {
            *b = Complex::new(T::zero(), T::zero());
        }
        self.forward.process(buf);
        for (b, &s) in buf.iter_mut().zip(&self.symbol) {
            *b *= s;
        }
        self.inverse.process(buf);
        for (o, b) in out.iter_mut().zip(buf.iter()) {
            *o = b.re;
        }
    }
}

impl<T: Scalar> std::fmt::Debug for ToeplitzFft<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ToeplitzFft").field("n", &self.n).field("padded", &self.symbol.len()).finish()
    }
}

/// Symmetric Toeplitz matrix `D`, stored as its diagonal and the off-diagonal lags.
#[derive(Debug)]
pub struct FractionalOperator<T: Scalar> {
    diag: T,
    offdiag: Vec<T>,
    cfg: WellConfig<T>,
    disc: Discretization<T>,
    fft: ToeplitzFft<T>,
}

pub fn assemble<T: Scalar>(cfg: &WellConfig<T>, disc: &Discretization<T>) -> Result<FractionalOperator<T>> {
    let alpha = cfg.alpha();
    let (sigma, gamma, h) = (disc.sigma, disc.gamma, disc.h);
    if disc.tail_index != disc.intervals || !(sigma > T::zero()) {
        return Err(Error::InvalidParameter("discretization is inconsistent with the well".into()));
    }
    let c1 = c1_alpha(alpha)?;
    let m = disc.tail_index;
    let n = disc.unknowns();
    let scale = c1 / (sigma * h.powf(alpha));

    let weights: Vec<T> = (1..m).map(|l| lag_weight(l, sigma, gamma)).collect();
    // smallest terms first
    let near_sum: T = weights.iter().rev().copied().sum();
    let mf = T::of(m);
    let last = power_difference_tail(m, sigma) / mf.powf(T::lit(2.0) - gamma);
    let far = T::lit(2.0) * c1 / (alpha * disc.truncation.powf(alpha));
    let diag = -scale * (near_sum + last) - far;

    let half = scale / T::lit(2.0);
    let offdiag: Vec<T> = weights[..n - 1].iter().map(|&w| half * w).collect();

    let mut column = Vec::with_capacity(n);
    column.push(diag);
    column.extend_from_slice(&offdiag);
    let fft = ToeplitzFft::new(&column);
    Ok(FractionalOperator { diag, offdiag, cfg: *cfg, disc: *disc, fft })
}

/// `M^σ − (M−1)^σ`.
fn power_difference_tail<T: Scalar>(m: usize, sigma: T) -> T {
    let mf = T::of(m);
    if m < 2 {
        return mf.powf(sigma);
    }
    -mf.powf(sigma) * (sigma * (-mf.recip()).ln_1p()).exp_m1()
}

impl<T: Scalar> FractionalOperator<T> {
    pub fn diag(&self) -> T {
        self.diag
    }

    /// Off-diagonal lags `t_1 … t_{J−2}`.
    pub fn offdiag(&self) -> &[T] {
        &self.offdiag
    }

    pub fn config(&self) -> &WellConfig<T> {
        &self.cfg
    }

    pub fn discretization(&self) -> &Discretization<T> {
        &self.disc
    }

    /// Matrix dimension `J − 1`.
    pub fn dim(&self) -> usize {
        self.offdiag.len() + 1
    }

    /// Entry `D_jk` (zero-based).
    pub fn entry(&self, j: usize, k: usize) -> T {
        if j == k {
            self.diag
        } else {
            self.offdiag[j.abs_diff(k) - 1]
        }
    }

    /// First column `(D_11, t_1, …, t_{J−2})`.
    pub fn first_column(&self) -> Vec<T> {
        std::iter::once(self.diag).chain(self.offdiag.iter().copied()).collect()
    }

    /// Row-major dense copy.
    pub fn to_dense(&self) -> Vec<T> {
        let n = self.dim();
        let mut a = vec![T::zero(); n * n];
        for j in 0..n {
            for k in 0..n {
                a[j * n + k] = self.entry(j, k);
            }
        }
        a
    }

    fn check_len(&self, v: &[T]) -> Result<()> {
        if v.len() != self.dim() {
            return Err(Error::LengthMismatch { expected: self.dim(), got: v.len() });
        }
        Ok(())
    }

    /// `D v` by direct O(J²) summation.
    pub fn matvec_dense(&self, v: &[T]) -> Result<Vec<T>> {
        self.check_len(v)?;
        let n = self.dim();
        let mut out = vec![T::zero(); n];
        for (j, o) in out.iter_mut().enumerate() {
            let mut acc = self.diag * v[j];
            for (k, &vk) in v.iter().enumerate().take(j) {
                acc += self.offdiag[j - k - 1] * vk;
            }
            for (k, &vk) in v.iter().enumerate().skip(j + 1) {
                acc += self.offdiag[k - j - 1] * vk;
            }
            *o = acc;
        }
        Ok(out)
    }

    /// `D v` in O(J log J) via circulant embedding.
    pub fn matvec_fast(&self, v: &[T]) -> Result<Vec<T>> {
        self.check_len(v)?;
        let mut out = vec![T::zero(); v.len()];
        let mut buf = self.fft.scratch();
        self.fft.apply(v, &mut out, &mut buf);
        Ok(out)
    }

    pub(crate) fn fft(&self) -> &ToeplitzFft<T> {
        &self.fft
    }

    /// Writes the weight table as `lag,weight` CSV (lag 0 is the diagonal).
    pub fn write_weights_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "lag,weight")?;
        for (lag, x) in self.first_column().into_iter().enumerate() {
            writeln!(w, "{lag},{:e}", x.to_f64_lossy())?;
        }
        Ok(())
    }
}

/// Discrete `(−Δ)^{α/2} f` at the interior points, i.e. `−D f`, for samples of a
/// function that vanishes outside the well.
pub fn apply_to_samples<T: Scalar>(cfg: &WellConfig<T>, disc: &Discretization<T>, f: &[T]) -> Result<Vec<T>> {
    let op = assemble(cfg, disc)?;
    let mut out = op.matvec_fast(f)?;
    for x in out.iter_mut() {
        *x = -*x;
    }
    Ok(out)
}
