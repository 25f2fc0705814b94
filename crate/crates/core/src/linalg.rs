//! Dense Cholesky, a circulant preconditioner and preconditioned CG for the
//! symmetric positive definite systems of the time stepper.

use std::sync::Arc;

use num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::scalar::{dot, max_abs, Scalar};

/// Lower-triangular Cholesky factor, row-major.
#[derive(Debug, Clone)]
pub struct Cholesky<T> {
    n: usize,
    l: Vec<T>,
}

impl<T: Scalar> Cholesky<T> {
    /// Factors a row-major symmetric matrix; only the lower triangle is read.
    pub fn factor(mut a: Vec<T>, n: usize) -> Result<Self> {
        assert_eq!(a.len(), n * n);
        for j in 0..n {
            let (head, tail) = a.split_at_mut(j * n);
            let row_j = &mut tail[..n];
            // row j against the already-factored rows
            for k in 0..j {
                let row_k = &head[k * n..k * n + k];
                let s = row_j[k] - dot(&row_j[..k], row_k);
                row_j[k] = s / head[k * n + k];
            }
            let d = row_j[j] - dot(&row_j[..j], &row_j[..j]);
            if !(d > T::zero()) {
                return Err(Error::NotPositiveDefinite { index: j, value: d.to_f64_lossy() });
            }
            row_j[j] = d.sqrt();
            for x in row_j[j + 1..].iter_mut() {
                *x = T::zero();
            }
        }
        Ok(Self { n, l: a })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Solves `L Lᵀ x = b` in place.
    pub fn solve_in_place(&self, x: &mut [T]) {
        let n = self.n;
        for i in 0..n {
            let row = &self.l[i * n..i * n + i];
            x[i] = (x[i] - dot(row, &x[..i])) / self.l[i * n + i];
        }
        for i in (0..n).rev() {
            let xi = x[i] / self.l[i * n + i];
            x[i] = xi;
            let row = &self.l[i * n..i * n + i];
            for (xk, &lik) in x[..i].iter_mut().zip(row) {
                *xk -= lik * xi;
            }
        }
    }
}

/// Strang circulant approximation of a symmetric Toeplitz matrix, applied
/// through its FFT eigenvalues.
pub struct CirculantPreconditioner<T: Scalar> {
    inv_eig: Vec<T>,
    forward: Arc<dyn Fft<T>>,
    inverse: Arc<dyn Fft<T>>,
}

impl<T: Scalar> CirculantPreconditioner<T> {
    /// `column` is the first column of the Toeplitz matrix.
    pub fn new(column: &[T]) -> Result<Self> {
        let n = column.len();
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(n);
        let inverse = planner.plan_fft_inverse(n);
        let mut c: Vec<Complex<T>> = (0..n)
            .map(|k| {
                let lag = if k <= n / 2 { k } else { n - k };
                Complex::new(column[lag], T::zero())
            })
            .collect();
        forward.process(&mut c);
        let scale = T::of(n).recip();
        let mut inv_eig = Vec::with_capacity(n);
        for (i, z) in c.iter().enumerate() {
            if !(z.re > T::zero()) {
                return Err(Error::NotPositiveDefinite { index: i, value: z.re.to_f64_lossy() });
            }
            inv_eig.push(scale / z.re);
        }
        Ok(Self { inv_eig, forward, inverse })
    }

    pub fn apply(&self, r: &[T], z: &mut [T], buf: &mut Vec<Complex<T>>) {
        buf.clear();
        buf.extend(r.iter().map(|&x| Complex::new(x, T::zero())));
        self.forward.process(buf);
        for (b, &s) in buf.iter_mut().zip(&self.inv_eig) {
            *b *= s;
        }
        self.inverse.process(buf);
        for (o, b) in z.iter_mut().zip(buf.iter()) {
            *o = b.re;
        }
    }
}

impl<T: Scalar> std::fmt::Debug for CirculantPreconditioner<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("CirculantPreconditioner").field("n", &self.inv_eig.len()).finish()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CgStats {
    pub iterations: usize,
    pub relative_residual: f64,
}

/// Preconditioned conjugate gradients for an SPD operator.
///
/// `x` holds the initial guess on entry. Stops once the recurrence residual
/// satisfies `‖r‖_∞ ≤ tol ‖b‖_∞`.
pub fn pcg<T, A, P>(mut apply: A, mut precond: P, b: &[T], x: &mut [T], tol: T, max_iter: usize) -> Result<CgStats>
where
    T: Scalar,
    A: FnMut(&[T], &mut [T]),
    P: FnMut(&[T], &mut [T]),
{
    let n = b.len();
    let b_norm = max_abs(b);
    if b_norm == T::zero() {
        x.iter_mut().for_each(|v| *v = T::zero());
        return Ok(CgStats { iterations: 0, relative_residual: 0.0 });
    }
    let target = tol * b_norm;
    let mut r = vec![T::zero(); n];
    apply(x, &mut r);
    for (ri, &bi) in r.iter_mut().zip(b) {
        *ri = bi - *ri;
    }
    let mut res = max_abs(&r);
    if res <= target {
        return Ok(CgStats { iterations: 0, relative_residual: (res / b_norm).to_f64_lossy() });
    }
    let mut z = vec![T::zero(); n];
    precond(&r, &mut z);
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    let mut ap = vec![T::zero(); n];
    for it in 1..=max_iter {
        apply(&p, &mut ap);
        let pap = dot(&p, &ap);
        if !(pap > T::zero()) {
            return Err(Error::NotPositiveDefinite { index: it, value: pap.to_f64_lossy() });
        }
        let step = rz / pap;
        for i in 0..n {
            x[i] += step * p[i];
            r[i] -= step * ap[i];
        }
        res = max_abs(&r);
        if res <= target {
            return Ok(CgStats { iterations: it, relative_residual: (res / b_norm).to_f64_lossy() });
        }
        precond(&r, &mut z);
        let rz_next = dot(&r, &z);
        let ratio = rz_next / rz;
        rz = rz_next;
        for i in 0..n {
            p[i] = z[i] + ratio * p[i];
        }
    }
    Err(Error::InnerIterationCap { iterations: max_iter, residual: (res / b_norm).to_f64_lossy() })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spd(n: usize) -> Vec<f64> {
        // 1D Dirichlet Laplacian plus identity
        let mut a = vec![0.0; n * n];
        for i in 0..n {
            a[i * n + i] = 3.0;
            if i > 0 {
                a[i * n + i - 1] = -1.0;
                a[(i - 1) * n + i] = -1.0;
            }
        }
        a
    }

    fn matmul(a: &[f64], x: &[f64]) -> Vec<f64> {
        let n = x.len();
        (0..n).map(|i| (0..n).map(|k| a[i * n + k] * x[k]).sum()).collect()
    }

    #[test]
    fn cholesky_solves() {
        let n = 40;
        let a = spd(n);
        let x_true: Vec<f64> = (0..n).map(|i| (i as f64 * 0.3).sin()).collect();
        let b = matmul(&a, &x_true);
        let ch = Cholesky::factor(a, n).unwrap();
        let mut x = b.clone();
        ch.solve_in_place(&mut x);
        for (u, v) in x.iter().zip(&x_true) {
            assert!((u - v).abs() < 1e-13);
        }
    }

    #[test]
    fn cholesky_rejects_indefinite() {
        let a = vec![1.0, 2.0, 2.0, 1.0];
        assert!(matches!(Cholesky::factor(a, 2), Err(Error::NotPositiveDefinite { index: 1, .. })));
    }

    #[test]
    fn pcg_matches_direct() {
        let n = 50;
        let a = spd(n);
        let b: Vec<f64> = (0..n).map(|i| 1.0 + (i % 7) as f64).collect();
        let mut x = vec![0.0; n];
        let stats = pcg(
            |v, out| out.copy_from_slice(&matmul(&a, v)),
            |r, z| z.copy_from_slice(r),
            &b,
            &mut x,
            1e-13,
            500,
        )
        .unwrap();
        assert!(stats.relative_residual <= 1e-13);
        let r = matmul(&a, &x);
        for (u, v) in r.iter().zip(&b) {
            assert!((u - v).abs() < 1e-11);
        }
    }

    #[test]
    fn pcg_reports_cap() {
        let n = 50;
        let a = spd(n);
        let b = vec![1.0; n];
        let mut x = vec![0.0; n];
        let err = pcg(|v, out| out.copy_from_slice(&matmul(&a, v)), |r, z| z.copy_from_slice(r), &b, &mut x, 1e-14, 2)
            .unwrap_err();
        assert!(matches!(err, Error::InnerIterationCap { iterations: 2, .. }));
    }

    #[test]
    fn circulant_inverts_circulant() {
        // a symmetric Toeplitz matrix that is itself circulant under Strang's rule
        let n = 9;
        let col = [4.0, -1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, -1.0];
        let pre = CirculantPreconditioner::new(&[4.0, -1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0]).unwrap();
        let mut a = vec![0.0; n * n];
        for i in 0..n {
            for k in 0..n {
                a[i * n + k] = col[(k + n - i) % n];
            }
        }
        let x: Vec<f64> = (0..n).map(|i| i as f64).collect();
        let b = matmul(&a, &x);
        let mut z = vec![0.0; n];
        let mut buf = Vec::new();
        pre.apply(&b, &mut z, &mut buf);
        for (u, v) in z.iter().zip(&x) {
            assert!((u - v).abs() < 1e-12);
        }
    }
}
