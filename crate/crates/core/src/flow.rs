//! Fractional gradient flow with discrete normalization.
//!
//! Each step solves the semi-implicit Euler system for `Φ⁽¹⁾` and projects it
//! back onto the unit discrete-mass sphere. Iteration stops once
//! `‖Φⁿ⁺¹ − Φⁿ‖_∞ / Δt < ε`.

use std::time::Instant;

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{Discretization, Grid, StateKind, WellConfig};
use crate::linalg::{pcg, CirculantPreconditioner, Cholesky};
use crate::operator::{assemble, FractionalOperator};
use crate::scalar::{max_abs, Scalar};

/// Default iteration cap of the outer flow.
pub const DEFAULT_MAX_ITERS: usize = 500_000;
/// Relative residual target of the inner linear solves.
pub const INNER_TOLERANCE: f64 = 1e-12;
const MAX_INNER_ITERS: usize = 5_000;

/// Wave-function samples at the interior points. Exterior values are zero and never stored.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector<T> {
    pub values: Vec<T>,
    pub h: T,
}

impl<T: Scalar> StateVector<T> {
    pub fn new(values: Vec<T>, h: T) -> Self {
        Self { values, h }
    }

    /// Discrete mass `h Σ φ_j²`.
    pub fn mass(&self) -> T {
        self.h * self.values.iter().map(|&v| v * v).sum::<T>()
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Rescales to unit discrete mass.
pub fn project<T: Scalar>(phi: &StateVector<T>) -> Result<StateVector<T>> {
    let norm = phi.mass().sqrt();
    if !(norm > T::zero()) || !norm.is_finite() {
        return Err(Error::FlowCollapse);
    }
    let inv = norm.recip();
    Ok(StateVector::new(phi.values.iter().map(|&v| v * inv).collect(), phi.h))
}

/// Normalised samples of `sin((s+1)π(1+x/L)/2)`.
pub fn initial_state<T: Scalar>(cfg: &WellConfig<T>, grid: &Grid<T>) -> StateVector<T> {
    let k = T::of(cfg.state().index() + 1) * T::FRAC_PI_2();
    let l = cfg.half_width();
    let values: Vec<T> = grid.points().iter().map(|&x| (k * (T::one() + x / l)).sin()).collect();
    let mut phi = StateVector::new(values, grid.h());
    if cfg.state() == StateKind::FirstExcited {
        // sin(π) is not exactly zero in floating point
        let c = grid.center();
        phi.values[c] = T::zero();
    }
    project(&phi).expect("initial profile is nonzero")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolverMode {
    /// Factor `I − Δt D` once and reuse it.
    DirectFactorization,
    /// Conjugate gradients with the FFT matvec and a circulant preconditioner.
    IterativeToeplitz,
}

/// How the cubic term enters the semi-implicit step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NonlinearTreatment {
    /// `F(Φⁿ) = −β|Φⁿ|²Φⁿ` on the right-hand side.
    Explicit,
    /// `β|Φⁿ|²Φ⁽¹⁾` on the left-hand side; fixed points are exact discrete eigenstates for any Δt.
    Linearized,
}

impl std::str::FromStr for NonlinearTreatment {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "explicit" => Ok(Self::Explicit),
            "linearized" | "implicit" => Ok(Self::Linearized),
            other => Err(Error::InvalidParameter(format!("unknown nonlinear treatment `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlowOptions {
    /// `None` picks a mode from the problem size.
    pub solver: Option<SolverMode>,
    pub nonlinear: NonlinearTreatment,
    /// Re-impose the target parity after every step.
    pub enforce_parity: bool,
}

impl Default for FlowOptions {
    fn default() -> Self {
        Self { solver: None, nonlinear: NonlinearTreatment::Linearized, enforce_parity: false }
    }
}

/// Solver used when none is requested: the factorization up to `J = 512`, CG above.
pub fn auto_mode<T: Scalar>(disc: &Discretization<T>) -> SolverMode {
    if disc.intervals <= 512 {
        SolverMode::DirectFactorization
    } else {
        SolverMode::IterativeToeplitz
    }
}

enum Backend<T: Scalar> {
    Direct(Cholesky<T>),
    Iterative(CirculantPreconditioner<T>),
}

/// Linear solver for `I − Δt D (+ Δt β diag(Φⁿ²))`, built once per run.
pub struct SolverPlan<T: Scalar> {
    mode: SolverMode,
    nonlinear: NonlinearTreatment,
    dt: T,
    backend: Backend<T>,
    inner_tol: T,
    max_inner: usize,
}

impl<T: Scalar> std::fmt::Debug for SolverPlan<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SolverPlan")
            .field("mode", &self.mode)
            .field("nonlinear", &self.nonlinear)
            .field("dt", &self.dt)
            .finish()
    }
}

impl<T: Scalar> SolverPlan<T> {
    pub fn new(op: &FractionalOperator<T>, dt: T, mode: SolverMode, nonlinear: NonlinearTreatment) -> Result<Self> {
        let column: Vec<T> = op
            .first_column()
            .into_iter()
            .enumerate()
            .map(|(k, d)| if k == 0 { T::one() - dt * d } else { -dt * d })
            .collect();
        let n = column.len();
        let backend = match mode {
            SolverMode::DirectFactorization => {
                let mut a = vec![T::zero(); n * n];
                for j in 0..n {
                    for k in 0..=j {
                        a[j * n + k] = column[j - k];
                    }
                }
                Backend::Direct(Cholesky::factor(a, n)?)
            }
            SolverMode::IterativeToeplitz => Backend::Iterative(CirculantPreconditioner::new(&column)?),
        };
        Ok(Self {
            mode,
            nonlinear,
            dt,
            backend,
            inner_tol: T::lit(INNER_TOLERANCE),
            max_inner: MAX_INNER_ITERS,
        })
    }

    pub fn mode(&self) -> SolverMode {
        self.mode
    }

    pub fn nonlinear(&self) -> NonlinearTreatment {
        self.nonlinear
    }

    pub fn dt(&self) -> T {
        self.dt
    }

    fn precondition(&self, r: &[T], z: &mut [T], buf: &mut Vec<Complex<T>>) {
        match &self.backend {
            Backend::Direct(ch) => {
                z.copy_from_slice(r);
                ch.solve_in_place(z);
            }
            Backend::Iterative(pre) => pre.apply(r, z, buf),
        }
    }

    /// Solves `(I − Δt D + diag(shift)) x = rhs`; `x` carries the initial guess.
    fn solve(&self, op: &FractionalOperator<T>, shift: Option<&[T]>, rhs: &[T], x: &mut [T]) -> Result<usize> {
        if let (Backend::Direct(ch), None) = (&self.backend, shift) {
            x.copy_from_slice(rhs);
            ch.solve_in_place(x);
            return Ok(0);
        }
        let fft = op.fft();
        let mut fbuf = fft.scratch();
        let mut pbuf = Vec::new();
        let dt = self.dt;
        let stats = pcg(
            |v: &[T], out: &mut [T]| {
                fft.apply(v, out, &mut fbuf);
                for (i, o) in out.iter_mut().enumerate() {
                    *o = v[i] - dt * *o;
                    if let Some(s) = shift {
                        *o += s[i] * v[i];
                    }
                }
            },
            |r: &[T], z: &mut [T]| self.precondition(r, z, &mut pbuf),
            rhs,
            x,
            self.inner_tol,
            self.max_inner,
        )?;
        Ok(stats.iterations)
    }
}

/// One semi-implicit Euler step, before projection. Returns `Φ⁽¹⁾`.
pub fn step<T: Scalar>(
    op: &FractionalOperator<T>,
    plan: &SolverPlan<T>,
    phi_n: &StateVector<T>,
    beta: T,
) -> Result<StateVector<T>> {
    let mut guess = phi_n.values.clone();
    step_from(op, plan, phi_n, beta, &mut guess)?;
    Ok(StateVector::new(guess, phi_n.h))
}

/// Right-hand side of the explicit variant, `Φⁿ − Δt β |Φⁿ|² Φⁿ`.
pub fn explicit_rhs<T: Scalar>(phi_n: &[T], dt: T, beta: T) -> Vec<T> {
    phi_n.iter().map(|&p| p - dt * beta * p * p * p).collect()
}

fn step_from<T: Scalar>(
    op: &FractionalOperator<T>,
    plan: &SolverPlan<T>,
    phi_n: &StateVector<T>,
    beta: T,
    x: &mut [T],
) -> Result<usize> {
    if phi_n.len() != op.dim() {
        return Err(Error::LengthMismatch { expected: op.dim(), got: phi_n.len() });
    }
    let dt = plan.dt();
    if beta == T::zero() {
        return plan.solve(op, None, &phi_n.values, x);
    }
    match plan.nonlinear() {
        NonlinearTreatment::Explicit => {
            let rhs = explicit_rhs(&phi_n.values, dt, beta);
            plan.solve(op, None, &rhs, x)
        }
        NonlinearTreatment::Linearized => {
            let shift: Vec<T> = phi_n.values.iter().map(|&p| dt * beta * p * p).collect();
            plan.solve(op, Some(&shift), &phi_n.values, x)
        }
    }
}

/// Parity of a state under `x ↦ −x`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Parity {
    Even,
    Odd,
    Mixed,
}

/// Relative even and odd defects `‖φ_j ∓ φ_{J−j}‖_∞ / ‖φ‖_∞`.
pub fn parity_defects<T: Scalar>(values: &[T]) -> (T, T) {
    let scale = max_abs(values);
    if scale == T::zero() {
        return (T::zero(), T::zero());
    }
    let n = values.len();
    let mut even = T::zero();
    let mut odd = T::zero();
    for i in 0..n {
        let a = values[i];
        let b = values[n - 1 - i];
        even = even.max((a - b).abs());
        odd = odd.max((a + b).abs());
    }
    (even / scale, odd / scale)
}

pub fn classify_parity<T: Scalar>(values: &[T]) -> Parity {
    let (even, odd) = parity_defects(values);
    let tol = T::lit(1e-6);
    if even <= tol {
        Parity::Even
    } else if odd <= tol {
        Parity::Odd
    } else {
        Parity::Mixed
    }
}

fn expected_parity(state: StateKind) -> Parity {
    match state {
        StateKind::Ground => Parity::Even,
        StateKind::FirstExcited => Parity::Odd,
    }
}

fn enforce<T: Scalar>(values: &mut [T], parity: Parity) {
    let n = values.len();
    let half = T::lit(0.5);
    for i in 0..n / 2 {
        let (a, b) = (values[i], values[n - 1 - i]);
        let (na, nb) = match parity {
            Parity::Even => {
                let m = half * (a + b);
                (m, m)
            }
            _ => {
                let m = half * (a - b);
                (m, -m)
            }
        };
        values[i] = na;
        values[n - 1 - i] = nb;
    }
    if parity == Parity::Odd && n % 2 == 1 {
        values[n / 2] = T::zero();
    }
}

/// Outcome bookkeeping of one flow run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlowReport {
    pub iterations: usize,
    /// `‖Φⁿ⁺¹ − Φⁿ‖_∞ / Δt` at the last step.
    pub final_residual: f64,
    pub converged: bool,
    pub wall_time: f64,
    pub solver: SolverMode,
    pub nonlinear: NonlinearTreatment,
    pub inner_iterations: usize,
    /// Largest `|h Σφ² − 1|` seen after any projection.
    pub max_mass_error: f64,
    /// Largest relative departure from the target parity seen at any step.
    pub max_parity_defect: f64,
    /// Number of steps at which the discrete energy increased.
    pub energy_increases: usize,
    pub max_energy_increase: f64,
    pub final_parity: Parity,
    /// The final state does not have the parity of the requested state.
    pub parity_mismatch: bool,
}

fn discrete_energy<T: Scalar>(op: &FractionalOperator<T>, phi: &[T], h: T, beta: T, dphi: &mut [T], buf: &mut [Complex<T>]) -> T {
    op.fft().apply(phi, dphi, buf);
    let kin: T = -h * phi.iter().zip(dphi.iter()).map(|(&a, &b)| a * b).sum::<T>();
    let quartic: T = h * phi.iter().map(|&p| p * p * p * p).sum::<T>();
    kin + beta * quartic / T::lit(2.0)
}

/// Runs the flow to convergence or the iteration cap. Never fails on the cap;
/// check `report.converged`.
pub fn run_flow<T: Scalar>(
    cfg: &WellConfig<T>,
    disc: &Discretization<T>,
    opts: &FlowOptions,
) -> Result<(FractionalOperator<T>, StateVector<T>, FlowReport)> {
    let start = Instant::now();
    let op = assemble(cfg, disc)?;
    let grid = Grid::new(disc);
    let mode = opts.solver.unwrap_or_else(|| auto_mode(disc));
    let plan = SolverPlan::new(&op, disc.dt, mode, opts.nonlinear)?;
    let beta = cfg.beta();
    let target = expected_parity(cfg.state());

    let mut phi = initial_state(cfg, &grid);
    let mut next = vec![T::zero(); phi.len()];
    let mut dphi = vec![T::zero(); phi.len()];
    let mut buf = op.fft().scratch();
    let mut energy = discrete_energy(&op, &phi.values, phi.h, beta, &mut dphi, &mut buf);

    let mut report = FlowReport {
        iterations: 0,
        final_residual: f64::INFINITY,
        converged: false,
        wall_time: 0.0,
        solver: mode,
        nonlinear: opts.nonlinear,
        inner_iterations: 0,
        max_mass_error: (phi.mass() - T::one()).abs().to_f64_lossy(),
        max_parity_defect: 0.0,
        energy_increases: 0,
        max_energy_increase: 0.0,
        final_parity: target,
        parity_mismatch: false,
    };
    let mut scale = T::one();

    for n in 1..=disc.max_iters {
        // warm start from the previous contraction factor
        for (x, &p) in next.iter_mut().zip(&phi.values) {
            *x = scale * p;
        }
        report.inner_iterations += step_from(&op, &plan, &phi, beta, &mut next)?;
        let raw = StateVector::new(std::mem::take(&mut next), phi.h);
        scale = raw.mass().sqrt();
        let mut projected = project(&raw)?;
        next = raw.values;
        if opts.enforce_parity {
            enforce(&mut projected.values, target);
            projected = project(&projected)?;
        }

        let mass_err = (projected.mass() - T::one()).abs().to_f64_lossy();
        report.max_mass_error = report.max_mass_error.max(mass_err);
        let (even, odd) = parity_defects(&projected.values);
        let defect = match target {
            Parity::Even => even,
            _ => odd.max(projected.values[grid.center()].abs() / max_abs(&projected.values)),
        };
        report.max_parity_defect = report.max_parity_defect.max(defect.to_f64_lossy());

        let change = projected
            .values
            .iter()
            .zip(&phi.values)
            .fold(T::zero(), |m, (&a, &b)| m.max((a - b).abs()));
        let residual = change / disc.dt;

        let e_next = discrete_energy(&op, &projected.values, projected.h, beta, &mut dphi, &mut buf);
        let rise = e_next - energy;
        if rise > T::lit(1e-12) * energy.abs().max(T::one()) {
            report.energy_increases += 1;
            report.max_energy_increase = report.max_energy_increase.max(rise.to_f64_lossy());
        }
        energy = e_next;

        phi = projected;
        report.iterations = n;
        report.final_residual = residual.to_f64_lossy();
        if residual < disc.eps {
            report.converged = true;
            break;
        }
    }

    report.final_parity = classify_parity(&phi.values);
    report.parity_mismatch = report.final_parity != target;
    report.wall_time = start.elapsed().as_secs_f64();
    Ok((op, phi, report))
}

/// Runs the flow with default options and turns a hit iteration cap into
/// [`Error::NonConvergence`].
pub fn solve_flow<T: Scalar>(cfg: &WellConfig<T>, disc: &Discretization<T>) -> Result<(StateVector<T>, FlowReport)> {
    solve_flow_with(cfg, disc, &FlowOptions::default()).map(|(_, s, r)| (s, r))
}

pub fn solve_flow_with<T: Scalar>(
    cfg: &WellConfig<T>,
    disc: &Discretization<T>,
    opts: &FlowOptions,
) -> Result<(FractionalOperator<T>, StateVector<T>, FlowReport)> {
    let (op, phi, report) = run_flow(cfg, disc, opts)?;
    if !report.converged {
        return Err(Error::NonConvergence { iterations: report.iterations, residual: report.final_residual });
    }
    Ok((op, phi, report))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::make_discretization;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn setup(alpha: f64, beta: f64, state: StateKind, j: usize) -> (WellConfig<f64>, Discretization<f64>) {
        let cfg = WellConfig::new(1.0, alpha, beta, state).unwrap();
        let disc = make_discretization(&cfg, j, 0.005, 1e-5, DEFAULT_MAX_ITERS, None).unwrap();
        (cfg, disc)
    }

    /// Dense Gaussian elimination with partial pivoting, independent of the Cholesky path.
    fn gauss_solve(mut a: Vec<f64>, mut b: Vec<f64>) -> Vec<f64> {
        let n = b.len();
        for c in 0..n {
            let p = (c..n).max_by(|&i, &k| a[i * n + c].abs().total_cmp(&a[k * n + c].abs())).unwrap();
            for k in 0..n {
                a.swap(c * n + k, p * n + k);
            }
            b.swap(c, p);
            for r in c + 1..n {
                let f = a[r * n + c] / a[c * n + c];
                for k in c..n {
                    a[r * n + k] -= f * a[c * n + k];
                }
                b[r] -= f * b[c];
            }
        }
        let mut x = vec![0.0; n];
        for r in (0..n).rev() {
            let s: f64 = (r + 1..n).map(|k| a[r * n + k] * x[k]).sum();
            x[r] = (b[r] - s) / a[r * n + r];
        }
        x
    }

    fn system_matrix(op: &FractionalOperator<f64>, dt: f64, shift: Option<&[f64]>) -> Vec<f64> {
        let n = op.dim();
        let mut a = vec![0.0; n * n];
        for j in 0..n {
            for k in 0..n {
                a[j * n + k] = if j == k { 1.0 } else { 0.0 } - dt * op.entry(j, k);
            }
            if let Some(s) = shift {
                a[j * n + j] += s[j];
            }
        }
        a
    }

    #[test]
    fn projection_properties() {
        let phi = StateVector::<f64>::new(vec![1.0, 2.0, -3.0, 0.5], 0.25);
        let p = project(&phi).unwrap();
        assert!((p.mass() - 1.0).abs() < 1e-15);
        let again = project(&p).unwrap();
        for (a, b) in again.values.iter().zip(&p.values) {
            assert!((a - b).abs() < 1e-15);
        }
        let scaled = StateVector::new(phi.values.iter().map(|v| 7.0 * v).collect(), 0.25);
        assert_eq!(project(&scaled).unwrap().values, p.values);
        assert!(matches!(project(&StateVector::new(vec![0.0; 4], 0.25)), Err(Error::FlowCollapse)));
    }

    #[test]
    fn projection_of_constant() {
        // J = 8, h = 0.25: seven entries, each 1/√(h·7)
        let phi = StateVector::new(vec![3.0; 7], 0.25);
        let p = project(&phi).unwrap();
        let want = 1.0 / (0.25f64 * 7.0).sqrt();
        assert!(p.values.iter().all(|&v| (v - want).abs() < 1e-15));
        let neg = project(&StateVector::new(vec![-3.0; 7], 0.25)).unwrap();
        assert!(neg.values.iter().all(|&v| (v + want).abs() < 1e-15));
    }

    #[test]
    fn initial_states() {
        let (cfg, disc) = setup(1.0, 0.0, StateKind::Ground, 8);
        let grid = Grid::new(&disc);
        let phi = initial_state(&cfg, &grid);
        assert!((phi.mass() - 1.0).abs() < 1e-14);
        assert!(phi.values.iter().all(|&v| v > 0.0));
        let raw: Vec<f64> = grid.points().iter().map(|&x| (std::f64::consts::FRAC_PI_2 * (1.0 + x)).sin()).collect();
        let ratio = phi.values[0] / raw[0];
        for (a, b) in phi.values.iter().zip(&raw) {
            assert!((a / b - ratio).abs() < 1e-14);
        }
        let (cfg1, _) = setup(1.0, 0.0, StateKind::FirstExcited, 8);
        let phi1 = initial_state(&cfg1, &grid);
        assert_eq!(phi1.values[grid.center()], 0.0);
        assert_eq!(classify_parity(&phi1.values), Parity::Odd);
    }

    #[test]
    fn zero_state_steps_to_zero() {
        let (cfg, disc) = setup(1.0, 0.0, StateKind::Ground, 16);
        let op = assemble(&cfg, &disc).unwrap();
        for mode in [SolverMode::DirectFactorization, SolverMode::IterativeToeplitz] {
            let plan = SolverPlan::new(&op, disc.dt, mode, NonlinearTreatment::Explicit).unwrap();
            let out = step(&op, &plan, &StateVector::new(vec![0.0; op.dim()], disc.h), 0.0).unwrap();
            assert!(out.values.iter().all(|&v| v == 0.0));
        }
    }

    #[test]
    fn linear_step_matches_dense_oracle() {
        let (cfg, disc) = setup(1.3, 0.0, StateKind::Ground, 32);
        let op = assemble(&cfg, &disc).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let phi = StateVector::new((0..op.dim()).map(|_| rng.gen_range(-1.0..1.0)).collect(), disc.h);
        let want = gauss_solve(system_matrix(&op, disc.dt, None), phi.values.clone());
        for mode in [SolverMode::DirectFactorization, SolverMode::IterativeToeplitz] {
            let plan = SolverPlan::new(&op, disc.dt, mode, NonlinearTreatment::Linearized).unwrap();
            let got = step(&op, &plan, &phi, 0.0).unwrap();
            for (a, b) in got.values.iter().zip(&want) {
                assert!((a - b).abs() < 1e-10, "{mode:?}");
            }
        }
    }

    #[test]
    fn explicit_step_uses_hand_assembled_rhs() {
        let (cfg, disc) = setup(1.0, 10.0, StateKind::Ground, 16);
        let op = assemble(&cfg, &disc).unwrap();
        let grid = Grid::new(&disc);
        let phi = initial_state(&cfg, &grid);
        let rhs: Vec<f64> = phi.values.iter().map(|&p| p + disc.dt * (-10.0 * p.abs().powi(2) * p)).collect();
        let want = gauss_solve(system_matrix(&op, disc.dt, None), rhs.clone());
        assert_eq!(explicit_rhs(&phi.values, disc.dt, 10.0), rhs);
        for mode in [SolverMode::DirectFactorization, SolverMode::IterativeToeplitz] {
            let plan = SolverPlan::new(&op, disc.dt, mode, NonlinearTreatment::Explicit).unwrap();
            let got = step(&op, &plan, &phi, 10.0).unwrap();
            for (a, b) in got.values.iter().zip(&want) {
                assert!((a - b).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn linearized_step_matches_dense_oracle() {
        let (cfg, disc) = setup(0.8, 10.0, StateKind::Ground, 16);
        let op = assemble(&cfg, &disc).unwrap();
        let grid = Grid::new(&disc);
        let phi = initial_state(&cfg, &grid);
        let shift: Vec<f64> = phi.values.iter().map(|p| disc.dt * 10.0 * p * p).collect();
        let want = gauss_solve(system_matrix(&op, disc.dt, Some(&shift)), phi.values.clone());
        for mode in [SolverMode::DirectFactorization, SolverMode::IterativeToeplitz] {
            let plan = SolverPlan::new(&op, disc.dt, mode, NonlinearTreatment::Linearized).unwrap();
            let got = step(&op, &plan, &phi, 10.0).unwrap();
            for (a, b) in got.values.iter().zip(&want) {
                assert!((a - b).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn inner_solve_residual() {
        let (cfg, disc) = setup(1.0, 5.0, StateKind::Ground, 256);
        let op = assemble(&cfg, &disc).unwrap();
        let grid = Grid::new(&disc);
        let phi = initial_state(&cfg, &grid);
        let plan = SolverPlan::new(&op, disc.dt, SolverMode::IterativeToeplitz, NonlinearTreatment::Explicit).unwrap();
        let rhs = explicit_rhs(&phi.values, disc.dt, 5.0);
        let x = step(&op, &plan, &phi, 5.0).unwrap();
        let dx = op.matvec_dense(&x.values).unwrap();
        let r: Vec<f64> = (0..rhs.len()).map(|i| x.values[i] - disc.dt * dx[i] - rhs[i]).collect();
        assert!(max_abs(&r) <= 1e-12 * max_abs(&rhs) * 10.0);
    }

    #[test]
    fn small_linear_flow_converges_with_invariants() {
        for state in [StateKind::Ground, StateKind::FirstExcited] {
            let (cfg, disc) = setup(1.0, 0.0, state, 64);
            let (_, phi, rep) = solve_flow_with(&cfg, &disc, &FlowOptions::default()).unwrap();
            assert!(rep.converged && rep.final_residual < 1e-5);
            assert!(rep.max_mass_error < 1e-13);
            assert!(rep.max_parity_defect < 1e-10);
            assert!(!rep.parity_mismatch);
            if state == StateKind::Ground {
                assert!(phi.values.iter().all(|&v| v > 0.0));
            }
        }
    }

    #[test]
    fn cap_turns_into_nonconvergence() {
        let cfg = WellConfig::new(1.0, 1.0, 0.0, StateKind::Ground).unwrap();
        let disc = make_discretization(&cfg, 32, 0.005, 1e-12, 3, None).unwrap();
        match solve_flow(&cfg, &disc) {
            Err(Error::NonConvergence { iterations: 3, .. }) => {}
            other => panic!("{other:?}"),
        }
        let (_, _, rep) = run_flow(&cfg, &disc, &FlowOptions::default()).unwrap();
        assert!(!rep.converged && rep.iterations == 3);
    }

    #[test]
    fn parity_enforcement_keeps_odd_state() {
        let (cfg, disc) = setup(0.5, 5.0, StateKind::FirstExcited, 64);
        let opts = FlowOptions { enforce_parity: true, ..FlowOptions::default() };
        let (_, phi, rep) = solve_flow_with(&cfg, &disc, &opts).unwrap();
        assert_eq!(rep.final_parity, Parity::Odd);
        assert_eq!(phi.values[31], 0.0);
    }
}
