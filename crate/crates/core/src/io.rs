//! Run records, parameter sweeps and the CSV/JSON formats of the command-line tool.

use std::io::Write;
use std::time::{SystemTime, UNIX_EPOCH};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::flow::{run_flow, FlowOptions, FlowReport, NonlinearTreatment, SolverMode, StateVector, DEFAULT_MAX_ITERS};
use crate::grid::{make_discretization, Grid, StateKind, WellConfig};
use crate::observables::{self, Observables};
use crate::operator::apply_to_samples;
use crate::reference::{self, BoundsRow};

pub const SWEEP_HEADER: &str = "alpha,beta,state,J,dt,eps,mu,mu_kin,mu_int,energy,expected_x,variance_x,x_c,rho_max,layer_width,iterations,residual,converged";
pub const BOUNDS_HEADER: &str = "alpha,s,chen_lower,chen_upper,banuelos_lower,banuelos_upper,kwasnicki";
pub const STATE_HEADER: &str = "x,phi";
pub const DEMO_HEADER: &str = "x,u,Lu";

/// Everything needed to run one flow.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PointSpec {
    pub alpha: f64,
    pub beta: f64,
    pub state: StateKind,
    pub half_width: f64,
    pub intervals: usize,
    pub dt: f64,
    pub eps: f64,
    pub max_iters: usize,
    pub gamma: Option<f64>,
    pub solver: Option<SolverMode>,
    pub nonlinear: NonlinearTreatment,
    pub enforce_parity: bool,
}

impl PointSpec {
    /// Desk-scale defaults: `L = 1`, `J = 2048`, `Δt = 0.005`, `ε = 1e−5`.
    pub fn new(alpha: f64, beta: f64, state: StateKind) -> Self {
        Self {
            alpha,
            beta,
            state,
            half_width: 1.0,
            intervals: 2048,
            dt: 0.005,
            eps: 1e-5,
            max_iters: DEFAULT_MAX_ITERS,
            gamma: None,
            solver: None,
            nonlinear: NonlinearTreatment::Linearized,
            enforce_parity: false,
        }
    }

    pub fn with_intervals(mut self, j: usize) -> Self {
        self.intervals = j;
        self
    }

    fn options(&self) -> FlowOptions {
        FlowOptions { solver: self.solver, nonlinear: self.nonlinear, enforce_parity: self.enforce_parity }
    }
}

/// Fully derived configuration echoed into every record.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfigEcho {
    pub alpha: f64,
    pub beta: f64,
    pub state: StateKind,
    pub half_width: f64,
    pub intervals: usize,
    pub h: f64,
    pub tail_index: usize,
    pub truncation: f64,
    pub gamma: f64,
    pub sigma: f64,
    pub dt: f64,
    pub eps: f64,
    pub max_iters: usize,
    pub enforce_parity: bool,
}

/// Analytic comparison columns. Estimates for `(−1, 1)` are rescaled by `L^{−α}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReferenceColumns {
    pub chen_lower: f64,
    pub chen_upper: f64,
    pub banuelos_lower: Option<f64>,
    pub banuelos_upper: Option<f64>,
    pub kwasnicki: f64,
    pub standard_mu: f64,
    pub standard_variance: f64,
    pub thomas_fermi_mu: Option<f64>,
}

impl ReferenceColumns {
    pub fn new(alpha: f64, beta: f64, state: StateKind, half_width: f64) -> Result<Self> {
        let s = state.index();
        let row = BoundsRow::new(alpha, s)?;
        let scale = half_width.powf(-alpha);
        let (chen_lower, chen_upper) = reference::chen_bounds(s, alpha, 2.0 * half_width)?;
        let (_, standard_mu) = reference::standard_eigenpair(s, half_width, 0.0)?;
        Ok(Self {
            chen_lower,
            chen_upper,
            banuelos_lower: row.banuelos_lower.map(|v| v * scale),
            banuelos_upper: row.banuelos_upper.map(|v| v * scale),
            kwasnicki: row.kwasnicki * scale,
            standard_mu,
            standard_variance: reference::standard_variance(s, half_width),
            thomas_fermi_mu: (beta > 0.0).then(|| reference::thomas_fermi_mu(s, beta, half_width)),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub config: ConfigEcho,
    pub observables: Observables,
    pub flow: FlowReport,
    /// `‖−DΦ + βΦ³ − μΦ‖_∞` of the returned state.
    pub eigen_residual: f64,
    pub reference: ReferenceColumns,
    /// Seconds since the Unix epoch.
    pub timestamp: u64,
    pub tool_version: String,
}

/// Output of one flow run: the record plus the state samples.
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub record: RunRecord,
    pub state: StateVector<f64>,
    pub grid: Grid<f64>,
}

/// Runs one flow. A hit iteration cap is reported through `flow.converged`, not as an error.
pub fn run_point(spec: &PointSpec) -> Result<RunOutput> {
    let cfg = WellConfig::new(spec.half_width, spec.alpha, spec.beta, spec.state)?;
    let disc = make_discretization(&cfg, spec.intervals, spec.dt, spec.eps, spec.max_iters, spec.gamma)?;
    let (op, phi, report) = run_flow(&cfg, &disc, &spec.options())?;
    let grid = Grid::new(&disc);
    let obs = observables::compute(&op, &phi, &grid, spec.beta, spec.state)?;
    let eigen_residual = observables::eigen_residual(&op, &phi, spec.beta, obs.mu)?;
    let record = RunRecord {
        config: ConfigEcho {
            alpha: spec.alpha,
            beta: spec.beta,
            state: spec.state,
            half_width: spec.half_width,
            intervals: disc.intervals,
            h: disc.h,
            tail_index: disc.tail_index,
            truncation: disc.truncation,
            gamma: disc.gamma,
            sigma: disc.sigma,
            dt: disc.dt,
            eps: disc.eps,
            max_iters: disc.max_iters,
            enforce_parity: spec.enforce_parity,
        },
        observables: obs,
        flow: report,
        eigen_residual,
        reference: ReferenceColumns::new(spec.alpha, spec.beta, spec.state, spec.half_width)?,
        timestamp: SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0),
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
    };
    Ok(RunOutput { record, state: phi, grid })
}

pub fn record_to_json(record: &RunRecord) -> Result<String> {
    Ok(serde_json::to_string_pretty(record)?)
}

pub fn record_from_json(text: &str) -> Result<RunRecord> {
    Ok(serde_json::from_str(text)?)
}

/// Formats with six significant digits, `%g` style.
pub fn fmt_sig(x: f64) -> String {
    const DIGITS: usize = 6;
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    let trim = |s: &str| -> String {
        if s.contains('.') {
            s.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            s.to_string()
        }
    };
    let sci = format!("{:.*e}", DIGITS - 1, x);
    let (mantissa, e) = sci.split_once('e').expect("exponent marker");
    let exp: i32 = e.parse().expect("integer exponent");
    if exp < -4 || exp >= DIGITS as i32 {
        format!("{}e{}{:02}", trim(mantissa), if exp < 0 { '-' } else { '+' }, exp.abs())
    } else {
        trim(&format!("{:.*}", (DIGITS as i32 - 1 - exp) as usize, x))
    }
}

fn opt(x: Option<f64>) -> String {
    x.map(fmt_sig).unwrap_or_default()
}

pub fn sweep_row(r: &RunRecord) -> String {
    let c = &r.config;
    let o = &r.observables;
    [
        fmt_sig(c.alpha),
        fmt_sig(c.beta),
        c.state.label().to_string(),
        c.intervals.to_string(),
        fmt_sig(c.dt),
        fmt_sig(c.eps),
        fmt_sig(o.mu),
        fmt_sig(o.mu_kin),
        fmt_sig(o.mu_int),
        fmt_sig(o.energy),
        fmt_sig(o.expected_x),
        fmt_sig(o.variance_x),
        opt(o.x_c),
        opt(o.rho_max),
        opt(o.layer_width),
        r.flow.iterations.to_string(),
        fmt_sig(r.flow.final_residual),
        r.flow.converged.to_string(),
    ]
    .join(",")
}

/// Parameter points in α-major, β-minor, then state order.
pub fn sweep_points(base: &PointSpec, alphas: &[f64], betas: &[f64], states: &[StateKind]) -> Result<Vec<PointSpec>> {
    if alphas.is_empty() || betas.is_empty() || states.is_empty() {
        return Err(Error::InvalidParameter("sweep needs at least one alpha, beta and state".into()));
    }
    let mut out = Vec::with_capacity(alphas.len() * betas.len() * states.len());
    for &alpha in alphas {
        for &beta in betas {
            for &state in states {
                out.push(PointSpec { alpha, beta, state, ..*base });
            }
        }
    }
    Ok(out)
}

/// Runs the points on `jobs` worker threads; results keep the input order.
pub fn run_sweep(points: &[PointSpec], jobs: usize) -> Result<Vec<Result<RunRecord>>> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| Error::InvalidParameter(format!("cannot start worker pool: {e}")))?;
    Ok(pool.install(|| points.par_iter().map(|p| run_point(p).map(|o| o.record)).collect()))
}

/// Writes the sweep CSV. Rows whose run failed outright are written with
/// the parameters only and `converged=false`.
pub fn write_sweep_csv<W: Write>(mut w: W, points: &[PointSpec], results: &[Result<RunRecord>]) -> Result<()> {
    writeln!(w, "{SWEEP_HEADER}")?;
    for (p, r) in points.iter().zip(results) {
        match r {
            Ok(rec) => writeln!(w, "{}", sweep_row(rec))?,
            Err(_) => writeln!(
                w,
                "{},{},{},{},{},{},,,,,,,,,,,,false",
                fmt_sig(p.alpha),
                fmt_sig(p.beta),
                p.state.label(),
                p.intervals,
                fmt_sig(p.dt),
                fmt_sig(p.eps)
            )?,
        }
    }
    Ok(())
}

pub fn write_bounds_csv<W: Write>(mut w: W, alphas: &[f64], states: &[usize]) -> Result<()> {
    if alphas.is_empty() {
        return Err(Error::InvalidParameter("bounds needs at least one alpha".into()));
    }
    let rows = alphas
        .iter()
        .flat_map(|&alpha| states.iter().map(move |&s| BoundsRow::new(alpha, s)))
        .collect::<Result<Vec<_>>>()?;
    writeln!(w, "{BOUNDS_HEADER}")?;
    for r in rows {
        writeln!(
            w,
            "{},{},{},{},{},{},{}",
            fmt_sig(r.alpha),
            r.s,
            fmt_sig(r.chen_lower),
            fmt_sig(r.chen_upper),
            opt(r.banuelos_lower),
            opt(r.banuelos_upper),
            fmt_sig(r.kwasnicki)
        )?;
    }
    Ok(())
}

pub fn write_state_csv<W: Write>(mut w: W, grid: &Grid<f64>, phi: &StateVector<f64>) -> Result<()> {
    writeln!(w, "{STATE_HEADER}")?;
    for (x, p) in grid.points().iter().zip(&phi.values) {
        writeln!(w, "{x:e},{p:e}")?;
    }
    Ok(())
}

/// `(x, u, Lu)` with `u = sin(π(1+x/L)/2)` and `Lu` the discrete `(−Δ)^{α/2} u`.
pub fn operator_demo(alpha: f64, half_width: f64, intervals: usize) -> Result<Vec<(f64, f64, f64)>> {
    let cfg = WellConfig::new(half_width, alpha, 0.0, StateKind::Ground)?;
    let disc = make_discretization(&cfg, intervals, 0.005, 1e-5, 1, None)?;
    let grid = Grid::new(&disc);
    let u: Vec<f64> = grid
        .points()
        .iter()
        .map(|&x| (std::f64::consts::FRAC_PI_2 * (1.0 + x / half_width)).sin())
        .collect();
    let lu = apply_to_samples(&cfg, &disc, &u)?;
    Ok(grid.points().iter().zip(u).zip(lu).map(|((&x, u), l)| (x, u, l)).collect())
}

pub fn write_demo_csv<W: Write>(mut w: W, rows: &[(f64, f64, f64)]) -> Result<()> {
    writeln!(w, "{DEMO_HEADER}")?;
    for (x, u, l) in rows {
        writeln!(w, "{x:e},{u:e},{l:e}")?;
    }
    Ok(())
}
