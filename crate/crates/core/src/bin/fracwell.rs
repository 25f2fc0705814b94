use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use fracwell::flow::DEFAULT_MAX_ITERS;
use fracwell::io::{self as fio, PointSpec};
use fracwell::{NonlinearTreatment, SolverMode, StateKind};

#[derive(Parser)]
#[command(name = "fracwell", version, about = "Stationary states of the fractional NLS in an infinite well")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute one stationary state and print a JSON record.
    Solve(SolveArgs),
    /// Run a grid of (alpha, beta, state) points and write a CSV table.
    Sweep(SweepArgs),
    /// Tabulate analytic eigenvalue bounds and estimates.
    Bounds(BoundsArgs),
    /// Apply the discrete operator to a sine profile.
    OperatorDemo(DemoArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum StateArg {
    Ground,
    First,
}

impl From<StateArg> for StateKind {
    fn from(s: StateArg) -> Self {
        match s {
            StateArg::Ground => StateKind::Ground,
            StateArg::First => StateKind::FirstExcited,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum NonlinearArg {
    Linearized,
    Explicit,
}

#[derive(Clone, Copy, ValueEnum)]
enum SolverArg {
    Auto,
    Direct,
    Iterative,
}

#[derive(Args)]
struct Numerics {
    /// Well half-width L.
    #[arg(long = "L", default_value_t = 1.0)]
    half_width: f64,
    /// Number of grid intervals J.
    #[arg(long = "J", default_value_t = 2048)]
    intervals: usize,
    #[arg(long, default_value_t = 0.005)]
    dt: f64,
    /// Stationarity tolerance on ‖Φⁿ⁺¹ − Φⁿ‖∞ / Δt.
    #[arg(long, default_value_t = 1e-5)]
    eps: f64,
    #[arg(long, default_value_t = DEFAULT_MAX_ITERS)]
    max_iters: usize,
    /// Quadrature splitting parameter; defaults to 1 − α/2.
    #[arg(long)]
    gamma: Option<f64>,
    #[arg(long, value_enum, default_value_t = NonlinearArg::Linearized)]
    nonlinear: NonlinearArg,
    #[arg(long, value_enum, default_value_t = SolverArg::Auto)]
    solver: SolverArg,
    /// Re-impose the parity of the target state after every step.
    #[arg(long)]
    enforce_parity: bool,
}

impl Numerics {
    fn spec(&self, alpha: f64, beta: f64, state: StateKind) -> PointSpec {
        PointSpec {
            alpha,
            beta,
            state,
            half_width: self.half_width,
            intervals: self.intervals,
            dt: self.dt,
            eps: self.eps,
            max_iters: self.max_iters,
            gamma: self.gamma,
            solver: match self.solver {
                SolverArg::Auto => None,
                SolverArg::Direct => Some(SolverMode::DirectFactorization),
                SolverArg::Iterative => Some(SolverMode::IterativeToeplitz),
            },
            nonlinear: match self.nonlinear {
                NonlinearArg::Linearized => NonlinearTreatment::Linearized,
                NonlinearArg::Explicit => NonlinearTreatment::Explicit,
            },
            enforce_parity: self.enforce_parity,
        }
    }
}

#[derive(Args)]
struct SolveArgs {
    #[arg(long)]
    alpha: f64,
    #[arg(long, default_value_t = 0.0)]
    beta: f64,
    #[arg(long, value_enum, default_value_t = StateArg::Ground)]
    state: StateArg,
    #[command(flatten)]
    numerics: Numerics,
    /// Write the JSON record here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Write the converged samples as `x,phi`.
    #[arg(long)]
    dump_state: Option<PathBuf>,
    /// Write the quadrature weights as `lag,weight`.
    #[arg(long)]
    weights_csv: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long, value_delimiter = ',', required = true)]
    alpha_list: Vec<f64>,
    #[arg(long, value_delimiter = ',', default_value = "0")]
    beta_list: Vec<f64>,
    /// States to run; both by default.
    #[arg(long, value_enum, value_delimiter = ',', default_values_t = [StateArg::Ground, StateArg::First])]
    state: Vec<StateArg>,
    #[command(flatten)]
    numerics: Numerics,
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct BoundsArgs {
    #[arg(long, value_delimiter = ',', required = true)]
    alpha_list: Vec<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct DemoArgs {
    #[arg(long)]
    alpha: f64,
    #[arg(long = "L", default_value_t = 1.0)]
    half_width: f64,
    #[arg(long = "J", default_value_t = 256)]
    intervals: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn sink(path: &Option<PathBuf>) -> io::Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn solve(args: SolveArgs) -> fracwell::Result<bool> {
    let spec = args.numerics.spec(args.alpha, args.beta, args.state.into());
    if let Some(path) = &args.weights_csv {
        let cfg = fracwell::WellConfig::new(spec.half_width, spec.alpha, spec.beta, spec.state)?;
        let disc = fracwell::make_discretization(&cfg, spec.intervals, spec.dt, spec.eps, spec.max_iters, spec.gamma)?;
        fracwell::assemble(&cfg, &disc)?.write_weights_csv(BufWriter::new(File::create(path)?))?;
    }
    let out = fio::run_point(&spec)?;
    if let Some(path) = &args.dump_state {
        fio::write_state_csv(BufWriter::new(File::create(path)?), &out.grid, &out.state)?;
    }
    let mut w = sink(&args.out)?;
    writeln!(w, "{}", fio::record_to_json(&out.record)?)?;
    w.flush()?;
    let converged = out.record.flow.converged;
    if !converged {
        eprintln!(
            "warning: no convergence after {} iterations (residual {:e})",
            out.record.flow.iterations, out.record.flow.final_residual
        );
    }
    Ok(converged)
}

fn sweep(args: SweepArgs) -> fracwell::Result<bool> {
    let states: Vec<StateKind> = args.state.iter().map(|&s| s.into()).collect();
    let base = args.numerics.spec(args.alpha_list[0], 0.0, StateKind::Ground);
    let points = fio::sweep_points(&base, &args.alpha_list, &args.beta_list, &states)?;
    let results = fio::run_sweep(&points, args.jobs)?;
    let mut ok = true;
    for (p, r) in points.iter().zip(&results) {
        match r {
            Ok(rec) if !rec.flow.converged => {
                ok = false;
                eprintln!("warning: alpha={} beta={} {} did not converge", p.alpha, p.beta, p.state.label());
            }
            Err(e) => {
                ok = false;
                eprintln!("error: alpha={} beta={} {}: {e}", p.alpha, p.beta, p.state.label());
            }
            Ok(_) => {}
        }
    }
    let mut w = sink(&args.out)?;
    fio::write_sweep_csv(&mut w, &points, &results)?;
    w.flush()?;
    Ok(ok)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match cli.command {
        Command::Solve(a) => solve(a),
        Command::Sweep(a) => sweep(a),
        Command::Bounds(a) => sink(&a.out)
            .map_err(Into::into)
            .and_then(|mut w| fio::write_bounds_csv(&mut w, &a.alpha_list, &[0, 1]).and_then(|_| Ok(w.flush()?)))
            .map(|_| true),
        Command::OperatorDemo(a) => fio::operator_demo(a.alpha, a.half_width, a.intervals)
            .and_then(|rows| {
                let mut w = sink(&a.out)?;
                fio::write_demo_csv(&mut w, &rows)?;
                Ok(w.flush()?)
            })
            .map(|_| true),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
