//! Command-line front end.
//!
//! Exit codes: 0 success, 1 infeasible design or unstable verdict (outputs
//! are still written), 2 usage or input errors.

use std::ffi::OsString;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use clap::{Args, Parser, Subcommand};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use msfnet_core::design::{self, DesignMethod, DesignResult, DEFAULT_MARGIN};
use msfnet_core::graphs::{make_network, Network};
use msfnet_core::model::PlantModel;
use msfnet_core::msf::{self, GridAxis, IntervalSearch, DEFAULT_SCAN_POINTS, DEFAULT_TOL};
use msfnet_core::verify::{self, build_closed_loop, spectral_verdict, verify_design, TrialConfig};
use msfnet_core::{Complex64, Matrix};

use crate::config::{load_model, ConfigError};
use crate::csvio;
use crate::netspec::{parse_er_family, parse_family, parse_range, parse_size_range, NetworkArg};
use crate::output::{manifest, manifest_path, write_atomic};
use crate::parallel;
use crate::report::{design_report, verify_report, SimulationSummary};

const AFTER_HELP: &str = "\
Networks: complete:N | ring:N:k (k even, k < N) | er:N:p:seed | file:PATH | PATH
Ranges:   lo:hi, e.g. -50:50
Adjacency CSV: N rows of N comma-separated numbers; entry (i,j) is the link from node j into node i.
Environment: MSF_THREADS caps the worker count (0 = automatic).";

#[derive(Debug, Parser)]
#[command(name = "msfnet", version, about = "Master stability function analysis and feedback network design", after_help = AFTER_HELP)]
pub struct Cli {
    /// Where to write the run manifest (default: `<out>.manifest` next to the primary output).
    #[arg(long, global = true)]
    manifest: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Master stability function grids and stable intervals.
    #[command(subcommand)]
    Msf(MsfCommand),
    /// Synthesize a feedback network.
    #[command(subcommand)]
    Design(DesignCommand),
    /// Compare weighted and matching norms across network sizes.
    #[command(subcommand)]
    Sweep(SweepCommand),
    /// Check stability of a plant/feedback network pair.
    Verify(VerifyArgs),
    /// Monte Carlo stability frequency over random plant networks.
    #[command(subcommand)]
    Prob(ProbCommand),
}

#[derive(Debug, Subcommand)]
enum MsfCommand {
    /// Evaluate sigma(lambda, mu) on a real grid (CSV `lambda,mu,sigma`).
    Grid(GridArgs),
    /// Stable mu interval nearest the origin for one plant eigenvalue.
    Interval(IntervalArgs),
}

#[derive(Debug, Subcommand)]
enum DesignCommand {
    /// Frobenius-minimal weighted design.
    Weighted(WeightedArgs),
    /// Fewest-links binary design by branch and bound.
    Binary(BinaryArgs),
    /// A = B baseline with a coupling-cancelling loop gain.
    Matching(MatchingArgs),
}

#[derive(Debug, Subcommand)]
enum SweepCommand {
    /// Weighted vs matching Frobenius norm per network size.
    Norm(SweepArgs),
}

#[derive(Debug, Subcommand)]
enum ProbCommand {
    /// Fraction of sampled networks for which the design exists and is stable.
    Stability(ProbArgs),
}

#[derive(Debug, Args)]
struct ModelArg {
    /// Plant model file (`key = value`, keys D R H K L).
    #[arg(long)]
    model: PathBuf,
}

#[derive(Debug, Args)]
struct SearchArgs {
    /// mu search range, must contain 0.
    #[arg(long, default_value = "-50:50", allow_hyphen_values = true, value_parser = parse_range)]
    range: (f64, f64),
    /// Coarse scan resolution for sign changes of sigma.
    #[arg(long, default_value_t = DEFAULT_SCAN_POINTS)]
    scan: usize,
    /// Bisection tolerance on interval boundaries.
    #[arg(long, default_value_t = DEFAULT_TOL)]
    tol: f64,
}

impl SearchArgs {
    fn search(&self) -> IntervalSearch {
        IntervalSearch {
            mu_min: self.range.0,
            mu_max: self.range.1,
            scan_points: self.scan,
            tol: self.tol,
        }
    }
}

#[derive(Debug, Args)]
struct GridArgs {
    #[command(flatten)]
    model: ModelArg,
    #[arg(long, allow_hyphen_values = true, value_parser = parse_range)]
    lambda: (f64, f64),
    #[arg(long, allow_hyphen_values = true, value_parser = parse_range)]
    mu: (f64, f64),
    /// Points per axis (>= 2).
    #[arg(long, default_value_t = 101)]
    steps: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct IntervalArgs {
    #[command(flatten)]
    model: ModelArg,
    /// Plant eigenvalue, real part.
    #[arg(long, allow_hyphen_values = true)]
    lambda: f64,
    /// Plant eigenvalue, imaginary part.
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    lambda_im: f64,
    #[command(flatten)]
    search: SearchArgs,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct DesignOutput {
    /// Feedback adjacency CSV.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Report file (default: standard output).
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct WeightedArgs {
    #[command(flatten)]
    model: ModelArg,
    /// Plant network.
    #[arg(long)]
    network: NetworkArg,
    /// Interior stability margin added to boundary gains.
    #[arg(long, default_value_t = DEFAULT_MARGIN)]
    margin: f64,
    #[command(flatten)]
    search: SearchArgs,
    #[command(flatten)]
    output: DesignOutput,
}

#[derive(Debug, Args)]
struct BinaryArgs {
    #[command(flatten)]
    model: ModelArg,
    #[arg(long)]
    network: NetworkArg,
    /// Restrict to symmetric feedback (mirror the upper triangle).
    #[arg(long)]
    symmetric: bool,
    /// Seconds before returning the incumbent.
    #[arg(long, default_value_t = 60.0)]
    time_limit: f64,
    #[command(flatten)]
    output: DesignOutput,
}

#[derive(Debug, Args)]
struct MatchingArgs {
    #[command(flatten)]
    model: ModelArg,
    #[arg(long)]
    network: NetworkArg,
    #[command(flatten)]
    output: DesignOutput,
}

#[derive(Debug, Args)]
struct SweepArgs {
    #[command(flatten)]
    model: ModelArg,
    /// `ring:k` or `complete`.
    #[arg(long, value_parser = parse_family)]
    family: design::SweepFamily,
    /// Inclusive size range `lo:hi`.
    #[arg(long, value_parser = parse_size_range)]
    n: (usize, usize),
    #[arg(long, default_value_t = DEFAULT_MARGIN)]
    margin: f64,
    #[command(flatten)]
    search: SearchArgs,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct VerifyArgs {
    #[command(flatten)]
    model: ModelArg,
    /// Plant network.
    #[arg(long)]
    plant: NetworkArg,
    /// Feedback network, or `zero`.
    #[arg(long)]
    feedback: NetworkArg,
    /// Also integrate the closed loop with RK4.
    #[arg(long)]
    simulate: bool,
    #[arg(long, default_value_t = 10.0)]
    t_end: f64,
    /// Step size (default 1e-3 / max(1, ‖F̃‖∞)).
    #[arg(long)]
    dt: Option<f64>,
    /// Initial state: `ones` or `random:SEED`.
    #[arg(long, default_value = "ones")]
    x0: String,
    /// Keep every k-th step in the trajectory.
    #[arg(long, default_value_t = 100)]
    record_every: usize,
    /// Trajectory CSV `t,x_1,...`.
    #[arg(long)]
    trajectory: Option<PathBuf>,
    /// Report file (default: standard output).
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, clap::ValueEnum)]
enum MethodArg {
    Weighted,
    Binary,
    Matching,
}

impl From<MethodArg> for DesignMethod {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::Weighted => DesignMethod::Weighted,
            MethodArg::Binary => DesignMethod::Binary,
            MethodArg::Matching => DesignMethod::Matching,
        }
    }
}

#[derive(Debug, Args)]
struct ProbArgs {
    #[command(flatten)]
    model: ModelArg,
    /// `er:N:p`.
    #[arg(long, value_parser = parse_er_family)]
    family: (usize, f64),
    #[arg(long, default_value_t = 200)]
    trials: u64,
    /// Master seed; trial k uses seed + k.
    #[arg(long)]
    seed: u64,
    #[arg(long, value_enum, default_value = "weighted")]
    method: MethodArg,
    /// Plant coupling multiplier.
    #[arg(long, default_value_t = 1.0)]
    coupling: f64,
    #[arg(long, default_value_t = DEFAULT_MARGIN)]
    margin: f64,
    #[command(flatten)]
    search: SearchArgs,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Core(#[from] msfnet_core::Error),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(msfnet_core::Error::Infeasible(_) | msfnet_core::Error::NoStableInterval { .. }) => 1,
            _ => 2,
        }
    }
}

/// Outcome of a successful command: `failed` selects exit code 1.
struct Outcome {
    failed: bool,
}

struct Ctx<'a> {
    argv: &'a [String],
    manifest: Option<PathBuf>,
    resolved: String,
    written: Vec<PathBuf>,
}

impl Ctx<'_> {
    /// Writes to `path` atomically, or to standard output when `path` is `None`.
    fn emit(&mut self, path: Option<&Path>, contents: &str) -> Result<(), CliError> {
        match path {
            Some(p) => {
                write_atomic(p, contents.as_bytes()).map_err(|source| CliError::Io {
                    path: p.to_path_buf(),
                    source,
                })?;
                self.written.push(p.to_path_buf());
            }
            None => print!("{contents}"),
        }
        Ok(())
    }

    fn finish(&mut self) -> Result<(), CliError> {
        let target = match (&self.manifest, self.written.first()) {
            (Some(m), _) => m.clone(),
            (None, Some(first)) => manifest_path(first),
            (None, None) => return Ok(()),
        };
        let outputs: Vec<&Path> = self.written.iter().map(PathBuf::as_path).collect();
        let text = manifest(self.argv, &self.resolved, &outputs);
        write_atomic(&target, text.as_bytes()).map_err(|source| CliError::Io { path: target, source })
    }
}

fn model(arg: &ModelArg) -> Result<PlantModel, CliError> {
    Ok(load_model(&arg.model)?)
}

fn read_matrix(path: &Path) -> Result<Matrix, CliError> {
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    csvio::read_adjacency(&text).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
}

fn plant_network(arg: &NetworkArg) -> Result<Network, CliError> {
    match arg {
        NetworkArg::Generated(spec) => Ok(make_network(spec, 1.0)?),
        NetworkArg::File(p) => Ok(Network::custom(read_matrix(p)?)?),
        NetworkArg::Zero => Err(CliError::Usage("a plant network cannot be `zero`".into())),
    }
}

fn feedback_matrix(arg: &NetworkArg, n: usize) -> Result<Matrix, CliError> {
    match arg {
        NetworkArg::Zero => Ok(Matrix::zeros(n, n)),
        NetworkArg::Generated(spec) => Ok(make_network(spec, 1.0)?.into_adjacency()),
        NetworkArg::File(p) => Ok(Network::weighted(read_matrix(p)?)?.into_adjacency()),
    }
}

fn parse_x0(spec: &str, dim: usize) -> Result<Vec<f64>, CliError> {
    if spec == "ones" {
        return Ok(vec![1.0; dim]);
    }
    if let Some(seed) = spec.strip_prefix("random:") {
        let seed: u64 = seed
            .parse()
            .map_err(|_| CliError::Usage(format!("`{spec}`: bad seed")))?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        return Ok((0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect());
    }
    Err(CliError::Usage(format!("`{spec}`: expected `ones` or `random:SEED`")))
}

fn finish_design(
    ctx: &mut Ctx,
    model: &PlantModel,
    plant: &Network,
    network_label: &str,
    mut result: DesignResult,
    optimal: bool,
    output: &DesignOutput,
) -> Result<Outcome, CliError> {
    let verdict = verify_design(model, plant, &mut result)?;
    if let Some(out) = &output.out {
        ctx.emit(Some(out), &csvio::write_adjacency(&result.feedback))?;
    }
    ctx.emit(output.report.as_deref(), &design_report(&result, network_label, optimal))?;
    Ok(Outcome { failed: !verdict.stable })
}

fn dispatch(cli: &Cli, ctx: &mut Ctx) -> Result<Outcome, CliError> {
    match &cli.command {
        Command::Msf(MsfCommand::Grid(a)) => {
            let model = model(&a.model)?;
            let lambdas = GridAxis::new(a.lambda.0, a.lambda.1, a.steps)?;
            let mus = GridAxis::new(a.mu.0, a.mu.1, a.steps)?;
            let points = parallel::sigma_grid(&model, &lambdas, &mus)?;
            ctx.emit(a.out.as_deref(), &csvio::grid_csv(&points))?;
            Ok(Outcome { failed: false })
        }
        Command::Msf(MsfCommand::Interval(a)) => {
            let model = model(&a.model)?;
            let lambda = Complex64::new(a.lambda, a.lambda_im);
            let iv = msf::stable_interval(&model, lambda, &a.search.search())?;
            ctx.emit(a.out.as_deref(), &csvio::interval_csv(&[iv]))?;
            Ok(Outcome { failed: false })
        }
        Command::Design(DesignCommand::Weighted(a)) => {
            let model = model(&a.model)?;
            let plant = plant_network(&a.network)?;
            let result = design::design_weighted(&model, &plant, &a.search.search(), a.margin)?;
            finish_design(ctx, &model, &plant, &a.network.to_string(), result, true, &a.output)
        }
        Command::Design(DesignCommand::Binary(a)) => {
            let model = model(&a.model)?;
            let plant = plant_network(&a.network)?;
            if !(a.time_limit > 0.0 && a.time_limit.is_finite()) {
                return Err(CliError::Usage("--time-limit must be positive".into()));
            }
            let deadline = Instant::now() + Duration::from_secs_f64(a.time_limit);
            let mut stop = || Instant::now() >= deadline;
            match design::design_binary(&model, &plant, a.symmetric, &mut stop) {
                Ok(result) => finish_design(ctx, &model, &plant, &a.network.to_string(), result, true, &a.output),
                Err(msfnet_core::Error::TimedOut(Some(best))) => {
                    eprintln!("time limit reached; reporting best design found");
                    finish_design(ctx, &model, &plant, &a.network.to_string(), *best, false, &a.output)
                }
                Err(e) => Err(e.into()),
            }
        }
        Command::Design(DesignCommand::Matching(a)) => {
            let model = model(&a.model)?;
            let plant = plant_network(&a.network)?;
            let result = design::design_matching(&model, &plant)?;
            if result.matching_exact == Some(false) {
                eprintln!("warning: R L = -H has no exact solution; using the least-squares gain");
            }
            finish_design(ctx, &model, &plant, &a.network.to_string(), result, true, &a.output)
        }
        Command::Sweep(SweepCommand::Norm(a)) => {
            let model = model(&a.model)?;
            let rows = parallel::norm_sweep(&model, a.family, a.n.0..=a.n.1, &a.search.search(), a.margin);
            ctx.emit(a.out.as_deref(), &csvio::sweep_csv(&rows))?;
            let failed = rows.iter().any(|r| r.weighted_norm.is_err());
            Ok(Outcome { failed })
        }
        Command::Verify(a) => {
            let model = model(&a.model)?;
            let plant = plant_network(&a.plant)?;
            let feedback = feedback_matrix(&a.feedback, plant.size())?;
            let system = build_closed_loop(&model, plant.adjacency(), &feedback)?;
            let verdict = spectral_verdict(&system)?;
            let simulation = if a.simulate {
                let x0 = parse_x0(&a.x0, system.dim())?;
                let dt = a.dt.unwrap_or_else(|| verify::default_dt(&system));
                let traj = verify::simulate(&system, &x0, a.t_end, dt, a.record_every)?;
                if let Some(p) = &a.trajectory {
                    ctx.emit(Some(p), &csvio::trajectory_csv(&traj.states))?;
                }
                Some(SimulationSummary {
                    t_end: traj.last().t,
                    dt,
                    initial_norm: verify::l2_norm(&x0),
                    final_norm: verify::l2_norm(&traj.last().x),
                    diverged: traj.diverged,
                })
            } else {
                None
            };
            let text = verify_report(&a.plant.to_string(), &a.feedback.to_string(), system.dim(), &verdict, simulation);
            ctx.emit(a.report.as_deref(), &text)?;
            Ok(Outcome { failed: !verdict.stable })
        }
        Command::Prob(ProbCommand::Stability(a)) => {
            let model = model(&a.model)?;
            if a.trials == 0 {
                return Err(CliError::Usage("--trials must be at least 1".into()));
            }
            let cfg = TrialConfig {
                nodes: a.family.0,
                p: a.family.1,
                coupling: a.coupling,
                method: a.method.into(),
                search: a.search.search(),
                margin: a.margin,
            };
            // Surface parameter errors once instead of as failed trials.
            make_network(
                &msfnet_core::graphs::NetworkSpec::ErdosRenyi { n: cfg.nodes, p: cfg.p, seed: a.seed },
                cfg.coupling,
            )?;
            let est = parallel::stability_probability(&model, &cfg, a.trials, a.seed);
            ctx.emit(a.out.as_deref(), &csvio::probability_csv(cfg.p, &est))?;
            Ok(Outcome { failed: false })
        }
    }
}

/// Runs the CLI on `argv` (program name first) and returns the exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let argv: Vec<OsString> = argv.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let argv_text: Vec<String> = argv.iter().map(|a| a.to_string_lossy().into_owned()).collect();
    let mut ctx = Ctx {
        argv: &argv_text,
        manifest: cli.manifest.clone(),
        resolved: format!("{:#?}", cli.command),
        written: Vec::new(),
    };
    let result = dispatch(&cli, &mut ctx).and_then(|outcome| {
        ctx.finish()?;
        Ok(outcome)
    });
    match result {
        Ok(Outcome { failed: false }) => 0,
        Ok(Outcome { failed: true }) => {
            eprintln!("verdict: unstable or infeasible");
            1
        }
        Err(e) => {
            eprintln!("error: {e}");
            if e.exit_code() == 2 {
                eprintln!("{}", <Cli as clap::CommandFactory>::command().render_usage());
            }
            e.exit_code()
        }
    }
}
