//! Command-line front end.
//!
//! Exit codes: 0 success, 1 input or usage error, 2 a study finished but
//! some alpha levels had no feasible dispatch, 3 `verify` found a gap above
//! tolerance.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::allocation::{allocate, default_taus};
use crate::bilinear::{brute_force_oracle, solve_mfacts, BilinearProblem, SolverSettings};
use crate::caseio::{read_case, CaseFile};
use crate::contingency::n_minus_1;
use crate::error::{Error, Result};
use crate::model::{Direction, LineKey, Network, Strategy, StrategyKind};
use crate::repression::{capacity_sweep, compute_repression_warm, AlphaGrid, StudyConfig};
use crate::report;

#[derive(Debug, Parser)]
#[command(name = "gridflex", version, about = "Load repression studies on DC networks with adjustable line susceptance")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Load repression of one strategy.
    Lr(LrArgs),
    /// Total LR over strategies and device capacities.
    Sweep(SweepArgs),
    /// Single-line outage screening.
    Contingency(ContingencyArgs),
    /// Budget-constrained device allocation.
    Allocate(AllocateArgs),
    /// Compare the solver against exhaustive grid search at one alpha level.
    Verify(VerifyArgs),
}

#[derive(Debug, Clone, Args)]
pub struct Common {
    /// Case file (`.gfcase`), or `bundled:<name>` for a shipped case.
    pub case: String,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 21)]
    pub alpha_points: usize,
    /// Worker threads (defaults to all cores).
    #[arg(long, env = "GRIDFLEX_THREADS")]
    pub threads: Option<usize>,
    #[arg(long, default_value = ".")]
    pub output_dir: PathBuf,
    /// Ignore unknown keys in the case file instead of rejecting it.
    #[arg(long)]
    pub lenient: bool,
}

#[derive(Debug, Args)]
pub struct LrArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long, default_value = "base")]
    pub strategy: StrategyKind,
    /// Device rating on every candidate line. Without it the case's own
    /// bounds apply.
    #[arg(long)]
    pub capacity: Option<f64>,
    /// Cap on summed |beta|.
    #[arg(long)]
    pub budget: Option<f64>,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long, value_delimiter = ',', default_value = "base,inductive,capacitive,smart")]
    pub strategies: Vec<StrategyKind>,
    #[arg(long, value_delimiter = ',', default_value = "0,0.1,0.2,0.3,0.4")]
    pub capacities: Vec<f64>,
    /// Study the network with this line out of service.
    #[arg(long)]
    pub outage: Option<LineKey>,
}

#[derive(Debug, Args)]
pub struct ContingencyArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long, value_delimiter = ',', default_value = "base,inductive,capacitive,smart")]
    pub strategies: Vec<StrategyKind>,
    #[arg(long, value_delimiter = ',', default_value = "0.2")]
    pub capacities: Vec<f64>,
    /// Only these outages (comma separated keys such as `15-24`).
    #[arg(long, value_delimiter = ',')]
    pub only: Option<Vec<LineKey>>,
}

#[derive(Debug, Args)]
pub struct AllocateArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long, default_value = "smart")]
    pub strategy: StrategyKind,
    #[arg(long)]
    pub capacity: Option<f64>,
    /// Explicit budgets, ascending.
    #[arg(long, value_delimiter = ',', conflicts_with = "tau_points")]
    pub taus: Option<Vec<f64>>,
    /// Uniform budgets from 0 to the summed line capacity.
    #[arg(long, default_value_t = 20)]
    pub tau_points: usize,
    #[arg(long)]
    pub outage: Option<LineKey>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum DirectionArg {
    Max,
    Min,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long, default_value = "smart")]
    pub strategy: StrategyKind,
    #[arg(long)]
    pub capacity: Option<f64>,
    #[arg(long, default_value_t = 0.0)]
    pub alpha: f64,
    #[arg(long, value_enum, default_value = "max")]
    pub direction: DirectionArg,
    /// Allowed gap as a fraction of max(1 MW, |oracle|).
    #[arg(long, default_value_t = 1e-3)]
    pub tolerance: f64,
    #[arg(long, default_value_t = 5)]
    pub grid_points: usize,
    #[arg(long, default_value_t = 1_000_000)]
    pub oracle_cap: u64,
}

/// Outcome of a subcommand, before it becomes a process exit code.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Ok,
    Infeasible,
    GapExceeded,
}

impl Outcome {
    pub fn code(self) -> u8 {
        match self {
            Outcome::Ok => 0,
            Outcome::Infeasible => 2,
            Outcome::GapExceeded => 3,
        }
    }
}

/// Parses `args` and runs the subcommand, printing diagnostics to stderr.
pub fn main_with_args<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(&cli) {
        Ok(outcome) => ExitCode::from(outcome.code()),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}

pub fn run(cli: &Cli) -> Result<Outcome> {
    let common = match &cli.command {
        Command::Lr(a) => &a.common,
        Command::Sweep(a) => &a.common,
        Command::Contingency(a) => &a.common,
        Command::Allocate(a) => &a.common,
        Command::Verify(a) => &a.common,
    };
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = common.threads {
        if n == 0 {
            return Err(Error::InvalidArgument("--threads must be at least 1".into()));
        }
        pool = pool.num_threads(n);
    }
    let pool = pool
        .build()
        .map_err(|e| Error::InvalidArgument(format!("thread pool: {e}")))?;
    pool.install(|| match &cli.command {
        Command::Lr(a) => cmd_lr(a),
        Command::Sweep(a) => cmd_sweep(a),
        Command::Contingency(a) => cmd_contingency(a),
        Command::Allocate(a) => cmd_allocate(a),
        Command::Verify(a) => cmd_verify(a),
    })
}

fn load(common: &Common) -> Result<CaseFile> {
    if let Some(name) = common.case.strip_prefix("bundled:") {
        return crate::cases::bundled(name).ok_or_else(|| {
            Error::InvalidArgument(format!("no bundled case `{name}`"))
        });
    }
    let (case, warnings) = read_case(Path::new(&common.case), common.lenient)?;
    for w in warnings {
        eprintln!("warning: {w}");
    }
    Ok(case)
}

fn study(common: &Common, strategy: Strategy) -> Result<StudyConfig> {
    let mut cfg = StudyConfig::new(strategy);
    cfg.grid = AlphaGrid::uniform(common.alpha_points)?;
    cfg.settings = SolverSettings {
        seed: common.seed,
        ..SolverSettings::default()
    };
    Ok(cfg)
}

/// Applies `--capacity`: rates candidate lines to it. Without the flag the
/// strategy is capped by the largest bound already in the case.
fn rated(net: &Network, kind: StrategyKind, capacity: Option<f64>) -> Result<(Network, Strategy)> {
    match capacity {
        Some(c) => {
            if !(0.0..=0.9).contains(&c) {
                return Err(Error::InvalidArgument("--capacity must lie in [0, 0.9]".into()));
            }
            Ok((net.with_device_rating(c), Strategy::new(kind, c)))
        }
        None => {
            let cap = net
                .lines
                .iter()
                .map(|l| l.beta_max.max(l.beta_min.abs()))
                .fold(0.0, f64::max);
            Ok((net.clone(), Strategy::new(kind, cap)))
        }
    }
}

fn create(dir: &Path, name: &str) -> Result<BufWriter<File>> {
    std::fs::create_dir_all(dir).map_err(|source| Error::Io {
        path: dir.to_path_buf(),
        source,
    })?;
    let path = dir.join(name);
    File::create(&path)
        .map(BufWriter::new)
        .map_err(|source| Error::Io { path, source })
}

fn finish(mut w: BufWriter<File>, dir: &Path, name: &str) -> Result<()> {
    w.flush().map_err(|source| Error::Io {
        path: dir.join(name),
        source,
    })
}

fn with_outage(net: &Network, outage: Option<&LineKey>) -> Result<Network> {
    let Some(key) = outage else {
        return Ok(net.clone());
    };
    let l = net
        .line_index(key)
        .ok_or_else(|| Error::UnknownLine(key.to_string()))?;
    let out = net.with_outage(l);
    if !out.is_connected() {
        return Err(Error::InvalidArgument(format!("outage of {key} islands the network")));
    }
    Ok(out)
}

fn cmd_lr(a: &LrArgs) -> Result<Outcome> {
    let case = load(&a.common)?;
    let (net, strategy) = rated(&case.network, a.strategy, a.capacity)?;
    let mut cfg = study(&a.common, strategy)?;
    cfg.budget = a.budget;
    let r = compute_repression_warm(&net, &cfg, &[])?;

    let dir = &a.common.output_dir;
    let mut w = create(dir, "lr_summary.csv")?;
    report::write_lr_summary(&mut w, &r)?;
    finish(w, dir, "lr_summary.csv")?;
    let mut w = create(dir, "envelope.csv")?;
    report::write_envelope(&mut w, &r)?;
    finish(w, dir, "envelope.csv")?;

    if !r.is_complete() {
        for dir in [Direction::Max, Direction::Min] {
            let alphas: Vec<String> = r
                .failed_levels
                .iter()
                .filter(|f| f.1 == dir)
                .map(|f| report::sig6(f.0))
                .collect();
            if !alphas.is_empty() {
                eprintln!("no feasible dispatch ({dir}) at alpha {}", alphas.join(" "));
            }
        }
        println!("{} {}: total LR undefined, some alpha levels are infeasible", case.name, strategy);
        return Ok(Outcome::Infeasible);
    }
    println!(
        "{} {}: total LR {} MW (increase {}, reduction {})",
        case.name,
        strategy,
        report::sig6(r.total_lr()),
        report::sig6(r.total_in(Direction::Max)),
        report::sig6(r.total_in(Direction::Min)),
    );
    Ok(Outcome::Ok)
}

fn cmd_sweep(a: &SweepArgs) -> Result<Outcome> {
    let case = load(&a.common)?;
    let net = with_outage(&case.network, a.outage.as_ref())?;
    let cfg = study(&a.common, Strategy::base())?;
    let rows = capacity_sweep(&net, &a.strategies, &a.capacities, &cfg)?;
    let dir = &a.common.output_dir;
    let mut w = create(dir, "sweep.csv")?;
    report::write_sweep(&mut w, &rows)?;
    finish(w, dir, "sweep.csv")?;
    for row in &rows {
        println!("{:<10} {:>5} {}", row.strategy.name(), report::sig6(row.capacity), report::sig6(row.total_lr));
    }
    Ok(if rows.iter().all(|r| r.complete) {
        Outcome::Ok
    } else {
        Outcome::Infeasible
    })
}

fn cmd_contingency(a: &ContingencyArgs) -> Result<Outcome> {
    let case = load(&a.common)?;
    let cfg = study(&a.common, Strategy::base())?;
    let t = n_minus_1(&case.network, &a.strategies, &a.capacities, &cfg, a.only.as_deref())?;
    let dir = &a.common.output_dir;
    let mut w = create(dir, "n1.csv")?;
    report::write_n1(&mut w, &t)?;
    finish(w, dir, "n1.csv")?;
    println!("intact: base LR {} MW", report::sig6(t.intact.base_lr));
    for o in t.outages.iter().take(5).filter(|o| !o.islanding) {
        println!("{:<10} base LR {} MW", o.outage.unwrap(), report::sig6(o.base_lr));
    }
    let islanding = t.outages.iter().filter(|o| o.islanding).count();
    if islanding > 0 {
        println!("{islanding} outage(s) island the network and were skipped");
    }
    let complete = std::iter::once(&t.intact)
        .chain(&t.outages)
        .flat_map(|o| &o.rows)
        .all(|r| r.complete);
    Ok(if complete { Outcome::Ok } else { Outcome::Infeasible })
}

fn cmd_allocate(a: &AllocateArgs) -> Result<Outcome> {
    let case = load(&a.common)?;
    let (net, strategy) = rated(&case.network, a.strategy, a.capacity)?;
    let taus = match &a.taus {
        Some(t) => t.clone(),
        None => default_taus(&with_outage(&net, a.outage.as_ref())?, strategy, a.tau_points),
    };
    let cfg = study(&a.common, strategy)?;
    let res = allocate(&net, strategy, &taus, a.outage.as_ref(), &cfg)?;
    let dir = &a.common.output_dir;
    let mut w = create(dir, "alloc.csv")?;
    report::write_alloc(&mut w, &net, &res)?;
    finish(w, dir, "alloc.csv")?;
    let mut w = create(dir, "activation_order.txt")?;
    report::write_activation(&mut w, &res).map_err(|source| Error::Io {
        path: dir.join("activation_order.txt"),
        source,
    })?;
    finish(w, dir, "activation_order.txt")?;
    for d in &res.deployments {
        println!("tau {:>8} LR {} MW", report::sig6(d.tau), report::sig6(d.total_lr));
    }
    let order: Vec<String> = res.activation.iter().map(|x| x.line.to_string()).collect();
    println!("activation order: {}", if order.is_empty() { "none".into() } else { order.join(" -> ") });
    Ok(if res.deployments.iter().all(|d| d.complete) {
        Outcome::Ok
    } else {
        Outcome::Infeasible
    })
}

fn cmd_verify(a: &VerifyArgs) -> Result<Outcome> {
    let case = load(&a.common)?;
    let (net, strategy) = rated(&case.network, a.strategy, a.capacity)?;
    let direction = match a.direction {
        DirectionArg::Max => Direction::Max,
        DirectionArg::Min => Direction::Min,
    };
    if !(a.tolerance >= 0.0) {
        return Err(Error::InvalidArgument("--tolerance must be nonnegative".into()));
    }
    let p = BilinearProblem::new(&net, a.alpha, direction, strategy);
    let settings = SolverSettings {
        seed: a.common.seed,
        ..SolverSettings::default()
    };
    let sol = solve_mfacts(&p, &settings)?;
    let oracle = brute_force_oracle(&p, a.grid_points, a.oracle_cap)?;
    if !sol.is_optimal() || oracle.objective.is_nan() {
        println!("no feasible dispatch at alpha {} ({direction})", a.alpha);
        return Ok(Outcome::Infeasible);
    }
    let gap = (sol.objective - oracle.objective).abs();
    let allowed = a.tolerance * oracle.objective.abs().max(1.0);
    println!("case      {}", case.name);
    println!("strategy  {strategy}, alpha {}, {direction}", a.alpha);
    println!("solver    {} MW", report::sig6(sol.objective));
    println!("oracle    {} MW ({} LP solves)", report::sig6(oracle.objective), oracle.evaluations);
    println!("gap       {} MW (allowed {})", report::sig6(gap), report::sig6(allowed));
    Ok(if gap > allowed {
        println!("FAIL");
        Outcome::GapExceeded
    } else {
        println!("ok");
        Outcome::Ok
    })
}
