use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use tic_core::{ErrorKind, Window};

mod commands;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] tic_core::Error),
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl CliError {
    fn kind(&self) -> ErrorKind {
        match self {
            CliError::Core(e) => e.kind(),
            CliError::Usage(_) => ErrorKind::Usage,
            CliError::Io(_) | CliError::Json(_) => ErrorKind::Data,
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;

fn exit_code(kind: ErrorKind) -> u8 {
    match kind {
        ErrorKind::Usage => 2,
        ErrorKind::Data => 3,
        ErrorKind::Resource => 4,
    }
}

#[derive(Parser, Debug)]
#[command(name = "tic", version, about = "Temporal independent cascade toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Turn raw data into contacts, trajectories or networks.
    #[command(subcommand)]
    Build(BuildCommand),
    /// Assign propagation probabilities and write a network CSV.
    #[command(subcommand)]
    Assign(AssignCommand),
    /// Sample random reachable sets into a hypergraph cache.
    Sample(SampleArgs),
    /// Select a solution set with one method.
    Solve(SolveArgs),
    /// Score methods or saved solutions on shared realizations.
    Evaluate(EvaluateArgs),
    /// Remove edges and measure the spread reduction.
    Intervene(InterveneArgs),
    /// Backward contribution of upstream nodes to a solution set.
    Trace(TraceArgs),
    /// Run one cascade and write the activation trace as JSON lines.
    Cascade(CascadeArgs),
    /// Per-node activation probability from a uniformly random seed.
    Activation(ActivationArgs),
    /// Time sampling and greedy selection against n_nets and window length.
    Bench(BenchArgs),
}

#[derive(Subcommand, Debug)]
pub enum BuildCommand {
    /// Daily co-location contacts from `user,venue,ts,category` check-ins.
    Checkins(CheckinArgs),
    /// Slotted co-location contacts from trajectory visits.
    Visits(VisitArgs),
    /// Synthetic trajectories over a POI table.
    Trajectories(TrajectoryArgs),
    /// Synthetic temporal network.
    Synthetic(SyntheticArgs),
    /// Network taken verbatim from `src,dst,t,p` transitions.
    Transitions(InOut),
}

#[derive(Args, Debug)]
pub struct InOut {
    /// Input file.
    #[arg(long)]
    pub input: PathBuf,
    /// Output file.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct SideOutputs {
    /// Write the `u,v,t,venue,category` venue map here.
    #[arg(long)]
    pub venues: Option<PathBuf>,
    /// Write `node,venue,t,category` visits here.
    #[arg(long)]
    pub visits: Option<PathBuf>,
    /// Write the `node,external` id mapping here.
    #[arg(long)]
    pub remap: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct CheckinArgs {
    #[command(flatten)]
    pub io: InOut,
    /// First day kept, in days since the epoch.
    #[arg(long)]
    pub start_day: Option<u64>,
    /// Number of days kept.
    #[arg(long, value_parser = clap::value_parser!(u32).range(1..))]
    pub days: Option<u32>,
    #[command(flatten)]
    pub side: SideOutputs,
}

#[derive(Args, Debug)]
pub struct VisitArgs {
    #[command(flatten)]
    pub io: InOut,
    /// Length of one co-location slot in minutes.
    #[arg(long, default_value_t = 5, value_parser = clap::value_parser!(u32).range(1..))]
    pub slot_minutes: u32,
    #[command(flatten)]
    pub side: SideOutputs,
}

#[derive(Args, Debug)]
pub struct TrajectoryArgs {
    /// `poi,category,open_min,close_min,dwell_min,lat,lon` POI table.
    #[arg(long)]
    pub pois: PathBuf,
    /// Output file.
    #[arg(long)]
    pub out: PathBuf,
    /// Individuals simulated.
    #[arg(long, default_value_t = 100)]
    pub individuals: usize,
    /// Days simulated per individual.
    #[arg(long, default_value_t = 7)]
    pub days: u32,
    /// Mean walking speed.
    #[arg(long, default_value_t = 5.0)]
    pub speed_kmh: f64,
    /// Farthest hop between consecutive visits.
    #[arg(long, default_value_t = 3.0)]
    pub max_travel_km: f64,
    /// Most visits per individual per day.
    #[arg(long, default_value_t = 6)]
    pub max_visits: usize,
    /// Master seed for every random draw.
    #[arg(long)]
    pub seed: u64,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
pub enum FamilyArg {
    Er,
    LateBloomer,
}

#[derive(Args, Debug)]
pub struct SyntheticArgs {
    /// Generator family.
    #[arg(long, value_enum)]
    pub family: FamilyArg,
    /// Node count.
    #[arg(long)]
    pub nodes: usize,
    /// Interval count.
    #[arg(long)]
    pub intervals: u32,
    /// Output file.
    #[arg(long)]
    pub out: PathBuf,
    /// Master seed for every random draw.
    #[arg(long)]
    pub seed: u64,
    /// Pair density per interval (er).
    #[arg(long, default_value_t = 0.01)]
    pub density: f64,
    /// Smallest edge probability.
    #[arg(long, default_value_t = 0.05)]
    pub p_min: f64,
    /// Largest edge probability.
    #[arg(long, default_value_t = 0.3)]
    pub p_max: f64,
    /// Mean out-degree per interval of ordinary nodes (late-bloomer).
    #[arg(long, default_value_t = 1.5)]
    pub background_degree: f64,
    /// High-degree nodes active only in the final interval (late-bloomer).
    #[arg(long, default_value_t = 60)]
    pub decoys: usize,
    /// Distinct contacts of each decoy (late-bloomer).
    #[arg(long, default_value_t = 80)]
    pub decoy_degree: usize,
    /// Edge probability on decoy edges (late-bloomer).
    #[arg(long, default_value_t = 0.01)]
    pub decoy_p: f64,
}

#[derive(Subcommand, Debug)]
pub enum AssignCommand {
    /// Probabilities from contact events via the force-of-infection model.
    Contacts(ContactArgs),
    /// One random interval and a uniform probability per static edge.
    Uniform(UniformArgs),
}

#[derive(ValueEnum, Clone, Copy, Debug)]
pub enum PresetArg {
    Density,
    Dense,
    Proximity,
}

#[derive(Args, Debug)]
pub struct ContactArgs {
    #[command(flatten)]
    pub io: InOut,
    /// Force-of-infection parameter preset.
    #[arg(long, value_enum, default_value = "density")]
    pub preset: PresetArg,
    /// Override the distance-term weight.
    #[arg(long)]
    pub a: Option<f64>,
    /// Override the crowd-term weight.
    #[arg(long)]
    pub b: Option<f64>,
    /// Override the distance decay rate.
    #[arg(long)]
    pub rho1: Option<f64>,
    /// Override the crowd decay rate.
    #[arg(long)]
    pub rho2: Option<f64>,
    /// Distance threshold of the proximity term.
    #[arg(long)]
    pub l: Option<f64>,
    /// History length in intervals.
    #[arg(long)]
    pub t0: Option<u32>,
    /// Node count; defaults to the file header or largest id + 1.
    #[arg(long)]
    pub nodes: Option<usize>,
    /// Interval count; defaults to the file header or largest t.
    #[arg(long)]
    pub intervals: Option<u32>,
}

#[derive(Args, Debug)]
pub struct UniformArgs {
    /// `u,v` edge list.
    #[arg(long)]
    pub edges: PathBuf,
    /// Output file.
    #[arg(long)]
    pub out: PathBuf,
    /// Interval count.
    #[arg(long)]
    pub intervals: u32,
    /// Largest edge probability.
    #[arg(long, default_value_t = 1.0)]
    pub p_max: f64,
    /// Node count; defaults to the file header or largest id + 1.
    #[arg(long)]
    pub nodes: Option<usize>,
    /// Master seed for every random draw.
    #[arg(long)]
    pub seed: u64,
}

#[derive(Args, Debug, Clone)]
pub struct NetArgs {
    /// Network CSV (`u,v,t,p`).
    #[arg(long)]
    pub network: PathBuf,
    /// Interval window `i:j`; defaults to the whole network.
    #[arg(long)]
    pub window: Option<Window>,
    /// Worker threads; 0 uses every core.
    #[arg(long, default_value_t = 0)]
    pub workers: usize,
}

#[derive(Args, Debug)]
pub struct SampleArgs {
    #[command(flatten)]
    pub net: NetArgs,
    /// Random reachable sets to sample.
    #[arg(long, default_value_t = tic_core::sampler::DEFAULT_NETS)]
    pub n_nets: usize,
    /// Master seed for every random draw.
    #[arg(long)]
    pub seed: u64,
    /// Output file.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct HyperArgs {
    /// Hypergraph cache from `sample`, built on the same window.
    #[arg(long)]
    pub hypergraph: Option<PathBuf>,
    /// Nets to sample when no cache is given.
    #[arg(long, default_value_t = tic_core::sampler::DEFAULT_NETS)]
    pub n_nets: usize,
}

#[derive(Args, Debug)]
pub struct SolveArgs {
    #[command(flatten)]
    pub net: NetArgs,
    #[command(flatten)]
    pub hyper: HyperArgs,
    /// One of rsm, esm, maxdeg, random.
    #[arg(long)]
    pub method: tic_core::Method,
    /// Solution size.
    #[arg(long, value_parser = positive)]
    pub k: usize,
    /// Master seed; required whenever sampling or simulating.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output file; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct EvaluateArgs {
    #[command(flatten)]
    pub net: NetArgs,
    #[command(flatten)]
    pub hyper: HyperArgs,
    /// Comma-separated methods from rsm, esm, maxdeg, random.
    #[arg(long, value_delimiter = ',')]
    pub methods: Vec<tic_core::Method>,
    /// Comma-separated solution sizes.
    #[arg(long, value_delimiter = ',', value_parser = positive)]
    pub k: Vec<usize>,
    /// Solution JSON written by `solve`; repeatable.
    #[arg(long)]
    pub solution: Vec<PathBuf>,
    /// Cascade simulations.
    #[arg(long, default_value_t = tic_core::evaluation::DEFAULT_SIMS)]
    pub n_sims: usize,
    /// Do not count a seed inside the set as a detection.
    #[arg(long)]
    pub exclude_seeds: bool,
    /// Master seed for every random draw.
    #[arg(long)]
    pub seed: u64,
    /// Also write the metric table as CSV.
    #[arg(long)]
    pub csv: Option<PathBuf>,
    /// Output file; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct SetArgs {
    /// Comma-separated node ids.
    #[arg(long, value_delimiter = ',', conflicts_with = "solution")]
    pub set: Vec<u32>,
    /// Solution JSON written by `solve`.
    #[arg(long)]
    pub solution: Option<PathBuf>,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
pub enum StrategyArg {
    Random,
    Priority,
}

#[derive(Args, Debug)]
pub struct InterveneArgs {
    #[command(flatten)]
    pub net: NetArgs,
    #[command(flatten)]
    pub seeds: SetArgs,
    /// Edge-removal strategy.
    #[arg(long, value_enum)]
    pub strategy: StrategyArg,
    /// Share of edge records to remove, in [0, 1].
    #[arg(long)]
    pub fraction: f64,
    /// Venue map CSV (priority strategy).
    #[arg(long)]
    pub venues: Option<PathBuf>,
    /// Venues targeted by the priority strategy.
    #[arg(long, default_value_t = 10)]
    pub top_v: usize,
    /// Cascade simulations.
    #[arg(long, default_value_t = tic_core::evaluation::DEFAULT_SIMS)]
    pub n_sims: usize,
    /// Master seed for every random draw.
    #[arg(long)]
    pub seed: u64,
    /// Also write the reduced network here.
    #[arg(long)]
    pub write_network: Option<PathBuf>,
    /// Output file; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
pub enum SeedingArg {
    Random,
    EachNode,
}

#[derive(Args, Debug)]
pub struct TraceArgs {
    #[command(flatten)]
    pub net: NetArgs,
    #[command(flatten)]
    pub set: SetArgs,
    /// How cascades are seeded.
    #[arg(long, value_enum, default_value = "random")]
    pub seeding: SeedingArg,
    /// Cascade simulations.
    #[arg(long, default_value_t = tic_core::evaluation::DEFAULT_SIMS)]
    pub n_sims: usize,
    /// Seedings of every node with each-node seeding.
    #[arg(long, default_value_t = 1)]
    pub rounds: usize,
    /// Contributors counted; defaults to the size of the set.
    #[arg(long)]
    pub top_c: Option<usize>,
    /// Count set members as upstream participants too.
    #[arg(long)]
    pub include_set: bool,
    /// `node,venue,t,category` visits for venue coverage.
    #[arg(long)]
    pub visits: Option<PathBuf>,
    /// Venue map CSV supplying categories.
    #[arg(long)]
    pub venues: Option<PathBuf>,
    /// Master seed for every random draw.
    #[arg(long)]
    pub seed: u64,
    /// Output file; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct CascadeArgs {
    #[command(flatten)]
    pub net: NetArgs,
    #[command(flatten)]
    pub set: SetArgs,
    /// Master seed for every random draw.
    #[arg(long)]
    pub seed: u64,
    /// Output file; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct ActivationArgs {
    #[command(flatten)]
    pub net: NetArgs,
    /// Enumerate every outcome instead of simulating (small networks only).
    #[arg(long)]
    pub exact: bool,
    /// Largest number of in-window records enumerated by --exact.
    #[arg(long, default_value_t = tic_core::cascade::EXACT_PAIR_BOUND)]
    pub pair_bound: usize,
    /// Cascade simulations.
    #[arg(long, default_value_t = 100_000)]
    pub n_sims: usize,
    /// Master seed; required whenever sampling or simulating.
    #[arg(long, required_unless_present = "exact")]
    pub seed: Option<u64>,
    /// Output file; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct BenchArgs {
    #[command(flatten)]
    pub net: NetArgs,
    /// Comma-separated hypergraph sizes to time.
    #[arg(long, value_delimiter = ',', default_value = "20000,40000,80000")]
    pub n_nets: Vec<usize>,
    /// Set size for the greedy step.
    #[arg(long, default_value_t = 50)]
    pub k: usize,
    /// Repetitions per timing.
    #[arg(long, default_value_t = 3)]
    pub reps: usize,
    /// Master seed for every random draw.
    #[arg(long)]
    pub seed: u64,
    /// Output file; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn positive(s: &str) -> std::result::Result<usize, String> {
    match s.parse::<usize>() {
        Ok(0) => Err("must be at least 1".into()),
        Ok(n) => Ok(n),
        Err(e) => Err(e.to_string()),
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Build(c) => commands::build(c),
        Command::Assign(c) => commands::assign(c),
        Command::Sample(a) => commands::sample(a),
        Command::Solve(a) => commands::solve(a),
        Command::Evaluate(a) => commands::evaluate(a),
        Command::Intervene(a) => commands::intervene(a),
        Command::Trace(a) => commands::trace(a),
        Command::Cascade(a) => commands::cascade(a),
        Command::Activation(a) => commands::activation(a),
        Command::Bench(a) => commands::bench(a),
    }
}

fn report(kind: ErrorKind, message: &str) -> ExitCode {
    let code = exit_code(kind);
    let body = serde_json::json!({
        "error": { "kind": kind.as_str(), "code": code, "message": message }
    });
    eprintln!("{body}");
    ExitCode::from(code)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let text = e.render().to_string();
            let first = text.lines().next().unwrap_or("invalid arguments");
            let first = first.strip_prefix("error: ").unwrap_or(first);
            return report(ErrorKind::Usage, first);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => report(e.kind(), &e.to_string()),
    }
}
