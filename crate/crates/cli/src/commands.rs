use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};

use tic_core::evaluation::{evaluate_solutions, MetricTable, SeedCounting};
use tic_core::exec::unit_rng;
use tic_core::ingest::{self, Colocation, ContactSet, DaySpan, LateBloomerParams, SyntheticFamily, TrajectoryConfig};
use tic_core::interventions::{
    backward_contribution, drop_edges_priority, drop_edges_random, spread_reduction, venue_coverage,
    BackwardReport, DropReport, ReductionReport, Seeding, VenueCoverage, VenueMap,
};
use tic_core::probability_model::{assign_from_contacts, assign_uniform_random, InfectionForceParams, Preset};
use tic_core::solvers::{esm_solve, max_deg_solve, random_solve, rsm_solve};
use tic_core::{
    build_hypergraph, estimate_activation_probabilities, exact_activation_probabilities, run_tic, Hypergraph, Method, NodeId, SimPlan, SolutionSet, TemporalNetwork,
    Window, Workers,
};

use crate::*;

// Distinct master seeds per random consumer, so that evaluation never reuses
// the realizations a hypergraph was sampled from.
const SAMPLE_STREAM: u64 = 0;
const SIM_STREAM: u64 = 1;
const PICK_STREAM: u64 = 2;
const DROP_STREAM: u64 = 3;

fn derive(seed: u64, stream: u64) -> u64 {
    if stream == SAMPLE_STREAM {
        return seed;
    }
    seed ^ stream.wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

fn file_error(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |source| {
        tic_core::Error::File {
            path: path.to_path_buf(),
            source,
        }
        .into()
    }
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path).map(BufWriter::new).map_err(file_error(path))
}

fn emit_json<T: Serialize>(out: Option<&PathBuf>, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    match out {
        Some(path) => std::fs::write(path, text).map_err(file_error(path))?,
        None => std::io::stdout().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn load_network(args: &NetArgs) -> Result<(TemporalNetwork, Window)> {
    let net = TemporalNetwork::load(&args.network, None, None)?;
    let window = args.window.unwrap_or_else(|| Window::full(&net));
    window.check(&net)?;
    Ok((net, window))
}

fn workers(args: &NetArgs) -> Workers {
    Workers::from_count(args.workers)
}

fn side_outputs(c: &Colocation, side: &SideOutputs) -> Result<()> {
    if let Some(p) = &side.venues {
        c.venues.write_csv(create(p)?)?;
    }
    if let Some(p) = &side.visits {
        ingest::write_visits(create(p)?, &c.visits)?;
    }
    if let Some(p) = &side.remap {
        c.remap.write_csv(create(p)?)?;
    }
    Ok(())
}

fn write_colocation(c: &Colocation, out: &Path, side: &SideOutputs) -> Result<()> {
    let set = ContactSet {
        node_count: c.node_count(),
        interval_count: c.interval_count,
        events: c.events.clone(),
    };
    ingest::write_contacts(create(out)?, &set)?;
    side_outputs(c, side)
}

pub fn build(cmd: BuildCommand) -> Result<()> {
    match cmd {
        BuildCommand::Checkins(a) => {
            let checkins = ingest::load_checkins_path(&a.io.input)?;
            let span = DaySpan {
                start_day: a.start_day,
                days: a.days,
            };
            let c = ingest::build_colocation_daily(&checkins, span)?;
            write_colocation(&c, &a.io.out, &a.side)
        }
        BuildCommand::Visits(a) => {
            let visits = ingest::load_trajectories_path(&a.io.input)?;
            let c = ingest::build_colocation_slotted(&visits, a.slot_minutes)?;
            write_colocation(&c, &a.io.out, &a.side)
        }
        BuildCommand::Trajectories(a) => {
            let pois = ingest::load_pois_path(&a.pois)?;
            let config = TrajectoryConfig {
                n_individuals: a.individuals,
                n_days: a.days,
                speed_kmh: a.speed_kmh,
                max_travel_km: a.max_travel_km,
                max_visits: a.max_visits,
                ..TrajectoryConfig::default()
            };
            let visits = ingest::generate_trajectories(&pois, &config, a.seed)?;
            ingest::write_trajectories(create(&a.out)?, &visits)?;
            Ok(())
        }
        BuildCommand::Synthetic(a) => {
            let family = match a.family {
                FamilyArg::Er => SyntheticFamily::ErdosRenyi {
                    density: a.density,
                    p_min: a.p_min,
                    p_max: a.p_max,
                },
                FamilyArg::LateBloomer => SyntheticFamily::LateBloomer(LateBloomerParams {
                    background_degree: a.background_degree,
                    p_min: a.p_min,
                    p_max: a.p_max,
                    decoys: a.decoys,
                    decoy_degree: a.decoy_degree,
                    decoy_p: a.decoy_p,
                }),
            };
            let mut rng = unit_rng(a.seed, 0);
            let net = ingest::generate_synthetic_network(a.nodes, a.intervals, &family, &mut rng)?;
            net.save(&a.out)?;
            Ok(())
        }
        BuildCommand::Transitions(a) => {
            ingest::load_transitions_path(&a.input)?.save(&a.out)?;
            Ok(())
        }
    }
}

pub fn assign(cmd: AssignCommand) -> Result<()> {
    match cmd {
        AssignCommand::Contacts(a) => {
            let set = ingest::load_contact_path(&a.io.input)?;
            let preset = match a.preset {
                PresetArg::Density => Preset::Density,
                PresetArg::Dense => Preset::DenseDensity,
                PresetArg::Proximity => Preset::Proximity,
            };
            let mut params = InfectionForceParams::preset(preset);
            if let Some(x) = a.a {
                params.a = x;
            }
            if let Some(x) = a.b {
                params.b = x;
            }
            if let Some(x) = a.rho1 {
                params.rho1 = x;
            }
            if let Some(x) = a.rho2 {
                params.rho2 = x;
            }
            if let Some(x) = a.l {
                params.dist_threshold = x;
            }
            if let Some(x) = a.t0 {
                params.history = x;
            }
            let nodes = a.nodes.unwrap_or(set.node_count).max(1);
            let intervals = a.intervals.unwrap_or(set.interval_count).max(1);
            assign_from_contacts(&params, &set.events, nodes, intervals)?.save(&a.io.out)?;
            Ok(())
        }
        AssignCommand::Uniform(a) => {
            let edges = ingest::load_edge_list_path(&a.edges)?;
            let nodes = a.nodes.unwrap_or(edges.node_count).max(1);
            let mut rng = unit_rng(a.seed, 0);
            assign_uniform_random(&edges.edges, nodes, a.intervals, a.p_max, &mut rng)?.save(&a.out)?;
            Ok(())
        }
    }
}

pub fn sample(a: SampleArgs) -> Result<()> {
    let (net, window) = load_network(&a.net)?;
    let h = build_hypergraph(&net, window, a.n_nets, derive(a.seed, SAMPLE_STREAM), workers(&a.net))?;
    h.save(&a.out)?;
    Ok(())
}

fn obtain_hypergraph(
    hyper: &HyperArgs,
    net: &TemporalNetwork,
    window: Window,
    seed: Option<u64>,
    workers: Workers,
) -> Result<Hypergraph> {
    if let Some(path) = &hyper.hypergraph {
        let h = Hypergraph::load(path)?;
        if h.node_count() != net.node_count() {
            return Err(usage(format!(
                "hypergraph has {} nodes but the network has {}",
                h.node_count(),
                net.node_count()
            )));
        }
        return Ok(h);
    }
    let seed = seed.ok_or_else(|| usage("--seed is required to sample a hypergraph (or pass --hypergraph)"))?;
    Ok(build_hypergraph(net, window, hyper.n_nets, derive(seed, SAMPLE_STREAM), workers)?)
}

#[derive(Serialize, Deserialize)]
struct SolveOutput {
    window: Window,
    solution: SolutionSet,
}

fn select(
    method: Method,
    k: usize,
    net: &TemporalNetwork,
    window: Window,
    h: Option<&Hypergraph>,
    seed: Option<u64>,
) -> Result<SolutionSet> {
    let need_h = || h.ok_or_else(|| usage(format!("{method} needs a hypergraph")));
    let mut sol = match method {
        Method::Rsm => rsm_solve(need_h()?, k)?,
        Method::Esm => esm_solve(need_h()?, k)?,
        Method::MaxDeg => max_deg_solve(net, window, k)?,
        Method::Random => {
            let seed = seed.ok_or_else(|| usage("--seed is required for the random method"))?;
            random_solve(net.node_count(), k, &mut unit_rng(derive(seed, PICK_STREAM), k as u64))?
        }
    };
    if let (Some(h), true) = (h, sol.coverage.is_empty()) {
        sol.annotate_coverage(h);
    }
    Ok(sol)
}

fn needs_hypergraph(m: Method) -> bool {
    matches!(m, Method::Rsm | Method::Esm)
}

pub fn solve(a: SolveArgs) -> Result<()> {
    let (net, window) = load_network(&a.net)?;
    let h = if needs_hypergraph(a.method) || a.hyper.hypergraph.is_some() {
        Some(obtain_hypergraph(&a.hyper, &net, window, a.seed, workers(&a.net))?)
    } else {
        None
    };
    let solution = select(a.method, a.k, &net, window, h.as_ref(), a.seed)?;
    emit_json(a.out.as_ref(), &SolveOutput { window, solution })
}

fn read_solution(path: &Path) -> Result<SolveOutput> {
    let text = std::fs::read_to_string(path).map_err(file_error(path))?;
    serde_json::from_str(&text).map_err(|e| {
        CliError::Core(tic_core::Error::Data {
            source_name: path.display().to_string(),
            line: e.line() as u64,
            message: e.to_string(),
        })
    })
}

pub fn evaluate(a: EvaluateArgs) -> Result<()> {
    let (net, window) = load_network(&a.net)?;
    if a.methods.is_empty() && a.solution.is_empty() {
        return Err(usage("give --methods with --k, or --solution files"));
    }
    if !a.methods.is_empty() && a.k.is_empty() {
        return Err(usage("--methods needs --k"));
    }
    let w = workers(&a.net);
    let want_h = a.hyper.hypergraph.is_some() || a.methods.iter().any(|&m| needs_hypergraph(m));
    let h = if want_h {
        Some(obtain_hypergraph(&a.hyper, &net, window, Some(a.seed), w)?)
    } else {
        None
    };
    let mut solutions = Vec::new();
    for &k in &a.k {
        for &m in &a.methods {
            solutions.push(select(m, k, &net, window, h.as_ref(), Some(a.seed))?);
        }
    }
    for path in &a.solution {
        let s = read_solution(path)?;
        if s.window != window {
            return Err(usage(format!("{} was solved on window {}, evaluating {window}", path.display(), s.window)));
        }
        solutions.push(s.solution);
    }
    let counting = if a.exclude_seeds {
        SeedCounting::Exclude
    } else {
        SeedCounting::Include
    };
    let plan = SimPlan::new(a.n_sims, derive(a.seed, SIM_STREAM)).with_workers(w);
    let table: MetricTable = evaluate_solutions(&net, h.as_ref(), window, &solutions, plan, counting)?;
    if let Some(p) = &a.csv {
        table.write_csv(create(p)?)?;
    }
    emit_json(a.out.as_ref(), &table)
}

fn seed_set(args: &SetArgs, net: &TemporalNetwork) -> Result<Vec<NodeId>> {
    let set = match &args.solution {
        Some(p) => read_solution(p)?.solution.nodes,
        None => args.set.clone(),
    };
    if set.is_empty() {
        return Err(usage("give --set or --solution"));
    }
    if let Some(&bad) = set.iter().find(|&&v| v as usize >= net.node_count()) {
        return Err(tic_core::Error::NodeOutOfRange {
            node: bad as u64,
            node_count: net.node_count(),
        }
        .into());
    }
    Ok(set)
}

#[derive(Serialize)]
struct InterventionOutput {
    window: Window,
    seeds: Vec<NodeId>,
    drop: DropReport,
    reduction: ReductionReport,
}

pub fn intervene(a: InterveneArgs) -> Result<()> {
    let (net, window) = load_network(&a.net)?;
    let seeds = seed_set(&a.seeds, &net)?;
    let mut rng = unit_rng(derive(a.seed, DROP_STREAM), 0);
    let (modified, drop) = match a.strategy {
        StrategyArg::Random => drop_edges_random(&net, a.fraction, &mut rng)?,
        StrategyArg::Priority => {
            let path = a.venues.as_ref().ok_or_else(|| usage("priority strategy needs --venues"))?;
            let venues = VenueMap::load(path)?;
            drop_edges_priority(&net, a.fraction, &venues, a.top_v, &mut rng)?
        }
    };
    if let Some(p) = &a.write_network {
        modified.save(p)?;
    }
    let plan = SimPlan::new(a.n_sims, derive(a.seed, SIM_STREAM)).with_workers(workers(&a.net));
    let reduction = spread_reduction(&net, &modified, &seeds, window, plan)?;
    emit_json(
        a.out.as_ref(),
        &InterventionOutput {
            window,
            seeds,
            drop,
            reduction,
        },
    )
}

#[derive(Serialize)]
struct TraceOutput {
    window: Window,
    set: Vec<NodeId>,
    backward: BackwardReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    venue_coverage: Option<VenueCoverage>,
}

pub fn trace(a: TraceArgs) -> Result<()> {
    let (net, window) = load_network(&a.net)?;
    let set = seed_set(&a.set, &net)?;
    let seeding = match a.seeding {
        SeedingArg::Random => Seeding::Random { n_sims: a.n_sims },
        SeedingArg::EachNode => Seeding::EachNode { rounds: a.rounds },
    };
    let top_c = a.top_c.unwrap_or(set.len());
    let backward = backward_contribution(
        &net,
        &set,
        window,
        seeding,
        top_c,
        a.include_set,
        derive(a.seed, SIM_STREAM),
        workers(&a.net),
    )?;
    let venue_coverage = match &a.visits {
        Some(p) => {
            let visits = ingest::load_visits_path(p)?;
            let venues = a.venues.as_deref().map(VenueMap::load).transpose()?;
            Some(venue_coverage(&set, venues.as_ref(), &visits, window))
        }
        None => None,
    };
    emit_json(
        a.out.as_ref(),
        &TraceOutput {
            window,
            set,
            backward,
            venue_coverage,
        },
    )
}

pub fn cascade(a: CascadeArgs) -> Result<()> {
    let (net, window) = load_network(&a.net)?;
    let seeds = seed_set(&a.set, &net)?;
    let trace = run_tic(&net, &seeds, window, &mut unit_rng(derive(a.seed, SIM_STREAM), 0))?;
    match &a.out {
        Some(p) => trace.write_jsonl(create(p)?)?,
        None => trace.write_jsonl(std::io::stdout().lock())?,
    }
    Ok(())
}

#[derive(Serialize)]
struct ActivationOutput {
    window: Window,
    method: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    n_sims: Option<usize>,
    probabilities: Vec<f64>,
}

pub fn activation(a: ActivationArgs) -> Result<()> {
    let (net, window) = load_network(&a.net)?;
    let out = if a.exact {
        ActivationOutput {
            window,
            method: "exact",
            n_sims: None,
            probabilities: exact_activation_probabilities(&net, window, a.pair_bound)?,
        }
    } else {
        let seed = a.seed.ok_or_else(|| usage("--seed is required unless --exact"))?;
        let plan = SimPlan::new(a.n_sims, derive(seed, SIM_STREAM)).with_workers(workers(&a.net));
        ActivationOutput {
            window,
            method: "monte_carlo",
            n_sims: Some(a.n_sims),
            probabilities: estimate_activation_probabilities(&net, window, plan)?,
        }
    };
    emit_json(a.out.as_ref(), &out)
}

#[derive(Serialize)]
struct BenchRow {
    n_nets: usize,
    window: Window,
    sample_seconds: f64,
    rsm_seconds: f64,
    total_pins: usize,
}

#[derive(Serialize)]
struct BenchOutput {
    workers: usize,
    by_n_nets: Vec<BenchRow>,
    by_window: Vec<BenchRow>,
}

fn time_once(
    net: &TemporalNetwork,
    window: Window,
    n_nets: usize,
    k: usize,
    seed: u64,
    workers: Workers,
    reps: usize,
) -> Result<BenchRow> {
    let (mut sample_best, mut rsm_best, mut pins) = (f64::INFINITY, f64::INFINITY, 0);
    for _ in 0..reps.max(1) {
        let start = Instant::now();
        let h = build_hypergraph(net, window, n_nets, seed, workers)?;
        sample_best = sample_best.min(start.elapsed().as_secs_f64());
        let start = Instant::now();
        rsm_solve(&h, k)?;
        rsm_best = rsm_best.min(start.elapsed().as_secs_f64());
        pins = h.total_pins();
    }
    Ok(BenchRow {
        n_nets,
        window,
        sample_seconds: sample_best,
        rsm_seconds: rsm_best,
        total_pins: pins,
    })
}

pub fn bench(a: BenchArgs) -> Result<()> {
    let (net, window) = load_network(&a.net)?;
    if a.n_nets.is_empty() || a.n_nets.contains(&0) {
        return Err(usage("--n-nets needs positive sizes"));
    }
    let w = workers(&a.net);
    let seed = derive(a.seed, SAMPLE_STREAM);
    let by_n_nets = a
        .n_nets
        .iter()
        .map(|&n| time_once(&net, window, n, a.k, seed, w, a.reps))
        .collect::<Result<Vec<_>>>()?;
    let by_window = window
        .intervals()
        .map(|j| {
            let sub = Window::new(window.start, j)?;
            time_once(&net, sub, a.n_nets[0], a.k, seed, w, a.reps)
        })
        .collect::<Result<Vec<_>>>()?;
    emit_json(
        a.out.as_ref(),
        &BenchOutput {
            workers: a.net.workers,
            by_n_nets,
            by_window,
        },
    )
}
