//! End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
//! exits nonzero if any fails. Criteria run one after another so the timing
//! check is not disturbed by concurrent work.

use std::collections::BTreeSet;
use std::time::{Duration, Instant};

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use tic_core::cascade::EXACT_PAIR_BOUND;
use tic_core::evaluation::{reverse_spread, score_sets, SeedCounting, SetScores};
use tic_core::ingest::{generate_synthetic_network, LateBloomerParams, SyntheticFamily};
use tic_core::interventions::{
    backward_contribution, drop_edges_priority, drop_edges_random, spread_reduction, Seeding, VenueMap,
};
use tic_core::probability_model::{infection_force, ContactEvent, InfectionForceParams, Preset};
use tic_core::solvers::{esm_solve, exhaustive_cover_opt, max_deg_solve, random_solve, rsm_solve, EXHAUSTIVE_BOUND};
use tic_core::{
    build_hypergraph, estimate_activation_probabilities, exact_activation_probabilities, run_tic, EdgeRecord,
    Hypergraph, NodeId, SimPlan, TemporalNetwork, Window, Workers,
};

const DEFAULT_SEED: u64 = 20_240_611;
const TINY_INSTANCES: usize = 60;
const TINY_SIMS: usize = 100_000;

type Outcome = Result<String, String>;

fn tiny_instances() -> Vec<TemporalNetwork> {
    let mut rng = ChaCha8Rng::seed_from_u64(DEFAULT_SEED);
    (0..TINY_INSTANCES)
        .map(|_| {
            let n = rng.random_range(2..=5u32);
            let t = rng.random_range(1..=3u32);
            let max_pairs = (n * (n - 1) * t).min(6) as usize;
            let n_pairs = rng.random_range(1..=max_pairs);
            let mut keys = BTreeSet::new();
            while keys.len() < n_pairs {
                let u = rng.random_range(0..n);
                let v = rng.random_range(0..n);
                if u != v {
                    keys.insert((u, v, rng.random_range(1..=t)));
                }
            }
            let recs: Vec<_> = keys
                .into_iter()
                .map(|(u, v, t)| EdgeRecord::new(u, v, t, rng.random_range(0.05..=1.0)))
                .collect();
            TemporalNetwork::build(n as usize, t, recs).unwrap()
        })
        .collect()
}

/// `|observed - p| <= 3 sd` of a binomial proportion over `trials`.
fn within_3_sigma(observed: f64, p: f64, trials: usize) -> bool {
    let sd = (p * (1.0 - p) / trials as f64).sqrt();
    (observed - p).abs() <= 3.0 * sd + 1e-12
}

fn compare_to_exact(estimates: impl Fn(&TemporalNetwork, usize) -> Vec<f64>, trials: usize) -> Outcome {
    let mut checked = 0;
    let mut bad = Vec::new();
    for (i, net) in tiny_instances().iter().enumerate() {
        let w = Window::full(net);
        let exact = exact_activation_probabilities(net, w, EXACT_PAIR_BOUND).map_err(|e| e.to_string())?;
        let est = estimates(net, i);
        for (v, (&p, &q)) in exact.iter().zip(&est).enumerate() {
            checked += 1;
            if !within_3_sigma(q, p, trials) {
                bad.push(format!("instance {i} node {v}: exact {p:.5} estimate {q:.5}"));
            }
        }
    }
    if bad.is_empty() {
        Ok(format!("{checked} node probabilities on {TINY_INSTANCES} instances within 3 sd"))
    } else {
        Err(format!("{} of {checked} outside 3 sd: {}", bad.len(), bad.join("; ")))
    }
}

fn oracle_equivalence() -> Outcome {
    let start = Instant::now();
    let out = compare_to_exact(
        |net, i| {
            let plan = SimPlan::new(TINY_SIMS, DEFAULT_SEED + i as u64);
            estimate_activation_probabilities(net, Window::full(net), plan).unwrap()
        },
        TINY_SIMS,
    );
    let took = start.elapsed();
    let timing = format!("{:.1}s of 60s", took.as_secs_f64());
    match out {
        Ok(s) if took <= Duration::from_secs(60) => Ok(format!("{s}, {timing}")),
        Ok(s) | Err(s) => Err(format!("{s}, {timing}")),
    }
}

fn sampler_consistency() -> Outcome {
    compare_to_exact(
        |net, i| {
            let h = build_hypergraph(net, Window::full(net), TINY_SIMS, DEFAULT_SEED ^ i as u64, Workers::Sequential)
                .unwrap();
            h.degrees().iter().map(|&d| d as f64 / h.net_count() as f64).collect()
        },
        TINY_SIMS,
    )
}

fn random_hypergraph(rng: &mut ChaCha8Rng) -> Hypergraph {
    let n = rng.random_range(1..=12usize);
    let nets = rng.random_range(0..=20usize);
    let nets: Vec<Vec<NodeId>> = (0..nets)
        .map(|_| {
            let size = rng.random_range(1..=n);
            index::sample(rng, n, size).into_iter().map(|v| v as NodeId).collect()
        })
        .collect();
    Hypergraph::from_nets(n, nets).unwrap()
}

fn greedy_guarantee() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(DEFAULT_SEED + 3);
    let bound = 1.0 - (-1.0f64).exp();
    let (mut cases, mut violations, mut gain_violations) = (0, Vec::new(), 0);
    for _ in 0..150 {
        let h = random_hypergraph(&mut rng);
        for k in 1..=3.min(h.node_count()) {
            cases += 1;
            let greedy = rsm_solve(&h, k).map_err(|e| e.to_string())?;
            let got = greedy.coverage.last().copied().unwrap_or(0);
            let (_, opt) = exhaustive_cover_opt(&h, k, EXHAUSTIVE_BOUND).map_err(|e| e.to_string())?;
            if (got as f64) < bound * opt as f64 {
                violations.push(format!("k={k}: greedy {got} opt {opt}"));
            }
            if greedy.marginal_gains().windows(2).any(|g| g[1] > g[0]) {
                gain_violations += 1;
            }
        }
    }
    if violations.is_empty() && gain_violations == 0 {
        Ok(format!("{cases} cases, no ratio or gain violations"))
    } else {
        Err(format!("{} ratio violations {violations:?}, {gain_violations} increasing gains", violations.len()))
    }
}

fn temporal_order() -> Outcome {
    let (a, b, c) = (0, 1, 2);
    let net = TemporalNetwork::build(3, 2, [EdgeRecord::new(a, b, 2, 1.0), EdgeRecord::new(b, c, 1, 1.0)]).unwrap();
    let w = Window::new(1, 2).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(DEFAULT_SEED);
    let runs = 1000;
    let hits = (0..runs)
        .filter(|_| run_tic(&net, &[a], w, &mut rng).unwrap().final_active() == vec![a, b])
        .count();
    if hits == runs {
        Ok(format!("{runs}/{runs} runs end with {{a, b}}"))
    } else {
        Err(format!("{hits}/{runs} runs end with {{a, b}}"))
    }
}

fn esm_exactness() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(DEFAULT_SEED + 5);
    let mut cases = 0;
    for _ in 0..200 {
        let h = random_hypergraph(&mut rng);
        let n = h.node_count();
        let deg = h.degrees();
        for k in 1..=n.min(4) {
            cases += 1;
            let esm: usize = esm_solve(&h, k).unwrap().nodes.iter().map(|&v| deg[v as usize]).sum();
            let best = (0u32..1 << n)
                .filter(|m| m.count_ones() as usize == k)
                .map(|m| (0..n).filter(|&v| m >> v & 1 == 1).map(|v| deg[v]).sum::<usize>())
                .max()
                .unwrap();
            if esm != best {
                return Err(format!("k={k}: esm degree sum {esm}, best {best}"));
            }
        }
    }
    Ok(format!("{cases} cases match enumeration"))
}

struct Benchmark {
    net: TemporalNetwork,
    window: Window,
    hypergraph: Hypergraph,
}

fn late_bloomer() -> TemporalNetwork {
    let family = SyntheticFamily::LateBloomer(LateBloomerParams::default());
    generate_synthetic_network(500, 10, &family, &mut ChaCha8Rng::seed_from_u64(DEFAULT_SEED)).unwrap()
}

fn benchmark() -> Benchmark {
    let net = late_bloomer();
    let window = Window::full(&net);
    let hypergraph = build_hypergraph(&net, window, 20_000, DEFAULT_SEED, Workers::Auto).unwrap();
    Benchmark { net, window, hypergraph }
}

const KS: [usize; 3] = [10, 30, 50];

fn table_shape(b: &Benchmark) -> Outcome {
    let start = Instant::now();
    let plan = SimPlan::new(1000, DEFAULT_SEED + 6);
    let mut rng = ChaCha8Rng::seed_from_u64(DEFAULT_SEED + 7);
    let mut lines = Vec::new();
    let mut failed = false;
    for k in KS {
        let rsm = rsm_solve(&b.hypergraph, k).unwrap().nodes;
        let esm = esm_solve(&b.hypergraph, k).unwrap().nodes;
        let maxdeg = max_deg_solve(&b.net, b.window, k).unwrap().nodes;
        let random = random_solve(b.net.node_count(), k, &mut rng).unwrap().nodes;
        let sets: Vec<&[NodeId]> = vec![&rsm, &esm, &maxdeg, &random];
        let s: Vec<SetScores> = score_sets(&b.net, b.window, &sets, plan, SeedCounting::Include).unwrap();
        let bsr = |i: usize| s[i].binary_success.mean;
        let spread = |i: usize| s[i].expected_spread.mean;
        let ok = bsr(0) >= bsr(2) && bsr(0) >= bsr(3) && spread(1) >= spread(2);
        failed |= !ok;
        lines.push(format!(
            "k={k} success rsm {:.3} maxdeg {:.3} random {:.3}, spread esm {:.2} maxdeg {:.2}",
            bsr(0),
            bsr(2),
            bsr(3),
            spread(1),
            spread(2)
        ));
    }
    let took = start.elapsed();
    let summary = format!("{} ({:.1}s)", lines.join(" | "), took.as_secs_f64());
    if failed || took > Duration::from_secs(300) {
        Err(summary)
    } else {
        Ok(summary)
    }
}

fn non_decreasing(xs: &[f64]) -> bool {
    xs.windows(2).all(|w| w[1] >= w[0])
}

fn monotonicity(b: &Benchmark) -> Outcome {
    let plan = SimPlan::new(1000, DEFAULT_SEED + 8);
    let mut problems = Vec::new();

    // nested k
    let full = rsm_solve(&b.hypergraph, *KS.last().unwrap()).unwrap().nodes;
    let prefixes: Vec<&[NodeId]> = KS.iter().map(|&k| &full[..k]).collect();
    let rs: Vec<f64> = prefixes.iter().map(|s| reverse_spread(&b.hypergraph, s).unwrap()).collect();
    let sc = score_sets(&b.net, b.window, &prefixes, plan, SeedCounting::Include).unwrap();
    let succ: Vec<f64> = sc.iter().map(|s| s.binary_success.mean).collect();
    let spread: Vec<f64> = sc.iter().map(|s| s.expected_spread.mean).collect();
    for (name, xs) in [("reverse spread in k", &rs), ("success in k", &succ), ("spread in k", &spread)] {
        if !non_decreasing(xs) {
            problems.push(format!("{name}: {xs:?}"));
        }
    }

    // nested windows [1, j]
    let set = &full[..30];
    let (mut rs, mut succ, mut spread) = (Vec::new(), Vec::new(), Vec::new());
    for j in 1..=b.net.interval_count() {
        let w = Window::new(1, j).unwrap();
        let h = build_hypergraph(&b.net, w, 20_000, DEFAULT_SEED, Workers::Auto).unwrap();
        rs.push(reverse_spread(&h, set).unwrap());
        let s = score_sets(&b.net, w, &[set], plan, SeedCounting::Include).unwrap();
        succ.push(s[0].binary_success.mean);
        spread.push(s[0].expected_spread.mean);
    }
    for (name, xs) in [("reverse spread in |T|", &rs), ("success in |T|", &succ), ("spread in |T|", &spread)] {
        if !non_decreasing(xs) {
            problems.push(format!("{name}: {xs:?}"));
        }
    }
    if problems.is_empty() {
        Ok(format!(
            "k in {KS:?} and windows [1,1]..[1,{}]: reverse spread {:.1} -> {:.1}, success {:.3} -> {:.3}",
            b.net.interval_count(),
            rs[0],
            rs[rs.len() - 1],
            succ[0],
            succ[succ.len() - 1]
        ))
    } else {
        Err(problems.join("; "))
    }
}

fn runtime_scaling(b: &Benchmark) -> Outcome {
    let sizes = [20_000usize, 40_000, 80_000];
    let times: Vec<f64> = sizes
        .iter()
        .map(|&n| {
            (0..3)
                .map(|_| {
                    let start = Instant::now();
                    build_hypergraph(&b.net, b.window, n, DEFAULT_SEED, Workers::Sequential).unwrap();
                    start.elapsed().as_secs_f64()
                })
                .fold(f64::INFINITY, f64::min)
        })
        .collect();
    let xs: Vec<f64> = sizes.iter().map(|&n| n as f64).collect();
    let r2 = r_squared(&xs, &times);
    let summary = format!(
        "times {:.3}s/{:.3}s/{:.3}s, R^2 = {r2:.4}",
        times[0], times[1], times[2]
    );
    if r2 >= 0.95 {
        Ok(summary)
    } else {
        Err(summary)
    }
}

fn r_squared(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    if syy == 0.0 {
        return 1.0;
    }
    sxy * sxy / (sxx * syy)
}

fn intervention_sanity(b: &Benchmark) -> Outcome {
    let seeds = rsm_solve(&b.hypergraph, 10).unwrap().nodes;
    let mut rng = ChaCha8Rng::seed_from_u64(DEFAULT_SEED + 9);
    let (empty, _) = drop_edges_random(&b.net, 1.0, &mut rng).unwrap();
    let rep = spread_reduction(&b.net, &empty, &seeds, b.window, SimPlan::new(1000, DEFAULT_SEED)).unwrap();
    let expected = 100.0 * (1.0 - seeds.len() as f64 / rep.baseline_mean);
    if (rep.reduction_pct - expected).abs() > 3.0 * rep.std_err + 1e-9 {
        return Err(format!("reduction {:.3}% vs {expected:.3}%", rep.reduction_pct));
    }

    let recs: Vec<_> = (0..100u32).map(|i| EdgeRecord::new(i, i + 100, 1, 0.5)).collect();
    let net = TemporalNetwork::build(200, 1, recs).unwrap();
    let mut venues = VenueMap::new();
    for i in 0..100u32 {
        venues.assign(i, i + 100, 1, if i < 90 { "big" } else { "small" });
    }
    let (after, drop) = drop_edges_priority(&net, 0.1, &venues, 2, &mut rng).unwrap();
    let removed_big = 90 - after.records().filter(|r| r.u < 90).count();
    let removed_small = 10 - after.records().filter(|r| r.u >= 90).count();
    if (removed_big, removed_small) != (9, 1) {
        return Err(format!("priority removed {removed_big}/{removed_small}, allocation {:?}", drop.allocation));
    }
    Ok(format!(
        "full drop {:.3}% (expected {expected:.3}%, se {:.3}); 90/10 venues lose 9/1",
        rep.reduction_pct, rep.std_err
    ))
}

fn backward_fixture() -> Outcome {
    let (a, b, c) = (0, 1, 2);
    let net = TemporalNetwork::build(3, 1, [EdgeRecord::new(a, b, 1, 1.0), EdgeRecord::new(b, c, 1, 1.0)]).unwrap();
    let rep = backward_contribution(
        &net,
        &[c],
        Window::new(1, 1).unwrap(),
        Seeding::EachNode { rounds: 1 },
        1,
        false,
        DEFAULT_SEED,
        Workers::Sequential,
    )
    .map_err(|e| e.to_string())?;
    let summary = format!("ranking {:?}, top-1 contribution {:.1}%", rep.ranking, rep.contribution_pct);
    if rep.ranking == vec![(b, 2), (a, 1)] && rep.contribution_pct == 200.0 / 3.0 {
        Ok(summary)
    } else {
        Err(summary)
    }
}

fn scalar_checks() -> Outcome {
    // reference values from 30-digit evaluation
    let proximity = InfectionForceParams::preset(Preset::Proximity);
    let density = InfectionForceParams::preset(Preset::Density);
    let with_d = |d| ContactEvent::with_distance(0, 1, 1, d);
    let cases = [
        (infection_force(&proximity, &with_d(0.0)), 0.05),
        (infection_force(&proximity, &with_d(10.0)), 0.0),
        (infection_force(&proximity, &with_d(5.0)), 0.030_326_532_985_631_67),
        (infection_force(&density, &ContactEvent::with_crowd(0, 1, 1, 10)), 0.049_502_491_687_458_4),
    ];
    for (got, want) in cases {
        let ok = if want == 0.0 { got == 0.0 } else { ((got - want) / want).abs() <= 1e-6 };
        if !ok {
            return Err(format!("got {got}, expected {want}"));
        }
    }
    Ok(format!("{} scalar values within 1e-6 relative", cases.len()))
}

fn main() {
    let mut failures = 0;
    let mut report = |id: usize, name: &str, outcome: Outcome| {
        match &outcome {
            Ok(detail) => println!("PASS criterion {id} ({name}): {detail}"),
            Err(detail) => {
                failures += 1;
                println!("FAIL criterion {id} ({name}): {detail}");
            }
        }
    };
    report(1, "oracle equivalence", oracle_equivalence());
    report(2, "sampler consistency", sampler_consistency());
    report(3, "greedy guarantee", greedy_guarantee());
    report(4, "temporal order", temporal_order());
    report(5, "esm exactness", esm_exactness());
    let bench = benchmark();
    report(6, "late-bloomer table shape", table_shape(&bench));
    report(7, "monotonicity in k and |T|", monotonicity(&bench));
    report(8, "runtime scaling", runtime_scaling(&bench));
    report(9, "intervention sanity", intervention_sanity(&bench));
    report(10, "backward tracing fixture", backward_fixture());
    report(11, "probability model scalars", scalar_checks());
    if failures > 0 {
        println!("{failures} criteria failed");
        std::process::exit(1);
    }
}
