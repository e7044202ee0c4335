//! Quality measures for solution sets.
//!
//! Reverse spread is read off the hypergraph: `|V| · covered_nets / nets`.
//! Binary success rate and expected spread are Monte Carlo estimates over
//! fresh single-random-seed realizations. All sets scored in one call share
//! the same realizations (common random numbers), so comparisons between
//! them carry no sampling noise from the cascades themselves.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::cascade::{check_nodes, Spreader};
use crate::error::{Error, Result};
use crate::exec::{map_batches, SimPlan};
use crate::sampler::Hypergraph;
use crate::solvers::{Method, SolutionSet};
use crate::temporal_graph::{NodeId, TemporalNetwork, Window};

/// Default number of evaluation realizations.
pub const DEFAULT_SIMS: usize = 1000;

/// Sample mean with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub mean: f64,
    pub std_err: f64,
}

impl Estimate {
    fn from_sums(n: usize, sum: f64, sum_sq: f64) -> Self {
        let n_f = n as f64;
        let mean = sum / n_f;
        let var = if n > 1 {
            ((sum_sq - n_f * mean * mean) / (n_f - 1.0)).max(0.0)
        } else {
            0.0
        };
        Estimate {
            mean,
            std_err: (var / n_f).sqrt(),
        }
    }
}

/// `|V| · deg(S) / |N|`.
pub fn reverse_spread(h: &Hypergraph, set: &[NodeId]) -> Result<f64> {
    if h.net_count() == 0 {
        return Err(Error::InvalidArgument("hypergraph has no nets".into()));
    }
    Ok(h.node_count() as f64 * h.degree_of_set(set)? as f64 / h.net_count() as f64)
}

/// Whether a seed that is itself in the set counts as a detection.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SeedCounting {
    Include,
    Exclude,
}

/// Monte Carlo scores of one set.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SetScores {
    pub binary_success: Estimate,
    pub expected_spread: Estimate,
}

/// Scores every set against the same `plan.n_sims` realizations.
pub fn score_sets(
    net: &TemporalNetwork,
    window: Window,
    sets: &[&[NodeId]],
    plan: SimPlan,
    seed_counting: SeedCounting,
) -> Result<Vec<SetScores>> {
    window.check(net)?;
    if plan.n_sims == 0 {
        return Err(Error::InvalidArgument("n_sims must be at least 1".into()));
    }
    for set in sets {
        check_nodes(net, set)?;
    }
    let n = net.node_count();
    let masks: Vec<Vec<bool>> = sets
        .iter()
        .map(|set| {
            let mut m = vec![false; n];
            for &v in *set {
                m[v as usize] = true;
            }
            m
        })
        .collect();

    // per set: [hits, spread sum, spread square sum]
    let partial = map_batches(plan.workers, plan.n_sims, |range| {
        let mut spreader = Spreader::new(n);
        let mut sums = vec![[0f64; 3]; masks.len()];
        for i in range {
            let seed = spreader.run_random(net, window, plan.seed, i as u64);
            for (mask, acc) in masks.iter().zip(sums.iter_mut()) {
                let members = spreader.order().iter().filter(|&&v| mask[v as usize]).count();
                let detecting = match seed_counting {
                    SeedCounting::Include => members,
                    SeedCounting::Exclude => members - mask[seed as usize] as usize,
                };
                acc[0] += (detecting > 0) as u8 as f64;
                acc[1] += members as f64;
                acc[2] += (members * members) as f64;
            }
        }
        sums
    });
    let mut totals = vec![[0f64; 3]; masks.len()];
    for sums in partial {
        for (t, s) in totals.iter_mut().zip(sums) {
            for j in 0..3 {
                t[j] += s[j];
            }
        }
    }
    Ok(totals
        .into_iter()
        .map(|[hits, sum, sum_sq]| SetScores {
            binary_success: Estimate::from_sums(plan.n_sims, hits, hits),
            expected_spread: Estimate::from_sums(plan.n_sims, sum, sum_sq),
        })
        .collect())
}

/// Fraction of realizations whose final active set meets `set`.
pub fn binary_success_rate(
    net: &TemporalNetwork,
    set: &[NodeId],
    window: Window,
    plan: SimPlan,
) -> Result<Estimate> {
    Ok(score_sets(net, window, &[set], plan, SeedCounting::Include)?[0].binary_success)
}

/// Mean number of `set` members active at the end of a realization.
pub fn expected_spread(
    net: &TemporalNetwork,
    set: &[NodeId],
    window: Window,
    plan: SimPlan,
) -> Result<Estimate> {
    Ok(score_sets(net, window, &[set], plan, SeedCounting::Include)?[0].expected_spread)
}

/// Affine map of `values` onto `[0, 10]`; all-equal input maps to zeros.
pub fn normalize(values: &[f64]) -> Result<Vec<f64>> {
    if values.is_empty() {
        return Err(Error::InvalidArgument("nothing to normalize".into()));
    }
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if hi <= lo {
        return Ok(vec![0.0; values.len()]);
    }
    Ok(values.iter().map(|x| (x - lo) / (hi - lo) * 10.0).collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    pub method: Method,
    pub k: usize,
    pub window: Window,
    pub n_sims: usize,
    pub nodes: Vec<NodeId>,
    pub reverse_spread: Option<f64>,
    pub binary_success_rate: f64,
    pub binary_success_std_err: f64,
    pub expected_spread: f64,
    pub expected_spread_std_err: f64,
}

/// Reports plus `[0, 10]`-normalized columns taken over the whole table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricTable {
    pub rows: Vec<MetricReport>,
    pub reverse_spread_norm: Option<Vec<f64>>,
    pub binary_success_norm: Vec<f64>,
    pub expected_spread_norm: Vec<f64>,
}

/// Scores every solution on shared realizations.
pub fn evaluate_solutions(
    net: &TemporalNetwork,
    hypergraph: Option<&Hypergraph>,
    window: Window,
    solutions: &[SolutionSet],
    plan: SimPlan,
    seed_counting: SeedCounting,
) -> Result<MetricTable> {
    if solutions.is_empty() {
        return Err(Error::InvalidArgument("no solutions to evaluate".into()));
    }
    let sets: Vec<&[NodeId]> = solutions.iter().map(|s| s.nodes.as_slice()).collect();
    let scores = score_sets(net, window, &sets, plan, seed_counting)?;
    let rows = solutions
        .iter()
        .zip(scores)
        .map(|(sol, sc)| {
            Ok(MetricReport {
                method: sol.method,
                k: sol.k,
                window,
                n_sims: plan.n_sims,
                nodes: sol.nodes.clone(),
                reverse_spread: hypergraph.map(|h| reverse_spread(h, &sol.nodes)).transpose()?,
                binary_success_rate: sc.binary_success.mean,
                binary_success_std_err: sc.binary_success.std_err,
                expected_spread: sc.expected_spread.mean,
                expected_spread_std_err: sc.expected_spread.std_err,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    MetricTable::new(rows)
}

impl MetricTable {
    pub fn new(rows: Vec<MetricReport>) -> Result<Self> {
        let col = |f: fn(&MetricReport) -> f64| rows.iter().map(f).collect::<Vec<_>>();
        let reverse_spread_norm = if rows.iter().all(|r| r.reverse_spread.is_some()) {
            Some(normalize(&col(|r| r.reverse_spread.unwrap_or(0.0)))?)
        } else {
            None
        };
        Ok(MetricTable {
            binary_success_norm: normalize(&col(|r| r.binary_success_rate))?,
            expected_spread_norm: normalize(&col(|r| r.expected_spread))?,
            reverse_spread_norm,
            rows,
        })
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record([
            "method",
            "k",
            "window",
            "n_sims",
            "reverse_spread",
            "reverse_spread_norm",
            "binary_success_rate",
            "binary_success_std_err",
            "binary_success_norm",
            "expected_spread",
            "expected_spread_std_err",
            "expected_spread_norm",
        ])?;
        for (i, r) in self.rows.iter().enumerate() {
            let opt = |x: Option<f64>| x.map(|v| v.to_string()).unwrap_or_default();
            out.write_record([
                r.method.to_string(),
                r.k.to_string(),
                r.window.to_string(),
                r.n_sims.to_string(),
                opt(r.reverse_spread),
                opt(self.reverse_spread_norm.as_ref().map(|n| n[i])),
                r.binary_success_rate.to_string(),
                r.binary_success_std_err.to_string(),
                self.binary_success_norm[i].to_string(),
                r.expected_spread.to_string(),
                r.expected_spread_std_err.to_string(),
                self.expected_spread_norm[i].to_string(),
            ])?;
        }
        out.flush()?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cascade::exact_activation_probabilities;
    use crate::exec::Workers;
    use crate::sampler::build_hypergraph;
    use crate::temporal_graph::EdgeRecord;
    use proptest::prelude::*;

    fn three_sigma(p: f64, n: usize) -> f64 {
        3.0 * (p * (1.0 - p) / n as f64).sqrt()
    }

    #[test]
    fn reverse_spread_examples() {
        let mut nets = vec![vec![0u32]; 5];
        nets.extend(std::iter::repeat_n(vec![1u32], 95));
        let h = Hypergraph::from_nets(10, nets).unwrap();
        assert!((reverse_spread(&h, &[0]).unwrap() - 0.5).abs() < 1e-12);
        assert!((reverse_spread(&h, &(0..10).collect::<Vec<_>>()).unwrap() - 10.0).abs() < 1e-12);
        let empty = Hypergraph::from_nets(3, Vec::<Vec<u32>>::new()).unwrap();
        assert!(reverse_spread(&empty, &[0]).is_err());
    }

    #[test]
    fn reverse_spread_of_isolated_node_is_about_one() {
        let g = TemporalNetwork::empty(20, 1).unwrap();
        let n_nets = 40_000;
        let h = build_hypergraph(&g, Window::new(1, 1).unwrap(), n_nets, 4, Workers::Auto).unwrap();
        let rs = reverse_spread(&h, &[7]).unwrap();
        // deg ~ Binomial(n_nets, 1/20); rs = 20 * deg / n_nets
        let sigma = 20.0 * (0.05f64 * 0.95 / n_nets as f64).sqrt();
        assert!((rs - 1.0).abs() < 3.0 * sigma, "{rs}");
    }

    #[test]
    fn success_and_spread_examples() {
        let g = TemporalNetwork::empty(8, 1).unwrap();
        let w = Window::new(1, 1).unwrap();
        let plan = SimPlan::new(20_000, 1);
        let all: Vec<u32> = (0..8).collect();
        assert_eq!(binary_success_rate(&g, &all, w, plan).unwrap().mean, 1.0);
        assert_eq!(expected_spread(&g, &all, w, plan).unwrap().mean, 1.0);
        assert_eq!(expected_spread(&g, &[], w, plan).unwrap().mean, 0.0);
        let one = binary_success_rate(&g, &[3], w, plan).unwrap().mean;
        assert!((one - 0.125).abs() < three_sigma(0.125, 20_000), "{one}");

        let chain: Vec<_> = (0..7).map(|u| EdgeRecord::new(u, u + 1, 1, 1.0))
            .chain((0..7).map(|u| EdgeRecord::new(u + 1, u, 1, 1.0)))
            .collect();
        let connected = TemporalNetwork::build(8, 1, chain).unwrap();
        assert_eq!(binary_success_rate(&connected, &[5], w, plan).unwrap().mean, 1.0);

        let edge = TemporalNetwork::build(2, 1, [EdgeRecord::new(0, 1, 1, 0.3)]).unwrap();
        let est = expected_spread(&edge, &[1], w, plan).unwrap();
        let exact = exact_activation_probabilities(&edge, w, 20).unwrap()[1];
        assert!((est.mean - exact).abs() < three_sigma(exact, 20_000));
        assert!(est.std_err > 0.0);
    }

    #[test]
    fn seed_exclusion_flag() {
        let g = TemporalNetwork::empty(4, 1).unwrap();
        let w = Window::new(1, 1).unwrap();
        let sc = score_sets(&g, w, &[&[0, 1, 2, 3]], SimPlan::new(500, 2), SeedCounting::Exclude).unwrap();
        assert_eq!(sc[0].binary_success.mean, 0.0);
        assert_eq!(sc[0].expected_spread.mean, 1.0);
    }

    #[test]
    fn normalize_examples() {
        assert_eq!(normalize(&[2.0, 4.0, 6.0]).unwrap(), vec![0.0, 5.0, 10.0]);
        assert_eq!(normalize(&[7.0]).unwrap(), vec![0.0]);
        assert_eq!(normalize(&[0.0, 10.0]).unwrap(), vec![0.0, 10.0]);
        assert!(normalize(&[]).is_err());
    }

    #[test]
    fn table_has_normalized_extremes() {
        let recs: Vec<_> = (0..5u32).map(|u| EdgeRecord::new(u, u + 1, 1, 0.7)).collect();
        let g = TemporalNetwork::build(6, 1, recs).unwrap();
        let w = Window::new(1, 1).unwrap();
        let h = build_hypergraph(&g, w, 2000, 1, Workers::Auto).unwrap();
        let sols = vec![
            crate::solvers::rsm_solve(&h, 1).unwrap(),
            SolutionSet { method: Method::Random, k: 1, nodes: vec![0], coverage: vec![] },
        ];
        let table = evaluate_solutions(&g, Some(&h), w, &sols, SimPlan::new(500, 3), SeedCounting::Include).unwrap();
        for col in [&table.binary_success_norm, &table.expected_spread_norm, table.reverse_spread_norm.as_ref().unwrap()] {
            assert!(col.contains(&0.0) && col.contains(&10.0), "{col:?}");
        }
        let mut csv = Vec::new();
        table.write_csv(&mut csv).unwrap();
        assert_eq!(String::from_utf8(csv).unwrap().lines().count(), 3);
    }

    fn arb_net() -> impl Strategy<Value = TemporalNetwork> {
        prop::collection::vec((0u32..8, 0u32..8, 1u32..4, 0.0f64..=1.0), 0..30).prop_map(|v| {
            let recs = v.into_iter().filter(|r| r.0 != r.1).map(|(u, w, t, p)| EdgeRecord::new(u, w, t, p));
            TemporalNetwork::build(8, 3, recs).unwrap()
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn monotone_and_additive_under_shared_streams(
            g in arb_net(),
            s1 in prop::collection::btree_set(0u32..8, 0..4),
            s2 in prop::collection::btree_set(0u32..8, 0..4),
            seed in any::<u64>(),
        ) {
            let w = Window::new(1, 3).unwrap();
            let a: Vec<u32> = s1.iter().copied().collect();
            let b: Vec<u32> = s2.iter().copied().collect();
            let union: Vec<u32> = s1.union(&s2).copied().collect();
            let sc = score_sets(&g, w, &[&a, &b, &union], SimPlan::new(300, seed), SeedCounting::Include).unwrap();
            prop_assert!(sc[2].binary_success.mean >= sc[0].binary_success.mean);
            prop_assert!(sc[2].binary_success.mean >= sc[1].binary_success.mean);
            let sum = sc[0].expected_spread.mean + sc[1].expected_spread.mean;
            prop_assert!(sc[2].expected_spread.mean <= sum + 1e-12);
            if s1.is_disjoint(&s2) {
                prop_assert!((sc[2].expected_spread.mean - sum).abs() < 1e-9);
            }
            let h = build_hypergraph(&g, w, 300, seed, Workers::Sequential).unwrap();
            prop_assert!(reverse_spread(&h, &union).unwrap() >= reverse_spread(&h, &a).unwrap());
        }
    }
}
