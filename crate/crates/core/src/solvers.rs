//! k-node selection.
//!
//! - RSM (sentinels): greedy maximum coverage of the hypergraph's nets.
//! - ESM (susceptible nodes): the k highest-degree hypergraph nodes.
//! - Max-Deg and Random baselines.
//! - An exhaustive coverage optimum for small instances.
//!
//! Ties go to the lowest node id everywhere.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sampler::Hypergraph;
use crate::temporal_graph::{NodeId, TemporalNetwork, Window};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Rsm,
    Esm,
    MaxDeg,
    Random,
}

impl Method {
    pub const ALL: [Method; 4] = [Method::Rsm, Method::Esm, Method::MaxDeg, Method::Random];

    pub fn as_str(self) -> &'static str {
        match self {
            Method::Rsm => "rsm",
            Method::Esm => "esm",
            Method::MaxDeg => "maxdeg",
            Method::Random => "random",
        }
    }
}

impl std::str::FromStr for Method {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "rsm" => Ok(Method::Rsm),
            "esm" => Ok(Method::Esm),
            "maxdeg" => Ok(Method::MaxDeg),
            "random" => Ok(Method::Random),
            _ => Err(Error::InvalidArgument(format!("unknown method `{s}`"))),
        }
    }
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Selected nodes in pick order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SolutionSet {
    pub method: Method,
    pub k: usize,
    pub nodes: Vec<NodeId>,
    /// Nets covered after each pick; empty when no hypergraph was involved.
    #[serde(default)]
    pub coverage: Vec<usize>,
}

impl SolutionSet {
    /// Fills `coverage` with cumulative net coverage along the pick order.
    pub fn annotate_coverage(&mut self, h: &Hypergraph) {
        self.coverage = cumulative_coverage(h, &self.nodes);
    }

    /// Gains in covered nets contributed by each pick.
    pub fn marginal_gains(&self) -> Vec<usize> {
        let mut prev = 0;
        self.coverage
            .iter()
            .map(|&c| {
                let g = c - prev;
                prev = c;
                g
            })
            .collect()
    }
}

pub(crate) fn cumulative_coverage(h: &Hypergraph, nodes: &[NodeId]) -> Vec<usize> {
    let mut covered = vec![false; h.net_count()];
    let mut total = 0;
    nodes
        .iter()
        .map(|&v| {
            for &n in h.incident(v) {
                if !std::mem::replace(&mut covered[n as usize], true) {
                    total += 1;
                }
            }
            total
        })
        .collect()
}

fn effective_k(k: usize, node_count: usize) -> Result<usize> {
    if k == 0 {
        return Err(Error::InvalidArgument("k must be at least 1".into()));
    }
    if k > node_count {
        log::warn!("k = {k} exceeds the {node_count} available nodes; clamping");
    }
    Ok(k.min(node_count))
}

/// Greedy maximum coverage with decremental degrees.
pub fn rsm_solve(h: &Hypergraph, k: usize) -> Result<SolutionSet> {
    let k = effective_k(k, h.node_count())?;
    let mut degree = h.degrees();
    let mut picked = vec![false; h.node_count()];
    let mut covered = vec![false; h.net_count()];
    let mut nodes = Vec::with_capacity(k);
    let mut coverage = Vec::with_capacity(k);
    let mut total = 0;
    for _ in 0..k {
        let best = (0..h.node_count())
            .filter(|&v| !picked[v])
            .fold(None::<usize>, |best, v| match best {
                Some(b) if degree[b] >= degree[v] => Some(b),
                _ => Some(v),
            })
            .expect("k is clamped to the node count");
        picked[best] = true;
        nodes.push(best as NodeId);
        for &net in h.incident(best as NodeId) {
            if std::mem::replace(&mut covered[net as usize], true) {
                continue;
            }
            total += 1;
            for &pin in h.pins(net as usize) {
                degree[pin as usize] -= 1;
            }
        }
        coverage.push(total);
    }
    Ok(SolutionSet {
        method: Method::Rsm,
        k,
        nodes,
        coverage,
    })
}

/// Top-k hypergraph degree.
pub fn esm_solve(h: &Hypergraph, k: usize) -> Result<SolutionSet> {
    let k = effective_k(k, h.node_count())?;
    let nodes = top_k_by(&h.degrees(), k);
    let coverage = cumulative_coverage(h, &nodes);
    Ok(SolutionSet {
        method: Method::Esm,
        k,
        nodes,
        coverage,
    })
}

fn top_k_by(scores: &[usize], k: usize) -> Vec<NodeId> {
    let mut order: Vec<NodeId> = (0..scores.len() as NodeId).collect();
    order.sort_by(|&a, &b| scores[b as usize].cmp(&scores[a as usize]).then(a.cmp(&b)));
    order.truncate(k);
    order
}

/// Number of distinct nodes linked to each node, in either direction, by an
/// edge stored at some interval of the window.
pub fn window_degrees(net: &TemporalNetwork, window: Window) -> Result<Vec<usize>> {
    window.check(net)?;
    let mut neighbors: Vec<Vec<NodeId>> = vec![Vec::new(); net.node_count()];
    for r in net.records().filter(|r| window.contains(r.t)) {
        neighbors[r.u as usize].push(r.v);
        neighbors[r.v as usize].push(r.u);
    }
    Ok(neighbors
        .into_iter()
        .map(|mut n| {
            n.sort_unstable();
            n.dedup();
            n.len()
        })
        .collect())
}

pub fn max_deg_solve(net: &TemporalNetwork, window: Window, k: usize) -> Result<SolutionSet> {
    let k = effective_k(k, net.node_count())?;
    let nodes = top_k_by(&window_degrees(net, window)?, k);
    Ok(SolutionSet {
        method: Method::MaxDeg,
        k,
        nodes,
        coverage: Vec::new(),
    })
}

pub fn random_solve<R: Rng + ?Sized>(node_count: usize, k: usize, rng: &mut R) -> Result<SolutionSet> {
    let k = effective_k(k, node_count)?;
    let nodes = rand::seq::index::sample(rng, node_count, k)
        .into_iter()
        .map(|i| i as NodeId)
        .collect();
    Ok(SolutionSet {
        method: Method::Random,
        k,
        nodes,
        coverage: Vec::new(),
    })
}

/// Default cap on the number of k-subsets the exhaustive optimum may visit.
pub const EXHAUSTIVE_BOUND: u128 = 1_000_000;

fn binomial(n: usize, k: usize) -> u128 {
    let k = k.min(n - k);
    (0..k).fold(1u128, |acc, i| acc * (n - i) as u128 / (i + 1) as u128)
}

/// Best k-subset coverage by enumeration (lexicographically first optimum).
pub fn exhaustive_cover_opt(h: &Hypergraph, k: usize, bound: u128) -> Result<(Vec<NodeId>, usize)> {
    let n = h.node_count();
    let k = effective_k(k, n)?;
    let subsets = binomial(n, k);
    if subsets > bound {
        return Err(Error::BoundExceeded {
            what: "exhaustive cover subsets",
            size: subsets,
            bound,
        });
    }
    let words = h.net_count().div_ceil(64).max(1);
    let masks: Vec<Vec<u64>> = (0..n as NodeId)
        .map(|v| {
            let mut m = vec![0u64; words];
            for &net in h.incident(v) {
                m[net as usize / 64] |= 1 << (net % 64);
            }
            m
        })
        .collect();

    let mut combo: Vec<usize> = (0..k).collect();
    let mut best = (combo.clone(), 0usize);
    let mut acc = vec![0u64; words];
    loop {
        acc.fill(0);
        for &v in &combo {
            for (a, m) in acc.iter_mut().zip(&masks[v]) {
                *a |= m;
            }
        }
        let covered = acc.iter().map(|w| w.count_ones() as usize).sum();
        if covered > best.1 {
            best = (combo.clone(), covered);
        }
        // next combination in lexicographic order
        let Some(i) = (0..k).rev().find(|&i| combo[i] < n - k + i) else {
            break;
        };
        combo[i] += 1;
        for j in i + 1..k {
            combo[j] = combo[j - 1] + 1;
        }
    }
    Ok((best.0.into_iter().map(|v| v as NodeId).collect(), best.1))
}
