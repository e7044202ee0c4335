//! Temporal independent cascade realizations.
//!
//! One realization walks the window interval by interval. At the start of
//! interval `t` every active node is queued; each dequeued node tries every
//! still-inactive out-neighbor once with probability `p^t(u,v)`, and winners
//! join the back of the same queue. The interval ends when the queue drains,
//! and the active set carries over to the next interval, where everyone gets
//! to try again under the new probabilities.
//!
//! The Bernoulli outcomes come from an [`EdgeCoins`] source. [`StreamCoins`]
//! draws them sequentially from an RNG; [`KeyedCoins`] derives each outcome
//! from a hash of `(key, u, v, t)`, so two runs sharing a key see the same
//! live edges even on different networks or windows (common random numbers).

use std::io::Write;

use rand::{Rng, RngCore};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exec::{map_batches, unit_rng, SimPlan};
use crate::temporal_graph::{NodeId, TemporalNetwork, Window};

/// Source of the Bernoulli outcome of "`u` tries `v` during `t`".
pub trait EdgeCoins {
    fn attempt(&mut self, u: NodeId, v: NodeId, t: u32, p: f64) -> bool;
}

/// Draws one uniform per attempt from the wrapped RNG.
pub struct StreamCoins<'a, R: ?Sized>(pub &'a mut R);

impl<R: RngCore + ?Sized> EdgeCoins for StreamCoins<'_, R> {
    #[inline]
    fn attempt(&mut self, _u: NodeId, _v: NodeId, _t: u32, p: f64) -> bool {
        self.0.random::<f64>() < p
    }
}

/// Outcomes as a fixed function of `(key, u, v, t)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct KeyedCoins {
    key: u64,
}

impl KeyedCoins {
    pub fn new(key: u64) -> Self {
        KeyedCoins { key }
    }

    /// Uniform in `[0, 1)` with 53 bits of resolution.
    #[inline]
    pub fn uniform(&self, u: NodeId, v: NodeId, t: u32) -> f64 {
        let h = splitmix64(splitmix64(splitmix64(self.key ^ u as u64) ^ v as u64) ^ t as u64);
        (h >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }
}

impl EdgeCoins for KeyedCoins {
    #[inline]
    fn attempt(&mut self, u: NodeId, v: NodeId, t: u32, p: f64) -> bool {
        self.uniform(u, v, t) < p
    }
}

#[inline]
fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Reusable scratch space for running many realizations on one network.
pub(crate) struct Spreader {
    stamp: Vec<u32>,
    epoch: u32,
    /// Active nodes in activation order; doubles as the BFS queue.
    order: Vec<NodeId>,
    /// `order.len()` after the seeds and after each interval.
    marks: Vec<usize>,
}

impl Spreader {
    pub fn new(node_count: usize) -> Self {
        Spreader {
            stamp: vec![0; node_count],
            epoch: 0,
            order: Vec::new(),
            marks: Vec::new(),
        }
    }

    #[inline]
    pub fn is_active(&self, v: NodeId) -> bool {
        self.stamp[v as usize] == self.epoch
    }

    #[inline]
    fn activate(&mut self, v: NodeId) -> bool {
        let slot = &mut self.stamp[v as usize];
        if *slot == self.epoch {
            return false;
        }
        *slot = self.epoch;
        self.order.push(v);
        true
    }

    /// Runs one realization; callers have validated ids and window.
    pub fn run<C: EdgeCoins>(
        &mut self,
        net: &TemporalNetwork,
        seeds: &[NodeId],
        window: Window,
        coins: &mut C,
    ) -> &[NodeId] {
        self.epoch = self.epoch.wrapping_add(1);
        if self.epoch == 0 {
            self.stamp.fill(0);
            self.epoch = 1;
        }
        self.order.clear();
        self.marks.clear();
        for &s in seeds {
            self.activate(s);
        }
        self.marks.push(self.order.len());
        for t in window.intervals() {
            let mut head = 0;
            while head < self.order.len() {
                let u = self.order[head];
                head += 1;
                for &(v, p) in net.out(u, t) {
                    if !self.is_active(v) && coins.attempt(u, v, t, p) {
                        self.activate(v);
                    }
                }
            }
            self.marks.push(self.order.len());
        }
        &self.order
    }

    /// Activation order of the last run.
    pub fn order(&self) -> &[NodeId] {
        &self.order
    }

    /// Runs one random process for work unit `index`: a uniformly random
    /// single seed followed by a keyed realization. Returns the seed.
    pub fn run_random(
        &mut self,
        net: &TemporalNetwork,
        window: Window,
        master_seed: u64,
        index: u64,
    ) -> NodeId {
        let mut rng = unit_rng(master_seed, index);
        let seed = rng.random_range(0..net.node_count()) as NodeId;
        let mut coins = KeyedCoins::new(rng.random());
        self.run(net, &[seed], window, &mut coins);
        seed
    }

    /// Keyed realization from a fixed seed set for work unit `index`.
    pub fn run_seeded(
        &mut self,
        net: &TemporalNetwork,
        seeds: &[NodeId],
        window: Window,
        master_seed: u64,
        index: u64,
    ) -> &[NodeId] {
        let mut coins = KeyedCoins::new(unit_rng(master_seed, index).random());
        self.run(net, seeds, window, &mut coins)
    }
}

/// Per-interval active sets of one realization.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CascadeTrace {
    pub window: Window,
    pub seeds: Vec<NodeId>,
    /// `activated[k]` holds the nodes first activated during interval
    /// `window.start + k`, in activation order.
    pub activated: Vec<Vec<NodeId>>,
}

impl CascadeTrace {
    /// Sorted active set at the start of interval `window.start + step`;
    /// `step == window.len()` gives the final set.
    pub fn active_after(&self, step: usize) -> Vec<NodeId> {
        let mut set: Vec<NodeId> = self
            .seeds
            .iter()
            .chain(self.activated[..step.min(self.activated.len())].iter().flatten())
            .copied()
            .collect();
        set.sort_unstable();
        set
    }

    pub fn final_active(&self) -> Vec<NodeId> {
        self.active_after(self.activated.len())
    }

    /// One JSON object per interval: `{"t":..,"activated":[..]}`.
    pub fn write_jsonl<W: Write>(&self, mut w: W) -> Result<()> {
        #[derive(Serialize)]
        struct Line<'a> {
            t: u32,
            activated: &'a [NodeId],
        }
        for (k, nodes) in self.activated.iter().enumerate() {
            let line = Line {
                t: self.window.start + k as u32,
                activated: nodes,
            };
            serde_json::to_writer(&mut w, &line)?;
            writeln!(w)?;
        }
        Ok(())
    }
}

pub(crate) fn check_nodes(net: &TemporalNetwork, nodes: &[NodeId]) -> Result<()> {
    match nodes.iter().find(|&&v| v as usize >= net.node_count()) {
        Some(&v) => Err(Error::NodeOutOfRange {
            node: v as u64,
            node_count: net.node_count(),
        }),
        None => Ok(()),
    }
}

/// Runs one realization from `seeds`, drawing attempt outcomes from `rng`.
pub fn run_tic<R: RngCore + ?Sized>(
    net: &TemporalNetwork,
    seeds: &[NodeId],
    window: Window,
    rng: &mut R,
) -> Result<CascadeTrace> {
    run_tic_with(net, seeds, window, &mut StreamCoins(rng))
}

/// [`run_tic`] with an explicit coin source.
pub fn run_tic_with<C: EdgeCoins>(
    net: &TemporalNetwork,
    seeds: &[NodeId],
    window: Window,
    coins: &mut C,
) -> Result<CascadeTrace> {
    if seeds.is_empty() {
        return Err(Error::EmptySeedSet);
    }
    check_nodes(net, seeds)?;
    window.check(net)?;
    let mut spreader = Spreader::new(net.node_count());
    spreader.run(net, seeds, window, coins);
    let marks = &spreader.marks;
    let order = &spreader.order;
    Ok(CascadeTrace {
        window,
        seeds: order[..marks[0]].to_vec(),
        activated: marks.windows(2).map(|w| order[w[0]..w[1]].to_vec()).collect(),
    })
}

/// Monte Carlo activation frequency of every node over `plan.n_sims`
/// single-random-seed realizations.
pub fn estimate_activation_probabilities(
    net: &TemporalNetwork,
    window: Window,
    plan: SimPlan,
) -> Result<Vec<f64>> {
    window.check(net)?;
    if plan.n_sims == 0 {
        return Err(Error::InvalidArgument("n_sims must be at least 1".into()));
    }
    let n = net.node_count();
    let partial = map_batches(plan.workers, plan.n_sims, |range| {
        let mut spreader = Spreader::new(n);
        let mut counts = vec![0u64; n];
        for i in range {
            spreader.run_random(net, window, plan.seed, i as u64);
            for &v in spreader.order() {
                counts[v as usize] += 1;
            }
        }
        counts
    });
    let mut totals = vec![0u64; n];
    for counts in partial {
        for (t, c) in totals.iter_mut().zip(counts) {
            *t += c;
        }
    }
    Ok(totals
        .into_iter()
        .map(|c| c as f64 / plan.n_sims as f64)
        .collect())
}

/// Default cap on `(edge, interval)` pairs for exhaustive enumeration.
pub const EXACT_PAIR_BOUND: usize = 20;

/// Exact activation probabilities under a uniformly random single seed.
///
/// Enumerates every live/dead outcome of every stored `(u, v, t)` inside the
/// window and, for each outcome and seed, closes the active set interval by
/// interval with a plain fixpoint. Exponential in the number of pairs, which
/// must not exceed `pair_bound`.
pub fn exact_activation_probabilities(
    net: &TemporalNetwork,
    window: Window,
    pair_bound: usize,
) -> Result<Vec<f64>> {
    window.check(net)?;
    let pairs: Vec<_> = net.records().filter(|r| window.contains(r.t)).collect();
    if pairs.len() > pair_bound || pairs.len() >= 63 {
        return Err(Error::BoundExceeded {
            what: "exact enumeration (edge, interval) pairs",
            size: pairs.len() as u128,
            bound: pair_bound as u128,
        });
    }
    let n = net.node_count();
    let mut probs = vec![0.0; n];
    let mut active = vec![false; n];
    for mask in 0u64..(1u64 << pairs.len()) {
        let weight: f64 = pairs
            .iter()
            .enumerate()
            .map(|(b, r)| if mask >> b & 1 == 1 { r.p } else { 1.0 - r.p })
            .product();
        if weight == 0.0 {
            continue;
        }
        for seed in 0..n {
            active.fill(false);
            active[seed] = true;
            for t in window.intervals() {
                loop {
                    let mut changed = false;
                    for (b, r) in pairs.iter().enumerate() {
                        if r.t == t && mask >> b & 1 == 1 && active[r.u as usize] && !active[r.v as usize] {
                            active[r.v as usize] = true;
                            changed = true;
                        }
                    }
                    if !changed {
                        break;
                    }
                }
            }
            for (p, &a) in probs.iter_mut().zip(&active) {
                if a {
                    *p += weight / n as f64;
                }
            }
        }
    }
    Ok(probs)
}
