//! Lockdown-style edge removal, spread reduction, backward tracing of
//! upstream contributors, and venue exposure of solution sets.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::io::BufRead;
use std::path::Path;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::cascade::{check_nodes, Spreader};
use crate::error::{Error, Result};
use crate::exec::{map_batches, SimPlan};
use crate::temporal_graph::{read_headed_csv, NodeId, TemporalNetwork, Window};

/// Venue attached to each `(u, v, t)` record, plus venue metadata.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct VenueMap {
    edges: HashMap<(NodeId, NodeId, u32), String>,
    categories: BTreeMap<String, String>,
}

impl VenueMap {
    pub fn new() -> Self {
        Self::default()
    }

    /// Later assignments of the same record overwrite earlier ones.
    pub fn assign(&mut self, u: NodeId, v: NodeId, t: u32, venue: &str) {
        self.edges.insert((u, v, t), venue.to_string());
        self.categories.entry(venue.to_string()).or_default();
    }

    pub fn set_category(&mut self, venue: &str, category: &str) {
        self.categories.insert(venue.to_string(), category.to_string());
    }

    pub fn venue_of(&self, u: NodeId, v: NodeId, t: u32) -> Option<&str> {
        self.edges.get(&(u, v, t)).map(String::as_str)
    }

    pub fn category(&self, venue: &str) -> Option<&str> {
        self.categories.get(venue).map(String::as_str).filter(|c| !c.is_empty())
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    /// Every venue referenced by an edge must be stored in `net`.
    pub fn check(&self, net: &TemporalNetwork) -> Result<()> {
        for &(u, v, t) in self.edges.keys() {
            if net.probability_at(u, v, t).unwrap_or(0.0) == 0.0 {
                return Err(Error::InvalidArgument(format!(
                    "venue map references missing edge ({u},{v},{t})"
                )));
            }
        }
        Ok(())
    }

    /// CSV with header `u,v,t,venue,category` (category may be empty).
    pub fn read_csv<R: BufRead>(reader: R, source_name: &str) -> Result<Self> {
        let (_, rows) = read_headed_csv(reader, source_name)?;
        let cols = rows.columns(&["u", "v", "t", "venue"])?;
        let cat = rows.column("category");
        let mut map = VenueMap::new();
        for row in rows.iter() {
            let row = row?;
            let venue = row.raw(cols[3]).to_string();
            if venue.is_empty() {
                return Err(row.error("empty venue"));
            }
            map.assign(row.parse(cols[0], "u")?, row.parse(cols[1], "v")?, row.parse(cols[2], "t")?, &venue);
            if let Some(c) = cat.map(|c| row.raw(c)).filter(|c| !c.is_empty()) {
                map.set_category(&venue, c);
            }
        }
        Ok(map)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let f = crate::error::open(path)?;
        Self::read_csv(f, &path.display().to_string())
    }

    pub fn write_csv<W: std::io::Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["u", "v", "t", "venue", "category"])?;
        let mut rows: Vec<_> = self.edges.iter().collect();
        rows.sort();
        for (&(u, v, t), venue) in rows {
            out.write_record([
                u.to_string(),
                v.to_string(),
                t.to_string(),
                venue.clone(),
                self.category(venue).unwrap_or("").to_string(),
            ])?;
        }
        out.flush()?;
        Ok(())
    }
}

/// Outcome of an edge-removal strategy.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DropReport {
    pub strategy: String,
    pub fraction: f64,
    pub removed: usize,
    /// Removals per venue (priority strategy only), busiest first.
    pub allocation: Vec<(String, usize)>,
}

fn removal_count(net: &TemporalNetwork, fraction: f64) -> Result<usize> {
    if !(0.0..=1.0).contains(&fraction) {
        return Err(Error::InvalidArgument(format!("fraction must lie in [0, 1], got {fraction}")));
    }
    Ok((fraction * net.record_count() as f64).floor() as usize)
}

/// Removes `floor(fraction · records)` records uniformly without replacement.
pub fn drop_edges_random<R: Rng + ?Sized>(
    net: &TemporalNetwork,
    fraction: f64,
    rng: &mut R,
) -> Result<(TemporalNetwork, DropReport)> {
    let count = removal_count(net, fraction)?;
    let mut drop = vec![false; net.record_count()];
    for i in rand::seq::index::sample(rng, net.record_count(), count) {
        drop[i] = true;
    }
    Ok((
        net.retain_records(|i| !drop[i]),
        DropReport {
            strategy: "random".into(),
            fraction,
            removed: count,
            allocation: Vec::new(),
        },
    ))
}

/// Splits `total` across `weights` proportionally, rounding by largest
/// remainder (ties to the earlier entry).
pub fn largest_remainder(total: usize, weights: &[usize]) -> Vec<usize> {
    let sum: usize = weights.iter().sum();
    if sum == 0 {
        return vec![0; weights.len()];
    }
    let mut alloc: Vec<usize> = weights.iter().map(|&w| total * w / sum).collect();
    let mut rest: Vec<(usize, usize)> = weights
        .iter()
        .enumerate()
        .map(|(i, &w)| ((total * w) % sum, i))
        .collect();
    rest.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)));
    let short = total - alloc.iter().sum::<usize>();
    for &(_, i) in rest.iter().take(short) {
        alloc[i] += 1;
    }
    alloc
}

/// Removes the same number of records as [`drop_edges_random`], allocated to
/// the `top_v` busiest venues in proportion to their record counts and
/// sampled uniformly inside each venue. If those venues hold fewer records
/// than required, the shortfall is drawn uniformly from the other records.
pub fn drop_edges_priority<R: Rng + ?Sized>(
    net: &TemporalNetwork,
    fraction: f64,
    venues: &VenueMap,
    top_v: usize,
    rng: &mut R,
) -> Result<(TemporalNetwork, DropReport)> {
    if venues.is_empty() {
        return Err(Error::InvalidArgument("venue map is empty".into()));
    }
    if top_v == 0 {
        return Err(Error::InvalidArgument("top_v must be at least 1".into()));
    }
    let count = removal_count(net, fraction)?;

    let mut by_venue: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
    let mut unassigned = Vec::new();
    for (i, r) in net.records().enumerate() {
        match venues.venue_of(r.u, r.v, r.t) {
            Some(v) => by_venue.entry(v).or_default().push(i),
            None => unassigned.push(i),
        }
    }
    let mut ranked: Vec<(&str, Vec<usize>)> = by_venue.into_iter().collect();
    ranked.sort_by(|a, b| b.1.len().cmp(&a.1.len()).then(a.0.cmp(b.0)));
    let (top, others) = ranked.split_at(top_v.min(ranked.len()));

    let weights: Vec<usize> = top.iter().map(|(_, recs)| recs.len()).collect();
    let capacity: usize = weights.iter().sum();
    let mut alloc = largest_remainder(count.min(capacity), &weights);
    // Proportional shares never exceed a venue's size when count <= capacity.
    for (a, w) in alloc.iter_mut().zip(&weights) {
        *a = (*a).min(*w);
    }

    let mut drop = vec![false; net.record_count()];
    for ((_, recs), &n) in top.iter().zip(&alloc) {
        for j in rand::seq::index::sample(rng, recs.len(), n) {
            drop[recs[j]] = true;
        }
    }
    let shortfall = count - alloc.iter().sum::<usize>();
    if shortfall > 0 {
        let pool: Vec<usize> = others
            .iter()
            .flat_map(|(_, recs)| recs.iter().copied())
            .chain(unassigned)
            .collect();
        for j in rand::seq::index::sample(rng, pool.len(), shortfall.min(pool.len())) {
            drop[pool[j]] = true;
        }
    }
    Ok((
        net.retain_records(|i| !drop[i]),
        DropReport {
            strategy: "priority".into(),
            fraction,
            removed: count,
            allocation: top.iter().map(|(v, _)| v.to_string()).zip(alloc).collect(),
        },
    ))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReductionReport {
    pub baseline_mean: f64,
    pub modified_mean: f64,
    /// `100 · (1 - modified / baseline)`.
    pub reduction_pct: f64,
    pub std_err: f64,
    pub n_sims: usize,
}

/// Mean final-active count on both networks from the same seeds and the same
/// keyed realizations, and the relative reduction.
pub fn spread_reduction(
    original: &TemporalNetwork,
    modified: &TemporalNetwork,
    seeds: &[NodeId],
    window: Window,
    plan: SimPlan,
) -> Result<ReductionReport> {
    if original.node_count() != modified.node_count() {
        return Err(Error::InvalidArgument("networks have different node sets".into()));
    }
    if seeds.is_empty() {
        return Err(Error::EmptySeedSet);
    }
    if plan.n_sims == 0 {
        return Err(Error::InvalidArgument("n_sims must be at least 1".into()));
    }
    check_nodes(original, seeds)?;
    window.check(original)?;
    window.check(modified)?;
    let n = original.node_count();
    let pairs: Vec<(f64, f64)> = map_batches(plan.workers, plan.n_sims, |range| {
        let mut spreader = Spreader::new(n);
        range
            .map(|i| {
                let b = spreader.run_seeded(original, seeds, window, plan.seed, i as u64).len();
                let m = spreader.run_seeded(modified, seeds, window, plan.seed, i as u64).len();
                (b as f64, m as f64)
            })
            .collect::<Vec<_>>()
    })
    .into_iter()
    .flatten()
    .collect();

    let k = pairs.len() as f64;
    let mb = pairs.iter().map(|p| p.0).sum::<f64>() / k;
    let mm = pairs.iter().map(|p| p.1).sum::<f64>() / k;
    if mb == 0.0 {
        return Err(Error::InvalidArgument("baseline spread is zero".into()));
    }
    // delta method on the ratio of paired means
    let (mut vb, mut vm, mut cov) = (0.0, 0.0, 0.0);
    if pairs.len() > 1 {
        for &(b, m) in &pairs {
            vb += (b - mb).powi(2);
            vm += (m - mm).powi(2);
            cov += (b - mb) * (m - mm);
        }
        let d = (k - 1.0) * k;
        vb /= d;
        vm /= d;
        cov /= d;
    }
    let r = mm / mb;
    let var_ratio = (vm - 2.0 * r * cov + r * r * vb) / (mb * mb);
    Ok(ReductionReport {
        baseline_mean: mb,
        modified_mean: mm,
        reduction_pct: 100.0 * (1.0 - r),
        std_err: 100.0 * var_ratio.max(0.0).sqrt(),
        n_sims: plan.n_sims,
    })
}

/// How realizations are seeded for backward tracing.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Seeding {
    /// `n_sims` single uniformly random seeds.
    Random { n_sims: usize },
    /// Every node seeded once per round, `rounds` rounds.
    EachNode { rounds: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BackwardReport {
    /// Upstream participants by participation count, descending (ties by id).
    pub ranking: Vec<(NodeId, u64)>,
    pub top_c: usize,
    pub contributors: Vec<NodeId>,
    /// Activation events of solution members, seeds included.
    pub activation_events: u64,
    /// Share of those events with at least one top contributor upstream.
    pub contribution_pct: f64,
}

/// Ranks nodes by how often they are active upstream of a solution member's
/// activation.
///
/// For every activation of a member of `set` (including a member that is the
/// seed), the participants are the nodes activated before it in the same
/// realization, excluding members of `set` unless `include_set` is true.
#[allow(clippy::too_many_arguments)]
pub fn backward_contribution(
    net: &TemporalNetwork,
    set: &[NodeId],
    window: Window,
    seeding: Seeding,
    top_c: usize,
    include_set: bool,
    seed: u64,
    workers: crate::exec::Workers,
) -> Result<BackwardReport> {
    if set.is_empty() {
        return Err(Error::InvalidArgument("solution set is empty".into()));
    }
    check_nodes(net, set)?;
    window.check(net)?;
    let n = net.node_count();
    let mut in_set = vec![false; n];
    for &v in set {
        in_set[v as usize] = true;
    }
    let units = match seeding {
        Seeding::Random { n_sims } => n_sims,
        Seeding::EachNode { rounds } => rounds * n,
    };
    if units == 0 {
        return Err(Error::InvalidArgument("no realizations requested".into()));
    }

    // Each event: the participant list (upstream nodes).
    let events: Vec<Vec<NodeId>> = map_batches(workers, units, |range| {
        let mut spreader = Spreader::new(n);
        let mut out = Vec::new();
        for i in range {
            let order = match seeding {
                Seeding::Random { .. } => {
                    spreader.run_random(net, window, seed, i as u64);
                    spreader.order()
                }
                Seeding::EachNode { .. } => {
                    let s = (i % n) as NodeId;
                    spreader.run_seeded(net, &[s], window, seed, i as u64)
                }
            };
            for (pos, &v) in order.iter().enumerate() {
                if in_set[v as usize] {
                    out.push(
                        order[..pos]
                            .iter()
                            .copied()
                            .filter(|&w| include_set || !in_set[w as usize])
                            .collect(),
                    );
                }
            }
        }
        out
    })
    .into_iter()
    .flatten()
    .collect();

    let mut counts: BTreeMap<NodeId, u64> = BTreeMap::new();
    for ev in &events {
        for &w in ev {
            *counts.entry(w).or_default() += 1;
        }
    }
    let mut ranking: Vec<(NodeId, u64)> = counts.into_iter().collect();
    ranking.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
    let contributors: Vec<NodeId> = ranking.iter().take(top_c).map(|&(v, _)| v).collect();
    let top: HashSet<NodeId> = contributors.iter().copied().collect();
    let hit = events.iter().filter(|ev| ev.iter().any(|w| top.contains(w))).count();
    let contribution_pct = if events.is_empty() {
        0.0
    } else {
        100.0 * hit as f64 / events.len() as f64
    };
    Ok(BackwardReport {
        ranking,
        top_c,
        contributors,
        activation_events: events.len() as u64,
        contribution_pct,
    })
}

/// One visit of a node to a venue during interval `t`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VenueVisit {
    pub node: NodeId,
    pub venue: String,
    pub t: u32,
    pub category: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VenueCoverage {
    pub distinct_venues: usize,
    /// Distinct venues per category, most visited first.
    pub by_category: Vec<(String, usize)>,
}

/// Distinct venues visited by members of `set` inside `window`. Categories
/// come from the visit itself, else from `venues`, else "unknown".
pub fn venue_coverage(
    set: &[NodeId],
    venues: Option<&VenueMap>,
    visits: &[VenueVisit],
    window: Window,
) -> VenueCoverage {
    let members: HashSet<NodeId> = set.iter().copied().collect();
    let mut seen: BTreeMap<&str, String> = BTreeMap::new();
    for v in visits.iter().filter(|v| members.contains(&v.node) && window.contains(v.t)) {
        let cat = v
            .category
            .clone()
            .or_else(|| venues.and_then(|m| m.category(&v.venue)).map(str::to_string))
            .unwrap_or_else(|| "unknown".to_string());
        seen.entry(&v.venue).or_insert(cat);
    }
    let mut hist: BTreeMap<String, usize> = BTreeMap::new();
    for cat in seen.values() {
        *hist.entry(cat.clone()).or_default() += 1;
    }
    let mut by_category: Vec<(String, usize)> = hist.into_iter().collect();
    by_category.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
    VenueCoverage {
        distinct_venues: seen.len(),
        by_category,
    }
}
