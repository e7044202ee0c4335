//! Per-interval propagation probabilities from contact observations.
//!
//! Each contact contributes a force of infection
//! `a·exp(-d·rho1) + b·exp(-rho2/m)`, where `d` is the pair's distance and
//! `m` the number of people sharing the location. Forces are summed over the
//! trailing history window `(t - t0, t]` and mapped to a probability with
//! `1 - exp(-sum)`.
//!
//! Social networks without contact data get uniform-random probabilities
//! instead, see [`assign_uniform_random`].

use std::collections::BTreeMap;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::temporal_graph::{EdgeRecord, NodeId, TemporalNetwork};

/// One observed contact between `u` and `v` during interval `t`.
///
/// Contacts are symmetric: the force applies in both directions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContactEvent {
    pub u: NodeId,
    pub v: NodeId,
    pub t: u32,
    /// Distance in meters, if proximity was measured.
    pub distance: Option<f64>,
    /// Number of people co-located with the pair (including both).
    pub co_located: Option<u32>,
}

impl ContactEvent {
    pub fn with_distance(u: NodeId, v: NodeId, t: u32, distance: f64) -> Self {
        ContactEvent {
            u,
            v,
            t,
            distance: Some(distance),
            co_located: None,
        }
    }

    pub fn with_crowd(u: NodeId, v: NodeId, t: u32, m: u32) -> Self {
        ContactEvent {
            u,
            v,
            t,
            distance: None,
            co_located: Some(m),
        }
    }

    /// Unordered pair key.
    fn pair(&self) -> (NodeId, NodeId) {
        (self.u.min(self.v), self.u.max(self.v))
    }
}

/// Hyper-parameters of the force-of-infection model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InfectionForceParams {
    pub a: f64,
    pub b: f64,
    pub rho1: f64,
    pub rho2: f64,
    /// Distance threshold in meters; farther contacts get no proximity term.
    pub dist_threshold: f64,
    /// History window length in intervals.
    pub history: u32,
}

/// Named defaults for the two data regimes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preset {
    /// Co-location counts only (check-in and trajectory networks).
    Density,
    /// Like `Density` but with a smaller `b` for very dense networks.
    DenseDensity,
    /// Pairwise distances only (proximity sensor data).
    Proximity,
}

impl std::str::FromStr for Preset {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "density" => Ok(Preset::Density),
            "dense" => Ok(Preset::DenseDensity),
            "proximity" => Ok(Preset::Proximity),
            _ => Err(Error::InvalidArgument(format!(
                "unknown preset `{s}` (expected density, dense or proximity)"
            ))),
        }
    }
}

impl InfectionForceParams {
    pub fn preset(preset: Preset) -> Self {
        let density = InfectionForceParams {
            a: 0.0,
            b: 0.05,
            rho1: 0.1,
            rho2: 0.1,
            dist_threshold: 5.0,
            history: 1,
        };
        match preset {
            Preset::Density => density,
            Preset::DenseDensity => InfectionForceParams { b: 0.01, ..density },
            Preset::Proximity => InfectionForceParams {
                a: 0.05,
                b: 0.0,
                ..density
            },
        }
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [self.a, self.b, self.rho1, self.rho2, self.dist_threshold]
            .iter()
            .all(|x| x.is_finite());
        if !finite
            || self.a < 0.0
            || self.b < 0.0
            || self.rho1 <= 0.0
            || self.rho2 <= 0.0
            || self.dist_threshold <= 0.0
            || self.history == 0
        {
            return Err(Error::InvalidArgument(format!("invalid force parameters {self:?}")));
        }
        Ok(())
    }
}

impl Default for InfectionForceParams {
    fn default() -> Self {
        Self::preset(Preset::Density)
    }
}

/// Force of infection of a single contact.
pub fn infection_force(params: &InfectionForceParams, event: &ContactEvent) -> f64 {
    let proximity = match event.distance {
        Some(d) if d >= 0.0 && d <= params.dist_threshold => params.a * (-d * params.rho1).exp(),
        _ => 0.0,
    };
    let crowd = match event.co_located {
        Some(m) if m >= 1 => params.b * (-params.rho2 / m as f64).exp(),
        _ => 0.0,
    };
    proximity + crowd
}

/// Summed force of all contacts between `u` and `v` (either order) with
/// interval in `(t - history, t]`.
pub fn accumulated_force(
    params: &InfectionForceParams,
    events: &[ContactEvent],
    u: NodeId,
    v: NodeId,
    t: u32,
) -> f64 {
    let key = (u.min(v), u.max(v));
    let lo = t as i64 - params.history as i64;
    events
        .iter()
        .filter(|e| e.pair() == key && (e.t as i64) > lo && e.t <= t)
        .map(|e| infection_force(params, e))
        .sum()
}

/// `1 - exp(-force_sum)`.
pub fn propagation_probability(force_sum: f64) -> Result<f64> {
    if force_sum.is_nan() || force_sum < 0.0 {
        return Err(Error::InvalidArgument(format!(
            "accumulated force must be non-negative, got {force_sum}"
        )));
    }
    Ok(-(-force_sum).exp_m1())
}

/// Builds a network where `p^t(u,v)` comes from the contacts of the pair in
/// the history window ending at `t`.
pub fn assign_from_contacts(
    params: &InfectionForceParams,
    events: &[ContactEvent],
    node_count: usize,
    interval_count: u32,
) -> Result<TemporalNetwork> {
    params.validate()?;
    // Per-pair, per-interval force, then a sliding sum over the history.
    let mut by_pair: BTreeMap<(NodeId, NodeId), BTreeMap<u32, f64>> = BTreeMap::new();
    for e in events {
        for node in [e.u, e.v] {
            if node as usize >= node_count {
                return Err(Error::NodeOutOfRange {
                    node: node as u64,
                    node_count,
                });
            }
        }
        if e.u == e.v {
            return Err(Error::SelfLoop(e.u as u64));
        }
        if e.t == 0 || e.t > interval_count {
            return Err(Error::IntervalOutOfRange {
                t: e.t as u64,
                interval_count,
            });
        }
        *by_pair.entry(e.pair()).or_default().entry(e.t).or_insert(0.0) += infection_force(params, e);
    }

    let mut records = Vec::new();
    for ((u, v), forces) in by_pair {
        let mut affected: Vec<u32> = forces
            .keys()
            .flat_map(|&s| s..=s.saturating_add(params.history - 1).min(interval_count))
            .collect();
        affected.sort_unstable();
        affected.dedup();
        for t in affected {
            let lo = t.saturating_sub(params.history);
            let sum: f64 = forces.range(lo + 1..=t).map(|(_, f)| f).sum();
            let p = propagation_probability(sum)?;
            if p > 0.0 {
                records.push(EdgeRecord::new(u, v, t, p));
                records.push(EdgeRecord::new(v, u, t, p));
            }
        }
    }
    TemporalNetwork::build(node_count, interval_count, records)
}

/// Assigns each undirected-or-directed edge one uniformly random interval and
/// one probability uniform in `[0, p_max]`.
pub fn assign_uniform_random<R: Rng + ?Sized>(
    edges: &[(NodeId, NodeId)],
    node_count: usize,
    interval_count: u32,
    p_max: f64,
    rng: &mut R,
) -> Result<TemporalNetwork> {
    if !(p_max > 0.0 && p_max <= 1.0) {
        return Err(Error::InvalidArgument(format!("p_max must lie in (0, 1], got {p_max}")));
    }
    if interval_count == 0 {
        return Err(Error::InvalidArgument("interval count must be positive".into()));
    }
    let records: Vec<EdgeRecord> = edges
        .iter()
        .map(|&(u, v)| {
            let t = rng.random_range(1..=interval_count);
            let p = rng.random_range(0.0..=p_max);
            EdgeRecord::new(u, v, t, p)
        })
        .collect();
    TemporalNetwork::build(node_count, interval_count, records)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn proximity() -> InfectionForceParams {
        InfectionForceParams {
            a: 0.05,
            b: 0.0,
            rho1: 0.1,
            rho2: 0.1,
            dist_threshold: 5.0,
            history: 1,
        }
    }

    fn crowd() -> InfectionForceParams {
        InfectionForceParams {
            a: 0.0,
            b: 0.05,
            ..proximity()
        }
    }

    #[test]
    fn presets_match_defaults() {
        let d = InfectionForceParams::preset(Preset::Density);
        assert_eq!((d.a, d.b, d.rho2), (0.0, 0.05, 0.1));
        assert_eq!(InfectionForceParams::preset(Preset::DenseDensity).b, 0.01);
        let p = InfectionForceParams::preset(Preset::Proximity);
        assert_eq!((p.a, p.b, p.rho1, p.dist_threshold), (0.05, 0.0, 0.1, 5.0));
    }

    #[test]
    fn force_point_values() {
        let at = |d| infection_force(&proximity(), &ContactEvent::with_distance(0, 1, 1, d));
        assert_eq!(at(0.0), 0.05);
        assert_eq!(at(10.0), 0.0);
        // 0.05 * exp(-0.5), evaluated separately to 12 digits.
        assert_relative_eq!(at(5.0), 0.030_326_532_985_631_67, max_relative = 1e-12);
        let m = infection_force(&crowd(), &ContactEvent::with_crowd(0, 1, 1, 10));
        // 0.05 * exp(-0.01)
        assert_relative_eq!(m, 0.049_502_491_687_458_4, max_relative = 1e-12);
    }

    #[test]
    fn missing_fields_contribute_nothing() {
        let both = InfectionForceParams { b: 0.05, ..proximity() };
        let bare = ContactEvent {
            u: 0,
            v: 1,
            t: 1,
            distance: None,
            co_located: None,
        };
        assert_eq!(infection_force(&both, &bare), 0.0);
        let no_dist = ContactEvent::with_crowd(0, 1, 1, 2);
        assert_relative_eq!(infection_force(&both, &no_dist), 0.05 * (-0.05f64).exp());
    }

    #[test]
    fn history_window_is_half_open() {
        let params = InfectionForceParams { history: 2, ..proximity() };
        let inside = ContactEvent::with_distance(0, 1, 5, 0.0);
        let boundary = ContactEvent::with_distance(1, 0, 3, 1.0);
        let events = [inside, boundary];
        assert_eq!(accumulated_force(&params, &events, 0, 1, 5), 0.05);
        assert_eq!(accumulated_force(&params, &[], 0, 1, 5), 0.0);
        let both = accumulated_force(&params, &events, 1, 0, 4);
        assert_relative_eq!(both, 0.05 * (-0.1f64).exp());
        assert_eq!(accumulated_force(&params, &events, 0, 2, 5), 0.0);
    }

    #[test]
    fn probability_mapping() {
        assert_eq!(propagation_probability(0.0).unwrap(), 0.0);
        assert_relative_eq!(propagation_probability(2f64.ln()).unwrap(), 0.5, max_relative = 1e-15);
        assert_relative_eq!(
            propagation_probability(0.1).unwrap(),
            0.095_162_581_964_040_4,
            max_relative = 1e-12
        );
        assert!(propagation_probability(-1.0).is_err());
        assert!(propagation_probability(f64::NAN).is_err());
    }

    #[test]
    fn contacts_to_network() {
        let events = [ContactEvent::with_distance(0, 1, 1, 0.0)];
        let net = assign_from_contacts(&proximity(), &events, 2, 2).unwrap();
        let expected = 1.0 - (-0.05f64).exp();
        assert_relative_eq!(net.probability_at(0, 1, 1).unwrap(), expected, max_relative = 1e-12);
        assert_relative_eq!(net.probability_at(1, 0, 1).unwrap(), expected, max_relative = 1e-12);
        assert_eq!(net.probability_at(0, 1, 2).unwrap(), 0.0);
    }

    #[test]
    fn repeated_contact_gives_constant_probability() {
        let params = InfectionForceParams { history: 3, ..proximity() };
        let events: Vec<_> = (1..=8).map(|t| ContactEvent::with_distance(0, 1, t, 0.0)).collect();
        let net = assign_from_contacts(&params, &events, 2, 8).unwrap();
        let full = 1.0 - (-0.15f64).exp();
        let ps: Vec<f64> = (1..=8).map(|t| net.probability_at(0, 1, t).unwrap()).collect();
        assert_relative_eq!(ps[0], 1.0 - (-0.05f64).exp(), max_relative = 1e-12);
        assert_relative_eq!(ps[1], 1.0 - (-0.10f64).exp(), max_relative = 1e-12);
        for p in &ps[2..] {
            assert_relative_eq!(*p, full, max_relative = 1e-12);
        }
    }

    #[test]
    fn history_carries_force_forward() {
        let params = InfectionForceParams { history: 2, ..proximity() };
        let events = [ContactEvent::with_distance(0, 1, 1, 0.0)];
        let net = assign_from_contacts(&params, &events, 2, 3).unwrap();
        assert!(net.probability_at(0, 1, 2).unwrap() > 0.0);
        assert_eq!(net.probability_at(0, 1, 3).unwrap(), 0.0);
    }

    #[test]
    fn contact_errors() {
        let p = proximity();
        assert!(assign_from_contacts(&p, &[ContactEvent::with_distance(0, 3, 1, 0.0)], 2, 1).is_err());
        assert!(assign_from_contacts(&p, &[ContactEvent::with_distance(0, 1, 4, 0.0)], 2, 1).is_err());
        let bad = InfectionForceParams { rho1: 0.0, ..p };
        assert!(assign_from_contacts(&bad, &[], 2, 1).is_err());
    }

    #[test]
    fn uniform_assignment() {
        let edges: Vec<_> = (0..50u32).map(|i| (i, (i + 1) % 50)).collect();
        let a = assign_uniform_random(&edges, 50, 5, 0.3, &mut ChaCha8Rng::seed_from_u64(3)).unwrap();
        let b = assign_uniform_random(&edges, 50, 5, 0.3, &mut ChaCha8Rng::seed_from_u64(3)).unwrap();
        assert_eq!(a, b);
        assert!(a.records().all(|r| r.p <= 0.3));
        assert!(assign_uniform_random(&edges, 50, 5, 0.0, &mut ChaCha8Rng::seed_from_u64(3)).is_err());
        assert!(assign_uniform_random(&edges, 50, 5, 1.5, &mut ChaCha8Rng::seed_from_u64(3)).is_err());
    }

    #[test]
    fn uniform_intervals_pass_chi_square() {
        let n_edges = 10_000u32;
        let k = 25u32;
        let edges: Vec<_> = (0..n_edges).map(|i| (i, i + n_edges)).collect();
        let net = assign_uniform_random(
            &edges,
            2 * n_edges as usize,
            k,
            0.3,
            &mut ChaCha8Rng::seed_from_u64(11),
        )
        .unwrap();
        // A handful of p draws may be exactly zero and drop out; count what is stored.
        let mut hist = vec![0f64; k as usize];
        for r in net.records() {
            hist[(r.t - 1) as usize] += 1.0;
        }
        let total: f64 = hist.iter().sum();
        let expected = total / k as f64;
        let chi2: f64 = hist.iter().map(|o| (o - expected).powi(2) / expected).sum();
        // chi-square 0.99 quantile with 24 degrees of freedom.
        assert!(chi2 < 42.980, "chi2 = {chi2}");
    }

    proptest! {
        #[test]
        fn force_monotone_in_distance_and_crowd(d1 in 0.0f64..20.0, d2 in 0.0f64..20.0, m1 in 1u32..50, m2 in 1u32..50) {
            let params = InfectionForceParams { b: 0.05, ..proximity() };
            let (dl, dh) = if d1 <= d2 { (d1, d2) } else { (d2, d1) };
            let (ml, mh) = if m1 <= m2 { (m1, m2) } else { (m2, m1) };
            let f = |d, m| infection_force(&params, &ContactEvent { u: 0, v: 1, t: 1, distance: Some(d), co_located: Some(m) });
            prop_assert!(f(dl, ml) >= f(dh, ml));
            prop_assert!(f(dl, mh) >= f(dl, ml));
        }

        #[test]
        fn probability_is_increasing_and_bounded(x in 0.0f64..50.0, y in 0.0f64..50.0) {
            let px = propagation_probability(x).unwrap();
            let py = propagation_probability(y).unwrap();
            // 1 - e^-x rounds to 1.0 in f64 once x exceeds about 36
            if x < 30.0 { prop_assert!((0.0..1.0).contains(&px)); } else { prop_assert!((0.0..=1.0).contains(&px)); }
            if x < y { prop_assert!(px <= py); }
            let pxy = propagation_probability(x + y).unwrap();
            prop_assert!(pxy >= px.max(py));
        }

        #[test]
        fn symmetric_contacts_give_symmetric_network(
            raw in prop::collection::vec((0u32..5, 0u32..5, 1u32..5, 0.0f64..8.0), 1..20),
            history in 1u32..4,
        ) {
            let events: Vec<_> = raw.into_iter()
                .filter(|(u, v, _, _)| u != v)
                .map(|(u, v, t, d)| ContactEvent::with_distance(u, v, t, d))
                .collect();
            let params = InfectionForceParams { history, ..proximity() };
            let net = assign_from_contacts(&params, &events, 5, 4).unwrap();
            for r in net.records() {
                prop_assert_eq!(net.probability_at(r.v, r.u, r.t).unwrap(), r.p);
                let direct = propagation_probability(accumulated_force(&params, &events, r.u, r.v, r.t)).unwrap();
                prop_assert!((direct - r.p).abs() < 1e-12);
            }
        }
    }
}
