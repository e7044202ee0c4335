//! Loaders for external formats, co-location network construction, and
//! synthetic trajectory and network generators.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::io::{BufRead, Write};
use std::path::Path;

use rand::seq::index;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::unit_rng;
use crate::interventions::{VenueMap, VenueVisit};
use crate::probability_model::{assign_from_contacts, ContactEvent, InfectionForceParams};
use crate::temporal_graph::{read_headed_csv, EdgeRecord, NodeId, TemporalNetwork};

const SECONDS_PER_DAY: u64 = 86_400;
const MINUTES_PER_DAY: u64 = 1_440;
const EARTH_RADIUS_KM: f64 = 6_371.008_8;

fn open_reader(path: &Path) -> Result<std::io::BufReader<std::fs::File>> {
    crate::error::open(path)
}

/// Bijection between external string ids and dense node ids.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct NodeRemap {
    external: Vec<String>,
    #[serde(skip)]
    index: HashMap<String, NodeId>,
}

impl NodeRemap {
    pub fn new() -> Self {
        Self::default()
    }

    /// Dense id of `id`, assigning the next free one on first sight.
    pub fn intern(&mut self, id: &str) -> NodeId {
        if let Some(&n) = self.index.get(id) {
            return n;
        }
        let n = self.external.len() as NodeId;
        self.external.push(id.to_string());
        self.index.insert(id.to_string(), n);
        n
    }

    pub fn get(&self, id: &str) -> Option<NodeId> {
        self.index.get(id).copied()
    }

    pub fn external(&self, node: NodeId) -> Option<&str> {
        self.external.get(node as usize).map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.external.len()
    }

    pub fn is_empty(&self) -> bool {
        self.external.is_empty()
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["node", "external"])?;
        for (i, id) in self.external.iter().enumerate() {
            out.write_record([i.to_string(), id.clone()])?;
        }
        out.flush()?;
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CheckinRecord {
    pub user: String,
    pub venue: String,
    /// Epoch seconds.
    pub ts: u64,
    pub category: Option<String>,
}

/// Reads `user,venue,ts,category`; the category column and its values are
/// optional.
pub fn load_checkins<R: BufRead>(reader: R, source_name: &str) -> Result<Vec<CheckinRecord>> {
    let (_, rows) = read_headed_csv(reader, source_name)?;
    let cols = rows.columns(&["user", "venue", "ts"])?;
    let cat = rows.column("category");
    let mut out = Vec::new();
    for row in rows.iter() {
        let row = row?;
        let ts: i64 = row.parse(cols[2], "ts")?;
        if ts < 0 {
            return Err(row.error(format!("negative timestamp {ts}")));
        }
        let (user, venue) = (row.raw(cols[0]), row.raw(cols[1]));
        if user.is_empty() || venue.is_empty() {
            return Err(row.error("empty user or venue"));
        }
        out.push(CheckinRecord {
            user: user.to_string(),
            venue: venue.to_string(),
            ts: ts as u64,
            category: cat.map(|c| row.raw(c)).filter(|c| !c.is_empty()).map(str::to_string),
        });
    }
    Ok(out)
}

/// Contacts grouped into intervals, ready for probability assignment.
#[derive(Debug, Clone, Default)]
pub struct Colocation {
    pub remap: NodeRemap,
    pub interval_count: u32,
    pub events: Vec<ContactEvent>,
    pub venues: VenueMap,
    pub visits: Vec<VenueVisit>,
}

impl Colocation {
    pub fn node_count(&self) -> usize {
        self.remap.len()
    }

    pub fn network(&self, params: &InfectionForceParams) -> Result<TemporalNetwork> {
        assign_from_contacts(params, &self.events, self.node_count().max(1), self.interval_count.max(1))
    }

    fn push_group(&mut self, venue: &str, t: u32, members: &BTreeSet<NodeId>) {
        let m = members.len() as u32;
        let list: Vec<NodeId> = members.iter().copied().collect();
        for (i, &u) in list.iter().enumerate() {
            for &v in &list[i + 1..] {
                self.events.push(ContactEvent::with_crowd(u, v, t, m));
                self.venues.assign(u, v, t, venue);
                self.venues.assign(v, u, t, venue);
            }
        }
    }
}

/// Which days of a check-in log become intervals.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct DaySpan {
    /// First kept day as days since the epoch; defaults to the earliest day.
    pub start_day: Option<u64>,
    /// Number of kept days; defaults to everything after the start.
    pub days: Option<u32>,
}

/// Users at the same venue on the same day become pairwise contacts for
/// that day; each contact carries the number of distinct visitors.
pub fn build_colocation_daily(checkins: &[CheckinRecord], span: DaySpan) -> Result<Colocation> {
    if span.days == Some(0) {
        return Err(Error::InvalidArgument("day span must be positive".into()));
    }
    let first = match span.start_day {
        Some(d) => d,
        None => match checkins.iter().map(|c| c.ts / SECONDS_PER_DAY).min() {
            Some(d) => d,
            None => return Ok(Colocation::default()),
        },
    };
    let kept = |day: u64| day >= first && span.days.is_none_or(|n| day < first + n as u64);

    let mut out = Colocation::default();
    let mut groups: BTreeMap<(&str, u32), BTreeSet<NodeId>> = BTreeMap::new();
    let mut last_day = 0u32;
    for c in checkins {
        let day = c.ts / SECONDS_PER_DAY;
        if !kept(day) {
            continue;
        }
        let t = u32::try_from(day - first + 1)
            .map_err(|_| Error::InvalidArgument("check-in span too long".into()))?;
        last_day = last_day.max(t);
        let node = out.remap.intern(&c.user);
        groups.entry((&c.venue, t)).or_default().insert(node);
        if let Some(cat) = &c.category {
            out.venues.set_category(&c.venue, cat);
        }
    }
    out.interval_count = span.days.unwrap_or(last_day);
    for ((venue, t), members) in &groups {
        out.push_group(venue, *t, members);
        for &node in members {
            out.visits.push(VenueVisit {
                node,
                venue: venue.to_string(),
                t: *t,
                category: out.venues.category(venue).map(str::to_string),
            });
        }
    }
    Ok(out)
}

/// One stay of an individual at a POI, in minutes since the start of day 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryVisit {
    pub individual: String,
    pub poi: String,
    pub category: Option<String>,
    pub arrive_min: u64,
    pub depart_min: u64,
}

impl TrajectoryVisit {
    /// Day index (1-based) of the arrival.
    pub fn day(&self) -> u32 {
        (self.arrive_min / MINUTES_PER_DAY) as u32 + 1
    }
}

pub fn load_trajectories<R: BufRead>(reader: R, source_name: &str) -> Result<Vec<TrajectoryVisit>> {
    let (_, rows) = read_headed_csv(reader, source_name)?;
    let cols = rows.columns(&["individual", "poi", "arrive_min", "depart_min"])?;
    let cat = rows.column("category");
    let mut out = Vec::new();
    for row in rows.iter() {
        let row = row?;
        let visit = TrajectoryVisit {
            individual: row.raw(cols[0]).to_string(),
            poi: row.raw(cols[1]).to_string(),
            category: cat.map(|c| row.raw(c)).filter(|c| !c.is_empty()).map(str::to_string),
            arrive_min: row.parse(cols[2], "arrive_min")?,
            depart_min: row.parse(cols[3], "depart_min")?,
        };
        if visit.depart_min <= visit.arrive_min {
            return Err(row.error("departure must follow arrival"));
        }
        if visit.individual.is_empty() || visit.poi.is_empty() {
            return Err(row.error("empty individual or poi"));
        }
        out.push(visit);
    }
    Ok(out)
}

pub fn write_trajectories<W: Write>(w: W, visits: &[TrajectoryVisit]) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["individual", "poi", "category", "arrive_min", "depart_min"])?;
    for v in visits {
        out.write_record([
            v.individual.clone(),
            v.poi.clone(),
            v.category.clone().unwrap_or_default(),
            v.arrive_min.to_string(),
            v.depart_min.to_string(),
        ])?;
    }
    out.flush()?;
    Ok(())
}

/// Individuals present at the same POI during the same slot become pairwise
/// contacts; each contact carries the slot's occupancy. Interval = day.
pub fn build_colocation_slotted(visits: &[TrajectoryVisit], slot_minutes: u32) -> Result<Colocation> {
    if slot_minutes == 0 {
        return Err(Error::InvalidArgument("slot_minutes must be positive".into()));
    }
    let slot = slot_minutes as u64;
    let mut out = Colocation::default();
    let mut groups: BTreeMap<(&str, u64), BTreeSet<NodeId>> = BTreeMap::new();
    let mut daily: BTreeSet<(NodeId, &str, u32)> = BTreeSet::new();
    for v in visits {
        if v.depart_min <= v.arrive_min {
            return Err(Error::InvalidArgument(format!(
                "visit of {} at {} departs before it arrives",
                v.individual, v.poi
            )));
        }
        let node = out.remap.intern(&v.individual);
        if let Some(cat) = &v.category {
            out.venues.set_category(&v.poi, cat);
        }
        for s in v.arrive_min / slot..v.depart_min.div_ceil(slot) {
            groups.entry((&v.poi, s)).or_default().insert(node);
        }
        daily.insert((node, &v.poi, v.day()));
        out.interval_count = out.interval_count.max(v.day());
    }
    for ((poi, s), members) in &groups {
        // a slot lies within one day whenever slot_minutes divides a day;
        // otherwise it is attributed to the day it starts in
        let t = (s * slot / MINUTES_PER_DAY) as u32 + 1;
        out.interval_count = out.interval_count.max(t);
        if members.len() > 1 {
            out.push_group(poi, t, members);
        }
    }
    for (node, poi, t) in daily {
        out.visits.push(VenueVisit {
            node,
            venue: poi.to_string(),
            t,
            category: out.venues.category(poi).map(str::to_string),
        });
    }
    Ok(out)
}

/// Contact events with explicit counts.
#[derive(Debug, Clone, PartialEq)]
pub struct ContactSet {
    pub node_count: usize,
    pub interval_count: u32,
    pub events: Vec<ContactEvent>,
}

/// Reads `u,v,t,d,m` with dense ids. `d` and `m` may be empty or absent as
/// columns, but every row needs at least one of them.
pub fn load_contact_distances<R: BufRead>(reader: R, source_name: &str) -> Result<ContactSet> {
    let (meta, rows) = read_headed_csv(reader, source_name)?;
    let cols = rows.columns(&["u", "v", "t"])?;
    let (dc, mc) = (rows.column("d"), rows.column("m"));
    if dc.is_none() && mc.is_none() {
        return Err(Error::data(source_name, 1, "need a `d` or `m` column"));
    }
    let mut events = Vec::new();
    let (mut max_node, mut max_t) = (0usize, 0u32);
    for row in rows.iter() {
        let row = row?;
        let u: NodeId = row.parse(cols[0], "u")?;
        let v: NodeId = row.parse(cols[1], "v")?;
        let t: u32 = row.parse(cols[2], "t")?;
        let distance: Option<f64> = row.parse_opt(dc, "d")?;
        let co_located: Option<u32> = row.parse_opt(mc, "m")?;
        if u == v {
            return Err(row.error(format!("self contact of node {u}")));
        }
        if t == 0 {
            return Err(row.error("intervals start at 1"));
        }
        match distance {
            Some(d) if !(d.is_finite() && d >= 0.0) => {
                return Err(row.error(format!("distance must be non-negative, got {d}")))
            }
            None if co_located.is_none() => return Err(row.error("row has neither `d` nor `m`")),
            _ => {}
        }
        if co_located == Some(0) {
            return Err(row.error("`m` must be at least 1"));
        }
        max_node = max_node.max(u.max(v) as usize + 1);
        max_t = max_t.max(t);
        events.push(ContactEvent {
            u,
            v,
            t,
            distance,
            co_located,
        });
    }
    Ok(ContactSet {
        node_count: meta.nodes.unwrap_or(max_node).max(max_node),
        interval_count: meta.intervals.unwrap_or(max_t).max(max_t),
        events,
    })
}

pub fn write_contacts<W: Write>(mut w: W, set: &ContactSet) -> Result<()> {
    writeln!(w, "# nodes={} intervals={}", set.node_count, set.interval_count)?;
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["u", "v", "t", "d", "m"])?;
    let opt = |x: Option<String>| x.unwrap_or_default();
    for e in &set.events {
        out.write_record([
            e.u.to_string(),
            e.v.to_string(),
            e.t.to_string(),
            opt(e.distance.map(|d| d.to_string())),
            opt(e.co_located.map(|m| m.to_string())),
        ])?;
    }
    out.flush()?;
    Ok(())
}

/// Reads `src,dst,t,p` and stores each probability verbatim.
pub fn load_transitions<R: BufRead>(reader: R, source_name: &str) -> Result<TemporalNetwork> {
    let (meta, rows) = read_headed_csv(reader, source_name)?;
    let cols = rows.columns(&["src", "dst", "t", "p"])?;
    let mut records = Vec::new();
    let (mut max_node, mut max_t) = (0usize, 0u32);
    for row in rows.iter() {
        let row = row?;
        let r = EdgeRecord::new(
            row.parse(cols[0], "src")?,
            row.parse(cols[1], "dst")?,
            row.parse(cols[2], "t")?,
            row.parse(cols[3], "p")?,
        );
        if !(0.0..=1.0).contains(&r.p) {
            return Err(row.error(format!("probability {} outside [0, 1]", r.p)));
        }
        if r.u == r.v {
            return Err(row.error(format!("self loop on node {}", r.u)));
        }
        if r.t == 0 {
            return Err(row.error("intervals start at 1"));
        }
        max_node = max_node.max(r.u.max(r.v) as usize + 1);
        max_t = max_t.max(r.t);
        if r.p > 0.0 {
            records.push(r);
        }
    }
    let nodes = meta.nodes.unwrap_or(max_node).max(max_node).max(1);
    let intervals = meta.intervals.unwrap_or(max_t).max(max_t).max(1);
    TemporalNetwork::build(nodes, intervals, records)
}

/// Static edge list, deduplicated, in first-seen order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EdgeList {
    pub node_count: usize,
    pub edges: Vec<(NodeId, NodeId)>,
}

/// Reads `u,v` with dense ids; repeated pairs are kept once.
pub fn load_edge_list<R: BufRead>(reader: R, source_name: &str) -> Result<EdgeList> {
    let (meta, rows) = read_headed_csv(reader, source_name)?;
    let cols = rows.columns(&["u", "v"])?;
    let mut seen = HashSet::new();
    let mut edges = Vec::new();
    let mut max_node = 0usize;
    for row in rows.iter() {
        let row = row?;
        let u: NodeId = row.parse(cols[0], "u")?;
        let v: NodeId = row.parse(cols[1], "v")?;
        if u == v {
            return Err(row.error(format!("self loop on node {u}")));
        }
        max_node = max_node.max(u.max(v) as usize + 1);
        if seen.insert((u, v)) {
            edges.push((u, v));
        }
    }
    Ok(EdgeList {
        node_count: meta.nodes.unwrap_or(max_node).max(max_node),
        edges,
    })
}

pub fn load_visits<R: BufRead>(reader: R, source_name: &str) -> Result<Vec<VenueVisit>> {
    let (_, rows) = read_headed_csv(reader, source_name)?;
    let cols = rows.columns(&["node", "venue", "t"])?;
    let cat = rows.column("category");
    let mut out = Vec::new();
    for row in rows.iter() {
        let row = row?;
        out.push(VenueVisit {
            node: row.parse(cols[0], "node")?,
            venue: row.raw(cols[1]).to_string(),
            t: row.parse(cols[2], "t")?,
            category: cat.map(|c| row.raw(c)).filter(|c| !c.is_empty()).map(str::to_string),
        });
    }
    Ok(out)
}

pub fn write_visits<W: Write>(w: W, visits: &[VenueVisit]) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["node", "venue", "t", "category"])?;
    for v in visits {
        out.write_record([
            v.node.to_string(),
            v.venue.clone(),
            v.t.to_string(),
            v.category.clone().unwrap_or_default(),
        ])?;
    }
    out.flush()?;
    Ok(())
}

/// A point of interest with one daily opening interval in minutes after
/// midnight. `open_min == close_min` marks a POI closed all day.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PoiRecord {
    pub poi: String,
    pub category: String,
    pub open_min: u32,
    pub close_min: u32,
    pub dwell_min: u32,
    pub lat: f64,
    pub lon: f64,
}

impl PoiRecord {
    pub fn is_open_at(&self, minute_of_day: u32) -> bool {
        self.open_min <= minute_of_day && minute_of_day < self.close_min
    }
}

pub fn load_pois<R: BufRead>(reader: R, source_name: &str) -> Result<Vec<PoiRecord>> {
    let (_, rows) = read_headed_csv(reader, source_name)?;
    let cols = rows.columns(&["poi", "category", "open_min", "close_min", "dwell_min", "lat", "lon"])?;
    let mut out = Vec::new();
    for row in rows.iter() {
        let row = row?;
        let poi = PoiRecord {
            poi: row.raw(cols[0]).to_string(),
            category: row.raw(cols[1]).to_string(),
            open_min: row.parse(cols[2], "open_min")?,
            close_min: row.parse(cols[3], "close_min")?,
            dwell_min: row.parse(cols[4], "dwell_min")?,
            lat: row.parse(cols[5], "lat")?,
            lon: row.parse(cols[6], "lon")?,
        };
        if poi.poi.is_empty() {
            return Err(row.error("empty poi id"));
        }
        if poi.open_min > poi.close_min || poi.close_min as u64 > MINUTES_PER_DAY {
            return Err(row.error(format!("bad opening interval {}..{}", poi.open_min, poi.close_min)));
        }
        if poi.dwell_min == 0 {
            return Err(row.error("dwell must be positive"));
        }
        if !(-90.0..=90.0).contains(&poi.lat) || !(-180.0..=180.0).contains(&poi.lon) {
            return Err(row.error("coordinates out of range"));
        }
        out.push(poi);
    }
    Ok(out)
}

pub fn load_pois_path(path: &Path) -> Result<Vec<PoiRecord>> {
    load_pois(open_reader(path)?, &path.display().to_string())
}

/// Great-circle distance in kilometres.
pub fn haversine_km(lat1: f64, lon1: f64, lat2: f64, lon2: f64) -> f64 {
    let (p1, p2) = (lat1.to_radians(), lat2.to_radians());
    let dp = p2 - p1;
    let dl = (lon2 - lon1).to_radians();
    let h = (dp / 2.0).sin().powi(2) + p1.cos() * p2.cos() * (dl / 2.0).sin().powi(2);
    2.0 * EARTH_RADIUS_KM * h.sqrt().min(1.0).asin()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryConfig {
    pub n_individuals: usize,
    pub n_days: u32,
    /// Walking speed; each hop draws a factor uniform in `1 ± speed_jitter`.
    pub speed_kmh: f64,
    pub speed_jitter: f64,
    pub max_travel_km: f64,
    /// Target length is uniform in `1..=max_visits`.
    pub max_visits: usize,
}

impl Default for TrajectoryConfig {
    fn default() -> Self {
        Self {
            n_individuals: 100,
            n_days: 7,
            speed_kmh: 5.0,
            speed_jitter: 0.2,
            max_travel_km: 3.0,
            max_visits: 6,
        }
    }
}

impl TrajectoryConfig {
    fn validate(&self) -> Result<()> {
        if !(self.speed_kmh.is_finite() && self.speed_kmh > 0.0)
            || !(0.0..1.0).contains(&self.speed_jitter)
            || self.max_travel_km.is_nan() || self.max_travel_km < 0.0
            || self.max_visits == 0
        {
            return Err(Error::InvalidArgument(format!("invalid trajectory config {self:?}")));
        }
        Ok(())
    }
}

/// Synthesizes daily POI trajectories. Individual `i` uses its own stream
/// derived from `seed`, so output does not depend on scheduling.
pub fn generate_trajectories(pois: &[PoiRecord], config: &TrajectoryConfig, seed: u64) -> Result<Vec<TrajectoryVisit>> {
    config.validate()?;
    if pois.is_empty() {
        return Err(Error::InvalidArgument("no POIs".into()));
    }
    let mut out = Vec::new();
    for i in 0..config.n_individuals {
        let mut rng = unit_rng(seed, i as u64);
        for day in 0..config.n_days as u64 {
            let day_start = day * MINUTES_PER_DAY;
            let start = rng.random_range(0..MINUTES_PER_DAY as u32);
            let open: Vec<usize> = (0..pois.len()).filter(|&p| pois[p].is_open_at(start)).collect();
            if open.is_empty() {
                continue;
            }
            let target = rng.random_range(1..=config.max_visits);
            let mut cur = open[rng.random_range(0..open.len())];
            let mut arrive = start as u64;
            for step in 0..target {
                let poi = &pois[cur];
                let depart = arrive + poi.dwell_min as u64;
                out.push(TrajectoryVisit {
                    individual: format!("ind{i}"),
                    poi: poi.poi.clone(),
                    category: Some(poi.category.clone()).filter(|c| !c.is_empty()),
                    arrive_min: day_start + arrive,
                    depart_min: day_start + depart,
                });
                if step + 1 == target {
                    break;
                }
                let factor = 1.0 + rng.random_range(-config.speed_jitter..=config.speed_jitter);
                let speed = config.speed_kmh * factor;
                let candidates: Vec<(usize, u64)> = pois
                    .iter()
                    .enumerate()
                    .filter(|&(j, q)| j != cur && q.category != poi.category)
                    .filter_map(|(j, q)| {
                        let km = haversine_km(poi.lat, poi.lon, q.lat, q.lon);
                        if km > config.max_travel_km {
                            return None;
                        }
                        let travel = ((km / speed) * 60.0).ceil().max(1.0) as u64;
                        let at = depart + travel;
                        (at < MINUTES_PER_DAY && q.is_open_at(at as u32)).then_some((j, at))
                    })
                    .collect();
                if candidates.is_empty() {
                    break;
                }
                let (next, at) = candidates[rng.random_range(0..candidates.len())];
                cur = next;
                arrive = at;
            }
        }
    }
    Ok(out)
}

/// Parameters of the planted family where static degree is misleading.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LateBloomerParams {
    /// Mean out-degree per interval among ordinary nodes.
    pub background_degree: f64,
    pub p_min: f64,
    pub p_max: f64,
    pub decoys: usize,
    /// Distinct contacts of each decoy, all in the final interval.
    pub decoy_degree: usize,
    pub decoy_p: f64,
}

impl Default for LateBloomerParams {
    fn default() -> Self {
        Self {
            background_degree: 1.5,
            p_min: 0.05,
            p_max: 0.3,
            decoys: 60,
            decoy_degree: 80,
            decoy_p: 0.01,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum SyntheticFamily {
    /// Each ordered pair is present in each interval with `density`.
    ErdosRenyi { density: f64, p_min: f64, p_max: f64 },
    LateBloomer(LateBloomerParams),
}

fn check_p_range(p_min: f64, p_max: f64) -> Result<()> {
    if !(0.0 <= p_min && p_min <= p_max && p_max <= 1.0) {
        return Err(Error::InvalidArgument(format!("bad probability range [{p_min}, {p_max}]")));
    }
    Ok(())
}

fn draw_p<R: Rng + ?Sized>(rng: &mut R, lo: f64, hi: f64) -> f64 {
    if lo == hi {
        lo
    } else {
        rng.random_range(lo..=hi)
    }
}

/// Per-interval Erdős–Rényi arcs among `nodes`.
fn erdos_renyi_into<R: Rng + ?Sized>(
    records: &mut Vec<EdgeRecord>,
    nodes: &[NodeId],
    interval_count: u32,
    density: f64,
    (p_min, p_max): (f64, f64),
    rng: &mut R,
) {
    for t in 1..=interval_count {
        for &u in nodes {
            for &v in nodes {
                if u != v && rng.random_bool(density) {
                    records.push(EdgeRecord::new(u, v, t, draw_p(rng, p_min, p_max)));
                }
            }
        }
    }
}

pub fn generate_synthetic_network<R: Rng + ?Sized>(
    node_count: usize,
    interval_count: u32,
    family: &SyntheticFamily,
    rng: &mut R,
) -> Result<TemporalNetwork> {
    if node_count == 0 || interval_count == 0 {
        return Err(Error::InvalidArgument("node and interval counts must be positive".into()));
    }
    let mut records = Vec::new();
    match *family {
        SyntheticFamily::ErdosRenyi { density, p_min, p_max } => {
            if !(0.0..=1.0).contains(&density) {
                return Err(Error::InvalidArgument(format!("density must lie in [0, 1], got {density}")));
            }
            check_p_range(p_min, p_max)?;
            let nodes: Vec<NodeId> = (0..node_count as NodeId).collect();
            erdos_renyi_into(&mut records, &nodes, interval_count, density, (p_min, p_max), rng);
        }
        SyntheticFamily::LateBloomer(lb) => {
            check_p_range(lb.p_min, lb.p_max)?;
            check_p_range(lb.decoy_p, lb.decoy_p)?;
            if lb.decoys >= node_count || lb.decoy_degree >= node_count || lb.background_degree.is_nan() || lb.background_degree < 0.0 {
                return Err(Error::InvalidArgument(format!("late-bloomer parameters do not fit {node_count} nodes")));
            }
            let mut is_decoy = vec![false; node_count];
            for d in index::sample(rng, node_count, lb.decoys) {
                is_decoy[d] = true;
            }
            let ordinary: Vec<NodeId> = (0..node_count as NodeId).filter(|&v| !is_decoy[v as usize]).collect();
            let density = if ordinary.len() > 1 {
                (lb.background_degree / (ordinary.len() - 1) as f64).min(1.0)
            } else {
                0.0
            };
            erdos_renyi_into(&mut records, &ordinary, interval_count, density, (lb.p_min, lb.p_max), rng);
            for d in (0..node_count as NodeId).filter(|&v| is_decoy[v as usize]) {
                for j in index::sample(rng, node_count - 1, lb.decoy_degree) {
                    let x = if j >= d as usize { j + 1 } else { j } as NodeId;
                    records.push(EdgeRecord::new(d, x, interval_count, lb.decoy_p));
                    records.push(EdgeRecord::new(x, d, interval_count, lb.decoy_p));
                }
            }
        }
    }
    TemporalNetwork::build(node_count, interval_count, records)
}

/// Reads a check-in file from disk.
pub fn load_checkins_path(path: &Path) -> Result<Vec<CheckinRecord>> {
    load_checkins(open_reader(path)?, &path.display().to_string())
}

pub fn load_trajectories_path(path: &Path) -> Result<Vec<TrajectoryVisit>> {
    load_trajectories(open_reader(path)?, &path.display().to_string())
}

pub fn load_contact_path(path: &Path) -> Result<ContactSet> {
    load_contact_distances(open_reader(path)?, &path.display().to_string())
}

pub fn load_transitions_path(path: &Path) -> Result<TemporalNetwork> {
    load_transitions(open_reader(path)?, &path.display().to_string())
}

pub fn load_edge_list_path(path: &Path) -> Result<EdgeList> {
    load_edge_list(open_reader(path)?, &path.display().to_string())
}

pub fn load_visits_path(path: &Path) -> Result<Vec<VenueVisit>> {
    load_visits(open_reader(path)?, &path.display().to_string())
}
