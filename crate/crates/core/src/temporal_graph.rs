//! Directed networks whose edges carry one propagation probability per
//! discrete time interval.
//!
//! Intervals are numbered `1..=interval_count`. Only strictly positive
//! probabilities are stored; any pair without a record reads back as 0.

use std::collections::BTreeMap;
use std::io::{BufRead, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type NodeId = u32;

/// One `(u, v, t, p)` observation: `p` is the chance that `u` activates `v`
/// during interval `t`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EdgeRecord {
    pub u: NodeId,
    pub v: NodeId,
    pub t: u32,
    pub p: f64,
}

impl EdgeRecord {
    fn check(&self, node_count: usize, interval_count: u32) -> Result<()> {
        check_node(self.u, node_count)?;
        check_node(self.v, node_count)?;
        if self.t == 0 || self.t > interval_count {
            return Err(Error::IntervalOutOfRange {
                t: self.t as u64,
                interval_count,
            });
        }
        if !(0.0..=1.0).contains(&self.p) {
            return Err(Error::InvalidProbability(self.p));
        }
        if self.u == self.v {
            return Err(Error::SelfLoop(self.u as u64));
        }
        Ok(())
    }

    pub fn new(u: NodeId, v: NodeId, t: u32, p: f64) -> Self {
        EdgeRecord { u, v, t, p }
    }
}

/// A closed range of intervals `[start, end]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Window {
    pub start: u32,
    pub end: u32,
}

impl Window {
    pub fn new(start: u32, end: u32) -> Result<Self> {
        if start == 0 || start > end {
            return Err(Error::InvalidWindow { start, end });
        }
        Ok(Window { start, end })
    }

    /// The window spanning every interval of `net`.
    pub fn full(net: &TemporalNetwork) -> Self {
        Window {
            start: 1,
            end: net.interval_count(),
        }
    }

    pub fn len(&self) -> usize {
        (self.end - self.start + 1) as usize
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn contains(&self, t: u32) -> bool {
        self.start <= t && t <= self.end
    }

    pub fn intervals(&self) -> std::ops::RangeInclusive<u32> {
        self.start..=self.end
    }

    pub fn check(&self, net: &TemporalNetwork) -> Result<()> {
        if self.start == 0 || self.start > self.end || self.end > net.interval_count() {
            return Err(Error::InvalidWindow {
                start: self.start,
                end: self.end,
            });
        }
        Ok(())
    }
}

impl std::str::FromStr for Window {
    type Err = Error;

    /// Parses `i:j` (or a single interval `i`).
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidArgument(format!("window must look like `i:j`, got `{s}`"));
        let (a, b) = match s.split_once(':') {
            Some((a, b)) => (a, b),
            None => (s, s),
        };
        let start = a.trim().parse().map_err(|_| bad())?;
        let end = b.trim().parse().map_err(|_| bad())?;
        Window::new(start, end)
    }
}

impl std::fmt::Display for Window {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}:{}", self.start, self.end)
    }
}

/// Compressed adjacency of one interval.
#[derive(Debug, Clone, PartialEq, Default)]
struct IntervalSlice {
    offsets: Vec<u32>,
    arcs: Vec<(NodeId, f64)>,
}

impl IntervalSlice {
    fn out(&self, u: NodeId) -> &[(NodeId, f64)] {
        let u = u as usize;
        &self.arcs[self.offsets[u] as usize..self.offsets[u + 1] as usize]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TemporalNetwork {
    node_count: usize,
    slices: Vec<IntervalSlice>,
}

impl TemporalNetwork {
    /// Builds a network from raw records. Later records for the same
    /// `(u, v, t)` overwrite earlier ones; zero probabilities are dropped.
    pub fn build<I>(node_count: usize, interval_count: u32, records: I) -> Result<Self>
    where
        I: IntoIterator<Item = EdgeRecord>,
    {
        if node_count == 0 {
            return Err(Error::InvalidArgument("a network needs at least one node".into()));
        }
        if node_count > u32::MAX as usize {
            return Err(Error::InvalidArgument(format!("{node_count} nodes do not fit 32-bit ids")));
        }
        let mut latest: BTreeMap<(u32, NodeId, NodeId), f64> = BTreeMap::new();
        for r in records {
            r.check(node_count, interval_count)?;
            latest.insert((r.t, r.u, r.v), r.p);
        }
        Ok(Self::from_sorted(
            node_count,
            interval_count,
            latest.into_iter().filter(|&(_, p)| p > 0.0),
        ))
    }

    /// `entries` must be sorted by `(t, u, v)`, unique, validated and nonzero.
    fn from_sorted<I>(node_count: usize, interval_count: u32, entries: I) -> Self
    where
        I: IntoIterator<Item = ((u32, NodeId, NodeId), f64)>,
    {
        let mut slices: Vec<IntervalSlice> = (0..interval_count)
            .map(|_| IntervalSlice {
                offsets: vec![0; node_count + 1],
                arcs: Vec::new(),
            })
            .collect();
        for ((t, u, v), p) in entries {
            let slice = &mut slices[(t - 1) as usize];
            slice.offsets[u as usize + 1] += 1;
            slice.arcs.push((v, p));
        }
        for slice in &mut slices {
            for i in 0..node_count {
                slice.offsets[i + 1] += slice.offsets[i];
            }
        }
        TemporalNetwork { node_count, slices }
    }

    /// A network with no stored edges.
    pub fn empty(node_count: usize, interval_count: u32) -> Result<Self> {
        Self::build(node_count, interval_count, std::iter::empty())
    }

    pub fn node_count(&self) -> usize {
        self.node_count
    }

    pub fn interval_count(&self) -> u32 {
        self.slices.len() as u32
    }

    /// Number of stored `(u, v, t)` triples.
    pub fn record_count(&self) -> usize {
        self.slices.iter().map(|s| s.arcs.len()).sum()
    }

    pub fn probability_at(&self, u: NodeId, v: NodeId, t: u32) -> Result<f64> {
        check_node(v, self.node_count)?;
        let out = self.neighbors_at(u, t)?;
        Ok(out
            .binary_search_by_key(&v, |&(w, _)| w)
            .map(|i| out[i].1)
            .unwrap_or(0.0))
    }

    /// Out-neighbors of `u` during interval `t` with nonzero probability,
    /// ascending by target id.
    pub fn neighbors_at(&self, u: NodeId, t: u32) -> Result<&[(NodeId, f64)]> {
        check_node(u, self.node_count)?;
        self.check_interval(t)?;
        Ok(self.out(u, t))
    }

    /// Unchecked variant of [`neighbors_at`](Self::neighbors_at) for hot loops.
    #[inline]
    pub(crate) fn out(&self, u: NodeId, t: u32) -> &[(NodeId, f64)] {
        self.slices[(t - 1) as usize].out(u)
    }

    fn check_interval(&self, t: u32) -> Result<()> {
        if t == 0 || t > self.interval_count() {
            return Err(Error::IntervalOutOfRange {
                t: t as u64,
                interval_count: self.interval_count(),
            });
        }
        Ok(())
    }

    /// All stored records ordered by `(t, u, v)`.
    pub fn records(&self) -> impl Iterator<Item = EdgeRecord> + '_ {
        self.slices.iter().enumerate().flat_map(move |(ti, slice)| {
            (0..self.node_count).flat_map(move |u| {
                slice
                    .out(u as NodeId)
                    .iter()
                    .map(move |&(v, p)| EdgeRecord::new(u as NodeId, v, ti as u32 + 1, p))
            })
        })
    }

    /// Records whose index in [`records`](Self::records) order passes `keep`.
    pub fn retain_records<F: FnMut(usize) -> bool>(&self, mut keep: F) -> Self {
        let kept = self
            .records()
            .enumerate()
            .filter(|(i, _)| keep(*i))
            .map(|(_, r)| ((r.t, r.u, r.v), r.p));
        Self::from_sorted(self.node_count, self.interval_count(), kept)
    }

    /// Reverses every edge, keeping its interval and probability.
    pub fn transpose(&self) -> Self {
        let mut flipped: Vec<((u32, NodeId, NodeId), f64)> =
            self.records().map(|r| ((r.t, r.v, r.u), r.p)).collect();
        flipped.sort_unstable_by_key(|e| e.0);
        Self::from_sorted(self.node_count, self.interval_count(), flipped)
    }

    /// Writes the canonical `u,v,t,p` CSV. A leading comment records the node
    /// and interval counts so the file reloads into an identical network.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(
            w,
            "# nodes={} intervals={}",
            self.node_count,
            self.interval_count()
        )?;
        writeln!(w, "u,v,t,p")?;
        for r in self.records() {
            writeln!(w, "{},{},{},{}", r.u, r.v, r.t, r.p)?;
        }
        w.flush()?;
        Ok(())
    }

    /// Reads the canonical CSV written by [`write_csv`](Self::write_csv).
    ///
    /// Counts given here override the file's `# nodes=.. intervals=..`
    /// comment; without either, the node count is the largest id plus one and
    /// the interval count the largest interval seen.
    pub fn read_csv<R: BufRead>(
        reader: R,
        source_name: &str,
        node_count: Option<usize>,
        interval_count: Option<u32>,
    ) -> Result<Self> {
        let (meta, rows) = read_headed_csv(reader, source_name)?;
        let cols = rows.columns(&["u", "v", "t", "p"])?;
        let mut records = Vec::new();
        let mut lines = Vec::new();
        for row in rows.iter() {
            let row = row?;
            records.push(EdgeRecord {
                u: row.parse(cols[0], "u")?,
                v: row.parse(cols[1], "v")?,
                t: row.parse(cols[2], "t")?,
                p: row.parse(cols[3], "p")?,
            });
            lines.push(row.line);
        }
        let node_count = node_count
            .or(meta.nodes)
            .unwrap_or_else(|| records.iter().map(|r| r.u.max(r.v) as usize + 1).max().unwrap_or(1));
        let interval_count = interval_count
            .or(meta.intervals)
            .unwrap_or_else(|| records.iter().map(|r| r.t).max().unwrap_or(1));
        for (r, &line) in records.iter().zip(&lines) {
            r.check(node_count, interval_count)
                .map_err(|e| Error::data(source_name, line, e.to_string()))?;
        }
        Self::build(node_count, interval_count, records)
    }

    pub fn load(path: &Path, node_count: Option<usize>, interval_count: Option<u32>) -> Result<Self> {
        let file = crate::error::open(path)?;
        Self::read_csv(file, &path.display().to_string(), node_count, interval_count)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let file = crate::error::create(path)?;
        self.write_csv(file)
    }
}

fn check_node(u: NodeId, node_count: usize) -> Result<()> {
    if (u as usize) < node_count {
        Ok(())
    } else {
        Err(Error::NodeOutOfRange {
            node: u as u64,
            node_count,
        })
    }
}

/// Counts declared in a `# nodes=N intervals=T` comment.
#[derive(Debug, Default, Clone, Copy)]
pub(crate) struct CsvMeta {
    pub nodes: Option<usize>,
    pub intervals: Option<u32>,
}

/// A headed CSV with `#` comments stripped, remembering original line numbers.
pub(crate) struct HeadedCsv {
    source_name: String,
    header: Vec<String>,
    lines: Vec<(u64, String)>,
}

pub(crate) struct CsvRow<'a> {
    source_name: &'a str,
    line: u64,
    fields: csv::StringRecord,
}

impl HeadedCsv {
    /// Column positions for `names`; every name must be present.
    pub fn columns(&self, names: &[&str]) -> Result<Vec<usize>> {
        names
            .iter()
            .map(|n| {
                self.column(n).ok_or_else(|| {
                    Error::data(&self.source_name, 1, format!("missing column `{n}`"))
                })
            })
            .collect()
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.header.iter().position(|h| h == name)
    }

    pub fn iter(&self) -> impl Iterator<Item = Result<CsvRow<'_>>> + '_ {
        self.lines.iter().map(move |(line, text)| {
            let mut rdr = csv::ReaderBuilder::new()
                .has_headers(false)
                .trim(csv::Trim::All)
                .from_reader(text.as_bytes());
            let fields = rdr
                .records()
                .next()
                .unwrap_or_else(|| Ok(csv::StringRecord::new()))
                .map_err(|e| Error::data(&self.source_name, *line, e.to_string()))?;
            if fields.len() != self.header.len() {
                return Err(Error::data(
                    &self.source_name,
                    *line,
                    format!("expected {} fields, found {}", self.header.len(), fields.len()),
                ));
            }
            Ok(CsvRow {
                source_name: &self.source_name,
                line: *line,
                fields,
            })
        })
    }
}

impl CsvRow<'_> {
    pub fn raw(&self, col: usize) -> &str {
        self.fields.get(col).unwrap_or("")
    }

    pub fn parse<T: std::str::FromStr>(&self, col: usize, name: &str) -> Result<T> {
        let raw = self.raw(col);
        raw.parse().map_err(|_| self.error(format!("bad `{name}` value `{raw}`")))
    }

    pub fn parse_opt<T: std::str::FromStr>(&self, col: Option<usize>, name: &str) -> Result<Option<T>> {
        match col.map(|c| self.raw(c)) {
            None | Some("") => Ok(None),
            Some(_) => self.parse(col.unwrap(), name).map(Some),
        }
    }

    pub fn error(&self, message: impl Into<String>) -> Error {
        Error::data(self.source_name, self.line, message)
    }
}

pub(crate) fn read_headed_csv<R: BufRead>(reader: R, source_name: &str) -> Result<(CsvMeta, HeadedCsv)> {
    let mut meta = CsvMeta::default();
    let mut header: Option<Vec<String>> = None;
    let mut lines = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line_no = i as u64 + 1;
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        if let Some(comment) = trimmed.strip_prefix('#') {
            for token in comment.split_whitespace() {
                if let Some(n) = token.strip_prefix("nodes=") {
                    meta.nodes = n.parse().ok();
                } else if let Some(n) = token.strip_prefix("intervals=") {
                    meta.intervals = n.parse().ok();
                }
            }
            continue;
        }
        if header.is_none() {
            header = Some(trimmed.split(',').map(|h| h.trim().to_string()).collect());
        } else {
            lines.push((line_no, line));
        }
    }
    let header = header.ok_or_else(|| Error::data(source_name, 1, "missing header row"))?;
    Ok((
        meta,
        HeadedCsv {
            source_name: source_name.to_string(),
            header,
            lines,
        },
    ))
}
