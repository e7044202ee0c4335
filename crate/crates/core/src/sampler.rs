//! Hypergraph of random reachable sets.
//!
//! Each net is the final active set of one random realization started from
//! a uniformly random single seed, sampled on the network as given (never on
//! its transpose). A node's degree over `n_nets` nets is then a binomial
//! count with mean `p_v · n_nets`.
//!
//! Nets keep their pins in activation order, so `pins(net)[0]` is the seed.

use std::io::{Read, Write};

use crate::cascade::Spreader;
use crate::error::{Error, Result};
use crate::exec::{map_batches, Workers};
use crate::temporal_graph::{NodeId, TemporalNetwork, Window};

/// Default number of nets.
pub const DEFAULT_NETS: usize = 20_000;

const MAGIC: &[u8; 8] = b"TICHYPG\0";
const VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Hypergraph {
    node_count: usize,
    net_offsets: Vec<usize>,
    pins: Vec<NodeId>,
    node_offsets: Vec<usize>,
    incidence: Vec<u32>,
}

impl Hypergraph {
    /// Builds from explicit nets. Each net must be nonempty with unique pins;
    /// its first pin is taken as the seed.
    pub fn from_nets<I, N>(node_count: usize, nets: I) -> Result<Self>
    where
        I: IntoIterator<Item = N>,
        N: AsRef<[NodeId]>,
    {
        let mut net_offsets = vec![0];
        let mut pins = Vec::new();
        let mut seen = vec![usize::MAX; node_count];
        for (k, net) in nets.into_iter().enumerate() {
            let net = net.as_ref();
            if net.is_empty() {
                return Err(Error::InvalidArgument(format!("net {k} is empty")));
            }
            for &v in net {
                if v as usize >= node_count {
                    return Err(Error::NodeOutOfRange {
                        node: v as u64,
                        node_count,
                    });
                }
                if seen[v as usize] == k {
                    return Err(Error::InvalidArgument(format!("net {k} repeats node {v}")));
                }
                seen[v as usize] = k;
            }
            pins.extend_from_slice(net);
            net_offsets.push(pins.len());
        }
        Ok(Self::index(node_count, net_offsets, pins))
    }

    /// Second build phase: per-node incidence lists by counting sort.
    fn index(node_count: usize, net_offsets: Vec<usize>, pins: Vec<NodeId>) -> Self {
        let mut node_offsets = vec![0usize; node_count + 1];
        for &v in &pins {
            node_offsets[v as usize + 1] += 1;
        }
        for i in 0..node_count {
            node_offsets[i + 1] += node_offsets[i];
        }
        let mut fill = node_offsets.clone();
        let mut incidence = vec![0u32; pins.len()];
        for net in 0..net_offsets.len() - 1 {
            for &v in &pins[net_offsets[net]..net_offsets[net + 1]] {
                incidence[fill[v as usize]] = net as u32;
                fill[v as usize] += 1;
            }
        }
        Hypergraph {
            node_count,
            net_offsets,
            pins,
            node_offsets,
            incidence,
        }
    }

    pub fn node_count(&self) -> usize {
        self.node_count
    }

    pub fn net_count(&self) -> usize {
        self.net_offsets.len() - 1
    }

    pub fn total_pins(&self) -> usize {
        self.pins.len()
    }

    pub fn pins(&self, net: usize) -> &[NodeId] {
        &self.pins[self.net_offsets[net]..self.net_offsets[net + 1]]
    }

    pub fn seed(&self, net: usize) -> NodeId {
        self.pins[self.net_offsets[net]]
    }

    pub fn nets(&self) -> impl Iterator<Item = &[NodeId]> + '_ {
        (0..self.net_count()).map(|k| self.pins(k))
    }

    /// Nets containing `v`, ascending.
    pub fn incident(&self, v: NodeId) -> &[u32] {
        let v = v as usize;
        &self.incidence[self.node_offsets[v]..self.node_offsets[v + 1]]
    }

    pub fn degree(&self, v: NodeId) -> usize {
        let v = v as usize;
        self.node_offsets[v + 1] - self.node_offsets[v]
    }

    pub fn degrees(&self) -> Vec<usize> {
        self.node_offsets.windows(2).map(|w| w[1] - w[0]).collect()
    }

    /// Number of nets sharing at least one pin with `set`.
    pub fn degree_of_set(&self, set: &[NodeId]) -> Result<usize> {
        let mut covered = vec![false; self.net_count()];
        let mut count = 0;
        for &v in set {
            if v as usize >= self.node_count {
                return Err(Error::NodeOutOfRange {
                    node: v as u64,
                    node_count: self.node_count,
                });
            }
            for &net in self.incident(v) {
                if !std::mem::replace(&mut covered[net as usize], true) {
                    count += 1;
                }
            }
        }
        Ok(count)
    }

    /// Binary cache: magic, version, node count, net count, then every net as
    /// a `u32` length followed by its pins, all little-endian.
    pub fn write_to<W: Write>(&self, mut w: W) -> Result<()> {
        w.write_all(MAGIC)?;
        w.write_all(&VERSION.to_le_bytes())?;
        w.write_all(&(self.node_count as u32).to_le_bytes())?;
        w.write_all(&(self.net_count() as u64).to_le_bytes())?;
        for net in self.nets() {
            w.write_all(&(net.len() as u32).to_le_bytes())?;
            for &v in net {
                w.write_all(&v.to_le_bytes())?;
            }
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_from<R: Read>(mut r: R) -> Result<Self> {
        let mut magic = [0u8; 8];
        r.read_exact(&mut magic).map_err(|_| Error::Cache("truncated header".into()))?;
        if &magic != MAGIC {
            return Err(Error::Cache("bad magic bytes".into()));
        }
        let version = read_u32(&mut r)?;
        if version != VERSION {
            return Err(Error::Cache(format!("unsupported version {version}")));
        }
        let node_count = read_u32(&mut r)? as usize;
        let mut buf = [0u8; 8];
        r.read_exact(&mut buf).map_err(|_| Error::Cache("truncated header".into()))?;
        let n_nets = u64::from_le_bytes(buf) as usize;
        let mut nets = Vec::with_capacity(n_nets.min(1 << 24));
        for _ in 0..n_nets {
            let len = read_u32(&mut r)? as usize;
            let mut net = Vec::with_capacity(len.min(node_count));
            for _ in 0..len {
                net.push(read_u32(&mut r)?);
            }
            nets.push(net);
        }
        let mut rest = [0u8; 1];
        if r.read(&mut rest)? != 0 {
            return Err(Error::Cache("trailing bytes".into()));
        }
        Self::from_nets(node_count, nets).map_err(|e| Error::Cache(e.to_string()))
    }

    pub fn save(&self, path: &std::path::Path) -> Result<()> {
        self.write_to(crate::error::create(path)?)
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        Self::read_from(crate::error::open(path)?)
    }
}

fn read_u32<R: Read>(r: &mut R) -> Result<u32> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b).map_err(|_| Error::Cache("truncated data".into()))?;
    Ok(u32::from_le_bytes(b))
}

/// Samples `n_nets` random reachable sets. Net `k` uses work unit `k` of
/// `seed`, so the result is identical for any `workers`.
pub fn build_hypergraph(
    net: &TemporalNetwork,
    window: Window,
    n_nets: usize,
    seed: u64,
    workers: Workers,
) -> Result<Hypergraph> {
    window.check(net)?;
    if n_nets == 0 {
        return Err(Error::InvalidArgument("n_nets must be at least 1".into()));
    }
    let n = net.node_count();
    let batches = map_batches(workers, n_nets, |range| {
        let mut spreader = Spreader::new(n);
        let mut lens = Vec::with_capacity(range.len());
        let mut pins = Vec::new();
        for k in range {
            spreader.run_random(net, window, seed, k as u64);
            lens.push(spreader.order().len());
            pins.extend_from_slice(spreader.order());
        }
        (lens, pins)
    });
    let total: usize = batches.iter().map(|(_, p)| p.len()).sum();
    let mut net_offsets = Vec::with_capacity(n_nets + 1);
    net_offsets.push(0);
    let mut pins = Vec::with_capacity(total);
    for (lens, batch_pins) in batches {
        for len in lens {
            net_offsets.push(net_offsets.last().unwrap() + len);
        }
        pins.extend(batch_pins);
    }
    Ok(Hypergraph::index(n, net_offsets, pins))
}
