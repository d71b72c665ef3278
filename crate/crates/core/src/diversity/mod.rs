//! Path diversity analyses: divergence of one-hop overlay paths from the
//! direct path, edge-disjoint path counts, border router sets, and AS
//! degree distributions.
//!
//! Everything here is a pure function over immutable graphs and path maps;
//! per-pair analyses can run concurrently without shared state.

mod degree;
mod disjoint;

use std::collections::{BTreeMap, BTreeSet};
use std::net::Ipv4Addr;

use thiserror::Error;

pub use degree::{degree_distribution, rank_and_fit, DegreeDistribution, DegreeEntry};
pub use disjoint::{
    as_disjoint_report, border_disjoint_report, greedy_edge_disjoint, ip_disjoint_report,
    max_flow_disjoint_count, DisjointMode, DisjointReport, PathLevel,
};

use crate::graph::{
    compress_asn_sequence, compress_to_as_path, hop_asns, AsPath, IpPath, NodeId, PathGraph,
    PathNode,
};
use crate::ingest::{Asn, HopAddress, HostId, PrefixTable, TracerouteRecord};

#[derive(Debug, Error)]
pub enum DiversityError {
    #[error("node {0} is not in the graph")]
    NodeNotFound(String),
    #[error("source and destination must differ")]
    SameEndpoints,
    #[error("no measured path {src}->{dst}")]
    NoPath { src: HostId, dst: HostId },
    #[error("asn of host {0} cannot be derived from its traceroutes")]
    HostAsnUnknown(HostId),
    #[error("empty {role} border set for {host}")]
    EmptyBorderSet { host: HostId, role: &'static str },
    #[error("hosts {src} and {dst} share AS {asn}; border analysis needs distinct ASes")]
    IntraAsPair {
        src: HostId,
        dst: HostId,
        asn: Asn,
    },
}

/// 1-based index of the first position where two hop sequences differ.
/// A strict prefix diverges just past the shorter sequence; identical
/// sequences give `None`. The shared source endpoint is expected to be
/// excluded by the caller.
pub fn divergence_hop<T: PartialEq>(direct: &[T], indirect: &[T]) -> Option<usize> {
    let shorter = direct.len().min(indirect.len());
    for i in 0..shorter {
        if direct[i] != indirect[i] {
            return Some(i + 1);
        }
    }
    if direct.len() == indirect.len() {
        None
    } else {
        Some(shorter + 1)
    }
}

/// Indirect path through one relay host: the latest measured legs
/// src -> relay and relay -> dst, concatenated. Routers may repeat across
/// legs; measured overlay paths can revisit them.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OverlayPath {
    src: HostId,
    relay: HostId,
    dst: HostId,
    first_leg: Vec<HopAddress>,
    second_leg: Vec<HopAddress>,
}

impl OverlayPath {
    pub fn src(&self) -> &HostId {
        &self.src
    }

    pub fn relay(&self) -> &HostId {
        &self.relay
    }

    pub fn dst(&self) -> &HostId {
        &self.dst
    }

    /// Full node sequence: src, first leg hops, relay, second leg hops, dst.
    pub fn nodes(&self) -> Vec<PathNode> {
        let mut nodes = Vec::with_capacity(self.first_leg.len() + self.second_leg.len() + 3);
        nodes.push(PathNode::Host(self.src.clone()));
        nodes.extend(self.first_leg.iter().map(|&h| PathNode::Hop(h)));
        nodes.push(PathNode::Host(self.relay.clone()));
        nodes.extend(self.second_leg.iter().map(|&h| PathNode::Hop(h)));
        nodes.push(PathNode::Host(self.dst.clone()));
        nodes
    }

    /// Router hops of both legs joined for AS-level compression; a duplicate
    /// at the seam collapses.
    pub fn combined_hops(&self) -> Vec<HopAddress> {
        let mut hops = self.first_leg.clone();
        for &h in &self.second_leg {
            if hops.last() != Some(&h) {
                hops.push(h);
            }
        }
        hops
    }

    /// AS-level form of the overlay path.
    pub fn as_path(&self, table: &PrefixTable) -> AsPath {
        let hops = self.combined_hops();
        compress_asn_sequence(self.src.clone(), self.dst.clone(), hop_asns(&hops, table))
    }
}

/// Builds the one-hop path src -> relay -> dst from the latest per-pair
/// paths. Errors when either leg was never measured.
pub fn one_hop_path(
    src: &HostId,
    relay: &HostId,
    dst: &HostId,
    latest: &BTreeMap<(HostId, HostId), IpPath>,
) -> Result<OverlayPath, DiversityError> {
    let first = latest
        .get(&(src.clone(), relay.clone()))
        .ok_or_else(|| DiversityError::NoPath {
            src: src.clone(),
            dst: relay.clone(),
        })?;
    let second = latest
        .get(&(relay.clone(), dst.clone()))
        .ok_or_else(|| DiversityError::NoPath {
            src: relay.clone(),
            dst: dst.clone(),
        })?;
    Ok(OverlayPath {
        src: src.clone(),
        relay: relay.clone(),
        dst: dst.clone(),
        first_leg: first.hops().to_vec(),
        second_leg: second.hops().to_vec(),
    })
}

/// Where a one-hop overlay path first leaves the direct path, at IP and AS
/// granularity. `None` means the compared sequences are identical.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DivergenceResult {
    pub src: HostId,
    pub dst: HostId,
    pub relay: HostId,
    pub ip_divergence_hop: Option<usize>,
    pub as_divergence_hop: Option<usize>,
}

/// Compares a direct path with an overlay path through one relay. Node
/// sequences are compared from the first hop after the shared source.
pub fn pair_divergence(
    direct: &IpPath,
    overlay: &OverlayPath,
    table: &PrefixTable,
) -> DivergenceResult {
    let direct_nodes = direct.nodes();
    let overlay_nodes = overlay.nodes();
    let ip_divergence_hop = divergence_hop(&direct_nodes[1..], &overlay_nodes[1..]);

    let direct_as = compress_to_as_path(direct, table);
    let overlay_as = overlay.as_path(table);
    let as_divergence_hop = divergence_hop(direct_as.asns(), overlay_as.asns());

    DivergenceResult {
        src: direct.src().clone(),
        dst: direct.dst().clone(),
        relay: overlay.relay().clone(),
        ip_divergence_hop,
        as_divergence_hop,
    }
}

/// Side of a border-router query.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BorderRole {
    /// Routers of the AS with a link out to a different AS.
    Egress,
    /// Routers of the AS with a link in from a different AS.
    Ingress,
}

/// Routers of `host_asn` sitting on its border: egress borders have an edge
/// to a router of a different known AS, ingress borders an edge from one.
pub fn border_routers(
    g: &PathGraph,
    host_asn: Asn,
    table: &PrefixTable,
    role: BorderRole,
) -> BTreeSet<Ipv4Addr> {
    let mut borders = BTreeSet::new();
    for node in g.nodes() {
        let NodeId::Router(ip) = node else { continue };
        if table.lookup(*ip) != Some(host_asn) {
            continue;
        }
        let crosses = |other: &NodeId| -> bool {
            match other {
                NodeId::Router(o) => {
                    matches!(table.lookup(*o), Some(asn) if asn != host_asn)
                }
                NodeId::Host(_) => false,
            }
        };
        let is_border = match role {
            BorderRole::Egress => g.successors(node).any(crosses),
            BorderRole::Ingress => g.predecessors(node).any(crosses),
        };
        if is_border {
            borders.insert(*ip);
        }
    }
    borders
}

/// Border routers of a host's AS, deriving the AS from the first hop of the
/// host's latest traceroute as a source.
pub fn host_border_routers(
    g: &PathGraph,
    records: &[TracerouteRecord],
    host: &HostId,
    table: &PrefixTable,
    role: BorderRole,
) -> Result<BTreeSet<Ipv4Addr>, DiversityError> {
    let asn = table
        .host_asn(records, host)
        .ok_or_else(|| DiversityError::HostAsnUnknown(host.clone()))?;
    Ok(border_routers(g, asn, table, role))
}
