//! Directed graph of observed IP hops and its AS-level views.
//!
//! Every node is an overlay endpoint or a router interface with a distinct
//! IPv4 address; every directed edge is an IP hop seen on a valid traceroute.
//! All edges carry unit weight. Construction is a single-writer fold over
//! records; the finished graph is immutable and safe to share across threads
//! for read-only queries.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::net::Ipv4Addr;

use crate::ingest::{Asn, HopAddress, HostId, PrefixTable, TracerouteRecord};

/// Node of the path graph. Endpoints keep their host identity even when
/// their first/last router addresses change between records.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum NodeId {
    Host(HostId),
    Router(Ipv4Addr),
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NodeId::Host(h) => write!(f, "{h}"),
            NodeId::Router(ip) => write!(f, "{ip}"),
        }
    }
}

/// Node of the AS-level contraction: endpoints stay hosts, routers collapse
/// into their autonomous system.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum AsNode {
    Host(HostId),
    As(Asn),
}

impl fmt::Display for AsNode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AsNode::Host(h) => write!(f, "{h}"),
            AsNode::As(asn) => write!(f, "AS{asn}"),
        }
    }
}

/// Directed graph with set semantics: duplicate edges collapse, self-loops
/// are ignored.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct DiGraph<N: Ord + Clone> {
    adj: BTreeMap<N, BTreeSet<N>>,
    radj: BTreeMap<N, BTreeSet<N>>,
    edge_count: usize,
}

/// The observed IP-hop graph.
pub type PathGraph = DiGraph<NodeId>;

impl<N: Ord + Clone> DiGraph<N> {
    pub fn new() -> Self {
        DiGraph {
            adj: BTreeMap::new(),
            radj: BTreeMap::new(),
            edge_count: 0,
        }
    }

    pub fn add_node(&mut self, n: N) {
        self.adj.entry(n.clone()).or_default();
        self.radj.entry(n).or_default();
    }

    /// Inserts a directed edge, creating endpoints as needed. Self-loops are
    /// dropped. Returns true when the edge is new.
    pub fn add_edge(&mut self, u: N, v: N) -> bool {
        if u == v {
            return false;
        }
        self.add_node(u.clone());
        self.add_node(v.clone());
        let inserted = self
            .adj
            .get_mut(&u)
            .expect("node added above")
            .insert(v.clone());
        if inserted {
            self.radj.get_mut(&v).expect("node added above").insert(u);
            self.edge_count += 1;
        }
        inserted
    }

    pub fn contains_node(&self, n: &N) -> bool {
        self.adj.contains_key(n)
    }

    pub fn has_edge(&self, u: &N, v: &N) -> bool {
        self.adj.get(u).is_some_and(|s| s.contains(v))
    }

    pub fn node_count(&self) -> usize {
        self.adj.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    /// Nodes in ascending order.
    pub fn nodes(&self) -> impl Iterator<Item = &N> {
        self.adj.keys()
    }

    /// Successors of `n` in ascending order.
    pub fn successors(&self, n: &N) -> impl Iterator<Item = &N> {
        self.adj.get(n).into_iter().flatten()
    }

    /// Predecessors of `n` in ascending order.
    pub fn predecessors(&self, n: &N) -> impl Iterator<Item = &N> {
        self.radj.get(n).into_iter().flatten()
    }

    /// Directed edges in ascending (u, v) order.
    pub fn edges(&self) -> impl Iterator<Item = (&N, &N)> {
        self.adj
            .iter()
            .flat_map(|(u, vs)| vs.iter().map(move |v| (u, v)))
    }
}

/// Shortest `s -> d` path by hop count, ties broken by the lexicographically
/// smallest node sequence under `N`'s ordering. `None` when unreachable.
pub fn shortest_path_lex<N: Ord + Clone>(g: &DiGraph<N>, s: &N, d: &N) -> Option<Vec<N>> {
    if !g.contains_node(s) || !g.contains_node(d) {
        return None;
    }
    if s == d {
        return Some(vec![s.clone()]);
    }
    // distance to destination via reverse BFS
    let mut dist: BTreeMap<&N, usize> = BTreeMap::new();
    dist.insert(d, 0);
    let mut frontier = std::collections::VecDeque::new();
    frontier.push_back(d);
    while let Some(v) = frontier.pop_front() {
        let dv = dist[v];
        for u in g.predecessors(v) {
            if !dist.contains_key(u) {
                dist.insert(u, dv + 1);
                frontier.push_back(u);
            }
        }
    }
    dist.get(s)?;
    // walk forward, always taking the smallest successor that stays on a
    // shortest path
    let mut path = vec![s.clone()];
    let mut current = s;
    while current != d {
        let want = dist[current] - 1;
        let next = g
            .successors(current)
            .find(|v| dist.get(v).is_some_and(|&dv| dv == want))
            .expect("distance map guarantees a successor");
        path.push(next.clone());
        current = next;
    }
    Some(path)
}

/// Folds traceroute records into the IP-hop graph. For each record the
/// edges (src -> hop1), (hop_i -> hop_{i+1}), (hop_last -> dst) are
/// inserted, skipping any edge incident to an unresponsive hop.
pub fn build_ip_graph(records: &[TracerouteRecord]) -> PathGraph {
    let mut g = PathGraph::new();
    for record in records {
        let mut chain: Vec<Option<NodeId>> = Vec::with_capacity(record.hops().len() + 2);
        chain.push(Some(NodeId::Host(record.src().clone())));
        for hop in record.hops() {
            chain.push(match hop.address {
                HopAddress::Ip(ip) => Some(NodeId::Router(ip)),
                HopAddress::Unresponsive => None,
            });
        }
        chain.push(Some(NodeId::Host(record.dst().clone())));
        for pair in chain.windows(2) {
            if let (Some(u), Some(v)) = (&pair[0], &pair[1]) {
                g.add_edge(u.clone(), v.clone());
            }
        }
    }
    g
}

/// Edge-list export, one `u v` line per edge, lexicographically sorted.
pub fn export_edge_list(g: &PathGraph) -> String {
    let mut lines: Vec<String> = g.edges().map(|(u, v)| format!("{u} {v}")).collect();
    lines.sort();
    let mut out = lines.join("\n");
    if !out.is_empty() {
        out.push('\n');
    }
    out
}

/// Node on a measured path: an endpoint host or a hop address.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PathNode {
    Host(HostId),
    Hop(HopAddress),
}

impl fmt::Display for PathNode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PathNode::Host(h) => write!(f, "{h}"),
            PathNode::Hop(a) => write!(f, "{a}"),
        }
    }
}

/// Hop sequence of one observed path between two endpoints. Consecutive
/// duplicate addresses (and runs of unresponsive markers) are collapsed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IpPath {
    src: HostId,
    dst: HostId,
    hops: Vec<HopAddress>,
}

impl IpPath {
    pub fn from_record(record: &TracerouteRecord) -> Self {
        let mut hops: Vec<HopAddress> = Vec::with_capacity(record.hops().len());
        for hop in record.hops() {
            if hops.last() != Some(&hop.address) {
                hops.push(hop.address);
            }
        }
        IpPath {
            src: record.src().clone(),
            dst: record.dst().clone(),
            hops,
        }
    }

    pub fn src(&self) -> &HostId {
        &self.src
    }

    pub fn dst(&self) -> &HostId {
        &self.dst
    }

    pub fn hops(&self) -> &[HopAddress] {
        &self.hops
    }

    /// Full node sequence: source host, hops, destination host.
    pub fn nodes(&self) -> Vec<PathNode> {
        let mut nodes = Vec::with_capacity(self.hops.len() + 2);
        nodes.push(PathNode::Host(self.src.clone()));
        nodes.extend(self.hops.iter().map(|&h| PathNode::Hop(h)));
        nodes.push(PathNode::Host(self.dst.clone()));
        nodes
    }

    /// Edges on the path, incl. endpoint attachment: `src` node count minus 1.
    pub fn ip_hop_count(&self) -> usize {
        self.hops.len() + 1
    }
}

/// AS-level form of a path: consecutive duplicates collapsed, no unknowns.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AsPath {
    src: HostId,
    dst: HostId,
    asns: Vec<Asn>,
}

impl AsPath {
    pub fn src(&self) -> &HostId {
        &self.src
    }

    pub fn dst(&self) -> &HostId {
        &self.dst
    }

    pub fn asns(&self) -> &[Asn] {
        &self.asns
    }

    pub fn as_hop_count(&self) -> usize {
        self.asns.len()
    }
}

/// Maps each hop through the prefix table and collapses the result to AS
/// level. Unknown runs (unresponsive or unmapped hops) flanked by the same
/// ASN are bridged into it; runs flanked by different ASNs, or sitting at
/// either end of the path, are dropped as boundary-ambiguous. Both rules
/// reduce to: skip unknowns, collapse adjacent duplicates.
pub fn compress_to_as_path(path: &IpPath, table: &PrefixTable) -> AsPath {
    compress_asn_sequence(path.src().clone(), path.dst().clone(), hop_asns(path.hops(), table))
}

pub(crate) fn hop_asns<'a>(
    hops: &'a [HopAddress],
    table: &'a PrefixTable,
) -> impl Iterator<Item = Option<Asn>> + 'a {
    hops.iter().map(|hop| match hop {
        HopAddress::Ip(ip) => table.lookup(*ip),
        HopAddress::Unresponsive => None,
    })
}

pub(crate) fn compress_asn_sequence(
    src: HostId,
    dst: HostId,
    asns: impl IntoIterator<Item = Option<Asn>>,
) -> AsPath {
    let mut out: Vec<Asn> = Vec::new();
    for asn in asns.into_iter().flatten() {
        if out.last() != Some(&asn) {
            out.push(asn);
        }
    }
    AsPath { src, dst, asns: out }
}

/// Latest observed path per ordered pair. Equal timestamps resolve to the
/// record that appears later in the input.
pub fn latest_paths(records: &[TracerouteRecord]) -> BTreeMap<(HostId, HostId), IpPath> {
    let mut latest: BTreeMap<(HostId, HostId), &TracerouteRecord> = BTreeMap::new();
    for record in records {
        let key = (record.src().clone(), record.dst().clone());
        match latest.get(&key) {
            Some(existing) if existing.timestamp() > record.timestamp() => {}
            _ => {
                latest.insert(key, record);
            }
        }
    }
    latest
        .into_iter()
        .map(|(k, r)| (k, IpPath::from_record(r)))
        .collect()
}

/// Per-pair path length at both granularities.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PairPathLength {
    pub ip_hops: usize,
    pub as_hops: usize,
}

impl PairPathLength {
    /// IP hops per AS; `None` when no hop mapped to any AS.
    pub fn hops_per_as(&self) -> Option<f64> {
        if self.as_hops == 0 {
            None
        } else {
            Some(self.ip_hops as f64 / self.as_hops as f64)
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct PathLengthStats {
    pub per_pair: BTreeMap<(HostId, HostId), PairPathLength>,
    pub ip_histogram: BTreeMap<usize, usize>,
    pub as_histogram: BTreeMap<usize, usize>,
}

impl PathLengthStats {
    /// Mean of per-pair hops-per-AS ratios, over pairs where it is defined.
    pub fn mean_hops_per_as(&self) -> Option<f64> {
        let ratios: Vec<f64> = self
            .per_pair
            .values()
            .filter_map(|p| p.hops_per_as())
            .collect();
        if ratios.is_empty() {
            None
        } else {
            Some(ratios.iter().sum::<f64>() / ratios.len() as f64)
        }
    }
}

/// Path length statistics over the latest record of every pair.
pub fn path_length_stats(records: &[TracerouteRecord], table: &PrefixTable) -> PathLengthStats {
    let mut stats = PathLengthStats::default();
    for (pair, path) in latest_paths(records) {
        let entry = PairPathLength {
            ip_hops: path.ip_hop_count(),
            as_hops: compress_to_as_path(&path, table).as_hop_count(),
        };
        *stats.ip_histogram.entry(entry.ip_hops).or_insert(0) += 1;
        *stats.as_histogram.entry(entry.as_hops).or_insert(0) += 1;
        stats.per_pair.insert(pair, entry);
    }
    stats
}

/// AS-level contraction of the IP graph: routers collapse into their AS,
/// endpoints stay hosts, edges incident to unmapped routers are dropped.
pub fn as_level_graph(g: &PathGraph, table: &PrefixTable) -> DiGraph<AsNode> {
    let project = |n: &NodeId| -> Option<AsNode> {
        match n {
            NodeId::Host(h) => Some(AsNode::Host(h.clone())),
            NodeId::Router(ip) => table.lookup(*ip).map(AsNode::As),
        }
    };
    let mut out = DiGraph::new();
    for (u, v) in g.edges() {
        if let (Some(a), Some(b)) = (project(u), project(v)) {
            out.add_edge(a, b);
        }
    }
    out
}

/// Undirected AS adjacencies observed between routers of distinct,
/// known ASes. Pairs are canonicalised as (smaller, larger).
pub fn as_adjacency(g: &PathGraph, table: &PrefixTable) -> BTreeSet<(Asn, Asn)> {
    let mut set = BTreeSet::new();
    for (u, v) in g.edges() {
        if let (NodeId::Router(a), NodeId::Router(b)) = (u, v) {
            if let (Some(x), Some(y)) = (table.lookup(*a), table.lookup(*b)) {
                if x != y {
                    set.insert((x.min(y), x.max(y)));
                }
            }
        }
    }
    set
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::Hop;

    fn host(s: &str) -> HostId {
        HostId::new(s).unwrap()
    }

    fn record(ts: i64, src: &str, dst: &str, hops: &[&str]) -> TracerouteRecord {
        let hops = hops
            .iter()
            .enumerate()
            .map(|(i, h)| {
                let (address, asn) = match h.split_once('@') {
                    Some((ip, asn)) => (
                        HopAddress::Ip(ip.parse().unwrap()),
                        Asn::new(asn.parse().unwrap()),
                    ),
                    None if *h == "*" => (HopAddress::Unresponsive, None),
                    None => (HopAddress::Ip(h.parse().unwrap()), None),
                };
                Hop {
                    ttl: i as u32 + 1,
                    address,
                    asn,
                }
            })
            .collect();
        TracerouteRecord::new(ts, host(src), host(dst), hops).unwrap()
    }

    fn table(entries: &[(&str, u32)]) -> PrefixTable {
        let mut t = PrefixTable::new();
        for (cidr, asn) in entries {
            t.insert(cidr.parse().unwrap(), Asn::new(*asn).unwrap())
                .unwrap();
        }
        t
    }

    #[test]
    fn record_edges_include_endpoints() {
        let g = build_ip_graph(&[record(0, "A", "B", &["10.0.0.1", "10.0.0.2"])]);
        assert_eq!(g.edge_count(), 3);
        assert!(g.has_edge(
            &NodeId::Host(host("A")),
            &NodeId::Router("10.0.0.1".parse().unwrap())
        ));
        assert!(g.has_edge(
            &NodeId::Router("10.0.0.1".parse().unwrap()),
            &NodeId::Router("10.0.0.2".parse().unwrap())
        ));
        assert!(g.has_edge(
            &NodeId::Router("10.0.0.2".parse().unwrap()),
            &NodeId::Host(host("B"))
        ));
    }

    #[test]
    fn duplicate_records_are_idempotent() {
        let r = record(0, "A", "B", &["10.0.0.1", "10.0.0.2"]);
        let once = build_ip_graph(std::slice::from_ref(&r));
        let twice = build_ip_graph(&[r.clone(), r]);
        assert_eq!(once, twice);
    }

    #[test]
    fn record_order_does_not_change_the_graph() {
        let a = record(0, "A", "B", &["10.0.0.1", "10.0.0.2"]);
        let b = record(5, "B", "A", &["10.0.0.2", "10.0.0.1"]);
        let forward = build_ip_graph(&[a.clone(), b.clone()]);
        let backward = build_ip_graph(&[b, a]);
        assert_eq!(forward, backward);
    }

    #[test]
    fn unresponsive_hops_drop_their_edges() {
        let g = build_ip_graph(&[record(0, "A", "B", &["10.0.0.1", "*", "10.0.0.2"])]);
        assert_eq!(g.edge_count(), 2);
        assert!(g.has_edge(
            &NodeId::Host(host("A")),
            &NodeId::Router("10.0.0.1".parse().unwrap())
        ));
        assert!(g.has_edge(
            &NodeId::Router("10.0.0.2".parse().unwrap()),
            &NodeId::Host(host("B"))
        ));
    }

    #[test]
    fn as_compression_collapses_runs() {
        let t = table(&[("10.1.0.0/16", 100), ("10.2.0.0/16", 200), ("10.3.0.0/16", 300)]);
        let path = IpPath::from_record(&record(
            0,
            "A",
            "B",
            &["10.1.0.1", "10.1.0.2", "10.2.0.1", "10.2.0.2", "10.3.0.1"],
        ));
        let as_path = compress_to_as_path(&path, &t);
        let asns: Vec<u32> = as_path.asns().iter().map(|a| a.get()).collect();
        assert_eq!(asns, vec![100, 200, 300]);
    }

    #[test]
    fn unknown_run_flanked_by_same_asn_is_bridged() {
        let t = table(&[("10.1.0.0/16", 100), ("10.2.0.0/16", 200)]);
        let path = IpPath::from_record(&record(
            0,
            "A",
            "B",
            &["10.1.0.1", "*", "10.1.0.2", "10.2.0.1"],
        ));
        let asns: Vec<u32> = compress_to_as_path(&path, &t)
            .asns()
            .iter()
            .map(|a| a.get())
            .collect();
        assert_eq!(asns, vec![100, 200]);
    }

    #[test]
    fn unknown_run_flanked_by_different_asns_is_dropped() {
        let t = table(&[("10.1.0.0/16", 100), ("10.2.0.0/16", 200)]);
        let path = IpPath::from_record(&record(0, "A", "B", &["10.1.0.1", "*", "10.2.0.1"]));
        let asns: Vec<u32> = compress_to_as_path(&path, &t)
            .asns()
            .iter()
            .map(|a| a.get())
            .collect();
        assert_eq!(asns, vec![100, 200]);
    }

    #[test]
    fn single_as_path_lengths() {
        let t = table(&[("10.0.0.0/8", 100)]);
        let stats = path_length_stats(&[record(0, "A", "B", &["10.0.0.1", "10.0.0.2"])], &t);
        let entry = stats.per_pair[&(host("A"), host("B"))];
        assert_eq!(entry.ip_hops, 3);
        assert_eq!(entry.as_hops, 1);
        assert_eq!(entry.hops_per_as(), Some(3.0));
    }

    #[test]
    fn empty_record_set_gives_empty_stats() {
        let stats = path_length_stats(&[], &PrefixTable::new());
        assert!(stats.per_pair.is_empty());
        assert!(stats.ip_histogram.is_empty());
        assert_eq!(stats.mean_hops_per_as(), None);
    }

    #[test]
    fn latest_record_wins_per_pair() {
        let records = vec![
            record(100, "A", "B", &["10.0.0.1"]),
            record(50, "A", "B", &["10.0.0.2"]),
        ];
        let latest = latest_paths(&records);
        assert_eq!(
            latest[&(host("A"), host("B"))].hops(),
            &[HopAddress::Ip("10.0.0.1".parse().unwrap())]
        );
    }

    #[test]
    fn consecutive_duplicate_addresses_collapse_in_paths() {
        let path = IpPath::from_record(&record(0, "A", "B", &["10.0.0.1", "10.0.0.1", "10.0.0.2"]));
        assert_eq!(path.hops().len(), 2);
    }

    #[test]
    fn shortest_path_prefers_lexicographic_order() {
        let mut g: DiGraph<&str> = DiGraph::new();
        // two shortest routes: s-a-d and s-b-d
        g.add_edge("s", "b");
        g.add_edge("b", "d");
        g.add_edge("s", "a");
        g.add_edge("a", "d");
        assert_eq!(shortest_path_lex(&g, &"s", &"d"), Some(vec!["s", "a", "d"]));
    }

    #[test]
    fn shortest_path_unreachable_is_none() {
        let mut g: DiGraph<&str> = DiGraph::new();
        g.add_edge("s", "a");
        g.add_node("d");
        assert_eq!(shortest_path_lex(&g, &"s", &"d"), None);
    }

    #[test]
    fn edge_list_is_sorted() {
        let g = build_ip_graph(&[record(0, "A", "B", &["10.0.0.2", "10.0.0.1"])]);
        let text = export_edge_list(&g);
        assert_eq!(text, "10.0.0.1 B\n10.0.0.2 10.0.0.1\nA 10.0.0.2\n");
    }

    #[test]
    fn as_adjacency_skips_unknown_and_intra_as_edges() {
        let t = table(&[("10.1.0.0/16", 100), ("10.2.0.0/16", 200)]);
        let g = build_ip_graph(&[record(
            0,
            "A",
            "B",
            &["10.1.0.1", "10.1.0.2", "10.2.0.1", "192.168.0.1"],
        )]);
        let adj = as_adjacency(&g, &t);
        let pairs: Vec<(u32, u32)> = adj.iter().map(|(a, b)| (a.get(), b.get())).collect();
        assert_eq!(pairs, vec![(100, 200)]);
    }
}
