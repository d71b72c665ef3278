//! Edge-disjoint path extraction.
//!
//! The greedy procedure repeatedly takes the shortest remaining path and
//! deletes its edges until the endpoints disconnect. It is deterministic:
//! ties between equally short paths resolve to the lexicographically
//! smallest node sequence. Greedy can undercount, so
//! [`max_flow_disjoint_count`] computes the true maximum via unit-capacity
//! max flow and serves as the independent cross-check.

use std::collections::{BTreeMap, HashSet, VecDeque};
use std::net::Ipv4Addr;

use super::{BorderRole, DiversityError};
use crate::graph::{DiGraph, NodeId, PathGraph};
use crate::ingest::{HostId, PrefixTable, TracerouteRecord};

/// Granularity of a disjointness analysis.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PathLevel {
    Ip,
    As,
}

impl PathLevel {
    pub fn as_str(&self) -> &'static str {
        match self {
            PathLevel::Ip => "ip",
            PathLevel::As => "as",
        }
    }
}

/// Whether paths run host-to-host or between AS border routers.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DisjointMode {
    Plain,
    Border,
}

impl DisjointMode {
    pub fn as_str(&self) -> &'static str {
        match self {
            DisjointMode::Plain => "plain",
            DisjointMode::Border => "border",
        }
    }
}

/// Result of one disjoint-path extraction for a host pair.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DisjointReport {
    pub src: HostId,
    pub dst: HostId,
    pub level: PathLevel,
    pub mode: DisjointMode,
    pub count: usize,
    /// Extracted pairwise edge-disjoint paths, node display forms.
    pub paths: Vec<Vec<String>>,
}

/// Sorted-index view of a graph; index order equals `N`'s ordering, so BFS
/// over ascending indices explores nodes lexicographically.
struct Indexed<N> {
    ids: Vec<N>,
    adj: Vec<Vec<usize>>,
    radj: Vec<Vec<usize>>,
}

impl<N: Ord + Clone> Indexed<N> {
    fn build(g: &DiGraph<N>) -> Self {
        let ids: Vec<N> = g.nodes().cloned().collect();
        let pos: BTreeMap<&N, usize> = ids.iter().enumerate().map(|(i, n)| (n, i)).collect();
        let mut adj = vec![Vec::new(); ids.len()];
        let mut radj = vec![Vec::new(); ids.len()];
        for (u, v) in g.edges() {
            let (u, v) = (pos[u], pos[v]);
            adj[u].push(v);
            radj[v].push(u);
        }
        Indexed { ids, adj, radj }
    }

    fn index_of(&self, n: &N) -> Option<usize> {
        self.ids.binary_search(n).ok()
    }
}

/// Repeatedly extracts the shortest `s -> d` path by hop count (lexicographic
/// tie-break), deleting its edges, until no path remains. Returns the paths
/// in extraction order.
pub fn greedy_edge_disjoint<N>(g: &DiGraph<N>, s: &N, d: &N) -> Result<Vec<Vec<N>>, DiversityError>
where
    N: Ord + Clone + std::fmt::Display,
{
    greedy_with(g, s, d, |_, _| false)
}

/// Greedy core. Edges for which `keep` is true are never consumed: the
/// border analysis uses this for the virtual super-source and super-sink
/// attachments, which must not count toward disjointness. Every extracted
/// path must consume at least one real edge, otherwise extraction stops.
fn greedy_with<N>(
    g: &DiGraph<N>,
    s: &N,
    d: &N,
    keep: impl Fn(&N, &N) -> bool,
) -> Result<Vec<Vec<N>>, DiversityError>
where
    N: Ord + Clone + std::fmt::Display,
{
    let ix = Indexed::build(g);
    let s = ix
        .index_of(s)
        .ok_or_else(|| DiversityError::NodeNotFound(s.to_string()))?;
    let d = ix
        .index_of(d)
        .ok_or_else(|| DiversityError::NodeNotFound(d.to_string()))?;
    if s == d {
        return Err(DiversityError::SameEndpoints);
    }

    let mut removed: HashSet<(usize, usize)> = HashSet::new();
    let mut paths = Vec::new();
    loop {
        // distance-to-destination over the surviving edges
        let mut dist = vec![usize::MAX; ix.ids.len()];
        dist[d] = 0;
        let mut frontier = VecDeque::from([d]);
        while let Some(v) = frontier.pop_front() {
            for &u in &ix.radj[v] {
                if dist[u] == usize::MAX && !removed.contains(&(u, v)) {
                    dist[u] = dist[v] + 1;
                    frontier.push_back(u);
                }
            }
        }
        if dist[s] == usize::MAX {
            break;
        }
        // walk forward taking the smallest next node still on a shortest path
        let mut path = vec![s];
        let mut u = s;
        while u != d {
            let v = ix.adj[u]
                .iter()
                .copied()
                .find(|&v| !removed.contains(&(u, v)) && dist[v] == dist[u] - 1)
                .expect("distance map guarantees a live successor");
            path.push(v);
            u = v;
        }
        let mut consumed = false;
        for pair in path.windows(2) {
            if !keep(&ix.ids[pair[0]], &ix.ids[pair[1]]) {
                removed.insert((pair[0], pair[1]));
                consumed = true;
            }
        }
        if !consumed {
            break;
        }
        paths.push(path.iter().map(|&i| ix.ids[i].clone()).collect());
    }
    Ok(paths)
}

/// Maximum number of pairwise edge-disjoint `s -> d` paths, computed as a
/// unit-capacity max flow (Edmonds-Karp). Independent of the greedy code
/// path on purpose: it is the oracle the greedy result is checked against.
pub fn max_flow_disjoint_count<N>(g: &DiGraph<N>, s: &N, d: &N) -> Result<usize, DiversityError>
where
    N: Ord + Clone + std::fmt::Display,
{
    let ids: Vec<&N> = g.nodes().collect();
    let pos: BTreeMap<&N, usize> = ids.iter().enumerate().map(|(i, &n)| (n, i)).collect();
    let s = *pos
        .get(s)
        .ok_or_else(|| DiversityError::NodeNotFound(s.to_string()))?;
    let d = *pos
        .get(d)
        .ok_or_else(|| DiversityError::NodeNotFound(d.to_string()))?;
    if s == d {
        return Err(DiversityError::SameEndpoints);
    }

    // edge list with residuals: edge 2k is forward (cap 1), 2k+1 its reverse
    let mut to: Vec<usize> = Vec::new();
    let mut cap: Vec<i32> = Vec::new();
    let mut head: Vec<Vec<usize>> = vec![Vec::new(); ids.len()];
    for (u, v) in g.edges() {
        let (u, v) = (pos[u], pos[v]);
        head[u].push(to.len());
        to.push(v);
        cap.push(1);
        head[v].push(to.len());
        to.push(u);
        cap.push(0);
    }

    let mut flow = 0usize;
    loop {
        let mut parent_edge = vec![usize::MAX; ids.len()];
        let mut visited = vec![false; ids.len()];
        visited[s] = true;
        let mut frontier = VecDeque::from([s]);
        'bfs: while let Some(u) = frontier.pop_front() {
            for &e in &head[u] {
                let v = to[e];
                if !visited[v] && cap[e] > 0 {
                    visited[v] = true;
                    parent_edge[v] = e;
                    if v == d {
                        break 'bfs;
                    }
                    frontier.push_back(v);
                }
            }
        }
        if !visited[d] {
            break;
        }
        let mut v = d;
        while v != s {
            let e = parent_edge[v];
            cap[e] -= 1;
            cap[e ^ 1] += 1;
            v = to[e ^ 1];
        }
        flow += 1;
    }
    Ok(flow)
}

/// Host-to-host greedy extraction on the IP graph.
pub fn ip_disjoint_report(
    g: &PathGraph,
    src: &HostId,
    dst: &HostId,
) -> Result<DisjointReport, DiversityError> {
    let paths = greedy_edge_disjoint(g, &NodeId::Host(src.clone()), &NodeId::Host(dst.clone()))?;
    Ok(report(src, dst, PathLevel::Ip, DisjointMode::Plain, paths))
}

/// Host-to-host greedy extraction on the AS-level contraction.
pub fn as_disjoint_report(
    g: &DiGraph<crate::graph::AsNode>,
    src: &HostId,
    dst: &HostId,
) -> Result<DisjointReport, DiversityError> {
    let paths = greedy_edge_disjoint(
        g,
        &crate::graph::AsNode::Host(src.clone()),
        &crate::graph::AsNode::Host(dst.clone()),
    )?;
    Ok(report(src, dst, PathLevel::As, DisjointMode::Plain, paths))
}

/// Augmented-graph node for the border analysis: a virtual super-source
/// feeding all egress borders and a virtual super-sink draining all ingress
/// borders.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum BorderStage {
    Source,
    Router(Ipv4Addr),
    Sink,
}

impl std::fmt::Display for BorderStage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            BorderStage::Source => f.write_str("(source)"),
            BorderStage::Router(ip) => write!(f, "{ip}"),
            BorderStage::Sink => f.write_str("(sink)"),
        }
    }
}

/// Partially disjoint paths between the border routers of the source AS and
/// the destination AS. Paths consume only real router edges: the virtual
/// super-source and super-sink attachments stay available, so several paths
/// may fan out of one egress or into one ingress border. Runs on the
/// router-induced subgraph: host nodes never relay traffic at the IP layer,
/// so they are excluded from transit.
pub fn border_disjoint_report(
    g: &PathGraph,
    records: &[TracerouteRecord],
    src: &HostId,
    dst: &HostId,
    table: &PrefixTable,
) -> Result<DisjointReport, DiversityError> {
    let src_asn = table
        .host_asn(records, src)
        .ok_or_else(|| DiversityError::HostAsnUnknown(src.clone()))?;
    let dst_asn = table
        .host_asn(records, dst)
        .ok_or_else(|| DiversityError::HostAsnUnknown(dst.clone()))?;
    if src_asn == dst_asn {
        return Err(DiversityError::IntraAsPair {
            src: src.clone(),
            dst: dst.clone(),
            asn: src_asn,
        });
    }
    let egress = super::border_routers(g, src_asn, table, BorderRole::Egress);
    if egress.is_empty() {
        return Err(DiversityError::EmptyBorderSet {
            host: src.clone(),
            role: "egress",
        });
    }
    let ingress = super::border_routers(g, dst_asn, table, BorderRole::Ingress);
    if ingress.is_empty() {
        return Err(DiversityError::EmptyBorderSet {
            host: dst.clone(),
            role: "ingress",
        });
    }

    let mut aug: DiGraph<BorderStage> = DiGraph::new();
    for (u, v) in g.edges() {
        if let (NodeId::Router(a), NodeId::Router(b)) = (u, v) {
            aug.add_edge(BorderStage::Router(*a), BorderStage::Router(*b));
        }
    }
    for &e in &egress {
        aug.add_edge(BorderStage::Source, BorderStage::Router(e));
    }
    for &i in &ingress {
        aug.add_edge(BorderStage::Router(i), BorderStage::Sink);
    }

    let virtual_edge = |u: &BorderStage, v: &BorderStage| {
        matches!(u, BorderStage::Source) || matches!(v, BorderStage::Sink)
    };
    let paths = greedy_with(&aug, &BorderStage::Source, &BorderStage::Sink, virtual_edge)?;
    let stripped = paths
        .into_iter()
        .map(|p| {
            p.into_iter()
                .filter(|n| matches!(n, BorderStage::Router(_)))
                .map(|n| n.to_string())
                .collect()
        })
        .collect::<Vec<Vec<String>>>();
    Ok(DisjointReport {
        src: src.clone(),
        dst: dst.clone(),
        level: PathLevel::Ip,
        mode: DisjointMode::Border,
        count: stripped.len(),
        paths: stripped,
    })
}

fn report<N: std::fmt::Display>(
    src: &HostId,
    dst: &HostId,
    level: PathLevel,
    mode: DisjointMode,
    paths: Vec<Vec<N>>,
) -> DisjointReport {
    let paths: Vec<Vec<String>> = paths
        .iter()
        .map(|p| p.iter().map(|n| n.to_string()).collect())
        .collect();
    DisjointReport {
        src: src.clone(),
        dst: dst.clone(),
        level,
        mode,
        count: paths.len(),
        paths,
    }
}
