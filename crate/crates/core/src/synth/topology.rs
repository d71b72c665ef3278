//! Seeded power-law AS topology generation.
//!
//! Target degrees follow d_r proportional to r^R over ranks 1..n. The edge
//! set is realised by stub matching in a seeded shuffle order, then patched
//! minimally for connectivity so that every host pair is routable. Each AS
//! receives a short chain of routers and hosts attach to the lowest-degree
//! (stub) ASes.

use std::collections::BTreeSet;
use std::net::Ipv4Addr;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{SynthConfig, SynthError};
use crate::graph::DiGraph;
use crate::ingest::{Asn, HostId};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SynthAs {
    pub asn: Asn,
    /// Router interfaces of this AS, in traversal order.
    pub routers: Vec<Ipv4Addr>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SynthHost {
    pub id: HostId,
    pub asn: Asn,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Topology {
    /// One entry per AS; ASNs run 1..=n in entry order.
    pub ases: Vec<SynthAs>,
    /// Undirected AS adjacencies, canonicalised as (smaller, larger).
    pub as_edges: BTreeSet<(Asn, Asn)>,
    pub hosts: Vec<SynthHost>,
    /// Notes about degree-sequence or connectivity adjustments.
    pub adjustments: Vec<String>,
}

impl Topology {
    /// Directed view of the AS adjacency (edges in both directions).
    pub fn as_graph(&self) -> DiGraph<Asn> {
        let mut g = DiGraph::new();
        for a in &self.ases {
            g.add_node(a.asn);
        }
        for &(x, y) in &self.as_edges {
            g.add_edge(x, y);
            g.add_edge(y, x);
        }
        g
    }

    pub fn routers_of(&self, asn: Asn) -> &[Ipv4Addr] {
        &self.ases[(asn.get() - 1) as usize].routers
    }

    pub fn host(&self, id: &HostId) -> Option<&SynthHost> {
        self.hosts.iter().find(|h| &h.id == id)
    }
}

pub fn generate_topology(config: &SynthConfig) -> Result<Topology, SynthError> {
    config.validate()?;
    let n = config.n_ases;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut adjustments = Vec::new();

    // target degree sequence d_r = round(n * r^R), floored at 1, capped at n-1
    let mut degrees: Vec<usize> = (1..=n)
        .map(|rank| {
            if n == 1 {
                return 0;
            }
            let d = (n as f64 * (rank as f64).powf(config.exponent)).round() as usize;
            d.clamp(1, n - 1)
        })
        .collect();
    if degrees.iter().sum::<usize>() % 2 == 1 {
        degrees[0] -= 1;
        adjustments.push("decremented the largest degree to make the stub count even".into());
    }

    // stub matching in seeded shuffle order
    let mut stubs: Vec<usize> = degrees
        .iter()
        .enumerate()
        .flat_map(|(node, &d)| std::iter::repeat_n(node, d))
        .collect();
    stubs.shuffle(&mut rng);
    let mut edges: BTreeSet<(usize, usize)> = BTreeSet::new();
    let add = |edges: &mut BTreeSet<(usize, usize)>, a: usize, b: usize| -> bool {
        a != b && edges.insert((a.min(b), a.max(b)))
    };
    let mut leftovers: Vec<usize> = Vec::new();
    for pair in stubs.chunks(2) {
        if pair.len() < 2 {
            leftovers.push(pair[0]);
            continue;
        }
        if !add(&mut edges, pair[0], pair[1]) {
            leftovers.extend_from_slice(pair);
        }
    }
    // second chance for colliding stubs, then give up on the rest
    let mut dropped = 0usize;
    while let Some(a) = leftovers.pop() {
        let mut matched = false;
        for i in 0..leftovers.len() {
            if add(&mut edges, a, leftovers[i]) {
                leftovers.swap_remove(i);
                matched = true;
                break;
            }
        }
        if !matched {
            dropped += 1;
        }
    }
    if dropped > 0 {
        adjustments.push(format!("dropped {dropped} unmatchable stub(s)"));
    }

    // connect stray components to the highest-degree node
    if n > 1 {
        let mut realized = vec![0usize; n];
        for &(a, b) in &edges {
            realized[a] += 1;
            realized[b] += 1;
        }
        let hub = (0..n).max_by_key(|&i| (realized[i], usize::MAX - i)).unwrap_or(0);
        let mut component = vec![usize::MAX; n];
        let mut adjacency = vec![Vec::new(); n];
        for &(a, b) in &edges {
            adjacency[a].push(b);
            adjacency[b].push(a);
        }
        let mut queue = std::collections::VecDeque::new();
        for start in 0..n {
            if component[start] != usize::MAX {
                continue;
            }
            component[start] = start;
            queue.push_back(start);
            while let Some(u) = queue.pop_front() {
                for &v in &adjacency[u] {
                    if component[v] == usize::MAX {
                        component[v] = start;
                        queue.push_back(v);
                    }
                }
            }
            if component[hub] == start {
                continue;
            }
            add(&mut edges, start, hub);
            adjustments.push(format!(
                "attached disconnected component at AS{} to the hub AS{}",
                start + 1,
                hub + 1
            ));
        }
    }

    // routers: a short chain per AS
    let (lo, hi) = (
        *config.routers_per_as.start(),
        *config.routers_per_as.end(),
    );
    let ases: Vec<SynthAs> = (1..=n)
        .map(|a| {
            let count = rng.random_range(lo..=hi);
            let routers = (1..=count)
                .map(|r| {
                    Ipv4Addr::new(10, (a >> 8) as u8, (a & 0xff) as u8, r as u8)
                })
                .collect();
            SynthAs {
                asn: Asn::new(a as u32).expect("positive asn"),
                routers,
            }
        })
        .collect();

    // hosts on the lowest-degree ASes, one per AS while they last
    let mut realized = vec![0usize; n];
    for &(a, b) in &edges {
        realized[a] += 1;
        realized[b] += 1;
    }
    let mut stub_order: Vec<usize> = (0..n).collect();
    stub_order.sort_by_key(|&i| (realized[i], i));
    let width = config.hosts.to_string().len().max(2);
    let hosts: Vec<SynthHost> = (0..config.hosts)
        .map(|i| {
            let as_index = stub_order[i % n];
            SynthHost {
                id: HostId::new(format!("h{:0width$}", i + 1)).expect("generated id is valid"),
                asn: Asn::new(as_index as u32 + 1).expect("positive asn"),
            }
        })
        .collect();

    let as_edges = edges
        .into_iter()
        .map(|(a, b)| {
            (
                Asn::new(a as u32 + 1).expect("positive"),
                Asn::new(b as u32 + 1).expect("positive"),
            )
        })
        .collect();

    Ok(Topology {
        ases,
        as_edges,
        hosts,
        adjustments,
    })
}
