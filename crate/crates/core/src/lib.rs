//! Reconstructs IP-level and AS-level path diversity from traceroute logs
//! between overlay hosts, flags delay degradations on direct paths, and ranks
//! one-hop relay candidates by delay gain and disjointness.
//!
//! The crate is organised around the measurement pipeline:
//!
//! * [`ingest`] parses traceroute, delay, and prefix-table files into
//!   canonical records and resolves IPs to AS numbers.
//! * [`graph`] folds traceroute records into a directed IP-hop graph and
//!   compresses observed paths to AS level.
//! * [`diversity`] quantifies path diversity: divergence hops, greedy
//!   edge-disjoint path extraction (with a max-flow cross-check), border
//!   router sets, and AS degree distributions.
//! * [`anomaly`] detects rolling k-sigma delay degradations, ranks relays by
//!   delay gain, and aggregates top-set frequencies.
//! * [`synth`] generates seeded power-law topologies plus measurement files
//!   with scheduled degradations, so every analysis runs without external
//!   datasets.
//!
//! All analyses operate on round-trip delay as a stand-in for one-way delay;
//! the two are known to be strongly correlated on real paths, so relay
//! rankings derived from RTTs remain meaningful.

pub mod anomaly;
pub mod diversity;
pub mod graph;
pub mod ingest;
pub mod synth;

pub use ingest::{Asn, HostId};
