//! Synthetic measurement generation.
//!
//! Produces power-law overlay topologies plus traceroute and delay files
//! with scheduled degradations, all driven by one seed. Noise is uniform and
//! bounded, so a scheduled degradation can be made provably detectable by
//! choosing its added delay above `k * noise + margin`; the injected
//! schedule doubles as exact ground truth.

mod measure;
mod topology;

use std::ops::RangeInclusive;

use thiserror::Error;

pub use measure::{generate, generate_measurements, GroundTruth, SynthData};
pub use topology::{generate_topology, SynthAs, SynthHost, Topology};

use crate::ingest::HostId;

pub const DEFAULT_EXPONENT: f64 = -0.8;
/// Simulated seconds between traceroute snapshots.
pub const TRACEROUTE_INTERVAL_SECS: i64 = 600;

#[derive(Debug, Error)]
pub enum SynthError {
    #[error("invalid config: {0}")]
    InvalidConfig(String),
    #[error("schedule references unknown host {0}")]
    UnknownScheduleHost(HostId),
    #[error("no route between {0} and {1}")]
    Unroutable(HostId, HostId),
}

/// One scheduled degradation: `added_delay_ms` is stacked on the direct
/// delay of (src, dst) at `epoch`.
#[derive(Debug, Clone, PartialEq)]
pub struct ScheduledAnomaly {
    pub epoch: i64,
    pub src: HostId,
    pub dst: HostId,
    pub added_delay_ms: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthConfig {
    pub n_ases: usize,
    /// Power-law rank-degree exponent; must be negative.
    pub exponent: f64,
    pub hosts: usize,
    pub routers_per_as: RangeInclusive<usize>,
    pub epochs: usize,
    pub epoch_len: u32,
    pub base_delay_per_hop: f64,
    /// Uniform noise amplitude in ms: each measurement shifts by a draw
    /// from [-noise, noise].
    pub noise: f64,
    pub anomaly_schedule: Vec<ScheduledAnomaly>,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            n_ases: 50,
            exponent: DEFAULT_EXPONENT,
            hosts: 10,
            routers_per_as: 2..=3,
            epochs: 180,
            epoch_len: 60,
            base_delay_per_hop: 10.0,
            noise: 0.0,
            anomaly_schedule: Vec::new(),
            seed: 0,
        }
    }
}

impl SynthConfig {
    pub fn validate(&self) -> Result<(), SynthError> {
        let fail = |msg: String| Err(SynthError::InvalidConfig(msg));
        if self.n_ases == 0 || self.n_ases > 60_000 {
            return fail(format!("n_ases {} outside 1..=60000", self.n_ases));
        }
        if !self.exponent.is_finite() || self.exponent >= 0.0 {
            return fail(format!("exponent {} must be negative", self.exponent));
        }
        if self.hosts == 0 {
            return fail("hosts must be at least 1".into());
        }
        if self.epochs == 0 {
            return fail("epochs must be at least 1".into());
        }
        if self.epoch_len == 0 {
            return fail("epoch_len must be positive".into());
        }
        let (lo, hi) = (*self.routers_per_as.start(), *self.routers_per_as.end());
        if lo == 0 || lo > hi || hi > 200 {
            return fail(format!("routers_per_as {lo}..={hi} outside 1..=200"));
        }
        if !(self.base_delay_per_hop > 0.0 && self.base_delay_per_hop.is_finite()) {
            return fail("base_delay_per_hop must be positive".into());
        }
        if !(self.noise >= 0.0 && self.noise.is_finite()) {
            return fail("noise must be a non-negative real".into());
        }
        for a in &self.anomaly_schedule {
            if a.epoch < 0 || a.epoch >= self.epochs as i64 {
                return fail(format!(
                    "schedule epoch {} outside 0..{}",
                    a.epoch, self.epochs
                ));
            }
            if !(a.added_delay_ms > 0.0 && a.added_delay_ms.is_finite()) {
                return fail(format!("schedule added delay {} must be positive", a.added_delay_ms));
            }
            if a.src == a.dst {
                return fail(format!("schedule entry {} -> itself", a.src));
            }
        }
        Ok(())
    }
}
