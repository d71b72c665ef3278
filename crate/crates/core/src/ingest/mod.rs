//! Parsing of measurement files into canonical records.
//!
//! Three line-oriented formats are supported: traceroute logs, delay CSVs,
//! and CIDR prefix tables. Parsers are pure functions over input streams;
//! everything they produce is immutable after construction. An optional TCP
//! client for bulk whois-style IP-to-ASN resolution lives in [`whois`].

mod delay;
mod prefix;
mod traceroute;
pub mod whois;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

pub use delay::{parse_delay_file, serialize_delays, DEFAULT_EPOCH_LEN};
pub use prefix::{load_prefix_table, serialize_prefix_table, Cidr, PrefixTable};
pub use traceroute::{parse_traceroute_file, serialize_traceroutes, TRACEROUTE_HEADER};
pub use whois::{bulk_resolve, ResolveError};

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("line {line}: {reason}")]
    Parse { line: usize, reason: String },
    #[error("line {line}: {reason}")]
    Validation { line: usize, reason: String },
    #[error("invalid host id {0:?}: must be non-empty and match [A-Za-z0-9._-]+")]
    BadHostId(String),
    #[error("duplicate delay series for pair {src}->{dst}")]
    DuplicateSeries { src: HostId, dst: HostId },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl IngestError {
    fn parse(line: usize, reason: impl Into<String>) -> Self {
        IngestError::Parse {
            line,
            reason: reason.into(),
        }
    }

    fn validation(line: usize, reason: impl Into<String>) -> Self {
        IngestError::Validation {
            line,
            reason: reason.into(),
        }
    }
}

/// Identifier of an overlay host. Short ASCII token, unique per host.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct HostId(String);

impl HostId {
    pub fn new(id: impl Into<String>) -> Result<Self, IngestError> {
        let id = id.into();
        let ok = !id.is_empty()
            && id
                .bytes()
                .all(|b| b.is_ascii_alphanumeric() || b == b'.' || b == b'_' || b == b'-');
        if ok {
            Ok(HostId(id))
        } else {
            Err(IngestError::BadHostId(id))
        }
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for HostId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl FromStr for HostId {
    type Err = IngestError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        HostId::new(s)
    }
}

/// Autonomous system number. Always positive.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Asn(u32);

impl Asn {
    pub fn new(asn: u32) -> Option<Self> {
        if asn > 0 {
            Some(Asn(asn))
        } else {
            None
        }
    }

    pub fn get(&self) -> u32 {
        self.0
    }
}

impl fmt::Display for Asn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Address reported at one traceroute hop. Routers that drop probes show up
/// as `Unresponsive` (`*` in the file format).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum HopAddress {
    Ip(std::net::Ipv4Addr),
    Unresponsive,
}

impl fmt::Display for HopAddress {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            HopAddress::Ip(ip) => write!(f, "{ip}"),
            HopAddress::Unresponsive => f.write_str("*"),
        }
    }
}

/// One hop of a recorded traceroute. `asn` is `None` when the mapping is
/// unknown; an unresponsive hop never carries an ASN.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Hop {
    pub ttl: u32,
    pub address: HopAddress,
    pub asn: Option<Asn>,
}

/// One observed hop-by-hop path between two overlay hosts at a timestamp.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TracerouteRecord {
    timestamp: i64,
    src: HostId,
    dst: HostId,
    hops: Vec<Hop>,
}

impl TracerouteRecord {
    /// Validates the hop list: non-empty, TTLs 1..n increasing by one, and
    /// no ASN attached to an unresponsive hop. `src` and `dst` must differ.
    pub fn new(
        timestamp: i64,
        src: HostId,
        dst: HostId,
        hops: Vec<Hop>,
    ) -> Result<Self, IngestError> {
        if src == dst {
            return Err(IngestError::validation(
                0,
                format!("record {src}->{dst}: src and dst must differ"),
            ));
        }
        if hops.is_empty() {
            return Err(IngestError::validation(
                0,
                format!("record {src}->{dst}: empty hop list"),
            ));
        }
        for (i, hop) in hops.iter().enumerate() {
            if hop.ttl as usize != i + 1 {
                return Err(IngestError::validation(
                    0,
                    format!(
                        "record {src}->{dst}: ttl {} at position {} (want {})",
                        hop.ttl,
                        i,
                        i + 1
                    ),
                ));
            }
            if hop.address == HopAddress::Unresponsive && hop.asn.is_some() {
                return Err(IngestError::validation(
                    0,
                    format!("record {src}->{dst}: unresponsive hop with an ASN"),
                ));
            }
        }
        Ok(TracerouteRecord {
            timestamp,
            src,
            dst,
            hops,
        })
    }

    pub fn timestamp(&self) -> i64 {
        self.timestamp
    }

    pub fn src(&self) -> &HostId {
        &self.src
    }

    pub fn dst(&self) -> &HostId {
        &self.dst
    }

    pub fn hops(&self) -> &[Hop] {
        &self.hops
    }
}

/// Per-host-pair, epoch-indexed delay measurements. `None` slots are
/// missing measurements; the slot vector always covers a contiguous epoch
/// range starting at `start_epoch`.
#[derive(Debug, Clone, PartialEq)]
pub struct DelaySeries {
    src: HostId,
    dst: HostId,
    epoch_len: u32,
    start_epoch: i64,
    values: Vec<Option<f64>>,
}

impl DelaySeries {
    pub fn new(
        src: HostId,
        dst: HostId,
        epoch_len: u32,
        start_epoch: i64,
        values: Vec<Option<f64>>,
    ) -> Result<Self, IngestError> {
        if epoch_len == 0 {
            return Err(IngestError::validation(0, "epoch_len must be positive"));
        }
        if values.is_empty() {
            return Err(IngestError::validation(
                0,
                format!("series {src}->{dst}: no slots"),
            ));
        }
        for v in values.iter().flatten() {
            if !v.is_finite() || *v < 0.0 {
                return Err(IngestError::validation(
                    0,
                    format!("series {src}->{dst}: delay {v} is not a non-negative real"),
                ));
            }
        }
        Ok(DelaySeries {
            src,
            dst,
            epoch_len,
            start_epoch,
            values,
        })
    }

    pub fn src(&self) -> &HostId {
        &self.src
    }

    pub fn dst(&self) -> &HostId {
        &self.dst
    }

    pub fn epoch_len(&self) -> u32 {
        self.epoch_len
    }

    pub fn start_epoch(&self) -> i64 {
        self.start_epoch
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Slot values indexed from `start_epoch`.
    pub fn values(&self) -> &[Option<f64>] {
        &self.values
    }

    /// Delay at an absolute epoch; `None` when missing or out of range.
    pub fn value_at(&self, epoch: i64) -> Option<f64> {
        let idx = epoch.checked_sub(self.start_epoch)?;
        if idx < 0 {
            return None;
        }
        self.values.get(idx as usize).copied().flatten()
    }

    /// Absolute epochs with a present measurement.
    pub fn present_epochs(&self) -> impl Iterator<Item = (i64, f64)> + '_ {
        self.values
            .iter()
            .enumerate()
            .filter_map(move |(i, v)| v.map(|v| (self.start_epoch + i as i64, v)))
    }
}

/// Delay series of a full mesh, keyed by ordered (src, dst) pair.
pub type SeriesMap = BTreeMap<(HostId, HostId), DelaySeries>;

/// Indexes series by pair. Two series for the same ordered pair are an
/// error: the caller merged incompatible inputs.
pub fn index_series(series: Vec<DelaySeries>) -> Result<SeriesMap, IngestError> {
    let mut map = SeriesMap::new();
    for s in series {
        let key = (s.src().clone(), s.dst().clone());
        if map.insert(key.clone(), s).is_some() {
            return Err(IngestError::DuplicateSeries {
                src: key.0,
                dst: key.1,
            });
        }
    }
    Ok(map)
}

/// Hosts appearing as a source or destination of any series, sorted.
pub fn hosts_of(series: &SeriesMap) -> Vec<HostId> {
    let mut hosts: Vec<HostId> = series
        .keys()
        .flat_map(|(s, d)| [s.clone(), d.clone()])
        .collect();
    hosts.sort();
    hosts.dedup();
    hosts
}
