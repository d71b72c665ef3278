//! Measurement synthesis over a generated topology.
//!
//! Routes follow shortest AS paths expanded through each AS's router chain.
//! Delays are base-per-hop times the IP hop count plus bounded uniform noise
//! plus whatever the anomaly schedule injects. Traceroutes are snapshotted
//! once per simulated ten-minute interval.

use std::collections::BTreeMap;
use std::net::Ipv4Addr;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{
    generate_topology, ScheduledAnomaly, SynthConfig, SynthError, Topology,
    TRACEROUTE_INTERVAL_SECS,
};
use crate::graph::shortest_path_lex;
use crate::ingest::{
    serialize_delays, serialize_traceroutes, Asn, DelaySeries, Hop, HopAddress, HostId, SeriesMap,
    TracerouteRecord,
};

#[derive(Debug, Clone, PartialEq)]
pub struct GroundTruth {
    /// The schedule as injected, sorted by (epoch, src, dst).
    pub injected: Vec<ScheduledAnomaly>,
    /// Relay with the smallest noise-free indirect delay per ordered pair.
    pub best_relay: BTreeMap<(HostId, HostId), HostId>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthData {
    pub topology: Topology,
    pub records: Vec<TracerouteRecord>,
    pub series: Vec<DelaySeries>,
    pub truth: GroundTruth,
}

impl SynthData {
    /// Canonical traceroute file text.
    pub fn traceroute_file(&self) -> String {
        serialize_traceroutes(&self.records)
    }

    /// Canonical delay CSV text.
    pub fn delay_file(&self) -> String {
        serialize_delays(&self.series)
    }

    /// Ground-truth CSV: `epoch,src,dst,added_delay`.
    pub fn truth_file(&self) -> String {
        let mut out = String::from("epoch,src,dst,added_delay\n");
        for a in &self.truth.injected {
            out.push_str(&format!(
                "{},{},{},{}\n",
                a.epoch, a.src, a.dst, a.added_delay_ms
            ));
        }
        out
    }

    pub fn series_map(&self) -> SeriesMap {
        self.series
            .iter()
            .map(|s| ((s.src().clone(), s.dst().clone()), s.clone()))
            .collect()
    }

    pub fn host_ids(&self) -> Vec<HostId> {
        self.topology.hosts.iter().map(|h| h.id.clone()).collect()
    }
}

/// Generates a topology and its measurements in one step.
pub fn generate(config: &SynthConfig) -> Result<SynthData, SynthError> {
    let topology = generate_topology(config)?;
    generate_measurements(topology, config)
}

pub fn generate_measurements(
    topology: Topology,
    config: &SynthConfig,
) -> Result<SynthData, SynthError> {
    config.validate()?;
    for entry in &config.anomaly_schedule {
        for host in [&entry.src, &entry.dst] {
            if topology.host(host).is_none() {
                return Err(SynthError::UnknownScheduleHost(host.clone()));
            }
        }
    }

    let as_graph = topology.as_graph();
    let mut routes: BTreeMap<(HostId, HostId), Vec<(Ipv4Addr, Asn)>> = BTreeMap::new();
    for src in &topology.hosts {
        for dst in &topology.hosts {
            if src.id == dst.id {
                continue;
            }
            let as_path = if src.asn == dst.asn {
                vec![src.asn]
            } else {
                shortest_path_lex(&as_graph, &src.asn, &dst.asn)
                    .ok_or_else(|| SynthError::Unroutable(src.id.clone(), dst.id.clone()))?
            };
            let mut hops = Vec::new();
            for asn in as_path {
                for &ip in topology.routers_of(asn) {
                    hops.push((ip, asn));
                }
            }
            routes.insert((src.id.clone(), dst.id.clone()), hops);
        }
    }

    let duration = config.epochs as i64 * config.epoch_len as i64;
    let snapshots = (duration / TRACEROUTE_INTERVAL_SECS).max(1);
    let mut records = Vec::with_capacity((snapshots as usize) * routes.len());
    for k in 0..snapshots {
        let ts = k * TRACEROUTE_INTERVAL_SECS;
        for ((src, dst), hops) in &routes {
            let hop_list = hops
                .iter()
                .enumerate()
                .map(|(i, &(ip, asn))| Hop {
                    ttl: i as u32 + 1,
                    address: HopAddress::Ip(ip),
                    asn: Some(asn),
                })
                .collect();
            records.push(
                TracerouteRecord::new(ts, src.clone(), dst.clone(), hop_list)
                    .expect("generated records satisfy the hop invariants"),
            );
        }
    }

    let mut schedule_by_pair: BTreeMap<(HostId, HostId), BTreeMap<i64, f64>> = BTreeMap::new();
    for entry in &config.anomaly_schedule {
        *schedule_by_pair
            .entry((entry.src.clone(), entry.dst.clone()))
            .or_default()
            .entry(entry.epoch)
            .or_insert(0.0) += entry.added_delay_ms;
    }

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed ^ 0x9e37_79b9_7f4a_7c15);
    let mut series = Vec::with_capacity(routes.len());
    for ((src, dst), hops) in &routes {
        let base = config.base_delay_per_hop * (hops.len() + 1) as f64;
        let pair_schedule = schedule_by_pair.get(&(src.clone(), dst.clone()));
        let values = (0..config.epochs as i64)
            .map(|epoch| {
                let noise = if config.noise > 0.0 {
                    rng.random_range(-config.noise..=config.noise)
                } else {
                    0.0
                };
                let added = pair_schedule
                    .and_then(|m| m.get(&epoch))
                    .copied()
                    .unwrap_or(0.0);
                Some(base + noise + added)
            })
            .collect();
        series.push(
            DelaySeries::new(src.clone(), dst.clone(), config.epoch_len, 0, values)
                .expect("generated series satisfy the delay invariants"),
        );
    }

    let mut best_relay = BTreeMap::new();
    for (src, dst) in routes.keys() {
        let mut best: Option<(usize, HostId)> = None;
        for h in &topology.hosts {
            if &h.id == src || &h.id == dst {
                continue;
            }
            let first = routes[&(src.clone(), h.id.clone())].len() + 1;
            let second = routes[&(h.id.clone(), dst.clone())].len() + 1;
            let total = first + second;
            if best.as_ref().is_none_or(|(b, _)| total < *b) {
                best = Some((total, h.id.clone()));
            }
        }
        if let Some((_, id)) = best {
            best_relay.insert((src.clone(), dst.clone()), id);
        }
    }

    let mut injected = config.anomaly_schedule.clone();
    injected.sort_by(|a, b| (a.epoch, &a.src, &a.dst).cmp(&(b.epoch, &b.src, &b.dst)));

    Ok(SynthData {
        topology,
        records,
        series,
        truth: GroundTruth {
            injected,
            best_relay,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::anomaly::{detect_anomalies, AnomalyConfig};

    fn host(s: &str) -> HostId {
        HostId::new(s).unwrap()
    }

    fn base_config() -> SynthConfig {
        SynthConfig {
            n_ases: 12,
            hosts: 4,
            epochs: 200,
            seed: 5,
            ..SynthConfig::default()
        }
    }

    #[test]
    fn noiseless_delays_equal_hops_times_base() {
        let data = generate(&base_config()).unwrap();
        let routes_checked = data.series.iter().all(|s| {
            let first = s.values()[0].unwrap();
            s.values().iter().all(|v| v.unwrap() == first)
        });
        assert!(routes_checked, "noise-free series must be constant");
        // cross-check one pair against its traceroute hop count
        let s = &data.series[0];
        let record = data
            .records
            .iter()
            .find(|r| r.src() == s.src() && r.dst() == s.dst())
            .unwrap();
        let expected = 10.0 * (record.hops().len() + 1) as f64;
        assert_eq!(s.values()[0].unwrap(), expected);
    }

    #[test]
    fn scheduled_anomaly_is_detected_exactly_once() {
        let mut cfg = base_config();
        cfg.noise = 2.0;
        cfg.anomaly_schedule = vec![ScheduledAnomaly {
            epoch: 100,
            src: host("h01"),
            dst: host("h02"),
            added_delay_ms: 500.0,
        }];
        let data = generate(&cfg).unwrap();
        let map = data.series_map();
        let series = &map[&(host("h01"), host("h02"))];
        let events = detect_anomalies(series, &AnomalyConfig::failure());
        assert_eq!(events.len(), 1);
        assert_eq!(events[0].epoch, 100);
    }

    #[test]
    fn fixed_seed_gives_identical_files() {
        let a = generate(&base_config()).unwrap();
        let b = generate(&base_config()).unwrap();
        assert_eq!(a.traceroute_file(), b.traceroute_file());
        assert_eq!(a.delay_file(), b.delay_file());
        assert_eq!(a.truth_file(), b.truth_file());
    }

    #[test]
    fn unknown_schedule_host_is_rejected() {
        let mut cfg = base_config();
        cfg.anomaly_schedule = vec![ScheduledAnomaly {
            epoch: 10,
            src: host("nope"),
            dst: host("h02"),
            added_delay_ms: 100.0,
        }];
        assert!(matches!(
            generate(&cfg),
            Err(SynthError::UnknownScheduleHost(_))
        ));
    }

    #[test]
    fn schedule_epoch_out_of_range_is_rejected() {
        let mut cfg = base_config();
        cfg.anomaly_schedule = vec![ScheduledAnomaly {
            epoch: 100_000,
            src: host("h01"),
            dst: host("h02"),
            added_delay_ms: 100.0,
        }];
        assert!(matches!(generate(&cfg), Err(SynthError::InvalidConfig(_))));
    }

    #[test]
    fn best_relay_tracks_shortest_leg_sum() {
        let data = generate(&base_config()).unwrap();
        let routes_len = |src: &HostId, dst: &HostId| -> usize {
            data.records
                .iter()
                .find(|r| r.src() == src && r.dst() == dst)
                .map(|r| r.hops().len() + 1)
                .unwrap()
        };
        for ((src, dst), relay) in &data.truth.best_relay {
            let chosen = routes_len(src, relay) + routes_len(relay, dst);
            for other in data.host_ids() {
                if &other == src || &other == dst {
                    continue;
                }
                let alt = routes_len(src, &other) + routes_len(&other, dst);
                assert!(chosen <= alt, "{src}->{dst}: relay {relay} beaten by {other}");
            }
        }
    }
}
