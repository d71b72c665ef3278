//! Cross-module checks: synthetic data flowing through ingest, graph, and
//! anomaly analyses.

use std::io::Cursor;

use overlay_scout_core::anomaly::{detect_anomalies, rolling_stats, AnomalyConfig};
use overlay_scout_core::graph::path_length_stats;
use overlay_scout_core::ingest::{
    parse_delay_file, parse_traceroute_file, HostId, PrefixTable,
};
use overlay_scout_core::synth::{generate, ScheduledAnomaly, SynthConfig};

fn host(s: &str) -> HostId {
    HostId::new(s).unwrap()
}

#[test]
fn synth_files_parse_back_through_ingest() {
    let cfg = SynthConfig {
        n_ases: 16,
        hosts: 5,
        epochs: 120,
        noise: 1.5,
        seed: 9,
        ..SynthConfig::default()
    };
    let data = generate(&cfg).unwrap();

    let records = parse_traceroute_file(Cursor::new(data.traceroute_file())).unwrap();
    assert_eq!(records, data.records);

    let series = parse_delay_file(Cursor::new(data.delay_file()), cfg.epoch_len).unwrap();
    assert_eq!(series.len(), 5 * 4, "one series per ordered host pair");
    for s in &series {
        assert_eq!(s.len(), cfg.epochs);
    }
}

#[test]
fn hops_per_as_matches_a_direct_recount() {
    // small mesh: four ASes, two to three routers each
    let cfg = SynthConfig {
        n_ases: 4,
        hosts: 4,
        epochs: 60,
        seed: 7,
        ..SynthConfig::default()
    };
    let data = generate(&cfg).unwrap();
    let table = PrefixTable::from_hop_annotations(&data.records);
    let stats = path_length_stats(&data.records, &table);

    // independent recount straight from the generated hop annotations
    let mut ratios = Vec::new();
    for ((src, dst), entry) in &stats.per_pair {
        let record = data
            .records
            .iter()
            .rev()
            .find(|r| r.src() == src && r.dst() == dst)
            .unwrap();
        let ip_hops = record.hops().len() + 1;
        let mut as_hops = 0usize;
        let mut last = None;
        for hop in record.hops() {
            let asn = hop.asn.expect("synth annotates every hop");
            if last != Some(asn) {
                as_hops += 1;
                last = Some(asn);
            }
        }
        assert_eq!(entry.ip_hops, ip_hops, "{src}->{dst}");
        assert_eq!(entry.as_hops, as_hops, "{src}->{dst}");
        ratios.push(ip_hops as f64 / as_hops as f64);
    }
    let mean = ratios.iter().sum::<f64>() / ratios.len() as f64;
    assert_eq!(stats.mean_hops_per_as(), Some(mean));
    assert!(
        (2.0..=3.0).contains(&mean),
        "mean hops per AS {mean} outside the expected band"
    );
}

#[test]
fn zero_noise_means_zero_sigma_and_guaranteed_detection() {
    let cfg = SynthConfig {
        n_ases: 10,
        hosts: 4,
        epochs: 150,
        noise: 0.0,
        anomaly_schedule: vec![ScheduledAnomaly {
            epoch: 90,
            src: host("h01"),
            dst: host("h03"),
            added_delay_ms: 0.5,
        }],
        seed: 4,
        ..SynthConfig::default()
    };
    let data = generate(&cfg).unwrap();

    for series in &data.series {
        let spiked = series.src() == &host("h01") && series.dst() == &host("h03");
        for (t, stats) in rolling_stats(series, 60).iter().enumerate() {
            if let Some(st) = stats {
                if !spiked || t <= 90 {
                    assert_eq!(st.sigma, 0.0, "sigma at slot {t} of a flat series");
                }
            }
        }
    }

    // even a tiny bump over a flat baseline trips an arbitrarily large k
    let map = data.series_map();
    let series = &map[&(host("h01"), host("h03"))];
    let events = detect_anomalies(series, &AnomalyConfig::new(1000.0, 60, 5).unwrap());
    assert_eq!(events.len(), 1);
    assert_eq!(events[0].epoch, 90);
}

#[test]
fn edge_list_export_is_stable_for_a_fixed_seed() {
    use overlay_scout_core::graph::{build_ip_graph, export_edge_list};
    let cfg = SynthConfig {
        n_ases: 4,
        hosts: 3,
        epochs: 20,
        seed: 1,
        ..SynthConfig::default()
    };
    let data = generate(&cfg).unwrap();
    let graph = build_ip_graph(&data.records);
    let golden = "\
10.0.1.1 10.0.1.2
10.0.1.2 10.0.2.1
10.0.1.2 10.0.3.1
10.0.1.2 10.0.4.1
10.0.2.1 10.0.2.2
10.0.2.2 10.0.2.3
10.0.2.3 10.0.1.1
10.0.2.3 10.0.3.1
10.0.2.3 h02
10.0.3.1 10.0.3.2
10.0.3.2 10.0.1.1
10.0.3.2 10.0.2.1
10.0.3.2 h03
10.0.4.1 10.0.4.2
10.0.4.2 10.0.1.1
10.0.4.2 h01
h01 10.0.4.1
h02 10.0.2.1
h03 10.0.3.1
";
    assert_eq!(export_edge_list(&graph), golden);
}

#[test]
fn traceroute_snapshots_cover_ten_minute_intervals() {
    let cfg = SynthConfig {
        n_ases: 8,
        hosts: 3,
        epochs: 60,
        epoch_len: 60,
        seed: 1,
        ..SynthConfig::default()
    };
    let data = generate(&cfg).unwrap();
    let mut timestamps: Vec<i64> = data.records.iter().map(|r| r.timestamp()).collect();
    timestamps.sort();
    timestamps.dedup();
    // 60 epochs x 60 s = 3600 s of data -> snapshots at 0, 600, ..., 3000
    assert_eq!(timestamps, vec![0, 600, 1200, 1800, 2400, 3000]);
}
