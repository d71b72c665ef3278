//! `overlay-scout analyze`: ingest -> analysis -> CSV/JSON report emission.
//!
//! Each selected analysis yields one CSV in the output directory; a
//! summary.json carries the headline numbers and manifest.json records the
//! run. Nothing is written unless every selected analysis succeeds.

use std::collections::BTreeSet;
use std::fs::File;
use std::io::BufReader;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use clap::{Args, ValueEnum};
use overlay_scout_core::anomaly::{
    best_alternate_summary, detect_all, rank_all, top_set_frequencies, AnomalyConfig,
    AnomalyError, RelayRanking, FAILURE_K, OUTAGE_K,
};
use overlay_scout_core::diversity::{
    as_disjoint_report, border_disjoint_report, degree_distribution, ip_disjoint_report,
    one_hop_path, pair_divergence,
};
use overlay_scout_core::graph::{
    as_adjacency, as_level_graph, build_ip_graph, latest_paths, path_length_stats,
};
use overlay_scout_core::ingest::{
    hosts_of, index_series, load_prefix_table, parse_delay_file, parse_traceroute_file,
    PrefixTable,
};
use overlay_scout_core::HostId;

use crate::manifest::RunManifest;
use crate::output::{opt_cell, OutputSet};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Preset {
    /// Performance failures: k = 3.
    Failure,
    /// Path outages: k = 10.
    Outage,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, ValueEnum)]
enum Analysis {
    Divergence,
    Disjoint,
    Anomalies,
    Rank,
    Topset,
    Degrees,
    Lengths,
    Cdf,
}

const ALL_ANALYSES: [Analysis; 8] = [
    Analysis::Divergence,
    Analysis::Disjoint,
    Analysis::Anomalies,
    Analysis::Rank,
    Analysis::Topset,
    Analysis::Degrees,
    Analysis::Lengths,
    Analysis::Cdf,
];

#[derive(Args)]
pub struct AnalyzeArgs {
    /// Traceroute log in the canonical line format.
    #[arg(long)]
    traceroutes: PathBuf,

    /// Delay CSV (`epoch,src,dst,delay_ms`).
    #[arg(long)]
    delays: PathBuf,

    /// CIDR-to-ASN table. When absent, the mapping is derived from ASN
    /// annotations on the traceroute hops.
    #[arg(long)]
    prefixes: Option<PathBuf>,

    /// Degradation threshold multiplier on the rolling sigma.
    #[arg(long, default_value_t = FAILURE_K)]
    k: f64,

    /// Named k preset; overrides --k.
    #[arg(long, value_enum)]
    preset: Option<Preset>,

    /// Rolling window length in epochs.
    #[arg(long, default_value_t = 60)]
    window: usize,

    /// Size of the relay top set.
    #[arg(long = "topset-size", default_value_t = 5)]
    topset_size: usize,

    /// Epoch length in seconds of the delay file.
    #[arg(long, default_value_t = 60)]
    epoch_len: u32,

    /// Comma-separated analysis selection; defaults to all of them.
    #[arg(long = "do", value_enum, value_delimiter = ',')]
    analyses: Vec<Analysis>,

    /// Directory receiving the reports.
    #[arg(long)]
    out_dir: PathBuf,
}

pub fn run(args: AnalyzeArgs) -> anyhow::Result<()> {
    let k = match args.preset {
        Some(Preset::Failure) => FAILURE_K,
        Some(Preset::Outage) => OUTAGE_K,
        None => args.k,
    };
    let config = AnomalyConfig::new(k, args.window, args.topset_size)?;
    let selected: BTreeSet<Analysis> = if args.analyses.is_empty() {
        ALL_ANALYSES.into_iter().collect()
    } else {
        args.analyses.iter().copied().collect()
    };
    let threads = crate::thread_cap()?;

    let records = parse_traceroute_file(open(&args.traceroutes)?)
        .with_context(|| format!("parse {}", args.traceroutes.display()))?;
    let series = parse_delay_file(open(&args.delays)?, args.epoch_len)
        .with_context(|| format!("parse {}", args.delays.display()))?;
    let table = match &args.prefixes {
        Some(path) => {
            load_prefix_table(open(path)?).with_context(|| format!("parse {}", path.display()))?
        }
        None => PrefixTable::from_hop_annotations(&records),
    };

    let series_map = index_series(series)?;
    let mut hosts: Vec<HostId> = hosts_of(&series_map);
    for record in &records {
        hosts.push(record.src().clone());
        hosts.push(record.dst().clone());
    }
    hosts.sort();
    hosts.dedup();

    let graph = build_ip_graph(&records);
    let latest = latest_paths(&records);

    let mut out = OutputSet::new(&args.out_dir);
    let mut summary = serde_json::Map::new();
    summary.insert("hosts".into(), hosts.len().into());
    summary.insert("delay_pairs".into(), series_map.len().into());
    summary.insert("traceroute_pairs".into(), latest.len().into());
    summary.insert("k".into(), k.into());

    if selected.contains(&Analysis::Lengths) {
        let stats = path_length_stats(&records, &table);
        let mut csv = String::from("src,dst,ip_hops,as_hops,hops_per_as\n");
        for ((src, dst), entry) in &stats.per_pair {
            csv.push_str(&format!(
                "{src},{dst},{},{},{}\n",
                entry.ip_hops,
                entry.as_hops,
                opt_cell(entry.hops_per_as())
            ));
        }
        out.add("lengths.csv", csv);
        if let Some(mean) = stats.mean_hops_per_as() {
            summary.insert("mean_hops_per_as".into(), mean.into());
        }
    }

    if selected.contains(&Analysis::Divergence) {
        let mut csv = String::from("src,dst,relay,ip_div,as_div\n");
        for ((src, dst), direct) in &latest {
            for relay in &hosts {
                if relay == src || relay == dst {
                    continue;
                }
                let Ok(overlay) = one_hop_path(src, relay, dst, &latest) else {
                    continue;
                };
                let result = pair_divergence(direct, &overlay, &table);
                csv.push_str(&format!(
                    "{src},{dst},{relay},{},{}\n",
                    opt_cell(result.ip_divergence_hop),
                    opt_cell(result.as_divergence_hop)
                ));
            }
        }
        out.add("divergence.csv", csv);
    }

    if selected.contains(&Analysis::Disjoint) {
        let as_graph = as_level_graph(&graph, &table);
        let mut csv = String::from("src,dst,level,mode,count\n");
        let mut skipped = 0usize;
        for src in &hosts {
            for dst in &hosts {
                if src == dst {
                    continue;
                }
                let reports = [
                    as_disjoint_report(&as_graph, src, dst),
                    ip_disjoint_report(&graph, src, dst),
                    border_disjoint_report(&graph, &records, src, dst, &table),
                ];
                for report in reports {
                    match report {
                        Ok(r) => csv.push_str(&format!(
                            "{src},{dst},{},{},{}\n",
                            r.level.as_str(),
                            r.mode.as_str(),
                            r.count
                        )),
                        Err(_) => skipped += 1,
                    }
                }
            }
        }
        out.add("disjoint.csv", csv);
        summary.insert("disjoint_reports_skipped".into(), skipped.into());
    }

    let need_events = [Analysis::Anomalies, Analysis::Rank, Analysis::Topset]
        .iter()
        .any(|a| selected.contains(a));
    let events = need_events.then(|| detect_all(&series_map, &config, threads));
    if let Some(events) = &events {
        summary.insert("events".into(), events.len().into());
    }

    if selected.contains(&Analysis::Anomalies) {
        let events = events.as_ref().expect("computed above");
        let mut csv = String::from("epoch,src,dst,observed,mean,sigma,k\n");
        for e in events {
            csv.push_str(&format!(
                "{},{},{},{},{},{},{}\n",
                e.epoch, e.src, e.dst, e.observed, e.window_mean, e.window_sigma, e.k_used
            ));
        }
        out.add("anomalies.csv", csv);
    }

    let need_rankings = [Analysis::Rank, Analysis::Topset]
        .iter()
        .any(|a| selected.contains(a));
    let rankings: Option<Vec<RelayRanking>> = need_rankings.then(|| {
        rank_all(events.as_ref().expect("computed above"), &series_map, &hosts)
    });

    if selected.contains(&Analysis::Rank) {
        let rankings = rankings.as_ref().expect("computed above");
        let mut csv = String::from("epoch,src,dst,rank,relay,gain\n");
        for ranking in rankings {
            let e = &ranking.event;
            for (idx, (relay, gain)) in ranking.ranked.iter().enumerate() {
                csv.push_str(&format!(
                    "{},{},{},{},{relay},{gain}\n",
                    e.epoch,
                    e.src,
                    e.dst,
                    idx + 1
                ));
            }
        }
        out.add("rankings.csv", csv);
    }

    if selected.contains(&Analysis::Topset) {
        let rankings = rankings.as_ref().expect("computed above");
        let stats = match top_set_frequencies(rankings, config.top_set_size, &hosts) {
            Ok(stats) => stats,
            Err(AnomalyError::NoEvents) => bail!(
                "top-set analysis requested but no degradation event has {} eligible relays",
                config.top_set_size
            ),
            Err(other) => return Err(other.into()),
        };
        let mut csv = String::from("z,host,f,F\n");
        for (z, entry) in stats.ranked.iter().enumerate() {
            csv.push_str(&format!(
                "{z},{},{},{}\n",
                entry.host, entry.frequency, entry.cumulative
            ));
        }
        out.add("topset.csv", csv);
        summary.insert("events_counted".into(), stats.events_counted.into());
        summary.insert("f0".into(), stats.ranked[0].frequency.into());
        if let Some(n) = stats.hosts_needed_for(0.5) {
            summary.insert("hosts_for_half".into(), n.into());
        }
    }

    if selected.contains(&Analysis::Degrees) {
        let dist = degree_distribution(&as_adjacency(&graph, &table));
        let mut csv = String::from("rank,asn,degree\n");
        for entry in &dist.entries {
            csv.push_str(&format!("{},{},{}\n", entry.rank, entry.asn, entry.degree));
        }
        out.add("degrees.csv", csv);
        summary.insert("ases".into(), dist.entries.len().into());
        if let Some(exp) = dist.fitted_exponent {
            summary.insert("fitted_exponent".into(), exp.into());
        }
    }

    if selected.contains(&Analysis::Cdf) {
        let alt = best_alternate_summary(&series_map, &hosts);
        let mut csv = String::from("src,dst,difference,cum_fraction\n");
        for (pair, point) in alt.pairs.iter().zip(&alt.cdf) {
            csv.push_str(&format!(
                "{},{},{},{}\n",
                pair.src, pair.dst, pair.difference, point.fraction
            ));
        }
        out.add("cdf.csv", csv);
        if let Some(fraction) = alt.fraction_at_or_below_zero() {
            summary.insert("fraction_without_better_alternate".into(), fraction.into());
        }
    }

    let mut summary_text = serde_json::to_string_pretty(&serde_json::Value::Object(summary))
        .expect("summary serializes");
    summary_text.push('\n');
    out.add("summary.json", summary_text);

    let mut manifest = RunManifest::new("analyze");
    manifest.input("traceroutes", &args.traceroutes);
    manifest.input("delays", &args.delays);
    if let Some(p) = &args.prefixes {
        manifest.input("prefixes", p);
    }
    manifest.set("k", k);
    manifest.set("window", args.window);
    manifest.set("topset_size", args.topset_size);
    manifest.set("epoch_len", args.epoch_len);
    manifest.set(
        "do",
        selected
            .iter()
            .map(|a| format!("{a:?}").to_lowercase())
            .collect::<Vec<_>>(),
    );
    manifest.outputs = out.names();
    out.add("manifest.json", manifest.render());

    out.write()
}

fn open(path: &Path) -> anyhow::Result<BufReader<File>> {
    Ok(BufReader::new(File::open(path).with_context(|| {
        format!("open {}", path.display())
    })?))
}
