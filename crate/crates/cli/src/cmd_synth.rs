//! `overlay-scout synth`: seeded generation of traceroutes.txt, delays.csv,
//! truth.csv, and manifest.json.

use std::path::PathBuf;

use anyhow::Context;
use clap::Args;
use overlay_scout_core::synth::{generate, ScheduledAnomaly, SynthConfig};
use overlay_scout_core::HostId;

use crate::manifest::RunManifest;
use crate::output::OutputSet;

#[derive(Args)]
pub struct SynthArgs {
    /// Number of autonomous systems in the topology.
    #[arg(long, default_value_t = 50)]
    ases: usize,

    /// Power-law rank-degree exponent (must be negative).
    #[arg(long, default_value_t = -0.8, allow_hyphen_values = true)]
    exponent: f64,

    /// Number of overlay hosts.
    #[arg(long, default_value_t = 10)]
    hosts: usize,

    /// Number of delay epochs to simulate.
    #[arg(long, default_value_t = 180)]
    epochs: usize,

    /// Epoch length in seconds.
    #[arg(long, default_value_t = 60)]
    epoch_len: u32,

    /// Routers per AS as an inclusive range `lo:hi`.
    #[arg(long, default_value = "2:3", value_parser = parse_router_range)]
    routers: (usize, usize),

    /// Base delay in ms contributed by each IP hop.
    #[arg(long, default_value_t = 10.0)]
    base_delay: f64,

    /// Uniform noise amplitude in ms.
    #[arg(long, default_value_t = 0.0)]
    noise: f64,

    /// Scheduled degradation `epoch:src:dst:added_ms`; repeatable.
    #[arg(long = "anomaly", value_parser = parse_anomaly)]
    anomalies: Vec<ScheduledAnomaly>,

    /// RNG seed; fixed seeds give byte-identical outputs.
    #[arg(long, default_value_t = 0)]
    seed: u64,

    /// Directory receiving the generated files.
    #[arg(long)]
    out_dir: PathBuf,
}

pub fn run(args: SynthArgs) -> anyhow::Result<()> {
    let config = SynthConfig {
        n_ases: args.ases,
        exponent: args.exponent,
        hosts: args.hosts,
        routers_per_as: args.routers.0..=args.routers.1,
        epochs: args.epochs,
        epoch_len: args.epoch_len,
        base_delay_per_hop: args.base_delay,
        noise: args.noise,
        anomaly_schedule: args.anomalies.clone(),
        seed: args.seed,
    };
    let data = generate(&config).context("generate synthetic measurements")?;

    let mut out = OutputSet::new(&args.out_dir);
    out.add("traceroutes.txt", data.traceroute_file());
    out.add("delays.csv", data.delay_file());
    out.add("truth.csv", data.truth_file());

    let mut manifest = RunManifest::new("synth");
    manifest.set("ases", args.ases);
    manifest.set("exponent", args.exponent);
    manifest.set("hosts", args.hosts);
    manifest.set("epochs", args.epochs);
    manifest.set("epoch_len", args.epoch_len);
    manifest.set("routers", format!("{}:{}", args.routers.0, args.routers.1));
    manifest.set("base_delay", args.base_delay);
    manifest.set("noise", args.noise);
    manifest.set(
        "anomalies",
        args.anomalies
            .iter()
            .map(|a| format!("{}:{}:{}:{}", a.epoch, a.src, a.dst, a.added_delay_ms))
            .collect::<Vec<_>>(),
    );
    manifest.set("seed", args.seed);
    if !data.topology.adjustments.is_empty() {
        manifest.set("topology_adjustments", &data.topology.adjustments);
    }
    manifest.outputs = out.names();
    out.add("manifest.json", manifest.render());

    out.write()
}

fn parse_router_range(raw: &str) -> Result<(usize, usize), String> {
    let (lo, hi) = raw
        .split_once(':')
        .ok_or_else(|| format!("expected `lo:hi`, got {raw:?}"))?;
    let lo: usize = lo.parse().map_err(|_| format!("bad lower bound in {raw:?}"))?;
    let hi: usize = hi.parse().map_err(|_| format!("bad upper bound in {raw:?}"))?;
    if lo == 0 || lo > hi {
        return Err(format!("range {lo}:{hi} is empty or starts at zero"));
    }
    Ok((lo, hi))
}

fn parse_anomaly(raw: &str) -> Result<ScheduledAnomaly, String> {
    let parts: Vec<&str> = raw.split(':').collect();
    let [epoch, src, dst, added] = parts.as_slice() else {
        return Err(format!("expected `epoch:src:dst:added_ms`, got {raw:?}"));
    };
    let epoch: i64 = epoch.parse().map_err(|_| format!("bad epoch in {raw:?}"))?;
    let src: HostId = src.parse().map_err(|_| format!("bad src host in {raw:?}"))?;
    let dst: HostId = dst.parse().map_err(|_| format!("bad dst host in {raw:?}"))?;
    let added_delay_ms: f64 = added.parse().map_err(|_| format!("bad delay in {raw:?}"))?;
    if !added_delay_ms.is_finite() || added_delay_ms <= 0.0 {
        return Err(format!("added delay must be positive in {raw:?}"));
    }
    Ok(ScheduledAnomaly {
        epoch,
        src,
        dst,
        added_delay_ms,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn router_range_parsing() {
        assert_eq!(parse_router_range("2:3").unwrap(), (2, 3));
        assert_eq!(parse_router_range("4:4").unwrap(), (4, 4));
        assert!(parse_router_range("3:2").is_err());
        assert!(parse_router_range("0:2").is_err());
        assert!(parse_router_range("2").is_err());
    }

    #[test]
    fn anomaly_parsing() {
        let a = parse_anomaly("100:h01:h02:500").unwrap();
        assert_eq!(a.epoch, 100);
        assert_eq!(a.src.as_str(), "h01");
        assert_eq!(a.added_delay_ms, 500.0);
        assert!(parse_anomaly("100:h01:h02").is_err());
        assert!(parse_anomaly("100:h01:h02:-5").is_err());
    }
}
