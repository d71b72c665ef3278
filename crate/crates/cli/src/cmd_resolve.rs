//! `overlay-scout resolve`: bulk IP-to-ASN lookup against a whois-style TCP
//! service. Prints `ip,asn` CSV to stdout; unresolved IPs report `NA`.

use std::fs;
use std::net::Ipv4Addr;
use std::path::PathBuf;

use anyhow::Context;
use clap::Args;
use overlay_scout_core::ingest::bulk_resolve;

#[derive(Args)]
pub struct ResolveArgs {
    /// Bulk whois service endpoint, `host:port`.
    #[arg(long)]
    server: String,

    /// File with one IPv4 address per line; `#` comments allowed.
    #[arg(long)]
    ips: PathBuf,
}

pub fn run(args: ResolveArgs) -> anyhow::Result<()> {
    let text = fs::read_to_string(&args.ips)
        .with_context(|| format!("read ip list {}", args.ips.display()))?;
    let mut ips: Vec<Ipv4Addr> = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let ip = line
            .parse()
            .with_context(|| format!("line {}: bad IPv4 address {line:?}", idx + 1))?;
        ips.push(ip);
    }

    let results = bulk_resolve(&args.server, &ips)
        .with_context(|| format!("bulk resolve against {}", args.server))?;
    let mut stdout = String::from("ip,asn\n");
    for (ip, asn) in results {
        match asn {
            Some(asn) => stdout.push_str(&format!("{ip},{asn}\n")),
            None => stdout.push_str(&format!("{ip},NA\n")),
        }
    }
    print!("{stdout}");
    Ok(())
}
