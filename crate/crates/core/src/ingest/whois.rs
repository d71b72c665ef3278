//! Bulk whois-style IP-to-ASN resolution over a plain TCP text protocol.
//!
//! The client sends `begin`, `verbose`, one IP per line, then `end`. The
//! server answers with pipe-delimited lines whose first field is the origin
//! ASN (or `NA`) and whose second field echoes the queried IP:
//!
//! ```text
//! 7018 | 12.0.0.1 | 12.0.0.0/8 | US | arin | 1984-01-01 | ATT
//! ```
//!
//! Banner lines without a `|` separator are skipped.

use std::collections::BTreeMap;
use std::io::{BufRead, BufReader, Write};
use std::net::{Ipv4Addr, TcpStream, ToSocketAddrs};
use std::time::Duration;

use thiserror::Error;

use super::Asn;

pub const DEFAULT_TIMEOUT: Duration = Duration::from_secs(10);

#[derive(Debug, Error)]
pub enum ResolveError {
    #[error("connect to {endpoint}: {source}")]
    Connect {
        endpoint: String,
        source: std::io::Error,
    },
    #[error("i/o during bulk exchange: {0}")]
    Io(#[from] std::io::Error),
    #[error("protocol violation: {0}")]
    Protocol(String),
    #[error("no response for {} ip(s): {missing:?}", missing.len())]
    Incomplete { missing: Vec<Ipv4Addr> },
}

/// Resolves a batch of IPs against a bulk whois service at `endpoint`
/// (`host:port`). Returns one `(ip, asn)` entry per requested ip, in request
/// order; ips the service reports as `NA` map to `None`. An empty request
/// resolves to an empty response without opening a connection.
pub fn bulk_resolve(
    endpoint: &str,
    ips: &[Ipv4Addr],
) -> Result<Vec<(Ipv4Addr, Option<Asn>)>, ResolveError> {
    bulk_resolve_with_timeout(endpoint, ips, DEFAULT_TIMEOUT)
}

pub fn bulk_resolve_with_timeout(
    endpoint: &str,
    ips: &[Ipv4Addr],
    timeout: Duration,
) -> Result<Vec<(Ipv4Addr, Option<Asn>)>, ResolveError> {
    if ips.is_empty() {
        return Ok(Vec::new());
    }

    let addrs: Vec<_> = endpoint
        .to_socket_addrs()
        .map_err(|source| ResolveError::Connect {
            endpoint: endpoint.to_string(),
            source,
        })?
        .collect();
    let mut stream = None;
    let mut last_err = std::io::Error::other("no socket address resolved");
    for addr in addrs {
        match TcpStream::connect_timeout(&addr, timeout) {
            Ok(s) => {
                stream = Some(s);
                break;
            }
            Err(e) => last_err = e,
        }
    }
    let mut stream = stream.ok_or_else(|| ResolveError::Connect {
        endpoint: endpoint.to_string(),
        source: last_err,
    })?;
    stream.set_read_timeout(Some(timeout))?;
    stream.set_write_timeout(Some(timeout))?;

    let mut request = String::from("begin\nverbose\n");
    for ip in ips {
        request.push_str(&ip.to_string());
        request.push('\n');
    }
    request.push_str("end\n");
    stream.write_all(request.as_bytes())?;
    stream.flush()?;

    let mut answers: BTreeMap<Ipv4Addr, Option<Asn>> = BTreeMap::new();
    let reader = BufReader::new(&stream);
    for line in reader.lines() {
        let line = line?;
        let line = line.trim();
        if line.is_empty() || !line.contains('|') {
            // banner or keepalive chatter
            continue;
        }
        let (ip, asn) = parse_response_line(line)?;
        answers.insert(ip, asn);
    }

    let missing: Vec<Ipv4Addr> = ips
        .iter()
        .filter(|ip| !answers.contains_key(ip))
        .copied()
        .collect();
    if !missing.is_empty() {
        return Err(ResolveError::Incomplete { missing });
    }
    Ok(ips.iter().map(|ip| (*ip, answers[ip])).collect())
}

fn parse_response_line(line: &str) -> Result<(Ipv4Addr, Option<Asn>), ResolveError> {
    let fields: Vec<&str> = line.split('|').map(str::trim).collect();
    if fields.len() < 2 {
        return Err(ResolveError::Protocol(format!(
            "expected at least 2 pipe-delimited fields in {line:?}"
        )));
    }
    let ip: Ipv4Addr = fields[1]
        .parse()
        .map_err(|_| ResolveError::Protocol(format!("bad ip field in {line:?}")))?;
    let asn = if fields[0].eq_ignore_ascii_case("na") {
        None
    } else {
        let raw: u32 = fields[0]
            .parse()
            .map_err(|_| ResolveError::Protocol(format!("bad asn field in {line:?}")))?;
        Some(
            Asn::new(raw)
                .ok_or_else(|| ResolveError::Protocol(format!("asn 0 in {line:?}")))?,
        )
    };
    Ok((ip, asn))
}
