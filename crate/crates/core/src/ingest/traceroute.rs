//! Line-oriented traceroute log format.
//!
//! ```text
//! # traceroute v1
//! T <unix_ts> <src_id> <dst_id> <hop_count>
//! H <ttl> <ip|*> <asn|?>
//! ```
//!
//! Every `T` header is followed by exactly `hop_count` `H` lines. `*` marks a
//! hop that did not respond, `?` an unknown ASN.

use std::io::BufRead;
use std::net::Ipv4Addr;

use super::{Asn, Hop, HopAddress, HostId, IngestError, TracerouteRecord};

pub const TRACEROUTE_HEADER: &str = "# traceroute v1";

pub fn parse_traceroute_file(input: impl BufRead) -> Result<Vec<TracerouteRecord>, IngestError> {
    let mut records = Vec::new();
    let mut saw_header = false;
    let mut pending: Option<PendingRecord> = None;

    for (idx, line) in input.lines().enumerate() {
        let lineno = idx + 1;
        let line = line?;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if line.starts_with('#') {
            if line == TRACEROUTE_HEADER {
                saw_header = true;
            }
            continue;
        }
        if !saw_header {
            return Err(IngestError::parse(
                lineno,
                format!("missing `{TRACEROUTE_HEADER}` header"),
            ));
        }

        let mut fields = line.split_ascii_whitespace();
        match fields.next() {
            Some("T") => {
                if let Some(p) = pending.take() {
                    return Err(IngestError::parse(
                        lineno,
                        format!(
                            "record {}->{} expects {} hops, got {}",
                            p.src,
                            p.dst,
                            p.expected,
                            p.hops.len()
                        ),
                    ));
                }
                let ts: i64 = next_field(&mut fields, lineno, "timestamp")?
                    .parse()
                    .map_err(|_| IngestError::parse(lineno, "bad timestamp"))?;
                let src: HostId = next_field(&mut fields, lineno, "src")?
                    .parse()
                    .map_err(|_| IngestError::parse(lineno, "bad src host id"))?;
                let dst: HostId = next_field(&mut fields, lineno, "dst")?
                    .parse()
                    .map_err(|_| IngestError::parse(lineno, "bad dst host id"))?;
                let expected: usize = next_field(&mut fields, lineno, "hop count")?
                    .parse()
                    .map_err(|_| IngestError::parse(lineno, "bad hop count"))?;
                if expected == 0 {
                    return Err(IngestError::validation(lineno, "hop count must be >= 1"));
                }
                reject_trailing(&mut fields, lineno)?;
                pending = Some(PendingRecord {
                    line: lineno,
                    ts,
                    src,
                    dst,
                    expected,
                    hops: Vec::with_capacity(expected),
                });
            }
            Some("H") => {
                let p = pending
                    .as_mut()
                    .ok_or_else(|| IngestError::parse(lineno, "hop line outside a record"))?;
                let ttl: u32 = next_field(&mut fields, lineno, "ttl")?
                    .parse()
                    .map_err(|_| IngestError::parse(lineno, "bad ttl"))?;
                let addr = next_field(&mut fields, lineno, "address")?;
                let address = if addr == "*" {
                    HopAddress::Unresponsive
                } else {
                    HopAddress::Ip(
                        addr.parse::<Ipv4Addr>()
                            .map_err(|_| IngestError::parse(lineno, "bad IPv4 address"))?,
                    )
                };
                let asn_field = next_field(&mut fields, lineno, "asn")?;
                let asn = if asn_field == "?" {
                    None
                } else {
                    let raw: u32 = asn_field
                        .parse()
                        .map_err(|_| IngestError::parse(lineno, "bad asn"))?;
                    Some(
                        Asn::new(raw)
                            .ok_or_else(|| IngestError::parse(lineno, "asn must be positive"))?,
                    )
                };
                reject_trailing(&mut fields, lineno)?;
                let expected_ttl = p.hops.len() as u32 + 1;
                if ttl != expected_ttl {
                    return Err(IngestError::validation(
                        lineno,
                        format!("ttl {ttl} out of order (want {expected_ttl})"),
                    ));
                }
                if address == HopAddress::Unresponsive && asn.is_some() {
                    return Err(IngestError::validation(
                        lineno,
                        "unresponsive hop cannot carry an ASN",
                    ));
                }
                p.hops.push(Hop { ttl, address, asn });
                if p.hops.len() == p.expected {
                    let p = pending.take().expect("just checked");
                    let record = TracerouteRecord::new(p.ts, p.src, p.dst, p.hops)
                        .map_err(|e| relabel(e, p.line))?;
                    records.push(record);
                }
            }
            Some(other) => {
                return Err(IngestError::parse(
                    lineno,
                    format!("unknown line tag {other:?}"),
                ));
            }
            None => unreachable!("empty lines are skipped"),
        }
    }

    if let Some(p) = pending {
        return Err(IngestError::parse(
            p.line,
            format!(
                "record {}->{} expects {} hops, file ended after {}",
                p.src,
                p.dst,
                p.expected,
                p.hops.len()
            ),
        ));
    }
    Ok(records)
}

/// Canonical text form: header, then one `T` line plus `H` lines per record,
/// in record order, single-space separated.
pub fn serialize_traceroutes(records: &[TracerouteRecord]) -> String {
    let mut out = String::new();
    out.push_str(TRACEROUTE_HEADER);
    out.push('\n');
    for r in records {
        out.push_str(&format!(
            "T {} {} {} {}\n",
            r.timestamp(),
            r.src(),
            r.dst(),
            r.hops().len()
        ));
        for hop in r.hops() {
            out.push_str(&format!("H {} {} ", hop.ttl, hop.address));
            match hop.asn {
                Some(asn) => out.push_str(&asn.to_string()),
                None => out.push('?'),
            }
            out.push('\n');
        }
    }
    out
}

struct PendingRecord {
    line: usize,
    ts: i64,
    src: HostId,
    dst: HostId,
    expected: usize,
    hops: Vec<Hop>,
}

fn next_field<'a>(
    fields: &mut impl Iterator<Item = &'a str>,
    lineno: usize,
    what: &str,
) -> Result<&'a str, IngestError> {
    fields
        .next()
        .ok_or_else(|| IngestError::parse(lineno, format!("missing {what} field")))
}

fn reject_trailing<'a>(
    fields: &mut impl Iterator<Item = &'a str>,
    lineno: usize,
) -> Result<(), IngestError> {
    match fields.next() {
        Some(extra) => Err(IngestError::parse(
            lineno,
            format!("unexpected trailing field {extra:?}"),
        )),
        None => Ok(()),
    }
}

fn relabel(err: IngestError, line: usize) -> IngestError {
    match err {
        IngestError::Validation { reason, .. } => IngestError::Validation { line, reason },
        IngestError::Parse { reason, .. } => IngestError::Parse { line, reason },
        other => other,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Cursor;

    fn parse(text: &str) -> Result<Vec<TracerouteRecord>, IngestError> {
        parse_traceroute_file(Cursor::new(text))
    }

    #[test]
    fn one_record_two_hops() {
        let text = "# traceroute v1\nT 1000 A B 2\nH 1 10.0.0.1 100\nH 2 10.0.0.2 200\n";
        let records = parse(text).unwrap();
        assert_eq!(records.len(), 1);
        let r = &records[0];
        assert_eq!(r.timestamp(), 1000);
        assert_eq!(r.src().as_str(), "A");
        assert_eq!(r.dst().as_str(), "B");
        assert_eq!(r.hops().len(), 2);
        assert_eq!(r.hops()[1].asn.map(|a| a.get()), Some(200));
    }

    #[test]
    fn empty_file_is_empty_list() {
        assert!(parse("").unwrap().is_empty());
        assert!(parse("\n\n").unwrap().is_empty());
    }

    #[test]
    fn out_of_order_ttl_is_validation_error() {
        let text = "# traceroute v1\nT 1000 A B 2\nH 2 10.0.0.2 200\nH 1 10.0.0.1 100\n";
        match parse(text) {
            Err(IngestError::Validation { line, .. }) => assert_eq!(line, 3),
            other => panic!("expected validation error, got {other:?}"),
        }
    }

    #[test]
    fn unresponsive_and_unknown_markers_survive() {
        let text = "# traceroute v1\nT 5 A B 3\nH 1 10.0.0.1 ?\nH 2 * ?\nH 3 10.0.0.3 7018\n";
        let records = parse(text).unwrap();
        let hops = records[0].hops();
        assert_eq!(hops[0].asn, None);
        assert_eq!(hops[1].address, HopAddress::Unresponsive);
        assert_eq!(hops[2].asn.map(|a| a.get()), Some(7018));
    }

    #[test]
    fn missing_header_is_rejected() {
        let text = "T 1000 A B 1\nH 1 10.0.0.1 ?\n";
        assert!(matches!(parse(text), Err(IngestError::Parse { line: 1, .. })));
    }

    #[test]
    fn truncated_record_is_rejected() {
        let text = "# traceroute v1\nT 1000 A B 2\nH 1 10.0.0.1 ?\n";
        assert!(parse(text).is_err());
    }

    #[test]
    fn parse_error_carries_line_number() {
        let text = "# traceroute v1\nT 1000 A B 1\nH 1 10.0.0.300 ?\n";
        match parse(text) {
            Err(IngestError::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn round_trip_canonical_form() {
        let text = "# traceroute v1\nT 1000 A B 2\nH 1 10.0.0.1 100\nH 2 * ?\n";
        let records = parse(text).unwrap();
        assert_eq!(serialize_traceroutes(&records), text);
    }

    #[test]
    fn comments_and_blank_lines_are_stripped() {
        let text = "# traceroute v1\n\n# collected 2007-09-05\nT 1 A B 1\n# mid-record note\nH 1 10.0.0.1 ?\n";
        let records = parse(text).unwrap();
        assert_eq!(records.len(), 1);
        let canonical = serialize_traceroutes(&records);
        assert_eq!(canonical, "# traceroute v1\nT 1 A B 1\nH 1 10.0.0.1 ?\n");
    }
}
