//! CIDR prefix table with longest-prefix-match lookup.
//!
//! File format: one `<a.b.c.d>/<len>,<asn>` entry per line, `#` comments
//! allowed. Prefixes are stored canonically (host bits masked off).

use std::collections::BTreeMap;
use std::fmt;
use std::io::BufRead;
use std::net::Ipv4Addr;
use std::str::FromStr;

use super::{Asn, HostId, IngestError, TracerouteRecord};
use crate::ingest::HopAddress;

/// IPv4 prefix: network bits plus prefix length 0..=32.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Cidr {
    bits: u32,
    len: u8,
}

impl Cidr {
    pub fn new(addr: Ipv4Addr, len: u8) -> Option<Self> {
        if len > 32 {
            return None;
        }
        let bits = u32::from(addr) & mask(len);
        Some(Cidr { bits, len })
    }

    pub fn prefix_len(&self) -> u8 {
        self.len
    }

    pub fn network(&self) -> Ipv4Addr {
        Ipv4Addr::from(self.bits)
    }

    pub fn contains(&self, ip: Ipv4Addr) -> bool {
        u32::from(ip) & mask(self.len) == self.bits
    }
}

fn mask(len: u8) -> u32 {
    if len == 0 {
        0
    } else {
        u32::MAX << (32 - len)
    }
}

impl fmt::Display for Cidr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.network(), self.len)
    }
}

impl FromStr for Cidr {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (addr, len) = s
            .split_once('/')
            .ok_or_else(|| format!("missing '/' in cidr {s:?}"))?;
        let addr: Ipv4Addr = addr
            .parse()
            .map_err(|_| format!("bad network address in {s:?}"))?;
        let len: u8 = len
            .parse()
            .map_err(|_| format!("bad prefix length in {s:?}"))?;
        Cidr::new(addr, len).ok_or_else(|| format!("prefix length {len} out of range 0..=32"))
    }
}

/// CIDR prefix to ASN mapping with longest-prefix-match lookup.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PrefixTable {
    entries: BTreeMap<(u8, u32), Asn>,
}

impl PrefixTable {
    pub fn new() -> Self {
        Self::default()
    }

    /// Inserts an entry. Re-inserting the same (prefix, length) is an error.
    pub fn insert(&mut self, cidr: Cidr, asn: Asn) -> Result<(), IngestError> {
        if self.entries.insert((cidr.len, cidr.bits), asn).is_some() {
            return Err(IngestError::validation(
                0,
                format!("duplicate prefix {cidr}"),
            ));
        }
        Ok(())
    }

    /// ASN of the longest matching prefix, or `None` when nothing matches.
    pub fn lookup(&self, ip: Ipv4Addr) -> Option<Asn> {
        let bits = u32::from(ip);
        for len in (0..=32u8).rev() {
            if let Some(asn) = self.entries.get(&(len, bits & mask(len))) {
                return Some(*asn);
            }
        }
        None
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> impl Iterator<Item = (Cidr, Asn)> + '_ {
        self.entries
            .iter()
            .map(|(&(len, bits), &asn)| (Cidr { bits, len }, asn))
    }

    /// Builds a /32 table from ASN annotations carried on traceroute hops
    /// (the style of logs that report both IP and AS at each hop). Later
    /// records win when the same address is annotated twice.
    pub fn from_hop_annotations(records: &[TracerouteRecord]) -> Self {
        let mut entries = BTreeMap::new();
        for record in records {
            for hop in record.hops() {
                if let (HopAddress::Ip(ip), Some(asn)) = (hop.address, hop.asn) {
                    entries.insert((32u8, u32::from(ip)), asn);
                }
            }
        }
        PrefixTable { entries }
    }

    /// ASN of a host derived from the first hop of its latest record as a
    /// source. `None` when the host has no record, the first hop did not
    /// respond, or the hop does not map to any prefix.
    pub fn host_asn(&self, records: &[TracerouteRecord], host: &HostId) -> Option<Asn> {
        let latest = records
            .iter()
            .filter(|r| r.src() == host)
            .max_by_key(|r| r.timestamp())?;
        match latest.hops().first()?.address {
            HopAddress::Ip(ip) => self.lookup(ip),
            HopAddress::Unresponsive => None,
        }
    }
}

pub fn load_prefix_table(input: impl BufRead) -> Result<PrefixTable, IngestError> {
    let mut table = PrefixTable::new();
    for (idx, line) in input.lines().enumerate() {
        let lineno = idx + 1;
        let line = line?;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (cidr, asn) = line
            .split_once(',')
            .ok_or_else(|| IngestError::parse(lineno, "expected `<cidr>,<asn>`"))?;
        let cidr: Cidr = cidr
            .trim()
            .parse()
            .map_err(|e: String| IngestError::parse(lineno, e))?;
        let asn: i64 = asn
            .trim()
            .parse()
            .map_err(|_| IngestError::parse(lineno, "bad asn"))?;
        if asn <= 0 || asn > u32::MAX as i64 {
            return Err(IngestError::parse(lineno, format!("asn {asn} out of range")));
        }
        let asn = Asn::new(asn as u32).expect("checked positive");
        table
            .insert(cidr, asn)
            .map_err(|e| relabel_line(e, lineno))?;
    }
    Ok(table)
}

/// Canonical form: entries sorted by prefix length then network bits.
pub fn serialize_prefix_table(table: &PrefixTable) -> String {
    let mut out = String::new();
    for (cidr, asn) in table.entries() {
        out.push_str(&format!("{cidr},{asn}\n"));
    }
    out
}

fn relabel_line(err: IngestError, line: usize) -> IngestError {
    match err {
        IngestError::Validation { reason, .. } => IngestError::Validation { line, reason },
        other => other,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Cursor;

    fn load(text: &str) -> Result<PrefixTable, IngestError> {
        load_prefix_table(Cursor::new(text))
    }

    fn table(entries: &[(&str, u32)]) -> PrefixTable {
        let mut t = PrefixTable::new();
        for (cidr, asn) in entries {
            t.insert(cidr.parse().unwrap(), Asn::new(*asn).unwrap())
                .unwrap();
        }
        t
    }

    #[test]
    fn single_entry() {
        let t = load("10.0.0.0/8,100\n").unwrap();
        assert_eq!(t.len(), 1);
        assert_eq!(t.lookup("10.1.2.3".parse().unwrap()).map(|a| a.get()), Some(100));
    }

    #[test]
    fn comment_only_file_is_empty_table() {
        let t = load("# nothing here\n# really\n").unwrap();
        assert!(t.is_empty());
    }

    #[test]
    fn out_of_range_length_is_rejected() {
        assert!(matches!(load("10.0.0.0/33,5\n"), Err(IngestError::Parse { .. })));
    }

    #[test]
    fn non_positive_asn_is_rejected() {
        assert!(load("10.0.0.0/8,0\n").is_err());
        assert!(load("10.0.0.0/8,-3\n").is_err());
    }

    #[test]
    fn longest_prefix_wins() {
        let t = table(&[("10.0.0.0/8", 100), ("10.1.0.0/16", 200)]);
        assert_eq!(t.lookup("10.1.2.3".parse().unwrap()).map(|a| a.get()), Some(200));
        assert_eq!(t.lookup("10.2.0.1".parse().unwrap()).map(|a| a.get()), Some(100));
        assert_eq!(t.lookup("192.168.0.1".parse().unwrap()), None);
    }

    #[test]
    fn duplicate_prefix_is_rejected() {
        assert!(load("10.0.0.0/8,100\n10.0.0.0/8,200\n").is_err());
    }

    #[test]
    fn host_bits_are_masked() {
        let t = load("10.0.0.7/8,100\n").unwrap();
        let (cidr, _) = t.entries().next().unwrap();
        assert_eq!(cidr.to_string(), "10.0.0.0/8");
    }

    #[test]
    fn round_trip_canonical_form() {
        let t = table(&[("10.1.0.0/16", 200), ("10.0.0.0/8", 100), ("0.0.0.0/0", 1)]);
        let text = serialize_prefix_table(&t);
        assert_eq!(load(&text).unwrap(), t);
    }
}
