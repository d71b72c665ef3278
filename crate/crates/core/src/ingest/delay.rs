//! Delay CSV format: header `epoch,src,dst,delay_ms`, one row per present
//! measurement. Missing measurements are absent rows; parsing fills them in
//! as `None` slots between the first and last epoch seen for each pair.

use std::collections::BTreeMap;
use std::io::BufRead;

use super::{DelaySeries, HostId, IngestError};

/// Default epoch length in seconds (one measurement per minute).
pub const DEFAULT_EPOCH_LEN: u32 = 60;

pub fn parse_delay_file(
    input: impl BufRead,
    epoch_len: u32,
) -> Result<Vec<DelaySeries>, IngestError> {
    let mut rows: BTreeMap<(HostId, HostId), BTreeMap<i64, f64>> = BTreeMap::new();
    let mut saw_header = false;

    for (idx, line) in input.lines().enumerate() {
        let lineno = idx + 1;
        let line = line?;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if !saw_header {
            if line != "epoch,src,dst,delay_ms" {
                return Err(IngestError::parse(
                    lineno,
                    "missing `epoch,src,dst,delay_ms` header",
                ));
            }
            saw_header = true;
            continue;
        }

        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 4 {
            return Err(IngestError::parse(
                lineno,
                format!("expected 4 fields, got {}", fields.len()),
            ));
        }
        let epoch: i64 = fields[0]
            .trim()
            .parse()
            .map_err(|_| IngestError::parse(lineno, "bad epoch"))?;
        let src: HostId = fields[1]
            .trim()
            .parse()
            .map_err(|_| IngestError::parse(lineno, "bad src host id"))?;
        let dst: HostId = fields[2]
            .trim()
            .parse()
            .map_err(|_| IngestError::parse(lineno, "bad dst host id"))?;
        let delay: f64 = fields[3]
            .trim()
            .parse()
            .map_err(|_| IngestError::parse(lineno, "bad delay"))?;
        if !delay.is_finite() {
            return Err(IngestError::parse(lineno, "delay must be finite"));
        }
        if delay < 0.0 {
            return Err(IngestError::validation(lineno, "negative delay"));
        }
        if src == dst {
            return Err(IngestError::validation(lineno, "src and dst must differ"));
        }
        let pair = rows.entry((src, dst)).or_default();
        if pair.insert(epoch, delay).is_some() {
            return Err(IngestError::validation(
                lineno,
                format!("duplicate row for epoch {epoch}"),
            ));
        }
    }

    let mut series = Vec::with_capacity(rows.len());
    for ((src, dst), by_epoch) in rows {
        let (&first, _) = by_epoch.iter().next().expect("non-empty by construction");
        let (&last, _) = by_epoch.iter().next_back().expect("non-empty");
        let mut values = vec![None; (last - first + 1) as usize];
        for (epoch, delay) in by_epoch {
            values[(epoch - first) as usize] = Some(delay);
        }
        series.push(DelaySeries::new(src, dst, epoch_len, first, values)?);
    }
    Ok(series)
}

/// Canonical CSV: header, then present rows sorted by (src, dst, epoch).
/// Delays are printed with the shortest representation that parses back to
/// the same value.
pub fn serialize_delays(series: &[DelaySeries]) -> String {
    let mut sorted: Vec<&DelaySeries> = series.iter().collect();
    sorted.sort_by(|a, b| (a.src(), a.dst()).cmp(&(b.src(), b.dst())));
    let mut out = String::from("epoch,src,dst,delay_ms\n");
    for s in sorted {
        for (epoch, delay) in s.present_epochs() {
            out.push_str(&format!("{},{},{},{}\n", epoch, s.src(), s.dst(), delay));
        }
    }
    out
}
