//! Rank-degree distributions of the AS adjacency and their power-law fit.
//!
//! In a power-law network the degree of a node is proportional to its rank
//! (position in the descending degree order) raised to a constant exponent;
//! measured Internet AS graphs sit near -0.8.

use std::collections::{BTreeMap, BTreeSet};

use crate::ingest::Asn;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DegreeEntry {
    /// 1-based position in the descending degree order.
    pub rank: usize,
    pub asn: Asn,
    pub degree: usize,
}

/// AS degrees sorted descending, plus the least-squares slope of
/// log degree against log rank.
#[derive(Debug, Clone, PartialEq)]
pub struct DegreeDistribution {
    pub entries: Vec<DegreeEntry>,
    pub fitted_exponent: Option<f64>,
}

/// Degree distribution of an undirected AS adjacency set. Ties in the
/// degree sort break by ascending ASN to keep output deterministic.
pub fn degree_distribution(as_edges: &BTreeSet<(Asn, Asn)>) -> DegreeDistribution {
    let mut neighbors: BTreeMap<Asn, BTreeSet<Asn>> = BTreeMap::new();
    for &(a, b) in as_edges {
        if a == b {
            continue;
        }
        neighbors.entry(a).or_default().insert(b);
        neighbors.entry(b).or_default().insert(a);
    }
    let degrees: Vec<(Asn, usize)> = neighbors
        .into_iter()
        .map(|(asn, n)| (asn, n.len()))
        .collect();
    rank_and_fit(degrees)
}

/// Ranks a raw (asn, degree) list and fits the power-law exponent.
/// Zero-degree nodes keep their rank slot but are excluded from the fit;
/// the fit needs at least two positive-degree nodes.
pub fn rank_and_fit(mut degrees: Vec<(Asn, usize)>) -> DegreeDistribution {
    degrees.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
    let entries: Vec<DegreeEntry> = degrees
        .into_iter()
        .enumerate()
        .map(|(i, (asn, degree))| DegreeEntry {
            rank: i + 1,
            asn,
            degree,
        })
        .collect();

    let points: Vec<(f64, f64)> = entries
        .iter()
        .filter(|e| e.degree > 0)
        .map(|e| ((e.rank as f64).ln(), (e.degree as f64).ln()))
        .collect();
    let fitted_exponent = ols_slope(&points);
    DegreeDistribution {
        entries,
        fitted_exponent,
    }
}

/// Ordinary least squares slope of y on x; `None` below two points.
fn ols_slope(points: &[(f64, f64)]) -> Option<f64> {
    if points.len() < 2 {
        return None;
    }
    let n = points.len() as f64;
    let mean_x = points.iter().map(|p| p.0).sum::<f64>() / n;
    let mean_y = points.iter().map(|p| p.1).sum::<f64>() / n;
    let mut num = 0.0;
    let mut den = 0.0;
    for &(x, y) in points {
        num += (x - mean_x) * (y - mean_y);
        den += (x - mean_x) * (x - mean_x);
    }
    if den == 0.0 {
        return None;
    }
    Some(num / den)
}
