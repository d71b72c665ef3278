//! Delay degradation detection and relay ranking.
//!
//! A path is degraded at an epoch when its delay exceeds the mean of the
//! previous `window` epochs by `k` standard deviations. k around 3 captures
//! performance failures, k around 10 path outages. Detection and ranking are
//! pure per-pair computations; aggregation is a fold over immutable rankings.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::ingest::{DelaySeries, HostId, SeriesMap};

pub const DEFAULT_WINDOW: usize = 60;
pub const DEFAULT_TOP_SET_SIZE: usize = 5;
/// Threshold multiplier emulating performance failures.
pub const FAILURE_K: f64 = 3.0;
/// Threshold multiplier emulating path outages.
pub const OUTAGE_K: f64 = 10.0;

#[derive(Debug, Error)]
pub enum AnomalyError {
    #[error("threshold multiplier k must be positive, got {0}")]
    BadThreshold(f64),
    #[error("window must span at least 2 epochs, got {0}")]
    BadWindow(usize),
    #[error("top set size must be at least 1")]
    BadTopSetSize,
    #[error("direct delay must be positive, got {0}")]
    NonPositiveDirect(f64),
    #[error("no degradation events to aggregate")]
    NoEvents,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnomalyConfig {
    /// Threshold multiplier on the rolling standard deviation.
    pub k: f64,
    /// Number of preceding epochs the rolling statistics cover.
    pub window: usize,
    /// Size of the top set used in frequency aggregation.
    pub top_set_size: usize,
}

impl AnomalyConfig {
    pub fn new(k: f64, window: usize, top_set_size: usize) -> Result<Self, AnomalyError> {
        if !k.is_finite() || k <= 0.0 {
            return Err(AnomalyError::BadThreshold(k));
        }
        if window < 2 {
            return Err(AnomalyError::BadWindow(window));
        }
        if top_set_size < 1 {
            return Err(AnomalyError::BadTopSetSize);
        }
        Ok(AnomalyConfig {
            k,
            window,
            top_set_size,
        })
    }

    /// Performance-failure preset (k = 3).
    pub fn failure() -> Self {
        Self::default()
    }

    /// Path-outage preset (k = 10).
    pub fn outage() -> Self {
        AnomalyConfig {
            k: OUTAGE_K,
            ..Self::default()
        }
    }
}

impl Default for AnomalyConfig {
    fn default() -> Self {
        AnomalyConfig {
            k: FAILURE_K,
            window: DEFAULT_WINDOW,
            top_set_size: DEFAULT_TOP_SET_SIZE,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WindowStats {
    pub mean: f64,
    /// Population standard deviation (divide by n, not n-1).
    pub sigma: f64,
}

/// Rolling statistics per slot: for slot `t`, the mean and sigma of the
/// `window` slots before it. `None` when the window reaches out of range or
/// contains any missing measurement.
pub fn rolling_stats(series: &DelaySeries, window: usize) -> Vec<Option<WindowStats>> {
    let values = series.values();
    let n = values.len();
    let mut present = vec![0usize; n + 1];
    let mut sum = vec![0.0f64; n + 1];
    let mut sum_sq = vec![0.0f64; n + 1];
    for (i, v) in values.iter().enumerate() {
        let x = v.unwrap_or(0.0);
        present[i + 1] = present[i] + usize::from(v.is_some());
        sum[i + 1] = sum[i] + x;
        sum_sq[i + 1] = sum_sq[i] + x * x;
    }

    (0..n)
        .map(|t| {
            if t < window || present[t] - present[t - window] != window {
                return None;
            }
            let w = window as f64;
            let mean = (sum[t] - sum[t - window]) / w;
            let variance = ((sum_sq[t] - sum_sq[t - window]) / w - mean * mean).max(0.0);
            Some(WindowStats {
                mean,
                sigma: variance.sqrt(),
            })
        })
        .collect()
}

/// One flagged degradation: the observed delay exceeded the rolling mean by
/// more than `k_used` standard deviations.
#[derive(Debug, Clone, PartialEq)]
pub struct AnomalyEvent {
    /// Absolute epoch of the degraded measurement.
    pub epoch: i64,
    pub src: HostId,
    pub dst: HostId,
    pub observed: f64,
    pub window_mean: f64,
    pub window_sigma: f64,
    pub k_used: f64,
}

/// Flags every epoch whose delay is present, whose rolling window is fully
/// populated, and whose value strictly exceeds mean + k * sigma.
pub fn detect_anomalies(series: &DelaySeries, config: &AnomalyConfig) -> Vec<AnomalyEvent> {
    let stats = rolling_stats(series, config.window);
    let mut events = Vec::new();
    for (t, slot) in series.values().iter().enumerate() {
        let (Some(value), Some(st)) = (slot, stats[t]) else {
            continue;
        };
        if *value > st.mean + config.k * st.sigma {
            events.push(AnomalyEvent {
                epoch: series.start_epoch() + t as i64,
                src: series.src().clone(),
                dst: series.dst().clone(),
                observed: *value,
                window_mean: st.mean,
                window_sigma: st.sigma,
                k_used: config.k,
            });
        }
    }
    events
}

/// Detects across a whole mesh. Per-pair detection runs on up to `threads`
/// worker threads; the merged result is sorted by (epoch, src, dst) and does
/// not depend on the thread count.
pub fn detect_all(series: &SeriesMap, config: &AnomalyConfig, threads: usize) -> Vec<AnomalyEvent> {
    let all: Vec<&DelaySeries> = series.values().collect();
    let threads = threads.clamp(1, all.len().max(1));
    let mut events: Vec<AnomalyEvent> = if threads <= 1 || all.len() < 2 {
        all.iter()
            .flat_map(|s| detect_anomalies(s, config))
            .collect()
    } else {
        let chunk = all.len().div_ceil(threads);
        std::thread::scope(|scope| {
            let handles: Vec<_> = all
                .chunks(chunk)
                .map(|part| {
                    scope.spawn(move || {
                        part.iter()
                            .flat_map(|s| detect_anomalies(s, config))
                            .collect::<Vec<_>>()
                    })
                })
                .collect();
            handles
                .into_iter()
                .flat_map(|h| h.join().expect("detection worker panicked"))
                .collect()
        })
    };
    events.sort_by(|a, b| {
        (a.epoch, &a.src, &a.dst).cmp(&(b.epoch, &b.src, &b.dst))
    });
    events
}

/// Fractional delay reduction of an indirect path over the direct path:
/// (direct - indirect) / direct. Negative when the indirect path is slower.
pub fn delay_gain(direct_delay: f64, indirect_delay: f64) -> Result<f64, AnomalyError> {
    if !direct_delay.is_finite() || direct_delay <= 0.0 {
        return Err(AnomalyError::NonPositiveDirect(direct_delay));
    }
    Ok((direct_delay - indirect_delay) / direct_delay)
}

/// Relays ordered by descending delay gain for one degradation event.
#[derive(Debug, Clone, PartialEq)]
pub struct RelayRanking {
    pub event: AnomalyEvent,
    /// (relay, gain), gains non-increasing; ties resolve by host id.
    pub ranked: Vec<(HostId, f64)>,
}

/// Ranks every relay with both legs measured at the event epoch. The gain
/// compares the indirect delay (sum of the legs at that epoch) against the
/// observed degraded direct delay. Relays with a missing leg are excluded;
/// an empty ranking is allowed.
pub fn rank_relays(event: &AnomalyEvent, series: &SeriesMap, hosts: &[HostId]) -> RelayRanking {
    let mut ranked: Vec<(HostId, f64)> = Vec::new();
    for relay in hosts {
        if relay == &event.src || relay == &event.dst {
            continue;
        }
        let first = series
            .get(&(event.src.clone(), relay.clone()))
            .and_then(|s| s.value_at(event.epoch));
        let second = series
            .get(&(relay.clone(), event.dst.clone()))
            .and_then(|s| s.value_at(event.epoch));
        if let (Some(a), Some(b)) = (first, second) {
            let gain = delay_gain(event.observed, a + b)
                .expect("detected events have a positive observed delay");
            ranked.push((relay.clone(), gain));
        }
    }
    ranked.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    RelayRanking {
        event: event.clone(),
        ranked,
    }
}

/// Rankings for every event, in event order.
pub fn rank_all(events: &[AnomalyEvent], series: &SeriesMap, hosts: &[HostId]) -> Vec<RelayRanking> {
    events
        .iter()
        .map(|e| rank_relays(e, series, hosts))
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct TopSetEntry {
    pub host: HostId,
    /// Normalised frequency of appearing in the top set.
    pub frequency: f64,
    /// Running sum of frequencies down the descending order.
    pub cumulative: f64,
}

/// Aggregated top-set statistics over all counted degradation events.
#[derive(Debug, Clone, PartialEq)]
pub struct TopSetStats {
    /// Frequency per host over the whole universe; zeros included.
    pub frequencies: BTreeMap<HostId, f64>,
    /// Hosts by descending frequency with the cumulative curve.
    pub ranked: Vec<TopSetEntry>,
    /// Number of events that entered the aggregate.
    pub events_counted: usize,
}

impl TopSetStats {
    /// Smallest number of hosts whose cumulative frequency reaches `target`.
    pub fn hosts_needed_for(&self, target: f64) -> Option<usize> {
        self.ranked
            .iter()
            .position(|e| e.cumulative >= target)
            .map(|z| z + 1)
    }
}

/// Frequency with which each host lands in the top `s` of an event's relay
/// ranking, normalised by `s * N` so the frequencies sum to one. Events with
/// fewer than `s` eligible relays are skipped and do not count toward `N`.
/// `universe` fixes the host set of the cumulative curve; hosts appearing in
/// rankings are included regardless.
pub fn top_set_frequencies(
    rankings: &[RelayRanking],
    s: usize,
    universe: &[HostId],
) -> Result<TopSetStats, AnomalyError> {
    if s < 1 {
        return Err(AnomalyError::BadTopSetSize);
    }
    let counted: Vec<&RelayRanking> = rankings.iter().filter(|r| r.ranked.len() >= s).collect();
    let n = counted.len();
    if n == 0 {
        return Err(AnomalyError::NoEvents);
    }

    let mut appearances: BTreeMap<HostId, usize> = BTreeMap::new();
    for ranking in counted {
        for (host, _) in &ranking.ranked[..s] {
            *appearances.entry(host.clone()).or_insert(0) += 1;
        }
    }

    let denom = (s * n) as f64;
    let mut frequencies: BTreeMap<HostId, f64> =
        universe.iter().map(|h| (h.clone(), 0.0)).collect();
    for (host, count) in appearances {
        frequencies.insert(host, count as f64 / denom);
    }

    let mut order: Vec<(&HostId, f64)> = frequencies.iter().map(|(h, &f)| (h, f)).collect();
    order.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(b.0)));
    let mut cumulative = 0.0;
    let ranked = order
        .into_iter()
        .map(|(host, frequency)| {
            cumulative += frequency;
            TopSetEntry {
                host: host.clone(),
                frequency,
                cumulative,
            }
        })
        .collect();

    Ok(TopSetStats {
        frequencies,
        ranked,
        events_counted: n,
    })
}

/// Mean-delay comparison of each direct path against its best one-hop
/// alternative.
#[derive(Debug, Clone, PartialEq)]
pub struct PairAlternate {
    pub src: HostId,
    pub dst: HostId,
    pub direct_mean: f64,
    pub best_relay: HostId,
    pub best_indirect_mean: f64,
    /// direct mean minus best indirect mean; positive means the alternate
    /// path is faster on average.
    pub difference: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CdfPoint {
    pub value: f64,
    pub fraction: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct AlternateSummary {
    pub pairs: Vec<PairAlternate>,
    /// Empirical CDF of the per-pair differences.
    pub cdf: Vec<CdfPoint>,
}

impl AlternateSummary {
    /// Fraction of pairs whose best alternate is no better than the direct
    /// path: the CDF evaluated at zero.
    pub fn fraction_at_or_below_zero(&self) -> Option<f64> {
        if self.pairs.is_empty() {
            return None;
        }
        let below = self.pairs.iter().filter(|p| p.difference <= 0.0).count();
        Some(below as f64 / self.pairs.len() as f64)
    }
}

/// Per pair: mean direct delay over present epochs against the best relay's
/// mean indirect delay over epochs where both legs are present. Pairs with
/// no present direct epochs, or with no relay sharing any epoch on both
/// legs, are excluded.
pub fn best_alternate_summary(series: &SeriesMap, hosts: &[HostId]) -> AlternateSummary {
    let mut pairs = Vec::new();
    for ((src, dst), direct) in series {
        let present: Vec<f64> = direct.present_epochs().map(|(_, v)| v).collect();
        if present.is_empty() {
            continue;
        }
        let direct_mean = present.iter().sum::<f64>() / present.len() as f64;

        let mut best: Option<(HostId, f64)> = None;
        for relay in hosts {
            if relay == src || relay == dst {
                continue;
            }
            let (Some(first), Some(second)) = (
                series.get(&(src.clone(), relay.clone())),
                series.get(&(relay.clone(), dst.clone())),
            ) else {
                continue;
            };
            let mut sum = 0.0;
            let mut count = 0usize;
            for (epoch, a) in first.present_epochs() {
                if let Some(b) = second.value_at(epoch) {
                    sum += a + b;
                    count += 1;
                }
            }
            if count == 0 {
                continue;
            }
            let mean = sum / count as f64;
            let better = match &best {
                None => true,
                Some((_, current)) => mean < *current,
            };
            if better {
                best = Some((relay.clone(), mean));
            }
        }
        if let Some((best_relay, best_indirect_mean)) = best {
            pairs.push(PairAlternate {
                src: src.clone(),
                dst: dst.clone(),
                direct_mean,
                best_relay,
                best_indirect_mean,
                difference: direct_mean - best_indirect_mean,
            });
        }
    }

    let mut sorted: Vec<usize> = (0..pairs.len()).collect();
    sorted.sort_by(|&a, &b| {
        pairs[a]
            .difference
            .total_cmp(&pairs[b].difference)
            .then_with(|| (&pairs[a].src, &pairs[a].dst).cmp(&(&pairs[b].src, &pairs[b].dst)))
    });
    let n = pairs.len() as f64;
    let cdf = sorted
        .iter()
        .enumerate()
        .map(|(i, &idx)| CdfPoint {
            value: pairs[idx].difference,
            fraction: (i + 1) as f64 / n,
        })
        .collect();
    let pairs = sorted.into_iter().map(|i| pairs[i].clone()).collect();
    AlternateSummary { pairs, cdf }
}

/// Mean and population sigma over every present value of the series, the
/// whole-profile statistics used for incidence summaries (as opposed to the
/// rolling statistics driving detection).
pub fn global_stats(series: &DelaySeries) -> Option<WindowStats> {
    let values: Vec<f64> = series.present_epochs().map(|(_, v)| v).collect();
    if values.is_empty() {
        return None;
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let variance = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    Some(WindowStats {
        mean,
        sigma: variance.sqrt(),
    })
}

/// Fraction of present epochs exceeding the whole-profile mean by more than
/// `k` whole-profile standard deviations.
pub fn global_exceedance(series: &DelaySeries, k: f64) -> Option<f64> {
    let stats = global_stats(series)?;
    let threshold = stats.mean + k * stats.sigma;
    let mut total = 0usize;
    let mut above = 0usize;
    for (_, v) in series.present_epochs() {
        total += 1;
        if v > threshold {
            above += 1;
        }
    }
    Some(above as f64 / total as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn host(s: &str) -> HostId {
        HostId::new(s).unwrap()
    }

    fn series(src: &str, dst: &str, values: Vec<Option<f64>>) -> DelaySeries {
        DelaySeries::new(host(src), host(dst), 60, 0, values).unwrap()
    }

    fn constant(src: &str, dst: &str, value: f64, len: usize) -> DelaySeries {
        series(src, dst, vec![Some(value); len])
    }

    #[test]
    fn constant_series_has_zero_sigma() {
        let s = constant("a", "b", 50.0, 61);
        let stats = rolling_stats(&s, 60);
        let at60 = stats[60].unwrap();
        assert_eq!(at60.mean, 50.0);
        assert_eq!(at60.sigma, 0.0);
        assert!(stats[59].is_none());
    }

    #[test]
    fn missing_value_in_window_is_unavailable() {
        let mut values = vec![Some(50.0); 61];
        values[30] = None;
        let stats = rolling_stats(&series("a", "b", values), 60);
        assert!(stats[60].is_none());
    }

    #[test]
    fn alternating_window_stats() {
        // 30 x 90 and 30 x 110: mean 100, population sigma 10
        let mut values: Vec<Option<f64>> = (0..60)
            .map(|i| Some(if i % 2 == 0 { 90.0 } else { 110.0 }))
            .collect();
        values.push(Some(100.0));
        let s = series("a", "b", values);
        let stats = rolling_stats(&s, 60);
        let at60 = stats[60].unwrap();

        // independent two-pass computation over the same window
        let window: Vec<f64> = s.values()[0..60].iter().map(|v| v.unwrap()).collect();
        let mean = window.iter().sum::<f64>() / 60.0;
        let sigma =
            (window.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / 60.0).sqrt();
        assert_eq!(at60.mean, mean);
        assert_eq!(at60.sigma, sigma);
        assert_eq!(at60.mean, 100.0);
        assert_eq!(at60.sigma, 10.0);
    }

    #[test]
    fn constant_series_never_degrades() {
        let s = constant("a", "b", 50.0, 200);
        for k in [0.5, 3.0, 10.0] {
            let config = AnomalyConfig::new(k, 60, 5).unwrap();
            assert!(detect_anomalies(&s, &config).is_empty());
        }
    }

    #[test]
    fn spike_above_threshold_is_flagged() {
        let mut values: Vec<Option<f64>> = (0..60)
            .map(|i| Some(if i % 2 == 0 { 90.0 } else { 110.0 }))
            .collect();
        values.push(Some(131.0));
        let events = detect_anomalies(&series("a", "b", values), &AnomalyConfig::failure());
        assert_eq!(events.len(), 1);
        let e = &events[0];
        assert_eq!(e.epoch, 60);
        assert_eq!(e.window_mean, 100.0);
        assert_eq!(e.window_sigma, 10.0);
        assert_eq!(e.observed, 131.0);
    }

    #[test]
    fn spike_below_threshold_is_not_flagged() {
        let mut values: Vec<Option<f64>> = (0..60)
            .map(|i| Some(if i % 2 == 0 { 90.0 } else { 110.0 }))
            .collect();
        values.push(Some(129.0));
        let events = detect_anomalies(&series("a", "b", values), &AnomalyConfig::failure());
        assert!(events.is_empty());
    }

    #[test]
    fn delay_gain_arithmetic() {
        assert_eq!(delay_gain(100.0, 80.0).unwrap(), 0.2);
        assert_eq!(delay_gain(100.0, 100.0).unwrap(), 0.0);
        assert_eq!(delay_gain(100.0, 150.0).unwrap(), -0.5);
        assert!(matches!(
            delay_gain(0.0, 10.0),
            Err(AnomalyError::NonPositiveDirect(_))
        ));
    }

    #[test]
    fn delay_gain_strictly_decreases_with_indirect_delay() {
        let mut last = f64::INFINITY;
        for indirect in [0.0, 25.0, 80.0, 100.0, 130.0, 500.0] {
            let gain = delay_gain(100.0, indirect).unwrap();
            assert!(gain < last);
            last = gain;
        }
    }

    fn event(src: &str, dst: &str, epoch: i64, observed: f64) -> AnomalyEvent {
        AnomalyEvent {
            epoch,
            src: host(src),
            dst: host(dst),
            observed,
            window_mean: observed / 2.0,
            window_sigma: 1.0,
            k_used: 3.0,
        }
    }

    #[test]
    fn relays_rank_by_descending_gain() {
        let mut map = SeriesMap::new();
        for (s, d, v) in [("i", "r1", 50.0), ("r1", "j", 50.0), ("i", "r2", 90.0), ("r2", "j", 90.0)] {
            map.insert((host(s), host(d)), constant(s, d, v, 10));
        }
        let hosts = vec![host("i"), host("j"), host("r1"), host("r2")];
        let ranking = rank_relays(&event("i", "j", 5, 200.0), &map, &hosts);
        assert_eq!(
            ranking.ranked,
            vec![(host("r1"), 0.5), (host("r2"), 0.1)]
        );
    }

    #[test]
    fn equal_gains_rank_by_host_id() {
        let mut map = SeriesMap::new();
        for relay in ["rb", "ra", "rc"] {
            map.insert(
                (host("i"), host(relay)),
                constant("i", relay, 50.0, 10),
            );
            map.insert(
                (host(relay), host("j")),
                constant(relay, "j", 50.0, 10),
            );
        }
        let hosts = vec![host("i"), host("j"), host("ra"), host("rb"), host("rc")];
        let ranking = rank_relays(&event("i", "j", 5, 200.0), &map, &hosts);
        let order: Vec<&str> = ranking.ranked.iter().map(|(h, _)| h.as_str()).collect();
        assert_eq!(order, vec!["ra", "rb", "rc"]);
    }

    #[test]
    fn relay_with_missing_leg_is_excluded() {
        let mut map = SeriesMap::new();
        map.insert((host("i"), host("r1")), constant("i", "r1", 50.0, 10));
        let mut leg2 = vec![Some(50.0); 10];
        leg2[5] = None;
        map.insert((host("r1"), host("j")), series("r1", "j", leg2));
        let hosts = vec![host("i"), host("j"), host("r1")];
        let ranking = rank_relays(&event("i", "j", 5, 200.0), &map, &hosts);
        assert!(ranking.ranked.is_empty());
    }

    #[test]
    fn one_event_with_five_relays() {
        let relays: Vec<HostId> = (1..=5).map(|i| host(&format!("r{i}"))).collect();
        let ranking = RelayRanking {
            event: event("i", "j", 0, 100.0),
            ranked: relays.iter().map(|r| (r.clone(), 0.3)).collect(),
        };
        let mut universe = vec![host("i"), host("j")];
        universe.extend(relays.iter().cloned());
        universe.push(host("idle"));
        let stats = top_set_frequencies(&[ranking], 5, &universe).unwrap();
        assert_eq!(stats.events_counted, 1);
        for r in &relays {
            assert_eq!(stats.frequencies[r], 0.2);
        }
        let curve: Vec<f64> = stats.ranked.iter().map(|e| e.cumulative).collect();
        for (f, want) in curve[..5].iter().zip([0.2, 0.4, 0.6, 0.8, 1.0]) {
            assert!((f - want).abs() < 1e-12, "cumulative {f} vs {want}");
        }
        for f in &curve[5..] {
            assert!((f - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn repeat_appearances_accumulate() {
        let mk = |relays: &[&str]| RelayRanking {
            event: event("i", "j", 0, 100.0),
            ranked: relays.iter().map(|r| (host(r), 0.3)).collect(),
        };
        let rankings = vec![
            mk(&["A", "b", "c", "d", "e"]),
            mk(&["A", "f", "g", "h", "k"]),
        ];
        let universe: Vec<HostId> =
            ["A", "b", "c", "d", "e", "f", "g", "h", "k"].iter().map(|h| host(h)).collect();
        let stats = top_set_frequencies(&rankings, 5, &universe).unwrap();
        assert_eq!(stats.frequencies[&host("A")], 2.0 / 10.0);
    }

    #[test]
    fn events_with_too_few_relays_are_skipped() {
        let small = RelayRanking {
            event: event("i", "j", 0, 100.0),
            ranked: vec![(host("a"), 0.1), (host("b"), 0.05), (host("c"), 0.01)],
        };
        let err = top_set_frequencies(std::slice::from_ref(&small), 5, &[]).unwrap_err();
        assert!(matches!(err, AnomalyError::NoEvents));

        let full = RelayRanking {
            event: event("i", "j", 1, 100.0),
            ranked: ["a", "b", "c", "d", "e"].iter().map(|h| (host(h), 0.2)).collect(),
        };
        let stats = top_set_frequencies(&[small, full], 5, &[]).unwrap();
        assert_eq!(stats.events_counted, 1);
    }

    #[test]
    fn best_alternate_prefers_cheapest_relay() {
        let mut map = SeriesMap::new();
        map.insert((host("i"), host("j")), constant("i", "j", 100.0, 10));
        for (s, d, v) in [("i", "r", 40.0), ("r", "j", 40.0), ("i", "w", 70.0), ("w", "j", 70.0)] {
            map.insert((host(s), host(d)), constant(s, d, v, 10));
        }
        let hosts = vec![host("i"), host("j"), host("r"), host("w")];
        let summary = best_alternate_summary(&map, &hosts);
        let pair = summary
            .pairs
            .iter()
            .find(|p| p.src == host("i") && p.dst == host("j"))
            .unwrap();
        assert_eq!(pair.best_relay, host("r"));
        assert_eq!(pair.best_indirect_mean, 80.0);
        assert_eq!(pair.difference, 20.0);
    }

    #[test]
    fn worse_alternates_yield_negative_difference() {
        let mut map = SeriesMap::new();
        map.insert((host("i"), host("j")), constant("i", "j", 100.0, 10));
        map.insert((host("i"), host("r")), constant("i", "r", 90.0, 10));
        map.insert((host("r"), host("j")), constant("r", "j", 90.0, 10));
        let hosts = vec![host("i"), host("j"), host("r")];
        let summary = best_alternate_summary(&map, &hosts);
        let pair = summary
            .pairs
            .iter()
            .find(|p| p.src == host("i") && p.dst == host("j"))
            .unwrap();
        assert_eq!(pair.difference, -80.0);
    }

    #[test]
    fn global_stats_cover_whole_profile() {
        let mut values: Vec<Option<f64>> = vec![Some(10.0); 9];
        values.push(Some(110.0));
        let s = series("a", "b", values);
        let stats = global_stats(&s).unwrap();
        assert_eq!(stats.mean, 20.0);
        let exceedance = global_exceedance(&s, 2.0).unwrap();
        assert_eq!(exceedance, 0.1);
    }

    #[test]
    fn config_validation() {
        assert!(AnomalyConfig::new(0.0, 60, 5).is_err());
        assert!(AnomalyConfig::new(3.0, 1, 5).is_err());
        assert!(AnomalyConfig::new(3.0, 60, 0).is_err());
        assert_eq!(AnomalyConfig::outage().k, 10.0);
    }
}
