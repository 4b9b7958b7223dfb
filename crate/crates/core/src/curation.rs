//! Historical outage curation: polygons to per-feeder customer-out series,
//! candidate-hour detection, gap merging, duration filtering and
//! systemwide-artifact flagging.

use std::collections::BTreeMap;

use log::warn;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Polygon;
use crate::hours::HourStamp;
use crate::network::PowerNetwork;

#[derive(Debug, Clone, PartialEq)]
pub struct OutagePolygonSnapshot {
    pub timestamp: HourStamp,
    pub polygons: Vec<Polygon>,
}

/// Hourly customers-out per feeder.
#[derive(Debug, Clone, PartialEq)]
pub struct ObservedSeries {
    pub hours: Vec<HourStamp>,
    pub per_feeder_out: BTreeMap<String, Vec<u64>>,
    pub per_feeder_total: BTreeMap<String, u64>,
}

impl ObservedSeries {
    pub fn empty(per_feeder_total: BTreeMap<String, u64>) -> Self {
        ObservedSeries {
            hours: Vec::new(),
            per_feeder_out: per_feeder_total.keys().map(|f| (f.clone(), Vec::new())).collect(),
            per_feeder_total,
        }
    }

    pub fn len(&self) -> usize {
        self.hours.len()
    }

    pub fn is_empty(&self) -> bool {
        self.hours.is_empty()
    }

    /// System-wide customers out per hour.
    pub fn total_out(&self) -> Vec<u64> {
        (0..self.hours.len())
            .map(|h| self.per_feeder_out.values().map(|v| v[h]).sum())
            .collect()
    }

    pub fn total_customers(&self) -> u64 {
        self.per_feeder_total.values().sum()
    }

    pub fn position(&self, hour: HourStamp) -> Option<usize> {
        self.hours.binary_search(&hour).ok()
    }

    /// Restricts the series to `[start, end]` (inclusive).
    pub fn window(&self, start: HourStamp, end: HourStamp) -> ObservedSeries {
        let lo = self.hours.partition_point(|h| *h < start);
        let hi = self.hours.partition_point(|h| *h <= end);
        ObservedSeries {
            hours: self.hours[lo..hi].to_vec(),
            per_feeder_out: self
                .per_feeder_out
                .iter()
                .map(|(f, v)| (f.clone(), v[lo..hi].to_vec()))
                .collect(),
            per_feeder_total: self.per_feeder_total.clone(),
        }
    }
}

/// Customers out per feeder for each hour from the first to the last
/// snapshot. A node is out when its position lies in any of the hour's
/// polygons (boundary inclusive). Missing hours count as zero outage.
pub fn observed_outage_series(
    snapshots: &[OutagePolygonSnapshot],
    net: &PowerNetwork,
) -> Result<ObservedSeries> {
    let totals = net.feeder_totals();
    let (Some(first), Some(last)) = (snapshots.first(), snapshots.last()) else {
        return Ok(ObservedSeries::empty(totals));
    };
    if snapshots.windows(2).any(|w| w[0].timestamp >= w[1].timestamp) {
        return Err(Error::input("outage snapshots must be strictly increasing in time"));
    }
    let span = (last.timestamp.0 - first.timestamp.0 + 1) as usize;
    let hours: Vec<HourStamp> = (0..span as i64).map(|h| first.timestamp.plus_hours(h)).collect();
    if snapshots.len() < span {
        warn!(
            "{} of {span} hours between {} and {} have no outage snapshot; treated as zero outage",
            span - snapshots.len(),
            first.timestamp,
            last.timestamp
        );
    }
    let feeder_ids: Vec<&String> = totals.keys().collect();
    let mut out: Vec<Vec<u64>> = vec![vec![0; span]; feeder_ids.len()];
    let customers: Vec<(usize, &crate::network::PowerNode)> = net
        .nodes()
        .iter()
        .filter(|n| n.customers > 0)
        .map(|n| {
            let slot = feeder_ids.binary_search(&&n.feeder_id).expect("feeder of node");
            (slot, n)
        })
        .collect();
    for snap in snapshots {
        let h = (snap.timestamp.0 - first.timestamp.0) as usize;
        for &(slot, node) in &customers {
            if snap.polygons.iter().any(|p| p.contains(&node.position)) {
                out[slot][h] += node.customers;
            }
        }
    }
    Ok(ObservedSeries {
        hours,
        per_feeder_out: feeder_ids.into_iter().cloned().zip(out).collect(),
        per_feeder_total: totals,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CurationThresholds {
    /// Feeder outage fraction a feeder has to pass.
    pub frac_threshold: f64,
    /// Feeders that must pass simultaneously.
    pub min_feeders: usize,
    /// `true`: fraction > threshold; `false`: fraction ≥ threshold.
    pub strict_fraction: bool,
    pub max_gap_h: i64,
    pub min_duration_h: i64,
    pub coverage_threshold: f64,
}

impl Default for CurationThresholds {
    fn default() -> Self {
        CurationThresholds {
            frac_threshold: 0.05,
            min_feeders: 2,
            strict_fraction: true,
            max_gap_h: 3,
            min_duration_h: 6,
            coverage_threshold: 0.8,
        }
    }
}

/// Hours where at least `min_feeders` feeders exceed `frac_threshold` of
/// their customers out.
pub fn detect_candidate_hours(series: &ObservedSeries, th: &CurationThresholds) -> Vec<HourStamp> {
    let passes = |frac: f64| {
        if th.strict_fraction {
            frac > th.frac_threshold
        } else {
            frac >= th.frac_threshold
        }
    };
    series
        .hours
        .iter()
        .enumerate()
        .filter(|(h, _)| {
            let n = series
                .per_feeder_out
                .iter()
                .filter(|(f, v)| {
                    let total = series.per_feeder_total.get(*f).copied().unwrap_or(0);
                    total > 0 && passes(v[*h] as f64 / total as f64)
                })
                .count();
            n >= th.min_feeders
        })
        .map(|(_, &stamp)| stamp)
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct CuratedEvent {
    pub start_hour: HourStamp,
    pub end_hour: HourStamp,
    pub candidate_hours: Vec<HourStamp>,
    pub excluded: bool,
    pub reason: Option<String>,
}

impl CuratedEvent {
    /// Inclusive hour count, merged gap hours included.
    pub fn duration_h(&self) -> i64 {
        self.end_hour.0 - self.start_hour.0 + 1
    }
}

/// Merges candidate runs separated by at most `max_gap_h` non-candidate
/// hours. No duration filter.
pub fn merge_candidates(candidates: &[HourStamp], max_gap_h: i64) -> Vec<CuratedEvent> {
    let mut events: Vec<CuratedEvent> = Vec::new();
    for &h in candidates {
        match events.last_mut() {
            Some(e) if h.0 - e.end_hour.0 - 1 <= max_gap_h => {
                e.end_hour = h;
                e.candidate_hours.push(h);
            }
            _ => events.push(CuratedEvent {
                start_hour: h,
                end_hour: h,
                candidate_hours: vec![h],
                excluded: false,
                reason: None,
            }),
        }
    }
    events
}

pub fn merge_and_filter(
    candidates: &[HourStamp],
    max_gap_h: i64,
    min_duration_h: i64,
) -> Vec<CuratedEvent> {
    let mut sorted = candidates.to_vec();
    sorted.sort();
    sorted.dedup();
    merge_candidates(&sorted, max_gap_h)
        .into_iter()
        .filter(|e| e.duration_h() >= min_duration_h)
        .collect()
}

pub const SYSTEMWIDE_REASON: &str = "systemwide-artifact";

/// Flags (never drops) events containing an hour whose systemwide outage
/// share reaches `coverage_threshold`.
pub fn flag_systemwide_artifacts(
    series: &ObservedSeries,
    events: &[CuratedEvent],
    coverage_threshold: f64,
) -> Vec<CuratedEvent> {
    let total = series.total_customers();
    let out = series.total_out();
    events
        .iter()
        .map(|e| {
            let mut e = e.clone();
            let lo = series.hours.partition_point(|h| *h < e.start_hour);
            let hi = series.hours.partition_point(|h| *h <= e.end_hour);
            let hit = total > 0
                && out[lo..hi]
                    .iter()
                    .any(|&o| o as f64 / total as f64 >= coverage_threshold);
            if hit {
                e.excluded = true;
                e.reason = Some(SYSTEMWIDE_REASON.to_string());
            }
            e
        })
        .collect()
}

/// Full curation pass: detect, merge, filter, flag.
pub fn curate(series: &ObservedSeries, th: &CurationThresholds) -> Vec<CuratedEvent> {
    let candidates = detect_candidate_hours(series, th);
    let events = merge_and_filter(&candidates, th.max_gap_h, th.min_duration_h);
    flag_systemwide_artifacts(series, &events, th.coverage_threshold)
}
