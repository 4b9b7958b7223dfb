//! Trajectory summaries and calibration-style assessment: ratios, strict and
//! pragmatic hits, decile coupling tables and convergence ladders.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Pragmatic hit band on simulated-mean / observed.
pub const PRAGMATIC_BAND: (f64, f64) = (0.5, 2.0);
/// Default relative-change threshold for convergence verdicts.
pub const DEFAULT_STABILITY_THRESHOLD: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct SummaryMetrics {
    pub peak_customers: u64,
    pub duration_h: f64,
    pub auc_customer_hours: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    Peak,
    Duration,
    Auc,
}

impl Metric {
    pub const ALL: [Metric; 3] = [Metric::Peak, Metric::Duration, Metric::Auc];

    pub fn name(&self) -> &'static str {
        match self {
            Metric::Peak => "peak",
            Metric::Duration => "duration",
            Metric::Auc => "auc",
        }
    }

    pub fn of(&self, m: &SummaryMetrics) -> f64 {
        match self {
            Metric::Peak => m.peak_customers as f64,
            Metric::Duration => m.duration_h,
            Metric::Auc => m.auc_customer_hours,
        }
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Peak, first-to-last nonzero duration (inclusive), and hourly-sum AUC.
pub fn summarize(trajectory: &[u64]) -> Result<SummaryMetrics> {
    if trajectory.is_empty() {
        return Err(Error::input("cannot summarize an empty trajectory"));
    }
    let peak = trajectory.iter().copied().max().unwrap_or(0);
    let auc = trajectory.iter().map(|&v| v as f64).sum();
    let first = trajectory.iter().position(|&v| v > 0);
    let last = trajectory.iter().rposition(|&v| v > 0);
    let duration = match (first, last) {
        (Some(a), Some(b)) => (b - a + 1) as f64,
        _ => 0.0,
    };
    Ok(SummaryMetrics {
        peak_customers: peak,
        duration_h: duration,
        auc_customer_hours: auc,
    })
}

/// Empirical quantile, linear interpolation between order statistics at
/// index `q·(n−1)`.
pub fn quantile(values: &[f64], q: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&q) {
        return Err(Error::input(format!("quantile level {q} outside [0,1]")));
    }
    if values.is_empty() {
        return Err(Error::Precondition("quantile of an empty sample".into()));
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    Ok(sorted_quantile(&sorted, q))
}

fn sorted_quantile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    let frac = pos - lo as f64;
    if lo == hi {
        sorted[lo]
    } else {
        sorted[lo] + frac * (sorted[hi] - sorted[lo])
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnsembleDistribution {
    pub metric: Metric,
    pub values: Vec<f64>,
    pub mean: f64,
    pub p05: f64,
    pub p95: f64,
}

impl EnsembleDistribution {
    pub fn new(metric: Metric, values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::Precondition(format!("no {metric} values in ensemble")));
        }
        let mean = values.iter().sum::<f64>() / values.len() as f64;
        let mut sorted = values.clone();
        sorted.sort_by(f64::total_cmp);
        Ok(EnsembleDistribution {
            metric,
            mean,
            p05: sorted_quantile(&sorted, 0.05),
            p95: sorted_quantile(&sorted, 0.95),
            values,
        })
    }

    pub fn from_summaries(metric: Metric, summaries: &[SummaryMetrics]) -> Result<Self> {
        EnsembleDistribution::new(metric, summaries.iter().map(|s| metric.of(s)).collect())
    }
}

/// Simulated central estimate over observed value.
pub fn ratio(sim_mean: f64, observed: f64) -> Result<f64> {
    if !(observed > 0.0) {
        return Err(Error::input("observed metric must be positive for ratio assessment"));
    }
    Ok(sim_mean / observed)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Hits {
    pub strict: bool,
    pub pragmatic: bool,
}

pub fn pragmatic_hit(r: f64) -> bool {
    (PRAGMATIC_BAND.0..=PRAGMATIC_BAND.1).contains(&r)
}

/// Strict: observed inside `[p05, p95]`. Pragmatic: mean/observed inside
/// `[0.5, 2]`. Both inclusive.
pub fn hits(dist: &EnsembleDistribution, observed: f64) -> Result<Hits> {
    let r = ratio(dist.mean, observed)?;
    Ok(Hits {
        strict: dist.p05 <= observed && observed <= dist.p95,
        pragmatic: pragmatic_hit(r),
    })
}

/// One row of an assessment: metrics with a zero observation are kept but
/// marked not assessable.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricAssessment {
    pub metric: Metric,
    pub observed: f64,
    pub sim_mean: f64,
    pub p05: f64,
    pub p95: f64,
    pub ratio: Option<f64>,
    pub strict_hit: Option<bool>,
    pub pragmatic_hit: Option<bool>,
    pub assessable: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AssessmentReport {
    pub event_id: String,
    pub episodes: usize,
    pub metrics: Vec<MetricAssessment>,
}

impl AssessmentReport {
    pub fn get(&self, metric: Metric) -> &MetricAssessment {
        self.metrics
            .iter()
            .find(|m| m.metric == metric)
            .expect("reports carry all three metrics")
    }

    /// True when every metric is assessable and a pragmatic hit.
    pub fn pragmatic_all(&self) -> bool {
        self.metrics.iter().all(|m| m.pragmatic_hit == Some(true))
    }
}

pub fn assess(
    event_id: &str,
    observed: &SummaryMetrics,
    simulated: &[SummaryMetrics],
) -> Result<AssessmentReport> {
    let metrics = Metric::ALL
        .iter()
        .map(|&metric| {
            let dist = EnsembleDistribution::from_summaries(metric, simulated)?;
            let obs = metric.of(observed);
            let (ratio, strict_hit, pragmatic_hit, assessable) = match hits(&dist, obs) {
                Ok(h) => (Some(dist.mean / obs), Some(h.strict), Some(h.pragmatic), true),
                Err(_) => (None, None, None, false),
            };
            Ok(MetricAssessment {
                metric,
                observed: obs,
                sim_mean: dist.mean,
                p05: dist.p05,
                p95: dist.p95,
                ratio,
                strict_hit,
                pragmatic_hit,
                assessable,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(AssessmentReport {
        event_id: event_id.to_string(),
        episodes: simulated.len(),
        metrics,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecileRow {
    /// 1 = lowest power-outage AUC.
    pub decile: usize,
    pub episodes: usize,
    pub flood_occurrence: f64,
    pub mean_flood_customer_auc: f64,
}

/// Groups episodes into ten power-AUC deciles (stable sort, ties by episode
/// order; sizes differ by at most one with the extra episodes in the lower
/// deciles) and reports flood occurrence and mean flooded-customer AUC.
pub fn decile_report(
    power_auc: &[f64],
    flood_flags: &[bool],
    flood_customer_auc: &[f64],
) -> Result<Vec<DecileRow>> {
    let n = power_auc.len();
    if flood_flags.len() != n || flood_customer_auc.len() != n {
        return Err(Error::input(format!(
            "decile inputs differ in length: {n}, {}, {}",
            flood_flags.len(),
            flood_customer_auc.len()
        )));
    }
    if n < 10 {
        return Err(Error::input(format!("decile report needs at least 10 episodes, got {n}")));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| power_auc[a].total_cmp(&power_auc[b]));
    let (base, extra) = (n / 10, n % 10);
    let mut start = 0;
    Ok((0..10)
        .map(|d| {
            let size = base + usize::from(d < extra);
            let group = &order[start..start + size];
            start += size;
            let floods = group.iter().filter(|&&i| flood_flags[i]).count();
            let auc: f64 = group.iter().map(|&i| flood_customer_auc[i]).sum();
            DecileRow {
                decile: d + 1,
                episodes: size,
                flood_occurrence: floods as f64 / size as f64,
                mean_flood_customer_auc: auc / size as f64,
            }
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceRow {
    pub rung: usize,
    pub metric: Metric,
    pub mean: f64,
    pub rel_change_vs_final: f64,
    pub stable: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum StabilityVerdict {
    StableAt(usize),
    NotStable,
}

impl fmt::Display for StabilityVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StabilityVerdict::StableAt(n) => write!(f, "stable at {n}"),
            StabilityVerdict::NotStable => f.write_str("not stable within ladder"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceReport {
    pub rows: Vec<ConvergenceRow>,
    pub verdict: StabilityVerdict,
    pub threshold: f64,
}

impl ConvergenceReport {
    pub fn mean(&self, rung: usize, metric: Metric) -> Option<f64> {
        self.rows
            .iter()
            .find(|r| r.rung == rung && r.metric == metric)
            .map(|r| r.mean)
    }
}

fn relative_change(mean: f64, reference: f64) -> f64 {
    if reference == 0.0 {
        if mean == 0.0 {
            0.0
        } else {
            f64::INFINITY
        }
    } else {
        (mean - reference).abs() / reference.abs()
    }
}

/// Convergence verdict from per-rung metric means (`[peak, duration, auc]`).
///
/// A rung is settled when every metric's mean differs from the final rung's
/// by strictly less than `threshold` (relative to the final mean). The
/// verdict is the smallest rung that is settled along with every later rung;
/// the final rung only counts when it is the sole rung.
pub fn convergence_report(
    ladder: &[usize],
    rung_means: &[[f64; 3]],
    threshold: f64,
) -> Result<ConvergenceReport> {
    if ladder.is_empty() {
        return Err(Error::input("empty episode ladder"));
    }
    if ladder.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::input(format!("episode ladder {ladder:?} is not ascending")));
    }
    if rung_means.len() != ladder.len() {
        return Err(Error::input("one set of means is needed per ladder rung"));
    }
    let last = rung_means[ladder.len() - 1];
    let mut rows = Vec::with_capacity(ladder.len() * 3);
    let mut settled = Vec::with_capacity(ladder.len());
    for (&rung, means) in ladder.iter().zip(rung_means) {
        let mut all = true;
        for (k, metric) in Metric::ALL.iter().enumerate() {
            let rel = relative_change(means[k], last[k]);
            let stable = rel < threshold;
            all &= stable;
            rows.push(ConvergenceRow {
                rung,
                metric: *metric,
                mean: means[k],
                rel_change_vs_final: rel,
                stable,
            });
        }
        settled.push(all);
    }
    let verdict = if ladder.len() == 1 {
        StabilityVerdict::StableAt(ladder[0])
    } else {
        let candidates = ladder.len() - 1;
        (0..candidates)
            .find(|&i| settled[i..candidates].iter().all(|&s| s))
            .map_or(StabilityVerdict::NotStable, |i| StabilityVerdict::StableAt(ladder[i]))
    };
    Ok(ConvergenceReport {
        rows,
        verdict,
        threshold,
    })
}

/// Convergence over nested prefixes of one ensemble: the rung of size N uses
/// the first N episodes.
pub fn convergence_from_summaries(
    ladder: &[usize],
    summaries: &[SummaryMetrics],
    threshold: f64,
) -> Result<ConvergenceReport> {
    if let Some(&top) = ladder.last() {
        if top > summaries.len() {
            return Err(Error::input(format!(
                "ladder rung {top} exceeds the {} available episodes",
                summaries.len()
            )));
        }
    }
    let means: Vec<[f64; 3]> = ladder
        .iter()
        .map(|&n| {
            let prefix = &summaries[..n];
            let mut m = [0.0; 3];
            for (k, metric) in Metric::ALL.iter().enumerate() {
                m[k] = prefix.iter().map(|s| metric.of(s)).sum::<f64>() / n.max(1) as f64;
            }
            m
        })
        .collect();
    convergence_report(ladder, &means, threshold)
}
