//! Wind fragility of overhead lines.
//!
//! Failure probability per line-hour is a capped logistic in gust speed whose
//! midpoint, the effective threshold, is
//!
//! ```text
//! θ_eff = theta0 / fragility_factor · (1 − veg_sensitivity · vegetation)
//! p     = min(p_cap, 1 / (1 + exp(−(gust − θ_eff) / slope)))
//! ```
//!
//! Underground lines never fail, and neither does anything in still air.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::network::{LineIdx, PowerLine, PowerNetwork};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FragilityParams {
    pub theta0_ms: f64,
    pub slope_ms: f64,
    pub fragility_factor: f64,
    pub veg_sensitivity: f64,
    pub p_cap: f64,
}

impl Default for FragilityParams {
    fn default() -> Self {
        FragilityParams {
            theta0_ms: 30.0,
            slope_ms: 3.0,
            fragility_factor: 0.80,
            veg_sensitivity: 0.2,
            p_cap: 0.95,
        }
    }
}

impl FragilityParams {
    pub fn with_factor(&self, fragility_factor: f64) -> Self {
        FragilityParams {
            fragility_factor,
            ..self.clone()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str| Err(Error::Config(format!("fragility.{what}")));
        if !(self.theta0_ms > 0.0) {
            return bad("theta0_ms must be positive");
        }
        if !(self.slope_ms > 0.0) {
            return bad("slope_ms must be positive");
        }
        if !(self.fragility_factor > 0.0) {
            return bad("fragility_factor must be positive");
        }
        if !(0.0..1.0).contains(&self.veg_sensitivity) {
            return bad("veg_sensitivity must lie in [0,1)");
        }
        if !(0.0..=1.0).contains(&self.p_cap) {
            return bad("p_cap must lie in [0,1]");
        }
        Ok(())
    }
}

pub fn effective_threshold(line: &PowerLine, p: &FragilityParams) -> f64 {
    p.theta0_ms / p.fragility_factor * (1.0 - p.veg_sensitivity * line.vegetation)
}

fn logistic(z: f64) -> f64 {
    1.0 / (1.0 + (-z).exp())
}

pub fn failure_probability(gust_ms: f64, line: &PowerLine, p: &FragilityParams) -> f64 {
    if !line.overhead || gust_ms <= 0.0 {
        return 0.0;
    }
    let z = (gust_ms - effective_threshold(line, p)) / p.slope_ms;
    logistic(z).min(p.p_cap)
}

/// One hour of failure sampling.
///
/// Exactly one uniform variate is drawn per line, in line order, every hour,
/// whether or not the line can fail. Stream consumption therefore does not
/// depend on which lines already failed or on their overhead flags, so runs
/// that differ only in fragility or topology see the same variates. A line
/// fails when it is intact, overhead, and its variate is below
/// `failure_probability` at the gust of its `to_node` patch.
pub fn sample_hourly_failures<R: Rng>(
    net: &PowerNetwork,
    line_gusts: &[f64],
    already_failed: &[bool],
    p: &FragilityParams,
    rng: &mut R,
) -> Vec<LineIdx> {
    debug_assert_eq!(line_gusts.len(), net.lines().len());
    let mut out = Vec::new();
    for (i, line) in net.lines().iter().enumerate() {
        let u: f64 = rng.random();
        if already_failed[i] || !line.overhead {
            continue;
        }
        if u < failure_probability(line_gusts[i], line, p) {
            out.push(LineIdx(i));
        }
    }
    out
}

/// Exposure gust per line for one frame (gust at the `to_node` patch).
pub fn line_exposure(
    net: &PowerNetwork,
    frame: &crate::hazard::WeatherFrame,
) -> Result<Vec<f64>> {
    net.lines()
        .iter()
        .map(|l| {
            let node = net.node(net.node_index(&l.to_node)?);
            frame.gust.get(&node.patch_id).copied().ok_or_else(|| {
                Error::input(format!(
                    "hour {} has no gust for patch '{}' (line '{}')",
                    frame.hour_index, node.patch_id, l.id
                ))
            })
        })
        .collect()
}
