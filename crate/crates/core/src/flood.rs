//! Pump-failure to sewage-backup flooding.
//!
//! An unpowered pump stops lifting its conduit; once it has been out for
//! `pump_lag_h` hours, surcharge climbs the reversed sewage graph by
//! `upstream_rate_m_per_h` per outage hour past the lag. Reached conduits are
//! buffered by a radius that grows by a random increment every sustained hour
//! and shrinks by a random decrement once no failed pump sustains it. The
//! union of these capsules is the flood footprint.

use std::collections::{BTreeMap, BTreeSet, HashSet};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{point_polyline_distance, Point};
use crate::network::{FeederIndex, PowerNetwork};
use crate::sewage::{ConduitIdx, PumpIdx, SewageNetwork};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FloodConfig {
    pub pump_lag_h: u32,
    pub growth_min_m: f64,
    pub growth_max_m: f64,
    pub upstream_rate_m_per_h: f64,
    pub recession_min_m: f64,
    pub recession_max_m: f64,
    pub raster_cell_m: f64,
}

impl Default for FloodConfig {
    fn default() -> Self {
        FloodConfig {
            pump_lag_h: 1,
            growth_min_m: 30.0,
            growth_max_m: 60.0,
            upstream_rate_m_per_h: 100.0,
            recession_min_m: 30.0,
            recession_max_m: 60.0,
            raster_cell_m: 10.0,
        }
    }
}

impl FloodConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str| Err(Error::Config(format!("flood.{what}")));
        if !(0.0 <= self.growth_min_m && self.growth_min_m <= self.growth_max_m) {
            return bad("growth range must satisfy 0 <= growth_min_m <= growth_max_m");
        }
        if !(0.0 <= self.recession_min_m && self.recession_min_m <= self.recession_max_m) {
            return bad("recession range must satisfy 0 <= recession_min_m <= recession_max_m");
        }
        if !(self.recession_max_m > 0.0) {
            return bad("recession_max_m must be positive so floods can recede");
        }
        if !(self.upstream_rate_m_per_h > 0.0) {
            return bad("upstream_rate_m_per_h must be positive");
        }
        if !(self.raster_cell_m > 0.0) {
            return bad("raster_cell_m must be positive");
        }
        Ok(())
    }
}

fn draw<R: Rng>(rng: &mut R, lo: f64, hi: f64) -> f64 {
    if lo < hi {
        rng.random_range(lo..=hi)
    } else {
        lo
    }
}

/// Flooded conduits with their buffer radius and the failed pumps that
/// currently sustain them (empty while receding).
#[derive(Debug, Clone, PartialEq, Default)]
pub struct FloodState {
    pub flooded: BTreeMap<ConduitIdx, f64>,
    pub sustaining: BTreeMap<ConduitIdx, BTreeSet<PumpIdx>>,
}

impl FloodState {
    pub fn is_empty(&self) -> bool {
        self.flooded.is_empty()
    }

    pub fn max_radius(&self) -> f64 {
        self.flooded.values().copied().fold(0.0, f64::max)
    }
}

/// Pumps whose power node has lost its path to the feeder root.
pub fn pump_power_status(
    net: &PowerNetwork,
    index: &FeederIndex,
    failed: &[bool],
    sewage: &SewageNetwork,
) -> Result<Vec<PumpIdx>> {
    let mut out = Vec::new();
    for (i, p) in sewage.pumps().iter().enumerate() {
        let node = net.node_index(&p.power_node_id)?;
        if !index.node_connected(node, failed) {
            out.push(PumpIdx(i));
        }
    }
    Ok(out)
}

/// One hour of flood dynamics. `hours_unpowered[p]` counts consecutive
/// unpowered hours of pump `p`, the current hour included.
pub fn advance_flood<R: Rng>(
    state: &FloodState,
    unpowered: &[PumpIdx],
    hours_unpowered: &[u32],
    sewage: &SewageNetwork,
    cfg: &FloodConfig,
    rng: &mut R,
) -> FloodState {
    let mut reach: BTreeMap<ConduitIdx, BTreeSet<PumpIdx>> = BTreeMap::new();
    let mut pumps: Vec<PumpIdx> = unpowered.to_vec();
    pumps.sort();
    pumps.dedup();
    for p in pumps {
        let hours = hours_unpowered[p.0];
        if hours == 0 || hours < cfg.pump_lag_h {
            continue;
        }
        let limit = cfg.upstream_rate_m_per_h * f64::from(hours - cfg.pump_lag_h + 1);
        for r in sewage.upstream_conduits(p, limit) {
            reach.entry(r.conduit).or_default().insert(p);
        }
    }

    let conduits: BTreeSet<ConduitIdx> =
        state.flooded.keys().chain(reach.keys()).copied().collect();
    let mut next = FloodState::default();
    for c in conduits {
        match reach.remove(&c) {
            Some(sustainers) => {
                let growth = draw(rng, cfg.growth_min_m, cfg.growth_max_m);
                let radius = state.flooded.get(&c).map_or(growth, |r| r + growth);
                next.flooded.insert(c, radius);
                next.sustaining.insert(c, sustainers);
            }
            None => {
                let r = state.flooded[&c] - draw(rng, cfg.recession_min_m, cfg.recession_max_m);
                if r > 0.0 {
                    next.flooded.insert(c, r);
                    next.sustaining.insert(c, BTreeSet::new());
                }
            }
        }
    }
    next
}

fn covers(sewage: &SewageNetwork, c: ConduitIdx, radius: f64, p: &Point) -> bool {
    sewage.conduit_bbox(c).expanded(radius).contains(p)
        && point_polyline_distance(p, &sewage.conduit(c).polyline) <= radius
}

/// Customers whose point lies in the union of flooded capsules.
pub fn flooded_customers(
    state: &FloodState,
    sewage: &SewageNetwork,
    customer_points: &[(Point, u64)],
) -> u64 {
    if state.is_empty() {
        return 0;
    }
    customer_points
        .iter()
        .filter(|(p, _)| state.flooded.iter().any(|(&c, &r)| covers(sewage, c, r, p)))
        .map(|(_, n)| n)
        .sum()
}

/// Area of the capsule union by cell-center rasterization on a grid aligned
/// to multiples of `raster_cell_m`. The error is on the order of the union's
/// perimeter times the cell size.
pub fn flooded_area(state: &FloodState, sewage: &SewageNetwork, cfg: &FloodConfig) -> f64 {
    let cell = cfg.raster_cell_m;
    let mut covered: HashSet<(i64, i64)> = HashSet::new();
    for (&c, &r) in &state.flooded {
        let bb = sewage.conduit_bbox(c).expanded(r);
        let (i0, i1) = ((bb.x_min / cell).floor() as i64, (bb.x_max / cell).ceil() as i64);
        let (j0, j1) = ((bb.y_min / cell).floor() as i64, (bb.y_max / cell).ceil() as i64);
        let line = &sewage.conduit(c).polyline;
        for i in i0..i1 {
            for j in j0..j1 {
                if covered.contains(&(i, j)) {
                    continue;
                }
                let center = Point::new((i as f64 + 0.5) * cell, (j as f64 + 0.5) * cell);
                if point_polyline_distance(&center, line) <= r {
                    covered.insert((i, j));
                }
            }
        }
    }
    covered.len() as f64 * cell * cell
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct FloodMetrics {
    pub customer_peak: u64,
    pub persistence_h: u32,
    pub customer_auc: f64,
    pub area_peak: f64,
    pub area_auc: f64,
}

impl FloodMetrics {
    pub fn flooded(&self) -> bool {
        self.customer_peak > 0
    }
}

pub fn flood_metrics(customers: &[u64], area_m2: &[f64]) -> Result<FloodMetrics> {
    if customers.len() != area_m2.len() {
        return Err(Error::Precondition(format!(
            "flood trajectories differ in length: {} vs {}",
            customers.len(),
            area_m2.len()
        )));
    }
    Ok(FloodMetrics {
        customer_peak: customers.iter().copied().max().unwrap_or(0),
        persistence_h: customers.iter().filter(|&&c| c > 0).count() as u32,
        customer_auc: customers.iter().map(|&c| c as f64).sum(),
        area_peak: area_m2.iter().copied().fold(0.0, f64::max),
        area_auc: area_m2.iter().sum(),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct FloodResult {
    pub flooded_customers_trajectory: Vec<u64>,
    pub flooded_area_trajectory: Vec<f64>,
    pub metrics: FloodMetrics,
}

/// Hour-by-hour flood bookkeeping for one episode.
pub(crate) struct FloodTracker<'a> {
    sewage: &'a SewageNetwork,
    cfg: &'a FloodConfig,
    customer_points: &'a [(Point, u64)],
    state: FloodState,
    hours_unpowered: Vec<u32>,
    customers: Vec<u64>,
    area: Vec<f64>,
}

impl<'a> FloodTracker<'a> {
    pub(crate) fn new(
        sewage: &'a SewageNetwork,
        cfg: &'a FloodConfig,
        customer_points: &'a [(Point, u64)],
    ) -> Self {
        FloodTracker {
            sewage,
            cfg,
            customer_points,
            state: FloodState::default(),
            hours_unpowered: vec![0; sewage.pumps().len()],
            customers: Vec::new(),
            area: Vec::new(),
        }
    }

    pub(crate) fn step<R: Rng>(&mut self, unpowered: &[PumpIdx], rng: &mut R) {
        let mut out = vec![false; self.hours_unpowered.len()];
        for p in unpowered {
            out[p.0] = true;
        }
        for (h, down) in self.hours_unpowered.iter_mut().zip(out) {
            *h = if down { *h + 1 } else { 0 };
        }
        self.state = advance_flood(
            &self.state,
            unpowered,
            &self.hours_unpowered,
            self.sewage,
            self.cfg,
            rng,
        );
        self.customers
            .push(flooded_customers(&self.state, self.sewage, self.customer_points));
        self.area.push(flooded_area(&self.state, self.sewage, self.cfg));
    }

    pub(crate) fn is_dry(&self) -> bool {
        self.state.is_empty()
    }

    pub(crate) fn finish(self) -> FloodResult {
        let metrics = flood_metrics(&self.customers, &self.area).expect("equal lengths");
        FloodResult {
            flooded_customers_trajectory: self.customers,
            flooded_area_trajectory: self.area,
            metrics,
        }
    }
}
