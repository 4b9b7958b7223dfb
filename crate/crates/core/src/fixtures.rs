//! Deterministic synthetic instances: radial feeders on a plane, a sewage
//! overlay with lift pumps tied to power nodes, a regular patch grid, and
//! pseudo-observed series produced by a hidden episode.
//!
//! Feeder `k` is rooted at `(k · feeder_spacing_m, 0)` and grows in +y. About
//! a third of each feeder's non-root nodes are junctions forming a
//! trunk-biased tree of overhead primary spans; the rest are service points
//! hanging off junctions by short service drops and carry all customers.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::curation::ObservedSeries;
use crate::engine::{feeder_trajectories, EpisodeConfig, Scenario, Simulator};
use crate::error::{Error, Result};
use crate::fragility::FragilityParams;
use crate::geometry::{Point, Rect};
use crate::hazard::{PatchGrid, WeatherEvent};
use crate::network::{validate_network, FeederIndex, NodeIdx, NodeKind, PowerLine, PowerNetwork, PowerNode};
use crate::rng;
use crate::sewage::{SewageConduit, SewageNetwork, SewagePump};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FixtureSpec {
    pub feeders: usize,
    /// Nodes per feeder, root included.
    pub nodes_per_feeder: usize,
    /// Customers per service point, inclusive.
    pub customers_range: (u64, u64),
    /// Probability that a line is flagged underground in the bundle.
    pub underground_fraction: f64,
    pub vegetation_range: (f64, f64),
    pub pumps: usize,
    /// Conduits per pump, lift conduit included.
    pub conduit_chain_length: usize,
    pub patch_rows: usize,
    pub patch_cols: usize,
    pub seed: u64,
    #[serde(default = "default_feeder_spacing")]
    pub feeder_spacing_m: f64,
    /// Primary span length range.
    #[serde(default = "default_span_range")]
    pub span_range_m: (f64, f64),
    /// Conduit length range.
    #[serde(default = "default_conduit_range")]
    pub conduit_range_m: (f64, f64),
    /// Only junctions at most this many primary spans from the root may host
    /// a pump.
    #[serde(default)]
    pub pump_max_depth: Option<usize>,
    /// Only junctions feeding at least this many customers may host a pump.
    #[serde(default)]
    pub pump_host_min_customers: Option<u64>,
    /// Probability that a new junction extends the newest one rather than a
    /// uniformly chosen earlier junction.
    #[serde(default = "default_trunk_bias")]
    pub trunk_bias: f64,
}

fn default_feeder_spacing() -> f64 {
    2_000.0
}

fn default_span_range() -> (f64, f64) {
    (150.0, 300.0)
}

fn default_trunk_bias() -> f64 {
    0.6
}

fn default_conduit_range() -> (f64, f64) {
    (80.0, 140.0)
}

impl FixtureSpec {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::Config(format!("fixture: {msg}")));
        if self.feeders == 0 {
            return bad("feeders must be at least 1");
        }
        if self.nodes_per_feeder < 2 {
            return bad("nodes_per_feeder must be at least 2");
        }
        if self.customers_range.0 > self.customers_range.1 {
            return bad("customers_range min exceeds max");
        }
        if !(0.0..=1.0).contains(&self.underground_fraction) {
            return bad("underground_fraction must lie in [0, 1]");
        }
        let (v0, v1) = self.vegetation_range;
        if !(0.0 <= v0 && v0 <= v1 && v1 <= 1.0) {
            return bad("vegetation_range must satisfy 0 <= min <= max <= 1");
        }
        if self.pumps > 0 && self.conduit_chain_length == 0 {
            return bad("conduit_chain_length must be at least 1 when pumps are present");
        }
        if self.patch_rows == 0 || self.patch_cols == 0 {
            return bad("patch_rows and patch_cols must be at least 1");
        }
        for (name, (lo, hi)) in [("span_range_m", self.span_range_m), ("conduit_range_m", self.conduit_range_m)] {
            if !(lo > 0.0 && lo <= hi && hi.is_finite()) {
                return bad(&format!("{name} must satisfy 0 < min <= max"));
            }
        }
        if !(0.0..=1.0).contains(&self.trunk_bias) {
            return bad("trunk_bias must lie in [0, 1]");
        }
        if !(self.feeder_spacing_m > 0.0) {
            return bad("feeder_spacing_m must be positive");
        }
        Ok(())
    }
}

/// Committed canonical specs with pinned seeds, and storms sized for the
/// medium and coupled layouts.
///
/// * `broad`: 12 h at 28 m/s over the whole medium footprint.
/// * `squall`: 4 h at 38 m/s; many failures, long repair queue.
/// * `moderate`: 12 h at 20 m/s; pump hosts lose power only occasionally.
pub mod presets {
    use super::FixtureSpec;
    use crate::hazard::SynthEventParams;

    pub const SMALL_JSON: &str = include_str!("../fixtures/small.json");
    pub const MEDIUM_JSON: &str = include_str!("../fixtures/medium.json");
    pub const COUPLED_JSON: &str = include_str!("../fixtures/coupled.json");
    pub const BROAD_JSON: &str = include_str!("../fixtures/storms/broad.json");
    pub const SQUALL_JSON: &str = include_str!("../fixtures/storms/squall.json");
    pub const MODERATE_JSON: &str = include_str!("../fixtures/storms/moderate.json");

    fn parse<T: serde::de::DeserializeOwned>(json: &str) -> T {
        serde_json::from_str(json).expect("committed preset parses")
    }

    pub fn small() -> FixtureSpec {
        parse(SMALL_JSON)
    }

    pub fn medium() -> FixtureSpec {
        parse(MEDIUM_JSON)
    }

    pub fn coupled() -> FixtureSpec {
        parse(COUPLED_JSON)
    }

    pub fn by_name(name: &str) -> Option<FixtureSpec> {
        match name {
            "small" => Some(small()),
            "medium" => Some(medium()),
            "coupled" => Some(coupled()),
            _ => None,
        }
    }

    pub fn broad_storm() -> SynthEventParams {
        parse(BROAD_JSON)
    }

    pub fn squall() -> SynthEventParams {
        parse(SQUALL_JSON)
    }

    pub fn moderate_storm() -> SynthEventParams {
        parse(MODERATE_JSON)
    }

    pub fn storm_by_name(name: &str) -> Option<SynthEventParams> {
        match name {
            "broad" => Some(broad_storm()),
            "squall" => Some(squall()),
            "moderate" => Some(moderate_storm()),
            _ => None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Fixture {
    pub network: PowerNetwork,
    pub sewage: SewageNetwork,
    pub patches: PatchGrid,
}

fn uniform(rng: &mut ChaCha8Rng, (lo, hi): (f64, f64)) -> f64 {
    if lo < hi {
        rng.random_range(lo..hi)
    } else {
        lo
    }
}

fn step(from: Point, len: f64, angle: f64) -> Point {
    Point::new(from.x + len * angle.cos(), from.y + len * angle.sin())
}

struct Junction {
    idx: usize,
    depth: usize,
}

pub fn generate_fixture(spec: &FixtureSpec) -> Result<Fixture> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(rng::mix(spec.seed));
    let mut nodes: Vec<PowerNode> = Vec::new();
    let mut lines: Vec<PowerLine> = Vec::new();
    // Pump host candidates: (node index, depth).
    let mut hosts: Vec<(usize, usize)> = Vec::new();

    for f in 0..spec.feeders {
        let feeder = format!("F{f}");
        let others = spec.nodes_per_feeder - 1;
        let n_junctions = others.div_ceil(3);
        let n_service = others - n_junctions;

        let root = nodes.len();
        nodes.push(PowerNode {
            id: format!("{feeder}_root"),
            position: Point::new(f as f64 * spec.feeder_spacing_m, 0.0),
            feeder_id: feeder.clone(),
            customers: 0,
            patch_id: String::new(),
            kind: NodeKind::SubstationRoot,
        });
        let mut tree = vec![Junction { idx: root, depth: 0 }];
        for j in 0..n_junctions {
            let parent = if rng.random_bool(spec.trunk_bias) {
                tree.len() - 1
            } else {
                rng.random_range(0..tree.len())
            };
            let (p_idx, p_depth) = (tree[parent].idx, tree[parent].depth);
            let angle = PI / 2.0 + rng.random_range(-PI / 3.0..PI / 3.0);
            let position = step(nodes[p_idx].position, uniform(&mut rng, spec.span_range_m), angle);
            let idx = nodes.len();
            // Feeders without service points put customers on junctions.
            let customers = if n_service == 0 {
                rng.random_range(spec.customers_range.0..=spec.customers_range.1)
            } else {
                0
            };
            nodes.push(PowerNode {
                id: format!("{feeder}_j{j}"),
                position,
                feeder_id: feeder.clone(),
                customers,
                patch_id: String::new(),
                kind: NodeKind::Junction,
            });
            let length = nodes[p_idx].position.distance(&position);
            lines.push(PowerLine {
                id: format!("{feeder}_l{j}"),
                from_node: nodes[p_idx].id.clone(),
                to_node: nodes[idx].id.clone(),
                length_m: length,
                overhead: !rng.random_bool(spec.underground_fraction),
                vegetation: uniform(&mut rng, spec.vegetation_range),
                service_drop: false,
                feeder_id: feeder.clone(),
            });
            tree.push(Junction { idx, depth: p_depth + 1 });
            hosts.push((idx, p_depth + 1));
        }
        for s in 0..n_service {
            let j = &tree[1 + rng.random_range(0..n_junctions)];
            let anchor = nodes[j.idx].position;
            let position = step(anchor, rng.random_range(20.0..40.0), rng.random_range(0.0..2.0 * PI));
            let idx = nodes.len();
            nodes.push(PowerNode {
                id: format!("{feeder}_s{s}"),
                position,
                feeder_id: feeder.clone(),
                customers: rng.random_range(spec.customers_range.0..=spec.customers_range.1),
                patch_id: String::new(),
                kind: NodeKind::ServicePoint,
            });
            lines.push(PowerLine {
                id: format!("{feeder}_d{s}"),
                from_node: nodes[j.idx].id.clone(),
                to_node: nodes[idx].id.clone(),
                length_m: anchor.distance(&position),
                overhead: !rng.random_bool(spec.underground_fraction),
                vegetation: uniform(&mut rng, spec.vegetation_range),
                service_drop: true,
                feeder_id: feeder.clone(),
            });
        }
    }

    let positions: Vec<Point> = nodes.iter().map(|n| n.position).collect();
    let extent = Rect::bounding(&positions).expect("at least one node").expanded(50.0);
    let patches = PatchGrid::regular(extent, spec.patch_rows, spec.patch_cols)?;
    for n in &mut nodes {
        n.patch_id = patches.locate(&n.position).expect("node inside extent").id.clone();
    }

    let network = PowerNetwork::new(nodes, lines)?;
    let violations = validate_network(&network);
    if let Some(v) = violations.first() {
        return Err(Error::Invariant(format!(
            "generated fixture breaks a network rule: {}: {}",
            v.subject, v.message
        )));
    }
    let index = FeederIndex::build(&network)?;
    let hosts: Vec<(usize, usize)> = hosts
        .into_iter()
        .filter(|&(i, _)| {
            spec.pump_host_min_customers.is_none_or(|min| {
                let parent = index.parent_line(NodeIdx(i)).expect("junction has a parent");
                index.downstream_customers(parent) >= min
            })
        })
        .collect();
    let sewage = generate_sewage(spec, network.nodes(), &hosts, &mut rng)?;
    sewage.check_power_links(&network)?;
    Ok(Fixture {
        network,
        sewage,
        patches,
    })
}

/// Each pump sits beside its host node; its conduit chain climbs away from
/// the pump in a loose random walk, lift conduit first.
fn generate_sewage(
    spec: &FixtureSpec,
    nodes: &[PowerNode],
    hosts: &[(usize, usize)],
    rng: &mut ChaCha8Rng,
) -> Result<SewageNetwork> {
    if spec.pumps == 0 {
        return Ok(SewageNetwork::empty());
    }
    let eligible: Vec<usize> = hosts
        .iter()
        .filter(|(_, d)| spec.pump_max_depth.is_none_or(|m| *d <= m))
        .map(|(i, _)| *i)
        .collect();
    if eligible.is_empty() {
        return Err(Error::Config(
            "fixture: no junction satisfies pump_max_depth and pump_host_min_customers".into(),
        ));
    }
    let mut conduits = Vec::new();
    let mut pumps = Vec::new();
    for p in 0..spec.pumps {
        let host = *eligible.choose(rng).expect("non-empty");
        let position = step(nodes[host].position, 10.0, rng.random_range(0.0..2.0 * PI));
        let mut heading = rng.random_range(0.0..2.0 * PI);
        let mut downstream_end = position;
        let mut downstream_id: Option<String> = None;
        for c in 0..spec.conduit_chain_length {
            heading += rng.random_range(-PI / 4.0..PI / 4.0);
            let upstream_end = step(downstream_end, uniform(rng, spec.conduit_range_m), heading);
            let id = format!("P{p}_c{c}");
            conduits.push(SewageConduit::new(
                id.clone(),
                vec![upstream_end, downstream_end],
                downstream_id.take(),
            ));
            downstream_id = Some(id);
            downstream_end = upstream_end;
        }
        pumps.push(SewagePump {
            id: format!("P{p}"),
            position,
            power_node_id: nodes[host].id.clone(),
            lift_conduit_id: format!("P{p}_c0"),
        });
    }
    SewageNetwork::new(conduits, pumps)
}

/// Per-feeder trajectory of one hidden episode, seeded independently of any
/// ensemble drawn from the same base seed.
pub fn generate_observed_series(
    net: &PowerNetwork,
    event: &WeatherEvent,
    fragility: &FragilityParams,
    episode: &EpisodeConfig,
    seed: u64,
) -> Result<ObservedSeries> {
    let sim = Simulator::new(Scenario::power_only(net, event, fragility, episode))?;
    let result = sim.run_episode(0, rng::mix(seed ^ rng::OBSERVED_TAG))?;
    let per_feeder: BTreeMap<String, Vec<u64>> =
        feeder_trajectories(net, sim.index(), &result).into_iter().collect();
    Ok(ObservedSeries {
        hours: (0..result.outage_trajectory.len() as i64)
            .map(|h| event.start_time.plus_hours(h))
            .collect(),
        per_feeder_out: per_feeder,
        per_feeder_total: net.feeder_totals(),
    })
}
