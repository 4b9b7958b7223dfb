//! Sewage collection graph: conduits drain toward an outfall through
//! `downstream_id` links; pumps lift flow at the downstream end of their
//! lift conduit.

use std::collections::{HashMap, VecDeque};

use crate::error::{Error, Result};
use crate::geometry::{polyline_length, Point, Rect};
use crate::network::PowerNetwork;

#[derive(Debug, Clone, PartialEq)]
pub struct SewageConduit {
    pub id: String,
    pub polyline: Vec<Point>,
    pub downstream_id: Option<String>,
    pub length_m: f64,
}

impl SewageConduit {
    /// Conduit whose length is the polyline length.
    pub fn new(id: impl Into<String>, polyline: Vec<Point>, downstream_id: Option<String>) -> Self {
        let length_m = polyline_length(&polyline);
        SewageConduit {
            id: id.into(),
            polyline,
            downstream_id,
            length_m,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SewagePump {
    pub id: String,
    pub position: Point,
    pub power_node_id: String,
    pub lift_conduit_id: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ConduitIdx(pub usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PumpIdx(pub usize);

/// A conduit reached by upstream surcharge and its path distance from the
/// pump (lift conduit length included).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Reach {
    pub conduit: ConduitIdx,
    pub distance_m: f64,
}

#[derive(Debug, Clone)]
pub struct SewageNetwork {
    conduits: Vec<SewageConduit>,
    pumps: Vec<SewagePump>,
    upstream: Vec<Vec<usize>>,
    lift: Vec<usize>,
    conduit_lookup: HashMap<String, usize>,
    pump_lookup: HashMap<String, usize>,
    bboxes: Vec<Rect>,
}

impl SewageNetwork {
    /// Validates ids, downstream links, acyclicity, polyline lengths and pump
    /// lift conduits.
    pub fn new(conduits: Vec<SewageConduit>, pumps: Vec<SewagePump>) -> Result<Self> {
        let mut conduit_lookup = HashMap::with_capacity(conduits.len());
        for (i, c) in conduits.iter().enumerate() {
            if conduit_lookup.insert(c.id.clone(), i).is_some() {
                return Err(Error::input(format!("duplicate conduit id '{}'", c.id)));
            }
            if c.polyline.len() < 2 {
                return Err(Error::input(format!("conduit '{}' needs at least 2 vertices", c.id)));
            }
            let geometric = polyline_length(&c.polyline);
            if !(c.length_m > 0.0) || (c.length_m - geometric).abs() > 1e-6 * geometric.max(1e-12)
            {
                return Err(Error::input(format!(
                    "conduit '{}' length {} does not match polyline length {geometric}",
                    c.id, c.length_m
                )));
            }
        }
        let mut downstream = vec![None; conduits.len()];
        let mut upstream = vec![Vec::new(); conduits.len()];
        for (i, c) in conduits.iter().enumerate() {
            if let Some(d) = &c.downstream_id {
                let j = *conduit_lookup.get(d).ok_or_else(|| {
                    Error::input(format!("conduit '{}' drains to unknown conduit '{d}'", c.id))
                })?;
                downstream[i] = Some(j);
                upstream[j].push(i);
            }
        }
        // Every chain must reach an outfall within n steps.
        for start in 0..conduits.len() {
            let mut cur = start;
            let mut steps = 0;
            while let Some(next) = downstream[cur] {
                cur = next;
                steps += 1;
                if steps > conduits.len() {
                    return Err(Error::input(format!(
                        "conduit '{}' is on a downstream cycle",
                        conduits[start].id
                    )));
                }
            }
        }
        let mut pump_lookup = HashMap::with_capacity(pumps.len());
        let mut lift = Vec::with_capacity(pumps.len());
        for (i, p) in pumps.iter().enumerate() {
            if pump_lookup.insert(p.id.clone(), i).is_some() {
                return Err(Error::input(format!("duplicate pump id '{}'", p.id)));
            }
            let c = *conduit_lookup.get(&p.lift_conduit_id).ok_or_else(|| {
                Error::input(format!(
                    "pump '{}' lifts unknown conduit '{}'",
                    p.id, p.lift_conduit_id
                ))
            })?;
            lift.push(c);
        }
        let bboxes = conduits
            .iter()
            .map(|c| Rect::bounding(&c.polyline).expect("validated non-empty"))
            .collect();
        Ok(SewageNetwork {
            conduits,
            pumps,
            upstream,
            lift,
            conduit_lookup,
            pump_lookup,
            bboxes,
        })
    }

    pub fn empty() -> Self {
        SewageNetwork::new(Vec::new(), Vec::new()).expect("empty network is valid")
    }

    pub fn conduits(&self) -> &[SewageConduit] {
        &self.conduits
    }

    pub fn pumps(&self) -> &[SewagePump] {
        &self.pumps
    }

    pub fn conduit(&self, idx: ConduitIdx) -> &SewageConduit {
        &self.conduits[idx.0]
    }

    pub fn conduit_bbox(&self, idx: ConduitIdx) -> &Rect {
        &self.bboxes[idx.0]
    }

    pub fn conduit_index(&self, id: &str) -> Result<ConduitIdx> {
        self.conduit_lookup
            .get(id)
            .map(|&i| ConduitIdx(i))
            .ok_or_else(|| Error::input(format!("unknown conduit id '{id}'")))
    }

    pub fn pump_index(&self, id: &str) -> Result<PumpIdx> {
        self.pump_lookup
            .get(id)
            .map(|&i| PumpIdx(i))
            .ok_or_else(|| Error::input(format!("unknown pump id '{id}'")))
    }

    /// Every pump must be fed by an existing power node.
    pub fn check_power_links(&self, net: &PowerNetwork) -> Result<()> {
        for p in &self.pumps {
            net.node_index(&p.power_node_id).map_err(|_| {
                Error::input(format!(
                    "pump '{}' references unknown power node '{}'",
                    p.id, p.power_node_id
                ))
            })?;
        }
        Ok(())
    }

    /// Conduits reached by walking reversed downstream links from a pump's
    /// lift conduit. A conduit's distance is the summed length of every
    /// conduit on the path, itself and the lift conduit included; it is kept
    /// when that distance is within `max_distance_m`. The lift conduit is
    /// always part of the result.
    pub fn upstream_conduits(&self, pump: PumpIdx, max_distance_m: f64) -> Vec<Reach> {
        let lift = self.lift[pump.0];
        let mut out = vec![Reach {
            conduit: ConduitIdx(lift),
            distance_m: self.conduits[lift].length_m,
        }];
        let mut queue = VecDeque::from([(lift, self.conduits[lift].length_m)]);
        while let Some((c, dist)) = queue.pop_front() {
            for &u in &self.upstream[c] {
                let d = dist + self.conduits[u].length_m;
                if d <= max_distance_m {
                    out.push(Reach {
                        conduit: ConduitIdx(u),
                        distance_m: d,
                    });
                    queue.push_back((u, d));
                }
            }
        }
        out.sort_by_key(|r| r.conduit);
        out
    }

    /// Id-based variant of [`SewageNetwork::upstream_conduits`].
    pub fn upstream_conduits_by_id(
        &self,
        pump_id: &str,
        max_distance_m: f64,
    ) -> Result<Vec<(String, f64)>> {
        let pump = self.pump_index(pump_id)?;
        Ok(self
            .upstream_conduits(pump, max_distance_m)
            .into_iter()
            .map(|r| (self.conduits[r.conduit.0].id.clone(), r.distance_m))
            .collect())
    }
}
