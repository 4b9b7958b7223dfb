//! Power-distribution and sewage graphs.
//!
//! The power network is a forest of radial feeders. Each feeder is a tree
//! rooted at a substation node, lines are oriented root to leaf, and customers
//! live on nodes. Connectivity queries go through [`FeederIndex`], a
//! breadth-first ordering of every feeder that answers "who is cut off" in a
//! single linear pass.

use std::collections::{BTreeMap, HashMap, HashSet, VecDeque};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Point;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NodeKind {
    SubstationRoot,
    Junction,
    ServicePoint,
}

impl NodeKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            NodeKind::SubstationRoot => "substation_root",
            NodeKind::Junction => "junction",
            NodeKind::ServicePoint => "service_point",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "substation_root" => Some(NodeKind::SubstationRoot),
            "junction" => Some(NodeKind::Junction),
            "service_point" => Some(NodeKind::ServicePoint),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PowerNode {
    pub id: String,
    pub position: Point,
    pub feeder_id: String,
    pub customers: u64,
    pub patch_id: String,
    pub kind: NodeKind,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PowerLine {
    pub id: String,
    pub from_node: String,
    pub to_node: String,
    pub length_m: f64,
    pub overhead: bool,
    pub vegetation: f64,
    pub service_drop: bool,
    pub feeder_id: String,
}

/// Position of a line in [`PowerNetwork::lines`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct LineIdx(pub usize);

/// Position of a node in [`PowerNetwork::nodes`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NodeIdx(pub usize);

/// How service connections are treated for wind exposure.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TopologyAssumption {
    /// Service drops are underground; other lines keep their file flag.
    ServiceUnderground,
    /// Every line is overhead.
    AllOverhead,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PowerNetwork {
    nodes: Vec<PowerNode>,
    lines: Vec<PowerLine>,
    feeders: BTreeMap<String, String>,
    node_lookup: HashMap<String, usize>,
    line_lookup: HashMap<String, usize>,
    line_ends: Vec<(usize, usize)>,
}

impl PowerNetwork {
    /// Builds the network and its id lookups. Duplicate ids and lines that
    /// reference unknown nodes are hard errors; every other structural rule
    /// is reported by [`validate_network`].
    pub fn new(nodes: Vec<PowerNode>, lines: Vec<PowerLine>) -> Result<Self> {
        let mut node_lookup = HashMap::with_capacity(nodes.len());
        for (i, n) in nodes.iter().enumerate() {
            if node_lookup.insert(n.id.clone(), i).is_some() {
                return Err(Error::input(format!("duplicate node id '{}'", n.id)));
            }
        }
        let mut line_lookup = HashMap::with_capacity(lines.len());
        let mut line_ends = Vec::with_capacity(lines.len());
        for (i, l) in lines.iter().enumerate() {
            if line_lookup.insert(l.id.clone(), i).is_some() {
                return Err(Error::input(format!("duplicate line id '{}'", l.id)));
            }
            let from = *node_lookup.get(&l.from_node).ok_or_else(|| {
                Error::input(format!("line '{}' references unknown node '{}'", l.id, l.from_node))
            })?;
            let to = *node_lookup.get(&l.to_node).ok_or_else(|| {
                Error::input(format!("line '{}' references unknown node '{}'", l.id, l.to_node))
            })?;
            line_ends.push((from, to));
        }
        let mut feeders = BTreeMap::new();
        for n in nodes.iter().filter(|n| n.kind == NodeKind::SubstationRoot) {
            feeders.entry(n.feeder_id.clone()).or_insert_with(|| n.id.clone());
        }
        Ok(PowerNetwork {
            nodes,
            lines,
            feeders,
            node_lookup,
            line_lookup,
            line_ends,
        })
    }

    pub fn nodes(&self) -> &[PowerNode] {
        &self.nodes
    }

    pub fn lines(&self) -> &[PowerLine] {
        &self.lines
    }

    /// Feeder id to root node id.
    pub fn feeders(&self) -> &BTreeMap<String, String> {
        &self.feeders
    }

    pub fn node(&self, idx: NodeIdx) -> &PowerNode {
        &self.nodes[idx.0]
    }

    pub fn line(&self, idx: LineIdx) -> &PowerLine {
        &self.lines[idx.0]
    }

    pub fn node_index(&self, id: &str) -> Result<NodeIdx> {
        self.node_lookup
            .get(id)
            .map(|&i| NodeIdx(i))
            .ok_or_else(|| Error::input(format!("unknown node id '{id}'")))
    }

    pub fn line_index(&self, id: &str) -> Result<LineIdx> {
        self.line_lookup
            .get(id)
            .map(|&i| LineIdx(i))
            .ok_or_else(|| Error::input(format!("unknown line id '{id}'")))
    }

    /// `(from, to)` node indices of a line.
    pub fn line_ends(&self, idx: LineIdx) -> (NodeIdx, NodeIdx) {
        let (a, b) = self.line_ends[idx.0];
        (NodeIdx(a), NodeIdx(b))
    }

    pub fn line_midpoint(&self, idx: LineIdx) -> Point {
        let (a, b) = self.line_ends[idx.0];
        self.nodes[a].position.midpoint(&self.nodes[b].position)
    }

    pub fn total_customers(&self) -> u64 {
        self.nodes.iter().map(|n| n.customers).sum()
    }

    /// Customers per feeder.
    pub fn feeder_totals(&self) -> BTreeMap<String, u64> {
        let mut totals: BTreeMap<String, u64> =
            self.feeders.keys().map(|f| (f.clone(), 0)).collect();
        for n in &self.nodes {
            *totals.entry(n.feeder_id.clone()).or_default() += n.customers;
        }
        totals
    }

    /// Customer point layer: each customer-bearing node's position with its
    /// customer count as multiplicity.
    pub fn customer_points(&self) -> Vec<(Point, u64)> {
        self.nodes
            .iter()
            .filter(|n| n.customers > 0)
            .map(|n| (n.position, n.customers))
            .collect()
    }

    fn resolve_lines<'a, I>(&self, ids: I) -> Result<Vec<bool>>
    where
        I: IntoIterator<Item = &'a str>,
    {
        let mut mask = vec![false; self.lines.len()];
        for id in ids {
            mask[self.line_index(id)?.0] = true;
        }
        Ok(mask)
    }

    /// Total customers with no intact path to their feeder root.
    pub fn disconnected_customers<'a, I>(&self, failed_lines: I) -> Result<u64>
    where
        I: IntoIterator<Item = &'a str>,
    {
        let mask = self.resolve_lines(failed_lines)?;
        Ok(FeederIndex::build(self)?.disconnected_customers(&mask))
    }

    /// Customers in the subtree below a line.
    pub fn downstream_customers(&self, line_id: &str) -> Result<u64> {
        let idx = self.line_index(line_id)?;
        Ok(FeederIndex::build(self)?.downstream_customers(idx))
    }

    /// Returns a copy with overhead flags rewritten per `mode`.
    pub fn apply_topology_assumption(&self, mode: TopologyAssumption) -> PowerNetwork {
        let mut out = self.clone();
        for l in &mut out.lines {
            match mode {
                TopologyAssumption::ServiceUnderground => {
                    if l.service_drop {
                        l.overhead = false;
                    }
                }
                TopologyAssumption::AllOverhead => l.overhead = true,
            }
        }
        out
    }
}

/// One broken network rule.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Violation {
    /// Node, line or feeder id the rule is about.
    pub subject: String,
    pub message: String,
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}: {}", self.subject, self.message)
    }
}

struct DisjointSet {
    parent: Vec<usize>,
}

impl DisjointSet {
    fn new(n: usize) -> Self {
        DisjointSet {
            parent: (0..n).collect(),
        }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    /// False when `a` and `b` were already joined.
    fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        self.parent[ra] = rb;
        true
    }
}

/// Checks every power-network invariant. Empty output means the network is a
/// valid radial forest.
pub fn validate_network(net: &PowerNetwork) -> Vec<Violation> {
    let mut out = Vec::new();
    let mut push = |subject: &str, message: String| {
        out.push(Violation {
            subject: subject.to_string(),
            message,
        })
    };

    let mut roots: BTreeMap<&str, Vec<&str>> = BTreeMap::new();
    for n in &net.nodes {
        if n.kind == NodeKind::SubstationRoot {
            roots.entry(&n.feeder_id).or_default().push(&n.id);
            if n.customers != 0 {
                push(&n.id, "substation root carries customers".into());
            }
        }
        if !(n.position.x.is_finite() && n.position.y.is_finite()) {
            push(&n.id, "non-finite position".into());
        }
    }
    for (feeder, ids) in &roots {
        if ids.len() > 1 {
            push(feeder, format!("feeder has {} substation roots", ids.len()));
        }
    }
    let mut seen_feeders = HashSet::new();
    for n in &net.nodes {
        if seen_feeders.insert(n.feeder_id.as_str()) && !roots.contains_key(n.feeder_id.as_str()) {
            push(&n.feeder_id, "feeder has no substation root".into());
        }
    }

    let mut cross_feeder = vec![false; net.lines.len()];
    for (i, l) in net.lines.iter().enumerate() {
        if !(l.length_m > 0.0 && l.length_m.is_finite()) {
            push(&l.id, format!("non-positive length {}", l.length_m));
        }
        if !(0.0..=1.0).contains(&l.vegetation) {
            push(&l.id, format!("vegetation {} outside [0,1]", l.vegetation));
        }
        let (a, b) = net.line_ends[i];
        let (fa, fb) = (&net.nodes[a].feeder_id, &net.nodes[b].feeder_id);
        if fa != fb || *fa != l.feeder_id {
            cross_feeder[i] = true;
            push(
                &l.id,
                format!("line connects feeders '{fa}' and '{fb}' (declared '{}')", l.feeder_id),
            );
        }
    }

    // Cycles via union-find, then orientation and reachability via BFS.
    let mut dsu = DisjointSet::new(net.nodes.len());
    let mut flagged_feeders = HashSet::new();
    for (i, l) in net.lines.iter().enumerate() {
        if cross_feeder[i] {
            continue;
        }
        let (a, b) = net.line_ends[i];
        if !dsu.union(a, b) && flagged_feeders.insert(l.feeder_id.clone()) {
            push(
                &l.feeder_id,
                format!("non-radial feeder: line '{}' closes a cycle", l.id),
            );
        }
    }

    let mut adjacency: Vec<Vec<usize>> = vec![Vec::new(); net.nodes.len()];
    for (i, (a, b)) in net.line_ends.iter().enumerate() {
        if !cross_feeder[i] {
            adjacency[*a].push(i);
            adjacency[*b].push(i);
        }
    }
    let mut depth: Vec<Option<usize>> = vec![None; net.nodes.len()];
    let mut queue = VecDeque::new();
    for ids in roots.values() {
        for id in ids {
            let r = net.node_lookup[*id];
            depth[r] = Some(0);
            queue.push_back(r);
        }
    }
    while let Some(u) = queue.pop_front() {
        let du = depth[u].expect("queued nodes have depth");
        for &li in &adjacency[u] {
            let (a, b) = net.line_ends[li];
            let v = if a == u { b } else { a };
            if depth[v].is_none() {
                depth[v] = Some(du + 1);
                queue.push_back(v);
            }
        }
    }
    for (i, n) in net.nodes.iter().enumerate() {
        if depth[i].is_none() {
            push(&n.id, "node not connected to its feeder root".into());
        }
    }
    for (i, l) in net.lines.iter().enumerate() {
        if cross_feeder[i] {
            continue;
        }
        let (a, b) = net.line_ends[i];
        if let (Some(da), Some(db)) = (depth[a], depth[b]) {
            if da >= db {
                push(&l.id, "line not oriented root to leaf".into());
            }
        }
    }
    out
}

/// Radial ordering of a validated network.
///
/// Nodes are stored parents-first so that connectivity under a failure mask
/// is one forward sweep, and line subtree sums are one backward sweep.
#[derive(Debug, Clone)]
pub struct FeederIndex {
    order: Vec<usize>,
    parent_line: Vec<Option<usize>>,
    customers: Vec<u64>,
    downstream: Vec<u64>,
    depth: Vec<usize>,
    line_from: Vec<usize>,
}

impl FeederIndex {
    pub fn build(net: &PowerNetwork) -> Result<Self> {
        let violations = validate_network(net);
        if let Some(v) = violations.first() {
            return Err(Error::input(format!(
                "network is not a valid radial forest ({} violations, first: {v})",
                violations.len()
            )));
        }
        let n = net.nodes.len();
        let mut children: Vec<Vec<usize>> = vec![Vec::new(); n];
        let mut parent_line = vec![None; n];
        for (i, &(a, b)) in net.line_ends.iter().enumerate() {
            children[a].push(i);
            parent_line[b] = Some(i);
        }
        let mut order = Vec::with_capacity(n);
        let mut depth = vec![0usize; n];
        for root in net.feeders.values() {
            let r = net.node_lookup[root];
            order.push(r);
            let mut head = order.len() - 1;
            while head < order.len() {
                let u = order[head];
                head += 1;
                for &li in &children[u] {
                    let v = net.line_ends[li].1;
                    depth[v] = depth[u] + 1;
                    order.push(v);
                }
            }
        }
        let customers: Vec<u64> = net.nodes.iter().map(|n| n.customers).collect();
        let mut subtree = customers.clone();
        let mut downstream = vec![0u64; net.lines.len()];
        for &u in order.iter().rev() {
            if let Some(li) = parent_line[u] {
                downstream[li] = subtree[u];
                let p = net.line_ends[li].0;
                subtree[p] += subtree[u];
            }
        }
        Ok(FeederIndex {
            order,
            parent_line,
            customers,
            downstream,
            depth,
            line_from: net.line_ends.iter().map(|&(a, _)| a).collect(),
        })
    }

    /// Node connectivity to the feeder root given a per-line failure mask.
    pub fn connected_nodes(&self, net: &PowerNetwork, failed: &[bool]) -> Vec<bool> {
        let mut connected = vec![true; self.customers.len()];
        for &u in &self.order {
            if let Some(li) = self.parent_line[u] {
                let p = net.line_ends[li].0;
                connected[u] = connected[p] && !failed[li];
            }
        }
        connected
    }

    /// Sum of customers on nodes cut off from their root. Only failed lines
    /// without a failed ancestor contribute, so nested failures count once.
    pub fn disconnected_customers(&self, failed: &[bool]) -> u64 {
        failed
            .iter()
            .enumerate()
            .filter(|(_, &f)| f)
            .map(|(li, _)| li)
            .filter(|&li| !self.has_failed_ancestor(li, failed))
            .map(|li| self.downstream[li])
            .sum()
    }

    fn has_failed_ancestor(&self, line: usize, failed: &[bool]) -> bool {
        let mut cur = self.upstream_line(line);
        while let Some(li) = cur {
            if failed[li] {
                return true;
            }
            cur = self.upstream_line(li);
        }
        false
    }

    fn upstream_line(&self, line: usize) -> Option<usize> {
        self.parent_line[self.line_from[line]]
    }

    pub fn downstream_customers(&self, line: LineIdx) -> u64 {
        self.downstream[line.0]
    }

    /// True when no line on the node's path to its root is failed.
    pub fn node_connected(&self, node: NodeIdx, failed: &[bool]) -> bool {
        let mut cur = self.parent_line[node.0];
        while let Some(li) = cur {
            if failed[li] {
                return false;
            }
            cur = self.upstream_line(li);
        }
        true
    }

    /// Tree depth of a node (root = 0).
    pub fn depth(&self, node: NodeIdx) -> usize {
        self.depth[node.0]
    }

    pub fn parent_line(&self, node: NodeIdx) -> Option<LineIdx> {
        self.parent_line[node.0].map(LineIdx)
    }
}
