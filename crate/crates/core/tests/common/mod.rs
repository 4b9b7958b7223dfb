//! Random instance generators and brute-force oracles shared by the
//! integration tests. The oracles deliberately avoid the library's own
//! indexes and geometry helpers.

#![allow(dead_code)]

use std::collections::{BTreeMap, HashMap, VecDeque};

use gridres::geometry::Point;
use gridres::network::{NodeKind, PowerLine, PowerNetwork, PowerNode};
use gridres::sewage::{SewageConduit, SewageNetwork, SewagePump};
use rand::Rng;

/// A random radial forest with 1 to 4 feeders and at most `max_lines` lines.
pub fn random_network<R: Rng>(rng: &mut R, max_lines: usize) -> PowerNetwork {
    let feeders = rng.random_range(1..=4usize);
    let total_lines = rng.random_range(feeders..=max_lines.max(feeders));
    let mut nodes = Vec::new();
    let mut lines = Vec::new();
    for f in 0..feeders {
        let fid = format!("F{f}");
        let root = nodes.len();
        nodes.push(PowerNode {
            id: format!("{fid}_r"),
            position: Point::new(f as f64 * 1000.0, 0.0),
            feeder_id: fid.clone(),
            customers: 0,
            patch_id: "P".into(),
            kind: NodeKind::SubstationRoot,
        });
        let share = total_lines / feeders + usize::from(f < total_lines % feeders);
        let mut members = vec![root];
        for k in 0..share {
            let parent = members[rng.random_range(0..members.len())];
            let idx = nodes.len();
            let pos = Point::new(
                nodes[parent].position.x + rng.random_range(-80.0..80.0),
                nodes[parent].position.y + rng.random_range(10.0..120.0),
            );
            nodes.push(PowerNode {
                id: format!("{fid}_n{k}"),
                position: pos,
                feeder_id: fid.clone(),
                customers: rng.random_range(0..50),
                patch_id: "P".into(),
                kind: NodeKind::Junction,
            });
            lines.push(PowerLine {
                id: format!("{fid}_l{k}"),
                from_node: nodes[parent].id.clone(),
                to_node: nodes[idx].id.clone(),
                length_m: nodes[parent].position.distance(&pos).max(1.0),
                overhead: rng.random_bool(0.8),
                vegetation: rng.random_range(0.0..1.0),
                service_drop: false,
                feeder_id: fid.clone(),
            });
            members.push(idx);
        }
    }
    PowerNetwork::new(nodes, lines).expect("generated network is valid")
}

/// Customers unreachable from any substation root over intact lines, by
/// plain breadth-first search on an undirected adjacency list.
pub fn bfs_disconnected(net: &PowerNetwork, failed: &[bool]) -> u64 {
    let mut adj: HashMap<&str, Vec<&str>> = HashMap::new();
    for (i, l) in net.lines().iter().enumerate() {
        if failed[i] {
            continue;
        }
        adj.entry(&l.from_node).or_default().push(&l.to_node);
        adj.entry(&l.to_node).or_default().push(&l.from_node);
    }
    let mut seen: HashMap<&str, bool> = HashMap::new();
    let mut queue: VecDeque<&str> = net
        .nodes()
        .iter()
        .filter(|n| n.kind == NodeKind::SubstationRoot)
        .map(|n| n.id.as_str())
        .collect();
    for &r in &queue {
        seen.insert(r, true);
    }
    while let Some(n) = queue.pop_front() {
        for &m in adj.get(n).into_iter().flatten() {
            if seen.insert(m, true).is_none() {
                queue.push_back(m);
            }
        }
    }
    net.nodes()
        .iter()
        .filter(|n| !seen.contains_key(n.id.as_str()))
        .map(|n| n.customers)
        .sum()
}

/// A random conduit forest: every pump's lift conduit roots a random tree.
pub fn random_sewage<R: Rng>(rng: &mut R, power_node: &str) -> SewageNetwork {
    let pumps = rng.random_range(1..=3usize);
    let mut conduits: Vec<SewageConduit> = Vec::new();
    let mut pump_list = Vec::new();
    for p in 0..pumps {
        let base = Point::new(p as f64 * 2000.0, 0.0);
        let first = conduits.len();
        let n = rng.random_range(1..=8usize);
        let mut ends: Vec<Point> = Vec::new();
        for c in 0..n {
            let (downstream, start) = if c == 0 {
                (None, base)
            } else {
                let d = rng.random_range(0..c);
                (Some(conduits[first + d].id.clone()), ends[d])
            };
            let end = Point::new(
                start.x + rng.random_range(-150.0..150.0),
                start.y + rng.random_range(20.0..150.0),
            );
            let mut poly = vec![end];
            if rng.random_bool(0.3) {
                poly.push(Point::new((end.x + start.x) / 2.0 + 15.0, (end.y + start.y) / 2.0));
            }
            poly.push(start);
            conduits.push(SewageConduit::new(format!("P{p}_c{c}"), poly, downstream));
            ends.push(end);
        }
        pump_list.push(SewagePump {
            id: format!("P{p}"),
            position: base,
            power_node_id: power_node.into(),
            lift_conduit_id: format!("P{p}_c0"),
        });
    }
    SewageNetwork::new(conduits, pump_list).expect("generated sewage is valid")
}

fn seg_dist(p: Point, a: Point, b: Point) -> f64 {
    let (dx, dy) = (b.x - a.x, b.y - a.y);
    let len2 = dx * dx + dy * dy;
    let t = if len2 == 0.0 {
        0.0
    } else {
        (((p.x - a.x) * dx + (p.y - a.y) * dy) / len2).clamp(0.0, 1.0)
    };
    let (qx, qy) = (a.x + t * dx, a.y + t * dy);
    ((p.x - qx).powi(2) + (p.y - qy).powi(2)).sqrt()
}

pub fn polyline_dist(p: Point, line: &[Point]) -> f64 {
    line.windows(2).map(|w| seg_dist(p, w[0], w[1])).fold(f64::INFINITY, f64::min)
}

/// Customers within `radius` of any flooded conduit's centreline.
pub fn flooded_customers_oracle(
    flooded: &BTreeMap<usize, f64>,
    sewage: &SewageNetwork,
    points: &[(Point, u64)],
) -> u64 {
    points
        .iter()
        .filter(|(p, _)| {
            flooded
                .iter()
                .any(|(&c, &r)| polyline_dist(*p, &sewage.conduits()[c].polyline) <= r)
        })
        .map(|(_, n)| n)
        .sum()
}

/// Per-conduit path length from the pump: sum of lengths along the chain of
/// downstream links, both ends included.
pub fn path_length_oracle(sewage: &SewageNetwork, conduit: usize) -> (String, f64) {
    let by_id: HashMap<&str, &SewageConduit> =
        sewage.conduits().iter().map(|c| (c.id.as_str(), c)).collect();
    let mut cur = &sewage.conduits()[conduit];
    let mut total = 0.0;
    loop {
        total += cur
            .polyline
            .windows(2)
            .map(|w| ((w[1].x - w[0].x).powi(2) + (w[1].y - w[0].y).powi(2)).sqrt())
            .sum::<f64>();
        match &cur.downstream_id {
            Some(d) => cur = by_id[d.as_str()],
            None => return (cur.id.clone(), total),
        }
    }
}

/// Rule application by exhaustive pairwise linking: two candidate hours
/// belong together when at most `max_gap` hours separate them; linked groups
/// are closed transitively, then groups spanning fewer than `min_duration`
/// hours are dropped. Returns inclusive (start, end) pairs.
pub fn curation_oracle(candidates: &[i64], max_gap: i64, min_duration: i64) -> Vec<(i64, i64)> {
    let mut c = candidates.to_vec();
    c.sort();
    c.dedup();
    let n = c.len();
    let mut group: Vec<usize> = (0..n).collect();
    fn find(g: &mut Vec<usize>, i: usize) -> usize {
        if g[i] != i {
            let r = find(g, g[i]);
            g[i] = r;
        }
        g[i]
    }
    for i in 0..n {
        for j in 0..n {
            if i != j && (c[i] - c[j]).abs() - 1 <= max_gap {
                let (a, b) = (find(&mut group, i), find(&mut group, j));
                group[a] = b;
            }
        }
    }
    let mut spans: BTreeMap<usize, (i64, i64)> = BTreeMap::new();
    for i in 0..n {
        let g = find(&mut group, i);
        let e = spans.entry(g).or_insert((c[i], c[i]));
        e.0 = e.0.min(c[i]);
        e.1 = e.1.max(c[i]);
    }
    let mut out: Vec<(i64, i64)> = spans
        .into_values()
        .filter(|(s, e)| e - s + 1 >= min_duration)
        .collect();
    out.sort();
    out
}
