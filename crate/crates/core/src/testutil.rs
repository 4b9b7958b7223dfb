//! Small hand-built networks shared by unit tests.

use crate::geometry::Point;
use crate::network::{NodeKind, PowerLine, PowerNetwork, PowerNode};
use crate::sewage::{SewageConduit, SewageNetwork, SewagePump};

pub fn node(id: &str, feeder: &str, x: f64, y: f64, customers: u64) -> PowerNode {
    PowerNode {
        id: id.into(),
        position: Point::new(x, y),
        feeder_id: feeder.into(),
        customers,
        patch_id: "p".into(),
        kind: if customers == 0 && id.starts_with("root") {
            NodeKind::SubstationRoot
        } else if customers == 0 {
            NodeKind::Junction
        } else {
            NodeKind::ServicePoint
        },
    }
}

pub fn line(id: &str, from: &str, to: &str, feeder: &str) -> PowerLine {
    PowerLine {
        id: id.into(),
        from_node: from.into(),
        to_node: to.into(),
        length_m: 100.0,
        overhead: true,
        vegetation: 0.0,
        service_drop: false,
        feeder_id: feeder.into(),
    }
}

/// root–a–b–c–d along the x axis, 100 m apart, customers 0/10/20/30/40.
/// Lines `ra`, `ab`, `bc`, `cd`.
pub fn chain() -> PowerNetwork {
    let ids = ["root", "a", "b", "c", "d"];
    let nodes = ids
        .iter()
        .enumerate()
        .map(|(i, id)| node(id, "F", i as f64 * 100.0, 0.0, i as u64 * 10))
        .collect();
    let lines = ids
        .windows(2)
        .map(|w| line(&format!("{}{}", &w[0][..1], w[1]), w[0], w[1], "F"))
        .collect();
    PowerNetwork::new(nodes, lines).unwrap()
}

/// Straight conduit chain ending at a pump at the origin; conduit `k` lies
/// further upstream than `k−1` and has length `lengths[k]`.
pub fn conduit_chain(lengths: &[f64], power_node: &str) -> SewageNetwork {
    let mut x = 0.0;
    let mut conduits = Vec::new();
    for (k, len) in lengths.iter().enumerate() {
        conduits.push(SewageConduit::new(
            format!("c{k}"),
            vec![Point::new(x - len, 0.0), Point::new(x, 0.0)],
            (k > 0).then(|| format!("c{}", k - 1)),
        ));
        x -= len;
    }
    let pump = SewagePump {
        id: "P".into(),
        position: Point::new(0.0, 0.0),
        power_node_id: power_node.into(),
        lift_conduit_id: "c0".into(),
    };
    SewageNetwork::new(conduits, vec![pump]).unwrap()
}
