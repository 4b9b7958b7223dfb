//! Builds the small preset network and asks radial-topology questions:
//! validation, downstream customers per line, and customers cut off by a
//! failure set.
//!
//!     cargo run --example network_queries

use gridres::fixtures::{generate_fixture, presets};
use gridres::network::FeederIndex;
use gridres::{validate_network, TopologyAssumption};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let fx = generate_fixture(&presets::small())?;
    let net = &fx.network;
    println!(
        "{} feeders, {} nodes, {} lines, {} customers",
        net.feeders().len(),
        net.nodes().len(),
        net.lines().len(),
        net.total_customers()
    );
    println!("rule violations: {}", validate_network(net).len());

    let index = FeederIndex::build(net)?;
    let mut by_load: Vec<(&str, u64)> = net
        .lines()
        .iter()
        .map(|l| (l.id.as_str(), net.downstream_customers(&l.id).unwrap()))
        .collect();
    by_load.sort_by(|a, b| b.1.cmp(&a.1));
    println!("most critical lines:");
    for (id, n) in by_load.iter().take(5) {
        println!("  {id:<8} {n:>4} customers downstream");
    }

    let worst: Vec<&str> = by_load.iter().take(3).map(|(id, _)| *id).collect();
    println!("failing {worst:?} cuts off {} customers", net.disconnected_customers(worst.iter().copied())?);
    let mut failed = vec![false; net.lines().len()];
    failed[0] = true;
    println!("line {} alone cuts off {}", net.lines()[0].id, index.disconnected_customers(&failed));

    for mode in [TopologyAssumption::ServiceUnderground, TopologyAssumption::AllOverhead] {
        let n = net.apply_topology_assumption(mode);
        println!("{mode:?}: {} overhead lines", n.lines().iter().filter(|l| l.overhead).count());
    }
    Ok(())
}
