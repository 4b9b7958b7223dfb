//! Compares the four repair orderings, crew capacity and the topology
//! assumption on the medium preset under the short squall. Every variant
//! reuses the same base seed, so failure draws are shared.
//!
//!     cargo run --release --example repair_policies

use gridres::commands::{mean_summary, summaries};
use gridres::engine::{run_ensemble, EpisodeConfig, RepairOrdering, Scenario};
use gridres::fixtures::{generate_fixture, presets};
use gridres::hazard::synth_wind_event;
use gridres::{FragilityParams, PowerNetwork, TopologyAssumption, WeatherEvent};

fn row(label: &str, net: &PowerNetwork, event: &WeatherEvent, cfg: &EpisodeConfig) -> Result<(), gridres::Error> {
    let frag = FragilityParams::default();
    let runs = run_ensemble(Scenario::power_only(net, event, &frag, cfg), 11, 256, None)?;
    let [peak, dur, auc] = mean_summary(&summaries(&runs)?);
    println!("{label:<28} {peak:>9.0} {dur:>8.2} {auc:>11.0}");
    Ok(())
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let fx = generate_fixture(&presets::medium())?;
    let su = fx.network.apply_topology_assumption(TopologyAssumption::ServiceUnderground);
    let ao = fx.network.apply_topology_assumption(TopologyAssumption::AllOverhead);
    let event = synth_wind_event(&presets::squall(), &fx.patches, 1)?;
    let base = EpisodeConfig::default();

    println!("{:<28} {:>9} {:>8} {:>11}", "setup", "peak", "dur_h", "auc");
    row("baseline (proximity)", &su, &event, &base)?;
    row("all overhead", &ao, &event, &base)?;
    row("6 crews, U(2,4) h", &su, &event, &EpisodeConfig { crews: 6, repair_time_h: (2.0, 4.0), ..base.clone() })?;
    for o in [RepairOrdering::Random, RepairOrdering::Criticality, RepairOrdering::HybridDynamic] {
        row(&format!("{o:?} ordering"), &su, &event, &EpisodeConfig { ordering: o, ..base.clone() })?;
    }
    Ok(())
}
