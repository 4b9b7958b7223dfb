//! Runs the largest rung once and reads smaller rungs as its prefixes,
//! reporting each rung's means and the stability verdict.
//!
//!     cargo run --release --example convergence_ladder

use gridres::commands::summaries;
use gridres::engine::{run_ensemble, EpisodeConfig, Scenario};
use gridres::fixtures::{generate_fixture, presets};
use gridres::hazard::synth_wind_event;
use gridres::metrics::{convergence_from_summaries, Metric, DEFAULT_STABILITY_THRESHOLD};
use gridres::{FragilityParams, TopologyAssumption};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let fx = generate_fixture(&presets::medium())?;
    let net = fx.network.apply_topology_assumption(TopologyAssumption::ServiceUnderground);
    let event = synth_wind_event(&presets::broad_storm(), &fx.patches, 1)?;
    let (frag, cfg) = (FragilityParams::default(), EpisodeConfig::default());
    let ladder = [32, 64, 128, 256, 512, 1000];

    let runs = run_ensemble(Scenario::power_only(&net, &event, &frag, &cfg), 5, 1000, None)?;
    let report = convergence_from_summaries(&ladder, &summaries(&runs)?, DEFAULT_STABILITY_THRESHOLD)?;
    println!("{:>5} {:>10} {:>8} {:>11}", "rung", "peak", "dur_h", "auc");
    for rung in ladder {
        let m = |x| report.mean(rung, x).unwrap();
        println!("{rung:>5} {:>10.1} {:>8.2} {:>11.1}", m(Metric::Peak), m(Metric::Duration), m(Metric::Auc));
    }
    println!("{}", report.verdict);
    Ok(())
}
