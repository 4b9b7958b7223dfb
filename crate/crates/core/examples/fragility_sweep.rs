//! Sweeps the fragility factor and reports mean simulated-to-observed ratios
//! against an observed event generated at factor 0.8.
//!
//!     cargo run --release --example fragility_sweep

use gridres::commands::{sweep, Inputs};
use gridres::config::RunConfig;
use gridres::fixtures::{generate_fixture, generate_observed_series, presets};
use gridres::hazard::synth_wind_event;
use gridres::{summarize, TopologyAssumption};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let fx = generate_fixture(&presets::medium())?;
    let network = fx.network.apply_topology_assumption(TopologyAssumption::ServiceUnderground);
    let event = synth_wind_event(&presets::broad_storm(), &fx.patches, 1)?;
    let cfg = RunConfig {
        episodes: 256,
        base_seed: 77,
        ..RunConfig::default()
    };
    let observed = summarize(
        &generate_observed_series(&network, &event, &cfg.fragility.with_factor(0.8), &cfg.episode, 1000)?.total_out(),
    )?;
    let inputs = Inputs {
        network,
        sewage: fx.sewage,
        patches: Some(fx.patches),
        event,
    };
    let show = |r: Option<f64>| r.map_or("n/a".to_string(), |r| format!("{r:.3}"));
    println!("factor  peak_ratio  duration_ratio  auc_ratio");
    for row in sweep(&inputs, &cfg, &[0.6, 0.7, 0.8, 0.9, 1.0, 1.2], &observed)? {
        println!(
            "{:>6.2}  {:>10}  {:>14}  {:>9}",
            row.factor,
            show(row.peak_ratio),
            show(row.duration_ratio),
            show(row.auc_ratio)
        );
    }
    Ok(())
}
