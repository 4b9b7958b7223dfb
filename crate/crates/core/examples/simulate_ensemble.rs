//! One Monte Carlo ensemble on the medium preset under the broad storm:
//! summary distribution per metric and the CSV outputs written to a
//! temporary directory.
//!
//!     cargo run --release --example simulate_ensemble [episodes]

use gridres::commands::summaries;
use gridres::engine::{run_ensemble, EpisodeConfig, Scenario};
use gridres::fixtures::{generate_fixture, presets};
use gridres::hazard::synth_wind_event;
use gridres::metrics::{EnsembleDistribution, Metric};
use gridres::{io, FragilityParams, TopologyAssumption};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let episodes: usize = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(256);
    let fx = generate_fixture(&presets::medium())?;
    let net = fx.network.apply_topology_assumption(TopologyAssumption::ServiceUnderground);
    let event = synth_wind_event(&presets::broad_storm(), &fx.patches, 1)?;
    let frag = FragilityParams::default();
    let cfg = EpisodeConfig::default();

    let t = std::time::Instant::now();
    let runs = run_ensemble(Scenario::power_only(&net, &event, &frag, &cfg), 7, episodes, None)?;
    println!("{episodes} episodes in {:.2}s", t.elapsed().as_secs_f64());

    let s = summaries(&runs)?;
    for m in Metric::ALL {
        let d = EnsembleDistribution::from_summaries(m, &s)?;
        println!("{:<9} mean {:>10.1}  p05 {:>10.1}  p95 {:>10.1}", m.name(), d.mean, d.p05, d.p95);
    }
    let failures: usize = runs.iter().map(|r| r.failure_log.len()).sum();
    println!("mean failed lines per episode: {:.1}", failures as f64 / episodes as f64);

    let out = std::env::temp_dir().join("gridres-simulate");
    std::fs::create_dir_all(&out)?;
    io::write_episodes(&out.join("episodes.csv"), &runs)?;
    io::write_repairs(&out.join("repairs.csv"), &net, &runs)?;
    println!("wrote {}", out.display());
    Ok(())
}
