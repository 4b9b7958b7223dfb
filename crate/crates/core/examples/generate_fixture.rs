//! Writes a preset bundle (nodes, lines, conduits, pumps, patches) plus a
//! synthetic storm to a directory the `gridres` binary can read.
//!
//!     cargo run --example generate_fixture [small|medium|coupled] [dir]

use gridres::fixtures::{generate_fixture, presets};
use gridres::hazard::synth_wind_event;
use gridres::{io, WindTypingThresholds};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let name = args.next().unwrap_or_else(|| "small".into());
    let dir = args
        .next()
        .map(Into::into)
        .unwrap_or_else(|| std::env::temp_dir().join(format!("gridres-{name}")));
    let spec = presets::by_name(&name).ok_or_else(|| format!("unknown preset '{name}'"))?;

    let fx = generate_fixture(&spec)?;
    io::write_fixture(&dir, &fx)?;
    let event = synth_wind_event(&presets::broad_storm(), &fx.patches, spec.seed)?.with_type(&WindTypingThresholds::default());
    io::write_weather_event(&dir.join("weather_event.csv"), &event)?;

    let overhead = fx.network.lines().iter().filter(|l| l.overhead).count();
    println!(
        "{name}: {} nodes, {} lines ({overhead} overhead), {} customers, {} pumps, {} patches",
        fx.network.nodes().len(),
        fx.network.lines().len(),
        fx.network.total_customers(),
        fx.sewage.pumps().len(),
        fx.patches.len()
    );
    println!("event {}: {} h, typed {:?}", event.event_id, event.hazard_window_hours, event.event_type);
    println!("wrote {}", dir.display());
    Ok(())
}
