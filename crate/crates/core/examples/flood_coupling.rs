//! Couples pump outages to sewage backup on the coupled preset and bins
//! flood occurrence by power-outage AUC decile.
//!
//!     cargo run --release --example flood_coupling

use gridres::commands::summaries;
use gridres::engine::{run_ensemble, EpisodeConfig, Scenario};
use gridres::fixtures::{generate_fixture, presets};
use gridres::hazard::synth_wind_event;
use gridres::metrics::decile_report;
use gridres::{FloodConfig, FragilityParams, TopologyAssumption};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let fx = generate_fixture(&presets::coupled())?;
    let net = fx.network.apply_topology_assumption(TopologyAssumption::ServiceUnderground);
    let event = synth_wind_event(&presets::moderate_storm(), &fx.patches, 1)?;
    let (frag, cfg, flood) = (FragilityParams::default(), EpisodeConfig::default(), FloodConfig::default());
    println!(
        "{} pumps, {} conduits; lag {} h, growth {}-{} m/h",
        fx.sewage.pumps().len(),
        fx.sewage.conduits().len(),
        flood.pump_lag_h,
        flood.growth_min_m,
        flood.growth_max_m
    );

    let scenario = Scenario {
        net: &net,
        event: &event,
        fragility: &frag,
        episode: &cfg,
        sewage: Some(&fx.sewage),
        flood: Some(&flood),
    };
    let runs = run_ensemble(scenario, 5, 1000, None)?;
    let auc: Vec<f64> = summaries(&runs)?.iter().map(|s| s.auc_customer_hours).collect();
    let metrics: Vec<_> = runs.iter().map(|r| r.flood.as_ref().expect("coupled run").metrics).collect();
    let flagged: Vec<bool> = metrics.iter().map(|m| m.flooded()).collect();
    let flood_auc: Vec<f64> = metrics.iter().map(|m| m.customer_auc).collect();

    let n_flood = flagged.iter().filter(|&&f| f).count();
    println!("flooding in {n_flood} of {} episodes", runs.len());
    if let Some(worst) = metrics.iter().max_by(|a, b| a.customer_auc.total_cmp(&b.customer_auc)) {
        println!(
            "worst flood: {} customers at peak, {} h, {:.0} m2 at peak",
            worst.customer_peak, worst.persistence_h, worst.area_peak
        );
    }
    println!("decile  occurrence  mean flood customer-hours");
    for d in decile_report(&auc, &flagged, &flood_auc)? {
        println!("{:>6}  {:>10.2}  {:>10.1}", d.decile, d.flood_occurrence, d.mean_flood_customer_auc);
    }
    Ok(())
}
