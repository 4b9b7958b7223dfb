//! The operations behind each `gridres` subcommand. Each reads inputs named
//! by a [`RunConfig`], writes its outputs under `output_dir` and returns what
//! it computed so callers can report or test it.

use std::path::{Path, PathBuf};
use std::time::Instant;

use log::info;
use serde::Serialize;

use crate::config::RunConfig;
use crate::curation::{curate, observed_outage_series, CuratedEvent, ObservedSeries};
use crate::engine::{EpisodeResult, Scenario, Simulator};
use crate::error::{Error, Result};
use crate::fixtures::{generate_fixture, generate_observed_series, Fixture, FixtureSpec};
use crate::fragility::FragilityParams;
use crate::hazard::{map_grid_to_patches, spatial_stats, synth_wind_event, EventType, PatchGrid, WeatherEvent};
use crate::hours::HourStamp;
use crate::io::{self, EnsembleMeta, SweepRow};
use crate::metrics::{
    assess, convergence_from_summaries, decile_report, summarize, AssessmentReport, ConvergenceReport,
    DecileRow, Metric, SummaryMetrics,
};
use crate::network::PowerNetwork;
use crate::sewage::SewageNetwork;

/// Network (topology applied), sewage overlay, patches and event for a run.
#[derive(Debug, Clone)]
pub struct Inputs {
    pub network: PowerNetwork,
    pub sewage: SewageNetwork,
    pub patches: Option<PatchGrid>,
    pub event: WeatherEvent,
}

fn network_dir(cfg: &RunConfig) -> Result<&Path> {
    cfg.network_dir
        .as_deref()
        .ok_or_else(|| Error::Config("network_dir is required".into()))
}

fn load_event(cfg: &RunConfig, patches: Option<&PatchGrid>) -> Result<WeatherEvent> {
    let event = match (&cfg.event_file, &cfg.synth_event) {
        (Some(path), None) => io::read_weather_event(path)?,
        (None, Some(params)) => {
            let grid = patches.ok_or_else(|| {
                Error::Config("synth_event needs patches.csv in the network directory".into())
            })?;
            synth_wind_event(params, grid, cfg.base_seed)?
        }
        _ => return Err(Error::Config("config needs exactly one of event_file or synth_event".into())),
    };
    Ok(event.with_type(&cfg.typing))
}

pub fn load_inputs(cfg: &RunConfig) -> Result<Inputs> {
    let bundle = io::read_network_dir(network_dir(cfg)?)?;
    let network = match cfg.topology {
        Some(mode) => bundle.network.apply_topology_assumption(mode),
        None => bundle.network,
    };
    let event = load_event(cfg, bundle.patches.as_ref())?;
    if let Some(grid) = &bundle.patches {
        event.check_covers(grid)?;
    }
    Ok(Inputs {
        network,
        sewage: bundle.sewage,
        patches: bundle.patches,
        event,
    })
}

/// Runs one ensemble of `cfg.episodes` episodes at the given fragility.
pub fn run_configured_ensemble(
    inputs: &Inputs,
    cfg: &RunConfig,
    fragility: &FragilityParams,
    n_episodes: usize,
) -> Result<Vec<EpisodeResult>> {
    let coupled = cfg.flood.is_some() && !inputs.sewage.pumps().is_empty();
    let scenario = Scenario {
        net: &inputs.network,
        event: &inputs.event,
        fragility,
        episode: &cfg.episode,
        sewage: coupled.then_some(&inputs.sewage),
        flood: if coupled { cfg.flood.as_ref() } else { None },
    };
    Simulator::new(scenario)?.run_ensemble(cfg.base_seed, n_episodes, cfg.workers)
}

pub fn summaries(results: &[EpisodeResult]) -> Result<Vec<SummaryMetrics>> {
    results.iter().map(|r| summarize(&r.outage_trajectory)).collect()
}

pub fn mean_summary(s: &[SummaryMetrics]) -> [f64; 3] {
    let n = s.len().max(1) as f64;
    Metric::ALL.map(|m| s.iter().map(|x| m.of(x)).sum::<f64>() / n)
}

#[derive(Debug, Clone, Serialize)]
pub struct SimulateSummary {
    pub episodes: usize,
    pub mean_peak: f64,
    pub mean_duration_h: f64,
    pub mean_auc: f64,
    pub wall_clock_s: f64,
    pub output_dir: PathBuf,
}

pub fn cmd_simulate(cfg: &RunConfig) -> Result<SimulateSummary> {
    let inputs = load_inputs(cfg)?;
    let started = Instant::now();
    let results = run_configured_ensemble(&inputs, cfg, &cfg.fragility, cfg.episodes)?;
    let wall = started.elapsed().as_secs_f64();
    let out = &cfg.output_dir;
    io::write_episodes(&out.join("episodes.csv"), &results)?;
    io::write_repairs(&out.join("repairs.csv"), &inputs.network, &results)?;
    if results.iter().any(|r| r.flood.is_some()) {
        io::write_flood_outputs(out, &results)?;
    }
    io::write_json(
        &out.join("ensemble_meta.json"),
        &EnsembleMeta {
            base_seed: cfg.base_seed,
            episode_seeds: results.iter().map(|r| r.seed).collect(),
            config_hash: cfg.hash(),
            episodes: results.len(),
            wall_clock_s: wall,
        },
    )?;
    let means = mean_summary(&summaries(&results)?);
    info!("simulated {} episodes in {wall:.2}s", results.len());
    Ok(SimulateSummary {
        episodes: results.len(),
        mean_peak: means[0],
        mean_duration_h: means[1],
        mean_auc: means[2],
        wall_clock_s: wall,
        output_dir: out.clone(),
    })
}

fn summarize_series(series: &ObservedSeries) -> Result<SummaryMetrics> {
    if series.is_empty() {
        return Ok(SummaryMetrics::default());
    }
    summarize(&series.total_out())
}

/// Observed summary metrics from `observed_series` (optionally windowed) or
/// from a hidden episode at the `observed_synthetic` factor.
pub fn observed_metrics(cfg: &RunConfig, inputs: &Inputs) -> Result<SummaryMetrics> {
    let series = match (&cfg.observed_series, &cfg.observed_synthetic) {
        (Some(path), None) => io::read_observed_series(path)?,
        (None, Some(syn)) => generate_observed_series(
            &inputs.network,
            &inputs.event,
            &cfg.fragility.with_factor(syn.fragility_factor),
            &cfg.episode,
            syn.seed,
        )?,
        _ => {
            return Err(Error::Config(
                "config needs exactly one of observed_series or observed_synthetic".into(),
            ))
        }
    };
    let series = match cfg.observed_window {
        Some((start, end)) => series.window(start, end),
        None => series,
    };
    summarize_series(&series)
}

#[derive(Debug, Clone)]
pub struct AssessOutcome {
    pub report: AssessmentReport,
    pub deciles: Option<Vec<DecileRow>>,
}

/// Scores the ensemble stored in `ensemble_dir` against the observed
/// series. With `flood_metrics.csv` present, also writes the decile table.
pub fn cmd_assess(cfg: &RunConfig, ensemble_dir: &Path) -> Result<AssessOutcome> {
    let inputs = load_inputs(cfg)?;
    let trajectories = io::read_episodes(&ensemble_dir.join("episodes.csv"))?;
    if trajectories.is_empty() {
        return Err(Error::input(format!("{}: no episodes", ensemble_dir.display())));
    }
    let sims = trajectories.iter().map(|t| summarize(t)).collect::<Result<Vec<_>>>()?;
    let observed = observed_metrics(cfg, &inputs)?;
    let report = assess(&inputs.event.event_id, &observed, &sims)?;
    io::write_assessment(&cfg.output_dir.join("assessment.json"), std::slice::from_ref(&report))?;

    let flood_path = ensemble_dir.join("flood_metrics.csv");
    let deciles = if flood_path.exists() {
        let flood = io::read_flood_metrics(&flood_path)?;
        if flood.len() != sims.len() {
            return Err(Error::input(format!(
                "{}: {} rows for {} episodes",
                flood_path.display(),
                flood.len(),
                sims.len()
            )));
        }
        let rows = decile_report(
            &sims.iter().map(|s| s.auc_customer_hours).collect::<Vec<_>>(),
            &flood.iter().map(|f| f.flooded()).collect::<Vec<_>>(),
            &flood.iter().map(|f| f.customer_auc).collect::<Vec<_>>(),
        )?;
        io::write_deciles(&cfg.output_dir.join("deciles.csv"), &rows)?;
        Some(rows)
    } else {
        None
    };
    Ok(AssessOutcome { report, deciles })
}

fn ratio_or_none(sim: f64, obs: f64) -> Option<f64> {
    (obs > 0.0).then(|| sim / obs)
}

/// Mean-ratio table over fragility factors; every factor reuses the same
/// base seed.
pub fn sweep(inputs: &Inputs, cfg: &RunConfig, factors: &[f64], observed: &SummaryMetrics) -> Result<Vec<SweepRow>> {
    if factors.is_empty() {
        return Err(Error::Config("sweep list is empty".into()));
    }
    factors
        .iter()
        .map(|&factor| {
            let results = run_configured_ensemble(inputs, cfg, &cfg.fragility.with_factor(factor), cfg.episodes)?;
            let [peak, duration, auc] = mean_summary(&summaries(&results)?);
            Ok(SweepRow {
                factor,
                peak_mean: peak,
                duration_mean: duration,
                auc_mean: auc,
                peak_ratio: ratio_or_none(peak, observed.peak_customers as f64),
                duration_ratio: ratio_or_none(duration, observed.duration_h),
                auc_ratio: ratio_or_none(auc, observed.auc_customer_hours),
            })
        })
        .collect()
}

pub fn cmd_sweep(cfg: &RunConfig) -> Result<Vec<SweepRow>> {
    let factors = cfg
        .sweep
        .as_deref()
        .ok_or_else(|| Error::Config("sweep list is required".into()))?;
    let inputs = load_inputs(cfg)?;
    let observed = observed_metrics(cfg, &inputs)?;
    let rows = sweep(&inputs, cfg, factors, &observed)?;
    io::write_sweep(&cfg.output_dir.join("sweep.csv"), &rows)?;
    Ok(rows)
}

/// Simulates the largest rung once; smaller rungs are its prefixes.
pub fn cmd_convergence(cfg: &RunConfig) -> Result<ConvergenceReport> {
    let ladder = cfg
        .ladder
        .as_deref()
        .ok_or_else(|| Error::Config("ladder is required".into()))?;
    let top = *ladder.iter().max().ok_or_else(|| Error::Config("ladder is empty".into()))?;
    if top > cfg.max_episodes {
        return Err(Error::Config(format!(
            "ladder rung {top} exceeds max_episodes {}",
            cfg.max_episodes
        )));
    }
    if ladder.windows(2).any(|w| w[0] >= w[1]) || ladder[0] == 0 {
        return Err(Error::Config(format!("ladder {ladder:?} must be positive and ascending")));
    }
    let inputs = load_inputs(cfg)?;
    let results = run_configured_ensemble(&inputs, cfg, &cfg.fragility, top)?;
    let report = convergence_from_summaries(ladder, &summaries(&results)?, cfg.stability_threshold)?;
    io::write_convergence(&cfg.output_dir.join("convergence.csv"), &report)?;
    Ok(report)
}

#[derive(Debug, Clone)]
pub struct CurateOutcome {
    pub series: ObservedSeries,
    pub events: Vec<CuratedEvent>,
}

pub fn cmd_curate(cfg: &RunConfig, polygons: &Path) -> Result<CurateOutcome> {
    let net = io::read_network_dir(network_dir(cfg)?)?.network;
    let snapshots = io::read_outage_polygons(polygons)?;
    let series = observed_outage_series(&snapshots, &net)?;
    let events = curate(&series, &cfg.curation);
    io::write_observed_series(&cfg.output_dir.join("observed_series.csv"), &series)?;
    io::write_curated_events(&cfg.output_dir.join("curated_events.json"), &events)?;
    Ok(CurateOutcome { series, events })
}

/// Gridded extract to be mapped onto the bundle's patches.
#[derive(Debug, Clone)]
pub struct GridSource {
    pub cells: PathBuf,
    pub gusts: PathBuf,
    pub event_id: String,
    pub start_time: HourStamp,
}

#[derive(Debug, Clone, Serialize)]
pub struct TypedEvent {
    pub event_id: String,
    pub event_type: EventType,
    pub hours: usize,
    pub max_p95_gust_ms: f64,
    pub max_gust_ms: f64,
}

/// Types the configured event (or a gridded extract mapped onto patches) and
/// writes the typed `weather_event.csv` and `event_meta.json`.
pub fn cmd_type_event(cfg: &RunConfig, grid: Option<&GridSource>) -> Result<TypedEvent> {
    let event = match grid {
        Some(src) => {
            let bundle = io::read_network_dir(network_dir(cfg)?)?;
            let patches = bundle
                .patches
                .ok_or_else(|| Error::Config("grid mapping needs patches.csv in the network directory".into()))?;
            let cells = io::read_grid(&src.cells, &src.gusts)?;
            let frames = map_grid_to_patches(&cells, &patches)?;
            WeatherEvent::new(src.event_id.clone(), src.start_time, frames)?.with_type(&cfg.typing)
        }
        None => {
            let patches = match &cfg.network_dir {
                Some(dir) => io::read_network_dir(dir)?.patches,
                None => None,
            };
            load_event(cfg, patches.as_ref())?
        }
    };
    let (mut p95, mut max) = (0.0f64, 0.0f64);
    for f in &event.frames {
        let s = spatial_stats(f)?;
        p95 = p95.max(s.p95);
        max = max.max(s.max);
    }
    io::write_weather_event(&cfg.output_dir.join("weather_event.csv"), &event)?;
    Ok(TypedEvent {
        event_id: event.event_id.clone(),
        event_type: event.event_type,
        hours: event.frames.len(),
        max_p95_gust_ms: p95,
        max_gust_ms: max,
    })
}

/// Generates and writes a fixture bundle. With a synthetic event in the
/// config, also writes that event beside the bundle.
pub fn cmd_gen_fixture(spec: &FixtureSpec, cfg: &RunConfig, out_dir: &Path) -> Result<Fixture> {
    let fixture = generate_fixture(spec)?;
    io::write_fixture(out_dir, &fixture)?;
    if let Some(params) = &cfg.synth_event {
        let event = synth_wind_event(params, &fixture.patches, cfg.base_seed)?.with_type(&cfg.typing);
        io::write_weather_event(&out_dir.join("weather_event.csv"), &event)?;
    }
    Ok(fixture)
}

