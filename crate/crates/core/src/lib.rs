//! Monte Carlo resilience simulation for radial electric distribution
//! feeders under wind events.
//!
//! The pipeline mirrors how an event is studied end to end:
//!
//! - [`curation`] turns outage polygons into per-feeder customer-out series
//!   and finds, merges and filters event windows.
//! - [`hazard`] holds hourly per-patch gust fields, maps gridded extracts onto
//!   patches, types events and synthesizes storms.
//! - [`fragility`] converts gusts into per-line failure probabilities.
//! - [`engine`] runs seeded episodes (failures, then crew restoration) and
//!   reproducible parallel ensembles.
//! - [`flood`] couples pump outages to sewage-backup flooding.
//! - [`metrics`] summarizes trajectories and scores ensembles against
//!   observations.
//! - [`fixtures`] generates synthetic networks, sewage overlays and
//!   pseudo-observed series.
//! - [`commands`] backs the `gridres` binary; [`io`] and [`config`] hold the
//!   file formats.

pub mod commands;
pub mod config;
pub mod curation;
pub mod engine;
pub mod error;
pub mod fixtures;
pub mod flood;
pub mod fragility;
pub mod geometry;
pub mod hazard;
pub mod hours;
pub mod io;
pub mod metrics;
pub mod network;
pub mod rng;
pub mod sewage;
#[cfg(test)]
mod testutil;

pub use engine::{
    pick_next_repair, run_ensemble, run_episode, EpisodeConfig, EpisodeResult, RepairOrdering,
    Scenario, Simulator,
};
pub use error::{Error, Result};
pub use flood::FloodConfig;
pub use fragility::FragilityParams;
pub use geometry::{Point, Rect};
pub use hazard::{PatchGrid, WeatherEvent, WeatherFrame, WindTypingThresholds};
pub use hours::HourStamp;
pub use metrics::{summarize, SummaryMetrics};
pub use network::{validate_network, PowerLine, PowerNetwork, PowerNode, TopologyAssumption};
pub use sewage::SewageNetwork;
