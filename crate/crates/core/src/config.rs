//! Run configuration: one JSON document, unknown keys rejected, with
//! dotted `key=value` overrides applied before validation.
//!
//! ```json
//! {
//!   "network_dir": "bundle",
//!   "synth_event": { "duration_h": 12, "peak_gust_ms": 30,
//!                    "storm_center": { "x": 3000, "y": 600 } },
//!   "topology": "service_underground",
//!   "fragility": { "fragility_factor": 0.8 },
//!   "episode": { "crews": 12, "ordering": "proximity" },
//!   "episodes": 256,
//!   "base_seed": 7,
//!   "output_dir": "out"
//! }
//! ```

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::curation::CurationThresholds;
use crate::engine::EpisodeConfig;
use crate::error::{Error, Result};
use crate::flood::FloodConfig;
use crate::fragility::FragilityParams;
use crate::hazard::{SynthEventParams, WindTypingThresholds};
use crate::hours::HourStamp;
use crate::metrics::DEFAULT_STABILITY_THRESHOLD;
use crate::network::TopologyAssumption;

/// Pseudo-observed series drawn from one hidden episode at a known factor.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SyntheticObserved {
    pub fragility_factor: f64,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub network_dir: Option<PathBuf>,
    /// `weather_event.csv`; `event_meta.json` must sit beside it.
    pub event_file: Option<PathBuf>,
    pub synth_event: Option<SynthEventParams>,
    /// `None` keeps the overhead flags from the bundle.
    pub topology: Option<TopologyAssumption>,
    pub fragility: FragilityParams,
    pub episode: EpisodeConfig,
    pub flood: Option<FloodConfig>,
    pub episodes: usize,
    pub base_seed: u64,
    pub output_dir: PathBuf,
    pub workers: Option<usize>,
    pub ladder: Option<Vec<usize>>,
    /// Upper bound on any ensemble size, ladder rungs included.
    pub max_episodes: usize,
    #[serde(alias = "fragility_sweep")]
    pub sweep: Option<Vec<f64>>,
    pub observed_series: Option<PathBuf>,
    pub observed_synthetic: Option<SyntheticObserved>,
    /// Inclusive hour range of the observed series used for assessment.
    pub observed_window: Option<(HourStamp, HourStamp)>,
    pub stability_threshold: f64,
    pub curation: CurationThresholds,
    pub typing: WindTypingThresholds,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            network_dir: None,
            event_file: None,
            synth_event: None,
            topology: None,
            fragility: FragilityParams::default(),
            episode: EpisodeConfig::default(),
            flood: None,
            episodes: 256,
            base_seed: 0,
            output_dir: PathBuf::from("out"),
            workers: None,
            ladder: None,
            max_episodes: 10_000,
            sweep: None,
            observed_series: None,
            observed_synthetic: None,
            observed_window: None,
            stability_threshold: DEFAULT_STABILITY_THRESHOLD,
            curation: CurationThresholds::default(),
            typing: WindTypingThresholds::default(),
        }
    }
}

/// Parses `key=value`. The value is read as JSON when it parses, otherwise
/// as a bare string, so `episode.ordering=random` works unquoted.
pub fn parse_override(s: &str) -> Result<(String, Value)> {
    let (key, raw) = s
        .split_once('=')
        .ok_or_else(|| Error::Config(format!("override '{s}' is not key=value")))?;
    let key = key.trim();
    if key.is_empty() {
        return Err(Error::Config(format!("override '{s}' has an empty key")));
    }
    let value = serde_json::from_str(raw.trim()).unwrap_or_else(|_| Value::String(raw.trim().to_string()));
    Ok((key.to_string(), value))
}

fn set_path(root: &mut Value, key: &str, value: Value) -> Result<()> {
    let mut cur = root;
    let parts: Vec<&str> = key.split('.').collect();
    for (i, part) in parts.iter().enumerate() {
        if cur.is_null() {
            *cur = Value::Object(Default::default());
        }
        let obj = cur
            .as_object_mut()
            .ok_or_else(|| Error::Config(format!("override '{key}': '{}' is not an object", parts[..i].join("."))))?;
        if i + 1 == parts.len() {
            obj.insert(part.to_string(), value);
            return Ok(());
        }
        cur = obj.entry(part.to_string()).or_insert(Value::Null);
    }
    unreachable!("split yields at least one part")
}

impl RunConfig {
    pub fn from_value(value: Value) -> Result<Self> {
        let cfg: RunConfig = serde_json::from_value(value).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Reads `path` (or starts from defaults), applies overrides in order,
    /// then validates.
    pub fn load(path: Option<&Path>, overrides: &[(String, Value)]) -> Result<Self> {
        let mut value = match path {
            Some(p) => {
                let text = std::fs::read_to_string(p).map_err(|e| Error::io(p, e))?;
                serde_json::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", p.display())))?
            }
            None => Value::Object(Default::default()),
        };
        for (k, v) in overrides {
            set_path(&mut value, k, v.clone())?;
        }
        RunConfig::from_value(value)
    }

    pub fn validate(&self) -> Result<()> {
        if self.event_file.is_some() && self.synth_event.is_some() {
            return Err(Error::Config("give either event_file or synth_event, not both".into()));
        }
        if self.episodes == 0 {
            return Err(Error::Config("episodes must be at least 1".into()));
        }
        if self.episodes > self.max_episodes {
            return Err(Error::Config(format!(
                "episodes {} exceeds max_episodes {}",
                self.episodes, self.max_episodes
            )));
        }
        if self.workers == Some(0) {
            return Err(Error::Config("workers must be at least 1".into()));
        }
        if self.observed_series.is_some() && self.observed_synthetic.is_some() {
            return Err(Error::Config(
                "give either observed_series or observed_synthetic, not both".into(),
            ));
        }
        if let Some(sweep) = &self.sweep {
            if sweep.iter().any(|f| !(*f > 0.0 && f.is_finite())) {
                return Err(Error::Config("sweep factors must be positive".into()));
            }
        }
        if !(self.stability_threshold > 0.0) {
            return Err(Error::Config("stability_threshold must be positive".into()));
        }
        self.fragility.validate()?;
        self.episode.validate()?;
        if let Some(f) = &self.flood {
            f.validate()?;
        }
        Ok(())
    }

    /// SHA-256 over the canonical JSON form, hex encoded.
    pub fn hash(&self) -> String {
        let json = serde_json::to_string(self).expect("config serializes");
        hex::encode(Sha256::digest(json.as_bytes()))
    }
}
