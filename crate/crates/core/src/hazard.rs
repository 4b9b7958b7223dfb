//! Hourly per-patch wind-gust forcing: patch grids, grid-to-patch mapping,
//! wind typing, and a seeded synthetic storm generator.

use std::collections::{BTreeMap, HashMap};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Point, Rect};
use crate::hours::HourStamp;
use crate::metrics::quantile;
use crate::rng;

#[derive(Debug, Clone, PartialEq)]
pub struct Patch {
    pub id: String,
    pub rect: Rect,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PatchGrid {
    patches: Vec<Patch>,
    lookup: HashMap<String, usize>,
}

impl PatchGrid {
    pub fn new(patches: Vec<Patch>) -> Result<Self> {
        let mut lookup = HashMap::with_capacity(patches.len());
        for (i, p) in patches.iter().enumerate() {
            if p.rect.is_degenerate() {
                return Err(Error::input(format!("patch '{}' has a degenerate rectangle", p.id)));
            }
            if lookup.insert(p.id.clone(), i).is_some() {
                return Err(Error::input(format!("duplicate patch id '{}'", p.id)));
            }
        }
        Ok(PatchGrid { patches, lookup })
    }

    /// Regular `rows × cols` tiling of `extent`, ids `p{row}_{col}`.
    pub fn regular(extent: Rect, rows: usize, cols: usize) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::input("patch grid needs at least one row and column"));
        }
        let (dx, dy) = (extent.width() / cols as f64, extent.height() / rows as f64);
        let mut patches = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                let x0 = extent.x_min + c as f64 * dx;
                let y0 = extent.y_min + r as f64 * dy;
                patches.push(Patch {
                    id: format!("p{r}_{c}"),
                    rect: Rect::new(x0, y0, x0 + dx, y0 + dy),
                });
            }
        }
        PatchGrid::new(patches)
    }

    pub fn patches(&self) -> &[Patch] {
        &self.patches
    }

    pub fn len(&self) -> usize {
        self.patches.len()
    }

    pub fn is_empty(&self) -> bool {
        self.patches.is_empty()
    }

    pub fn contains_id(&self, id: &str) -> bool {
        self.lookup.contains_key(id)
    }

    /// First patch whose closed rectangle contains `p`.
    pub fn locate(&self, p: &Point) -> Option<&Patch> {
        self.patches.iter().find(|patch| patch.rect.contains(p))
    }
}

/// Gusts for one hour, keyed by patch id.
#[derive(Debug, Clone, PartialEq)]
pub struct WeatherFrame {
    pub hour_index: u32,
    pub gust: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EventType {
    Wind,
    Untyped,
}

#[derive(Debug, Clone, PartialEq)]
pub struct WeatherEvent {
    pub event_id: String,
    pub start_time: HourStamp,
    pub frames: Vec<WeatherFrame>,
    pub event_type: EventType,
    pub hazard_window_hours: u32,
}

impl WeatherEvent {
    /// Checks hour indices run 0..n−1 and gusts are finite and non-negative.
    pub fn new(
        event_id: impl Into<String>,
        start_time: HourStamp,
        frames: Vec<WeatherFrame>,
    ) -> Result<Self> {
        if frames.is_empty() {
            return Err(Error::input("weather event has no frames"));
        }
        for (i, f) in frames.iter().enumerate() {
            if f.hour_index as usize != i {
                return Err(Error::input(format!(
                    "weather frames not consecutive: position {i} has hour_index {}",
                    f.hour_index
                )));
            }
            if let Some((pid, g)) = f.gust.iter().find(|(_, g)| !(g.is_finite() && **g >= 0.0)) {
                return Err(Error::input(format!("hour {i}, patch '{pid}': invalid gust {g}")));
            }
        }
        let hazard_window_hours = frames.len() as u32;
        Ok(WeatherEvent {
            event_id: event_id.into(),
            start_time,
            frames,
            event_type: EventType::Untyped,
            hazard_window_hours,
        })
    }

    /// Every frame must carry a gust for every patch of `grid`.
    pub fn check_covers(&self, grid: &PatchGrid) -> Result<()> {
        for f in &self.frames {
            if let Some(p) = grid.patches().iter().find(|p| !f.gust.contains_key(&p.id)) {
                return Err(Error::input(format!(
                    "hour {} has no gust for patch '{}'",
                    f.hour_index, p.id
                )));
            }
        }
        Ok(())
    }

    pub fn with_type(mut self, th: &WindTypingThresholds) -> Self {
        self.event_type = type_event(&self, th);
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WindTypingThresholds {
    pub p95_gust_ms: f64,
    pub max_gust_ms: f64,
    pub min_hours: u32,
    /// Qualifying hours must form one unbroken run.
    pub require_consecutive: bool,
}

impl Default for WindTypingThresholds {
    fn default() -> Self {
        WindTypingThresholds {
            p95_gust_ms: 17.0,
            max_gust_ms: 22.0,
            min_hours: 2,
            require_consecutive: false,
        }
    }
}

/// Source grid cell with its hourly gust series.
#[derive(Debug, Clone, PartialEq)]
pub struct GridCell {
    pub id: String,
    pub rect: Rect,
    pub gusts: Vec<f64>,
}

/// Area-weighted mean of overlapping grid-cell gusts for each patch and hour.
pub fn map_grid_to_patches(cells: &[GridCell], patches: &PatchGrid) -> Result<Vec<WeatherFrame>> {
    let hours = cells.first().map_or(0, |c| c.gusts.len());
    if let Some(c) = cells.iter().find(|c| c.gusts.len() != hours) {
        return Err(Error::input(format!(
            "grid cell '{}' has {} hours, expected {hours}",
            c.id,
            c.gusts.len()
        )));
    }
    let mut weights: Vec<Vec<(usize, f64)>> = Vec::with_capacity(patches.len());
    for p in patches.patches() {
        let w: Vec<(usize, f64)> = cells
            .iter()
            .enumerate()
            .map(|(i, c)| (i, c.rect.intersection_area(&p.rect)))
            .filter(|(_, a)| *a > 0.0)
            .collect();
        if w.is_empty() {
            return Err(Error::input(format!("patch '{}' overlaps no grid cell", p.id)));
        }
        weights.push(w);
    }
    Ok((0..hours)
        .map(|h| WeatherFrame {
            hour_index: h as u32,
            gust: patches
                .patches()
                .iter()
                .zip(&weights)
                .map(|(p, w)| {
                    let total: f64 = w.iter().map(|(_, a)| a).sum();
                    let g = w.iter().map(|(i, a)| a * cells[*i].gusts[h]).sum::<f64>() / total;
                    (p.id.clone(), g)
                })
                .collect(),
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpatialStats {
    pub p95: f64,
    pub max: f64,
}

/// Spatial 95th percentile (linear interpolation at 0.95·(n−1)) and maximum
/// over the frame's patches.
pub fn spatial_stats(frame: &WeatherFrame) -> Result<SpatialStats> {
    let values: Vec<f64> = frame.gust.values().copied().collect();
    if values.is_empty() {
        return Err(Error::Precondition("spatial_stats on an empty frame".into()));
    }
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok(SpatialStats {
        p95: quantile(&values, 0.95)?,
        max,
    })
}

/// Wind iff at least `min_hours` frames reach either gust threshold.
pub fn type_event(event: &WeatherEvent, th: &WindTypingThresholds) -> EventType {
    let qualifying = event.frames.iter().map(|f| match spatial_stats(f) {
        Ok(s) => s.p95 >= th.p95_gust_ms || s.max >= th.max_gust_ms,
        Err(_) => false,
    });
    let hit = if th.require_consecutive {
        let mut run = 0u32;
        let mut best = 0u32;
        for q in qualifying {
            run = if q { run + 1 } else { 0 };
            best = best.max(run);
        }
        best >= th.min_hours
    } else {
        qualifying.filter(|&q| q).count() as u32 >= th.min_hours
    };
    if hit {
        EventType::Wind
    } else {
        EventType::Untyped
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RampShape {
    /// Linear rise to the middle hour and linear fall after it.
    #[default]
    Triangular,
    /// Full strength every hour.
    Flat,
}

impl RampShape {
    /// Temporal multiplier in (0, 1] for `hour` of a `duration_h` event.
    /// The triangular peak sits at hour ⌊duration/2⌋.
    pub fn factor(&self, hour: u32, duration_h: u32) -> f64 {
        match self {
            RampShape::Flat => 1.0,
            RampShape::Triangular => {
                let center = (duration_h / 2) as f64;
                1.0 - (hour as f64 - center).abs() / (center + 1.0)
            }
        }
    }
}

/// Synthetic storm: `peak · ramp(hour) · exp(−½(d/radius)²) + U(−noise, noise)`,
/// clamped at zero, where `d` is the distance from the storm center to the
/// patch center. No radius means no spatial decay.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SynthEventParams {
    #[serde(default = "default_event_id")]
    pub event_id: String,
    #[serde(default)]
    pub start_time: HourStamp,
    pub duration_h: u32,
    pub peak_gust_ms: f64,
    pub storm_center: Point,
    #[serde(default)]
    pub radius_m: Option<f64>,
    #[serde(default)]
    pub ramp_shape: RampShape,
    #[serde(default)]
    pub noise_ms: f64,
}

fn default_event_id() -> String {
    "synthetic".to_string()
}

impl SynthEventParams {
    pub fn spatial_decay(&self, at: &Point) -> f64 {
        match self.radius_m {
            Some(r) if r > 0.0 => {
                let d = at.distance(&self.storm_center) / r;
                (-0.5 * d * d).exp()
            }
            _ => 1.0,
        }
    }
}

pub fn synth_wind_event(
    params: &SynthEventParams,
    patches: &PatchGrid,
    seed: u64,
) -> Result<WeatherEvent> {
    if patches.is_empty() {
        return Err(Error::input("synthetic event needs a non-empty patch grid"));
    }
    if params.duration_h == 0 {
        return Err(Error::input("synthetic event duration must be at least 1 hour"));
    }
    // A zero peak is allowed and yields a calm event.
    if !(params.peak_gust_ms >= 0.0 && params.peak_gust_ms.is_finite()) {
        return Err(Error::input("synthetic peak gust must be finite and non-negative"));
    }
    if !(params.noise_ms >= 0.0) {
        return Err(Error::input("synthetic noise amplitude must be non-negative"));
    }
    let mut noise = rng::stream(seed, rng::FAILURE_STREAM ^ 0x5157_4e44);
    let decay: Vec<f64> = patches
        .patches()
        .iter()
        .map(|p| params.spatial_decay(&p.rect.center()))
        .collect();
    let frames = (0..params.duration_h)
        .map(|h| {
            let ramp = params.ramp_shape.factor(h, params.duration_h);
            let gust = patches
                .patches()
                .iter()
                .zip(&decay)
                .map(|(p, d)| {
                    let jitter = if params.noise_ms > 0.0 {
                        noise.random_range(-params.noise_ms..=params.noise_ms)
                    } else {
                        0.0
                    };
                    (p.id.clone(), (params.peak_gust_ms * ramp * d + jitter).max(0.0))
                })
                .collect();
            WeatherFrame {
                hour_index: h,
                gust,
            }
        })
        .collect();
    WeatherEvent::new(params.event_id.clone(), params.start_time, frames)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn frame(values: &[f64]) -> WeatherFrame {
        WeatherFrame {
            hour_index: 0,
            gust: values
                .iter()
                .enumerate()
                .map(|(i, g)| (format!("p{i:03}"), *g))
                .collect(),
        }
    }

    fn event(frames: Vec<Vec<f64>>) -> WeatherEvent {
        let frames = frames
            .into_iter()
            .enumerate()
            .map(|(h, v)| WeatherFrame {
                hour_index: h as u32,
                ..frame(&v)
            })
            .collect();
        WeatherEvent::new("e", HourStamp(0), frames).unwrap()
    }

    #[test]
    fn stats_constant_field() {
        let s = spatial_stats(&frame(&[17.0; 8])).unwrap();
        assert_eq!((s.p95, s.max), (17.0, 17.0));
    }

    #[test]
    fn stats_single_hot_patch() {
        let mut v = vec![0.0; 19];
        v.push(22.5);
        assert_eq!(spatial_stats(&frame(&v)).unwrap().max, 22.5);
    }

    #[test]
    fn stats_p95_of_one_to_hundred() {
        let v: Vec<f64> = (1..=100).map(f64::from).collect();
        // Reference: index 0.95·99 = 94.05 between order statistics 95 and 96.
        let expected = 95.0 + 0.05 * (96.0 - 95.0);
        assert!((spatial_stats(&frame(&v)).unwrap().p95 - expected).abs() < 1e-12);
        assert!((expected - 95.05).abs() < 1e-12);
    }

    #[test]
    fn typing_p95_branch() {
        let th = WindTypingThresholds::default();
        let e = event(vec![vec![17.2; 10], vec![17.5; 10], vec![1.0; 10]]);
        assert_eq!(type_event(&e, &th), EventType::Wind);
    }

    #[test]
    fn typing_single_hour_is_not_enough() {
        let th = WindTypingThresholds::default();
        let mut hot = vec![0.0; 10];
        hot[3] = 40.0;
        let e = event(vec![vec![0.0; 10], hot, vec![0.0; 10]]);
        assert_eq!(type_event(&e, &th), EventType::Untyped);
    }

    #[test]
    fn typing_max_branch() {
        let th = WindTypingThresholds::default();
        // 100 patches, one at 22: index 94.05 sits among the 16s.
        let mut v = vec![16.0; 100];
        v[99] = 22.0;
        let s = spatial_stats(&frame(&v)).unwrap();
        assert_eq!((s.p95, s.max), (16.0, 22.0));
        let e = event(vec![v.clone(), v]);
        assert_eq!(type_event(&e, &th), EventType::Wind);
    }

    #[test]
    fn typing_consecutive_flag() {
        let mut th = WindTypingThresholds::default();
        let e = event(vec![vec![30.0; 4], vec![0.0; 4], vec![30.0; 4]]);
        assert_eq!(type_event(&e, &th), EventType::Wind);
        th.require_consecutive = true;
        assert_eq!(type_event(&e, &th), EventType::Untyped);
    }

    fn one_patch(rect: Rect) -> PatchGrid {
        PatchGrid::new(vec![Patch {
            id: "a".into(),
            rect,
        }])
        .unwrap()
    }

    #[test]
    fn mapping_identity() {
        let r = Rect::new(0.0, 0.0, 10.0, 10.0);
        let cells = vec![GridCell {
            id: "c".into(),
            rect: r,
            gusts: vec![10.0, 20.0],
        }];
        let frames = map_grid_to_patches(&cells, &one_patch(r)).unwrap();
        assert_eq!(frames.len(), 2);
        assert_eq!(frames[0].gust["a"], 10.0);
        assert_eq!(frames[1].gust["a"], 20.0);
    }

    #[test]
    fn mapping_half_and_quarter_weights() {
        let patch = one_patch(Rect::new(0.0, 0.0, 4.0, 4.0));
        let halves = vec![
            GridCell {
                id: "A".into(),
                rect: Rect::new(-4.0, 0.0, 2.0, 4.0),
                gusts: vec![10.0],
            },
            GridCell {
                id: "B".into(),
                rect: Rect::new(2.0, 0.0, 8.0, 4.0),
                gusts: vec![30.0],
            },
        ];
        assert_eq!(map_grid_to_patches(&halves, &patch).unwrap()[0].gust["a"], 20.0);
        let quarter = vec![
            GridCell {
                id: "A".into(),
                rect: Rect::new(0.0, 0.0, 1.0, 4.0),
                gusts: vec![8.0],
            },
            GridCell {
                id: "B".into(),
                rect: Rect::new(1.0, 0.0, 4.0, 4.0),
                gusts: vec![16.0],
            },
        ];
        // 0.25·8 + 0.75·16
        assert_eq!(map_grid_to_patches(&quarter, &patch).unwrap()[0].gust["a"], 14.0);
    }

    #[test]
    fn mapping_rejects_uncovered_patch() {
        let cells = vec![GridCell {
            id: "c".into(),
            rect: Rect::new(100.0, 100.0, 110.0, 110.0),
            gusts: vec![1.0],
        }];
        let err = map_grid_to_patches(&cells, &one_patch(Rect::new(0.0, 0.0, 1.0, 1.0)));
        assert!(err.unwrap_err().to_string().contains("'a'"));
    }

    fn grid3() -> PatchGrid {
        PatchGrid::regular(Rect::new(0.0, 0.0, 3000.0, 3000.0), 3, 3).unwrap()
    }

    #[test]
    fn synth_degenerate_ramp() {
        let params = SynthEventParams {
            event_id: "s".into(),
            start_time: HourStamp(0),
            duration_h: 1,
            peak_gust_ms: 25.0,
            storm_center: Point::new(0.0, 0.0),
            radius_m: None,
            ramp_shape: RampShape::Triangular,
            noise_ms: 0.0,
        };
        let e = synth_wind_event(&params, &grid3(), 3).unwrap();
        assert_eq!(e.frames.len(), 1);
        assert!(e.frames[0].gust.values().all(|&g| g == 25.0));
    }

    #[test]
    fn synth_is_deterministic_and_peaks_mid_event() {
        let params = SynthEventParams {
            event_id: "s".into(),
            start_time: HourStamp(0),
            duration_h: 12,
            peak_gust_ms: 30.0,
            storm_center: Point::new(1500.0, 1500.0),
            radius_m: Some(2000.0),
            ramp_shape: RampShape::Triangular,
            noise_ms: 0.5,
        };
        let a = synth_wind_event(&params, &grid3(), 11).unwrap();
        let b = synth_wind_event(&params, &grid3(), 11).unwrap();
        assert_eq!(a, b);
        let center: Vec<f64> = a.frames.iter().map(|f| f.gust["p1_1"]).collect();
        let (argmax, max) = center
            .iter()
            .enumerate()
            .fold((0, f64::MIN), |acc, (i, &g)| if g > acc.1 { (i, g) } else { acc });
        assert_eq!(argmax, 6);
        assert!((max - 30.0).abs() <= 0.5);
        // Closed form away from the peak, e.g. hour 0: 30·(1 − 6/7).
        assert!((center[0] - 30.0 / 7.0).abs() <= 0.5);
    }
}
