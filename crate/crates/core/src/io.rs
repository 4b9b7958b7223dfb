//! CSV and JSON file formats. Every reader checks the exact header and
//! reports malformed rows with their line number.

use std::collections::BTreeMap;
use std::fs::{self, File};
use std::io::BufWriter;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::curation::{CuratedEvent, ObservedSeries, OutagePolygonSnapshot};
use crate::engine::EpisodeResult;
use crate::error::{Error, Result};
use crate::fixtures::Fixture;
use crate::flood::FloodMetrics;
use crate::geometry::{Point, Polygon, Rect};
use crate::hazard::{EventType, GridCell, Patch, PatchGrid, WeatherEvent, WeatherFrame};
use crate::hours::HourStamp;
use crate::metrics::{AssessmentReport, ConvergenceReport, DecileRow};
use crate::network::{NodeKind, PowerLine, PowerNetwork, PowerNode};
use crate::sewage::{SewageConduit, SewageNetwork, SewagePump};

pub const NODES_HEADER: &[&str] = &["id", "x_m", "y_m", "feeder_id", "customers", "patch_id", "kind"];
pub const LINES_HEADER: &[&str] = &[
    "id",
    "from_node",
    "to_node",
    "length_m",
    "overhead",
    "vegetation",
    "service_drop",
    "feeder_id",
];
pub const CONDUITS_HEADER: &[&str] = &["id", "polyline_wkt_like", "downstream_id"];
pub const PUMPS_HEADER: &[&str] = &["id", "x_m", "y_m", "power_node_id", "lift_conduit_id"];
pub const PATCHES_HEADER: &[&str] = &["patch_id", "x_min", "y_min", "x_max", "y_max"];
pub const WEATHER_HEADER: &[&str] = &["hour_index", "patch_id", "gust_ms"];
pub const GRID_CELLS_HEADER: &[&str] = &["cell_id", "x_min", "y_min", "x_max", "y_max"];
pub const GRID_GUSTS_HEADER: &[&str] = &["hour_index", "cell_id", "gust_ms"];
pub const POLYGONS_HEADER: &[&str] = &["timestamp", "polygon_id", "vertex_index", "x_m", "y_m"];
pub const OBSERVED_HEADER: &[&str] = &["timestamp", "feeder_id", "customers_out", "feeder_total"];
pub const EPISODES_HEADER: &[&str] = &["episode", "hour", "customers_out"];
pub const REPAIRS_HEADER: &[&str] = &["episode", "line_id", "crew_id", "start_hour", "finish_hour"];
pub const FLOOD_EPISODES_HEADER: &[&str] = &["episode", "hour", "flooded_customers", "flooded_area_m2"];
pub const FLOOD_METRICS_HEADER: &[&str] = &[
    "episode",
    "customer_peak",
    "persistence_h",
    "customer_auc",
    "area_peak",
    "area_auc",
];

fn row_error(path: &Path, line: u64, msg: impl std::fmt::Display) -> Error {
    Error::input(format!("{}:{line}: {msg}", path.display()))
}

/// Reads every row of a headed CSV file as `T` (fields by position, after
/// the header is checked), paired with its line number.
fn read_rows<T: DeserializeOwned>(path: &Path, header: &[&str]) -> Result<Vec<(u64, T)>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(file);
    let found = rdr
        .headers()
        .map_err(|source| Error::Csv {
            path: path.into(),
            source,
        })?
        .clone();
    if found.iter().ne(header.iter().copied()) {
        return Err(row_error(
            path,
            1,
            format!("expected header '{}', found '{}'", header.join(","), found.iter().collect::<Vec<_>>().join(",")),
        ));
    }
    let mut rows = Vec::new();
    let mut record = csv::StringRecord::new();
    loop {
        match rdr.read_record(&mut record) {
            Ok(false) => break,
            Ok(true) => {
                let line = record.position().map_or(0, |p| p.line());
                let row = record
                    .deserialize(None)
                    .map_err(|e| row_error(path, line, csv_detail(&e)))?;
                rows.push((line, row));
            }
            Err(source) => {
                return Err(Error::Csv {
                    path: path.into(),
                    source,
                })
            }
        }
    }
    Ok(rows)
}

fn csv_detail(e: &csv::Error) -> String {
    match e.kind() {
        csv::ErrorKind::Deserialize { err, .. } => match err.field() {
            Some(f) => format!("field {}: {}", f + 1, err.kind()),
            None => err.kind().to_string(),
        },
        _ => e.to_string(),
    }
}

fn writer(path: &Path) -> Result<csv::Writer<BufWriter<File>>> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    Ok(csv::WriterBuilder::new()
        .has_headers(false)
        .from_writer(BufWriter::new(file)))
}

fn csv_err(path: &Path) -> impl Fn(csv::Error) -> Error + '_ {
    move |source| Error::Csv {
        path: path.into(),
        source,
    }
}

fn write_csv<T: Serialize>(path: &Path, header: &[&str], rows: impl IntoIterator<Item = T>) -> Result<()> {
    let mut w = writer(path)?;
    let err = csv_err(path);
    w.write_record(header).map_err(&err)?;
    for row in rows {
        w.serialize(row).map_err(&err)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    let mut text = serde_json::to_string_pretty(value).map_err(|source| Error::Json {
        path: path.into(),
        source,
    })?;
    text.push('\n');
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|source| Error::Json {
        path: path.into(),
        source,
    })
}

// Network bundle

#[derive(Serialize, Deserialize)]
struct NodeRow {
    id: String,
    x_m: f64,
    y_m: f64,
    feeder_id: String,
    customers: u64,
    patch_id: String,
    kind: String,
}

#[derive(Serialize, Deserialize)]
struct LineRow {
    id: String,
    from_node: String,
    to_node: String,
    length_m: f64,
    overhead: bool,
    vegetation: f64,
    service_drop: bool,
    feeder_id: String,
}

#[derive(Serialize, Deserialize)]
struct ConduitRow {
    id: String,
    polyline_wkt_like: String,
    downstream_id: Option<String>,
}

#[derive(Serialize, Deserialize)]
struct PumpRow {
    id: String,
    x_m: f64,
    y_m: f64,
    power_node_id: String,
    lift_conduit_id: String,
}

#[derive(Serialize, Deserialize)]
struct RectRow {
    id: String,
    x_min: f64,
    y_min: f64,
    x_max: f64,
    y_max: f64,
}

/// Power network, optional sewage overlay and optional patch grid read from
/// one directory.
#[derive(Debug, Clone)]
pub struct NetworkBundle {
    pub network: PowerNetwork,
    pub sewage: SewageNetwork,
    pub patches: Option<PatchGrid>,
}

pub fn parse_polyline(s: &str) -> Result<Vec<Point>, String> {
    s.split(';')
        .filter(|p| !p.trim().is_empty())
        .map(|pair| {
            let mut it = pair.split_whitespace();
            match (it.next(), it.next(), it.next()) {
                (Some(x), Some(y), None) => {
                    let x: f64 = x.parse().map_err(|_| format!("bad x coordinate '{x}'"))?;
                    let y: f64 = y.parse().map_err(|_| format!("bad y coordinate '{y}'"))?;
                    Ok(Point::new(x, y))
                }
                _ => Err(format!("bad vertex '{pair}', expected 'x y'")),
            }
        })
        .collect()
}

pub fn format_polyline(points: &[Point]) -> String {
    points
        .iter()
        .map(|p| format!("{} {}", p.x, p.y))
        .collect::<Vec<_>>()
        .join(";")
}

pub fn read_nodes(path: &Path) -> Result<Vec<PowerNode>> {
    read_rows::<NodeRow>(path, NODES_HEADER)?
        .into_iter()
        .map(|(line, r)| {
            let kind = NodeKind::parse(&r.kind)
                .ok_or_else(|| row_error(path, line, format!("unknown node kind '{}'", r.kind)))?;
            Ok(PowerNode {
                id: r.id,
                position: Point::new(r.x_m, r.y_m),
                feeder_id: r.feeder_id,
                customers: r.customers,
                patch_id: r.patch_id,
                kind,
            })
        })
        .collect()
}

pub fn read_lines(path: &Path) -> Result<Vec<PowerLine>> {
    Ok(read_rows::<LineRow>(path, LINES_HEADER)?
        .into_iter()
        .map(|(_, r)| PowerLine {
            id: r.id,
            from_node: r.from_node,
            to_node: r.to_node,
            length_m: r.length_m,
            overhead: r.overhead,
            vegetation: r.vegetation,
            service_drop: r.service_drop,
            feeder_id: r.feeder_id,
        })
        .collect())
}

pub fn read_sewage(conduits: &Path, pumps: &Path) -> Result<SewageNetwork> {
    let conduits = read_rows::<ConduitRow>(conduits, CONDUITS_HEADER)?
        .into_iter()
        .map(|(line, r)| {
            let poly = parse_polyline(&r.polyline_wkt_like).map_err(|m| row_error(conduits, line, m))?;
            Ok(SewageConduit::new(r.id, poly, r.downstream_id.filter(|d| !d.is_empty())))
        })
        .collect::<Result<Vec<_>>>()?;
    let pumps = read_rows::<PumpRow>(pumps, PUMPS_HEADER)?
        .into_iter()
        .map(|(_, r)| SewagePump {
            id: r.id,
            position: Point::new(r.x_m, r.y_m),
            power_node_id: r.power_node_id,
            lift_conduit_id: r.lift_conduit_id,
        })
        .collect();
    SewageNetwork::new(conduits, pumps)
}

pub fn read_patches(path: &Path) -> Result<PatchGrid> {
    let patches = read_rows::<(String, f64, f64, f64, f64)>(path, PATCHES_HEADER)?
        .into_iter()
        .map(|(_, (id, x0, y0, x1, y1))| Patch {
            id,
            rect: Rect::new(x0, y0, x1, y1),
        })
        .collect();
    PatchGrid::new(patches)
}

/// Reads `nodes.csv` and `lines.csv`, plus `conduits.csv`/`pumps.csv` and
/// `patches.csv` when present.
pub fn read_network_dir(dir: &Path) -> Result<NetworkBundle> {
    let nodes = read_nodes(&dir.join("nodes.csv"))?;
    let lines = read_lines(&dir.join("lines.csv"))?;
    let network = PowerNetwork::new(nodes, lines)?;
    let (conduits, pumps) = (dir.join("conduits.csv"), dir.join("pumps.csv"));
    let sewage = match (conduits.exists(), pumps.exists()) {
        (true, true) => read_sewage(&conduits, &pumps)?,
        (false, false) => SewageNetwork::empty(),
        _ => {
            return Err(Error::input(format!(
                "{}: conduits.csv and pumps.csv must be given together",
                dir.display()
            )))
        }
    };
    let patches_path = dir.join("patches.csv");
    let patches = if patches_path.exists() {
        Some(read_patches(&patches_path)?)
    } else {
        None
    };
    Ok(NetworkBundle {
        network,
        sewage,
        patches,
    })
}

pub fn write_patches(path: &Path, grid: &PatchGrid) -> Result<()> {
    write_csv(
        path,
        PATCHES_HEADER,
        grid.patches().iter().map(|p| RectRow {
            id: p.id.clone(),
            x_min: p.rect.x_min,
            y_min: p.rect.y_min,
            x_max: p.rect.x_max,
            y_max: p.rect.y_max,
        }),
    )
}

pub fn write_network_dir(
    dir: &Path,
    net: &PowerNetwork,
    sewage: &SewageNetwork,
    patches: Option<&PatchGrid>,
) -> Result<()> {
    write_csv(
        &dir.join("nodes.csv"),
        NODES_HEADER,
        net.nodes().iter().map(|n| NodeRow {
            id: n.id.clone(),
            x_m: n.position.x,
            y_m: n.position.y,
            feeder_id: n.feeder_id.clone(),
            customers: n.customers,
            patch_id: n.patch_id.clone(),
            kind: n.kind.as_str().to_string(),
        }),
    )?;
    write_csv(
        &dir.join("lines.csv"),
        LINES_HEADER,
        net.lines().iter().map(|l| LineRow {
            id: l.id.clone(),
            from_node: l.from_node.clone(),
            to_node: l.to_node.clone(),
            length_m: l.length_m,
            overhead: l.overhead,
            vegetation: l.vegetation,
            service_drop: l.service_drop,
            feeder_id: l.feeder_id.clone(),
        }),
    )?;
    write_csv(
        &dir.join("conduits.csv"),
        CONDUITS_HEADER,
        sewage.conduits().iter().map(|c| ConduitRow {
            id: c.id.clone(),
            polyline_wkt_like: format_polyline(&c.polyline),
            downstream_id: c.downstream_id.clone(),
        }),
    )?;
    write_csv(
        &dir.join("pumps.csv"),
        PUMPS_HEADER,
        sewage.pumps().iter().map(|p| PumpRow {
            id: p.id.clone(),
            x_m: p.position.x,
            y_m: p.position.y,
            power_node_id: p.power_node_id.clone(),
            lift_conduit_id: p.lift_conduit_id.clone(),
        }),
    )?;
    if let Some(grid) = patches {
        write_patches(&dir.join("patches.csv"), grid)?;
    }
    Ok(())
}

pub fn write_fixture(dir: &Path, fixture: &Fixture) -> Result<()> {
    write_network_dir(dir, &fixture.network, &fixture.sewage, Some(&fixture.patches))
}

// Weather

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EventMeta {
    pub event_id: String,
    pub start_time: HourStamp,
    pub hazard_window_hours: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub event_type: Option<EventType>,
}

/// Reads a dense hour × patch gust table into frames, checking that every
/// hour lists the same patches exactly once.
fn read_gust_table(path: &Path, header: &[&str]) -> Result<Vec<BTreeMap<String, f64>>> {
    let rows = read_rows::<(u32, String, f64)>(path, header)?;
    let mut hours: Vec<BTreeMap<String, f64>> = Vec::new();
    for (line, (h, id, g)) in rows {
        let h = h as usize;
        if h >= hours.len() {
            hours.resize_with(h + 1, BTreeMap::new);
        }
        if hours[h].insert(id.clone(), g).is_some() {
            return Err(row_error(path, line, format!("duplicate row for hour {h}, '{id}'")));
        }
    }
    if let Some(first) = hours.first() {
        for (h, frame) in hours.iter().enumerate() {
            if frame.len() != first.len() || !frame.keys().eq(first.keys()) {
                return Err(Error::input(format!(
                    "{}: hour {h} does not list the same ids as hour 0",
                    path.display()
                )));
            }
        }
    }
    Ok(hours)
}

/// Reads `weather_event.csv` with its companion `event_meta.json` from the
/// same directory.
pub fn read_weather_event(path: &Path) -> Result<WeatherEvent> {
    let frames: Vec<WeatherFrame> = read_gust_table(path, WEATHER_HEADER)?
        .into_iter()
        .enumerate()
        .map(|(h, gust)| WeatherFrame {
            hour_index: h as u32,
            gust,
        })
        .collect();
    let meta_path = path.with_file_name("event_meta.json");
    let meta: EventMeta = read_json(&meta_path)?;
    let mut event = WeatherEvent::new(meta.event_id, meta.start_time, frames)?;
    if meta.hazard_window_hours == 0 || meta.hazard_window_hours as usize > event.frames.len() {
        return Err(Error::input(format!(
            "{}: hazard_window_hours {} must lie in 1..={}",
            meta_path.display(),
            meta.hazard_window_hours,
            event.frames.len()
        )));
    }
    event.hazard_window_hours = meta.hazard_window_hours;
    if let Some(t) = meta.event_type {
        event.event_type = t;
    }
    Ok(event)
}

pub fn write_weather_event(path: &Path, event: &WeatherEvent) -> Result<()> {
    write_csv(
        path,
        WEATHER_HEADER,
        event
            .frames
            .iter()
            .flat_map(|f| f.gust.iter().map(move |(p, g)| (f.hour_index, p, g))),
    )?;
    write_json(
        &path.with_file_name("event_meta.json"),
        &EventMeta {
            event_id: event.event_id.clone(),
            start_time: event.start_time,
            hazard_window_hours: event.hazard_window_hours,
            event_type: Some(event.event_type),
        },
    )
}

pub fn read_grid(cells: &Path, gusts: &Path) -> Result<Vec<GridCell>> {
    let rects = read_rows::<RectRow>(cells, GRID_CELLS_HEADER)?;
    let table = read_gust_table(gusts, GRID_GUSTS_HEADER)?;
    rects
        .into_iter()
        .map(|(line, r)| {
            let series = table
                .iter()
                .map(|frame| frame.get(&r.id).copied())
                .collect::<Option<Vec<f64>>>()
                .ok_or_else(|| row_error(cells, line, format!("cell '{}' has no gust series", r.id)))?;
            Ok(GridCell {
                id: r.id,
                rect: Rect::new(r.x_min, r.y_min, r.x_max, r.y_max),
                gusts: series,
            })
        })
        .collect()
}

// Curation

/// Groups vertices by timestamp and polygon id; vertex order follows
/// `vertex_index`. Timestamps come out ascending.
pub fn read_outage_polygons(path: &Path) -> Result<Vec<OutagePolygonSnapshot>> {
    let rows = read_rows::<(HourStamp, String, u32, f64, f64)>(path, POLYGONS_HEADER)?;
    let mut grouped: BTreeMap<HourStamp, BTreeMap<String, (u64, BTreeMap<u32, Point>)>> = BTreeMap::new();
    for (line, (ts, pid, vi, x, y)) in rows {
        let entry = grouped
            .entry(ts)
            .or_default()
            .entry(pid.clone())
            .or_insert_with(|| (line, BTreeMap::new()));
        if entry.1.insert(vi, Point::new(x, y)).is_some() {
            return Err(row_error(path, line, format!("polygon '{pid}' repeats vertex {vi}")));
        }
    }
    grouped
        .into_iter()
        .map(|(timestamp, polys)| {
            let polygons = polys
                .into_iter()
                .map(|(pid, (line, verts))| {
                    Polygon::new(verts.into_values().collect())
                        .map_err(|m| row_error(path, line, format!("polygon '{pid}' at {timestamp}: {m}")))
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(OutagePolygonSnapshot { timestamp, polygons })
        })
        .collect()
}

pub fn write_outage_polygons(path: &Path, snapshots: &[OutagePolygonSnapshot]) -> Result<()> {
    write_csv(
        path,
        POLYGONS_HEADER,
        snapshots.iter().flat_map(|s| {
            s.polygons.iter().enumerate().flat_map(move |(k, poly)| {
                poly.vertices()
                    .iter()
                    .enumerate()
                    .map(move |(v, p)| (s.timestamp, format!("poly{k}"), v, p.x, p.y))
            })
        }),
    )
}

pub fn write_observed_series(path: &Path, series: &ObservedSeries) -> Result<()> {
    write_csv(
        path,
        OBSERVED_HEADER,
        series.hours.iter().enumerate().flat_map(|(h, ts)| {
            series.per_feeder_out.iter().map(move |(f, v)| {
                (ts, f, v[h], series.per_feeder_total.get(f).copied().unwrap_or(0))
            })
        }),
    )
}

/// Hours missing between the first and last timestamp are zero outage.
pub fn read_observed_series(path: &Path) -> Result<ObservedSeries> {
    let rows = read_rows::<(HourStamp, String, u64, u64)>(path, OBSERVED_HEADER)?;
    let mut totals: BTreeMap<String, u64> = BTreeMap::new();
    for (line, (_, f, _, total)) in &rows {
        if let Some(prev) = totals.insert(f.clone(), *total) {
            if prev != *total {
                return Err(row_error(path, *line, format!("feeder '{f}' total changes from {prev} to {total}")));
            }
        }
    }
    let (Some(first), Some(last)) = (
        rows.iter().map(|(_, r)| r.0).min(),
        rows.iter().map(|(_, r)| r.0).max(),
    ) else {
        return Ok(ObservedSeries::empty(totals));
    };
    let span = (last.0 - first.0 + 1) as usize;
    let mut out: BTreeMap<String, Vec<u64>> = totals.keys().map(|f| (f.clone(), vec![0; span])).collect();
    for (_, (ts, f, n, _)) in rows {
        out.get_mut(&f).expect("feeder seen")[(ts.0 - first.0) as usize] = n;
    }
    Ok(ObservedSeries {
        hours: (0..span as i64).map(|h| first.plus_hours(h)).collect(),
        per_feeder_out: out,
        per_feeder_total: totals,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CuratedEventRecord {
    pub start: HourStamp,
    pub end: HourStamp,
    pub duration_h: i64,
    pub excluded: bool,
    pub reason: Option<String>,
}

impl From<&CuratedEvent> for CuratedEventRecord {
    fn from(e: &CuratedEvent) -> Self {
        CuratedEventRecord {
            start: e.start_hour,
            end: e.end_hour,
            duration_h: e.duration_h(),
            excluded: e.excluded,
            reason: e.reason.clone(),
        }
    }
}

pub fn write_curated_events(path: &Path, events: &[CuratedEvent]) -> Result<()> {
    let records: Vec<CuratedEventRecord> = events.iter().map(Into::into).collect();
    write_json(path, &records)
}

// Ensemble outputs

pub fn write_episodes(path: &Path, results: &[EpisodeResult]) -> Result<()> {
    write_csv(
        path,
        EPISODES_HEADER,
        results.iter().flat_map(|r| {
            r.outage_trajectory
                .iter()
                .enumerate()
                .map(move |(h, c)| (r.episode_index, h, c))
        }),
    )
}

/// Trajectories indexed by episode; episodes must be numbered `0..n` and
/// hours must run `0..len` within each episode.
pub fn read_episodes(path: &Path) -> Result<Vec<Vec<u64>>> {
    let rows = read_rows::<(usize, usize, u64)>(path, EPISODES_HEADER)?;
    let mut out: Vec<Vec<u64>> = Vec::new();
    for (line, (e, h, c)) in rows {
        if e > out.len() {
            return Err(row_error(path, line, format!("episode {e} follows episode {}", out.len().saturating_sub(1))));
        }
        if e == out.len() {
            out.push(Vec::new());
        }
        let traj = &mut out[e];
        if h != traj.len() {
            return Err(row_error(path, line, format!("episode {e}: expected hour {}, found {h}", traj.len())));
        }
        traj.push(c);
    }
    Ok(out)
}

pub fn write_repairs(path: &Path, net: &PowerNetwork, results: &[EpisodeResult]) -> Result<()> {
    write_csv(
        path,
        REPAIRS_HEADER,
        results.iter().flat_map(|r| {
            r.repair_log
                .iter()
                .map(move |rec| (r.episode_index, &net.line(rec.line).id, rec.crew, rec.start_hour, rec.finish_hour))
        }),
    )
}

pub fn write_flood_outputs(dir: &Path, results: &[EpisodeResult]) -> Result<()> {
    let flooded: Vec<_> = results
        .iter()
        .filter_map(|r| r.flood.as_ref().map(|f| (r.episode_index, f)))
        .collect();
    write_csv(
        &dir.join("flood_episodes.csv"),
        FLOOD_EPISODES_HEADER,
        flooded.iter().flat_map(|(e, f)| {
            f.flooded_customers_trajectory
                .iter()
                .zip(&f.flooded_area_trajectory)
                .enumerate()
                .map(move |(h, (c, a))| (e, h, c, a))
        }),
    )?;
    write_csv(
        &dir.join("flood_metrics.csv"),
        FLOOD_METRICS_HEADER,
        flooded.iter().map(|(e, f)| {
            let m = &f.metrics;
            (e, m.customer_peak, m.persistence_h, m.customer_auc, m.area_peak, m.area_auc)
        }),
    )
}

pub fn read_flood_metrics(path: &Path) -> Result<Vec<FloodMetrics>> {
    Ok(
        read_rows::<(usize, u64, u32, f64, f64, f64)>(path, FLOOD_METRICS_HEADER)?
            .into_iter()
            .map(|(_, (_, customer_peak, persistence_h, customer_auc, area_peak, area_auc))| FloodMetrics {
                customer_peak,
                persistence_h,
                customer_auc,
                area_peak,
                area_auc,
            })
            .collect(),
    )
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleMeta {
    pub base_seed: u64,
    pub episode_seeds: Vec<u64>,
    /// SHA-256 of the canonical JSON run configuration.
    pub config_hash: String,
    pub episodes: usize,
    pub wall_clock_s: f64,
}

// Reports

#[derive(Serialize)]
struct AssessmentEntry<'a> {
    event_id: &'a str,
    metric: &'a str,
    observed: f64,
    sim_mean: f64,
    p05: f64,
    p95: f64,
    ratio: Option<f64>,
    strict_hit: Option<bool>,
    pragmatic_hit: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    status: Option<&'static str>,
}

/// One entry per event × metric; metrics with a zero observation carry
/// `"status": "not assessable"` and null ratio and hits.
pub fn write_assessment(path: &Path, reports: &[AssessmentReport]) -> Result<()> {
    let entries: Vec<AssessmentEntry> = reports
        .iter()
        .flat_map(|r| {
            r.metrics.iter().map(|m| AssessmentEntry {
                event_id: &r.event_id,
                metric: m.metric.name(),
                observed: m.observed,
                sim_mean: m.sim_mean,
                p05: m.p05,
                p95: m.p95,
                ratio: m.ratio,
                strict_hit: m.strict_hit,
                pragmatic_hit: m.pragmatic_hit,
                status: (!m.assessable).then_some("not assessable"),
            })
        })
        .collect();
    write_json(path, &entries)
}

pub fn write_deciles(path: &Path, rows: &[DecileRow]) -> Result<()> {
    write_csv(
        path,
        &["decile", "episodes", "flood_occurrence", "mean_flood_customer_auc"],
        rows,
    )
}

pub fn write_convergence(path: &Path, report: &ConvergenceReport) -> Result<()> {
    write_csv(
        path,
        &["rung", "metric", "mean", "rel_change_vs_final", "stable"],
        report
            .rows
            .iter()
            .map(|r| (r.rung, r.metric.name(), r.mean, r.rel_change_vs_final, r.stable)),
    )
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub factor: f64,
    pub peak_mean: f64,
    pub duration_mean: f64,
    pub auc_mean: f64,
    /// Empty when the observed metric is zero.
    pub peak_ratio: Option<f64>,
    pub duration_ratio: Option<f64>,
    pub auc_ratio: Option<f64>,
}

pub fn write_sweep(path: &Path, rows: &[SweepRow]) -> Result<()> {
    write_csv(
        path,
        &["factor", "peak_mean", "duration_mean", "auc_mean", "peak_ratio", "duration_ratio", "auc_ratio"],
        rows,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{generate_fixture, presets};
    use crate::hazard::{synth_wind_event, SynthEventParams};

    #[test]
    fn bundle_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let f = generate_fixture(&presets::small()).unwrap();
        write_fixture(dir.path(), &f).unwrap();
        let back = read_network_dir(dir.path()).unwrap();
        assert_eq!(back.network.nodes().len(), f.network.nodes().len());
        for (a, b) in back.network.lines().iter().zip(f.network.lines()) {
            assert_eq!(a, b);
        }
        assert_eq!(back.network.nodes(), f.network.nodes());
        assert_eq!(back.sewage.pumps(), f.sewage.pumps());
        assert_eq!(back.sewage.conduits().len(), f.sewage.conduits().len());
        assert_eq!(back.patches.unwrap(), f.patches);
    }

    #[test]
    fn weather_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let f = generate_fixture(&presets::small()).unwrap();
        let params = SynthEventParams {
            event_id: "e1".into(),
            start_time: HourStamp::parse("2023-02-22T06:00Z").unwrap(),
            duration_h: 4,
            peak_gust_ms: 25.0,
            storm_center: Point::new(0.0, 0.0),
            radius_m: Some(3000.0),
            ramp_shape: Default::default(),
            noise_ms: 1.0,
        };
        let ev = synth_wind_event(&params, &f.patches, 4).unwrap();
        let path = dir.path().join("weather_event.csv");
        write_weather_event(&path, &ev).unwrap();
        assert_eq!(read_weather_event(&path).unwrap(), ev);
    }

    #[test]
    fn malformed_rows_report_line_numbers() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("nodes.csv");
        fs::write(&p, "id,x_m,y_m,feeder_id,customers,patch_id,kind\nr,0,0,F,0,p,substation_root\na,1,oops,F,3,p,junction\n").unwrap();
        let err = read_nodes(&p).unwrap_err().to_string();
        assert!(err.contains(":3:"), "{err}");
        fs::write(&p, "id,x,y\n").unwrap();
        assert!(read_nodes(&p).unwrap_err().to_string().contains("expected header"));
        fs::write(&p, "id,x_m,y_m,feeder_id,customers,patch_id,kind\nr,0,0,F,0,p,tower\n").unwrap();
        assert!(read_nodes(&p).unwrap_err().to_string().contains("unknown node kind"));
    }

    #[test]
    fn polygons_group_and_validate() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("outage_polygons.csv");
        fs::write(
            &p,
            "timestamp,polygon_id,vertex_index,x_m,y_m\n\
             2023-01-01T01:00Z,a,1,1,0\n2023-01-01T01:00Z,a,0,0,0\n2023-01-01T01:00Z,a,2,1,1\n\
             2023-01-01T00:00Z,b,0,0,0\n2023-01-01T00:00Z,b,1,2,0\n2023-01-01T00:00Z,b,2,2,2\n2023-01-01T00:00Z,b,3,0,2\n",
        )
        .unwrap();
        let snaps = read_outage_polygons(&p).unwrap();
        assert_eq!(snaps.len(), 2);
        assert!(snaps[0].timestamp < snaps[1].timestamp);
        assert_eq!(snaps[0].polygons[0].vertices().len(), 4);
        assert_eq!(snaps[1].polygons[0].vertices()[1], Point::new(1.0, 0.0));

        fs::write(&p, "timestamp,polygon_id,vertex_index,x_m,y_m\n2023-01-01T00:00Z,a,0,0,0\n2023-01-01T00:00Z,a,1,1,0\n").unwrap();
        let err = read_outage_polygons(&p).unwrap_err();
        assert_eq!(err.exit_code(), 2);
    }

    #[test]
    fn observed_series_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let series = ObservedSeries {
            hours: vec![HourStamp(10), HourStamp(11), HourStamp(12)],
            per_feeder_out: BTreeMap::from([("A".into(), vec![1, 0, 4]), ("B".into(), vec![0, 2, 0])]),
            per_feeder_total: BTreeMap::from([("A".into(), 10), ("B".into(), 20)]),
        };
        let p = dir.path().join("observed_series.csv");
        write_observed_series(&p, &series).unwrap();
        assert_eq!(read_observed_series(&p).unwrap(), series);
    }

    #[test]
    fn polyline_text() {
        let pts = parse_polyline("0 0;10.5 -2").unwrap();
        assert_eq!(pts, vec![Point::new(0.0, 0.0), Point::new(10.5, -2.0)]);
        assert_eq!(parse_polyline(&format_polyline(&pts)).unwrap(), pts);
        assert!(parse_polyline("0 0 0").is_err());
        assert!(parse_polyline("a b").is_err());
    }
}
