//! Turns hourly outage polygons into a feeder-level observed series and runs
//! the curation rules: candidate hours, gap merging, minimum duration, and
//! the systemwide-artifact flag.
//!
//!     cargo run --example curate_events

use gridres::curation::{curate, observed_outage_series, CurationThresholds, OutagePolygonSnapshot};
use gridres::fixtures::{generate_fixture, presets};
use gridres::geometry::{Point, Polygon};
use gridres::HourStamp;

fn around(p: Point, half: f64) -> Polygon {
    Polygon::new(vec![
        Point::new(p.x - half, p.y - half),
        Point::new(p.x + half, p.y - half),
        Point::new(p.x + half, p.y + half),
        Point::new(p.x - half, p.y + half),
    ])
    .expect("square")
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let fx = generate_fixture(&presets::small())?;
    let net = &fx.network;
    let start = HourStamp::parse("2023-07-14T18:00Z")?;

    // The two busiest service points of each feeder go dark for hours 0-4 and
    // 7-10; hour 12 blacks out everything.
    let mut targets = Vec::new();
    for f in net.feeders().keys() {
        let mut pts: Vec<_> = net.nodes().iter().filter(|n| &n.feeder_id == f && n.customers > 0).collect();
        pts.sort_by(|a, b| b.customers.cmp(&a.customers));
        targets.extend(pts.into_iter().take(2).map(|n| n.position));
    }
    let everything = {
        let b = fx.patches.patches().iter().fold(fx.patches.patches()[0].rect, |r, p| r.union(&p.rect));
        around(b.center(), b.width().max(b.height()))
    };
    let mut snapshots = Vec::new();
    for h in (0..=4).chain(7..=10) {
        snapshots.push(OutagePolygonSnapshot {
            timestamp: start.plus_hours(h),
            polygons: targets.iter().map(|&p| around(p, 15.0)).collect(),
        });
    }
    for h in 20..=26 {
        let polygons = if h == 23 { vec![everything.clone()] } else { targets.iter().map(|&p| around(p, 15.0)).collect() };
        snapshots.push(OutagePolygonSnapshot { timestamp: start.plus_hours(h), polygons });
    }

    let series = observed_outage_series(&snapshots, net)?;
    println!("observed series: {} hours, peak {} customers out", series.len(), series.total_out().iter().max().unwrap());
    for event in curate(&series, &CurationThresholds::default()) {
        println!(
            "{} .. {}  {:>2} h  {} candidate hours  {}",
            event.start_hour,
            event.end_hour,
            event.duration_h(),
            event.candidate_hours.len(),
            event.reason.as_deref().unwrap_or("retained")
        );
    }
    Ok(())
}
