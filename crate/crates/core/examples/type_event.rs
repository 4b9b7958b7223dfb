//! Maps a coarse gridded gust extract onto the patch grid by area weighting,
//! then types the event as wind or untyped from its spatial gust statistics.
//!
//!     cargo run --example type_event

use gridres::fixtures::{generate_fixture, presets};
use gridres::hazard::{map_grid_to_patches, spatial_stats, type_event, GridCell};
use gridres::{HourStamp, Rect, WeatherEvent, WindTypingThresholds};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let fx = generate_fixture(&presets::medium())?;
    let extent = fx.patches.patches().iter().fold(fx.patches.patches()[0].rect, |r, p| r.union(&p.rect));

    // A 3 x 2 grid of 8 h series, coarser than the 4 x 4 patches and offset
    // from them; the eastern cells see the strongest gusts.
    let (w, h) = (extent.width() / 2.5, extent.height() / 1.5);
    let mut cells = Vec::new();
    for i in 0..3 {
        for j in 0..2 {
            let x0 = extent.x_min - w * 0.25 + i as f64 * w;
            let y0 = extent.y_min - h * 0.25 + j as f64 * h;
            let peak = 12.0 + 6.0 * i as f64;
            cells.push(GridCell {
                id: format!("g{i}{j}"),
                rect: Rect::new(x0, y0, x0 + w, y0 + h),
                gusts: (0..8).map(|t| peak * (1.0 - (t as f64 - 3.5).abs() / 4.5)).collect(),
            });
        }
    }
    let frames = map_grid_to_patches(&cells, &fx.patches)?;
    let event = WeatherEvent::new("gridded", HourStamp::parse("2023-10-21T06:00Z")?, frames)?;
    for f in &event.frames {
        let s = spatial_stats(f)?;
        println!("hour {}: p95 {:5.1} m/s  max {:5.1} m/s", f.hour_index, s.p95, s.max);
    }
    let th = WindTypingThresholds::default();
    println!("typed as {:?} (p95 >= {} or max >= {} for {} hours)", type_event(&event, &th), th.p95_gust_ms, th.max_gust_ms, th.min_hours);
    Ok(())
}
