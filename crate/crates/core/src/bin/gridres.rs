use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::Value;

use gridres::commands::{self, GridSource};
use gridres::config::{parse_override, RunConfig};
use gridres::fixtures::{presets, FixtureSpec};
use gridres::io::read_json;
use gridres::metrics::Metric;
use gridres::{Error, HourStamp};

#[derive(Parser)]
#[command(name = "gridres", version, about = "Monte Carlo wind resilience runs for radial feeders")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Global {
    /// JSON run configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true)]
    episodes: Option<usize>,
    #[arg(long, global = true)]
    workers: Option<usize>,
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    /// Couple pump outages to flooding (default flood settings unless the
    /// config has a flood block).
    #[arg(long, global = true)]
    flood: bool,
    /// Override a config key, e.g. `--set episode.crews=6`. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE", global = true)]
    sets: Vec<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Outage polygons to observed series and curated events.
    Curate {
        #[arg(long)]
        polygons: PathBuf,
    },
    /// Type the configured event, or map a gridded extract onto patches first.
    TypeEvent {
        #[arg(long, requires = "grid_gusts")]
        grid_cells: Option<PathBuf>,
        #[arg(long, requires = "grid_cells")]
        grid_gusts: Option<PathBuf>,
        #[arg(long, default_value = "gridded")]
        event_id: String,
        #[arg(long, default_value = "1970-01-01T00:00Z")]
        start: String,
    },
    /// Run an ensemble.
    Simulate,
    /// Score a stored ensemble against the observed series.
    Assess {
        /// Directory holding episodes.csv; defaults to the output directory.
        #[arg(long)]
        ensemble: Option<PathBuf>,
    },
    /// One ensemble per fragility factor.
    Sweep {
        #[arg(long, value_delimiter = ',')]
        factors: Option<Vec<f64>>,
    },
    /// Nested-prefix episode ladder.
    Convergence {
        #[arg(long, value_delimiter = ',')]
        ladder: Option<Vec<usize>>,
    },
    /// Write a synthetic network bundle.
    GenFixture {
        /// small, medium or coupled.
        #[arg(long, conflicts_with = "spec")]
        preset: Option<String>,
        /// FixtureSpec JSON file.
        #[arg(long)]
        spec: Option<PathBuf>,
    },
}

fn overrides(g: &Global, cmd: &Command) -> Result<Vec<(String, Value)>, Error> {
    let mut out = g.sets.iter().map(|s| parse_override(s)).collect::<Result<Vec<_>, _>>()?;
    let mut push = |k: &str, v: Value| out.push((k.to_string(), v));
    if let Some(s) = g.seed {
        push("base_seed", s.into());
    }
    if let Some(n) = g.episodes {
        push("episodes", n.into());
    }
    if let Some(w) = g.workers {
        push("workers", w.into());
    }
    if let Some(o) = &g.output {
        push("output_dir", o.to_string_lossy().into_owned().into());
    }
    match cmd {
        Command::Sweep { factors: Some(f) } => push("sweep", serde_json::json!(f)),
        Command::Convergence { ladder: Some(l) } => push("ladder", serde_json::json!(l)),
        _ => {}
    }
    Ok(out)
}

fn run(cli: Cli) -> Result<(), Error> {
    let sets = overrides(&cli.global, &cli.command)?;
    let mut cfg = RunConfig::load(cli.global.config.as_deref(), &sets)?;
    if cli.global.flood && cfg.flood.is_none() {
        cfg.flood = Some(Default::default());
    }
    match cli.command {
        Command::Curate { polygons } => {
            let out = commands::cmd_curate(&cfg, &polygons)?;
            let kept = out.events.iter().filter(|e| !e.excluded).count();
            println!(
                "curated {} events ({kept} retained, {} flagged) over {} hours",
                out.events.len(),
                out.events.len() - kept,
                out.series.len()
            );
        }
        Command::TypeEvent {
            grid_cells,
            grid_gusts,
            event_id,
            start,
        } => {
            let grid = match (grid_cells, grid_gusts) {
                (Some(cells), Some(gusts)) => Some(GridSource {
                    cells,
                    gusts,
                    event_id,
                    start_time: HourStamp::parse(&start).map_err(Error::Config)?,
                }),
                _ => None,
            };
            let t = commands::cmd_type_event(&cfg, grid.as_ref())?;
            println!(
                "{}: {:?} over {} hours (max p95 gust {:.1} m/s, max gust {:.1} m/s)",
                t.event_id, t.event_type, t.hours, t.max_p95_gust_ms, t.max_gust_ms
            );
        }
        Command::Simulate => {
            let s = commands::cmd_simulate(&cfg)?;
            println!(
                "episodes {} mean_peak {:.2} mean_duration_h {:.2} mean_auc {:.2} wall_s {:.2}",
                s.episodes, s.mean_peak, s.mean_duration_h, s.mean_auc, s.wall_clock_s
            );
        }
        Command::Assess { ensemble } => {
            let dir = ensemble.unwrap_or_else(|| cfg.output_dir.clone());
            let out = commands::cmd_assess(&cfg, &dir)?;
            for m in &out.report.metrics {
                match (m.ratio, m.strict_hit, m.pragmatic_hit) {
                    (Some(r), Some(s), Some(p)) => println!(
                        "{:<9} observed {:.2} sim_mean {:.2} [{:.2}, {:.2}] ratio {r:.3} strict {s} pragmatic {p}",
                        m.metric.name(),
                        m.observed,
                        m.sim_mean,
                        m.p05,
                        m.p95
                    ),
                    _ => println!("{:<9} not assessable (observed {})", m.metric.name(), m.observed),
                }
            }
        }
        Command::Sweep { .. } => {
            for row in commands::cmd_sweep(&cfg)? {
                let fmt = |r: Option<f64>| r.map_or("n/a".to_string(), |r| format!("{r:.3}"));
                println!(
                    "factor {:.3} ratios peak {} duration {} auc {}",
                    row.factor,
                    fmt(row.peak_ratio),
                    fmt(row.duration_ratio),
                    fmt(row.auc_ratio)
                );
            }
        }
        Command::Convergence { .. } => {
            let report = commands::cmd_convergence(&cfg)?;
            for m in Metric::ALL {
                let rows: Vec<String> = report
                    .rows
                    .iter()
                    .filter(|r| r.metric == m)
                    .map(|r| format!("{}:{:.2}", r.rung, r.mean))
                    .collect();
                println!("{:<9} {}", m.name(), rows.join(" "));
            }
            println!("{}", report.verdict);
        }
        Command::GenFixture { preset, spec } => {
            let spec: FixtureSpec = match (preset, spec) {
                (Some(name), None) => presets::by_name(&name)
                    .ok_or_else(|| Error::Config(format!("unknown preset '{name}'")))?,
                (None, Some(path)) => read_json(&path)?,
                _ => presets::small(),
            };
            let dir = cfg.output_dir.clone();
            let f = commands::cmd_gen_fixture(&spec, &cfg, &dir)?;
            println!(
                "wrote {} nodes, {} lines, {} pumps, {} patches to {}",
                f.network.nodes().len(),
                f.network.lines().len(),
                f.sewage.pumps().len(),
                f.patches.len(),
                dir.display()
            );
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
