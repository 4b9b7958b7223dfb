//! Monte Carlo episodes: hourly failure sampling through the hazard window,
//! then crew-based restoration under a repair-ordering policy, with optional
//! inline flood coupling.

use std::collections::BTreeSet;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::flood::{pump_power_status, FloodConfig, FloodResult, FloodTracker};
use crate::fragility::{line_exposure, sample_hourly_failures, FragilityParams};
use crate::geometry::Point;
use crate::hazard::WeatherEvent;
use crate::network::{FeederIndex, LineIdx, PowerNetwork};
use crate::rng;
use crate::sewage::{PumpIdx, SewageNetwork};

/// Hours a flood may keep receding after power is back before the episode is
/// declared broken.
const MAX_FLOOD_TAIL_H: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RepairOrdering {
    Proximity,
    Random,
    Criticality,
    HybridDynamic,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HybridWeights {
    pub w_crit: f64,
    pub w_dist: f64,
    pub w_backlog_base: f64,
}

impl Default for HybridWeights {
    fn default() -> Self {
        HybridWeights {
            w_crit: 0.4,
            w_dist: 0.3,
            w_backlog_base: 0.3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EpisodeConfig {
    pub crews: usize,
    /// Uniform repair duration bounds in hours, `[min, max]`.
    pub repair_time_h: (f64, f64),
    pub ordering: RepairOrdering,
    /// Zero disables travel time.
    pub travel_speed_m_per_h: f64,
    pub hybrid_weights: HybridWeights,
    pub backlog_ramp_h: f64,
}

impl Default for EpisodeConfig {
    fn default() -> Self {
        EpisodeConfig {
            crews: 12,
            repair_time_h: (2.0, 3.0),
            ordering: RepairOrdering::Proximity,
            travel_speed_m_per_h: 30_000.0,
            hybrid_weights: HybridWeights::default(),
            backlog_ramp_h: 24.0,
        }
    }
}

impl EpisodeConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str| Err(Error::Config(format!("episode.{what}")));
        if self.crews == 0 {
            return bad("crews must be at least 1");
        }
        let (lo, hi) = self.repair_time_h;
        if !(lo >= 0.0 && lo <= hi && hi.is_finite()) {
            return bad("repair_time_h must satisfy 0 <= min <= max");
        }
        if !(self.travel_speed_m_per_h >= 0.0) {
            return bad("travel_speed_m_per_h must be non-negative");
        }
        let w = &self.hybrid_weights;
        if !(w.w_crit >= 0.0 && w.w_dist >= 0.0 && w.w_backlog_base >= 0.0) {
            return bad("hybrid_weights must be non-negative");
        }
        if !(self.backlog_ramp_h > 0.0) {
            return bad("backlog_ramp_h must be positive");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CrewState {
    pub crew_id: usize,
    pub position: Point,
    pub busy_until: f64,
    pub assigned_line: Option<LineIdx>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RepairRecord {
    pub start_hour: f64,
    pub finish_hour: f64,
    pub line: LineIdx,
    pub crew: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EpisodeResult {
    pub episode_index: usize,
    pub seed: u64,
    /// Customers out at integer hours 0..=T; the last entry is the first hour
    /// at which every failed line is back, so it is always zero.
    pub outage_trajectory: Vec<u64>,
    pub failure_log: Vec<(u32, LineIdx)>,
    pub repair_log: Vec<RepairRecord>,
    /// Unpowered pumps per trajectory hour; empty without a sewage network.
    pub pump_outage_trajectory: Vec<Vec<PumpIdx>>,
    pub flood: Option<FloodResult>,
}

/// Static per-network data the repair policies score against.
#[derive(Debug, Clone)]
pub struct DispatchContext {
    downstream: Vec<u64>,
    midpoints: Vec<Point>,
    line_feeder: Vec<usize>,
    line_ids: Vec<String>,
    feeder_ids: Vec<String>,
    hazard_window_h: f64,
}

impl DispatchContext {
    pub fn new(net: &PowerNetwork, index: &FeederIndex, hazard_window_h: u32) -> Self {
        let feeder_ids: Vec<String> = net.feeders().keys().cloned().collect();
        let line_feeder = net
            .lines()
            .iter()
            .map(|l| feeder_ids.binary_search(&l.feeder_id).unwrap_or(0))
            .collect();
        DispatchContext {
            downstream: (0..net.lines().len())
                .map(|i| index.downstream_customers(LineIdx(i)))
                .collect(),
            midpoints: (0..net.lines().len())
                .map(|i| net.line_midpoint(LineIdx(i)))
                .collect(),
            line_feeder,
            line_ids: net.lines().iter().map(|l| l.id.clone()).collect(),
            feeder_ids,
            hazard_window_h: f64::from(hazard_window_h),
        }
    }

    /// Feeder ids in backlog-slot order.
    pub fn feeder_ids(&self) -> &[String] {
        &self.feeder_ids
    }

    pub fn feeder_slot(&self, line: LineIdx) -> usize {
        self.line_feeder[line.0]
    }

    pub fn midpoint(&self, line: LineIdx) -> Point {
        self.midpoints[line.0]
    }
}

/// Picks the max of `key`, ties to the lowest line id.
fn argmax_by_key(ctx: &DispatchContext, failed: &[LineIdx], key: impl Fn(LineIdx) -> f64) -> LineIdx {
    let mut best = failed[0];
    let mut best_key = key(best);
    for &l in &failed[1..] {
        let k = key(l);
        if k > best_key || (k == best_key && ctx.line_ids[l.0] < ctx.line_ids[best.0]) {
            best = l;
            best_key = k;
        }
    }
    best
}

fn min_max_normalize(values: &[f64]) -> Vec<f64> {
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if hi > lo {
        values.iter().map(|v| (v - lo) / (hi - lo)).collect()
    } else {
        vec![0.0; values.len()]
    }
}

/// Chooses the next line for `crew`. `failed` lists the unassigned failed
/// lines in ascending index order; `backlog` counts them per feeder slot.
///
/// Hybrid scoring maximizes `w_crit·ĉ + w_dist·(1 − d̂) + w_b(hour)·b̂` with
/// min-max normalization over the candidates (a constant column normalizes
/// to zero), `w_b(hour) = w_backlog_base·(1 + min(1, (hour − window)/ramp))`
/// and all three weights rescaled to sum to one.
pub fn pick_next_repair<R: Rng>(
    cfg: &EpisodeConfig,
    ctx: &DispatchContext,
    failed: &[LineIdx],
    crew: &CrewState,
    hour: f64,
    backlog: &[u32],
    rng: &mut R,
) -> Result<LineIdx> {
    if failed.is_empty() {
        return Err(Error::Precondition("pick_next_repair with no failed lines".into()));
    }
    let dist = |l: LineIdx| crew.position.distance(&ctx.midpoints[l.0]);
    Ok(match cfg.ordering {
        RepairOrdering::Proximity => argmax_by_key(ctx, failed, |l| -dist(l)),
        RepairOrdering::Random => failed[rng.random_range(0..failed.len())],
        RepairOrdering::Criticality => {
            argmax_by_key(ctx, failed, |l| ctx.downstream[l.0] as f64)
        }
        RepairOrdering::HybridDynamic => {
            let crit: Vec<f64> = failed.iter().map(|l| ctx.downstream[l.0] as f64).collect();
            let d: Vec<f64> = failed.iter().map(|&l| dist(l)).collect();
            let b: Vec<f64> = failed
                .iter()
                .map(|l| f64::from(backlog[ctx.line_feeder[l.0]]))
                .collect();
            let (crit, d, b) = (min_max_normalize(&crit), min_max_normalize(&d), min_max_normalize(&b));
            let w = cfg.hybrid_weights;
            let elapsed = (hour - ctx.hazard_window_h).max(0.0);
            let w_b = w.w_backlog_base * (1.0 + (elapsed / cfg.backlog_ramp_h).min(1.0));
            let total = w.w_crit + w.w_dist + w_b;
            let (wc, wd, wb) = if total > 0.0 {
                (w.w_crit / total, w.w_dist / total, w_b / total)
            } else {
                (0.0, 0.0, 0.0)
            };
            let score: Vec<f64> = (0..failed.len())
                .map(|k| wc * crit[k] + wd * (1.0 - d[k]) + wb * b[k])
                .collect();
            let pos = |l: LineIdx| failed.binary_search(&l).expect("candidate");
            argmax_by_key(ctx, failed, |l| score[pos(l)])
        }
    })
}

/// Everything one episode needs besides its seed.
#[derive(Debug, Clone, Copy)]
pub struct Scenario<'a> {
    pub net: &'a PowerNetwork,
    pub event: &'a WeatherEvent,
    pub fragility: &'a FragilityParams,
    pub episode: &'a EpisodeConfig,
    pub sewage: Option<&'a SewageNetwork>,
    pub flood: Option<&'a FloodConfig>,
}

impl<'a> Scenario<'a> {
    pub fn power_only(
        net: &'a PowerNetwork,
        event: &'a WeatherEvent,
        fragility: &'a FragilityParams,
        episode: &'a EpisodeConfig,
    ) -> Self {
        Scenario {
            net,
            event,
            fragility,
            episode,
            sewage: None,
            flood: None,
        }
    }
}

/// A scenario with its per-network precomputation done once, shared by
/// every episode of an ensemble.
pub struct Simulator<'a> {
    scenario: Scenario<'a>,
    index: FeederIndex,
    dispatch: DispatchContext,
    /// Exposure gust per hour per line.
    exposure: Vec<Vec<f64>>,
    crew_starts: Vec<Point>,
    customer_points: Vec<(Point, u64)>,
}

impl<'a> Simulator<'a> {
    pub fn new(scenario: Scenario<'a>) -> Result<Self> {
        scenario.fragility.validate()?;
        scenario.episode.validate()?;
        if let Some(f) = scenario.flood {
            f.validate()?;
            if scenario.sewage.is_none() {
                return Err(Error::Config("flood coupling requires a sewage network".into()));
            }
        }
        let event = scenario.event;
        if event.frames.is_empty() {
            return Err(Error::input("weather event has no frames"));
        }
        let net = scenario.net;
        let index = FeederIndex::build(net)?;
        if let Some(s) = scenario.sewage {
            s.check_power_links(net)?;
        }
        let exposure = event
            .frames
            .iter()
            .map(|f| line_exposure(net, f))
            .collect::<Result<Vec<_>>>()?;
        let dispatch = DispatchContext::new(net, &index, event.hazard_window_hours);
        let roots: Vec<Point> = net
            .feeders()
            .values()
            .map(|r| net.node(net.node_index(r).expect("validated root")).position)
            .collect();
        let crew_starts = if roots.is_empty() {
            Vec::new()
        } else {
            (0..scenario.episode.crews).map(|c| roots[c % roots.len()]).collect()
        };
        Ok(Simulator {
            scenario,
            index,
            dispatch,
            exposure,
            crew_starts,
            customer_points: net.customer_points(),
        })
    }

    pub fn scenario(&self) -> &Scenario<'a> {
        &self.scenario
    }

    pub fn index(&self) -> &FeederIndex {
        &self.index
    }

    pub fn run_episode(&self, episode_index: usize, seed: u64) -> Result<EpisodeResult> {
        let net = self.scenario.net;
        let n_lines = net.lines().len();
        let window = self.scenario.event.hazard_window_hours;

        let mut failure_rng = rng::stream(seed, rng::FAILURE_STREAM);
        let mut repair_rng = rng::stream(seed, rng::REPAIR_STREAM);
        let mut dispatch_rng = rng::stream(seed, rng::DISPATCH_STREAM);
        let mut flood_rng = rng::stream(seed, rng::FLOOD_STREAM);

        let mut failed = vec![false; n_lines];
        let mut failure_log = Vec::new();
        for (h, gusts) in self.exposure.iter().enumerate() {
            for l in sample_hourly_failures(net, gusts, &failed, self.scenario.fragility, &mut failure_rng) {
                failed[l.0] = true;
                failure_log.push((h as u32, l));
            }
        }

        let repair_log = self.restore(&failure_log, window, &mut repair_rng, &mut dispatch_rng)?;

        // Integer-hour replay of the failure and repair logs.
        let last_finish = repair_log.iter().map(|r| r.finish_hour).fold(0.0, f64::max);
        let end = (window as usize).max(last_finish.ceil() as usize);
        let mut fail_at: Vec<Vec<usize>> = vec![Vec::new(); end + 1];
        for &(h, l) in &failure_log {
            fail_at[h as usize].push(l.0);
        }
        let mut finishes: Vec<(f64, usize)> =
            repair_log.iter().map(|r| (r.finish_hour, r.line.0)).collect();
        finishes.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));

        let mut down = vec![false; n_lines];
        let mut next_finish = 0;
        let mut trajectory = Vec::with_capacity(end + 1);
        let mut pump_traj = Vec::new();
        let mut tracker = match (self.scenario.sewage, self.scenario.flood) {
            (Some(s), Some(f)) => Some(FloodTracker::new(s, f, &self.customer_points)),
            _ => None,
        };
        for (t, failing) in fail_at.iter().enumerate() {
            for &l in failing {
                down[l] = true;
            }
            while next_finish < finishes.len() && finishes[next_finish].0 <= t as f64 {
                down[finishes[next_finish].1] = false;
                next_finish += 1;
            }
            trajectory.push(self.index.disconnected_customers(&down));
            if let Some(sewage) = self.scenario.sewage {
                let unpowered = pump_power_status(net, &self.index, &down, sewage)?;
                if let Some(tr) = tracker.as_mut() {
                    tr.step(&unpowered, &mut flood_rng);
                }
                pump_traj.push(unpowered);
            }
        }
        if trajectory.last().copied() != Some(0) {
            return Err(Error::Invariant(format!(
                "episode {episode_index} ends with customers still out"
            )));
        }
        let flood = match tracker {
            Some(mut tr) => {
                let mut extra = 0;
                while !tr.is_dry() {
                    tr.step(&[], &mut flood_rng);
                    extra += 1;
                    if extra > MAX_FLOOD_TAIL_H {
                        return Err(Error::Invariant("flood never receded".into()));
                    }
                }
                Some(tr.finish())
            }
            None => None,
        };

        Ok(EpisodeResult {
            episode_index,
            seed,
            outage_trajectory: trajectory,
            failure_log,
            repair_log,
            pump_outage_trajectory: pump_traj,
            flood,
        })
    }

    /// Crew dispatch from the end of the hazard window until every failed
    /// line is assigned. Crews are not preempted.
    fn restore<R: Rng, D: Rng>(
        &self,
        failure_log: &[(u32, LineIdx)],
        window: u32,
        repair_rng: &mut R,
        dispatch_rng: &mut D,
    ) -> Result<Vec<RepairRecord>> {
        let cfg = self.scenario.episode;
        let start = f64::from(window);
        let mut pending: BTreeSet<LineIdx> = failure_log.iter().map(|&(_, l)| l).collect();
        let mut backlog = vec![0u32; self.dispatch.feeder_ids.len()];
        for &l in &pending {
            backlog[self.dispatch.feeder_slot(l)] += 1;
        }
        let mut crews: Vec<CrewState> = self
            .crew_starts
            .iter()
            .enumerate()
            .map(|(crew_id, &position)| CrewState {
                crew_id,
                position,
                busy_until: start,
                assigned_line: None,
            })
            .collect();
        let mut log = Vec::with_capacity(pending.len());
        let mut candidates: Vec<LineIdx> = Vec::with_capacity(pending.len());
        while !pending.is_empty() {
            let crew = crews
                .iter_mut()
                .min_by(|a, b| a.busy_until.total_cmp(&b.busy_until).then(a.crew_id.cmp(&b.crew_id)))
                .ok_or_else(|| Error::Invariant("no crews available".into()))?;
            let now = crew.busy_until.max(start);
            candidates.clear();
            candidates.extend(pending.iter().copied());
            let line = pick_next_repair(cfg, &self.dispatch, &candidates, crew, now, &backlog, dispatch_rng)?;
            let target = self.dispatch.midpoint(line);
            let travel = if cfg.travel_speed_m_per_h > 0.0 {
                crew.position.distance(&target) / cfg.travel_speed_m_per_h
            } else {
                0.0
            };
            let (lo, hi) = cfg.repair_time_h;
            let duration = if lo < hi { repair_rng.random_range(lo..=hi) } else { lo };
            let begin = now + travel;
            let finish = begin + duration;
            log.push(RepairRecord {
                start_hour: begin,
                finish_hour: finish,
                line,
                crew: crew.crew_id,
            });
            crew.position = target;
            crew.busy_until = finish;
            crew.assigned_line = Some(line);
            pending.remove(&line);
            backlog[self.dispatch.feeder_slot(line)] -= 1;
        }
        Ok(log)
    }

    /// Runs episodes `0..n` with seeds `rng::episode_seed(base_seed, i)`.
    /// `workers = None` uses the global rayon pool; results are identical for
    /// any worker count.
    pub fn run_ensemble(
        &self,
        base_seed: u64,
        n_episodes: usize,
        workers: Option<usize>,
    ) -> Result<Vec<EpisodeResult>> {
        if n_episodes == 0 {
            return Err(Error::input("an ensemble needs at least one episode"));
        }
        let job = || {
            (0..n_episodes)
                .into_par_iter()
                .map(|i| self.run_episode(i, rng::episode_seed(base_seed, i as u64)))
                .collect::<Result<Vec<_>>>()
        };
        match workers {
            Some(w) => rayon::ThreadPoolBuilder::new()
                .num_threads(w.max(1))
                .build()
                .map_err(|e| Error::Config(format!("workers: {e}")))?
                .install(job),
            None => job(),
        }
    }
}

pub fn run_episode(scenario: Scenario<'_>, episode_index: usize, seed: u64) -> Result<EpisodeResult> {
    Simulator::new(scenario)?.run_episode(episode_index, seed)
}

pub fn run_ensemble(
    scenario: Scenario<'_>,
    base_seed: u64,
    n_episodes: usize,
    workers: Option<usize>,
) -> Result<Vec<EpisodeResult>> {
    Simulator::new(scenario)?.run_ensemble(base_seed, n_episodes, workers)
}

/// Customers out per feeder at every trajectory hour, rebuilt from the
/// episode's logs.
pub fn feeder_trajectories(
    net: &PowerNetwork,
    index: &FeederIndex,
    result: &EpisodeResult,
) -> Vec<(String, Vec<u64>)> {
    let hours = result.outage_trajectory.len();
    let feeders: Vec<String> = net.feeders().keys().cloned().collect();
    let mut out: Vec<Vec<u64>> = vec![vec![0; hours]; feeders.len()];
    let failed_at: Vec<Option<u32>> = {
        let mut v = vec![None; net.lines().len()];
        for &(h, l) in &result.failure_log {
            v[l.0] = Some(h);
        }
        v
    };
    let mut finish = vec![f64::INFINITY; net.lines().len()];
    for r in &result.repair_log {
        finish[r.line.0] = r.finish_hour;
    }
    for t in 0..hours {
        let down: Vec<bool> = (0..net.lines().len())
            .map(|l| failed_at[l].is_some_and(|h| h as usize <= t) && finish[l] > t as f64)
            .collect();
        let connected = index.connected_nodes(net, &down);
        for (node, ok) in net.nodes().iter().zip(connected) {
            if !ok {
                let slot = feeders.binary_search(&node.feeder_id).expect("known feeder");
                out[slot][t] += node.customers;
            }
        }
    }
    feeders.into_iter().zip(out).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hazard::WeatherFrame;
    use crate::hours::HourStamp;
    use crate::testutil::{line, node};
    use std::collections::BTreeMap;

    fn event(hours: usize, gust: f64) -> WeatherEvent {
        let frames = (0..hours)
            .map(|h| WeatherFrame {
                hour_index: h as u32,
                gust: BTreeMap::from([("p".to_string(), gust)]),
            })
            .collect();
        WeatherEvent::new("e", HourStamp(0), frames).unwrap()
    }

    fn certain() -> FragilityParams {
        FragilityParams {
            p_cap: 1.0,
            ..FragilityParams::default()
        }
    }

    fn single_leaf() -> PowerNetwork {
        PowerNetwork::new(
            vec![node("root", "F", 0.0, 0.0, 0), node("a", "F", 10.0, 0.0, 2)],
            vec![line("l", "root", "a", "F")],
        )
        .unwrap()
    }

    #[test]
    fn hand_walked_single_failure() {
        let net = single_leaf();
        let ev = event(1, 1_000.0);
        let frag = certain();
        let cfg = EpisodeConfig {
            crews: 1,
            repair_time_h: (2.0, 2.0),
            travel_speed_m_per_h: 0.0,
            ..EpisodeConfig::default()
        };
        let r = run_episode(Scenario::power_only(&net, &ev, &frag, &cfg), 0, 42).unwrap();
        assert_eq!(r.outage_trajectory, vec![2, 2, 2, 0]);
        assert_eq!(r.failure_log, vec![(0, LineIdx(0))]);
        assert_eq!(r.repair_log.len(), 1);
        assert_eq!((r.repair_log[0].start_hour, r.repair_log[0].finish_hour), (1.0, 3.0));
        let again = run_episode(Scenario::power_only(&net, &ev, &frag, &cfg), 0, 42).unwrap();
        assert_eq!(r, again);
    }

    #[test]
    fn calm_event_yields_nothing() {
        let net = crate::testutil::chain();
        let ev = event(6, 0.0);
        let frag = certain();
        let cfg = EpisodeConfig::default();
        let sim = Simulator::new(Scenario::power_only(&net, &ev, &frag, &cfg)).unwrap();
        for r in sim.run_ensemble(3, 16, None).unwrap() {
            assert!(r.outage_trajectory.iter().all(|&c| c == 0));
            assert!(r.failure_log.is_empty() && r.repair_log.is_empty());
        }
    }

    #[test]
    fn zero_frame_event_is_rejected() {
        let net = single_leaf();
        let mut ev = event(1, 0.0);
        ev.frames.clear();
        let frag = FragilityParams::default();
        let cfg = EpisodeConfig::default();
        assert!(Simulator::new(Scenario::power_only(&net, &ev, &frag, &cfg)).is_err());
    }

    #[test]
    fn ensemble_is_worker_independent() {
        let net = crate::testutil::chain();
        let ev = event(4, 30.0);
        let frag = FragilityParams::default();
        let cfg = EpisodeConfig {
            crews: 2,
            ..EpisodeConfig::default()
        };
        let sim = Simulator::new(Scenario::power_only(&net, &ev, &frag, &cfg)).unwrap();
        let one = sim.run_ensemble(7, 64, Some(1)).unwrap();
        let many = sim.run_ensemble(7, 64, Some(8)).unwrap();
        assert_eq!(one, many);
        let single = sim.run_ensemble(7, 1, None).unwrap();
        assert_eq!(single[0], sim.run_episode(0, rng::episode_seed(7, 0)).unwrap());
        assert!(sim.run_ensemble(7, 0, None).is_err());
    }

    fn ctx_for(net: &PowerNetwork) -> DispatchContext {
        DispatchContext::new(net, &FeederIndex::build(net).unwrap(), 0)
    }

    fn crew_at(x: f64, y: f64) -> CrewState {
        CrewState {
            crew_id: 0,
            position: Point::new(x, y),
            busy_until: 0.0,
            assigned_line: None,
        }
    }

    /// Two feeders, each root → leaf; leaf customers and positions vary.
    fn two_lines(near: (f64, u64), far: (f64, u64)) -> PowerNetwork {
        PowerNetwork::new(
            vec![
                node("root1", "F1", near.0, 0.0, 0),
                node("a", "F1", near.0, 0.0 + 0.000_001, near.1),
                node("root2", "F2", far.0, 0.0, 0),
                node("b", "F2", far.0, 0.000_001, far.1),
            ],
            vec![line("la", "root1", "a", "F1"), line("lb", "root2", "b", "F2")],
        )
        .unwrap()
    }

    fn pick(ordering: RepairOrdering, net: &PowerNetwork, backlog: &[u32], hour: f64) -> String {
        let cfg = EpisodeConfig {
            ordering,
            ..EpisodeConfig::default()
        };
        let failed: Vec<LineIdx> = (0..net.lines().len()).map(LineIdx).collect();
        let mut r = rng::stream(0, rng::DISPATCH_STREAM);
        let l = pick_next_repair(&cfg, &ctx_for(net), &failed, &crew_at(0.0, 0.0), hour, backlog, &mut r).unwrap();
        net.line(l).id.clone()
    }

    #[test]
    fn proximity_and_criticality() {
        let net = two_lines((10.0, 7), (500.0, 120));
        assert_eq!(pick(RepairOrdering::Proximity, &net, &[1, 1], 0.0), "la");
        assert_eq!(pick(RepairOrdering::Criticality, &net, &[1, 1], 0.0), "lb");
        let tie = two_lines((10.0, 5), (10.0, 5));
        assert_eq!(pick(RepairOrdering::Proximity, &tie, &[1, 1], 0.0), "la");
        assert_eq!(pick(RepairOrdering::Criticality, &tie, &[1, 1], 0.0), "la");
    }

    #[test]
    fn hybrid_rules() {
        let single = single_leaf();
        assert_eq!(pick(RepairOrdering::HybridDynamic, &single, &[1], 100.0), "l");
        // Identical apart from backlog: the busier feeder wins.
        let twin = two_lines((10.0, 5), (10.0, 5));
        assert_eq!(pick(RepairOrdering::HybridDynamic, &twin, &[1, 5], 48.0), "lb");
        assert_eq!(pick(RepairOrdering::HybridDynamic, &twin, &[5, 1], 48.0), "la");
    }

    #[test]
    fn random_ordering_draws_from_candidates() {
        let net = two_lines((10.0, 5), (500.0, 5));
        let cfg = EpisodeConfig {
            ordering: RepairOrdering::Random,
            ..EpisodeConfig::default()
        };
        let failed = [LineIdx(0), LineIdx(1)];
        let ctx = ctx_for(&net);
        let mut r = rng::stream(5, rng::DISPATCH_STREAM);
        let mut seen = [0; 2];
        for _ in 0..200 {
            let l = pick_next_repair(&cfg, &ctx, &failed, &crew_at(0.0, 0.0), 0.0, &[1, 1], &mut r).unwrap();
            seen[l.0] += 1;
        }
        assert!(seen[0] > 50 && seen[1] > 50, "{seen:?}");
        assert!(pick_next_repair(&cfg, &ctx, &[], &crew_at(0.0, 0.0), 0.0, &[1, 1], &mut r).is_err());
    }

    #[test]
    fn repairs_respect_window_and_crew_count() {
        let net = crate::testutil::chain();
        let ev = event(3, 40.0);
        let frag = FragilityParams::default();
        let cfg = EpisodeConfig {
            crews: 2,
            ..EpisodeConfig::default()
        };
        let sim = Simulator::new(Scenario::power_only(&net, &ev, &frag, &cfg)).unwrap();
        for r in sim.run_ensemble(11, 32, None).unwrap() {
            let mut failed: Vec<LineIdx> = r.failure_log.iter().map(|f| f.1).collect();
            let mut repaired: Vec<LineIdx> = r.repair_log.iter().map(|x| x.line).collect();
            failed.sort();
            repaired.sort();
            assert_eq!(failed, repaired);
            for rec in &r.repair_log {
                assert!(rec.start_hour >= 3.0);
                let active = r
                    .repair_log
                    .iter()
                    .filter(|o| o.start_hour <= rec.start_hour && rec.start_hour < o.finish_hour)
                    .count();
                assert!(active <= 2);
            }
            assert_eq!(r.outage_trajectory.last(), Some(&0));
        }
    }
}
