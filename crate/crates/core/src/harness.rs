//! Kinematic execution, the independent entanglement verifier, and the
//! multi-episode experiment runner.

use std::f64::consts::PI;
use std::time::Instant;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::braid::{Braid3State, BraidError, BraidTable, BraidWord};
use crate::geometry::{
    build_space_time, extract_crossings, projection_angles, sub_braid_events, CrossingOptions, GeometryError,
    Perturbation, Point, ProjectionAxis, Trajectory,
};
use crate::planner::{plan, PermutationState, PlannerConfig};
use crate::workspace::{
    carry_over_braids, check_separation, map_path_timed, ranks_from_positions, Rect, WorkspaceConfig,
    WorkspaceError,
};

/// Clearance comparisons allow this much floating-point slack (meters).
pub const CLEARANCE_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum HarnessError {
    #[error("{key}: {msg}")]
    Config { key: String, msg: String },
    #[error("could not place {n} points {d_safe} apart after {attempts} attempts")]
    Sampling { n: usize, d_safe: f64, attempts: usize },
    #[error(transparent)]
    Workspace(#[from] WorkspaceError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Braid(#[from] BraidError),
}

fn config_err(key: impl Into<String>, msg: impl Into<String>) -> HarnessError {
    HarnessError::Config { key: key.into(), msg: msg.into() }
}

/// Smallest Γ̄ the default two-axis setup certifies against.
pub const DEFAULT_GAMMA_BAR: f64 = PI / 2.0 + 1e-3;

#[derive(Clone, Debug, PartialEq)]
pub struct Scenario {
    pub config: WorkspaceConfig,
    pub bases: Vec<Point>,
    pub initial_positions: Vec<Point>,
    pub target_sets: Vec<Vec<Point>>,
    pub seed: u64,
    pub gamma_bar: f64,
    /// Verifier projections are `{iπ/m : i = 0..=m}`.
    pub m: usize,
    pub bias: f64,
    pub max_expansions: usize,
    /// On a failed search, walk back through the executed swaps to an
    /// earlier set boundary and plan from there.
    pub retrace: bool,
}

impl Scenario {
    /// A team of `n` at random separated positions with `sets` random target
    /// sets, all drawn from `seed`.
    pub fn random(config: WorkspaceConfig, n: usize, sets: usize, seed: u64) -> Result<Self, HarnessError> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let initial = random_targets(&mut rng, &config.region, config.d_safe, n)?;
        let target_sets = (0..sets)
            .map(|_| random_targets(&mut rng, &config.region, config.d_safe, n))
            .collect::<Result<_, _>>()?;
        let defaults = PlannerConfig::default();
        Ok(Self {
            config,
            bases: initial.clone(),
            initial_positions: initial,
            target_sets,
            seed,
            gamma_bar: DEFAULT_GAMMA_BAR,
            m: 2,
            bias: defaults.bias,
            max_expansions: defaults.max_expansions,
            retrace: true,
        })
    }

    pub fn n(&self) -> usize {
        self.initial_positions.len()
    }

    pub fn planner_config(&self) -> PlannerConfig {
        PlannerConfig {
            max_expansions: self.max_expansions,
            bias: self.bias,
            check_braids: true,
            depth_orientation: self.config.depth_orientation(),
            ..PlannerConfig::default()
        }
    }

    pub fn verifier_axes(&self) -> Vec<ProjectionAxis> {
        projection_angles(self.m)
    }

    /// Checks every invariant; errors name the offending key.
    pub fn validate(&self) -> Result<(), HarnessError> {
        let n = self.n();
        if n == 0 {
            return Err(config_err("initial_positions", "at least one robot is required"));
        }
        if n > 255 {
            return Err(config_err("initial_positions", "at most 255 robots are supported"));
        }
        if self.bases.len() != n {
            return Err(config_err("bases", format!("expected {n} points, got {}", self.bases.len())));
        }
        self.config.validate(n).map_err(|e| {
            let key = match e {
                WorkspaceError::BadRegion => "workspace",
                WorkspaceError::BadParameter(k) => k,
                WorkspaceError::CellTooSmall { .. } | WorkspaceError::GridOutside { .. } => "cell_size",
                _ => "workspace",
            };
            config_err(key, e.to_string())
        })?;
        let finite = |pts: &[Point]| pts.iter().all(|p| p.is_finite());
        if !finite(&self.bases) {
            return Err(config_err("bases", "non-finite coordinate"));
        }
        let check_set = |key: String, pts: &[Point]| -> Result<(), HarnessError> {
            if pts.len() != n {
                return Err(config_err(key, format!("expected {n} points, got {}", pts.len())));
            }
            if !finite(pts) {
                return Err(config_err(key, "non-finite coordinate"));
            }
            if let Some(p) = pts.iter().find(|p| !self.config.region.contains(**p)) {
                return Err(config_err(key, format!("point ({}, {}) lies outside the workspace", p.x, p.y)));
            }
            check_separation(pts, self.config.d_safe).map_err(|e| config_err(key, e.to_string()))
        };
        check_set("initial_positions".into(), &self.initial_positions)?;
        for (k, set) in self.target_sets.iter().enumerate() {
            check_set(format!("target_sets[{k}]"), set)?;
        }
        if !(self.gamma_bar.is_finite() && self.gamma_bar > 0.0 && self.gamma_bar <= PI) {
            return Err(config_err("gamma_bar", "must lie in (0, π]"));
        }
        if self.m < 2 {
            return Err(config_err("m", "must be at least 2"));
        }
        if self.m as f64 <= PI / self.gamma_bar {
            return Err(config_err("m", format!("m = {} does not exceed π/gamma_bar = {}", self.m, PI / self.gamma_bar)));
        }
        if !(self.bias.is_finite() && self.bias >= 1.0) {
            return Err(config_err("bias", "must be finite and at least 1"));
        }
        if self.max_expansions == 0 {
            return Err(config_err("max_expansions", "must be positive"));
        }
        Ok(())
    }
}

/// Uniform rejection sampling of `n` points in `region`, pairwise at least
/// `d_safe` apart.
pub fn random_targets(rng: &mut impl Rng, region: &Rect, d_safe: f64, n: usize) -> Result<Vec<Point>, HarnessError> {
    let attempts = 1000 * n.max(1);
    let mut out: Vec<Point> = Vec::with_capacity(n);
    for _ in 0..attempts {
        if out.len() == n {
            break;
        }
        let p = Point::new(rng.gen_range(region.xmin..=region.xmax), rng.gen_range(region.ymin..=region.ymax));
        if out.iter().all(|q| q.distance(p) >= d_safe) {
            out.push(p);
        }
    }
    if out.len() < n {
        return Err(HarnessError::Sampling { n, d_safe, attempts });
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq)]
pub struct Simulation {
    pub times: Vec<f64>,
    /// `samples[k][i]` is robot `i` at `times[k]`.
    pub samples: Vec<Vec<Point>>,
    pub min_distance: f64,
    pub min_time: f64,
    pub min_pair: Option<(usize, usize)>,
}

/// Samples every robot every `dt` seconds plus at every waypoint time, and
/// records the closest approach among the samples.
pub fn simulate(trajs: &[Trajectory], dt: f64) -> Simulation {
    let horizon = trajs.iter().map(Trajectory::arrival_time).fold(0.0, f64::max);
    let mut times: Vec<f64> = trajs.iter().flat_map(|t| t.waypoints().iter().map(|w| w.t)).collect();
    if dt > 0.0 {
        let steps = (horizon / dt).floor() as usize;
        times.extend((0..=steps).map(|k| k as f64 * dt));
    }
    times.push(0.0);
    times.sort_by(f64::total_cmp);
    times.dedup();

    let mut sim = Simulation { times: Vec::new(), samples: Vec::new(), min_distance: f64::INFINITY, min_time: 0.0, min_pair: None };
    for &t in &times {
        let pts: Vec<Point> = trajs.iter().map(|tr| tr.position_at(t)).collect();
        for i in 0..pts.len() {
            for j in i + 1..pts.len() {
                let d = pts[i].distance(pts[j]);
                if d < sim.min_distance {
                    sim.min_distance = d;
                    sim.min_time = t;
                    sim.min_pair = Some((trajs[i].robot_id, trajs[j].robot_id));
                }
            }
        }
        sim.samples.push(pts);
    }
    sim.times = times;
    sim
}

/// Exact closest approach over `[from, to]`: between consecutive waypoint
/// times every pairwise offset is linear, so each piece is a quadratic.
pub fn exact_min_distance(trajs: &[Trajectory], from: f64, to: f64) -> f64 {
    let mut grid: Vec<f64> = trajs
        .iter()
        .flat_map(|t| t.waypoints().iter().map(|w| w.t))
        .filter(|&t| t > from && t < to)
        .collect();
    grid.push(from);
    grid.push(to);
    grid.sort_by(f64::total_cmp);
    grid.dedup();
    let mut best = f64::INFINITY;
    for i in 0..trajs.len() {
        for j in i + 1..trajs.len() {
            let rel = |t: f64| {
                let (a, b) = (trajs[i].position_at(t), trajs[j].position_at(t));
                (a.x - b.x, a.y - b.y)
            };
            for w in grid.windows(2) {
                let (p0, p1) = (rel(w[0]), rel(w[1]));
                let v = (p1.0 - p0.0, p1.1 - p0.1);
                let vv = v.0 * v.0 + v.1 * v.1;
                let s = if vv > 0.0 { (-(p0.0 * v.0 + p0.1 * v.1) / vv).clamp(0.0, 1.0) } else { 0.0 };
                let d = (p0.0 + s * v.0).hypot(p0.1 + s * v.1);
                best = best.min(d).min(p1.0.hypot(p1.1));
            }
            if grid.len() == 1 {
                let p = rel(from);
                best = best.min(p.0.hypot(p.1));
            }
        }
    }
    best
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Clean,
    Violation,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ViolationRecord {
    pub robots: Vec<usize>,
    pub axis: usize,
    pub angle: f64,
    pub time: f64,
    pub word: String,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EntanglementReport {
    pub verdict: Verdict,
    pub violations: Vec<ViolationRecord>,
    pub perturbations: Vec<Perturbation>,
    /// Braids after the trajectories, one slot per verifier axis.
    #[serde(skip)]
    pub braids: BraidTable,
}

/// Verifies `trajs` on the scenario's projection set from untangled cables.
pub fn verify(trajs: &[Trajectory], scenario: &Scenario) -> Result<EntanglementReport, HarnessError> {
    let axes = scenario.verifier_axes();
    let initial = BraidTable::identity(trajs.len(), axes.len());
    verify_with(trajs, &axes, scenario.config.height, &initial)
}

/// Folds every pair and triplet braid on every axis, starting from
/// `initial`, and reports each subset's first entangling prefix.
pub fn verify_with(
    trajs: &[Trajectory],
    axes: &[ProjectionAxis],
    height: f64,
    initial: &BraidTable,
) -> Result<EntanglementReport, HarnessError> {
    let n = trajs.len();
    if initial.robots() != n || initial.axes() != axes.len() {
        return Err(config_err("braids", "table shape does not match the team and axes"));
    }
    if let Some(bad) = trajs.iter().enumerate().find(|(i, t)| t.robot_id != *i) {
        return Err(config_err("trajectories", format!("entry {} has robot id {}", bad.0, bad.1.robot_id)));
    }
    let mut table = initial.clone();
    let mut violations = Vec::new();
    let mut perturbations = Vec::new();
    let moving = trajs.iter().any(|t| t.arrival_time() > 0.0);
    let lifted = if moving && n > 1 { Some(build_space_time(trajs, height)?) } else { None };

    for (slot, axis) in axes.iter().enumerate() {
        let set = match &lifted {
            Some(l) => extract_crossings(l, axis, slot, &CrossingOptions::default())?,
            None => continue,
        };
        perturbations.extend(set.perturbations.iter().cloned());
        let mut record = |robots: Vec<usize>, time: f64, word: &BraidWord| {
            violations.push(ViolationRecord { robots, axis: slot, angle: axis.angle(), time, word: word.to_string() });
        };
        for i in 0..n {
            for j in i + 1..n {
                let mut state = table.pair(slot, i, j);
                if state.violated {
                    continue;
                }
                for (time, letter) in sub_braid_events(&set, &[i, j])? {
                    let (next, ok) = state.update(letter)?;
                    state = next;
                    if !ok {
                        record(vec![i, j], time, &state.word());
                        break;
                    }
                }
                table.set_pair(slot, i, j, state);
            }
        }
        for i in 0..n {
            for j in i + 1..n {
                for k in j + 1..n {
                    let mut state: Braid3State = table.triplet(slot, i, j, k).clone();
                    if state.violated() {
                        continue;
                    }
                    for (time, letter) in sub_braid_events(&set, &[i, j, k])? {
                        let (next, ok) = state.update(letter)?;
                        state = next;
                        if !ok {
                            record(vec![i, j, k], time, &state.reduced_word());
                            break;
                        }
                    }
                    table.set_triplet(slot, [i, j, k], state);
                }
            }
        }
    }
    for (axis, subset, word) in initial.entries() {
        let violated = match subset {
            crate::braid::Subset::Pair([i, j]) => initial.pair(axis, i, j).violated,
            crate::braid::Subset::Triplet([i, j, k]) => initial.triplet(axis, i, j, k).violated(),
        };
        if violated {
            let robots = subset.robots().to_vec();
            violations.push(ViolationRecord { robots, axis, angle: axes[axis].angle(), time: 0.0, word: word.to_string() });
        }
    }
    violations.sort_by(|a, b| a.time.total_cmp(&b.time).then(a.axis.cmp(&b.axis)).then(a.robots.cmp(&b.robots)));
    let verdict = if violations.is_empty() { Verdict::Clean } else { Verdict::Violation };
    Ok(EntanglementReport { verdict, violations, perturbations, braids: table })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SetMetrics {
    pub index: usize,
    pub success: bool,
    pub failure: Option<String>,
    /// Wall-clock seconds spent in the search.
    pub plan_time_s: f64,
    pub swaps: usize,
    pub expanded: usize,
    pub rejected_by_braid: usize,
    pub path_lengths: Vec<f64>,
    pub distance: f64,
    /// Closest approach among the dt samples.
    pub min_distance: Option<f64>,
    /// Closest approach computed exactly over the whole episode.
    pub exact_min_distance: Option<f64>,
    /// Closest approach computed exactly while the team is on the grid.
    pub grid_min_distance: Option<f64>,
    pub violations: usize,
    /// Planner's predicted braids equal the braids of the executed motion.
    pub braids_agree: Option<bool>,
    /// Swaps walked back before the planned part, zero without a retrace.
    pub retraced: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunMetrics {
    pub robots: usize,
    pub seed: u64,
    pub total: usize,
    pub successes: usize,
    pub success_rate: f64,
    pub mean_plan_time_s: f64,
    pub mean_distance: f64,
    pub min_distance: Option<f64>,
    pub braid_mismatches: usize,
    pub sets: Vec<SetMetrics>,
}

impl RunMetrics {
    fn from_sets(robots: usize, seed: u64, sets: Vec<SetMetrics>) -> Self {
        let total = sets.len();
        let successes = sets.iter().filter(|s| s.success).count();
        let mean = |f: &dyn Fn(&SetMetrics) -> f64| {
            if total == 0 { 0.0 } else { sets.iter().map(f).sum::<f64>() / total as f64 }
        };
        Self {
            robots,
            seed,
            total,
            successes,
            success_rate: if total == 0 { 1.0 } else { successes as f64 / total as f64 },
            mean_plan_time_s: mean(&|s| s.plan_time_s),
            mean_distance: mean(&|s| s.distance),
            min_distance: sets.iter().filter_map(|s| s.min_distance).reduce(f64::min),
            braid_mismatches: sets.iter().filter(|s| s.braids_agree == Some(false)).count(),
            sets,
        }
    }

    /// The report with wall-clock fields zeroed, for determinism checks.
    pub fn without_timings(&self) -> Self {
        let mut out = self.clone();
        out.mean_plan_time_s = 0.0;
        for s in &mut out.sets {
            s.plan_time_s = 0.0;
        }
        out
    }
}

/// Runs every target set in order: plan, map, simulate, verify, carry over.
/// A failed set leaves the team and its braids where they were.
/// Earlier set boundaries tried with a reduced budget before the origin.
const RETRACE_MARKS: usize = 3;
/// Budget divisor for retrace attempts from intermediate boundaries.
const RETRACE_BUDGET_DIVISOR: usize = 10;

/// Executed permutations since the start of a sequence, with the braids at
/// every set boundary.
struct History {
    states: Vec<PermutationState>,
    marks: Vec<(usize, BraidTable)>,
}

impl History {
    fn new(start: PermutationState, braids: BraidTable) -> Self {
        Self { states: vec![start], marks: vec![(0, braids)] }
    }

    /// Replaces everything after state `from` with `path`, which starts
    /// there after walking back, and marks its end.
    fn advance(&mut self, from: usize, path: &[PermutationState], braids: &BraidTable) {
        let tail = path.len() - 1 - (self.states.len() - 1 - from);
        self.states.truncate(from + 1);
        self.states.extend_from_slice(&path[path.len() - tail..]);
        self.marks.retain(|&(i, _)| i <= from);
        self.marks.push((self.states.len() - 1, braids.clone()));
    }
}

struct SetAttempt {
    expanded: usize,
    rejected_by_braid: usize,
    /// History index planned from, executed path and final braids.
    found: Option<(usize, Vec<PermutationState>, BraidTable)>,
}

/// Plans from the current state; failing that, and when allowed, from
/// recent set boundaries and finally the origin, reached by walking the
/// executed swaps backwards. Reversing a swap inverts its crossing, so the
/// braids return exactly to their value at the boundary.
fn plan_set(
    start: &PermutationState,
    goal: &PermutationState,
    braids: &BraidTable,
    history: &History,
    cfg: &PlannerConfig,
    retrace: bool,
) -> Result<SetAttempt, HarnessError> {
    let run = |from: &PermutationState, table: &BraidTable, cfg: &PlannerConfig| {
        plan(from, goal, table, cfg).map_err(|e| config_err("planner", e.to_string()))
    };
    let current = history.states.len() - 1;
    let first = run(start, braids, cfg)?;
    let mut attempt = SetAttempt { expanded: first.stats.expanded, rejected_by_braid: first.stats.rejected_by_braid, found: None };
    if let Some(table) = first.final_braids {
        attempt.found = Some((current, first.path, table));
        return Ok(attempt);
    }
    if !retrace {
        return Ok(attempt);
    }
    let last = history.marks.len() - 1;
    let mut tries: Vec<usize> = (0..last).rev().take(RETRACE_MARKS).collect();
    if last > 0 && !tries.contains(&0) {
        tries.push(0);
    }
    for k in tries {
        let (at, ref table) = history.marks[k];
        let budget = if k == 0 { *cfg } else { PlannerConfig { max_expansions: (cfg.max_expansions / RETRACE_BUDGET_DIVISOR).max(1), ..*cfg } };
        let out = run(&history.states[at], table, &budget)?;
        attempt.expanded += out.stats.expanded;
        attempt.rejected_by_braid += out.stats.rejected_by_braid;
        if let Some(final_braids) = out.final_braids {
            let mut path: Vec<PermutationState> = history.states[at..].iter().rev().cloned().collect();
            path.extend_from_slice(&out.path[1..]);
            attempt.found = Some((at, path, final_braids));
            break;
        }
    }
    Ok(attempt)
}

pub fn run_task_sequence(scenario: &Scenario) -> Result<RunMetrics, HarnessError> {
    scenario.validate()?;
    let n = scenario.n();
    let config = &scenario.config;
    let planner_cfg = scenario.planner_config();
    let verifier_axes = scenario.verifier_axes();
    let dt = config.default_dt();

    let mut positions = scenario.initial_positions.clone();
    let mut braids = BraidTable::identity(n, 2);
    let mut verifier_braids = BraidTable::identity(n, verifier_axes.len());
    let mut sets = Vec::with_capacity(scenario.target_sets.len());
    let mut history = History::new(ranks_from_positions(&positions, &config.axes)?, braids.clone());

    for (index, targets) in scenario.target_sets.iter().enumerate() {
        let mut m = SetMetrics {
            index,
            success: false,
            failure: None,
            plan_time_s: 0.0,
            swaps: 0,
            expanded: 0,
            rejected_by_braid: 0,
            path_lengths: vec![0.0; n],
            distance: 0.0,
            min_distance: None,
            exact_min_distance: None,
            grid_min_distance: None,
            violations: 0,
            braids_agree: None,
            retraced: 0,
        };
        let start = ranks_from_positions(&positions, &config.axes)?;
        let goal = ranks_from_positions(targets, &config.axes)?;
        let clock = Instant::now();
        let attempt = plan_set(&start, &goal, &braids, &history, &planner_cfg, scenario.retrace)?;
        m.plan_time_s = clock.elapsed().as_secs_f64();
        m.expanded = attempt.expanded;
        m.rejected_by_braid = attempt.rejected_by_braid;
        let Some((from, path, final_braids)) = attempt.found else {
            m.failure = Some("no path found".into());
            sets.push(m);
            continue;
        };
        m.swaps = path.len() - 1;
        m.retraced = history.states.len() - 1 - from;

        let mapped = map_path_timed(&path, config, &positions, targets)?;
        let trajs = &mapped.trajectories;
        m.path_lengths = trajs.iter().map(Trajectory::length).collect();
        m.distance = m.path_lengths.iter().sum();
        let horizon = trajs.iter().map(Trajectory::arrival_time).fold(0.0, f64::max);
        if n > 1 {
            m.min_distance = Some(simulate(trajs, dt).min_distance);
            m.exact_min_distance = Some(exact_min_distance(trajs, 0.0, horizon));
            if mapped.grid_end > mapped.grid_start {
                m.grid_min_distance = Some(exact_min_distance(trajs, mapped.grid_start, mapped.grid_end));
            }
        }

        let report = verify_with(trajs, &verifier_axes, config.height, &verifier_braids)?;
        m.violations = report.violations.len();
        let carried = carry_over_braids(trajs, &braids, &config.axes, config.height);
        if let Ok(table) = &carried {
            m.braids_agree = Some(table == &final_braids);
        }

        m.failure = if m.violations > 0 {
            Some(format!("{} entanglement violations", m.violations))
        } else if m.min_distance.is_some_and(|d| d < config.d_safe - CLEARANCE_SLACK) {
            Some("clearance below d_safe".into())
        } else if let Err(e) = &carried {
            Some(e.to_string())
        } else {
            None
        };
        m.success = m.failure.is_none();
        if m.success {
            positions = targets.clone();
            braids = carried?;
            verifier_braids = report.braids;
            history.advance(from, &path, &braids);
        }
        sets.push(m);
    }
    Ok(RunMetrics::from_sets(n, scenario.seed, sets))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Waypoint;

    fn w(x: f64, y: f64, t: f64) -> Waypoint {
        Waypoint { pos: Point::new(x, y), t }
    }

    #[test]
    fn stationary_pair_distance() {
        let trajs = vec![
            Trajectory::stationary(0, Point::new(0.0, 0.0), 2.0),
            Trajectory::stationary(1, Point::new(1.0, 0.0), 2.0),
        ];
        let sim = simulate(&trajs, 0.1);
        assert_eq!(sim.min_distance, 1.0);
        assert_eq!(exact_min_distance(&trajs, 0.0, 2.0), 1.0);
        assert!(sim.times.contains(&2.0));
    }

    #[test]
    fn simulate_keeps_waypoint_times() {
        let trajs = vec![Trajectory::new(0, vec![w(0.0, 0.0, 0.0), w(1.0, 0.0, 0.37), w(1.0, 1.0, 1.0)]).unwrap()];
        let sim = simulate(&trajs, 0.25);
        for t in [0.0, 0.25, 0.37, 0.5, 0.75, 1.0] {
            assert!(sim.times.contains(&t), "{t}");
        }
        assert_eq!(sim.min_distance, f64::INFINITY);
    }

    #[test]
    fn exact_distance_finds_midsegment_minimum() {
        // head-on pass offset by 0.5: closest at t = 1, missed by coarse samples
        let trajs = vec![
            Trajectory::new(0, vec![w(-1.0, 0.0, 0.0), w(1.0, 0.0, 2.0)]).unwrap(),
            Trajectory::new(1, vec![w(1.0, 0.5, 0.0), w(-1.0, 0.5, 2.0)]).unwrap(),
        ];
        assert!((exact_min_distance(&trajs, 0.0, 2.0) - 0.5).abs() < 1e-12);
        assert!(simulate(&trajs, 0.3).min_distance > 0.5);
    }

    #[test]
    fn stationary_team_is_clean() {
        let s = Scenario::random(WorkspaceConfig::default(), 4, 0, 1).unwrap();
        let trajs: Vec<_> =
            s.initial_positions.iter().enumerate().map(|(i, &p)| Trajectory::stationary(i, p, 5.0)).collect();
        let r = verify(&trajs, &s).unwrap();
        assert_eq!(r.verdict, Verdict::Clean);
        assert!(r.braids.is_clean());
    }

    #[test]
    fn forbidden_triplet_is_reported() {
        // on α = 0 (u = y, depth = x) realize σ₁ σ₂⁻¹ σ₁ among three robots
        let trajs = vec![
            // over b, then under c
            Trajectory::new(0, vec![w(0.0, 0.0, 0.0), w(1.0, 1.5, 1.0), w(-3.0, 3.0, 2.0), w(-3.0, 3.0, 3.0)]).unwrap(),
            // over c at the end
            Trajectory::new(1, vec![w(0.0, 1.0, 0.0), w(-1.0, 0.0, 1.0), w(0.0, 0.0, 2.0), w(1.0, 2.5, 3.0)]).unwrap(),
            Trajectory::stationary(2, Point::new(0.0, 2.0), 3.0),
        ];
        let axes = [ProjectionAxis::new(0.0)];
        let r = verify_with(&trajs, &axes, 2.0, &BraidTable::identity(3, 1)).unwrap();
        assert_eq!(r.verdict, Verdict::Violation);
        assert_eq!(r.violations.len(), 1, "{:?}", r.violations);
        assert_eq!(r.violations[0].robots, vec![0, 1, 2]);
        assert_eq!(r.violations[0].word, "s1 S2 s1");
    }

    #[test]
    fn random_targets_deterministic_and_separated() {
        let region = WorkspaceConfig::default().region;
        let a = random_targets(&mut ChaCha8Rng::seed_from_u64(9), &region, 1.0, 10).unwrap();
        let b = random_targets(&mut ChaCha8Rng::seed_from_u64(9), &region, 1.0, 10).unwrap();
        assert_eq!(a, b);
        assert!(check_separation(&a, 1.0).is_ok());
        let tiny = Rect { xmin: 0.0, xmax: 1.0, ymin: 0.0, ymax: 1.0 };
        assert!(matches!(
            random_targets(&mut ChaCha8Rng::seed_from_u64(1), &tiny, 1.0, 5),
            Err(HarnessError::Sampling { .. })
        ));
    }

    #[test]
    fn validation_names_keys() {
        let mut s = Scenario::random(WorkspaceConfig::default(), 3, 1, 4).unwrap();
        s.m = 1;
        assert!(matches!(s.validate(), Err(HarnessError::Config { key, .. }) if key == "m"));
        s.m = 2;
        s.gamma_bar = 1.5;
        assert!(matches!(s.validate(), Err(HarnessError::Config { key, .. }) if key == "m"));
        s.gamma_bar = DEFAULT_GAMMA_BAR;
        s.target_sets[0].pop();
        assert!(matches!(s.validate(), Err(HarnessError::Config { key, .. }) if key == "target_sets[0]"));
    }

    #[test]
    fn target_equal_to_start_is_free() {
        let mut s = Scenario::random(WorkspaceConfig::default(), 5, 0, 3).unwrap();
        s.target_sets = vec![s.initial_positions.clone()];
        let r = run_task_sequence(&s).unwrap();
        assert_eq!(r.success_rate, 1.0);
        assert_eq!(r.sets[0].distance, 0.0);
        assert_eq!(r.sets[0].swaps, 0);
    }

    #[test]
    fn short_run_succeeds() {
        let s = Scenario::random(WorkspaceConfig::default(), 5, 8, 11).unwrap();
        let r = run_task_sequence(&s).unwrap();
        assert_eq!(r.success_rate, 1.0, "{:?}", r.sets.iter().map(|s| &s.failure).collect::<Vec<_>>());
        assert_eq!(r.braid_mismatches, 0);
        let d: f64 = r.sets.iter().map(|s| s.distance).sum::<f64>() / r.total as f64;
        assert!((r.mean_distance - d).abs() < 1e-9);
    }
}
