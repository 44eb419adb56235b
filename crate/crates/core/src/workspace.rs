//! Bridges the continuous workspace and the permutation grid.
//!
//! Robot `i` with ranks `(a, b)` is placed by the linear map θ at
//! `center + cell·((a - (n-1)/2)·e₁ + (b - (n-1)/2)·e₂)`, where `e_ℓ` is the
//! direction of increasing projected coordinate on axis `ℓ`. Ranks of the
//! θ-image under each axis are then exactly `a` and `b`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::braid::{BraidTable, BraidWord, Subset};
use crate::geometry::{
    build_space_time, extract_crossings, CrossingOptions, CrossingSet, GeometryError, Point, ProjectionAxis,
    Trajectory, Waypoint,
};
use crate::planner::{depth_orientation, PermutationState};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum WorkspaceError {
    #[error("workspace region is empty or not finite")]
    BadRegion,
    #[error("{0} must be finite and positive")]
    BadParameter(&'static str),
    #[error("cell_size {cell} is smaller than d_safe {d_safe}")]
    CellTooSmall { cell: f64, d_safe: f64 },
    #[error("projection axes are not perpendicular")]
    AxesNotPerpendicular,
    #[error("a {n}x{n} grid with cell_size {cell} does not fit inside the workspace")]
    GridOutside { n: usize, cell: f64 },
    #[error("robots {0} and {1} share a position")]
    DuplicatePoints(usize, usize),
    #[error("robots {0} and {1} are closer than d_safe")]
    TooClose(usize, usize),
    #[error("expected {expected} points, got {got}")]
    CountMismatch { expected: usize, got: usize },
    #[error("permutation path is inconsistent: {0}")]
    PathMismatch(String),
    #[error("entanglement alarm on axis {axis} for {subset} at t = {time}: {word}")]
    EntanglementAlarm { axis: usize, subset: Subset, word: BraidWord, time: f64 },
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

/// Axis-aligned rectangle.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Rect {
    pub xmin: f64,
    pub xmax: f64,
    pub ymin: f64,
    pub ymax: f64,
}

impl Rect {
    pub fn center(&self) -> Point {
        Point::new(0.5 * (self.xmin + self.xmax), 0.5 * (self.ymin + self.ymax))
    }

    pub fn contains(&self, p: Point) -> bool {
        (self.xmin..=self.xmax).contains(&p.x) && (self.ymin..=self.ymax).contains(&p.y)
    }

    pub fn width(&self) -> f64 {
        self.xmax - self.xmin
    }

    pub fn height(&self) -> f64 {
        self.ymax - self.ymin
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WorkspaceConfig {
    pub region: Rect,
    /// Height of the space-time box; only scales the lifted curves.
    pub height: f64,
    pub axes: [ProjectionAxis; 2],
    pub cell_size: f64,
    pub d_safe: f64,
    pub speed: f64,
}

impl Default for WorkspaceConfig {
    fn default() -> Self {
        Self {
            region: Rect { xmin: -10.0, xmax: 10.0, ymin: -10.0, ymax: 10.0 },
            height: 2.0,
            axes: [ProjectionAxis::new(0.0), ProjectionAxis::new(std::f64::consts::FRAC_PI_2)],
            cell_size: 1.5,
            d_safe: 1.0,
            speed: 1.0,
        }
    }
}

impl WorkspaceConfig {
    /// Checks the parameters and that an `n`×`n` grid fits in the region.
    pub fn validate(&self, n: usize) -> Result<(), WorkspaceError> {
        let r = &self.region;
        let finite = [r.xmin, r.xmax, r.ymin, r.ymax].iter().all(|v| v.is_finite());
        if !finite || !(r.xmax > r.xmin && r.ymax > r.ymin) {
            return Err(WorkspaceError::BadRegion);
        }
        for (name, v) in [("height", self.height), ("cell_size", self.cell_size), ("d_safe", self.d_safe), ("speed", self.speed)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(WorkspaceError::BadParameter(name));
            }
        }
        if self.cell_size < self.d_safe {
            return Err(WorkspaceError::CellTooSmall { cell: self.cell_size, d_safe: self.d_safe });
        }
        if (self.axes[0].angle() - self.axes[1].angle()).cos().abs() > 1e-9 {
            return Err(WorkspaceError::AxesNotPerpendicular);
        }
        if n > 0 {
            let last = n - 1;
            let corners = [(0, 0), (0, last), (last, 0), (last, last)];
            let tol = 1e-9 * (1.0 + r.width().max(r.height()));
            let grown = Rect { xmin: r.xmin - tol, xmax: r.xmax + tol, ymin: r.ymin - tol, ymax: r.ymax + tol };
            if corners.iter().any(|&(a, b)| !grown.contains(self.cell_center(n, a, b))) {
                return Err(WorkspaceError::GridOutside { n, cell: self.cell_size });
            }
        }
        Ok(())
    }

    /// Crossing-sign orientation the planner needs for these axes.
    pub fn depth_orientation(&self) -> [i32; 2] {
        depth_orientation(&self.axes)
    }

    /// Center of grid cell `(a, b)` (0-based ranks) for a team of `n`.
    pub fn cell_center(&self, n: usize, a: usize, b: usize) -> Point {
        let mid = (n as f64 - 1.0) / 2.0;
        let (e1, e2) = (self.axes[0].direction(), self.axes[1].direction());
        let (s1, s2) = (self.cell_size * (a as f64 - mid), self.cell_size * (b as f64 - mid));
        let c = self.region.center();
        Point::new(c.x + s1 * e1.x + s2 * e2.x, c.y + s1 * e1.y + s2 * e2.y)
    }

    /// Default simulation step: ten samples per grid move.
    pub fn default_dt(&self) -> f64 {
        self.cell_size / (10.0 * self.speed)
    }
}

/// θ applied to every robot of `perms`.
pub fn theta(config: &WorkspaceConfig, perms: &PermutationState) -> Vec<Point> {
    let n = perms.n();
    (0..n).map(|i| config.cell_center(n, perms.rank(0, i), perms.rank(1, i))).collect()
}

/// Ranks of `points` along each axis (0-based); equal projections are
/// ordered by robot id as [`ProjectionAxis::order`] does.
pub fn ranks_from_positions(points: &[Point], axes: &[ProjectionAxis; 2]) -> Result<PermutationState, WorkspaceError> {
    for i in 0..points.len() {
        if let Some(j) = (i + 1..points.len()).find(|&j| points[j] == points[i]) {
            return Err(WorkspaceError::DuplicatePoints(i, j));
        }
    }
    let ids: Vec<usize> = (0..points.len()).collect();
    let ranks = |axis: &ProjectionAxis| {
        let us: Vec<f64> = points.iter().map(|&p| axis.u(p)).collect();
        let idx = axis.order(&us, &ids, ProjectionAxis::tie_tolerance(us.iter().copied()));
        let mut r = vec![0; points.len()];
        for (rank, &i) in idx.iter().enumerate() {
            r[i] = rank;
        }
        r
    };
    PermutationState::new(ranks(&axes[0]), ranks(&axes[1]))
        .map_err(|e| WorkspaceError::PathMismatch(e.to_string()))
}

/// Timed waypoints executing `path`: a synchronized straight move from
/// `start` into the grid, one swap at a time inside the grid, then a
/// synchronized straight move out to `targets`. A team already at its
/// targets with nothing to swap stays put.
pub fn map_path(
    path: &[PermutationState],
    config: &WorkspaceConfig,
    start: &[Point],
    targets: &[Point],
) -> Result<Vec<Trajectory>, WorkspaceError> {
    Ok(map_path_timed(path, config, start, targets)?.trajectories)
}

/// Output of [`map_path_timed`].
#[derive(Clone, Debug, PartialEq)]
pub struct MappedPlan {
    pub trajectories: Vec<Trajectory>,
    /// Time the team reaches the grid cells of the first state.
    pub grid_start: f64,
    /// Time the last swap ends.
    pub grid_end: f64,
}

/// [`map_path`] together with the window spent on the grid.
pub fn map_path_timed(
    path: &[PermutationState],
    config: &WorkspaceConfig,
    start: &[Point],
    targets: &[Point],
) -> Result<MappedPlan, WorkspaceError> {
    let Some(first) = path.first() else {
        return Err(WorkspaceError::PathMismatch("empty path".into()));
    };
    let n = first.n();
    for pts in [start, targets] {
        if pts.len() != n {
            return Err(WorkspaceError::CountMismatch { expected: n, got: pts.len() });
        }
    }
    if ranks_from_positions(start, &config.axes)? != *first {
        return Err(WorkspaceError::PathMismatch("first state differs from the start ranks".into()));
    }
    if ranks_from_positions(targets, &config.axes)? != *path.last().unwrap() {
        return Err(WorkspaceError::PathMismatch("last state differs from the target ranks".into()));
    }
    for (k, w) in path.windows(2).enumerate() {
        if w[0].n() != n || w[1].n() != n || w[0].swap_distance(&w[1]) != 1 {
            return Err(WorkspaceError::PathMismatch(format!("step {k} is not a single adjacent swap")));
        }
    }

    if path.len() == 1 && start == targets {
        let trajectories = start.iter().enumerate().map(|(i, &p)| Trajectory::stationary(i, p, 0.0)).collect();
        return Ok(MappedPlan { trajectories, grid_start: 0.0, grid_end: 0.0 });
    }
    let mut times = vec![0.0];
    let mut frames = vec![start.to_vec()];
    let sync_move = |to: Vec<Point>, times: &mut Vec<f64>, frames: &mut Vec<Vec<Point>>| {
        let from = frames.last().unwrap();
        let dur = from.iter().zip(&to).map(|(a, b)| a.distance(*b)).fold(0.0, f64::max) / config.speed;
        if dur > 0.0 {
            times.push(times.last().unwrap() + dur);
            frames.push(to);
        }
    };
    sync_move(theta(config, first), &mut times, &mut frames);
    let grid_start = *times.last().unwrap();
    let step = config.cell_size / config.speed;
    for state in &path[1..] {
        times.push(times.last().unwrap() + step);
        frames.push(theta(config, state));
    }
    let grid_end = *times.last().unwrap();
    sync_move(targets.to_vec(), &mut times, &mut frames);

    let trajectories = (0..n)
        .map(|i| {
            let waypoints = times.iter().zip(&frames).map(|(&t, f)| Waypoint { pos: f[i], t }).collect();
            Trajectory::new(i, waypoints).map_err(WorkspaceError::from)
        })
        .collect::<Result<_, _>>()?;
    Ok(MappedPlan { trajectories, grid_start, grid_end })
}

/// Folds the crossings of one axis into `table` (slot `axis_slot`), stopping
/// at the first entangling letter. Returns that letter's time on failure.
pub fn fold_crossings(
    table: &mut BraidTable,
    set: &CrossingSet,
    axis_slot: usize,
) -> Result<(), (crate::braid::Violation, f64)> {
    let n = set.initial_order.len();
    let mut order = set.initial_order.clone();
    let mut pos = vec![0; n];
    for (p, &r) in order.iter().enumerate() {
        pos[r] = p;
    }
    for e in &set.events {
        let p = usize::from(e.letter.index()) - 1;
        let (left, right) = (order[p], order[p + 1]);
        let at = &pos;
        table
            .apply_swap(axis_slot, left, right, e.letter.sign(), |k| at[k] < p)
            .map_err(|v| (v, e.time))?;
        order.swap(p, p + 1);
        pos[left] = p + 1;
        pos[right] = p;
    }
    Ok(())
}

/// Extends `previous` with the crossings of the executed trajectories on
/// each axis. Raises an alarm for the earliest entangling crossing when the
/// executed motion entangles.
pub fn carry_over_braids(
    executed: &[Trajectory],
    previous: &BraidTable,
    axes: &[ProjectionAxis],
    height: f64,
) -> Result<BraidTable, WorkspaceError> {
    let mut table = previous.clone();
    if executed.iter().all(|t| t.arrival_time() == 0.0) {
        return Ok(table);
    }
    let lifted = build_space_time(executed, height)?;
    let mut alarm: Option<(crate::braid::Violation, f64)> = None;
    for (slot, axis) in axes.iter().enumerate() {
        let set = extract_crossings(&lifted, axis, slot, &CrossingOptions::default())?;
        if let Err((v, time)) = fold_crossings(&mut table, &set, slot) {
            if alarm.as_ref().map_or(true, |(_, t)| time < *t) {
                alarm = Some((v, time));
            }
        }
    }
    match alarm {
        None => Ok(table),
        Some((v, time)) => Err(WorkspaceError::EntanglementAlarm { axis: v.axis, subset: v.subset, word: v.word, time }),
    }
}

/// Positions and accumulated braids of a team between episodes.
#[derive(Clone, Debug, PartialEq)]
pub struct TeamState {
    pub positions: Vec<Point>,
    pub bases: Vec<Point>,
    pub braids: BraidTable,
}

impl TeamState {
    /// A fresh team at `positions` with untangled cables.
    pub fn new(positions: Vec<Point>, bases: Vec<Point>, d_safe: f64) -> Result<Self, WorkspaceError> {
        let n = positions.len();
        if bases.len() != n {
            return Err(WorkspaceError::CountMismatch { expected: n, got: bases.len() });
        }
        check_separation(&positions, d_safe)?;
        Ok(Self { braids: BraidTable::identity(n, 2), positions, bases })
    }
}

/// Errors unless every pair of points is distinct and at least `d_safe` apart.
pub fn check_separation(points: &[Point], d_safe: f64) -> Result<(), WorkspaceError> {
    for i in 0..points.len() {
        for j in i + 1..points.len() {
            if points[i] == points[j] {
                return Err(WorkspaceError::DuplicatePoints(i, j));
            }
            if points[i].distance(points[j]) < d_safe {
                return Err(WorkspaceError::TooClose(i, j));
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::braid::Braid2State;
    use crate::planner::{plan, PlannerConfig};

    fn cfg() -> WorkspaceConfig {
        WorkspaceConfig::default()
    }

    fn min_distance(trajs: &[Trajectory], dt: f64) -> f64 {
        let horizon = trajs.iter().map(Trajectory::arrival_time).fold(0.0, f64::max);
        let steps = (horizon / dt).ceil() as usize;
        let mut best = f64::INFINITY;
        for s in 0..=steps {
            let t = (s as f64 * dt).min(horizon);
            for i in 0..trajs.len() {
                for j in i + 1..trajs.len() {
                    best = best.min(trajs[i].position_at(t).distance(trajs[j].position_at(t)));
                }
            }
        }
        best
    }

    #[test]
    fn validation() {
        assert!(cfg().validate(10).is_ok());
        assert!(matches!(cfg().validate(20), Err(WorkspaceError::GridOutside { .. })));
        let small = WorkspaceConfig { cell_size: 0.5, ..cfg() };
        assert!(matches!(small.validate(3), Err(WorkspaceError::CellTooSmall { .. })));
        let skew = WorkspaceConfig { axes: [ProjectionAxis::new(0.0), ProjectionAxis::new(1.0)], ..cfg() };
        assert_eq!(skew.validate(3), Err(WorkspaceError::AxesNotPerpendicular));
        let slow = WorkspaceConfig { speed: 0.0, ..cfg() };
        assert_eq!(slow.validate(3), Err(WorkspaceError::BadParameter("speed")));
    }

    #[test]
    fn theta_round_trip() {
        let p = PermutationState::new(vec![2, 0, 3, 1], vec![1, 3, 0, 2]).unwrap();
        let pts = theta(&cfg(), &p);
        assert_eq!(ranks_from_positions(&pts, &cfg().axes).unwrap(), p);
        // axis 0 measures y, axis 1 measures -x
        assert_eq!(pts[1].y, -2.25);
        assert_eq!(pts[2].x, 2.25);
    }

    #[test]
    fn ranks_tie_break_and_duplicates() {
        let axes = cfg().axes;
        let pts = [Point::new(0.0, 1.0), Point::new(3.0, 1.0)];
        let r = ranks_from_positions(&pts, &axes).unwrap();
        assert_eq!(r.ranks(0), vec![0, 1]);
        assert_eq!(r.ranks(1), vec![1, 0]);
        let dup = [Point::new(0.0, 0.0), Point::new(0.0, 0.0)];
        assert_eq!(ranks_from_positions(&dup, &axes), Err(WorkspaceError::DuplicatePoints(0, 1)));
    }

    #[test]
    fn single_state_at_cells_has_no_motion() {
        let p = PermutationState::new(vec![1, 0, 2], vec![0, 2, 1]).unwrap();
        let pts = theta(&cfg(), &p);
        let trajs = map_path(&[p], &cfg(), &pts, &pts).unwrap();
        assert!(trajs.iter().all(|t| t.waypoints().len() == 1 && t.length() == 0.0));
    }

    #[test]
    fn two_robot_swap_keeps_cell_clearance() {
        let c = cfg();
        let a = PermutationState::identity(2);
        let b = PermutationState::new(vec![1, 0], vec![0, 1]).unwrap();
        let (start, end) = (theta(&c, &a), theta(&c, &b));
        let trajs = map_path(&[a, b], &c, &start, &end).unwrap();
        assert_eq!(trajs[0].arrival_time(), c.cell_size / c.speed);
        assert!(min_distance(&trajs, 1e-3) >= c.cell_size - 1e-12);
    }

    #[test]
    fn map_path_rejects_inconsistent_paths() {
        let c = cfg();
        let a = PermutationState::identity(3);
        let far = PermutationState::new(vec![2, 1, 0], vec![0, 1, 2]).unwrap();
        let pa = theta(&c, &a);
        let pf = theta(&c, &far);
        assert!(matches!(map_path(&[a.clone(), far.clone()], &c, &pa, &pf), Err(WorkspaceError::PathMismatch(_))));
        assert!(matches!(map_path(&[a.clone()], &c, &pa, &pf), Err(WorkspaceError::PathMismatch(_))));
        assert!(matches!(map_path(&[], &c, &pa, &pa), Err(WorkspaceError::PathMismatch(_))));
    }

    #[test]
    fn executed_plan_matches_planner_table() {
        let c = cfg();
        let start = PermutationState::identity(4);
        let target = PermutationState::new(vec![3, 2, 1, 0], vec![1, 3, 0, 2]).unwrap();
        let table = BraidTable::identity(4, 2);
        let pc = PlannerConfig { depth_orientation: c.depth_orientation(), ..PlannerConfig::default() };
        let out = plan(&start, &target, &table, &pc).unwrap();
        assert!(out.found());
        let trajs = map_path(&out.path, &c, &theta(&c, &start), &theta(&c, &target)).unwrap();
        let carried = carry_over_braids(&trajs, &table, &c.axes, c.height).unwrap();
        assert_eq!(carried, out.final_braids.unwrap());
    }

    #[test]
    fn stationary_team_keeps_braids() {
        let mut table = BraidTable::identity(2, 2);
        table.set_pair(1, 0, 1, Braid2State { exponent_sum: 1, violated: false });
        let trajs = vec![
            Trajectory::stationary(0, Point::new(0.0, 0.0), 3.0),
            Trajectory::stationary(1, Point::new(2.0, 0.0), 3.0),
        ];
        assert_eq!(carry_over_braids(&trajs, &table, &cfg().axes, 2.0).unwrap(), table);
    }

    #[test]
    fn repeated_crossing_raises_alarm() {
        // robot 1 circles robot 0 once: two same-sign crossings on each view,
        // completed first on the α = π/2 view
        let w = |x: f64, y: f64, t: f64| Waypoint { pos: Point::new(x, y), t };
        let trajs = vec![
            Trajectory::stationary(0, Point::new(0.0, 0.0), 4.0),
            Trajectory::new(1, vec![w(0.0, -2.0, 0.0), w(2.0, 0.0, 1.0), w(0.0, 2.0, 2.0), w(-2.0, 0.0, 3.0), w(0.0, -2.0, 4.0)])
                .unwrap(),
        ];
        let err = carry_over_braids(&trajs, &BraidTable::identity(2, 2), &cfg().axes, 2.0).unwrap_err();
        match err {
            WorkspaceError::EntanglementAlarm { axis: 1, subset: Subset::Pair([0, 1]), word, time } => {
                assert_eq!(word.exponent_sum().abs(), 2);
                assert_eq!(time, 2.0);
            }
            other => panic!("unexpected {other:?}"),
        }
    }
}
