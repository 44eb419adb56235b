//! Space-time trajectories, vertical projections, and crossing extraction.
//!
//! A robot's timed 2-D path is lifted to an ascending 3-D curve (height
//! proportional to time). Projected onto a vertical plane, two of these curves
//! cross whenever the robots swap order along the plane's horizontal axis; each
//! swap is one braid letter, signed by which robot is nearer the viewer.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::braid::{BraidError, BraidWord, ElementaryBraid};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeometryError {
    #[error("no trajectories given")]
    NoTrajectories,
    #[error("robot {robot}: waypoint times must start at 0 and strictly increase")]
    BadTimes { robot: usize },
    #[error("robot {robot}: non-finite coordinate")]
    NonFinite { robot: usize },
    #[error("the longest trajectory has zero duration")]
    ZeroHorizon,
    #[error("space-time trajectories do not share a common time grid")]
    MisalignedGrid,
    #[error("robots {0} and {1} collide at t = {2}")]
    Collision(usize, usize, f64),
    #[error("robots {robots:?} are tied in projection at t = {time}")]
    Degenerate { robots: Vec<usize>, time: f64 },
    #[error("sub-braids need 2 or 3 robots, got {0}")]
    SubsetSize(usize),
    #[error("robot {0} is not part of the team")]
    UnknownRobot(usize),
    #[error(transparent)]
    Braid(#[from] BraidError),
}

#[derive(Clone, Copy, Debug, PartialEq, Default, Serialize, Deserialize)]
#[serde(from = "[f64; 2]", into = "[f64; 2]")]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn distance(self, other: Point) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }

    pub fn lerp(self, other: Point, s: f64) -> Point {
        Point::new(self.x + (other.x - self.x) * s, self.y + (other.y - self.y) * s)
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

impl From<[f64; 2]> for Point {
    fn from([x, y]: [f64; 2]) -> Self {
        Self { x, y }
    }
}

impl From<Point> for [f64; 2] {
    fn from(p: Point) -> Self {
        [p.x, p.y]
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Waypoint {
    pub pos: Point,
    pub t: f64,
}

/// A robot's timed polyline in the workspace, from `t = 0` to its arrival time.
#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    pub robot_id: usize,
    waypoints: Vec<Waypoint>,
}

impl Trajectory {
    pub fn new(robot_id: usize, waypoints: Vec<Waypoint>) -> Result<Self, GeometryError> {
        let bad = GeometryError::BadTimes { robot: robot_id };
        match waypoints.first() {
            Some(w) if w.t == 0.0 => {}
            _ => return Err(bad),
        }
        if waypoints.windows(2).any(|w| !(w[1].t > w[0].t)) || waypoints.iter().any(|w| !w.t.is_finite()) {
            return Err(bad);
        }
        if waypoints.iter().any(|w| !w.pos.is_finite()) {
            return Err(GeometryError::NonFinite { robot: robot_id });
        }
        Ok(Self { robot_id, waypoints })
    }

    /// A robot that stays at `pos` for `duration` seconds.
    pub fn stationary(robot_id: usize, pos: Point, duration: f64) -> Self {
        let mut waypoints = vec![Waypoint { pos, t: 0.0 }];
        if duration > 0.0 {
            waypoints.push(Waypoint { pos, t: duration });
        }
        Self { robot_id, waypoints }
    }

    pub fn waypoints(&self) -> &[Waypoint] {
        &self.waypoints
    }

    pub fn arrival_time(&self) -> f64 {
        self.waypoints.last().map_or(0.0, |w| w.t)
    }

    pub fn start(&self) -> Point {
        self.waypoints[0].pos
    }

    pub fn end(&self) -> Point {
        self.waypoints.last().unwrap().pos
    }

    /// Position at time `t`; held at the endpoints outside `[0, T_i]`.
    pub fn position_at(&self, t: f64) -> Point {
        let w = &self.waypoints;
        if t <= w[0].t {
            return w[0].pos;
        }
        if t >= w[w.len() - 1].t {
            return w[w.len() - 1].pos;
        }
        let k = w.partition_point(|p| p.t <= t) - 1;
        let s = (t - w[k].t) / (w[k + 1].t - w[k].t);
        w[k].pos.lerp(w[k + 1].pos, s)
    }

    pub fn length(&self) -> f64 {
        self.waypoints.windows(2).map(|w| w[0].pos.distance(w[1].pos)).sum()
    }

    /// The same path shifted later by `offset` seconds, starting with a hold.
    pub fn delayed(&self, offset: f64) -> Self {
        let mut waypoints = vec![Waypoint { pos: self.start(), t: 0.0 }];
        waypoints.extend(self.waypoints.iter().skip(usize::from(offset == 0.0)).map(|w| Waypoint {
            pos: w.pos,
            t: w.t + offset,
        }));
        Self { robot_id: self.robot_id, waypoints }
    }

    /// Appends `next` (which must start where `self` ends) after `self`.
    pub fn then(&self, next: &Trajectory) -> Self {
        let offset = self.arrival_time();
        let mut waypoints = self.waypoints.clone();
        waypoints.extend(next.waypoints.iter().skip(1).map(|w| Waypoint { pos: w.pos, t: w.t + offset }));
        Self { robot_id: self.robot_id, waypoints }
    }

    /// The path run backwards in time.
    pub fn reversed(&self) -> Self {
        let total = self.arrival_time();
        let waypoints = self.waypoints.iter().rev().map(|w| Waypoint { pos: w.pos, t: total - w.t }).collect();
        Self { robot_id: self.robot_id, waypoints }
    }
}

/// A trajectory lifted to `(x, y, z)` with `z = t·h/T`.
#[derive(Clone, Debug, PartialEq)]
pub struct SpaceTimeTrajectory {
    pub robot_id: usize,
    pub points: Vec<[f64; 3]>,
    pub horizon: f64,
    pub height: f64,
}

impl SpaceTimeTrajectory {
    pub fn time_at(&self, k: usize) -> f64 {
        self.points[k][2] * self.horizon / self.height
    }

    fn xy(&self, k: usize) -> Point {
        Point::new(self.points[k][0], self.points[k][1])
    }
}

/// Lifts every path onto a shared time grid (the union of all waypoint times).
/// Robots that arrive early hold their final position up to the horizon.
pub fn build_space_time(paths: &[Trajectory], height: f64) -> Result<Vec<SpaceTimeTrajectory>, GeometryError> {
    if paths.is_empty() {
        return Err(GeometryError::NoTrajectories);
    }
    let horizon = paths.iter().map(Trajectory::arrival_time).fold(0.0, f64::max);
    if !(horizon > 0.0) {
        return Err(GeometryError::ZeroHorizon);
    }
    let mut grid: Vec<f64> = paths.iter().flat_map(|p| p.waypoints.iter().map(|w| w.t)).collect();
    grid.push(horizon);
    grid.sort_by(f64::total_cmp);
    let merge = 1e-12 * horizon;
    grid.dedup_by(|b, a| *b - *a <= merge);
    *grid.last_mut().unwrap() = horizon;

    Ok(paths
        .iter()
        .map(|p| SpaceTimeTrajectory {
            robot_id: p.robot_id,
            points: grid
                .iter()
                .map(|&t| {
                    let q = p.position_at(t);
                    [q.x, q.y, t * height / horizon]
                })
                .collect(),
            horizon,
            height,
        })
        .collect())
}

/// A vertical projection plane through the origin at angle `α` from the X axis.
///
/// The projected coordinate is `u = -x sin α + y cos α` and the depth is
/// `d = x cos α + y sin α`; the strand with larger depth passes over.
/// Angle whose `u`-direction the symbolic tie offsets follow; strictly
/// between the default axes and off every `iπ/m`.
const TIE_DIRECTION: f64 = 0.7;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ProjectionAxis {
    angle: f64,
    depth_sign: f64,
}

impl ProjectionAxis {
    pub fn new(angle: f64) -> Self {
        Self { angle, depth_sign: 1.0 }
    }

    pub fn angle(&self) -> f64 {
        self.angle
    }

    /// The same plane seen from the other side: depth is negated, so every
    /// crossing changes sign while ranks stay put.
    pub fn viewed_from_behind(self) -> Self {
        Self { angle: self.angle, depth_sign: -self.depth_sign }
    }

    /// Unit vector along which `u` increases.
    pub fn direction(&self) -> Point {
        Point::new(-self.angle.sin(), self.angle.cos())
    }

    pub fn u(&self, p: Point) -> f64 {
        -p.x * self.angle.sin() + p.y * self.angle.cos()
    }

    /// Whether the smaller robot id goes left when two projections tie.
    ///
    /// Ties resolve as if robot `i` sat `i·ε` along a fixed direction, so
    /// the order flips between opposite angles like any real offset does.
    /// Both default planner axes put the smaller id left.
    pub fn ties_ascend(&self) -> bool {
        (self.angle - TIE_DIRECTION).cos() > 0.0
    }

    /// Indices of `us` left to right; coordinates within `eps` tie and
    /// resolve by `ids` per [`Self::ties_ascend`].
    pub fn order(&self, us: &[f64], ids: &[usize], eps: f64) -> Vec<usize> {
        let ascend = self.ties_ascend();
        let before = |a: usize, b: usize| {
            if (us[a] - us[b]).abs() <= eps {
                (ids[a] < ids[b]) == ascend
            } else {
                us[a] < us[b]
            }
        };
        // insertion sort: tolerant comparisons need not be transitive
        let mut order: Vec<usize> = Vec::with_capacity(us.len());
        for r in 0..us.len() {
            let at = order.iter().position(|&o| before(r, o)).unwrap_or(order.len());
            order.insert(at, r);
        }
        order
    }

    /// Tolerance for ties among `us`, relative to their magnitude.
    pub fn tie_tolerance(us: impl IntoIterator<Item = f64>) -> f64 {
        1e-9 * (1.0 + us.into_iter().map(f64::abs).fold(0.0, f64::max))
    }

    pub fn depth(&self, p: Point) -> f64 {
        self.depth_sign * (p.x * self.angle.cos() + p.y * self.angle.sin())
    }
}

/// The evenly spaced angles `{iπ/m : i = 0..=m}`.
pub fn projection_angles(m: usize) -> Vec<ProjectionAxis> {
    (0..=m).map(|i| ProjectionAxis::new(i as f64 * std::f64::consts::PI / m as f64)).collect()
}

/// Two robots swapping adjacent projected ranks.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CrossingEvent {
    pub time: f64,
    pub axis: usize,
    /// Robot ids, smaller first.
    pub robots: (usize, usize),
    pub letter: ElementaryBraid,
}

impl fmt::Display for CrossingEvent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} {} {} {}", self.time, self.axis, self.robots.0, self.robots.1, self.letter)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PerturbationKind {
    /// Two robots share a projected coordinate over an interval; ids break
    /// the tie per [`ProjectionAxis::ties_ascend`].
    TieInterval,
    /// Overlapping swaps fell within the time tolerance and were sequenced.
    SimultaneousSwaps,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Perturbation {
    pub time: f64,
    pub robots: Vec<usize>,
    pub kind: PerturbationKind,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CrossingOptions {
    /// Events closer than this fraction of the horizon are simultaneous.
    pub time_tolerance: f64,
    /// Fail on degenerate geometry instead of perturbing it.
    pub strict: bool,
}

impl Default for CrossingOptions {
    fn default() -> Self {
        Self { time_tolerance: 1e-9, strict: false }
    }
}

/// All crossings on one axis, with the orders needed to interpret them.
#[derive(Clone, Debug, PartialEq)]
pub struct CrossingSet {
    pub axis: usize,
    /// Robot ids left to right at `t = 0`.
    pub initial_order: Vec<usize>,
    pub final_order: Vec<usize>,
    pub events: Vec<CrossingEvent>,
    pub perturbations: Vec<Perturbation>,
}

impl CrossingSet {
    /// The line-oriented diagnostic form, one event per line.
    pub fn to_text(&self) -> String {
        self.events.iter().map(|e| format!("{e}\n")).collect()
    }
}

struct Sweep<'a> {
    trajs: &'a [SpaceTimeTrajectory],
    axis: ProjectionAxis,
    axis_id: usize,
    eps_u: f64,
    opts: CrossingOptions,
    current: Vec<usize>,
    events: Vec<CrossingEvent>,
    perturbations: Vec<Perturbation>,
}

impl Sweep<'_> {
    fn pos(&self, r: usize, k: usize, s: f64) -> Point {
        let a = self.trajs[r].xy(k);
        if s == 0.0 {
            return a;
        }
        a.lerp(self.trajs[r].xy(k + 1), s)
    }

    fn time(&self, k: usize, s: f64) -> f64 {
        let t0 = self.trajs[0].time_at(k);
        if s == 0.0 {
            return t0;
        }
        t0 + s * (self.trajs[0].time_at(k + 1) - t0)
    }

    /// Left-to-right order (local indices) at a point in segment `k`; ties
    /// within tolerance follow [`ProjectionAxis::ties_ascend`].
    fn order_at(&self, k: usize, s: f64) -> Vec<usize> {
        let us: Vec<f64> = (0..self.trajs.len()).map(|r| self.axis.u(self.pos(r, k, s))).collect();
        let ids: Vec<usize> = self.trajs.iter().map(|t| t.robot_id).collect();
        self.axis.order(&us, &ids, self.eps_u)
    }

    fn tied(&self, a: usize, b: usize, k: usize, s: f64) -> bool {
        (self.axis.u(self.pos(a, k, s)) - self.axis.u(self.pos(b, k, s))).abs() <= self.eps_u
    }

    /// Turns `current` into `target` by adjacent swaps at `(k, s)`.
    /// `probes` are nearby sample points used to detect tie intervals.
    fn transition(&mut self, target: Vec<usize>, k: usize, s: f64, probes: &[(usize, f64)]) -> Result<(), GeometryError> {
        let n = self.current.len();
        let mut rank_in_target = vec![0; n];
        for (p, &r) in target.iter().enumerate() {
            rank_in_target[r] = p;
        }
        let time = self.time(k, s);
        let mut swapped: Vec<usize> = Vec::new();
        loop {
            let candidate = (0..n.saturating_sub(1))
                .filter(|&p| rank_in_target[self.current[p]] > rank_in_target[self.current[p + 1]])
                .min_by_key(|&p| {
                    let (a, b) = (self.trajs[self.current[p]].robot_id, self.trajs[self.current[p + 1]].robot_id);
                    (a.min(b), a.max(b))
                });
            let Some(p) = candidate else { break };
            let (left, right) = (self.current[p], self.current[p + 1]);
            let (lid, rid) = (self.trajs[left].robot_id, self.trajs[right].robot_id);
            let (pl, pr) = (self.pos(left, k, s), self.pos(right, k, s));
            let (dl, dr) = (self.axis.depth(pl), self.axis.depth(pr));
            let eps_d = 1e-9 * (1.0 + dl.abs().max(dr.abs()));
            if (dl - dr).abs() <= eps_d {
                return Err(GeometryError::Collision(lid.min(rid), lid.max(rid), time));
            }
            if probes.iter().any(|&(pk, ps)| self.tied(left, right, pk, ps)) {
                self.degenerate(vec![lid.min(rid), lid.max(rid)], time, PerturbationKind::TieInterval)?;
            }
            if swapped.iter().any(|&q| q + 1 >= p && q <= p + 1) {
                let mut robots = vec![lid, rid];
                robots.sort_unstable();
                self.degenerate(robots, time, PerturbationKind::SimultaneousSwaps)?;
            }
            swapped.push(p);
            let sign = if dl > dr { 1 } else { -1 };
            self.events.push(CrossingEvent {
                time,
                axis: self.axis_id,
                robots: (lid.min(rid), lid.max(rid)),
                letter: ElementaryBraid::new(p as u8 + 1, sign).unwrap(),
            });
            self.current.swap(p, p + 1);
        }
        Ok(())
    }

    fn degenerate(&mut self, robots: Vec<usize>, time: f64, kind: PerturbationKind) -> Result<(), GeometryError> {
        if self.opts.strict {
            return Err(GeometryError::Degenerate { robots, time });
        }
        self.perturbations.push(Perturbation { time, robots, kind });
        Ok(())
    }
}

/// Extracts the ordered crossing events of `trajs` projected on `axis`.
///
/// Trajectories must come from [`build_space_time`] (one shared time grid).
/// Within each grid segment every projected coordinate is linear in time, so
/// order changes happen only at the roots of pairwise differences; the order
/// is sampled between consecutive roots and each change is decomposed into
/// adjacent swaps.
pub fn extract_crossings(
    trajs: &[SpaceTimeTrajectory],
    axis: &ProjectionAxis,
    axis_id: usize,
    opts: &CrossingOptions,
) -> Result<CrossingSet, GeometryError> {
    let Some(first) = trajs.first() else {
        return Err(GeometryError::NoTrajectories);
    };
    let len = first.points.len();
    if trajs.iter().any(|t| {
        t.points.len() != len || t.horizon != first.horizon || t.points.iter().zip(&first.points).any(|(a, b)| a[2] != b[2])
    }) {
        return Err(GeometryError::MisalignedGrid);
    }
    let eps_u = ProjectionAxis::tie_tolerance(trajs.iter().flat_map(|t| t.points.iter()).map(|p| axis.u(Point::new(p[0], p[1]))));
    let mut sweep = Sweep {
        trajs,
        axis: *axis,
        axis_id,
        eps_u,
        opts: *opts,
        current: Vec::new(),
        events: Vec::new(),
        perturbations: Vec::new(),
    };
    sweep.current = sweep.order_at(0, 0.0);
    let initial_order: Vec<usize> = sweep.current.iter().map(|&r| trajs[r].robot_id).collect();

    let n = trajs.len();
    let mut prev_probe: Option<(usize, f64)> = None;
    for k in 0..len.saturating_sub(1) {
        let seg = sweep.time(k + 1, 0.0) - sweep.time(k, 0.0);
        let tol = opts.time_tolerance * first.horizon / seg;
        let mut crit = vec![0.0, 1.0];
        for a in 0..n {
            for b in a + 1..n {
                let d0 = axis.u(sweep.pos(a, k, 0.0)) - axis.u(sweep.pos(b, k, 0.0));
                let d1 = axis.u(sweep.pos(a, k + 1, 0.0)) - axis.u(sweep.pos(b, k + 1, 0.0));
                if d0 * d1 < 0.0 {
                    crit.push(d0 / (d0 - d1));
                }
            }
        }
        crit.sort_by(f64::total_cmp);
        crit.dedup_by(|b, a| *b - *a < tol);
        if *crit.last().unwrap() != 1.0 {
            *crit.last_mut().unwrap() = 1.0;
        }
        for w in 0..crit.len() - 1 {
            let mid = 0.5 * (crit[w] + crit[w + 1]);
            let order = sweep.order_at(k, mid);
            if order != sweep.current {
                let mut probes = vec![(k, mid)];
                probes.extend(prev_probe);
                sweep.transition(order, k, crit[w], &probes)?;
            }
            prev_probe = Some((k, mid));
        }
    }
    // a tie at the final instant resolves as at the start
    let last = len - 1;
    let final_exact = sweep.order_at(last, 0.0);
    if final_exact != sweep.current {
        sweep.transition(final_exact, last, 0.0, &[])?;
    }

    let final_order = sweep.current.iter().map(|&r| trajs[r].robot_id).collect();
    Ok(CrossingSet {
        axis: axis_id,
        initial_order,
        final_order,
        events: sweep.events,
        perturbations: sweep.perturbations,
    })
}

/// The braid seen by a subset of 2 or 3 robots: events between subset members
/// only, re-indexed to ranks within the subset.
pub fn sub_braid(set: &CrossingSet, subset: &[usize]) -> Result<BraidWord, GeometryError> {
    let letters = sub_braid_events(set, subset)?.into_iter().map(|(_, l)| l).collect::<Vec<_>>();
    Ok(BraidWord::from_letters(subset.len(), letters)?)
}

/// The letters of [`sub_braid`] paired with the times they occur.
pub fn sub_braid_events(set: &CrossingSet, subset: &[usize]) -> Result<Vec<(f64, ElementaryBraid)>, GeometryError> {
    if !(2..=3).contains(&subset.len()) {
        return Err(GeometryError::SubsetSize(subset.len()));
    }
    if let Some(&missing) = subset.iter().find(|r| !set.initial_order.contains(r)) {
        return Err(GeometryError::UnknownRobot(missing));
    }
    let mut order: Vec<usize> = set.initial_order.iter().copied().filter(|r| subset.contains(r)).collect();
    let mut out = Vec::new();
    for e in &set.events {
        let (a, b) = e.robots;
        if !(subset.contains(&a) && subset.contains(&b)) {
            continue;
        }
        let pa = order.iter().position(|&r| r == a).unwrap();
        let pb = order.iter().position(|&r| r == b).unwrap();
        let p = pa.min(pb);
        debug_assert_eq!(pa.abs_diff(pb), 1, "swapping robots are adjacent in every sub-order");
        out.push((e.time, ElementaryBraid::new(p as u8 + 1, e.letter.sign())?));
        order.swap(pa, pb);
    }
    Ok(out)
}
