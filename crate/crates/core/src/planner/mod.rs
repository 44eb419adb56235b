//! Best-first search over the permutation grid.
//!
//! A node is the pair of rank permutations (one per projection axis) plus
//! every pairwise and triplet braid accumulated so far. An action swaps two
//! robots holding adjacent ranks on one axis, which appends one letter to the
//! pair's braid and to each triplet braid containing both robots; a child is
//! dropped as soon as any of those braids becomes entangling.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::hash::{Hash, Hasher};

use rustc_hash::{FxHashMap, FxHasher};
use thiserror::Error;

use crate::braid::{BraidTable, ElementaryBraid, SwapLetters};
use crate::geometry::ProjectionAxis;

mod bounds;

pub use bounds::{PairBound, TripletBound};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PlanError {
    #[error("ranks on axis {axis} are not a permutation of 0..{n}")]
    NotAPermutation { axis: usize, n: usize },
    #[error("start has {0} robots but target has {1}")]
    SizeMismatch(usize, usize),
    #[error("braid table is for {robots} robots on {axes} axes, expected {expected} robots on 2 axes")]
    TableShape { robots: usize, axes: usize, expected: usize },
    #[error("initial braids already contain an entangling pattern")]
    ViolatedInitialBraids,
    #[error("swapped robots {0} and {1} are not both in the subset")]
    SwapNotInSubset(usize, usize),
    #[error("subset must hold 2 or 3 distinct robots")]
    BadSubset,
    #[error("heuristic bias must be finite and >= 1, got {0}")]
    BadBias(f64),
}

/// Ranks of every robot on the two projection axes (0-based).
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PermutationState {
    ranks: [Vec<u8>; 2],
}

impl PermutationState {
    pub fn new(axis1: Vec<usize>, axis2: Vec<usize>) -> Result<Self, PlanError> {
        let n = axis1.len();
        if axis2.len() != n {
            return Err(PlanError::SizeMismatch(n, axis2.len()));
        }
        let check = |axis: usize, r: &[usize]| {
            let mut seen = vec![false; n];
            for &k in r {
                if k >= n || k > u8::MAX as usize || std::mem::replace(&mut seen[k], true) {
                    return Err(PlanError::NotAPermutation { axis, n });
                }
            }
            Ok(r.iter().map(|&k| k as u8).collect::<Vec<u8>>())
        };
        Ok(Self { ranks: [check(0, &axis1)?, check(1, &axis2)?] })
    }

    pub fn identity(n: usize) -> Self {
        let id: Vec<u8> = (0..n as u8).collect();
        Self { ranks: [id.clone(), id] }
    }

    pub fn n(&self) -> usize {
        self.ranks[0].len()
    }

    pub fn rank(&self, axis: usize, robot: usize) -> usize {
        usize::from(self.ranks[axis][robot])
    }

    pub fn ranks(&self, axis: usize) -> Vec<usize> {
        self.ranks[axis].iter().map(|&r| usize::from(r)).collect()
    }

    /// Robot ids ordered by rank on `axis`.
    pub fn order(&self, axis: usize) -> Vec<usize> {
        let mut order = vec![0; self.n()];
        for (robot, &r) in self.ranks[axis].iter().enumerate() {
            order[usize::from(r)] = robot;
        }
        order
    }

    pub fn apply(&self, action: &SwapAction) -> Self {
        let mut next = self.clone();
        next.ranks[action.axis].swap(action.left, action.right);
        next
    }

    /// Number of adjacent swaps separating two states (inversions on each axis).
    pub fn swap_distance(&self, other: &Self) -> usize {
        (0..2)
            .map(|axis| {
                let target_rank = &other.ranks[axis];
                let seq: Vec<u8> = self.order(axis).iter().map(|&r| target_rank[r]).collect();
                let mut inv = 0;
                for a in 0..seq.len() {
                    for b in a + 1..seq.len() {
                        inv += usize::from(seq[a] > seq[b]);
                    }
                }
                inv
            })
            .sum()
    }
}

/// Exchange of the robots holding ranks `rank` and `rank + 1` on `axis`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct SwapAction {
    pub axis: usize,
    pub rank: usize,
    /// Robot at `rank` before the swap.
    pub left: usize,
    /// Robot at `rank + 1` before the swap.
    pub right: usize,
}

/// The `2(n-1)` adjacent swaps available from `perms`.
pub fn action_space(perms: &PermutationState) -> Vec<SwapAction> {
    let mut out = Vec::with_capacity(2 * perms.n().saturating_sub(1));
    for axis in 0..2 {
        let order = perms.order(axis);
        for (rank, w) in order.windows(2).enumerate() {
            out.push(SwapAction { axis, rank, left: w[0], right: w[1] });
        }
    }
    out
}

/// How depth along each axis relates to rank on the other axis, for a
/// perpendicular axis pair: `+1` when depth grows with the other axis's
/// projected coordinate, `-1` when it shrinks.
pub fn depth_orientation(axes: &[ProjectionAxis; 2]) -> [i32; 2] {
    let s = |this: &ProjectionAxis, other: &ProjectionAxis| {
        if this.depth(other.direction()) > 0.0 { 1 } else { -1 }
    };
    [s(&axes[0], &axes[1]), s(&axes[1], &axes[0])]
}

/// Sign of the crossing produced by `action`: `+1` when the left robot is
/// deeper, i.e. farther along the other axis in the depth direction.
pub fn swap_sign(action: &SwapAction, perms: &PermutationState, orientation: [i32; 2]) -> i32 {
    let other = 1 - action.axis;
    let diff = perms.rank(other, action.left) as i32 - perms.rank(other, action.right) as i32;
    if orientation[action.axis] * diff > 0 { 1 } else { -1 }
}

/// The letter `action` contributes to the braid of `subset` (2 or 3 robots
/// that include the swapping pair). `perms` is the state before the swap.
pub fn braid_letter_for_action(
    action: &SwapAction,
    perms: &PermutationState,
    subset: &[usize],
    orientation: [i32; 2],
) -> Result<ElementaryBraid, PlanError> {
    let mut sorted = subset.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    if !(2..=3).contains(&subset.len()) || sorted.len() != subset.len() {
        return Err(PlanError::BadSubset);
    }
    if !subset.contains(&action.left) || !subset.contains(&action.right) {
        return Err(PlanError::SwapNotInSubset(action.left, action.right));
    }
    let below = subset.iter().filter(|&&r| perms.rank(action.axis, r) < action.rank).count();
    Ok(ElementaryBraid::new(below as u8 + 1, swap_sign(action, perms, orientation)).unwrap())
}

/// `bias · Σ_i (|Δπ_i¹| + |Δπ_i²|) / 2`. With `bias = 1` this never
/// overestimates: one swap moves two robots by one rank each.
pub fn heuristic(perms: &PermutationState, targets: &PermutationState, bias: f64) -> f64 {
    let total: usize = (0..2)
        .map(|axis| {
            perms.ranks[axis]
                .iter()
                .zip(&targets.ranks[axis])
                .map(|(&a, &b)| usize::from(a.abs_diff(b)))
                .sum::<usize>()
        })
        .sum();
    bias * total as f64 / 2.0
}

/// Lower bound used to rank open nodes.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Heuristic {
    /// Half the summed rank displacement.
    Manhattan,
    /// [`PairBound`]: per-pair crossing counts under the pair braid limits.
    PairCrossings,
    /// [`PairBound`] plus the detours [`TripletBound`] finds per triplet.
    #[default]
    TripletCrossings,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PlannerConfig {
    pub max_expansions: usize,
    pub bias: f64,
    /// Reject entangling children. Off only for search-optimality checks.
    pub check_braids: bool,
    pub depth_orientation: [i32; 2],
    pub heuristic: Heuristic,
}

impl Default for PlannerConfig {
    fn default() -> Self {
        Self {
            max_expansions: 100_000,
            bias: 3.0,
            check_braids: true,
            depth_orientation: depth_orientation(&[
                ProjectionAxis::new(0.0),
                ProjectionAxis::new(std::f64::consts::FRAC_PI_2),
            ]),
            heuristic: Heuristic::default(),
        }
    }
}

#[derive(Clone, Debug)]
pub struct GridNode {
    pub perms: PermutationState,
    /// Built when the node is expanded or compared; generated children carry
    /// only the fingerprint.
    pub braids: Option<BraidTable>,
    pub fingerprint: u64,
    pub g: u32,
    /// Lower bound on the remaining actions from the pairs alone.
    pub lb: u32,
    /// Extra actions the triplets appear to need on top of `lb`.
    pub extra: u32,
    /// Triplets contributing to `extra`.
    pub hot: Vec<[u8; 3]>,
    pub h: f64,
    pub parent: Option<(usize, SwapAction)>,
    closed: bool,
}

impl GridNode {
    pub fn root(perms: PermutationState, braids: BraidTable, bound: NodeBound, bias: f64) -> Self {
        let fingerprint = braids.fingerprint();
        let NodeBound { lb, extra, hot } = bound;
        let h = bias * f64::from(lb + extra);
        Self { perms, braids: Some(braids), fingerprint, g: 0, lb, extra, hot, h, parent: None, closed: false }
    }

    fn key_hash(&self) -> u64 {
        let mut hs = FxHasher::default();
        self.perms.hash(&mut hs);
        self.fingerprint.hash(&mut hs);
        hs.finish()
    }
}

/// The remaining-cost estimators of one search.
#[derive(Debug)]
pub struct Estimator {
    pub pairs: PairBound,
    pub triplets: TripletBound,
}

impl Estimator {
    pub fn new(config: &PlannerConfig) -> Self {
        Self {
            pairs: PairBound::new(config.depth_orientation),
            triplets: TripletBound::new(config.depth_orientation, TRIPLET_BUDGET),
        }
    }
}

/// States one triplet search may expand.
const TRIPLET_BUDGET: usize = 4096;

/// Remaining-cost estimate of one node.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct NodeBound {
    pub lb: u32,
    pub extra: u32,
    pub hot: Vec<[u8; 3]>,
}

/// The estimate for a whole node under `config`; `None` when some pair or
/// triplet can no longer reach its target orders.
pub fn node_bound(
    perms: &PermutationState,
    braids: &BraidTable,
    targets: &PermutationState,
    config: &PlannerConfig,
    est: &mut Estimator,
) -> Option<NodeBound> {
    let lb_only = |lb: usize| Some(NodeBound { lb: lb as u32, ..NodeBound::default() });
    if !config.check_braids {
        return match config.heuristic {
            // Manhattan sums are even, so halving is exact
            Heuristic::Manhattan => lb_only(heuristic(perms, targets, 1.0) as usize),
            _ => lb_only(perms.swap_distance(targets)),
        };
    }
    match config.heuristic {
        Heuristic::Manhattan => lb_only(heuristic(perms, targets, 1.0) as usize),
        Heuristic::PairCrossings => lb_only(est.pairs.total(perms, braids, targets)? as usize),
        Heuristic::TripletCrossings => {
            let lb = est.pairs.total(perms, braids, targets)?;
            let (extra, hot) = est.triplets.node_extra(&est.pairs, perms, braids, targets)?;
            Some(NodeBound { lb, extra, hot })
        }
    }
}

/// Braids after `action` from a node with `perms` and `braids`; `None` if
/// they entangle.
pub fn child_braids(
    perms: &PermutationState,
    braids: &BraidTable,
    action: &SwapAction,
    config: &PlannerConfig,
) -> Option<BraidTable> {
    let mut out = braids.clone();
    if config.check_braids {
        let sign = swap_sign(action, perms, config.depth_orientation);
        out.apply_swap(action.axis, action.left, action.right, sign, |k| perms.rank(action.axis, k) < action.rank)
            .ok()?;
    }
    Some(out)
}

/// Children of `node` (whose arena index is `parent`) that keep every braid
/// untangled, plus the number rejected by the braid checks. Children from
/// which some pair or triplet can no longer reach its target orders are
/// dropped too.
///
/// `node` must carry its braids; the children carry fingerprints only.
pub fn expand(
    node: &GridNode,
    parent: usize,
    targets: &PermutationState,
    config: &PlannerConfig,
    est: &mut Estimator,
) -> (Vec<GridNode>, usize) {
    let braids = node.braids.as_ref().expect("expanded nodes carry their braids");
    let n = node.perms.n();
    let mut children = Vec::with_capacity(2 * n);
    let mut rejected = 0;
    let incremental = config.check_braids && config.heuristic != Heuristic::Manhattan;
    let with_triplets = config.check_braids && config.heuristic == Heuristic::TripletCrossings;
    if with_triplets {
        est.triplets.begin_node();
    }
    for action in action_space(&node.perms) {
        let before = &node.perms;
        let sign = swap_sign(&action, before, config.depth_orientation);
        let fingerprint = if config.check_braids {
            let peek = braids.peek_swap(action.axis, action.left, action.right, sign, |k| {
                before.rank(action.axis, k) < action.rank
            });
            match peek {
                Some(fp) => fp,
                None => {
                    rejected += 1;
                    continue;
                }
            }
        } else {
            node.fingerprint
        };
        let perms = node.perms.apply(&action);
        let (i, j) = (action.left.min(action.right), action.left.max(action.right));
        let lb = if incremental {
            let old = est.pairs.pair(before, braids, targets, i, j).expect("parent pairs are live");
            let mut sums = [braids.pair(0, i, j).exponent_sum, braids.pair(1, i, j).exponent_sum];
            sums[action.axis] += sign;
            match est.pairs.pair_with_sums(&perms, targets, i, j, sums) {
                Some(new) => node.lb - old + new,
                None => {
                    rejected += 1;
                    continue;
                }
            }
        } else {
            node_bound(&perms, braids, targets, config, est).expect("unconstrained bound").lb
        };
        let (extra, hot) = if with_triplets {
            match est.triplets.child_extra(&est.pairs, before, &perms, braids, &action, &node.hot) {
                Some(v) => v,
                None => {
                    rejected += 1;
                    continue;
                }
            }
        } else {
            (0, Vec::new())
        };
        let h = config.bias * f64::from(lb + extra);
        children.push(GridNode {
            perms,
            braids: None,
            fingerprint,
            g: node.g + 1,
            lb,
            extra,
            hot,
            h,
            parent: Some((parent, action)),
            closed: false,
        });
    }
    (children, rejected)
}

/// The letters `action` appends from `node`, which carries its braids.
fn letters_of(node: &GridNode, action: &SwapAction, config: &PlannerConfig) -> SwapLetters {
    let sign = swap_sign(action, &node.perms, config.depth_orientation);
    node.braids.as_ref().expect("expanded").swap_letters(action.axis, action.left, action.right, sign, |k| {
        node.perms.rank(action.axis, k) < action.rank
    })
}

/// The braids of a node as a materialized table plus the swap still to
/// apply to it.
fn braids_view<'a>(arena: &'a [GridNode], node: &'a GridNode, config: &PlannerConfig) -> (&'a BraidTable, Option<SwapLetters>) {
    if let Some(table) = &node.braids {
        return (table, None);
    }
    let (parent, action) = node.parent.expect("only the root lacks a parent and it has braids");
    let p = &arena[parent];
    let letters = config.check_braids.then(|| letters_of(p, &action, config));
    (p.braids.as_ref().expect("parents are expanded"), letters)
}

/// Whether `arena[e]` and the unmaterialized `child` hold equal braids.
fn same_braids(arena: &[GridNode], e: usize, child: &GridNode, config: &PlannerConfig) -> bool {
    let (a, sa) = braids_view(arena, &arena[e], config);
    let (b, sb) = braids_view(arena, child, config);
    a.equals_with(sa.as_ref(), b, sb.as_ref())
}

/// Builds the braids of `arena[idx]` from its parent's, which must exist.
fn materialize(arena: &mut [GridNode], idx: usize, config: &PlannerConfig) {
    if arena[idx].braids.is_some() {
        return;
    }
    let (parent, action) = arena[idx].parent.expect("only the root lacks a parent and it has braids");
    let p = &arena[parent];
    let table = child_braids(&p.perms, p.braids.as_ref().expect("parents are expanded"), &action, config)
        .expect("children are generated clean");
    debug_assert_eq!(table.fingerprint(), arena[idx].fingerprint);
    arena[idx].braids = Some(table);
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct SearchStats {
    pub expanded: usize,
    pub generated: usize,
    pub rejected_by_braid: usize,
    pub peak_open: usize,
}

#[derive(Clone, Debug)]
pub struct PlanOutcome {
    /// Start to target inclusive; empty when no path was found.
    pub path: Vec<PermutationState>,
    pub actions: Vec<SwapAction>,
    /// Braids after executing the path, when one was found.
    pub final_braids: Option<BraidTable>,
    pub stats: SearchStats,
}

impl PlanOutcome {
    pub fn found(&self) -> bool {
        !self.path.is_empty()
    }
}

struct OpenEntry {
    f: f64,
    h: f64,
    seq: u64,
    g: u32,
    idx: usize,
}

impl Ord for OpenEntry {
    fn cmp(&self, other: &Self) -> Ordering {
        // min-heap on (f, h, creation order)
        other
            .f
            .total_cmp(&self.f)
            .then_with(|| other.h.total_cmp(&self.h))
            .then_with(|| other.seq.cmp(&self.seq))
    }
}

impl PartialOrd for OpenEntry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl PartialEq for OpenEntry {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for OpenEntry {}

/// Searches for a swap sequence from `start` to `target` whose braids stay
/// untangled, ordered by `g + h` with a closed list keyed on permutations
/// and braid state together.
pub fn plan(
    start: &PermutationState,
    target: &PermutationState,
    initial_braids: &BraidTable,
    config: &PlannerConfig,
) -> Result<PlanOutcome, PlanError> {
    let n = start.n();
    if target.n() != n {
        return Err(PlanError::SizeMismatch(n, target.n()));
    }
    if initial_braids.robots() != n || initial_braids.axes() != 2 {
        return Err(PlanError::TableShape {
            robots: initial_braids.robots(),
            axes: initial_braids.axes(),
            expected: n,
        });
    }
    if !initial_braids.is_clean() {
        return Err(PlanError::ViolatedInitialBraids);
    }
    if !(config.bias.is_finite() && config.bias >= 1.0) {
        return Err(PlanError::BadBias(config.bias));
    }

    let mut stats = SearchStats::default();
    let mut arena: Vec<GridNode> = Vec::new();
    let mut index: FxHashMap<u64, Vec<usize>> = FxHashMap::default();
    let mut open = BinaryHeap::new();
    let mut seq = 0u64;

    let mut est = Estimator::new(config);
    let Some(bound0) = node_bound(start, initial_braids, target, config, &mut est) else {
        return Ok(PlanOutcome { path: Vec::new(), actions: Vec::new(), final_braids: None, stats });
    };
    let root = GridNode::root(start.clone(), initial_braids.clone(), bound0, config.bias);
    let h0 = root.h;
    index.entry(root.key_hash()).or_default().push(0);
    arena.push(root);
    open.push(OpenEntry { f: h0, h: h0, seq, g: 0, idx: 0 });

    while let Some(entry) = open.pop() {
        let idx = entry.idx;
        if arena[idx].closed || arena[idx].g != entry.g {
            continue;
        }
        materialize(&mut arena, idx, config);
        arena[idx].closed = true;
        stats.expanded += 1;
        if arena[idx].perms == *target {
            return Ok(retrieve_path(&arena, idx, stats));
        }
        if stats.expanded >= config.max_expansions {
            break;
        }
        let (children, rejected) = expand(&arena[idx], idx, target, config, &mut est);
        stats.rejected_by_braid += rejected;
        for child in children {
            stats.generated += 1;
            let bucket = index.entry(child.key_hash()).or_default();
            let mut existing = None;
            for &e in bucket.iter() {
                if arena[e].perms != child.perms || arena[e].fingerprint != child.fingerprint {
                    continue;
                }
                // equal fingerprints: compare the braids themselves
                if same_braids(&arena, e, &child, config) {
                    existing = Some(e);
                    break;
                }
            }
            if let Some(e) = existing {
                let node = &mut arena[e];
                if node.closed || child.g >= node.g {
                    continue;
                }
                node.g = child.g;
                node.parent = child.parent;
                seq += 1;
                open.push(OpenEntry { f: node.g as f64 + node.h, h: node.h, seq, g: node.g, idx: e });
            } else {
                let at = arena.len();
                bucket.push(at);
                seq += 1;
                open.push(OpenEntry { f: child.g as f64 + child.h, h: child.h, seq, g: child.g, idx: at });
                arena.push(child);
            }
        }
        stats.peak_open = stats.peak_open.max(open.len());
    }

    Ok(PlanOutcome { path: Vec::new(), actions: Vec::new(), final_braids: None, stats })
}

fn retrieve_path(arena: &[GridNode], goal: usize, stats: SearchStats) -> PlanOutcome {
    let mut path = vec![arena[goal].perms.clone()];
    let mut actions = Vec::new();
    let mut at = goal;
    while let Some((parent, action)) = arena[at].parent {
        actions.push(action);
        path.push(arena[parent].perms.clone());
        at = parent;
    }
    path.reverse();
    actions.reverse();
    PlanOutcome { path, actions, final_braids: arena[goal].braids.clone(), stats }
}
