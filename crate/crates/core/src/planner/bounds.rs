//! Remaining-cost estimates built from small exact subproblems.
//!
//! Only swaps between two members of a pair (or triplet) change that
//! subset's orders, exponent sums and braids, so the subset on its own is a
//! relaxation of the whole search: its fewest crossings never exceed the
//! crossings the team still needs among those robots.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use rustc_hash::FxHashMap;

use super::{PermutationState, SwapAction};
use crate::braid::{BraidTable, ElementaryBraid, Sl2Key};

/// Fewest crossings each pair needs on its own, indexed by the pair's
/// current orders, exponent sums and target orders.
///
/// Every action crosses exactly one pair on one axis, so the sum over pairs
/// never exceeds the true remaining cost, and one action changes it by at
/// most one. Without braid constraints it equals the number of inversions.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PairBound {
    /// `dist[state][target]`, `None` when the pair can never get there.
    dist: [[Option<u8>; 4]; 36],
}

impl PairBound {
    pub fn new(orientation: [i32; 2]) -> Self {
        let encode = |o: [bool; 2], s: [i32; 2]| {
            usize::from(o[0]) | usize::from(o[1]) << 1 | ((s[0] + 1) as usize * 3 + (s[1] + 1) as usize) << 2
        };
        let decode = |k: usize| {
            let sums = k >> 2;
            ([k & 1 == 1, k & 2 == 2], [(sums / 3) as i32 - 1, (sums % 3) as i32 - 1])
        };
        let mut dist = [[None; 4]; 36];
        for from in 0..36 {
            let mut seen = [None; 36];
            seen[from] = Some(0u8);
            let mut queue = std::collections::VecDeque::from([from]);
            while let Some(k) = queue.pop_front() {
                let (o, s) = decode(k);
                for axis in 0..2 {
                    let next_sum = s[axis] + pair_crossing_sign(o, axis, orientation);
                    if next_sum.abs() > 1 {
                        continue;
                    }
                    let (mut o2, mut s2) = (o, s);
                    o2[axis] = !o2[axis];
                    s2[axis] = next_sum;
                    let to = encode(o2, s2);
                    if seen[to].is_none() {
                        seen[to] = Some(seen[k].unwrap() + 1);
                        queue.push_back(to);
                    }
                }
            }
            for (to, d) in seen.iter().enumerate() {
                if let Some(d) = d {
                    let t = to & 3;
                    dist[from][t] = Some(dist[from][t].map_or(*d, |x: u8| x.min(*d)));
                }
            }
        }
        Self { dist }
    }

    /// Crossings pair `(i, j)` still needs, or `None` if it is stuck.
    pub fn pair(&self, perms: &PermutationState, braids: &BraidTable, targets: &PermutationState, i: usize, j: usize) -> Option<u32> {
        let sums = [braids.pair(0, i, j).exponent_sum, braids.pair(1, i, j).exponent_sum];
        self.pair_with_sums(perms, targets, i, j, sums)
    }

    pub(super) fn pair_with_sums(
        &self,
        perms: &PermutationState,
        targets: &PermutationState,
        i: usize,
        j: usize,
        s: [i32; 2],
    ) -> Option<u32> {
        let before = |p: &PermutationState, axis: usize| p.rank(axis, i) < p.rank(axis, j);
        self.lookup([before(perms, 0), before(perms, 1)], s, [before(targets, 0), before(targets, 1)])
    }

    /// Distance from orders `o` with sums `s` to target orders `t`.
    fn lookup(&self, o: [bool; 2], s: [i32; 2], t: [bool; 2]) -> Option<u32> {
        if s.iter().any(|v| v.abs() > 1) {
            return None;
        }
        let state = usize::from(o[0]) | usize::from(o[1]) << 1 | ((s[0] + 1) as usize * 3 + (s[1] + 1) as usize) << 2;
        let target = usize::from(t[0]) | usize::from(t[1]) << 1;
        self.dist[state][target].map(u32::from)
    }

    /// Sum over all pairs.
    pub fn total(&self, perms: &PermutationState, braids: &BraidTable, targets: &PermutationState) -> Option<u32> {
        let n = perms.n();
        let mut sum = 0;
        for i in 0..n {
            for j in i + 1..n {
                sum += self.pair(perms, braids, targets, i, j)?;
            }
        }
        Some(sum)
    }
}

/// Sign of a crossing on `axis` for a pair whose orders are `o` (`o[ℓ]` true
/// when the lower id comes first on axis `ℓ`).
fn pair_crossing_sign(o: [bool; 2], axis: usize, orientation: [i32; 2]) -> i32 {
    // the left robot is lower on the other axis iff both axes order it the same way
    let left_lower_on_other = o[axis] == o[1 - axis];
    if left_lower_on_other == (orientation[axis] < 0) { 1 } else { -1 }
}


/// Robots in the way counted per pair and axis, at most.
const GAP_CAP: usize = 3;
/// Charge per robot in the way of a detour crossing.
const GAP_WEIGHT: u32 = 4;

/// Start state, target orders and robots-in-the-way counts of one search.
type MemoKey = (TripletState, [[u8; 3]; 2], [[u8; 3]; 2]);

/// Members `(x, y)`, `x < y`, of each pair inside a triplet.
const PAIRS: [(usize, usize); 3] = [(0, 1), (0, 2), (1, 2)];

fn pair_slot(x: usize, y: usize) -> usize {
    match (x.min(y), x.max(y)) {
        (0, 1) => 0,
        (0, 2) => 1,
        _ => 2,
    }
}

/// One triplet seen on its own: member positions within the triplet's order
/// on each axis, the three pair sums and the triplet braid on each axis.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
struct TripletState {
    pos: [[u8; 3]; 2],
    sums: [[i8; 3]; 2],
    keys: [Sl2Key; 2],
}

#[derive(Debug, PartialEq, Eq)]
enum Step {
    To(TripletState),
    Entangled,
    /// The braid grew past exact integer tracking.
    Unknown,
}

impl TripletState {
    fn of(perms: &PermutationState, braids: &BraidTable, ids: [usize; 3]) -> Self {
        let mut pos = [[0u8; 3]; 2];
        let mut sums = [[0i8; 3]; 2];
        for axis in 0..2 {
            for k in 0..3 {
                let r = perms.rank(axis, ids[k]);
                pos[axis][k] = ids.iter().filter(|&&o| perms.rank(axis, o) < r).count() as u8;
            }
            for (p, &(x, y)) in PAIRS.iter().enumerate() {
                sums[axis][p] = braids.pair(axis, ids[x], ids[y]).exponent_sum as i8;
            }
        }
        let key = |axis| braids.triplet(axis, ids[0], ids[1], ids[2]).key();
        Self { pos, sums, keys: [key(0), key(1)] }
    }

    fn member_at(&self, axis: usize, at: u8) -> usize {
        (0..3).find(|&k| self.pos[axis][k] == at).expect("positions are a permutation")
    }

    /// Swaps the members at positions `at` and `at + 1` on `axis`.
    fn step(&self, axis: usize, at: u8, orientation: [i32; 2]) -> Step {
        let (x, y) = (self.member_at(axis, at), self.member_at(axis, at + 1));
        let other = 1 - axis;
        let diff = i32::from(self.pos[other][x]) - i32::from(self.pos[other][y]);
        let sign = if orientation[axis] * diff > 0 { 1 } else { -1 };
        let mut next = *self;
        let p = pair_slot(x, y);
        next.sums[axis][p] += sign as i8;
        if next.sums[axis][p].abs() > 1 {
            return Step::Entangled;
        }
        next.keys[axis] = self.keys[axis].mul(ElementaryBraid::new(at + 1, sign).expect("σ₁ or σ₂"));
        if !next.keys[axis].exact() {
            return Step::Unknown;
        }
        if next.keys[axis].is_forbidden() {
            return Step::Entangled;
        }
        next.pos[axis].swap(x, y);
        Step::To(next)
    }

    fn pair_cost(&self, pairs: &PairBound, target: &[[u8; 3]; 2], p: usize) -> u32 {
        let (x, y) = PAIRS[p];
        let before = |pos: &[[u8; 3]; 2], axis: usize| pos[axis][x] < pos[axis][y];
        let o = [before(&self.pos, 0), before(&self.pos, 1)];
        let t = [before(target, 0), before(target, 1)];
        let s = [i32::from(self.sums[0][p]), i32::from(self.sums[1][p])];
        pairs.lookup(o, s, t).unwrap_or(u32::MAX / 4)
    }

    fn pair_total(&self, pairs: &PairBound, target: &[[u8; 3]; 2]) -> Option<u32> {
        PAIRS.iter().enumerate().try_fold(0, |acc, (p, &(x, y))| {
            let before = |pos: &[[u8; 3]; 2], axis: usize| pos[axis][x] < pos[axis][y];
            let o = [before(&self.pos, 0), before(&self.pos, 1)];
            let t = [before(target, 0), before(target, 1)];
            let s = [i32::from(self.sums[0][p]), i32::from(self.sums[1][p])];
            Some(acc + pairs.lookup(o, s, t)?)
        })
    }
}

/// Extra crossings each triplet needs beyond what its three pairs need on
/// their own, found by a small best-first search inside the triplet.
///
/// Braid rules between the three robots can force detours that no single
/// pair sees. Summing the extra cost over triplets may count one detour
/// several times, so the result is an estimate, not a bound; a triplet
/// search proves the triplet stuck only when it runs out of states.
#[derive(Debug)]
pub struct TripletBound {
    orientation: [i32; 2],
    budget: usize,
    memo: FxHashMap<MemoKey, Option<u32>>,
    /// Target positions per triplet, filled by [`node_extra`](Self::node_extra).
    target: Vec<[[u8; 3]; 2]>,
    /// Triplet states of the node being expanded, valid when stamped with
    /// `stamp`.
    parent: Vec<(u64, TripletState)>,
    stamp: u64,
}

/// Dense index of the sorted triplet `[i, j, k]`.
fn triplet_index([i, j, k]: [usize; 3]) -> usize {
    k * (k - 1) * (k - 2) / 6 + j * (j - 1) / 2 + i
}

impl TripletBound {
    /// `budget` caps the states expanded per triplet search; past it the
    /// smallest open estimate is used.
    pub fn new(orientation: [i32; 2], budget: usize) -> Self {
        Self { orientation, budget, memo: FxHashMap::default(), target: Vec::new(), parent: Vec::new(), stamp: 0 }
    }

    fn target_pos(targets: &PermutationState, ids: [usize; 3]) -> [[u8; 3]; 2] {
        let mut pos = [[0u8; 3]; 2];
        for axis in 0..2 {
            for k in 0..3 {
                let r = targets.rank(axis, ids[k]);
                pos[axis][k] = ids.iter().filter(|&&o| targets.rank(axis, o) < r).count() as u8;
            }
        }
        pos
    }

    /// Robots outside the triplet between each pair's members on each axis,
    /// capped at [`GAP_CAP`].
    fn gaps(perms: &PermutationState, ids: [usize; 3]) -> [[u8; 3]; 2] {
        let mut gaps = [[0u8; 3]; 2];
        for axis in 0..2 {
            let r = ids.map(|k| perms.rank(axis, k));
            for (p, &(x, y)) in PAIRS.iter().enumerate() {
                let (lo, hi) = (r[x].min(r[y]), r[x].max(r[y]));
                let third = r[3 - x - y];
                let between = hi - lo - 1 - usize::from(lo < third && third < hi);
                gaps[axis][p] = between.min(GAP_CAP) as u8;
            }
        }
        gaps
    }

    /// Extra crossings of triplet `ids` (sorted) with detours charged for the
    /// robots in the way, or `None` if it can never reach its target orders.
    pub fn triplet(
        &mut self,
        pairs: &PairBound,
        perms: &PermutationState,
        braids: &BraidTable,
        targets: &PermutationState,
        ids: [usize; 3],
    ) -> Option<u32> {
        let state = TripletState::of(perms, braids, ids);
        let target = Self::target_pos(targets, ids);
        if self.excess(pairs, state, target, [[0; 3]; 2])? == 0 {
            return Some(0);
        }
        self.excess(pairs, state, target, Self::gaps(perms, ids))
    }

    /// Extra crossings over all triplets and the triplets that have any,
    /// or `None` if some triplet is stuck.
    pub(super) fn node_extra(
        &mut self,
        pairs: &PairBound,
        perms: &PermutationState,
        braids: &BraidTable,
        targets: &PermutationState,
    ) -> Option<(u32, Vec<[u8; 3]>)> {
        let n = perms.n();
        let count = n * n.saturating_sub(1) * n.saturating_sub(2) / 6;
        self.target = vec![[[0; 3]; 2]; count];
        for i in 0..n {
            for j in i + 1..n {
                for k in j + 1..n {
                    self.target[triplet_index([i, j, k])] = Self::target_pos(targets, [i, j, k]);
                }
            }
        }
        self.parent = vec![(0, TripletState::default()); count];
        self.stamp += 1;
        let mut sum = 0;
        let mut hot = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                for k in j + 1..n {
                    let e = self.triplet(pairs, perms, braids, targets, [i, j, k])?;
                    if e > 0 {
                        sum += e;
                        hot.push([i as u8, j as u8, k as u8]);
                    }
                }
            }
        }
        Some((sum, hot))
    }

    /// [`node_extra`](Self::node_extra) after `action`, from the parent's
    /// orders `before`, braids and triplets with extra cost `hot`; `after`
    /// is the child's orders.
    ///
    /// Call [`begin_node`](Self::begin_node) before the first child of each
    /// node.
    #[allow(clippy::too_many_arguments)]
    pub(super) fn child_extra(
        &mut self,
        pairs: &PairBound,
        before: &PermutationState,
        after: &PermutationState,
        braids: &BraidTable,
        action: &SwapAction,
        hot: &[[u8; 3]],
    ) -> Option<(u32, Vec<[u8; 3]>)> {
        let (i, j) = (action.left.min(action.right), action.left.max(action.right));
        let mut sum = 0;
        let mut out = Vec::with_capacity(hot.len() + 2);
        for k in (0..before.n()).filter(|&k| k != i && k != j) {
            let ids = crate::braid::sorted3([i, j, k]);
            let state = self.parent_state(before, braids, ids);
            let left = ids.iter().position(|&r| r == action.left).expect("action inside the triplet");
            let next = match state.step(action.axis, state.pos[action.axis][left], self.orientation) {
                Step::To(next) => next,
                Step::Entangled => return None,
                Step::Unknown => continue,
            };
            let target = self.target[triplet_index(ids)];
            if self.excess(pairs, next, target, [[0; 3]; 2])? > 0 {
                sum += self.excess(pairs, next, target, Self::gaps(after, ids))?;
                out.push(ids.map(|r| r as u8));
            }
        }
        for &t in hot {
            let ids = t.map(usize::from);
            if ids.contains(&i) && ids.contains(&j) {
                continue;
            }
            // the swap leaves this triplet's orders and braids alone
            let state = self.parent_state(before, braids, ids);
            let target = self.target[triplet_index(ids)];
            sum += self.excess(pairs, state, target, Self::gaps(after, ids))?;
            out.push(t);
        }
        Some((sum, out))
    }


    /// Invalidates the cached parent triplet states.
    pub(super) fn begin_node(&mut self) {
        self.stamp += 1;
    }

    fn parent_state(&mut self, perms: &PermutationState, braids: &BraidTable, ids: [usize; 3]) -> TripletState {
        let slot = &mut self.parent[triplet_index(ids)];
        if slot.0 != self.stamp {
            *slot = (self.stamp, TripletState::of(perms, braids, ids));
        }
        slot.1
    }

    fn excess(&mut self, pairs: &PairBound, start: TripletState, target: [[u8; 3]; 2], gaps: [[u8; 3]; 2]) -> Option<u32> {
        if let Some(&v) = self.memo.get(&(start, target, gaps)) {
            return v;
        }
        let v = self.search(pairs, start, target, gaps);
        self.memo.insert((start, target, gaps), v);
        v
    }

    fn search(&self, pairs: &PairBound, start: TripletState, target: [[u8; 3]; 2], gaps: [[u8; 3]; 2]) -> Option<u32> {
        let h0 = start.pair_total(pairs, &target)?;
        let mut best: FxHashMap<TripletState, u32> = FxHashMap::default();
        let mut open = BinaryHeap::new();
        let mut nodes = vec![start];
        best.insert(start, 0);
        open.push(Reverse((h0, 0u32, 0usize)));
        let mut expanded = 0;
        while let Some(Reverse((f, g, idx))) = open.pop() {
            let state = nodes[idx];
            if best.get(&state).is_some_and(|&b| b < g) {
                continue;
            }
            if state.pos == target {
                return Some(g - h0);
            }
            expanded += 1;
            if expanded > self.budget {
                return Some(f - h0);
            }
            for axis in 0..2 {
                for at in 0..2 {
                    let next = match state.step(axis, at, self.orientation) {
                        Step::To(next) => next,
                        Step::Entangled => continue,
                        Step::Unknown => return Some(f - h0),
                    };
                    let Some(h) = next.pair_total(pairs, &target) else { continue };
                    let (x, y) = (state.member_at(axis, at), state.member_at(axis, at + 1));
                    let p = pair_slot(x, y);
                    let cost = if state.pair_cost(pairs, &target, p) <= next.pair_cost(pairs, &target, p) {
                        1 + GAP_WEIGHT * u32::from(gaps[axis][p])
                    } else {
                        1
                    };
                    let g2 = g + cost;
                    if best.get(&next).is_some_and(|&b| b <= g2) {
                        continue;
                    }
                    best.insert(next, g2);
                    nodes.push(next);
                    open.push(Reverse((g2 + h, g2, nodes.len() - 1)));
                }
            }
        }
        None
    }
}
