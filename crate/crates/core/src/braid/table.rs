use std::fmt;
use std::hash::{Hash, Hasher};
use std::sync::Arc;

use super::{Braid2State, Braid3State, BraidWord, ElementaryBraid};

/// A robot pair `i < j` or triplet `i < j < k`, by robot id.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Subset {
    Pair([usize; 2]),
    Triplet([usize; 3]),
}

impl Subset {
    pub fn robots(&self) -> &[usize] {
        match self {
            Subset::Pair(r) => r,
            Subset::Triplet(r) => r,
        }
    }
}

impl fmt::Display for Subset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Subset::Pair([i, j]) => write!(f, "({i},{j})"),
            Subset::Triplet([i, j, k]) => write!(f, "({i},{j},{k})"),
        }
    }
}

/// A pair or triplet braid that reached an entangling pattern.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Violation {
    pub axis: usize,
    pub subset: Subset,
    pub word: BraidWord,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "axis {} robots {} word {}", self.axis, self.subset, self.word)
    }
}

#[derive(Debug, PartialEq, Eq)]
struct Layout {
    n: usize,
    axes: usize,
    pairs_per_axis: usize,
    triplets_per_axis: usize,
    triplet_slot: Vec<usize>,
}

impl Layout {
    fn new(n: usize, axes: usize) -> Self {
        let mut triplet_slot = vec![usize::MAX; n * n * n];
        let mut next = 0;
        for i in 0..n {
            for j in i + 1..n {
                for k in j + 1..n {
                    triplet_slot[(i * n + j) * n + k] = next;
                    next += 1;
                }
            }
        }
        Self {
            n,
            axes,
            pairs_per_axis: n * n.saturating_sub(1) / 2,
            triplets_per_axis: next,
            triplet_slot,
        }
    }

    fn pair(&self, axis: usize, i: usize, j: usize) -> usize {
        let (i, j) = if i < j { (i, j) } else { (j, i) };
        debug_assert!(j < self.n && i != j);
        axis * self.pairs_per_axis + i * (2 * self.n - i - 1) / 2 + (j - i - 1)
    }

    fn triplet(&self, axis: usize, ids: [usize; 3]) -> usize {
        let [i, j, k] = sorted3(ids);
        axis * self.triplets_per_axis + self.triplet_slot[(i * self.n + j) * self.n + k]
    }
}

pub(crate) fn sorted3(mut ids: [usize; 3]) -> [usize; 3] {
    ids.sort_unstable();
    ids
}

fn mix(slot: usize, h: u64) -> u64 {
    // splitmix64 finalizer over the slot-tagged state hash
    let mut z = h ^ (slot as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Letters one swap appends: the pair slot and each triplet slot it touches.
#[derive(Clone, Debug)]
pub(crate) struct SwapLetters {
    pair: (usize, ElementaryBraid),
    triplets: Vec<(usize, ElementaryBraid)>,
}

/// Every pairwise and triplet braid of a team, on each projection axis.
///
/// Triplet states are reference-counted, so cloning a table and updating a
/// handful of entries shares everything else with the original. The
/// fingerprint is an order-independent sum of per-slot hashes, maintained
/// incrementally; equality still compares every state.
#[derive(Clone, Debug)]
pub struct BraidTable {
    layout: Arc<Layout>,
    pairs: Vec<Braid2State>,
    triplets: Vec<Arc<Braid3State>>,
    fingerprint: u64,
}

impl BraidTable {
    pub fn identity(n: usize, axes: usize) -> Self {
        let layout = Arc::new(Layout::new(n, axes));
        let pairs = vec![Braid2State::identity(); axes * layout.pairs_per_axis];
        let id3 = Arc::new(Braid3State::identity());
        let triplets = vec![id3; axes * layout.triplets_per_axis];
        let mut table = Self { layout, pairs, triplets, fingerprint: 0 };
        table.fingerprint = table.recompute_fingerprint();
        table
    }

    pub fn robots(&self) -> usize {
        self.layout.n
    }

    pub fn axes(&self) -> usize {
        self.layout.axes
    }

    pub fn fingerprint(&self) -> u64 {
        self.fingerprint
    }

    fn recompute_fingerprint(&self) -> u64 {
        let off = self.pairs.len();
        let p = self.pairs.iter().enumerate().map(|(s, b)| mix(s, b.fingerprint()));
        let t = self.triplets.iter().enumerate().map(|(s, b)| mix(off + s, b.fingerprint()));
        p.chain(t).fold(0u64, u64::wrapping_add)
    }

    pub fn pair(&self, axis: usize, i: usize, j: usize) -> Braid2State {
        self.pairs[self.layout.pair(axis, i, j)]
    }

    pub fn triplet(&self, axis: usize, i: usize, j: usize, k: usize) -> &Braid3State {
        &self.triplets[self.layout.triplet(axis, [i, j, k])]
    }

    pub fn set_pair(&mut self, axis: usize, i: usize, j: usize, state: Braid2State) {
        let slot = self.layout.pair(axis, i, j);
        let old = std::mem::replace(&mut self.pairs[slot], state);
        self.fingerprint = self
            .fingerprint
            .wrapping_sub(mix(slot, old.fingerprint()))
            .wrapping_add(mix(slot, state.fingerprint()));
    }

    pub fn set_triplet(&mut self, axis: usize, ids: [usize; 3], state: Braid3State) {
        let idx = self.layout.triplet(axis, ids);
        let slot = self.pairs.len() + idx;
        let new_fp = mix(slot, state.fingerprint());
        let old = std::mem::replace(&mut self.triplets[idx], Arc::new(state));
        self.fingerprint = self.fingerprint.wrapping_sub(mix(slot, old.fingerprint())).wrapping_add(new_fp);
    }

    /// True when no entry carries an entangling pattern.
    pub fn is_clean(&self) -> bool {
        self.pairs.iter().all(|p| !p.violated) && self.triplets.iter().all(|t| !t.violated())
    }

    /// Folds one adjacent swap on `axis` into every affected pair and
    /// triplet: the pair `(left, right)` and each triplet holding both.
    ///
    /// `left` is the robot on the left immediately before the swap. `is_left`
    /// reports whether a third robot `k` is left of the swapping pair.
    /// Stops at the first entangling update and leaves the offending state
    /// stored (violated) in the table.
    pub fn apply_swap(
        &mut self,
        axis: usize,
        left: usize,
        right: usize,
        sign: i32,
        is_left: impl Fn(usize) -> bool,
    ) -> Result<(), Violation> {
        let letter = ElementaryBraid::new(1, sign).expect("sign is ±1");
        let (pair, ok) = self.pair(axis, left, right).update(letter).expect("pair state is clean");
        self.set_pair(axis, left, right, pair);
        if !ok {
            let (i, j) = (left.min(right), left.max(right));
            return Err(Violation { axis, subset: Subset::Pair([i, j]), word: pair.word() });
        }
        for k in 0..self.layout.n {
            if k == left || k == right {
                continue;
            }
            let index = if is_left(k) { 2 } else { 1 };
            let letter = ElementaryBraid::new(index, sign).unwrap();
            let ids = sorted3([left, right, k]);
            let (next, ok) = self.triplet(axis, ids[0], ids[1], ids[2]).update(letter).expect("triplet state is clean");
            let word = (!ok).then(|| next.reduced_word());
            self.set_triplet(axis, ids, next);
            if let Some(word) = word {
                return Err(Violation { axis, subset: Subset::Triplet(ids), word });
            }
        }
        Ok(())
    }

    /// The fingerprint [`Self::apply_swap`] would leave, or `None` if the
    /// swap entangles some pair or triplet. Leaves `self` untouched.
    pub(crate) fn peek_swap(
        &self,
        axis: usize,
        left: usize,
        right: usize,
        sign: i32,
        is_left: impl Fn(usize) -> bool,
    ) -> Option<u64> {
        let letter = ElementaryBraid::new(1, sign).expect("sign is ±1");
        let old = self.pair(axis, left, right);
        let (pair, ok) = old.update(letter).ok()?;
        if !ok {
            return None;
        }
        let slot = self.layout.pair(axis, left, right);
        let mut fp = self.fingerprint.wrapping_sub(mix(slot, old.fingerprint())).wrapping_add(mix(slot, pair.fingerprint()));
        for k in 0..self.layout.n {
            if k == left || k == right {
                continue;
            }
            let letter = ElementaryBraid::new(if is_left(k) { 2 } else { 1 }, sign).unwrap();
            let idx = self.layout.triplet(axis, sorted3([left, right, k]));
            let state = &self.triplets[idx];
            let (ok, next) = match state.peek(letter) {
                Some(v) => v,
                None => {
                    let (next, ok) = state.update(letter).ok()?;
                    (ok, next.fingerprint())
                }
            };
            if !ok {
                return None;
            }
            let slot = self.pairs.len() + idx;
            fp = fp.wrapping_sub(mix(slot, state.fingerprint())).wrapping_add(mix(slot, next));
        }
        Some(fp)
    }

    /// The letters [`Self::apply_swap`] would append, by slot.
    pub(crate) fn swap_letters(
        &self,
        axis: usize,
        left: usize,
        right: usize,
        sign: i32,
        is_left: impl Fn(usize) -> bool,
    ) -> SwapLetters {
        let pair = (self.layout.pair(axis, left, right), ElementaryBraid::new(1, sign).expect("sign is ±1"));
        let triplets = (0..self.layout.n)
            .filter(|&k| k != left && k != right)
            .map(|k| {
                let letter = ElementaryBraid::new(if is_left(k) { 2 } else { 1 }, sign).unwrap();
                (self.layout.triplet(axis, sorted3([left, right, k])), letter)
            })
            .collect();
        SwapLetters { pair, triplets }
    }

    /// Whether `self` after `own` equals `other` after `theirs`, where a
    /// missing swap leaves the table as it is. Builds no table.
    pub(crate) fn equals_with(&self, own: Option<&SwapLetters>, other: &BraidTable, theirs: Option<&SwapLetters>) -> bool {
        if self.layout != other.layout {
            return false;
        }
        let pair_letter = |sw: Option<&SwapLetters>, slot| sw.and_then(|s| (s.pair.0 == slot).then_some(s.pair.1));
        let pair_after = |b: Braid2State, l: Option<ElementaryBraid>| match l {
            None => Some(b),
            Some(l) => b.update(l).ok().filter(|r| r.1).map(|r| r.0),
        };
        for sw in [own, theirs].into_iter().flatten() {
            let slot = sw.pair.0;
            let a = pair_after(self.pairs[slot], pair_letter(own, slot));
            if a.is_none() || a != pair_after(other.pairs[slot], pair_letter(theirs, slot)) {
                return false;
            }
        }
        let skip = |slot| [own, theirs].into_iter().flatten().any(|s| s.pair.0 == slot);
        if !self.pairs.iter().zip(&other.pairs).enumerate().all(|(s, (a, b))| skip(s) || a == b) {
            return false;
        }
        let mut changed = vec![0u64; self.triplets.len().div_ceil(64)];
        let letter = |sw: Option<&SwapLetters>, slot| sw.and_then(|s| s.triplets.iter().find(|t| t.0 == slot).map(|t| t.1));
        for sw in [own, theirs].into_iter().flatten() {
            for &(slot, _) in &sw.triplets {
                if changed[slot / 64] >> (slot % 64) & 1 == 1 {
                    continue;
                }
                changed[slot / 64] |= 1 << (slot % 64);
                if !self.triplets[slot].equals_with(letter(own, slot), &other.triplets[slot], letter(theirs, slot)) {
                    return false;
                }
            }
        }
        self.triplets
            .iter()
            .zip(&other.triplets)
            .enumerate()
            .all(|(s, (a, b))| Arc::ptr_eq(a, b) || changed[s / 64] >> (s % 64) & 1 == 1 || a == b)
    }

    /// A table holding only the listed axes of `self`, in that order.
    pub fn select_axes(&self, axes: &[usize]) -> Self {
        let mut out = Self::identity(self.layout.n, axes.len());
        let ppa = self.layout.pairs_per_axis;
        let tpa = self.layout.triplets_per_axis;
        for (dst, &src) in axes.iter().enumerate() {
            out.pairs[dst * ppa..(dst + 1) * ppa].copy_from_slice(&self.pairs[src * ppa..(src + 1) * ppa]);
            out.triplets[dst * tpa..(dst + 1) * tpa].clone_from_slice(&self.triplets[src * tpa..(src + 1) * tpa]);
        }
        out.fingerprint = out.recompute_fingerprint();
        out
    }

    /// Every entry as `(axis, subset, representative word)`; pairs first.
    pub fn entries(&self) -> Vec<(usize, Subset, BraidWord)> {
        let n = self.layout.n;
        let mut out = Vec::new();
        for axis in 0..self.layout.axes {
            for i in 0..n {
                for j in i + 1..n {
                    out.push((axis, Subset::Pair([i, j]), self.pair(axis, i, j).word()));
                }
            }
        }
        for axis in 0..self.layout.axes {
            for i in 0..n {
                for j in i + 1..n {
                    for k in j + 1..n {
                        let w = self.triplet(axis, i, j, k).reduced_word();
                        out.push((axis, Subset::Triplet([i, j, k]), w));
                    }
                }
            }
        }
        out
    }

    /// Entries that differ between two tables of the same shape.
    pub fn differences(&self, other: &Self) -> Vec<(usize, Subset)> {
        if self.layout != other.layout {
            return vec![];
        }
        self.entries()
            .into_iter()
            .filter(|(axis, subset, _)| match *subset {
                Subset::Pair([i, j]) => self.pair(*axis, i, j) != other.pair(*axis, i, j),
                Subset::Triplet([i, j, k]) => self.triplet(*axis, i, j, k) != other.triplet(*axis, i, j, k),
            })
            .map(|(a, s, _)| (a, s))
            .collect()
    }
}

impl PartialEq for BraidTable {
    fn eq(&self, other: &Self) -> bool {
        self.fingerprint == other.fingerprint
            && self.layout == other.layout
            && self.pairs == other.pairs
            && self
                .triplets
                .iter()
                .zip(&other.triplets)
                .all(|(a, b)| Arc::ptr_eq(a, b) || a == b)
    }
}

impl Eq for BraidTable {}

impl Hash for BraidTable {
    fn hash<H: Hasher>(&self, state: &mut H) {
        state.write_u64(self.fingerprint);
    }
}
