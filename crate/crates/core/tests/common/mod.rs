#![allow(dead_code)]

use std::collections::{HashMap, VecDeque};

use rand::seq::SliceRandom;
use rand_chacha::ChaCha8Rng;
use tetherbraid::planner::PermutationState;

pub type Ranks = [Vec<usize>; 2];

pub fn ranks(p: &PermutationState) -> Ranks {
    [p.ranks(0), p.ranks(1)]
}

/// Fewest adjacent swaps from `from` to every reachable rank pair.
pub fn bfs_distances(from: &Ranks) -> HashMap<Ranks, usize> {
    let mut seen = HashMap::from([(from.clone(), 0usize)]);
    let mut queue = VecDeque::from([from.clone()]);
    while let Some(r) = queue.pop_front() {
        let d = seen[&r];
        for axis in 0..2 {
            for i in 0..r[axis].len() {
                for j in 0..r[axis].len() {
                    if r[axis][j] == r[axis][i] + 1 {
                        let mut next = r.clone();
                        next[axis].swap(i, j);
                        if !seen.contains_key(&next) {
                            seen.insert(next.clone(), d + 1);
                            queue.push_back(next);
                        }
                    }
                }
            }
        }
    }
    seen
}

/// Fewest adjacent swaps between two rank pairs.
pub fn bfs_distance(from: &Ranks, to: &Ranks) -> usize {
    bfs_distances(from)[to]
}

pub fn random_perms(rng: &mut ChaCha8Rng, n: usize) -> PermutationState {
    let mut a: Vec<usize> = (0..n).collect();
    let mut b = a.clone();
    a.shuffle(rng);
    b.shuffle(rng);
    PermutationState::new(a, b).unwrap()
}

/// Every permutation of `0..n`, in lexicographic order.
pub fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for k in 0..n {
            let mut q = p.clone();
            q.insert(k, n - 1);
            out.push(q);
        }
    }
    out.sort();
    out
}

/// Fewest adjacent swaps from `from` to every ordering of one axis.
pub fn axis_distances(from: &[usize]) -> HashMap<Vec<usize>, usize> {
    let mut seen = HashMap::from([(from.to_vec(), 0usize)]);
    let mut queue = VecDeque::from([from.to_vec()]);
    while let Some(r) = queue.pop_front() {
        let d = seen[&r];
        for i in 0..r.len() {
            for j in 0..r.len() {
                if r[j] == r[i] + 1 {
                    let mut next = r.clone();
                    next.swap(i, j);
                    if !seen.contains_key(&next) {
                        seen.insert(next.clone(), d + 1);
                        queue.push_back(next);
                    }
                }
            }
        }
    }
    seen
}
