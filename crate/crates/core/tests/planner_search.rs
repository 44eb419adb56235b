mod common;

use common::{bfs_distance, random_perms, ranks};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use tetherbraid::braid::BraidTable;
use tetherbraid::planner::{plan, swap_sign, Heuristic, PermutationState, PlannerConfig};

/// Replays `actions` from `start` on `braids`, checking each step is one
/// adjacent swap and no braid entangles; returns the final table.
fn replay(start: &PermutationState, path: &[PermutationState], braids: &BraidTable, cfg: &PlannerConfig) -> BraidTable {
    assert_eq!(&path[0], start);
    let mut table = braids.clone();
    for w in path.windows(2) {
        let (a, b) = (&w[0], &w[1]);
        let changed: Vec<usize> = (0..2).filter(|&ax| a.ranks(ax) != b.ranks(ax)).collect();
        assert_eq!(changed.len(), 1, "one axis per step");
        let axis = changed[0];
        let moved: Vec<usize> = (0..a.n()).filter(|&r| a.rank(axis, r) != b.rank(axis, r)).collect();
        assert_eq!(moved.len(), 2);
        let (left, right) = if a.rank(axis, moved[0]) < a.rank(axis, moved[1]) { (moved[0], moved[1]) } else { (moved[1], moved[0]) };
        assert_eq!(a.rank(axis, right), a.rank(axis, left) + 1, "adjacent ranks");
        let action = tetherbraid::planner::SwapAction { axis, rank: a.rank(axis, left), left, right };
        let sign = swap_sign(&action, a, cfg.depth_orientation);
        table.apply_swap(axis, left, right, sign, |k| a.rank(axis, k) < action.rank).expect("planned swaps stay untangled");
    }
    table
}

#[test]
fn unconstrained_search_is_optimal_for_three_robots() {
    let cfg = PlannerConfig { bias: 1.0, check_braids: false, ..PlannerConfig::default() };
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..60 {
        let (s, t) = (random_perms(&mut rng, 3), random_perms(&mut rng, 3));
        let out = plan(&s, &t, &BraidTable::identity(3, 2), &cfg).unwrap();
        assert_eq!(out.actions.len(), bfs_distance(&ranks(&s), &ranks(&t)));
    }
}

#[test]
fn planned_paths_replay_clean_and_match_the_reported_braids() {
    let cfg = PlannerConfig::default();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for n in [2, 4, 6, 7] {
        let mut braids = BraidTable::identity(n, 2);
        let mut at = random_perms(&mut rng, n);
        for _ in 0..4 {
            let goal = random_perms(&mut rng, n);
            let out = plan(&at, &goal, &braids, &cfg).unwrap();
            assert!(out.found(), "n = {n}");
            assert_eq!(out.path.last(), Some(&goal));
            assert_eq!(out.actions.len() + 1, out.path.len());
            let table = replay(&at, &out.path, &braids, &cfg);
            assert_eq!(Some(&table), out.final_braids.as_ref());
            braids = table;
            at = goal;
        }
    }
}

#[test]
fn search_is_deterministic() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let (s, t) = (random_perms(&mut rng, 6), random_perms(&mut rng, 6));
    for heuristic in [Heuristic::Manhattan, Heuristic::PairCrossings, Heuristic::TripletCrossings] {
        let cfg = PlannerConfig { heuristic, ..PlannerConfig::default() };
        let a = plan(&s, &t, &BraidTable::identity(6, 2), &cfg).unwrap();
        let b = plan(&s, &t, &BraidTable::identity(6, 2), &cfg).unwrap();
        assert_eq!(a.path, b.path);
        assert_eq!(a.stats, b.stats);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn every_heuristic_finds_valid_paths(seed in 0u64..1000, n in 2usize..6) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (s, t) = (random_perms(&mut rng, n), random_perms(&mut rng, n));
        for heuristic in [Heuristic::Manhattan, Heuristic::PairCrossings, Heuristic::TripletCrossings] {
            let cfg = PlannerConfig { heuristic, ..PlannerConfig::default() };
            let out = plan(&s, &t, &BraidTable::identity(n, 2), &cfg).unwrap();
            prop_assert!(out.found());
            prop_assert!(out.actions.len() >= s.swap_distance(&t));
            replay(&s, &out.path, &BraidTable::identity(n, 2), &cfg);
        }
    }
}
