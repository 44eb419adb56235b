use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use tetherbraid::braid::BraidTable;
use tetherbraid::geometry::Trajectory;
use tetherbraid::harness::{exact_min_distance, random_targets, run_task_sequence, verify_with, Scenario, Verdict};
use tetherbraid::planner::plan;
use tetherbraid::workspace::{carry_over_braids, map_path, ranks_from_positions, WorkspaceConfig};

const SLACK: f64 = 1e-9;

/// Checks every successful set; returns successes and swaps walked back.
fn check_run(s: &Scenario) -> (usize, usize) {
    let r = run_task_sequence(s).unwrap();
    for m in r.sets.iter().filter(|m| m.success) {
        assert_eq!(m.violations, 0, "set {}", m.index);
        assert_eq!(m.braids_agree, Some(true), "set {}", m.index);
        if let Some(d) = m.exact_min_distance {
            assert!(d >= s.config.d_safe - SLACK, "set {}: {d}", m.index);
        }
    }
    (r.successes, r.sets.iter().map(|m| m.retraced).sum())
}

#[test]
fn executed_sequences_are_clean_and_agree_with_the_planner() {
    for n in [2, 3, 5, 7] {
        for seed in 0..2 {
            let s = Scenario::random(WorkspaceConfig::default(), n, 8, seed).unwrap();
            let r = run_task_sequence(&s).unwrap();
            assert_eq!(r.successes, r.total, "n = {n}, seed = {seed}");
            check_run(&s);
        }
    }
}

#[test]
fn retraced_sets_stay_sound() {
    // a tight budget forces walks back through earlier sets
    let mut s = Scenario::random(WorkspaceConfig::default(), 6, 25, 4).unwrap();
    s.max_expansions = 30;
    let (solved, retraced) = check_run(&s);
    assert!(retraced > 0);
    s.retrace = false;
    let (plain, none) = check_run(&s);
    assert_eq!(none, 0);
    assert!(solved > plain);
}

#[test]
fn carried_braids_match_verifying_the_concatenated_motion() {
    let config = WorkspaceConfig::default();
    let mut s = Scenario::random(config, 5, 0, 9).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let axes = s.verifier_axes();
    let cfg = s.planner_config();
    let mut positions = s.initial_positions.clone();
    let mut braids = BraidTable::identity(5, 2);
    let mut verifier = BraidTable::identity(5, axes.len());
    let mut whole: Option<Vec<Trajectory>> = None;
    for _ in 0..4 {
        let targets = random_targets(&mut rng, &config.region, config.d_safe, 5).unwrap();
        s.target_sets.push(targets.clone());
        let start = ranks_from_positions(&positions, &config.axes).unwrap();
        let goal = ranks_from_positions(&targets, &config.axes).unwrap();
        let out = plan(&start, &goal, &braids, &cfg).unwrap();
        let trajs = map_path(&out.path, &config, &positions, &targets).unwrap();
        let report = verify_with(&trajs, &axes, config.height, &verifier).unwrap();
        assert_eq!(report.verdict, Verdict::Clean);
        braids = carry_over_braids(&trajs, &braids, &config.axes, config.height).unwrap();
        assert_eq!(Some(&braids), out.final_braids.as_ref());
        verifier = report.braids;
        whole = Some(match whole {
            None => trajs,
            Some(w) => w.iter().zip(&trajs).map(|(a, b)| a.then(b)).collect(),
        });
        positions = targets;
    }
    let whole = whole.unwrap();
    let at_once = verify_with(&whole, &axes, config.height, &BraidTable::identity(5, axes.len())).unwrap();
    assert_eq!(at_once.verdict, Verdict::Clean);
    assert_eq!(at_once.braids, verifier);
    let horizon = whole[0].arrival_time();
    assert!(exact_min_distance(&whole, 0.0, horizon) >= config.d_safe - SLACK);
    assert_eq!(carry_over_braids(&whole, &BraidTable::identity(5, 2), &config.axes, config.height).unwrap(), braids);
}

#[test]
fn running_a_path_backwards_undoes_its_braids() {
    let config = WorkspaceConfig::default();
    let s = Scenario::random(config, 6, 1, 21).unwrap();
    let start = ranks_from_positions(&s.initial_positions, &config.axes).unwrap();
    let goal = ranks_from_positions(&s.target_sets[0], &config.axes).unwrap();
    let out = plan(&start, &goal, &BraidTable::identity(6, 2), &s.planner_config()).unwrap();
    let trajs = map_path(&out.path, &config, &s.initial_positions, &s.target_sets[0]).unwrap();
    let there_and_back: Vec<Trajectory> = trajs.iter().map(|t| t.then(&t.reversed())).collect();
    let table = carry_over_braids(&there_and_back, &BraidTable::identity(6, 2), &config.axes, config.height).unwrap();
    assert_eq!(table, BraidTable::identity(6, 2));
}

#[test]
fn targets_sharing_a_coordinate_verify_clean_on_mirrored_axes() {
    use tetherbraid::geometry::Point;
    let p = |x: f64, y: f64| Point::new(x, y);
    let mut s = Scenario::random(WorkspaceConfig::default(), 3, 0, 1).unwrap();
    s.initial_positions = vec![p(-8.0, -8.0), p(8.0, -8.0), p(0.0, 8.0)];
    s.bases = s.initial_positions.clone();
    // equal y, then equal x, then both rows and columns shared
    s.target_sets = vec![
        vec![p(5.0, 5.0), p(-5.0, 5.0), p(0.0, -5.0)],
        vec![p(3.0, 6.0), p(3.0, -6.0), p(-4.0, 0.0)],
        vec![p(2.0, 2.0), p(-2.0, 2.0), p(2.0, -2.0)],
        vec![p(5.0, 5.0), p(-5.0, 5.0), p(0.0, -5.0)],
    ];
    let (solved, _) = check_run(&s);
    assert_eq!(solved, 4);
}
