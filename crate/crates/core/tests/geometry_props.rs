use std::f64::consts::PI;

use proptest::prelude::*;
use tetherbraid::geometry::{
    build_space_time, extract_crossings, CrossingOptions, CrossingSet, Point, ProjectionAxis, Trajectory, Waypoint,
};

/// Random piecewise-linear motions of `n` robots over unit time steps.
fn motions(n: usize) -> impl Strategy<Value = Vec<Trajectory>> {
    prop::collection::vec(prop::collection::vec((-5.0f64..5.0, -5.0f64..5.0), 2..6), n).prop_map(|robots| {
        let steps = robots.iter().map(Vec::len).min().unwrap();
        robots
            .into_iter()
            .enumerate()
            .map(|(i, pts)| {
                let w = pts.into_iter().take(steps).enumerate().map(|(k, (x, y))| Waypoint { pos: Point::new(x, y), t: k as f64 }).collect();
                Trajectory::new(i, w).unwrap()
            })
            .collect()
    })
}

fn crossings(trajs: &[Trajectory], axis: ProjectionAxis) -> CrossingSet {
    let lifted = build_space_time(trajs, 1.0).unwrap();
    extract_crossings(&lifted, &axis, 0, &CrossingOptions::default()).unwrap()
}

fn sorted_by_u(points: &[Point], axis: &ProjectionAxis) -> Vec<usize> {
    let mut ids: Vec<usize> = (0..points.len()).collect();
    ids.sort_by(|&a, &b| axis.u(points[a]).total_cmp(&axis.u(points[b])).then(a.cmp(&b)));
    ids
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn events_carry_the_initial_order_to_the_final_order(trajs in (2usize..6).prop_flat_map(motions), angle in 0.0f64..PI) {
        let axis = ProjectionAxis::new(angle);
        let set = crossings(&trajs, axis);
        let starts: Vec<Point> = trajs.iter().map(Trajectory::start).collect();
        let ends: Vec<Point> = trajs.iter().map(Trajectory::end).collect();
        prop_assert_eq!(&set.initial_order, &sorted_by_u(&starts, &axis));
        prop_assert_eq!(&set.final_order, &sorted_by_u(&ends, &axis));
        let mut order = set.initial_order.clone();
        let mut last = 0.0;
        for e in &set.events {
            prop_assert!(e.time >= last);
            last = e.time;
            let p = usize::from(e.letter.index()) - 1;
            let pair = (order[p].min(order[p + 1]), order[p].max(order[p + 1]));
            prop_assert_eq!(pair, e.robots);
            order.swap(p, p + 1);
        }
        prop_assert_eq!(order, set.final_order);
    }

    #[test]
    fn opposite_views_mirror_the_letters(trajs in (2usize..6).prop_flat_map(motions), angle in 0.0f64..PI) {
        let n = trajs.len() as u8;
        let front = crossings(&trajs, ProjectionAxis::new(angle));
        // rotating the view by π reverses left and right and over and under
        let turned = crossings(&trajs, ProjectionAxis::new(angle + PI));
        prop_assert_eq!(front.events.len(), turned.events.len());
        for (a, b) in front.events.iter().zip(&turned.events) {
            prop_assert_eq!(b.letter.index(), n - a.letter.index());
            prop_assert_eq!(b.letter.sign(), a.letter.sign());
            prop_assert_eq!(a.robots, b.robots);
        }
        // seen from behind only the over and under strands trade places
        let behind = crossings(&trajs, ProjectionAxis::new(angle).viewed_from_behind());
        for (a, b) in front.events.iter().zip(&behind.events) {
            prop_assert_eq!(b.letter.index(), a.letter.index());
            prop_assert_eq!(b.letter.sign(), -a.letter.sign());
        }
    }
}

#[test]
fn crossing_sign_follows_depth() {
    // robot 0 walks right along y = 1 (deeper for α = 0), robot 1 walks left along y = -1
    let walk = |i, y: f64, x0: f64, x1: f64| {
        Trajectory::new(i, vec![Waypoint { pos: Point::new(x0, y), t: 0.0 }, Waypoint { pos: Point::new(x1, y), t: 1.0 }]).unwrap()
    };
    let trajs = [walk(0, 1.0, -1.0, 1.0), walk(1, -1.0, 1.0, -1.0)];
    let axis = ProjectionAxis::new(PI / 2.0);
    let set = crossings(&trajs, axis);
    assert_eq!(set.events.len(), 1);
    assert_eq!(set.events[0].time, 0.5);
    let back = crossings(&trajs, axis.viewed_from_behind());
    assert_eq!(back.events[0].letter.sign(), -set.events[0].letter.sign());
}
