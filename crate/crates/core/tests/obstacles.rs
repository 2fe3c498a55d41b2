use heisgeo::group::{koranyi_dist, HPoint};
use heisgeo::obstacles::{
    build_maze, maze_level_union, min_gauge4_on_segment, segment_hits_box, Box3, KoranyiBall, MazeLayout, MazeTree,
    ObstacleSet,
};
use heisgeo::paths::{Axis, AxisSegment};
use proptest::prelude::*;

fn sampled_hit(seg: &AxisSegment, b: &Box3, n: usize) -> bool {
    (0..=n).any(|i| b.contains(seg.point_at(seg.displacement * i as f64 / n as f64)))
}

fn segment() -> impl Strategy<Value = AxisSegment> {
    (any::<bool>(), -2.0..2.0f64, -2.0..2.0f64, -3.0..3.0f64, -2.0..2.0f64)
        .prop_map(|(ax, x, y, t, s)| AxisSegment::new(if ax { Axis::X } else { Axis::Y }, HPoint::new(x, y, t), s))
}

fn box3() -> impl Strategy<Value = Box3> {
    (-2.0..2.0f64, -2.0..2.0f64, -3.0..3.0f64, 0.01..1.0f64, 0.01..1.0f64, 0.01..1.0f64)
        .prop_map(|(x, y, t, a, b, c)| Box3::new([x, x + a], [y, y + b], [t, t + c]).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(2000))]

    #[test]
    fn exact_box_test_agrees_with_dense_sampling(seg in segment(), b in box3()) {
        let exact = segment_hits_box(&seg, &b);
        if sampled_hit(&seg, &b, 4000) {
            prop_assert!(exact);
        }
        if exact {
            // a hit must survive a slight enlargement of the box under sampling
            let grown = Box3::new([b.x[0] - 1e-3, b.x[1] + 1e-3], [b.y[0] - 1e-3, b.y[1] + 1e-3], [b.t[0] - 1e-2, b.t[1] + 1e-2]).unwrap();
            prop_assert!(sampled_hit(&seg, &grown, 20_000));
        }
        let set = ObstacleSet::from_boxes(vec![b]);
        prop_assert_eq!(set.segment_clear(&seg, 0.0), !exact);
    }

    #[test]
    fn ball_test_matches_sampled_gauge(seg in segment(), cx in -2.0..2.0f64, cy in -2.0..2.0f64, ct in -3.0..3.0f64) {
        let c = HPoint::new(cx, cy, ct);
        let sampled = (0..=2000)
            .map(|i| koranyi_dist(c, seg.point_at(seg.displacement * i as f64 / 2000.0)))
            .fold(f64::INFINITY, f64::min);
        let exact = min_gauge4_on_segment(&seg, c).max(0.0).powf(0.25);
        prop_assert!(exact <= sampled + 1e-9);
        prop_assert!(sampled - exact <= 0.02 * sampled.max(0.1));
    }

    #[test]
    fn margin_clearance_is_monotone(seg in segment(), b in box3(), m in 0.0..0.5f64) {
        let set = ObstacleSet::from_boxes(vec![b]);
        if set.segment_clear(&seg, m) {
            prop_assert!(set.segment_clear(&seg, 0.5 * m));
        }
    }
}

#[test]
fn tilted_box_is_hit_at_a_million_samples() {
    let seg = AxisSegment::new(Axis::X, HPoint::new(0.0, 1.0, 0.0), 1.0);
    let b = Box3::new([0.0, 1.0], [0.5, 1.5], [1.9, 2.1]).unwrap();
    assert!(sampled_hit(&seg, &b, 1_000_000));
    assert!(!ObstacleSet::from_boxes(vec![b]).segment_clear(&seg, 0.0));
}

#[test]
fn ball_blocks_segment_through_its_center() {
    let ball = KoranyiBall::new(HPoint::new(0.5, 0.0, 0.0), 0.1).unwrap();
    let set = ObstacleSet::new(vec![], vec![ball]);
    assert!(!set.segment_clear(&AxisSegment::new(Axis::X, HPoint::ORIGIN, 1.0), 0.0));
    assert!(set.segment_clear(&AxisSegment::new(Axis::X, HPoint::new(0.0, 0.2, 0.0), 1.0), 0.0));
}

#[test]
fn maze_counts_and_invariants() {
    let m = build_maze(1, 2, &MazeLayout::default()).unwrap();
    assert_eq!(m.level(0).unwrap().len(), 1);
    assert_eq!(m.level(1).unwrap().len(), 24);
    assert_eq!(m.level(2).unwrap().len(), 576);
    m.validate().unwrap();
    let rho = m.layout.rho();
    let d0 = m.max_diameter(0).unwrap();
    for j in 1..=2 {
        assert!(m.max_diameter(j).unwrap() <= rho.powi(j as i32) * d0 + 1e-12);
    }
    let u = maze_level_union(&m, 2).unwrap();
    assert_eq!(u.boxes.len(), 576);
    assert!(u.boxes.iter().all(|b| m.root.contains(b.center())));
}

#[test]
fn maze_json_round_trip_is_bit_exact() {
    let m = build_maze(2, 2, &MazeLayout::default()).unwrap();
    let json = serde_json::to_string(&m).unwrap();
    let back: MazeTree = serde_json::from_str(&json).unwrap();
    assert_eq!(back, m);
    let bits = |t: &MazeTree| -> Vec<u64> {
        t.nodes
            .iter()
            .flatten()
            .flat_map(|n| n.bbox.x.into_iter().chain(n.bbox.y).chain(n.bbox.t))
            .map(f64::to_bits)
            .collect()
    };
    assert_eq!(bits(&back), bits(&m));
}

#[test]
fn invalid_layouts_are_rejected() {
    let l = MazeLayout { span: 0.3, ..MazeLayout::default() };
    assert!(build_maze(1, 1, &l).is_err());
    let l = MazeLayout { thickness: 0.05, ..MazeLayout::default() };
    assert!(build_maze(1, 1, &l).is_err());
    assert!(Box3::new([1.0, 0.0], [0.0, 1.0], [0.0, 1.0]).is_err());
    assert!(KoranyiBall::new(HPoint::ORIGIN, -1.0).is_err());
}
