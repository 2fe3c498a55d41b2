//! Deterministic planner scenes shared by the integration tests.

use std::f64::consts::PI;

use heisgeo::group::{mul, HPoint};
use heisgeo::metrics::{cc_dist, DEFAULT_TOL};
use heisgeo::obstacles::{Box3, KoranyiBall, ObstacleSet};
use heisgeo::paths::bang_bang;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rand_point(rng: &mut ChaCha8Rng, xy: f64, t: f64) -> HPoint {
    HPoint::new(rng.gen_range(-xy..=xy), rng.gen_range(-xy..=xy), rng.gen_range(-t..=t))
}

/// Upper bound on `d_cc(c, b)` over the points `b` of the box.
pub fn box_radius_bound(b: &Box3, c: HPoint) -> f64 {
    let mut r = 0.0f64;
    for x in b.x {
        for y in b.y {
            for t in b.t {
                let w = mul(c.inv(), HPoint::new(x, y, t));
                // corners bound the planar part; the vertical part grows with |t|,
                // which is bounded by its value at corners plus the cross term
                let planar = w.x.hypot(w.y);
                let cross = 2.0 * ((b.x[1] - b.x[0]) * c.y.abs().max(1.0) + (b.y[1] - b.y[0]) * c.x.abs().max(1.0));
                r = r.max(planar + (PI * (w.t.abs() + cross)).sqrt());
            }
        }
    }
    r
}

/// A deterministic scene: endpoints, obstacles, and the cc-distance.
pub fn scene(idx: u64) -> (HPoint, HPoint, ObstacleSet) {
    let mut rng = ChaCha8Rng::seed_from_u64(1000 + idx);
    let p = rand_point(&mut rng, 2.0, 4.0);
    let q = rand_point(&mut rng, 2.0, 4.0);
    let dist = cc_dist(p, q, DEFAULT_TOL).unwrap();
    let bb = bang_bang(p, q);
    let count = 1 + (idx % 20) as usize;
    let mut set = ObstacleSet::default();
    while set.len() < count {
        // half of the primitives sit on the bang-bang path
        let center = if rng.gen_bool(0.5) {
            let seg = bb.segments[rng.gen_range(0..4)];
            seg.point_at(rng.gen_range(0.0..=1.0) * seg.displacement)
        } else {
            let s = rng.gen_range(0.0..1.0);
            HPoint::new(p.x + s * (q.x - p.x), p.y + s * (q.y - p.y), p.t + s * (q.t - p.t)).mul(&rand_point(
                &mut rng,
                0.2 * dist,
                0.04 * dist * dist,
            ))
        };
        let mut trial = set.clone();
        if rng.gen_bool(0.5) {
            let r = rng.gen_range(0.01..0.035) * dist;
            trial.balls.push(KoranyiBall::new(center, r).unwrap());
        } else {
            let s = rng.gen_range(0.01..0.04) * dist;
            let h = rng.gen_range(0.0005..0.002) * dist * dist;
            let b = Box3::new([center.x - s, center.x + s], [center.y - s, center.y + s], [center.t - h, center.t + h])
                .unwrap();
            if 2.0 * box_radius_bound(&b, center) > 0.2 * dist {
                continue;
            }
            trial.boxes.push(b);
        }
        if trial.contains(p)
            || trial.contains(q)
            || trial.clear_radius(p, dist) < 0.05 * dist
            || trial.clear_radius(q, dist) < 0.05 * dist
        {
            continue;
        }
        set = trial;
    }
    (p, q, set)
}
