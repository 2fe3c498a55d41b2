//! Acceptance criteria, one PASS/FAIL line each.
//!
//! Runs without the libtest harness so the summary lines are always shown.
//! Pass `--ignored` or `--include-ignored` (or set `HEISGEO_SLOW=1`) to also
//! run the fine-lattice benchmark.

use std::f64::consts::{PI, SQRT_2};
use std::time::{Duration, Instant};

use heisgeo::estimator::{
    box_dimension, dct_bounds, grid_pi_distance, interior_crossing_cost, DimInput, Gauge, GridSpec, GridSteps,
};
use heisgeo::group::{dilate, koranyi_dist, mul, HPoint};
use heisgeo::metrics::{cc_dist, cc_dist_vertical, vertical_geodesic, DEFAULT_TOL};
use heisgeo::obstacles::{assemble_a, build_maze, maze_level_union, AssembledSet, Box3, MazeLayout};
use heisgeo::paths::{bang_bang, cc_length};
use heisgeo::planner::{plan, PlanConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

mod common;
use common::{rand_point, scene};

struct Outcome {
    ok: bool,
    detail: String,
}

fn outcome(ok: bool, detail: String) -> Outcome {
    Outcome { ok, detail }
}

fn run(id: &str, name: &str, limit: Duration, f: impl FnOnce() -> Outcome) -> bool {
    let start = Instant::now();
    let res = std::panic::catch_unwind(std::panic::AssertUnwindSafe(f)).unwrap_or_else(|e| {
        let msg = e
            .downcast_ref::<String>()
            .cloned()
            .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
            .unwrap_or_default();
        outcome(false, format!("panicked: {msg}"))
    });
    let took = start.elapsed();
    let in_time = took <= limit;
    let ok = res.ok && in_time;
    println!(
        "{} [{id}] {name}: {} ({:.2}s of {}s{})",
        if ok { "PASS" } else { "FAIL" },
        res.detail,
        took.as_secs_f64(),
        limit.as_secs(),
        if in_time { "" } else { ", over time" }
    );
    ok
}

fn bang_bang_bound() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let (mut max_end, mut bound_ok, mut sup_ratio) = (0.0f64, true, 0.0f64);
    for _ in 0..100_000 {
        let p = rand_point(&mut rng, 10.0, 100.0);
        let q = rand_point(&mut rng, 10.0, 100.0);
        let path = bang_bang(p, q);
        let e = path.end().unwrap();
        max_end = max_end.max((e.x - q.x).abs()).max((e.y - q.y).abs()).max((e.t - q.t).abs());
        let w = mul(p.inv(), q);
        let l = cc_length(&path);
        bound_ok &= l <= 5.0 * (w.x.abs() + w.y.abs() + w.t.abs().sqrt());
        let d = cc_dist(p, q, DEFAULT_TOL).unwrap();
        if d > 0.0 {
            sup_ratio = sup_ratio.max(l / d);
        }
    }
    let ratio_ok = sup_ratio <= 5.0 * SQRT_2 * (1.0 + 1e-6);
    outcome(
        max_end <= 1e-9 && bound_ok && ratio_ok,
        format!(
            "max endpoint error {max_end:.2e}, coordinate bound {}, sup ℓ/d_cc = {sup_ratio:.6} (limit {:.6})",
            if bound_ok { "holds" } else { "VIOLATED" },
            5.0 * SQRT_2
        ),
    )
}

fn vertical_distance() -> Outcome {
    let mut worst = 0.0f64;
    for i in 0..20 {
        let dt = 10f64.powf(-3.0 + 6.0 * i as f64 / 19.0);
        let exact = (PI * dt).sqrt();
        let d = cc_dist(HPoint::ORIGIN, HPoint::new(0.0, 0.0, dt), DEFAULT_TOL).unwrap();
        worst = worst.max((d - exact).abs() / exact.max(1.0));
    }
    outcome(worst <= 1e-8, format!("worst scaled error {worst:.2e} over 20 heights"))
}

fn metric_properties() -> Outcome {
    let tol = DEFAULT_TOL;
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let d = |p, q| cc_dist(p, q, tol).unwrap();
    let mut fails = Vec::new();
    let (mut sym, mut tri, mut inv, mut hom, mut kor, mut planar) = (0.0f64, 0.0f64, 0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for _ in 0..10_000 {
        let p = rand_point(&mut rng, 3.0, 10.0);
        let q = rand_point(&mut rng, 3.0, 10.0);
        let r = rand_point(&mut rng, 3.0, 10.0);
        let g = rand_point(&mut rng, 3.0, 10.0);
        let dpq = d(p, q);
        let scale = dpq.max(1.0);
        sym = sym.max((dpq - d(q, p)).abs() / scale);
        tri = tri.max((dpq - d(p, r) - d(r, q)) / scale);
        inv = inv.max((d(mul(g, p), mul(g, q)) - dpq).abs() / scale);
        let s = rng.gen_range(0.1..5.0);
        let ds = d(dilate(s, p).unwrap(), dilate(s, q).unwrap());
        hom = hom.max((ds - s * dpq).abs() / (s * dpq).max(1.0));
        kor = kor.max(koranyi_dist(p, q) - dpq);
        planar = planar.max((p.x - q.x).hypot(p.y - q.y) - dpq);
    }
    let lim = 10.0 * tol;
    for (name, v, l) in [
        ("symmetry", sym, lim),
        ("triangle", tri, lim),
        ("left invariance", inv, lim),
        ("homogeneity", hom, lim),
        ("korányi below cc", kor, tol),
        ("planar below cc", planar, tol),
    ] {
        if v > l {
            fails.push(name);
        }
    }
    outcome(
        fails.is_empty(),
        format!(
            "sym {sym:.1e}, triangle excess {tri:.1e}, invariance {inv:.1e}, homogeneity {hom:.1e}, d_K-d_cc {kor:.2}, planar-d_cc {planar:.2}{}",
            if fails.is_empty() { String::new() } else { format!("; failed: {}", fails.join(", ")) }
        ),
    )
}

fn vertical_geodesic_check() -> Outcome {
    let p = HPoint::new(0.7, -1.3, 2.5);
    let mut worst_end = 0.0f64;
    let mut worst_len = 0.0f64;
    let mut worst_rot = 0.0f64;
    for &dt in &[1e-2f64, 0.5, 1.0, -3.0, 40.0] {
        let exact = (PI * dt.abs()).sqrt();
        let base = vertical_geodesic(p, dt, 0.0, 10_000).unwrap();
        for &theta in &[0.0, PI / 3.0, 2.0, -1.0] {
            let g = vertical_geodesic(p, dt, theta, 10_000).unwrap();
            let last = *g.samples.last().unwrap();
            let want = mul(p, HPoint::new(0.0, 0.0, dt));
            worst_end =
                worst_end.max((last.x - want.x).abs()).max((last.y - want.y).abs()).max((last.t - want.t).abs());
            worst_len = worst_len.max((g.polyline_length() - exact).abs() / exact);
            worst_len = worst_len.max((g.length - exact).abs() / exact);
            worst_rot =
                worst_rot.max((g.end.t - base.end.t).abs()).max((g.polyline_length() - base.polyline_length()).abs());
        }
    }
    outcome(
        worst_end <= 1e-9 && worst_len <= 1e-6 && worst_rot <= 1e-9,
        format!("endpoint {worst_end:.1e}, relative length {worst_len:.1e}, rotation drift {worst_rot:.1e}"),
    )
}

fn planner_suite() -> Outcome {
    let (mut ok, mut blocked, mut escalated, mut worst_slack) = (0, 0, 0, f64::INFINITY);
    let mut failures = Vec::new();
    for idx in 0..100 {
        let (p, q, a) = scene(idx);
        let bb = bang_bang(p, q);
        if !bb.segments.iter().all(|s| a.segment_clear(s, 0.0)) {
            blocked += 1;
        }
        let cfg = PlanConfig { seed: idx, ..PlanConfig::default() };
        match plan(p, q, &a, &cfg) {
            Ok(res) => {
                let d = cc_dist(p, q, DEFAULT_TOL).unwrap();
                let e = res.path.end().unwrap();
                let clear = res.path.segments.iter().all(|s| a.segment_clear(s, 0.0));
                let certified = res.clearance.is_some_and(|c| c > 0.0)
                    && res.path.segments.iter().all(|s| a.segment_clear(s, 0.5 * res.clearance.unwrap()));
                let slack = cc_length(&bb) + 5.0 * d - res.length;
                if res.epsilon > cfg.epsilon_fraction * d * (1.0 + 1e-9) {
                    escalated += 1;
                }
                let ends = (e.x - q.x).abs().max((e.y - q.y).abs()).max((e.t - q.t).abs()) < 1e-9
                    && res.path.start() == Some(p)
                    && res.path.max_joint_gap() < 1e-9;
                if clear && certified && slack >= 0.0 && ends {
                    ok += 1;
                    worst_slack = worst_slack.min(slack / d);
                } else {
                    failures.push(format!("{idx}: clear={clear} certified={certified} slack={slack:.3} ends={ends}"));
                }
            }
            Err(e) => failures.push(format!("{idx}: {e}")),
        }
    }
    outcome(
        ok == 100,
        format!(
            "{ok}/100 certified ({blocked} scenes block the bang-bang path, {escalated} needed a larger ε), min length slack {worst_slack:.3}·d_cc{}",
            if failures.is_empty() { String::new() } else { format!("; {}", failures.join("; ")) }
        ),
    )
}

fn benchmark_region() -> Box3 {
    Box3::new([-12.0, 12.0], [-12.0, 12.0], [-1.5, 1.5]).unwrap()
}

fn b0_benchmark(fine: bool) -> Outcome {
    let (hp, hm) = (HPoint::new(0.0, 0.0, 1.0), HPoint::new(0.0, 0.0, -1.0));
    let tree = build_maze(1, 1, &MazeLayout::default()).unwrap();
    let b0 = maze_level_union(&tree, 0).unwrap();
    let b1 = maze_level_union(&tree, 1).unwrap();
    let h = if fine { 0.01 } else { 0.1 };
    let g = GridSpec::new(benchmark_region(), GridSteps::uniform(h));
    let c0 = grid_pi_distance(&b0, hp, hm, &g).unwrap().cost;
    let c1 = grid_pi_distance(&b1, hp, hm, &g).unwrap().cost;
    let mut both = b0.clone();
    both.boxes.extend(b1.boxes.iter().copied());
    let c01 = grid_pi_distance(&both, hp, hm, &g).unwrap().cost;
    let hi = 20.0 + 4.0 * h;
    let ok = (20.0..=hi).contains(&c0) && (c1 - c0).abs() <= h + 1e-9 && (c01 - c0).abs() <= h + 1e-9;
    outcome(ok, format!("B0 cost {c0:.6} at step {h} (band [20, {hi}]); level-1 maze alone {c1:.6}, with B0 {c01:.6}"))
}

fn maze_gate() -> Outcome {
    let steps = GridSteps { hx: 0.1, hy: 0.1, ht: 0.001 };
    let good = build_maze(1, 1, &MazeLayout::default()).unwrap();
    let flat = build_maze(1, 1, &MazeLayout::zero_overlap()).unwrap();
    let cg = interior_crossing_cost(&good, 0, steps).unwrap().cost;
    let cf = interior_crossing_cost(&flat, 0, steps).unwrap().cost;
    outcome(cg >= 40.0 && cf < 40.0, format!("default layout {cg:.4} (gate 40), zero-overlap layout {cf:.4}"))
}

fn dimension_suite() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let square: Vec<HPoint> = (0..1_000_000)
        .map(|i| {
            let (a, b) = ((i / 1000) as f64, (i % 1000) as f64);
            HPoint::new((a + rng.gen::<f64>()) / 1000.0, (b + rng.gen::<f64>()) / 1000.0, 0.0)
        })
        .collect();
    let sq =
        box_dimension(&DimInput::Points(square), Gauge::Euclidean, &[0.5, 0.2, 0.1, 0.05, 0.02, 0.01]).unwrap().slope;
    let seg: Vec<HPoint> = (0..200_000).map(|i| HPoint::new(0.0, 0.0, i as f64 / 199_999.0)).collect();
    let vs: Vec<f64> = (0..6).map(|i| 0.5 * 10f64.powf(-1.5 * i as f64 / 5.0)).collect();
    let vert = box_dimension(&DimInput::Points(seg), Gauge::Koranyi, &vs).unwrap().slope;
    let tree = build_maze(1, 3, &MazeLayout::default()).unwrap();
    let boxes = maze_level_union(&tree, 3).unwrap().boxes;
    // dyadic in the root side, from just under the level-1 tier gap downwards
    let ms: Vec<f64> = (10..18).map(|k| 20.0 * 0.5f64.powi(k)).collect();
    let maze = box_dimension(&DimInput::Boxes(boxes), Gauge::Euclidean, &ms).unwrap().slope;
    let table = [(0.0, (0.0, 0.0)), (1.0, (1.0, 2.0)), (2.0, (2.0, 3.0)), (3.0, (4.0, 4.0))];
    let dct_ok = table.iter().all(|&(a, b)| dct_bounds(a).unwrap() == b);
    outcome(
        (sq - 2.0).abs() <= 0.1 && (vert - 2.0).abs() <= 0.2 && (1.7..=2.3).contains(&maze) && dct_ok,
        format!(
            "square {sq:.4}, vertical segment (Korányi) {vert:.4}, level-3 maze {maze:.4}, envelope table {}",
            if dct_ok { "exact" } else { "MISMATCH" }
        ),
    )
}

fn assembly_suite() -> Outcome {
    let layout = MazeLayout::default();
    let trees: Vec<_> = (1..=50).map(|n| build_maze(n, 1, &layout).unwrap()).collect();
    let a = assemble_a(&trees).unwrap();
    let mut ok = a.components.len() == 50 && a.includes_origin;
    for (i, c) in a.components.iter().enumerate() {
        let n = (i + 1) as f64;
        ok &= c.radius < 0.1 / (n * n);
        ok &= c.center == HPoint::new(0.0, 0.0, 1.0 / n);
        for d in a.components.iter().skip(i + 1) {
            ok &= cc_dist_vertical(c.center, d.center.t - c.center.t) > c.radius + d.radius;
        }
    }
    let json = serde_json::to_string(&a).unwrap();
    let back: AssembledSet = serde_json::from_str(&json).unwrap();
    let bits = |s: &AssembledSet| -> Vec<u64> {
        s.components
            .iter()
            .flat_map(|c| {
                let mut v = vec![c.radius.to_bits(), c.scale.to_bits(), c.center.t.to_bits()];
                for n in c.tree.nodes.iter().flatten() {
                    v.extend(n.bbox.x.iter().chain(&n.bbox.y).chain(&n.bbox.t).map(|f| f.to_bits()));
                }
                v
            })
            .collect()
    };
    let round = bits(&a) == bits(&back) && serde_json::to_string(&back).unwrap() == json;
    outcome(ok && round, format!("50 components, disjoint balls {ok}, bit-exact round trip {round}"))
}

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let slow = args.iter().any(|a| a == "--ignored" || a == "--include-ignored")
        || std::env::var("HEISGEO_SLOW").is_ok_and(|v| v == "1");
    if args.iter().any(|a| a == "--list") {
        return;
    }
    let secs = Duration::from_secs;
    let mut all = true;
    all &= run("1", "bang-bang bound", secs(30), bang_bang_bound);
    all &= run("2", "vertical distance", secs(1), vertical_distance);
    all &= run("3", "metric properties", secs(60), metric_properties);
    all &= run("4", "vertical geodesic", secs(5), vertical_geodesic_check);
    all &= run("5", "planner suite", secs(120), planner_suite);
    all &= run("6", "box benchmark, step 0.1", secs(60), || b0_benchmark(false));
    if slow {
        all &= run("6", "box benchmark, step 0.01", secs(900), || b0_benchmark(true));
    } else {
        println!("SKIP [6] box benchmark, step 0.01: slow, run with --ignored");
    }
    all &= run("7", "maze gate", secs(120), maze_gate);
    all &= run("8", "dimension suite", secs(120), dimension_suite);
    all &= run("9", "assembly suite", secs(10), assembly_suite);
    if !all {
        std::process::exit(1);
    }
}
