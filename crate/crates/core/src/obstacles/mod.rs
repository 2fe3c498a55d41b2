//! Closed obstacle sets built from axis boxes and Korányi balls, with exact
//! membership and segment predicates.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::group::{inv, koranyi_dist, mul, HPoint};
use crate::paths::{Axis, AxisSegment};

mod maze;

pub use maze::{
    assemble_a, build_maze, maze_level_union, AssembledSet, Component, Corner, MazeLayout, MazeNode, MazeTree,
};

/// Closed coordinate box `[x0,x1]×[y0,y1]×[t0,t1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Box3 {
    pub x: [f64; 2],
    pub y: [f64; 2],
    pub t: [f64; 2],
}

impl Box3 {
    pub fn new(x: [f64; 2], y: [f64; 2], t: [f64; 2]) -> Result<Self> {
        let b = Box3 { x, y, t };
        b.validate()?;
        Ok(b)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, iv) in [("x", self.x), ("y", self.y), ("t", self.t)] {
            if !(iv[0].is_finite() && iv[1].is_finite()) {
                return Err(Error::InvalidInput(format!("box {name}-interval is not finite")));
            }
            if iv[0] > iv[1] {
                return Err(Error::InvalidInput(format!("box {name}-interval [{}, {}] is reversed", iv[0], iv[1])));
            }
        }
        Ok(())
    }

    pub fn contains(&self, p: HPoint) -> bool {
        within(p.x, self.x) && within(p.y, self.y) && within(p.t, self.t)
    }

    /// Euclidean diameter in coordinates.
    pub fn diameter(&self) -> f64 {
        let dx = self.x[1] - self.x[0];
        let dy = self.y[1] - self.y[0];
        let dt = self.t[1] - self.t[0];
        (dx * dx + dy * dy + dt * dt).sqrt()
    }

    pub fn center(&self) -> HPoint {
        HPoint::new(0.5 * (self.x[0] + self.x[1]), 0.5 * (self.y[0] + self.y[1]), 0.5 * (self.t[0] + self.t[1]))
    }

    /// Closed boxes intersect.
    pub fn intersects(&self, other: &Box3) -> bool {
        overlaps(self.x, other.x) && overlaps(self.y, other.y) && overlaps(self.t, other.t)
    }

    /// Largest `|x|` and `|y|` over the box.
    fn max_abs_xy(&self) -> (f64, f64) {
        (self.x[0].abs().max(self.x[1].abs()), self.y[0].abs().max(self.y[1].abs()))
    }

    /// Axis box containing every point within Korányi distance `m` of this box.
    pub fn koranyi_inflated(&self, m: f64) -> Box3 {
        if m <= 0.0 {
            return *self;
        }
        let (ax, ay) = self.max_abs_xy();
        // b*g with gauge(g) <= m moves t by at most m² + 2m(|bx|+|by|)
        let mt = m * m + 2.0 * m * (ax + ay);
        Box3 {
            x: [self.x[0] - m, self.x[1] + m],
            y: [self.y[0] - m, self.y[1] + m],
            t: [self.t[0] - mt, self.t[1] + mt],
        }
    }

    /// Image under the dilation `δ_r`, `r > 0`.
    pub fn dilated(&self, r: f64) -> Box3 {
        let r2 = r * r;
        Box3 {
            x: [r * self.x[0], r * self.x[1]],
            y: [r * self.y[0], r * self.y[1]],
            t: [r2 * self.t[0], r2 * self.t[1]],
        }
    }

    /// Image under a left translation by `(0,0,s)`, which is a pure shift in `t`.
    pub fn shifted_t(&self, s: f64) -> Box3 {
        Box3 { t: [self.t[0] + s, self.t[1] + s], ..*self }
    }
}

#[inline]
fn within(v: f64, iv: [f64; 2]) -> bool {
    iv[0] <= v && v <= iv[1]
}

#[inline]
fn overlaps(a: [f64; 2], b: [f64; 2]) -> bool {
    a[0] <= b[1] && b[0] <= a[1]
}

/// Closed Korányi ball `{p : |c⁻¹p|_K <= r}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KoranyiBall {
    pub center: HPoint,
    pub radius: f64,
}

impl KoranyiBall {
    pub fn new(center: HPoint, radius: f64) -> Result<Self> {
        let b = KoranyiBall { center, radius };
        b.validate()?;
        Ok(b)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.center.is_finite() {
            return Err(Error::InvalidInput("ball center is not finite".into()));
        }
        if !(self.radius > 0.0 && self.radius.is_finite()) {
            return Err(Error::InvalidInput(format!("ball radius {} must be positive", self.radius)));
        }
        Ok(())
    }

    pub fn contains(&self, p: HPoint) -> bool {
        koranyi_dist(self.center, p) <= self.radius
    }
}

/// Closed union of boxes and balls.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ObstacleSet {
    #[serde(default)]
    pub boxes: Vec<Box3>,
    #[serde(default)]
    pub balls: Vec<KoranyiBall>,
}

impl ObstacleSet {
    pub fn new(boxes: Vec<Box3>, balls: Vec<KoranyiBall>) -> Self {
        ObstacleSet { boxes, balls }
    }

    pub fn from_boxes(boxes: Vec<Box3>) -> Self {
        ObstacleSet { boxes, balls: Vec::new() }
    }

    pub fn is_empty(&self) -> bool {
        self.boxes.is_empty() && self.balls.is_empty()
    }

    pub fn len(&self) -> usize {
        self.boxes.len() + self.balls.len()
    }

    pub fn validate(&self) -> Result<()> {
        self.boxes.iter().try_for_each(Box3::validate)?;
        self.balls.iter().try_for_each(KoranyiBall::validate)
    }

    pub fn contains(&self, p: HPoint) -> bool {
        self.boxes.iter().any(|b| b.contains(p)) || self.balls.iter().any(|b| b.contains(p))
    }

    /// Segment misses every primitive inflated by the Korányi `margin`.
    ///
    /// Boxes are tested exactly by intersecting parameter intervals; with a
    /// positive margin the box is replaced by an axis box containing its
    /// Korányi neighbourhood, so `true` is always trustworthy.
    pub fn segment_clear(&self, seg: &AxisSegment, margin: f64) -> bool {
        let m = margin.max(0.0);
        self.boxes.iter().all(|b| !segment_hits_box(seg, &b.koranyi_inflated(m)))
            && self.balls.iter().all(|b| !segment_hits_ball(seg, b, m))
    }

    /// Largest margin (up to `cap`) at which `seg` stays clear, or `None` for an empty set.
    /// Returns 0 when the segment already touches an obstacle.
    pub fn segment_clearance(&self, seg: &AxisSegment, cap: f64) -> Option<f64> {
        if self.is_empty() {
            return None;
        }
        if !self.segment_clear(seg, 0.0) {
            return Some(0.0);
        }
        if self.segment_clear(seg, cap) {
            return Some(cap);
        }
        Some(bisect_largest(0.0, cap, |m| self.segment_clear(seg, m)))
    }

    /// A radius `r` (up to `cap`) such that the closed Korányi ball `B(p, r)`
    /// misses the set. Boxes are handled conservatively.
    pub fn clear_radius(&self, p: HPoint, cap: f64) -> f64 {
        let mut r = cap;
        for b in &self.balls {
            r = r.min(koranyi_dist(b.center, p) - b.radius);
        }
        if r <= 0.0 {
            return 0.0;
        }
        let hits = |rad: f64| self.boxes.iter().any(|b| point_ball_hits_box(p, rad, b));
        if !hits(r) {
            return r;
        }
        if hits(0.0) {
            return 0.0;
        }
        bisect_largest(0.0, r, |rad| !hits(rad))
    }
}

/// Largest `x` in `[lo, hi]` (to bisection precision) with `ok(x)`; `ok(lo)` is assumed.
fn bisect_largest(mut lo: f64, mut hi: f64, ok: impl Fn(f64) -> bool) -> f64 {
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if ok(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

/// The Korányi ball around `p` is inside this axis box, which is tested against `b`.
fn point_ball_hits_box(p: HPoint, r: f64, b: &Box3) -> bool {
    let mt = r * r + 2.0 * r * (p.x.abs() + p.y.abs());
    let hull = Box3 { x: [p.x - r, p.x + r], y: [p.y - r, p.y + r], t: [p.t - mt, p.t + mt] };
    hull.intersects(b)
}

/// Parameter range `{s : lo <= a + k s <= hi}` intersected with `[s0, s1]`.
fn clip_linear(a: f64, k: f64, lo: f64, hi: f64, s0: f64, s1: f64) -> Option<(f64, f64)> {
    if k == 0.0 {
        return if lo <= a && a <= hi { Some((s0, s1)) } else { None };
    }
    let (mut u, mut v) = ((lo - a) / k, (hi - a) / k);
    if u > v {
        std::mem::swap(&mut u, &mut v);
    }
    let (l, r) = (s0.max(u), s1.min(v));
    if l <= r {
        Some((l, r))
    } else {
        None
    }
}

/// Exact closed intersection of a horizontal axis segment with a box.
pub fn segment_hits_box(seg: &AxisSegment, b: &Box3) -> bool {
    let p = seg.start;
    let d = seg.displacement;
    let (s0, s1) = if d >= 0.0 { (0.0, d) } else { (d, 0.0) };
    // X: (x0+s, y0, t0+2y0 s); Y: (x0, y0+s, t0-2x0 s)
    let (along, fixed, fixed_iv, along_iv, kt) = match seg.axis {
        Axis::X => (p.x, p.y, b.y, b.x, 2.0 * p.y),
        Axis::Y => (p.y, p.x, b.x, b.y, -2.0 * p.x),
    };
    if !within(fixed, fixed_iv) {
        return false;
    }
    let Some((l, r)) = clip_linear(along, 1.0, along_iv[0], along_iv[1], s0, s1) else {
        return false;
    };
    clip_linear(p.t, kt, b.t[0], b.t[1], l, r).is_some()
}

/// Minimum over the segment of the fourth power of the Korányi distance to `c`.
///
/// With `w = c⁻¹ * start` the quartic `f(s) = (|P + s e|²)² + (w_t + k s)²`
/// is convex in `s`, so its minimum is at an endpoint or at the root of `f'`.
pub fn min_gauge4_on_segment(seg: &AxisSegment, c: HPoint) -> f64 {
    let w = mul(inv(c), seg.start);
    let (beta, k) = match seg.axis {
        Axis::X => (w.x, 2.0 * w.y),
        Axis::Y => (w.y, -2.0 * w.x),
    };
    let gamma = w.x * w.x + w.y * w.y;
    let f = |s: f64| {
        let a = s * s + 2.0 * beta * s + gamma;
        let l = w.t + k * s;
        a * a + l * l
    };
    let df = |s: f64| {
        4.0 * s * s * s
            + 12.0 * beta * s * s
            + (4.0 * gamma + 8.0 * beta * beta + 2.0 * k * k) * s
            + (4.0 * beta * gamma + 2.0 * k * w.t)
    };
    let d = seg.displacement;
    let (mut lo, mut hi) = if d >= 0.0 { (0.0, d) } else { (d, 0.0) };
    let mut best = f(lo).min(f(hi));
    if df(lo) < 0.0 && df(hi) > 0.0 {
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if df(mid) < 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        best = best.min(f(lo)).min(f(hi));
    }
    best
}

fn segment_hits_ball(seg: &AxisSegment, b: &KoranyiBall, margin: f64) -> bool {
    let r = b.radius + margin;
    min_gauge4_on_segment(seg, b.center) <= r * r * r * r
}
