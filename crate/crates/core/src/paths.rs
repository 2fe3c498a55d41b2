//! Horizontal bang-bang paths built from X- and Y-line segments.

use serde::{Deserialize, Serialize};

use crate::group::{inv, mul, HPoint};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Axis {
    X,
    Y,
}

/// A horizontal segment following `X` or `Y` for a signed control integral.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AxisSegment {
    pub axis: Axis,
    pub start: HPoint,
    pub displacement: f64,
}

impl AxisSegment {
    pub fn new(axis: Axis, start: HPoint, displacement: f64) -> Self {
        AxisSegment { axis, start, displacement }
    }

    /// The group element `(s,0,0)` or `(0,s,0)`.
    pub fn step(axis: Axis, s: f64) -> HPoint {
        match axis {
            Axis::X => HPoint::new(s, 0.0, 0.0),
            Axis::Y => HPoint::new(0.0, s, 0.0),
        }
    }

    /// Point reached after the control integral `s`, i.e. `start * step(s)`.
    pub fn point_at(&self, s: f64) -> HPoint {
        mul(self.start, Self::step(self.axis, s))
    }

    pub fn end(&self) -> HPoint {
        self.point_at(self.displacement)
    }

    pub fn cc_length(&self) -> f64 {
        self.displacement.abs()
    }

    /// Same segment, left-translated so that it starts at `start`.
    pub fn translated_to(&self, start: HPoint) -> AxisSegment {
        AxisSegment { start, ..*self }
    }
}

/// Concatenation of axis segments with matching endpoints.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct BangBangPath {
    pub segments: Vec<AxisSegment>,
}

impl BangBangPath {
    pub fn new(segments: Vec<AxisSegment>) -> Self {
        BangBangPath { segments }
    }

    pub fn start(&self) -> Option<HPoint> {
        self.segments.first().map(|s| s.start)
    }

    pub fn end(&self) -> Option<HPoint> {
        self.segments.last().map(|s| s.end())
    }

    /// Start point followed by every segment end.
    pub fn waypoints(&self) -> Vec<HPoint> {
        let mut pts = Vec::with_capacity(self.segments.len() + 1);
        if let Some(first) = self.segments.first() {
            pts.push(first.start);
        }
        pts.extend(self.segments.iter().map(|s| s.end()));
        pts
    }

    /// Largest mismatch between a segment end and the next segment start.
    pub fn max_joint_gap(&self) -> f64 {
        self.segments
            .windows(2)
            .map(|w| {
                let e = w[0].end();
                let s = w[1].start;
                (e.x - s.x).abs().max((e.y - s.y).abs()).max((e.t - s.t).abs())
            })
            .fold(0.0, f64::max)
    }
}

/// Sum of the absolute control integrals.
pub fn cc_length(path: &BangBangPath) -> f64 {
    path.segments.iter().map(AxisSegment::cc_length).sum()
}

/// The four controls of the X, Y, X, Y construction.
///
/// Starting from the origin the waypoints are `(a,0,0)`, `(a,b,-2ab)`, then the
/// right translations by `(-c,0,0)` and `(0,-d,0)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BangBangParams {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
}

impl BangBangParams {
    /// Controls joining the origin to `target`.
    pub fn for_target(target: HPoint) -> Self {
        let HPoint { x, y, t } = target;
        let k = t + 2.0 * x * y;
        if k.abs() < 1e-300 {
            return BangBangParams { a: x, b: y, c: 0.0, d: 0.0 };
        }
        let mag = (0.5 * k).abs().sqrt();
        let b = if k > 0.0 { mag } else { -mag };
        let a = x - k / (4.0 * b);
        BangBangParams { a, b, c: a - x, d: b - y }
    }

    /// Signed displacements of the four segments: `a, b, -c, -d`.
    pub fn displacements(&self) -> [f64; 4] {
        [self.a, self.b, -self.c, -self.d]
    }

    pub fn cc_length(&self) -> f64 {
        self.a.abs() + self.b.abs() + self.c.abs() + self.d.abs()
    }

    /// Path starting at `start` with these controls.
    pub fn path_from(&self, start: HPoint) -> BangBangPath {
        let axes = [Axis::X, Axis::Y, Axis::X, Axis::Y];
        let mut cur = start;
        let segments = axes
            .iter()
            .zip(self.displacements())
            .map(|(&axis, disp)| {
                let seg = AxisSegment::new(axis, cur, disp);
                cur = seg.end();
                seg
            })
            .collect();
        BangBangPath { segments }
    }
}

/// Four-segment bang-bang path from `p` to `q` (X, Y, X, Y).
pub fn bang_bang(p: HPoint, q: HPoint) -> BangBangPath {
    bang_bang_with_params(p, q).0
}

pub fn bang_bang_with_params(p: HPoint, q: HPoint) -> (BangBangPath, BangBangParams) {
    let params = BangBangParams::for_target(mul(inv(p), q));
    (params.path_from(p), params)
}

/// A general polyline in `H` (not necessarily horizontal).
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Polyline3 {
    pub vertices: Vec<HPoint>,
}

impl Polyline3 {
    pub fn new(vertices: Vec<HPoint>) -> Self {
        Polyline3 { vertices }
    }

    /// Euclidean length of the planar projection.
    pub fn planar_length(&self) -> f64 {
        self.vertices.windows(2).map(|w| (w[1].x - w[0].x).hypot(w[1].y - w[0].y)).sum()
    }
}

/// Taxicab length of the planar projection; vertical motion is free.
pub fn pi_t_length(curve: &Polyline3) -> f64 {
    curve.vertices.windows(2).map(|w| (w[1].x - w[0].x).abs() + (w[1].y - w[0].y).abs()).sum()
}

/// Samples every segment at `samples_per_segment` equal steps of the control.
/// Values below 1 are treated as 1.
pub fn as_polyline(path: &BangBangPath, samples_per_segment: usize) -> Polyline3 {
    let k = samples_per_segment.max(1);
    let mut vertices = Vec::with_capacity(path.segments.len() * k + 1);
    if let Some(first) = path.segments.first() {
        vertices.push(first.start);
    }
    for seg in &path.segments {
        for i in 1..=k {
            let v = if i == k { seg.end() } else { seg.point_at(seg.displacement * i as f64 / k as f64) };
            vertices.push(v);
        }
    }
    Polyline3 { vertices }
}
