//! Carnot–Carathéodory distance and geodesics.
//!
//! Geodesics from the origin are horizontal lifts of circular arcs (or of a
//! straight segment when `t = 0`). For a target `(x, y, t)` at planar distance
//! `r > 0`, an arc subtending the central angle `φ ∈ [0, 2π)` encloses, together
//! with its chord, the area `r²(φ - sin φ) / (8 sin²(φ/2))`. Horizontality
//! (`dt = 2y dx - 2x dy`) turns that area into `|t| / 4`, which gives the
//! monotone scalar equation
//!
//! ```text
//! (φ - sin φ) / (2 sin²(φ/2)) = |t| / r²
//! ```
//!
//! solved here by bisection. The distance is then the arc length
//! `r φ / (2 sin(φ/2)) = sqrt(|t| φ² / (2(φ - sin φ)))`.

use serde::{Deserialize, Serialize};
use std::f64::consts::{PI, TAU};

use crate::error::{Error, Result};
use crate::group::{inv, mul, HPoint};

/// Default absolute/relative tolerance for [`cc_dist`].
pub const DEFAULT_TOL: f64 = 1e-8;

const MAX_ITERATIONS: usize = 200;

/// Closed form for vertically separated points `p` and `p * (0, 0, dt)`.
pub fn cc_dist_vertical(_p: HPoint, dt: f64) -> f64 {
    (PI * dt.abs()).sqrt()
}

/// `φ - sin φ`, accurate for small `φ`.
fn phi_minus_sin(phi: f64) -> f64 {
    if phi.abs() < 0.5 {
        // alternating Taylor series, terms up to φ^17
        let p2 = phi * phi;
        let mut term = phi * p2 / 6.0;
        let mut sum = term;
        let mut k = 2.0;
        for _ in 0..7 {
            term *= -p2 / ((2.0 * k) * (2.0 * k + 1.0));
            sum += term;
            k += 1.0;
        }
        sum
    } else {
        phi - phi.sin()
    }
}

/// Left side of the arc-angle equation; increasing from 0 to +∞ on `[0, 2π)`.
fn area_ratio(phi: f64) -> f64 {
    let s = (0.5 * phi).sin();
    phi_minus_sin(phi) / (2.0 * s * s)
}

/// Arc angle `φ` for a target with planar distance `r > 0` and `|t| = abs_t`.
fn solve_arc_angle(r: f64, abs_t: f64) -> Result<f64> {
    if abs_t == 0.0 {
        return Ok(0.0);
    }
    let target = abs_t / (r * r);
    if !target.is_finite() {
        return Err(Error::NumericFailure {
            message: format!("arc-angle equation has non-finite right side (r={r}, |t|={abs_t})"),
            iterations: 0,
        });
    }
    let (mut lo, mut hi) = (0.0_f64, TAU);
    for _ in 0..MAX_ITERATIONS {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            return Ok(mid);
        }
        let v = area_ratio(mid);
        if v.is_nan() {
            return Err(Error::NumericFailure {
                message: format!("NaN while evaluating the arc-angle equation at φ={mid}"),
                iterations: 0,
            });
        }
        if v < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Err(Error::NumericFailure {
        message: format!("bisection did not reach machine precision; bracket [{lo}, {hi}]"),
        iterations: MAX_ITERATIONS,
    })
}

/// Radius of the planar circle carrying the geodesic.
fn arc_radius(r: f64, abs_t: f64, phi: f64) -> f64 {
    if phi > PI {
        (abs_t / (2.0 * phi_minus_sin(phi))).sqrt()
    } else {
        r / (2.0 * (0.5 * phi).sin())
    }
}

/// cc-distance from the origin.
pub fn cc_norm(p: HPoint, tol: f64) -> Result<f64> {
    if tol.is_nan() || tol <= 0.0 {
        return Err(Error::InvalidParameter(format!("tolerance must be positive, got {tol}")));
    }
    if !p.is_finite() {
        return Err(Error::NumericFailure { message: format!("non-finite point {p}"), iterations: 0 });
    }
    let r = p.x.hypot(p.y);
    let abs_t = p.t.abs();
    if r == 0.0 {
        return Ok((PI * abs_t).sqrt());
    }
    if abs_t == 0.0 {
        return Ok(r);
    }
    let phi = solve_arc_angle(r, abs_t)?;
    if phi > PI {
        Ok((abs_t * phi * phi / (2.0 * phi_minus_sin(phi))).sqrt())
    } else {
        Ok(r * phi / (2.0 * (0.5 * phi).sin()))
    }
}

/// Carnot–Carathéodory distance between `p` and `q`.
pub fn cc_dist(p: HPoint, q: HPoint, tol: f64) -> Result<f64> {
    if p == q {
        if tol.is_nan() || tol <= 0.0 {
            return Err(Error::InvalidParameter(format!("tolerance must be positive, got {tol}")));
        }
        return Ok(0.0);
    }
    cc_norm(mul(inv(p), q), tol)
}

/// A sampled cc-geodesic.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeodesicArc {
    pub start: HPoint,
    pub end: HPoint,
    /// Rotation about the vertical line through `start`; meaningful for vertical pairs.
    pub rotation_parameter: f64,
    /// Exact cc-length of the arc.
    pub length: f64,
    pub samples: Vec<HPoint>,
}

impl GeodesicArc {
    /// Length of the planar projection of the sample polyline.
    pub fn polyline_length(&self) -> f64 {
        self.samples.windows(2).map(|w| (w[1].x - w[0].x).hypot(w[1].y - w[0].y)).sum()
    }
}

/// Samples of the lift, starting at the origin, of a circular arc of radius
/// `radius` and central angle `phi`, with initial heading `heading`.
/// `clockwise` arcs gain `t`; counter-clockwise arcs lose it.
fn lifted_arc(heading: f64, radius: f64, phi: f64, clockwise: bool, n: usize) -> Vec<HPoint> {
    let sigma = if clockwise { 1.0 } else { -1.0 };
    // angular position of the start point on the circle, seen from the center
    let psi0 = heading + sigma * 0.5 * PI;
    let (cx, cy) = (-radius * psi0.cos(), -radius * psi0.sin());
    let (s0, c0) = psi0.sin_cos();
    (0..n)
        .map(|k| {
            let dpsi = -sigma * phi * (k as f64) / ((n - 1) as f64);
            let psi = psi0 + dpsi;
            let (s, c) = psi.sin_cos();
            let x = cx + radius * c;
            let y = cy + radius * s;
            // t = 2 ∫ (y dx - x dy) along the circle
            let t = -2.0 * (radius * radius * dpsi + radius * (cx * (s - s0) - cy * (c - c0)));
            HPoint::new(x, y, t)
        })
        .collect()
}

/// One member of the rotation family of geodesics from `p` to `p * (0, 0, dt)`.
pub fn vertical_geodesic(p: HPoint, dt: f64, theta: f64, n_samples: usize) -> Result<GeodesicArc> {
    if n_samples < 2 {
        return Err(Error::InvalidParameter(format!("need at least 2 samples, got {n_samples}")));
    }
    let end = mul(p, HPoint::new(0.0, 0.0, dt));
    if dt == 0.0 {
        return Ok(GeodesicArc { start: p, end, rotation_parameter: theta, length: 0.0, samples: vec![p; n_samples] });
    }
    let radius = (dt.abs() / (4.0 * PI)).sqrt();
    let mut samples = lifted_arc(theta, radius, TAU, dt > 0.0, n_samples);
    for s in samples.iter_mut() {
        *s = mul(p, *s);
    }
    Ok(GeodesicArc { start: p, end, rotation_parameter: theta, length: cc_dist_vertical(p, dt), samples })
}

/// The cc-geodesic from `p` to `q` (for vertical pairs, the `θ = 0` member).
pub fn geodesic(p: HPoint, q: HPoint, n_samples: usize) -> Result<GeodesicArc> {
    if n_samples < 2 {
        return Err(Error::InvalidParameter(format!("need at least 2 samples, got {n_samples}")));
    }
    let w = mul(inv(p), q);
    let r = w.x.hypot(w.y);
    if r == 0.0 {
        return vertical_geodesic(p, w.t, 0.0, n_samples);
    }
    let length = cc_norm(w, DEFAULT_TOL)?;
    let chord = w.y.atan2(w.x);
    let samples: Vec<HPoint> = if w.t == 0.0 {
        (0..n_samples)
            .map(|k| {
                let s = k as f64 / (n_samples - 1) as f64;
                HPoint::new(s * w.x, s * w.y, 0.0)
            })
            .collect()
    } else {
        let phi = solve_arc_angle(r, w.t.abs())?;
        let radius = arc_radius(r, w.t.abs(), phi);
        let clockwise = w.t > 0.0;
        let heading = if clockwise { chord + 0.5 * phi } else { chord - 0.5 * phi };
        lifted_arc(heading, radius, phi, clockwise, n_samples)
    };
    Ok(GeodesicArc {
        start: p,
        end: q,
        rotation_parameter: 0.0,
        length,
        samples: samples.into_iter().map(|s| mul(p, s)).collect(),
    })
}
