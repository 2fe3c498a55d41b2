//! Heisenberg group arithmetic in exponential coordinates.
//!
//! The group law is `(x,y,t)*(x',y',t') = (x+x', y+y', t+t'+2(x'y-xy'))`.
//! The identity is the origin and inverses are coordinate negation.

use serde::{Deserialize, Serialize};
use std::fmt;

use crate::error::{Error, Result};

/// A point `(x, y, t)` of the Heisenberg group.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct HPoint {
    pub x: f64,
    pub y: f64,
    pub t: f64,
}

/// A point of the `xy`-plane, the codomain of [`proj_t`].
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct PlanarPoint {
    pub x: f64,
    pub y: f64,
}

impl HPoint {
    pub const ORIGIN: HPoint = HPoint { x: 0.0, y: 0.0, t: 0.0 };

    pub const fn new(x: f64, y: f64, t: f64) -> Self {
        HPoint { x, y, t }
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.t.is_finite()
    }

    /// Group product `self * other`.
    #[inline]
    pub fn mul(&self, other: &HPoint) -> HPoint {
        mul(*self, *other)
    }

    #[inline]
    pub fn inv(&self) -> HPoint {
        inv(*self)
    }

    /// Korányi gauge `((x²+y²)²+t²)^{1/4}`.
    #[inline]
    pub fn gauge(&self) -> f64 {
        koranyi_norm(*self)
    }

    pub fn planar(&self) -> PlanarPoint {
        proj_t(*self)
    }
}

impl fmt::Display for HPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {})", self.x, self.y, self.t)
    }
}

impl PlanarPoint {
    pub const fn new(x: f64, y: f64) -> Self {
        PlanarPoint { x, y }
    }

    pub fn dist(&self, other: &PlanarPoint) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

#[inline]
pub fn mul(p: HPoint, q: HPoint) -> HPoint {
    HPoint { x: p.x + q.x, y: p.y + q.y, t: p.t + q.t + 2.0 * (q.x * p.y - p.x * q.y) }
}

#[inline]
pub fn inv(p: HPoint) -> HPoint {
    HPoint { x: -p.x, y: -p.y, t: -p.t }
}

/// Heisenberg dilation `δ_r(x,y,t) = (rx, ry, r²t)`.
pub fn dilate(r: f64, p: HPoint) -> Result<HPoint> {
    if r.is_nan() || r <= 0.0 || r.is_infinite() {
        return Err(Error::InvalidParameter(format!("dilation factor must be a positive finite real, got {r}")));
    }
    Ok(HPoint { x: r * p.x, y: r * p.y, t: r * r * p.t })
}

/// Rotation of the `xy`-plane by `theta` radians, fixing `t`.
pub fn rotate(theta: f64, p: HPoint) -> HPoint {
    let (s, c) = theta.sin_cos();
    HPoint { x: p.x * c - p.y * s, y: p.x * s + p.y * c, t: p.t }
}

/// `π_x(p) = p * (-x, 0, 0) = (0, y, t - 2xy)`.
pub fn proj_x(p: HPoint) -> HPoint {
    HPoint { x: 0.0, y: p.y, t: p.t - 2.0 * p.x * p.y }
}

/// `π_y(p) = p * (0, -y, 0) = (x, 0, t + 2xy)`.
pub fn proj_y(p: HPoint) -> HPoint {
    HPoint { x: p.x, y: 0.0, t: p.t + 2.0 * p.x * p.y }
}

pub fn proj_t(p: HPoint) -> PlanarPoint {
    PlanarPoint { x: p.x, y: p.y }
}

#[inline]
pub fn koranyi_norm(p: HPoint) -> f64 {
    let r2 = p.x * p.x + p.y * p.y;
    (r2 * r2 + p.t * p.t).sqrt().sqrt()
}

/// Left-invariant Korányi distance `‖p⁻¹ * q‖`.
#[inline]
pub fn koranyi_dist(p: HPoint, q: HPoint) -> f64 {
    koranyi_norm(mul(inv(p), q))
}
