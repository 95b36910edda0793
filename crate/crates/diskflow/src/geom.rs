//! Small planar geometry helpers shared by every module.
//!
//! Angles are kept in *turns* (multiples of a full revolution) everywhere
//! outside of trigonometric evaluation, so that deck transformations and
//! winding counts stay integer-exact.

use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;
use std::ops::{Add, Mul, Neg, Sub};

/// A point (or vector) of the Euclidean plane.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Vec2 {
    pub x: f64,
    pub y: f64,
}

impl Vec2 {
    pub const ZERO: Vec2 = Vec2 { x: 0.0, y: 0.0 };

    pub fn new(x: f64, y: f64) -> Self {
        Vec2 { x, y }
    }

    /// Point at `radius` and angle `turns` measured counterclockwise from
    /// the positive x-axis.
    pub fn from_polar(radius: f64, turns: f64) -> Self {
        let (s, c) = (TAU * turns).sin_cos();
        Vec2::new(radius * c, radius * s)
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn norm_sq(self) -> f64 {
        self.x * self.x + self.y * self.y
    }

    pub fn dot(self, o: Vec2) -> f64 {
        self.x * o.x + self.y * o.y
    }

    pub fn cross(self, o: Vec2) -> f64 {
        self.x * o.y - self.y * o.x
    }

    /// Angle in turns, in `(-1/2, 1/2]`.
    pub fn angle_turns(self) -> f64 {
        self.y.atan2(self.x) / TAU
    }

    /// Rotation by `turns` about the origin.
    pub fn rotated(self, turns: f64) -> Self {
        let (s, c) = (TAU * turns).sin_cos();
        Vec2::new(self.x * c - self.y * s, self.x * s + self.y * c)
    }

    /// The complex-structure map `J(x, y) = (-y, x)`.
    pub fn j(self) -> Self {
        Vec2::new(-self.y, self.x)
    }
}

impl Add for Vec2 {
    type Output = Vec2;
    fn add(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x + o.x, self.y + o.y)
    }
}

impl Sub for Vec2 {
    type Output = Vec2;
    fn sub(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x - o.x, self.y - o.y)
    }
}

impl Mul<f64> for Vec2 {
    type Output = Vec2;
    fn mul(self, s: f64) -> Vec2 {
        Vec2::new(self.x * s, self.y * s)
    }
}

impl Neg for Vec2 {
    type Output = Vec2;
    fn neg(self) -> Vec2 {
        Vec2::new(-self.x, -self.y)
    }
}

/// A point of the universal cover of the punctured disk, in coordinates
/// `(ell, rho)` where `ell` is the lifted angle in turns and `rho > 0` the
/// radius. The deck transformation is `ell -> ell + 1`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoverPoint {
    pub ell: f64,
    pub rho: f64,
}

impl CoverPoint {
    pub fn new(ell: f64, rho: f64) -> Self {
        CoverPoint { ell, rho }
    }

    /// Deck transformation `T^k`.
    pub fn deck(self, k: i64) -> Self {
        CoverPoint::new(self.ell + k as f64, self.rho)
    }

    /// Projection to the punctured plane.
    pub fn project(self) -> Vec2 {
        Vec2::from_polar(self.rho, self.ell)
    }

    /// The lift of `z` whose angle lies in `[0, 1)`.
    pub fn base_lift(z: Vec2) -> Result<Self, crate::Error> {
        let rho = z.norm();
        if rho == 0.0 {
            return Err(crate::Error::Domain(
                "the puncture has no cover point".into(),
            ));
        }
        let mut ell = z.angle_turns();
        if ell < 0.0 {
            ell += 1.0;
        }
        Ok(CoverPoint::new(ell, rho))
    }

    /// The lift of `z` nearest in angle to the reference lift `near`.
    pub fn lift_near(z: Vec2, near: CoverPoint) -> Result<Self, crate::Error> {
        let rho = z.norm();
        if rho == 0.0 {
            return Err(crate::Error::Domain(
                "the puncture has no cover point".into(),
            ));
        }
        let raw = z.angle_turns();
        let ell = raw + (near.ell - raw).round();
        Ok(CoverPoint::new(ell, rho))
    }
}

/// Wrap a turn count to `(-1/2, 1/2]`.
pub fn wrap_half(turns: f64) -> f64 {
    let w = turns - turns.round();
    if w <= -0.5 {
        w + 1.0
    } else {
        w
    }
}

/// Signed area of a polygon given by its vertices.
pub fn polygon_area(pts: &[Vec2]) -> f64 {
    let n = pts.len();
    let mut twice = 0.0;
    for i in 0..n {
        twice += pts[i].cross(pts[(i + 1) % n]);
    }
    twice / 2.0
}
