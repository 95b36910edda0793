//! Radial rotation profiles, in turns as a function of radius.

use crate::{Error, Result};
use serde::{Deserialize, Serialize};

/// A rotation amount (turns) depending on the radius only.
///
/// Moments of the profile are available in closed form; they drive the
/// generating values of polar factors and the closed-form invariants.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum RadialTurns {
    /// Rigid rotation by a fixed number of turns.
    Const(f64),
    /// The band profile: `alpha` up to radius 1, then `alpha + r - 1`
    /// until it reaches `beta`, then `beta`.
    Band { alpha: f64, beta: f64 },
    /// A profile multiplied by a constant factor (per-factor splitting).
    Scaled { inner: Box<RadialTurns>, factor: f64 },
}

impl RadialTurns {
    /// Rotation in turns at radius `r`.
    pub fn turns(&self, r: f64) -> f64 {
        match self {
            RadialTurns::Const(c) => *c,
            RadialTurns::Band { alpha, beta } => (*alpha + r - 1.0).clamp(*alpha, *beta),
            RadialTurns::Scaled { inner, factor } => factor * inner.turns(r),
        }
    }

    /// Radial derivative of [`Self::turns`] (one-sided at the break radii).
    pub fn dturns(&self, r: f64) -> f64 {
        match self {
            RadialTurns::Const(_) => 0.0,
            RadialTurns::Band { alpha, beta } => {
                if r > 1.0 && r < 1.0 + beta - alpha {
                    1.0
                } else {
                    0.0
                }
            }
            RadialTurns::Scaled { inner, factor } => factor * inner.dturns(r),
        }
    }

    /// `∫_0^r ρ ω(ρ) dρ` in closed form.
    pub fn moment1(&self, r: f64) -> f64 {
        match self {
            RadialTurns::Const(c) => c * r * r / 2.0,
            RadialTurns::Band { alpha, beta } => {
                let rb = 1.0 + beta - alpha;
                let mut acc = alpha * r.min(1.0).powi(2) / 2.0;
                if r > 1.0 {
                    let u = r.min(rb);
                    acc += (alpha - 1.0) * (u * u - 1.0) / 2.0 + (u.powi(3) - 1.0) / 3.0;
                }
                if r > rb {
                    acc += beta * (r * r - rb * rb) / 2.0;
                }
                acc
            }
            RadialTurns::Scaled { inner, factor } => factor * inner.moment1(r),
        }
    }

    /// `∫_0^r ρ³ ω(ρ) dρ` in closed form.
    pub fn moment3(&self, r: f64) -> f64 {
        match self {
            RadialTurns::Const(c) => c * r.powi(4) / 4.0,
            RadialTurns::Band { alpha, beta } => {
                let rb = 1.0 + beta - alpha;
                let mut acc = alpha * r.min(1.0).powi(4) / 4.0;
                if r > 1.0 {
                    let u = r.min(rb);
                    acc += (alpha - 1.0) * (u.powi(4) - 1.0) / 4.0 + (u.powi(5) - 1.0) / 5.0;
                }
                if r > rb {
                    acc += beta * (r.powi(4) - rb.powi(4)) / 4.0;
                }
                acc
            }
            RadialTurns::Scaled { inner, factor } => factor * inner.moment3(r),
        }
    }

    /// `∫_0^r ρ² ω'(ρ) dρ = r² ω(r) - 2 ∫_0^r ρ ω(ρ) dρ`, the radial part
    /// of the generating value of the induced polar map.
    pub fn twist_moment(&self, r: f64) -> f64 {
        r * r * self.turns(r) - 2.0 * self.moment1(r)
    }

    /// Radius beyond which the profile is constant.
    pub fn support_radius(&self) -> f64 {
        match self {
            RadialTurns::Const(_) => 0.0,
            RadialTurns::Band { alpha, beta } => 1.0 + beta - alpha,
            RadialTurns::Scaled { inner, .. } => inner.support_radius(),
        }
    }

    /// Supremum of `|ω|` over all radii.
    pub fn max_abs_turns(&self) -> f64 {
        match self {
            RadialTurns::Const(c) => c.abs(),
            RadialTurns::Band { alpha, beta } => alpha.abs().max(beta.abs()),
            RadialTurns::Scaled { inner, factor } => factor.abs() * inner.max_abs_turns(),
        }
    }

    pub fn scaled(&self, factor: f64) -> RadialTurns {
        RadialTurns::Scaled {
            inner: Box::new(self.clone()),
            factor,
        }
    }
}

/// The band extension profile of a rotation-by-`alpha` boundary map.
///
/// `omega(r) = alpha` for `r <= 1`, `alpha + r - 1` on the band
/// `[1, 1 + beta - alpha]` and `beta` beyond it.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AngularProfile {
    pub alpha: f64,
    pub beta: f64,
    /// When set, `(alpha, beta)` must avoid the integers so that the only
    /// fixed point of the extended map is the origin.
    pub pseudo_rotation: bool,
}

impl AngularProfile {
    pub fn new(alpha: f64, beta: f64, pseudo_rotation: bool) -> Result<Self> {
        if !(beta > alpha) {
            return Err(Error::Domain(format!(
                "band extension requires beta > alpha, got alpha={alpha}, beta={beta}"
            )));
        }
        if pseudo_rotation && alpha.floor() + 1.0 < beta {
            // An integer inside (alpha, beta) would create a circle of
            // fixed points of the extension itself.
            return Err(Error::Domain(format!(
                "(alpha, beta) = ({alpha}, {beta}) meets the integers"
            )));
        }
        Ok(AngularProfile {
            alpha,
            beta,
            pseudo_rotation,
        })
    }

    pub fn omega(&self, r: f64) -> f64 {
        (self.alpha + r - 1.0).clamp(self.alpha, self.beta)
    }

    /// The band `[1, 1 + beta - alpha]` on which the twist is integrable.
    pub fn band(&self) -> (f64, f64) {
        (1.0, 1.0 + self.beta - self.alpha)
    }

    pub fn as_radial(&self) -> RadialTurns {
        RadialTurns::Band {
            alpha: self.alpha,
            beta: self.beta,
        }
    }

    /// Integers `a` with `a/b` strictly inside `(alpha, beta)`.
    pub fn resonant_numerators(&self, b: u32) -> Vec<i64> {
        let lo = self.alpha * b as f64;
        let hi = self.beta * b as f64;
        let mut out = Vec::new();
        let mut a = lo.floor() as i64;
        while (a as f64) <= hi {
            if (a as f64) > lo && (a as f64) < hi {
                out.push(a);
            }
            a += 1;
        }
        out
    }

    /// Radius of the invariant circle `S_{a/b}`.
    pub fn resonant_radius(&self, a: i64, b: u32) -> Result<f64> {
        let q = a as f64 / b as f64;
        if q <= self.alpha || q >= self.beta {
            return Err(Error::Domain(format!(
                "a/b = {a}/{b} outside ({}, {})",
                self.alpha, self.beta
            )));
        }
        Ok(1.0 + q - self.alpha)
    }
}
