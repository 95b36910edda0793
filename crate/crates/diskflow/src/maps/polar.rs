//! Concrete area-preserving plane maps: polar twists, local twists
//! supported in a small disk, band extensions and compositions.

use crate::geom::{wrap_half, CoverPoint, Vec2};
use crate::maps::profile::{AngularProfile, RadialTurns};
use crate::{tol, Error, Result};
use serde::{Deserialize, Serialize};

/// An orientation preserving map of the plane that fixes the origin and is
/// isotopic to the identity on the punctured plane.
pub trait PlaneMap {
    fn eval(&self, z: Vec2) -> Vec2;

    fn eval_inverse(&self, z: Vec2) -> Vec2;

    /// Continuous angular displacement in turns: the winding of `z` under
    /// the natural identity isotopy of the map. Well defined on the
    /// punctured plane; single valued because the map fixes 0.
    fn displacement_turns(&self, z: Vec2) -> f64;

    /// Lift to the universal cover of the punctured plane, equivariant
    /// with the deck transformation.
    fn eval_lift(&self, z: CoverPoint) -> Result<CoverPoint> {
        if z.rho <= 0.0 {
            return Err(Error::Domain("cover point over the puncture".into()));
        }
        let w = self.eval(z.project());
        Ok(CoverPoint::new(z.ell + self.displacement_turns(z.project()), w.norm()))
    }

    fn eval_lift_inverse(&self, z: CoverPoint) -> Result<CoverPoint> {
        if z.rho <= 0.0 {
            return Err(Error::Domain("cover point over the puncture".into()));
        }
        let w = self.eval_inverse(z.project());
        Ok(CoverPoint::new(z.ell - self.displacement_turns(w), w.norm()))
    }
}

/// `(r, φ) -> (r, φ + ω(r))`: rotates every circle around the origin.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PolarMap {
    pub profile: RadialTurns,
}

impl PolarMap {
    pub fn new(profile: RadialTurns) -> Self {
        PolarMap { profile }
    }

    pub fn rotation(turns: f64) -> Self {
        PolarMap::new(RadialTurns::Const(turns))
    }

    pub fn from_profile(p: &AngularProfile) -> Self {
        PolarMap::new(p.as_radial())
    }

    /// The map with profile `s·ω`, the time-`s` point of the natural
    /// isotopy of the twist.
    pub fn scaled(&self, s: f64) -> PolarMap {
        PolarMap::new(self.profile.scaled(s))
    }
}

impl PlaneMap for PolarMap {
    fn eval(&self, z: Vec2) -> Vec2 {
        z.rotated(self.profile.turns(z.norm()))
    }

    fn eval_inverse(&self, z: Vec2) -> Vec2 {
        z.rotated(-self.profile.turns(z.norm()))
    }

    fn displacement_turns(&self, z: Vec2) -> f64 {
        self.profile.turns(z.norm())
    }
}

/// An area-preserving twist supported in the closed disk
/// `|z - center| <= radius`, which must avoid both the origin and the
/// region `|z| >= 1` so that chains containing it still rotate every
/// circle of radius at least one.
///
/// In coordinates centered at `center` it rotates by
/// `amplitude (1 - (ρ/radius)²)²` turns, a C¹ profile vanishing at the
/// support boundary.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LocalTwist {
    pub center: Vec2,
    pub radius: f64,
    pub amplitude: f64,
}

impl LocalTwist {
    pub fn new(center: Vec2, radius: f64, amplitude: f64) -> Result<Self> {
        let c = center.norm();
        if radius <= 0.0 || c - radius <= 0.0 || c + radius >= 1.0 {
            return Err(Error::Domain(format!(
                "local twist support must sit inside the punctured unit disk \
                 (|center|={c}, radius={radius})"
            )));
        }
        Ok(LocalTwist {
            center,
            radius,
            amplitude,
        })
    }

    /// Rotation in turns at distance `rho` from the twist center.
    pub fn local_turns(&self, rho: f64) -> f64 {
        if rho >= self.radius {
            return 0.0;
        }
        let u = 1.0 - (rho / self.radius).powi(2);
        self.amplitude * u * u
    }

    fn local_dturns(&self, rho: f64) -> f64 {
        if rho >= self.radius {
            return 0.0;
        }
        let u = 1.0 - (rho / self.radius).powi(2);
        self.amplitude * 2.0 * u * (-2.0 * rho / (self.radius * self.radius))
    }

    /// `∫_0^ρ σ² γ'(σ) dσ` about the twist center, with `γ = 2π·turns`;
    /// the radial part of the factor's generating value.
    pub fn local_twist_moment(&self, rho: f64) -> f64 {
        let r = rho.min(self.radius);
        // by parts: ρ²γ(ρ) - 2∫σγ(σ)dσ, with ∫σ(1-(σ/R)²)² dσ closed form
        let gamma = std::f64::consts::TAU * self.local_turns(r);
        let rr = (r / self.radius).powi(2);
        // ∫_0^r σ (1 - σ²/R²)² dσ = R²/6 (1 - (1-r²/R²)³)
        let int_sg = std::f64::consts::TAU
            * self.amplitude
            * (self.radius * self.radius / 6.0)
            * (1.0 - (1.0 - rr).powi(3));
        r * r * gamma - 2.0 * int_sg
    }

    /// The map with amplitude `s·amplitude`.
    pub fn scaled(&self, s: f64) -> LocalTwist {
        LocalTwist {
            center: self.center,
            radius: self.radius,
            amplitude: s * self.amplitude,
        }
    }
}

impl PlaneMap for LocalTwist {
    fn eval(&self, z: Vec2) -> Vec2 {
        let w = z - self.center;
        if w.norm() >= self.radius {
            return z;
        }
        self.center + w.rotated(self.local_turns(w.norm()))
    }

    fn eval_inverse(&self, z: Vec2) -> Vec2 {
        let w = z - self.center;
        if w.norm() >= self.radius {
            return z;
        }
        self.center + w.rotated(-self.local_turns(w.norm()))
    }

    fn displacement_turns(&self, z: Vec2) -> f64 {
        // The support avoids the origin, so the displacement never reaches
        // half a turn and the wrapped difference is the continuous one.
        let w = self.eval(z);
        wrap_half(w.angle_turns() - z.angle_turns())
    }
}

/// The derivative of the local twist map, by central differences; used by
/// certification tests only through sampled quotients, so no analytic
/// Jacobian is exposed.
impl LocalTwist {
    pub fn support_gap_to_origin(&self) -> f64 {
        self.center.norm() - self.radius
    }

    pub fn local_profile_derivative(&self, rho: f64) -> f64 {
        self.local_dturns(rho)
    }
}

/// Extension of a unit-disk map that equals the rotation by `alpha` on the
/// unit circle: integrable twist on the band, rigid rotation outside.
#[derive(Clone, Debug)]
pub struct BandExtended<M> {
    pub inner: M,
    pub profile: AngularProfile,
}

/// Extend `inner` beyond the unit disk. Rejects `beta <= alpha` and inner
/// maps whose boundary restriction is not the rotation by `alpha`.
pub fn band_extend<M: PlaneMap>(inner: M, alpha: f64, beta: f64) -> Result<BandExtended<M>> {
    let profile = AngularProfile::new(alpha, beta, false)?;
    let samples = 256;
    for k in 0..samples {
        let z = Vec2::from_polar(1.0, k as f64 / samples as f64);
        let residual = (inner.eval(z) - z.rotated(alpha)).norm();
        if residual > tol::BAND_CONTINUITY {
            return Err(Error::Domain(format!(
                "inner map is not the rotation by {alpha} on the unit circle \
                 (residual {residual:.3e} at angle {}/{samples})",
                k
            )));
        }
    }
    Ok(BandExtended { inner, profile })
}

impl<M: PlaneMap> PlaneMap for BandExtended<M> {
    fn eval(&self, z: Vec2) -> Vec2 {
        if z.norm() <= 1.0 {
            self.inner.eval(z)
        } else {
            z.rotated(self.profile.omega(z.norm()))
        }
    }

    fn eval_inverse(&self, z: Vec2) -> Vec2 {
        if z.norm() <= 1.0 {
            self.inner.eval_inverse(z)
        } else {
            z.rotated(-self.profile.omega(z.norm()))
        }
    }

    fn displacement_turns(&self, z: Vec2) -> f64 {
        if z.norm() <= 1.0 {
            self.inner.displacement_turns(z)
        } else {
            self.profile.omega(z.norm())
        }
    }
}

/// Composition `maps[n-1] ∘ … ∘ maps[0]`.
pub struct Composition<'a> {
    pub maps: Vec<&'a dyn PlaneMap>,
}

impl PlaneMap for Composition<'_> {
    fn eval(&self, z: Vec2) -> Vec2 {
        self.maps.iter().fold(z, |w, m| m.eval(w))
    }

    fn eval_inverse(&self, z: Vec2) -> Vec2 {
        self.maps.iter().rev().fold(z, |w, m| m.eval_inverse(w))
    }

    fn displacement_turns(&self, z: Vec2) -> f64 {
        let mut w = z;
        let mut total = 0.0;
        for m in &self.maps {
            total += m.displacement_turns(w);
            w = m.eval(w);
        }
        total
    }
}
