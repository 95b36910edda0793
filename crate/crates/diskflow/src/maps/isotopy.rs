//! Identity isotopies of the supported map families, with distinguished
//! lifts to the universal cover of the punctured plane.

use crate::geom::{CoverPoint, Vec2};
use crate::maps::polar::{LocalTwist, PlaneMap, PolarMap};
use crate::maps::profile::RadialTurns;
use crate::{Error, Result};
use serde::{Deserialize, Serialize};

/// One unit-length piece of an isotopy, starting at the identity.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum IsotopySegment {
    /// `s -> ` polar twist with profile `s·ω`.
    PolarScale(RadialTurns),
    /// `s -> ` local twist with amplitude scaled by `s`.
    LocalTwistScale(LocalTwist),
}

impl IsotopySegment {
    fn map_at(&self, s: f64) -> SegmentMap {
        match self {
            IsotopySegment::PolarScale(p) => SegmentMap::Polar(PolarMap::new(p.scaled(s))),
            IsotopySegment::LocalTwistScale(t) => SegmentMap::Twist(t.scaled(s)),
        }
    }
}

enum SegmentMap {
    Polar(PolarMap),
    Twist(LocalTwist),
}

impl SegmentMap {
    fn as_plane(&self) -> &dyn PlaneMap {
        match self {
            SegmentMap::Polar(m) => m,
            SegmentMap::Twist(m) => m,
        }
    }
}

/// A time-parameterized family of plane maps with `family(0) = id` and a
/// distinguished lift that starts at the identity of the cover.
///
/// The parameter runs over `[0, duration]` where every unit interval is
/// one segment; the map at integer time `k` is the composition of the
/// first `k` completed segments (later segments compose on the outside).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IsotopyPath {
    segments: Vec<IsotopySegment>,
    /// Sampling hint: adaptive trackers should not step the parameter by
    /// more than this without checking continuity.
    pub max_step: f64,
}

impl IsotopyPath {
    pub fn identity() -> Self {
        IsotopyPath {
            segments: Vec::new(),
            max_step: 0.25,
        }
    }

    pub fn from_segments(segments: Vec<IsotopySegment>) -> Self {
        IsotopyPath {
            segments,
            max_step: 0.25,
        }
    }

    /// The rigid rotation isotopy `T_alpha = (R_{s·alpha})`.
    pub fn rigid_rotation(alpha: f64) -> Self {
        IsotopyPath::from_segments(vec![IsotopySegment::PolarScale(RadialTurns::Const(alpha))])
    }

    /// The natural isotopy of a polar map: scale its profile.
    pub fn polar_scale(profile: RadialTurns) -> Self {
        IsotopyPath::from_segments(vec![IsotopySegment::PolarScale(profile)])
    }

    pub fn duration(&self) -> f64 {
        self.segments.len() as f64
    }

    pub fn segments(&self) -> &[IsotopySegment] {
        &self.segments
    }

    /// Concatenation: runs `self` first, then `next` composed on top.
    pub fn then(mut self, next: &IsotopyPath) -> Self {
        self.segments.extend(next.segments.iter().cloned());
        self
    }

    /// `[I]^n`.
    pub fn repeat(&self, n: usize) -> Self {
        let mut segs = Vec::with_capacity(self.segments.len() * n);
        for _ in 0..n {
            segs.extend(self.segments.iter().cloned());
        }
        IsotopyPath {
            segments: segs,
            max_step: self.max_step,
        }
    }

    /// `[I][T_k]`: precompose with `k` full turns. The plane maps are
    /// unchanged for integer `k`; the lift gains the deck power `T^k`.
    pub fn precompose_full_turns(&self, k: i64) -> Self {
        let mut segs = vec![IsotopySegment::PolarScale(RadialTurns::Const(k as f64))];
        segs.extend(self.segments.iter().cloned());
        IsotopyPath {
            segments: segs,
            max_step: self.max_step,
        }
    }

    fn split(&self, s: f64) -> Result<(usize, f64)> {
        if !(0.0..=self.duration() + 1e-12).contains(&s) {
            return Err(Error::Domain(format!(
                "isotopy parameter {s} outside [0, {}]",
                self.duration()
            )));
        }
        let s = s.min(self.duration());
        let full = (s.floor() as usize).min(self.segments.len().saturating_sub(1));
        if self.segments.is_empty() {
            return Ok((0, 0.0));
        }
        Ok((full, s - full as f64))
    }

    /// The plane map at parameter `s`, applied to `z`.
    pub fn eval(&self, s: f64, z: Vec2) -> Result<Vec2> {
        let (full, frac) = self.split(s)?;
        let mut w = z;
        for seg in &self.segments[..full] {
            w = seg.map_at(1.0).as_plane().eval(w);
        }
        if frac > 0.0 {
            if let Some(seg) = self.segments.get(full) {
                w = seg.map_at(frac).as_plane().eval(w);
            }
        }
        Ok(w)
    }

    /// The lifted isotopy at parameter `s`, applied to a cover point.
    /// Deck-equivariant: `lift(s, T z) = T lift(s, z)`.
    pub fn lift(&self, s: f64, z: CoverPoint) -> Result<CoverPoint> {
        if z.rho <= 0.0 {
            return Err(Error::Domain("cover point over the puncture".into()));
        }
        let (full, frac) = self.split(s)?;
        let mut w = z;
        for seg in &self.segments[..full] {
            w = seg.map_at(1.0).as_plane().eval_lift(w)?;
        }
        if let Some(seg) = self.segments.get(full) {
            if frac > 0.0 {
                w = seg.map_at(frac).as_plane().eval_lift(w)?;
            }
        }
        Ok(w)
    }

    /// Time-one plane map.
    pub fn eval_end(&self, z: Vec2) -> Vec2 {
        self.eval(self.duration(), z).expect("duration is in range")
    }

    /// Time-one lift (the distinguished lift of the end map).
    pub fn lift_end(&self, z: CoverPoint) -> Result<CoverPoint> {
        self.lift(self.duration(), z)
    }

    /// Inverse of the time-one lift.
    pub fn lift_end_inverse(&self, z: CoverPoint) -> Result<CoverPoint> {
        if z.rho <= 0.0 {
            return Err(Error::Domain("cover point over the puncture".into()));
        }
        let mut w = z;
        for seg in self.segments.iter().rev() {
            w = seg.map_at(1.0).as_plane().eval_lift_inverse(w)?;
        }
        Ok(w)
    }
}

/// Evaluate the lifted isotopy; equivariant with the deck transformation.
pub fn eval_lift(path: &IsotopyPath, s: f64, z: CoverPoint) -> Result<CoverPoint> {
    path.lift(s, z)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_at_time_zero() {
        let path = IsotopyPath::rigid_rotation(0.3);
        let z = Vec2::new(0.4, -0.2);
        assert_eq!(path.eval(0.0, z).unwrap(), z);
        let lift = CoverPoint::base_lift(z).unwrap();
        let l0 = path.lift(0.0, lift).unwrap();
        assert_eq!(l0, lift);
    }

    #[test]
    fn rigid_rotation_advances_leaf_coordinate() {
        let path = IsotopyPath::rigid_rotation(0.3);
        let z = CoverPoint::new(1.7, 0.8);
        let end = path.lift(1.0, z).unwrap();
        assert!((end.ell - 2.0).abs() < 1e-14);
        assert!((end.rho - 0.8).abs() < 1e-14);
    }

    #[test]
    fn deck_equivariance_is_exact() {
        let tw = LocalTwist::new(Vec2::new(0.45, 0.1), 0.2, 0.04).unwrap();
        let path = IsotopyPath::polar_scale(RadialTurns::Band {
            alpha: 0.3,
            beta: 0.45,
        })
        .then(&IsotopyPath::from_segments(vec![
            IsotopySegment::LocalTwistScale(tw),
        ]));
        for k in 0..40 {
            let s = 2.0 * k as f64 / 39.0;
            let z = CoverPoint::new(0.3 + 0.05 * k as f64, 0.4 + 0.02 * k as f64);
            let a = path.lift(s, z.deck(7)).unwrap();
            let b = path.lift(s, z).unwrap().deck(7);
            assert!((a.ell - b.ell).abs() < 1e-12, "s={s}");
            assert!((a.rho - b.rho).abs() < 1e-12);
        }
    }

    #[test]
    fn rejects_puncture_and_bad_parameters() {
        let path = IsotopyPath::rigid_rotation(0.25);
        assert!(path.lift(0.5, CoverPoint::new(0.0, 0.0)).is_err());
        assert!(path.eval(1.5, Vec2::new(1.0, 0.0)).is_err());
        assert!(path.eval(-0.1, Vec2::new(1.0, 0.0)).is_err());
    }

    #[test]
    fn full_turn_precomposition_shifts_the_lift_only() {
        let path = IsotopyPath::rigid_rotation(0.3).precompose_full_turns(2);
        let z = Vec2::new(0.5, 0.1);
        // plane map unchanged
        assert!((path.eval_end(z) - z.rotated(0.3)).norm() < 1e-14);
        // lift shifted by the deck power
        let lift = CoverPoint::base_lift(z).unwrap();
        let end = path.lift_end(lift).unwrap();
        assert!((end.ell - (lift.ell + 2.3)).abs() < 1e-13);
    }

    #[test]
    fn lift_end_inverse_inverts() {
        let tw = LocalTwist::new(Vec2::new(-0.4, 0.2), 0.15, 0.05).unwrap();
        let path = IsotopyPath::polar_scale(RadialTurns::Const(0.4)).then(
            &IsotopyPath::from_segments(vec![IsotopySegment::LocalTwistScale(tw)]),
        );
        let z = CoverPoint::new(3.3, 0.45);
        let fwd = path.lift_end(z).unwrap();
        let back = path.lift_end_inverse(fwd).unwrap();
        assert!((back.ell - z.ell).abs() < 1e-12 && (back.rho - z.rho).abs() < 1e-12);
    }
}
