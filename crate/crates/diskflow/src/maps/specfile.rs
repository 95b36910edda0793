//! The plain-text map-family specification, shared by library and CLI.
//!
//! ```text
//! kind = twist_band
//! alpha = 0.3
//! beta = 0.45
//! pseudo_rotation = true
//! perturb = cx=0.45 cy=0.10 radius=0.20 amp=0.030
//! ```

use crate::geom::Vec2;
use crate::maps::isotopy::{IsotopyPath, IsotopySegment};
use crate::maps::polar::{LocalTwist, PlaneMap, PolarMap};
use crate::maps::profile::{AngularProfile, RadialTurns};
use crate::{Error, Result};
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

/// Which closed-form family the map belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum MapKind {
    Identity,
    /// Global rigid rotation by `alpha`.
    Rotation,
    /// Band extension of the rotation by `alpha` up to `beta`.
    TwistBand,
}

/// A parsed map-family description; the single source from which the
/// plane map, its natural isotopy and its factor decomposition are built.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MapFamily {
    pub kind: MapKind,
    pub alpha: f64,
    pub beta: f64,
    pub pseudo_rotation: bool,
    /// Closed-form inner perturbations, applied after the polar part.
    pub perturbations: Vec<LocalTwist>,
}

impl MapFamily {
    pub fn identity() -> Self {
        MapFamily {
            kind: MapKind::Identity,
            alpha: 0.0,
            beta: 0.0,
            pseudo_rotation: false,
            perturbations: Vec::new(),
        }
    }

    pub fn rotation(alpha: f64) -> Self {
        MapFamily {
            kind: MapKind::Rotation,
            alpha,
            beta: alpha,
            pseudo_rotation: false,
            perturbations: Vec::new(),
        }
    }

    pub fn twist_band(alpha: f64, beta: f64) -> Result<Self> {
        AngularProfile::new(alpha, beta, true)?;
        Ok(MapFamily {
            kind: MapKind::TwistBand,
            alpha,
            beta,
            pseudo_rotation: true,
            perturbations: Vec::new(),
        })
    }

    pub fn with_perturbations(mut self, perturbations: Vec<LocalTwist>) -> Self {
        self.perturbations = perturbations;
        self
    }

    /// The radial rotation profile of the polar part.
    pub fn profile(&self) -> RadialTurns {
        match self.kind {
            MapKind::Identity => RadialTurns::Const(0.0),
            MapKind::Rotation => RadialTurns::Const(self.alpha),
            MapKind::TwistBand => RadialTurns::Band {
                alpha: self.alpha,
                beta: self.beta,
            },
        }
    }

    /// The band profile when the family is a twist band.
    pub fn angular_profile(&self) -> Result<AngularProfile> {
        match self.kind {
            MapKind::TwistBand => AngularProfile::new(self.alpha, self.beta, self.pseudo_rotation),
            _ => Err(Error::Domain("family has no twist band".into())),
        }
    }

    /// Smallest radius beyond which the full map is a rigid rotation.
    pub fn rigid_radius(&self) -> f64 {
        match self.kind {
            MapKind::TwistBand => 1.0 + self.beta - self.alpha,
            _ => 1.0,
        }
    }

    /// Rotation number of the boundary restriction at radius `r` (valid
    /// for `r >= 1`, where the map is polar).
    pub fn boundary_rotation(&self, r: f64) -> f64 {
        self.profile().turns(r)
    }

    /// Evaluate the full map (perturbations compose on the outside).
    pub fn eval(&self, z: Vec2) -> Vec2 {
        let mut w = PolarMap::new(self.profile()).eval(z);
        for p in &self.perturbations {
            w = p.eval(w);
        }
        w
    }

    pub fn eval_inverse(&self, z: Vec2) -> Vec2 {
        let mut w = z;
        for p in self.perturbations.iter().rev() {
            w = p.eval_inverse(w);
        }
        PolarMap::new(self.profile()).eval_inverse(w)
    }

    /// The natural identity isotopy: scale the polar part, then scale the
    /// perturbations one at a time.
    pub fn natural_isotopy(&self) -> IsotopyPath {
        let mut segs = vec![IsotopySegment::PolarScale(self.profile())];
        for p in &self.perturbations {
            segs.push(IsotopySegment::LocalTwistScale(*p));
        }
        IsotopyPath::from_segments(segs)
    }
}

impl PlaneMap for MapFamily {
    fn eval(&self, z: Vec2) -> Vec2 {
        MapFamily::eval(self, z)
    }

    fn eval_inverse(&self, z: Vec2) -> Vec2 {
        MapFamily::eval_inverse(self, z)
    }

    fn displacement_turns(&self, z: Vec2) -> f64 {
        let polar = PolarMap::new(self.profile());
        let mut total = polar.displacement_turns(z);
        let mut cur = PlaneMap::eval(&polar, z);
        for p in &self.perturbations {
            total += p.displacement_turns(cur);
            cur = p.eval(cur);
        }
        total
    }
}

impl fmt::Display for MapFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let kind = match self.kind {
            MapKind::Identity => "identity",
            MapKind::Rotation => "rotation",
            MapKind::TwistBand => "twist_band",
        };
        writeln!(f, "kind = {kind}")?;
        writeln!(f, "alpha = {:.17}", self.alpha)?;
        writeln!(f, "beta = {:.17}", self.beta)?;
        writeln!(f, "pseudo_rotation = {}", self.pseudo_rotation)?;
        for p in &self.perturbations {
            writeln!(
                f,
                "perturb = cx={:.17} cy={:.17} radius={:.17} amp={:.17}",
                p.center.x, p.center.y, p.radius, p.amplitude
            )?;
        }
        Ok(())
    }
}

impl FromStr for MapFamily {
    type Err = Error;

    fn from_str(text: &str) -> Result<Self> {
        let mut kind = None;
        let mut alpha = None;
        let mut beta = None;
        let mut pseudo = false;
        let mut perturbations = Vec::new();

        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::Format(format!("line {}: expected `key = value`", lineno + 1))
            })?;
            let (key, value) = (key.trim(), value.trim());
            match key {
                "kind" => {
                    kind = Some(match value {
                        "identity" => MapKind::Identity,
                        "rotation" => MapKind::Rotation,
                        "twist_band" => MapKind::TwistBand,
                        other => {
                            return Err(Error::Format(format!("unknown map kind `{other}`")));
                        }
                    })
                }
                "alpha" => alpha = Some(parse_f64(value, lineno)?),
                "beta" => beta = Some(parse_f64(value, lineno)?),
                "pseudo_rotation" => {
                    pseudo = value.parse().map_err(|_| {
                        Error::Format(format!("line {}: bad boolean `{value}`", lineno + 1))
                    })?
                }
                "perturb" => perturbations.push(parse_perturbation(value, lineno)?),
                other => {
                    return Err(Error::Format(format!(
                        "line {}: unknown key `{other}`",
                        lineno + 1
                    )));
                }
            }
        }

        let kind = kind.ok_or_else(|| Error::Format("missing `kind`".into()))?;
        let alpha = alpha.unwrap_or(0.0);
        let beta = beta.unwrap_or(alpha);
        let family = MapFamily {
            kind,
            alpha,
            beta,
            pseudo_rotation: pseudo,
            perturbations,
        };
        if kind == MapKind::TwistBand {
            AngularProfile::new(alpha, beta, pseudo)?;
        }
        Ok(family)
    }
}

fn parse_f64(value: &str, lineno: usize) -> Result<f64> {
    value
        .parse()
        .map_err(|_| Error::Format(format!("line {}: bad number `{value}`", lineno + 1)))
}

fn parse_perturbation(value: &str, lineno: usize) -> Result<LocalTwist> {
    let mut cx = None;
    let mut cy = None;
    let mut radius = None;
    let mut amp = None;
    for field in value.split_whitespace() {
        let (k, v) = field.split_once('=').ok_or_else(|| {
            Error::Format(format!("line {}: perturb fields are k=v", lineno + 1))
        })?;
        let v = parse_f64(v, lineno)?;
        match k {
            "cx" => cx = Some(v),
            "cy" => cy = Some(v),
            "radius" => radius = Some(v),
            "amp" => amp = Some(v),
            other => {
                return Err(Error::Format(format!(
                    "line {}: unknown perturb field `{other}`",
                    lineno + 1
                )));
            }
        }
    }
    match (cx, cy, radius, amp) {
        (Some(cx), Some(cy), Some(radius), Some(amp)) => {
            LocalTwist::new(Vec2::new(cx, cy), radius, amp)
        }
        _ => Err(Error::Format(format!(
            "line {}: perturb needs cx, cy, radius, amp",
            lineno + 1
        ))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roundtrip_is_lossless() {
        let fam = MapFamily::twist_band(0.3, 0.45)
            .unwrap()
            .with_perturbations(vec![
                LocalTwist::new(Vec2::new(0.45, 0.1), 0.2, 0.031).unwrap()
            ]);
        let text = fam.to_string();
        let back: MapFamily = text.parse().unwrap();
        assert_eq!(fam, back);
    }

    #[test]
    fn parses_with_comments_and_whitespace() {
        let text = "\n# a band map\nkind = twist_band\nalpha = 0.3\n beta =0.45 # outer\npseudo_rotation = true\n";
        let fam: MapFamily = text.parse().unwrap();
        assert_eq!(fam.kind, MapKind::TwistBand);
        assert_eq!(fam.beta, 0.45);
        assert!(fam.pseudo_rotation);
    }

    #[test]
    fn rejects_malformed_input() {
        assert!("alpha = 0.3".parse::<MapFamily>().is_err()); // no kind
        assert!("kind = polar".parse::<MapFamily>().is_err());
        assert!("kind = rotation\nalpha = zero".parse::<MapFamily>().is_err());
        assert!("kind = twist_band\nalpha = 0.9\nbeta = 1.2\npseudo_rotation = true"
            .parse::<MapFamily>()
            .is_err());
    }

    #[test]
    fn family_eval_composes_perturbations_outside() {
        let tw = LocalTwist::new(Vec2::new(0.45, 0.1), 0.2, 0.05).unwrap();
        let fam = MapFamily::rotation(0.25).with_perturbations(vec![tw]);
        let z = Vec2::new(0.52, 0.0);
        let expect = tw.eval(z.rotated(0.25));
        assert!((MapFamily::eval(&fam, z) - expect).norm() < 1e-15);
        let back = fam.eval_inverse(MapFamily::eval(&fam, z));
        assert!((back - z).norm() < 1e-13);
    }
}
