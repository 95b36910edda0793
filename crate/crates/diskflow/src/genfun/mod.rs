//! Untwisted factors, their implicit solves and generating values, the
//! Lipschitz certificates, and the decomposition of a supported plane map
//! into a periodic chain of factors.

mod certify;
mod factor;

pub use certify::{verify_untwisted_lipschitz, CertificateReport, ConditionReport, SampleSpec};
pub use factor::{generating_value, solve_untwisted, FactorMap, UntwistedFactor};

use crate::geom::{CoverPoint, Vec2};
use crate::maps::{MapFamily, RadialTurns};
use crate::{Error, Result};
use serde::{Deserialize, Serialize};

/// An `m`-periodic chain of certified untwisted factors whose composition
/// `f_m ∘ … ∘ f_1` is the target plane map.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FactorChain {
    factors: Vec<UntwistedFactor>,
    /// Common Lipschitz certificate.
    pub k: f64,
    /// When every factor is the same polar map, ranges of the chain
    /// compose in closed form; this stores the per-factor profile.
    uniform_profile: Option<RadialTurns>,
}

impl FactorChain {
    pub fn new(factors: Vec<UntwistedFactor>, k: f64) -> Self {
        let uniform_profile = match factors.split_first() {
            Some((first, rest)) => match &first.map {
                FactorMap::Polar(p) if rest.iter().all(|f| f.map == first.map) => {
                    Some(p.profile.clone())
                }
                _ => None,
            },
            None => None,
        };
        FactorChain {
            factors,
            k,
            uniform_profile,
        }
    }

    /// Number of factors in one period.
    pub fn m(&self) -> usize {
        self.factors.len()
    }

    /// Factor `f_i`, indices read periodically (`i` is zero-based).
    pub fn factor(&self, i: i64) -> &UntwistedFactor {
        let m = self.factors.len() as i64;
        &self.factors[(i.rem_euclid(m)) as usize]
    }

    pub fn factors(&self) -> &[UntwistedFactor] {
        &self.factors
    }

    /// `g_i(X, y)` with periodic indexing.
    pub fn g(&self, i: i64, x_img: f64, y: f64) -> Result<f64> {
        self.factor(i).g(x_img, y)
    }

    /// `g'_i(X, y)` with periodic indexing.
    pub fn g_prime(&self, i: i64, x_img: f64, y: f64) -> Result<f64> {
        self.factor(i).g_prime(x_img, y)
    }

    /// `h_i(X, y)` with periodic indexing.
    pub fn h(&self, i: i64, x_img: f64, y: f64) -> Result<f64> {
        self.factor(i).h(x_img, y)
    }

    /// Apply `f_{from+count-1} ∘ … ∘ f_{from}` to a plane point.
    pub fn compose_range(&self, from: i64, count: usize, z: Vec2) -> Vec2 {
        if let Some(profile) = &self.uniform_profile {
            // whole ranges of the uniform chain commute into one twist
            return z.rotated(count as f64 * profile.turns(z.norm()));
        }
        let mut w = z;
        for k in 0..count {
            w = self.factor(from + k as i64).forward(w);
        }
        w
    }

    /// Inverse of [`Self::compose_range`].
    pub fn compose_range_inverse(&self, from: i64, count: usize, z: Vec2) -> Vec2 {
        if let Some(profile) = &self.uniform_profile {
            return z.rotated(-(count as f64) * profile.turns(z.norm()));
        }
        let mut w = z;
        for k in (0..count).rev() {
            w = self.factor(from + k as i64).inverse(w);
        }
        w
    }

    /// Lifted version of [`Self::compose_range`].
    pub fn compose_range_lift(&self, from: i64, count: usize, z: CoverPoint) -> Result<CoverPoint> {
        if let Some(profile) = &self.uniform_profile {
            return Ok(CoverPoint::new(
                z.ell + count as f64 * profile.turns(z.rho),
                z.rho,
            ));
        }
        let mut w = z;
        for k in 0..count {
            w = self.factor(from + k as i64).map.as_plane().eval_lift(w)?;
        }
        Ok(w)
    }

    pub fn compose_range_lift_inverse(
        &self,
        from: i64,
        count: usize,
        z: CoverPoint,
    ) -> Result<CoverPoint> {
        if let Some(profile) = &self.uniform_profile {
            return Ok(CoverPoint::new(
                z.ell - count as f64 * profile.turns(z.rho),
                z.rho,
            ));
        }
        let mut w = z;
        for k in (0..count).rev() {
            w = self
                .factor(from + k as i64)
                .map
                .as_plane()
                .eval_lift_inverse(w)?;
        }
        Ok(w)
    }

    /// The whole-map composition `f = f_m ∘ … ∘ f_1`.
    pub fn eval_whole(&self, z: Vec2) -> Vec2 {
        self.compose_range(0, self.m(), z)
    }

    /// `f^n`.
    pub fn eval_power(&self, n: usize, z: Vec2) -> Vec2 {
        self.compose_range(0, self.m() * n, z)
    }

    /// Lift of `f^n ∘ T^k` (deck power composed with the map power).
    pub fn lift_power_deck(&self, n: usize, deck: i64, z: CoverPoint) -> Result<CoverPoint> {
        Ok(self.compose_range_lift(0, self.m() * n, z)?.deck(deck))
    }
}

/// Decompose a supported map family into `m` equal polar factors with the
/// per-factor profile `ω/m`, followed by its declared perturbation
/// factors; every factor is certified at `k_target`.
///
/// Fails with [`Error::Certification`] when `m` is too small for the
/// per-factor twist to be untwisted at the requested constant; the caller
/// should raise `m`.
pub fn factor_polar(family: &MapFamily, m: usize, k_target: f64) -> Result<FactorChain> {
    factor_polar_with_spec(family, m, k_target, &SampleSpec::default())
}

/// [`factor_polar`] with an explicit certification grid.
pub fn factor_polar_with_spec(
    family: &MapFamily,
    m: usize,
    k_target: f64,
    spec: &SampleSpec,
) -> Result<FactorChain> {
    if m == 0 {
        return Err(Error::Domain("factor count m must be positive".into()));
    }
    let per_factor = family.profile().scaled(1.0 / m as f64);
    // A factor rotating a quarter turn or more cannot be untwisted.
    if per_factor.max_abs_turns() >= 0.25 {
        return Err(Error::Certification(format!(
            "per-factor rotation {} turns reaches 1/4; raise m",
            per_factor.max_abs_turns()
        )));
    }

    let polar_factor = UntwistedFactor::polar(per_factor, k_target);
    let report = verify_untwisted_lipschitz(&polar_factor, k_target, spec)?;
    if !report.pass {
        return Err(Error::Certification(format!(
            "polar factor failed at K = {k_target} (m = {m}):\n{report}"
        )));
    }

    let mut factors = vec![polar_factor; m];
    for tw in &family.perturbations {
        let factor = UntwistedFactor::local_twist(*tw, k_target);
        let report = verify_untwisted_lipschitz(&factor, k_target, spec)?;
        if !report.pass {
            return Err(Error::Certification(format!(
                "perturbation factor failed at K = {k_target}:\n{report}"
            )));
        }
        factors.push(factor);
    }

    let chain = FactorChain::new(factors, k_target);

    // The chain must reproduce the target map on a sample.
    let mut worst: f64 = 0.0;
    for i in 0..24 {
        for j in 0..16 {
            let z = Vec2::from_polar(spec.r_max * (i + 1) as f64 / 24.0, j as f64 / 16.0 + 0.013);
            let err = (chain.eval_whole(z) - family.eval(z)).norm();
            worst = worst.max(err);
        }
    }
    if worst > 1e-8 {
        return Err(Error::Certification(format!(
            "chain composition misses the target map by {worst:.3e}"
        )));
    }
    Ok(chain)
}
