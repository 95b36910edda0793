//! Concrete area-preserving map families on the disk and plane, their
//! isotopies and universal-cover lifts, and closed-form invariant values
//! of the integrable family.

mod isotopy;
mod polar;
mod profile;
mod specfile;

pub use isotopy::{eval_lift, IsotopyPath, IsotopySegment};
pub use polar::{band_extend, BandExtended, Composition, LocalTwist, PlaneMap, PolarMap};
pub use profile::{AngularProfile, RadialTurns};
pub use specfile::{MapFamily, MapKind};

use crate::{Error, Result};

/// The correction term of the restricted Calabi invariant,
/// `4π² ∫_1^{1+a/b-α} r³ (α + r - 1) dr`, in closed form.
pub fn restricted_calabi_closed_form(alpha: f64, a: i64, b: u32) -> Result<f64> {
    let q = a as f64 / b as f64;
    if q < alpha {
        return Err(Error::Domain(format!(
            "a/b = {a}/{b} below alpha = {alpha}"
        )));
    }
    let u = 1.0 + q - alpha;
    let quintic = (u.powi(5) - 1.0) / 5.0;
    let quartic = (u.powi(4) - 1.0) / 4.0;
    Ok(4.0 * std::f64::consts::PI.powi(2) * (quintic + (alpha - 1.0) * quartic))
}

/// `C̃al` of the natural isotopy of a polar map with profile `ω` on the
/// disk of radius `r`: `4π² ∫_0^r ρ³ ω(ρ) dρ`. For the rigid rotation on
/// the unit disk this is `π² α`.
pub fn calabi_tilde_polar(profile: &RadialTurns, r: f64) -> f64 {
    4.0 * std::f64::consts::PI.powi(2) * profile.moment3(r)
}
