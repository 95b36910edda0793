//! The vector field `ζ` on `E_b`, its action `𝐡`, the coordinate
//! projections, the combinatorial linking form `L`, and the singular
//! circles of the integrable extension.

use crate::actionflow::state::StateVector;
use crate::genfun::FactorChain;
use crate::geom::Vec2;
use crate::maps::AngularProfile;
use crate::{tol, Error, Result};

/// `ζ` and `𝐡` for a fixed chain and period multiplier `b`.
///
/// Entries of a state are indexed `0..mb`; the factor carrying entry `j`
/// to entry `j+1` is `chain.factor(j)`.
pub struct FlowSystem {
    pub chain: FactorChain,
    pub b: u32,
}

impl FlowSystem {
    pub fn new(chain: FactorChain, b: u32) -> Self {
        FlowSystem { chain, b }
    }

    /// Dimension count `mb`: entries per state.
    pub fn period(&self) -> usize {
        self.chain.m() * self.b as usize
    }

    pub fn zero_state(&self) -> StateVector {
        StateVector::zeros(self.period())
    }

    /// The gradient vector field:
    /// `ζ_j = (y_j - g'_{j-1}(x_j, y_{j-1}), x_j - g_j(x_{j+1}, y_j))`.
    pub fn zeta(&self, z: &StateVector) -> Result<StateVector> {
        let mut out = StateVector::zeros(self.period());
        self.zeta_into(z, &mut out)?;
        Ok(out)
    }

    pub fn zeta_into(&self, z: &StateVector, out: &mut StateVector) -> Result<()> {
        let n = self.period() as i64;
        for j in 0..n {
            let cur = z.entry(j);
            let prev = z.entry(j - 1);
            let next = z.entry(j + 1);
            let gp = self.chain.g_prime(j - 1, cur.x, prev.y)?;
            let g = self.chain.g(j, next.x, cur.y)?;
            out.set_entry(j, Vec2::new(cur.y - gp, cur.x - g));
        }
        Ok(())
    }

    /// The discrete action `𝐡(z) = Σ_j x_j y_j - h_{j-1}(x_j, y_{j-1})`,
    /// invariant under the shift `φ`.
    pub fn action_h(&self, z: &StateVector) -> Result<f64> {
        let n = self.period() as i64;
        let mut acc = 0.0;
        for j in 0..n {
            let cur = z.entry(j);
            let prev = z.entry(j - 1);
            acc += cur.x * cur.y - self.chain.h(j - 1, cur.x, prev.y)?;
        }
        Ok(acc)
    }

    /// The shift `φ` (advance one chain period).
    pub fn shift(&self, z: &StateVector) -> StateVector {
        z.shifted(self.chain.m())
    }

    /// Projections `(Q_j, P_j, Q'_j)` of a state to the plane.
    pub fn projections(&self, z: &StateVector, j: i64) -> Result<(Vec2, Vec2, Vec2)> {
        let cur = z.entry(j);
        let prev = z.entry(j - 1);
        let next = z.entry(j + 1);
        let q = Vec2::new(self.chain.g(j, next.x, cur.y)?, cur.y);
        let p = cur;
        let qp = Vec2::new(cur.x, self.chain.g_prime(j - 1, cur.x, prev.y)?);
        Ok((q, p, qp))
    }

    /// Max residual of the projection identities
    /// `f_j ∘ Q_j = Q'_{j+1}` and `ζ_j = J(Q'_j - Q_j)` over all indices.
    pub fn projection_identity_residual(&self, z: &StateVector) -> Result<f64> {
        let zeta = self.zeta(z)?;
        let n = self.period() as i64;
        let mut worst: f64 = 0.0;
        for j in 0..n {
            let (q, _, _) = self.projections(z, j)?;
            let (_, _, qp_next) = self.projections(z, j + 1)?;
            let through = self.chain.factor(j).forward(q);
            worst = worst.max((through - qp_next).norm());
            let (qj, _, qpj) = self.projections(z, j)?;
            let expect = (qpj - qj).j();
            worst = worst.max((expect - zeta.entry(j)).norm());
        }
        Ok(worst)
    }

    /// The state of a genuine orbit of the chain through `w`
    /// (`z_{j+1} = f_j(z_j)`, `z_0 = w`). It is a point of `E_b` whenever
    /// `f^b(w) = w`; then it is a singularity of `ζ`.
    pub fn orbit_state(&self, w: Vec2) -> StateVector {
        let n = self.period();
        let mut entries = Vec::with_capacity(n);
        let mut cur = w;
        for j in 0..n {
            entries.push(cur);
            if j + 1 < n {
                cur = self.chain.factor(j as i64).forward(cur);
            }
        }
        StateVector::new(entries)
    }
}

/// Closed-form action gap between `Σ_a` and the origin:
/// `C(a, b) = π (a - bα) (1 + d + d²/3)` with `d = a/b - α`.
pub fn c_ab(alpha: f64, a: i64, b: u32) -> f64 {
    let d = a as f64 / b as f64 - alpha;
    std::f64::consts::PI * (a as f64 - b as f64 * alpha) * (1.0 + d + d * d / 3.0)
}

/// Area of the invariant disk `D_{a/b}`: `A(a, b) = π (1 + a/b - α)²`.
pub fn a_ab(alpha: f64, a: i64, b: u32) -> f64 {
    let d = a as f64 / b as f64 - alpha;
    std::f64::consts::PI * (1.0 + d) * (1.0 + d)
}

/// One singular circle of `ζ`: the resonance data and sampled states.
pub struct SingularCircle {
    pub a: i64,
    pub radius: f64,
    /// States sampled along `Σ_a`, at equal angles of the base point.
    pub states: Vec<StateVector>,
    /// Largest `‖ζ‖` observed over the sampled states.
    pub max_zeta_norm: f64,
}

/// Locate every singular circle `Σ_a`, `a ∈ (bα, bβ)`, of the band
/// extension and sample each with `samples` states; the residual `‖ζ‖`
/// is checked at every sample.
pub fn singular_circles(
    sys: &FlowSystem,
    profile: &AngularProfile,
    samples: usize,
) -> Result<Vec<SingularCircle>> {
    let numerators = profile.resonant_numerators(sys.b);
    if numerators.is_empty() {
        return Err(Error::Domain(format!(
            "no integer in (b alpha, b beta) for b = {}",
            sys.b
        )));
    }
    let mut out = Vec::new();
    for a in numerators {
        let radius = profile.resonant_radius(a, sys.b)?;
        let mut states = Vec::with_capacity(samples);
        let mut max_zeta: f64 = 0.0;
        for k in 0..samples {
            let w = Vec2::from_polar(radius, k as f64 / samples as f64);
            let state = sys.orbit_state(w);
            max_zeta = max_zeta.max(sys.zeta(&state)?.norm());
            states.push(state);
        }
        if max_zeta > 1e-9 {
            return Err(Error::Certification(format!(
                "sampled Σ_{a} state has ‖ζ‖ = {max_zeta:.3e}"
            )));
        }
        out.push(SingularCircle {
            a,
            radius,
            states,
            max_zeta_norm: max_zeta,
        });
    }
    Ok(out)
}

/// The combinatorial linking form
/// `L(z) = ¼ Σ sign(x_j)(sign(y_j) - sign(y_{j-1}))` on the set `V'`.
///
/// Coordinates within [`tol::SIGN_ZERO`] of zero count as zero; the `V'`
/// sign conditions are then required of the neighbors, and violating
/// states are rejected as outside the domain.
pub fn linking_form(z: &StateVector) -> Result<f64> {
    let n = z.len() as i64;
    let sgn = |v: f64| -> i32 {
        if v.abs() < tol::SIGN_ZERO {
            0
        } else if v > 0.0 {
            1
        } else {
            -1
        }
    };
    let sx: Vec<i32> = (0..n).map(|j| sgn(z.entry(j).x)).collect();
    let sy: Vec<i32> = (0..n).map(|j| sgn(z.entry(j).y)).collect();
    let at = |s: &[i32], j: i64| s[j.rem_euclid(n) as usize];
    for j in 0..n {
        if at(&sx, j) == 0 && (at(&sy, j - 1) == 0 || at(&sy, j - 1) != at(&sy, j)) {
            return Err(Error::Domain(format!(
                "state outside V': x_{j} = 0 without y_{}y_{j} > 0",
                j - 1
            )));
        }
        if at(&sy, j) == 0 && (at(&sx, j) == 0 || at(&sx, j) != at(&sx, j + 1)) {
            return Err(Error::Domain(format!(
                "state outside V': y_{j} = 0 without x_{j}x_{} > 0",
                j + 1
            )));
        }
    }
    let mut quarters = 0i64;
    for j in 0..n {
        quarters += (at(&sx, j) * (at(&sy, j) - at(&sy, j - 1))) as i64;
    }
    Ok(quarters as f64 / 4.0)
}

/// The second expression of the same form,
/// `¼ Σ sign(y_j)(sign(x_j) - sign(x_{j+1}))`; equal to [`linking_form`]
/// on all of `V'`.
pub fn linking_form_alt(z: &StateVector) -> Result<f64> {
    linking_form(z)?; // same domain
    let n = z.len() as i64;
    let sgn = |v: f64| -> i64 {
        if v.abs() < tol::SIGN_ZERO {
            0
        } else if v > 0.0 {
            1
        } else {
            -1
        }
    };
    let mut quarters = 0i64;
    for j in 0..n {
        quarters += sgn(z.entry(j).y) * (sgn(z.entry(j).x) - sgn(z.entry(j + 1).x));
    }
    Ok(quarters as f64 / 4.0)
}

/// Discrete winding number of the loop `j -> z_j` around the origin;
/// requires every entry away from zero.
pub fn loop_winding(z: &StateVector) -> Result<f64> {
    let n = z.len() as i64;
    let mut total = 0.0;
    for j in 0..n {
        let a = z.entry(j);
        let b = z.entry(j + 1);
        if a.norm() < tol::SIGN_ZERO || b.norm() < tol::SIGN_ZERO {
            return Err(Error::Domain("loop passes through the origin".into()));
        }
        total += crate::geom::wrap_half(b.angle_turns() - a.angle_turns());
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::genfun::factor_polar;
    use crate::maps::MapFamily;

    fn band_system(m: usize, b: u32) -> (FlowSystem, AngularProfile) {
        assert!(m >= 8, "band factors certify at K = 4 only from m = 8 up");
        let fam = MapFamily::twist_band(0.3, 0.45).unwrap();
        let chain = factor_polar(&fam, m, 4.0).unwrap();
        (
            FlowSystem::new(chain, b),
            fam.angular_profile().unwrap(),
        )
    }

    #[test]
    fn zero_state_is_singular_with_zero_action() {
        let (sys, _) = band_system(8, 3);
        let zero = sys.zero_state();
        assert!(sys.zeta(&zero).unwrap().norm() < 1e-12);
        assert!(sys.action_h(&zero).unwrap().abs() < 1e-12);
    }

    #[test]
    fn zeta_is_shift_equivariant_and_h_invariant() {
        let (sys, _) = band_system(8, 3);
        let n = sys.period();
        let z = StateVector::new(
            (0..n)
                .map(|j| Vec2::from_polar(0.7 + 0.01 * j as f64, j as f64 * 0.37))
                .collect(),
        );
        let lhs = sys.shift(&sys.zeta(&z).unwrap());
        let rhs = sys.zeta(&sys.shift(&z)).unwrap();
        assert!((&lhs - &rhs).norm() < 1e-11);
        let h1 = sys.action_h(&z).unwrap();
        let h2 = sys.action_h(&sys.shift(&z)).unwrap();
        assert!((h1 - h2).abs() < 1e-10);
    }

    #[test]
    fn singular_circle_states_annihilate_zeta() {
        let (sys, profile) = band_system(8, 7);
        let circles = singular_circles(&sys, &profile, 16).unwrap();
        assert_eq!(circles.len(), 1);
        assert_eq!(circles[0].a, 3);
        assert!((circles[0].radius - (1.0 + 3.0 / 7.0 - 0.3)).abs() < 1e-14);
        assert!(circles[0].max_zeta_norm < 1e-9);
    }

    #[test]
    fn empty_resonance_is_an_error() {
        let (sys, profile) = band_system(8, 2);
        assert!(singular_circles(&sys, &profile, 4).is_err());
    }

    #[test]
    fn action_gap_matches_closed_form() {
        // 𝐡(Σ_a) - 𝐡(0) = C(a, b) for every resonant a; b = 7 and 12.
        for b in [7u32, 12] {
            let (sys, profile) = band_system(8, b);
            for circle in singular_circles(&sys, &profile, 5).unwrap() {
                let expect = c_ab(0.3, circle.a, b);
                for state in &circle.states {
                    let h = sys.action_h(state).unwrap();
                    assert!(
                        (h - expect).abs() < 1e-9 * expect.abs(),
                        "a = {}, b = {b}: {h} vs {expect}",
                        circle.a
                    );
                }
            }
        }
    }

    #[test]
    fn c_and_a_closed_forms() {
        // alpha = 0.3, a = 2, b = 5
        let c = c_ab(0.3, 2, 5);
        let expect_c = std::f64::consts::PI * 0.5 * (1.0 + 0.1 + 0.01 / 3.0);
        assert!((c - expect_c).abs() < 1e-14);
        let a = a_ab(0.3, 2, 5);
        assert!((a - std::f64::consts::PI * 1.1 * 1.1).abs() < 1e-14);
        // a -> b alpha limit: C -> 0
        assert!(c_ab(0.3, 3, 10).abs() < 1e-14);
    }

    #[test]
    fn projection_identities_hold() {
        let (sys, _) = band_system(8, 3);
        let n = sys.period();
        let z = StateVector::new(
            (0..n)
                .map(|j| Vec2::from_polar(0.8 + 0.02 * j as f64, j as f64 * 0.23 + 0.05))
                .collect(),
        );
        assert!(sys.projection_identity_residual(&z).unwrap() < 1e-10);
        // singular states: Q = P = Q'
        let (sys7, profile) = band_system(8, 7);
        let circle = &singular_circles(&sys7, &profile, 3).unwrap()[0];
        for state in &circle.states {
            for j in 0..sys7.period() as i64 {
                let (q, p, qp) = sys7.projections(state, j).unwrap();
                assert!((q - p).norm() < 1e-10 && (qp - p).norm() < 1e-10);
            }
        }
        // zero state: all projections vanish
        let zero = sys.zero_state();
        let (q, p, qp) = sys.projections(&zero, 0).unwrap();
        assert!(q.norm() < 1e-12 && p.norm() < 1e-12 && qp.norm() < 1e-12);
    }

    #[test]
    fn linking_form_counts_winding() {
        // all entries in the open first quadrant: L = 0
        let z = StateVector::new(vec![
            Vec2::new(1.0, 0.5),
            Vec2::new(0.2, 0.9),
            Vec2::new(0.7, 0.3),
            Vec2::new(0.5, 0.5),
        ]);
        assert_eq!(linking_form(&z).unwrap(), 0.0);
        // a loop winding twice in 8 steps: L = 2
        let w = StateVector::new(
            (0..8)
                .map(|j| Vec2::from_polar(1.0, 0.03 + 2.0 * j as f64 / 8.0))
                .collect(),
        );
        assert_eq!(linking_form(&w).unwrap(), 2.0);
        assert_eq!(linking_form_alt(&w).unwrap(), 2.0);
        assert_eq!(loop_winding(&w).unwrap(), 2.0);
        // sign flip leaves L unchanged
        let neg = &w * -1.0;
        assert_eq!(linking_form(&neg).unwrap(), 2.0);
    }

    #[test]
    fn linking_form_rejects_states_outside_v_prime() {
        // x_1 = 0 but y_0 y_1 < 0
        let z = StateVector::new(vec![
            Vec2::new(1.0, 0.5),
            Vec2::new(0.0, -0.5),
            Vec2::new(1.0, 0.5),
        ]);
        assert!(linking_form(&z).is_err());
        // x_1 = 0 with y_0 y_1 > 0 is fine and the term drops out
        let ok = StateVector::new(vec![
            Vec2::new(1.0, 0.5),
            Vec2::new(0.0, 0.5),
            Vec2::new(1.0, 0.5),
        ]);
        assert_eq!(linking_form(&ok).unwrap(), 0.0);
    }

    #[test]
    fn orbit_state_winding_matches_resonance() {
        // the Σ_a loop winds a times around the origin
        let (sys, profile) = band_system(8, 7);
        let circle = &singular_circles(&sys, &profile, 3).unwrap()[0];
        let w = loop_winding(&circle.states[0]).unwrap();
        assert!((w - circle.a as f64).abs() < 1e-9);
    }
}
