//! Adaptive flow integration of `ż = ζ(z)` with the Dormand–Prince 5(4)
//! embedded pair and PI step-size control. Backward flow runs the same
//! scheme with a negative step.

use crate::actionflow::state::StateVector;
use crate::actionflow::system::FlowSystem;
use crate::{Error, Result};

// Dormand–Prince 5(4) tableau (exact rationals).
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
// embedded 4th-order weights
const E1: f64 = 5179.0 / 57600.0;
const E3: f64 = 7571.0 / 16695.0;
const E4: f64 = 393.0 / 640.0;
const E5: f64 = -92097.0 / 339200.0;
const E6: f64 = 187.0 / 2100.0;
const E7: f64 = 1.0 / 40.0;

/// A computed flow line: accepted states plus integrator statistics.
#[derive(Clone, Debug)]
pub struct FlowTrajectory {
    pub samples: Vec<(f64, StateVector)>,
    pub accepted_steps: usize,
    pub rejected_steps: usize,
    pub min_step: f64,
    pub max_step: f64,
}

impl FlowTrajectory {
    pub fn end_time(&self) -> f64 {
        self.samples.last().map(|(t, _)| *t).unwrap_or(0.0)
    }

    pub fn end_state(&self) -> &StateVector {
        &self.samples.last().expect("trajectory has samples").1
    }
}

/// What the step loop should do after looking at an accepted state.
pub enum FlowControl {
    Continue,
    Stop,
}

/// Integrate `ż = ζ(z)` from `z0` to `t_end` (negative `t_end` flows
/// backward). Local error per step is kept below `tol`.
pub fn flow(sys: &FlowSystem, z0: &StateVector, t_end: f64, tol: f64) -> Result<FlowTrajectory> {
    let mut on_step = |_: f64, _: &StateVector| FlowControl::Continue;
    flow_with(sys, z0, t_end, tol, &mut on_step)
}

/// [`flow`] with an observer that can stop the integration early.
pub fn flow_with(
    sys: &FlowSystem,
    z0: &StateVector,
    t_end: f64,
    tol: f64,
    on_step: &mut dyn FnMut(f64, &StateVector) -> FlowControl,
) -> Result<FlowTrajectory> {
    if tol <= 0.0 {
        return Err(Error::Domain("flow tolerance must be positive".into()));
    }
    let dir = if t_end < 0.0 { -1.0 } else { 1.0 };
    let mut t = 0.0f64;
    let mut y = z0.clone();
    let mut k1 = sys.zeta(&y)?;
    if dir < 0.0 {
        k1.scale_in_place(-1.0);
    }

    // initial step from the field magnitude
    let scale = y.norm().max(1.0);
    let mut h = (0.01 * scale / k1.norm().max(1e-10)).min(t_end.abs().max(1e-8));
    let mut err_prev: f64 = 1.0;

    let mut traj = FlowTrajectory {
        samples: vec![(0.0, y.clone())],
        accepted_steps: 0,
        rejected_steps: 0,
        min_step: f64::INFINITY,
        max_step: 0.0,
    };

    let field = |state: &StateVector| -> Result<StateVector> {
        let mut v = sys.zeta(state)?;
        if dir < 0.0 {
            v.scale_in_place(-1.0);
        }
        Ok(v)
    };

    let horizon = t_end.abs();
    while t < horizon {
        h = h.min(horizon - t);
        if h < 1e-13 * horizon.max(1.0) {
            return Err(Error::Integration(format!(
                "step size underflow at t = {t} (flow left the admissible domain?)"
            )));
        }

        let stage = |base: &StateVector, coeffs: &[(f64, &StateVector)]| {
            let mut s = base.clone();
            for &(c, k) in coeffs {
                s.axpy(h * c, k);
            }
            s
        };

        let k2 = field(&stage(&y, &[(A21, &k1)]))?;
        let k3 = field(&stage(&y, &[(A31, &k1), (A32, &k2)]))?;
        let k4 = field(&stage(&y, &[(A41, &k1), (A42, &k2), (A43, &k3)]))?;
        let k5 = field(&stage(&y, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]))?;
        let k6 = field(&stage(
            &y,
            &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)],
        ))?;
        let y_new = stage(&y, &[(B1, &k1), (B3, &k3), (B4, &k4), (B5, &k5), (B6, &k6)]);
        let k7 = field(&y_new)?;
        let y_low = stage(
            &y,
            &[(E1, &k1), (E3, &k3), (E4, &k4), (E5, &k5), (E6, &k6), (E7, &k7)],
        );

        // mixed abs/rel error per component, RMS combined
        let n = y.len();
        let mut err_sq = 0.0;
        for j in 0..n as i64 {
            let e = y_new.entry(j) - y_low.entry(j);
            let s = tol * (1.0 + y.entry(j).norm().max(y_new.entry(j).norm()));
            let ratio = e.norm() / s;
            err_sq += ratio * ratio;
        }
        let err = (err_sq / n as f64).sqrt().max(1e-12);

        if err <= 1.0 {
            t += h;
            y = y_new;
            k1 = k7; // first-same-as-last
            traj.accepted_steps += 1;
            traj.min_step = traj.min_step.min(h);
            traj.max_step = traj.max_step.max(h);
            traj.samples.push((dir * t, y.clone()));
            if let FlowControl::Stop = on_step(dir * t, &y) {
                break;
            }
        } else {
            traj.rejected_steps += 1;
        }

        // PI controller
        let factor = 0.9 * err.powf(-0.7 / 5.0) * err_prev.powf(0.4 / 5.0);
        h *= factor.clamp(0.2, 5.0);
        if err <= 1.0 {
            err_prev = err;
        }
    }
    Ok(traj)
}

/// Empirical Lipschitz ratio of `ζ` over random sample pairs; the paper's
/// bound is `A = √(6K² + 3)`.
pub fn lipschitz_certificate(sys: &FlowSystem, samples: &[(StateVector, StateVector)]) -> f64 {
    let mut worst: f64 = 0.0;
    for (z, w) in samples {
        let dz = (z - w).norm();
        if dz == 0.0 {
            continue;
        }
        if let (Ok(fz), Ok(fw)) = (sys.zeta(z), sys.zeta(w)) {
            worst = worst.max((&fz - &fw).norm() / dz);
        }
    }
    worst
}

/// The paper's Lipschitz constant of `ζ` for a `K`-certified chain.
pub fn zeta_lipschitz_bound(k: f64) -> f64 {
    (6.0 * k * k + 3.0).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::genfun::factor_polar;
    use crate::geom::Vec2;
    use crate::maps::MapFamily;

    fn band_system(m: usize, b: u32) -> FlowSystem {
        let fam = MapFamily::twist_band(0.3, 0.45).unwrap();
        FlowSystem::new(factor_polar(&fam, m, 4.0).unwrap(), b)
    }

    fn random_state(n: usize, seed: u64, radius: f64) -> StateVector {
        // deterministic quasi-random entries
        let mut v = Vec::with_capacity(n);
        let mut s = seed;
        for _ in 0..n {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            let a = (s >> 11) as f64 / (1u64 << 53) as f64;
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            let r = (s >> 11) as f64 / (1u64 << 53) as f64;
            v.push(Vec2::from_polar(radius * (0.2 + 0.8 * r), a));
        }
        StateVector::new(v)
    }

    #[test]
    fn singular_start_stays_constant() {
        let sys = band_system(8, 3);
        let zero = sys.zero_state();
        let traj = flow(&sys, &zero, 5.0, 1e-9).unwrap();
        assert!(traj.end_state().norm() < 1e-9);
    }

    #[test]
    fn action_is_nondecreasing_and_energy_matches() {
        let sys = band_system(8, 3);
        let z0 = random_state(sys.period(), 42, 0.6);
        let traj = flow(&sys, &z0, 2.0, 1e-10).unwrap();
        let mut prev = f64::NEG_INFINITY;
        for (_, state) in &traj.samples {
            let h = sys.action_h(state).unwrap();
            assert!(h >= prev - 1e-9, "action decreased: {prev} -> {h}");
            prev = h;
        }
        // increase of 𝐡 equals ∫‖ζ‖² dt (Simpson over accepted steps,
        // midpoints recovered by flowing half an interval)
        let mut integral = 0.0;
        for win in traj.samples.windows(2) {
            let (t0, ref s0) = win[0];
            let (t1, ref s1) = win[1];
            let mid = flow(&sys, s0, 0.5 * (t1 - t0), 1e-12).unwrap();
            let n0 = sys.zeta(s0).unwrap().norm_sq();
            let nm = sys.zeta(mid.end_state()).unwrap().norm_sq();
            let n1 = sys.zeta(s1).unwrap().norm_sq();
            integral += (n0 + 4.0 * nm + n1) / 6.0 * (t1 - t0);
        }
        let gained = sys.action_h(traj.end_state()).unwrap() - sys.action_h(&z0).unwrap();
        assert!(
            (gained - integral).abs() < 1e-6 * gained.abs().max(1e-3),
            "Δ𝐡 = {gained} vs ∫‖ζ‖² = {integral}"
        );
    }

    #[test]
    fn gronwall_sandwich_forward_and_backward() {
        let sys = band_system(8, 3);
        let a = zeta_lipschitz_bound(sys.chain.k);
        let z = random_state(sys.period(), 7, 0.5);
        let mut w = z.clone();
        w.axpy(1e-3, &random_state(sys.period(), 13, 1.0));
        let d0 = (&z - &w).norm();
        for t_end in [0.8f64, -0.8] {
            let zt = flow(&sys, &z, t_end, 1e-10).unwrap();
            let wt = flow(&sys, &w, t_end, 1e-10).unwrap();
            let dt = (zt.end_state() - wt.end_state()).norm();
            let grow = (a * t_end.abs()).exp();
            assert!(dt <= d0 * grow * (1.0 + 1e-6), "upper Gronwall");
            assert!(dt >= d0 / grow * (1.0 - 1e-6), "lower Gronwall");
        }
    }

    #[test]
    fn backward_then_forward_returns() {
        let sys = band_system(8, 3);
        let z = random_state(sys.period(), 3, 0.4);
        let back = flow(&sys, &z, -0.7, 1e-11).unwrap();
        let fwd = flow(&sys, back.end_state(), 0.7, 1e-11).unwrap();
        assert!((fwd.end_state() - &z).norm() < 1e-7);
    }

    #[test]
    fn observed_lipschitz_below_paper_bound() {
        let sys = band_system(8, 3);
        let pairs: Vec<_> = (0..200)
            .map(|i| {
                (
                    random_state(sys.period(), 1000 + i, 1.2),
                    random_state(sys.period(), 5000 + i, 1.2),
                )
            })
            .collect();
        let observed = lipschitz_certificate(&sys, &pairs);
        let bound = zeta_lipschitz_bound(sys.chain.k);
        assert!(
            observed <= bound,
            "observed {observed} exceeds bound {bound}"
        );
        // K = 1 chains have bound 3
        assert!((zeta_lipschitz_bound(1.0) - 3.0).abs() < 1e-15);
    }

    #[test]
    fn identity_chain_zeta_is_linear_with_ratio_at_most_three() {
        let fam = MapFamily::identity();
        let chain = factor_polar(&fam, 4, 1.0).unwrap();
        let sys = FlowSystem::new(chain, 2);
        // ζ(z) - ζ(w) = ζ(z - w) for the identity chain (linear field)
        let z = random_state(sys.period(), 21, 1.0);
        let w = random_state(sys.period(), 22, 1.0);
        let lhs = &sys.zeta(&z).unwrap() - &sys.zeta(&w).unwrap();
        let rhs = sys.zeta(&(&z - &w)).unwrap();
        assert!((&lhs - &rhs).norm() < 1e-9);
        let pairs = vec![(z, w)];
        assert!(lipschitz_certificate(&sys, &pairs) <= 3.0 + 1e-9);
    }
}
