//! Untwisted area-preserving factors: the implicit solves `(X, y) -> (x, Y)`
//! and their generating values.

use crate::geom::Vec2;
use crate::maps::{LocalTwist, PlaneMap, PolarMap, RadialTurns};
use crate::{tol, Error, Result};
use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;

/// The closed-form maps a factor can be.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum FactorMap {
    Polar(PolarMap),
    LocalTwist(LocalTwist),
}

impl FactorMap {
    pub fn as_plane(&self) -> &dyn PlaneMap {
        match self {
            FactorMap::Polar(m) => m,
            FactorMap::LocalTwist(m) => m,
        }
    }

    /// First coordinate of the forward image and its x-derivative.
    fn forward_x_dx(&self, x: f64, y: f64) -> (f64, f64) {
        match self {
            FactorMap::Polar(m) => {
                let r = x.hypot(y);
                let gamma = TAU * m.profile.turns(r);
                let dgamma = TAU * m.profile.dturns(r);
                let (s, c) = gamma.sin_cos();
                let fx = x * c - y * s;
                let fy = x * s + y * c;
                let dr_dx = if r > 0.0 { x / r } else { 0.0 };
                (fx, c - fy * dgamma * dr_dx)
            }
            FactorMap::LocalTwist(m) => {
                let wx = x - m.center.x;
                let wy = y - m.center.y;
                let rho = wx.hypot(wy);
                let gamma = TAU * m.local_turns(rho);
                let dgamma = TAU * m.local_profile_derivative(rho);
                let (s, c) = gamma.sin_cos();
                let fx = m.center.x + wx * c - wy * s;
                let fwy = wx * s + wy * c;
                let dr_dx = if rho > 0.0 { wx / rho } else { 0.0 };
                (fx, c - fwy * dgamma * dr_dx)
            }
        }
    }
}

/// An untwisted `K`-Lipschitz factor: the forward map together with the
/// generating-coordinate solves `x = g(X, y)`, `Y = g'(X, y)` and the
/// generating value `h` normalized by `h(0, 0) = 0`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UntwistedFactor {
    pub map: FactorMap,
    /// Lipschitz certificate the factor is claimed (and checked) to obey.
    pub k: f64,
}

impl UntwistedFactor {
    pub fn polar(profile: RadialTurns, k: f64) -> Self {
        UntwistedFactor {
            map: FactorMap::Polar(PolarMap::new(profile)),
            k,
        }
    }

    pub fn rotation(turns: f64, k: f64) -> Self {
        Self::polar(RadialTurns::Const(turns), k)
    }

    pub fn local_twist(twist: LocalTwist, k: f64) -> Self {
        UntwistedFactor {
            map: FactorMap::LocalTwist(twist),
            k,
        }
    }

    pub fn forward(&self, z: Vec2) -> Vec2 {
        self.map.as_plane().eval(z)
    }

    pub fn inverse(&self, z: Vec2) -> Vec2 {
        self.map.as_plane().eval_inverse(z)
    }

    /// Solve `π₁(f(x, y)) = X` for `x`: safeguarded Newton with a
    /// bisection bracket of width `4K|X| + 4`.
    pub fn g(&self, x_img: f64, y: f64) -> Result<f64> {
        let half_width = 4.0 * self.k * x_img.abs() + 4.0;
        let (mut lo, mut hi) = (x_img - half_width, x_img + half_width);
        let f_lo = self.map.forward_x_dx(lo, y).0 - x_img;
        let f_hi = self.map.forward_x_dx(hi, y).0 - x_img;
        if f_lo > 0.0 || f_hi < 0.0 {
            return Err(Error::SolveFailed {
                x: x_img,
                y,
                reason: "no sign change in the bisection bracket".into(),
            });
        }

        let mut x = x_img; // near-identity factors: the image is close
        for _ in 0..tol::NEWTON_MAX_ITER {
            let (fx, dfx) = self.map.forward_x_dx(x, y);
            let res = fx - x_img;
            if res.abs() < tol::NEWTON_RESIDUAL {
                return Ok(x);
            }
            if res > 0.0 {
                hi = x;
            } else {
                lo = x;
            }
            let newton = x - res / dfx;
            x = if dfx.abs() > 1e-14 && newton > lo && newton < hi {
                newton
            } else {
                0.5 * (lo + hi)
            };
        }
        // Newton stalled; pure bisection finishes the bracket off.
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            let res = self.map.forward_x_dx(mid, y).0 - x_img;
            if res.abs() < tol::NEWTON_RESIDUAL {
                return Ok(mid);
            }
            if res > 0.0 {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        Err(Error::SolveFailed {
            x: x_img,
            y,
            reason: "residual did not reach tolerance; factor may not be untwisted here".into(),
        })
    }

    /// `Y = g'(X, y)`: second coordinate of the forward image at the
    /// solved preimage.
    pub fn g_prime(&self, x_img: f64, y: f64) -> Result<f64> {
        let x = self.g(x_img, y)?;
        Ok(self.forward(Vec2::new(x, y)).y)
    }

    /// Both generating coordinates at once.
    pub fn solve(&self, x_img: f64, y: f64) -> Result<(f64, f64)> {
        let x = self.g(x_img, y)?;
        Ok((x, self.forward(Vec2::new(x, y)).y))
    }

    /// Generating value `h(X, y)` with `h(0,0) = 0`, in closed form.
    ///
    /// For a twist about a center `c` (the origin for polar factors) with
    /// radial angle `γ(ρ)`, exactness of `x dy + Y dX` integrates to
    /// `h = (xy + XY)/2 - ½∫₀^ρ σ²γ'(σ)dσ` plus, off center, a linear
    /// boundary term; see the module tests for the quadrature cross-check.
    pub fn h(&self, x_img: f64, y: f64) -> Result<f64> {
        let (x, y_img) = self.solve(x_img, y)?;
        let symmetric = 0.5 * (x * y + x_img * y_img);
        match &self.map {
            FactorMap::Polar(m) => {
                let r = x.hypot(y);
                Ok(symmetric - std::f64::consts::PI * m.profile.twist_moment(r))
            }
            FactorMap::LocalTwist(m) => {
                let (wx, wy) = (x - m.center.x, y - m.center.y);
                let (cap_wx, cap_wy) = (x_img - m.center.x, y_img - m.center.y);
                let rho = wx.hypot(wy);
                let full = m.local_twist_moment(m.radius);
                let radial = 0.5 * (m.local_twist_moment(rho) - full);
                let linear = 0.5
                    * (m.center.y * wx - m.center.x * wy + m.center.x * cap_wy
                        - m.center.y * cap_wx);
                Ok(symmetric - radial - linear)
            }
        }
    }
}

/// Solve the untwisted relation: returns `(x, Y)` with
/// `f(x, y) = (X, Y)`.
pub fn solve_untwisted(factor: &UntwistedFactor, x_img: f64, y: f64) -> Result<(f64, f64)> {
    factor.solve(x_img, y)
}

/// Generating value by the defining line integral of `x dy + Y dX` along
/// the straight segment from the origin, Gauss–Legendre with adaptive
/// refinement, with a path-independence check against an L-shaped path.
///
/// This is the generic route; [`UntwistedFactor::h`] is the closed form
/// it validates against.
pub fn generating_value(factor: &UntwistedFactor, x_img: f64, y: f64) -> Result<f64> {
    let straight = line_integral(factor, |t| (t * x_img, t * y), |_| (x_img, y), 1e-10)?;
    // L-shaped path: (0,0) -> (X,0) -> (X,y); velocities differ per leg.
    let leg1 = line_integral(factor, |t| (t * x_img, 0.0), |_| (x_img, 0.0), 1e-10)?;
    let leg2 = line_integral(factor, |t| (x_img, t * y), |_| (0.0, y), 1e-10)?;
    let defect = (straight - leg1 - leg2).abs();
    if defect > 1e-8 {
        return Err(Error::Integration(format!(
            "path dependence {defect:.3e} in the generating integral; \
             factor does not preserve area"
        )));
    }
    Ok(straight)
}

/// Radii at which the factor's rotation profile has derivative jumps,
/// measured from the relevant twist center.
fn profile_kink_radii(map: &FactorMap) -> Vec<f64> {
    fn radial_kinks(p: &RadialTurns, out: &mut Vec<f64>) {
        match p {
            RadialTurns::Const(_) => {}
            RadialTurns::Band { alpha, beta } => {
                out.push(1.0);
                out.push(1.0 + beta - alpha);
            }
            RadialTurns::Scaled { inner, .. } => radial_kinks(inner, out),
        }
    }
    let mut out = Vec::new();
    match map {
        FactorMap::Polar(m) => radial_kinks(&m.profile, &mut out),
        FactorMap::LocalTwist(m) => out.push(m.radius),
    }
    out
}

/// Distance of the solved preimage from the factor's twist center.
fn preimage_center_radius(factor: &UntwistedFactor, x_img: f64, y: f64) -> Result<f64> {
    let x = factor.g(x_img, y)?;
    Ok(match &factor.map {
        FactorMap::Polar(_) => x.hypot(y),
        FactorMap::LocalTwist(m) => (Vec2::new(x, y) - m.center).norm(),
    })
}

/// Parameters in (0, 1) where the integrand loses smoothness: the solved
/// preimage crosses a kink radius of the profile. Located by scanning and
/// bisection so the quadrature can split there.
fn kink_params<P: Fn(f64) -> (f64, f64)>(
    factor: &UntwistedFactor,
    path: &P,
    kinks: &[f64],
) -> Result<Vec<f64>> {
    let n = 64;
    let radius_at = |t: f64| -> Result<f64> {
        let (cx, y) = path(t);
        preimage_center_radius(factor, cx, y)
    };
    let mut cuts = Vec::new();
    let mut prev_t = 0.0;
    let mut prev_r = radius_at(0.0)?;
    for i in 1..=n {
        let t = i as f64 / n as f64;
        let r = radius_at(t)?;
        for &kink in kinks {
            if (prev_r - kink) * (r - kink) < 0.0 {
                let (mut lo, mut hi) = (prev_t, t);
                let mut f_lo = prev_r - kink;
                for _ in 0..60 {
                    let mid = 0.5 * (lo + hi);
                    let f_mid = radius_at(mid)? - kink;
                    if f_lo * f_mid <= 0.0 {
                        hi = mid;
                    } else {
                        lo = mid;
                        f_lo = f_mid;
                    }
                }
                cuts.push(0.5 * (lo + hi));
            }
        }
        prev_t = t;
        prev_r = r;
    }
    cuts.sort_by(f64::total_cmp);
    Ok(cuts)
}

/// Positive nodes and weights of the 16-point Gauss–Legendre rule on
/// `[-1, 1]`, computed once by Newton iteration on `P_16`.
fn gl16_nodes() -> &'static [(f64, f64); 8] {
    use std::sync::OnceLock;
    static NODES: OnceLock<[(f64, f64); 8]> = OnceLock::new();
    NODES.get_or_init(|| {
        let n = 16usize;
        // P_n and P_n' by the three-term recurrence.
        let legendre = |x: f64| {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let k = k as f64;
                let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            (p1, dp)
        };
        let mut out = [(0.0, 0.0); 8];
        for (i, slot) in out.iter_mut().enumerate() {
            // Chebyshev-based initial guess for the i-th positive root.
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            for _ in 0..60 {
                let (p, dp) = legendre(x);
                let step = p / dp;
                x -= step;
                if step.abs() < 1e-16 {
                    break;
                }
            }
            let (_, dp) = legendre(x);
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            *slot = (x, w);
        }
        out
    })
}

fn gl16<F: FnMut(f64) -> Result<f64>>(mut f: F, a: f64, b: f64) -> Result<f64> {
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let mut acc = 0.0;
    for &(x, w) in gl16_nodes() {
        let d = half * x;
        acc += w * (f(mid + d)? + f(mid - d)?);
    }
    Ok(acc * half)
}

// Adaptive bisection around panels where the two GL estimates disagree;
// the factor profiles have kinks, so local refinement is required.
fn adaptive_gl<F: FnMut(f64) -> Result<f64> + Copy>(
    f: F,
    a: f64,
    b: f64,
    tolerance: f64,
    depth: usize,
) -> Result<f64> {
    let whole = gl16(f, a, b)?;
    let mid = 0.5 * (a + b);
    let split = gl16(f, a, mid)? + gl16(f, mid, b)?;
    if (whole - split).abs() < tolerance {
        return Ok(split);
    }
    if depth == 0 {
        return Err(Error::Integration(
            "generating-value quadrature did not converge".into(),
        ));
    }
    Ok(adaptive_gl(f, a, mid, tolerance / 2.0, depth - 1)?
        + adaptive_gl(f, mid, b, tolerance / 2.0, depth - 1)?)
}

fn line_integral<P, V>(
    factor: &UntwistedFactor,
    path: P,
    velocity: V,
    tolerance: f64,
) -> Result<f64>
where
    P: Fn(f64) -> (f64, f64),
    V: Fn(f64) -> (f64, f64),
{
    let integrand = |t: f64| -> Result<f64> {
        let (cap_x, y) = path(t);
        let (dx, dy) = velocity(t);
        let (x, cap_y) = factor.solve(cap_x, y)?;
        Ok(x * dy + cap_y * dx)
    };
    let kinks = profile_kink_radii(&factor.map);
    let cuts = kink_params(factor, &path, &kinks)?;
    let mut acc = 0.0;
    let mut lo = 0.0;
    for hi in cuts.into_iter().chain(std::iter::once(1.0)) {
        if hi > lo {
            acc += adaptive_gl(&integrand, lo, hi, tolerance, 30)?;
            lo = hi;
        }
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rotation_solve_matches_linear_inverse() {
        // g(X, y) = (X + y sin β) / cos β for the rigid rotation R_β.
        let beta_turns = 0.07;
        let factor = UntwistedFactor::rotation(beta_turns, 1.3);
        let beta = TAU * beta_turns;
        for (x_img, y) in [(0.4, 0.2), (-0.3, 0.9), (1.2, -1.1), (0.0, 0.0)] {
            let (x, y_out) = factor.solve(x_img, y).unwrap();
            let expect_x = (x_img + y * beta.sin()) / beta.cos();
            let expect_y = x_img * beta.tan() + y / beta.cos();
            assert!((x - expect_x).abs() < 1e-11, "{x} vs {expect_x}");
            assert!((y_out - expect_y).abs() < 1e-11);
            // forward consistency: f(g(X,y), y) = (X, g'(X,y))
            let img = factor.forward(Vec2::new(x, y));
            assert!((img.x - x_img).abs() < tol::NEWTON_RESIDUAL * 10.0);
        }
    }

    #[test]
    fn identity_factor_solves_trivially() {
        let id = UntwistedFactor::rotation(0.0, 1.0);
        let (x, y_out) = id.solve(0.7, -0.2).unwrap();
        assert!((x - 0.7).abs() < 1e-13 && (y_out + 0.2).abs() < 1e-13);
        // h(X, y) = Xy for the identity
        assert!((id.h(0.7, -0.2).unwrap() + 0.14).abs() < 1e-13);
    }

    #[test]
    fn roundtrip_forward_then_solve() {
        let band = RadialTurns::Band {
            alpha: 0.3,
            beta: 0.45,
        }
        .scaled(1.0 / 8.0);
        let factor = UntwistedFactor::polar(band, 2.0);
        for k in 0..40 {
            let z = Vec2::from_polar(0.2 + 0.05 * k as f64, (3 * k) as f64 / 40.0);
            let img = factor.forward(z);
            let (x, y_out) = factor.solve(img.x, z.y).unwrap();
            assert!((x - z.x).abs() < 1e-10, "x roundtrip at {z:?}");
            assert!((y_out - img.y).abs() < 1e-10);
        }
    }

    #[test]
    fn rotation_generating_value_closed_form() {
        // h(X,y) = Xy/cosβ + (tanβ/2)(X² + y²) for R_β.
        let beta_turns = 0.06;
        let beta = TAU * beta_turns;
        let factor = UntwistedFactor::rotation(beta_turns, 1.3);
        for (x_img, y) in [(0.5, 0.3), (-0.2, 0.8), (1.1, -0.4)] {
            let expect = x_img * y / beta.cos() + beta.tan() / 2.0 * (x_img * x_img + y * y);
            let h = factor.h(x_img, y).unwrap();
            assert!((h - expect).abs() < 1e-11, "{h} vs {expect}");
        }
        assert!(factor.h(0.0, 0.0).unwrap().abs() < 1e-14);
    }

    #[test]
    fn closed_form_matches_quadrature_for_band_factor() {
        let band = RadialTurns::Band {
            alpha: 0.3,
            beta: 0.45,
        }
        .scaled(1.0 / 8.0);
        let factor = UntwistedFactor::polar(band, 2.0);
        for (x_img, y) in [(0.8, 0.5), (1.1, -0.3), (-0.9, 0.8), (0.3, 1.2)] {
            let closed = factor.h(x_img, y).unwrap();
            let quad = generating_value(&factor, x_img, y).unwrap();
            assert!((closed - quad).abs() < 1e-9, "{closed} vs {quad}");
        }
    }

    #[test]
    fn closed_form_matches_quadrature_for_local_twist() {
        let tw = LocalTwist::new(Vec2::new(0.45, 0.1), 0.2, 0.05).unwrap();
        let factor = UntwistedFactor::local_twist(tw, 2.0);
        for (x_img, y) in [(0.5, 0.2), (0.42, 0.05), (0.3, -0.2), (0.6, 0.25)] {
            let closed = factor.h(x_img, y).unwrap();
            let quad = generating_value(&factor, x_img, y).unwrap();
            assert!((closed - quad).abs() < 1e-9, "{closed} vs {quad}");
        }
        assert!(factor.h(0.0, 0.0).unwrap().abs() < 1e-14);
    }

    #[test]
    fn gradient_of_h_reproduces_g_and_gprime() {
        let band = RadialTurns::Band {
            alpha: 0.3,
            beta: 0.45,
        }
        .scaled(1.0 / 8.0);
        let tw = LocalTwist::new(Vec2::new(-0.4, 0.15), 0.18, 0.04).unwrap();
        let factors = [
            UntwistedFactor::polar(band, 2.0),
            UntwistedFactor::local_twist(tw, 2.0),
        ];
        let step = 1e-5;
        for factor in &factors {
            for (x_img, y) in [(0.6, 0.4), (-0.5, 0.3), (0.2, -0.7)] {
                let dh_dy = (factor.h(x_img, y + step).unwrap()
                    - factor.h(x_img, y - step).unwrap())
                    / (2.0 * step);
                let dh_dx = (factor.h(x_img + step, y).unwrap()
                    - factor.h(x_img - step, y).unwrap())
                    / (2.0 * step);
                let g = factor.g(x_img, y).unwrap();
                let gp = factor.g_prime(x_img, y).unwrap();
                assert!(
                    (dh_dy - g).abs() < 1e-6 * (1.0 + g.abs()),
                    "∂h/∂y = {dh_dy} vs g = {g}"
                );
                assert!(
                    (dh_dx - gp).abs() < 1e-6 * (1.0 + gp.abs()),
                    "∂h/∂X = {dh_dx} vs g' = {gp}"
                );
            }
        }
    }

    #[test]
    fn gauss_rule_is_degree_31_exact() {
        // ∫_a^b t^k dt for k up to 31 must be exact for the 16-point rule.
        let (a, b): (f64, f64) = (-0.7, 1.3);
        for k in 0..=31u32 {
            let exact = (b.powi(k as i32 + 1) - a.powi(k as i32 + 1)) / (k as f64 + 1.0);
            let got = gl16(|t: f64| Ok(t.powi(k as i32)), a, b).unwrap();
            assert!(
                (got - exact).abs() < 1e-12 * exact.abs().max(1.0),
                "degree {k}: {got} vs {exact}"
            );
        }
    }

    #[test]
    fn solve_fails_for_twisted_rotation() {
        // A quarter turn has cos γ = 0: the factor is not untwisted.
        let factor = UntwistedFactor::rotation(0.25, 1.0);
        assert!(factor.g(0.5, 0.5).is_err());
    }
}
