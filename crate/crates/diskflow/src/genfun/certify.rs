//! Empirical Lipschitz certification of untwisted factors.
//!
//! The checks sample difference quotients on a fixed polar grid; they are
//! evidence, not a proof, and the report says so.

use crate::genfun::factor::UntwistedFactor;
use crate::geom::Vec2;
use crate::{tol, Result};
use std::fmt;

/// Where and how densely to sample.
#[derive(Clone, Copy, Debug)]
pub struct SampleSpec {
    /// Outer radius of the sampled region.
    pub r_max: f64,
    /// Radial sample count.
    pub n_radial: usize,
    /// Angular sample count.
    pub n_angular: usize,
}

impl Default for SampleSpec {
    fn default() -> Self {
        SampleSpec {
            r_max: 1.6,
            n_radial: 200,
            n_angular: 200,
        }
    }
}

/// Observed ratio range of one certified condition.
#[derive(Clone, Copy, Debug)]
pub struct ConditionReport {
    pub name: &'static str,
    /// Largest observed expansion ratio.
    pub max_ratio: f64,
    /// Smallest observed ratio (meaningful for the bi-Lipschitz checks).
    pub min_ratio: f64,
    pub samples: usize,
    /// Whether the condition holds at the requested constant.
    pub pass: bool,
}

/// The full certificate: one entry per condition i)–iv) plus the
/// untwisted residual check.
#[derive(Clone, Debug)]
pub struct CertificateReport {
    pub k_requested: f64,
    pub conditions: Vec<ConditionReport>,
    /// Max residual of `f(g(X,y), y) = (X, g'(X,y))` over the grid.
    pub solve_residual: f64,
    pub pass: bool,
}

impl fmt::Display for CertificateReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "untwisted-factor certificate (empirical, sampled; K = {:.6})",
            self.k_requested
        )?;
        for c in &self.conditions {
            writeln!(
                f,
                "condition {:<28} max_ratio {:.9} min_ratio {:.9} samples {} {}",
                c.name,
                c.max_ratio,
                c.min_ratio,
                c.samples,
                if c.pass { "pass" } else { "FAIL" }
            )?;
        }
        writeln!(f, "solve_residual {:.3e}", self.solve_residual)?;
        writeln!(f, "verdict {}", if self.pass { "pass" } else { "FAIL" })
    }
}

/// Certify conditions i)–iv) of a `K`-Lipschitz untwisted factor on a
/// polar grid. Always produces a report; `pass` carries the verdict.
pub fn verify_untwisted_lipschitz(
    factor: &UntwistedFactor,
    k: f64,
    spec: &SampleSpec,
) -> Result<CertificateReport> {
    let allowed = k + tol::CERT_SLACK;
    let inv_allowed = 1.0 / allowed - tol::CERT_SLACK;
    let mut conditions = Vec::new();
    let mut residual: f64 = 0.0;

    // i) untwisted: x -> π₁ f(x, y) strictly increasing, witnessed by the
    // solve succeeding with positive pairwise quotients along x-lines.
    // ii) f is K bi-Lipschitz: quotients along grid edges.
    let mut bi_max: f64 = 0.0;
    let mut bi_min = f64::INFINITY;
    let mut untwisted_ok = true;
    let mut pair_count = 0usize;
    let grid_pt = |i: usize, j: usize| {
        let r = spec.r_max * (i + 1) as f64 / spec.n_radial as f64;
        Vec2::from_polar(r, j as f64 / spec.n_angular as f64)
    };
    for i in 0..spec.n_radial {
        for j in 0..spec.n_angular {
            let z = grid_pt(i, j);
            let fz = factor.forward(z);
            for (di, dj) in [(0usize, 1usize), (1, 0)] {
                let (i2, j2) = (i + di, (j + dj) % spec.n_angular);
                if i2 >= spec.n_radial {
                    continue;
                }
                let w = grid_pt(i2, j2);
                let num = (factor.forward(w) - fz).norm();
                let den = (w - z).norm();
                if den > 0.0 {
                    let q = num / den;
                    bi_max = bi_max.max(q);
                    bi_min = bi_min.min(q);
                    pair_count += 1;
                }
            }
        }
    }
    conditions.push(ConditionReport {
        name: "ii_f_bilipschitz",
        max_ratio: bi_max,
        min_ratio: bi_min,
        samples: pair_count,
        pass: bi_max <= allowed && bi_min >= inv_allowed,
    });

    // iii) X -> g(X,y) and y -> g'(X,y) bi-Lipschitz;
    // iv) y -> g(X,y) and X -> g'(X,y) Lipschitz.
    // Sampled on a Cartesian grid of generating coordinates.
    let n = spec.n_radial.min(spec.n_angular);
    let coord = |i: usize| spec.r_max * (2.0 * i as f64 / (n - 1) as f64 - 1.0);
    let mut g_x = RatioRange::new(); // iii, g along X
    let mut gp_y = RatioRange::new(); // iii, g' along y
    let mut g_y = RatioRange::new(); // iv, g along y
    let mut gp_x = RatioRange::new(); // iv, g' along X
    let mut grid = vec![vec![(f64::NAN, f64::NAN); n]; n];
    for (i, row) in grid.iter_mut().enumerate() {
        for (j, cell) in row.iter_mut().enumerate() {
            let (x_img, y) = (coord(i), coord(j));
            match factor.solve(x_img, y) {
                Ok((x, y_out)) => {
                    *cell = (x, y_out);
                    let img = factor.forward(Vec2::new(x, y));
                    residual = residual
                        .max((img.x - x_img).abs())
                        .max((img.y - y_out).abs());
                }
                Err(_) => untwisted_ok = false,
            }
        }
    }
    let step = coord(1) - coord(0);
    for i in 0..n {
        for j in 0..n {
            let (g0, gp0) = grid[i][j];
            if !g0.is_finite() {
                continue;
            }
            if i + 1 < n && grid[i + 1][j].0.is_finite() {
                let (g1, gp1) = grid[i + 1][j];
                if g1 - g0 <= 0.0 {
                    untwisted_ok = false; // X -> g must increase
                }
                g_x.push((g1 - g0).abs() / step);
                gp_x.push((gp1 - gp0).abs() / step);
            }
            if j + 1 < n && grid[i][j + 1].0.is_finite() {
                let (g1, gp1) = grid[i][j + 1];
                g_y.push((g1 - g0).abs() / step);
                gp_y.push((gp1 - gp0).abs() / step);
            }
        }
    }
    conditions.push(ConditionReport {
        name: "i_untwisted",
        max_ratio: if untwisted_ok { 1.0 } else { f64::INFINITY },
        min_ratio: if untwisted_ok { 1.0 } else { 0.0 },
        samples: n * n,
        pass: untwisted_ok && residual < tol::FACTOR_RESIDUAL,
    });
    conditions.push(ConditionReport {
        name: "iii_g_bilipschitz_in_X",
        max_ratio: g_x.max,
        min_ratio: g_x.min,
        samples: g_x.count,
        pass: g_x.max <= allowed && g_x.min >= inv_allowed,
    });
    conditions.push(ConditionReport {
        name: "iii_gprime_bilipschitz_in_y",
        max_ratio: gp_y.max,
        min_ratio: gp_y.min,
        samples: gp_y.count,
        pass: gp_y.max <= allowed && gp_y.min >= inv_allowed,
    });
    conditions.push(ConditionReport {
        name: "iv_g_lipschitz_in_y",
        max_ratio: g_y.max,
        min_ratio: g_y.min,
        samples: g_y.count,
        pass: g_y.max <= allowed,
    });
    conditions.push(ConditionReport {
        name: "iv_gprime_lipschitz_in_X",
        max_ratio: gp_x.max,
        min_ratio: gp_x.min,
        samples: gp_x.count,
        pass: gp_x.max <= allowed,
    });

    let pass = conditions.iter().all(|c| c.pass);
    Ok(CertificateReport {
        k_requested: k,
        conditions,
        solve_residual: residual,
        pass,
    })
}

struct RatioRange {
    max: f64,
    min: f64,
    count: usize,
}

impl RatioRange {
    fn new() -> Self {
        RatioRange {
            max: 0.0,
            min: f64::INFINITY,
            count: 0,
        }
    }

    fn push(&mut self, q: f64) {
        self.max = self.max.max(q);
        self.min = self.min.min(q);
        self.count += 1;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::TAU;

    fn small_spec() -> SampleSpec {
        SampleSpec {
            r_max: 1.6,
            n_radial: 60,
            n_angular: 60,
        }
    }

    #[test]
    fn identity_certifies_at_one() {
        let id = UntwistedFactor::rotation(0.0, 1.0);
        let report = verify_untwisted_lipschitz(&id, 1.0, &small_spec()).unwrap();
        assert!(report.pass, "{report}");
        for c in &report.conditions {
            assert!(c.max_ratio <= 1.0 + 1e-9, "{}", c.name);
        }
    }

    #[test]
    fn rotation_needs_one_over_cosine() {
        // g is (1/cos β)-Lipschitz in X: K below that fails, above passes.
        let beta_turns = 0.06;
        let needed = 1.0 / (TAU * beta_turns).cos();
        let factor = UntwistedFactor::rotation(beta_turns, needed);
        let fail = verify_untwisted_lipschitz(&factor, needed - 0.01, &small_spec()).unwrap();
        assert!(!fail.pass);
        assert!(fail
            .conditions
            .iter()
            .any(|c| c.name.starts_with("iii") && !c.pass));
        let pass = verify_untwisted_lipschitz(&factor, needed + 0.01, &small_spec()).unwrap();
        assert!(pass.pass, "{pass}");
    }

    #[test]
    fn report_text_is_structured() {
        let id = UntwistedFactor::rotation(0.0, 1.0);
        let report = verify_untwisted_lipschitz(&id, 1.0, &small_spec()).unwrap();
        let text = report.to_string();
        assert!(text.contains("condition"));
        assert!(text.contains("samples"));
        assert!(text.contains("empirical"));
        assert!(text.contains("verdict pass"));
    }
}
