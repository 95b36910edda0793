//! Computational machinery for area-preserving disk maps: polar twist
//! families and their universal-cover lifts, generating-function
//! decompositions into untwisted factors, the finite-dimensional gradient
//! flow whose singularities are the periodic orbits, the discrete
//! quarter-turn angle calculus on radial foliations, and three independent
//! Calabi-invariant estimators that cross-validate each other.
//!
//! The crate is organized along the pipeline:
//!
//! * [`maps`] — concrete map families (rotations, twist bands), isotopies,
//!   cover lifts, closed-form invariant values.
//! * [`genfun`] — untwisted factors, implicit solves, generating values,
//!   Lipschitz certification, decomposition of a plane map into factors.
//! * [`actionflow`] — the space `E_b`, the vector field `zeta` and its
//!   action, flow integration, singular circles, the invariant disk mesh,
//!   the finite-order approximation and the good isotopy.
//! * [`foliation`] — quarter angles, winding counts, displacement and
//!   linking cocycles, rotation/linking number estimators.
//! * [`calabi`] — winding, action and linking estimators of the Calabi
//!   invariant plus the convergence bound experiments.

pub mod actionflow;
pub mod calabi;
pub mod foliation;
pub mod genfun;
pub mod geom;
pub mod maps;

use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument was outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// An implicit solve did not converge; usually means the factor is not
    /// untwisted at the queried point.
    #[error("implicit solve failed at (X={x}, y={y}): {reason}")]
    SolveFailed { x: f64, y: f64, reason: String },

    /// A certification run rejected the requested constant.
    #[error("certification failed: {0}")]
    Certification(String),

    /// Numerical integration could not reach the requested tolerance.
    #[error("integration failure: {0}")]
    Integration(String),

    /// An adaptive refinement loop exhausted its budget.
    #[error("refinement exhausted: {0}")]
    Refinement(String),

    /// Flow did not converge to the target set within the time budget.
    #[error("flow non-convergence: {0}")]
    NonConvergence(String),

    /// A serialized artifact could not be read back.
    #[error("format error: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

/// Pinned numerical tolerances used across the crate.
///
/// These are contract values, not knobs: tests and the acceptance suite
/// assert against them directly.
pub mod tol {
    /// Residual bound for the one-dimensional implicit solves.
    pub const NEWTON_RESIDUAL: f64 = 1e-12;
    /// Iteration cap for Newton before bisection takes over entirely.
    pub const NEWTON_MAX_ITER: usize = 50;
    /// Sampled-jump bound for continuity checks of the band extension.
    pub const BAND_CONTINUITY: f64 = 1e-9;
    /// Residual bound for `f(g(X,y), y) = (X, g'(X,y))` on samples.
    pub const FACTOR_RESIDUAL: f64 = 1e-9;
    /// Slack added to Lipschitz certification comparisons.
    pub const CERT_SLACK: f64 = 1e-9;
    /// Relative tolerance for finite-difference gradient checks.
    pub const GRAD_CHECK_REL: f64 = 1e-6;
    /// Default local error tolerance of the flow integrator.
    pub const FLOW_TOL: f64 = 1e-9;
    /// `zeta` norm below which a state counts as singular.
    pub const SINGULAR_ZETA: f64 = 1e-6;
    /// Distance threshold for "converged to the singular circle".
    pub const SIGMA_DIST: f64 = 1e-6;
    /// Coordinates smaller than this count as zero for the sign calculus.
    pub const SIGN_ZERO: f64 = 1e-12;
    /// Leaf-coordinate band inside which two cover points share a leaf.
    pub const LEAF_EPS: f64 = 1e-9;
    /// Bisection depth cap of the quarter-angle tracker.
    pub const TRACKER_MAX_DEPTH: usize = 40;
}

#[cfg(test)]
mod tests {
    #[test]
    fn error_messages_carry_context() {
        let err = crate::Error::Domain("a/b outside (alpha, beta)".into());
        assert!(err.to_string().contains("outside"));
    }
}
