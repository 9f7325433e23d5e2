//! Solve and certify the Einstein-Dirac equation on warped products `M × ℝ`.
//!
//! The metric ansatz is `η̄ = e^f Σ Eⁱ⊗Eⁱ + e^{af} dt⊗dt` with a warp factor
//! `f` depending on `t` only, over a base manifold that carries a real Killing
//! (or parallel) spinor.  Under this reduction the full Einstein-Dirac system
//! collapses to small autonomous ODE systems in `t` for the warp factor and a
//! handful of spinor amplitudes, and every curvature and energy-momentum
//! quantity is a closed-form scalar function of `(f, f_t, f_tt)`.  That makes
//! the problem ideal for solve-then-verify numerics: integrate the evolution
//! system, then certify the result by evaluating the Hamiltonian constraint,
//! the Einstein-equation residuals, and the conserved charges along the
//! trajectory.
//!
//! The crate is organized around that pipeline:
//!
//! * [`geometry`] — curvature scalars of the warped metric, the closed-form
//!   warp factors, and the residuals characterizing them;
//! * [`evolution`] — the four ODE systems (Einstein even/odd, weak-Killing
//!   even/odd), admissible initial data, and a fixed-step RK4 integrator with
//!   blow-up detection;
//! * [`constraints`] — reduced energy-momentum tensors, constraint and
//!   Einstein residuals, and trajectory-level residual reports;
//! * [`reparam`] — the arctan reparametrization that presents a local
//!   solution on `(-ω, ω)` globally on all of ℝ.
//!
//! # Quick start
//!
//! Evolve the even-dimensional Einstein system from admissible initial data
//! and check that the Hamiltonian constraint stays satisfied:
//!
//! ```
//! use warped_dirac::evolution::{initial_state_even, evolve_einstein_even, Integrator};
//! use warped_dirac::constraints::residual_report_even;
//! use warped_dirac::{ModelParams, Parity, Sign};
//!
//! let params = ModelParams::new(Parity::Even, 1, 1.0, 0.0, 1.0, Sign::Plus, 1.0)?;
//! let state0 = initial_state_even(&params, Sign::Plus)?;
//! let integrator = Integrator::new(1e-3)?;
//! let traj = evolve_einstein_even(&params, state0, 0.5, &integrator);
//!
//! let report = residual_report_even(&traj, 1e-6);
//! assert!(report.pass);
//! # Ok::<(), warped_dirac::Error>(())
//! ```

pub mod constraints;
pub mod evolution;
pub mod geometry;
pub mod guide;
pub mod reparam;

pub use geometry::{GeometrySample, ModelParams, Parity, Sign};

/// Complex scalar type of the even spinor amplitudes.
pub use num_complex::Complex64;

/// Errors produced by model construction, closed-form evaluation, initial
/// data, and the reparametrization.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid model parameters: {0}")]
    InvalidParams(String),

    /// Curvature needs `f_tt`; [`GeometrySample`]s built without it are only
    /// good for the second fundamental form.
    #[error("operation requires the second derivative f_tt, which the sample does not carry")]
    MissingSecondDerivative,

    /// The closed-form warp factor `f(t) = 4/(n-2a) · log(1 + (n-2a)ct/4)`
    /// is defined only while the logarithm's argument stays positive.  The
    /// error carries the critical time so callers can clamp their windows.
    #[error("closed-form warp factor undefined at t = {t}; domain boundary at t* = {critical}")]
    OutOfDomain { t: f64, critical: f64 },

    /// The initial-data radicand was negative.  Flipping the sign `ε` of the
    /// energy-momentum tensor always makes one of the two choices admissible.
    #[error("inadmissible initial data: radicand {radicand} is negative (try flipping epsilon)")]
    InadmissibleData { radicand: f64 },

    /// Weak-Killing systems are driven by the closed-form warp factors, which
    /// exist for a parallel base spinor only.
    #[error("weak Killing system requires a parallel base spinor (lambda_M = 0), got {lambda_m}")]
    NonParallelBase { lambda_m: f64 },

    #[error(
        "omega = {omega} exceeds the resolved window; maximum admissible omega is {max_omega}"
    )]
    OmegaExceedsWindow { omega: f64, max_omega: f64 },

    /// A pullback grid point mapped outside the time range covered by the
    /// trajectory being reparametrized.
    #[error("s = {s} pulls back to t = {t}, outside the covered range [{t_min}, {t_max}]")]
    OutsideTrajectory {
        s: f64,
        t: f64,
        t_min: f64,
        t_max: f64,
    },

    /// An operation specific to one dimension parity was called with
    /// parameters of the other.
    #[error("parity mismatch: {0}")]
    ParityMismatch(&'static str),

    #[error("trajectory too short: {0}")]
    TrajectoryTooShort(&'static str),
}

pub type Result<T> = std::result::Result<T, Error>;
