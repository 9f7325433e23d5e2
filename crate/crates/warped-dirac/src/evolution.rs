//! The four evolution systems and a fixed-step RK4 integrator.
//!
//! Two system families live here, each in an even- and an odd-dimensional
//! flavour:
//!
//! * **Einstein systems** — the fully coupled flow for the warp factor and
//!   the spinor amplitudes.  Even parity evolves `(f, f_t, h⁺, h⁻)` with
//!   complex amplitudes,
//!
//!   ```text
//!   f_tt = (a/2) f_t² - (2/m²) λ_M² e^{(a-1)f}
//!          - ε λ_Q/(2m-1) · e^{af} |h⁺|² P
//!          + (2m+1)/(4m(2m-1)) · ε λ_M e^{(a-1/2)f} · 2 Re(h⁺ h̄⁻) P
//!   h⁺_t = -(m/2) f_t h⁺ + σ λ_Q e^{af/2} h⁺ - σ λ_M e^{(a-1)f/2} h⁻
//!   h⁻_t =  σ λ_M e^{(a-1)f/2} h⁺ - (m/2) f_t h⁻ - σ λ_Q e^{af/2} h⁻
//!   ```
//!
//!   with `σ = i^{2m+3}` (see [`sigma_factor`]); odd parity evolves
//!   `(f, f_t, h⁺, k⁺)` with real amplitudes.  The `f_tt` equation is the
//!   reduction of the tangential Einstein equation under `|h⁺| = |h⁻|`,
//!   which holds along flows started from admissible initial data because
//!   the difference charge `e^{mf}(|h⁺|² - |h⁻|²)` is exactly conserved.
//!
//! * **Weak-Killing (WK) systems** — the linear amplitude flows driven by a
//!   *fixed* closed-form warp factor (parallel base spinor only).  The warp
//!   factor is not co-integrated: it is evaluated from
//!   [`closed_form_warp`] at every stage
//!   and pinned back onto the state after each step.
//!
//! The integrator is classical fixed-step RK4.  It never panics on a
//! diverging solution: exceeding the state or amplitude bounds (or producing
//! a non-finite value) terminates the trajectory with [`Termination::BlowUp`]
//! at the last fully resolved time, the numerical stand-in for the boundary
//! of the local existence window.  A WK run that reaches the boundary of the
//! closed-form domain terminates with [`Termination::DomainExit`].

use num_complex::Complex64;

use crate::geometry::{closed_form_warp, ModelParams, Parity, Sign};
use crate::{Error, Result};

/// `σ = i^{2m+3} = (-1)^{m+1} i`, the purely imaginary unit-modulus factor
/// in the even amplitude equations (the Clifford action of the normal
/// direction on half-spinors).
pub fn sigma_factor(m: u32) -> Complex64 {
    Complex64::new(0.0, if m % 2 == 1 { 1.0 } else { -1.0 })
}

/// State of the even-parity systems: warp factor, its velocity, and the two
/// complex half-spinor amplitudes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvenState {
    pub f: f64,
    pub f_t: f64,
    pub h_plus: Complex64,
    pub h_minus: Complex64,
}

impl EvenState {
    pub fn new(f: f64, f_t: f64, h_plus: Complex64, h_minus: Complex64) -> Self {
        Self {
            f,
            f_t,
            h_plus,
            h_minus,
        }
    }
}

/// State of the odd-parity systems: warp factor, velocity, and the two real
/// amplitudes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OddState {
    pub f: f64,
    pub f_t: f64,
    pub h_plus: f64,
    pub k_plus: f64,
}

impl OddState {
    pub fn new(f: f64, f_t: f64, h_plus: f64, k_plus: f64) -> Self {
        Self {
            f,
            f_t,
            h_plus,
            k_plus,
        }
    }
}

/// Vector-space and diagnostics hooks the integrator needs from a state.
///
/// Implemented by [`EvenState`] and [`OddState`]; one generic RK4 loop serves
/// all four systems.
pub trait StateVector: Copy {
    /// `self + c · d`.
    fn scaled_add(&self, c: f64, d: &Self) -> Self;
    /// `c · self`.
    fn scale(&self, c: f64) -> Self;
    /// `(f, f_t)` of the state.
    fn warp(&self) -> (f64, f64);
    /// Largest amplitude magnitude, for blow-up detection.
    fn amplitude_sup(&self) -> f64;
    fn is_finite(&self) -> bool;
    /// Component-wise sup distance, for step-halving error estimates.
    fn max_abs_diff(&self, other: &Self) -> f64;
}

impl StateVector for EvenState {
    fn scaled_add(&self, c: f64, d: &Self) -> Self {
        Self {
            f: self.f + c * d.f,
            f_t: self.f_t + c * d.f_t,
            h_plus: self.h_plus + c * d.h_plus,
            h_minus: self.h_minus + c * d.h_minus,
        }
    }

    fn scale(&self, c: f64) -> Self {
        Self {
            f: c * self.f,
            f_t: c * self.f_t,
            h_plus: c * self.h_plus,
            h_minus: c * self.h_minus,
        }
    }

    fn warp(&self) -> (f64, f64) {
        (self.f, self.f_t)
    }

    fn amplitude_sup(&self) -> f64 {
        self.h_plus.norm().max(self.h_minus.norm())
    }

    fn is_finite(&self) -> bool {
        self.f.is_finite()
            && self.f_t.is_finite()
            && self.h_plus.is_finite()
            && self.h_minus.is_finite()
    }

    fn max_abs_diff(&self, other: &Self) -> f64 {
        [
            (self.f - other.f).abs(),
            (self.f_t - other.f_t).abs(),
            (self.h_plus - other.h_plus).norm(),
            (self.h_minus - other.h_minus).norm(),
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }
}

impl StateVector for OddState {
    fn scaled_add(&self, c: f64, d: &Self) -> Self {
        Self {
            f: self.f + c * d.f,
            f_t: self.f_t + c * d.f_t,
            h_plus: self.h_plus + c * d.h_plus,
            k_plus: self.k_plus + c * d.k_plus,
        }
    }

    fn scale(&self, c: f64) -> Self {
        Self {
            f: c * self.f,
            f_t: c * self.f_t,
            h_plus: c * self.h_plus,
            k_plus: c * self.k_plus,
        }
    }

    fn warp(&self) -> (f64, f64) {
        (self.f, self.f_t)
    }

    fn amplitude_sup(&self) -> f64 {
        self.h_plus.abs().max(self.k_plus.abs())
    }

    fn is_finite(&self) -> bool {
        self.f.is_finite()
            && self.f_t.is_finite()
            && self.h_plus.is_finite()
            && self.k_plus.is_finite()
    }

    fn max_abs_diff(&self, other: &Self) -> f64 {
        [
            (self.f - other.f).abs(),
            (self.f_t - other.f_t).abs(),
            (self.h_plus - other.h_plus).abs(),
            (self.k_plus - other.k_plus).abs(),
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }
}

/// Time derivative of each [`EvenState`] field under the even Einstein flow.
///
/// Precondition: `params` has even parity (enforced by the `evolve_*`
/// entry points; debug-asserted here).
pub fn rhs_even(state: &EvenState, params: &ModelParams) -> EvenState {
    debug_assert_eq!(params.parity(), Parity::Even);
    let m = f64::from(params.m());
    let a = params.warp_exponent();
    let (lm, lq) = (params.lambda_m(), params.lambda_q());
    let eps = params.epsilon().value();
    let p = params.norm();
    let sigma = sigma_factor(params.m());

    let (f, f_t) = (state.f, state.f_t);
    let (hp, hm) = (state.h_plus, state.h_minus);
    let hp2 = hp.norm_sqr();
    let re_pm = (hp * hm.conj()).re;

    let f_t_dot = 0.5 * a * f_t * f_t
        - 2.0 / (m * m) * lm * lm * ((a - 1.0) * f).exp()
        - eps * lq / (2.0 * m - 1.0) * (a * f).exp() * hp2 * p
        + (2.0 * m + 1.0) / (4.0 * m * (2.0 * m - 1.0))
            * eps
            * lm
            * ((a - 0.5) * f).exp()
            * (2.0 * re_pm)
            * p;

    let drive_q = sigma * lq * (0.5 * a * f).exp();
    let drive_m = sigma * lm * (0.5 * (a - 1.0) * f).exp();
    EvenState {
        f: f_t,
        f_t: f_t_dot,
        h_plus: -0.5 * m * f_t * hp + drive_q * hp - drive_m * hm,
        h_minus: drive_m * hp - 0.5 * m * f_t * hm - drive_q * hm,
    }
}

/// Time derivative of each [`OddState`] field under the odd Einstein flow.
pub fn rhs_odd(state: &OddState, params: &ModelParams) -> OddState {
    debug_assert_eq!(params.parity(), Parity::Odd);
    let m = f64::from(params.m());
    let a = params.warp_exponent();
    let (lm, lq) = (params.lambda_m(), params.lambda_q());
    let eps = params.epsilon().value();
    let p = params.norm();

    let (f, f_t) = (state.f, state.f_t);
    let (h, k) = (state.h_plus, state.k_plus);
    let nu = 0.25 * (2.0 * m - 1.0);

    let f_t_dot = 0.5 * a * f_t * f_t
        - 8.0 / ((2.0 * m - 1.0) * (2.0 * m - 1.0)) * lm * lm * ((a - 1.0) * f).exp()
        - eps * lq / (2.0 * (m - 1.0)) * (a * f).exp() * (h * h + k * k) * p
        + 2.0 * m / ((m - 1.0) * (2.0 * m - 1.0)) * eps * lm * ((a - 0.5) * f).exp() * h * k * p;

    let drive_q = lq * (0.5 * a * f).exp();
    let drive_m = lm * (0.5 * (a - 1.0) * f).exp();
    OddState {
        f: f_t,
        f_t: f_t_dot,
        h_plus: -nu * f_t * h - drive_m * h + drive_q * k,
        k_plus: -drive_q * h - nu * f_t * k + drive_m * k,
    }
}

/// Amplitude derivative of the even weak-Killing flow, with the warp factor
/// supplied externally (from the closed form): `h⁺_t = -(m/2) f_t h⁺ +
/// σ λ_Q e^{af/2} h⁺`.  `h⁻` is not part of the WK spinor and is left inert.
///
/// Errors unless the base spinor is parallel (`λ_M = 0`).
pub fn rhs_wk_even(
    state: &EvenState,
    params: &ModelParams,
    warp: &crate::geometry::GeometrySample,
) -> Result<EvenState> {
    require_parallel(params)?;
    Ok(wk_even_derivative(state, params, warp))
}

fn wk_even_derivative(
    state: &EvenState,
    params: &ModelParams,
    warp: &crate::geometry::GeometrySample,
) -> EvenState {
    let m = f64::from(params.m());
    let a = params.warp_exponent();
    let drive = sigma_factor(params.m()) * params.lambda_q() * (0.5 * a * warp.f).exp();
    EvenState {
        f: warp.f_t,
        f_t: warp.f_tt.unwrap_or(0.0),
        h_plus: (-0.5 * m * warp.f_t + drive) * state.h_plus,
        h_minus: Complex64::new(0.0, 0.0),
    }
}

/// Amplitude derivatives of the odd weak-Killing flow:
/// `h⁺_t = -(2m-1)/4 f_t h⁺ + λ_Q e^{af/2} k⁺` and
/// `k⁺_t = -λ_Q e^{af/2} h⁺ - (2m-1)/4 f_t k⁺`.
pub fn rhs_wk_odd(
    state: &OddState,
    params: &ModelParams,
    warp: &crate::geometry::GeometrySample,
) -> Result<OddState> {
    require_parallel(params)?;
    Ok(wk_odd_derivative(state, params, warp))
}

fn wk_odd_derivative(
    state: &OddState,
    params: &ModelParams,
    warp: &crate::geometry::GeometrySample,
) -> OddState {
    let m = f64::from(params.m());
    let nu = 0.25 * (2.0 * m - 1.0);
    let drive = params.lambda_q() * (0.5 * params.warp_exponent() * warp.f).exp();
    OddState {
        f: warp.f_t,
        f_t: warp.f_tt.unwrap_or(0.0),
        h_plus: -nu * warp.f_t * state.h_plus + drive * state.k_plus,
        k_plus: -drive * state.h_plus - nu * warp.f_t * state.k_plus,
    }
}

fn require_parallel(params: &ModelParams) -> Result<()> {
    if params.lambda_m() != 0.0 {
        return Err(Error::NonParallelBase {
            lambda_m: params.lambda_m(),
        });
    }
    Ok(())
}

/// Admissible even initial data: `f(0) = 0`, `h⁺(0) = h⁻(0) = 1`, and
/// `f_t(0) = sign · √(4λ_M²/m² + 2ε(λ_Q-λ_M)P/(m(2m-1)))`.
///
/// The radicand is exactly the value making the Hamiltonian constraint
/// vanish at `t = 0`; a negative radicand yields
/// [`Error::InadmissibleData`] (the opposite `ε` is then admissible).
pub fn initial_state_even(params: &ModelParams, sign: Sign) -> Result<EvenState> {
    if params.parity() != Parity::Even {
        return Err(Error::ParityMismatch("even initial data needs even parity"));
    }
    let m = f64::from(params.m());
    let radicand = 4.0 * params.lambda_m() * params.lambda_m() / (m * m)
        + 2.0 * params.epsilon().value() * (params.lambda_q() - params.lambda_m()) * params.norm()
            / (m * (2.0 * m - 1.0));
    if radicand < 0.0 {
        return Err(Error::InadmissibleData { radicand });
    }
    Ok(EvenState::new(
        0.0,
        sign.value() * radicand.sqrt(),
        Complex64::new(1.0, 0.0),
        Complex64::new(1.0, 0.0),
    ))
}

/// Admissible odd initial data: `f(0) = 0`, `h⁺(0) = k⁺(0) = 1`, and
/// `f_t(0) = sign · √(16λ_M²/(2m-1)² + 4ε(λ_Q-λ_M)P/((m-1)(2m-1)))`.
pub fn initial_state_odd(params: &ModelParams, sign: Sign) -> Result<OddState> {
    if params.parity() != Parity::Odd {
        return Err(Error::ParityMismatch("odd initial data needs odd parity"));
    }
    let m = f64::from(params.m());
    let radicand = 16.0 * params.lambda_m() * params.lambda_m()
        / ((2.0 * m - 1.0) * (2.0 * m - 1.0))
        + 4.0 * params.epsilon().value() * (params.lambda_q() - params.lambda_m()) * params.norm()
            / ((m - 1.0) * (2.0 * m - 1.0));
    if radicand < 0.0 {
        return Err(Error::InadmissibleData { radicand });
    }
    Ok(OddState::new(0.0, sign.value() * radicand.sqrt(), 1.0, 1.0))
}

/// Initial state for an even WK run with warp rate `c`: unit `h⁺`, zero `h⁻`.
pub fn wk_initial_even(c: f64) -> EvenState {
    EvenState::new(0.0, c, Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0))
}

/// Initial state for an odd WK run with warp rate `c`: unit amplitudes.
pub fn wk_initial_odd(c: f64) -> OddState {
    OddState::new(0.0, c, 1.0, 1.0)
}

/// Which of the four flows produced a trajectory.  Downstream residual code
/// uses this to pick the correct source for `f_tt`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SystemKind {
    EinsteinEven,
    EinsteinOdd,
    WkEven { c: f64 },
    WkOdd { c: f64 },
}

/// Why a run stopped.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Termination {
    /// Reached `t_end`.
    ReachedEnd,
    /// A state or amplitude bound was exceeded, or a non-finite value
    /// appeared; `t_est` is the last fully resolved time.
    BlowUp { t_est: f64 },
    /// A WK run reached the boundary of the closed-form warp domain.
    DomainExit { t_est: f64 },
}

impl Termination {
    pub fn reached_end(&self) -> bool {
        matches!(self, Termination::ReachedEnd)
    }
}

impl std::fmt::Display for Termination {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Termination::ReachedEnd => write!(f, "reached_end"),
            Termination::BlowUp { t_est } => write!(f, "blow_up(t_est={t_est})"),
            Termination::DomainExit { t_est } => write!(f, "domain_exit(t_est={t_est})"),
        }
    }
}

/// The sampled output of one run.  Times start at 0 and move monotonically
/// toward `t_end` (negative `t_end` integrates backward).
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory<S> {
    pub params: ModelParams,
    pub kind: SystemKind,
    pub step: f64,
    pub times: Vec<f64>,
    pub states: Vec<S>,
    pub termination: Termination,
}

impl<S> Trajectory<S> {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// `|t|` of the last resolved sample.
    pub fn resolved_window(&self) -> f64 {
        self.times.last().map_or(0.0, |t| t.abs())
    }

    pub fn last_state(&self) -> Option<&S> {
        self.states.last()
    }
}

/// One of the four flows, as seen by the integrator.
pub trait System {
    type State: StateVector;

    /// Field derivatives at time `t`.  An `Err` means the flow left its
    /// domain of definition (WK runs outside the closed-form window).
    fn derivative(&self, t: f64, state: &Self::State) -> Result<Self::State>;

    /// Snap dependent fields to exact values after a step; WK systems pin
    /// the warp factor to its closed form here.
    fn project(&self, _t: f64, _state: &mut Self::State) -> Result<()> {
        Ok(())
    }

    fn kind(&self) -> SystemKind;
    fn params(&self) -> &ModelParams;
}

/// Even Einstein flow (autonomous).
pub struct EinsteinEvenSystem<'a> {
    params: &'a ModelParams,
}

impl<'a> EinsteinEvenSystem<'a> {
    pub fn new(params: &'a ModelParams) -> Result<Self> {
        if params.parity() != Parity::Even {
            return Err(Error::ParityMismatch(
                "even Einstein system needs even parity",
            ));
        }
        Ok(Self { params })
    }
}

impl System for EinsteinEvenSystem<'_> {
    type State = EvenState;

    fn derivative(&self, _t: f64, state: &EvenState) -> Result<EvenState> {
        Ok(rhs_even(state, self.params))
    }

    fn kind(&self) -> SystemKind {
        SystemKind::EinsteinEven
    }

    fn params(&self) -> &ModelParams {
        self.params
    }
}

/// Odd Einstein flow (autonomous).
pub struct EinsteinOddSystem<'a> {
    params: &'a ModelParams,
}

impl<'a> EinsteinOddSystem<'a> {
    pub fn new(params: &'a ModelParams) -> Result<Self> {
        if params.parity() != Parity::Odd {
            return Err(Error::ParityMismatch(
                "odd Einstein system needs odd parity",
            ));
        }
        Ok(Self { params })
    }
}

impl System for EinsteinOddSystem<'_> {
    type State = OddState;

    fn derivative(&self, _t: f64, state: &OddState) -> Result<OddState> {
        Ok(rhs_odd(state, self.params))
    }

    fn kind(&self) -> SystemKind {
        SystemKind::EinsteinOdd
    }

    fn params(&self) -> &ModelParams {
        self.params
    }
}

/// Even WK flow driven by the closed-form warp factor with rate `c`.
pub struct WkEvenSystem<'a> {
    params: &'a ModelParams,
    c: f64,
}

impl<'a> WkEvenSystem<'a> {
    pub fn new(params: &'a ModelParams, c: f64) -> Result<Self> {
        if params.parity() != Parity::Even {
            return Err(Error::ParityMismatch("even WK system needs even parity"));
        }
        require_parallel(params)?;
        Ok(Self { params, c })
    }
}

impl System for WkEvenSystem<'_> {
    type State = EvenState;

    fn derivative(&self, t: f64, state: &EvenState) -> Result<EvenState> {
        let warp = closed_form_warp(self.params, self.c, t)?;
        Ok(wk_even_derivative(state, self.params, &warp))
    }

    fn project(&self, t: f64, state: &mut EvenState) -> Result<()> {
        let warp = closed_form_warp(self.params, self.c, t)?;
        state.f = warp.f;
        state.f_t = warp.f_t;
        Ok(())
    }

    fn kind(&self) -> SystemKind {
        SystemKind::WkEven { c: self.c }
    }

    fn params(&self) -> &ModelParams {
        self.params
    }
}

/// Odd WK flow driven by the closed-form warp factor with rate `c`.
pub struct WkOddSystem<'a> {
    params: &'a ModelParams,
    c: f64,
}

impl<'a> WkOddSystem<'a> {
    pub fn new(params: &'a ModelParams, c: f64) -> Result<Self> {
        if params.parity() != Parity::Odd {
            return Err(Error::ParityMismatch("odd WK system needs odd parity"));
        }
        require_parallel(params)?;
        Ok(Self { params, c })
    }
}

impl System for WkOddSystem<'_> {
    type State = OddState;

    fn derivative(&self, t: f64, state: &OddState) -> Result<OddState> {
        let warp = closed_form_warp(self.params, self.c, t)?;
        Ok(wk_odd_derivative(state, self.params, &warp))
    }

    fn project(&self, t: f64, state: &mut OddState) -> Result<()> {
        let warp = closed_form_warp(self.params, self.c, t)?;
        state.f = warp.f;
        state.f_t = warp.f_t;
        Ok(())
    }

    fn kind(&self) -> SystemKind {
        SystemKind::WkOdd { c: self.c }
    }

    fn params(&self) -> &ModelParams {
        self.params
    }
}

/// Classical fixed-step RK4 with blow-up detection.
///
/// Defaults: state bound `1e6` on `|f|` and `|f_t|`, amplitude bound `1e12`.
#[derive(Debug, Clone, Copy)]
pub struct Integrator {
    step: f64,
    state_bound: f64,
    amplitude_bound: f64,
}

impl Integrator {
    pub fn new(step: f64) -> Result<Self> {
        if !step.is_finite() || step <= 0.0 {
            return Err(Error::InvalidParams(format!(
                "step must be positive and finite, got {step}"
            )));
        }
        Ok(Self {
            step,
            state_bound: 1e6,
            amplitude_bound: 1e12,
        })
    }

    pub fn with_state_bound(mut self, bound: f64) -> Self {
        self.state_bound = bound;
        self
    }

    pub fn with_amplitude_bound(mut self, bound: f64) -> Self {
        self.amplitude_bound = bound;
        self
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    /// Integrate `system` from `state0` at `t = 0` to `t_end` (negative
    /// `t_end` runs backward).  Every accepted step is stored.
    pub fn run<Sys: System>(
        &self,
        system: &Sys,
        state0: Sys::State,
        t_end: f64,
    ) -> Trajectory<Sys::State> {
        let sign = if t_end < 0.0 { -1.0 } else { 1.0 };
        let total = t_end.abs();
        let n_full = (total / self.step).floor() as usize;
        let remainder = total - n_full as f64 * self.step;
        let has_tail = remainder > self.step * 1e-12;

        let mut times = Vec::with_capacity(n_full + 2);
        let mut states = Vec::with_capacity(n_full + 2);
        let mut termination = Termination::ReachedEnd;

        let mut state = state0;
        if system.project(0.0, &mut state).is_err() || !self.admissible(&state) {
            // Even the initial sample is unusable; return an empty trajectory.
            return Trajectory {
                params: *system.params(),
                kind: system.kind(),
                step: self.step,
                times,
                states,
                termination: Termination::BlowUp { t_est: 0.0 },
            };
        }
        times.push(0.0);
        states.push(state);

        let mut t_prev = 0.0;
        for k in 1..=n_full + usize::from(has_tail) {
            let t_next = if k <= n_full {
                sign * k as f64 * self.step
            } else {
                t_end
            };
            match self.advance(system, t_prev, t_next - t_prev, &state) {
                Ok(mut next) => {
                    if system.project(t_next, &mut next).is_err() {
                        termination = Termination::DomainExit { t_est: t_prev };
                        break;
                    }
                    // A step that more than doubles |f_t| is no longer
                    // resolving the flow: near the finite-time singularity a
                    // fixed step can otherwise jump straight across the pole
                    // onto the spurious opposite branch without ever
                    // exceeding the magnitude bounds.
                    let (_, f_t_prev) = state.warp();
                    let (_, f_t_next) = next.warp();
                    if (f_t_next - f_t_prev).abs() > 2.0 * f_t_prev.abs().max(1.0) {
                        termination = Termination::BlowUp { t_est: t_prev };
                        break;
                    }
                    if !self.admissible(&next) {
                        termination = Termination::BlowUp { t_est: t_prev };
                        break;
                    }
                    times.push(t_next);
                    states.push(next);
                    state = next;
                    t_prev = t_next;
                }
                Err(StepFailure::Domain) => {
                    termination = Termination::DomainExit { t_est: t_prev };
                    break;
                }
                Err(StepFailure::NonFinite) => {
                    termination = Termination::BlowUp { t_est: t_prev };
                    break;
                }
            }
        }

        Trajectory {
            params: *system.params(),
            kind: system.kind(),
            step: self.step,
            times,
            states,
            termination,
        }
    }

    /// Step-halving error estimate: sup distance between the runs at step
    /// and step/2 over their common resolved samples.
    pub fn error_estimate<Sys: System>(&self, system: &Sys, state0: Sys::State, t_end: f64) -> f64 {
        let coarse = self.run(system, state0, t_end);
        let halved = Self {
            step: 0.5 * self.step,
            ..*self
        };
        let fine = halved.run(system, state0, t_end);
        coarse
            .states
            .iter()
            .enumerate()
            .take_while(|(i, _)| 2 * i < fine.states.len())
            .map(|(i, s)| s.max_abs_diff(&fine.states[2 * i]))
            .fold(0.0, f64::max)
    }

    fn admissible<S: StateVector>(&self, state: &S) -> bool {
        let (f, f_t) = state.warp();
        state.is_finite()
            && f.abs() <= self.state_bound
            && f_t.abs() <= self.state_bound
            && state.amplitude_sup() <= self.amplitude_bound
    }

    fn advance<Sys: System>(
        &self,
        system: &Sys,
        t: f64,
        h: f64,
        state: &Sys::State,
    ) -> std::result::Result<Sys::State, StepFailure> {
        let eval = |t, s: &Sys::State| -> std::result::Result<Sys::State, StepFailure> {
            match system.derivative(t, s) {
                Ok(d) if d.is_finite() => Ok(d),
                Ok(_) => Err(StepFailure::NonFinite),
                Err(_) => Err(StepFailure::Domain),
            }
        };
        let k1 = eval(t, state)?;
        let k2 = eval(t + 0.5 * h, &state.scaled_add(0.5 * h, &k1))?;
        let k3 = eval(t + 0.5 * h, &state.scaled_add(0.5 * h, &k2))?;
        let k4 = eval(t + h, &state.scaled_add(h, &k3))?;
        Ok(state
            .scaled_add(h / 6.0, &k1)
            .scaled_add(h / 3.0, &k2)
            .scaled_add(h / 3.0, &k3)
            .scaled_add(h / 6.0, &k4))
    }
}

enum StepFailure {
    Domain,
    NonFinite,
}

/// Evolve the even Einstein system.
pub fn evolve_einstein_even(
    params: &ModelParams,
    state0: EvenState,
    t_end: f64,
    integrator: &Integrator,
) -> Trajectory<EvenState> {
    let system = EinsteinEvenSystem::new(params).expect("parity checked by caller");
    integrator.run(&system, state0, t_end)
}

/// Evolve the odd Einstein system.
pub fn evolve_einstein_odd(
    params: &ModelParams,
    state0: OddState,
    t_end: f64,
    integrator: &Integrator,
) -> Trajectory<OddState> {
    let system = EinsteinOddSystem::new(params).expect("parity checked by caller");
    integrator.run(&system, state0, t_end)
}

/// Evolve the even WK system with warp rate `c` from `wk_initial_even(c)`.
pub fn evolve_wk_even(
    params: &ModelParams,
    c: f64,
    t_end: f64,
    integrator: &Integrator,
) -> Result<Trajectory<EvenState>> {
    let system = WkEvenSystem::new(params, c)?;
    Ok(integrator.run(&system, wk_initial_even(c), t_end))
}

/// Evolve the odd WK system with warp rate `c` from `wk_initial_odd(c)`.
pub fn evolve_wk_odd(
    params: &ModelParams,
    c: f64,
    t_end: f64,
    integrator: &Integrator,
) -> Result<Trajectory<OddState>> {
    let system = WkOddSystem::new(params, c)?;
    Ok(integrator.run(&system, wk_initial_odd(c), t_end))
}

/// Conserved charges of the even flow.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvenCharges {
    /// `e^{mf} (|h⁺|² - |h⁻|²)`; exactly conserved along every even flow.
    pub diff: f64,
    /// `e^{mf} (|h⁺|² + |h⁻|²)`; conserved when `λ_M = 0`.
    pub sum: f64,
}

/// Evaluate the even charges at one state.
pub fn charge_even(state: &EvenState, params: &ModelParams) -> EvenCharges {
    let w = (f64::from(params.m()) * state.f).exp();
    let (p2, m2) = (state.h_plus.norm_sqr(), state.h_minus.norm_sqr());
    EvenCharges {
        diff: w * (p2 - m2),
        sum: w * (p2 + m2),
    }
}

/// `e^{(2m-1)f/2} (h⁺² + k⁺²)`, conserved along odd flows with `λ_M = 0`.
pub fn charge_odd(state: &OddState, params: &ModelParams) -> f64 {
    let m = f64::from(params.m());
    (0.5 * (2.0 * m - 1.0) * state.f).exp()
        * (state.h_plus * state.h_plus + state.k_plus * state.k_plus)
}
