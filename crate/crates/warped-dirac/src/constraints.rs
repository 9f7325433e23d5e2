//! The certification layer: energy-momentum, constraint and Einstein
//! residuals, and trajectory-level residual reports.
//!
//! A numerically evolved trajectory is only as good as the identities it
//! satisfies.  Everything the reduced model can check is checked here:
//!
//! * the **Hamiltonian constraint** `C_H = [-S_ḡ + (Tr II)² - Tr II²] -
//!   2 T(F,F)`, which vanishes on exact solutions and must stay small under
//!   evolution (constraint propagation);
//! * the **Einstein residuals**, the tangential and normal components of
//!   `Δ = Ric - (S/2) η̄ - T`, with `f_tt` supplied by the evolution
//!   right-hand side so that the full field equation is tested rather than
//!   the evolution identity;
//! * the **momentum constraint**, whose geometric side vanishes identically
//!   for a second fundamental form proportional to the slice metric with a
//!   `t`-only coefficient — kept as an executable witness of the reduction;
//! * the **weak-Killing residual** for parallel-base runs: the warp residual
//!   `A = 4 f_tt + (n-2a) f_t²` plus the deviation of the stored amplitudes
//!   from the WK amplitude equation, with the amplitude derivative measured
//!   by a five-point stencil on the stored samples;
//! * **conserved charges**: the difference charge (even), the modulus charge
//!   (odd, parallel base), and the sum charge (even, parallel base).
//!
//! The energy-momentum tensor is reduced under the symmetric normalization
//! `(ψ⁺,ψ⁺) = (ψ⁻,ψ⁻) = P/2` in the even case; the `T(V, F_{n+1})`
//! component involves pointwise spinor contractions that the reduced model
//! does not carry, so the momentum check is the geometric side only.

use num_complex::Complex64;

use crate::evolution::{
    charge_even, charge_odd, rhs_even, rhs_odd, EvenState, OddState, SystemKind, Trajectory,
};
use crate::geometry::{
    closed_form_warp, curvature, second_fundamental_form, GeometrySample, ModelParams,
};
use crate::{Error, Result};

/// Reduced spinor energy-momentum tensor of a warped-product state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyMomentum {
    /// `Tr_η̄ T`.
    pub trace: f64,
    /// Coefficient of `η(V,W)` in `T(V,W)` for slice-tangential `V, W`.
    pub tan_coeff: f64,
    /// `T(F_{n+1}, F_{n+1})`.
    pub normal: f64,
}

/// Energy-momentum of an even state under the symmetric normalization.
pub fn energy_momentum_even(state: &EvenState, params: &ModelParams) -> EnergyMomentum {
    let m = f64::from(params.m());
    let eps = params.epsilon().value();
    let p = params.norm();
    let (lm, lq) = (params.lambda_m(), params.lambda_q());
    let sum2 = state.h_plus.norm_sqr() + state.h_minus.norm_sqr();
    let re_pm = (state.h_plus * state.h_minus.conj()).re;

    EnergyMomentum {
        trace: 0.25 * eps * lq * sum2 * p,
        tan_coeff: 0.25 * eps * lm / m * (0.5 * state.f).exp() * re_pm * p,
        normal: -0.5 * eps * lm * (-0.5 * state.f).exp() * re_pm * p + 0.25 * eps * lq * sum2 * p,
    }
}

/// Energy-momentum of an odd state.
pub fn energy_momentum_odd(state: &OddState, params: &ModelParams) -> EnergyMomentum {
    let m = f64::from(params.m());
    let eps = params.epsilon().value();
    let p = params.norm();
    let (lm, lq) = (params.lambda_m(), params.lambda_q());
    let s2 = state.h_plus * state.h_plus + state.k_plus * state.k_plus;
    let hk = state.h_plus * state.k_plus;

    EnergyMomentum {
        trace: 0.5 * eps * lq * s2 * p,
        tan_coeff: eps * lm / (2.0 * m - 1.0) * (0.5 * state.f).exp() * hk * p,
        normal: -eps * lm * (-0.5 * state.f).exp() * hk * p + 0.5 * eps * lq * s2 * p,
    }
}

fn hamiltonian_from_parts(f: f64, f_t: f64, t_normal: f64, params: &ModelParams) -> f64 {
    let sample = GeometrySample::new(f, f_t);
    let ff = second_fundamental_form(&sample, params);
    let slice_scalar = (-f).exp() * params.base_scalar_curvature();
    -slice_scalar + ff.trace * ff.trace - ff.trace_sq - 2.0 * t_normal
}

/// Hamiltonian constraint residual of an even state; zero on exact solutions.
pub fn hamiltonian_residual_even(state: &EvenState, params: &ModelParams) -> f64 {
    let em = energy_momentum_even(state, params);
    hamiltonian_from_parts(state.f, state.f_t, em.normal, params)
}

/// Hamiltonian constraint residual of an odd state.
pub fn hamiltonian_residual_odd(state: &OddState, params: &ModelParams) -> f64 {
    let em = energy_momentum_odd(state, params);
    hamiltonian_from_parts(state.f, state.f_t, em.normal, params)
}

/// Geometric side `d(Tr_ḡ II)(V) - div_ḡ(II)(V)` of the momentum constraint
/// for `II = φ(t,·) ḡ`, evaluated on a unit slice direction along which `φ`
/// has derivative `phi_slice_gradient`.
///
/// The reduced model has `φ = φ(t)` only, so the relevant value is
/// `momentum_constraint_lhs(params, 0.0) = 0`; the general signature keeps
/// the operation falsifiable.
pub fn momentum_constraint_lhs(params: &ModelParams, phi_slice_gradient: f64) -> f64 {
    (f64::from(params.n()) - 1.0) * phi_slice_gradient
}

/// Tangential and normal residuals of the full Einstein equation
/// `Δ = Ric - (S/2) η̄ - T`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EinsteinResiduals {
    /// `Δ(V,W)` per unit `η̄(V,W)` for slice-tangential `V, W`.
    pub tan: f64,
    /// `Δ(F_{n+1}, F_{n+1})`.
    pub normal: f64,
}

fn einstein_residuals_core(
    f: f64,
    f_t: f64,
    f_tt: f64,
    em: &EnergyMomentum,
    params: &ModelParams,
) -> EinsteinResiduals {
    let sample = GeometrySample::with_second_derivative(f, f_t, f_tt);
    let curv = curvature(&sample, params).expect("sample carries f_tt");
    let ef = f.exp();
    EinsteinResiduals {
        tan: (curv.ric_tan_coeff - 0.5 * curv.scalar * ef - em.tan_coeff) / ef,
        normal: curv.ric_normal - 0.5 * curv.scalar - em.normal,
    }
}

/// Einstein residuals of an even state, with `f_tt` from the even evolution
/// right-hand side (so this checks the field equation, not the evolution
/// identity).
pub fn einstein_residuals_even(state: &EvenState, params: &ModelParams) -> EinsteinResiduals {
    let f_tt = rhs_even(state, params).f_t;
    einstein_residuals_core(
        state.f,
        state.f_t,
        f_tt,
        &energy_momentum_even(state, params),
        params,
    )
}

/// Einstein residuals of an odd state.
pub fn einstein_residuals_odd(state: &OddState, params: &ModelParams) -> EinsteinResiduals {
    let f_tt = rhs_odd(state, params).f_t;
    einstein_residuals_core(
        state.f,
        state.f_t,
        f_tt,
        &energy_momentum_odd(state, params),
        params,
    )
}

/// `A = 4 f_tt + (n-2a) f_t²` at a state, with `f_tt` supplied by the caller.
fn warp_residual_a(f_t: f64, f_tt: f64, params: &ModelParams) -> f64 {
    let b = f64::from(params.n()) - 2.0 * params.warp_exponent();
    4.0 * f_tt + b * f_t * f_t
}

/// Weak-Killing residual of one even sample: `|A|` plus the deviation of the
/// measured `dh⁺/dt` from the WK amplitude equation.  Parallel base only.
pub fn wk_residual_even(
    state: &EvenState,
    params: &ModelParams,
    f_tt: f64,
    measured_h_plus_dt: Complex64,
) -> Result<f64> {
    if params.lambda_m() != 0.0 {
        return Err(Error::NonParallelBase {
            lambda_m: params.lambda_m(),
        });
    }
    let m = f64::from(params.m());
    let drive = crate::evolution::sigma_factor(params.m())
        * params.lambda_q()
        * (0.5 * params.warp_exponent() * state.f).exp();
    let wk_dt = (-0.5 * m * state.f_t + drive) * state.h_plus;
    Ok(warp_residual_a(state.f_t, f_tt, params).abs() + (measured_h_plus_dt - wk_dt).norm())
}

/// Weak-Killing residual of one odd sample, over both amplitudes.
pub fn wk_residual_odd(
    state: &OddState,
    params: &ModelParams,
    f_tt: f64,
    measured_h_dt: f64,
    measured_k_dt: f64,
) -> Result<f64> {
    if params.lambda_m() != 0.0 {
        return Err(Error::NonParallelBase {
            lambda_m: params.lambda_m(),
        });
    }
    let m = f64::from(params.m());
    let nu = 0.25 * (2.0 * m - 1.0);
    let drive = params.lambda_q() * (0.5 * params.warp_exponent() * state.f).exp();
    let h_dt = -nu * state.f_t * state.h_plus + drive * state.k_plus;
    let k_dt = -drive * state.h_plus - nu * state.f_t * state.k_plus;
    let defect = (measured_h_dt - h_dt)
        .abs()
        .max((measured_k_dt - k_dt).abs());
    Ok(warp_residual_a(state.f_t, f_tt, params).abs() + defect)
}

/// WK residuals along the uniform interior of a trajectory.
///
/// `values[i]` belongs to sample `start + i`; the first and last two samples
/// (and any non-uniformly spaced tail) are not covered by the five-point
/// derivative stencil.
#[derive(Debug, Clone, PartialEq)]
pub struct WkResidualSeries {
    pub start: usize,
    pub values: Vec<f64>,
}

impl WkResidualSeries {
    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(0.0, f64::max)
    }
}

fn stencil_ok(times: &[f64], i: usize) -> bool {
    let h = times[i] - times[i - 1];
    (i - 1..i + 2).all(|j| ((times[j + 1] - times[j]) - h).abs() <= 1e-9 * h.abs())
}

/// Five-point first derivative at index `i` of a uniformly sampled series.
fn stencil_derivative(values: &[Complex64], i: usize, h: f64) -> Complex64 {
    (values[i - 2] - 8.0 * values[i - 1] + 8.0 * values[i + 1] - values[i + 2]) / (12.0 * h)
}

fn f_tt_even(traj: &Trajectory<EvenState>, i: usize) -> Result<f64> {
    match traj.kind {
        SystemKind::EinsteinEven => Ok(rhs_even(&traj.states[i], &traj.params).f_t),
        SystemKind::WkEven { c } => Ok(closed_form_warp(&traj.params, c, traj.times[i])?
            .f_tt
            .expect("closed form carries f_tt")),
        _ => Err(Error::ParityMismatch(
            "even trajectory with odd system kind",
        )),
    }
}

fn f_tt_odd(traj: &Trajectory<OddState>, i: usize) -> Result<f64> {
    match traj.kind {
        SystemKind::EinsteinOdd => Ok(rhs_odd(&traj.states[i], &traj.params).f_t),
        SystemKind::WkOdd { c } => Ok(closed_form_warp(&traj.params, c, traj.times[i])?
            .f_tt
            .expect("closed form carries f_tt")),
        _ => Err(Error::ParityMismatch(
            "odd trajectory with even system kind",
        )),
    }
}

/// WK residual series of an even trajectory (Einstein- or WK-generated),
/// certifying that the stored warp factor and amplitudes satisfy the
/// weak-Killing system.  Parallel base only.
pub fn wk_residual_series_even(traj: &Trajectory<EvenState>) -> Result<WkResidualSeries> {
    if traj.params.lambda_m() != 0.0 {
        return Err(Error::NonParallelBase {
            lambda_m: traj.params.lambda_m(),
        });
    }
    if traj.len() < 5 {
        return Err(Error::TrajectoryTooShort(
            "five samples needed for the WK derivative stencil",
        ));
    }
    let hp: Vec<Complex64> = traj.states.iter().map(|s| s.h_plus).collect();
    let mut values = Vec::with_capacity(traj.len().saturating_sub(4));
    for i in 2..traj.len() - 2 {
        if !stencil_ok(&traj.times, i) {
            break;
        }
        let h = traj.times[i] - traj.times[i - 1];
        let dh = stencil_derivative(&hp, i, h);
        values.push(wk_residual_even(
            &traj.states[i],
            &traj.params,
            f_tt_even(traj, i)?,
            dh,
        )?);
    }
    Ok(WkResidualSeries { start: 2, values })
}

/// WK residual series of an odd trajectory.  Parallel base only.
pub fn wk_residual_series_odd(traj: &Trajectory<OddState>) -> Result<WkResidualSeries> {
    if traj.params.lambda_m() != 0.0 {
        return Err(Error::NonParallelBase {
            lambda_m: traj.params.lambda_m(),
        });
    }
    if traj.len() < 5 {
        return Err(Error::TrajectoryTooShort(
            "five samples needed for the WK derivative stencil",
        ));
    }
    let h: Vec<Complex64> = traj
        .states
        .iter()
        .map(|s| Complex64::new(s.h_plus, 0.0))
        .collect();
    let k: Vec<Complex64> = traj
        .states
        .iter()
        .map(|s| Complex64::new(s.k_plus, 0.0))
        .collect();
    let mut values = Vec::with_capacity(traj.len().saturating_sub(4));
    for i in 2..traj.len() - 2 {
        if !stencil_ok(&traj.times, i) {
            break;
        }
        let dt = traj.times[i] - traj.times[i - 1];
        let dh = stencil_derivative(&h, i, dt).re;
        let dk = stencil_derivative(&k, i, dt).re;
        values.push(wk_residual_odd(
            &traj.states[i],
            &traj.params,
            f_tt_odd(traj, i)?,
            dh,
            dk,
        )?);
    }
    Ok(WkResidualSeries { start: 2, values })
}

/// Residuals evaluated at one trajectory sample.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SampleResiduals {
    pub hamiltonian: f64,
    pub einstein_tan: f64,
    pub einstein_normal: f64,
    /// Monitored charge value: the difference charge (even trajectories) or
    /// the modulus charge (odd trajectories).
    pub charge: f64,
}

/// Maxima over a trajectory plus the pass verdict.
///
/// Which residuals gate `pass` depends on the run kind: Einstein runs gate
/// on the Hamiltonian, the Einstein residuals, the charge drift, and — for
/// a parallel base — the WK residual; WK runs gate on the WK residual and
/// the charge drift only (their metric is not an Einstein solution unless
/// the warp rate happens to satisfy the constraint, so the Einstein maxima
/// are reported as diagnostics without failing the run).
#[derive(Debug, Clone, PartialEq)]
pub struct ResidualReport {
    pub hamiltonian_max: f64,
    pub einstein_tan_max: f64,
    pub einstein_normal_max: f64,
    /// Present when the run has a conserved charge to monitor: always for
    /// even runs (difference charge), for odd runs only with parallel base
    /// (modulus charge).  Even parallel-base runs also fold in the sum
    /// charge drift.
    pub charge_drift_max: Option<f64>,
    /// Max WK residual; present for parallel-base runs with enough samples.
    pub wk_residual_max: Option<f64>,
    pub tolerance: f64,
    pub pass: bool,
}

/// Per-sample residuals plus the report.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryResiduals {
    pub samples: Vec<SampleResiduals>,
    pub report: ResidualReport,
}

fn finalize_report(
    samples: &[SampleResiduals],
    charge_drift: Option<f64>,
    wk_max: Option<f64>,
    gate_einstein: bool,
    tolerance: f64,
) -> ResidualReport {
    let fold = |pick: fn(&SampleResiduals) -> f64| samples.iter().map(pick).fold(0.0, f64::max);
    let hamiltonian_max = fold(|s| s.hamiltonian.abs());
    let einstein_tan_max = fold(|s| s.einstein_tan.abs());
    let einstein_normal_max = fold(|s| s.einstein_normal.abs());

    let mut pass = true;
    if gate_einstein {
        pass &= hamiltonian_max <= tolerance
            && einstein_tan_max <= tolerance
            && einstein_normal_max <= tolerance;
    }
    if let Some(d) = charge_drift {
        pass &= d <= tolerance;
    }
    if let Some(w) = wk_max {
        pass &= w <= tolerance;
    }

    ResidualReport {
        hamiltonian_max,
        einstein_tan_max,
        einstein_normal_max,
        charge_drift_max: charge_drift,
        wk_residual_max: wk_max,
        tolerance,
        pass,
    }
}

/// Evaluate all residuals along an even trajectory.
pub fn residuals_even(traj: &Trajectory<EvenState>, tolerance: f64) -> TrajectoryResiduals {
    let params = &traj.params;
    let is_einstein = matches!(traj.kind, SystemKind::EinsteinEven);

    let samples: Vec<SampleResiduals> = traj
        .states
        .iter()
        .enumerate()
        .map(|(i, s)| {
            let f_tt = f_tt_even(traj, i).unwrap_or(f64::NAN);
            let em = energy_momentum_even(s, params);
            let ein = einstein_residuals_core(s.f, s.f_t, f_tt, &em, params);
            SampleResiduals {
                hamiltonian: hamiltonian_residual_even(s, params),
                einstein_tan: ein.tan,
                einstein_normal: ein.normal,
                charge: charge_even(s, params).diff,
            }
        })
        .collect();

    let charge_drift = traj.states.first().map(|s0| {
        let c0 = charge_even(s0, params);
        let mut drift = 0.0f64;
        for s in &traj.states {
            let c = charge_even(s, params);
            drift = drift.max((c.diff - c0.diff).abs());
            if params.lambda_m() == 0.0 {
                drift = drift.max((c.sum - c0.sum).abs());
            }
        }
        drift
    });

    let wk_max = if params.lambda_m() == 0.0 {
        wk_residual_series_even(traj).ok().map(|s| s.max())
    } else {
        None
    };

    let report = finalize_report(&samples, charge_drift, wk_max, is_einstein, tolerance);
    TrajectoryResiduals { samples, report }
}

/// Evaluate all residuals along an odd trajectory.
pub fn residuals_odd(traj: &Trajectory<OddState>, tolerance: f64) -> TrajectoryResiduals {
    let params = &traj.params;
    let is_einstein = matches!(traj.kind, SystemKind::EinsteinOdd);

    let samples: Vec<SampleResiduals> = traj
        .states
        .iter()
        .enumerate()
        .map(|(i, s)| {
            let f_tt = f_tt_odd(traj, i).unwrap_or(f64::NAN);
            let em = energy_momentum_odd(s, params);
            let ein = einstein_residuals_core(s.f, s.f_t, f_tt, &em, params);
            SampleResiduals {
                hamiltonian: hamiltonian_residual_odd(s, params),
                einstein_tan: ein.tan,
                einstein_normal: ein.normal,
                charge: charge_odd(s, params),
            }
        })
        .collect();

    let charge_drift = if params.lambda_m() == 0.0 {
        traj.states.first().map(|s0| {
            let q0 = charge_odd(s0, params);
            traj.states
                .iter()
                .map(|s| (charge_odd(s, params) - q0).abs())
                .fold(0.0, f64::max)
        })
    } else {
        None
    };

    let wk_max = if params.lambda_m() == 0.0 {
        wk_residual_series_odd(traj).ok().map(|s| s.max())
    } else {
        None
    };

    let report = finalize_report(&samples, charge_drift, wk_max, is_einstein, tolerance);
    TrajectoryResiduals { samples, report }
}

/// Convenience wrapper returning only the report.
pub fn residual_report_even(traj: &Trajectory<EvenState>, tolerance: f64) -> ResidualReport {
    residuals_even(traj, tolerance).report
}

/// Convenience wrapper returning only the report.
pub fn residual_report_odd(traj: &Trajectory<OddState>, tolerance: f64) -> ResidualReport {
    residuals_odd(traj, tolerance).report
}
