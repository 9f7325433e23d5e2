//! Acceptance suite: one test per criterion, each printing a pass/fail line.
//!
//! The heavy work — evolving every admissible tuple of the parameter grid at
//! two step sizes and collecting residual maxima — happens once in
//! [`grid`] and is shared by the criteria.
//!
//! Run with `cargo test --test acceptance -- --nocapture` to see the lines.

use std::sync::OnceLock;

use num_complex::Complex64;
use warped_dirac::constraints::{
    hamiltonian_residual_even, hamiltonian_residual_odd, residuals_even, residuals_odd,
    wk_residual_series_odd,
};
use warped_dirac::evolution::{
    evolve_einstein_even, evolve_einstein_odd, evolve_wk_even, evolve_wk_odd, initial_state_even,
    initial_state_odd, rhs_even, rhs_odd, Integrator,
};
use warped_dirac::geometry::{
    closed_form_scalar, closed_form_warp, curvature, second_fundamental_form, GeometrySample,
};
use warped_dirac::reparam::{gamma, pullback_pair};
use warped_dirac::{ModelParams, Parity, Sign};

const STEP: f64 = 1e-4;
const COARSE_STEP: f64 = 4e-3;
const HORIZON: f64 = 1.0;
const WINDOW_FRACTION: f64 = 0.8;

/// Keep the prefix of a run up to 80% of its resolved window.  Fixed-step
/// integration makes this prefix identical to a run with the shorter
/// `t_end`, so no re-integration is needed.
fn truncate_to_window<S: Clone>(
    traj: &warped_dirac::evolution::Trajectory<S>,
) -> (warped_dirac::evolution::Trajectory<S>, f64) {
    let t_cut = WINDOW_FRACTION * traj.resolved_window();
    let keep = traj
        .times
        .iter()
        .position(|t| t.abs() > t_cut)
        .unwrap_or(traj.len());
    let truncated = warped_dirac::evolution::Trajectory {
        params: traj.params,
        kind: traj.kind,
        step: traj.step,
        times: traj.times[..keep].to_vec(),
        states: traj.states[..keep].to_vec(),
        termination: warped_dirac::evolution::Termination::ReachedEnd,
    };
    let t_end = *truncated.times.last().expect("nonempty run");
    (truncated, t_end)
}

struct CaseResult {
    label: String,
    /// |C_H| at the initial data.
    ham0: f64,
    /// Max |C_H| along the run at `STEP` / at `STEP/2`.
    ham_max: f64,
    ham_max_fine: f64,
    /// Max |C_H| at the coarse step pair, where the drift is far above the
    /// rounding floor and the convergence order is measurable.
    ham_coarse: f64,
    ham_coarse_half: f64,
    tan_max: f64,
    normal_max: f64,
    /// Even runs: difference-charge drift.
    diff_drift: Option<f64>,
    /// Even parallel-base runs: sum-charge drift.
    sum_drift: Option<f64>,
    /// Odd parallel-base runs: modulus-charge drift.
    odd_drift: Option<f64>,
    /// Parallel-base extras.
    f_dev: Option<f64>,
    scalar_dev: Option<f64>,
    scalar_max: Option<f64>,
    wk_amp_dev: Option<f64>,
    modulus_dev: Option<f64>,
    wk_residual: Option<f64>,
}

fn admissible_grid() -> Vec<ModelParams> {
    let mut cases = Vec::new();
    let parities = [
        (Parity::Even, vec![1u32, 2, 3, 4]),
        (Parity::Odd, vec![2, 3, 4]),
    ];
    for (parity, ms) in parities {
        for &m in &ms {
            let n = match parity {
                Parity::Even => 2 * m,
                Parity::Odd => 2 * m - 1,
            };
            let mut a_values = vec![0.0, 1.0, f64::from(n) / 2.0, 3.0];
            a_values.dedup_by(|x, y| x == y);
            a_values.sort_by(f64::total_cmp);
            a_values.dedup();
            for &a in &a_values {
                for lambda_m in [0.0, -0.5, 0.5, 1.0] {
                    for lambda_q in [0.0, -1.0, 1.0] {
                        for epsilon in [Sign::Plus, Sign::Minus] {
                            for norm in [0.5, 1.0, 2.0] {
                                let Ok(p) = ModelParams::new(
                                    parity, m, a, lambda_m, lambda_q, epsilon, norm,
                                ) else {
                                    continue;
                                };
                                let admissible = match parity {
                                    Parity::Even => initial_state_even(&p, Sign::Plus).is_ok(),
                                    Parity::Odd => initial_state_odd(&p, Sign::Plus).is_ok(),
                                };
                                if admissible {
                                    cases.push(p);
                                }
                            }
                        }
                    }
                }
            }
        }
    }
    cases
}

fn label(p: &ModelParams) -> String {
    format!(
        "{:?} m={} a={} lm={} lq={} eps={} P={}",
        p.parity(),
        p.m(),
        p.warp_exponent(),
        p.lambda_m(),
        p.lambda_q(),
        p.epsilon().value(),
        p.norm()
    )
}

fn run_even_case(p: &ModelParams) -> CaseResult {
    let s0 = initial_state_even(p, Sign::Plus).expect("grid is admissible");
    let c0 = s0.f_t;
    let ham0 = hamiltonian_residual_even(&s0, p).abs();

    let integ = Integrator::new(STEP).unwrap();
    let full = evolve_einstein_even(p, s0, HORIZON, &integ);
    let (traj, t_run) = truncate_to_window(&full);
    drop(full);
    let res = residuals_even(&traj, 1e-8);

    let ham_at = |step: f64| -> f64 {
        let integ = Integrator::new(step).unwrap();
        let t = evolve_einstein_even(p, s0, t_run, &integ);
        if !t.termination.reached_end() {
            return f64::NAN;
        }
        t.states
            .iter()
            .map(|s| hamiltonian_residual_even(s, p).abs())
            .fold(0.0, f64::max)
    };
    let ham_max_fine = ham_at(0.5 * STEP);
    let ham_coarse = ham_at(COARSE_STEP);
    let ham_coarse_half = ham_at(0.5 * COARSE_STEP);

    // Charge drifts from the stored charge values.
    let q0: Vec<f64> = traj
        .states
        .iter()
        .map(|s| warped_dirac::evolution::charge_even(s, p).diff)
        .collect();
    let diff_drift = q0.iter().map(|q| (q - q0[0]).abs()).fold(0.0, f64::max);
    let sum_drift = (p.lambda_m() == 0.0).then(|| {
        let sums: Vec<f64> = traj
            .states
            .iter()
            .map(|s| warped_dirac::evolution::charge_even(s, p).sum)
            .collect();
        sums.iter().map(|q| (q - sums[0]).abs()).fold(0.0, f64::max)
    });

    let mut out = CaseResult {
        label: label(p),
        ham0,
        ham_max: res.report.hamiltonian_max,
        ham_max_fine,
        ham_coarse,
        ham_coarse_half,
        tan_max: res.report.einstein_tan_max,
        normal_max: res.report.einstein_normal_max,
        diff_drift: Some(diff_drift),
        sum_drift,
        odd_drift: None,
        f_dev: None,
        scalar_dev: None,
        scalar_max: None,
        wk_amp_dev: None,
        modulus_dev: None,
        wk_residual: res.report.wk_residual_max,
    };

    if p.lambda_m() == 0.0 {
        let (mut f_dev, mut scalar_dev, mut scalar_max, mut modulus_dev) =
            (0.0f64, 0.0f64, f64::NEG_INFINITY, 0.0f64);
        for (t, s) in traj.times.iter().zip(&traj.states) {
            let cf = closed_form_warp(p, c0, *t).expect("inside resolved window");
            f_dev = f_dev.max((s.f - cf.f).abs());
            let f_tt = rhs_even(s, p).f_t;
            let evolved = curvature(&GeometrySample::with_second_derivative(s.f, s.f_t, f_tt), p)
                .unwrap()
                .scalar;
            scalar_dev = scalar_dev.max((evolved - closed_form_scalar(p, c0, *t).unwrap()).abs());
            scalar_max = scalar_max.max(evolved);
            let oracle = (-0.5 * f64::from(p.m()) * cf.f).exp();
            modulus_dev = modulus_dev.max((s.h_plus.norm() - oracle).abs());
        }

        let wk = evolve_wk_even(p, c0, t_run, &integ).expect("parallel base");
        assert_eq!(wk.len(), traj.len(), "matching grids for the WK comparison");
        let mut amp_dev = 0.0f64;
        let mut wk_modulus_dev = 0.0f64;
        for (i, s) in traj.states.iter().enumerate() {
            let w = &wk.states[i];
            amp_dev = amp_dev.max((s.h_plus - w.h_plus).norm());
            amp_dev = amp_dev.max((s.h_minus - w.h_plus.conj()).norm());
            let cf = closed_form_warp(p, c0, wk.times[i]).unwrap();
            let oracle = (-0.5 * f64::from(p.m()) * cf.f).exp();
            wk_modulus_dev = wk_modulus_dev.max((w.h_plus.norm() - oracle).abs());
        }

        out.f_dev = Some(f_dev);
        out.scalar_dev = Some(scalar_dev);
        out.scalar_max = Some(scalar_max);
        out.wk_amp_dev = Some(amp_dev);
        out.modulus_dev = Some(modulus_dev.max(wk_modulus_dev));
    }
    out
}

fn run_odd_case(p: &ModelParams) -> CaseResult {
    let s0 = initial_state_odd(p, Sign::Plus).expect("grid is admissible");
    let c0 = s0.f_t;
    let ham0 = hamiltonian_residual_odd(&s0, p).abs();

    let integ = Integrator::new(STEP).unwrap();
    let full = evolve_einstein_odd(p, s0, HORIZON, &integ);
    let (traj, t_run) = truncate_to_window(&full);
    drop(full);
    let res = residuals_odd(&traj, 1e-8);

    let ham_at = |step: f64| -> f64 {
        let integ = Integrator::new(step).unwrap();
        let t = evolve_einstein_odd(p, s0, t_run, &integ);
        if !t.termination.reached_end() {
            return f64::NAN;
        }
        t.states
            .iter()
            .map(|s| hamiltonian_residual_odd(s, p).abs())
            .fold(0.0, f64::max)
    };
    let ham_max_fine = ham_at(0.5 * STEP);
    let ham_coarse = ham_at(COARSE_STEP);
    let ham_coarse_half = ham_at(0.5 * COARSE_STEP);

    let odd_drift = (p.lambda_m() == 0.0).then(|| {
        let qs: Vec<f64> = traj
            .states
            .iter()
            .map(|s| warped_dirac::evolution::charge_odd(s, p))
            .collect();
        qs.iter().map(|q| (q - qs[0]).abs()).fold(0.0, f64::max)
    });

    let mut out = CaseResult {
        label: label(p),
        ham0,
        ham_max: res.report.hamiltonian_max,
        ham_max_fine,
        ham_coarse,
        ham_coarse_half,
        tan_max: res.report.einstein_tan_max,
        normal_max: res.report.einstein_normal_max,
        diff_drift: None,
        sum_drift: None,
        odd_drift,
        f_dev: None,
        scalar_dev: None,
        scalar_max: None,
        wk_amp_dev: None,
        modulus_dev: None,
        wk_residual: res.report.wk_residual_max,
    };

    if p.lambda_m() == 0.0 {
        let (mut f_dev, mut scalar_dev, mut scalar_max) = (0.0f64, 0.0f64, f64::NEG_INFINITY);
        for (t, s) in traj.times.iter().zip(&traj.states) {
            let cf = closed_form_warp(p, c0, *t).expect("inside resolved window");
            f_dev = f_dev.max((s.f - cf.f).abs());
            let f_tt = rhs_odd(s, p).f_t;
            let evolved = curvature(&GeometrySample::with_second_derivative(s.f, s.f_t, f_tt), p)
                .unwrap()
                .scalar;
            scalar_dev = scalar_dev.max((evolved - closed_form_scalar(p, c0, *t).unwrap()).abs());
            scalar_max = scalar_max.max(evolved);
        }

        let wk = evolve_wk_odd(p, c0, t_run, &integ).expect("parallel base");
        assert_eq!(wk.len(), traj.len());
        let mut amp_dev = 0.0f64;
        for (i, s) in traj.states.iter().enumerate() {
            let w = &wk.states[i];
            amp_dev = amp_dev.max((s.h_plus - w.h_plus).abs());
            amp_dev = amp_dev.max((s.k_plus - w.k_plus).abs());
        }

        out.f_dev = Some(f_dev);
        out.scalar_dev = Some(scalar_dev);
        out.scalar_max = Some(scalar_max);
        out.wk_amp_dev = Some(amp_dev);
    }
    out
}

fn grid() -> &'static Vec<CaseResult> {
    static GRID: OnceLock<Vec<CaseResult>> = OnceLock::new();
    GRID.get_or_init(|| {
        admissible_grid()
            .iter()
            .map(|p| match p.parity() {
                Parity::Even => run_even_case(p),
                Parity::Odd => run_odd_case(p),
            })
            .collect()
    })
}

fn criterion(name: &str, ok: bool, detail: &str) {
    println!("{name}: {} ({detail})", if ok { "pass" } else { "FAIL" });
    assert!(ok, "{name} failed: {detail}");
}

#[test]
fn ac1_initial_data_identity() {
    let cases = grid();
    let worst = cases.iter().map(|c| c.ham0).fold(0.0, f64::max);
    let detail = format!(
        "{} admissible tuples, max |C_H(0)| = {worst:.2e}",
        cases.len()
    );
    criterion(
        "AC-1 initial-data identity",
        cases.len() >= 200 && worst <= 1e-12,
        &detail,
    );
}

#[test]
fn ac2_constraint_propagation() {
    let cases = grid();
    let worst = cases.iter().map(|c| c.ham_max).fold(0.0, f64::max);
    let bound_ok = worst <= 1e-8;

    // Fourth-order behavior: halving the step cuts the max by >= 12.  The
    // ratio is only meaningful above the rounding floor; at the criterion
    // step the drift is already at that floor for the whole grid, so the
    // order is demonstrated on a coarse step pair as well, where the drift
    // is orders of magnitude above round-off.
    let mut order_ok = true;
    let mut worst_ratio = f64::INFINITY;
    let mut measured = 0usize;
    for c in cases.iter() {
        for (max, half) in [
            (c.ham_max, c.ham_max_fine),
            (c.ham_coarse, c.ham_coarse_half),
        ] {
            if !max.is_finite() || !half.is_finite() {
                continue; // the coarse run left the resolved window early
            }
            if max > 1e-12 && half > 1e-13 {
                let ratio = max / half;
                measured += 1;
                if ratio < worst_ratio {
                    worst_ratio = ratio;
                }
                if ratio < 12.0 {
                    eprintln!("order failure on {}: ratio {ratio}", c.label);
                    order_ok = false;
                }
            }
        }
    }
    let detail = format!(
        "max |C_H| = {worst:.2e}; {measured} measurable halvings, worst ratio = {worst_ratio:.1}"
    );
    criterion(
        "AC-2 constraint propagation",
        bound_ok && order_ok && measured >= 100,
        &detail,
    );
}

#[test]
fn ac3_closed_form_reproduction() {
    let cases = grid();
    let mut f_dev = 0.0f64;
    let mut scalar_dev = 0.0f64;
    let mut scalar_max = f64::NEG_INFINITY;
    let mut count = 0;
    for c in cases.iter() {
        if let (Some(fd), Some(sd), Some(sm)) = (c.f_dev, c.scalar_dev, c.scalar_max) {
            f_dev = f_dev.max(fd);
            scalar_dev = scalar_dev.max(sd);
            scalar_max = scalar_max.max(sm);
            count += 1;
        }
    }
    let detail = format!(
        "{count} parallel-base runs, sup|f - closed form| = {f_dev:.2e}, \
         sup|S - closed form| = {scalar_dev:.2e}, max S = {scalar_max:.2e}"
    );
    criterion(
        "AC-3 closed-form warp reproduction",
        count > 0 && f_dev <= 1e-8 && scalar_dev <= 1e-7 && scalar_max <= 0.0,
        &detail,
    );
}

#[test]
fn ac4_wk_coincidence() {
    let cases = grid();
    let mut amp_dev = 0.0f64;
    let mut modulus_dev = 0.0f64;
    let mut wk_residual = 0.0f64;
    let mut count = 0;
    for c in cases.iter() {
        if let Some(ad) = c.wk_amp_dev {
            amp_dev = amp_dev.max(ad);
            count += 1;
        }
        if let Some(md) = c.modulus_dev {
            modulus_dev = modulus_dev.max(md);
        }
        // Parallel-base Einstein runs must also satisfy the first-order WK
        // system sample by sample.
        if let Some(w) = c.wk_residual {
            wk_residual = wk_residual.max(w);
        }
    }
    let detail = format!(
        "{count} runs, sup amplitude deviation = {amp_dev:.2e}, \
         even modulus oracle deviation = {modulus_dev:.2e}, \
         max WK residual = {wk_residual:.2e}"
    );
    criterion(
        "AC-4 Einstein/WK coincidence",
        count > 0 && amp_dev <= 1e-6 && modulus_dev <= 1e-8 && wk_residual <= 1e-6,
        &detail,
    );
}

#[test]
fn ac5_conserved_charges() {
    let cases = grid();
    let mut diff = 0.0f64;
    let mut parallel = 0.0f64;
    for c in cases.iter() {
        if let Some(d) = c.diff_drift {
            diff = diff.max(d);
        }
        if let Some(d) = c.sum_drift {
            parallel = parallel.max(d);
        }
        if let Some(d) = c.odd_drift {
            parallel = parallel.max(d);
        }
    }
    let detail =
        format!("diff-charge drift = {diff:.2e}, parallel-base charge drift = {parallel:.2e}");
    criterion(
        "AC-5 conserved charges",
        diff <= 1e-10 && parallel <= 1e-9,
        &detail,
    );
}

#[test]
fn ac6_einstein_residuals() {
    let cases = grid();
    let tan = cases.iter().map(|c| c.tan_max).fold(0.0, f64::max);
    let normal = cases.iter().map(|c| c.normal_max).fold(0.0, f64::max);
    let detail = format!("max |tan| = {tan:.2e}, max |normal| = {normal:.2e}");
    criterion(
        "AC-6 Einstein residuals",
        tan <= 1e-6 && normal <= 1e-6,
        &detail,
    );
}

#[test]
fn ac7_gauss_identity() {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0x9e3779b9);
    let mut worst = 0.0f64;
    for _ in 0..10_000 {
        let parity = if rng.gen_bool(0.5) {
            Parity::Even
        } else {
            Parity::Odd
        };
        let m = match parity {
            Parity::Even => rng.gen_range(1..=4),
            Parity::Odd => rng.gen_range(2..=4),
        };
        let p = ModelParams::new(
            parity,
            m,
            rng.gen_range(-2.0..3.0),
            rng.gen_range(-1.5..1.5),
            0.0,
            Sign::Plus,
            1.0,
        )
        .unwrap();
        let s = GeometrySample::with_second_derivative(
            rng.gen_range(-2.0..2.0),
            rng.gen_range(-3.0..3.0),
            rng.gen_range(-3.0..3.0),
        );
        let c = curvature(&s, &p).unwrap();
        let ff = second_fundamental_form(&s, &p);
        let lhs = c.scalar - 2.0 * c.ric_normal - c.slice_scalar;
        let rhs = ff.trace_sq - ff.trace * ff.trace;
        let scale = [
            c.scalar.abs(),
            2.0 * c.ric_normal.abs(),
            c.slice_scalar.abs(),
            ff.trace_sq,
            ff.trace * ff.trace,
            1.0,
        ]
        .into_iter()
        .fold(0.0f64, f64::max);
        worst = worst.max((lhs - rhs).abs() / scale);
    }
    let detail = format!("10000 samples, worst relative residual = {worst:.2e}");
    criterion("AC-7 Gauss identity", worst <= 1e-12, &detail);
}

#[test]
fn ac8_r3_cross_check() {
    // Slice dimension n = 3 (odd, m = 2), parallel base, a = n/2 so f = ct:
    // the WK amplitudes must solve the odd linear system, and they match its
    // closed-form solution h + ik = (1+i) exp(-((2m-1)/4)ct - i λ_Q I(t))
    // with I(t) = (2/(ac))(e^{act/2} - 1).
    let p = ModelParams::new(Parity::Odd, 2, 1.5, 0.0, 1.0, Sign::Plus, 1.0).unwrap();
    let (c, t_end) = (1.0, 1.0);
    let integ = Integrator::new(STEP).unwrap();
    let traj = evolve_wk_odd(&p, c, t_end, &integ).unwrap();
    assert!(traj.termination.reached_end());

    let series = wk_residual_series_odd(&traj).unwrap();
    let residual = series.max();

    let a = p.warp_exponent();
    let nu = 0.25 * (2.0 * f64::from(p.m()) - 1.0);
    let mut oracle_dev = 0.0f64;
    for (t, s) in traj.times.iter().zip(&traj.states) {
        let phase = 2.0 / (a * c) * ((0.5 * a * c * t).exp() - 1.0);
        let u = Complex64::new(1.0, 1.0)
            * (Complex64::new(-nu * c * t, 0.0) - Complex64::new(0.0, p.lambda_q() * phase)).exp();
        oracle_dev = oracle_dev.max((s.h_plus - u.re).abs().max((s.k_plus - u.im).abs()));
    }

    let detail = format!(
        "linear-system residual = {residual:.2e}, closed-form deviation = {oracle_dev:.2e}"
    );
    criterion(
        "AC-8 flat 3-space cross-check",
        residual <= 1e-8 && oracle_dev <= 1e-8,
        &detail,
    );
}

#[test]
fn ac9_reparametrization() {
    let p = ModelParams::new(Parity::Even, 1, 1.0, 0.0, 1.0, Sign::Plus, 1.0).unwrap();
    let s0 = initial_state_even(&p, Sign::Plus).unwrap();
    let integ = Integrator::new(STEP).unwrap();
    let fwd = evolve_einstein_even(&p, s0, 0.5, &integ);
    let back = evolve_einstein_even(&p, s0, -0.5, &integ);
    let omega = 0.4;

    let s_grid: Vec<f64> = (0..50).map(|i| -6.0 + 12.0 * f64::from(i) / 49.0).collect();
    let global = pullback_pair(&fwd, &back, omega, &s_grid).unwrap();

    // Oddness of gamma, exact to the bit.
    let odd_exact = s_grid.iter().all(|&s| gamma(-s, omega) == -gamma(s, omega));

    // Residuals of the pulled-back states vs the original residuals at
    // gamma(s), the latter interpolated from the per-sample series with the
    // same cubic rule (implemented independently here).
    let interp_scalar = |times: &[f64], values: &[f64], t: f64| -> f64 {
        let ascending = times[times.len() - 1] >= times[0];
        let pos = times
            .iter()
            .position(|&x| if ascending { x >= t } else { x <= t })
            .unwrap_or(times.len() - 1);
        let start = pos.saturating_sub(2).min(times.len() - 4);
        let xs = &times[start..start + 4];
        let ys = &values[start..start + 4];
        let mut acc = 0.0;
        for i in 0..4 {
            let mut w = ys[i];
            for k in 0..4 {
                if k != i {
                    w *= (t - xs[k]) / (xs[i] - xs[k]);
                }
            }
            acc += w;
        }
        acc
    };
    let ham_series = |traj: &warped_dirac::evolution::Trajectory<
        warped_dirac::evolution::EvenState,
    >|
     -> Vec<f64> {
        traj.states
            .iter()
            .map(|s| hamiltonian_residual_even(s, &p))
            .collect()
    };
    let fwd_ham = ham_series(&fwd);
    let back_ham = ham_series(&back);

    let mut worst = 0.0f64;
    for (i, &s) in global.s_values.iter().enumerate() {
        let pulled = hamiltonian_residual_even(&global.states[i], &p);
        let t = global.t_values[i];
        let original = if s >= 0.0 {
            interp_scalar(&fwd.times, &fwd_ham, t)
        } else {
            interp_scalar(&back.times, &back_ham, t)
        };
        worst = worst.max((pulled - original).abs());
    }
    let budget = 1e-6 + global.interpolation_error;
    let detail = format!(
        "50 grid points, worst residual mismatch = {worst:.2e} (budget {budget:.2e}), \
         gamma odd: {odd_exact}"
    );
    criterion(
        "AC-9 reparametrization",
        worst <= budget && odd_exact,
        &detail,
    );
}
