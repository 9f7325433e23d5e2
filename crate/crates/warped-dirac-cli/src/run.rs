//! The five run modes.
//!
//! Exit codes: 0 = success with residuals within tolerance; 1 = residual
//! failure; 2 = invalid or inadmissible input; 3 = the run ended before
//! `t_end` (blow-up or domain exit) — artifacts still carry the resolved
//! prefix.

use std::path::Path;

use crate::config::{Mode, RunConfig};
use crate::output::{
    fmt_f64, print_summary, read_csv, report_lines, write_report, write_table, Table,
    CLOSED_FORM_HEADER, EVEN_HEADER, ODD_HEADER,
};
use warped_dirac::constraints::{
    einstein_residuals_even, einstein_residuals_odd, hamiltonian_residual_even,
    hamiltonian_residual_odd, residuals_even, residuals_odd, ResidualReport, SampleResiduals,
    TrajectoryResiduals,
};
use warped_dirac::evolution::{
    charge_even, charge_odd, evolve_einstein_even, evolve_einstein_odd, evolve_wk_even,
    evolve_wk_odd, initial_state_even, initial_state_odd, EvenState, Integrator, OddState,
    SystemKind, Termination, Trajectory,
};
use warped_dirac::geometry::{closed_form_scalar, closed_form_warp};
use warped_dirac::{ModelParams, Parity};

pub const EXIT_OK: i32 = 0;
pub const EXIT_RESIDUAL: i32 = 1;
pub const EXIT_INVALID: i32 = 2;
pub const EXIT_INCOMPLETE: i32 = 3;

pub fn execute(config: &RunConfig) -> i32 {
    let result = match config.mode {
        Mode::EvolveEinstein => evolve_einstein(config),
        Mode::EvolveWk => evolve_wk(config),
        Mode::ClosedForm => closed_form(config),
        Mode::Verify => verify(config),
        Mode::Reparam => reparam(config),
    };
    match result {
        Ok(code) => code,
        Err(msg) => {
            eprintln!("error: {msg}");
            EXIT_INVALID
        }
    }
}

fn model_params(config: &RunConfig) -> Result<ModelParams, String> {
    ModelParams::new(
        config.parity,
        config.m,
        config.a,
        config.lambda_m,
        config.lambda_q,
        config.epsilon,
        config.norm,
    )
    .map_err(|e| e.to_string())
}

fn integrator(config: &RunConfig) -> Result<Integrator, String> {
    Integrator::new(config.step).map_err(|e| e.to_string())
}

fn report_path(out: &Path) -> std::path::PathBuf {
    out.with_extension("report")
}

fn even_table(traj: &Trajectory<EvenState>, samples: &[SampleResiduals]) -> Table {
    let rows = traj
        .times
        .iter()
        .zip(&traj.states)
        .zip(samples)
        .map(|((t, s), r)| {
            vec![
                *t,
                s.f,
                s.f_t,
                s.h_plus.re,
                s.h_plus.im,
                s.h_minus.re,
                s.h_minus.im,
                r.hamiltonian,
                r.einstein_tan,
                r.einstein_normal,
                r.charge,
            ]
        })
        .collect();
    Table {
        header: EVEN_HEADER.to_vec(),
        rows,
    }
}

fn odd_table(traj: &Trajectory<OddState>, samples: &[SampleResiduals]) -> Table {
    let rows = traj
        .times
        .iter()
        .zip(&traj.states)
        .zip(samples)
        .map(|((t, s), r)| {
            vec![
                *t,
                s.f,
                s.f_t,
                s.h_plus,
                s.k_plus,
                r.hamiltonian,
                r.einstein_tan,
                r.einstein_normal,
                r.charge,
            ]
        })
        .collect();
    Table {
        header: ODD_HEADER.to_vec(),
        rows,
    }
}

fn finish_run(
    config: &RunConfig,
    table: &Table,
    termination: &Termination,
    window: f64,
    report: &ResidualReport,
) -> Result<i32, String> {
    write_table(config, table, termination, window)?;
    let text = report_lines(&config.mode.to_string(), termination, window, report, &[]);
    write_report(&report_path(&config.out), &text)?;
    print_summary(
        &config.mode.to_string(),
        termination,
        window,
        report,
        &config.out,
    );
    if !termination.reached_end() {
        Ok(EXIT_INCOMPLETE)
    } else if !report.pass {
        Ok(EXIT_RESIDUAL)
    } else {
        Ok(EXIT_OK)
    }
}

fn evolve_einstein(config: &RunConfig) -> Result<i32, String> {
    let params = model_params(config)?;
    let integ = integrator(config)?;
    match config.parity {
        Parity::Even => {
            let state0 = initial_state_even(&params, config.sign).map_err(|e| e.to_string())?;
            let traj = evolve_einstein_even(&params, state0, config.t_end, &integ);
            let res = residuals_even(&traj, config.tolerance);
            finish_run(
                config,
                &even_table(&traj, &res.samples),
                &traj.termination,
                traj.resolved_window(),
                &res.report,
            )
        }
        Parity::Odd => {
            let state0 = initial_state_odd(&params, config.sign).map_err(|e| e.to_string())?;
            let traj = evolve_einstein_odd(&params, state0, config.t_end, &integ);
            let res = residuals_odd(&traj, config.tolerance);
            finish_run(
                config,
                &odd_table(&traj, &res.samples),
                &traj.termination,
                traj.resolved_window(),
                &res.report,
            )
        }
    }
}

fn evolve_wk(config: &RunConfig) -> Result<i32, String> {
    let params = model_params(config)?;
    let integ = integrator(config)?;
    let c = config.c.expect("validated by resolve()");
    match config.parity {
        Parity::Even => {
            let traj =
                evolve_wk_even(&params, c, config.t_end, &integ).map_err(|e| e.to_string())?;
            let res = residuals_even(&traj, config.tolerance);
            finish_run(
                config,
                &even_table(&traj, &res.samples),
                &traj.termination,
                traj.resolved_window(),
                &res.report,
            )
        }
        Parity::Odd => {
            let traj =
                evolve_wk_odd(&params, c, config.t_end, &integ).map_err(|e| e.to_string())?;
            let res = residuals_odd(&traj, config.tolerance);
            finish_run(
                config,
                &odd_table(&traj, &res.samples),
                &traj.termination,
                traj.resolved_window(),
                &res.report,
            )
        }
    }
}

fn closed_form(config: &RunConfig) -> Result<i32, String> {
    let params = model_params(config)?;
    let c = config.c.expect("validated by resolve()");
    let sign = if config.t_end < 0.0 { -1.0 } else { 1.0 };
    let total = config.t_end.abs();
    let n_full = (total / config.step).floor() as usize;
    let has_tail = total - n_full as f64 * config.step > config.step * 1e-12;

    let mut rows: Vec<Vec<f64>> = Vec::with_capacity(n_full + 2);
    let mut termination = Termination::ReachedEnd;
    let mut window = 0.0f64;
    for k in 0..=n_full + usize::from(has_tail) {
        let t = if k <= n_full {
            sign * k as f64 * config.step
        } else {
            config.t_end
        };
        match (
            closed_form_warp(&params, c, t),
            closed_form_scalar(&params, c, t),
        ) {
            (Ok(w), Ok(s)) => {
                rows.push(vec![t, w.f, w.f_t, w.f_tt.unwrap_or(0.0), s]);
                window = t.abs();
            }
            _ => {
                termination = Termination::DomainExit {
                    t_est: window * sign,
                };
                break;
            }
        }
    }

    let table = Table {
        header: CLOSED_FORM_HEADER.to_vec(),
        rows,
    };
    write_table(config, &table, &termination, window)?;
    println!(
        "mode={} termination={termination} window={window:.6} rows={} out={}",
        config.mode,
        table.rows.len(),
        config.out.display()
    );
    Ok(if termination.reached_end() {
        EXIT_OK
    } else {
        EXIT_INCOMPLETE
    })
}

fn verify(config: &RunConfig) -> Result<i32, String> {
    let params = model_params(config)?;
    let input = config.input.as_ref().expect("validated by resolve()");
    let (header, rows) = read_csv(input)?;
    let expected: &[&str] = match config.parity {
        Parity::Even => EVEN_HEADER,
        Parity::Odd => ODD_HEADER,
    };
    if header != expected {
        return Err(format!(
            "{}: header {:?} does not match the {:?}-parity schema",
            input.display(),
            header,
            config.parity
        ));
    }
    if rows.len() < 2 {
        return Err(format!("{}: need at least two samples", input.display()));
    }

    let times: Vec<f64> = rows.iter().map(|r| r[0]).collect();
    let step = (times[1] - times[0]).abs();
    let (res, stored_mismatch, window) = match config.parity {
        Parity::Even => {
            let states: Vec<EvenState> = rows
                .iter()
                .map(|r| {
                    EvenState::new(
                        r[1],
                        r[2],
                        warped_dirac::Complex64::new(r[3], r[4]),
                        warped_dirac::Complex64::new(r[5], r[6]),
                    )
                })
                .collect();
            let traj = Trajectory {
                params,
                kind: SystemKind::EinsteinEven,
                step,
                times,
                states,
                termination: Termination::ReachedEnd,
            };
            let res = residuals_even(&traj, config.tolerance);
            let mismatch = stored_mismatch(&rows, 7, &res);
            let window = traj.resolved_window();
            (res, mismatch, window)
        }
        Parity::Odd => {
            let states: Vec<OddState> = rows
                .iter()
                .map(|r| OddState::new(r[1], r[2], r[3], r[4]))
                .collect();
            let traj = Trajectory {
                params,
                kind: SystemKind::EinsteinOdd,
                step,
                times,
                states,
                termination: Termination::ReachedEnd,
            };
            let res = residuals_odd(&traj, config.tolerance);
            let mismatch = stored_mismatch(&rows, 5, &res);
            let window = traj.resolved_window();
            (res, mismatch, window)
        }
    };

    let extra = [
        ("rows", rows.len().to_string()),
        ("stored_mismatch", fmt_f64(stored_mismatch)),
        ("input", input.display().to_string()),
    ];
    let text = report_lines(
        &config.mode.to_string(),
        &Termination::ReachedEnd,
        window,
        &res.report,
        &extra,
    );
    write_report(&config.out, &text)?;
    print_summary(
        &config.mode.to_string(),
        &Termination::ReachedEnd,
        window,
        &res.report,
        &config.out,
    );
    Ok(if res.report.pass {
        EXIT_OK
    } else {
        EXIT_RESIDUAL
    })
}

/// Max difference between the residual columns stored in the file (starting
/// at `first_col`: C_H, tan, normal, charge) and the recomputed values.
fn stored_mismatch(rows: &[Vec<f64>], first_col: usize, res: &TrajectoryResiduals) -> f64 {
    rows.iter()
        .zip(&res.samples)
        .map(|(row, s)| {
            let d1 = (row[first_col] - s.hamiltonian).abs();
            let d2 = (row[first_col + 1] - s.einstein_tan).abs();
            let d3 = (row[first_col + 2] - s.einstein_normal).abs();
            let d4 = (row[first_col + 3] - s.charge).abs();
            d1.max(d2).max(d3).max(d4)
        })
        .fold(0.0, f64::max)
}

fn merge_reports(a: &ResidualReport, b: &ResidualReport) -> ResidualReport {
    let opt_max = |x: Option<f64>, y: Option<f64>| match (x, y) {
        (Some(p), Some(q)) => Some(p.max(q)),
        (p, q) => p.or(q),
    };
    ResidualReport {
        hamiltonian_max: a.hamiltonian_max.max(b.hamiltonian_max),
        einstein_tan_max: a.einstein_tan_max.max(b.einstein_tan_max),
        einstein_normal_max: a.einstein_normal_max.max(b.einstein_normal_max),
        charge_drift_max: opt_max(a.charge_drift_max, b.charge_drift_max),
        wk_residual_max: opt_max(a.wk_residual_max, b.wk_residual_max),
        tolerance: a.tolerance,
        pass: a.pass && b.pass,
    }
}

/// s-grid for the global presentation: 101 symmetric points covering 95% of
/// the window image.
fn reparam_grid() -> Vec<f64> {
    let s_max = (0.95 * std::f64::consts::FRAC_PI_2).tan();
    (0..101).map(|i| f64::from(i - 50) / 50.0 * s_max).collect()
}

fn reparam(config: &RunConfig) -> Result<i32, String> {
    let params = model_params(config)?;
    let integ = integrator(config)?;
    let horizon = config.t_end.abs();

    match config.parity {
        Parity::Even => {
            let state0 = initial_state_even(&params, config.sign).map_err(|e| e.to_string())?;
            let fwd = evolve_einstein_even(&params, state0, horizon, &integ);
            let back = evolve_einstein_even(&params, state0, -horizon, &integ);
            let window = fwd.resolved_window().min(back.resolved_window());
            let omega = config.omega.unwrap_or(0.8 * window);
            let global = warped_dirac::reparam::pullback_pair(&fwd, &back, omega, &reparam_grid())
                .map_err(|e| e.to_string())?;

            let report = merge_reports(
                &residuals_even(&fwd, config.tolerance).report,
                &residuals_even(&back, config.tolerance).report,
            );
            let mut rows = Vec::with_capacity(global.s_values.len());
            for (i, s) in global.states.iter().enumerate() {
                let r = einstein_residuals_even(s, &params);
                rows.push(vec![
                    global.t_values[i],
                    s.f,
                    s.f_t,
                    s.h_plus.re,
                    s.h_plus.im,
                    s.h_minus.re,
                    s.h_minus.im,
                    hamiltonian_residual_even(s, &params),
                    r.tan,
                    r.normal,
                    charge_even(s, &params).diff,
                    global.s_values[i],
                    global.lapse[i],
                ]);
            }
            let mut header = EVEN_HEADER.to_vec();
            header.push("s");
            header.push("lapse");
            let table = Table { header, rows };
            let termination = if fwd.termination.reached_end() && back.termination.reached_end() {
                Termination::ReachedEnd
            } else {
                Termination::BlowUp { t_est: window }
            };
            finish_reparam(
                config,
                &table,
                &termination,
                window,
                omega,
                &global,
                &report,
            )
        }
        Parity::Odd => {
            let state0 = initial_state_odd(&params, config.sign).map_err(|e| e.to_string())?;
            let fwd = evolve_einstein_odd(&params, state0, horizon, &integ);
            let back = evolve_einstein_odd(&params, state0, -horizon, &integ);
            let window = fwd.resolved_window().min(back.resolved_window());
            let omega = config.omega.unwrap_or(0.8 * window);
            let global = warped_dirac::reparam::pullback_pair(&fwd, &back, omega, &reparam_grid())
                .map_err(|e| e.to_string())?;

            let report = merge_reports(
                &residuals_odd(&fwd, config.tolerance).report,
                &residuals_odd(&back, config.tolerance).report,
            );
            let mut rows = Vec::with_capacity(global.s_values.len());
            for (i, s) in global.states.iter().enumerate() {
                let r = einstein_residuals_odd(s, &params);
                rows.push(vec![
                    global.t_values[i],
                    s.f,
                    s.f_t,
                    s.h_plus,
                    s.k_plus,
                    hamiltonian_residual_odd(s, &params),
                    r.tan,
                    r.normal,
                    charge_odd(s, &params),
                    global.s_values[i],
                    global.lapse[i],
                ]);
            }
            let mut header = ODD_HEADER.to_vec();
            header.push("s");
            header.push("lapse");
            let table = Table { header, rows };
            let termination = if fwd.termination.reached_end() && back.termination.reached_end() {
                Termination::ReachedEnd
            } else {
                Termination::BlowUp { t_est: window }
            };
            finish_reparam(
                config,
                &table,
                &termination,
                window,
                omega,
                &global,
                &report,
            )
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn finish_reparam<S>(
    config: &RunConfig,
    table: &Table,
    termination: &Termination,
    window: f64,
    omega: f64,
    global: &warped_dirac::reparam::GlobalTrajectory<S>,
    report: &ResidualReport,
) -> Result<i32, String> {
    write_table(config, table, termination, window)?;
    let extra = [
        ("omega", fmt_f64(omega)),
        ("interpolation_error", fmt_f64(global.interpolation_error)),
    ];
    let text = report_lines(
        &config.mode.to_string(),
        termination,
        window,
        report,
        &extra,
    );
    write_report(&report_path(&config.out), &text)?;
    print_summary(
        &config.mode.to_string(),
        termination,
        window,
        report,
        &config.out,
    );
    if !termination.reached_end() {
        Ok(EXIT_INCOMPLETE)
    } else if !report.pass {
        Ok(EXIT_RESIDUAL)
    } else {
        Ok(EXIT_OK)
    }
}
