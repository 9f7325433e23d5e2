//! Global presentation of a local solution via arctan reparametrization.
//!
//! A solution living on `M × (-ω, ω)` pulls back along the diffeomorphism
//! `γ(s) = (2ω/π) arctan(s)` to a solution on all of `M × ℝ`: the warp
//! factor becomes `f*(s) = f(γ(s))`, the amplitudes compose the same way,
//! and the `ds⊗ds` metric coefficient (the squared lapse of the new time
//! function) picks up the Jacobian factor
//!
//! ```text
//! lapse(s) = e^{a f*(s)} · 4ω² / (π² (s²+1)²).
//! ```
//!
//! Numerically the local solution is a discrete trajectory, so the pullback
//! samples it with cubic interpolation; a conservative estimate of the
//! interpolation error is carried on the result so downstream residual
//! comparisons can budget for it.

use crate::evolution::{StateVector, SystemKind, Trajectory};
use crate::geometry::ModelParams;
use crate::{Error, Result};

/// `γ(s) = (2ω/π) arctan(s)`: odd, strictly increasing, with range `(-ω, ω)`.
pub fn gamma(s: f64, omega: f64) -> f64 {
    2.0 * omega / std::f64::consts::PI * s.atan()
}

/// Derivative `γ'(s) = (2ω/π) / (s² + 1)`.
pub fn gamma_derivative(s: f64, omega: f64) -> f64 {
    2.0 * omega / (std::f64::consts::PI * (s * s + 1.0))
}

/// The `ds⊗ds` coefficient of the pulled-back metric at `s`.
pub fn pullback_lapse(f_star: f64, a: f64, s: f64, omega: f64) -> f64 {
    let denom = std::f64::consts::PI * (s * s + 1.0);
    (a * f_star).exp() * 4.0 * omega * omega / (denom * denom)
}

/// A trajectory presented in the global coordinate `s ∈ ℝ`.
#[derive(Debug, Clone, PartialEq)]
pub struct GlobalTrajectory<S> {
    pub params: ModelParams,
    pub kind: SystemKind,
    pub omega: f64,
    pub s_values: Vec<f64>,
    /// `t = γ(s)` per grid point.
    pub t_values: Vec<f64>,
    /// States interpolated at `γ(s)`.
    pub states: Vec<S>,
    /// Pulled-back metric coefficient per grid point.
    pub lapse: Vec<f64>,
    /// Conservative sup estimate of the interpolation error in the states.
    pub interpolation_error: f64,
}

/// Cubic Lagrange interpolation of trajectory states on a strictly monotone
/// time grid (either direction).
struct Interpolator<'a, S> {
    times: &'a [f64],
    states: &'a [S],
    /// Index stride, 1 for the full grid, 2 for the coarsened error probe.
    stride: usize,
}

impl<S: StateVector> Interpolator<'_, S> {
    fn len(&self) -> usize {
        self.times.len().div_ceil(self.stride)
    }

    fn time(&self, i: usize) -> f64 {
        self.times[i * self.stride]
    }

    fn state(&self, i: usize) -> &S {
        &self.states[i * self.stride]
    }

    fn covers(&self, t: f64) -> bool {
        let (a, b) = (self.time(0), self.time(self.len() - 1));
        (t >= a.min(b)) && (t <= a.max(b))
    }

    fn eval(&self, t: f64) -> S {
        let n = self.len();
        debug_assert!(n >= 2);
        // Locate the bracketing interval on the (possibly descending) grid.
        let ascending = self.time(n - 1) >= self.time(0);
        let mut lo = 0;
        let mut hi = n - 1;
        while hi - lo > 1 {
            let mid = (lo + hi) / 2;
            let before = if ascending {
                self.time(mid) <= t
            } else {
                self.time(mid) >= t
            };
            if before {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        if n < 4 {
            // Linear fallback for very short grids.
            let (t0, t1) = (self.time(lo), self.time(hi));
            let w = if t1 == t0 { 0.0 } else { (t - t0) / (t1 - t0) };
            return self.state(lo).scale(1.0 - w).scaled_add(w, self.state(hi));
        }
        let start = lo.saturating_sub(1).min(n - 4);
        let xs = [
            self.time(start),
            self.time(start + 1),
            self.time(start + 2),
            self.time(start + 3),
        ];
        let mut weights = [0.0f64; 4];
        for (i, w) in weights.iter_mut().enumerate() {
            let mut acc = 1.0;
            for k in 0..4 {
                if k != i {
                    acc *= (t - xs[k]) / (xs[i] - xs[k]);
                }
            }
            *w = acc;
        }
        self.state(start)
            .scale(weights[0])
            .scaled_add(weights[1], self.state(start + 1))
            .scaled_add(weights[2], self.state(start + 2))
            .scaled_add(weights[3], self.state(start + 3))
    }
}

fn interpolate_at<S: StateVector>(traj: &Trajectory<S>, t: f64, s: f64) -> Result<(S, Option<S>)> {
    let full = Interpolator {
        times: &traj.times,
        states: &traj.states,
        stride: 1,
    };
    if !full.covers(t) {
        let (mut t_min, mut t_max) = (traj.times[0], *traj.times.last().unwrap());
        if t_min > t_max {
            std::mem::swap(&mut t_min, &mut t_max);
        }
        return Err(Error::OutsideTrajectory { s, t, t_min, t_max });
    }
    let value = full.eval(t);
    // Error probe: the same interpolation on the half-resolution grid.
    let probe = if traj.len() >= 8 {
        let coarse = Interpolator {
            times: &traj.times,
            states: &traj.states,
            stride: 2,
        };
        coarse.covers(t).then(|| coarse.eval(t))
    } else {
        None
    };
    Ok((value, probe))
}

/// Pull a one-sided trajectory back onto an `s`-grid.
///
/// `omega` must not exceed the resolved window, and every `γ(s)` must land
/// inside the time range the trajectory covers (a forward-only trajectory
/// cannot serve negative `s`; see [`pullback_pair`] for two-sided data).
/// The grid should be strictly monotone; the result keeps its order.
pub fn pullback_trajectory<S: StateVector>(
    traj: &Trajectory<S>,
    omega: f64,
    s_grid: &[f64],
) -> Result<GlobalTrajectory<S>> {
    if traj.len() < 2 {
        return Err(Error::TrajectoryTooShort(
            "pullback needs at least two samples",
        ));
    }
    let window = traj.resolved_window();
    if !omega.is_finite() || omega <= 0.0 || omega > window {
        return Err(Error::OmegaExceedsWindow {
            omega,
            max_omega: window,
        });
    }
    let a = traj.params.warp_exponent();
    let mut out = GlobalTrajectory {
        params: traj.params,
        kind: traj.kind,
        omega,
        s_values: Vec::with_capacity(s_grid.len()),
        t_values: Vec::with_capacity(s_grid.len()),
        states: Vec::with_capacity(s_grid.len()),
        lapse: Vec::with_capacity(s_grid.len()),
        interpolation_error: 0.0,
    };
    for &s in s_grid {
        let t = gamma(s, omega);
        let (state, probe) = interpolate_at(traj, t, s)?;
        if let Some(p) = probe {
            out.interpolation_error = out.interpolation_error.max(state.max_abs_diff(&p));
        }
        let (f_star, _) = state.warp();
        out.s_values.push(s);
        out.t_values.push(t);
        out.lapse.push(pullback_lapse(f_star, a, s, omega));
        out.states.push(state);
    }
    Ok(out)
}

/// Pull back a two-sided solution: `s ≥ 0` is served by `forward`
/// (`t_end > 0`) and `s < 0` by `backward` (`t_end < 0`).
pub fn pullback_pair<S: StateVector>(
    forward: &Trajectory<S>,
    backward: &Trajectory<S>,
    omega: f64,
    s_grid: &[f64],
) -> Result<GlobalTrajectory<S>> {
    if forward.len() < 2 || backward.len() < 2 {
        return Err(Error::TrajectoryTooShort(
            "pullback needs at least two samples",
        ));
    }
    let window = forward.resolved_window().min(backward.resolved_window());
    if !omega.is_finite() || omega <= 0.0 || omega > window {
        return Err(Error::OmegaExceedsWindow {
            omega,
            max_omega: window,
        });
    }
    let a = forward.params.warp_exponent();
    let mut out = GlobalTrajectory {
        params: forward.params,
        kind: forward.kind,
        omega,
        s_values: Vec::with_capacity(s_grid.len()),
        t_values: Vec::with_capacity(s_grid.len()),
        states: Vec::with_capacity(s_grid.len()),
        lapse: Vec::with_capacity(s_grid.len()),
        interpolation_error: 0.0,
    };
    for &s in s_grid {
        let t = gamma(s, omega);
        let side = if s >= 0.0 { forward } else { backward };
        let (state, probe) = interpolate_at(side, t, s)?;
        if let Some(p) = probe {
            out.interpolation_error = out.interpolation_error.max(state.max_abs_diff(&p));
        }
        let (f_star, _) = state.warp();
        out.s_values.push(s);
        out.t_values.push(t);
        out.lapse.push(pullback_lapse(f_star, a, s, omega));
        out.states.push(state);
    }
    Ok(out)
}
