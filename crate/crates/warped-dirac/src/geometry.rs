//! Closed-form geometry of the warped metric `η̄ = e^f Σ Eⁱ⊗Eⁱ + e^{af} dt⊗dt`.
//!
//! Everything here is an algebraic function of the slice dimension `n`, the
//! warp exponent `a`, and the warp factor derivatives `(f, f_t, f_tt)` at a
//! single time.  The base manifold never appears pointwise: a base carrying a
//! real Killing spinor is Einstein, so it enters only through the scalars
//! `(n, λ_M, P)` and the forced scalar curvature `S_g = 4(n-1)λ_M²/n`.
//!
//! With `ḡ = e^f g_M` the slice metric and `F_{n+1}` the unit normal, the
//! second fundamental form and the curvatures of `η̄` are
//!
//! ```text
//! II(V,W)        = -e^{-(a/2-1)f} f_t/2 · η(V,W)
//! Tr_ḡ II        = -(n/2) e^{-af/2} f_t
//! Tr_ḡ II²       =  (n/4) e^{-af} f_t²
//! Ric(V,W)       =  Ric_g(V,W) + { -f_tt/2 + (a-n)f_t²/4 } e^{-(a-1)f} η(V,W)
//! Ric(F,F)       =  { -n f_tt/2 + n(a-1)f_t²/4 } e^{-af}
//! S              =  e^{-f} S_g + { -n f_tt + n(2a-n-1)f_t²/4 } e^{-af}
//! ```
//!
//! and the warp factors making the slices Einstein with `t`-only scalar
//! curvature are the solutions of `4 f_tt + (n-2a) f_t² = 0`, available in
//! closed form below.

use crate::{Error, Result};

/// Dimension parity of the ambient manifold `Q = M × ℝ`.
///
/// `Even` means the slice has dimension `n = 2m` (so `dim Q = 2m+1`);
/// `Odd` means `n = 2m-1` (so `dim Q = 2m`).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Parity {
    Even,
    Odd,
}

/// A sign `±1`, used both for the energy-momentum coupling `ε` and for the
/// branch choice of the initial warp velocity.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn value(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }

    /// Parse from any nonzero finite real (`+1`, `-1`, `2.5`, ...).
    pub fn from_f64(x: f64) -> Result<Self> {
        if !x.is_finite() || x == 0.0 {
            return Err(Error::InvalidParams(format!("sign must be ±1, got {x}")));
        }
        Ok(if x > 0.0 { Sign::Plus } else { Sign::Minus })
    }
}

/// The reduced problem data: everything the ODE systems and the residual
/// formulas need to know about the model.
///
/// * `m` — half-dimension parameter; the slice dimension is `n = 2m` (even
///   parity) or `n = 2m-1` (odd parity, which requires `m ≥ 2`).
/// * `a` — warp exponent of `e^{af} dt⊗dt`.
/// * `lambda_m` — Killing coupling of the base spinor; the base Killing
///   number is `-λ_M/n`, and `λ_M = 0` is the parallel case.
/// * `lambda_q` — Dirac eigenvalue of the ambient spinor.
/// * `epsilon` — sign of the spinor energy-momentum tensor.
/// * `norm` — `P = (ψ_M, ψ_M) > 0`, the constant norm-square of the base
///   spinor.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    parity: Parity,
    m: u32,
    a: f64,
    lambda_m: f64,
    lambda_q: f64,
    epsilon: Sign,
    norm: f64,
}

impl ModelParams {
    pub fn new(
        parity: Parity,
        m: u32,
        a: f64,
        lambda_m: f64,
        lambda_q: f64,
        epsilon: Sign,
        norm: f64,
    ) -> Result<Self> {
        match parity {
            Parity::Even if m < 1 => {
                return Err(Error::InvalidParams("even parity requires m >= 1".into()))
            }
            Parity::Odd if m < 2 => {
                return Err(Error::InvalidParams(
                    "odd parity requires m >= 2 (the evolution divides by m-1)".into(),
                ))
            }
            _ => {}
        }
        if !norm.is_finite() || norm <= 0.0 {
            return Err(Error::InvalidParams(format!(
                "spinor norm P must be positive and finite, got {norm}"
            )));
        }
        for (name, v) in [("a", a), ("lambda_m", lambda_m), ("lambda_q", lambda_q)] {
            if !v.is_finite() {
                return Err(Error::InvalidParams(format!(
                    "{name} must be finite, got {v}"
                )));
            }
        }
        Ok(Self {
            parity,
            m,
            a,
            lambda_m,
            lambda_q,
            epsilon,
            norm,
        })
    }

    pub fn parity(&self) -> Parity {
        self.parity
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    /// Slice dimension `n`: `2m` for even parity, `2m-1` for odd.
    pub fn n(&self) -> u32 {
        match self.parity {
            Parity::Even => 2 * self.m,
            Parity::Odd => 2 * self.m - 1,
        }
    }

    pub fn warp_exponent(&self) -> f64 {
        self.a
    }

    pub fn lambda_m(&self) -> f64 {
        self.lambda_m
    }

    pub fn lambda_q(&self) -> f64 {
        self.lambda_q
    }

    pub fn epsilon(&self) -> Sign {
        self.epsilon
    }

    /// `P = (ψ_M, ψ_M)`.
    pub fn norm(&self) -> f64 {
        self.norm
    }

    /// Scalar curvature `S_g = 4(n-1)λ_M²/n` of the base.
    ///
    /// A base with a real Killing spinor to Killing number `-λ_M/n` is
    /// Einstein with exactly this scalar curvature; it is also the unique
    /// value under which the Hamiltonian constraint vanishes identically on
    /// the admissible initial data.  Parallel spinors (`λ_M = 0`) give a
    /// Ricci-flat base.
    pub fn base_scalar_curvature(&self) -> f64 {
        let n = f64::from(self.n());
        4.0 * (n - 1.0) * self.lambda_m * self.lambda_m / n
    }
}

/// The warp factor and its first two `t`-derivatives at one time.
///
/// `f_tt` is optional: the second fundamental form needs only `(f, f_t)`,
/// while curvature requires `f_tt` as well.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeometrySample {
    pub f: f64,
    pub f_t: f64,
    pub f_tt: Option<f64>,
}

impl GeometrySample {
    pub fn new(f: f64, f_t: f64) -> Self {
        Self { f, f_t, f_tt: None }
    }

    pub fn with_second_derivative(f: f64, f_t: f64, f_tt: f64) -> Self {
        Self {
            f,
            f_t,
            f_tt: Some(f_tt),
        }
    }
}

/// Scalar data of the second fundamental form `II = coeff · η` of a slice.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SecondFundamentalForm {
    /// Coefficient multiplying `η(V,W)` in `II(V,W)`.
    pub coeff: f64,
    /// `Tr_ḡ II`.
    pub trace: f64,
    /// `Tr_ḡ II²`.
    pub trace_sq: f64,
    /// Coefficient of `η(V,W)` in `(∇_{E_{n+1}} II)(V,W)`; present iff the
    /// sample carries `f_tt`.
    pub normal_derivative_coeff: Option<f64>,
}

/// Second fundamental form scalars of the slice through `sample`.
pub fn second_fundamental_form(
    sample: &GeometrySample,
    params: &ModelParams,
) -> SecondFundamentalForm {
    let a = params.warp_exponent();
    let n = f64::from(params.n());
    let (f, f_t) = (sample.f, sample.f_t);
    // e^{-(a/2 - 1)f}
    let w = ((1.0 - 0.5 * a) * f).exp();
    SecondFundamentalForm {
        coeff: -0.5 * w * f_t,
        trace: -0.5 * n * (-0.5 * a * f).exp() * f_t,
        trace_sq: 0.25 * n * (-a * f).exp() * f_t * f_t,
        normal_derivative_coeff: sample
            .f_tt
            .map(|f_tt| -0.5 * w * f_tt + 0.25 * (a - 2.0) * w * f_t * f_t),
    }
}

/// Ricci and scalar curvature of the warped metric at one sample.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Curvature {
    /// Coefficient of `η(V,W)` in `Ric(V,W)` for slice-tangential `V, W`,
    /// including the Einstein-base contribution `Ric_g = (S_g/n) g`.
    pub ric_tan_coeff: f64,
    /// `Ric(F_{n+1}, F_{n+1})`.  The mixed components `Ric(V, F_{n+1})`
    /// vanish identically and are not returned.
    pub ric_normal: f64,
    /// Scalar curvature of `η̄`.
    pub scalar: f64,
    /// Scalar curvature `e^{-f} S_g` of the slice metric `ḡ = e^f g_M`.
    pub slice_scalar: f64,
}

/// Curvature scalars at `sample`; errors if the sample lacks `f_tt`.
pub fn curvature(sample: &GeometrySample, params: &ModelParams) -> Result<Curvature> {
    let f_tt = sample.f_tt.ok_or(Error::MissingSecondDerivative)?;
    let a = params.warp_exponent();
    let n = f64::from(params.n());
    let s_g = params.base_scalar_curvature();
    let (f, f_t) = (sample.f, sample.f_t);

    let e1 = (-(a - 1.0) * f).exp();
    let e2 = (-a * f).exp();
    let slice_scalar = (-f).exp() * s_g;
    Ok(Curvature {
        ric_tan_coeff: s_g / n + (-0.5 * f_tt + 0.25 * (a - n) * f_t * f_t) * e1,
        ric_normal: (-0.5 * n * f_tt + 0.25 * n * (a - 1.0) * f_t * f_t) * e2,
        scalar: slice_scalar + (-n * f_tt + 0.25 * n * (2.0 * a - n - 1.0) * f_t * f_t) * e2,
        slice_scalar,
    })
}

/// Closed-form warp factor with `f(0) = 0` and `f_t(0) = c`, together with
/// its first two derivatives at `t`.
///
/// `a = n/2` gives the linear solution `f = ct`; otherwise
/// `f = 4/(n-2a) · log(1 + (n-2a)ct/4)`, valid while the argument of the
/// logarithm is positive.  Outside that domain an [`Error::OutOfDomain`] is
/// returned carrying the critical time `t* = -4/((n-2a)c)`.
pub fn closed_form_warp(params: &ModelParams, c: f64, t: f64) -> Result<GeometrySample> {
    let n = f64::from(params.n());
    let b = n - 2.0 * params.warp_exponent();
    if b == 0.0 {
        return Ok(GeometrySample::with_second_derivative(c * t, c, 0.0));
    }
    let x = 0.25 * b * c * t;
    let u = 1.0 + x;
    if u <= 0.0 {
        return Err(Error::OutOfDomain {
            t,
            critical: -4.0 / (b * c),
        });
    }
    Ok(GeometrySample::with_second_derivative(
        4.0 / b * x.ln_1p(),
        c / u,
        -0.25 * b * c * c / (u * u),
    ))
}

/// Scalar curvature of the closed-form metric at `t`; always nonpositive.
///
/// Equals `-(nc²/4) e^{-nct/2}` for `a = n/2` and
/// `-(nc²/4) ((4 + (n-2a)ct)/4)^{-2n/(n-2a)}` otherwise, with the same
/// domain restriction as [`closed_form_warp`].
pub fn closed_form_scalar(params: &ModelParams, c: f64, t: f64) -> Result<f64> {
    let n = f64::from(params.n());
    let b = n - 2.0 * params.warp_exponent();
    let lead = -0.25 * n * c * c;
    if b == 0.0 {
        return Ok(lead * (-0.5 * n * c * t).exp());
    }
    let u = 1.0 + 0.25 * b * c * t;
    if u <= 0.0 {
        return Err(Error::OutOfDomain {
            t,
            critical: -4.0 / (b * c),
        });
    }
    Ok(lead * u.powf(-2.0 * n / b))
}

/// Residuals characterizing the closed-form warp factors.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WarpResiduals {
    /// `A = 4 f_tt + (n-2a) f_t²`.  Vanishes exactly on the closed-form
    /// solutions; its vanishing makes the slices of the metric Einstein.
    pub second_order: f64,
    /// `B = 8 f_ttt - 4(4a-2n-1) f_t f_tt + (2a-n)(2a-n-1) f_t³`.  The
    /// compatibility residual tying `II` to the scalar-curvature gradient;
    /// `A = 0` implies `B = 0`.
    pub third_order: f64,
}

/// Evaluate [`WarpResiduals`] at a sample carrying `f_tt`, with `f_ttt`
/// supplied separately.
pub fn einstein_warp_residuals(
    sample: &GeometrySample,
    f_ttt: f64,
    params: &ModelParams,
) -> Result<WarpResiduals> {
    let f_tt = sample.f_tt.ok_or(Error::MissingSecondDerivative)?;
    let a = params.warp_exponent();
    let n = f64::from(params.n());
    let f_t = sample.f_t;
    let b = 2.0 * a - n;
    Ok(WarpResiduals {
        second_order: 4.0 * f_tt - b * f_t * f_t,
        third_order: 8.0 * f_ttt - 4.0 * (4.0 * a - 2.0 * n - 1.0) * f_t * f_tt
            + b * (b - 1.0) * f_t * f_t * f_t,
    })
}
