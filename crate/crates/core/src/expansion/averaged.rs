//! Density-averaged fourth-order term.
//!
//! Replacing the partner sum by `ρ∫d³R` turns the coupling dependence into
//!
//! ```text
//! ∫d³R (e^{ikΔτ} − 1) = λ (|C|TΔτ)^{3/s},
//! ```
//!
//! so that `I4 = ¼ ρ (|C|T)^{3/s} Re[λ J]` with the pulse-only double
//! integral `J = ∫dτ₁ f(F(τ) − 2F(τ₁)) ∫dτ₂ f*F* (τ₁ − τ₂)^{3/s}`.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::interactions::{Angular, InteractionKernel};
use crate::pulse::{PulseGrid, PulseSpec};
use crate::quadrature::{fourier_tail, integrate, Tolerance, Trig};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum ImLambda {
    Finite(f64),
    /// The radial integral diverges logarithmically at large `R`.
    Divergent,
}

impl ImLambda {
    pub fn finite(self) -> Option<f64> {
        match self {
            ImLambda::Finite(v) => Some(v),
            ImLambda::Divergent => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Lambda {
    pub re: f64,
    pub im: ImLambda,
}

const TAIL_START_PERIODS: f64 = 8.0;

/// `∫₀^∞ x^{α−1}(cos x − 1) dx` for `−2 < α < 0`.
fn phi_re(alpha: f64, tol: Tolerance) -> Result<f64> {
    // Start the tail on a zero of cos so the half-period sums alternate.
    let a = PI * (TAIL_START_PERIODS + 0.5);
    let head = integrate(
        |v: f64| {
            let x = v * v;
            if v == 0.0 {
                return 0.0;
            }
            // cos x − 1 = −2 sin²(x/2) without cancellation.
            -4.0 * v.powf(2.0 * alpha - 1.0) * (0.5 * x).sin().powi(2)
        },
        0.0,
        a.sqrt(),
        tol,
    )?;
    let tail = fourier_tail(alpha - 1.0, Trig::Cos, a, tol)?;
    Ok(head.value + tail.value + a.powf(alpha) / alpha)
}

/// `∫₀^∞ x^{α−1} sin x dx` for `−1 < α < 0`.
fn phi_im(alpha: f64, tol: Tolerance) -> Result<f64> {
    let a = PI * TAIL_START_PERIODS;
    let head = integrate(
        |v: f64| {
            let x = v * v;
            if v == 0.0 {
                return if alpha == -0.5 { 2.0 } else { 0.0 };
            }
            2.0 * v.powf(2.0 * alpha - 1.0) * x.sin()
        },
        0.0,
        a.sqrt(),
        tol,
    )?;
    let tail = fourier_tail(alpha - 1.0, Trig::Sin, a, tol)?;
    Ok(head.value + tail.value)
}

/// `λ` for a kernel; depends only on `s`, the angular form and the sign
/// of `C_s`.
pub fn lambda_constant(kernel: &InteractionKernel) -> Result<Lambda> {
    kernel.validate()?;
    let tol = Tolerance::new(1e-13, 1e-13);
    let s = kernel.s as f64;
    let alpha = -3.0 / s;
    let sigma = if kernel.c_au < 0.0 { -1.0 } else { 1.0 };
    let prefactor = (2.0 * PI).powf(3.0 / s) / s;
    let re_radial = phi_re(alpha, tol)?;
    match kernel.angular {
        Angular::Isotropic => {
            let solid = 4.0 * PI;
            let im = if kernel.s == 3 {
                ImLambda::Divergent
            } else {
                ImLambda::Finite(prefactor * solid * sigma * phi_im(alpha, tol)?)
            };
            Ok(Lambda {
                re: prefactor * solid * re_radial,
                im,
            })
        }
        Angular::AlignedDipole => {
            let c0 = 1.0 / 3f64.sqrt();
            let pieces = [(-1.0, -c0), (-c0, c0), (c0, 1.0)];
            let mut abs_moment = 0.0;
            let mut log_moment = 0.0;
            for &(a, b) in &pieces {
                abs_moment += integrate(|c: f64| (1.0 - 3.0 * c * c).abs(), a, b, tol)?.value;
                log_moment += integrate(
                    |c: f64| {
                        let q = 1.0 - 3.0 * c * c;
                        if q == 0.0 {
                            0.0
                        } else {
                            q * q.abs().ln()
                        }
                    },
                    a,
                    b,
                    tol,
                )?
                .value;
            }
            // The ln-divergent part of the sine integral multiplies
            // ∫(1 − 3c²)dc = 0; what survives is the ln|1 − 3c²| weight.
            Ok(Lambda {
                re: prefactor * 2.0 * PI * abs_moment * re_radial,
                im: ImLambda::Finite(-sigma * prefactor * 2.0 * PI * log_moment),
            })
        }
    }
}

/// `J = ∫dτ₁ f(τ₁)(F(τ) − 2F(τ₁)) ∫_{τ₀}^{τ₁}dτ₂ f*(τ₂)F*(τ₂)(τ₁ − τ₂)^q`.
pub fn tau_double_integral(p: &PulseSpec, q: f64, tau: f64) -> Result<Complex64> {
    if !(q > 0.0) {
        return Err(invalid("q", "exponent must be positive"));
    }
    let grid = PulseGrid::new(p, tau, p.natural_panel_width())?;
    let f_tau = grid.end_value;
    let inner_tol = Tolerance::new(1e-12, 1e-11);
    let outer_tol = Tolerance::new(1e-11, 1e-10);
    let h = |t: f64| (p.envelope(t) * grid.cumulative_at(t)).conj();
    let mut err: Option<Error> = None;
    let mut outer = |t1: f64| {
        if err.is_some() || t1 <= p.tau0 {
            return Complex64::new(0.0, 0.0);
        }
        // τ₂ = τ₁ − v² removes the (τ₁ − τ₂)^q endpoint singularity.
        let inner = integrate(
            |v: f64| h(t1 - v * v) * (2.0 * v.powf(2.0 * q + 1.0)),
            0.0,
            (t1 - p.tau0).sqrt(),
            inner_tol,
        );
        match inner {
            Ok(e) => p.envelope(t1) * (f_tau - grid.cumulative_at(t1) * 2.0) * e.value,
            Err(e) => {
                err = Some(e);
                Complex64::new(0.0, 0.0)
            }
        }
    };
    let mut total = Complex64::new(0.0, 0.0);
    let bps = p.breakpoints();
    for w in bps.windows(2) {
        let (a, b) = (w[0], w[1].min(tau));
        if b <= a {
            break;
        }
        total += integrate(&mut outer, a, b, outer_tol)?.value;
    }
    if let Some(e) = err {
        return Err(e);
    }
    Ok(total)
}

/// Ensemble-averaged `I4` at density `rho` (cm⁻³).
pub fn i4_averaged(p: &PulseSpec, kernel: &InteractionKernel, rho: f64, tau: f64) -> Result<f64> {
    kernel.validate()?;
    if !(rho >= 0.0 && rho.is_finite()) {
        return Err(invalid("rho", "must be nonnegative and finite"));
    }
    let scale = rho * kernel.blockade_volume_scale(p.duration);
    if scale == 0.0 {
        return Ok(0.0);
    }
    if !p.is_real() && kernel.s == 3 && kernel.angular == Angular::Isotropic {
        return Err(Error::ConditionallyConvergent);
    }
    let lambda = lambda_constant(kernel)?;
    let j = tau_double_integral(p, 3.0 / kernel.s as f64, tau)?;
    let re_lambda_j = if p.is_real() {
        lambda.re * j.re
    } else {
        match lambda.im {
            ImLambda::Finite(im) => lambda.re * j.re - im * j.im,
            ImLambda::Divergent => return Err(Error::ConditionallyConvergent),
        }
    };
    Ok(0.25 * scale * re_lambda_j)
}

/// The constant `γ` in `P = (π²/4)x − (π⁴/48)(1 + γρ(|C|T)^{3/s})x² + …`.
pub fn gamma_constant(p: &PulseSpec, kernel: &InteractionKernel) -> Result<f64> {
    if !p.is_real() {
        return Err(invalid("pulse", "gamma is defined for resonant unchirped pulses"));
    }
    if kernel.c_au == 0.0 {
        return Err(invalid("kernel.c_au", "gamma needs a nonzero interaction"));
    }
    let w = p.resonant_area()?;
    // Any density works; γ is independent of it.
    let rho = 1.0 / kernel.blockade_volume_scale(p.duration);
    let i4 = i4_averaged(p, kernel, rho, p.tau_end)?;
    Ok(48.0 * i4 / (rho * kernel.blockade_volume_scale(p.duration) * w.powi(4)))
}
