//! Expansion of the excitation probability in powers of `ω`:
//!
//! ```text
//! P_exc(τ) = c2 ω² − (I41 + I4) ω⁴ + O(ω⁶)
//! ```
//!
//! `c2` and `I41` describe an isolated atom. `I4` carries the interactions,
//! either for an explicit list of partner couplings ([`i4_finite`]) or
//! averaged over a homogeneous gas ([`i4_averaged`]).

mod averaged;
mod finite;
mod montecarlo;

pub use averaged::{
    gamma_constant, i4_averaged, lambda_constant, tau_double_integral, ImLambda, Lambda,
};
pub use finite::{i4_finite, i4_pair, PairIntegrator};
pub use montecarlo::{i4_montecarlo, McEstimate, McOptions};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::interactions::InteractionKernel;
use crate::pulse::{PulseGrid, PulseSpec};
use crate::quadrature::{PanelRule, Tolerance, PANEL_ORDER};

/// Knobs shared by the expansion quadratures.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadOptions {
    /// Inner integrals.
    pub inner: Tolerance,
    /// Outer integrals and panel-refinement checks.
    pub outer: Tolerance,
    /// Panel width cap; `None` picks one from the pulse phase.
    pub max_panel_width: Option<f64>,
    /// Above this `|k|` the pair term uses its `k → ∞` limit.
    pub asymptotic_k: f64,
    /// Compare every panel result with a halved-width rerun.
    pub verify: bool,
    pub max_refinements: usize,
}

impl Default for QuadOptions {
    fn default() -> Self {
        Self {
            inner: Tolerance::new(1e-10, 1e-10),
            outer: Tolerance::new(1e-9, 1e-9),
            max_panel_width: None,
            asymptotic_k: 1e6,
            verify: true,
            max_refinements: 6,
        }
    }
}

impl QuadOptions {
    pub(crate) fn panel_width(&self, p: &PulseSpec) -> f64 {
        let natural = p.natural_panel_width();
        self.max_panel_width.map_or(natural, |w| w.min(natural))
    }

    pub(crate) fn accepts(&self, diff: f64, value: f64) -> bool {
        diff <= self.outer.abs.max(self.outer.rel * value.abs())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExpansionResult {
    pub c2: f64,
    #[serde(rename = "I41")]
    pub i41: f64,
    #[serde(rename = "I4")]
    pub i4: f64,
    /// Coefficient of `ω⁴`, `−(I41 + I4)`.
    pub c4_total: f64,
    pub gamma: Option<f64>,
    pub lambda_re: Option<f64>,
    pub lambda_im: Option<f64>,
    /// Standard error of `I4` when it comes from sampling.
    pub stderr: Option<f64>,
}

impl ExpansionResult {
    fn new(c2: f64, i41: f64, i4: f64) -> Self {
        Self {
            c2,
            i41,
            i4,
            c4_total: -(i41 + i4),
            gamma: None,
            lambda_re: None,
            lambda_im: None,
            stderr: None,
        }
    }

    /// `c2 ω² + c4_total ω⁴`.
    pub fn probability(&self, omega: f64) -> f64 {
        let w2 = omega * omega;
        self.c2 * w2 + self.c4_total * w2 * w2
    }
}

/// `|F(τ)|²/4`.
pub fn second_order(p: &PulseSpec, tau: f64) -> Result<f64> {
    Ok(p.cumulative(tau)?.norm_sqr() / 4.0)
}

fn i41_on_grid(grid: &PulseGrid) -> f64 {
    let rule = PanelRule::get();
    let mut acc = Complex64::new(0.0, 0.0);
    for ((fv, big), &(_, h)) in grid.f.iter().zip(&grid.big_f).zip(&grid.panels) {
        let mut v = [Complex64::new(0.0, 0.0); PANEL_ORDER];
        for ((vj, &fj), &bj) in v.iter_mut().zip(fv.iter()).zip(big.iter()) {
            *vj = fj.conj() * bj * bj;
        }
        acc += rule.integral(h, &v);
    }
    let f = grid.end_value;
    f.norm_sqr().powi(2) / 16.0 - (f.conj() * acc).re / 8.0
}

/// Non-interacting fourth-order integral
/// `I41 = |F|⁴/16 − Re[F*(τ) ∫ f* F²]/8`.
///
/// For a real envelope this is `F⁴/48`, the `ω⁴` term of `sin²(ωF/2)`.
pub fn i41(p: &PulseSpec, tau: f64) -> Result<f64> {
    i41_with(p, tau, &QuadOptions::default())
}

pub fn i41_with(p: &PulseSpec, tau: f64, opts: &QuadOptions) -> Result<f64> {
    let mut h = opts.panel_width(p);
    let mut value = i41_on_grid(&PulseGrid::new(p, tau, h)?);
    for _ in 0..opts.max_refinements {
        h *= 0.5;
        let finer = i41_on_grid(&PulseGrid::new(p, tau, h)?);
        let diff = (finer - value).abs();
        value = finer;
        if opts.accepts(diff, value) {
            return Ok(value);
        }
    }
    Err(Error::QuadratureNotConverged {
        achieved: f64::NAN,
        requested: opts.outer.abs,
    })
}

/// Full expansion for a test atom with the given partner couplings.
pub fn expand_finite(
    p: &PulseSpec,
    couplings: &[f64],
    tau: f64,
    opts: &QuadOptions,
) -> Result<ExpansionResult> {
    let c2 = second_order(p, tau)?;
    let i41 = i41_with(p, tau, opts)?;
    let i4 = i4_finite(p, couplings, tau, opts)?.value;
    Ok(ExpansionResult::new(c2, i41, i4))
}

/// Full expansion for an atom inside a homogeneous gas of density `rho`.
pub fn expand_averaged(
    p: &PulseSpec,
    kernel: &InteractionKernel,
    rho: f64,
    tau: f64,
    opts: &QuadOptions,
) -> Result<ExpansionResult> {
    let c2 = second_order(p, tau)?;
    let i41 = i41_with(p, tau, opts)?;
    let i4 = i4_averaged(p, kernel, rho, tau)?;
    let mut r = ExpansionResult::new(c2, i41, i4);
    let lambda = lambda_constant(kernel)?;
    r.lambda_re = Some(lambda.re);
    r.lambda_im = lambda.im.finite();
    if p.is_real() && kernel.c_au != 0.0 {
        r.gamma = Some(gamma_constant(p, kernel)?);
    }
    Ok(r)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PexcSeries {
    pub value: f64,
    /// `(π²/4) x` term.
    pub first: f64,
    /// Magnitude of the `x²` term.
    pub second: f64,
    /// Set when the second term exceeds half the first.
    pub truncation_warning: bool,
}

/// Two-term ensemble-averaged excitation probability at `x = I/I_sat`,
/// with `ωW = π√x`.
pub fn pexc_series(
    p: &PulseSpec,
    kernel: &InteractionKernel,
    rho: f64,
    i_over_isat: f64,
) -> Result<PexcSeries> {
    if !(i_over_isat >= 0.0 && i_over_isat.is_finite()) {
        return Err(crate::error::invalid("I/I_sat", "must be nonnegative and finite"));
    }
    let opts = QuadOptions::default();
    let r = expand_averaged(p, kernel, rho, p.tau_end, &opts)?;
    let omega = p.omega_for_intensity(i_over_isat)?;
    let w2 = omega * omega;
    let first = r.c2 * w2;
    let second = -r.c4_total * w2 * w2;
    Ok(PexcSeries {
        value: first - second,
        first,
        second,
        truncation_warning: second > 0.5 * first,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn second_order_examples() {
        assert!((second_order(&PulseSpec::square(1e-8), 1.0).unwrap() - 0.25).abs() < 1e-13);
        let g = PulseSpec::gaussian(1e-8);
        assert!((second_order(&g, 4.0).unwrap() - PI / 4.0).abs() < 1e-6);
        let gd = g.with_detuning(2.0);
        let want = (PI.sqrt() * (-1f64).exp()).powi(2) / 4.0;
        assert!((second_order(&gd, 4.0).unwrap() - want).abs() < 1e-7);
    }

    #[test]
    fn i41_real_pulses_match_rabi_coefficient() {
        let sq = PulseSpec::square(1e-8);
        assert!((i41(&sq, 1.0).unwrap() - 1.0 / 48.0).abs() < 1e-13);
        let g = PulseSpec::gaussian(1e-8);
        let w = g.area().unwrap().re;
        assert!((i41(&g, 4.0).unwrap() - w.powi(4) / 48.0).abs() < 1e-11);
        // Intermediate times too: F(τ)⁴/48.
        let f = g.cumulative(0.3).unwrap().re;
        assert!((i41(&g, 0.3).unwrap() - f.powi(4) / 48.0).abs() < 1e-11);
    }

    #[test]
    fn rabi_series_through_fourth_order() {
        let sq = PulseSpec::square(1e-8);
        let r = expand_finite(&sq, &[], 1.0, &QuadOptions::default()).unwrap();
        for &w in &[1e-2, 3e-2, 1e-1] {
            let exact = (0.5f64 * w).sin().powi(2);
            let resid = (exact - r.probability(w)).abs();
            assert!(resid < 1e-3 * w.powi(6), "ω = {w}");
        }
    }

    #[test]
    fn pexc_series_examples() {
        let sq = PulseSpec::square(1e-8);
        let free = InteractionKernel::van_der_waals(0.0);
        let s = pexc_series(&sq, &free, 1e10, 0.01).unwrap();
        let want = PI * PI / 4.0 * 0.01 - PI.powi(4) / 48.0 * 1e-4;
        assert!((s.value - want).abs() < 1e-12);
        assert!(!s.truncation_warning);
        let s = pexc_series(&sq, &free, 1e10, 5.0).unwrap();
        assert!(s.truncation_warning);
    }
}
