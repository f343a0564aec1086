//! Laser pulse envelopes in scaled time `τ = t/T`.
//!
//! The complex envelope is `f(τ) = g(τ) exp(i(δτ + βτ²))`, so the
//! instantaneous scaled detuning is `δ + 2βτ`. `F(τ)` is its running
//! integral from the window start.

use std::f64::consts::{LN_2, PI};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::quadrature::{integrate, Estimate, PanelRule, Tolerance, PANEL_ORDER};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Shape {
    Gaussian,
    Square,
}

impl Shape {
    pub fn name(self) -> &'static str {
        match self {
            Shape::Gaussian => "gaussian",
            Shape::Square => "square",
        }
    }
}

impl std::str::FromStr for Shape {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "gaussian" | "gauss" => Ok(Shape::Gaussian),
            "square" => Ok(Shape::Square),
            other => Err(format!("unknown pulse shape `{other}` (expected gaussian or square)")),
        }
    }
}

/// Default half-width of the Gaussian window.
pub const GAUSSIAN_HALF_WINDOW: f64 = 4.0;

/// Intensity-spectrum FWHM of a unit square pulse, times its duration.
const SQUARE_TIME_BANDWIDTH: f64 = 0.885_892_941_378_904;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PulseSpec {
    pub shape: Shape,
    /// Duration `T` in seconds.
    pub duration: f64,
    /// Scaled detuning `δ = ΔT`.
    pub detuning: f64,
    /// Quadratic phase coefficient `β`.
    pub chirp: f64,
    pub tau0: f64,
    pub tau_end: f64,
}

impl PulseSpec {
    pub fn gaussian(duration: f64) -> Self {
        Self {
            shape: Shape::Gaussian,
            duration,
            detuning: 0.0,
            chirp: 0.0,
            tau0: -GAUSSIAN_HALF_WINDOW,
            tau_end: GAUSSIAN_HALF_WINDOW,
        }
    }

    pub fn square(duration: f64) -> Self {
        Self {
            shape: Shape::Square,
            duration,
            detuning: 0.0,
            chirp: 0.0,
            tau0: 0.0,
            tau_end: 1.0,
        }
    }

    pub fn new(shape: Shape, duration: f64) -> Self {
        match shape {
            Shape::Gaussian => Self::gaussian(duration),
            Shape::Square => Self::square(duration),
        }
    }

    pub fn with_detuning(mut self, delta: f64) -> Self {
        self.detuning = delta;
        self
    }

    /// Detuning given in Hz (cyclic), converted to `δ = 2πΔT`.
    pub fn with_detuning_hz(self, hz: f64) -> Self {
        let d = 2.0 * PI * hz * self.duration;
        self.with_detuning(d)
    }

    pub fn with_chirp(mut self, beta: f64) -> Self {
        self.chirp = beta;
        self
    }

    pub fn with_window(mut self, tau0: f64, tau_end: f64) -> Self {
        self.tau0 = tau0;
        self.tau_end = tau_end;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.duration.is_finite() && self.duration > 0.0) {
            return Err(invalid("pulse.duration", "must be positive and finite"));
        }
        if !self.detuning.is_finite() || !self.chirp.is_finite() {
            return Err(invalid("pulse.detuning", "detuning and chirp must be finite"));
        }
        if !(self.tau0.is_finite() && self.tau_end.is_finite() && self.tau0 < self.tau_end) {
            return Err(invalid("pulse.window", "need finite tau0 < tau_end"));
        }
        if self.shape == Shape::Square && (self.tau0 > 0.0 || self.tau_end < 1.0) {
            return Err(invalid(
                "pulse.window",
                "a square pulse window must contain its support [0, 1]",
            ));
        }
        Ok(())
    }

    /// True when `f` is real: no detuning and no chirp.
    pub fn is_real(&self) -> bool {
        self.detuning == 0.0 && self.chirp == 0.0
    }

    /// Real envelope `g(τ)`, zero outside the window.
    #[inline]
    pub fn magnitude(&self, tau: f64) -> f64 {
        if tau < self.tau0 || tau > self.tau_end {
            return 0.0;
        }
        match self.shape {
            Shape::Gaussian => (-tau * tau).exp(),
            Shape::Square => {
                if (0.0..1.0).contains(&tau) {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }

    /// `f(τ)`.
    #[inline]
    pub fn envelope(&self, tau: f64) -> Complex64 {
        let g = self.magnitude(tau);
        if g == 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        if self.is_real() {
            return Complex64::new(g, 0.0);
        }
        Complex64::from_polar(g, tau * (self.detuning + self.chirp * tau))
    }

    /// Scaled instantaneous detuning `δ + 2βτ`.
    pub fn instantaneous_detuning(&self, tau: f64) -> f64 {
        self.detuning + 2.0 * self.chirp * tau
    }

    /// Breakpoints where `f` is not smooth, including the window ends.
    pub fn breakpoints(&self) -> Vec<f64> {
        let mut b = vec![self.tau0];
        if self.shape == Shape::Square {
            for x in [0.0, 1.0] {
                if x > self.tau0 && x < self.tau_end {
                    b.push(x);
                }
            }
        }
        b.push(self.tau_end);
        b
    }

    /// `F(τ)` with the default tolerance.
    pub fn cumulative(&self, tau: f64) -> Result<Complex64> {
        self.cumulative_with(tau, Tolerance::new(1e-12, 1e-13))
            .map(|e| e.value)
    }

    pub fn cumulative_with(&self, tau: f64, tol: Tolerance) -> Result<Estimate<Complex64>> {
        if !tau.is_finite() || tau < self.tau0 {
            return Err(invalid("tau", format!("must be >= tau0 = {}", self.tau0)));
        }
        let mut value = Complex64::new(0.0, 0.0);
        let mut error = 0.0;
        let mut a = self.tau0;
        for &b in self.breakpoints().iter().skip(1) {
            let hi = b.min(tau);
            if hi > a {
                let est = integrate(|t| self.envelope(t), a, hi, tol)?;
                value += est.value;
                error += est.error;
            }
            a = b;
            if b >= tau {
                break;
            }
        }
        Ok(Estimate { value, error })
    }

    /// Pulse area `F(tau_end)`.
    pub fn area(&self) -> Result<Complex64> {
        self.cumulative(self.tau_end)
    }

    /// Area `W` of the same envelope on resonance, which sets the
    /// single-atom Rabi angle `ωW`.
    pub fn resonant_area(&self) -> Result<f64> {
        let real = self.with_detuning(0.0).with_chirp(0.0);
        Ok(real.area()?.re)
    }

    /// `ω` producing the isolated-atom probability `sin²(π√x / 2)` at
    /// intensity ratio `x = I/I_sat`.
    pub fn omega_for_intensity(&self, i_over_isat: f64) -> Result<f64> {
        if !(i_over_isat >= 0.0) {
            return Err(invalid("I/I_sat", "must be nonnegative"));
        }
        Ok(PI * i_over_isat.sqrt() / self.resonant_area()?)
    }

    /// Transform-limited intensity-spectrum FWHM in Hz.
    pub fn transform_limited_bandwidth(shape: Shape, duration: f64) -> f64 {
        match shape {
            Shape::Gaussian => (2.0 * LN_2).sqrt() / (PI * duration),
            Shape::Square => SQUARE_TIME_BANDWIDTH / duration,
        }
    }

    /// Intensity-spectrum FWHM in Hz, including chirp broadening.
    pub fn bandwidth(&self) -> Result<f64> {
        let base = Self::transform_limited_bandwidth(self.shape, self.duration);
        match self.shape {
            Shape::Gaussian => Ok(base * (1.0 + self.chirp * self.chirp).sqrt()),
            Shape::Square if self.chirp == 0.0 => Ok(base),
            Shape::Square => Err(invalid(
                "pulse.chirp",
                "no closed-form bandwidth for a chirped square pulse",
            )),
        }
    }

    /// Pulse with intensity-spectrum FWHM `gamma` (Hz).
    ///
    /// With `chirp_fraction = 0` the pulse is transform limited. Otherwise a
    /// fraction `|chirp_fraction|` of the bandwidth comes from chirp: the
    /// envelope is sized for `Γ₀ = Γ(1 − |chirp_fraction|)` and `β` (with the
    /// sign of `chirp_fraction`) broadens it back to `Γ`.
    pub fn duration_from_bandwidth(shape: Shape, gamma: f64, chirp_fraction: f64) -> Result<Self> {
        if !(gamma.is_finite() && gamma > 0.0) {
            return Err(invalid("bandwidth", "must be positive and finite"));
        }
        if !(chirp_fraction.abs() < 1.0) {
            return Err(invalid("chirp_fraction", "must lie in (-1, 1)"));
        }
        if chirp_fraction != 0.0 && shape == Shape::Square {
            return Err(invalid(
                "chirp_fraction",
                "chirped bandwidth matching is only defined for gaussian pulses",
            ));
        }
        let base = gamma * (1.0 - chirp_fraction.abs());
        let duration = Self::transform_limited_bandwidth(shape, 1.0) / base;
        let p = Self::new(shape, duration);
        if chirp_fraction == 0.0 {
            return Ok(p);
        }
        p.chirped_to_bandwidth(gamma, chirp_fraction.signum())
    }

    /// Same envelope, chirped (sign `sign`) until the bandwidth is `gamma`.
    pub fn chirped_to_bandwidth(self, gamma: f64, sign: f64) -> Result<Self> {
        if self.shape != Shape::Gaussian {
            return Err(invalid("pulse.chirp", "chirp broadening requires a gaussian pulse"));
        }
        let base = Self::transform_limited_bandwidth(self.shape, self.duration);
        if gamma < base * (1.0 - 1e-12) {
            return Err(Error::BelowTransformLimit {
                requested: gamma,
                limit: base,
            });
        }
        let ratio = (gamma / base).max(1.0);
        let beta = (ratio * ratio - 1.0).sqrt();
        Ok(self.with_chirp(if sign < 0.0 { -beta } else { beta }))
    }

    /// A panel width that resolves the envelope phase with 16-point panels.
    pub fn natural_panel_width(&self) -> f64 {
        let reach = self.tau0.abs().max(self.tau_end.abs());
        let rate = self.detuning.abs() + 2.0 * self.chirp.abs() * reach;
        (0.125f64).min(1.0 / rate.max(1e-300))
    }
}

/// `f` and `F` tabulated on Gauss–Legendre panels covering `[tau0, tau]`.
#[derive(Debug, Clone)]
pub struct PulseGrid {
    pub pulse: PulseSpec,
    /// `(start, width)` of each panel.
    pub panels: Vec<(f64, f64)>,
    pub nodes: Vec<[f64; PANEL_ORDER]>,
    pub f: Vec<[Complex64; PANEL_ORDER]>,
    pub big_f: Vec<[Complex64; PANEL_ORDER]>,
    /// `F` at each panel start.
    pub start_values: Vec<Complex64>,
    /// `F(tau)` at the grid end.
    pub end_value: Complex64,
}

impl PulseGrid {
    /// Panels no wider than `max_width`, splitting at pulse breakpoints.
    pub fn new(pulse: &PulseSpec, tau: f64, max_width: f64) -> Result<Self> {
        pulse.validate()?;
        if !(tau > pulse.tau0 && tau <= pulse.tau_end) {
            return Err(invalid(
                "tau",
                format!("must lie in ({}, {}]", pulse.tau0, pulse.tau_end),
            ));
        }
        if !(max_width > 0.0) {
            return Err(invalid("panel width", "must be positive"));
        }
        let rule = PanelRule::get();
        let mut panels = Vec::new();
        let bps = pulse.breakpoints();
        for w in bps.windows(2) {
            let (a, b) = (w[0], w[1].min(tau));
            if b <= a {
                break;
            }
            let n = ((b - a) / max_width).ceil().max(1.0) as usize;
            let h = (b - a) / n as f64;
            for i in 0..n {
                panels.push((a + i as f64 * h, h));
            }
        }
        let mut nodes = Vec::with_capacity(panels.len());
        let mut f = Vec::with_capacity(panels.len());
        let mut big_f = Vec::with_capacity(panels.len());
        let mut start_values = Vec::with_capacity(panels.len());
        let mut acc = Complex64::new(0.0, 0.0);
        for &(a, h) in &panels {
            let t = rule.abscissae(a, h);
            let mut fv = [Complex64::new(0.0, 0.0); PANEL_ORDER];
            for (v, &tj) in fv.iter_mut().zip(t.iter()) {
                *v = pulse.envelope(tj);
            }
            let mut cum = rule.cumulative(h, &fv);
            for c in cum.iter_mut() {
                *c += acc;
            }
            start_values.push(acc);
            acc += rule.integral(h, &fv);
            nodes.push(t);
            f.push(fv);
            big_f.push(cum);
        }
        Ok(Self {
            pulse: *pulse,
            panels,
            nodes,
            f,
            big_f,
            start_values,
            end_value: acc,
        })
    }

    /// `F(t)` anywhere on the grid: the tabulated panel start plus a
    /// Gauss–Legendre integral over the partial panel.
    pub fn cumulative_at(&self, t: f64) -> Complex64 {
        if t <= self.pulse.tau0 {
            return Complex64::new(0.0, 0.0);
        }
        let idx = match self
            .panels
            .binary_search_by(|&(a, _)| a.partial_cmp(&t).unwrap_or(std::cmp::Ordering::Less))
        {
            Ok(i) => return self.start_values[i],
            Err(0) => 0,
            Err(i) => i - 1,
        };
        let (a, _) = self.panels[idx];
        let rule = PanelRule::get();
        let h = t - a;
        let nodes = rule.abscissae(a, h);
        let mut v = [Complex64::new(0.0, 0.0); PANEL_ORDER];
        for (vj, &tj) in v.iter_mut().zip(nodes.iter()) {
            *vj = self.pulse.envelope(tj);
        }
        self.start_values[idx] + rule.integral(h, &v)
    }
}
