//! Low-intensity pair correlation of excited atoms,
//! `P(i,j) = ⟨n_i n_j⟩ / (⟨n_i⟩⟨n_j⟩)`, to leading order in `ω`:
//!
//! ```text
//! c4 = ¼ |∫dτ₁ e^{ikτ₁} f(τ₁) F(τ₁)|²,    P = 16 c4 / |F(τ)|⁴.
//! ```

use std::fmt::Write as _;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::expansion::QuadOptions;
use crate::interactions::InteractionKernel;
use crate::pulse::{PulseGrid, PulseSpec};
use crate::quadrature::{PanelRule, PANEL_ORDER};
use crate::units::CM_PER_UM;

/// Below this `|F(τ)|` the correlation is undefined.
pub const MIN_AREA: f64 = 1e-12;

fn amplitude_on_grid(grid: &PulseGrid, k: f64) -> Complex64 {
    let rule = PanelRule::get();
    let mut total = Complex64::new(0.0, 0.0);
    for (p, &(a, h)) in grid.panels.iter().enumerate() {
        let mut v = [Complex64::new(0.0, 0.0); PANEL_ORDER];
        for (vj, (&fj, &bj)) in v.iter_mut().zip(grid.f[p].iter().zip(grid.big_f[p].iter())) {
            *vj = fj * bj;
        }
        let mid = a + 0.5 * h;
        total += Complex64::from_polar(1.0, k * mid) * rule.filon(h, k, &v);
    }
    total
}

/// Evaluates `c4(k)` for many couplings against one pulse.
#[derive(Debug, Clone)]
pub struct CorrelationIntegrator {
    opts: QuadOptions,
    pulse: PulseSpec,
    tau: f64,
    width: f64,
    base: PulseGrid,
}

impl CorrelationIntegrator {
    pub fn new(p: &PulseSpec, tau: f64, opts: &QuadOptions) -> Result<Self> {
        let width = opts.panel_width(p);
        Ok(Self {
            opts: *opts,
            pulse: *p,
            tau,
            width,
            base: PulseGrid::new(p, tau, width)?,
        })
    }

    pub fn area(&self) -> Complex64 {
        self.base.end_value
    }

    /// `∫ e^{ikτ₁} f F dτ₁`.
    pub fn amplitude(&self, k: f64) -> Result<Complex64> {
        if !k.is_finite() {
            return Err(invalid("k", "coupling must be finite"));
        }
        let mut value = amplitude_on_grid(&self.base, k);
        if !self.opts.verify {
            return Ok(value);
        }
        let mut width = self.width;
        for _ in 0..self.opts.max_refinements {
            width *= 0.5;
            let finer = amplitude_on_grid(&PulseGrid::new(&self.pulse, self.tau, width)?, k);
            let diff = (finer - value).norm();
            value = finer;
            if diff <= 0.1 * self.opts.outer.abs.max(self.opts.outer.rel * value.norm()) {
                return Ok(value);
            }
        }
        Err(Error::QuadratureNotConverged {
            achieved: f64::NAN,
            requested: self.opts.outer.abs,
        })
    }

    pub fn c4(&self, k: f64) -> Result<f64> {
        Ok(0.25 * self.amplitude(k)?.norm_sqr())
    }

    pub fn correlation(&self, k: f64) -> Result<f64> {
        let area = self.area().norm();
        if area < MIN_AREA {
            return Err(Error::VanishingPulseArea { area });
        }
        Ok(16.0 * self.c4(k)? / area.powi(4))
    }
}

/// `c4 = ¼|∫e^{ikτ₁} f F dτ₁|²`.
pub fn c4(p: &PulseSpec, k: f64, tau: f64) -> Result<f64> {
    CorrelationIntegrator::new(p, tau, &QuadOptions::default())?.c4(k)
}

/// `P(i,j)` for two atoms `r` cm apart, the pair axis at `angle` radians to
/// the dipole alignment axis.
pub fn pair_correlation(
    p: &PulseSpec,
    kernel: &InteractionKernel,
    r: f64,
    angle: f64,
    tau: f64,
) -> Result<f64> {
    if !(r > 0.0) {
        return Err(invalid("R", "separation must be positive"));
    }
    let k = kernel.coupling_at(p.duration, r, angle.cos());
    CorrelationIntegrator::new(p, tau, &QuadOptions::default())?.correlation(k)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationCurve {
    pub r_um: Vec<f64>,
    pub k: Vec<f64>,
    #[serde(rename = "P")]
    pub p: Vec<f64>,
    pub pulse: PulseSpec,
    pub kernel: InteractionKernel,
}

impl CorrelationCurve {
    /// Largest `P` on the grid.
    pub fn grid_max(&self) -> (f64, f64) {
        let mut best = (f64::NAN, f64::NEG_INFINITY);
        for (&r, &p) in self.r_um.iter().zip(&self.p) {
            if p > best.1 {
                best = (r, p);
            }
        }
        best
    }

    /// Grid maximum refined by golden-section search between its
    /// neighbours. Returns `(R_um, P)`.
    pub fn refined_max(&self, tau: f64) -> Result<(f64, f64)> {
        let n = self.p.len();
        let (mut idx, mut best) = (0, f64::NEG_INFINITY);
        for (i, &p) in self.p.iter().enumerate() {
            if p > best {
                best = p;
                idx = i;
            }
        }
        if n < 3 || idx == 0 || idx == n - 1 {
            return Ok((self.r_um[idx], best));
        }
        let integ = CorrelationIntegrator::new(&self.pulse, tau, &QuadOptions::default())?;
        let eval = |r_um: f64| -> Result<f64> {
            let k = self.kernel.coupling_at(self.pulse.duration, r_um * CM_PER_UM, 0.0);
            integ.correlation(k)
        };
        let golden = 0.5 * (5f64.sqrt() - 1.0);
        let (mut a, mut b) = (self.r_um[idx - 1].ln(), self.r_um[idx + 1].ln());
        let mut x1 = b - golden * (b - a);
        let mut x2 = a + golden * (b - a);
        let mut f1 = eval(x1.exp())?;
        let mut f2 = eval(x2.exp())?;
        for _ in 0..60 {
            if f1 > f2 {
                b = x2;
                x2 = x1;
                f2 = f1;
                x1 = b - golden * (b - a);
                f1 = eval(x1.exp())?;
            } else {
                a = x1;
                x1 = x2;
                f1 = f2;
                x2 = a + golden * (b - a);
                f2 = eval(x2.exp())?;
            }
            if b - a < 1e-10 {
                break;
            }
        }
        let (r, p) = if f1 > f2 { (x1.exp(), f1) } else { (x2.exp(), f2) };
        Ok(if p > best { (r, p) } else { (self.r_um[idx], best) })
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("R_um,k,P\n");
        for i in 0..self.r_um.len() {
            let _ = writeln!(out, "{:.11e},{:.11e},{:.11e}", self.r_um[i], self.k[i], self.p[i]);
        }
        out
    }
}

/// `n` log-spaced radii from `lo` to `hi` μm.
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    let (a, b) = (lo.ln(), hi.ln());
    (0..n)
        .map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp())
        .collect()
}

/// 200 log-spaced radii over 0.5–20 μm.
pub fn default_r_grid() -> Vec<f64> {
    log_grid(0.5, 20.0, 200)
}

/// `P(R)` along the alignment-perpendicular direction for each radius in
/// `r_grid_um` (μm).
pub fn correlation_scan(
    p: &PulseSpec,
    kernel: &InteractionKernel,
    r_grid_um: &[f64],
    tau: f64,
) -> Result<CorrelationCurve> {
    kernel.validate()?;
    if r_grid_um.is_empty() {
        return Err(invalid("r_grid", "must not be empty"));
    }
    if r_grid_um[0] <= 0.0 || r_grid_um.windows(2).any(|w| w[1] <= w[0]) {
        return Err(invalid("r_grid", "must be positive and strictly increasing"));
    }
    let integ = CorrelationIntegrator::new(p, tau, &QuadOptions::default())?;
    let mut k = Vec::with_capacity(r_grid_um.len());
    let mut pv = Vec::with_capacity(r_grid_um.len());
    for &r in r_grid_um {
        let kk = kernel.coupling_at(p.duration, r * CM_PER_UM, 0.0);
        pv.push(integ.correlation(kk)?);
        k.push(kk);
    }
    Ok(CorrelationCurve {
        r_um: r_grid_um.to_vec(),
        k,
        p: pv,
        pulse: *p,
        kernel: *kernel,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn zero_coupling_limit() {
        for p in [
            PulseSpec::square(1e-8),
            PulseSpec::gaussian(1e-8).with_detuning(0.7).with_chirp(0.3),
        ] {
            let f = p.area().unwrap().norm();
            let c = c4(&p, 0.0, p.tau_end).unwrap();
            assert!((16.0 * c / f.powi(4) - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn square_at_two_pi() {
        let c = c4(&PulseSpec::square(1e-8), 2.0 * PI, 1.0).unwrap();
        assert!((c - 0.25 / (4.0 * PI * PI)).abs() < 1e-14);
    }

    #[test]
    fn large_coupling_decays() {
        let g = PulseSpec::gaussian(1e-8);
        assert!(c4(&g, 1e6, 4.0).unwrap() < 1e-12);
    }

    #[test]
    fn global_phase_invariance() {
        let p = PulseSpec::gaussian(1e-8).with_detuning(0.9).with_chirp(0.2);
        let grid = PulseGrid::new(&p, 4.0, p.natural_panel_width()).unwrap();
        let mut rotated = grid.clone();
        let phase = Complex64::from_polar(1.0, 1.234);
        for (f, big) in rotated.f.iter_mut().zip(rotated.big_f.iter_mut()) {
            for (a, b) in f.iter_mut().zip(big.iter_mut()) {
                *a *= phase;
                *b *= phase;
            }
        }
        rotated.end_value *= phase;
        for &k in &[-5.0, 0.5, 40.0] {
            let a = amplitude_on_grid(&grid, k).norm_sqr() / grid.end_value.norm_sqr().powi(2);
            let b = amplitude_on_grid(&rotated, k).norm_sqr() / rotated.end_value.norm_sqr().powi(2);
            assert!((a - b).abs() < 1e-14 * a.abs().max(1.0));
        }
    }

    #[test]
    fn vanishing_area_is_an_error() {
        // Detuning at a zero of the square pulse spectrum: F(1) = 0.
        let p = PulseSpec::square(1e-8).with_detuning(2.0 * PI);
        let integ = CorrelationIntegrator::new(&p, 1.0, &QuadOptions::default()).unwrap();
        assert!(matches!(
            integ.correlation(1.0),
            Err(Error::VanishingPulseArea { .. })
        ));
    }

    #[test]
    fn scan_rejects_bad_grids() {
        let p = PulseSpec::square(1e-8);
        let k = InteractionKernel::van_der_waals(1e22);
        assert!(correlation_scan(&p, &k, &[1.0, 1.0], 1.0).is_err());
        assert!(correlation_scan(&p, &k, &[-1.0, 1.0], 1.0).is_err());
        let free = InteractionKernel::van_der_waals(0.0);
        let c = correlation_scan(&p, &free, &[1.0, 2.0], 1.0).unwrap();
        assert!(c.p.iter().all(|&v| (v - 1.0).abs() < 1e-12));
    }
}
