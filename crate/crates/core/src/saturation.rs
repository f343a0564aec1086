//! Blockade saturation model.
//!
//! Matching `sin²(√(N_d x) π/2)/N_d` to the two-term averaged expansion
//! identifies the suppression factor `N_d = 1 + γρ(|C|T)^{3/s}`. The
//! saturated fraction is `P₀ = 1/N_d`, reached at `I₀/I_sat = 1/N_d`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::interactions::InteractionKernel;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SaturationModel {
    pub n_d: f64,
    pub p0: f64,
    pub i0_over_isat: f64,
    pub gamma: f64,
    pub rho: f64,
    pub duration: f64,
    pub kernel: InteractionKernel,
}

impl SaturationModel {
    pub fn new(gamma: f64, rho: f64, kernel: &InteractionKernel, duration: f64) -> Result<Self> {
        let n_d = suppression_factor(gamma, rho, kernel, duration)?;
        Ok(Self {
            n_d,
            p0: 1.0 / n_d,
            i0_over_isat: 1.0 / n_d,
            gamma,
            rho,
            duration,
            kernel: *kernel,
        })
    }

    /// Model curve below `I₀`, clamped at `P₀` above.
    pub fn probability(&self, i_over_isat: f64) -> Result<f64> {
        excitation_curve(self.n_d, i_over_isat)
    }
}

fn check(gamma: f64, rho: f64, duration: f64) -> Result<()> {
    if !(gamma > 0.0 && gamma.is_finite()) {
        return Err(invalid("gamma", "must be positive and finite"));
    }
    if !(rho >= 0.0 && rho.is_finite()) {
        return Err(invalid("rho", "must be nonnegative and finite"));
    }
    if !(duration > 0.0 && duration.is_finite()) {
        return Err(invalid("pulse.duration", "must be positive and finite"));
    }
    Ok(())
}

/// `N_d = 1 + γρ(|C|T)^{3/s}`.
pub fn suppression_factor(
    gamma: f64,
    rho: f64,
    kernel: &InteractionKernel,
    duration: f64,
) -> Result<f64> {
    check(gamma, rho, duration)?;
    kernel.validate()?;
    Ok(1.0 + gamma * rho * kernel.blockade_volume_scale(duration))
}

/// Saturated fraction `1/N_d`.
pub fn p0(gamma: f64, rho: f64, kernel: &InteractionKernel, duration: f64) -> Result<f64> {
    Ok(1.0 / suppression_factor(gamma, rho, kernel, duration)?)
}

/// Maximum of the two-term series, `(3/4)/N_d`. Underestimates the
/// saturated fraction; at `N_d = 1` it gives 3/4 instead of 1.
pub fn p0_truncated(gamma: f64, rho: f64, kernel: &InteractionKernel, duration: f64) -> Result<f64> {
    Ok(0.75 / suppression_factor(gamma, rho, kernel, duration)?)
}

/// `sin²(√(N_d x) π/2)/N_d` for `x ≤ 1/N_d`, and `1/N_d` beyond.
pub fn excitation_curve(n_d: f64, i_over_isat: f64) -> Result<f64> {
    if !(n_d >= 1.0 && n_d.is_finite()) {
        return Err(invalid("N_d", "must be at least 1"));
    }
    if !(i_over_isat >= 0.0 && i_over_isat.is_finite()) {
        return Err(invalid("I/I_sat", "must be nonnegative and finite"));
    }
    if i_over_isat * n_d >= 1.0 {
        return Ok(1.0 / n_d);
    }
    Ok((0.5 * PI * (n_d * i_over_isat).sqrt()).sin().powi(2) / n_d)
}

/// Unclamped model curve, valid as a Rabi-like law for all intensities.
pub fn model_curve(n_d: f64, i_over_isat: f64) -> f64 {
    (0.5 * PI * (n_d * i_over_isat).sqrt()).sin().powi(2) / n_d
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityCurve {
    pub rho: Vec<f64>,
    pub p0: Vec<f64>,
}

/// `P₀(ρ)` over a nonnegative increasing grid.
pub fn density_sweep(
    gamma: f64,
    kernel: &InteractionKernel,
    duration: f64,
    rho_grid: &[f64],
) -> Result<DensityCurve> {
    if rho_grid.iter().any(|&r| !(r >= 0.0)) || rho_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(invalid("sweep.rho", "grid must be nonnegative and increasing"));
    }
    let p0 = rho_grid
        .iter()
        .map(|&r| p0(gamma, r, kernel, duration))
        .collect::<Result<Vec<_>>>()?;
    Ok(DensityCurve {
        rho: rho_grid.to_vec(),
        p0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fig1_kernel() -> InteractionKernel {
        InteractionKernel::van_der_waals(-2.64e22 * 7.0 / 60.0)
    }

    #[test]
    fn zero_density_and_zero_strength() {
        let k = fig1_kernel();
        assert_eq!(suppression_factor(10.0, 0.0, &k, 3e-9).unwrap(), 1.0);
        let free = InteractionKernel::van_der_waals(0.0);
        assert_eq!(p0_truncated(10.0, 1e10, &free, 3e-9).unwrap(), 0.75);
    }

    #[test]
    fn curve_meets_clamp_at_saturation_intensity() {
        for &n_d in &[1.0, 3.0, 27.3] {
            let at = excitation_curve(n_d, 1.0 / n_d).unwrap();
            assert!((at - 1.0 / n_d).abs() < 1e-15);
            let below = model_curve(n_d, (1.0 - 1e-12) / n_d);
            assert!((below - 1.0 / n_d).abs() < 1e-12);
            assert_eq!(excitation_curve(n_d, 5.0).unwrap(), 1.0 / n_d);
        }
        let x = 0.37;
        assert!(
            (excitation_curve(1.0, x).unwrap() - (x.sqrt() * PI / 2.0).sin().powi(2)).abs() < 1e-15
        );
    }

    #[test]
    fn fully_blockaded_curve_is_collective_rabi() {
        let n: f64 = 4.0;
        let x: f64 = 0.1;
        let want = (n.sqrt() * PI * x.sqrt() / 2.0).sin().powi(2) / n;
        assert!((excitation_curve(n, x).unwrap() - want).abs() < 1e-15);
    }

    #[test]
    fn density_sweep_halving() {
        let k = fig1_kernel();
        let t = 3.12e-9;
        let rmax = 6.5e10;
        let c = density_sweep(10.86, &k, t, &[0.0, 0.5 * rmax, rmax]).unwrap();
        assert_eq!(c.p0[0], 1.0);
        let x = 10.86 * rmax * k.blockade_volume_scale(t);
        assert!((c.p0[1] / c.p0[2] - (1.0 + x) / (1.0 + 0.5 * x)).abs() < 1e-12);
        assert!(density_sweep(1.0, &k, t, &[2.0, 1.0]).is_err());
    }
}
