//! Pairwise fourth-order interaction term for explicit couplings.
//!
//! For one partner with coupling `k`,
//!
//! ```text
//! I4(k) = ¼ Re ∫dτ₁ f(τ₁)(F(τ) − 2F(τ₁)) D*(τ₁),
//! D*(τ₁) = ∫_{τ₀}^{τ₁} dτ₂ f*(τ₂)F*(τ₂)(e^{ik(τ₁−τ₂)} − 1).
//! ```
//!
//! `D* = Z − B` where `B = ∫h`, `Z = ∫e^{ik(τ₁−τ₂)}h` and `h = f*F*`. Both
//! are streamed across Gauss–Legendre panels. `Z` solves `Z' = ikZ + h`; on
//! narrow panels (`|k|h ≤ π`) it is integrated with a local phase, on wide
//! panels through the exact polynomial particular solution.

use num_complex::Complex64;

use super::QuadOptions;
use crate::error::{Error, Result};
use crate::pulse::{PulseGrid, PulseSpec};
use crate::quadrature::{Estimate, PanelRule, PANEL_ORDER};
use crate::summation::NeumaierSum;

/// Panels with `|k|h/2` above this use the particular-solution update.
const POLY_OMEGA: f64 = 40.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Scheme {
    Asymptotic,
    Phase,
    Polynomial,
}

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

fn pair_on_grid(grid: &PulseGrid, k: f64, scheme: Scheme) -> f64 {
    let rule = PanelRule::get();
    let mut z = ZERO;
    let mut b = ZERO;
    let mut x = ZERO;
    let mut y = ZERO;
    for (p, &(a, h)) in grid.panels.iter().enumerate() {
        let fv = &grid.f[p];
        let fb = &grid.big_f[p];
        let nodes = &grid.nodes[p];
        let mut hv = [ZERO; PANEL_ORDER];
        for j in 0..PANEL_ORDER {
            hv[j] = (fv[j] * fb[j]).conj();
        }
        let b_cum = rule.cumulative(h, &hv);
        let mut zv = [ZERO; PANEL_ORDER];
        match scheme {
            Scheme::Asymptotic => {}
            Scheme::Phase => {
                let mut phase = [ZERO; PANEL_ORDER];
                let mut w = [ZERO; PANEL_ORDER];
                for j in 0..PANEL_ORDER {
                    phase[j] = Complex64::from_polar(1.0, k * (nodes[j] - a));
                    w[j] = hv[j] * phase[j].conj();
                }
                let cw = rule.cumulative(h, &w);
                for j in 0..PANEL_ORDER {
                    zv[j] = phase[j] * (z + cw[j]);
                }
                z = Complex64::from_polar(1.0, k * h) * (z + rule.integral(h, &w));
            }
            Scheme::Polynomial => {
                let omega = 0.5 * k * h;
                let g = resolvent_coefficients(&rule.coefficients(&hv), omega);
                let scale = -0.5 * h;
                let zp = rule.synthesize(&g);
                let mut zp_left = ZERO;
                let mut zp_right = ZERO;
                for (n, &gn) in g.iter().enumerate() {
                    zp_right += gn;
                    zp_left += if n % 2 == 0 { gn } else { -gn };
                }
                let offset = z - zp_left * scale;
                for j in 0..PANEL_ORDER {
                    zv[j] = zp[j] * scale + Complex64::from_polar(1.0, k * (nodes[j] - a)) * offset;
                }
                z = zp_right * scale + Complex64::from_polar(1.0, k * h) * offset;
            }
        }
        let mut d = [ZERO; PANEL_ORDER];
        let mut fd = [ZERO; PANEL_ORDER];
        for j in 0..PANEL_ORDER {
            d[j] = fv[j] * (zv[j] - (b + b_cum[j]));
            fd[j] = d[j] * fb[j];
        }
        x += rule.integral(h, &d);
        y += rule.integral(h, &fd);
        b += rule.integral(h, &hv);
    }
    0.25 * (grid.end_value * x - y * 2.0).re
}

/// Legendre coefficients of `g` solving `(iω − d/dx) g = c` for a
/// polynomial right-hand side, by downward recurrence on the derivative
/// coefficients.
fn resolvent_coefficients(c: &[Complex64; PANEL_ORDER], omega: f64) -> [Complex64; PANEL_ORDER] {
    let inv = Complex64::new(0.0, -1.0 / omega);
    let mut g = [ZERO; PANEL_ORDER];
    // d[n] are the Legendre coefficients of g'.
    let mut d_next = ZERO; // d[n + 1]
    let mut d_next2 = ZERO; // d[n + 2]
    let mut g_next = ZERO; // g[n + 1]
    for n in (0..PANEL_ORDER).rev() {
        let d_n = (2.0 * n as f64 + 1.0) * (g_next + d_next2 / (2.0 * n as f64 + 5.0));
        g[n] = (c[n] + d_n) * inv;
        g_next = g[n];
        d_next2 = d_next;
        d_next = d_n;
    }
    g
}

/// Evaluates the pair term for many couplings against one pulse.
#[derive(Debug, Clone)]
pub struct PairIntegrator {
    pulse: PulseSpec,
    tau: f64,
    opts: QuadOptions,
    width: f64,
    base: PulseGrid,
    half: PulseGrid,
}

impl PairIntegrator {
    pub fn new(pulse: &PulseSpec, tau: f64, opts: &QuadOptions) -> Result<Self> {
        let width = opts.panel_width(pulse);
        let base = PulseGrid::new(pulse, tau, width)?;
        let half = PulseGrid::new(pulse, tau, 0.5 * width)?;
        Ok(Self {
            pulse: *pulse,
            tau,
            opts: *opts,
            width,
            base,
            half,
        })
    }

    /// `F(τ)` on the base grid.
    pub fn area(&self) -> Complex64 {
        self.base.end_value
    }

    fn on_width(&self, k: f64, width: f64) -> Result<f64> {
        let scheme = if k == 0.0 {
            return Ok(0.0);
        } else if k.abs() > self.opts.asymptotic_k {
            Scheme::Asymptotic
        } else if 0.5 * k.abs() * width >= POLY_OMEGA {
            Scheme::Polynomial
        } else {
            Scheme::Phase
        };
        let w = match scheme {
            Scheme::Phase => width.min(std::f64::consts::PI / k.abs()),
            _ => width,
        };
        let v = if w == self.width {
            pair_on_grid(&self.base, k, scheme)
        } else if w == 0.5 * self.width {
            pair_on_grid(&self.half, k, scheme)
        } else {
            pair_on_grid(&PulseGrid::new(&self.pulse, self.tau, w)?, k, scheme)
        };
        Ok(v)
    }

    /// `I4` for a single partner at coupling `k`.
    pub fn value(&self, k: f64) -> Result<Estimate<f64>> {
        if !k.is_finite() {
            return Err(crate::error::invalid("k", "coupling must be finite"));
        }
        let mut width = self.width;
        let mut value = self.on_width(k, width)?;
        let tail = if k.abs() > self.opts.asymptotic_k {
            // Neglected oscillatory part is O(|F|⁴/|k|).
            self.area().norm_sqr().powi(2) / k.abs()
        } else {
            0.0
        };
        if !self.opts.verify || k == 0.0 {
            return Ok(Estimate { value, error: tail });
        }
        for _ in 0..self.opts.max_refinements {
            width *= 0.5;
            let finer = self.on_width(k, width)?;
            let diff = (finer - value).abs();
            value = finer;
            if self.opts.accepts(diff, value) {
                return Ok(Estimate {
                    value,
                    error: diff + tail,
                });
            }
        }
        Err(Error::QuadratureNotConverged {
            achieved: f64::NAN,
            requested: self.opts.outer.abs,
        })
    }
}

/// `I4` for one partner with coupling `k`.
pub fn i4_pair(p: &PulseSpec, k: f64, tau: f64, opts: &QuadOptions) -> Result<Estimate<f64>> {
    PairIntegrator::new(p, tau, opts)?.value(k)
}

/// `I4` summed over all partners of the test atom.
pub fn i4_finite(
    p: &PulseSpec,
    couplings: &[f64],
    tau: f64,
    opts: &QuadOptions,
) -> Result<Estimate<f64>> {
    if couplings.is_empty() {
        return Ok(Estimate {
            value: 0.0,
            error: 0.0,
        });
    }
    let integ = PairIntegrator::new(p, tau, opts)?;
    let mut value = NeumaierSum::new();
    let mut error = 0.0;
    for &k in couplings {
        let e = integ.value(k)?;
        value.add(e.value);
        error += e.error;
    }
    Ok(Estimate {
        value: value.value(),
        error,
    })
}
