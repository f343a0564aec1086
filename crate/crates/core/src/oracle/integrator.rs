//! Gragg–Bulirsch–Stoer extrapolation with order and step-size control,
//! for complex first-order systems `y' = F(t, y)`.

use num_complex::Complex64;

use crate::error::{Error, Result};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GbsOptions {
    pub rtol: f64,
    pub atol: f64,
    /// Largest extrapolation column.
    pub kmax: usize,
    pub initial_step: f64,
    pub max_step: f64,
    pub max_steps: usize,
}

impl Default for GbsOptions {
    fn default() -> Self {
        Self {
            rtol: 1e-10,
            atol: 1e-12,
            kmax: 9,
            initial_step: 1e-2,
            max_step: 0.5,
            max_steps: 50_000_000,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct GbsStats {
    pub accepted: usize,
    pub rejected: usize,
    pub evaluations: usize,
}

pub struct Gbs<F> {
    rhs: F,
    opts: GbsOptions,
    dim: usize,
    table: Vec<Vec<Complex64>>,
    z0: Vec<Complex64>,
    z1: Vec<Complex64>,
    dz: Vec<Complex64>,
    dy0: Vec<Complex64>,
    kopt: usize,
    step: f64,
    pub stats: GbsStats,
}

fn substeps(j: usize) -> usize {
    2 * (j + 1)
}

impl<F> Gbs<F>
where
    F: FnMut(f64, &[Complex64], &mut [Complex64]),
{
    pub fn new(rhs: F, dim: usize, opts: GbsOptions) -> Self {
        let kmax = opts.kmax.max(3);
        Self {
            rhs,
            opts: GbsOptions { kmax, ..opts },
            dim,
            table: vec![vec![ZERO; dim]; kmax],
            z0: vec![ZERO; dim],
            z1: vec![ZERO; dim],
            dz: vec![ZERO; dim],
            dy0: vec![ZERO; dim],
            kopt: (kmax / 2).max(3),
            step: opts.initial_step,
            stats: GbsStats::default(),
        }
    }

    /// Modified midpoint rule with `n` substeps over `[t, t + h]`; result
    /// in `table[row]`. `dy0` must hold `F(t, y)`.
    fn midpoint(&mut self, t: f64, y: &[Complex64], h: f64, n: usize, row: usize) {
        let sub = h / n as f64;
        for i in 0..self.dim {
            self.z0[i] = y[i];
            self.z1[i] = y[i] + self.dy0[i] * sub;
        }
        for m in 1..n {
            (self.rhs)(t + m as f64 * sub, &self.z1, &mut self.dz);
            self.stats.evaluations += 1;
            for i in 0..self.dim {
                let next = self.z0[i] + self.dz[i] * (2.0 * sub);
                self.z0[i] = self.z1[i];
                self.z1[i] = next;
            }
        }
        self.table[row].copy_from_slice(&self.z1);
    }

    /// Aitken–Neville extrapolation of row `k` against the rows above it;
    /// returns the scaled error between the two most accurate entries.
    fn extrapolate(&mut self, k: usize, y: &[Complex64]) -> f64 {
        let nk = substeps(k) as f64;
        let mut err2 = 0.0;
        for j in (0..k).rev() {
            let ratio = nk / substeps(j) as f64;
            let factor = 1.0 / (ratio * ratio - 1.0);
            let (lo, hi) = self.table.split_at_mut(j + 1);
            let tj = &mut lo[j];
            let tk = &hi[0];
            // After the loop table[0] holds the fully extrapolated value.
            for i in 0..self.dim {
                let d = (tk[i] - tj[i]) * factor;
                if j == 0 {
                    let sc = self.opts.atol
                        + self.opts.rtol * y[i].norm().max((tk[i] + d).norm());
                    err2 += (d.norm() / sc).powi(2);
                }
                tj[i] = tk[i] + d;
            }
        }
        (err2 / self.dim.max(1) as f64).sqrt()
    }

    fn step_factor(err: f64, k: usize) -> f64 {
        let expo = 1.0 / (2 * k + 1) as f64;
        if err == 0.0 {
            return 4.0;
        }
        (0.94 * (0.65 / err).powf(expo)).clamp(0.02, 4.0)
    }

    fn work(k: usize) -> f64 {
        1.0 + (0..=k).map(substeps).sum::<usize>() as f64
    }

    /// Integrates from `t0` to `t1`, updating `y` in place.
    pub fn advance(&mut self, y: &mut [Complex64], t0: f64, t1: f64) -> Result<()> {
        let mut t = t0;
        let kmax = self.opts.kmax;
        while t < t1 {
            if self.stats.accepted + self.stats.rejected >= self.opts.max_steps {
                return Err(Error::StepSizeUnderflow { tau: t, step: self.step });
            }
            let last = self.step >= t1 - t;
            let h = if last { t1 - t } else { self.step.min(self.opts.max_step) };
            if h <= 1e-14 * (1.0 + t.abs()) && !last {
                return Err(Error::StepSizeUnderflow { tau: t, step: h });
            }
            (self.rhs)(t, y, &mut self.dy0);
            self.stats.evaluations += 1;

            let kopt = self.kopt.clamp(2, kmax - 1);
            let mut factors = vec![0.0; kmax];
            let mut accepted_k = None;
            let mut last_k = 0;
            for k in 0..=(kopt + 1).min(kmax - 1) {
                let n = substeps(k);
                // Rows are overwritten in place by the extrapolation, so
                // the midpoint result for row k goes to table[k] first.
                self.midpoint(t, y, h, n, k);
                last_k = k;
                if k == 0 {
                    continue;
                }
                let err = self.extrapolate(k, y);
                factors[k] = Self::step_factor(err, k);
                if k + 1 >= kopt && err <= 1.0 {
                    accepted_k = Some(k);
                    break;
                }
                // Abandon early when convergence in the window is hopeless.
                if k + 1 >= kopt && err > 1e4 {
                    break;
                }
            }
            match accepted_k {
                Some(k) => {
                    for i in 0..self.dim {
                        y[i] = self.table[0][i];
                    }
                    t = if last { t1 } else { t + h };
                    self.stats.accepted += 1;
                    // Pick the order with the least work per unit time.
                    let mut best = k;
                    let mut best_w = f64::INFINITY;
                    for kk in 1..=k {
                        let w = Self::work(kk) / factors[kk];
                        if w < best_w {
                            best_w = w;
                            best = kk;
                        }
                    }
                    let mut new_k = best + 1;
                    let mut fac = factors[best];
                    if best == k && k + 1 < kmax {
                        // Converged at the top column: try one order up.
                        new_k = k + 2;
                        fac *= Self::work(k + 1) / Self::work(k);
                    }
                    self.kopt = new_k.clamp(2, kmax - 1);
                    // A short final step to an output time says nothing
                    // about the natural step size.
                    self.step = if last { (h * fac).max(self.step) } else { h * fac };
                }
                None => {
                    self.stats.rejected += 1;
                    let fac = factors[last_k.max(1)].min(0.5);
                    self.step = h * fac;
                    self.kopt = (self.kopt.saturating_sub(1)).max(2);
                    if self.step <= 1e-14 * (1.0 + t.abs()) {
                        return Err(Error::StepSizeUnderflow { tau: t, step: self.step });
                    }
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn harmonic_oscillator_phase() {
        // y' = i ω y
        let w = 3.7;
        let mut g = Gbs::new(
            |_t, y: &[Complex64], dy: &mut [Complex64]| dy[0] = Complex64::new(0.0, w) * y[0],
            1,
            GbsOptions {
                rtol: 1e-13,
                atol: 1e-15,
                ..GbsOptions::default()
            },
        );
        let mut y = [Complex64::new(1.0, 0.0)];
        g.advance(&mut y, 0.0, 10.0).unwrap();
        let want = Complex64::from_polar(1.0, w * 10.0);
        assert!((y[0] - want).norm() < 1e-11, "{:?}", y[0]);
    }

    #[test]
    fn time_dependent_rhs() {
        // y' = cos(t) y  ⇒  y = exp(sin t)
        let mut g = Gbs::new(
            |t: f64, y: &[Complex64], dy: &mut [Complex64]| dy[0] = y[0] * t.cos(),
            1,
            GbsOptions::default(),
        );
        let mut y = [Complex64::new(1.0, 0.0)];
        g.advance(&mut y, 0.0, 2.0).unwrap();
        g.advance(&mut y, 2.0, 5.0).unwrap();
        assert!((y[0].re - 5f64.sin().exp()).abs() < 1e-9);
    }
}
