//! Exact propagation of `N` driven, interacting two-level atoms on the full
//! `2^N` state space, in scaled time:
//!
//! ```text
//! H(τ) = Σ_i (ω/2)(f(τ)σ_eg^i + f*(τ)σ_ge^i) + Σ_{i<j} k_ij n_i n_j
//! ```
//!
//! Basis state `m` has bit `i` set when atom `i` is excited. The diagonal
//! interaction energies are removed exactly by working in their
//! interaction picture; the remaining drive is integrated with
//! [`integrator::Gbs`].

pub mod integrator;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::expansion::{i41_with, i4_finite, second_order, QuadOptions};
use crate::pulse::PulseSpec;
use integrator::{Gbs, GbsOptions, GbsStats};

pub const DEFAULT_MAX_ATOMS: usize = 14;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleOptions {
    pub max_atoms: usize,
    /// Relative tolerance per unit scaled time; absolute is 1% of it.
    pub tolerance: f64,
}

impl Default for OracleOptions {
    fn default() -> Self {
        Self {
            max_atoms: DEFAULT_MAX_ATOMS,
            tolerance: 1e-10,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleState {
    pub n: usize,
    pub tau: f64,
    /// Schrödinger-picture amplitudes.
    pub amplitudes: Vec<Complex64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Observables {
    /// `⟨n_i⟩`.
    pub excitation: Vec<f64>,
    /// `⟨n_i n_j⟩`; the diagonal repeats `⟨n_i⟩`.
    pub pair: Vec<Vec<f64>>,
}

impl OracleState {
    /// All atoms in the ground state.
    pub fn ground(n: usize, tau: f64) -> Self {
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); 1 << n];
        amplitudes[0] = Complex64::new(1.0, 0.0);
        Self { n, tau, amplitudes }
    }

    /// Symmetric single-excitation state `N^{-1/2} Σ_i |…e_i…⟩`.
    pub fn single_excitation(n: usize) -> Self {
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); 1 << n];
        let a = 1.0 / (n as f64).sqrt();
        for i in 0..n {
            amplitudes[1 << i] = Complex64::new(a, 0.0);
        }
        Self {
            n,
            tau: 0.0,
            amplitudes,
        }
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn observables(&self) -> Observables {
        observables(self)
    }

    /// Population of each excitation-number sector.
    pub fn sector_populations(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.n + 1];
        for (m, a) in self.amplitudes.iter().enumerate() {
            out[m.count_ones() as usize] += a.norm_sqr();
        }
        out
    }
}

pub fn observables(state: &OracleState) -> Observables {
    let n = state.n;
    let mut pair = vec![vec![0.0; n]; n];
    for (m, a) in state.amplitudes.iter().enumerate() {
        let w = a.norm_sqr();
        if w == 0.0 || m == 0 {
            continue;
        }
        for i in 0..n {
            if m & (1 << i) == 0 {
                continue;
            }
            for j in i..n {
                if m & (1 << j) != 0 {
                    pair[i][j] += w;
                }
            }
        }
    }
    for i in 0..n {
        for j in 0..i {
            pair[i][j] = pair[j][i];
        }
    }
    Observables {
        excitation: (0..n).map(|i| pair[i][i]).collect(),
        pair,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub states: Vec<OracleState>,
    pub max_norm_drift: f64,
    pub steps: usize,
    pub rejected: usize,
}

fn check_couplings(k: &[Vec<f64>], max_atoms: usize) -> Result<usize> {
    let n = k.len();
    if n == 0 {
        return Err(invalid("couplings", "need at least one atom"));
    }
    if n > max_atoms {
        return Err(Error::TooManyAtoms {
            atoms: n,
            limit: max_atoms,
        });
    }
    for (i, row) in k.iter().enumerate() {
        if row.len() != n {
            return Err(invalid("couplings", "matrix must be square"));
        }
        if row[i] != 0.0 {
            return Err(invalid("couplings", "diagonal must be zero"));
        }
        for (j, &v) in row.iter().enumerate() {
            if !v.is_finite() {
                return Err(invalid("couplings", "entries must be finite"));
            }
            if v != k[j][i] {
                return Err(invalid("couplings", "matrix must be symmetric"));
            }
        }
    }
    Ok(n)
}

/// Diagonal energies `E_m = Σ_{i<j ∈ m} k_ij`.
fn diagonal_energies(k: &[Vec<f64>]) -> Vec<f64> {
    let n = k.len();
    let mut e = vec![0.0; 1 << n];
    for m in 1usize..(1 << n) {
        // Add the highest atom to the energy of the state without it.
        let top = usize::BITS - 1 - m.leading_zeros();
        let rest = m & !(1 << top);
        let mut v = e[rest];
        for j in 0..top as usize {
            if rest & (1 << j) != 0 {
                v += k[top as usize][j];
            }
        }
        e[m] = v;
    }
    e
}

/// Integrates from the all-ground state at `tau0` and records the state
/// at each of `output_times` (ascending, inside the pulse window).
pub fn propagate(
    couplings: &[Vec<f64>],
    p: &PulseSpec,
    omega: f64,
    output_times: &[f64],
    opts: &OracleOptions,
) -> Result<Trajectory> {
    let n = check_couplings(couplings, opts.max_atoms)?;
    p.validate()?;
    if !omega.is_finite() {
        return Err(invalid("omega", "must be finite"));
    }
    if output_times.windows(2).any(|w| w[1] < w[0])
        || output_times
            .iter()
            .any(|&t| !(t >= p.tau0 && t <= p.tau_end))
    {
        return Err(invalid(
            "oracle.times",
            "output times must be ascending and inside the pulse window",
        ));
    }
    let dim = 1usize << n;
    let energies = diagonal_energies(couplings);
    let tau0 = p.tau0;
    let half_omega = 0.5 * omega;
    let pulse = *p;
    let mut phase = vec![Complex64::new(0.0, 0.0); dim];
    let mut psi = vec![Complex64::new(0.0, 0.0); dim];
    // φ_m' = −i (ω/2) e^{iE_m t} Σ_n V_mn e^{−iE_n t} φ_n, t = τ − τ₀.
    let rhs = move |t: f64, phi: &[Complex64], dphi: &mut [Complex64]| {
        let f = pulse.envelope(tau0 + t) * half_omega;
        let fc = f.conj();
        for m in 0..dim {
            phase[m] = Complex64::from_polar(1.0, energies[m] * t);
            psi[m] = phase[m].conj() * phi[m];
        }
        for m in 0..dim {
            let mut acc = Complex64::new(0.0, 0.0);
            for i in 0..n {
                let bit = 1 << i;
                if m & bit != 0 {
                    acc += f * psi[m ^ bit];
                } else {
                    acc += fc * psi[m | bit];
                }
            }
            dphi[m] = Complex64::new(0.0, -1.0) * phase[m] * acc;
        }
    };
    let gbs_opts = GbsOptions {
        rtol: opts.tolerance,
        atol: opts.tolerance * 1e-2,
        ..GbsOptions::default()
    };
    let mut gbs = Gbs::new(rhs, dim, gbs_opts);
    let mut phi = OracleState::ground(n, tau0).amplitudes;
    let mut t = 0.0;
    let mut states = Vec::with_capacity(output_times.len());
    let mut max_drift: f64 = 0.0;
    for &tau in output_times {
        let target = tau - tau0;
        if target > t {
            gbs.advance(&mut phi, t, target)?;
            t = target;
        }
        let amplitudes: Vec<Complex64> = phi
            .iter()
            .zip(&diagonal_energies(couplings))
            .map(|(a, &e)| Complex64::from_polar(1.0, -e * t) * a)
            .collect();
        let state = OracleState { n, tau, amplitudes };
        max_drift = max_drift.max((state.norm() - 1.0).abs());
        states.push(state);
    }
    let GbsStats {
        accepted, rejected, ..
    } = gbs.stats;
    Ok(Trajectory {
        states,
        max_norm_drift: max_drift,
        steps: accepted,
        rejected,
    })
}

/// Final state at `tau_end`.
pub fn final_state(
    couplings: &[Vec<f64>],
    p: &PulseSpec,
    omega: f64,
    opts: &OracleOptions,
) -> Result<OracleState> {
    let mut traj = propagate(couplings, p, omega, &[p.tau_end], opts)?;
    Ok(traj.states.pop().expect("one output time"))
}

/// Excitation probability of atom `atom` at `tau_end`.
pub fn excitation_probability(
    couplings: &[Vec<f64>],
    p: &PulseSpec,
    omega: f64,
    atom: usize,
    opts: &OracleOptions,
) -> Result<f64> {
    let s = final_state(couplings, p, omega, opts)?;
    if atom >= s.n {
        return Err(invalid("atom", "index out of range"));
    }
    Ok(s.observables().excitation[atom])
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResidualFit {
    /// Fitted exponent `p` in `|P − P₄| ≈ A ω^p`.
    pub order: f64,
    pub amplitude: f64,
    pub omegas: Vec<f64>,
    pub residuals: Vec<f64>,
    pub c2: f64,
    pub c4_total: f64,
}

impl ResidualFit {
    /// The fourth-order expansion is exact through `ω⁴`.
    pub fn passes(&self) -> bool {
        self.order >= 5.5
    }
}

/// Default small-`ω` list: `ωW` log-spaced over `[0.1, 1]/√N`.
pub fn default_omegas(n: usize, area: f64) -> Vec<f64> {
    let scale = 1.0 / ((n as f64).sqrt() * area);
    (0..7)
        .map(|i| scale * 10f64.powf(-1.0 + i as f64 / 6.0))
        .collect()
}

/// Fits the residual of the fourth-order expansion for atom 0 against the
/// exact propagation.
pub fn expansion_residual(
    couplings: &[Vec<f64>],
    p: &PulseSpec,
    omega_list: Option<&[f64]>,
    opts: &OracleOptions,
) -> Result<ResidualFit> {
    let n = check_couplings(couplings, opts.max_atoms)?;
    let area = p.resonant_area()?;
    let omegas: Vec<f64> = match omega_list {
        Some(w) => w.to_vec(),
        None => default_omegas(n, area),
    };
    if omegas.len() < 2 || omegas.iter().any(|&w| !(w > 0.0 && w.is_finite())) {
        return Err(Error::IllConditionedFit(
            "need at least two positive omegas".into(),
        ));
    }
    let (lo, hi) = omegas
        .iter()
        .fold((f64::INFINITY, 0.0f64), |(a, b), &w| (a.min(w), b.max(w)));
    if hi / lo < 10.0 * (1.0 - 1e-12) {
        return Err(Error::IllConditionedFit(format!(
            "omega list spans {:.3} decades, need at least one",
            (hi / lo).log10()
        )));
    }
    let quad = QuadOptions::default();
    let c2 = second_order(p, p.tau_end)?;
    let i41 = i41_with(p, p.tau_end, &quad)?;
    let i4 = i4_finite(p, &couplings[0][1..], p.tau_end, &quad)?.value;
    let c4_total = -(i41 + i4);
    let tight = OracleOptions {
        tolerance: opts.tolerance.min(1e-14),
        ..*opts
    };
    let mut residuals = Vec::with_capacity(omegas.len());
    for &w in &omegas {
        let exact = excitation_probability(couplings, p, w, 0, &tight)?;
        let w2 = w * w;
        let r = (exact - (c2 * w2 + c4_total * w2 * w2)).abs();
        if !(r > 0.0 && r.is_finite()) {
            return Err(Error::IllConditionedFit(format!(
                "residual at omega = {w:e} is {r:e}"
            )));
        }
        residuals.push(r);
    }
    let xs: Vec<f64> = omegas.iter().map(|w| w.ln()).collect();
    let ys: Vec<f64> = residuals.iter().map(|r| r.ln()).collect();
    let m = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / m;
    let my = ys.iter().sum::<f64>() / m;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let order = sxy / sxx;
    let amplitude = (my - order * mx).exp();
    Ok(ResidualFit {
        order,
        amplitude,
        omegas,
        residuals,
        c2,
        c4_total,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn uniform(n: usize, k: f64) -> Vec<Vec<f64>> {
        (0..n)
            .map(|i| (0..n).map(|j| if i == j { 0.0 } else { k }).collect())
            .collect()
    }

    #[test]
    fn pi_pulse_inverts_single_atom() {
        let sq = PulseSpec::square(1e-8);
        let p = excitation_probability(&uniform(1, 0.0), &sq, PI, 0, &OracleOptions::default())
            .unwrap();
        assert!((p - 1.0).abs() < 1e-9);
    }

    #[test]
    fn independent_atoms_factorise() {
        let g = PulseSpec::gaussian(1e-8);
        let s = final_state(&uniform(2, 0.0), &g, 1.3, &OracleOptions::default()).unwrap();
        let o = s.observables();
        assert!((o.pair[0][1] - o.excitation[0] * o.excitation[1]).abs() < 1e-9);
        let w = g.area().unwrap().re;
        assert!((o.excitation[0] - (0.65 * w).sin().powi(2)).abs() < 1e-9);
    }

    #[test]
    fn observables_of_reference_states() {
        let o = OracleState::ground(3, 0.0).observables();
        assert!(o.excitation.iter().all(|&p| p == 0.0));
        let o = OracleState::single_excitation(4).observables();
        for i in 0..4 {
            assert!((o.excitation[i] - 0.25).abs() < 1e-15);
            for j in 0..4 {
                if i != j {
                    assert_eq!(o.pair[i][j], 0.0);
                }
            }
        }
    }

    #[test]
    fn zero_drive_keeps_sectors() {
        let sq = PulseSpec::square(1e-8);
        let s = final_state(&uniform(3, 5.0), &sq, 0.0, &OracleOptions::default()).unwrap();
        assert_eq!(s.sector_populations()[0], 1.0);
    }

    #[test]
    fn rejects_bad_inputs() {
        let sq = PulseSpec::square(1e-8);
        let big = uniform(15, 1.0);
        assert!(matches!(
            propagate(&big, &sq, 1.0, &[1.0], &OracleOptions::default()),
            Err(Error::TooManyAtoms { .. })
        ));
        let mut asym = uniform(2, 1.0);
        asym[0][1] = 2.0;
        assert!(propagate(&asym, &sq, 1.0, &[1.0], &OracleOptions::default()).is_err());
    }

    #[test]
    fn single_atom_residual_is_sixth_order() {
        let sq = PulseSpec::square(1e-8);
        let fit = expansion_residual(&uniform(1, 0.0), &sq, None, &OracleOptions::default()).unwrap();
        assert!((fit.order - 6.0).abs() < 0.1, "order {}", fit.order);
    }

    #[test]
    fn narrow_omega_list_is_rejected() {
        let sq = PulseSpec::square(1e-8);
        let r = expansion_residual(&uniform(1, 0.0), &sq, Some(&[0.1, 0.5]), &OracleOptions::default());
        assert!(matches!(r, Err(Error::IllConditionedFit(_))));
    }
}
