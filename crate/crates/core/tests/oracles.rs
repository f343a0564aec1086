//! Checks against references computed independently of the library paths
//! they validate.

use num_complex::Complex64;
use rustfft::FftPlanner;

use rydberg_core::correlation::c4;
use rydberg_core::expansion::{
    expand_finite, i4_finite, i4_pair, second_order, QuadOptions,
};
use rydberg_core::oracle::{expansion_residual, final_state, propagate, OracleOptions};
use rydberg_core::{AtomEnsemble, Geometry, PulseSpec, Shape};

/// Intensity-spectrum FWHM of `p` in Hz from a zero-padded DFT.
fn dft_fwhm(p: &PulseSpec) -> f64 {
    let n = 1 << 20;
    let span = 4096.0;
    let dt = span / n as f64;
    let mut buf: Vec<Complex64> = (0..n)
        .map(|i| {
            let t = -0.5 * span + i as f64 * dt;
            if t >= p.tau0 && t <= p.tau_end {
                p.envelope(t)
            } else {
                Complex64::new(0.0, 0.0)
            }
        })
        .collect();
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    let power: Vec<f64> = buf.iter().map(|c| c.norm_sqr()).collect();
    let (peak_idx, &peak) = power
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .unwrap();
    let half = 0.5 * peak;
    let at = |i: isize| power[i.rem_euclid(n as isize) as usize];
    // Walk out from the peak and interpolate the half-maximum crossings.
    let cross = |dir: isize| -> f64 {
        let mut i = peak_idx as isize;
        while at(i + dir) > half {
            i += dir;
        }
        let (a, b) = (at(i), at(i + dir));
        i as f64 + dir as f64 * (a - half) / (a - b)
    };
    let bins = cross(1) - cross(-1);
    // Bin spacing in scaled angular-frequency units is 2π/span; in Hz, 1/(span T).
    bins / (span * p.duration)
}

#[test]
fn transform_limited_bandwidth_by_dft() {
    for (shape, t) in [(Shape::Gaussian, 3.12e-9), (Shape::Square, 1e-8)] {
        let p = PulseSpec::new(shape, t);
        let want = PulseSpec::transform_limited_bandwidth(shape, t);
        let got = dft_fwhm(&p);
        assert!((got / want - 1.0).abs() < 2e-3, "{shape:?}: {got} vs {want}");
    }
}

#[test]
fn chirped_bandwidth_by_dft() {
    let base = PulseSpec::duration_from_bandwidth(Shape::Gaussian, 6e7, 0.0).unwrap();
    for &(gamma, sign) in &[(8e7, 1.0), (1.2e8, -1.0)] {
        let p = base.chirped_to_bandwidth(gamma, sign).unwrap();
        let got = dft_fwhm(&p);
        assert!((got / gamma - 1.0).abs() < 2e-3, "{gamma}: {got}");
    }
}

#[test]
fn bandwidth_durations() {
    let p = PulseSpec::duration_from_bandwidth(Shape::Gaussian, 1.2e8, 0.0).unwrap();
    let fwhm_time = p.duration * (2.0 * std::f64::consts::LN_2).sqrt();
    assert!((fwhm_time - 2.0 * std::f64::consts::LN_2 / (std::f64::consts::PI * 1.2e8)).abs() < 1e-18);
    assert!((p.duration - 3.12e-9).abs() < 5e-12);
    let q = PulseSpec::duration_from_bandwidth(Shape::Gaussian, 6e7, 0.0).unwrap();
    assert!((q.duration - 6.24e-9).abs() < 1e-11);
}

/// CDF of the distance between two uniform points in a ball of radius `a`.
fn ball_distance_cdf(r: f64, a: f64) -> f64 {
    let x = r / a;
    x.powi(3) - 9.0 / 16.0 * x.powi(4) + x.powi(6) / 32.0
}

fn ks_statistic(mut samples: Vec<f64>, cdf: impl Fn(f64) -> f64) -> f64 {
    samples.sort_by(f64::total_cmp);
    let n = samples.len() as f64;
    samples
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).abs().max(((i + 1) as f64 / n - f).abs())
        })
        .fold(0.0, f64::max)
}

#[test]
fn sphere_pair_distances_pass_ks() {
    let e = AtomEnsemble::sample(1e12, Geometry::Sphere, 2e-8, 5).unwrap();
    let d: Vec<f64> = e
        .positions
        .chunks_exact(2)
        .map(|c| {
            let v = [c[0][0] - c[1][0], c[0][1] - c[1][1], c[0][2] - c[1][2]];
            (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt()
        })
        .collect();
    let n = d.len() as f64;
    let stat = ks_statistic(d, |r| ball_distance_cdf(r, e.extent));
    // 1% critical value.
    assert!(stat * n.sqrt() < 1.63, "D√n = {}", stat * n.sqrt());
}

#[test]
fn box_coordinates_pass_ks() {
    let e = AtomEnsemble::sample(1e12, Geometry::Box, 1e-8, 3).unwrap();
    for axis in 0..3 {
        let xs: Vec<f64> = e.positions.iter().map(|p| p[axis] / e.extent + 0.5).collect();
        let n = xs.len() as f64;
        let stat = ks_statistic(xs, |x| x.clamp(0.0, 1.0));
        assert!(stat * n.sqrt() < 1.63, "axis {axis}: D√n = {}", stat * n.sqrt());
    }
}

#[test]
fn pair_correlator_matches_c4_by_richardson() {
    let o = OracleOptions {
        tolerance: 1e-14,
        ..OracleOptions::default()
    };
    for (p, k) in [
        (PulseSpec::square(1e-8), 3.0),
        (PulseSpec::gaussian(1e-8).with_detuning(0.6).with_chirp(0.3), -1.7),
    ] {
        let m = vec![vec![0.0, k], vec![k, 0.0]];
        let g = |w: f64| {
            let s = final_state(&m, &p, w, &o).unwrap();
            s.observables().pair[0][1] / w.powi(4)
        };
        let w = 0.02;
        let extrapolated = (4.0 * g(0.5 * w) - g(w)) / 3.0;
        let want = c4(&p, k, p.tau_end).unwrap();
        assert!((extrapolated - want).abs() < 1e-6 * want, "{extrapolated} vs {want}");
    }
}

#[test]
fn single_atom_probability_matches_second_order() {
    let p = PulseSpec::gaussian(1e-8).with_detuning(1.1);
    let o = OracleOptions {
        tolerance: 1e-14,
        ..OracleOptions::default()
    };
    let w = 1e-3;
    let s = final_state(&[vec![0.0]], &p, w, &o).unwrap();
    let got = s.observables().excitation[0] / (w * w);
    let want = second_order(&p, p.tau_end).unwrap();
    assert!((got - want).abs() < 1e-6 * want);
}

#[test]
fn detuned_chirped_expansion_is_fourth_order_exact() {
    for p in [
        PulseSpec::gaussian(1e-8).with_detuning(0.7).with_chirp(-0.35),
        PulseSpec::square(1e-8).with_detuning(-1.3),
    ] {
        for k in [vec![vec![0.0]], vec![vec![0.0, 2.5], vec![2.5, 0.0]]] {
            let fit = expansion_residual(&k, &p, None, &OracleOptions::default()).unwrap();
            assert!(fit.passes(), "order {}", fit.order);
        }
    }
}

#[test]
fn blockaded_triplet_follows_collective_rabi() {
    let k = 1e6;
    let m: Vec<Vec<f64>> = (0..3)
        .map(|i| (0..3).map(|j| if i == j { 0.0 } else { k }).collect())
        .collect();
    let p = PulseSpec::square(1e-8);
    let w = 1.7;
    let times: Vec<f64> = (1..=5).map(|i| 0.2 * i as f64).collect();
    let traj = propagate(&m, &p, w, &times, &OracleOptions::default()).unwrap();
    for s in &traj.states {
        let want = (3f64.sqrt() * w * s.tau / 2.0).sin().powi(2) / 3.0;
        assert!((s.observables().excitation[1] - want).abs() < 1e-4);
    }
    assert!(traj.max_norm_drift < 1e-9);
}

#[test]
fn excitation_sectors_frozen_without_drive() {
    let m = vec![
        vec![0.0, 4.0, -2.0],
        vec![4.0, 0.0, 0.5],
        vec![-2.0, 0.5, 0.0],
    ];
    let p = PulseSpec::gaussian(1e-8).with_detuning(0.4);
    let s = final_state(&m, &p, 0.0, &OracleOptions::default()).unwrap();
    let sectors = s.sector_populations();
    assert_eq!(sectors[0], 1.0);
    assert!(sectors[1..].iter().all(|&v| v == 0.0));
}

#[test]
fn strong_blockade_pair_sum() {
    // (1/N) sin²(√N ωW/2) has ω⁴ coefficient −N W⁴/48; one atom sees N − 1
    // partners on top of the single-atom W⁴/48.
    for p in [PulseSpec::square(1e-8), PulseSpec::gaussian(1e-8)] {
        let w = p.resonant_area().unwrap();
        for n in [2usize, 5, 10] {
            let r = expand_finite(&p, &vec![1e6; n - 1], p.tau_end, &QuadOptions::default()).unwrap();
            let want = -(n as f64) * w.powi(4) / 48.0;
            assert!((r.c4_total / want - 1.0).abs() < 1e-4, "n = {n}");
        }
    }
}

#[test]
fn pair_sum_is_linear_in_partners() {
    let p = PulseSpec::gaussian(1e-8).with_detuning(0.2);
    let q = QuadOptions::default();
    let ks = [0.3, -4.0, 12.0];
    let total = i4_finite(&p, &ks, p.tau_end, &q).unwrap().value;
    let parts: f64 = ks.iter().map(|&k| i4_pair(&p, k, p.tau_end, &q).unwrap().value).sum();
    assert!((total - parts).abs() < 1e-13);
}
