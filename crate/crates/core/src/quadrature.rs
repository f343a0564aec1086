//! Quadrature building blocks.
//!
//! Three tools live here:
//!
//! * an adaptive 15-point Gauss–Kronrod integrator for real or complex
//!   integrands on finite intervals,
//! * a fixed-order Gauss–Legendre [`PanelRule`] with a spectral
//!   integration matrix, so that cumulative integrals can be streamed panel
//!   by panel, plus Filon-type weights for `e^{ikt}`-modulated panels,
//! * Wynn's epsilon accelerator, used to sum Fourier-type tails.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::f64::consts::PI;
use std::ops::{Add, AddAssign, Mul, Sub};
use std::sync::OnceLock;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Values that can be integrated: `f64` and `Complex64`.
pub trait QuadValue:
    Copy
    + Default
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<f64, Output = Self>
    + AddAssign
    + Send
    + Sync
{
    fn magnitude(self) -> f64;
}

impl QuadValue for f64 {
    #[inline]
    fn magnitude(self) -> f64 {
        self.abs()
    }
}

impl QuadValue for Complex64 {
    #[inline]
    fn magnitude(self) -> f64 {
        self.norm()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance {
    pub abs: f64,
    pub rel: f64,
    pub max_intervals: usize,
}

impl Tolerance {
    pub const fn new(abs: f64, rel: f64) -> Self {
        Self {
            abs,
            rel,
            max_intervals: 4000,
        }
    }
}

impl Default for Tolerance {
    fn default() -> Self {
        Self::new(1e-10, 1e-12)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate<T> {
    pub value: T,
    pub error: f64,
}

// 15-point Kronrod extension of the 7-point Gauss rule (QUADPACK qk15).
const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144838258730,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
];
const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

struct Segment<T> {
    a: f64,
    b: f64,
    value: T,
    error: f64,
}

impl<T> PartialEq for Segment<T> {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl<T> Eq for Segment<T> {}
impl<T> PartialOrd for Segment<T> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl<T> Ord for Segment<T> {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn gk15<T: QuadValue, F: FnMut(f64) -> T>(f: &mut F, a: f64, b: f64) -> Segment<T> {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut res_g = fc * WG[3];
    let mut res_k = fc * WGK[7];
    let mut res_abs = fc.magnitude() * WGK[7];
    let mut fv1 = [T::default(); 7];
    let mut fv2 = [T::default(); 7];
    for j in 0..7 {
        let dx = half * XGK[j];
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        fv1[j] = f1;
        fv2[j] = f2;
        res_k += (f1 + f2) * WGK[j];
        res_abs += (f1.magnitude() + f2.magnitude()) * WGK[j];
        if j % 2 == 1 {
            res_g += (f1 + f2) * WG[j / 2];
        }
    }
    let mean = res_k * 0.5;
    let mut res_asc = WGK[7] * (fc - mean).magnitude();
    for j in 0..7 {
        res_asc += WGK[j] * ((fv1[j] - mean).magnitude() + (fv2[j] - mean).magnitude());
    }
    let scale = half.abs();
    res_abs *= scale;
    res_asc *= scale;
    let mut err = ((res_k - res_g) * half).magnitude();
    if res_asc != 0.0 && err != 0.0 {
        err = res_asc * (200.0 * err / res_asc).powf(1.5).min(1.0);
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        err = err.max(50.0 * f64::EPSILON * res_abs);
    }
    Segment {
        a,
        b,
        value: res_k * half,
        error: err,
    }
}

/// Adaptive Gauss–Kronrod integration of `f` over `[a, b]`.
///
/// The interval with the largest error estimate is bisected until the
/// total estimate falls below `max(tol.abs, tol.rel * |I|)`.
pub fn integrate<T, F>(mut f: F, a: f64, b: f64, tol: Tolerance) -> Result<Estimate<T>>
where
    T: QuadValue,
    F: FnMut(f64) -> T,
{
    if a == b {
        return Ok(Estimate {
            value: T::default(),
            error: 0.0,
        });
    }
    let mut heap = BinaryHeap::new();
    let first = gk15(&mut f, a, b);
    let mut total = first.value;
    let mut total_err = first.error;
    heap.push(first);
    loop {
        let target = tol.abs.max(tol.rel * total.magnitude());
        if total_err <= target {
            break;
        }
        if heap.len() >= tol.max_intervals {
            return Err(Error::QuadratureNotConverged {
                achieved: total_err,
                requested: target,
            });
        }
        let worst = heap.pop().expect("heap is never empty");
        let mid = 0.5 * (worst.a + worst.b);
        if (worst.b - worst.a).abs() <= 4.0 * f64::EPSILON * (mid.abs() + 1.0) {
            return Err(Error::QuadratureNotConverged {
                achieved: total_err,
                requested: target,
            });
        }
        let left = gk15(&mut f, worst.a, mid);
        let right = gk15(&mut f, mid, worst.b);
        total = total - worst.value + left.value + right.value;
        total_err += left.error + right.error - worst.error;
        heap.push(left);
        heap.push(right);
    }
    // Re-sum from the leaves so that cancellation in the running total
    // does not leak into the result.
    let mut value = T::default();
    let mut error = 0.0;
    for s in heap.iter() {
        value += s.value;
        error += s.error;
    }
    Ok(Estimate { value, error })
}

/// Gauss–Legendre nodes (ascending) and weights on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..(n + 1) / 2 {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, p_prev) = legendre_pair(n, x);
            dp = n as f64 * (x * p - p_prev) / (x * x - 1.0);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (p, p_prev) = legendre_pair(n, x);
        dp = if p.is_finite() {
            n as f64 * (x * p - p_prev) / (x * x - 1.0)
        } else {
            dp
        };
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

/// `(P_n(x), P_{n-1}(x))`.
fn legendre_pair(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    (p1, p0)
}

fn legendre_table(max: usize, x: f64) -> Vec<f64> {
    let mut p = vec![0.0; max + 1];
    p[0] = 1.0;
    if max >= 1 {
        p[1] = x;
    }
    for k in 2..=max {
        let kf = k as f64;
        p[k] = ((2.0 * kf - 1.0) * x * p[k - 1] - (kf - 1.0) * p[k - 2]) / kf;
    }
    p
}

/// Number of Gauss–Legendre nodes per panel.
pub const PANEL_ORDER: usize = 16;

/// A Gauss–Legendre panel rule with a spectral integration matrix.
///
/// For node values `v` on a panel of width `h`, `cumulative` returns the
/// integral from the panel start to each node, exact for polynomials of
/// degree `PANEL_ORDER - 1`.
#[derive(Debug, Clone)]
pub struct PanelRule {
    pub nodes: [f64; PANEL_ORDER],
    pub weights: [f64; PANEL_ORDER],
    cumint: [[f64; PANEL_ORDER]; PANEL_ORDER],
    analysis: [[f64; PANEL_ORDER]; PANEL_ORDER],
    synthesis: [[f64; PANEL_ORDER]; PANEL_ORDER],
}

impl PanelRule {
    /// Shared instance.
    pub fn get() -> &'static PanelRule {
        static RULE: OnceLock<PanelRule> = OnceLock::new();
        RULE.get_or_init(PanelRule::build)
    }

    fn build() -> Self {
        let (x, w) = gauss_legendre(PANEL_ORDER);
        let mut nodes = [0.0; PANEL_ORDER];
        let mut weights = [0.0; PANEL_ORDER];
        nodes.copy_from_slice(&x);
        weights.copy_from_slice(&w);
        // analysis[n][j] maps node values to Legendre coefficients; discrete
        // orthogonality is exact for products of degree <= 2*ORDER - 2.
        let mut analysis = [[0.0; PANEL_ORDER]; PANEL_ORDER];
        for (j, &xj) in nodes.iter().enumerate() {
            let p = legendre_table(PANEL_ORDER - 1, xj);
            for n in 0..PANEL_ORDER {
                analysis[n][j] = (2.0 * n as f64 + 1.0) / 2.0 * weights[j] * p[n];
            }
        }
        let mut cumint = [[0.0; PANEL_ORDER]; PANEL_ORDER];
        let mut synthesis = [[0.0; PANEL_ORDER]; PANEL_ORDER];
        for (i, &xi) in nodes.iter().enumerate() {
            let p = legendre_table(PANEL_ORDER, xi);
            synthesis[i].copy_from_slice(&p[..PANEL_ORDER]);
            for n in 0..PANEL_ORDER {
                // Integral of P_n from -1 to x_i.
                let q = if n == 0 {
                    xi + 1.0
                } else {
                    (p[n + 1] - p[n - 1]) / (2.0 * n as f64 + 1.0)
                };
                for j in 0..PANEL_ORDER {
                    cumint[i][j] += q * analysis[n][j];
                }
            }
        }
        Self {
            nodes,
            weights,
            cumint,
            analysis,
            synthesis,
        }
    }

    /// Legendre coefficients of the interpolant through node values.
    #[inline]
    pub fn coefficients<T: QuadValue>(&self, v: &[T; PANEL_ORDER]) -> [T; PANEL_ORDER] {
        let mut c = [T::default(); PANEL_ORDER];
        for (cn, row) in c.iter_mut().zip(self.analysis.iter()) {
            for (vj, &a) in v.iter().zip(row.iter()) {
                *cn += *vj * a;
            }
        }
        c
    }

    /// Node values of a Legendre series.
    #[inline]
    pub fn synthesize<T: QuadValue>(&self, c: &[T; PANEL_ORDER]) -> [T; PANEL_ORDER] {
        let mut v = [T::default(); PANEL_ORDER];
        for (vi, row) in v.iter_mut().zip(self.synthesis.iter()) {
            for (cn, &p) in c.iter().zip(row.iter()) {
                *vi += *cn * p;
            }
        }
        v
    }

    /// Node abscissae on `[a, a + h]`.
    #[inline]
    pub fn abscissae(&self, a: f64, h: f64) -> [f64; PANEL_ORDER] {
        let half = 0.5 * h;
        let mut t = [0.0; PANEL_ORDER];
        for (tj, &x) in t.iter_mut().zip(self.nodes.iter()) {
            *tj = a + half * (x + 1.0);
        }
        t
    }

    #[inline]
    pub fn integral<T: QuadValue>(&self, h: f64, v: &[T; PANEL_ORDER]) -> T {
        let mut s = T::default();
        for (vj, &w) in v.iter().zip(self.weights.iter()) {
            s += *vj * w;
        }
        s * (0.5 * h)
    }

    #[inline]
    pub fn cumulative<T: QuadValue>(&self, h: f64, v: &[T; PANEL_ORDER]) -> [T; PANEL_ORDER] {
        let mut out = [T::default(); PANEL_ORDER];
        for (o, row) in out.iter_mut().zip(self.cumint.iter()) {
            let mut s = T::default();
            for (vj, &c) in v.iter().zip(row.iter()) {
                s += *vj * c;
            }
            *o = s * (0.5 * h);
        }
        out
    }

    /// `∫ e^{ik(t - m)} u(t) dt` over a panel of width `h` with midpoint `m`,
    /// from node values of `u`. The oscillation is integrated exactly
    /// against the Legendre interpolant, so `k h` may be arbitrarily large.
    pub fn filon(&self, h: f64, k: f64, v: &[Complex64; PANEL_ORDER]) -> Complex64 {
        let omega = 0.5 * k * h;
        let jn = spherical_bessel_table(PANEL_ORDER - 1, omega);
        let mut total = Complex64::new(0.0, 0.0);
        // i^n cycles through 1, i, -1, -i.
        let phases = [
            Complex64::new(1.0, 0.0),
            Complex64::new(0.0, 1.0),
            Complex64::new(-1.0, 0.0),
            Complex64::new(0.0, -1.0),
        ];
        for n in 0..PANEL_ORDER {
            let mut c = Complex64::new(0.0, 0.0);
            for (vj, &a) in v.iter().zip(self.analysis[n].iter()) {
                c += *vj * a;
            }
            total += c * phases[n % 4] * (2.0 * jn[n]);
        }
        total * (0.5 * h)
    }
}

/// Spherical Bessel functions `j_0 .. j_max` at `x`.
pub fn spherical_bessel_table(max: usize, x: f64) -> Vec<f64> {
    let mut out = vec![0.0; max + 1];
    if x == 0.0 {
        out[0] = 1.0;
        return out;
    }
    let ax = x.abs();
    if ax < 1.0 {
        // Power series, converges quickly for |x| < 1.
        let mut prefactor = 1.0;
        for (n, o) in out.iter_mut().enumerate() {
            if n > 0 {
                prefactor *= ax / (2.0 * n as f64 + 1.0);
            }
            let mut term = 1.0;
            let mut sum = 1.0;
            let q = -0.5 * ax * ax;
            for m in 1..40 {
                term *= q / (m as f64 * (2.0 * (n + m) as f64 + 1.0));
                sum += term;
                if term.abs() < 1e-17 * sum.abs() {
                    break;
                }
            }
            *o = prefactor * sum;
        }
    } else if ax > max as f64 + 1.0 {
        // Upward recurrence is stable while n < x.
        let (s, c) = ax.sin_cos();
        out[0] = s / ax;
        if max >= 1 {
            out[1] = s / (ax * ax) - c / ax;
        }
        for n in 1..max {
            out[n + 1] = (2.0 * n as f64 + 1.0) / ax * out[n] - out[n - 1];
        }
    } else {
        // Miller's backward recurrence, normalised against j0 or j1.
        let start = max + 30 + ax as usize;
        let mut next = 0.0;
        let mut cur = 1e-30;
        let mut tmp = vec![0.0; start + 1];
        tmp[start] = cur;
        for n in (1..=start).rev() {
            let prev = (2.0 * n as f64 + 1.0) / ax * cur - next;
            next = cur;
            cur = prev;
            tmp[n - 1] = cur;
            if cur.abs() > 1e250 {
                for t in tmp.iter_mut().skip(n - 1) {
                    *t *= 1e-250;
                }
                cur *= 1e-250;
                next *= 1e-250;
            }
        }
        let (s, c) = ax.sin_cos();
        let j0 = s / ax;
        let j1 = s / (ax * ax) - c / ax;
        let scale = if j0.abs() >= j1.abs() {
            j0 / tmp[0]
        } else {
            j1 / tmp[1]
        };
        for (o, t) in out.iter_mut().zip(tmp.iter()) {
            *o = t * scale;
        }
    }
    if x < 0.0 {
        for (n, o) in out.iter_mut().enumerate() {
            if n % 2 == 1 {
                *o = -*o;
            }
        }
    }
    out
}

/// Wynn's epsilon algorithm on a sequence of partial sums. Returns the
/// accelerated limit and an error estimate.
pub fn wynn_epsilon(sums: &[f64]) -> (f64, f64) {
    let n = sums.len();
    match n {
        0 => return (0.0, f64::INFINITY),
        1 => return (sums[0], f64::INFINITY),
        _ => {}
    }
    let mut best = sums[n - 1];
    let mut best_err = (sums[n - 1] - sums[n - 2]).abs();
    let mut prev = vec![0.0; n + 1];
    let mut cur = sums.to_vec();
    let mut column = 0usize;
    while cur.len() >= 2 {
        let mut next = Vec::with_capacity(cur.len() - 1);
        for i in 0..cur.len() - 1 {
            let diff = cur[i + 1] - cur[i];
            if diff == 0.0 {
                // The sequence has converged exactly at this level.
                if column % 2 == 0 {
                    return (cur[i + 1], 0.0);
                }
                next.push(f64::INFINITY);
            } else {
                next.push(prev[i + 1] + 1.0 / diff);
            }
        }
        column += 1;
        if column % 2 == 0 && next.len() >= 2 {
            let m = next.len();
            let err = (next[m - 1] - next[m - 2]).abs();
            if next[m - 1].is_finite() && err < best_err {
                best = next[m - 1];
                best_err = err;
            }
        }
        prev = cur;
        cur = next;
    }
    (best, best_err)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Trig {
    Cos,
    Sin,
}

/// `∫_start^∞ x^power trig(x) dx` for `power < 0`, summed over half periods
/// and accelerated with the epsilon algorithm.
pub fn fourier_tail(power: f64, trig: Trig, start: f64, tol: Tolerance) -> Result<Estimate<f64>> {
    assert!(power < 0.0 && start > 0.0);
    let terms = 48;
    let mut sums = Vec::with_capacity(terms);
    let mut acc = 0.0;
    let mut a = start;
    for _ in 0..terms {
        let b = a + PI;
        let piece = integrate(
            |x: f64| {
                let t = match trig {
                    Trig::Cos => x.cos(),
                    Trig::Sin => x.sin(),
                };
                x.powf(power) * t
            },
            a,
            b,
            Tolerance::new(tol.abs * 1e-3, tol.rel),
        )?;
        acc += piece.value;
        sums.push(acc);
        a = b;
    }
    let (value, error) = wynn_epsilon(&sums);
    if error > tol.abs.max(tol.rel * value.abs()) * 10.0 {
        return Err(Error::QuadratureNotConverged {
            achieved: error,
            requested: tol.abs,
        });
    }
    Ok(Estimate { value, error })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_integrates_polynomials_exactly() {
        let (x, w) = gauss_legendre(PANEL_ORDER);
        let s: f64 = w.iter().sum();
        assert!((s - 2.0).abs() < 1e-14);
        // x^30 has integral 2/31 on [-1,1].
        let m: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(30)).sum();
        assert!((m - 2.0 / 31.0).abs() < 1e-14);
    }

    #[test]
    fn adaptive_handles_endpoint_singularity() {
        let est = integrate(|x: f64| x.sqrt(), 0.0, 1.0, Tolerance::new(1e-12, 1e-12)).unwrap();
        assert!((est.value - 2.0 / 3.0).abs() < 1e-11);
    }

    #[test]
    fn adaptive_reports_non_convergence() {
        let tol = Tolerance {
            abs: 1e-14,
            rel: 0.0,
            max_intervals: 3,
        };
        let r = integrate(|x: f64| (50.0 * x).sin().abs(), 0.0, 10.0, tol);
        assert!(matches!(r, Err(Error::QuadratureNotConverged { .. })));
    }

    #[test]
    fn panel_cumulative_matches_antiderivative() {
        let rule = PanelRule::get();
        let (a, h) = (0.3, 0.5);
        let t = rule.abscissae(a, h);
        let mut v = [0.0; PANEL_ORDER];
        for (vj, tj) in v.iter_mut().zip(t.iter()) {
            *vj = tj.cos();
        }
        let c = rule.cumulative(h, &v);
        for (cj, tj) in c.iter().zip(t.iter()) {
            assert!((cj - (tj.sin() - a.sin())).abs() < 1e-15);
        }
    }

    #[test]
    fn filon_matches_resolved_quadrature() {
        let rule = PanelRule::get();
        let (a, h, k) = (0.0, 0.25, 300.0);
        let t = rule.abscissae(a, h);
        let mut v = [Complex64::new(0.0, 0.0); PANEL_ORDER];
        for (vj, tj) in v.iter_mut().zip(t.iter()) {
            *vj = Complex64::new((-tj * tj).exp(), tj.sin());
        }
        let m = a + 0.5 * h;
        let filon = rule.filon(h, k, &v);
        let direct = integrate(
            |s: f64| {
                Complex64::from_polar(1.0, k * (s - m)) * Complex64::new((-s * s).exp(), s.sin())
            },
            a,
            a + h,
            Tolerance::new(1e-14, 1e-14),
        )
        .unwrap();
        assert!((filon - direct.value).norm() < 1e-13, "{filon} vs {:?}", direct.value);
    }

    #[test]
    fn spherical_bessel_branches_agree_with_closed_forms() {
        for &x in &[0.3, 2.5, 7.0, 40.0, -3.1] {
            let j = spherical_bessel_table(15, x);
            let (s, c) = (x.sin(), x.cos());
            let j2 = (3.0 / (x * x) - 1.0) * s / x - 3.0 * c / (x * x);
            assert!((j[0] - s / x).abs() < 1e-14);
            assert!((j[2] - j2).abs() < 1e-13, "x = {x}");
        }
        // Small-x asymptotics: j_n(x) ~ x^n / (2n+1)!!
        let j = spherical_bessel_table(15, 1e-3);
        let mut dfact = 1.0;
        for n in 1..=15 {
            dfact *= 2.0 * n as f64 + 1.0;
        }
        assert!((j[15] / (1e-45 / dfact) - 1.0).abs() < 1e-6);
    }

    #[test]
    fn wynn_accelerates_alternating_series() {
        // ln 2 = 1 - 1/2 + 1/3 - ...
        let mut sums = Vec::new();
        let mut acc = 0.0;
        for n in 1..=20 {
            acc += if n % 2 == 1 { 1.0 } else { -1.0 } / n as f64;
            sums.push(acc);
        }
        let (v, _) = wynn_epsilon(&sums);
        assert!((v - 2f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn fourier_tail_of_sine_over_x() {
        // ∫_π^∞ sin x / x dx = π/2 - Si(π)
        let si_pi = 1.851_937_051_982_466_2;
        let est = fourier_tail(-1.0, Trig::Sin, PI, Tolerance::new(1e-12, 1e-12)).unwrap();
        assert!((est.value - (PI / 2.0 - si_pi)).abs() < 1e-11);
    }
}
