//! Pair interaction kernels `V(R) = C_s/R^s` and random atom ensembles.
//!
//! `C_s` is carried in atomic units with its sign: negative values are
//! attractive. The dimensionless coupling entering the dynamics is
//! `k_ij = 2π (C_s/h) T / R^s`, times `(1 − 3cos²θ)` for dipoles aligned
//! along `z`.

use std::f64::consts::PI;
use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::pulse::PulseSpec;
use crate::units::au_to_hz_cm;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Angular {
    Isotropic,
    AlignedDipole,
}

impl std::str::FromStr for Angular {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "isotropic" => Ok(Angular::Isotropic),
            "aligned-dipole" | "aligned_dipole" | "dipole" => Ok(Angular::AlignedDipole),
            other => Err(format!(
                "unknown angular form `{other}` (expected isotropic or aligned-dipole)"
            )),
        }
    }
}

impl Angular {
    pub fn name(self) -> &'static str {
        match self {
            Angular::Isotropic => "isotropic",
            Angular::AlignedDipole => "aligned-dipole",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InteractionKernel {
    pub s: u32,
    /// Signed `C_s` in atomic units.
    pub c_au: f64,
    pub angular: Angular,
}

impl InteractionKernel {
    pub fn new(s: u32, c_au: f64, angular: Angular) -> Result<Self> {
        let k = Self { s, c_au, angular };
        k.validate()?;
        Ok(k)
    }

    pub fn van_der_waals(c6_au: f64) -> Self {
        Self {
            s: 6,
            c_au: c6_au,
            angular: Angular::Isotropic,
        }
    }

    pub fn dipole(c3_au: f64, angular: Angular) -> Self {
        Self {
            s: 3,
            c_au: c3_au,
            angular,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.s != 3 && self.s != 6 {
            return Err(invalid("kernel.s", format!("{} is unsupported (use 3 or 6)", self.s)));
        }
        if self.angular == Angular::AlignedDipole && self.s != 3 {
            return Err(invalid("kernel.angular", "aligned-dipole requires s = 3"));
        }
        if !self.c_au.is_finite() {
            return Err(invalid("kernel.c_au", "must be finite"));
        }
        Ok(())
    }

    /// Same kernel with `C_s` multiplied by `a`.
    pub fn scaled(self, a: f64) -> Self {
        Self {
            c_au: self.c_au * a,
            ..self
        }
    }

    /// Signed `C_s/h` in Hz·cm^s.
    pub fn c_hz(&self) -> f64 {
        au_to_hz_cm(self.c_au, self.s)
    }

    pub fn is_attractive(&self) -> bool {
        self.c_au < 0.0
    }

    /// `|C_s| T` in cm^s.
    pub fn strength_time(&self, duration: f64) -> f64 {
        self.c_hz().abs() * duration
    }

    /// `(|C_s|T)^{3/s}`, volume per unit density in the averaged formulas.
    pub fn blockade_volume_scale(&self, duration: f64) -> f64 {
        self.strength_time(duration).powf(3.0 / self.s as f64)
    }

    /// Radius where `|k_ij| = 1` for the isotropic part, in cm.
    pub fn blockade_radius(&self, duration: f64) -> f64 {
        (2.0 * PI * self.strength_time(duration)).powf(1.0 / self.s as f64)
    }

    #[inline]
    pub fn angular_factor(&self, cos_theta: f64) -> f64 {
        match self.angular {
            Angular::Isotropic => 1.0,
            Angular::AlignedDipole => 1.0 - 3.0 * cos_theta * cos_theta,
        }
    }

    /// `k` at separation `r` (cm) and angle `θ` to the `z` axis.
    #[inline]
    pub fn coupling_at(&self, duration: f64, r: f64, cos_theta: f64) -> f64 {
        2.0 * PI * self.c_hz() * duration / r.powi(self.s as i32) * self.angular_factor(cos_theta)
    }

    /// `k_ij` for atoms at `ri`, `rj` (cm).
    pub fn coupling(&self, pulse: &PulseSpec, ri: [f64; 3], rj: [f64; 3]) -> Result<f64> {
        let d = [rj[0] - ri[0], rj[1] - ri[1], rj[2] - ri[2]];
        let r2 = d[0] * d[0] + d[1] * d[1] + d[2] * d[2];
        if r2 == 0.0 {
            return Err(Error::CoincidentPositions);
        }
        let r = r2.sqrt();
        Ok(self.coupling_at(pulse.duration, r, d[2] / r))
    }

    /// Symmetric coupling matrix with zero diagonal.
    pub fn coupling_matrix(&self, pulse: &PulseSpec, positions: &[[f64; 3]]) -> Result<Vec<Vec<f64>>> {
        let n = positions.len();
        let mut k = vec![vec![0.0; n]; n];
        for i in 0..n {
            for j in i + 1..n {
                let v = self.coupling(pulse, positions[i], positions[j])?;
                k[i][j] = v;
                k[j][i] = v;
            }
        }
        Ok(k)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Geometry {
    Box,
    Sphere,
}

impl std::str::FromStr for Geometry {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "box" => Ok(Geometry::Box),
            "sphere" => Ok(Geometry::Sphere),
            other => Err(format!("unknown geometry `{other}` (expected box or sphere)")),
        }
    }
}

impl Geometry {
    pub fn name(self) -> &'static str {
        match self {
            Geometry::Box => "box",
            Geometry::Sphere => "sphere",
        }
    }

    /// Box side or sphere radius for a given volume.
    pub fn extent_for_volume(self, volume: f64) -> f64 {
        match self {
            Geometry::Box => volume.cbrt(),
            Geometry::Sphere => (3.0 * volume / (4.0 * PI)).cbrt(),
        }
    }

    /// Distance from the centre to the nearest boundary.
    pub fn inner_radius(self, extent: f64) -> f64 {
        match self {
            Geometry::Box => 0.5 * extent,
            Geometry::Sphere => extent,
        }
    }

    pub fn contains(self, extent: f64, p: [f64; 3]) -> bool {
        match self {
            Geometry::Box => p.iter().all(|c| c.abs() <= 0.5 * extent),
            Geometry::Sphere => p[0] * p[0] + p[1] * p[1] + p[2] * p[2] <= extent * extent,
        }
    }

    pub fn sample_point<R: Rng>(self, extent: f64, rng: &mut R) -> [f64; 3] {
        match self {
            Geometry::Box => [
                extent * (rng.gen::<f64>() - 0.5),
                extent * (rng.gen::<f64>() - 0.5),
                extent * (rng.gen::<f64>() - 0.5),
            ],
            Geometry::Sphere => {
                let r = extent * rng.gen::<f64>().cbrt();
                let [x, y, z] = unit_vector(rng);
                [r * x, r * y, r * z]
            }
        }
    }
}

/// Isotropic random direction.
pub fn unit_vector<R: Rng>(rng: &mut R) -> [f64; 3] {
    let z: f64 = 2.0 * rng.gen::<f64>() - 1.0;
    let phi = 2.0 * PI * rng.gen::<f64>();
    let s = (1.0 - z * z).max(0.0).sqrt();
    [s * phi.cos(), s * phi.sin(), z]
}

/// Default cap on sampled atom counts.
pub const MAX_ATOMS: u64 = 10_000_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AtomEnsemble {
    /// Positions in cm, centred on the origin.
    pub positions: Vec<[f64; 3]>,
    pub rho: f64,
    pub geometry: Geometry,
    /// Box side or sphere radius, cm.
    pub extent: f64,
    pub seed: u64,
}

impl AtomEnsemble {
    /// `⌊ρV⌋` uniform i.i.d. positions, deterministic in `seed`.
    pub fn sample(rho: f64, geometry: Geometry, volume: f64, seed: u64) -> Result<Self> {
        Self::sample_capped(rho, geometry, volume, seed, MAX_ATOMS)
    }

    pub fn sample_capped(
        rho: f64,
        geometry: Geometry,
        volume: f64,
        seed: u64,
        max_atoms: u64,
    ) -> Result<Self> {
        if !(rho.is_finite() && rho > 0.0) {
            return Err(invalid("rho", "must be positive and finite"));
        }
        if !(volume.is_finite() && volume > 0.0) {
            return Err(invalid("volume", "must be positive and finite"));
        }
        let count = (rho * volume).floor();
        if count > max_atoms as f64 {
            return Err(Error::AtomCountOverflow {
                requested: count.min(u64::MAX as f64) as u64,
                limit: max_atoms,
            });
        }
        let n = count as usize;
        let extent = geometry.extent_for_volume(volume);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let positions = (0..n).map(|_| geometry.sample_point(extent, &mut rng)).collect();
        Ok(Self {
            positions,
            rho,
            geometry,
            extent,
            seed,
        })
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn volume(&self) -> f64 {
        match self.geometry {
            Geometry::Box => self.extent.powi(3),
            Geometry::Sphere => 4.0 / 3.0 * PI * self.extent.powi(3),
        }
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("x_cm,y_cm,z_cm\n");
        for p in &self.positions {
            let _ = writeln!(out, "{:.11e},{:.11e},{:.11e}", p[0], p[1], p[2]);
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pulse() -> PulseSpec {
        PulseSpec::square(37.5e-9)
    }

    #[test]
    fn magic_angle_zero() {
        let k = InteractionKernel::dipole(1e3, Angular::AlignedDipole);
        let c = 1.0 / 3f64.sqrt();
        let s = (1.0 - c * c).sqrt();
        let v = k.coupling(&pulse(), [0.0; 3], [3e-4 * s, 0.0, 3e-4 * c]).unwrap();
        assert!(v.abs() < 1e-12 * k.coupling_at(pulse().duration, 3e-4, 0.0).abs());
    }

    #[test]
    fn power_law_and_symmetry() {
        let k = InteractionKernel::van_der_waals(4.97e22);
        let a = k.coupling(&pulse(), [0.0; 3], [5e-4, 0.0, 0.0]).unwrap();
        let b = k.coupling(&pulse(), [0.0; 3], [10e-4, 0.0, 0.0]).unwrap();
        assert!((a / b - 64.0).abs() < 1e-12);
        let c = k.coupling(&pulse(), [10e-4, 0.0, 0.0], [0.0; 3]).unwrap();
        assert_eq!(b, c);
    }

    #[test]
    fn coupling_by_two_conversion_routes() {
        let k = InteractionKernel::van_der_waals(4.97e22);
        let direct = k.coupling(&pulse(), [0.0; 3], [5e-4, 0.0, 0.0]).unwrap();
        // Separately converted: R in bohr, energy in hartree, time in ħ/E_h.
        let r_bohr = 5e-4 / crate::units::BOHR_CM;
        let t_hartree = 37.5e-9 * crate::units::HARTREE_HZ;
        let other = 2.0 * PI * 4.97e22 / r_bohr.powi(6) * t_hartree;
        assert!((direct / other - 1.0).abs() < 1e-12);
    }

    #[test]
    fn coincident_positions_error() {
        let k = InteractionKernel::van_der_waals(1.0);
        assert_eq!(
            k.coupling(&pulse(), [1.0; 3], [1.0; 3]),
            Err(Error::CoincidentPositions)
        );
    }

    #[test]
    fn kernel_validation() {
        assert!(InteractionKernel::new(4, 1.0, Angular::Isotropic).is_err());
        assert!(InteractionKernel::new(6, 1.0, Angular::AlignedDipole).is_err());
        assert!(InteractionKernel::new(3, 1.0, Angular::AlignedDipole).is_ok());
    }

    #[test]
    fn ensemble_count_containment_determinism() {
        for g in [Geometry::Box, Geometry::Sphere] {
            let e = AtomEnsemble::sample(1e10, g, 1e-8, 1).unwrap();
            assert_eq!(e.len(), 100);
            assert!(e.positions.iter().all(|p| g.contains(e.extent, *p)));
            let again = AtomEnsemble::sample(1e10, g, 1e-8, 1).unwrap();
            assert_eq!(e, again);
        }
        assert!(matches!(
            AtomEnsemble::sample_capped(1e10, Geometry::Box, 1.0, 1, 1000),
            Err(Error::AtomCountOverflow { .. })
        ));
    }

    #[test]
    fn ensemble_csv_has_header_and_rows() {
        let e = AtomEnsemble::sample(1e10, Geometry::Box, 1e-9, 3).unwrap();
        let csv = e.to_csv();
        assert_eq!(csv.lines().count(), e.len() + 1);
        assert!(csv.starts_with("x_cm,y_cm,z_cm"));
    }
}
