//! Conversions between atomic units and the Hz·cm^s convention used for
//! interaction strengths. Energies are divided by Planck's constant.

/// Hartree energy over h, in Hz.
pub const HARTREE_HZ: f64 = 6.579_683_920_502e15;

/// Bohr radius in cm.
pub const BOHR_CM: f64 = 5.291_772_109_03e-9;

pub const CM_PER_UM: f64 = 1e-4;

/// `C_s` in atomic units to Hz·cm^s.
pub fn au_to_hz_cm(c_au: f64, s: u32) -> f64 {
    c_au * HARTREE_HZ * BOHR_CM.powi(s as i32)
}

pub fn hz_cm_to_au(c_hz: f64, s: u32) -> f64 {
    c_hz / (HARTREE_HZ * BOHR_CM.powi(s as i32))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let c = 4.97e22;
        assert!((hz_cm_to_au(au_to_hz_cm(c, 6), 6) / c - 1.0).abs() < 1e-15);
    }
}
