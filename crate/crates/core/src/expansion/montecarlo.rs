//! Sampling estimate of the averaged `I4`: a test atom at the centre of a
//! random uniform cloud, with the finite pair sum averaged over clouds.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{PairIntegrator, QuadOptions};
use crate::error::{invalid, Error, Result};
use crate::interactions::{Geometry, InteractionKernel};
use crate::pulse::PulseSpec;
use crate::summation::NeumaierSum;

/// Minimum distance from the test atom to the cloud boundary, in blockade
/// radii.
pub const MIN_PADDING: f64 = 5.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McOptions {
    pub geometry: Geometry,
    /// Box side or sphere radius, cm.
    pub extent: f64,
    pub quad: QuadOptions,
}

impl McOptions {
    /// Cloud sized to hold `atoms` partners at density `rho`.
    pub fn with_atoms(geometry: Geometry, atoms: usize, rho: f64) -> Self {
        Self {
            geometry,
            extent: geometry.extent_for_volume(atoms as f64 / rho),
            quad: QuadOptions {
                verify: false,
                ..QuadOptions::default()
            },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub mean: f64,
    pub stderr: f64,
    pub samples: usize,
    pub atoms: usize,
}

/// Mean and standard error of `I4` over `n_samples` clouds. Sample `i` uses
/// stream `i` of a ChaCha generator keyed by `seed`, so the result does not
/// depend on how samples are spread over threads.
pub fn i4_montecarlo(
    p: &PulseSpec,
    kernel: &InteractionKernel,
    rho: f64,
    opts: &McOptions,
    n_samples: usize,
    seed: u64,
) -> Result<McEstimate> {
    kernel.validate()?;
    if n_samples < 2 {
        return Err(invalid("mc.samples", "need at least two samples"));
    }
    if !(rho > 0.0 && rho.is_finite()) {
        return Err(invalid("rho", "must be positive and finite"));
    }
    let reach = opts.geometry.inner_radius(opts.extent);
    let required = MIN_PADDING * kernel.blockade_radius(p.duration);
    if reach < required {
        return Err(Error::InsufficientPadding {
            extent: reach,
            required,
        });
    }
    let volume = match opts.geometry {
        Geometry::Box => opts.extent.powi(3),
        Geometry::Sphere => 4.0 / 3.0 * std::f64::consts::PI * opts.extent.powi(3),
    };
    let atoms = (rho * volume).floor() as usize;
    let integ = PairIntegrator::new(p, p.tau_end, &opts.quad)?;

    let values: Vec<Result<f64>> = (0..n_samples)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i as u64);
            let mut sum = NeumaierSum::new();
            for _ in 0..atoms {
                let r = opts.geometry.sample_point(opts.extent, &mut rng);
                let k = kernel.coupling(p, [0.0; 3], r)?;
                sum.add(integ.value(k)?.value);
            }
            Ok(sum.value())
        })
        .collect();

    let mut samples = Vec::with_capacity(n_samples);
    for v in values {
        samples.push(v?);
    }
    let n = samples.len() as f64;
    let mean = samples.iter().copied().collect::<NeumaierSum>().value() / n;
    let var = samples
        .iter()
        .map(|v| (v - mean) * (v - mean))
        .collect::<NeumaierSum>()
        .value()
        / (n - 1.0);
    Ok(McEstimate {
        mean,
        stderr: (var / n).sqrt(),
        samples: n_samples,
        atoms,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_strength_gives_exact_zero() {
        let p = PulseSpec::square(1e-8);
        let k = InteractionKernel::van_der_waals(0.0);
        let opts = McOptions {
            geometry: Geometry::Sphere,
            extent: 1e-3,
            quad: QuadOptions::default(),
        };
        let e = i4_montecarlo(&p, &k, 1e9, &opts, 4, 7).unwrap();
        assert_eq!(e.mean, 0.0);
        assert_eq!(e.stderr, 0.0);
    }

    #[test]
    fn padding_is_enforced() {
        let p = PulseSpec::square(1e-8);
        let k = InteractionKernel::van_der_waals(1e22);
        let rb = k.blockade_radius(p.duration);
        let opts = McOptions {
            geometry: Geometry::Sphere,
            extent: 2.0 * rb,
            quad: QuadOptions::default(),
        };
        assert!(matches!(
            i4_montecarlo(&p, &k, 1e9, &opts, 4, 7),
            Err(Error::InsufficientPadding { .. })
        ));
    }
}
