//! Seeded band-limited random fields.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::spectral::{leray_project, Grid, SpectralField, VectorField};

pub type FieldRng = ChaCha8Rng;

pub fn rng_from_seed(seed: u64) -> FieldRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Real field with Gaussian coefficients on `kmin <= |k| <= kmax`.
///
/// Nyquist modes are never populated. The result is not normalized.
pub fn random_field(grid: Grid, kmin: f64, kmax: f64, rng: &mut FieldRng) -> SpectralField {
    let modes = grid.modes();
    let mut f = SpectralField::from_spectrum(grid, |_| {
        let re: f64 = StandardNormal.sample(rng);
        let im: f64 = StandardNormal.sample(rng);
        num_complex::Complex64::new(re, im)
    });
    let band = f.multiply(|i| {
        let a = modes.abs[i];
        if !modes.nyquist[i] && a >= kmin && a <= kmax {
            1.0
        } else {
            0.0
        }
    });
    f = band;
    f.hermitian_symmetrize();
    f
}

/// Mean-free solenoidal field on `kmin <= |k| <= kmax` scaled to RMS `amplitude`.
pub fn random_solenoidal(
    grid: Grid,
    kmin: f64,
    kmax: f64,
    amplitude: f64,
    rng: &mut FieldRng,
) -> VectorField {
    let kmin = kmin.max(1.0);
    let comps = (0..grid.d())
        .map(|_| random_field(grid, kmin, kmax, rng))
        .collect();
    let v = leray_project(&VectorField::new(comps).expect("components share a grid"));
    normalize_rms(&v, amplitude)
}

/// Rescale so that `‖v‖_{L²} / |T^d|^{1/2}` equals `amplitude`.
pub fn normalize_rms(v: &VectorField, amplitude: f64) -> VectorField {
    let rms = v.l2_norm() / v.grid().volume().sqrt();
    if rms == 0.0 {
        return v.clone();
    }
    v * (amplitude / rms)
}
