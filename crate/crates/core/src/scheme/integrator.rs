use super::SchemeConfig;
use crate::spectral::{symbol, FieldLike, Grid, VectorField};

/// `(1 - e^{-z}) / z`, continuous at 0.
pub fn phi1(z: f64) -> f64 {
    if z.abs() < 1e-5 {
        1.0 - z / 2.0 + z * z / 6.0 - z * z * z / 24.0
    } else {
        -(-z).exp_m1() / z
    }
}

/// Dissipation rate `ν|k|^{2α}` of every mode. The mean is never damped.
pub fn dissipation_rates(grid: Grid, alpha: f64, nu: f64) -> Vec<f64> {
    let modes = grid.modes();
    modes
        .abs
        .iter()
        .map(|&a| if a == 0.0 { 0.0 } else { nu * symbol(a, alpha) })
        .collect()
}

/// Exact solution operator of `∂_t u + ν(-Δ)^α u = f` over one step with
/// `f` frozen: `û ← e^{-λh} û + h φ₁(λh) f̂`.
#[derive(Clone, Debug)]
pub struct Propagator {
    decay: Vec<f64>,
    gain: Vec<f64>,
    h: f64,
}

impl Propagator {
    pub fn new(grid: Grid, alpha: f64, nu: f64, h: f64) -> Self {
        let rates = dissipation_rates(grid, alpha, nu);
        let decay = rates.iter().map(|l| (-l * h).exp()).collect();
        let gain = rates.iter().map(|l| h * phi1(l * h)).collect();
        Self { decay, gain, h }
    }

    pub fn step(&self) -> f64 {
        self.h
    }

    /// `e^{-λh} û`.
    pub fn decay<F: FieldLike>(&self, u: &F) -> F {
        u.map_parts(|c| c.multiply(|i| self.decay[i]))
    }

    /// One exponential-Euler step.
    pub fn advance(&self, u: &VectorField, forcing: &VectorField) -> VectorField {
        u.zip_with(forcing, |a, f| {
            let mut out = a.multiply(|i| self.decay[i]);
            out.axpy_scaled(f, &self.gain);
            out
        })
    }
}

/// Advance the velocity by `dt` under a frozen, already projected forcing.
pub fn velocity_substep(
    u_prev: &VectorField,
    forcing: &VectorField,
    cfg: &SchemeConfig,
    dt: f64,
) -> VectorField {
    Propagator::new(u_prev.grid(), cfg.alpha, cfg.nu, dt).advance(u_prev, forcing)
}
