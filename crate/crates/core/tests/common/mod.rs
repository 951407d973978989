#![allow(dead_code)]

use std::f64::consts::PI;

use fracmhd::random::{random_field, random_solenoidal, rng_from_seed};
use fracmhd::{Grid, SpectralField, VectorField};
use num_complex::Complex64;

pub fn grid(n: usize) -> Grid {
    Grid::new(2, n).unwrap()
}

pub fn band(g: Grid, kmax: f64, seed: u64) -> SpectralField {
    random_field(g, 0.0, kmax, &mut rng_from_seed(seed))
}

pub fn solenoidal(g: Grid, kmax: f64, seed: u64) -> VectorField {
    random_solenoidal(g, 1.0, kmax, 1.0, &mut rng_from_seed(seed))
}

/// Integer wave vectors resolvable on `g`, in storage order.
pub fn wave_vectors(g: Grid) -> Vec<Vec<i64>> {
    let n = g.n() as i64;
    let freq = |i: i64| if i <= n / 2 { i } else { i - n };
    (0..g.len())
        .map(|mut idx| {
            let mut k = vec![0; g.d()];
            for a in (0..g.d()).rev() {
                k[a] = freq((idx % g.n()) as i64);
                idx /= g.n();
            }
            k
        })
        .collect()
}

/// `Σ_k c_k e^{ik·x}` summed term by term.
pub fn evaluate(f: &SpectralField, x: &[f64]) -> Complex64 {
    wave_vectors(f.grid())
        .iter()
        .zip(f.coeffs())
        .map(|(k, c)| {
            let phase: f64 = k.iter().zip(x).map(|(&ka, xa)| ka as f64 * xa).sum();
            c * Complex64::from_polar(1.0, phase)
        })
        .sum()
}

/// Grid point `idx` of the uniform `n^d` lattice on `[0, 2π)^d`, last axis fastest.
pub fn point(d: usize, n: usize, mut idx: usize) -> Vec<f64> {
    let mut x = vec![0.0; d];
    for a in (0..d).rev() {
        x[a] = 2.0 * PI * (idx % n) as f64 / n as f64;
        idx /= n;
    }
    x
}

/// Real samples of `f` on an `m^d` lattice by direct summation.
pub fn samples_on(f: &SpectralField, m: usize) -> Vec<f64> {
    let d = f.grid().d();
    (0..m.pow(d as u32))
        .map(|i| evaluate(f, &point(d, m, i)).re)
        .collect()
}

pub fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}

pub fn max_coeff_diff(a: &SpectralField, b: &SpectralField) -> f64 {
    a.coeffs()
        .iter()
        .zip(b.coeffs())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

pub fn max_vec_diff(a: &VectorField, b: &VectorField) -> f64 {
    a.components()
        .iter()
        .zip(b.components())
        .map(|(x, y)| max_coeff_diff(x, y))
        .fold(0.0, f64::max)
}

/// The cutoff built from scratch: `1` below `3/4`, `0` above `4/3`.
pub fn chi_oracle(r: f64) -> f64 {
    let g = |t: f64| if t > 0.0 { (-1.0 / t).exp() } else { 0.0 };
    let t = (r - 0.75) / (4.0 / 3.0 - 0.75);
    1.0 - g(t) / (g(t) + g(1.0 - t))
}

pub fn psi_oracle(r: f64) -> f64 {
    chi_oracle(r / 2.0) - chi_oracle(r)
}
