//! Scalar and vector fields stored as Fourier coefficients.

use std::collections::HashMap;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64;

use super::fft;
use super::grid::{Grid, MAX_DIM};
use crate::error::{Error, Result};

/// Relative divergence below which a vector field is certified solenoidal.
pub const SOLENOIDAL_TOL: f64 = 1e-12;

/// One scalar field on the torus: `f(x) = Σ_k c_k e^{ik·x}`.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralField {
    grid: Grid,
    coeffs: Vec<Complex64>,
}

impl SpectralField {
    pub fn zeros(grid: Grid) -> Self {
        Self {
            grid,
            coeffs: vec![Complex64::default(); grid.len()],
        }
    }

    pub fn from_coeffs(grid: Grid, coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.len() != grid.len() {
            return Err(Error::SampleCount {
                expected: grid.len(),
                got: coeffs.len(),
            });
        }
        Ok(Self { grid, coeffs })
    }

    /// Build coefficients from a function of the integer wave vector.
    pub fn from_spectrum(grid: Grid, mut f: impl FnMut(&[f64]) -> Complex64) -> Self {
        let modes = grid.modes();
        let coeffs = modes.k.iter().map(|k| f(&k[..grid.d()])).collect();
        Self { grid, coeffs }
    }

    /// Sample a real function of position and transform it.
    pub fn from_fn(grid: Grid, f: impl Fn(&[f64]) -> f64) -> Self {
        let samples: Vec<f64> = (0..grid.len())
            .map(|i| f(&grid.point(i)[..grid.d()]))
            .collect();
        Self::from_physical(grid, &samples).expect("sample count matches grid")
    }

    /// Forward transform of real samples on the grid.
    pub fn from_physical(grid: Grid, samples: &[f64]) -> Result<Self> {
        if samples.len() != grid.len() {
            return Err(Error::SampleCount {
                expected: grid.len(),
                got: samples.len(),
            });
        }
        let mut buf: Vec<Complex64> = samples.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        fft::forward(&mut buf, grid.d(), grid.n());
        Ok(Self { grid, coeffs: buf })
    }

    /// A single complex exponential `amplitude · e^{ik·x}`.
    pub fn mode(grid: Grid, k: &[i64], amplitude: Complex64) -> Result<Self> {
        let idx = grid.index_of(k).ok_or_else(|| {
            crate::error::invalid("k", format!("wave vector {k:?} is not resolvable"))
        })?;
        let mut f = Self::zeros(grid);
        f.coeffs[idx] = amplitude;
        Ok(f)
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<Complex64> {
        self.coeffs
    }

    /// Coefficient at integer wave vector `k` (zero if not resolvable).
    pub fn coeff(&self, k: &[i64]) -> Complex64 {
        self.grid
            .index_of(k)
            .map(|i| self.coeffs[i])
            .unwrap_or_default()
    }

    /// Complex physical samples.
    pub fn to_physical_complex(&self) -> Vec<Complex64> {
        let mut buf = self.coeffs.clone();
        fft::inverse(&mut buf, self.grid.d(), self.grid.n());
        buf
    }

    /// Real parts of the physical samples.
    pub fn to_physical(&self) -> Vec<f64> {
        self.to_physical_complex()
            .into_iter()
            .map(|z| z.re)
            .collect()
    }

    /// Multiply every coefficient by a real radial-or-not multiplier of the mode index.
    pub fn multiply(&self, mut m: impl FnMut(usize) -> f64) -> Self {
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(i, c)| c * m(i))
            .collect();
        Self {
            grid: self.grid,
            coeffs,
        }
    }

    /// Multiply by a complex multiplier of the mode index.
    pub fn multiply_complex(&self, mut m: impl FnMut(usize) -> Complex64) -> Self {
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(i, c)| c * m(i))
            .collect();
        Self {
            grid: self.grid,
            coeffs,
        }
    }

    /// `‖f‖_{L²}` by Parseval.
    pub fn l2_norm(&self) -> f64 {
        self.coeff_l2() * self.grid.volume().sqrt()
    }

    /// Plain l² norm of the coefficient vector.
    pub fn coeff_l2(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// Spatial mean (the `k = 0` coefficient).
    pub fn mean(&self) -> Complex64 {
        self.coeffs[0]
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| *c == Complex64::default())
    }

    /// Largest `|c(-k) - conj c(k)|` over non-Nyquist modes.
    pub fn hermitian_defect(&self) -> f64 {
        let modes = self.grid.modes();
        self.coeffs
            .iter()
            .enumerate()
            .filter(|(i, _)| !modes.nyquist[*i])
            .map(|(i, c)| (self.coeffs[modes.neg[i]] - c.conj()).norm())
            .fold(0.0, f64::max)
    }

    /// Project onto real fields: `c(k) <- (c(k) + conj c(-k)) / 2`.
    pub fn hermitian_symmetrize(&mut self) {
        let modes = self.grid.modes();
        let old = self.coeffs.clone();
        for (i, c) in self.coeffs.iter_mut().enumerate() {
            *c = 0.5 * (old[i] + old[modes.neg[i]].conj());
        }
    }

    /// Zero every mode carrying an `n/2` component.
    pub fn drop_nyquist(&mut self) {
        let modes = self.grid.modes();
        for (c, &ny) in self.coeffs.iter_mut().zip(&modes.nyquist) {
            if ny {
                *c = Complex64::default();
            }
        }
    }

    /// Spectral interpolation / truncation onto another grid of the same dimension.
    pub fn resample(&self, target: Grid) -> Result<Self> {
        if target.d() != self.grid.d() {
            return Err(Error::GridMismatch {
                expected_d: self.grid.d(),
                expected_n: self.grid.n(),
                got_d: target.d(),
                got_n: target.n(),
            });
        }
        let src = self.grid.modes();
        let mut out = Self::zeros(target);
        let d = target.d();
        let mut kk = [0i64; MAX_DIM];
        for (i, c) in self.coeffs.iter().enumerate() {
            if src.nyquist[i] {
                continue;
            }
            for (dst, &k) in kk.iter_mut().zip(&src.k[i][..d]) {
                *dst = k as i64;
            }
            if let Some(j) = target.index_of(&kk[..d]) {
                if !target.modes().nyquist[j] {
                    out.coeffs[j] = *c;
                }
            }
        }
        Ok(out)
    }

    /// Physical samples of the zero-padded field on an `m^d` grid.
    ///
    /// Nyquist modes are dropped, so real fields stay real.
    pub fn padded_physical(&self, m: usize) -> Vec<Complex64> {
        let map = pad_map(self.grid, m);
        let mut buf = vec![Complex64::default(); m.pow(self.grid.d() as u32)];
        for (c, &t) in self.coeffs.iter().zip(map.iter()) {
            if t != usize::MAX {
                buf[t] = *c;
            }
        }
        fft::inverse(&mut buf, self.grid.d(), m);
        buf
    }

    /// Inverse of [`padded_physical`](Self::padded_physical): transform `m^d`
    /// samples and keep the modes resolvable on `grid` (Nyquist dropped).
    pub fn from_padded_physical(grid: Grid, m: usize, mut samples: Vec<Complex64>) -> Self {
        fft::forward(&mut samples, grid.d(), m);
        let map = pad_map(grid, m);
        let coeffs = map
            .iter()
            .map(|&t| {
                if t == usize::MAX {
                    Complex64::default()
                } else {
                    samples[t]
                }
            })
            .collect();
        Self { grid, coeffs }
    }

    pub(crate) fn coeffs_mut(&mut self) -> &mut [Complex64] {
        &mut self.coeffs
    }

    pub(crate) fn axpy(&mut self, a: f64, x: &SpectralField) {
        for (c, xc) in self.coeffs.iter_mut().zip(&x.coeffs) {
            *c += a * xc;
        }
    }

    /// `self += w ⊙ x` with a per-mode weight.
    pub(crate) fn axpy_scaled(&mut self, x: &SpectralField, w: &[f64]) {
        for ((c, xc), w) in self.coeffs.iter_mut().zip(&x.coeffs).zip(w) {
            *c += w * xc;
        }
    }
}

/// Destination index on the `m` grid for every non-Nyquist mode of `grid`.
fn pad_map(grid: Grid, m: usize) -> Arc<Vec<usize>> {
    type Cache = Mutex<HashMap<(Grid, usize), Arc<Vec<usize>>>>;
    static CACHE: OnceLock<Cache> = OnceLock::new();
    let cache = CACHE.get_or_init(Default::default);
    let mut guard = cache.lock().expect("pad map cache poisoned");
    guard
        .entry((grid, m))
        .or_insert_with(|| {
            assert!(m >= grid.n(), "padding grid must not be coarser");
            let modes = grid.modes();
            let d = grid.d();
            let map = modes
                .k
                .iter()
                .zip(&modes.nyquist)
                .map(|(k, &ny)| {
                    if ny {
                        return usize::MAX;
                    }
                    k[..d].iter().fold(0usize, |acc, &ka| {
                        acc * m + (ka as i64).rem_euclid(m as i64) as usize
                    })
                })
                .collect();
            Arc::new(map)
        })
        .clone()
}

impl Add for &SpectralField {
    type Output = SpectralField;
    fn add(self, rhs: &SpectralField) -> SpectralField {
        assert_eq!(self.grid, rhs.grid, "grid mismatch in field addition");
        let coeffs = self
            .coeffs
            .iter()
            .zip(&rhs.coeffs)
            .map(|(a, b)| a + b)
            .collect();
        SpectralField {
            grid: self.grid,
            coeffs,
        }
    }
}

impl Sub for &SpectralField {
    type Output = SpectralField;
    fn sub(self, rhs: &SpectralField) -> SpectralField {
        assert_eq!(self.grid, rhs.grid, "grid mismatch in field subtraction");
        let coeffs = self
            .coeffs
            .iter()
            .zip(&rhs.coeffs)
            .map(|(a, b)| a - b)
            .collect();
        SpectralField {
            grid: self.grid,
            coeffs,
        }
    }
}

impl Mul<f64> for &SpectralField {
    type Output = SpectralField;
    fn mul(self, s: f64) -> SpectralField {
        self.multiply(|_| s)
    }
}

impl Neg for &SpectralField {
    type Output = SpectralField;
    fn neg(self) -> SpectralField {
        self * -1.0
    }
}

/// `d` scalar fields on one grid, with a divergence-free certificate.
#[derive(Clone, Debug, PartialEq)]
pub struct VectorField {
    components: Vec<SpectralField>,
    solenoidal: bool,
}

impl VectorField {
    /// Bundle components; the solenoidal certificate is computed here.
    pub fn new(components: Vec<SpectralField>) -> Result<Self> {
        let grid = components
            .first()
            .map(|c| c.grid())
            .ok_or_else(|| crate::error::invalid("components", "empty vector field"))?;
        if components.len() != grid.d() {
            return Err(crate::error::invalid(
                "components",
                format!("{} components on a d={} grid", components.len(), grid.d()),
            ));
        }
        for c in &components {
            grid.ensure_same(&c.grid())?;
        }
        let mut v = Self {
            components,
            solenoidal: false,
        };
        v.solenoidal = v.divergence_residual() <= SOLENOIDAL_TOL;
        Ok(v)
    }

    pub fn zeros(grid: Grid) -> Self {
        Self {
            components: vec![SpectralField::zeros(grid); grid.d()],
            solenoidal: true,
        }
    }

    pub fn grid(&self) -> Grid {
        self.components[0].grid()
    }

    pub fn components(&self) -> &[SpectralField] {
        &self.components
    }

    pub fn component(&self, a: usize) -> &SpectralField {
        &self.components[a]
    }

    pub fn into_components(self) -> Vec<SpectralField> {
        self.components
    }

    pub fn is_solenoidal(&self) -> bool {
        self.solenoidal
    }

    /// `max_k |k·v̂(k)| / max_k |v̂(k)|`, zero for the zero field.
    pub fn divergence_residual(&self) -> f64 {
        let grid = self.grid();
        let modes = grid.modes();
        let d = grid.d();
        let mut div_max: f64 = 0.0;
        let mut amp_max: f64 = 0.0;
        for i in 0..grid.len() {
            let mut div = Complex64::default();
            for a in 0..d {
                let c = self.components[a].coeffs[i];
                div += c * modes.k[i][a];
                amp_max = amp_max.max(c.norm());
            }
            div_max = div_max.max(div.norm());
        }
        if amp_max == 0.0 {
            0.0
        } else {
            div_max / amp_max
        }
    }

    /// Combined `‖v‖_{L²}`.
    pub fn l2_norm(&self) -> f64 {
        self.components
            .iter()
            .map(|c| c.l2_norm().powi(2))
            .sum::<f64>()
            .sqrt()
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.components
            .iter()
            .map(|c| c.max_abs_coeff())
            .fold(0.0, f64::max)
    }

    pub fn is_zero(&self) -> bool {
        self.components.iter().all(|c| c.is_zero())
    }

    pub fn hermitian_symmetrize(&mut self) {
        for c in &mut self.components {
            c.hermitian_symmetrize();
        }
    }

    /// Apply `f` to every component and recertify.
    pub fn map(&self, f: impl FnMut(&SpectralField) -> SpectralField) -> Self {
        Self::new(self.components.iter().map(f).collect()).expect("components share a grid")
    }

    /// Combine two fields componentwise and recertify.
    pub fn zip_with(
        &self,
        other: &VectorField,
        mut f: impl FnMut(&SpectralField, &SpectralField) -> SpectralField,
    ) -> Self {
        let comps = self
            .components
            .iter()
            .zip(&other.components)
            .map(|(a, b)| f(a, b))
            .collect();
        Self::new(comps).expect("components share a grid")
    }

    pub fn resample(&self, target: Grid) -> Result<Self> {
        let comps = self
            .components
            .iter()
            .map(|c| c.resample(target))
            .collect::<Result<Vec<_>>>()?;
        Self::new(comps)
    }
}

impl Add for &VectorField {
    type Output = VectorField;
    fn add(self, rhs: &VectorField) -> VectorField {
        self.zip_with(rhs, |a, b| a + b)
    }
}

impl Sub for &VectorField {
    type Output = VectorField;
    fn sub(self, rhs: &VectorField) -> VectorField {
        self.zip_with(rhs, |a, b| a - b)
    }
}

impl Mul<f64> for &VectorField {
    type Output = VectorField;
    fn mul(self, s: f64) -> VectorField {
        self.map(|c| c * s)
    }
}

/// Anything made of scalar components on one grid: lets operators accept
/// either a [`SpectralField`] or a [`VectorField`] and return the same kind.
pub trait FieldLike: Clone {
    fn parts(&self) -> &[SpectralField];
    fn from_parts(parts: Vec<SpectralField>) -> Result<Self>;

    fn field_grid(&self) -> Grid {
        self.parts()[0].grid()
    }

    fn map_parts(&self, f: impl FnMut(&SpectralField) -> SpectralField) -> Self {
        Self::from_parts(self.parts().iter().map(f).collect()).expect("same shape")
    }
}

impl FieldLike for SpectralField {
    fn parts(&self) -> &[SpectralField] {
        std::slice::from_ref(self)
    }

    fn from_parts(mut parts: Vec<SpectralField>) -> Result<Self> {
        if parts.len() != 1 {
            return Err(crate::error::invalid(
                "parts",
                "scalar field needs one part",
            ));
        }
        Ok(parts.pop().expect("length checked"))
    }
}

impl FieldLike for VectorField {
    fn parts(&self) -> &[SpectralField] {
        &self.components
    }

    fn from_parts(parts: Vec<SpectralField>) -> Result<Self> {
        VectorField::new(parts)
    }
}
