//! The periodic box `[0, 2π)^d` sampled on `n` points per axis.
//!
//! Spectral storage is row-major over the `d` axes with the last axis
//! contiguous. Along each axis index `i` carries the integer frequency
//! `i` for `i <= n/2` and `i - n` otherwise, so the resolvable range is
//! `-n/2+1 ..= n/2`.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, Mutex, OnceLock};

use crate::error::{Error, Result};

/// Largest supported spatial dimension.
pub const MAX_DIM: usize = 3;

/// Upper bound on the total number of grid points.
const MAX_POINTS: usize = 1 << 27;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Grid {
    d: usize,
    n: usize,
}

impl Grid {
    pub fn new(d: usize, n: usize) -> Result<Self> {
        if d == 0 || d > MAX_DIM {
            return Err(Error::InvalidGrid(format!(
                "dimension d={d} must lie in 1..={MAX_DIM}"
            )));
        }
        if n < 2 || !n.is_multiple_of(2) {
            return Err(Error::InvalidGrid(format!(
                "points per axis n={n} must be even and positive"
            )));
        }
        let total = n
            .checked_pow(d as u32)
            .filter(|&t| t <= MAX_POINTS)
            .ok_or_else(|| Error::InvalidGrid(format!("n^d = {n}^{d} is too large")))?;
        debug_assert!(total > 0);
        Ok(Self { d, n })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Domain period along every axis.
    pub fn length(&self) -> f64 {
        2.0 * PI
    }

    /// Total number of points (and of Fourier modes).
    pub fn len(&self) -> usize {
        self.n.pow(self.d as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// `(2π)^d`, the measure of the box.
    pub fn volume(&self) -> f64 {
        self.length().powi(self.d as i32)
    }

    /// Largest resolvable |k|, attained at the corner `(n/2, …, n/2)`.
    pub fn max_wavenumber(&self) -> f64 {
        (self.n as f64 / 2.0) * (self.d as f64).sqrt()
    }

    /// Integer frequency carried by index `i` on one axis.
    pub fn freq(&self, i: usize) -> i64 {
        let n = self.n as i64;
        let i = i as i64;
        if i <= n / 2 {
            i
        } else {
            i - n
        }
    }

    /// Index of frequency `k` on one axis, if resolvable.
    pub fn index_of_freq(&self, k: i64) -> Option<usize> {
        let n = self.n as i64;
        if k > n / 2 || k <= -n / 2 {
            return None;
        }
        Some(k.rem_euclid(n) as usize)
    }

    /// Flat index of the integer wave vector `k`, if resolvable.
    pub fn index_of(&self, k: &[i64]) -> Option<usize> {
        if k.len() != self.d {
            return None;
        }
        let mut idx = 0;
        for &ka in k {
            idx = idx * self.n + self.index_of_freq(ka)?;
        }
        Some(idx)
    }

    /// Physical coordinates of point `idx`.
    pub fn point(&self, idx: usize) -> [f64; MAX_DIM] {
        let h = self.length() / self.n as f64;
        let mut x = [0.0; MAX_DIM];
        let mut rem = idx;
        for a in (0..self.d).rev() {
            x[a] = (rem % self.n) as f64 * h;
            rem /= self.n;
        }
        x
    }

    /// Cached wave-vector table for this grid.
    pub fn modes(&self) -> Arc<ModeTable> {
        static CACHE: OnceLock<Mutex<HashMap<Grid, Arc<ModeTable>>>> = OnceLock::new();
        let cache = CACHE.get_or_init(Default::default);
        let mut guard = cache.lock().expect("mode table cache poisoned");
        guard
            .entry(*self)
            .or_insert_with(|| Arc::new(ModeTable::build(*self)))
            .clone()
    }

    pub(crate) fn ensure_same(&self, other: &Grid) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(Error::GridMismatch {
                expected_d: self.d,
                expected_n: self.n,
                got_d: other.d,
                got_n: other.n,
            })
        }
    }
}

/// Per-mode wave vectors, magnitudes, and the reflection `k -> -k`.
#[derive(Debug)]
pub struct ModeTable {
    pub k: Vec<[f64; MAX_DIM]>,
    pub abs: Vec<f64>,
    /// Index of `-k`; Nyquist components map onto themselves.
    pub neg: Vec<usize>,
    /// True when some component equals `n/2`.
    pub nyquist: Vec<bool>,
}

impl ModeTable {
    fn build(grid: Grid) -> Self {
        let (d, n) = (grid.d, grid.n);
        let len = grid.len();
        let mut k = Vec::with_capacity(len);
        let mut abs = Vec::with_capacity(len);
        let mut neg = Vec::with_capacity(len);
        let mut nyquist = Vec::with_capacity(len);
        let mut digits = [0usize; MAX_DIM];
        for idx in 0..len {
            let mut rem = idx;
            for a in (0..d).rev() {
                digits[a] = rem % n;
                rem /= n;
            }
            let mut kv = [0.0; MAX_DIM];
            let mut ny = false;
            let mut nidx = 0;
            for a in 0..d {
                let f = grid.freq(digits[a]);
                kv[a] = f as f64;
                ny |= digits[a] == n / 2;
                nidx = nidx * n + (n - digits[a]) % n;
            }
            abs.push(kv.iter().map(|v| v * v).sum::<f64>().sqrt());
            k.push(kv);
            neg.push(nidx);
            nyquist.push(ny);
        }
        Self {
            k,
            abs,
            neg,
            nyquist,
        }
    }
}
