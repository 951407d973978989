//! Dyadic partition of unity, the block operators `Δ_j`, `S_j` and the
//! Bony paraproduct split.

use std::cell::OnceCell;
use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::spectral::{product_padding, FieldLike, Grid, SpectralField};

/// Inner radius of the annulus carrying `ψ`.
pub const ANNULUS_INNER: f64 = 3.0 / 4.0;
/// Outer radius of the annulus carrying `ψ`.
pub const ANNULUS_OUTER: f64 = 8.0 / 3.0;
/// Radius of the ball carrying `φ`.
pub const BALL_RADIUS: f64 = 4.0 / 3.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Flavor {
    Inhomogeneous,
    Homogeneous,
}

fn bump_tail(t: f64) -> f64 {
    if t > 0.0 {
        (-1.0 / t).exp()
    } else {
        0.0
    }
}

/// Smooth step: 0 for `t <= 0`, 1 for `t >= 1`.
pub fn smooth_step(t: f64) -> f64 {
    let a = bump_tail(t);
    let b = bump_tail(1.0 - t);
    a / (a + b)
}

/// Radial cutoff equal to 1 on `[0, 3/4]` and 0 on `[4/3, ∞)`.
pub fn chi(r: f64) -> f64 {
    1.0 - smooth_step((r - ANNULUS_INNER) / (BALL_RADIUS - ANNULUS_INNER))
}

pub fn phi(r: f64) -> f64 {
    chi(r)
}

pub fn psi(r: f64) -> f64 {
    chi(r / 2.0) - chi(r)
}

fn pow2(j: i32) -> f64 {
    2f64.powi(j)
}

type TableKey = (Kind, Flavor, i32);

/// The radial multipliers together with the block range resolvable on one grid.
#[derive(Debug)]
pub struct DyadicPartition {
    grid: Grid,
    j_max: i32,
    tables: Mutex<HashMap<TableKey, Arc<Vec<f64>>>>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
enum Kind {
    Block,
    Cutoff,
}

impl DyadicPartition {
    /// Homogeneous blocks below this index vanish at every nonzero integer frequency.
    pub const HOMOGENEOUS_J_MIN: i32 = -2;

    pub fn new(grid: Grid) -> Self {
        let kmax = grid.max_wavenumber();
        let mut j_max = -1;
        while ANNULUS_INNER * pow2(j_max + 1) <= kmax {
            j_max += 1;
        }
        Self {
            grid,
            j_max,
            tables: Mutex::new(HashMap::new()),
        }
    }

    /// Shared partition for `grid`.
    pub fn for_grid(grid: Grid) -> Arc<Self> {
        static CACHE: OnceLock<Mutex<HashMap<Grid, Arc<DyadicPartition>>>> = OnceLock::new();
        let cache = CACHE.get_or_init(Default::default);
        let mut guard = cache.lock().expect("partition cache poisoned");
        guard
            .entry(grid)
            .or_insert_with(|| Arc::new(Self::new(grid)))
            .clone()
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    pub fn j_min(&self, flavor: Flavor) -> i32 {
        match flavor {
            Flavor::Inhomogeneous => -1,
            Flavor::Homogeneous => Self::HOMOGENEOUS_J_MIN,
        }
    }

    pub fn j_max(&self) -> i32 {
        self.j_max
    }

    pub fn range(&self, flavor: Flavor) -> std::ops::RangeInclusive<i32> {
        self.j_min(flavor)..=self.j_max
    }

    /// Multiplier of `Δ_j` at radius `r`.
    pub fn block_weight(&self, j: i32, flavor: Flavor, r: f64) -> f64 {
        match flavor {
            Flavor::Inhomogeneous if j <= -2 => 0.0,
            Flavor::Inhomogeneous if j == -1 => phi(r),
            _ if r == 0.0 => 0.0,
            _ => psi(r / pow2(j)),
        }
    }

    /// Multiplier of `S_j = Σ_{k<j} Δ_k` at radius `r`.
    pub fn cutoff_weight(&self, j: i32, flavor: Flavor, r: f64) -> f64 {
        match flavor {
            Flavor::Inhomogeneous if j <= -1 => 0.0,
            Flavor::Homogeneous if r == 0.0 => 0.0,
            _ => chi(r / pow2(j)),
        }
    }

    /// Per-mode multiplier table of `Δ_j`.
    pub fn block_table(&self, j: i32, flavor: Flavor) -> Arc<Vec<f64>> {
        self.table(Kind::Block, j, flavor)
    }

    /// Per-mode multiplier table of `S_j`.
    pub fn cutoff_table(&self, j: i32, flavor: Flavor) -> Arc<Vec<f64>> {
        self.table(Kind::Cutoff, j, flavor)
    }

    fn table(&self, kind: Kind, j: i32, flavor: Flavor) -> Arc<Vec<f64>> {
        let mut guard = self.tables.lock().expect("weight table poisoned");
        guard
            .entry((kind, flavor, j))
            .or_insert_with(|| {
                let modes = self.grid.modes();
                let w = modes
                    .abs
                    .iter()
                    .map(|&r| match kind {
                        Kind::Block => self.block_weight(j, flavor, r),
                        Kind::Cutoff => self.cutoff_weight(j, flavor, r),
                    })
                    .collect();
                Arc::new(w)
            })
            .clone()
    }

    fn check_grid(&self, f: &SpectralField) -> Result<()> {
        self.grid.ensure_same(&f.grid())
    }

    /// Reject block indices outside the resolvable range.
    pub fn check_block(&self, j: i32, flavor: Flavor) -> Result<()> {
        let lo = self.j_min(flavor);
        if j < lo || j > self.j_max {
            return Err(Error::BlockOutOfRange {
                j,
                lo,
                hi: self.j_max,
            });
        }
        Ok(())
    }
}

/// `Δ_j f`.
pub fn delta_j(part: &DyadicPartition, f: &SpectralField, j: i32, flavor: Flavor) -> SpectralField {
    part.check_grid(f)
        .expect("field lives on the partition grid");
    let w = part.block_table(j, flavor);
    f.multiply(|i| w[i])
}

/// `Δ̃_j f = (Δ_{j-1} + Δ_j + Δ_{j+1}) f`.
pub fn delta_tilde_j(
    part: &DyadicPartition,
    f: &SpectralField,
    j: i32,
    flavor: Flavor,
) -> SpectralField {
    let (a, b, c) = (
        part.block_table(j - 1, flavor),
        part.block_table(j, flavor),
        part.block_table(j + 1, flavor),
    );
    f.multiply(|i| a[i] + b[i] + c[i])
}

/// `S_j f`.
pub fn s_j(part: &DyadicPartition, f: &SpectralField, j: i32, flavor: Flavor) -> SpectralField {
    part.check_grid(f)
        .expect("field lives on the partition grid");
    let w = part.cutoff_table(j, flavor);
    f.multiply(|i| w[i])
}

/// Apply `Δ_j` to every component.
pub fn delta_j_of<F: FieldLike>(part: &DyadicPartition, f: &F, j: i32, flavor: Flavor) -> F {
    f.map_parts(|c| delta_j(part, c, j, flavor))
}

/// Apply `S_j` to every component.
pub fn s_j_of<F: FieldLike>(part: &DyadicPartition, f: &F, j: i32, flavor: Flavor) -> F {
    f.map_parts(|c| s_j(part, c, j, flavor))
}

/// `‖Δ_j f‖_{L²}` with components combined in l², without building the block.
pub fn block_l2<F: FieldLike>(part: &DyadicPartition, f: &F, j: i32, flavor: Flavor) -> f64 {
    let w = part.block_table(j, flavor);
    weighted_l2(f, &w)
}

/// `‖Δ̃_j f‖_{L²}`.
pub fn block_tilde_l2<F: FieldLike>(part: &DyadicPartition, f: &F, j: i32, flavor: Flavor) -> f64 {
    let (a, b, c) = (
        part.block_table(j - 1, flavor),
        part.block_table(j, flavor),
        part.block_table(j + 1, flavor),
    );
    let w: Vec<f64> = (0..a.len()).map(|i| a[i] + b[i] + c[i]).collect();
    weighted_l2(f, &w)
}

/// `‖S_j f‖_{L²}`.
pub fn cutoff_l2<F: FieldLike>(part: &DyadicPartition, f: &F, j: i32, flavor: Flavor) -> f64 {
    let w = part.cutoff_table(j, flavor);
    weighted_l2(f, &w)
}

fn weighted_l2<F: FieldLike>(f: &F, w: &[f64]) -> f64 {
    let mut s = 0.0;
    for c in f.parts() {
        s += c
            .coeffs()
            .iter()
            .zip(w)
            .map(|(z, w)| w * w * z.norm_sqr())
            .sum::<f64>();
    }
    (s * f.field_grid().volume()).sqrt()
}

/// Block L² norms over the resolvable range, indexed from `j_min`.
pub fn block_l2_profile<F: FieldLike>(part: &DyadicPartition, f: &F, flavor: Flavor) -> Vec<f64> {
    part.range(flavor)
        .map(|j| block_l2(part, f, j, flavor))
        .collect()
}

/// A field together with its lazily materialized dyadic blocks.
#[derive(Debug)]
pub struct BlockedField {
    field: SpectralField,
    partition: Arc<DyadicPartition>,
    flavor: Flavor,
    blocks: Vec<OnceCell<SpectralField>>,
}

impl BlockedField {
    pub fn new(field: SpectralField, flavor: Flavor) -> Self {
        let partition = DyadicPartition::for_grid(field.grid());
        let count = partition.range(flavor).count();
        Self {
            field,
            partition,
            flavor,
            blocks: (0..count).map(|_| OnceCell::new()).collect(),
        }
    }

    pub fn field(&self) -> &SpectralField {
        &self.field
    }

    pub fn flavor(&self) -> Flavor {
        self.flavor
    }

    pub fn partition(&self) -> &DyadicPartition {
        &self.partition
    }

    pub fn range(&self) -> std::ops::RangeInclusive<i32> {
        self.partition.range(self.flavor)
    }

    /// `Δ_j f`, or `None` outside the resolvable range.
    pub fn block(&self, j: i32) -> Option<&SpectralField> {
        let idx = j - self.partition.j_min(self.flavor);
        let cell = self.blocks.get(usize::try_from(idx).ok()?)?;
        Some(cell.get_or_init(|| delta_j(&self.partition, &self.field, j, self.flavor)))
    }

    /// Sum of all resolvable blocks.
    pub fn reconstruct(&self) -> SpectralField {
        let mut out = SpectralField::zeros(self.field.grid());
        for j in self.range() {
            out.axpy(1.0, self.block(j).expect("index in range"));
        }
        out
    }
}

/// The three Bony paraproduct pieces of `F G`.
#[derive(Clone, Debug)]
pub struct BonyParts {
    pub low_high: SpectralField,
    pub high_low: SpectralField,
    pub high_high: SpectralField,
}

impl BonyParts {
    pub fn sum(&self) -> SpectralField {
        &(&self.low_high + &self.high_low) + &self.high_high
    }
}

/// Split the dealiased product into `Σ S_{k-1}F Δ_k G`, `Σ Δ_k F S_{k-1}G`
/// and `Σ Δ_k F Δ̃_k G` over inhomogeneous blocks.
pub fn bony_decompose(f: &SpectralField, g: &SpectralField) -> Result<BonyParts> {
    let grid = f.grid();
    grid.ensure_same(&g.grid())?;
    let part = DyadicPartition::for_grid(grid);
    let flavor = Flavor::Inhomogeneous;
    let m = product_padding(grid.n());
    let size = m.pow(grid.d() as u32);
    let phys = |x: &SpectralField| x.padded_physical(m);
    let mut lh = vec![Complex64::default(); size];
    let mut hl = vec![Complex64::default(); size];
    let mut hh = vec![Complex64::default(); size];
    for k in part.range(flavor) {
        let df = phys(&delta_j(&part, f, k, flavor));
        let dg = phys(&delta_j(&part, g, k, flavor));
        let sf = phys(&s_j(&part, f, k - 1, flavor));
        let sg = phys(&s_j(&part, g, k - 1, flavor));
        let tg = phys(&delta_tilde_j(&part, g, k, flavor));
        for i in 0..size {
            lh[i] += sf[i] * dg[i];
            hl[i] += df[i] * sg[i];
            hh[i] += df[i] * tg[i];
        }
    }
    Ok(BonyParts {
        low_high: SpectralField::from_padded_physical(grid, m, lh),
        high_low: SpectralField::from_padded_physical(grid, m, hl),
        high_high: SpectralField::from_padded_physical(grid, m, hh),
    })
}
