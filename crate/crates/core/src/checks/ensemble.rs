//! Seeded ensembles for the checks. Members are generated and evaluated in
//! parallel, each from its own stream, and collected in member order, so the
//! output does not depend on the thread count.

use rand::SeedableRng;
use rayon::prelude::*;

use super::{
    bernstein_check, cancellation_check, product_law_check, triple_product_bound_check,
    BernsteinReport, CancellationReport, RatioReport, Variant,
};
use crate::error::Result;
use crate::littlewood_paley::{delta_j_of, DyadicPartition, Flavor};
use crate::random::{random_field, random_solenoidal, FieldRng};
use crate::spectral::{advect, inner, leray_project, Grid, SpectralField, VectorField};

/// Independent generator for ensemble member `i`.
pub fn member_rng(seed: u64, i: u64) -> FieldRng {
    let mut rng = FieldRng::seed_from_u64(seed);
    rng.set_stream(i);
    rng
}

fn band_top(grid: Grid) -> f64 {
    grid.n() as f64 / 2.0 - 1.0
}

/// Extremes over the informative members of an ensemble.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EnsembleSummary {
    pub members: usize,
    pub degenerate: usize,
    pub max_ratio: f64,
    pub min_ratio: f64,
}

impl EnsembleSummary {
    pub fn of<'a>(reports: impl IntoIterator<Item = &'a RatioReport>) -> Self {
        let mut s = Self {
            members: 0,
            degenerate: 0,
            max_ratio: f64::NEG_INFINITY,
            min_ratio: f64::INFINITY,
        };
        for r in reports {
            s.members += 1;
            match r.ratio {
                Some(x) => {
                    s.max_ratio = s.max_ratio.max(x);
                    s.min_ratio = s.min_ratio.min(x);
                }
                None => s.degenerate += 1,
            }
        }
        s
    }
}

/// Bernstein reports for `count` random fields at every non-empty block.
pub fn bernstein_ensemble(
    grid: Grid,
    alpha: f64,
    count: usize,
    seed: u64,
) -> Result<Vec<BernsteinReport>> {
    let part = DyadicPartition::for_grid(grid);
    let nested: Vec<Result<Vec<BernsteinReport>>> = (0..count)
        .into_par_iter()
        .map(|i| {
            let mut rng = member_rng(seed, i as u64);
            let f = random_field(grid, 1.0, band_top(grid), &mut rng);
            let mut out = Vec::new();
            for j in part.range(Flavor::Homogeneous) {
                match bernstein_check(&f, j, alpha, 2.0, 2.0) {
                    Ok(r) => out.push(r),
                    Err(crate::Error::Degenerate(_)) => {}
                    Err(e) => return Err(e),
                }
            }
            Ok(out)
        })
        .collect();
    flatten(nested)
}

/// Cancellation residuals over `count` random solenoidal triples and every block.
///
/// Even members use scalar `f`, `g`; odd members use solenoidal vector fields.
pub fn cancellation_ensemble(
    grid: Grid,
    count: usize,
    seed: u64,
    flavor: Flavor,
) -> Result<Vec<CancellationReport>> {
    let part = DyadicPartition::for_grid(grid);
    let top = band_top(grid);
    let nested: Vec<Result<Vec<CancellationReport>>> = (0..count)
        .into_par_iter()
        .map(|i| {
            let mut rng = member_rng(seed, i as u64);
            let b = random_solenoidal(grid, 1.0, top, 1.0, &mut rng);
            let mut out = Vec::new();
            if i % 2 == 0 {
                let f = random_field(grid, 0.0, top, &mut rng);
                let g = random_field(grid, 0.0, top, &mut rng);
                for j in part.range(flavor) {
                    out.push(cancellation_check(&b, &f, &g, j, flavor)?);
                }
            } else {
                let f = random_solenoidal(grid, 1.0, top, 1.0, &mut rng);
                let g = random_solenoidal(grid, 1.0, top, 1.0, &mut rng);
                for j in part.range(flavor) {
                    out.push(cancellation_check(&b, &f, &g, j, flavor)?);
                }
            }
            Ok(out)
        })
        .collect();
    flatten(nested)
}

/// Settings for [`triple_product_ensemble`].
#[derive(Clone, Debug)]
pub struct TripleEnsembleConfig {
    pub grid: Grid,
    /// Broadband members, evaluated at every resolvable block.
    pub broadband: usize,
    /// Shell-localized members per block, evaluated at their own block.
    pub per_shell: usize,
    pub seed: u64,
    pub flavor: Flavor,
    pub variants: Vec<Variant>,
}

impl TripleEnsembleConfig {
    pub fn new(grid: Grid, broadband: usize, per_shell: usize, seed: u64) -> Self {
        Self {
            grid,
            broadband,
            per_shell,
            seed,
            flavor: Flavor::Homogeneous,
            variants: Variant::ALL.to_vec(),
        }
    }

    /// Blocks that carry shell-localized members: `F` lives in blocks
    /// `-1, 0`, so from `j = 2` on the three paraproduct regimes separate.
    pub fn shell_blocks(&self) -> std::ops::RangeInclusive<i32> {
        2..=DyadicPartition::for_grid(self.grid).j_max()
    }
}

/// Iterations of the commutator eigen-search.
const EIGEN_ITERS: usize = 40;

/// Modes within `2^j [1/2, 3]`, the reach of `Δ_j` plus a margin.
fn shell_window(grid: Grid, j: i32, v: &VectorField) -> VectorField {
    let modes = grid.modes();
    let (lo, hi) = (0.5 * 2f64.powi(j), 3.0 * 2f64.powi(j));
    leray_project(&v.map(|c| {
        c.multiply(|i| {
            let a = modes.abs[i];
            if !modes.nyquist[i] && a >= lo && a <= hi {
                1.0
            } else {
                0.0
            }
        })
    }))
}

/// `½(Δ_j(F·∇G) − F·∇Δ_j G)` restricted to the shell window: the symmetric
/// part of the quadratic form `G ↦ ∫ Δ_j(F·∇G)·Δ_j G`.
fn commutator_form(
    f: &VectorField,
    g: &VectorField,
    j: i32,
    flavor: Flavor,
) -> Result<VectorField> {
    let part = DyadicPartition::for_grid(g.grid());
    let a = delta_j_of(&part, &advect(f, g)?.into_value(), j, flavor);
    let b = advect(f, &delta_j_of(&part, g, j, flavor))?.into_value();
    Ok(shell_window(g.grid(), j, &(&(&a - &b) * 0.5)))
}

/// Approximate extremal field of the commutator form: power iteration
/// followed by Rayleigh–Ritz on the last two iterates.
pub(crate) fn commutator_extremal(
    f: &VectorField,
    start: &VectorField,
    j: i32,
    flavor: Flavor,
) -> Result<VectorField> {
    let grid = start.grid();
    let unit = |v: &VectorField| {
        let n = v.l2_norm();
        if n > 0.0 {
            v * (1.0 / n)
        } else {
            v.clone()
        }
    };
    let mut g = unit(&shell_window(grid, j, start));
    let mut mg = commutator_form(f, &g, j, flavor)?;
    for _ in 0..EIGEN_ITERS {
        if mg.l2_norm() == 0.0 {
            return Ok(g);
        }
        g = unit(&mg);
        mg = commutator_form(f, &g, j, flavor)?;
    }
    // Symmetric spectra come in ± pairs, so the iterate oscillates inside a
    // two-dimensional subspace; pick the dominant direction there.
    let h = unit(&mg);
    let mh = commutator_form(f, &h, j, flavor)?;
    let (ghh, ggh) = (1.0, inner(&g, &h)?);
    let (a, b, c) = (inner(&g, &mg)?, inner(&g, &mh)?, inner(&h, &mh)?);
    let best = rayleigh_ritz_2x2([[a, b], [b, c]], [[1.0, ggh], [ggh, ghh]]);
    Ok(unit(&(&(&g * best[0]) + &(&h * best[1]))))
}

/// Eigenvector of the largest-magnitude eigenvalue of `A x = λ B x`.
fn rayleigh_ritz_2x2(a: [[f64; 2]; 2], b: [[f64; 2]; 2]) -> [f64; 2] {
    // det(A − λB) = 0 is quadratic in λ.
    let qa = b[0][0] * b[1][1] - b[0][1] * b[1][0];
    let qb = -(a[0][0] * b[1][1] + a[1][1] * b[0][0] - a[0][1] * b[1][0] - a[1][0] * b[0][1]);
    let qc = a[0][0] * a[1][1] - a[0][1] * a[1][0];
    if qa.abs() < 1e-12 {
        return [1.0, 0.0];
    }
    let disc = (qb * qb - 4.0 * qa * qc).max(0.0).sqrt();
    let l1 = (-qb + disc) / (2.0 * qa);
    let l2 = (-qb - disc) / (2.0 * qa);
    let lam = if l1.abs() >= l2.abs() { l1 } else { l2 };
    let (m00, m01) = (a[0][0] - lam * b[0][0], a[0][1] - lam * b[0][1]);
    let (m10, m11) = (a[1][0] - lam * b[1][0], a[1][1] - lam * b[1][1]);
    if m00.abs() + m01.abs() >= m10.abs() + m11.abs() {
        [-m01, m00]
    } else {
        [-m11, m10]
    }
}

/// Low-frequency transport `F` with fields at block `j`: a random shell
/// field `G`, the aligned target `F·∇G` (worst case for the transport
/// bound), and the extremal field of the localized commutator.
fn shell_member(
    grid: Grid,
    j: i32,
    flavor: Flavor,
    rng: &mut FieldRng,
) -> Result<[VectorField; 4]> {
    let lo = 0.75 * 2f64.powi(j);
    let hi = lo * 16.0 / 9.0;
    let f = random_solenoidal(grid, 1.0, 1.5, 1.0, rng);
    let g = random_solenoidal(grid, lo, hi, 1.0, rng);
    let aligned = advect(&f, &g)?.into_value();
    let extremal = commutator_extremal(&f, &g, j, flavor)?;
    Ok([f, g, aligned, extremal])
}

/// Ratio reports over broadband members at every block plus
/// shell-localized members at their own block.
pub fn triple_product_ensemble(cfg: &TripleEnsembleConfig) -> Result<Vec<RatioReport>> {
    let part = DyadicPartition::for_grid(cfg.grid);
    let top = band_top(cfg.grid);
    let shells: Vec<i32> = cfg.shell_blocks().collect();
    let total = cfg.broadband + shells.len() * cfg.per_shell;
    let nested: Vec<Result<Vec<RatioReport>>> = (0..total)
        .into_par_iter()
        .map(|i| {
            let mut rng = member_rng(cfg.seed, i as u64);
            let mut out = Vec::new();
            if i < cfg.broadband {
                let f = random_solenoidal(cfg.grid, 1.0, top, 1.0, &mut rng);
                let g = random_solenoidal(cfg.grid, 1.0, top, 1.0, &mut rng);
                let h = random_solenoidal(cfg.grid, 1.0, top, 1.0, &mut rng);
                for &v in &cfg.variants {
                    for j in part.range(cfg.flavor) {
                        out.push(triple_product_bound_check(&f, &g, &h, j, v, cfg.flavor)?);
                    }
                }
            } else {
                let j = shells[(i - cfg.broadband) / cfg.per_shell];
                let [f, g, aligned, extremal] = shell_member(cfg.grid, j, cfg.flavor, &mut rng)?;
                for &v in &cfg.variants {
                    let r = match v {
                        Variant::Transport => {
                            triple_product_bound_check(&f, &g, &aligned, j, v, cfg.flavor)?
                        }
                        _ => {
                            triple_product_bound_check(&f, &extremal, &extremal, j, v, cfg.flavor)?
                        }
                    };
                    out.push(r);
                }
            }
            Ok(out)
        })
        .collect();
    flatten(nested)
}

/// Product-law ratios for `count` random mean-free field pairs.
pub fn product_law_ensemble(
    grid: Grid,
    s1: f64,
    s2: f64,
    p: f64,
    count: usize,
    seed: u64,
) -> Result<Vec<RatioReport>> {
    let top = band_top(grid);
    (0..count)
        .into_par_iter()
        .map(|i| {
            let mut rng = member_rng(seed, i as u64);
            let f: SpectralField = random_field(grid, 1.0, top, &mut rng);
            let g: SpectralField = random_field(grid, 1.0, top, &mut rng);
            product_law_check(&f, &g, s1, s2, p)
        })
        .collect()
}

fn flatten<T>(nested: Vec<Result<Vec<T>>>) -> Result<Vec<T>> {
    let mut out = Vec::new();
    for part in nested {
        out.extend(part?);
    }
    Ok(out)
}
