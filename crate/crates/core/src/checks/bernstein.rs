use super::RatioReport;
use crate::error::{invalid, Error, Result};
use crate::littlewood_paley::{delta_j, DyadicPartition, Flavor, ANNULUS_INNER, ANNULUS_OUTER};
use crate::norms::lebesgue_norm;
use crate::spectral::{fractional_laplacian, SpectralField};

/// Both sides of the two-sided Bernstein comparison.
#[derive(Clone, Debug)]
pub struct BernsteinReport {
    /// `‖(-Δ)^α f‖_{L^q} / (2^{2αj + jd(1/p-1/q)} ‖f‖_{L^p})`.
    pub upper: RatioReport,
    /// `‖(-Δ)^α f‖_{L^q} / (2^{2αj} ‖f‖_{L^q})`.
    pub lower: RatioReport,
}

/// Interval that the `p = q = 2` ratios must lie in for a field carried by
/// the annulus `2^j [3/4, 8/3]`: the extremes of `(|k| / 2^j)^{2α}` there.
pub fn bernstein_interval(alpha: f64) -> (f64, f64) {
    (
        ANNULUS_INNER.powf(2.0 * alpha),
        ANNULUS_OUTER.powf(2.0 * alpha),
    )
}

/// Localize `f` with the homogeneous `Δ_j` and compare `(-Δ)^α` against `2^{2αj}`.
pub fn bernstein_check(
    f: &SpectralField,
    j: i32,
    alpha: f64,
    p: f64,
    q: f64,
) -> Result<BernsteinReport> {
    if !(1.0..).contains(&p) || q < p {
        return Err(invalid(
            "p, q",
            format!("need 1 <= p <= q, got p={p}, q={q}"),
        ));
    }
    let grid = f.grid();
    let part = DyadicPartition::for_grid(grid);
    let local = delta_j(&part, f, j, Flavor::Homogeneous);
    if local.max_abs_coeff() == 0.0 {
        return Err(Error::Degenerate(format!(
            "field has no content in block {j}"
        )));
    }
    let lifted = fractional_laplacian(&local, alpha)?;
    let lhs = lebesgue_norm(&lifted, q)?;
    let d = grid.d() as f64;
    let jf = j as f64;
    let upper_rhs =
        (2.0 * alpha * jf + jf * d * (1.0 / p - 1.0 / q)).exp2() * lebesgue_norm(&local, p)?;
    let lower_rhs = (2.0 * alpha * jf).exp2() * lebesgue_norm(&local, q)?;
    let variant = format!("alpha={alpha}");
    Ok(BernsteinReport {
        upper: RatioReport::new(
            "bernstein-upper",
            variant.clone(),
            j,
            grid.n(),
            lhs,
            upper_rhs,
        ),
        lower: RatioReport::new("bernstein-lower", variant, j, grid.n(), lhs, lower_rhs),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::Grid;
    use num_complex::Complex64;

    #[test]
    fn pure_modes_at_dyadic_scale() {
        let g = Grid::new(2, 32).unwrap();
        for j in 0..=3 {
            let k = 1i64 << j;
            let f = SpectralField::mode(g, &[k, 0], Complex64::new(1.0, 0.0)).unwrap();
            let r = bernstein_check(&f, j, 0.8, 2.0, 2.0).unwrap();
            assert!((r.upper.ratio.unwrap() - 1.0).abs() < 1e-12);
            let f = SpectralField::mode(g, &[0, 2 * k], Complex64::new(0.0, 2.0)).unwrap();
            let r = bernstein_check(&f, j, 0.8, 2.0, 2.0).unwrap();
            assert!((r.upper.ratio.unwrap() - 2f64.powf(1.6)).abs() < 1e-12);
            assert_eq!(r.upper.ratio, r.lower.ratio);
        }
    }

    #[test]
    fn empty_block_rejected() {
        let g = Grid::new(2, 32).unwrap();
        let f = SpectralField::mode(g, &[1, 0], Complex64::new(1.0, 0.0)).unwrap();
        assert!(bernstein_check(&f, 4, 0.5, 2.0, 2.0).is_err());
    }
}
