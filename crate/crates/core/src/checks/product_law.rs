use super::RatioReport;
use crate::error::{Error, Result};
use crate::littlewood_paley::Flavor;
use crate::norms::{besov_norm, NormSpec};
use crate::spectral::{product, Grid, SpectralField};

/// Check `s1, s2 <= d/p` and `s1 + s2 > d·max(0, 2/p - 1)`.
pub fn product_law_hypotheses(d: usize, s1: f64, s2: f64, p: f64) -> Result<()> {
    let d = d as f64;
    let cap = d / p;
    for (name, s) in [("s1", s1), ("s2", s2)] {
        if s > cap {
            return Err(Error::Hypothesis(format!(
                "{name} = {s} exceeds d/p = {cap}; the product law needs s1, s2 <= d/p"
            )));
        }
    }
    let floor = d * (2.0 / p - 1.0).max(0.0);
    if s1 + s2 <= floor {
        return Err(Error::Hypothesis(format!(
            "s1 + s2 = {} is not above d*max(0, 2/p - 1) = {floor}",
            s1 + s2
        )));
    }
    Ok(())
}

/// `‖f g‖_{Ḃ^{s1+s2-d/p}_{p,1}} / (‖f‖_{Ḃ^{s1}_{p,1}} ‖g‖_{Ḃ^{s2}_{p,1}})`.
///
/// The product is formed on the doubled grid so none of it is truncated.
pub fn product_law_check(
    f: &SpectralField,
    g: &SpectralField,
    s1: f64,
    s2: f64,
    p: f64,
) -> Result<RatioReport> {
    let grid = f.grid();
    grid.ensure_same(&g.grid())?;
    product_law_hypotheses(grid.d(), s1, s2, p)?;
    let fine = Grid::new(grid.d(), 2 * grid.n())?;
    let fg = product(&f.resample(fine)?, &g.resample(fine)?)?;
    let d = grid.d() as f64;
    let spec = |s| NormSpec::besov(s, p, 1.0, Flavor::Homogeneous);
    let lhs = besov_norm(&fg, &spec(s1 + s2 - d / p)?)?;
    let rhs = besov_norm(f, &spec(s1)?)? * besov_norm(g, &spec(s2)?)?;
    Ok(RatioReport::new(
        "product-law",
        format!("s1={s1},s2={s2},p={p}"),
        0,
        grid.n(),
        lhs,
        rhs,
    ))
}
