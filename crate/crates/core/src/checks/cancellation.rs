use crate::error::{Error, Result};
use crate::littlewood_paley::{delta_j_of, s_j_of, DyadicPartition, Flavor};
use crate::spectral::{advection_integral, sup_norm, FieldLike, VectorField};

/// Residual of the transport cancellation at one block.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CancellationReport {
    pub j: i32,
    /// `|∫ S_j b·∇Δ_j f · Δ_j g + ∫ S_j b·∇Δ_j g · Δ_j f|`.
    pub residual: f64,
    /// `‖Δ_j f‖_{L²} ‖Δ_j g‖_{L²} ‖S_j b‖_{L^∞}`.
    pub scale: f64,
    /// `residual / (scale + f64::MIN_POSITIVE)`.
    pub normalized: f64,
}

/// The low-frequency cutoff used alongside a dissipation exponent `α`:
/// inhomogeneous below 1, homogeneous from 1 on.
pub fn cancellation_flavor(alpha: f64) -> Flavor {
    if alpha < 1.0 {
        Flavor::Inhomogeneous
    } else {
        Flavor::Homogeneous
    }
}

/// Evaluate the pair of transport integrals whose sum vanishes for solenoidal `b`.
pub fn cancellation_check<F: FieldLike>(
    b: &VectorField,
    f: &F,
    g: &F,
    j: i32,
    flavor: Flavor,
) -> Result<CancellationReport> {
    if !b.is_solenoidal() {
        return Err(Error::NonSolenoidal {
            residual: b.divergence_residual(),
        });
    }
    let grid = b.grid();
    let part = DyadicPartition::for_grid(grid);
    let sb = s_j_of(&part, b, j, flavor);
    let df = delta_j_of(&part, f, j, flavor);
    let dg = delta_j_of(&part, g, j, flavor);
    let residual = (advection_integral(&sb, &df, &dg)? + advection_integral(&sb, &dg, &df)?).abs();
    let sup_b = sb
        .components()
        .iter()
        .map(|c| sup_norm(c, 2).powi(2))
        .sum::<f64>()
        .sqrt();
    let l2 = |x: &F| {
        x.parts()
            .iter()
            .map(|c| c.l2_norm().powi(2))
            .sum::<f64>()
            .sqrt()
    };
    let scale = l2(&df) * l2(&dg) * sup_b;
    Ok(CancellationReport {
        j,
        residual,
        scale,
        normalized: residual / (scale + f64::MIN_POSITIVE),
    })
}
