use super::integrator::dissipation_rates;
use super::monitor::y_radius;
use super::{Regime, SchemeConfig};
use crate::error::{invalid, Result};
use crate::littlewood_paley::{DyadicPartition, Flavor};
use crate::spectral::VectorField;

/// A horizon chosen from the smallness conditions.
#[derive(Clone, Debug, PartialEq)]
pub struct HorizonChoice {
    pub t: f64,
    /// Constant the conditions were evaluated with.
    pub c: f64,
    pub m: f64,
    /// User-supplied `δ`.
    pub delta: f64,
    /// `min(δ, 1/(4C))`, so that `Cδ <= 1/4` holds.
    pub delta_used: f64,
    /// The condition that fixed `t`.
    pub limiting: &'static str,
    /// Every candidate with its value.
    pub candidates: Vec<(&'static str, f64)>,
}

/// The two linear quantities of the lagged scheme for the free fractional
/// heat flow of `u0` over `[0, t]`, with the trajectory quadrature the
/// monitor uses: `‖·‖_{L¹(Ḃ^{d/2+1}_{2,1})}` and `‖·‖_{L̃²(Ḃ^{d/2+1-α}_{2,1})}`.
pub fn linear_heat_norms(cfg: &SchemeConfig, u0: &VectorField, t: f64) -> Result<(f64, f64)> {
    let grid = u0.grid();
    let part = DyadicPartition::for_grid(grid);
    let flavor = Flavor::Homogeneous;
    let lambda = dissipation_rates(grid, cfg.alpha, cfg.nu);
    let steps = cfg.steps();
    let h = t / steps as f64;
    let vol = grid.volume();
    let power: Vec<f64> = (0..grid.len())
        .map(|i| {
            u0.components()
                .iter()
                .map(|c| c.coeffs()[i].norm_sqr())
                .sum::<f64>()
                * vol
        })
        .collect();
    let d = grid.d() as f64;
    let mut l1 = 0.0;
    let mut l2 = 0.0;
    for j in part.range(flavor) {
        let w = part.block_table(j, flavor);
        let active: Vec<(f64, f64)> = (0..grid.len())
            .filter(|&i| w[i] > 0.0 && power[i] > 0.0)
            .map(|i| (w[i] * w[i] * power[i], lambda[i]))
            .collect();
        if active.is_empty() {
            continue;
        }
        let mut int1 = 0.0;
        let mut int2 = 0.0;
        for s in 0..steps {
            let ts = s as f64 * h;
            let sq: f64 = active.iter().map(|(p, l)| p * (-2.0 * l * ts).exp()).sum();
            int1 += h * sq.sqrt();
            int2 += h * sq;
        }
        let jf = j as f64;
        l1 += ((d / 2.0 + 1.0) * jf).exp2() * int1;
        l2 += ((d / 2.0 + 1.0 - cfg.alpha) * jf).exp2() * int2.sqrt();
    }
    Ok((l1, l2))
}

/// Pick `T` from the smallness conditions with constant `c`, capped at `t_max`.
///
/// Lagged scheme: `CTM² <= δ/2`, `CTM <= 1/4`, and both linear heat terms
/// `<= δ/4`. Coupled scheme: `√T C M <= 1/4`.
pub fn choose_horizon(
    cfg: &SchemeConfig,
    u0: &VectorField,
    b0: &VectorField,
    delta: f64,
    c: f64,
    t_max: f64,
) -> Result<HorizonChoice> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(invalid("delta", format!("{delta} must lie in (0, 1)")));
    }
    if !(c > 0.0) || !c.is_finite() {
        return Err(invalid("C", format!("constant {c} must be positive")));
    }
    if !(t_max > 0.0) {
        return Err(invalid("T", format!("cap {t_max} must be positive")));
    }
    let m = y_radius(cfg, u0, b0)?;
    let delta_used = delta.min(0.25 / c);
    let mut candidates: Vec<(&'static str, f64)> = vec![("cap", t_max)];
    match cfg.regime {
        Regime::AlphaGE1 => {
            if m > 0.0 {
                candidates.push(("C T M^2 <= delta/2", delta_used / (2.0 * c * m * m)));
                candidates.push(("C T M <= 1/4", 0.25 / (c * m)));
            }
            let fits = |t: f64| -> Result<bool> {
                let (a, b) = linear_heat_norms(cfg, u0, t)?;
                Ok(a <= delta_used / 4.0 && b <= delta_used / 4.0)
            };
            if !fits(t_max)? {
                let (mut lo, mut hi) = (0.0, t_max);
                for _ in 0..60 {
                    let mid = 0.5 * (lo + hi);
                    if fits(mid)? {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                candidates.push(("linear heat terms <= delta/4", lo));
            }
        }
        Regime::AlphaLT1 => {
            if m > 0.0 {
                candidates.push(("sqrt(T) C M <= 1/4", 1.0 / (16.0 * c * c * m * m)));
            }
        }
    }
    let (limiting, t) =
        candidates.iter().copied().fold(
            ("cap", f64::INFINITY),
            |acc, x| if x.1 < acc.1 { x } else { acc },
        );
    Ok(HorizonChoice {
        t,
        c,
        m,
        delta,
        delta_used,
        limiting,
        candidates,
    })
}
