use std::fmt;
use std::str::FromStr;

use super::RatioReport;
use crate::error::{invalid, Error, Result};
use crate::littlewood_paley::{block_l2, block_tilde_l2, delta_j_of, DyadicPartition, Flavor};
use crate::spectral::{advect, inner, VectorField};

/// Which of the three localized triple-product bounds to test.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Variant {
    /// `|∫ Δ_j(F·∇G)·Δ_j H|`.
    Transport,
    /// `|∫ Δ_j(F·∇G)·Δ_j G|`.
    Commutator,
    /// `|∫ Δ_j(F·∇H)·Δ_j G + ∫ Δ_j(F·∇G)·Δ_j H|`.
    Symmetric,
}

impl Variant {
    pub const ALL: [Variant; 3] = [Variant::Transport, Variant::Commutator, Variant::Symmetric];
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Variant::Transport => "transport",
            Variant::Commutator => "commutator",
            Variant::Symmetric => "symmetric",
        })
    }
}

impl FromStr for Variant {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "transport" => Ok(Variant::Transport),
            "commutator" => Ok(Variant::Commutator),
            "symmetric" => Ok(Variant::Symmetric),
            _ => Err(invalid("variant", format!("unknown variant {s:?}"))),
        }
    }
}

/// `∫ Δ_j(F·∇G)·Δ_j H`, with the advection dealiased.
fn localized_pairing(
    part: &DyadicPartition,
    flavor: Flavor,
    f: &VectorField,
    g: &VectorField,
    h: &VectorField,
    j: i32,
) -> Result<f64> {
    let adv = advect(f, g)?.into_value();
    let a = delta_j_of(part, &adv, j, flavor);
    let b = delta_j_of(part, h, j, flavor);
    inner(&a, &b)
}

struct Blocks {
    f: Vec<f64>,
    g: Vec<f64>,
    g_tilde: Vec<f64>,
    j0: i32,
}

impl Blocks {
    fn new(part: &DyadicPartition, flavor: Flavor, f: &VectorField, g: &VectorField) -> Self {
        // One block beyond each end so |j-k| <= 2 windows need no clipping logic.
        let j0 = part.j_min(flavor) - 3;
        let j1 = part.j_max() + 3;
        let f_ = (j0..=j1).map(|j| block_l2(part, f, j, flavor)).collect();
        let g_ = (j0..=j1).map(|j| block_l2(part, g, j, flavor)).collect();
        let gt = (j0..=j1)
            .map(|j| block_tilde_l2(part, g, j, flavor))
            .collect();
        Self {
            f: f_,
            g: g_,
            g_tilde: gt,
            j0,
        }
    }

    fn at(v: &[f64], j0: i32, j: i32) -> f64 {
        usize::try_from(j - j0)
            .ok()
            .and_then(|i| v.get(i))
            .copied()
            .unwrap_or(0.0)
    }

    fn f(&self, j: i32) -> f64 {
        Self::at(&self.f, self.j0, j)
    }

    fn g(&self, j: i32) -> f64 {
        Self::at(&self.g, self.j0, j)
    }

    fn g_tilde(&self, j: i32) -> f64 {
        Self::at(&self.g_tilde, self.j0, j)
    }

    fn lowest(&self) -> i32 {
        self.j0
    }

    fn highest(&self) -> i32 {
        self.j0 + self.f.len() as i32 - 1
    }
}

fn p2(x: f64) -> f64 {
    x.exp2()
}

/// The bracket multiplying `‖Δ_j H‖` (or `‖Δ_j G‖`) with unit constant.
///
/// `lead_two_j` selects the `2^j` factor on the first sum (transport), and
/// `inner_to_k` selects `m <= k-1` instead of `m <= j-1` in the second (symmetric).
fn bracket(b: &Blocks, j: i32, d: f64, lead_two_j: bool, inner_to_k: bool) -> f64 {
    let jf = j as f64;
    let low = |upto: i32, s: f64, v: &dyn Fn(i32) -> f64| -> f64 {
        (b.lowest()..=upto).map(|m| p2(s * m as f64) * v(m)).sum()
    };
    let window = |v: &dyn Fn(i32) -> f64| -> f64 { (j - 2..=j + 2).map(v).sum() };

    let first = if lead_two_j {
        p2(jf) * low(j - 1, d / 2.0, &|m| b.f(m)) * window(&|k| b.g(k))
    } else {
        low(j - 1, 1.0 + d / 2.0, &|m| b.f(m)) * window(&|k| b.g(k))
    };
    let second = if inner_to_k {
        (j - 2..=j + 2)
            .map(|k| b.f(k) * low(k - 1, 1.0 + d / 2.0, &|m| b.g(m)))
            .sum::<f64>()
    } else {
        window(&|k| b.f(k)) * low(j - 1, 1.0 + d / 2.0, &|m| b.g(m))
    };
    let third: f64 = ((j - 1)..=b.highest())
        .map(|k| p2(jf) * p2(d / 2.0 * k as f64) * b.f(k) * b.g_tilde(k))
        .sum();
    first + second + third
}

/// Right side of the chosen bound with unit constant.
pub fn triple_product_rhs(
    f: &VectorField,
    g: &VectorField,
    h: &VectorField,
    j: i32,
    variant: Variant,
    flavor: Flavor,
) -> f64 {
    let grid = f.grid();
    let part = DyadicPartition::for_grid(grid);
    let d = grid.d() as f64;
    match variant {
        Variant::Transport => {
            let b = Blocks::new(&part, flavor, f, g);
            block_l2(&part, h, j, flavor) * bracket(&b, j, d, true, false)
        }
        Variant::Commutator => {
            let b = Blocks::new(&part, flavor, f, g);
            block_l2(&part, g, j, flavor) * bracket(&b, j, d, false, false)
        }
        Variant::Symmetric => {
            let bh = Blocks::new(&part, flavor, f, h);
            let bg = Blocks::new(&part, flavor, f, g);
            block_l2(&part, g, j, flavor) * bracket(&bh, j, d, false, true)
                + block_l2(&part, h, j, flavor) * bracket(&bg, j, d, false, true)
        }
    }
}

/// Compare a localized triple product against its paraproduct bound.
///
/// `h` is ignored for [`Variant::Commutator`].
pub fn triple_product_bound_check(
    f: &VectorField,
    g: &VectorField,
    h: &VectorField,
    j: i32,
    variant: Variant,
    flavor: Flavor,
) -> Result<RatioReport> {
    let grid = f.grid();
    grid.ensure_same(&g.grid())?;
    grid.ensure_same(&h.grid())?;
    if !f.is_solenoidal() {
        return Err(Error::NonSolenoidal {
            residual: f.divergence_residual(),
        });
    }
    let part = DyadicPartition::for_grid(grid);
    part.check_block(j, flavor)?;
    let lhs = match variant {
        Variant::Transport => localized_pairing(&part, flavor, f, g, h, j)?.abs(),
        Variant::Commutator => localized_pairing(&part, flavor, f, g, g, j)?.abs(),
        Variant::Symmetric => (localized_pairing(&part, flavor, f, h, g, j)?
            + localized_pairing(&part, flavor, f, g, h, j)?)
        .abs(),
    };
    let rhs = triple_product_rhs(f, g, h, j, variant, flavor);
    Ok(RatioReport::new(
        "triple-product",
        variant.to_string(),
        j,
        grid.n(),
        lhs,
        rhs,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::{random_solenoidal, rng_from_seed};
    use crate::spectral::{Grid, SpectralField};

    #[test]
    fn zero_transport_and_constant_target() {
        let g = Grid::new(2, 32).unwrap();
        let mut rng = rng_from_seed(2);
        let v = random_solenoidal(g, 1.0, 15.0, 1.0, &mut rng);
        let w = random_solenoidal(g, 1.0, 15.0, 1.0, &mut rng);
        let zero = VectorField::zeros(g);
        let r =
            triple_product_bound_check(&zero, &v, &w, 2, Variant::Transport, Flavor::Homogeneous)
                .unwrap();
        assert_eq!(r.lhs, 0.0);
        let constant = VectorField::new(vec![
            SpectralField::from_fn(g, |_| 1.0),
            SpectralField::from_fn(g, |_| -2.0),
        ])
        .unwrap();
        let r = triple_product_bound_check(
            &v,
            &constant,
            &w,
            2,
            Variant::Transport,
            Flavor::Inhomogeneous,
        )
        .unwrap();
        assert!(r.lhs < 1e-14);
    }

    #[test]
    fn divergent_transport_rejected() {
        let g = Grid::new(2, 16).unwrap();
        let grad = crate::spectral::gradient(&SpectralField::from_fn(g, |x| x[0].sin()));
        let r = triple_product_bound_check(
            &grad,
            &grad,
            &grad,
            0,
            Variant::Commutator,
            Flavor::Homogeneous,
        );
        assert!(matches!(r, Err(Error::NonSolenoidal { .. })));
    }

    #[test]
    fn random_triples_have_finite_ratios() {
        let g = Grid::new(2, 32).unwrap();
        let mut rng = rng_from_seed(6);
        let f = random_solenoidal(g, 1.0, 15.0, 1.0, &mut rng);
        let gg = random_solenoidal(g, 1.0, 15.0, 1.0, &mut rng);
        let h = random_solenoidal(g, 1.0, 15.0, 1.0, &mut rng);
        for v in Variant::ALL {
            for j in 0..=4 {
                let r = triple_product_bound_check(&f, &gg, &h, j, v, Flavor::Homogeneous).unwrap();
                let ratio = r.ratio.unwrap();
                assert!(ratio.is_finite() && ratio < 10.0, "{v} j={j} ratio={ratio}");
            }
        }
    }
}
