use super::picard::IterateState;
use super::{Regime, SchemeConfig};
use crate::error::Result;
use crate::littlewood_paley::{block_l2_profile, DyadicPartition, Flavor};
use crate::norms::{
    besov_from_profile, besov_norm, chemin_lerner_from_profiles, chemin_lerner_norm,
    time_outer_norm, NormSpec, Trajectory,
};
use crate::spectral::{Grid, VectorField};

/// Per-block dissipation constant: the minimum of `ν|k|^{2α} / 2^{2αj}` over
/// the lattice modes where `Δ_j` is nonzero. Empty blocks give `None`.
pub fn dissipation_profile(
    grid: Grid,
    alpha: f64,
    nu: f64,
    flavor: Flavor,
) -> Vec<(i32, Option<f64>)> {
    let part = DyadicPartition::for_grid(grid);
    let modes = grid.modes();
    part.range(flavor)
        .map(|j| {
            let w = part.block_table(j, flavor);
            let scale = (2.0 * alpha * j as f64).exp2();
            let c = modes
                .abs
                .iter()
                .zip(w.iter())
                .filter(|(a, w)| **a > 0.0 && **w > 0.0)
                .map(|(a, _)| nu * a.powf(2.0 * alpha) / scale)
                .fold(None, |m: Option<f64>, x| Some(m.map_or(x, |m| m.min(x))));
            (j, c)
        })
        .collect()
}

/// The global dissipation constant: the smallest per-block value over
/// `j >= 0` for inhomogeneous blocks (the low block contains `k = 0`) and
/// over every nonempty block for homogeneous ones.
pub fn dissipation_constant(grid: Grid, alpha: f64, nu: f64, flavor: Flavor) -> f64 {
    dissipation_profile(grid, alpha, nu, flavor)
        .into_iter()
        .filter(|(j, _)| flavor == Flavor::Homogeneous || *j >= 0)
        .filter_map(|(_, c)| c)
        .fold(f64::INFINITY, f64::min)
}

/// Regularity indices of the monitored norms.
fn ge1_indices(d: usize, alpha: f64) -> (f64, f64) {
    let d = d as f64;
    (d / 2.0 + 1.0 - 2.0 * alpha, d / 2.0 + 1.0 - alpha)
}

/// `‖(u, b)‖_{B^σ_{2,∞}}` with the two fields combined blockwise.
pub fn joint_besov(u: &VectorField, b: &VectorField, sigma: f64) -> f64 {
    let part = DyadicPartition::for_grid(u.grid());
    let flavor = Flavor::Inhomogeneous;
    let profile = joint_profile(&part, u, b, flavor);
    let spec = NormSpec::besov(sigma, 2.0, f64::INFINITY, flavor).expect("valid exponents");
    besov_from_profile(&profile, part.j_min(flavor), &spec)
}

fn joint_profile(
    part: &DyadicPartition,
    u: &VectorField,
    b: &VectorField,
    flavor: Flavor,
) -> Vec<f64> {
    block_l2_profile(part, u, flavor)
        .into_iter()
        .zip(block_l2_profile(part, b, flavor))
        .map(|(x, y)| x.hypot(y))
        .collect()
}

/// `‖(u, b)‖_{L̃^r(0,T; B^σ_{2,∞})}` with the fields combined blockwise.
pub fn joint_chemin_lerner(
    u: &Trajectory<VectorField>,
    b: &Trajectory<VectorField>,
    sigma: f64,
    r: f64,
) -> Result<f64> {
    let part = DyadicPartition::for_grid(u.first().grid());
    let flavor = Flavor::Inhomogeneous;
    let profiles: Vec<Vec<f64>> = u
        .states()
        .iter()
        .zip(b.states())
        .map(|(x, y)| joint_profile(&part, x, y, flavor))
        .collect();
    let spec = NormSpec::besov(sigma, 2.0, f64::INFINITY, flavor)?.with_time(r)?;
    chemin_lerner_from_profiles(&profiles, part.j_min(flavor), u.dt(), &spec)
}

/// The radius `M` of the solution space, from the initial data.
pub fn y_radius(cfg: &SchemeConfig, u0: &VectorField, b0: &VectorField) -> Result<f64> {
    match cfg.regime {
        Regime::AlphaGE1 => {
            let (su, sb) = ge1_indices(cfg.d, cfg.alpha);
            let nu0 = besov_norm(u0, &NormSpec::l2_sum(su, Flavor::Homogeneous))?;
            let nb0 = besov_norm(b0, &NormSpec::l2_sum(sb, Flavor::Homogeneous))?;
            Ok(2.0 * (nu0 + nb0))
        }
        Regime::AlphaLT1 => {
            let sigma = lt1_sigma(cfg)?;
            let n = joint_besov(u0, b0, sigma);
            let c0 = dissipation_constant(cfg.grid()?, cfg.alpha, cfg.nu, Flavor::Inhomogeneous);
            Ok(2.0 * n.max(n / c0.sqrt()))
        }
    }
}

fn lt1_sigma(cfg: &SchemeConfig) -> Result<f64> {
    cfg.sigma.ok_or_else(|| {
        crate::error::invalid("sigma", "the coupled scheme needs a regularity index")
    })
}

/// One monitored quantity and its limit.
#[derive(Clone, Debug, PartialEq)]
pub struct YBound {
    pub name: String,
    pub value: f64,
    pub limit: f64,
    pub holds: bool,
}

impl YBound {
    fn new(name: &str, value: f64, limit: f64) -> Self {
        Self {
            name: name.to_string(),
            value,
            limit,
            holds: value <= limit,
        }
    }
}

/// Membership of one iterate in the solution space.
#[derive(Clone, Debug, PartialEq)]
pub struct YMembershipReport {
    pub regime: Regime,
    pub iteration: usize,
    pub m: f64,
    pub delta: f64,
    pub bounds: Vec<YBound>,
}

impl YMembershipReport {
    pub fn all_hold(&self) -> bool {
        self.bounds.iter().all(|b| b.holds)
    }

    pub fn value(&self, name: &str) -> Option<f64> {
        self.bounds.iter().find(|b| b.name == name).map(|b| b.value)
    }
}

/// Evaluate the space-time norms that define the solution space and compare
/// them with `M` and `δ`.
pub fn monitor_y(
    state: &IterateState,
    cfg: &SchemeConfig,
    u0: &VectorField,
    b0: &VectorField,
    delta: f64,
) -> Result<YMembershipReport> {
    let m = y_radius(cfg, u0, b0)?;
    let bounds = match cfg.regime {
        Regime::AlphaGE1 => {
            let (su, sb) = ge1_indices(cfg.d, cfg.alpha);
            let d = cfg.d as f64;
            let h = Flavor::Homogeneous;
            let inf = f64::INFINITY;
            let u_inf = chemin_lerner_norm(&state.u, &NormSpec::l2_sum(su, h).with_time(inf)?)?;
            let b_inf = chemin_lerner_norm(&state.b, &NormSpec::l2_sum(sb, h).with_time(inf)?)?;
            let u_one = time_outer_norm(
                &state.u,
                &NormSpec::l2_sum(d / 2.0 + 1.0, h).with_time(1.0)?,
            )?;
            let u_two = chemin_lerner_norm(&state.u, &NormSpec::l2_sum(sb, h).with_time(2.0)?)?;
            vec![
                YBound::new("u_Linf_B(d/2+1-2a)", u_inf, m),
                YBound::new("b_Linf_B(d/2+1-a)", b_inf, m),
                YBound::new("u_L1_B(d/2+1)", u_one, delta),
                YBound::new("u_L2_B(d/2+1-a)", u_two, delta),
            ]
        }
        Regime::AlphaLT1 => {
            let sigma = lt1_sigma(cfg)?;
            let ub = joint_chemin_lerner(&state.u, &state.b, sigma, f64::INFINITY)?;
            let spec =
                NormSpec::besov(sigma + cfg.alpha, 2.0, f64::INFINITY, Flavor::Inhomogeneous)?
                    .with_time(2.0)?;
            let u_two = chemin_lerner_norm(&state.u, &spec)?;
            vec![
                YBound::new("ub_Linf_B(sigma)", ub, m),
                YBound::new("u_L2_B(sigma+a)", u_two, m),
            ]
        }
    };
    Ok(YMembershipReport {
        regime: cfg.regime,
        iteration: state.n,
        m,
        delta,
        bounds,
    })
}

/// Size of `next - prev` in the regime's monitored norm: the two
/// `L̃^∞` norms of the lagged scheme, or the joint `L̃^∞ B^σ_{2,∞}` norm.
pub fn difference_norm(
    next: &IterateState,
    prev: &IterateState,
    cfg: &SchemeConfig,
) -> Result<f64> {
    let (du, db) = next.difference(prev)?;
    match cfg.regime {
        Regime::AlphaGE1 => {
            let (su, sb) = ge1_indices(cfg.d, cfg.alpha);
            let h = Flavor::Homogeneous;
            let inf = f64::INFINITY;
            Ok(
                chemin_lerner_norm(&du, &NormSpec::l2_sum(su, h).with_time(inf)?)?
                    + chemin_lerner_norm(&db, &NormSpec::l2_sum(sb, h).with_time(inf)?)?,
            )
        }
        Regime::AlphaLT1 => joint_chemin_lerner(&du, &db, lt1_sigma(cfg)?, f64::INFINITY),
    }
}
