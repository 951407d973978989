use rayon::prelude::*;

use super::integrator::dissipation_rates;
use super::monitor::dissipation_profile;
use super::picard::IterateState;
use super::{Regime, SchemeConfig};
use crate::checks::ensemble::commutator_extremal;
use crate::checks::{cancellation_check, member_rng};
use crate::error::{Error, Result};
use crate::littlewood_paley::{block_l2, block_tilde_l2, delta_j_of, DyadicPartition, Flavor};
use crate::norms::Trajectory;
use crate::random::random_solenoidal;
use crate::spectral::{
    advect, advection_integral, gradient, inner, leray_project, sup_norm, Grid, VectorField,
};

/// Snapshot of both iterate levels at one instant.
#[derive(Clone, Copy, Debug)]
pub struct Levels<'a> {
    /// `u^{(n)}`, `b^{(n)}`.
    pub u: &'a VectorField,
    pub b: &'a VectorField,
    /// `u^{(n+1)}`, `b^{(n+1)}`.
    pub next_u: &'a VectorField,
    pub next_b: &'a VectorField,
}

/// One side of an a priori inequality: the measured left side against the
/// sum of its bounding terms.
#[derive(Clone, Debug, PartialEq)]
pub struct RateCheck {
    pub name: &'static str,
    /// Left side with the rate taken from the equation.
    pub lhs: f64,
    /// Left side with the rate from centered differences of the trajectory.
    pub lhs_fd: Option<f64>,
    /// Contribution of the transport and coupling terms alone, without the
    /// dissipation: the part the bounding terms control.
    pub nonlinear: f64,
    /// Sum of the bounding terms, unit constants.
    pub bound: f64,
}

impl RateCheck {
    /// `max(lhs, 0) / bound`, `None` when the bound vanishes.
    pub fn ratio(&self) -> Option<f64> {
        (self.bound > 0.0).then(|| self.lhs.max(0.0) / self.bound)
    }

    /// `|nonlinear| / bound`, `None` when the bound vanishes.
    pub fn nonlinear_ratio(&self) -> Option<f64> {
        (self.bound > 0.0).then(|| self.nonlinear.abs() / self.bound)
    }
}

/// Named a priori terms at one block and instant.
#[derive(Clone, Debug, PartialEq)]
pub struct TermReport {
    pub j: i32,
    pub t: Option<f64>,
    pub terms: Vec<(&'static str, f64)>,
    pub checks: Vec<RateCheck>,
    /// Coupled scheme only: normalized residual of the transport cancellation
    /// `∫ S_j b·∇Δ_j U·Δ_j B + ∫ S_j b·∇Δ_j B·Δ_j U`.
    pub cancellation: Option<f64>,
    /// Coupled scheme only: `|∫ b·∇B·U + ∫ b·∇U·B|` over `‖b‖‖∇B‖‖U‖`-type scale.
    pub coupling_residual: Option<f64>,
}

impl TermReport {
    pub fn term(&self, name: &str) -> Option<f64> {
        self.terms.iter().find(|(n, _)| *n == name).map(|(_, v)| *v)
    }

    pub fn total(&self) -> f64 {
        self.terms.iter().map(|(_, v)| v).sum()
    }
}

struct Profile {
    a: Vec<f64>,
    tilde: Vec<f64>,
    j0: i32,
}

impl Profile {
    fn new(part: &DyadicPartition, f: &VectorField, flavor: Flavor) -> Self {
        let j0 = part.j_min(flavor);
        let range = j0..=part.j_max() + 1;
        Self {
            a: range
                .clone()
                .map(|j| block_l2(part, f, j, flavor))
                .collect(),
            tilde: range.map(|j| block_tilde_l2(part, f, j, flavor)).collect(),
            j0,
        }
    }

    fn at(&self, j: i32) -> f64 {
        usize::try_from(j - self.j0)
            .ok()
            .and_then(|i| self.a.get(i))
            .copied()
            .unwrap_or(0.0)
    }

    fn tilde_at(&self, j: i32) -> f64 {
        usize::try_from(j - self.j0)
            .ok()
            .and_then(|i| self.tilde.get(i))
            .copied()
            .unwrap_or(0.0)
    }

    fn top(&self) -> i32 {
        self.j0 + self.a.len() as i32 - 1
    }

    /// `Σ_{m <= j-1} 2^{sm} ‖Δ_m f‖`.
    fn low(&self, j: i32, s: f64) -> f64 {
        (self.j0..j)
            .map(|m| (s * m as f64).exp2() * self.at(m))
            .sum()
    }
}

/// `2^j Σ_{k >= j-1} 2^{dk/2} ‖Δ_k f‖ ‖Δ̃_k g‖`.
fn high(f: &Profile, g: &Profile, j: i32, d: f64) -> f64 {
    let top = f.top().max(g.top());
    (j as f64).exp2()
        * ((j - 1)..=top)
            .map(|k| (d / 2.0 * k as f64).exp2() * f.at(k) * g.tilde_at(k))
            .sum::<f64>()
}

fn adv(u: &VectorField, f: &VectorField) -> VectorField {
    advect(u, f).expect("fields share a grid").into_value()
}

/// Forcings of `u^{(n+1)}` and `b^{(n+1)}` in the scheme, and the
/// dissipation `ν(-Δ)^α u^{(n+1)}`.
fn forcings(lv: &Levels, cfg: &SchemeConfig) -> (VectorField, VectorField, VectorField) {
    let lambda = dissipation_rates(lv.u.grid(), cfg.alpha, cfg.nu);
    let diss = lv.next_u.map(|c| c.multiply(|i| lambda[i]));
    let (fu, fb) = match cfg.regime {
        Regime::AlphaGE1 => (
            leray_project(&(&adv(lv.b, lv.b) - &adv(lv.u, lv.next_u))),
            &adv(lv.b, lv.u) - &adv(lv.u, lv.next_b),
        ),
        Regime::AlphaLT1 => (
            leray_project(&(&adv(lv.b, lv.next_b) - &adv(lv.u, lv.next_u))),
            &adv(lv.b, lv.next_u) - &adv(lv.u, lv.next_b),
        ),
    };
    (fu, fb, diss)
}

fn c0_at(cfg: &SchemeConfig, grid: Grid, j: i32) -> f64 {
    dissipation_profile(grid, cfg.alpha, cfg.nu, cfg.flavor())
        .into_iter()
        .find(|(k, _)| *k == j)
        .and_then(|(_, c)| c)
        .unwrap_or(0.0)
}

/// Time derivatives of `‖Δ_j U‖` and `‖Δ_j B‖` along a trajectory pair, by
/// centered differences (one-sided at the ends).
fn fd_rates(
    traj: &Trajectory<VectorField>,
    part: &DyadicPartition,
    j: i32,
    flavor: Flavor,
    i: usize,
    square: bool,
) -> f64 {
    let f = |k: usize| {
        let v = block_l2(part, &traj.states()[k], j, flavor);
        if square {
            v * v
        } else {
            v
        }
    };
    let last = traj.len() - 1;
    let dt = traj.dt();
    if i == 0 {
        (f(1) - f(0)) / dt
    } else if i == last {
        (f(last) - f(last - 1)) / dt
    } else {
        (f(i + 1) - f(i - 1)) / (2.0 * dt)
    }
}

/// Evaluate every a priori term of the regime at block `j` from one snapshot.
pub fn term_report_at(lv: &Levels, cfg: &SchemeConfig, j: i32) -> Result<TermReport> {
    let grid = lv.u.grid();
    let flavor = cfg.flavor();
    let part = DyadicPartition::for_grid(grid);
    part.check_block(j, flavor)?;
    let d = grid.d() as f64;
    let s1 = 1.0 + d / 2.0;
    let two_j = (j as f64).exp2();
    let pu = Profile::new(&part, lv.u, flavor);
    let pb = Profile::new(&part, lv.b, flavor);
    let pnu = Profile::new(&part, lv.next_u, flavor);
    let pnb = Profile::new(&part, lv.next_b, flavor);
    let (fu, fb, diss) = forcings(lv, cfg);
    let du = &fu - &diss;
    let c0 = c0_at(cfg, grid, j);
    let damp = c0 * (2.0 * cfg.alpha * j as f64).exp2();
    let local = |f: &VectorField| delta_j_of(&part, f, j, flavor);
    let (lnu, lnb) = (local(lv.next_u), local(lv.next_b));
    let norm_rate = |rate: &VectorField, cur: &VectorField, n: f64| -> Result<f64> {
        if n == 0.0 {
            return Ok(0.0);
        }
        Ok(inner(&local(rate), cur)? / n)
    };
    let nu_j = pnu.at(j);
    let nb_j = pnb.at(j);
    let mut report = TermReport {
        j,
        t: None,
        terms: Vec::new(),
        checks: Vec::new(),
        cancellation: None,
        coupling_residual: None,
    };
    match cfg.regime {
        Regime::AlphaGE1 => {
            report.terms = vec![
                ("J1", nu_j * pu.low(j, s1)),
                ("J2", pu.at(j) * pnu.low(j, s1)),
                ("J3", high(&pu, &pnu, j, d)),
                ("J4", two_j * pb.at(j) * pb.low(j, d / 2.0)),
                ("J5", pb.at(j) * pb.low(j, s1)),
                ("J6", high(&pb, &pb, j, d)),
                ("K1", nb_j * pu.low(j, s1)),
                ("K2", pu.at(j) * pnb.low(j, s1)),
                ("K3", high(&pu, &pnb, j, d)),
                ("K4", two_j * pu.at(j) * pb.low(j, d / 2.0)),
                ("K5", pb.at(j) * pu.low(j, s1)),
                ("K6", high(&pb, &pu, j, d)),
            ];
            let jsum: f64 = report.terms[..6].iter().map(|t| t.1).sum();
            let ksum: f64 = report.terms[6..].iter().map(|t| t.1).sum();
            report.checks = vec![
                RateCheck {
                    name: "velocity",
                    lhs: norm_rate(&du, &lnu, nu_j)? + damp * nu_j,
                    lhs_fd: None,
                    nonlinear: norm_rate(&fu, &lnu, nu_j)?,
                    bound: jsum,
                },
                RateCheck {
                    name: "magnetic",
                    lhs: norm_rate(&fb, &lnb, nb_j)?,
                    lhs_fd: None,
                    nonlinear: norm_rate(&fb, &lnb, nb_j)?,
                    bound: ksum,
                },
            ];
        }
        Regime::AlphaLT1 => {
            let l = |name, v| (name, v);
            report.terms = vec![
                l("L1", nu_j * nu_j * pu.low(j, s1)),
                l("L2", nu_j * pu.at(j) * pnu.low(j, s1)),
                l("L3", nu_j * high(&pu, &pnu, j, d)),
                l("L4", nb_j * nb_j * pu.low(j, s1)),
                l("L5", nb_j * pu.at(j) * pnb.low(j, s1)),
                l("L6", nb_j * high(&pu, &pnb, j, d)),
                l("L7", nu_j * nb_j * pb.low(j, s1)),
                l("L8", nu_j * pb.at(j) * pnb.low(j, s1)),
                l("L9", nu_j * high(&pb, &pnb, j, d)),
                l("L10", nb_j * pb.at(j) * pnu.low(j, s1)),
                l("L11", nb_j * high(&pb, &pnu, j, d)),
            ];
            let transfer = 2.0 * inner(&local(&fu), &lnu)? + 2.0 * inner(&local(&fb), &lnb)?;
            let energy_rate = transfer - 2.0 * inner(&local(&diss), &lnu)?;
            report.checks = vec![RateCheck {
                name: "energy",
                lhs: energy_rate + damp * nu_j * nu_j,
                lhs_fd: None,
                nonlinear: transfer,
                bound: report.total(),
            }];
            report.cancellation =
                Some(cancellation_check(lv.b, lv.next_u, lv.next_b, j, flavor)?.normalized);
            let pair = advection_integral(lv.b, lv.next_b, lv.next_u)?
                + advection_integral(lv.b, lv.next_u, lv.next_b)?;
            let grad = |f: &VectorField| -> f64 {
                f.components()
                    .iter()
                    .map(|c| gradient(c).l2_norm().powi(2))
                    .sum::<f64>()
                    .sqrt()
            };
            let sup_b =
                lv.b.components()
                    .iter()
                    .map(|c| sup_norm(c, 2).powi(2))
                    .sum::<f64>()
                    .sqrt();
            let scale = sup_b
                * (grad(lv.next_b) * lv.next_u.l2_norm() + grad(lv.next_u) * lv.next_b.l2_norm());
            report.coupling_residual = Some(pair.abs() / (scale + f64::MIN_POSITIVE));
        }
    }
    Ok(report)
}

/// The a priori terms of iterate `state` (level `n+1`) against `prev`
/// (level `n`) at block `j` and instant `t`, with both the equation rate
/// and the finite-difference rate.
pub fn aprior_term_report(
    state: &IterateState,
    prev: &IterateState,
    cfg: &SchemeConfig,
    j: i32,
    t: f64,
) -> Result<TermReport> {
    if state.n != prev.n + 1 {
        return Err(Error::Degenerate(format!(
            "iterates {} and {} are not consecutive",
            prev.n, state.n
        )));
    }
    let i = state.u.index_of(t)?;
    let pi = prev.u.index_of(t)?;
    let lv = Levels {
        u: &prev.u.states()[pi],
        b: &prev.b.states()[pi],
        next_u: &state.u.states()[i],
        next_b: &state.b.states()[i],
    };
    let mut report = term_report_at(&lv, cfg, j)?;
    report.t = Some(t);
    let part = DyadicPartition::for_grid(lv.u.grid());
    let flavor = cfg.flavor();
    let c0 = c0_at(cfg, lv.u.grid(), j);
    let damp = c0 * (2.0 * cfg.alpha * j as f64).exp2();
    let nu_j = block_l2(&part, lv.next_u, j, flavor);
    for check in &mut report.checks {
        check.lhs_fd = Some(match check.name {
            "velocity" => fd_rates(&state.u, &part, j, flavor, i, false) + damp * nu_j,
            "magnetic" => fd_rates(&state.b, &part, j, flavor, i, false),
            _ => {
                fd_rates(&state.u, &part, j, flavor, i, true)
                    + fd_rates(&state.b, &part, j, flavor, i, true)
                    + damp * nu_j * nu_j
            }
        });
    }
    Ok(report)
}

/// Largest `|nonlinear| / bound` seen over an ensemble, overall and per block.
#[derive(Clone, Debug, PartialEq)]
pub struct MeasuredConstant {
    pub c: f64,
    pub per_block: Vec<(i32, f64)>,
    pub members: usize,
}

/// Measure the constant of the a priori inequalities.
///
/// `broadband` members draw all four fields at unit amplitude over the whole
/// band and are evaluated at every nonempty block. For each block `j >= 2`,
/// `per_shell` members pair low-frequency `u^{(n)}`, `b^{(n)}` (`|k| <= 1.5`)
/// with new iterates that extremize the localized transport commutator at
/// `j`; random members alone leave the bounds far from tight.
pub fn measure_constant(
    cfg: &SchemeConfig,
    broadband: usize,
    per_shell: usize,
    seed: u64,
) -> Result<MeasuredConstant> {
    cfg.validate()?;
    let grid = cfg.grid()?;
    let part = DyadicPartition::for_grid(grid);
    let top = grid.n() as f64 / 2.0 - 1.0;
    let flavor = cfg.flavor();
    let blocks: Vec<i32> = part
        .range(flavor)
        .filter(|&j| part.block_table(j, flavor).iter().any(|w| *w > 0.0))
        .collect();
    let shells: Vec<i32> = (2..=part.j_max()).collect();
    let total = broadband + shells.len() * per_shell;
    let ratio = |lv: &Levels, j: i32| -> Result<f64> {
        let r = term_report_at(lv, cfg, j)?;
        Ok(r.checks
            .iter()
            .filter_map(RateCheck::nonlinear_ratio)
            .fold(0.0, f64::max))
    };
    let per_member: Vec<Result<Vec<(i32, f64)>>> = (0..total)
        .into_par_iter()
        .map(|i| {
            let mut rng = member_rng(seed, i as u64);
            if i < broadband {
                let mut f = || random_solenoidal(grid, 1.0, top, 1.0, &mut rng);
                let (u, b, nu, nb) = (f(), f(), f(), f());
                let lv = Levels {
                    u: &u,
                    b: &b,
                    next_u: &nu,
                    next_b: &nb,
                };
                blocks.iter().map(|&j| Ok((j, ratio(&lv, j)?))).collect()
            } else {
                let j = shells[(i - broadband) / per_shell];
                let lo = 0.75 * (j as f64).exp2();
                let hi = lo * 16.0 / 9.0;
                let u = random_solenoidal(grid, 1.0, 1.5, 1.0, &mut rng);
                let b = random_solenoidal(grid, 1.0, 1.5, 1.0, &mut rng);
                let g = random_solenoidal(grid, lo, hi, 1.0, &mut rng);
                let h = random_solenoidal(grid, lo, hi, 1.0, &mut rng);
                let nu = commutator_extremal(&u, &g, j, flavor)?;
                let nb = commutator_extremal(&u, &h, j, flavor)?;
                let lv = Levels {
                    u: &u,
                    b: &b,
                    next_u: &nu,
                    next_b: &nb,
                };
                Ok(vec![(j, ratio(&lv, j)?)])
            }
        })
        .collect();
    let mut per_block: Vec<(i32, f64)> = blocks.iter().map(|&j| (j, 0.0)).collect();
    for m in per_member {
        for (j, x) in m? {
            if let Some(slot) = per_block.iter_mut().find(|(k, _)| *k == j) {
                slot.1 = slot.1.max(x);
            }
        }
    }
    let c = per_block.iter().map(|p| p.1).fold(0.0, f64::max);
    Ok(MeasuredConstant {
        c,
        per_block,
        members: total,
    })
}
