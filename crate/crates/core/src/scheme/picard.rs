use rayon::join;

use super::integrator::Propagator;
use super::monitor::y_radius;
use super::{Regime, SchemeConfig};
use crate::error::{invalid, Error, Result};
use crate::littlewood_paley::{s_j_of, DyadicPartition, Flavor};
use crate::norms::{uniform_times, Trajectory};
use crate::spectral::{advect, leray_project, VectorField};

/// Blow-up guard: any sampled `L²` norm above this multiple of `M` aborts.
pub const DIVERGENCE_FACTOR: f64 = 1e6;

/// One iterate `(u^{(n)}, b^{(n)})` sampled on the run's time grid.
#[derive(Clone, Debug)]
pub struct IterateState {
    pub u: Trajectory<VectorField>,
    pub b: Trajectory<VectorField>,
    pub n: usize,
}

impl IterateState {
    /// Both fields frozen in time.
    pub fn constant(u: VectorField, b: VectorField, cfg: &SchemeConfig, n: usize) -> Result<Self> {
        let steps = cfg.steps();
        Ok(Self {
            u: Trajectory::constant(u, cfg.horizon, steps)?,
            b: Trajectory::constant(b, cfg.horizon, steps)?,
            n,
        })
    }

    pub fn times(&self) -> &[f64] {
        self.u.times()
    }

    /// Largest relative divergence over every stored field.
    pub fn max_divergence(&self) -> f64 {
        self.u
            .states()
            .iter()
            .chain(self.b.states())
            .map(VectorField::divergence_residual)
            .fold(0.0, f64::max)
    }

    /// `u^{(n)} - other.u`, `b^{(n)} - other.b` at every shared instant.
    pub fn difference(
        &self,
        other: &IterateState,
    ) -> Result<(Trajectory<VectorField>, Trajectory<VectorField>)> {
        if self.times().len() != other.times().len() {
            return Err(invalid("state", "trajectories are sampled differently"));
        }
        let diff = |a: &Trajectory<VectorField>, b: &Trajectory<VectorField>| {
            let states = a
                .states()
                .iter()
                .zip(b.states())
                .map(|(x, y)| x - y)
                .collect();
            Trajectory::new(a.times().to_vec(), states)
        };
        Ok((diff(&self.u, &other.u)?, diff(&self.b, &other.b)?))
    }
}

/// `S_{n+1} u₀`, `S_{n+1} b₀` in the given flavor.
pub fn truncate_initial(
    u0: &VectorField,
    b0: &VectorField,
    n: usize,
    flavor: Flavor,
) -> (VectorField, VectorField) {
    let part = DyadicPartition::for_grid(u0.grid());
    let j = n as i32 + 1;
    (s_j_of(&part, u0, j, flavor), s_j_of(&part, b0, j, flavor))
}

/// The first iterate: `(S_2 u₀, S_2 b₀)` held constant on `[0, T]`.
pub fn initial_iterate(
    u0: &VectorField,
    b0: &VectorField,
    cfg: &SchemeConfig,
) -> Result<IterateState> {
    let (u, b) = truncate_initial(u0, b0, 1, cfg.flavor());
    IterateState::constant(u, b, cfg, 1)
}

fn check_inputs(
    prev: &IterateState,
    u0: &VectorField,
    b0: &VectorField,
    cfg: &SchemeConfig,
) -> Result<()> {
    cfg.validate()?;
    let grid = cfg.grid()?;
    grid.ensure_same(&u0.grid())?;
    grid.ensure_same(&b0.grid())?;
    for f in [u0, b0] {
        if !f.is_solenoidal() {
            return Err(Error::NonSolenoidal {
                residual: f.divergence_residual(),
            });
        }
    }
    if prev.u.len() != cfg.steps() + 1 || (prev.u.span() - cfg.horizon).abs() > 1e-9 * cfg.horizon {
        return Err(invalid(
            "prev",
            format!(
                "previous iterate has {} samples on [0, {}], expected {} on [0, {}]",
                prev.u.len(),
                prev.u.span(),
                cfg.steps() + 1,
                cfg.horizon
            ),
        ));
    }
    Ok(())
}

fn adv(u: &VectorField, f: &VectorField) -> VectorField {
    advect(u, f).expect("fields share a grid").into_value()
}

fn midpoint(a: &VectorField, b: &VectorField) -> VectorField {
    &(a + b) * 0.5
}

struct Guard {
    limit: f64,
    iteration: usize,
}

impl Guard {
    fn check(&self, name: &str, v: &VectorField) -> Result<()> {
        let value = v.l2_norm();
        if !value.is_finite() || value > self.limit {
            return Err(Error::Divergence {
                iteration: self.iteration,
                norm: format!("L2 norm of {name}"),
                value,
                limit: self.limit,
            });
        }
        Ok(())
    }
}

fn guard_for(
    u0: &VectorField,
    b0: &VectorField,
    cfg: &SchemeConfig,
    iteration: usize,
) -> Result<Guard> {
    let m = y_radius(cfg, u0, b0)?;
    Ok(Guard {
        limit: DIVERGENCE_FACTOR * m.max(f64::MIN_POSITIVE),
        iteration,
    })
}

/// One step of the lagged scheme: the velocity equation is linear in the new
/// iterate (advected by the old one), the magnetic forcing is fully lagged.
pub fn picard_step_ge1(
    prev: &IterateState,
    u0: &VectorField,
    b0: &VectorField,
    cfg: &SchemeConfig,
) -> Result<IterateState> {
    check_inputs(prev, u0, b0, cfg)?;
    if cfg.regime != Regime::AlphaGE1 {
        return Err(invalid("regime", "picard_step_ge1 needs alpha >= 1"));
    }
    let steps = cfg.steps();
    let h = cfg.step();
    let prop = Propagator::new(cfg.grid()?, cfg.alpha, cfg.nu, h);
    let guard = guard_for(u0, b0, cfg, prev.n + 1)?;
    let (mut uu, mut bb) = truncate_initial(u0, b0, prev.n, cfg.flavor());
    let mut us = Vec::with_capacity(steps + 1);
    let mut bs = Vec::with_capacity(steps + 1);
    us.push(uu.clone());
    bs.push(bb.clone());
    let (pu, pb) = (prev.u.states(), prev.b.states());
    for i in 0..steps {
        let (ui, bi) = (&pu[i], &pb[i]);
        let (u_new, b_new) = join(
            || {
                let forcing = leray_project(&(&adv(bi, bi) - &adv(ui, &uu)));
                leray_project(&prop.advance(&uu, &forcing))
            },
            || {
                let um = midpoint(ui, &pu[i + 1]);
                let bm = midpoint(bi, &pb[i + 1]);
                let k1 = &adv(bi, ui) - &adv(ui, &bb);
                let half = &bb + &(&k1 * (h / 2.0));
                let k2 = &adv(&bm, &um) - &adv(&um, &half);
                leray_project(&(&bb + &(&k2 * h)))
            },
        );
        guard.check("u", &u_new)?;
        guard.check("b", &b_new)?;
        uu = u_new;
        bb = b_new;
        us.push(uu.clone());
        bs.push(bb.clone());
    }
    let times = uniform_times(cfg.horizon, steps);
    Ok(IterateState {
        u: Trajectory::new(times.clone(), us)?,
        b: Trajectory::new(times, bs)?,
        n: prev.n + 1,
    })
}

/// Frozen-coefficient operator of the coupled scheme without dissipation:
/// `(ℙ(-u·∇U + b·∇B), -u·∇B + b·∇U)`.
fn coupled_rhs(
    u: &VectorField,
    b: &VectorField,
    uu: &VectorField,
    bb: &VectorField,
) -> (VectorField, VectorField) {
    join(
        || leray_project(&(&adv(b, bb) - &adv(u, uu))),
        || &adv(b, uu) - &adv(u, bb),
    )
}

/// One step of the coupled scheme: `(u^{(n+1)}, b^{(n+1)})` solve one linear
/// system whose coefficients come from iterate `n`. The velocity part is
/// integrated with an integrating factor and a midpoint stage, so the skew
/// magnetic coupling is treated identically in both equations.
pub fn picard_step_lt1(
    prev: &IterateState,
    u0: &VectorField,
    b0: &VectorField,
    cfg: &SchemeConfig,
) -> Result<IterateState> {
    check_inputs(prev, u0, b0, cfg)?;
    if cfg.regime != Regime::AlphaLT1 {
        return Err(invalid("regime", "picard_step_lt1 needs alpha < 1"));
    }
    let steps = cfg.steps();
    let h = cfg.step();
    let grid = cfg.grid()?;
    let full = Propagator::new(grid, cfg.alpha, cfg.nu, h);
    let half = Propagator::new(grid, cfg.alpha, cfg.nu, h / 2.0);
    let guard = guard_for(u0, b0, cfg, prev.n + 1)?;
    let (mut uu, mut bb) = truncate_initial(u0, b0, prev.n, cfg.flavor());
    let mut us = Vec::with_capacity(steps + 1);
    let mut bs = Vec::with_capacity(steps + 1);
    us.push(uu.clone());
    bs.push(bb.clone());
    let (pu, pb) = (prev.u.states(), prev.b.states());
    for i in 0..steps {
        let (k1u, k1b) = coupled_rhs(&pu[i], &pb[i], &uu, &bb);
        let uh = half.decay(&(&uu + &(&k1u * (h / 2.0))));
        let bh = &bb + &(&k1b * (h / 2.0));
        let um = midpoint(&pu[i], &pu[i + 1]);
        let bm = midpoint(&pb[i], &pb[i + 1]);
        let (k2u, k2b) = coupled_rhs(&um, &bm, &uh, &bh);
        let u_new = leray_project(&(&full.decay(&uu) + &(&half.decay(&k2u) * h)));
        let b_new = leray_project(&(&bb + &(&k2b * h)));
        guard.check("u", &u_new)?;
        guard.check("b", &b_new)?;
        uu = u_new;
        bb = b_new;
        us.push(uu.clone());
        bs.push(bb.clone());
    }
    let times = uniform_times(cfg.horizon, steps);
    Ok(IterateState {
        u: Trajectory::new(times.clone(), us)?,
        b: Trajectory::new(times, bs)?,
        n: prev.n + 1,
    })
}

/// Dispatch on the configured regime.
pub fn picard_step(
    prev: &IterateState,
    u0: &VectorField,
    b0: &VectorField,
    cfg: &SchemeConfig,
) -> Result<IterateState> {
    match cfg.regime {
        Regime::AlphaGE1 => picard_step_ge1(prev, u0, b0, cfg),
        Regime::AlphaLT1 => picard_step_lt1(prev, u0, b0, cfg),
    }
}
