//! Uniqueness experiments: two solutions, their difference, the `L²` energy
//! balance of the difference and its Gronwall certificate.

use std::io::Write;

use rayon::join;

use crate::error::{invalid, Error, Result};
use crate::littlewood_paley::{block_l2, DyadicPartition, Flavor};
use crate::norms::{chemin_lerner_norm, NormSpec, Trajectory};
use crate::scheme::{
    dissipation_rates, run_picard, IterateState, PicardRun, Regime, RunOptions, SchemeConfig,
};
use crate::spectral::{advection_integral, gradient, sup_norm, Grid, VectorField};

/// Successive-difference threshold that counts as a converged solution.
pub const CONVERGENCE_TOL: f64 = 1e-10;

/// Relative slack allowed by [`gronwall_verify`].
pub const GRONWALL_SLACK: f64 = 0.1;

/// Two solutions on the same time grid and their difference `sol2 - sol1`.
#[derive(Clone, Debug)]
pub struct DifferencePair {
    pub sol1: IterateState,
    pub sol2: IterateState,
    pub tilde_u: Trajectory<VectorField>,
    pub tilde_b: Trajectory<VectorField>,
    pub regime: Regime,
}

impl DifferencePair {
    pub fn new(sol1: IterateState, sol2: IterateState, regime: Regime) -> Result<Self> {
        let (tilde_u, tilde_b) = sol2.difference(&sol1)?;
        Ok(Self {
            sol1,
            sol2,
            tilde_u,
            tilde_b,
            regime,
        })
    }

    pub fn times(&self) -> &[f64] {
        self.tilde_u.times()
    }

    /// `‖ũ‖² + ‖b̃‖²` at every sample.
    pub fn energy(&self) -> Vec<f64> {
        self.tilde_u
            .states()
            .iter()
            .zip(self.tilde_b.states())
            .map(|(u, b)| u.l2_norm().powi(2) + b.l2_norm().powi(2))
            .collect()
    }
}

/// The five integrals of the difference energy balance at one instant.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QTerms {
    /// `-∫ ũ·∇u₁·ũ`.
    pub q1: f64,
    /// `∫ b₂·∇b̃·ũ + ∫ b₂·∇ũ·b̃`.
    pub q2: f64,
    /// `∫ b̃·∇b₁·ũ`.
    pub q3: f64,
    /// `-∫ ũ·∇b₁·b̃`.
    pub q4: f64,
    /// `∫ b̃·∇u₁·b̃`.
    pub q5: f64,
    /// `|q2| / (‖b₂‖_∞ (‖∇b̃‖ ‖ũ‖ + ‖∇ũ‖ ‖b̃‖))`.
    pub q2_normalized: f64,
}

impl QTerms {
    pub fn sum(&self) -> f64 {
        self.q1 + self.q2 + self.q3 + self.q4 + self.q5
    }
}

fn grad_l2(f: &VectorField) -> f64 {
    f.components()
        .iter()
        .map(|c| gradient(c).l2_norm().powi(2))
        .sum::<f64>()
        .sqrt()
}

fn sup(f: &VectorField) -> f64 {
    // Pointwise |f| is bounded by the l² sum of the component maxima.
    f.components()
        .iter()
        .map(|c| sup_norm(c, 2).powi(2))
        .sum::<f64>()
        .sqrt()
}

/// `Q₁, …, Q₅` from solution fields at one instant.
pub fn q_terms(
    u1: &VectorField,
    b1: &VectorField,
    b2: &VectorField,
    tu: &VectorField,
    tb: &VectorField,
) -> Result<QTerms> {
    let q1 = -advection_integral(tu, u1, tu)?;
    let q2 = advection_integral(b2, tb, tu)? + advection_integral(b2, tu, tb)?;
    let q3 = advection_integral(tb, b1, tu)?;
    let q4 = -advection_integral(tu, b1, tb)?;
    let q5 = advection_integral(tb, u1, tb)?;
    let scale = sup(b2) * (grad_l2(tb) * tu.l2_norm() + grad_l2(tu) * tb.l2_norm());
    Ok(QTerms {
        q1,
        q2,
        q3,
        q4,
        q5,
        q2_normalized: q2.abs() / (scale + f64::MIN_POSITIVE),
    })
}

/// `Q₁, …, Q₅` of `pair` at instant `t`.
pub fn q_decomposition(pair: &DifferencePair, t: f64) -> Result<QTerms> {
    let i = pair.tilde_u.index_of(t)?;
    q_terms(
        &pair.sol1.u.states()[i],
        &pair.sol1.b.states()[i],
        &pair.sol2.b.states()[i],
        &pair.tilde_u.states()[i],
        &pair.tilde_b.states()[i],
    )
}

/// Both sides of `½ d/dt(‖ũ‖² + ‖b̃‖²) + ν‖Λ^α ũ‖² = Q₁ + ⋯ + Q₅`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EnergyBalance {
    pub t: f64,
    /// Half the energy rate by centered differences, plus the dissipation.
    pub lhs: f64,
    pub q_sum: f64,
}

/// Energy balance at instant `t`; the rate uses centered differences in the
/// interior and one-sided ones at the ends.
pub fn energy_balance(pair: &DifferencePair, cfg: &SchemeConfig, t: f64) -> Result<EnergyBalance> {
    let i = pair.tilde_u.index_of(t)?;
    let e = |k: usize| {
        pair.tilde_u.states()[k].l2_norm().powi(2) + pair.tilde_b.states()[k].l2_norm().powi(2)
    };
    let last = pair.tilde_u.len() - 1;
    let dt = pair.tilde_u.dt();
    let rate = if i == 0 {
        (e(1) - e(0)) / dt
    } else if i == last {
        (e(last) - e(last - 1)) / dt
    } else {
        (e(i + 1) - e(i - 1)) / (2.0 * dt)
    };
    let tu = &pair.tilde_u.states()[i];
    let lambda = dissipation_rates(tu.grid(), cfg.alpha, cfg.nu);
    let vol = tu.grid().volume();
    let dissipation: f64 = tu
        .components()
        .iter()
        .map(|c| {
            c.coeffs()
                .iter()
                .zip(&lambda)
                .map(|(z, l)| l * z.norm_sqr())
                .sum::<f64>()
        })
        .sum::<f64>()
        * vol;
    Ok(EnergyBalance {
        t,
        lhs: 0.5 * rate + dissipation,
        q_sum: q_decomposition(pair, t)?.sum(),
    })
}

/// The Gronwall coefficient at one instant together with the grid norms
/// its surrogates stand in for.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HolderCoefficient {
    /// `Σ_j 2^{(1+d/2)j} ‖Δ_j u₁‖_{L²}`, bounding `‖∇u₁‖_{L^∞}`.
    pub grad_u_bound: f64,
    /// `Σ_j 2^{(1+d/2-α)j} ‖Δ_j b₁‖_{L²}`, bounding `‖b₁‖_{L^q}` (`α >= 1`)
    /// or `‖∇b₁‖_{L^q}` (`α < 1`).
    pub b_bound: f64,
    /// `2·grad_u_bound + (4/ν)·b_bound²`.
    pub value: f64,
    /// `‖∇u₁‖_{L^∞}` on the doubled grid, for comparison.
    pub grad_u_sup: f64,
}

/// Exponent `p` of the Hölder step: `1/p = 1/2 + (1-α)/d` for `α >= 1`,
/// `1/p = 1/2 - α/d` for `α < 1`.
pub fn holder_exponent(regime: Regime, alpha: f64, d: usize) -> Result<f64> {
    let d = d as f64;
    let inv = match regime {
        Regime::AlphaGE1 => 0.5 + (1.0 - alpha) / d,
        Regime::AlphaLT1 => 0.5 - alpha / d,
    };
    if !(inv > 0.0) {
        return Err(Error::Hypothesis(match regime {
            Regime::AlphaGE1 => {
                format!("alpha = {alpha} makes 1/p = 1/2 + (1 - alpha)/d non-positive")
            }
            Regime::AlphaLT1 => format!(
                "alpha = {alpha} >= d/2 = {} makes 1/p = 1/2 - alpha/d non-positive",
                d / 2.0
            ),
        }));
    }
    Ok(1.0 / inv)
}

fn grad_sup(u: &VectorField) -> f64 {
    let fine = Grid::new(u.grid().d(), 2 * u.grid().n()).expect("doubled grid");
    let mut acc = vec![0.0; fine.len()];
    for c in u.components() {
        for g in gradient(c).components() {
            let vals = g.resample(fine).expect("finer grid").to_physical();
            for (a, v) in acc.iter_mut().zip(vals) {
                *a += v * v;
            }
        }
    }
    acc.into_iter().fold(0.0, f64::max).sqrt()
}

/// Gronwall coefficient of the regime's Hölder–Bernstein chain for the
/// fields `u₁`, `b₁` with viscosity `ν`, unit constants.
pub fn holder_coefficient(
    regime: Regime,
    alpha: f64,
    nu: f64,
    u1: &VectorField,
    b1: &VectorField,
) -> Result<HolderCoefficient> {
    let grid = u1.grid();
    grid.ensure_same(&b1.grid())?;
    if !(nu > 0.0) {
        return Err(invalid("nu", format!("viscosity {nu} must be positive")));
    }
    holder_exponent(regime, alpha, grid.d())?;
    let flavor = regime.flavor();
    let part = DyadicPartition::for_grid(grid);
    let d = grid.d() as f64;
    let weighted = |f: &VectorField, s: f64| -> f64 {
        part.range(flavor)
            .map(|j| (s * j as f64).exp2() * block_l2(&part, f, j, flavor))
            .sum()
    };
    let grad_u_bound = weighted(u1, 1.0 + d / 2.0);
    let b_bound = weighted(b1, 1.0 + d / 2.0 - alpha);
    Ok(HolderCoefficient {
        grad_u_bound,
        b_bound,
        value: 2.0 * grad_u_bound + 4.0 / nu * b_bound * b_bound,
        grad_u_sup: grad_sup(u1),
    })
}

/// Energy history of the difference against its Gronwall envelope.
#[derive(Clone, Debug, PartialEq)]
pub struct GronwallCertificate {
    pub times: Vec<f64>,
    pub energy: Vec<f64>,
    /// Coefficient `a(t)` at each sample.
    pub coefficient: Vec<f64>,
    /// `∫_0^t a` by the trapezoid rule.
    pub growth_factor: Vec<f64>,
    /// Per sample: `energy(t) <= (1 + slack)·energy(0)·exp(growth(t))`.
    pub bound_ok: Vec<bool>,
    pub bound_satisfied: bool,
    pub slack: f64,
    /// The integrals that make the coefficient integrable: for `α >= 1`
    /// `∫(‖u₁‖_{Ḃ^{1+d/2}_{2,1}} + ‖b₁‖²_{Ḃ^{1+d/2-α}_{2,1}})`, for `α < 1`
    /// `√T ‖u₁‖_{L̃²B^{σ+α}_{2,∞}}` and `T ‖b₁‖²_{L̃^∞B^σ_{2,∞}}`.
    pub integrability: Vec<(&'static str, f64)>,
}

impl GronwallCertificate {
    pub fn final_energy(&self) -> f64 {
        *self.energy.last().expect("non-empty trajectory")
    }

    /// Per-sample rows `t,energy,Q1,Q2,Q3,Q4,Q5,coefficient,bound_ok`.
    pub fn write_csv<W: Write>(&self, out: W, q: &[QTerms]) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record([
            "t",
            "energy",
            "Q1",
            "Q2",
            "Q3",
            "Q4",
            "Q5",
            "coefficient",
            "bound_ok",
        ])?;
        for (i, t) in self.times.iter().enumerate() {
            let qi = q.get(i);
            let f = |x: Option<f64>| x.map_or(String::new(), |x| format!("{x:e}"));
            w.write_record([
                format!("{t:e}"),
                format!("{:e}", self.energy[i]),
                f(qi.map(|q| q.q1)),
                f(qi.map(|q| q.q2)),
                f(qi.map(|q| q.q3)),
                f(qi.map(|q| q.q4)),
                f(qi.map(|q| q.q5)),
                format!("{:e}", self.coefficient[i]),
                self.bound_ok[i].to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Check the difference energy against `energy(0)·exp(∫a)` with relative
/// slack [`GRONWALL_SLACK`].
pub fn gronwall_verify(pair: &DifferencePair, cfg: &SchemeConfig) -> Result<GronwallCertificate> {
    if pair.regime != cfg.regime {
        return Err(invalid(
            "regime",
            format!(
                "pair is {} but the configuration is {}",
                pair.regime, cfg.regime
            ),
        ));
    }
    let times = pair.times().to_vec();
    let energy = pair.energy();
    let coefficient = pair
        .sol1
        .u
        .states()
        .iter()
        .zip(pair.sol1.b.states())
        .map(|(u, b)| holder_coefficient(cfg.regime, cfg.alpha, cfg.nu, u, b).map(|h| h.value))
        .collect::<Result<Vec<_>>>()?;
    let dt = pair.tilde_u.dt();
    let mut growth_factor = vec![0.0];
    for w in coefficient.windows(2) {
        let last = *growth_factor.last().expect("seeded");
        growth_factor.push(last + 0.5 * dt * (w[0] + w[1]));
    }
    let e0 = energy[0];
    let slack = GRONWALL_SLACK;
    let bound_ok: Vec<bool> = energy
        .iter()
        .zip(&growth_factor)
        .map(|(e, g)| *e <= (1.0 + slack) * e0 * g.exp())
        .collect();
    let d = cfg.d as f64;
    let integrability = match cfg.regime {
        Regime::AlphaGE1 => {
            let h = Flavor::Homogeneous;
            let s = |f: &VectorField, s: f64| -> Result<f64> {
                crate::norms::besov_norm(f, &NormSpec::l2_sum(s, h))
            };
            let series = pair
                .sol1
                .u
                .states()
                .iter()
                .zip(pair.sol1.b.states())
                .map(|(u, b)| Ok(s(u, 1.0 + d / 2.0)? + s(b, 1.0 + d / 2.0 - cfg.alpha)?.powi(2)))
                .collect::<Result<Vec<f64>>>()?;
            vec![("integral", crate::norms::time_norm(&series, dt, 1.0))]
        }
        Regime::AlphaLT1 => {
            let sigma = cfg
                .sigma
                .ok_or_else(|| invalid("sigma", "the coupled regime needs sigma"))?;
            let i = Flavor::Inhomogeneous;
            let t = pair.tilde_u.span();
            let inf = f64::INFINITY;
            let u2 = chemin_lerner_norm(
                &pair.sol1.u,
                &NormSpec::besov(sigma + cfg.alpha, 2.0, inf, i)?.with_time(2.0)?,
            )?;
            let binf = chemin_lerner_norm(
                &pair.sol1.b,
                &NormSpec::besov(sigma, 2.0, inf, i)?.with_time(inf)?,
            )?;
            vec![
                ("sqrtT_u_L2_B(sigma+a)", t.sqrt() * u2),
                ("T_b2_Linf_B(sigma)", t * binf * binf),
            ]
        }
    };
    Ok(GronwallCertificate {
        bound_satisfied: bound_ok.iter().all(|b| *b),
        times,
        energy,
        coefficient,
        growth_factor,
        bound_ok,
        slack,
        integrability,
    })
}

/// Run the scheme until successive differences fall below
/// [`CONVERGENCE_TOL`] (at most `cfg.n_iter` steps).
pub fn converged_solution(
    cfg: &SchemeConfig,
    u0: &VectorField,
    b0: &VectorField,
) -> Result<PicardRun> {
    let opts = RunOptions {
        stop_below: Some(CONVERGENCE_TOL),
        monitor: false,
        ..RunOptions::default()
    };
    let run = run_picard(cfg, u0, b0, &opts)?;
    if !run.converged {
        return Err(Error::Degenerate(format!(
            "Picard differences stayed above {CONVERGENCE_TOL:e} after {} iterations (last {:e})",
            cfg.n_iter,
            run.differences().last().copied().unwrap_or(f64::NAN)
        )));
    }
    Ok(run)
}

/// `ε` times the unit solenoidal field on the single mode `k`.
pub fn mode_perturbation(grid: Grid, k: &[i64], eps: f64) -> Result<VectorField> {
    let preset = crate::scheme::Preset::SingleMode {
        k: k.to_vec(),
        amplitude: eps,
    };
    Ok(crate::scheme::preset_fields(&preset, grid, 0.0, 0)?.0)
}

/// Solve from `(u0, b0)` and from `(u0 + du, b0 + db)` concurrently and
/// pair the converged solutions.
pub fn solve_pair(
    cfg: &SchemeConfig,
    u0: &VectorField,
    b0: &VectorField,
    du: &VectorField,
    db: &VectorField,
) -> Result<DifferencePair> {
    let u0p = u0 + du;
    let b0p = b0 + db;
    let (a, b) = join(
        || converged_solution(cfg, u0, b0),
        || converged_solution(cfg, &u0p, &b0p),
    );
    DifferencePair::new(a?.last, b?.last, cfg.regime)
}
