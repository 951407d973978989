//! Lebesgue, Besov and Chemin–Lerner norms on the torus.

use crate::error::{invalid, Error, Result};
use crate::littlewood_paley::{block_l2, delta_j, DyadicPartition, Flavor};
use crate::spectral::{FieldLike, SpectralField};

/// A Besov or Chemin–Lerner norm request. Exponents use `f64::INFINITY` for ∞.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NormSpec {
    pub s: f64,
    pub p: f64,
    pub q: f64,
    pub flavor: Flavor,
    pub r: Option<f64>,
}

impl NormSpec {
    pub fn besov(s: f64, p: f64, q: f64, flavor: Flavor) -> Result<Self> {
        check_exponent("p", p)?;
        check_exponent("q", q)?;
        if !s.is_finite() {
            return Err(invalid("s", "regularity index must be finite"));
        }
        Ok(Self {
            s,
            p,
            q,
            flavor,
            r: None,
        })
    }

    /// `B^s_{2,1}` or `Ḃ^s_{2,1}`.
    pub fn l2_sum(s: f64, flavor: Flavor) -> Self {
        Self::besov(s, 2.0, 1.0, flavor).expect("valid exponents")
    }

    pub fn with_time(mut self, r: f64) -> Result<Self> {
        check_exponent("r", r)?;
        self.r = Some(r);
        Ok(self)
    }
}

fn check_exponent(name: &'static str, e: f64) -> Result<()> {
    if e.is_nan() || e < 1.0 {
        return Err(invalid(name, format!("exponent {e} must lie in [1, ∞]")));
    }
    Ok(())
}

/// `‖(x_j)‖_{l^q}`.
pub fn lq_sum(values: impl IntoIterator<Item = f64>, q: f64) -> f64 {
    if q.is_infinite() {
        values.into_iter().map(f64::abs).fold(0.0, f64::max)
    } else if q == 1.0 {
        values.into_iter().map(f64::abs).sum()
    } else {
        values
            .into_iter()
            .map(|v| v.abs().powf(q))
            .sum::<f64>()
            .powf(1.0 / q)
    }
}

/// `‖f‖_{L^p}`: Parseval for `p = 2`, otherwise quadrature on the grid
/// refined twice per axis (exact for `p = 4` on band-limited fields).
pub fn lebesgue_norm(f: &SpectralField, p: f64) -> Result<f64> {
    check_exponent("p", p)?;
    if p == 2.0 {
        return Ok(f.l2_norm());
    }
    let grid = f.grid();
    let samples = f.padded_physical(2 * grid.n());
    if p.is_infinite() {
        return Ok(samples.iter().map(|z| z.re.abs()).fold(0.0, f64::max));
    }
    let mean = samples.iter().map(|z| z.re.abs().powf(p)).sum::<f64>() / samples.len() as f64;
    Ok((mean * grid.volume()).powf(1.0 / p))
}

/// Componentwise `L^p` norms combined in l².
pub fn lebesgue_norm_of<F: FieldLike>(f: &F, p: f64) -> Result<f64> {
    let mut s = 0.0;
    for c in f.parts() {
        s += lebesgue_norm(c, p)?.powi(2);
    }
    Ok(s.sqrt())
}

/// `‖Δ_j f‖_{L^p}` for every resolvable `j`, indexed from `j_min`.
pub fn block_profile<F: FieldLike>(
    part: &DyadicPartition,
    f: &F,
    p: f64,
    flavor: Flavor,
) -> Vec<f64> {
    part.range(flavor)
        .map(|j| {
            if p == 2.0 {
                block_l2(part, f, j, flavor)
            } else {
                f.parts()
                    .iter()
                    .map(|c| {
                        lebesgue_norm(&delta_j(part, c, j, flavor), p)
                            .expect("exponent validated")
                            .powi(2)
                    })
                    .sum::<f64>()
                    .sqrt()
            }
        })
        .collect()
}

/// Besov norm together with the weight of the last resolvable block.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BesovValue {
    pub norm: f64,
    /// `2^{j_max s} ‖Δ_{j_max} f‖_{L^p}`, a gauge of the truncated tail.
    pub tail: f64,
}

pub fn besov_norm_with_tail<F: FieldLike>(f: &F, spec: &NormSpec) -> Result<BesovValue> {
    if spec.r.is_some() {
        return Err(invalid("r", "a time exponent needs a trajectory"));
    }
    let part = DyadicPartition::for_grid(f.field_grid());
    let profile = block_profile(&part, f, spec.p, spec.flavor);
    let j0 = part.j_min(spec.flavor);
    let weighted: Vec<f64> = profile
        .iter()
        .enumerate()
        .map(|(i, a)| weight(j0 + i as i32, spec.s) * a)
        .collect();
    Ok(BesovValue {
        norm: lq_sum(weighted.iter().copied(), spec.q),
        tail: *weighted.last().expect("non-empty block range"),
    })
}

/// `‖2^{js}‖Δ_j f‖_{L^p}‖_{l^q}` over the resolvable blocks.
pub fn besov_norm<F: FieldLike>(f: &F, spec: &NormSpec) -> Result<f64> {
    besov_norm_with_tail(f, spec).map(|v| v.norm)
}

fn weight(j: i32, s: f64) -> f64 {
    (s * j as f64).exp2()
}

/// Uniformly sampled states on `[t_0, t_0 + (N-1) dt]`.
#[derive(Clone, Debug)]
pub struct Trajectory<F> {
    times: Vec<f64>,
    states: Vec<F>,
}

impl<F> Trajectory<F> {
    pub fn new(times: Vec<f64>, states: Vec<F>) -> Result<Self> {
        if times.len() != states.len() {
            return Err(invalid(
                "states",
                format!("{} states for {} instants", states.len(), times.len()),
            ));
        }
        if times.len() < 2 {
            return Err(Error::Degenerate(
                "a trajectory needs at least two samples".into(),
            ));
        }
        let dt = times[1] - times[0];
        if !(dt > 0.0) {
            return Err(invalid("times", "instants must increase strictly"));
        }
        for w in times.windows(2) {
            if ((w[1] - w[0]) - dt).abs() > 1e-9 * dt.max(w[1].abs()) {
                return Err(invalid("times", "instants must be uniformly spaced"));
            }
        }
        Ok(Self { times, states })
    }

    /// `steps + 1` copies of `state` on `[0, horizon]`.
    pub fn constant(state: F, horizon: f64, steps: usize) -> Result<Self>
    where
        F: Clone,
    {
        let steps = steps.max(1);
        let times = uniform_times(horizon, steps);
        Self::new(times, vec![state; steps + 1])
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn states(&self) -> &[F] {
        &self.states
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn dt(&self) -> f64 {
        self.times[1] - self.times[0]
    }

    /// `(N - 1) dt`.
    pub fn span(&self) -> f64 {
        self.times[self.times.len() - 1] - self.times[0]
    }

    pub fn first(&self) -> &F {
        &self.states[0]
    }

    pub fn last(&self) -> &F {
        &self.states[self.states.len() - 1]
    }

    /// Index of the sample at `t`.
    pub fn index_of(&self, t: f64) -> Result<usize> {
        let x = (t - self.times[0]) / self.dt();
        let i = x.round();
        if i < 0.0 || i as usize >= self.times.len() || (x - i).abs() > 1e-6 {
            return Err(Error::InstantNotSampled(t));
        }
        Ok(i as usize)
    }

    pub fn at(&self, t: f64) -> Result<&F> {
        Ok(&self.states[self.index_of(t)?])
    }

    pub fn map<G>(&self, f: impl FnMut(&F) -> G) -> Trajectory<G> {
        Trajectory {
            times: self.times.clone(),
            states: self.states.iter().map(f).collect(),
        }
    }

    pub fn into_states(self) -> Vec<F> {
        self.states
    }
}

pub fn uniform_times(horizon: f64, steps: usize) -> Vec<f64> {
    let dt = horizon / steps as f64;
    (0..=steps).map(|i| i as f64 * dt).collect()
}

/// `‖a‖_{L^r(0,T)}` of uniformly sampled values: left-endpoint rectangles,
/// or the maximum over all samples for `r = ∞`.
pub fn time_norm(values: &[f64], dt: f64, r: f64) -> f64 {
    if r.is_infinite() {
        return values.iter().map(|v| v.abs()).fold(0.0, f64::max);
    }
    let body = &values[..values.len().saturating_sub(1)];
    if r == 1.0 {
        return dt * body.iter().map(|v| v.abs()).sum::<f64>();
    }
    (dt * body.iter().map(|v| v.abs().powf(r)).sum::<f64>()).powf(1.0 / r)
}

fn require_r(spec: &NormSpec) -> Result<f64> {
    spec.r
        .ok_or_else(|| invalid("r", "a space-time norm needs a time exponent"))
}

/// `‖2^{js} ‖‖Δ_j f‖_{L^p}‖_{L^r(0,T)}‖_{l^q}`.
pub fn chemin_lerner_norm<F: FieldLike>(traj: &Trajectory<F>, spec: &NormSpec) -> Result<f64> {
    require_r(spec)?;
    let part = DyadicPartition::for_grid(traj.first().field_grid());
    let profiles: Vec<Vec<f64>> = traj
        .states()
        .iter()
        .map(|f| block_profile(&part, f, spec.p, spec.flavor))
        .collect();
    chemin_lerner_from_profiles(&profiles, part.j_min(spec.flavor), traj.dt(), spec)
}

/// Chemin–Lerner norm from per-sample block profiles indexed from `j0`.
pub fn chemin_lerner_from_profiles(
    profiles: &[Vec<f64>],
    j0: i32,
    dt: f64,
    spec: &NormSpec,
) -> Result<f64> {
    let r = require_r(spec)?;
    let nblocks = profiles.first().map_or(0, Vec::len);
    let per_block = (0..nblocks).map(|b| {
        let series: Vec<f64> = profiles.iter().map(|p| p[b]).collect();
        weight(j0 + b as i32, spec.s) * time_norm(&series, dt, r)
    });
    Ok(lq_sum(per_block, spec.q))
}

/// Besov norm from a block profile indexed from `j0`.
pub fn besov_from_profile(profile: &[f64], j0: i32, spec: &NormSpec) -> f64 {
    lq_sum(
        profile
            .iter()
            .enumerate()
            .map(|(i, a)| weight(j0 + i as i32, spec.s) * a),
        spec.q,
    )
}

/// The standard `‖‖f(t)‖_{B^s_{p,q}}‖_{L^r(0,T)}` with the same time rule.
pub fn time_outer_norm<F: FieldLike>(traj: &Trajectory<F>, spec: &NormSpec) -> Result<f64> {
    let r = require_r(spec)?;
    let space = NormSpec { r: None, ..*spec };
    let series = traj
        .states()
        .iter()
        .map(|f| besov_norm(f, &space))
        .collect::<Result<Vec<_>>>()?;
    Ok(time_norm(&series, traj.dt(), r))
}
