use std::io::Write;

use super::monitor::{difference_norm, monitor_y, YMembershipReport};
use super::picard::{initial_iterate, picard_step, IterateState};
use super::SchemeConfig;
use crate::error::{invalid, Result};
use crate::spectral::VectorField;

/// Differences below this fraction of the largest one are treated as rounding.
pub const ROUNDING_FLOOR: f64 = 1e-12;

/// Options for [`run_picard`].
#[derive(Clone, Debug, PartialEq)]
pub struct RunOptions {
    /// `δ` of the solution space.
    pub delta: f64,
    /// Stop once a successive difference drops below this value.
    pub stop_below: Option<f64>,
    /// Evaluate [`monitor_y`] on every iterate.
    pub monitor: bool,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self {
            delta: 0.1,
            stop_below: None,
            monitor: true,
        }
    }
}

/// What was recorded about one iterate.
#[derive(Clone, Debug)]
pub struct IterationRecord {
    pub iteration: usize,
    /// `‖(u, b)^{(n)} - (u, b)^{(n-1)}‖` in the monitored norm.
    pub difference: Option<f64>,
    pub y: Option<YMembershipReport>,
    /// `(t, ‖u‖_{L²}, ‖b‖_{L²})` at every sample.
    pub l2_series: Vec<(f64, f64, f64)>,
    pub max_divergence: f64,
}

/// A least-squares fit `d_k ≈ A ρ^k` to successive differences.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DecayFit {
    pub ratio: f64,
    /// Differences above the rounding floor that entered the fit.
    pub points: usize,
}

/// Fit a geometric rate to the values above `ROUNDING_FLOOR · max`.
/// Needs at least two such values.
pub fn fit_geometric_decay(values: &[f64]) -> Option<DecayFit> {
    let top = values.iter().copied().fold(0.0, f64::max);
    if !(top > 0.0) {
        return None;
    }
    let pts: Vec<(f64, f64)> = values
        .iter()
        .enumerate()
        .take_while(|(_, v)| **v > ROUNDING_FLOOR * top)
        .map(|(k, v)| (k as f64, v.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    Some(DecayFit {
        ratio: (sxy / sxx).exp(),
        points: pts.len(),
    })
}

/// A finished Picard run.
#[derive(Clone, Debug)]
pub struct PicardRun {
    pub records: Vec<IterationRecord>,
    pub last: IterateState,
    pub previous: Option<IterateState>,
    /// `stop_below` was reached.
    pub converged: bool,
}

impl PicardRun {
    pub fn differences(&self) -> Vec<f64> {
        self.records.iter().filter_map(|r| r.difference).collect()
    }

    pub fn decay(&self) -> Option<DecayFit> {
        fit_geometric_decay(&self.differences())
    }

    /// Every monitored bound held on every iterate.
    pub fn y_holds(&self) -> bool {
        self.records
            .iter()
            .all(|r| r.y.as_ref().is_none_or(YMembershipReport::all_hold))
    }
}

fn record(
    state: &IterateState,
    difference: Option<f64>,
    cfg: &SchemeConfig,
    u0: &VectorField,
    b0: &VectorField,
    opts: &RunOptions,
) -> Result<IterationRecord> {
    let y = if opts.monitor {
        Some(monitor_y(state, cfg, u0, b0, opts.delta)?)
    } else {
        None
    };
    let l2_series = state
        .times()
        .iter()
        .zip(state.u.states().iter().zip(state.b.states()))
        .map(|(t, (u, b))| (*t, u.l2_norm(), b.l2_norm()))
        .collect();
    Ok(IterationRecord {
        iteration: state.n,
        difference,
        y,
        l2_series,
        max_divergence: state.max_divergence(),
    })
}

/// Run `cfg.n_iter` Picard steps from the first iterate, or fewer when
/// `stop_below` is reached.
pub fn run_picard(
    cfg: &SchemeConfig,
    u0: &VectorField,
    b0: &VectorField,
    opts: &RunOptions,
) -> Result<PicardRun> {
    cfg.validate()?;
    if !(opts.delta > 0.0 && opts.delta < 1.0) {
        return Err(invalid(
            "delta",
            format!("{} must lie in (0, 1)", opts.delta),
        ));
    }
    let mut state = initial_iterate(u0, b0, cfg)?;
    let mut records = vec![record(&state, None, cfg, u0, b0, opts)?];
    let mut previous = None;
    let mut converged = false;
    for _ in 0..cfg.n_iter {
        let next = picard_step(&state, u0, b0, cfg)?;
        let diff = difference_norm(&next, &state, cfg)?;
        records.push(record(&next, Some(diff), cfg, u0, b0, opts)?);
        previous = Some(std::mem::replace(&mut state, next));
        if opts.stop_below.is_some_and(|tol| diff < tol) {
            converged = true;
            break;
        }
    }
    Ok(PicardRun {
        records,
        last: state,
        previous,
        converged,
    })
}

/// Per-iteration CSV `iter,time,norm_name,value`: the `L²` series of both
/// fields, the successive difference and every monitored bound (stamped at
/// the horizon).
pub fn write_iteration_csv<W: Write>(out: W, run: &PicardRun, horizon: f64) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["iter", "time", "norm_name", "value"])?;
    let row = |w: &mut csv::Writer<W>, it: usize, t: f64, name: &str, v: f64| {
        w.write_record([
            it.to_string(),
            format!("{t:e}"),
            name.to_string(),
            format!("{v:e}"),
        ])
    };
    for r in &run.records {
        for (t, u, b) in &r.l2_series {
            row(&mut w, r.iteration, *t, "u_L2", *u)?;
            row(&mut w, r.iteration, *t, "b_L2", *b)?;
        }
        if let Some(d) = r.difference {
            row(&mut w, r.iteration, horizon, "difference", d)?;
        }
        if let Some(y) = &r.y {
            for b in &y.bounds {
                row(&mut w, r.iteration, horizon, &b.name, b.value)?;
            }
        }
    }
    w.flush()?;
    Ok(())
}

/// The monitored bounds of every iterate as a flat table
/// `iter,regime,name,value,limit,holds,M,delta`.
pub fn write_y_csv<W: Write>(out: W, run: &PicardRun) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "iter", "regime", "name", "value", "limit", "holds", "M", "delta",
    ])?;
    for r in &run.records {
        if let Some(y) = &r.y {
            for b in &y.bounds {
                w.write_record([
                    r.iteration.to_string(),
                    y.regime.to_string(),
                    b.name.clone(),
                    format!("{:e}", b.value),
                    format!("{:e}", b.limit),
                    b.holds.to_string(),
                    format!("{:e}", y.m),
                    format!("{:e}", y.delta),
                ])?;
            }
        }
    }
    w.flush()?;
    Ok(())
}
