//! Numerical checks of the harmonic-analysis toolkit.
//!
//! Constants that the estimates leave abstract are reported as empirical
//! ratios with a unit constant on the right-hand side.

mod bernstein;
mod cancellation;
pub(crate) mod ensemble;
mod product_law;
mod triple;

use std::io::Write;

pub use bernstein::{bernstein_check, bernstein_interval, BernsteinReport};
pub use cancellation::{cancellation_check, cancellation_flavor, CancellationReport};
pub use ensemble::{
    bernstein_ensemble, cancellation_ensemble, member_rng, product_law_ensemble,
    triple_product_ensemble, EnsembleSummary, TripleEnsembleConfig,
};
pub use product_law::{product_law_check, product_law_hypotheses};
pub use triple::{triple_product_bound_check, triple_product_rhs, Variant};

use crate::error::Result;

/// One left/right comparison of an inequality with unit constant.
#[derive(Clone, Debug, PartialEq)]
pub struct RatioReport {
    pub check: &'static str,
    pub variant: String,
    pub j: i32,
    pub n: usize,
    pub lhs: f64,
    pub rhs_unit_constant: f64,
    /// `lhs / rhs`, absent when the right side vanishes.
    pub ratio: Option<f64>,
    pub ensemble_max_ratio: Option<f64>,
}

impl RatioReport {
    pub fn new(
        check: &'static str,
        variant: impl Into<String>,
        j: i32,
        n: usize,
        lhs: f64,
        rhs: f64,
    ) -> Self {
        let ratio = (rhs > 0.0).then(|| lhs / rhs);
        Self {
            check,
            variant: variant.into(),
            j,
            n,
            lhs,
            rhs_unit_constant: rhs,
            ratio,
            ensemble_max_ratio: None,
        }
    }

    /// True when the report carries no information about the constant.
    pub fn is_degenerate(&self) -> bool {
        self.ratio.is_none()
    }
}

/// Record the ensemble maximum on every member.
pub fn stamp_ensemble_max(reports: &mut [RatioReport]) -> Option<f64> {
    let max = reports
        .iter()
        .filter_map(|r| r.ratio)
        .fold(None, |m: Option<f64>, r| Some(m.map_or(r, |m| m.max(r))));
    for r in reports.iter_mut() {
        r.ensemble_max_ratio = max;
    }
    max
}

/// CSV with columns `check,variant,j,n,lhs,rhs,ratio`.
pub fn write_ratio_csv<W: Write>(out: W, reports: &[RatioReport]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["check", "variant", "j", "n", "lhs", "rhs", "ratio"])?;
    for r in reports {
        w.write_record([
            r.check.to_string(),
            r.variant.clone(),
            r.j.to_string(),
            r.n.to_string(),
            format!("{:e}", r.lhs),
            format!("{:e}", r.rhs_unit_constant),
            r.ratio.map(|x| format!("{x:e}")).unwrap_or_default(),
        ])?;
    }
    w.flush()?;
    Ok(())
}
