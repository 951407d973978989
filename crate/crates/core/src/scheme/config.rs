use std::fmt;
use std::str::FromStr;

use crate::error::{invalid, Error, Result};
use crate::littlewood_paley::Flavor;
use crate::spectral::Grid;

/// Which successive-approximation scheme applies.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Regime {
    /// `α >= 1`: lagged magnetic nonlinearity, homogeneous blocks.
    AlphaGE1,
    /// `α < 1`: velocity and magnetic field solved as one coupled linear
    /// system per iteration, inhomogeneous blocks.
    AlphaLT1,
}

impl Regime {
    pub fn for_alpha(alpha: f64) -> Self {
        if alpha >= 1.0 {
            Regime::AlphaGE1
        } else {
            Regime::AlphaLT1
        }
    }

    pub fn flavor(self) -> Flavor {
        match self {
            Regime::AlphaGE1 => Flavor::Homogeneous,
            Regime::AlphaLT1 => Flavor::Inhomogeneous,
        }
    }
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Regime::AlphaGE1 => "alpha-ge1",
            Regime::AlphaLT1 => "alpha-lt1",
        })
    }
}

impl FromStr for Regime {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "alpha-ge1" => Ok(Regime::AlphaGE1),
            "alpha-lt1" => Ok(Regime::AlphaLT1),
            _ => Err(invalid(
                "regime",
                format!("unknown regime {s:?} (expected alpha-ge1 or alpha-lt1)"),
            )),
        }
    }
}

/// Parameters of one scheme run.
#[derive(Clone, Debug, PartialEq)]
pub struct SchemeConfig {
    pub regime: Regime,
    pub alpha: f64,
    pub nu: f64,
    pub d: usize,
    pub n: usize,
    /// Requested step; the run uses `horizon / steps()`.
    pub dt: f64,
    pub horizon: f64,
    pub n_iter: usize,
    /// Regularity index, required when `regime` is [`Regime::AlphaLT1`].
    pub sigma: Option<f64>,
}

impl SchemeConfig {
    /// Regime inferred from `alpha`, `dt = horizon / 256`, no `sigma`.
    pub fn new(alpha: f64, nu: f64, d: usize, n: usize, horizon: f64, n_iter: usize) -> Self {
        Self {
            regime: Regime::for_alpha(alpha),
            alpha,
            nu,
            d,
            n,
            dt: horizon / 256.0,
            horizon,
            n_iter,
            sigma: None,
        }
    }

    pub fn with_sigma(mut self, sigma: f64) -> Self {
        self.sigma = Some(sigma);
        self
    }

    pub fn with_dt(mut self, dt: f64) -> Self {
        self.dt = dt;
        self
    }

    /// Same step count, new horizon.
    pub fn with_horizon(mut self, horizon: f64) -> Self {
        let steps = self.steps();
        self.horizon = horizon;
        self.dt = horizon / steps as f64;
        self
    }

    pub fn flavor(&self) -> Flavor {
        self.regime.flavor()
    }

    pub fn grid(&self) -> Result<Grid> {
        Grid::new(self.d, self.n)
    }

    /// Number of time steps covering `[0, horizon]`.
    pub fn steps(&self) -> usize {
        ((self.horizon / self.dt) - 1e-9).ceil().max(1.0) as usize
    }

    /// The step actually taken.
    pub fn step(&self) -> f64 {
        self.horizon / self.steps() as f64
    }

    /// `1 + d/4`, the upper limit on `α`.
    pub fn alpha_limit(d: usize) -> f64 {
        1.0 + d as f64 / 4.0
    }

    /// `1 + d/2 - α`, the lower limit on `σ` below `α = 1`.
    pub fn sigma_floor(d: usize, alpha: f64) -> f64 {
        1.0 + d as f64 / 2.0 - alpha
    }

    pub fn validate(&self) -> Result<()> {
        if !(2..=3).contains(&self.d) {
            return Err(invalid("d", format!("dimension {} is not 2 or 3", self.d)));
        }
        Grid::new(self.d, self.n)?;
        if !self.alpha.is_finite() || self.alpha < 0.0 {
            return Err(invalid(
                "alpha",
                format!("{} must be finite and >= 0", self.alpha),
            ));
        }
        let limit = Self::alpha_limit(self.d);
        if self.alpha >= limit {
            return Err(Error::Hypothesis(format!(
                "alpha = {} violates alpha < 1 + d/4 = {limit}",
                self.alpha
            )));
        }
        if self.regime != Regime::for_alpha(self.alpha) {
            return Err(Error::Hypothesis(format!(
                "regime {} does not match alpha = {} ({} needs {})",
                self.regime,
                self.alpha,
                self.regime,
                match self.regime {
                    Regime::AlphaGE1 => "alpha >= 1",
                    Regime::AlphaLT1 => "alpha < 1",
                }
            )));
        }
        if !(self.nu > 0.0) || !self.nu.is_finite() {
            return Err(invalid(
                "nu",
                format!("viscosity {} must be positive", self.nu),
            ));
        }
        if !(self.horizon > 0.0) || !self.horizon.is_finite() {
            return Err(invalid(
                "T",
                format!("horizon {} must be positive", self.horizon),
            ));
        }
        if !(self.dt > 0.0) || self.dt > self.horizon {
            return Err(invalid(
                "dt",
                format!("step {} must lie in (0, T = {}]", self.dt, self.horizon),
            ));
        }
        if self.n_iter == 0 {
            return Err(invalid("n_iter", "at least one iteration is needed"));
        }
        if self.regime == Regime::AlphaLT1 {
            let floor = Self::sigma_floor(self.d, self.alpha);
            match self.sigma {
                None => {
                    return Err(Error::Hypothesis(format!(
                        "alpha = {} < 1 needs sigma > 1 + d/2 - alpha = {floor}, but no sigma was given",
                        self.alpha
                    )))
                }
                Some(s) if !(s > floor) => {
                    return Err(Error::Hypothesis(format!(
                        "sigma = {s} violates sigma > 1 + d/2 - alpha = {floor}"
                    )))
                }
                Some(_) => {}
            }
        }
        Ok(())
    }
}
