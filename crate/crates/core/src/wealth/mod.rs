//! Log-wealth of the mixture process `Z_t = \int exp(eta S_t - eta^2 V_t / 2) pi(d eta)`.
//!
//! * Gaussian prior: closed form, plus an adaptive quadrature route used as
//!   an independent check.
//! * Robbins prior: quadrature in the uniformizing variable `u` of
//!   [`RobbinsPrior`](crate::prior::RobbinsPrior), either adaptive
//!   ([`ln_wealth_robbins`]) or on a fixed composite grid ([`RobbinsGrid`])
//!   shared with the incremental betting engine.
//! * [`RobbinsBracket`] gives cheap certified lower/upper bounds from exact
//!   prior cell masses, used to screen decisions in large Monte Carlo runs.
//!
//! Wealth is never formed on the linear scale.

mod bracket;
mod engine;
mod gaussian;
mod robbins;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::path::PriorSpec;
use crate::prior::RobbinsPrior;

pub use bracket::{LnBracket, RobbinsBracket};
pub use engine::{EngineMode, Posterior, RoundOutcome, WealthEngine};
pub use gaussian::{ln_wealth_gaussian, ln_wealth_gaussian_quadrature};
pub use robbins::{ln_wealth_robbins, RobbinsGrid};

/// Largest node budget the adaptive routines may spend per side.
pub const MAX_NODES: usize = 1 << 20;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureConfig {
    /// Node budget per side of zero for the fixed grid (rounded up to whole
    /// 15-point panels).
    pub nodes_per_side: usize,
    /// Lower truncation of the uniformizing variable.
    pub u_min: f64,
    /// Target relative error of `Z_t` (equivalently, absolute error of `ln Z_t`).
    pub target_rel_err: f64,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        QuadratureConfig {
            nodes_per_side: 4096,
            u_min: 1e-8,
            target_rel_err: 1e-10,
        }
    }
}

impl QuadratureConfig {
    pub fn with_nodes(nodes_per_side: usize) -> Self {
        QuadratureConfig {
            nodes_per_side,
            ..Self::default()
        }
    }

    pub fn validate(&self, prior: &RobbinsPrior) -> Result<()> {
        if self.nodes_per_side < 16 {
            return Err(Error::InvalidQuadrature(format!(
                "nodes_per_side = {} < 16",
                self.nodes_per_side
            )));
        }
        if self.nodes_per_side > MAX_NODES {
            return Err(Error::InvalidQuadrature(format!(
                "nodes_per_side = {} exceeds {MAX_NODES}",
                self.nodes_per_side
            )));
        }
        if !(self.u_min > 0.0 && self.u_min < prior.u_max()) {
            return Err(Error::InvalidQuadrature(format!(
                "u_min = {} outside (0, {})",
                self.u_min,
                prior.u_max()
            )));
        }
        if !(self.target_rel_err > 0.0) {
            return Err(Error::InvalidQuadrature(format!(
                "target_rel_err = {} must be positive",
                self.target_rel_err
            )));
        }
        Ok(())
    }

    /// Error target at a given `ln Z`: `target_rel_err`, or four ulps of the
    /// value when that is coarser, since no evaluation resolves `ln Z` below
    /// its own rounding.
    pub fn target_at(&self, ln_z: f64) -> f64 {
        self.target_rel_err.max(4.0 * f64::EPSILON * ln_z.abs())
    }

    /// Number of 15-point panels per side for the fixed grid.
    pub fn panels(&self) -> usize {
        self.nodes_per_side.div_ceil(crate::quad::GK_POINTS).max(1)
    }
}

/// A log-wealth value with its error bound on the log scale.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LnWealth {
    pub value: f64,
    pub err_bound: f64,
    /// `false` when `err_bound` exceeds the configured target.
    pub converged: bool,
}

impl LnWealth {
    pub fn exact(value: f64) -> Self {
        LnWealth {
            value,
            err_bound: 0.0,
            converged: true,
        }
    }

    /// Turn a missed target into [`Error::QuadratureTargetMissed`].
    pub fn check(self, target: f64) -> Result<Self> {
        if self.converged {
            Ok(self)
        } else {
            Err(Error::QuadratureTargetMissed {
                value: self.value,
                err_bound: self.err_bound,
                target,
            })
        }
    }
}

/// `ln Z_t` for either prior. Gaussian is exact; Robbins is adaptive.
pub fn ln_wealth(prior: &PriorSpec, s: f64, v: f64, quad: &QuadratureConfig) -> Result<LnWealth> {
    prior.validate()?;
    check_state(s, v)?;
    match *prior {
        PriorSpec::Gaussian { sigma0_sq } => Ok(LnWealth::exact(ln_wealth_gaussian(s, v, sigma0_sq))),
        PriorSpec::Robbins { c } => {
            let p = RobbinsPrior::new(c)?;
            ln_wealth_robbins(s, v, &p, quad)
        }
    }
}

pub(crate) fn check_state(s: f64, v: f64) -> Result<()> {
    if !s.is_finite() || !v.is_finite() || v < 0.0 {
        return Err(Error::InvalidState(format!("S = {s}, V = {v}")));
    }
    if v == 0.0 && s != 0.0 {
        return Err(Error::BrokenZeroConvention(s));
    }
    Ok(())
}
