use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::bounds::{DEFAULT_RHO, RHO_SWEEP};
use crate::datagen::DataModel;
use crate::error::{Error, Result};
use crate::path::{PriorSpec, DEFAULT_TOLERANCE, ROBBINS_C_MIN};
use crate::prior::RobbinsPrior;
use crate::wealth::QuadratureConfig;

/// Everything that determines a Monte Carlo run. The report is a pure
/// function of this value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub model: DataModel,
    pub prior: PriorSpec,
    pub alpha: f64,
    /// Used for the conditional bound and the confidence sequence.
    pub rho: f64,
    /// Every `rho` the pathwise bound is checked at.
    pub rho_sweep: Vec<f64>,
    pub n_paths: u64,
    pub horizon: u64,
    pub seed: u64,
    /// Absolute slack added to every bound comparison.
    pub tolerance: f64,
    /// Variance threshold of the Gaussian-prior conditional bound.
    pub v0: f64,
    /// Cells per side of the cheap screening bracket.
    pub coarse_cells: usize,
    /// Cells per side of the second screening stage.
    pub fine_cells: usize,
    /// Adaptive quadrature settings for steps screening cannot decide.
    pub quadrature: QuadratureConfig,
    /// Number of leading paths whose per-step trace is recorded.
    pub trace_paths: u64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub output: Option<PathBuf>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            model: DataModel::gaussian(),
            prior: PriorSpec::default(),
            alpha: 0.05,
            rho: DEFAULT_RHO,
            rho_sweep: RHO_SWEEP.to_vec(),
            n_paths: 1000,
            horizon: 1000,
            seed: 0,
            tolerance: DEFAULT_TOLERANCE,
            v0: 1.0,
            coarse_cells: 64,
            fine_cells: 1024,
            quadrature: QuadratureConfig::default(),
            trace_paths: 0,
            output: None,
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        self.model.validate()?;
        self.prior.validate()?;
        if self.n_paths == 0 {
            return bad("n_paths must be at least 1".into());
        }
        if self.horizon == 0 {
            return bad("horizon T must be at least 1".into());
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::InvalidAlpha(self.alpha));
        }
        for &r in std::iter::once(&self.rho).chain(&self.rho_sweep) {
            if !(r > 0.0 && r < 0.25) {
                return Err(Error::InvalidRho {
                    rho: r,
                    domain: "(0, 1/4)",
                });
            }
        }
        if self.rho_sweep.is_empty() {
            return bad("rho_sweep must not be empty".into());
        }
        if !(self.tolerance >= 0.0 && self.tolerance.is_finite()) {
            return bad(format!("tolerance = {} must be a finite non-negative number", self.tolerance));
        }
        if !(self.v0 > 0.0 && self.v0.is_finite()) {
            return bad(format!("v0 = {} must be positive", self.v0));
        }
        if self.coarse_cells == 0 || self.fine_cells == 0 {
            return bad("screening needs at least one cell per side".into());
        }
        self.quadrature.validate(&RobbinsPrior::new(self.robbins_c())?)?;
        Ok(())
    }

    /// Robbins constant for bounds and confidence sequences; the default
    /// when the wealth prior is Gaussian.
    pub fn robbins_c(&self) -> f64 {
        match self.prior {
            PriorSpec::Robbins { c } => c,
            PriorSpec::Gaussian { .. } => ROBBINS_C_MIN,
        }
    }
}

/// Settings of the long-horizon diagnostic run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LilConfig {
    pub model: DataModel,
    pub alpha: f64,
    pub c: f64,
    /// Variance of the Gaussian prior run alongside the Robbins prior.
    pub sigma0_sq: f64,
    pub n_paths: u64,
    pub horizon: u64,
    pub seed: u64,
    /// Checkpoints per decade of `t` (the thinning factor).
    pub checkpoints_per_decade: u32,
    /// Flag paths whose final `R_t / ln ln V_t` exceeds this.
    pub report_threshold: f64,
    /// The tail running maximum of the LIL statistic covers
    /// `t >= tail_start_fraction * T`.
    pub tail_start_fraction: f64,
    pub coarse_cells: usize,
    pub fine_cells: usize,
    pub quadrature: QuadratureConfig,
}

impl Default for LilConfig {
    fn default() -> Self {
        LilConfig {
            model: DataModel::gaussian(),
            alpha: 0.05,
            c: ROBBINS_C_MIN,
            sigma0_sq: 1.0,
            n_paths: 100,
            horizon: 1_000_000,
            seed: 0,
            checkpoints_per_decade: 4,
            report_threshold: 2.0,
            tail_start_fraction: 0.1,
            coarse_cells: 64,
            fine_cells: 1024,
            quadrature: QuadratureConfig::default(),
        }
    }
}

impl LilConfig {
    pub fn validate(&self) -> Result<()> {
        self.model.validate()?;
        PriorSpec::robbins(self.c)?;
        PriorSpec::gaussian(self.sigma0_sq)?;
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::InvalidAlpha(self.alpha));
        }
        if self.n_paths == 0 || self.horizon == 0 {
            return Err(Error::Config("n_paths and horizon must be at least 1".into()));
        }
        if self.checkpoints_per_decade == 0 {
            return Err(Error::Config("checkpoints_per_decade must be at least 1".into()));
        }
        if !(self.tail_start_fraction > 0.0 && self.tail_start_fraction <= 1.0) {
            return Err(Error::Config(format!(
                "tail_start_fraction = {} must lie in (0, 1]",
                self.tail_start_fraction
            )));
        }
        if self.coarse_cells == 0 || self.fine_cells == 0 {
            return Err(Error::Config("screening needs at least one cell per side".into()));
        }
        self.quadrature.validate(&RobbinsPrior::new(self.c)?)?;
        Ok(())
    }
}
