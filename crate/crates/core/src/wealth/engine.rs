use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::{ln_wealth_gaussian, LnWealth, QuadratureConfig, RobbinsGrid};
use crate::error::Result;
use crate::path::{log_payoff, PathState, PriorSpec};
use crate::prior::RobbinsPrior;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EngineMode {
    /// Re-evaluate the mixture at the summary state after every round.
    Batch,
    /// Update per-node log-weights (or the Gaussian posterior) each round.
    Incremental,
}

/// Result of one betting round.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RoundOutcome {
    pub t: u64,
    pub ln_w: f64,
    pub err_bound: f64,
    pub converged: bool,
}

/// Skeptic's current betting distribution.
#[derive(Debug, Clone, PartialEq)]
pub enum Posterior {
    Gaussian { mean: f64, var: f64 },
    /// Normalized weights at the signed grid nodes.
    Discrete { eta: Vec<f64>, weight: Vec<f64> },
}

#[derive(Debug, Clone)]
enum Inner {
    Gaussian {
        sigma0_sq: f64,
        mean: f64,
        var: f64,
        ln_w: f64,
    },
    Robbins {
        grid: Arc<RobbinsGrid>,
        /// `ln w_j + f_t(eta_j)`; kept only in incremental mode.
        terms: Vec<f64>,
        last: LnWealth,
    },
}

/// The betting game: each round Skeptic splits wealth over bets `eta`
/// according to the posterior and is paid `exp(eta dS - eta^2 dV / 2)`.
/// By telescoping the wealth equals the mixture `Z_t` at the summary state.
#[derive(Debug, Clone)]
pub struct WealthEngine {
    prior: PriorSpec,
    mode: EngineMode,
    state: PathState,
    inner: Inner,
}

impl WealthEngine {
    pub fn new(prior: PriorSpec, quad: QuadratureConfig, mode: EngineMode) -> Result<Self> {
        prior.validate()?;
        match prior {
            PriorSpec::Gaussian { sigma0_sq } => Ok(Self::gaussian(sigma0_sq, mode)),
            PriorSpec::Robbins { c } => {
                let grid = RobbinsGrid::new(RobbinsPrior::new(c)?, quad)?;
                Ok(Self::with_grid(Arc::new(grid), mode))
            }
        }
    }

    fn gaussian(sigma0_sq: f64, mode: EngineMode) -> Self {
        WealthEngine {
            prior: PriorSpec::Gaussian { sigma0_sq },
            mode,
            state: PathState::new(),
            inner: Inner::Gaussian {
                sigma0_sq,
                mean: 0.0,
                var: sigma0_sq,
                ln_w: 0.0,
            },
        }
    }

    /// Robbins engine on a grid shared with other engines.
    pub fn with_grid(grid: Arc<RobbinsGrid>, mode: EngineMode) -> Self {
        let terms = match mode {
            EngineMode::Incremental => grid.ln_weights().to_vec(),
            EngineMode::Batch => Vec::new(),
        };
        WealthEngine {
            prior: PriorSpec::Robbins { c: grid.prior().c() },
            mode,
            state: PathState::new(),
            inner: Inner::Robbins {
                grid,
                terms,
                last: LnWealth::exact(0.0),
            },
        }
    }

    pub fn prior(&self) -> &PriorSpec {
        &self.prior
    }

    pub fn mode(&self) -> EngineMode {
        self.mode
    }

    pub fn state(&self) -> &PathState {
        &self.state
    }

    /// Current `ln W_t` (0 before the first round).
    pub fn ln_wealth(&self) -> LnWealth {
        match &self.inner {
            Inner::Gaussian { ln_w, .. } => LnWealth::exact(*ln_w),
            Inner::Robbins { last, .. } => *last,
        }
    }

    /// Play one round. On an invalid increment the engine is unchanged.
    pub fn game_round(&mut self, ds: f64, dv: f64) -> Result<RoundOutcome> {
        self.state.push(ds, dv)?;
        let (s, v) = (self.state.s(), self.state.v());
        let mode = self.mode;
        let lw = match &mut self.inner {
            Inner::Gaussian {
                sigma0_sq,
                mean,
                var,
                ln_w,
            } => {
                match mode {
                    EngineMode::Incremental => {
                        // E_{N(m, s2)} exp(eta a - eta^2 b / 2), then the conjugate update.
                        let (m, s2) = (*mean, *var);
                        let d = 1.0 + s2 * dv;
                        *ln_w += (2.0 * m * ds - m * m * dv + s2 * ds * ds) / (2.0 * d) - 0.5 * (s2 * dv).ln_1p();
                        let prec = 1.0 / s2 + dv;
                        *mean = (m / s2 + ds) / prec;
                        *var = 1.0 / prec;
                    }
                    EngineMode::Batch => {
                        *ln_w = ln_wealth_gaussian(s, v, *sigma0_sq);
                        let prec = 1.0 / *sigma0_sq + v;
                        *mean = s / prec;
                        *var = 1.0 / prec;
                    }
                }
                if v == 0.0 {
                    *ln_w = 0.0;
                }
                LnWealth::exact(*ln_w)
            }
            Inner::Robbins { grid, terms, last } => {
                *last = match mode {
                    EngineMode::Incremental => {
                        for (l, &e) in terms.iter_mut().zip(grid.nodes()) {
                            *l += log_payoff(e, ds, dv);
                        }
                        if v == 0.0 {
                            LnWealth::exact(0.0)
                        } else {
                            grid.summarize(terms, s, v)
                        }
                    }
                    EngineMode::Batch => grid.ln_wealth(s, v)?,
                };
                *last
            }
        };
        Ok(RoundOutcome {
            t: self.state.t(),
            ln_w: lw.value,
            err_bound: lw.err_bound,
            converged: lw.converged,
        })
    }

    /// The implicit posterior `pi_t` Skeptic bets with in the next round.
    pub fn posterior(&self) -> Posterior {
        match &self.inner {
            Inner::Gaussian { mean, var, .. } => Posterior::Gaussian {
                mean: *mean,
                var: *var,
            },
            Inner::Robbins { grid, terms, .. } => {
                let (s, v) = (self.state.s(), self.state.v());
                let logs: Vec<f64> = if terms.is_empty() {
                    grid.nodes()
                        .iter()
                        .zip(grid.ln_weights())
                        .map(|(&e, &w)| w + log_payoff(e, s, v))
                        .collect()
                } else {
                    terms.clone()
                };
                let m = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                let mut weight: Vec<f64> = logs.iter().map(|l| (l - m).exp()).collect();
                let total: f64 = weight.iter().sum();
                weight.iter_mut().for_each(|w| *w /= total);
                Posterior::Discrete {
                    eta: grid.nodes().to_vec(),
                    weight,
                }
            }
        }
    }
}
