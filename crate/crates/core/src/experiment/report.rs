use serde::{Deserialize, Serialize};

use super::run::PathRun;
use super::stats::{binomial_floor, decade_histogram, DecadeBin, Frequency, Quantiles};
use super::ExperimentConfig;
use crate::bounds::v_alpha;
use crate::path::PriorSpec;

/// Version string recorded in every report.
pub fn version_string() -> String {
    format!("mixreg {}", env!("CARGO_PKG_VERSION"))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VilleSummary {
    /// Paths certified inside `E_alpha`, with the `1 - alpha - 3 SE` floor.
    pub in_e_alpha: Frequency,
    pub unverified_paths: u64,
    pub first_crossing: Vec<DecadeBin>,
    pub sup_ln_z_upper: Option<Quantiles>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RhoViolations {
    pub rho: f64,
    pub violations: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundSummary {
    /// `pathwise` for the Robbins prior, `exact_identity` for the Gaussian prior.
    pub check: String,
    pub violations: u64,
    pub violating_paths: u64,
    pub by_rho: Vec<RhoViolations>,
    pub worst_margin: Option<f64>,
    pub unverified_steps: u64,
    pub unverified_paths: u64,
    pub exact_evaluations: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionalSummary {
    /// Paths inside `E_alpha`, the only ones the conditional claims cover.
    pub paths_checked: u64,
    pub violations: u64,
    pub violating_paths: u64,
    pub prop1_violations: u64,
    pub v_alpha: Option<f64>,
    pub v0: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LilSummary {
    pub max_lil_stat: Option<Quantiles>,
    pub final_slln_stat: Option<Quantiles>,
    pub final_regret: Option<Quantiles>,
}

/// Aggregates of one Monte Carlo run. A pure function of the config: no
/// timing information lives here (see [`RuntimeStats`]).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub version: String,
    pub config: ExperimentConfig,
    pub paths: u64,
    pub steps: u64,
    pub ville: VilleSummary,
    pub bounds: BoundSummary,
    pub conditional: ConditionalSummary,
    /// Time-uniform coverage of the mean; absent for models without one.
    pub cs_coverage: Option<Frequency>,
    pub lil: LilSummary,
}

impl ExperimentReport {
    pub fn aggregate(config: &ExperimentConfig, runs: &[PathRun]) -> Self {
        let n = runs.len() as u64;
        let count = |f: &dyn Fn(&PathRun) -> bool| runs.iter().filter(|r| f(r)).count() as u64;
        let in_e = count(&|r| r.ville.in_e_alpha);
        let crossings: Vec<u64> = runs.iter().filter_map(|r| r.ville.first_crossing_t).collect();
        let sups: Vec<f64> = runs.iter().map(|r| r.ville.sup_ln_z_upper).collect();

        let robbins = matches!(config.prior, PriorSpec::Robbins { .. });
        let by_rho = if robbins {
            config
                .rho_sweep
                .iter()
                .enumerate()
                .map(|(i, &rho)| RhoViolations {
                    rho,
                    violations: runs.iter().map(|r| r.violations_by_rho[i]).sum(),
                })
                .collect()
        } else {
            Vec::new()
        };
        let worst_margin = runs
            .iter()
            .filter_map(|r| r.max_violation_margin)
            .fold(None, |acc: Option<f64>, m| Some(acc.map_or(m, |a| a.max(m))));

        let on_e: Vec<&PathRun> = runs.iter().filter(|r| r.ville.in_e_alpha).collect();
        let conditional = ConditionalSummary {
            paths_checked: on_e.len() as u64,
            violations: on_e.iter().map(|r| r.conditional_violations).sum(),
            violating_paths: on_e.iter().filter(|r| r.conditional_violations > 0).count() as u64,
            prop1_violations: on_e.iter().map(|r| r.prop1_violations).sum(),
            v_alpha: robbins
                .then(|| v_alpha(config.alpha, config.rho, config.robbins_c()).ok().map(|t| t.v_alpha))
                .flatten(),
            v0: (!robbins).then_some(config.v0),
        };

        let cs_coverage = config.model.has_mean().then(|| {
            Frequency::new(
                count(&|r| r.cs_covered == Some(true)),
                n,
                binomial_floor(config.alpha, n),
            )
        });

        let lil_max: Vec<f64> = runs.iter().filter_map(|r| r.max_lil_stat).collect();
        let slln: Vec<f64> = runs.iter().map(|r| r.final_slln_stat).collect();
        let regrets: Vec<f64> = runs.iter().map(|r| r.final_regret).collect();

        ExperimentReport {
            version: version_string(),
            config: config.clone(),
            paths: n,
            steps: runs.iter().map(|r| r.steps).sum(),
            ville: VilleSummary {
                in_e_alpha: Frequency::new(in_e, n, binomial_floor(config.alpha, n)),
                unverified_paths: count(&|r| r.ville.unverified),
                first_crossing: decade_histogram(&crossings, config.horizon),
                sup_ln_z_upper: Quantiles::of(&sups),
            },
            bounds: BoundSummary {
                check: if robbins { "pathwise" } else { "exact_identity" }.to_string(),
                violations: runs.iter().map(|r| r.bound_violations).sum(),
                violating_paths: count(&|r| r.bound_violations > 0),
                by_rho,
                worst_margin,
                unverified_steps: runs.iter().map(|r| r.unverified_steps).sum(),
                unverified_paths: count(&|r| r.unverified_steps > 0),
                exact_evaluations: runs.iter().map(|r| r.exact_evaluations).sum(),
            },
            conditional,
            cs_coverage,
            lil: LilSummary {
                max_lil_stat: Quantiles::of(&lil_max),
                final_slln_stat: Quantiles::of(&slln),
                final_regret: Quantiles::of(&regrets),
            },
        }
    }

    /// Recompute every field derivable from the counts alone (frequencies,
    /// intervals, floors, pass flags, the version string).
    pub fn recompute_derived(&self) -> Self {
        let mut r = self.clone();
        let refresh = |f: &Frequency| Frequency::new(f.successes, f.trials, binomial_floor(self.config.alpha, f.trials));
        r.ville.in_e_alpha = refresh(&self.ville.in_e_alpha);
        r.cs_coverage = self.cs_coverage.as_ref().map(refresh);
        r.version = version_string();
        r
    }

    /// Zero violations of every deterministic and conditional claim.
    pub fn claims_hold(&self) -> bool {
        self.bounds.violations == 0 && self.conditional.violations == 0 && self.conditional.prop1_violations == 0
    }

    /// Some step or path could not be verified numerically.
    pub fn has_unverified(&self) -> bool {
        self.bounds.unverified_steps > 0 || self.ville.unverified_paths > 0
    }
}

/// Wall-clock statistics, kept out of the report so that reports stay
/// byte-identical across runs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RuntimeStats {
    pub wall_seconds: f64,
    pub threads: usize,
    pub paths_per_second: f64,
}
