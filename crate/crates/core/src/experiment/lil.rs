use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::report::version_string;
use super::screen::Screen;
use super::stats::Quantiles;
use super::LilConfig;
use crate::bounds::lil_statistics;
use crate::datagen::{PathGenerator, RngStream};
use crate::error::Result;
use crate::path::PathState;
use crate::wealth::ln_wealth_gaussian;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LilCheckpoint {
    pub t: u64,
    pub s: f64,
    pub v: f64,
    /// Robbins-prior regret, with its quadrature error bound.
    pub regret: f64,
    pub regret_err: f64,
    /// `R_t / ln ln V_t`, defined for `V_t > e`.
    pub regret_ratio: Option<f64>,
    /// Gaussian-prior `R_t - ln(1 + V_t)`.
    pub gaussian_excess: f64,
    pub slln_stat: f64,
    pub lil_stat: Option<f64>,
    /// Running maximum of the LIL statistic since `V_t` first exceeded `e`.
    pub running_max_lil: Option<f64>,
    /// Running maximum over the tail window only.
    pub tail_max_lil: Option<f64>,
    /// Membership of each prior's Ville event so far.
    pub in_e_alpha_robbins: bool,
    pub in_e_alpha_gaussian: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LilPath {
    pub path_id: u64,
    pub in_e_alpha_robbins: bool,
    pub in_e_alpha_gaussian: bool,
    /// A Robbins Ville decision could not be certified.
    pub ville_unverified: bool,
    /// Final `R_t / ln ln V_t` above the report threshold.
    pub flagged: bool,
    pub checkpoints: Vec<LilCheckpoint>,
}

impl LilPath {
    pub fn last(&self) -> Option<&LilCheckpoint> {
        self.checkpoints.last()
    }
}

/// A statistic compared against a band over a set of paths.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BandCheck {
    pub band: f64,
    pub paths: u64,
    pub within: u64,
    pub quantiles: Option<Quantiles>,
}

impl BandCheck {
    fn new(band: f64, values: &[f64]) -> Self {
        BandCheck {
            band,
            paths: values.len() as u64,
            within: values.iter().filter(|&&x| x <= band).count() as u64,
            quantiles: Quantiles::of(values),
        }
    }

    pub fn all_within(&self) -> bool {
        self.within == self.paths
    }

    pub fn median_within(&self) -> bool {
        self.quantiles.is_some_and(|q| q.median <= self.band)
    }
}

/// Final-checkpoint diagnostics, each restricted to the paths inside the
/// corresponding prior's Ville event.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LilDiagnostics {
    pub robbins_e_alpha_paths: u64,
    pub gaussian_e_alpha_paths: u64,
    /// Gaussian prior: `R_t - ln(1 + V_t) <= 1`.
    pub gaussian_excess: BandCheck,
    /// Robbins prior: `R_t / ln ln V_t <= report_threshold`.
    pub regret_ratio: BandCheck,
    /// Tail running max of `|S_t| / sqrt(2 V_t ln ln V_t) <= 1.2`.
    pub tail_max_lil: BandCheck,
    pub flagged_paths: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LilReport {
    pub version: String,
    pub config: LilConfig,
    pub checkpoint_times: Vec<u64>,
    pub paths: Vec<LilPath>,
    pub diagnostics: LilDiagnostics,
}

/// Logarithmically spaced times `round(10^(k/m)) <= horizon`, always
/// ending at `horizon`.
pub fn checkpoint_times(horizon: u64, per_decade: u32) -> Vec<u64> {
    let mut out: Vec<u64> = Vec::new();
    let mut k = 0u32;
    loop {
        let t = 10f64.powf(k as f64 / per_decade as f64).round() as u64;
        if t > horizon {
            break;
        }
        if out.last() != Some(&t) {
            out.push(t);
        }
        k += 1;
    }
    if out.last() != Some(&horizon) {
        out.push(horizon);
    }
    out
}

/// Long summary-mode paths (no history), both priors side by side, with
/// quadrature only at the checkpoints. Nothing is asserted here; the report
/// carries the bands.
pub fn lil_longrun(config: &LilConfig) -> Result<LilReport> {
    config.validate()?;
    let screen = Screen::new(config.c, config.coarse_cells, config.fine_cells, config.quadrature)?;
    let replay = PathGenerator::load_for(&config.model)?;
    let times = checkpoint_times(config.horizon, config.checkpoints_per_decade);
    let paths = (0..config.n_paths)
        .into_par_iter()
        .map(|id| lil_path(config, &screen, replay.clone(), &times, id))
        .collect::<Result<Vec<_>>>()?;

    let finals = |pick: &dyn Fn(&LilPath) -> bool, val: &dyn Fn(&LilCheckpoint) -> Option<f64>| -> Vec<f64> {
        paths
            .iter()
            .filter(|p| pick(p))
            .filter_map(|p| p.last().and_then(val))
            .collect()
    };
    let robbins_in = |p: &LilPath| p.in_e_alpha_robbins;
    let gaussian_in = |p: &LilPath| p.in_e_alpha_gaussian;
    let diagnostics = LilDiagnostics {
        robbins_e_alpha_paths: paths.iter().filter(|p| robbins_in(p)).count() as u64,
        gaussian_e_alpha_paths: paths.iter().filter(|p| gaussian_in(p)).count() as u64,
        gaussian_excess: BandCheck::new(1.0, &finals(&gaussian_in, &|c| Some(c.gaussian_excess))),
        regret_ratio: BandCheck::new(config.report_threshold, &finals(&robbins_in, &|c| c.regret_ratio)),
        tail_max_lil: BandCheck::new(1.2, &finals(&robbins_in, &|c| c.tail_max_lil)),
        flagged_paths: paths.iter().filter(|p| p.flagged).count() as u64,
    };
    Ok(LilReport {
        version: version_string(),
        config: config.clone(),
        checkpoint_times: times,
        paths,
        diagnostics,
    })
}

fn lil_path(
    config: &LilConfig,
    screen: &Screen,
    replay: Option<std::sync::Arc<crate::datagen::ReplayData>>,
    times: &[u64],
    path_id: u64,
) -> Result<LilPath> {
    let threshold = (1.0 / config.alpha).ln();
    let tail_start = ((config.tail_start_fraction * config.horizon as f64).ceil() as u64).max(1);
    let mut gen = PathGenerator::with_replay(config.model.clone(), RngStream::new(config.seed, path_id), replay)?;
    let mut state = PathState::new();
    let (mut out_r, mut out_g, mut unverified) = (false, false, false);
    let (mut running, mut tail): (Option<f64>, Option<f64>) = (None, None);
    let mut checkpoints = Vec::with_capacity(times.len());
    let mut next = 0;

    while state.t() < config.horizon {
        let Some(inc) = gen.next_increment() else { break };
        state.push(inc.ds, inc.dv)?;
        let (t, s, v) = (state.t(), state.s(), state.v());
        let l_star = if v > 0.0 { 0.5 * s * s / v } else { 0.0 };
        // Both mixtures are below the unconstrained best bet `L*`.
        if !out_g && l_star > threshold && ln_wealth_gaussian(s, v, config.sigma0_sq) > threshold {
            out_g = true;
        }
        if !out_r && !unverified && l_star > threshold {
            match screen.resolve(s, v, f64::NEG_INFINITY, Some(threshold))?.side_of(threshold) {
                Some(true) => out_r = true,
                Some(false) => {}
                None => unverified = true,
            }
        }
        if v > std::f64::consts::E {
            let l = s.abs() / (2.0 * v * v.ln().ln()).sqrt();
            running = Some(running.map_or(l, |m| m.max(l)));
            if t >= tail_start {
                tail = Some(tail.map_or(l, |m| m.max(l)));
            }
        }
        if next < times.len() && times[next] == t {
            let (regret, regret_err) = if v > 0.0 {
                let exact = screen.exact(s, v)?;
                (l_star - exact.value, exact.err_bound)
            } else {
                (0.0, 0.0)
            };
            let g_regret = l_star - ln_wealth_gaussian(s, v, config.sigma0_sq);
            let stats = lil_statistics(s, v);
            checkpoints.push(LilCheckpoint {
                t,
                s,
                v,
                regret,
                regret_err,
                regret_ratio: (v > std::f64::consts::E).then(|| regret / v.ln().ln()),
                gaussian_excess: g_regret - v.ln_1p(),
                slln_stat: stats.slln_stat,
                lil_stat: stats.lil_stat,
                running_max_lil: running,
                tail_max_lil: tail,
                in_e_alpha_robbins: !out_r && !unverified,
                in_e_alpha_gaussian: !out_g,
            });
            next += 1;
        }
    }
    let flagged = checkpoints
        .last()
        .and_then(|c| c.regret_ratio)
        .is_some_and(|r| r > config.report_threshold);
    Ok(LilPath {
        path_id,
        in_e_alpha_robbins: !out_r && !unverified,
        in_e_alpha_gaussian: !out_g,
        ville_unverified: unverified,
        flagged,
        checkpoints,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn checkpoints_are_log_spaced() {
        assert_eq!(checkpoint_times(100, 2), vec![1, 3, 10, 32, 100]);
        assert_eq!(checkpoint_times(50, 1), vec![1, 10, 50]);
        assert_eq!(checkpoint_times(1, 4), vec![1]);
    }
}
