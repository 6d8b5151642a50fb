use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::report::ExperimentReport;
use super::screen::Screen;
use super::ExperimentConfig;
use crate::bounds::{
    bound_report, comparison_slack, conditional_bound, cs_covers, cs_half_width_sum, gaussian_conditional_bound,
    gaussian_regret_exact, lil_statistics, pathwise_bound, v_alpha,
};
use crate::datagen::{PathGenerator, ReplayData, RngStream};
use crate::error::Result;
use crate::path::{hindsight_optimum, PathState, PriorSpec};
use crate::wealth::ln_wealth_gaussian;

/// Finite-horizon Ville-event membership of one path.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VilleOutcome {
    pub path_id: u64,
    /// `sup_{t <= T} ln Z_t <= ln(1/alpha)`, certified at every step.
    pub in_e_alpha: bool,
    /// Certified upper bound on `sup_{t <= T} ln Z_t`. Exact for the
    /// Gaussian prior; for the Robbins prior it is only as tight as the
    /// membership decision required.
    pub sup_ln_z_upper: f64,
    pub first_crossing_t: Option<u64>,
    /// Some step could not be placed on either side of `ln(1/alpha)`.
    pub unverified: bool,
}

/// One row of the per-step trace.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub t: u64,
    pub s: f64,
    pub v: f64,
    pub ln_z: f64,
    pub regret: f64,
    pub branch: Option<&'static str>,
    pub bound: Option<f64>,
    pub cond_bound: Option<f64>,
    pub cs_lo: Option<f64>,
    pub cs_hi: Option<f64>,
    pub covered: Option<bool>,
}

/// Everything one simulated path contributes to the report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathRun {
    pub ville: VilleOutcome,
    pub steps: u64,
    /// Steps at which some checked bound was violated.
    pub bound_violations: u64,
    /// Violating steps per entry of `rho_sweep` (empty for the Gaussian prior,
    /// whose check is the exact regret identity).
    pub violations_by_rho: Vec<u64>,
    /// Largest `R_t - bound_t - slack_t` credited by the comparison
    /// convention; positive exactly when a violation was recorded. `None`
    /// when no step had `V_t > 0`.
    pub max_violation_margin: Option<f64>,
    /// Conditional-bound violations while the path was still inside `E_alpha`.
    pub conditional_violations: u64,
    /// Steps inside `E_alpha` with `V_t >= V_alpha` and `|eta*_t| > 1`.
    pub prop1_violations: u64,
    /// Steps whose quadrature missed its error target.
    pub unverified_steps: u64,
    /// Steps screening could not decide.
    pub exact_evaluations: u64,
    /// Whether the confidence sequence covered the mean at every step.
    pub cs_covered: Option<bool>,
    pub cs_first_miss: Option<u64>,
    pub final_s: f64,
    pub final_v: f64,
    pub final_regret: f64,
    pub final_regret_err: f64,
    /// Largest `|S_t| / sqrt(2 V_t ln ln V_t)` over steps with `V_t > e`.
    pub max_lil_stat: Option<f64>,
    pub final_slln_stat: f64,
    #[serde(skip)]
    pub trace: Vec<TraceRow>,
}

impl PathRun {
    fn new(path_id: u64, n_rho: usize, has_mean: bool) -> Self {
        PathRun {
            ville: VilleOutcome {
                path_id,
                in_e_alpha: true,
                sup_ln_z_upper: 0.0,
                first_crossing_t: None,
                unverified: false,
            },
            steps: 0,
            bound_violations: 0,
            violations_by_rho: vec![0; n_rho],
            max_violation_margin: None,
            conditional_violations: 0,
            prop1_violations: 0,
            unverified_steps: 0,
            exact_evaluations: 0,
            cs_covered: has_mean.then_some(true),
            cs_first_miss: None,
            final_s: 0.0,
            final_v: 0.0,
            final_regret: 0.0,
            final_regret_err: 0.0,
            max_lil_stat: None,
            final_slln_stat: 0.0,
            trace: Vec::new(),
        }
    }

    fn note_margin(&mut self, m: f64) {
        self.max_violation_margin = Some(self.max_violation_margin.map_or(m, |x| x.max(m)));
    }
}

/// Shared, read-only state of one experiment.
pub(crate) struct Context<'a> {
    cfg: &'a ExperimentConfig,
    screen: Option<Screen>,
    replay: Option<Arc<ReplayData>>,
    v_alpha: f64,
}

impl<'a> Context<'a> {
    pub(crate) fn new(cfg: &'a ExperimentConfig) -> Result<Self> {
        cfg.validate()?;
        let screen = match cfg.prior {
            PriorSpec::Robbins { c } => Some(Screen::new(c, cfg.coarse_cells, cfg.fine_cells, cfg.quadrature)?),
            PriorSpec::Gaussian { .. } => None,
        };
        Ok(Context {
            cfg,
            screen,
            replay: PathGenerator::load_for(&cfg.model)?,
            v_alpha: v_alpha(cfg.alpha, cfg.rho, cfg.robbins_c())?.v_alpha,
        })
    }
}

/// Simulate path `stream_id` of `config`.
pub fn run_path(config: &ExperimentConfig, stream_id: u64) -> Result<PathRun> {
    run_path_in(&Context::new(config)?, stream_id)
}

pub(crate) fn run_path_in(ctx: &Context<'_>, path_id: u64) -> Result<PathRun> {
    let cfg = ctx.cfg;
    let c = cfg.robbins_c();
    let ln_inv_alpha = (1.0 / cfg.alpha).ln();
    let target = cfg.model.mean_and_center();
    let offset = target.map(|(mean, center)| mean - center);
    let tracing = path_id < cfg.trace_paths;

    let mut gen = PathGenerator::with_replay(cfg.model.clone(), RngStream::new(cfg.seed, path_id), ctx.replay.clone())?;
    let mut state = PathState::new();
    let mut run = PathRun::new(path_id, cfg.rho_sweep.len(), target.is_some());
    let mut crossed = false;

    for _ in 0..cfg.horizon {
        let Some(inc) = gen.next_increment() else { break };
        state.push(inc.ds, inc.dv)?;
        let (t, s, v) = (state.t(), state.s(), state.v());

        if let (Some(off), Some(true)) = (offset, run.cs_covered) {
            if !cs_covers(s - off * t as f64, v, c, cfg.rho, cfg.alpha)? {
                run.cs_covered = Some(false);
                run.cs_first_miss = Some(t);
            }
        }
        if v > 0.0 {
            if let Some(l) = lil_statistics(s, v).lil_stat {
                run.max_lil_stat = Some(run.max_lil_stat.map_or(l, |m: f64| m.max(l)));
            }
        }

        let ln_z = match &ctx.screen {
            Some(screen) => robbins_step(ctx, screen, &mut run, &mut crossed, s, v, t, ln_inv_alpha)?,
            None => gaussian_step(ctx, &mut run, &mut crossed, s, v, t, ln_inv_alpha)?,
        };
        if tracing {
            run.trace.push(trace_row(ctx, s, v, t, ln_z, target)?);
        }
    }

    run.steps = state.t();
    let (s, v) = (state.s(), state.v());
    run.final_s = s;
    run.final_v = v;
    run.final_slln_stat = lil_statistics(s, v).slln_stat;
    if v > 0.0 {
        let l_star = hindsight_optimum(s, v).l_star;
        let (ln_z, err) = match (&ctx.screen, cfg.prior) {
            (Some(screen), _) => {
                let e = screen.exact(s, v)?;
                (e.value, e.err_bound)
            }
            (None, PriorSpec::Gaussian { sigma0_sq }) => (ln_wealth_gaussian(s, v, sigma0_sq), 0.0),
            (None, PriorSpec::Robbins { .. }) => unreachable!("Robbins prior always has a screen"),
        };
        run.final_regret = l_star - ln_z;
        run.final_regret_err = err;
    }
    run.ville.in_e_alpha = !crossed && !run.ville.unverified;
    Ok(run)
}

#[allow(clippy::too_many_arguments)]
fn robbins_step(
    ctx: &Context<'_>,
    screen: &Screen,
    run: &mut PathRun,
    crossed: &mut bool,
    s: f64,
    v: f64,
    t: u64,
    ln_inv_alpha: f64,
) -> Result<Option<f64>> {
    if v == 0.0 {
        // ln Z = 0 and R = 0: nothing to check.
        return Ok(Some(0.0));
    }
    let cfg = ctx.cfg;
    let c = screen.prior().c();
    let l_star = hindsight_optimum(s, v).l_star;
    let tol = cfg.tolerance;
    // Floors on ln Z_t implied by each bound: R_t <= B + slack.
    let floor = |b: f64| l_star - b - comparison_slack(tol, 0.0, &[l_star, b]);
    let mut floors = Vec::with_capacity(cfg.rho_sweep.len());
    for &rho in &cfg.rho_sweep {
        floors.push(floor(pathwise_bound(s, v, c, rho)?.pathwise_bound));
    }
    let tracking = !*crossed;
    let cond_floor = if tracking {
        Some(floor(conditional_bound(s, v, cfg.alpha, c, cfg.rho)?.value))
    } else {
        None
    };
    let need = floors.iter().copied().chain(cond_floor).fold(f64::NEG_INFINITY, f64::max);
    let k = screen.resolve(s, v, need, tracking.then_some(ln_inv_alpha))?;
    if k.exact.is_some() {
        run.exact_evaluations += 1;
    }
    let unverified = k.unverified();
    if unverified {
        run.unverified_steps += 1;
    }
    let credited = k.credited();

    let mut violated = false;
    for (i, f) in floors.iter().enumerate() {
        let margin = f - credited;
        run.note_margin(margin);
        if margin > 0.0 && !unverified {
            run.violations_by_rho[i] += 1;
            violated = true;
        }
    }
    if violated {
        run.bound_violations += 1;
    }
    if let Some(f) = cond_floor {
        if f - credited > 0.0 && !unverified {
            run.conditional_violations += 1;
        }
        if v >= ctx.v_alpha && s.abs() / v > 1.0 {
            run.prop1_violations += 1;
        }
        match k.side_of(ln_inv_alpha) {
            Some(true) => {
                *crossed = true;
                run.ville.first_crossing_t = Some(t);
            }
            Some(false) => {}
            None => run.ville.unverified = true,
        }
    }
    let upper = match k.exact {
        Some(e) if e.converged => k.hi.min(e.value + e.err_bound),
        _ => k.hi,
    };
    run.ville.sup_ln_z_upper = run.ville.sup_ln_z_upper.max(upper);
    Ok(k.exact.filter(|e| e.converged).map(|e| e.value))
}

fn gaussian_step(
    ctx: &Context<'_>,
    run: &mut PathRun,
    crossed: &mut bool,
    s: f64,
    v: f64,
    t: u64,
    ln_inv_alpha: f64,
) -> Result<Option<f64>> {
    let cfg = ctx.cfg;
    let PriorSpec::Gaussian { sigma0_sq } = cfg.prior else {
        unreachable!("Gaussian step needs a Gaussian prior")
    };
    if v == 0.0 {
        return Ok(Some(0.0));
    }
    let ln_z = ln_wealth_gaussian(s, v, sigma0_sq);
    let l_star = hindsight_optimum(s, v).l_star;
    let regret = l_star - ln_z;
    let exact = gaussian_regret_exact(s, v, sigma0_sq);
    let margin = (regret - exact).abs() - comparison_slack(cfg.tolerance, 0.0, &[l_star, ln_z, exact]);
    run.note_margin(margin);
    if margin > 0.0 {
        run.bound_violations += 1;
    }
    if !*crossed {
        if v > cfg.v0 {
            let b = gaussian_conditional_bound(v, cfg.v0, sigma0_sq, cfg.alpha)?;
            if regret - b > comparison_slack(cfg.tolerance, 0.0, &[l_star, ln_z, b]) {
                run.conditional_violations += 1;
            }
        }
        if ln_z > ln_inv_alpha {
            *crossed = true;
            run.ville.first_crossing_t = Some(t);
        }
    }
    run.ville.sup_ln_z_upper = run.ville.sup_ln_z_upper.max(ln_z);
    Ok(Some(ln_z))
}

fn trace_row(
    ctx: &Context<'_>,
    s: f64,
    v: f64,
    t: u64,
    known: Option<f64>,
    target: Option<(f64, f64)>,
) -> Result<TraceRow> {
    let cfg = ctx.cfg;
    let c = cfg.robbins_c();
    let ln_z = match (known, &ctx.screen) {
        (Some(z), _) => z,
        (None, Some(screen)) => screen.exact(s, v)?.value,
        (None, None) => unreachable!("Gaussian steps always know ln Z"),
    };
    let regret = if v > 0.0 { hindsight_optimum(s, v).l_star - ln_z } else { 0.0 };
    let mut row = TraceRow {
        t,
        s,
        v,
        ln_z,
        regret,
        branch: None,
        bound: None,
        cond_bound: None,
        cs_lo: None,
        cs_hi: None,
        covered: None,
    };
    if v > 0.0 {
        let rep = bound_report(s, v, c, cfg.rho, Some(cfg.alpha))?;
        row.branch = Some(rep.branch.label());
        row.bound = Some(rep.pathwise_bound);
        row.cond_bound = rep.conditional_bound;
    }
    if let Some((mean, center)) = target {
        let w = if v > 0.0 { cs_half_width_sum(v, c, cfg.rho, cfg.alpha)? } else { 0.0 };
        let tf = t as f64;
        row.cs_lo = Some(center + (s - w) / tf);
        row.cs_hi = Some(center + (s + w) / tf);
        row.covered = Some(cs_covers(s - (mean - center) * tf, v, c, cfg.rho, cfg.alpha)?);
    }
    Ok(row)
}

/// Run every path (in parallel, one RNG stream per path) and aggregate.
/// Paths are merged in `path_id` order, so the report does not depend on
/// the thread count or schedule.
pub fn run_experiment(config: &ExperimentConfig) -> Result<(ExperimentReport, Vec<PathRun>)> {
    let ctx = Context::new(config)?;
    let runs = (0..config.n_paths)
        .into_par_iter()
        .map(|id| run_path_in(&ctx, id))
        .collect::<Result<Vec<_>>>()?;
    Ok((ExperimentReport::aggregate(config, &runs), runs))
}
