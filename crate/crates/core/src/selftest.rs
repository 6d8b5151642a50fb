//! Reduced-scale run of the library's invariants, for smoke-testing a build.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::bounds::{comparison_slack, gaussian_regret_exact, pathwise_bound, RHO_SWEEP};
use crate::datagen::{DataModel, RngStream};
use crate::error::Result;
use crate::experiment::{run_experiment, ExperimentConfig};
use crate::path::{hindsight_optimum, PriorSpec, DEFAULT_TOLERANCE, ROBBINS_C_MIN};
use crate::prior::RobbinsPrior;
use crate::wealth::{ln_wealth_gaussian, ln_wealth_robbins, EngineMode, QuadratureConfig, WealthEngine};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelfCheck {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

fn check(name: &str, passed: bool, detail: String) -> SelfCheck {
    SelfCheck {
        name: name.to_string(),
        passed,
        detail,
    }
}

/// Random state with `|S|/V` up to 10 and `V` log-uniform on `[1e-3, 1e4]`.
pub fn fuzz_state(rng: &mut impl Rng) -> (f64, f64) {
    let v = 10f64.powf(rng.random_range(-3.0..4.0));
    let ratio = rng.random_range(0.0..10.0);
    let sign = if rng.random::<bool>() { 1.0 } else { -1.0 };
    (sign * ratio * v, v)
}

/// Run every check. `scale` multiplies the sample sizes (1 is the default
/// smoke-test size, well under a minute on one core).
pub fn run(seed: u64, scale: u64) -> Result<Vec<SelfCheck>> {
    let scale = scale.max(1);
    let prior = RobbinsPrior::new(ROBBINS_C_MIN)?;
    let quad = QuadratureConfig::default();
    let mut out = Vec::new();
    let mut rng = RngStream::new(seed, u64::MAX);

    let mass = prior.interval_mass(-1.0, 1.0)?;
    let z0 = 2.0 / ROBBINS_C_MIN.ln().ln();
    out.push(check(
        "prior total mass and normalizer",
        (mass - 1.0).abs() < 1e-12 && (prior.z0() - z0).abs() < 1e-15,
        format!("mass = {mass}, Z0 = {}", prior.z0()),
    ));

    let n = 1000 * scale;
    let (mut worst, mut violations, mut unverified) = (f64::NEG_INFINITY, 0u64, 0u64);
    for _ in 0..n {
        let (s, v) = fuzz_state(&mut rng);
        let z = ln_wealth_robbins(s, v, &prior, &quad)?;
        if !z.converged {
            unverified += 1;
            continue;
        }
        let l_star = hindsight_optimum(s, v).l_star;
        for rho in RHO_SWEEP {
            let b = pathwise_bound(s, v, ROBBINS_C_MIN, rho)?.pathwise_bound;
            let margin = (l_star - z.value) - b - comparison_slack(DEFAULT_TOLERANCE, z.err_bound, &[l_star, z.value, b]);
            worst = worst.max(margin);
            if margin > 0.0 {
                violations += 1;
            }
        }
    }
    out.push(check(
        "pathwise bound dominates exact regret on fuzzed states",
        violations == 0 && unverified == 0,
        format!("{n} states x 3 rho: {violations} violations, {unverified} unverified, worst margin {worst:.3e}"),
    ));

    let (mut worst_id, mut id_fail) = (0f64, 0u64);
    for _ in 0..n {
        let (s, v) = fuzz_state(&mut rng);
        let sigma0_sq = 10f64.powf(rng.random_range(-2.0..2.0));
        let exact = gaussian_regret_exact(s, v, sigma0_sq);
        let (l_star, ln_z) = (hindsight_optimum(s, v).l_star, ln_wealth_gaussian(s, v, sigma0_sq));
        // L* - ln Z cancels, so the slack scales with the operands.
        let gap = (exact - (l_star - ln_z)).abs();
        worst_id = worst_id.max(gap);
        if gap > comparison_slack(DEFAULT_TOLERANCE, 0.0, &[l_star, ln_z, exact]) {
            id_fail += 1;
        }
    }
    out.push(check(
        "Gaussian regret identity",
        id_fail == 0,
        format!("{n} states: {id_fail} outside rounding slack, worst gap {worst_id:.3e}"),
    ));

    let mut worst_tel = 0f64;
    for path in 0..10 * scale {
        let mut rs = RngStream::new(seed, path);
        for spec in [PriorSpec::default(), PriorSpec::Gaussian { sigma0_sq: 1.0 }] {
            let mut inc = WealthEngine::new(spec, QuadratureConfig::with_nodes(512), EngineMode::Incremental)?;
            let mut batch = WealthEngine::new(spec, QuadratureConfig::with_nodes(512), EngineMode::Batch)?;
            for _ in 0..50 {
                let ds: f64 = rs.random_range(-2.0..2.0);
                let dv: f64 = rs.random_range(0.0..2.0);
                let a = inc.game_round(ds, dv)?;
                let b = batch.game_round(ds, dv)?;
                worst_tel = worst_tel.max((a.ln_w - b.ln_w).abs());
            }
        }
    }
    out.push(check(
        "incremental and batch wealth agree",
        worst_tel <= 1e-9,
        format!("worst gap {worst_tel:.3e}"),
    ));

    let cfg = ExperimentConfig {
        n_paths: 200 * scale,
        horizon: 300,
        seed,
        ..Default::default()
    };
    let (report, _) = run_experiment(&cfg)?;
    let ville = report.ville.in_e_alpha;
    out.push(check(
        "Ville event frequency (Gaussian data, Robbins prior)",
        ville.passes,
        format!("{:.4} vs floor {:.4}", ville.frequency, ville.floor),
    ));
    out.push(check(
        "pathwise, conditional and threshold claims on simulated paths",
        report.claims_hold() && !report.has_unverified(),
        format!(
            "{} bound, {} conditional, {} threshold violations; {} unverified steps",
            report.bounds.violations,
            report.conditional.violations,
            report.conditional.prop1_violations,
            report.bounds.unverified_steps
        ),
    ));
    let cs = report.cs_coverage.expect("Gaussian data has a mean");
    out.push(check(
        "confidence sequence coverage",
        cs.passes,
        format!("{:.4} vs floor {:.4}", cs.frequency, cs.floor),
    ));

    let cfg = ExperimentConfig {
        model: DataModel::drift(0.5),
        n_paths: 20 * scale,
        horizon: 1000,
        seed,
        ..Default::default()
    };
    let (report, _) = run_experiment(&cfg)?;
    let left = report.paths - report.ville.in_e_alpha.successes;
    out.push(check(
        "drifting data leaves the Ville event",
        left * 100 >= 99 * report.paths && report.claims_hold(),
        format!("{left} of {} paths crossed ln(1/alpha)", report.paths),
    ));

    let mut adv_viol = 0;
    let generators = [
        "drift:2",
        "spike:5:1e6",
        "signflip:7:1",
        "geometric:1.05:0.5",
        "boundary:one:0",
        "boundary:one:1e-9",
        "boundary:one:-1e-9",
        "boundary:interior:0",
        "boundary:interior:1e-9",
        "boundary:interior:-1e-9",
    ];
    for g in generators {
        let cfg = ExperimentConfig {
            model: format!("adversarial:{g}").parse()?,
            n_paths: 1,
            horizon: 200,
            ..Default::default()
        };
        let (r, _) = run_experiment(&cfg)?;
        adv_viol += r.bounds.violations + r.bounds.unverified_steps;
    }
    out.push(check(
        "pathwise bound on adversarial sequences",
        adv_viol == 0,
        format!("{} generators, {adv_viol} violating or unverified steps", generators.len()),
    ));
    Ok(out)
}
