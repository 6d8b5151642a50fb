use std::path::Path;
use std::time::Instant;

use serde_json::json;

use mixreg::bounds::{bound_report, comparison_slack, conditional_bound, gaussian_regret_exact, pathwise_bound, v_alpha, RHO_SWEEP};
use mixreg::datagen::{load_replay, DataModel};
use mixreg::experiment::output::{write_experiment, write_lil, write_runtime};
use mixreg::experiment::stats::Quantiles;
use mixreg::experiment::{lil_longrun, run_experiment, ExperimentConfig, ExperimentReport, LilConfig, RuntimeStats};
use mixreg::wealth::{ln_wealth, ln_wealth_robbins, EngineMode, QuadratureConfig, WealthEngine};
use mixreg::{hindsight_optimum, PriorSpec, RobbinsPrior};

use crate::settings::Settings;
use crate::{Cli, CliError, Command};

pub fn dispatch(cli: Cli) -> Result<u8, CliError> {
    let st = Settings::resolve(&cli.global)?;
    if let Some(n) = st.threads {
        // Fails only if a pool already exists, which is harmless.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    match cli.command {
        Command::Bound { s, v, json } => bound(&st, s, v, json),
        Command::Wealth { s, v, json } => wealth(&st, s, v, json),
        Command::Simulate { model, t } => {
            let cfg = ExperimentConfig {
                model: parse_model(&st, model)?,
                n_paths: 1,
                horizon: st.command_value(t, "T", 1000)?,
                trace_paths: 1,
                ..experiment_base(&st)
            };
            experiment(&st, cfg)
        }
        Command::Coverage { model, n_paths, t } => {
            let cfg = ExperimentConfig {
                model: parse_model(&st, model)?,
                n_paths: st.command_value(n_paths, "n-paths", 1000)?,
                horizon: st.command_value(t, "T", 1000)?,
                ..experiment_base(&st)
            };
            experiment(&st, cfg)
        }
        Command::Lil {
            model,
            n_paths,
            t,
            checkpoints_per_decade,
        } => {
            let cfg = LilConfig {
                model: parse_model(&st, model)?,
                alpha: st.alpha,
                c: st.c,
                sigma0_sq: match st.prior {
                    PriorSpec::Gaussian { sigma0_sq } => sigma0_sq,
                    PriorSpec::Robbins { .. } => 1.0,
                },
                n_paths: st.command_value(n_paths, "n-paths", 20)?,
                horizon: st.command_value(t, "T", 100_000)?,
                seed: st.seed,
                checkpoints_per_decade: st.command_value(checkpoints_per_decade, "checkpoints-per-decade", 4)?,
                ..LilConfig::default()
            };
            lil(&st, cfg)
        }
        Command::VerifyReplay { file } => verify_replay(&st, &file),
        Command::Selftest { scale } => selftest(&st, scale),
    }
}

fn parse_model(st: &Settings, flag: Option<String>) -> Result<DataModel, CliError> {
    let raw = st.command_value(flag, "model", "gaussian".to_string())?;
    raw.parse().map_err(CliError::from)
}

fn experiment_base(st: &Settings) -> ExperimentConfig {
    ExperimentConfig {
        prior: st.prior,
        alpha: st.alpha,
        rho: st.rho,
        seed: st.seed,
        tolerance: st.tolerance,
        output: Some(st.out.clone()),
        ..ExperimentConfig::default()
    }
}

fn bound(st: &Settings, s: f64, v: f64, as_json: bool) -> Result<u8, CliError> {
    let rep = bound_report(s, v, st.c, st.rho, Some(st.alpha))?;
    let thr = v_alpha(st.alpha, st.rho, st.c)?;
    let cond = conditional_bound(s, v, st.alpha, st.c, st.rho)?;
    if as_json {
        let doc = json!({
            "S": s, "V": v, "c": st.c, "rho": st.rho, "alpha": st.alpha,
            "report": rep, "ville_threshold": thr, "conditional": cond,
        });
        println!("{}", serde_json::to_string_pretty(&doc).map_err(mixreg::Error::from)?);
    } else {
        println!("state             S = {s}, V = {v}, |S|/V = {}", s.abs() / v);
        println!("branch            {}", rep.branch);
        println!("pathwise bound    {} (rho = {}, c = {})", rep.pathwise_bound, st.rho, st.c);
        println!("conditional bound {} (alpha = {})", cond.value, st.alpha);
        println!("V_alpha           {}", thr.v_alpha);
        println!("generic constant  {} (third-branch constant {})", cond.c_generic, cond.c_third);
        println!("generic bound     {}", cond.generic);
    }
    Ok(0)
}

fn wealth(st: &Settings, s: f64, v: f64, as_json: bool) -> Result<u8, CliError> {
    let z = ln_wealth(&st.prior, s, v, &QuadratureConfig::default())?;
    let l_star = hindsight_optimum(s, v).l_star;
    let regret = l_star - z.value;
    let exact = match st.prior {
        PriorSpec::Gaussian { sigma0_sq } => Some(gaussian_regret_exact(s, v, sigma0_sq)),
        PriorSpec::Robbins { .. } => None,
    };
    if as_json {
        let doc = json!({
            "S": s, "V": v, "prior": st.prior, "ln_z": z.value, "err_bound": z.err_bound,
            "converged": z.converged, "l_star": l_star, "regret": regret, "regret_closed_form": exact,
        });
        println!("{}", serde_json::to_string_pretty(&doc).map_err(mixreg::Error::from)?);
    } else {
        println!("prior     {}", st.prior);
        println!("ln Z      {} (err <= {:e}{})", z.value, z.err_bound, if z.converged { "" } else { ", NOT converged" });
        println!("L*        {l_star}");
        println!("regret    {regret}");
        if let Some(e) = exact {
            println!("closed    {e}");
        }
    }
    Ok(if z.converged { 0 } else { 4 })
}

fn outcome_code(r: &ExperimentReport) -> u8 {
    if !r.claims_hold() {
        3
    } else if r.has_unverified() {
        4
    } else {
        0
    }
}

fn pass(b: bool) -> &'static str {
    if b {
        "PASS"
    } else {
        "FAIL"
    }
}

fn experiment(st: &Settings, cfg: ExperimentConfig) -> Result<u8, CliError> {
    let start = Instant::now();
    let (report, runs) = run_experiment(&cfg)?;
    let secs = start.elapsed().as_secs_f64();
    let mut files = write_experiment(&st.out, &report, &runs)?;
    files.push(write_runtime(
        &st.out,
        &RuntimeStats {
            wall_seconds: secs,
            threads: rayon::current_num_threads(),
            paths_per_second: report.paths as f64 / secs.max(1e-9),
        },
    )?);

    let v = &report.ville.in_e_alpha;
    println!(
        "model {}, prior {}, alpha {}, {} paths x T = {}",
        cfg.model, cfg.prior, cfg.alpha, report.paths, cfg.horizon
    );
    println!(
        "Ville event        {:.4} (95% CI [{:.4}, {:.4}]), floor {:.4}: {}",
        v.frequency,
        v.ci95.lo,
        v.ci95.hi,
        v.floor,
        pass(v.passes)
    );
    let b = &report.bounds;
    println!(
        "bound check ({})  {} violations, worst margin {}, {} unverified steps",
        b.check,
        b.violations,
        b.worst_margin.map_or("n/a".to_string(), |m| format!("{m:.3e}")),
        b.unverified_steps
    );
    let c = &report.conditional;
    println!(
        "on E_alpha         {} paths, {} conditional violations, {} threshold violations",
        c.paths_checked, c.violations, c.prop1_violations
    );
    match &report.cs_coverage {
        Some(cs) => println!(
            "CS coverage        {:.4} (95% CI [{:.4}, {:.4}]), floor {:.4}: {}",
            cs.frequency,
            cs.ci95.lo,
            cs.ci95.hi,
            cs.floor,
            pass(cs.passes)
        ),
        None => println!("CS coverage        n/a (model has no mean)"),
    }
    println!("wall time          {secs:.2}s");
    for f in files {
        println!("wrote {}", f.display());
    }
    Ok(outcome_code(&report))
}

fn lil(st: &Settings, cfg: LilConfig) -> Result<u8, CliError> {
    let report = lil_longrun(&cfg)?;
    println!(
        "{:>10} {:>12} {:>12} {:>12} {:>12} {:>12}",
        "t", "median V", "R/lnlnV", "|S|/V", "LIL stat", "max LIL"
    );
    for (i, &t) in report.checkpoint_times.iter().enumerate() {
        let col = |f: &dyn Fn(&mixreg::experiment::LilCheckpoint) -> Option<f64>| {
            let xs: Vec<f64> = report
                .paths
                .iter()
                .filter_map(|p| p.checkpoints.get(i).and_then(f))
                .collect();
            Quantiles::of(&xs).map_or("-".to_string(), |q| format!("{:.4}", q.median))
        };
        println!(
            "{:>10} {:>12} {:>12} {:>12} {:>12} {:>12}",
            t,
            col(&|c| Some(c.v)),
            col(&|c| c.regret_ratio),
            col(&|c| Some(c.slln_stat)),
            col(&|c| c.lil_stat),
            col(&|c| c.running_max_lil),
        );
    }
    let d = &report.diagnostics;
    let band = |name: &str, b: &mixreg::experiment::BandCheck| {
        println!(
            "{name}: {}/{} paths within {} (median {})",
            b.within,
            b.paths,
            b.band,
            b.quantiles.map_or("-".to_string(), |q| format!("{:.4}", q.median))
        )
    };
    println!(
        "paths in E_alpha: {} (Robbins), {} (Gaussian)",
        d.robbins_e_alpha_paths, d.gaussian_e_alpha_paths
    );
    band("Gaussian R - ln(1+V)", &d.gaussian_excess);
    band("Robbins R / ln ln V", &d.regret_ratio);
    band("tail max LIL stat", &d.tail_max_lil);
    if d.flagged_paths > 0 {
        println!("flagged for inspection: {} paths", d.flagged_paths);
    }
    for f in write_lil(&st.out, &report)? {
        println!("wrote {}", f.display());
    }
    Ok(0)
}

fn verify_replay(st: &Settings, file: &Path) -> Result<u8, CliError> {
    let data = load_replay(file)?;
    let quad = QuadratureConfig::default();
    let mut engine = WealthEngine::new(st.prior, quad, EngineMode::Incremental)?;
    let adaptive = match st.prior {
        PriorSpec::Robbins { c } => Some(RobbinsPrior::new(c)?),
        PriorSpec::Gaussian { .. } => None,
    };
    let mut rhos = RHO_SWEEP.to_vec();
    if !rhos.contains(&st.rho) {
        rhos.push(st.rho);
    }
    let (mut violations, mut unverified) = (Vec::new(), Vec::new());
    for (&(ds, dv), &line) in data.steps.iter().zip(&data.lines) {
        let out = engine.game_round(ds, dv).map_err(|e| match e {
            mixreg::Error::NegativeVarianceIncrement(x) => {
                CliError::usage(format!("{}:{line}: NegativeVarianceIncrement (dV = {x})", file.display()))
            }
            other => CliError::usage(format!("{}:{line}: {other}", file.display())),
        })?;
        let (t, s, v) = (out.t, engine.state().s(), engine.state().v());
        if v == 0.0 {
            continue;
        }
        let (mut ln_z, mut err, mut ok) = (out.ln_w, out.err_bound, out.converged);
        if !ok {
            if let Some(p) = &adaptive {
                let z = ln_wealth_robbins(s, v, p, &quad)?;
                (ln_z, err, ok) = (z.value, z.err_bound, z.converged);
            }
        }
        if !ok {
            unverified.push(t);
            continue;
        }
        let l_star = hindsight_optimum(s, v).l_star;
        match st.prior {
            PriorSpec::Robbins { c } => {
                for &rho in &rhos {
                    let b = pathwise_bound(s, v, c, rho)?.pathwise_bound;
                    let margin = (l_star - ln_z) - b - comparison_slack(st.tolerance, err, &[l_star, ln_z, b]);
                    if margin > 0.0 {
                        violations.push((t, rho, margin));
                    }
                }
            }
            PriorSpec::Gaussian { sigma0_sq } => {
                let exact = gaussian_regret_exact(s, v, sigma0_sq);
                let margin = ((l_star - ln_z) - exact).abs() - comparison_slack(st.tolerance, err, &[l_star, ln_z, exact]);
                if margin > 0.0 {
                    violations.push((t, 0.0, margin));
                }
            }
        }
    }
    println!(
        "{}: {} steps, {} violations, {} unverified",
        file.display(),
        data.steps.len(),
        violations.len(),
        unverified.len()
    );
    if !violations.is_empty() {
        for (t, rho, m) in &violations {
            println!("violation t = {t} rho = {rho} margin = {m:e}");
        }
        return Ok(3);
    }
    if !unverified.is_empty() {
        println!("unverified steps: {unverified:?}");
        return Ok(4);
    }
    Ok(0)
}

fn selftest(st: &Settings, scale: u64) -> Result<u8, CliError> {
    let start = Instant::now();
    let checks = mixreg::selftest::run(st.seed, scale)?;
    let mut all = true;
    for c in &checks {
        all &= c.passed;
        println!("{} {}: {}", pass(c.passed), c.name, c.detail);
    }
    println!("{} checks in {:.1}s", checks.len(), start.elapsed().as_secs_f64());
    Ok(if all { 0 } else { 3 })
}
