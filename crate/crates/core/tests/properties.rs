//! Invariants of the library checked on generated inputs.

mod common;

use std::sync::Arc;

use proptest::prelude::*;

use common::C_MIN;
use mixreg::bounds::{
    bound_report, branch, comparison_slack, cs_covers, cs_half_width_sum, gaussian_regret_exact, pathwise_bound,
    BranchId, RHO_SWEEP,
};
use mixreg::datagen::DataModel;
use mixreg::path::{PathState, DEFAULT_TOLERANCE};
use mixreg::wealth::{
    ln_wealth_gaussian, ln_wealth_robbins, EngineMode, QuadratureConfig, RobbinsBracket, RobbinsGrid, WealthEngine,
};
use mixreg::{hindsight_optimum, PriorSpec, RobbinsPrior};

/// `V` log-uniform on `[1e-3, 1e4]`, `|S|/V` up to 10.
fn state() -> impl Strategy<Value = (f64, f64)> {
    (-3.0f64..4.0, -10.0f64..10.0).prop_map(|(lv, r)| {
        let v = 10f64.powf(lv);
        (r * v, v)
    })
}

fn prior() -> RobbinsPrior {
    RobbinsPrior::new(C_MIN).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn robbins_wealth_never_beats_hindsight((s, v) in state()) {
        let z = ln_wealth_robbins(s, v, &prior(), &QuadratureConfig::default()).unwrap();
        let l_star = hindsight_optimum(s, v).l_star;
        prop_assert!(z.converged);
        prop_assert!(z.value <= l_star + comparison_slack(DEFAULT_TOLERANCE, z.err_bound, &[l_star, z.value]));
    }

    #[test]
    fn regret_within_pathwise_bound((s, v) in state(), rho in prop::sample::select(RHO_SWEEP.to_vec())) {
        let z = ln_wealth_robbins(s, v, &prior(), &QuadratureConfig::default()).unwrap();
        let l_star = hindsight_optimum(s, v).l_star;
        let b = pathwise_bound(s, v, C_MIN, rho).unwrap().pathwise_bound;
        let slack = comparison_slack(DEFAULT_TOLERANCE, z.err_bound, &[l_star, z.value, b]);
        prop_assert!(l_star - z.value <= b + slack, "R = {} > B = {b}", l_star - z.value);
    }

    #[test]
    fn report_branch_follows_ratio((s, v) in state()) {
        let rep = bound_report(s, v, C_MIN, 0.1, Some(0.05)).unwrap();
        let ratio = s.abs() / v;
        let want = if ratio <= 1.0 / (1.0 + v).sqrt() {
            BranchId::Interior
        } else if ratio <= 1.0 {
            BranchId::Lil
        } else {
            BranchId::Boundary
        };
        prop_assert_eq!(rep.branch, want);
        prop_assert_eq!(branch(s, v), want);
    }

    #[test]
    fn pathwise_bound_is_symmetric_in_s((s, v) in state()) {
        let a = pathwise_bound(s, v, C_MIN, 0.1).unwrap().pathwise_bound;
        let b = pathwise_bound(-s, v, C_MIN, 0.1).unwrap().pathwise_bound;
        prop_assert_eq!(a, b);
    }

    #[test]
    fn gaussian_identity_and_nonnegative_regret((s, v) in state(), lg in -2.0f64..2.0) {
        let s2 = 10f64.powf(lg);
        let l_star = hindsight_optimum(s, v).l_star;
        let ln_z = ln_wealth_gaussian(s, v, s2);
        let exact = gaussian_regret_exact(s, v, s2);
        prop_assert!(exact >= 0.0);
        prop_assert!((exact - (l_star - ln_z)).abs() <= comparison_slack(1e-12, 0.0, &[l_star, ln_z, exact]));
        let oracle = common::gaussian_ln_wealth(s, v, s2);
        prop_assert!((ln_z - oracle).abs() <= 1e-13 * oracle.abs().max(1.0));
    }

    #[test]
    fn bracket_contains_adaptive_value((s, v) in state()) {
        let p = prior();
        let z = ln_wealth_robbins(s, v, &p, &QuadratureConfig::default()).unwrap();
        for cells in [64, 1024] {
            let b = RobbinsBracket::new(&p, cells).bracket(s, v).unwrap();
            let tol = z.err_bound + 1e-12 * z.value.abs().max(1.0);
            prop_assert!(b.lo <= z.value + tol && z.value <= b.hi + tol, "{} not in {:?}", z.value, b);
        }
    }

    #[test]
    fn early_stop_agrees_with_bracket((s, v) in state(), off in -3.0f64..3.0) {
        let b = RobbinsBracket::new(&prior(), 64);
        let lo = b.bracket(s, v).unwrap().lo;
        let thr = lo + off;
        let certified = b.certifies_above(s, v, thr).unwrap();
        // Certification is sound and, away from the edge, complete.
        if certified {
            prop_assert!(thr <= b.bracket(s, v).unwrap().hi + 1e-9);
        }
        if off < -1e-6 {
            prop_assert!(certified);
        }
    }

    #[test]
    fn interval_mass_is_additive(a in -1.0f64..1.0, b in -1.0f64..1.0, c in -1.0f64..1.0) {
        let mut xs = [a, b, c];
        xs.sort_by(f64::total_cmp);
        let p = prior();
        let whole = p.interval_mass(xs[0], xs[2]).unwrap();
        let parts = p.interval_mass(xs[0], xs[1]).unwrap() + p.interval_mass(xs[1], xs[2]).unwrap();
        prop_assert!((whole - parts).abs() <= 1e-14);
        prop_assert!((0.0..=1.0).contains(&whole));
    }

    // About 7% of the mass on each side lies below the smallest positive
    // f64, so quantiles within 0.072 of 1/2 round to zero.
    #[test]
    fn quantile_inverts_mass(q in prop_oneof![0.001f64..0.42, 0.58f64..0.999]) {
        let p = prior();
        let eta = p.quantile(q);
        let below = p.interval_mass(-1.0, eta).unwrap();
        prop_assert!((below - q).abs() <= 1e-12, "mass below {eta} is {below}, want {q}");
    }

    #[test]
    fn cs_accepts_inside_its_half_width(lv in -1.0f64..4.0, alpha in 0.01f64..0.3) {
        let v = 10f64.powf(lv);
        let w = cs_half_width_sum(v, C_MIN, 0.1, alpha).unwrap();
        prop_assert!(w > 0.0);
        prop_assert!(cs_covers(0.999 * w, v, C_MIN, 0.1, alpha).unwrap());
        prop_assert!(cs_covers(-0.5 * w, v, C_MIN, 0.1, alpha).unwrap());
    }

    #[test]
    fn incremental_matches_batch(incs in prop::collection::vec((-3.0f64..3.0, 0.0f64..3.0), 1..40)) {
        let grid = Arc::new(RobbinsGrid::new(prior(), QuadratureConfig::with_nodes(256)).unwrap());
        let mut pairs = vec![
            (WealthEngine::with_grid(grid.clone(), EngineMode::Incremental), WealthEngine::with_grid(grid, EngineMode::Batch)),
        ];
        let g = PriorSpec::Gaussian { sigma0_sq: 2.0 };
        pairs.push((
            WealthEngine::new(g, QuadratureConfig::default(), EngineMode::Incremental).unwrap(),
            WealthEngine::new(g, QuadratureConfig::default(), EngineMode::Batch).unwrap(),
        ));
        for (inc, batch) in &mut pairs {
            for &(ds, dv) in &incs {
                let a = inc.game_round(ds, dv).unwrap();
                let b = batch.game_round(ds, dv).unwrap();
                prop_assert!((a.ln_w - b.ln_w).abs() <= 1e-9 * a.ln_w.abs().max(1.0));
            }
        }
    }

    #[test]
    fn path_state_keeps_variance_monotone(incs in prop::collection::vec((-5.0f64..5.0, -1.0f64..3.0), 1..50)) {
        let mut st = PathState::new();
        for (ds, dv) in incs {
            let before = (st.t(), st.s(), st.v());
            match st.push(ds, dv) {
                Ok(()) => {
                    prop_assert!(dv >= 0.0);
                    prop_assert!(st.v() >= before.2);
                    prop_assert_eq!(st.t(), before.0 + 1);
                }
                Err(_) => {
                    prop_assert!(dv < 0.0);
                    prop_assert_eq!((st.t(), st.s(), st.v()), before);
                }
            }
        }
    }

    #[test]
    fn prior_spec_text_round_trips(c in C_MIN..1e9, s2 in 1e-6f64..1e6) {
        for spec in [PriorSpec::Robbins { c }, PriorSpec::Gaussian { sigma0_sq: s2 }] {
            let back: PriorSpec = spec.to_string().parse().unwrap();
            prop_assert_eq!(back, spec);
        }
    }

    #[test]
    fn model_text_round_trips(mean in -3.0f64..3.0, sigma in 0.1f64..5.0) {
        for m in [DataModel::drift(mean), DataModel::gaussian_centered(mean), DataModel::GaussianIid { mean, sigma, center: 0.0 }] {
            let back: DataModel = m.to_string().parse().unwrap();
            prop_assert_eq!(back, m);
        }
    }
}

#[test]
fn every_null_variant_round_trips_through_text() {
    for m in DataModel::all_null_variants() {
        let back: DataModel = m.to_string().parse().unwrap();
        assert_eq!(back, m);
    }
}
