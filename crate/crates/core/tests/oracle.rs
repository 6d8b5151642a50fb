mod common;

use common::C_MIN;
use mixreg::prior::RobbinsPrior;
use mixreg::wealth::{ln_wealth_gaussian, ln_wealth_robbins, QuadratureConfig, RobbinsBracket};

#[test]
fn mass_oracle_is_self_consistent() {
    let z0 = common::z0_numeric(C_MIN);
    assert!((z0 - 2.0 / C_MIN.ln().ln()).abs() < 1e-11, "{z0}");
    let whole = common::prior_mass(C_MIN, -1.0, 1.0, 1_000_000);
    assert!((whole - 1.0).abs() < 1e-11);
    let split = common::prior_mass(C_MIN, -1.0, 0.3, 500_000) + common::prior_mass(C_MIN, 0.3, 1.0, 500_000);
    assert!((split - 1.0).abs() < 1e-11);
}

#[test]
fn prior_density_matches_formula() {
    let p = RobbinsPrior::new(C_MIN).unwrap();
    let z0 = 2.0 / C_MIN.ln().ln();
    for &y in &[1e-300, 1e-30, 1e-5, 0.01, 0.5, 1.0] {
        for eta in [y, -y] {
            let d = p.density(eta).unwrap();
            let want = common::phi(C_MIN, y) / z0;
            assert!((d - want).abs() <= 1e-13 * want, "eta = {eta}: {d} vs {want}");
        }
    }
    assert_eq!(p.density(1.5).unwrap(), 0.0);
    assert!(p.density(0.0).is_err());
}

#[test]
fn robbins_wealth_matches_riemann_oracle() {
    let p = RobbinsPrior::new(C_MIN).unwrap();
    let quad = QuadratureConfig::default();
    // One state per branch plus both edges of the boundary regime.
    for &(s, v) in &[(0.0, 1.0), (0.3, 2.0), (-20.0, 400.0), (900.0, 1000.0), (1e4, 1e4), (-5e4, 1e4), (3.0, 0.01)] {
        let got = ln_wealth_robbins(s, v, &p, &quad).unwrap();
        let want = common::robbins_ln_wealth(C_MIN, s, v, 1_000_000);
        assert!(got.converged);
        assert!((got.value - want).abs() < 1e-7, "({s}, {v}): {} vs {want}", got.value);
    }
}

#[test]
fn bracket_contains_oracle() {
    let p = RobbinsPrior::new(C_MIN).unwrap();
    let b = RobbinsBracket::new(&p, 64);
    for &(s, v) in &[(0.5, 1.0), (40.0, 100.0), (-300.0, 200.0)] {
        let want = common::robbins_ln_wealth(C_MIN, s, v, 200_000);
        let br = b.bracket(s, v).unwrap();
        assert!(br.lo <= want + 1e-9 && want <= br.hi + 1e-9, "({s}, {v}): {want} not in {br:?}");
    }
}

#[test]
fn gaussian_closed_form_matches_oracle() {
    for &(s, v, s2) in &[(0.0, 1.0, 1.0), (3.0, 2.0, 0.5), (-100.0, 50.0, 10.0)] {
        let got = ln_wealth_gaussian(s, v, s2);
        let want = common::gaussian_ln_wealth(s, v, s2);
        assert!((got - want).abs() <= 1e-13 * want.abs().max(1.0));
    }
}
