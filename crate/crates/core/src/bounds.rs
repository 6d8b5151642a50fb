//! Regret bounds as pure evaluators.
//!
//! The Robbins-prior bound splits on `|S|/V` into three branches:
//! interior (`<= 1/sqrt(1+V)`), LIL (`<= 1`) and boundary (`> 1`). Each
//! evaluator reports which branch fired. Theorem-level entry points accept
//! `rho` in `(0, 1/4)`; the lemma-level ones accept `(0, 1)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::path::{hindsight_optimum, PriorSpec};

pub const DEFAULT_RHO: f64 = 0.1;
pub const RHO_SWEEP: [f64; 3] = [0.05, 0.1, 0.2];

const RHO_THEOREM: &str = "(0, 1/4)";
const RHO_LEMMA: &str = "(0, 1)";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BranchId {
    #[serde(rename = "B1_interior")]
    Interior,
    #[serde(rename = "B2_lil")]
    Lil,
    #[serde(rename = "B3_boundary")]
    Boundary,
}

impl BranchId {
    pub fn label(&self) -> &'static str {
        match self {
            BranchId::Interior => "B1_interior",
            BranchId::Lil => "B2_lil",
            BranchId::Boundary => "B3_boundary",
        }
    }
}

impl std::fmt::Display for BranchId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.label())
    }
}

/// Which branch fires at `(s, v)`, `v > 0`. Ties go to the lower branch.
pub fn branch(s: f64, v: f64) -> BranchId {
    let ratio = s.abs() / v;
    if ratio <= 1.0 / (1.0 + v).sqrt() {
        BranchId::Interior
    } else if ratio <= 1.0 {
        BranchId::Lil
    } else {
        BranchId::Boundary
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub branch: BranchId,
    pub pathwise_bound: f64,
    pub rho: f64,
    pub conditional_bound: Option<f64>,
    /// Generic-form constant used for display alongside the conditional bound.
    pub c_used: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VilleThreshold {
    pub alpha: f64,
    pub rho: f64,
    pub v_alpha: f64,
}

/// Branch-wise conditional bound on the Ville event plus the generic form.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConditionalBound {
    pub branch: BranchId,
    pub value: f64,
    /// `C (1 + (1 + ln^2(1/alpha))/V + ln(1/alpha) + ln ln(c sqrt(1+V)))`.
    pub generic: f64,
    /// `max(4, 7, c_third)`.
    pub c_generic: f64,
    /// The boundary-branch constant, informational only.
    pub c_third: f64,
}

/// Lower bounds on `ln Z_t` implied by the pathwise bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EventualBound {
    pub branch: BranchId,
    pub ln_z_lower: f64,
    /// The cruder boundary-branch bound `V (1 - rho^2)/2 + ln m`, present on that branch.
    pub boundary_linear: Option<f64>,
}

fn check_c(c: f64) -> Result<()> {
    PriorSpec::Robbins { c }.validate()
}

fn check_rho(rho: f64, hi: f64, domain: &'static str) -> Result<()> {
    if rho > 0.0 && rho < hi {
        Ok(())
    } else {
        Err(Error::InvalidRho { rho, domain })
    }
}

fn check_alpha(alpha: f64, allow_one: bool) -> Result<()> {
    let ok = alpha > 0.0 && (alpha < 1.0 || (allow_one && alpha == 1.0));
    if ok {
        Ok(())
    } else {
        Err(Error::InvalidAlpha(alpha))
    }
}

fn check_sv(s: f64, v: f64) -> Result<()> {
    if !s.is_finite() || !v.is_finite() {
        return Err(Error::InvalidState(format!("S = {s}, V = {v}")));
    }
    if !(v > 0.0) {
        return Err(Error::Precondition(format!("V = {v} must be positive")));
    }
    Ok(())
}

/// `(ln ln x, ln ln ln x)`, checked to be finite and positive.
fn iterated_logs(x: f64) -> Result<(f64, f64)> {
    let l2 = x.ln().ln();
    let l3 = l2.ln();
    if !(l3.is_finite() && l3 > 0.0) {
        return Err(Error::Precondition(format!(
            "ln ln ln({x}) = {l3} is not positive; is c >= 6.6e?"
        )));
    }
    Ok((l2, l3))
}

/// `ln m` with `m = rho ln ln c / (ln(c/(1-rho)) (ln ln(c/(1-rho)))^2)`,
/// the boundary-window prior mass term.
pub fn ln_boundary_mass(c: f64, rho: f64) -> f64 {
    let x = c / (1.0 - rho);
    let l1 = x.ln();
    let l2 = l1.ln();
    (rho * c.ln().ln()).ln() - l1.ln() - 2.0 * l2.ln()
}

/// `1/2 + ln(2 / ln ln c)`, the constant shared by the first two branches.
fn interior_const(c: f64) -> f64 {
    0.5 + (2.0 / c.ln().ln()).ln()
}

// ---------------------------------------------------------------- Gaussian

/// Exact regret of the Gaussian mixture:
/// `ln(1 + sigma0^2 V)/2 + S^2 / (2 V (1 + sigma0^2 V))`, 0 when `V = 0`.
pub fn gaussian_regret_exact(s: f64, v: f64, sigma0_sq: f64) -> f64 {
    if v == 0.0 {
        return 0.0;
    }
    let a = sigma0_sq * v;
    0.5 * a.ln_1p() + s * s / (2.0 * v * (1.0 + a))
}

/// Conditional bound for the Gaussian mixture on the Ville event, asserted
/// only for `V > v0`.
pub fn gaussian_conditional_bound(v: f64, v0: f64, sigma0_sq: f64, alpha: f64) -> Result<f64> {
    PriorSpec::Gaussian { sigma0_sq }.validate()?;
    check_alpha(alpha, true)?;
    if !(v0 > 0.0) {
        return Err(Error::Precondition(format!("v0 = {v0} must be positive")));
    }
    if !(v > v0) {
        return Err(Error::BelowThreshold { v, v0 });
    }
    let k = sigma0_sq * v0;
    Ok((0.5 + 1.0 / (2.0 * k)) * (sigma0_sq * v).ln_1p() + (1.0 / alpha).ln() / k)
}

// ---------------------------------------------------------------- Robbins

/// The three-branch pathwise bound on `R_t` for the Robbins prior.
pub fn pathwise_bound(s: f64, v: f64, c: f64, rho: f64) -> Result<BoundReport> {
    check_sv(s, v)?;
    check_c(c)?;
    check_rho(rho, 0.25, RHO_THEOREM)?;
    let b = branch(s, v);
    let value = match b {
        BranchId::Interior | BranchId::Lil => interior_lil_value(s, v, c, b)?,
        BranchId::Boundary => boundary_value(s, v, c, rho),
    };
    Ok(BoundReport {
        branch: b,
        pathwise_bound: value,
        rho,
        conditional_bound: None,
        c_used: None,
    })
}

fn interior_lil_value(s: f64, v: f64, c: f64, b: BranchId) -> Result<f64> {
    let (l2, l3) = iterated_logs(c * (1.0 + v).sqrt())?;
    let mut value = interior_const(c) + l2 + 2.0 * l3;
    if b == BranchId::Lil {
        value += (s.abs() / v.sqrt() * (1.0 + 1.0 / v).sqrt()).ln();
    }
    Ok(value)
}

fn boundary_value(s: f64, v: f64, c: f64, rho: f64) -> f64 {
    let d = s.abs() / v - 1.0 + rho;
    0.5 * v * d * d - ln_boundary_mass(c, rho)
}

/// Pathwise bound plus, when `alpha` is given, the conditional bound and
/// its generic-form constant.
pub fn bound_report(s: f64, v: f64, c: f64, rho: f64, alpha: Option<f64>) -> Result<BoundReport> {
    let mut r = pathwise_bound(s, v, c, rho)?;
    if let Some(a) = alpha {
        let cb = conditional_bound(s, v, a, c, rho)?;
        r.conditional_bound = Some(cb.value);
        r.c_used = Some(cb.c_generic);
    }
    Ok(r)
}

/// Variance level beyond which the boundary branch cannot fire on the
/// Ville event.
pub fn v_alpha(alpha: f64, rho: f64, c: f64) -> Result<VilleThreshold> {
    check_alpha(alpha, false)?;
    check_rho(rho, 0.25, RHO_THEOREM)?;
    check_c(c)?;
    let x = c / (1.0 - rho);
    let (l2, l3) = iterated_logs(x)?;
    let inner = (1.0 / alpha).ln() - (rho * c.ln().ln() / 2.0).ln() + l2 + 2.0 * l3;
    Ok(VilleThreshold {
        alpha,
        rho,
        v_alpha: 2.0 / (1.0 - rho * rho) * inner,
    })
}

/// Conditional bound on the boundary branch in terms of the threshold.
pub fn third_branch_conditional(v: f64, thr: &VilleThreshold, c: f64) -> Result<f64> {
    if !(v > 0.0) {
        return Err(Error::Precondition(format!("V = {v} must be positive")));
    }
    check_c(c)?;
    let (rho, va) = (thr.rho, thr.v_alpha);
    Ok((1.0 + rho).powi(2) * va * va / (8.0 * v) + 0.5 * rho * va * (1.0 + 2.0 * rho) - ln_boundary_mass(c, rho))
}

/// `3/(1-rho)^2 (1 v {ln(rho ln ln c) - ln ln(c/(1-rho)) - 2 ln ln ln(c/(1-rho)) - ln 2})^2`.
pub fn third_branch_constant(c: f64, rho: f64) -> f64 {
    let x = c / (1.0 - rho);
    let l2 = x.ln().ln();
    let inner = (rho * c.ln().ln()).ln() - l2 - 2.0 * l2.ln() - std::f64::consts::LN_2;
    3.0 / (1.0 - rho).powi(2) * inner.max(1.0).powi(2)
}

/// Explicit branch-wise conditional bound on the Ville event.
pub fn conditional_bound(s: f64, v: f64, alpha: f64, c: f64, rho: f64) -> Result<ConditionalBound> {
    check_sv(s, v)?;
    check_alpha(alpha, false)?;
    check_c(c)?;
    check_rho(rho, 0.25, RHO_THEOREM)?;
    let b = branch(s, v);
    let ln_inv_alpha = (1.0 / alpha).ln();
    let (l2, l3) = iterated_logs(c * (1.0 + v).sqrt())?;
    let value = match b {
        BranchId::Interior => interior_lil_value(s, v, c, b)?,
        BranchId::Lil => ln_inv_alpha + 2.0 * interior_const(c) + 2.0 * l2 + 0.5 + 4.0 * l3,
        BranchId::Boundary => third_branch_conditional(v, &v_alpha(alpha, rho, c)?, c)?,
    };
    let c_third = third_branch_constant(c, rho);
    let c_generic = 4f64.max(7.0).max(c_third);
    let generic = c_generic * (1.0 + (1.0 + ln_inv_alpha * ln_inv_alpha) / v + ln_inv_alpha + l2);
    Ok(ConditionalBound {
        branch: b,
        value,
        generic,
        c_generic,
        c_third,
    })
}

// ---------------------------------------------------------------- lemmas

/// `V r^2 / 2 - ln(mass)`.
pub fn lemma_interior_bound(v: f64, r: f64, mass: f64) -> Result<f64> {
    if !(v > 0.0) {
        return Err(Error::Precondition(format!("V = {v} must be positive")));
    }
    if !(mass > 0.0 && mass <= 1.0) {
        return Err(Error::Precondition(format!("mass = {mass} must lie in (0, 1]")));
    }
    if !(r > 0.0 && r < 1.0) {
        return Err(Error::Precondition(format!("r = {r} must lie in (0, 1)")));
    }
    Ok(0.5 * v * r * r - mass.ln())
}

/// Lower bound on the prior mass of the window `{|eta - eta_star| <= r}`.
pub fn lemma_window_mass(eta_star: f64, r: f64, c: f64) -> Result<f64> {
    check_c(c)?;
    if !(eta_star.abs() < 1.0) {
        return Err(Error::WrongRegime(format!("|eta*| = {} must be < 1", eta_star.abs())));
    }
    if !(r > 0.0 && r < 1.0) {
        return Err(Error::Precondition(format!("r = {r} must lie in (0, 1)")));
    }
    let l1 = (c / r).ln();
    let l2 = l1.ln();
    let base = c.ln().ln() / (2.0 * l1 * l2 * l2);
    let y = eta_star.abs();
    Ok(if y <= r { base } else { base * r / y })
}

/// Boundary-branch lemma, `rho` in `(0, 1)`.
pub fn lemma_boundary_bound(s: f64, v: f64, rho: f64, c: f64) -> Result<f64> {
    check_sv(s, v)?;
    check_c(c)?;
    check_rho(rho, 1.0, RHO_LEMMA)?;
    if !(s.abs() / v > 1.0) {
        return Err(Error::WrongRegime(format!("|S|/V = {} must exceed 1", s.abs() / v)));
    }
    Ok(boundary_value(s, v, c, rho))
}

/// Lower bounds on `ln Z_t` on the branch that fires at `(s, v)`.
pub fn eventual_bounds(s: f64, v: f64, c: f64, rho: f64) -> Result<EventualBound> {
    let rep = pathwise_bound(s, v, c, rho)?;
    let l_star = hindsight_optimum(s, v).l_star;
    let (ln_z_lower, boundary_linear) = match rep.branch {
        BranchId::Interior => (l_star - rep.pathwise_bound, None),
        BranchId::Lil => {
            let (l2, l3) = iterated_logs(c * (1.0 + v).sqrt())?;
            let d = s.abs() / v.sqrt() - (1.0 + 1.0 / v).sqrt();
            let lb = 0.5 * d * d - (2.0 / c.ln().ln()).ln() - 1.0 / (2.0 * v) - l2 - 2.0 * l3;
            (lb, None)
        }
        BranchId::Boundary => {
            let m = ln_boundary_mass(c, rho);
            let d = s.abs() / v - 1.0 + rho;
            (l_star - 0.5 * v * d * d + m, Some(0.5 * v * (1.0 - rho * rho) + m))
        }
    };
    Ok(EventualBound {
        branch: rep.branch,
        ln_z_lower,
        boundary_linear,
    })
}

// ---------------------------------------------------------------- CS

/// `sqrt(2 V (B + ln(1/alpha))) / t`.
pub fn cs_radius(t: u64, v: f64, b: f64, alpha: f64) -> Result<f64> {
    check_alpha(alpha, true)?;
    if t == 0 {
        return Err(Error::Precondition("t must be at least 1".into()));
    }
    if !(v > 0.0) {
        return Err(Error::Precondition(format!("V = {v} must be positive")));
    }
    let radicand = b + (1.0 / alpha).ln();
    if radicand < 0.0 {
        return Err(Error::NegativeRadicand(radicand));
    }
    Ok((2.0 * v * radicand).sqrt() / t as f64)
}

/// Does the confidence sequence built from the pathwise bound cover the
/// centered sum `s` at variance `v`? Equivalent to
/// `|s| / t <= cs_radius(t, v, B(s, v), alpha)`.
pub fn cs_covers(s: f64, v: f64, c: f64, rho: f64, alpha: f64) -> Result<bool> {
    if v == 0.0 {
        return Ok(s == 0.0);
    }
    let b = pathwise_bound(s, v, c, rho)?.pathwise_bound;
    let radicand = b + (1.0 / alpha).ln();
    Ok(radicand >= 0.0 && s * s <= 2.0 * v * radicand)
}

/// Largest `|s|` the confidence sequence accepts at variance `v`, found by
/// bracketing and bisection on `s^2/(2V) - B(s) - ln(1/alpha)`.
pub fn cs_half_width_sum(v: f64, c: f64, rho: f64, alpha: f64) -> Result<f64> {
    check_alpha(alpha, true)?;
    if !(v > 0.0) {
        return Err(Error::Precondition(format!("V = {v} must be positive")));
    }
    let g = |s: f64| -> Result<f64> {
        let b = pathwise_bound(s, v, c, rho)?.pathwise_bound;
        Ok(s * s / (2.0 * v) - b - (1.0 / alpha).ln())
    };
    let mut hi = v.sqrt().max(1.0);
    while g(hi)? <= 0.0 {
        hi *= 2.0;
        if !hi.is_finite() {
            return Err(Error::Precondition("confidence sequence is unbounded".into()));
        }
    }
    if g(0.0)? > 0.0 {
        return Ok(0.0);
    }
    let mut lo = 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if g(mid)? <= 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(lo)
}

// ---------------------------------------------------------------- LIL

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LilStatistics {
    pub slln_stat: f64,
    /// Absent when `V <= e`.
    pub lil_stat: Option<f64>,
}

/// `(|S|/V, |S| / sqrt(2 V ln ln V))` with `0/0 = 0`.
pub fn lil_statistics(s: f64, v: f64) -> LilStatistics {
    let slln_stat = if v > 0.0 { s.abs() / v } else { 0.0 };
    let lil_stat = if v > std::f64::consts::E {
        Some(s.abs() / (2.0 * v * v.ln().ln()).sqrt())
    } else {
        None
    };
    LilStatistics { slln_stat, lil_stat }
}

/// Slack used to compare a computed regret against a bound: the base
/// tolerance, the quadrature error and a few ulps of the magnitudes involved.
pub fn comparison_slack(tolerance: f64, err_bound: f64, magnitudes: &[f64]) -> f64 {
    let scale: f64 = magnitudes.iter().map(|m| m.abs()).sum();
    tolerance + err_bound + 4.0 * f64::EPSILON * scale
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::path::ROBBINS_C_MIN as C;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * b.abs().max(1.0)
    }

    #[test]
    fn branch_ties() {
        assert_eq!(branch(0.0, 1.0), BranchId::Interior);
        assert_eq!(branch(4.0, 4.0), BranchId::Lil);
        assert_eq!(branch(10.0, 4.0), BranchId::Boundary);
        // |S|/V = 1/sqrt(1+V) exactly when V = 3, S = 3/2.
        assert_eq!(branch(1.5, 3.0), BranchId::Interior);
    }

    #[test]
    fn pathwise_examples() {
        let r = pathwise_bound(0.0, 1.0, C, 0.1).unwrap();
        assert_eq!(r.branch, BranchId::Interior);
        let x = C * 2f64.sqrt();
        let expected = 0.5 + (2.0 / C.ln().ln()).ln() + x.ln().ln() + 2.0 * x.ln().ln().ln();
        assert!(close(r.pathwise_bound, expected, 1e-14));

        let r = pathwise_bound(4.0, 4.0, C, 0.1).unwrap();
        assert_eq!(r.branch, BranchId::Lil);
        let x = C * 5f64.sqrt();
        let expected = 0.5 + (2.0 / C.ln().ln()).ln() + (2.0 * 1.25f64.sqrt()).ln() + x.ln().ln() + 2.0 * x.ln().ln().ln();
        assert!(close(r.pathwise_bound, expected, 1e-14));

        let r = pathwise_bound(10.0, 4.0, C, 0.1).unwrap();
        assert_eq!(r.branch, BranchId::Boundary);
        assert!(close(r.pathwise_bound + ln_boundary_mass(C, 0.1), 5.12, 1e-13));
    }

    #[test]
    fn rho_domains() {
        assert!(matches!(pathwise_bound(1.0, 1.0, C, 0.25), Err(Error::InvalidRho { .. })));
        assert!(matches!(pathwise_bound(1.0, 1.0, C, 0.0), Err(Error::InvalidRho { .. })));
        assert!(lemma_boundary_bound(10.0, 4.0, 0.9, C).is_ok());
        assert!(lemma_boundary_bound(10.0, 4.0, 1.0, C).is_err());
        assert!(matches!(lemma_boundary_bound(3.0, 4.0, 0.5, C), Err(Error::WrongRegime(_))));
        assert!(pathwise_bound(1.0, 1.0, 10.0, 0.1).is_err());
        assert!(pathwise_bound(1.0, 0.0, C, 0.1).is_err());
    }

    #[test]
    fn gaussian_examples() {
        assert_eq!(gaussian_regret_exact(0.0, 0.0, 1.0), 0.0);
        assert!(close(gaussian_regret_exact(3.0, 4.0, 1.0), 0.5 * 5f64.ln() + 9.0 / 40.0, 1e-15));
        for t in [1.0, 10.0, 1e3] {
            for alpha in [0.05, 0.5, 1.0] {
                let b = gaussian_conditional_bound(t + 1.0, 1.0, 1.0, alpha).unwrap();
                assert!(close(b, (2.0 + t).ln() + (1.0 / alpha).ln(), 1e-14));
            }
        }
        let b = gaussian_conditional_bound(10.0, 2.0, 1.0, 0.05).unwrap();
        assert!(close(b, 0.75 * 11f64.ln() + 20f64.ln() / 2.0, 1e-14));
        assert!(matches!(gaussian_conditional_bound(1.0, 1.0, 1.0, 0.1), Err(Error::BelowThreshold { .. })));
    }

    #[test]
    fn threshold_and_third_branch() {
        let thr = v_alpha(0.05, 0.1, C).unwrap();
        let x = C / 0.9;
        let expected = 2.0 / 0.99 * (20f64.ln() - (0.1 * C.ln().ln() / 2.0).ln() + x.ln().ln() + 2.0 * x.ln().ln().ln());
        assert!(close(thr.v_alpha, expected, 1e-14));
        assert!(v_alpha(0.5, 0.1, C).unwrap().v_alpha < thr.v_alpha);

        let at = third_branch_conditional(thr.v_alpha, &thr, C).unwrap();
        let first = 1.21 * thr.v_alpha / 8.0;
        let rest = 0.05 * thr.v_alpha * 1.2 - ln_boundary_mass(C, 0.1);
        assert!(close(at, first + rest, 1e-13));
        let far = third_branch_conditional(1e12, &thr, C).unwrap();
        assert!(close(far, rest, 1e-9));
    }

    #[test]
    fn conditional_examples() {
        let cb = conditional_bound(4.0, 4.0, 0.05, C, 0.1).unwrap();
        assert_eq!(cb.branch, BranchId::Lil);
        let x = C * 5f64.sqrt();
        let expected = 20f64.ln() + 1.0 + 2.0 * (2.0 / C.ln().ln()).ln() + 2.0 * x.ln().ln() + 0.5 + 4.0 * x.ln().ln().ln();
        assert!(close(cb.value, expected, 1e-14));

        let cb = conditional_bound(0.0, 100.0, 0.05, C, 0.1).unwrap();
        let pw = pathwise_bound(0.0, 100.0, C, 0.1).unwrap();
        assert_eq!(cb.value, pw.pathwise_bound);
        assert!(cb.c_generic >= 7.0);
    }

    #[test]
    fn lemma_examples() {
        let v: f64 = 4.0;
        let r = 1.0 / (1.0 + v).sqrt();
        assert!(lemma_interior_bound(v, r, 1.0).unwrap() <= 0.5);
        assert!(close(lemma_interior_bound(4.0, 0.2, 0.1).unwrap(), 0.08 + 10f64.ln(), 1e-15));

        let w0 = lemma_window_mass(0.0, 0.3, C).unwrap();
        let l1 = (C / 0.3).ln();
        assert!(close(w0, C.ln().ln() / (2.0 * l1 * l1.ln().powi(2)), 1e-15));
        let w = lemma_window_mass(0.5, 0.1, C).unwrap();
        let mass = crate::prior::RobbinsPrior::default().interval_mass(0.4, 0.6).unwrap();
        assert!(w <= mass);
        let near = lemma_window_mass(0.0, 1.0 - 1e-12, C).unwrap();
        assert!(close(near, 1.0 / (2.0 * C.ln() * C.ln().ln()), 1e-9));
        assert!(lemma_window_mass(1.0, 0.5, C).is_err());
    }

    #[test]
    fn lemmas_reassemble_the_pathwise_bound() {
        for &(s, v) in &[(0.0, 1.0), (0.1, 5.0), (4.0, 4.0), (30.0, 100.0), (-2.0, 2.5)] {
            let pw = pathwise_bound(s, v, C, 0.1).unwrap();
            if pw.branch == BranchId::Boundary {
                continue;
            }
            let r = 1.0 / (1.0 + v).sqrt();
            let eta = s / v;
            // The lemma is stated for |eta*| < 1; the tie |eta*| = 1 uses the same formula.
            let mass = if eta.abs() < 1.0 {
                lemma_window_mass(eta, r, C).unwrap()
            } else {
                let l1 = (C / r).ln();
                r * C.ln().ln() / (2.0 * eta.abs() * l1 * l1.ln().powi(2))
            };
            let assembled = 0.5 - mass.ln();
            assert!(close(assembled, pw.pathwise_bound, 1e-13), "{s} {v}: {assembled} vs {}", pw.pathwise_bound);
        }
    }

    #[test]
    fn boundary_lemma_matches_branch() {
        let a = lemma_boundary_bound(10.0, 4.0, 0.1, C).unwrap();
        let b = pathwise_bound(10.0, 4.0, C, 0.1).unwrap().pathwise_bound;
        assert_eq!(a, b);
    }

    #[test]
    fn eventual_examples() {
        let e = eventual_bounds(0.0, 1.0, C, 0.1).unwrap();
        let pw = pathwise_bound(0.0, 1.0, C, 0.1).unwrap();
        assert_eq!(e.ln_z_lower, -pw.pathwise_bound);
        let e = eventual_bounds(10.0, 4.0, C, 0.1).unwrap();
        assert!(e.boundary_linear.unwrap() <= e.ln_z_lower + 1e-12);
    }

    #[test]
    fn cs_examples() {
        for t in [1u64, 10, 1000] {
            let r = cs_radius(t, t as f64, 0.0, (-1f64).exp()).unwrap();
            assert!(close(r, (2.0 / t as f64).sqrt(), 1e-14));
        }
        assert_eq!(cs_radius(5, 5.0, 0.0, 1.0).unwrap(), 0.0);
        assert!(matches!(cs_radius(5, 5.0, -1.0, 1.0), Err(Error::NegativeRadicand(_))));

        let w = cs_half_width_sum(100.0, C, 0.1, 0.05).unwrap();
        assert!(cs_covers(w * 0.999, 100.0, C, 0.1, 0.05).unwrap());
        assert!(!cs_covers(w * 1.001, 100.0, C, 0.1, 0.05).unwrap());
    }

    #[test]
    fn lil_examples() {
        let l = lil_statistics(0.0, 0.0);
        assert_eq!((l.slln_stat, l.lil_stat), (0.0, None));
        assert_eq!(lil_statistics(1.0, 2.0).lil_stat, None);
        let l = lil_statistics(0.0, 100.0);
        assert_eq!(l.lil_stat, Some(0.0));
    }
}
