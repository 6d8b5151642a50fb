use super::LnWealth;
use crate::quad::{integrate_log, rel_to_ln_err};

/// Closed-form log-wealth of the `N(0, sigma0^2)` mixture:
/// `sigma0^2 S^2 / (2 (1 + sigma0^2 V)) - ln(1 + sigma0^2 V) / 2`, and 0 when `V = 0`.
pub fn ln_wealth_gaussian(s: f64, v: f64, sigma0_sq: f64) -> f64 {
    if v == 0.0 {
        return 0.0;
    }
    let a = sigma0_sq * v;
    sigma0_sq * s * s / (2.0 * (1.0 + a)) - 0.5 * a.ln_1p()
}

/// The same quantity by adaptive quadrature of the mixture integral, as an
/// independent route to the closed form.
pub fn ln_wealth_gaussian_quadrature(s: f64, v: f64, sigma0_sq: f64, tol_rel: f64) -> LnWealth {
    if v == 0.0 {
        return LnWealth::exact(0.0);
    }
    let precision = v + 1.0 / sigma0_sq;
    let mode = s / precision;
    let sd = precision.sqrt().recip();
    let ln_norm = -0.5 * (2.0 * std::f64::consts::PI * sigma0_sq).ln();
    let ln_g = move |eta: f64| eta * s - 0.5 * eta * eta * precision + ln_norm;
    let reference = ln_g(mode);
    // 50 standard deviations: the neglected tails are below exp(-1250).
    let mut breaks: Vec<f64> = [-50.0, -16.0, -4.0, -1.0, 0.0, 1.0, 4.0, 16.0, 50.0]
        .iter()
        .map(|k| mode + k * sd)
        .collect();
    breaks.dedup();
    let r = integrate_log(ln_g, &breaks, reference, tol_rel, super::MAX_NODES);
    let err_bound = rel_to_ln_err(r.rel_err);
    LnWealth {
        value: r.ln_value,
        err_bound,
        converged: r.rel_err <= tol_rel,
    }
}
