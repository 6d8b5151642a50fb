use super::{check_state, LnWealth, QuadratureConfig, MAX_NODES};
use crate::error::Result;
use crate::path::log_payoff;
use crate::prior::RobbinsPrior;
use crate::quad::{gk15_composite, integrate_log, log_add_exp, rel_to_ln_err};

/// Terms this far below the running maximum contribute less than `e^-60`
/// relative and are skipped by the log-sum-exp loops.
const LSE_CUTOFF: f64 = 60.0;

/// Largest gap between the analytic maximum of `f` and the best node that a
/// fixed grid may show before its estimate is declared unresolved.
const RESOLUTION_GAP: f64 = 1.0;

/// Maximizer of `f(y) = a y - y^2 V / 2` over `[0, 1]`.
#[inline]
fn side_mode(a: f64, v: f64) -> f64 {
    if v > 0.0 {
        (a / v).clamp(0.0, 1.0)
    } else if a > 0.0 {
        1.0
    } else {
        0.0
    }
}

#[inline]
fn side_f(a: f64, v: f64, y: f64) -> f64 {
    log_payoff(y, a, v)
}

/// Bracket of `f` over the truncated piece `[0, y_t]`, relative to `reference`:
/// returns `(midpoint, half-width)` of `u_min * exp(f - reference)`.
fn truncation_piece(a: f64, v: f64, y_t: f64, u_min: f64, reference: f64) -> (f64, f64) {
    let y_m = side_mode(a, v).min(y_t);
    let hi = side_f(a, v, y_m);
    let lo = side_f(a, v, y_t).min(0.0);
    let (eh, el) = ((hi - reference).exp(), (lo - reference).exp());
    (u_min * 0.5 * (eh + el), u_min * 0.5 * (eh - el))
}

/// `ln` of the one-sided integral `\int_0^U exp(f(eta(u))) du` and its
/// relative error.
fn side_integral(a: f64, v: f64, prior: &RobbinsPrior, quad: &QuadratureConfig) -> (f64, f64) {
    let u_max = prior.u_max();
    let y_m = side_mode(a, v);
    let reference = side_f(a, v, y_m);
    let slope = a - v * y_m;
    let scale = 1.0 / v.sqrt().max(slope.abs());
    let y_t = prior.eta_of_u(quad.u_min);

    let mut breaks: Vec<f64> = (0..=8).map(|k| quad.u_min + (u_max - quad.u_min) * k as f64 / 8.0).collect();
    for k in [0.0, 1.0, 4.0, 16.0, 64.0, 256.0] {
        for y in [y_m - k * scale, y_m + k * scale] {
            if y > y_t && y < 1.0 {
                let u = prior.antiderivative(y);
                if u > quad.u_min && u < u_max {
                    breaks.push(u);
                }
            }
        }
    }
    breaks.sort_by(f64::total_cmp);
    breaks.dedup();

    let ln_g = |u: f64| side_f(a, v, prior.eta_of_u(u));
    let r = integrate_log(ln_g, &breaks, reference, quad.target_rel_err / 4.0, MAX_NODES);
    let body = (r.ln_value - reference).exp();
    let (t_mid, t_err) = truncation_piece(a, v, y_t, quad.u_min, reference);
    let total = body + t_mid;
    let err = r.rel_err * body + t_err;
    (reference + total.ln(), err / total)
}

/// `ln Z_t` for the Robbins prior by adaptive Gauss-Kronrod quadrature in
/// the uniformizing variable, one integral per sign of `eta`.
///
/// Each side is split at breakpoints placed around the maximizer of the
/// integrand on the scale of the posterior width (or of the boundary layer
/// when the maximizer sits at `|eta| = 1`), then refined adaptively. The
/// error bound is the Kronrod-Gauss estimate plus an exact bracket of the
/// truncated piece `u < u_min`. Returns exactly 0 when `V = 0`.
pub fn ln_wealth_robbins(s: f64, v: f64, prior: &RobbinsPrior, quad: &QuadratureConfig) -> Result<LnWealth> {
    check_state(s, v)?;
    quad.validate(prior)?;
    if v == 0.0 {
        return Ok(LnWealth::exact(0.0));
    }
    let (lp, rp) = side_integral(s, v, prior, quad);
    let (ln_n, rn) = side_integral(-s, v, prior, quad);
    let ln_sum = log_add_exp(lp, ln_n);
    let wp = (lp - ln_sum).exp();
    let wn = (ln_n - ln_sum).exp();
    let rel = rp * wp + rn * wn;
    let err_bound = rel_to_ln_err(rel);
    let value = ln_sum - prior.z0().ln();
    Ok(LnWealth {
        value,
        err_bound,
        converged: err_bound <= quad.target_at(value),
    })
}

/// Fixed composite Gauss-Kronrod grid in the uniformizing variable, both
/// signs of `eta`, with log-weights already divided by `Z0`.
///
/// The grid is shared by the batch evaluator and the incremental engine so
/// the two agree to rounding. The embedded Gauss weights give a per-state
/// error estimate.
#[derive(Debug, Clone)]
pub struct RobbinsGrid {
    prior: RobbinsPrior,
    quad: QuadratureConfig,
    eta: Vec<f64>,
    ln_w: Vec<f64>,
    /// Gauss weight over Kronrod weight at each node.
    gauss_ratio: Vec<f64>,
    y_trunc: f64,
}

impl RobbinsGrid {
    pub fn new(prior: RobbinsPrior, quad: QuadratureConfig) -> Result<Self> {
        quad.validate(&prior)?;
        let rule = gk15_composite(quad.u_min, prior.u_max(), quad.panels());
        let ln_z0 = prior.z0().ln();
        let y_trunc = prior.eta_of_u(quad.u_min);
        let n = 2 * (rule.len() + 1);
        let mut eta = Vec::with_capacity(n);
        let mut ln_w = Vec::with_capacity(n);
        let mut gauss_ratio = Vec::with_capacity(n);
        for sign in [1.0, -1.0] {
            // The truncated piece [0, u_min] as one node at its upper end
            // with its exact weight; its residual is bracketed separately.
            eta.push(sign * y_trunc);
            ln_w.push(quad.u_min.ln() - ln_z0);
            gauss_ratio.push(1.0);
            for node in &rule {
                eta.push(sign * prior.eta_of_u(node.x));
                ln_w.push(node.wk.ln() - ln_z0);
                gauss_ratio.push(node.wg / node.wk);
            }
        }
        Ok(RobbinsGrid {
            prior,
            quad,
            eta,
            ln_w,
            gauss_ratio,
            y_trunc,
        })
    }

    pub fn prior(&self) -> &RobbinsPrior {
        &self.prior
    }

    pub fn quad(&self) -> &QuadratureConfig {
        &self.quad
    }

    pub fn len(&self) -> usize {
        self.eta.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eta.is_empty()
    }

    /// Signed node abscissae in `eta`.
    pub fn nodes(&self) -> &[f64] {
        &self.eta
    }

    /// `ln(w_j / Z0)`: the prior's log-weight at each node.
    pub fn ln_weights(&self) -> &[f64] {
        &self.ln_w
    }

    /// Batch evaluation of `ln Z_t` on the grid.
    pub fn ln_wealth(&self, s: f64, v: f64) -> Result<LnWealth> {
        check_state(s, v)?;
        if v == 0.0 {
            return Ok(LnWealth::exact(0.0));
        }
        let terms: Vec<f64> = self
            .eta
            .iter()
            .zip(&self.ln_w)
            .map(|(&e, &w)| w + log_payoff(e, s, v))
            .collect();
        Ok(self.summarize(&terms, s, v))
    }

    /// Log-sum-exp of per-node log-terms `ln w_j + f(eta_j)` with the
    /// Kronrod-Gauss error estimate, the truncation bracket and the
    /// resolution guard for state `(s, v)`.
    pub(crate) fn summarize(&self, terms: &[f64], s: f64, v: f64) -> LnWealth {
        let m = terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let mut k = 0.0;
        let mut g = 0.0;
        let mut best_f = f64::NEG_INFINITY;
        for ((&l, &ratio), (&e, &w)) in terms
            .iter()
            .zip(&self.gauss_ratio)
            .zip(self.eta.iter().zip(&self.ln_w))
        {
            let d = l - m;
            if d > -LSE_CUTOFF {
                let x = d.exp();
                k += x;
                g += ratio * x;
            }
            // Only the payoff part matters for the resolution check.
            let f = l - w;
            if f > best_f && e != 0.0 {
                best_f = f;
            }
        }
        let value = m + k.ln();
        let f_max = side_f(s, v, side_mode(s, v)).max(side_f(-s, v, side_mode(-s, v)));

        // Exact bracket of the part of the truncated piece the atom misses.
        let ln_z0 = self.prior.z0().ln();
        let mut trunc = 0.0;
        for a in [s, -s] {
            let (mid, half) = truncation_piece(a, v, self.y_trunc, self.quad.u_min, value + ln_z0);
            let atom = (side_f(a, v, self.y_trunc) - value - ln_z0).exp() * self.quad.u_min;
            trunc += (mid - atom).abs() + half;
        }
        let rel = (k - g).abs() / k + trunc;
        let mut err_bound = rel_to_ln_err(rel);
        if f_max - best_f > RESOLUTION_GAP {
            err_bound = f64::INFINITY;
        }
        LnWealth {
            value,
            err_bound,
            converged: err_bound <= self.quad.target_at(value),
        }
    }
}
