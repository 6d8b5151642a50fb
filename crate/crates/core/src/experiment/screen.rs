use crate::error::Result;
use crate::path::log_payoff;
use crate::prior::RobbinsPrior;
use crate::wealth::{ln_wealth_robbins, LnWealth, QuadratureConfig, RobbinsBracket};

/// What is known about `ln Z_t` at one state after screening.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Knowledge {
    /// Certified lower bound.
    pub lo: f64,
    /// Certified upper bound.
    pub hi: f64,
    /// Present when screening could not decide and quadrature ran.
    pub exact: Option<LnWealth>,
}

impl Knowledge {
    /// Largest value the comparison convention lets `ln Z_t` count as: the
    /// certified floor, or `value + err_bound` once quadrature has run.
    pub fn credited(&self) -> f64 {
        match self.exact {
            Some(e) => self.lo.max(e.value + e.err_bound),
            None => self.lo,
        }
    }

    /// Quadrature ran but missed its error target.
    pub fn unverified(&self) -> bool {
        self.exact.is_some_and(|e| !e.converged)
    }

    /// Whether `ln Z_t > threshold` is decided: `Some(true)` above,
    /// `Some(false)` at or below, `None` when the bracket straddles it.
    pub fn side_of(&self, threshold: f64) -> Option<bool> {
        if self.hi <= threshold {
            Some(false)
        } else if self.lo > threshold {
            Some(true)
        } else {
            match self.exact {
                Some(e) if e.converged && e.value - e.err_bound > threshold => Some(true),
                Some(e) if e.converged && e.value + e.err_bound <= threshold => Some(false),
                _ => None,
            }
        }
    }
}

/// Robbins log-wealth evaluator for long simulations: a coarse and a fine
/// certified bracket, then adaptive quadrature only when neither decides.
#[derive(Debug, Clone)]
pub struct Screen {
    prior: RobbinsPrior,
    coarse: RobbinsBracket,
    fine: RobbinsBracket,
    quad: QuadratureConfig,
}

impl Screen {
    pub fn new(c: f64, coarse_cells: usize, fine_cells: usize, quad: QuadratureConfig) -> Result<Self> {
        let prior = RobbinsPrior::new(c)?;
        quad.validate(&prior)?;
        Ok(Screen {
            coarse: RobbinsBracket::new(&prior, coarse_cells),
            fine: RobbinsBracket::new(&prior, fine_cells),
            prior,
            quad,
        })
    }

    pub fn prior(&self) -> &RobbinsPrior {
        &self.prior
    }

    pub fn exact(&self, s: f64, v: f64) -> Result<LnWealth> {
        ln_wealth_robbins(s, v, &self.prior, &self.quad)
    }

    /// Resolve `ln Z_t` at `(s, v)` until it is certified `>= need_lo` and
    /// on a definite side of `decide` (when given), escalating from the
    /// free upper bound `max f` through both brackets to quadrature.
    pub fn resolve(&self, s: f64, v: f64, need_lo: f64, decide: Option<f64>) -> Result<Knowledge> {
        if v == 0.0 {
            return Ok(Knowledge {
                lo: 0.0,
                hi: 0.0,
                exact: Some(LnWealth::exact(0.0)),
            });
        }
        let f_max = log_payoff((s.abs() / v).min(1.0), s.abs(), v);
        let done = |k: &Knowledge| k.lo >= need_lo && decide.is_none_or(|d| k.side_of(d).is_some());
        // The mixture never exceeds the best bet it mixes over.
        let mut k = Knowledge {
            lo: f64::NEG_INFINITY,
            hi: f_max,
            exact: None,
        };
        if done(&k) {
            return Ok(k);
        }
        for bracket in [&self.coarse, &self.fine] {
            let b = bracket.bracket(s, v)?;
            k.lo = k.lo.max(b.lo);
            k.hi = k.hi.min(b.hi);
            if done(&k) {
                return Ok(k);
            }
        }
        k.exact = Some(self.exact(s, v)?);
        Ok(k)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::path::ROBBINS_C_MIN;

    #[test]
    fn escalates_only_when_needed() {
        let sc = Screen::new(ROBBINS_C_MIN, 32, 512, QuadratureConfig::default()).unwrap();
        // Nothing required: the free bound suffices.
        let k = sc.resolve(1.0, 4.0, f64::NEG_INFINITY, Some(3.0)).unwrap();
        assert!(k.exact.is_none() && k.lo == f64::NEG_INFINITY);
        // Impossible floor: quadrature runs and the floor is not credited.
        let k = sc.resolve(1.0, 4.0, 10.0, None).unwrap();
        let e = k.exact.unwrap();
        assert!(k.credited() < 10.0 && k.lo <= e.value && e.value <= k.hi);
        assert_eq!(k.side_of(e.value + 1.0), Some(false));
    }

    #[test]
    fn zero_variance_is_exact() {
        let sc = Screen::new(ROBBINS_C_MIN, 8, 8, QuadratureConfig::default()).unwrap();
        let k = sc.resolve(0.0, 0.0, 0.0, Some(0.0)).unwrap();
        assert_eq!((k.lo, k.hi, k.credited()), (0.0, 0.0, 0.0));
    }
}
