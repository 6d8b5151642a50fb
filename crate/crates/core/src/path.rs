//! Shared domain types: the running path summary `(t, S_t, V_t)`, the
//! best-in-hindsight bet, prior specifications and per-step wealth records.
//!
//! Conventions used everywhere else in the crate live here:
//!
//! * `S_0 = V_0 = 0`, and `S_t = 0` whenever `V_t = 0`;
//! * `0/0 = 0`, so the hindsight optimum of a zero-variance state is `(0, 0)`;
//! * a zero-variance state has `Z_t = 1` and `R_t = 0`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Absolute slack used by every bound comparison unless overridden.
pub const DEFAULT_TOLERANCE: f64 = 1e-9;

/// Smallest admissible Robbins constant, `6.6 e`.
pub const ROBBINS_C_MIN: f64 = 6.6 * std::f64::consts::E;

/// Running state of a data path.
///
/// `history`, when retained, holds the `(dS, dV)` increment of every step
/// (index `i` is step `i + 1`). Summary mode keeps only `(t, S, V)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathState {
    t: u64,
    s: f64,
    v: f64,
    history: Option<Vec<(f64, f64)>>,
}

impl Default for PathState {
    fn default() -> Self {
        Self::new()
    }
}

impl PathState {
    /// Empty path in summary mode.
    pub fn new() -> Self {
        PathState {
            t: 0,
            s: 0.0,
            v: 0.0,
            history: None,
        }
    }

    /// Empty path that records every increment.
    pub fn with_history() -> Self {
        PathState {
            history: Some(Vec::new()),
            ..Self::new()
        }
    }

    /// Build a summary-mode state directly, checking the invariants.
    pub fn from_summary(t: u64, s: f64, v: f64) -> Result<Self> {
        if !s.is_finite() || !v.is_finite() {
            return Err(Error::InvalidState(format!("non-finite S = {s}, V = {v}")));
        }
        if v < 0.0 {
            return Err(Error::InvalidState(format!("negative V = {v}")));
        }
        if v == 0.0 && s != 0.0 {
            return Err(Error::BrokenZeroConvention(s));
        }
        Ok(PathState {
            t,
            s,
            v,
            history: None,
        })
    }

    pub fn t(&self) -> u64 {
        self.t
    }

    pub fn s(&self) -> f64 {
        self.s
    }

    pub fn v(&self) -> f64 {
        self.v
    }

    pub fn history(&self) -> Option<&[(f64, f64)]> {
        self.history.as_deref()
    }

    /// `V_t = 0`: the wealth is pinned to one and the regret to zero.
    pub fn is_degenerate(&self) -> bool {
        self.v == 0.0
    }

    /// Value-semantics step: returns the advanced state, `self` is untouched.
    pub fn append_increment(&self, ds: f64, dv: f64) -> Result<PathState> {
        let mut next = self.clone();
        next.push(ds, dv)?;
        Ok(next)
    }

    /// In-place step with the same validation as [`append_increment`].
    /// On error the state is left unchanged.
    ///
    /// [`append_increment`]: PathState::append_increment
    pub fn push(&mut self, ds: f64, dv: f64) -> Result<()> {
        let (s, v) = validate_increment(self.s, self.v, ds, dv)?;
        self.s = s;
        self.v = v;
        self.t += 1;
        if let Some(h) = self.history.as_mut() {
            h.push((ds, dv));
        }
        Ok(())
    }

    pub fn hindsight_optimum(&self) -> HindsightOptimum {
        hindsight_optimum(self.s, self.v)
    }
}

/// Check one increment against the running `(S, V)` and return the new pair.
pub fn validate_increment(s: f64, v: f64, ds: f64, dv: f64) -> Result<(f64, f64)> {
    if !ds.is_finite() || !dv.is_finite() {
        return Err(Error::NonFiniteIncrement { ds, dv });
    }
    if dv < 0.0 {
        return Err(Error::NegativeVarianceIncrement(dv));
    }
    let s_next = s + ds;
    let v_next = v + dv;
    if !s_next.is_finite() || !v_next.is_finite() {
        return Err(Error::NonFiniteIncrement { ds, dv });
    }
    if v_next == 0.0 && s_next != 0.0 {
        return Err(Error::BrokenZeroConvention(s_next));
    }
    Ok((s_next, v_next))
}

/// Maximizer and maximum of `f(eta) = eta S - eta^2 V / 2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HindsightOptimum {
    pub eta_star: f64,
    pub l_star: f64,
}

pub fn hindsight_optimum(s: f64, v: f64) -> HindsightOptimum {
    if v > 0.0 {
        HindsightOptimum {
            eta_star: s / v,
            l_star: s * s / (2.0 * v),
        }
    } else {
        HindsightOptimum {
            eta_star: 0.0,
            l_star: 0.0,
        }
    }
}

/// `f_t(eta) = eta S - eta^2 V / 2`.
#[inline]
pub fn log_payoff(eta: f64, s: f64, v: f64) -> f64 {
    eta * (s - 0.5 * eta * v)
}

/// Mixing distribution over bets.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PriorSpec {
    Robbins { c: f64 },
    Gaussian { sigma0_sq: f64 },
}

impl Default for PriorSpec {
    fn default() -> Self {
        PriorSpec::Robbins { c: ROBBINS_C_MIN }
    }
}

impl PriorSpec {
    pub fn robbins(c: f64) -> Result<Self> {
        let p = PriorSpec::Robbins { c };
        p.validate()?;
        Ok(p)
    }

    pub fn gaussian(sigma0_sq: f64) -> Result<Self> {
        let p = PriorSpec::Gaussian { sigma0_sq };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            PriorSpec::Robbins { c } => {
                // NaN fails the comparison as well.
                if !(c >= ROBBINS_C_MIN) || !c.is_finite() {
                    return Err(Error::InvalidPrior(format!(
                        "Robbins constant c = {c} must satisfy c >= 6.6e = {ROBBINS_C_MIN}"
                    )));
                }
            }
            PriorSpec::Gaussian { sigma0_sq } => {
                if !(sigma0_sq > 0.0) || !sigma0_sq.is_finite() {
                    return Err(Error::InvalidPrior(format!(
                        "Gaussian prior variance sigma0^2 = {sigma0_sq} must be positive"
                    )));
                }
            }
        }
        Ok(())
    }
}

impl std::fmt::Display for PriorSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            PriorSpec::Robbins { c } => write!(f, "robbins:{c}"),
            PriorSpec::Gaussian { sigma0_sq } => write!(f, "gaussian:{sigma0_sq}"),
        }
    }
}

impl std::str::FromStr for PriorSpec {
    type Err = Error;

    /// `robbins`, `robbins:C` or `gaussian:SIGMA0_SQ`.
    fn from_str(s: &str) -> Result<Self> {
        let (kind, arg) = match s.trim().split_once(':') {
            Some((k, a)) => (k, Some(a)),
            None => (s.trim(), None),
        };
        let num = |a: &str| {
            a.parse::<f64>()
                .map_err(|_| Error::InvalidPrior(format!("`{a}` is not a number in prior `{s}`")))
        };
        match (kind, arg) {
            ("robbins", None) => Ok(PriorSpec::default()),
            ("robbins", Some(a)) => PriorSpec::robbins(num(a)?),
            ("gaussian", Some(a)) => PriorSpec::gaussian(num(a)?),
            ("gaussian", None) => PriorSpec::gaussian(1.0),
            _ => Err(Error::InvalidPrior(format!("unknown prior `{s}`; expected robbins[:C] or gaussian:SIGMA0_SQ"))),
        }
    }
}

/// Log-wealth and regret of one path at one time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WealthRecord {
    pub t: u64,
    pub ln_z: f64,
    pub optimum: HindsightOptimum,
    pub regret: f64,
}

impl WealthRecord {
    /// Build the record for `state` with log-wealth `ln_z`. A zero-variance
    /// state always records `ln_z = 0` and `regret = 0`.
    pub fn new(state: &PathState, ln_z: f64) -> Self {
        let optimum = state.hindsight_optimum();
        let ln_z = if state.is_degenerate() { 0.0 } else { ln_z };
        WealthRecord {
            t: state.t(),
            ln_z,
            optimum,
            regret: optimum.l_star - ln_z,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn append_examples() {
        let s0 = PathState::new();
        let s1 = s0.append_increment(1.3, 1.0).unwrap();
        assert_eq!((s1.s(), s1.v(), s1.t()), (1.3, 1.0, 1));
        assert_eq!(s0, PathState::new());

        let z = s0.append_increment(0.0, 0.0).unwrap();
        assert_eq!((z.s(), z.v(), z.t()), (0.0, 0.0, 1));

        let a = PathState::from_summary(1, 2.0, 1.0).unwrap();
        let b = a.append_increment(-2.0, 3.0).unwrap();
        assert_eq!((b.s(), b.v(), b.t()), (0.0, 4.0, 2));
    }

    #[test]
    fn append_errors() {
        let s0 = PathState::new();
        assert!(matches!(
            s0.append_increment(0.0, -1.0),
            Err(Error::NegativeVarianceIncrement(_))
        ));
        assert!(matches!(
            s0.append_increment(0.5, 0.0),
            Err(Error::BrokenZeroConvention(_))
        ));
        assert!(matches!(
            s0.append_increment(f64::NAN, 1.0),
            Err(Error::NonFiniteIncrement { .. })
        ));
        assert!(PathState::from_summary(3, 1.0, 0.0).is_err());
        assert!(PathState::from_summary(3, 1.0, -1.0).is_err());
    }

    #[test]
    fn push_keeps_state_on_error() {
        let mut st = PathState::with_history();
        st.push(1.0, 2.0).unwrap();
        let before = st.clone();
        assert!(st.push(1.0, -0.5).is_err());
        assert_eq!(st, before);
        assert_eq!(st.history().unwrap(), &[(1.0, 2.0)]);
    }

    #[test]
    fn hindsight_examples() {
        assert_eq!(
            hindsight_optimum(0.0, 0.0),
            HindsightOptimum {
                eta_star: 0.0,
                l_star: 0.0
            }
        );
        let h = hindsight_optimum(3.0, 2.0);
        assert_eq!((h.eta_star, h.l_star), (1.5, 2.25));
        let h = hindsight_optimum(-4.0, 8.0);
        assert_eq!((h.eta_star, h.l_star), (-0.5, 1.0));
    }

    #[test]
    fn prior_validation() {
        assert!(PriorSpec::robbins(ROBBINS_C_MIN).is_ok());
        assert!(PriorSpec::robbins(17.0).is_err());
        assert!(PriorSpec::robbins(f64::NAN).is_err());
        assert!(PriorSpec::gaussian(0.0).is_err());
        assert!(PriorSpec::gaussian(2.0).is_ok());
    }

    #[test]
    fn degenerate_record() {
        let st = PathState::new().append_increment(0.0, 0.0).unwrap();
        let r = WealthRecord::new(&st, 0.3);
        assert_eq!(r.ln_z, 0.0);
        assert_eq!(r.regret, 0.0);
    }
}
