//! Robbins' prior on `[-1, 1]`,
//!
//! ```text
//! pi(eta) = phi(|eta|) / Z0,   phi(y) = 1 / (y ln(c/y) (ln ln(c/y))^2),
//! ```
//!
//! heavy near zero. On `(0, 1]`, `phi` has the closed-form antiderivative
//! `A(y) = 1 / ln ln(c/y)` with `A(0+) = 0`, which gives `Z0 = 2 / ln ln c`
//! and exact interval masses. The same function `u = A(y)` is the change of
//! variables that turns the one-sided prior measure into Lebesgue measure on
//! `(0, 1 / ln ln c]`, so quadrature never sees the singularity at zero.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::path::{PriorSpec, ROBBINS_C_MIN};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RobbinsPrior {
    c: f64,
    lnln_c: f64,
    z0: f64,
}

impl Default for RobbinsPrior {
    fn default() -> Self {
        RobbinsPrior::new(ROBBINS_C_MIN).expect("6.6e is admissible")
    }
}

impl RobbinsPrior {
    pub fn new(c: f64) -> Result<Self> {
        PriorSpec::Robbins { c }.validate()?;
        let lnln_c = c.ln().ln();
        Ok(RobbinsPrior {
            c,
            lnln_c,
            z0: 2.0 / lnln_c,
        })
    }

    pub fn from_spec(spec: &PriorSpec) -> Result<Self> {
        match *spec {
            PriorSpec::Robbins { c } => Self::new(c),
            PriorSpec::Gaussian { .. } => Err(Error::InvalidPrior(
                "expected a Robbins prior, got a Gaussian one".into(),
            )),
        }
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    /// `ln ln c`.
    pub fn lnln_c(&self) -> f64 {
        self.lnln_c
    }

    /// Normalization constant `Z0 = 2 / ln ln c`.
    pub fn z0(&self) -> f64 {
        self.z0
    }

    /// Upper end of the uniformizing variable, `1 / ln ln c`.
    pub fn u_max(&self) -> f64 {
        1.0 / self.lnln_c
    }

    /// Unnormalized one-sided density `phi(y)` for `y` in `(0, 1]`.
    pub fn phi(&self, y: f64) -> f64 {
        let l = (self.c / y).ln();
        let ll = l.ln();
        1.0 / (y * l * ll * ll)
    }

    pub fn density(&self, eta: f64) -> Result<f64> {
        let y = eta.abs();
        if y == 0.0 {
            return Err(Error::UndefinedAtZero);
        }
        if y > 1.0 || y.is_nan() {
            return Ok(0.0);
        }
        Ok(self.phi(y) / self.z0)
    }

    /// `A(y) = 1 / ln ln(c/y)` on `[0, 1]`, `A(0) = 0`.
    pub fn antiderivative(&self, y: f64) -> f64 {
        if y <= 0.0 {
            return 0.0;
        }
        1.0 / (self.c / y).ln().ln()
    }

    /// Normalized prior mass of `[0, y]` for `y` in `[0, 1]`; odd extension
    /// to negative arguments, clipped to the support.
    fn signed_cdf(&self, x: f64) -> f64 {
        let y = x.abs().min(1.0);
        let m = self.antiderivative(y) / self.z0;
        if x < 0.0 {
            -m
        } else {
            m
        }
    }

    /// Prior mass of `[a, b]`, computed from the closed-form antiderivative.
    pub fn interval_mass(&self, a: f64, b: f64) -> Result<f64> {
        if a.is_nan() || b.is_nan() || a > b {
            return Err(Error::InvalidInterval { a, b });
        }
        let m = self.signed_cdf(b) - self.signed_cdf(a);
        Ok(m.clamp(0.0, 1.0))
    }

    /// Inverse of the uniformizing map: `eta(u) = c exp(-exp(1/u))`.
    pub fn to_uniform(&self, u: f64) -> Result<f64> {
        if !(u > 0.0 && u <= self.u_max()) {
            return Err(Error::OutOfRange {
                value: u,
                range: format!("(0, {}]", self.u_max()),
            });
        }
        Ok(self.eta_of_u(u))
    }

    /// Unchecked `eta(u)`; returns 0 once `exp(-exp(1/u))` underflows.
    #[inline]
    pub(crate) fn eta_of_u(&self, u: f64) -> f64 {
        (self.c * (-(1.0 / u).exp()).exp()).min(1.0)
    }

    /// `u(eta) = 1 / ln ln(c/eta)` for `eta` in `(0, 1]`.
    pub fn from_eta(&self, eta: f64) -> f64 {
        self.antiderivative(eta.abs().min(1.0))
    }

    /// Quantile of the symmetric prior: the `eta` with prior mass `p` below it.
    pub fn quantile(&self, p: f64) -> f64 {
        let p = p.clamp(0.0, 1.0);
        let m = (p - 0.5) * 2.0; // one-sided fraction, signed
        let u = m.abs() * self.u_max();
        let y = if u == 0.0 { 0.0 } else { self.eta_of_u(u) };
        y.copysign(m)
    }
}
