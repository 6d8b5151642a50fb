//! Reference computations written from the Robbins density alone, sharing no
//! code with the library: brute-force Riemann sums with compensated summation.

#![allow(dead_code)]

pub const C_MIN: f64 = 6.6 * std::f64::consts::E;

/// Largest `w = ln ln(c/y)` the mass oracle integrates numerically; the rest
/// of the mass near zero is `1/W_CAP` exactly.
const W_CAP: f64 = 6.0;

/// Neumaier-compensated running sum.
#[derive(Default)]
pub struct Sum {
    s: f64,
    comp: f64,
}

impl Sum {
    pub fn add(&mut self, x: f64) {
        let t = self.s + x;
        if self.s.abs() >= x.abs() {
            self.comp += (self.s - t) + x;
        } else {
            self.comp += (x - t) + self.s;
        }
        self.s = t;
    }

    pub fn value(&self) -> f64 {
        self.s + self.comp
    }
}

/// One-sided unnormalized density `1 / (y ln(c/y) (ln ln(c/y))^2)`.
pub fn phi(c: f64, y: f64) -> f64 {
    let l = (c / y).ln();
    let ll = l.ln();
    1.0 / (y * l * ll * ll)
}

/// Normalizer: twice the unnormalized mass of `(0, 1]`, from the oracle.
pub fn z0_numeric(c: f64) -> f64 {
    2.0 * unnormalized_mass(c, 0.0, 1.0, 2_000_000)
}

/// Unnormalized mass of `[a, b]`, `0 <= a < b <= 1`: midpoint rule in
/// `w = ln ln(c/y)` (where `y = c exp(-e^w)`), with the integrand formed as
/// `phi(y) |dy/dw|`.
pub fn unnormalized_mass(c: f64, a: f64, b: f64, nodes: usize) -> f64 {
    assert!(0.0 <= a && a < b && b <= 1.0);
    let w_of = |y: f64| (c / y).ln().ln();
    let w_lo = w_of(b);
    let w_a = if a == 0.0 { f64::INFINITY } else { w_of(a) };
    let w_hi = w_a.min(W_CAP.max(w_lo));
    let h = (w_hi - w_lo) / nodes as f64;
    let mut sum = Sum::default();
    for i in 0..nodes {
        let w = w_lo + (i as f64 + 0.5) * h;
        let y = c * (-w.exp()).exp();
        sum.add(phi(c, y) * y * w.exp() * h);
    }
    let mut m = sum.value();
    if w_a > w_hi {
        // Near zero the integrand is 1/w^2 to within rounding.
        m += 1.0 / w_hi - if w_a.is_finite() { 1.0 / w_a } else { 0.0 };
    }
    m
}

/// Normalized prior mass of `[a, b]` inside `[-1, 1]`.
pub fn prior_mass(c: f64, a: f64, b: f64, nodes: usize) -> f64 {
    let z0 = 2.0 / c.ln().ln();
    let side = |lo: f64, hi: f64| if hi > lo { unnormalized_mass(c, lo, hi, nodes) } else { 0.0 };
    let (a, b) = (a.max(-1.0), b.min(1.0));
    let m = if a >= 0.0 {
        side(a, b)
    } else if b <= 0.0 {
        side(-b, -a)
    } else {
        side(0.0, -a) + side(0.0, b)
    };
    m / z0
}

/// `ln Z` for the Robbins prior by a Riemann sum over bets `eta = +-e^x`.
///
/// A geometric grid in `eta` is needed because half the prior mass sits
/// within `1e-7` of zero. Below `delta` the payoff is `1` to within `1e-12`,
/// so that piece is the exact mass. Elsewhere a coarse scan locates the
/// region where the integrand exceeds `e^-50` of its peak and the fine
/// midpoint rule spends `nodes_per_side` points there.
pub fn robbins_ln_wealth(c: f64, s: f64, v: f64, nodes_per_side: usize) -> f64 {
    let ln_z0 = (2.0 / c.ln().ln()).ln();
    let delta = 1e-12 / s.abs().max(v).max(1.0);
    let x_min = delta.ln();
    let mut logs = Vec::new();
    for sign in [1.0, -1.0] {
        let log_g = |x: f64| {
            let eta = sign * x.exp();
            eta * s - 0.5 * eta * eta * v + phi(c, x.exp()).ln() + x - ln_z0
        };
        const SCAN: usize = 100_000;
        let dx = -x_min / SCAN as f64;
        let scan: Vec<f64> = (0..=SCAN).map(|i| log_g(x_min + i as f64 * dx)).collect();
        let peak = scan.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let first = scan.iter().position(|&g| g >= peak - 50.0).unwrap();
        let last = scan.iter().rposition(|&g| g >= peak - 50.0).unwrap();
        let lo = x_min + first.saturating_sub(1) as f64 * dx;
        let hi = (x_min + (last + 1) as f64 * dx).min(0.0);
        let h = (hi - lo) / nodes_per_side as f64;
        let mut sum = Sum::default();
        for i in 0..nodes_per_side {
            sum.add((log_g(lo + (i as f64 + 0.5) * h) - peak).exp());
        }
        logs.push(peak + (sum.value() * h).ln());
        // Mass of (0, delta]: 1 / ln ln(c / delta), normalized.
        logs.push(-(c / delta).ln().ln().ln() - ln_z0);
    }
    let m = logs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    m + logs.iter().map(|l| (l - m).exp()).sum::<f64>().ln()
}

/// Exact Gaussian-mixture log-wealth from completing the square.
pub fn gaussian_ln_wealth(s: f64, v: f64, sigma0_sq: f64) -> f64 {
    sigma0_sq * s * s / (2.0 * (1.0 + sigma0_sq * v)) - 0.5 * (sigma0_sq * v).ln_1p()
}
