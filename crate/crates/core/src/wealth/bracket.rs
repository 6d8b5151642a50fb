use serde::{Deserialize, Serialize};

use super::check_state;
use crate::error::Result;
use crate::path::log_payoff;
use crate::prior::RobbinsPrior;

/// Certified interval `[lo, hi]` containing `ln Z_t`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LnBracket {
    pub lo: f64,
    pub hi: f64,
}

impl LnBracket {
    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }
}

/// Cells of equal prior mass on each side of zero. For any state, the
/// concave payoff `f` is bounded on each cell by its values at the cell
/// ends and at the clamped maximizer, which brackets `Z_t` with nothing but
/// exact masses. Cells far below the peak are summarized by one tail bound.
#[derive(Debug, Clone)]
pub struct RobbinsBracket {
    /// Cell edges in `|eta|`, from 0 to 1.
    edges: Vec<f64>,
    ln_cell_mass: f64,
}

/// Cells more than this many nats below the peak are folded into a tail bound.
const SWEEP_CUTOFF: f64 = 50.0;

impl RobbinsBracket {
    pub fn new(prior: &RobbinsPrior, cells_per_side: usize) -> Self {
        let n = cells_per_side.max(1);
        let u_max = prior.u_max();
        let mut edges: Vec<f64> = (0..=n)
            .map(|k| {
                if k == 0 {
                    0.0
                } else if k == n {
                    1.0
                } else {
                    prior.eta_of_u(u_max * k as f64 / n as f64)
                }
            })
            .collect();
        // Underflowed edges collapse onto zero; keep the sequence monotone.
        for k in 1..edges.len() {
            if edges[k] < edges[k - 1] {
                edges[k] = edges[k - 1];
            }
        }
        RobbinsBracket {
            edges,
            ln_cell_mass: -(2.0 * n as f64).ln(),
        }
    }

    pub fn cells_per_side(&self) -> usize {
        self.edges.len() - 1
    }

    /// Bracket of `ln Z_t` at `(s, v)`; exact `[0, 0]` when `V = 0`.
    pub fn bracket(&self, s: f64, v: f64) -> Result<LnBracket> {
        check_state(s, v)?;
        if v == 0.0 {
            return Ok(LnBracket { lo: 0.0, hi: 0.0 });
        }
        let peak = |a: f64| log_payoff((a / v).clamp(0.0, 1.0), a, v);
        let reference = peak(s).max(peak(-s));
        let (mut lo_sum, mut hi_sum) = (0.0, 0.0);
        for a in [s, -s] {
            let (l, h) = self.side(a, v, reference);
            lo_sum += l;
            hi_sum += h;
        }
        Ok(LnBracket {
            lo: reference + lo_sum.ln() + self.ln_cell_mass,
            hi: reference + hi_sum.ln() + self.ln_cell_mass,
        })
    }

    /// Whether `ln Z_t >= threshold` follows from the cells. Sweeps outward
    /// from the maximizer and stops as soon as the partial lower sum clears
    /// the threshold, so easy states cost a handful of cells.
    pub fn certifies_above(&self, s: f64, v: f64, threshold: f64) -> Result<bool> {
        check_state(s, v)?;
        if v == 0.0 {
            return Ok(threshold <= 0.0);
        }
        let peak = |a: f64| log_payoff((a / v).clamp(0.0, 1.0), a, v);
        let reference = peak(s).max(peak(-s));
        let target = (threshold - reference - self.ln_cell_mass).exp();
        if target > (2 * self.cells_per_side()) as f64 {
            return Ok(false);
        }
        let n = self.cells_per_side();
        let mut sum = 0.0;
        let (first, second) = if s >= 0.0 { (s, -s) } else { (-s, s) };
        for a in [first, second] {
            let y_m = (a / v).clamp(0.0, 1.0);
            let start = self.edges.partition_point(|&e| e <= y_m).saturating_sub(1).min(n - 1);
            let lo_cell = |k: usize| {
                let (y0, y1) = (self.edges[k], self.edges[k + 1]);
                log_payoff(y0, a, v).min(log_payoff(y1, a, v)) - reference
            };
            sum += lo_cell(start).exp();
            if sum >= target {
                return Ok(true);
            }
            // f decreases away from y_m, so each leg stops at the cutoff.
            for leg in [&mut (start + 1..n) as &mut dyn Iterator<Item = usize>, &mut (0..start).rev()] {
                for k in leg {
                    let lo = lo_cell(k);
                    if lo < -SWEEP_CUTOFF {
                        break;
                    }
                    sum += lo.exp();
                    if sum >= target {
                        return Ok(true);
                    }
                }
            }
        }
        Ok(false)
    }

    /// Sums of `exp(min f - reference)` and `exp(max f - reference)` over
    /// the cells of one side, sweeping outward from the maximizer.
    fn side(&self, a: f64, v: f64, reference: f64) -> (f64, f64) {
        let n = self.cells_per_side();
        let y_m = (a / v).clamp(0.0, 1.0);
        // Index of the cell containing y_m.
        let start = self.edges.partition_point(|&e| e <= y_m).saturating_sub(1).min(n - 1);
        let cell = |k: usize| {
            let (y0, y1) = (self.edges[k], self.edges[k + 1]);
            let hi = log_payoff(y_m.clamp(y0, y1), a, v);
            let lo = log_payoff(y0, a, v).min(log_payoff(y1, a, v));
            ((lo - reference).exp(), hi - reference)
        };
        let (mut lo_sum, mut hi_sum) = (0.0, 0.0);
        let (l, h) = cell(start);
        lo_sum += l;
        hi_sum += h.exp();
        // Upward sweep, then downward; f decreases monotonically away from y_m.
        for k in start + 1..n {
            let (l, h) = cell(k);
            if h < -SWEEP_CUTOFF {
                hi_sum += (n - k) as f64 * h.exp();
                break;
            }
            lo_sum += l;
            hi_sum += h.exp();
        }
        for k in (0..start).rev() {
            let (l, h) = cell(k);
            if h < -SWEEP_CUTOFF {
                hi_sum += (k + 1) as f64 * h.exp();
                break;
            }
            lo_sum += l;
            hi_sum += h.exp();
        }
        (lo_sum, hi_sum)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::wealth::{ln_wealth_robbins, QuadratureConfig};

    #[test]
    fn brackets_contain_quadrature() {
        let p = RobbinsPrior::default();
        let q = QuadratureConfig::default();
        let b = RobbinsBracket::new(&p, 128);
        for &(s, v) in &[
            (0.0, 1.0),
            (3.0, 10.0),
            (-40.0, 100.0),
            (1e4, 1e4),
            (2e4, 1e4),
            (300.0, 1e6),
            (-1e-3, 1e-6),
        ] {
            let z = ln_wealth_robbins(s, v, &p, &q).unwrap();
            let br = b.bracket(s, v).unwrap();
            assert!(br.lo <= z.value + 1e-9 && z.value <= br.hi + 1e-9, "{s} {v}: {br:?} vs {z:?}");
        }
    }

    #[test]
    fn early_stop_agrees_with_bracket() {
        let p = RobbinsPrior::default();
        let b = RobbinsBracket::new(&p, 64);
        for &(s, v) in &[(0.0, 1.0), (3.0, 10.0), (-40.0, 100.0), (2e4, 1e4), (300.0, 1e6)] {
            let br = b.bracket(s, v).unwrap();
            assert!(b.certifies_above(s, v, br.lo - 1e-6).unwrap(), "{s} {v}");
            assert!(!b.certifies_above(s, v, br.hi + 1e-6).unwrap(), "{s} {v}");
        }
    }

    #[test]
    fn zero_variance() {
        let b = RobbinsBracket::new(&RobbinsPrior::default(), 16);
        assert_eq!(b.bracket(0.0, 0.0).unwrap(), LnBracket { lo: 0.0, hi: 0.0 });
    }

    #[test]
    fn finer_cells_tighten() {
        let p = RobbinsPrior::default();
        let coarse = RobbinsBracket::new(&p, 16).bracket(30.0, 400.0).unwrap();
        let fine = RobbinsBracket::new(&p, 512).bracket(30.0, 400.0).unwrap();
        assert!(fine.width() < coarse.width());
        assert!(fine.width() < 0.1, "{fine:?}");
    }
}
