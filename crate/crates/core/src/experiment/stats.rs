use serde::{Deserialize, Serialize};
use statrs::distribution::{Beta, ContinuousCDF};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

/// Exact two-sided binomial interval for `k` successes in `n` trials.
pub fn clopper_pearson(k: u64, n: u64, level: f64) -> Interval {
    assert!(n > 0 && k <= n, "need 0 <= k <= n, n > 0 (k = {k}, n = {n})");
    let tail = (1.0 - level) / 2.0;
    let (kf, nf) = (k as f64, n as f64);
    let lo = if k == 0 {
        0.0
    } else {
        Beta::new(kf, nf - kf + 1.0).expect("positive shapes").inverse_cdf(tail)
    };
    let hi = if k == n {
        1.0
    } else {
        Beta::new(kf + 1.0, nf - kf).expect("positive shapes").inverse_cdf(1.0 - tail)
    };
    Interval { lo, hi }
}

/// `1 - alpha - 3 sqrt(alpha (1 - alpha) / n)`: the smallest frequency
/// consistent with a `1 - alpha` guarantee at three binomial standard errors.
pub fn binomial_floor(alpha: f64, n: u64) -> f64 {
    1.0 - alpha - 3.0 * (alpha * (1.0 - alpha) / n as f64).sqrt()
}

/// A success frequency with its exact 95% interval and pass/fail against a floor.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Frequency {
    pub successes: u64,
    pub trials: u64,
    pub frequency: f64,
    pub ci95: Interval,
    pub floor: f64,
    pub passes: bool,
}

impl Frequency {
    pub fn new(successes: u64, trials: u64, floor: f64) -> Self {
        let frequency = successes as f64 / trials as f64;
        Frequency {
            successes,
            trials,
            frequency,
            ci95: clopper_pearson(successes, trials, 0.95),
            floor,
            passes: frequency >= floor,
        }
    }
}

/// Five-number summary (linear interpolation between order statistics).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Quantiles {
    pub min: f64,
    pub q25: f64,
    pub median: f64,
    pub q75: f64,
    pub max: f64,
}

impl Quantiles {
    pub fn of(values: &[f64]) -> Option<Self> {
        if values.is_empty() {
            return None;
        }
        let mut v = values.to_vec();
        v.sort_by(f64::total_cmp);
        let q = |p: f64| {
            let x = p * (v.len() - 1) as f64;
            let (i, frac) = (x.floor() as usize, x.fract());
            if i + 1 < v.len() {
                v[i] + frac * (v[i + 1] - v[i])
            } else {
                v[i]
            }
        };
        Some(Quantiles {
            min: v[0],
            q25: q(0.25),
            median: q(0.5),
            q75: q(0.75),
            max: v[v.len() - 1],
        })
    }
}

/// Counts of first-crossing times in decades `[1, 10), [10, 100), ...`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DecadeBin {
    pub from: u64,
    pub to: u64,
    pub count: u64,
}

pub fn decade_histogram(times: &[u64], horizon: u64) -> Vec<DecadeBin> {
    let mut bins = Vec::new();
    let mut from = 1u64;
    while from <= horizon {
        let to = from.saturating_mul(10);
        let count = times.iter().filter(|&&t| t >= from && t < to).count() as u64;
        bins.push(DecadeBin { from, to, count });
        from = to;
    }
    bins
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn clopper_pearson_known_values() {
        // 0 of 10: upper end solves (1 - p)^10 = 0.025.
        let ci = clopper_pearson(0, 10, 0.95);
        assert_eq!(ci.lo, 0.0);
        assert!((ci.hi - (1.0 - 0.025f64.powf(0.1))).abs() < 1e-10);
        let ci = clopper_pearson(10, 10, 0.95);
        assert!((ci.lo - 0.025f64.powf(0.1)).abs() < 1e-10);
        assert_eq!(ci.hi, 1.0);
        let ci = clopper_pearson(50, 100, 0.95);
        assert!((ci.lo - 0.398_321_4).abs() < 1e-6 && (ci.hi - 0.601_678_6).abs() < 1e-6, "{ci:?}");
    }

    #[test]
    fn floor_matches_hand_value() {
        assert!((binomial_floor(0.05, 10_000) - 0.943_461_65).abs() < 1e-8);
    }

    #[test]
    fn quantiles_and_histogram() {
        let q = Quantiles::of(&[3.0, 1.0, 2.0, 4.0, 5.0]).unwrap();
        assert_eq!((q.min, q.q25, q.median, q.q75, q.max), (1.0, 2.0, 3.0, 4.0, 5.0));
        assert!(Quantiles::of(&[]).is_none());
        let h = decade_histogram(&[1, 9, 10, 999, 1000], 1000);
        let counts: Vec<u64> = h.iter().map(|b| b.count).collect();
        assert_eq!(counts, vec![2, 1, 1, 1]);
    }
}
