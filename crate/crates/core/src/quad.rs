//! Quadrature primitives used by the wealth computations.
//!
//! Everything is done in the log domain: integrands are supplied as
//! `ln g(x)` together with a reference level `M >= max ln g`, and only
//! `exp(ln g - M) <= 1` is ever formed. Results come back as `ln` of the
//! integral plus a relative error estimate.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

/// Kronrod abscissae of the 15-point rule on `[-1, 1]` (non-negative half).
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];

/// Weights of the embedded 7-point Gauss rule, at `XGK[1], XGK[3], XGK[5], XGK[7]`.
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

/// Nodes per Gauss-Kronrod panel.
pub const GK_POINTS: usize = 15;

/// One node of a composite rule: abscissa, Kronrod weight and embedded
/// Gauss weight (zero for Kronrod-only nodes).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RuleNode {
    pub x: f64,
    pub wk: f64,
    pub wg: f64,
}

/// Nodes of the 15-point rule mapped onto `[a, b]`, in increasing order.
pub fn gk15_panel(a: f64, b: f64) -> [RuleNode; GK_POINTS] {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let mut out = [RuleNode {
        x: 0.0,
        wk: 0.0,
        wg: 0.0,
    }; GK_POINTS];
    for (k, &x) in XGK.iter().enumerate() {
        let wg = if k % 2 == 1 { WG[k / 2] } else { 0.0 };
        out[k] = RuleNode {
            x: center - half * x,
            wk: half * WGK[k],
            wg: half * wg,
        };
        out[GK_POINTS - 1 - k] = RuleNode {
            x: center + half * x,
            wk: half * WGK[k],
            wg: half * wg,
        };
    }
    out
}

/// Composite 15-point rule with `panels` equal panels on `[a, b]`.
pub fn gk15_composite(a: f64, b: f64, panels: usize) -> Vec<RuleNode> {
    let panels = panels.max(1);
    let h = (b - a) / panels as f64;
    (0..panels)
        .flat_map(|p| {
            let lo = a + h * p as f64;
            let hi = if p + 1 == panels { b } else { lo + h };
            gk15_panel(lo, hi)
        })
        .collect()
}

/// Result of a log-domain integration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogIntegral {
    /// `ln` of the integral estimate.
    pub ln_value: f64,
    /// Estimated relative error of the integral.
    pub rel_err: f64,
    pub evaluations: usize,
    pub converged: bool,
}

impl LogIntegral {
    /// Error estimate transported to log scale: `|ln(I + e) - ln I| <= -ln(1 - e/I)`.
    pub fn ln_err(&self) -> f64 {
        rel_to_ln_err(self.rel_err)
    }
}

/// Bound on the log-scale error implied by a relative error `r` of the integral.
pub fn rel_to_ln_err(r: f64) -> f64 {
    if r >= 1.0 || r.is_nan() {
        f64::INFINITY
    } else {
        -(-r).ln_1p()
    }
}

#[derive(Debug, Clone, Copy)]
struct Panel {
    a: f64,
    b: f64,
    value: f64,
    err: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.err.total_cmp(&other.err) == Ordering::Equal
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.err.total_cmp(&other.err)
    }
}

fn eval_panel<F: Fn(f64) -> f64>(ln_g: &F, reference: f64, a: f64, b: f64) -> Panel {
    let mut k = 0.0;
    let mut g = 0.0;
    for node in gk15_panel(a, b) {
        let w = (ln_g(node.x) - reference).exp();
        k += node.wk * w;
        g += node.wg * w;
    }
    Panel {
        a,
        b,
        value: k,
        err: (k - g).abs(),
    }
}

/// Adaptive Gauss-Kronrod integration of `exp(ln_g)` over the union of the
/// consecutive intervals delimited by `breakpoints` (sorted, at least two).
///
/// `reference` should be an upper bound of `ln_g` on the domain. The panel
/// with the largest error estimate is bisected until the summed estimate is
/// below `tol_rel` times the integral or `max_evals` is reached.
pub fn integrate_log<F: Fn(f64) -> f64>(
    ln_g: F,
    breakpoints: &[f64],
    reference: f64,
    tol_rel: f64,
    max_evals: usize,
) -> LogIntegral {
    assert!(breakpoints.len() >= 2, "need at least one interval");
    let mut heap = BinaryHeap::new();
    let mut evals = 0usize;
    for w in breakpoints.windows(2) {
        if w[1] > w[0] {
            heap.push(eval_panel(&ln_g, reference, w[0], w[1]));
            evals += GK_POINTS;
        }
    }
    let totals = |heap: &BinaryHeap<Panel>| {
        heap.iter()
            .fold((0.0, 0.0), |(v, e), p| (v + p.value, e + p.err))
    };
    let (mut value, mut err) = totals(&heap);
    while err > tol_rel * value && evals + 2 * GK_POINTS <= max_evals {
        let worst = match heap.pop() {
            Some(p) => p,
            None => break,
        };
        let mid = 0.5 * (worst.a + worst.b);
        if !(mid > worst.a && mid < worst.b) {
            // Panel cannot be split further in floating point.
            heap.push(Panel { err: 0.0, ..worst });
            err = totals(&heap).1 + worst.err;
            break;
        }
        let left = eval_panel(&ln_g, reference, worst.a, mid);
        let right = eval_panel(&ln_g, reference, mid, worst.b);
        evals += 2 * GK_POINTS;
        value += left.value + right.value - worst.value;
        err += left.err + right.err - worst.err;
        heap.push(left);
        heap.push(right);
    }
    let (value, err_sum) = totals(&heap);
    let err = err.max(err_sum);
    let rel_err = if value > 0.0 {
        err / value
    } else if err == 0.0 {
        0.0
    } else {
        f64::INFINITY
    };
    LogIntegral {
        ln_value: value.ln() + reference,
        rel_err,
        evaluations: evals,
        converged: rel_err <= tol_rel,
    }
}

/// `ln(sum exp(x_i))`, stable; `-inf` for an empty or all `-inf` input.
pub fn log_sum_exp(xs: &[f64]) -> f64 {
    let m = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return m;
    }
    if m == f64::INFINITY {
        return m;
    }
    m + xs.iter().map(|x| (x - m).exp()).sum::<f64>().ln()
}

/// `ln(exp(a) + exp(b))`.
#[inline]
pub fn log_add_exp(a: f64, b: f64) -> f64 {
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    if lo == f64::NEG_INFINITY {
        return hi;
    }
    hi + (lo - hi).exp().ln_1p()
}

/// Gauss-Hermite rule for the weight `exp(-x^2)` on the real line.
/// Returns `(nodes, weights)` with nodes in increasing order.
pub fn gauss_hermite(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let pim4 = std::f64::consts::PI.powf(-0.25);
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let m = n.div_ceil(2);
    let nf = n as f64;
    let mut z = 0.0f64;
    for i in 0..m {
        // Standard asymptotic initial guesses for the largest roots, then
        // extrapolation from the previously found ones.
        z = match i {
            0 => (2.0 * nf + 1.0).sqrt() - 1.85575 * (2.0 * nf + 1.0).powf(-1.0 / 6.0),
            1 => z - 1.14 * nf.powf(0.426) / z,
            2 => 1.86 * z - 0.86 * x[0],
            3 => 1.91 * z - 0.91 * x[1],
            _ => 2.0 * z - x[i - 2],
        };
        let mut pp = 0.0;
        for _ in 0..100 {
            let mut p1 = pim4;
            let mut p2 = 0.0;
            for j in 0..n {
                let p3 = p2;
                p2 = p1;
                let jf = j as f64;
                p1 = z * (2.0 / (jf + 1.0)).sqrt() * p2 - (jf / (jf + 1.0)).sqrt() * p3;
            }
            pp = (2.0 * nf).sqrt() * p2;
            let z1 = z;
            z = z1 - p1 / pp;
            if (z - z1).abs() <= 1e-15 * z.abs().max(1.0) {
                break;
            }
        }
        x[i] = z;
        x[n - 1 - i] = -z;
        w[i] = 2.0 / (pp * pp);
        w[n - 1 - i] = w[i];
    }
    x.reverse();
    w.reverse();
    (x, w)
}
