//! Data models: i.i.d. sub-Gaussian families, symmetric and finite-variance
//! data with self-normalizing variance proxies, deterministic adversarial
//! sequences, replay files and schedules that concatenate models.
//!
//! Every model emits `(X_t, dS_t, dV_t)` with `dV_t >= 0`:
//!
//! | model | `dS` | `dV` |
//! |---|---|---|
//! | Gaussian, sub-Gaussian | `X - center` | `sigma^2` |
//! | symmetric | `X` | `X^2` |
//! | finite variance | `X` | `(X^2 + 2 E[X^2]) / 3` |

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Reproducible random stream identified by `(seed, stream_id)`.
#[derive(Debug, Clone)]
pub struct RngStream {
    seed: u64,
    stream_id: u64,
    rng: ChaCha8Rng,
}

impl RngStream {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream_id);
        RngStream { seed, stream_id, rng }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream_id(&self) -> u64 {
        self.stream_id
    }
}

impl RngCore for RngStream {
    fn next_u32(&mut self) -> u32 {
        self.rng.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.rng.fill_bytes(dst)
    }
}

/// One step of data.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Increment {
    pub x: f64,
    pub ds: f64,
    pub dv: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SubGaussianShape {
    /// `Uniform[-sigma sqrt 3, sigma sqrt 3]`, whose optimal proxy is its variance.
    Bounded,
    /// `N(0, sigma^2)` conditioned on `|X| <= 2 sigma`.
    TruncatedNormal,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SymmetricDist {
    /// `scale * epsilon` with a Rademacher sign.
    RademacherScale { scale: f64 },
    /// Standard Cauchy; no mean.
    Cauchy,
    /// Zero with probability `atom`, else `N(0, 1)`.
    GaussMixtureAtom { atom: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FiniteVarianceDist {
    /// `a` with probability `p`, `-b` otherwise, mean 0, `E[X^2] = second_moment`.
    TwoPoint { p: f64, second_moment: f64 },
    /// `Exp(rate) - 1/rate`, with `E[X^2] = 1/rate^2`.
    CenteredExponential { rate: f64 },
}

impl FiniteVarianceDist {
    pub fn second_moment(&self) -> f64 {
        match *self {
            FiniteVarianceDist::TwoPoint { second_moment, .. } => second_moment,
            FiniteVarianceDist::CenteredExponential { rate } => 1.0 / (rate * rate),
        }
    }
}

/// Which branch boundary the pinned generator tracks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundaryTarget {
    /// `|S|/V = 1/sqrt(1+V)`.
    Interior,
    /// `|S|/V = 1`.
    Unit,
}

/// Deterministic sequences for fuzzing the pathwise bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum AdversarialGenerator {
    /// `dS = a`, `dV = 1`.
    LinearDrift { a: f64 },
    /// `dS = size` at step `at`, else 0; `dV = 1`.
    Spike { at: u64, size: f64 },
    /// `dS = +-a` alternating every `block` steps; `dV = 1`.
    SignFlipBlocks { block: u64, a: f64 },
    /// `V_t = ratio^t - 1` and `dS = drift dV`.
    GeometricV { ratio: f64, drift: f64 },
    /// `dV = 1` and `dS` chosen so `|S|/V` sits at `target * (1 + offset)`.
    BranchBoundary { target: BoundaryTarget, offset: f64 },
}

impl AdversarialGenerator {
    fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Config(m.to_string()));
        match *self {
            AdversarialGenerator::LinearDrift { a } if !a.is_finite() => bad("drift must be finite"),
            AdversarialGenerator::Spike { size, .. } if !size.is_finite() => bad("spike size must be finite"),
            AdversarialGenerator::SignFlipBlocks { block, a } if block == 0 || !a.is_finite() => {
                bad("sign-flip blocks need block >= 1 and finite a")
            }
            AdversarialGenerator::GeometricV { ratio, drift } if !(ratio > 1.0) || !drift.is_finite() => {
                bad("geometric V needs ratio > 1")
            }
            AdversarialGenerator::BranchBoundary { offset, .. } if !(offset > -1.0) || !offset.is_finite() => {
                bad("boundary offset must exceed -1")
            }
            _ => Ok(()),
        }
    }

    /// Increment at step `t >= 1` given the running `(s, v)` before it.
    pub fn step(&self, t: u64, s: f64, v: f64) -> Increment {
        let (ds, dv) = match *self {
            AdversarialGenerator::LinearDrift { a } => (a, 1.0),
            AdversarialGenerator::Spike { at, size } => (if t == at { size } else { 0.0 }, 1.0),
            AdversarialGenerator::SignFlipBlocks { block, a } => {
                let sign = if ((t - 1) / block) % 2 == 0 { 1.0 } else { -1.0 };
                (sign * a, 1.0)
            }
            AdversarialGenerator::GeometricV { ratio, drift } => {
                let dv = (ratio - 1.0) * ratio.powf((t - 1) as f64);
                (drift * dv, dv)
            }
            AdversarialGenerator::BranchBoundary { target, offset } => {
                let v_next = v + 1.0;
                let ratio = match target {
                    BoundaryTarget::Interior => 1.0 / (1.0 + v_next).sqrt(),
                    BoundaryTarget::Unit => 1.0,
                };
                (ratio * (1.0 + offset) * v_next - s, 1.0)
            }
        };
        Increment { x: ds, ds, dv }
    }
}

impl fmt::Display for AdversarialGenerator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            AdversarialGenerator::LinearDrift { a } => write!(f, "drift:{a}"),
            AdversarialGenerator::Spike { at, size } => write!(f, "spike:{at}:{size}"),
            AdversarialGenerator::SignFlipBlocks { block, a } => write!(f, "signflip:{block}:{a}"),
            AdversarialGenerator::GeometricV { ratio, drift } => write!(f, "geometric:{ratio}:{drift}"),
            AdversarialGenerator::BranchBoundary { target, offset } => {
                let t = match target {
                    BoundaryTarget::Interior => "interior",
                    BoundaryTarget::Unit => "one",
                };
                write!(f, "boundary:{t}:{offset}")
            }
        }
    }
}

impl FromStr for AdversarialGenerator {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(':').collect();
        let num = |i: usize, default: f64| -> Result<f64> {
            match parts.get(i) {
                Some(p) => p
                    .parse::<f64>()
                    .map_err(|_| Error::Config(format!("bad number `{p}` in generator `{s}`"))),
                None => Ok(default),
            }
        };
        let int = |i: usize, default: u64| -> Result<u64> {
            match parts.get(i) {
                Some(p) => p
                    .parse::<u64>()
                    .map_err(|_| Error::Config(format!("bad integer `{p}` in generator `{s}`"))),
                None => Ok(default),
            }
        };
        let g = match parts[0] {
            "drift" | "linear" => AdversarialGenerator::LinearDrift { a: num(1, 2.0)? },
            "spike" => AdversarialGenerator::Spike {
                at: int(1, 5)?,
                size: num(2, 1e6)?,
            },
            "signflip" => AdversarialGenerator::SignFlipBlocks {
                block: int(1, 10)?,
                a: num(2, 1.0)?,
            },
            "geometric" => AdversarialGenerator::GeometricV {
                ratio: num(1, 1.01)?,
                drift: num(2, 0.5)?,
            },
            "boundary" => {
                let target = match parts.get(1).copied().unwrap_or("one") {
                    "one" | "unit" => BoundaryTarget::Unit,
                    "interior" => BoundaryTarget::Interior,
                    other => return Err(Error::UnknownGenerator(format!("boundary:{other}"))),
                };
                AdversarialGenerator::BranchBoundary {
                    target,
                    offset: num(2, 0.0)?,
                }
            }
            _ => return Err(Error::UnknownGenerator(s.to_string())),
        };
        g.validate()?;
        Ok(g)
    }
}

/// A data-generating model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case")]
pub enum DataModel {
    /// `X ~ N(mean, sigma^2)`, recentered at `center`. Null when `center = mean`.
    GaussianIid { mean: f64, sigma: f64, center: f64 },
    SubGaussianIid {
        mean: f64,
        sigma_proxy: f64,
        shape: SubGaussianShape,
        center: f64,
    },
    SymmetricIid { dist: SymmetricDist },
    FiniteVarianceIid { dist: FiniteVarianceDist },
    Adversarial { generator: AdversarialGenerator },
    Replay { path: PathBuf },
    /// Consecutive segments: `(steps, model)`; the last segment runs forever.
    Schedule { segments: Vec<(u64, DataModel)> },
}

impl DataModel {
    /// Standard Gaussian data at its null.
    pub fn gaussian() -> Self {
        DataModel::GaussianIid {
            mean: 0.0,
            sigma: 1.0,
            center: 0.0,
        }
    }

    /// `N(mean, 1)` data tested against a forecast of 0.
    pub fn drift(mean: f64) -> Self {
        DataModel::GaussianIid {
            mean,
            sigma: 1.0,
            center: 0.0,
        }
    }

    /// `N(mean, 1)` data recentered at its true mean.
    pub fn gaussian_centered(mean: f64) -> Self {
        DataModel::GaussianIid {
            mean,
            sigma: 1.0,
            center: mean,
        }
    }

    /// One representative of each i.i.d. family at its null.
    pub fn null_suite() -> Vec<DataModel> {
        vec![
            DataModel::gaussian(),
            DataModel::SubGaussianIid {
                mean: 0.0,
                sigma_proxy: 1.0,
                shape: SubGaussianShape::Bounded,
                center: 0.0,
            },
            DataModel::SymmetricIid {
                dist: SymmetricDist::Cauchy,
            },
            DataModel::FiniteVarianceIid {
                dist: FiniteVarianceDist::CenteredExponential { rate: 1.0 },
            },
        ]
    }

    /// Every stochastic variant at its null.
    pub fn all_null_variants() -> Vec<DataModel> {
        let mut v = Self::null_suite();
        v.extend([
            DataModel::SubGaussianIid {
                mean: 0.0,
                sigma_proxy: 1.0,
                shape: SubGaussianShape::TruncatedNormal,
                center: 0.0,
            },
            DataModel::SymmetricIid {
                dist: SymmetricDist::RademacherScale { scale: 1.0 },
            },
            DataModel::SymmetricIid {
                dist: SymmetricDist::GaussMixtureAtom { atom: 0.5 },
            },
            DataModel::FiniteVarianceIid {
                dist: FiniteVarianceDist::TwoPoint {
                    p: 0.2,
                    second_moment: 1.0,
                },
            },
        ]);
        v
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        match self {
            DataModel::GaussianIid { mean, sigma, center } => {
                if !(*sigma > 0.0 && sigma.is_finite()) {
                    return bad(format!("sigma = {sigma} must be positive"));
                }
                if !mean.is_finite() || !center.is_finite() {
                    return bad("mean and center must be finite".into());
                }
            }
            DataModel::SubGaussianIid {
                mean,
                sigma_proxy,
                center,
                ..
            } => {
                if !(*sigma_proxy > 0.0 && sigma_proxy.is_finite()) {
                    return bad(format!("sigma_proxy = {sigma_proxy} must be positive"));
                }
                if !mean.is_finite() || !center.is_finite() {
                    return bad("mean and center must be finite".into());
                }
            }
            DataModel::SymmetricIid { dist } => match *dist {
                SymmetricDist::RademacherScale { scale } if !(scale > 0.0 && scale.is_finite()) => {
                    return bad(format!("scale = {scale} must be positive"));
                }
                SymmetricDist::GaussMixtureAtom { atom } if !(0.0..1.0).contains(&atom) => {
                    return bad(format!("atom = {atom} must lie in [0, 1)"));
                }
                _ => {}
            },
            DataModel::FiniteVarianceIid { dist } => match *dist {
                FiniteVarianceDist::TwoPoint { p, second_moment } => {
                    if !(p > 0.0 && p < 1.0) || !(second_moment > 0.0 && second_moment.is_finite()) {
                        return bad(format!("two-point needs 0 < p < 1 and E[X^2] > 0 (p = {p}, m2 = {second_moment})"));
                    }
                }
                FiniteVarianceDist::CenteredExponential { rate } => {
                    if !(rate > 0.0 && rate.is_finite()) {
                        return bad(format!("rate = {rate} must be positive"));
                    }
                }
            },
            DataModel::Adversarial { generator } => generator.validate()?,
            DataModel::Replay { .. } => {}
            DataModel::Schedule { segments } => {
                if segments.is_empty() {
                    return bad("schedule needs at least one segment".into());
                }
                for (_, m) in segments {
                    if matches!(m, DataModel::Schedule { .. }) {
                        return bad("schedules cannot nest".into());
                    }
                    m.validate()?;
                }
            }
        }
        Ok(())
    }

    /// `(mean, center)` for models whose mean the confidence sequence can
    /// target: the increments are `X - center` and the target is `mean`.
    /// `None` for Cauchy data and deterministic sequences.
    pub fn mean_and_center(&self) -> Option<(f64, f64)> {
        match self {
            DataModel::GaussianIid { mean, center, .. } | DataModel::SubGaussianIid { mean, center, .. } => {
                Some((*mean, *center))
            }
            DataModel::SymmetricIid {
                dist: SymmetricDist::Cauchy,
            } => None,
            DataModel::SymmetricIid { .. } | DataModel::FiniteVarianceIid { .. } => Some((0.0, 0.0)),
            DataModel::Adversarial { .. } | DataModel::Replay { .. } => None,
            DataModel::Schedule { segments } => {
                let first = segments.first()?.1.mean_and_center()?;
                segments
                    .iter()
                    .all(|(_, m)| m.mean_and_center() == Some(first))
                    .then_some(first)
            }
        }
    }

    pub fn has_mean(&self) -> bool {
        self.mean_and_center().is_some()
    }

    /// Whether the model is stochastic and centered at its true mean, so
    /// the mixture is a supermartingale.
    pub fn is_null(&self) -> bool {
        match self {
            DataModel::GaussianIid { mean, center, .. } => mean == center,
            DataModel::SubGaussianIid { mean, center, .. } => mean == center,
            DataModel::SymmetricIid { .. } | DataModel::FiniteVarianceIid { .. } => true,
            DataModel::Adversarial { .. } | DataModel::Replay { .. } => false,
            DataModel::Schedule { segments } => segments.iter().all(|(_, m)| m.is_null()),
        }
    }
}

impl fmt::Display for DataModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DataModel::GaussianIid { mean, sigma, center } => {
                if *center == 0.0 && *sigma == 1.0 && *mean != 0.0 {
                    write!(f, "drift:{mean}")
                } else if mean == center && *sigma == 1.0 && *mean == 0.0 {
                    write!(f, "gaussian")
                } else {
                    write!(f, "gaussian:{mean}:{sigma}:{center}")
                }
            }
            DataModel::SubGaussianIid {
                mean,
                sigma_proxy,
                shape,
                center,
            } => {
                let s = match shape {
                    SubGaussianShape::Bounded => "bounded",
                    SubGaussianShape::TruncatedNormal => "truncnorm",
                };
                write!(f, "subgaussian:{s}:{sigma_proxy}:{mean}:{center}")
            }
            DataModel::SymmetricIid { dist } => match dist {
                SymmetricDist::RademacherScale { scale } => write!(f, "symmetric:rademacher:{scale}"),
                SymmetricDist::Cauchy => write!(f, "symmetric:cauchy"),
                SymmetricDist::GaussMixtureAtom { atom } => write!(f, "symmetric:mixture:{atom}"),
            },
            DataModel::FiniteVarianceIid { dist } => match dist {
                FiniteVarianceDist::TwoPoint { p, second_moment } => {
                    write!(f, "finite:twopoint:{p}:{second_moment}")
                }
                FiniteVarianceDist::CenteredExponential { rate } => write!(f, "finite:exponential:{rate}"),
            },
            DataModel::Adversarial { generator } => write!(f, "adversarial:{generator}"),
            DataModel::Replay { path } => write!(f, "replay:{}", path.display()),
            DataModel::Schedule { segments } => {
                write!(f, "schedule:")?;
                for (i, (n, m)) in segments.iter().enumerate() {
                    if i > 0 {
                        write!(f, ";")?;
                    }
                    write!(f, "{n}={m}")?;
                }
                Ok(())
            }
        }
    }
}

impl FromStr for DataModel {
    type Err = Error;

    /// Grammar (fields after the family are optional, defaults in brackets):
    ///
    /// * `gaussian[:MEAN[:SIGMA[:CENTER]]]` (center defaults to the mean)
    /// * `drift:MEAN` (unit variance, tested against 0)
    /// * `subgaussian:bounded|truncnorm[:SIGMA[:MEAN[:CENTER]]]`
    /// * `symmetric:rademacher[:SCALE]`, `symmetric:cauchy`, `symmetric:mixture[:ATOM]`
    /// * `finite:twopoint[:P[:M2]]`, `finite:exponential[:RATE]`
    /// * `adversarial:GENERATOR` with `drift:A`, `spike:T:SIZE`,
    ///   `signflip:BLOCK:A`, `geometric:RATIO:DRIFT`, `boundary:one|interior[:OFFSET]`
    /// * `replay:PATH`
    /// * `schedule:N1=MODEL1;N2=MODEL2;...`
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (family, rest) = match s.split_once(':') {
            Some((a, b)) => (a, Some(b)),
            None => (s, None),
        };
        let fields: Vec<&str> = rest.map(|r| r.split(':').collect()).unwrap_or_default();
        let num = |i: usize, default: f64| -> Result<f64> {
            match fields.get(i) {
                Some(p) => p
                    .parse::<f64>()
                    .map_err(|_| Error::Config(format!("bad number `{p}` in model `{s}`"))),
                None => Ok(default),
            }
        };
        let model = match family {
            "gaussian" => {
                let mean = num(0, 0.0)?;
                DataModel::GaussianIid {
                    mean,
                    sigma: num(1, 1.0)?,
                    center: num(2, mean)?,
                }
            }
            "drift" => DataModel::drift(num(0, 0.5)?),
            "subgaussian" => {
                let shape = match fields.first().copied().unwrap_or("bounded") {
                    "bounded" => SubGaussianShape::Bounded,
                    "truncnorm" | "truncated" => SubGaussianShape::TruncatedNormal,
                    other => return Err(Error::Config(format!("unknown sub-Gaussian shape `{other}`"))),
                };
                let mean = num(2, 0.0)?;
                DataModel::SubGaussianIid {
                    mean,
                    sigma_proxy: num(1, 1.0)?,
                    shape,
                    center: num(3, mean)?,
                }
            }
            "symmetric" => {
                let dist = match fields.first().copied().unwrap_or("rademacher") {
                    "rademacher" => SymmetricDist::RademacherScale { scale: num(1, 1.0)? },
                    "cauchy" => SymmetricDist::Cauchy,
                    "mixture" | "atom" => SymmetricDist::GaussMixtureAtom { atom: num(1, 0.5)? },
                    other => return Err(Error::Config(format!("unknown symmetric distribution `{other}`"))),
                };
                DataModel::SymmetricIid { dist }
            }
            "finite" => {
                let dist = match fields.first().copied().unwrap_or("twopoint") {
                    "twopoint" => FiniteVarianceDist::TwoPoint {
                        p: num(1, 0.2)?,
                        second_moment: num(2, 1.0)?,
                    },
                    "exponential" => FiniteVarianceDist::CenteredExponential { rate: num(1, 1.0)? },
                    other => return Err(Error::Config(format!("unknown finite-variance distribution `{other}`"))),
                };
                DataModel::FiniteVarianceIid { dist }
            }
            "adversarial" => DataModel::Adversarial {
                generator: rest.unwrap_or("").parse()?,
            },
            "replay" => match rest {
                Some(p) if !p.is_empty() => DataModel::Replay { path: PathBuf::from(p) },
                _ => return Err(Error::Config("replay needs a file path".into())),
            },
            "schedule" => {
                let mut segments = Vec::new();
                for seg in rest.unwrap_or("").split(';').filter(|x| !x.trim().is_empty()) {
                    let (n, m) = seg
                        .split_once('=')
                        .ok_or_else(|| Error::Config(format!("schedule segment `{seg}` needs N=MODEL")))?;
                    let n: u64 = n
                        .trim()
                        .parse()
                        .map_err(|_| Error::Config(format!("bad segment length `{n}`")))?;
                    segments.push((n, m.parse()?));
                }
                DataModel::Schedule { segments }
            }
            other => return Err(Error::Config(format!("unknown model `{other}`"))),
        };
        model.validate()?;
        Ok(model)
    }
}

/// Parsed replay file: increments with their source line numbers.
#[derive(Debug, Clone, PartialEq)]
pub struct ReplayData {
    pub path: PathBuf,
    pub steps: Vec<(f64, f64)>,
    pub lines: Vec<usize>,
}

/// Read a replay file: one `dS dV` pair per line (whitespace or comma
/// separated); blank lines and `#` comments are skipped.
pub fn load_replay(path: &Path) -> Result<ReplayData> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_replay(&text, path)
}

pub fn parse_replay(text: &str, path: &Path) -> Result<ReplayData> {
    let mut steps = Vec::new();
    let mut lines = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let parse_err = |msg: String| Error::Parse {
            path: path.to_path_buf(),
            line: i + 1,
            msg,
        };
        let toks: Vec<&str> = line
            .split(|c: char| c.is_whitespace() || c == ',')
            .filter(|t| !t.is_empty())
            .collect();
        if toks.len() != 2 {
            return Err(parse_err(format!("expected two numbers, found {}", toks.len())));
        }
        let mut vals = [0.0; 2];
        for (k, t) in toks.iter().enumerate() {
            vals[k] = t.parse::<f64>().map_err(|_| parse_err(format!("`{t}` is not a number")))?;
            if !vals[k].is_finite() {
                return Err(parse_err(format!("`{t}` is not finite")));
            }
        }
        steps.push((vals[0], vals[1]));
        lines.push(i + 1);
    }
    Ok(ReplayData {
        path: path.to_path_buf(),
        steps,
        lines,
    })
}

fn sample_stochastic(model: &DataModel, rng: &mut RngStream) -> Increment {
    match model {
        DataModel::GaussianIid { mean, sigma, center } => {
            let z: f64 = rng.sample(StandardNormal);
            let x = mean + sigma * z;
            Increment {
                x,
                ds: x - center,
                dv: sigma * sigma,
            }
        }
        DataModel::SubGaussianIid {
            mean,
            sigma_proxy,
            shape,
            center,
        } => {
            let noise = match shape {
                SubGaussianShape::Bounded => {
                    let a = sigma_proxy * 3f64.sqrt();
                    rng.random_range(-a..=a)
                }
                SubGaussianShape::TruncatedNormal => loop {
                    let z: f64 = rng.sample(StandardNormal);
                    if z.abs() <= 2.0 {
                        break sigma_proxy * z;
                    }
                },
            };
            let x = mean + noise;
            Increment {
                x,
                ds: x - center,
                dv: sigma_proxy * sigma_proxy,
            }
        }
        DataModel::SymmetricIid { dist } => {
            let x = match *dist {
                SymmetricDist::RademacherScale { scale } => {
                    if rng.random::<bool>() {
                        scale
                    } else {
                        -scale
                    }
                }
                SymmetricDist::Cauchy => {
                    // Ratio of independent normals; symmetric by construction.
                    let a: f64 = rng.sample(StandardNormal);
                    let b: f64 = rng.sample(StandardNormal);
                    a / b
                }
                SymmetricDist::GaussMixtureAtom { atom } => {
                    if rng.random::<f64>() < atom {
                        0.0
                    } else {
                        rng.sample(StandardNormal)
                    }
                }
            };
            Increment { x, ds: x, dv: x * x }
        }
        DataModel::FiniteVarianceIid { dist } => {
            let x = match *dist {
                FiniteVarianceDist::TwoPoint { p, second_moment } => {
                    if rng.random::<f64>() < p {
                        (second_moment * (1.0 - p) / p).sqrt()
                    } else {
                        -(second_moment * p / (1.0 - p)).sqrt()
                    }
                }
                FiniteVarianceDist::CenteredExponential { rate } => {
                    let e: f64 = Exp::new(rate).expect("validated rate").sample(rng);
                    e - 1.0 / rate
                }
            };
            Increment {
                x,
                ds: x,
                dv: (x * x + 2.0 * dist.second_moment()) / 3.0,
            }
        }
        _ => unreachable!("not a stochastic i.i.d. model"),
    }
}

/// One increment of `model` at step `t >= 1`, given the running `(s, v)`
/// before the step. Replay and schedule models need a [`PathGenerator`].
pub fn next_increment(model: &DataModel, rng: &mut RngStream, t: u64, s: f64, v: f64) -> Result<Increment> {
    match model {
        DataModel::Adversarial { generator } => Ok(generator.step(t, s, v)),
        DataModel::Replay { .. } | DataModel::Schedule { .. } => Err(Error::Config(
            "replay and schedule models are driven by a PathGenerator".into(),
        )),
        m => Ok(sample_stochastic(m, rng)),
    }
}

/// Deterministic adversarial sequence of length `t_max`.
pub fn adversarial_sequence(generator: &AdversarialGenerator, t_max: u64) -> Result<Vec<(f64, f64)>> {
    generator.validate()?;
    if t_max == 0 {
        return Err(Error::Config("T must be at least 1".into()));
    }
    let (mut s, mut v) = (0.0, 0.0);
    let mut out = Vec::with_capacity(t_max as usize);
    for t in 1..=t_max {
        let inc = generator.step(t, s, v);
        s += inc.ds;
        v += inc.dv;
        out.push((inc.ds, inc.dv));
    }
    Ok(out)
}

/// Stateful driver of a model along one path.
#[derive(Debug, Clone)]
pub struct PathGenerator {
    model: DataModel,
    rng: RngStream,
    replay: Option<std::sync::Arc<ReplayData>>,
    t: u64,
    s: f64,
    v: f64,
}

impl PathGenerator {
    pub fn new(model: DataModel, rng: RngStream) -> Result<Self> {
        model.validate()?;
        let replay = Self::load_for(&model)?;
        Ok(Self::from_parts(model, rng, replay))
    }

    /// Share an already loaded replay file between generators.
    pub fn with_replay(model: DataModel, rng: RngStream, replay: Option<std::sync::Arc<ReplayData>>) -> Result<Self> {
        model.validate()?;
        Ok(Self::from_parts(model, rng, replay))
    }

    fn from_parts(model: DataModel, rng: RngStream, replay: Option<std::sync::Arc<ReplayData>>) -> Self {
        PathGenerator {
            model,
            rng,
            replay,
            t: 0,
            s: 0.0,
            v: 0.0,
        }
    }

    /// Load the replay file a model refers to, if any.
    pub fn load_for(model: &DataModel) -> Result<Option<std::sync::Arc<ReplayData>>> {
        match model {
            DataModel::Replay { path } => Ok(Some(std::sync::Arc::new(load_replay(path)?))),
            DataModel::Schedule { segments } => {
                for (_, m) in segments {
                    if let DataModel::Replay { path } = m {
                        return Ok(Some(std::sync::Arc::new(load_replay(path)?)));
                    }
                }
                Ok(None)
            }
            _ => Ok(None),
        }
    }

    /// Number of steps available, `None` when unbounded.
    pub fn len_hint(&self) -> Option<u64> {
        match (&self.model, &self.replay) {
            (DataModel::Replay { .. }, Some(r)) => Some(r.steps.len() as u64),
            _ => None,
        }
    }

    pub fn t(&self) -> u64 {
        self.t
    }

    fn model_at(&self, t: u64) -> (&DataModel, u64) {
        match &self.model {
            DataModel::Schedule { segments } => {
                let mut start = 0;
                for (i, (n, m)) in segments.iter().enumerate() {
                    if t <= start + n || i + 1 == segments.len() {
                        return (m, t - start);
                    }
                    start += n;
                }
                unreachable!("schedule validated non-empty")
            }
            m => (m, t),
        }
    }

    /// Next increment, or `None` once a replay file is exhausted.
    pub fn next_increment(&mut self) -> Option<Increment> {
        let t = self.t + 1;
        let (model, local_t) = self.model_at(t);
        let inc = match model {
            DataModel::Replay { .. } => {
                let r = self.replay.as_ref()?;
                let &(ds, dv) = r.steps.get((local_t - 1) as usize)?;
                Increment { x: ds, ds, dv }
            }
            DataModel::Adversarial { generator } => generator.step(local_t, self.s, self.v),
            m => {
                let m = m.clone();
                sample_stochastic(&m, &mut self.rng)
            }
        };
        self.t = t;
        self.s += inc.ds;
        self.v += inc.dv;
        Some(inc)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn streams_are_reproducible_and_distinct() {
        let mut a = RngStream::new(7, 3);
        let mut b = RngStream::new(7, 3);
        let mut c = RngStream::new(7, 4);
        let xa: Vec<u64> = (0..8).map(|_| a.next_u64()).collect();
        let xb: Vec<u64> = (0..8).map(|_| b.next_u64()).collect();
        let xc: Vec<u64> = (0..8).map(|_| c.next_u64()).collect();
        assert_eq!(xa, xb);
        assert_ne!(xa, xc);
    }

    #[test]
    fn increment_rules() {
        let mut rng = RngStream::new(1, 0);
        let g = next_increment(&DataModel::gaussian(), &mut rng, 1, 0.0, 0.0).unwrap();
        assert_eq!((g.ds, g.dv), (g.x, 1.0));
        let cauchy = DataModel::SymmetricIid { dist: SymmetricDist::Cauchy };
        let c = next_increment(&cauchy, &mut rng, 1, 0.0, 0.0).unwrap();
        assert_eq!((c.ds, c.dv), (c.x, c.x * c.x));
        let fv = DataModel::FiniteVarianceIid {
            dist: FiniteVarianceDist::CenteredExponential { rate: 2.0 },
        };
        let f = next_increment(&fv, &mut rng, 1, 0.0, 0.0).unwrap();
        assert!((f.dv - (f.x * f.x + 0.5) / 3.0).abs() < 1e-15);
    }

    #[test]
    fn atom_gives_plateaus() {
        let m = DataModel::SymmetricIid {
            dist: SymmetricDist::GaussMixtureAtom { atom: 0.5 },
        };
        let mut rng = RngStream::new(3, 0);
        let zeros = (0..2000)
            .map(|_| next_increment(&m, &mut rng, 1, 0.0, 0.0).unwrap())
            .filter(|i| i.x == 0.0)
            .inspect(|i| assert_eq!((i.ds, i.dv), (0.0, 0.0)))
            .count();
        assert!(zeros > 850 && zeros < 1150, "{zeros}");
    }

    #[test]
    fn adversarial_examples() {
        let seq = adversarial_sequence(&AdversarialGenerator::LinearDrift { a: 2.0 }, 10).unwrap();
        let (s, v) = seq.iter().fold((0.0, 0.0), |(s, v), (a, b)| (s + a, v + b));
        assert_eq!(s / v, 2.0);

        let b = AdversarialGenerator::BranchBoundary {
            target: BoundaryTarget::Unit,
            offset: 0.0,
        };
        let (mut s, mut v) = (0.0, 0.0);
        for (ds, dv) in adversarial_sequence(&b, 50).unwrap() {
            s += ds;
            v += dv;
            assert_eq!(s / v, 1.0);
        }

        let sp = adversarial_sequence(&AdversarialGenerator::Spike { at: 5, size: 1e6 }, 10).unwrap();
        assert_eq!(sp[4], (1e6, 1.0));
        assert_eq!(sp[3], (0.0, 1.0));
        assert!(adversarial_sequence(&b, 0).is_err());
        assert!(matches!("nope".parse::<AdversarialGenerator>(), Err(Error::UnknownGenerator(_))));
    }

    #[test]
    fn model_strings_round_trip() {
        for s in [
            "gaussian",
            "drift:0.5",
            "gaussian:0.5:1:0.5",
            "subgaussian:bounded:1:0:0",
            "subgaussian:truncnorm:2:0:0",
            "symmetric:cauchy",
            "symmetric:rademacher:1",
            "symmetric:mixture:0.5",
            "finite:twopoint:0.2:1",
            "finite:exponential:1",
            "adversarial:drift:2",
            "adversarial:boundary:interior:0.000001",
            "replay:/tmp/x.txt",
            "schedule:100=gaussian;50=symmetric:cauchy",
        ] {
            let m: DataModel = s.parse().unwrap();
            let again: DataModel = m.to_string().parse().unwrap();
            assert_eq!(m, again, "{s}");
        }
        assert!("gaussian:0:-1".parse::<DataModel>().is_err());
        assert!("weird".parse::<DataModel>().is_err());
    }

    #[test]
    fn replay_parsing() {
        let p = Path::new("mem");
        let r = parse_replay("# header\n1.0 2.0\n\n-0.5, 0.25\n", p).unwrap();
        assert_eq!(r.steps, vec![(1.0, 2.0), (-0.5, 0.25)]);
        assert_eq!(r.lines, vec![2, 4]);
        match parse_replay("1 2\n3 x\n", p) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("{other:?}"),
        }
        assert!(parse_replay("", p).unwrap().steps.is_empty());
    }

    #[test]
    fn schedule_switches_models() {
        let m: DataModel = "schedule:3=adversarial:drift:2;2=adversarial:drift:-1".parse().unwrap();
        let mut g = PathGenerator::new(m, RngStream::new(0, 0)).unwrap();
        let xs: Vec<f64> = (0..6).map(|_| g.next_increment().unwrap().ds).collect();
        assert_eq!(xs, vec![2.0, 2.0, 2.0, -1.0, -1.0, -1.0]);
    }
}
