//! Synthetic regression targets `f(x) = E_w[σ(w·x) v(w)]` with
//! `v(w) = c · max(b1·w, b2·w)`, and datasets drawn from them.
//!
//! The expectation is replaced by an average over a frozen sample of `w`
//! (seeded by the spec), so a target is one fixed deterministic function.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::kernel::McEstimate;
use crate::linalg::{dot, Matrix};
use crate::rng::{self, stream};
use crate::{Error, Result};

/// Number of fresh inputs used to estimate `E_x|f(x)|` during calibration.
pub const CALIBRATION_POINTS: usize = 10_000;
pub const DEFAULT_MC_SAMPLES: usize = 100_000;
pub const MIN_MC_SAMPLES: usize = 1_000;

/// Piecewise-linear activation through sorted knots, zero outside them.
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewiseLinear {
    knots: Vec<(f64, f64)>,
}

impl PiecewiseLinear {
    pub fn new(knots: Vec<(f64, f64)>) -> Result<Self> {
        if knots.len() < 2 {
            return Err(Error::invalid("activation table needs at least two knots"));
        }
        if !knots.iter().all(|(z, s)| z.is_finite() && s.is_finite()) {
            return Err(Error::invalid("activation table entries must be finite"));
        }
        if !knots.windows(2).all(|w| w[0].0 < w[1].0) {
            return Err(Error::invalid("activation table abscissae must be strictly increasing"));
        }
        Ok(PiecewiseLinear { knots })
    }

    pub fn knots(&self) -> &[(f64, f64)] {
        &self.knots
    }

    pub fn eval(&self, z: f64) -> f64 {
        let (first, last) = (self.knots[0], self.knots[self.knots.len() - 1]);
        if !(z >= first.0 && z <= last.0) {
            return 0.0;
        }
        let j = self.knots.partition_point(|&(k, _)| k <= z);
        if j == self.knots.len() {
            return last.1;
        }
        let (z0, s0) = self.knots[j - 1];
        let (z1, s1) = self.knots[j];
        s0 + (s1 - s0) * (z - z0) / (z1 - z0)
    }
}

/// Target activations.
#[derive(Debug, Clone, PartialEq)]
pub enum Sigma {
    /// `sin(πz)` on `[-1, 1]`
    S1,
    /// `sin(πz)` on `[0, 1]`
    S2,
    /// `-sin(π(z+0.5))` on `[-1.5, -0.5]` plus `sin(π(z-0.5))` on `[0.5, 1.5]`
    S3,
    Table(PiecewiseLinear),
}

impl Sigma {
    #[inline]
    pub fn eval(&self, z: f64) -> f64 {
        match self {
            Sigma::S1 => {
                if (-1.0..=1.0).contains(&z) {
                    libm::sin(PI * z)
                } else {
                    0.0
                }
            }
            Sigma::S2 => {
                if (0.0..=1.0).contains(&z) {
                    libm::sin(PI * z)
                } else {
                    0.0
                }
            }
            Sigma::S3 => {
                if (-1.5..=-0.5).contains(&z) {
                    -libm::sin(PI * (z + 0.5))
                } else if (0.5..=1.5).contains(&z) {
                    libm::sin(PI * (z - 0.5))
                } else {
                    0.0
                }
            }
            Sigma::Table(t) => t.eval(z),
        }
    }

    /// Smallest closed interval outside which the activation vanishes.
    pub fn support(&self) -> (f64, f64) {
        match self {
            Sigma::S1 => (-1.0, 1.0),
            Sigma::S2 => (0.0, 1.0),
            Sigma::S3 => (-1.5, 1.5),
            Sigma::Table(t) => (t.knots[0].0, t.knots[t.knots.len() - 1].0),
        }
    }

    pub fn sup_norm(&self) -> f64 {
        match self {
            Sigma::S1 | Sigma::S2 | Sigma::S3 => 1.0,
            Sigma::Table(t) => t.knots.iter().map(|k| k.1.abs()).fold(0.0, f64::max),
        }
    }

    /// Parses the built-in activations by [`Sigma::name`].
    pub fn from_name(name: &str) -> Option<Self> {
        match name {
            "s1" => Some(Sigma::S1),
            "s2" => Some(Sigma::S2),
            "s3" => Some(Sigma::S3),
            _ => None,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Sigma::S1 => "s1",
            Sigma::S2 => "s2",
            Sigma::S3 => "s3",
            Sigma::Table(_) => "table",
        }
    }
}

pub fn sigma_eval(kind: &Sigma, z: f64) -> f64 {
    kind.eval(z)
}

/// Unit axis vectors `e_1`, `e_2` (`-e_1` in one dimension).
pub fn default_directions(dim: usize) -> (Vec<f64>, Vec<f64>) {
    let mut b1 = vec![0.0; dim];
    let mut b2 = vec![0.0; dim];
    if dim > 0 {
        b1[0] = 1.0;
    }
    if dim > 1 {
        b2[1] = 1.0;
    } else if dim == 1 {
        b2[0] = -1.0;
    }
    (b1, b2)
}

/// Recipe for a synthetic target.
#[derive(Debug, Clone, PartialEq)]
pub struct TargetSpec {
    pub sigma: Sigma,
    pub b1: Vec<f64>,
    pub b2: Vec<f64>,
    pub calib: f64,
    pub mc_samples: usize,
    pub seed: u64,
}

impl TargetSpec {
    /// Default directions, unit calibration and `10⁵` Monte-Carlo samples.
    pub fn new(sigma: Sigma, dim: usize, seed: u64) -> Self {
        let (b1, b2) = default_directions(dim);
        TargetSpec {
            sigma,
            b1,
            b2,
            calib: 1.0,
            mc_samples: DEFAULT_MC_SAMPLES,
            seed,
        }
    }

    pub fn dim(&self) -> usize {
        self.b1.len()
    }

    pub fn validate(&self) -> Result<()> {
        if self.b1.is_empty() {
            return Err(Error::invalid("target directions must be non-empty"));
        }
        Error::check_len("target directions", self.b1.len(), self.b2.len())?;
        if self.b1 == self.b2 {
            return Err(Error::invalid("target directions b1 and b2 must differ"));
        }
        if !self.b1.iter().chain(&self.b2).all(|x| x.is_finite()) || !self.calib.is_finite() {
            return Err(Error::invalid("target directions and calibration must be finite"));
        }
        if self.mc_samples < MIN_MC_SAMPLES {
            return Err(Error::invalid(format!(
                "target needs at least {MIN_MC_SAMPLES} Monte-Carlo samples, got {}",
                self.mc_samples
            )));
        }
        Ok(())
    }
}

/// A target with its `w`-sample drawn and `max(b1·w, b2·w)` precomputed.
#[derive(Debug, Clone)]
pub struct Target {
    spec: TargetSpec,
    w: Matrix,
    vw: Vec<f64>,
}

impl Target {
    pub fn new(spec: TargetSpec) -> Result<Self> {
        spec.validate()?;
        let d = spec.dim();
        let mut rng = rng::seeded(spec.seed, stream::TARGET);
        let w = Matrix::from_vec(spec.mc_samples, d, rng::normal_vec(&mut rng, spec.mc_samples * d))?;
        let vw = w
            .iter_rows()
            .map(|r| dot(&spec.b1, r).max(dot(&spec.b2, r)))
            .collect();
        Ok(Target { spec, w, vw })
    }

    pub fn spec(&self) -> &TargetSpec {
        &self.spec
    }

    /// Monte-Carlo value of `f(x)` over the frozen sample, with its standard error.
    pub fn eval(&self, x: &[f64]) -> Result<McEstimate> {
        Error::check_len("input dimension", self.spec.dim(), x.len())?;
        Ok(self.eval_unchecked(x))
    }

    fn eval_unchecked(&self, x: &[f64]) -> McEstimate {
        let c = self.spec.calib;
        let sigma = &self.spec.sigma;
        McEstimate::from_samples(
            self.w
                .iter_rows()
                .zip(&self.vw)
                .map(|(w, &vw)| sigma.eval(dot(w, x)) * (c * vw)),
        )
    }

    /// `f(x)` only.
    pub fn value(&self, x: &[f64]) -> Result<f64> {
        Error::check_len("input dimension", self.spec.dim(), x.len())?;
        Ok(self.value_unchecked(x))
    }

    fn value_unchecked(&self, x: &[f64]) -> f64 {
        let c = self.spec.calib;
        let sigma = &self.spec.sigma;
        let s: f64 = self
            .w
            .iter_rows()
            .zip(&self.vw)
            .map(|(w, &vw)| sigma.eval(dot(w, x)) * (c * vw))
            .sum();
        s / self.vw.len() as f64
    }

    /// Mean of `|f(x)|` over `points` fresh standard-Gaussian inputs.
    pub fn mean_abs(&self, points: usize, seed: u64) -> f64 {
        let mut rng = rng::seeded(seed, stream::CALIBRATION);
        let d = self.spec.dim();
        let mut x = vec![0.0; d];
        let mut total = 0.0;
        for _ in 0..points {
            x.iter_mut().for_each(|xi| *xi = rng::normal(&mut rng));
            total += self.value_unchecked(&x).abs();
        }
        total / points as f64
    }
}

/// Evaluates the target at `x`. Draws the frozen sample on every call; build a
/// [`Target`] once to evaluate many points.
pub fn target_eval(spec: &TargetSpec, x: &[f64]) -> Result<McEstimate> {
    Target::new(spec.clone())?.eval(x)
}

/// Factor by which `spec.calib` must be multiplied so that `E_x|f(x)| ≈ 1`,
/// estimated on [`CALIBRATION_POINTS`] Gaussian inputs seeded by the spec.
pub fn calibrate(spec: &TargetSpec) -> Result<f64> {
    let target = Target::new(spec.clone())?;
    let mean = target.mean_abs(CALIBRATION_POINTS, spec.seed);
    if !(mean >= 1e-8) {
        return Err(Error::DegenerateTarget(mean));
    }
    Ok(1.0 / mean)
}

/// Regression data with a train/test partition and its provenance.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub x: Matrix,
    pub y: Vec<f64>,
    pub train_idx: Vec<usize>,
    pub test_idx: Vec<usize>,
    pub spec: TargetSpec,
    pub seed: u64,
}

impl Dataset {
    pub fn new(
        x: Matrix,
        y: Vec<f64>,
        train_idx: Vec<usize>,
        test_idx: Vec<usize>,
        spec: TargetSpec,
        seed: u64,
    ) -> Result<Self> {
        let n = x.rows();
        Error::check_len("targets", n, y.len())?;
        Error::check_len("split size", n, train_idx.len() + test_idx.len())?;
        let mut seen = vec![false; n];
        for &i in train_idx.iter().chain(&test_idx) {
            if i >= n || seen[i] {
                return Err(Error::invalid(format!("split index {i} out of range or repeated")));
            }
            seen[i] = true;
        }
        Ok(Dataset {
            x,
            y,
            train_idx,
            test_idx,
            spec,
            seed,
        })
    }

    pub fn len(&self) -> usize {
        self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.x.cols()
    }

    pub fn train_set(&self) -> (Matrix, Vec<f64>) {
        self.subset(&self.train_idx)
    }

    pub fn test_set(&self) -> (Matrix, Vec<f64>) {
        self.subset(&self.test_idx)
    }

    fn subset(&self, idx: &[usize]) -> (Matrix, Vec<f64>) {
        (self.x.select_rows(idx), idx.iter().map(|&i| self.y[i]).collect())
    }

    /// Per-row flag, `true` for test rows.
    pub fn test_mask(&self) -> Vec<bool> {
        let mut mask = vec![false; self.len()];
        for &i in &self.test_idx {
            mask[i] = true;
        }
        mask
    }

    pub fn describe(&self) -> String {
        format!(
            "n={} d={} train={} test={} sigma={} calib={} S={} target_seed={} seed={}",
            self.len(),
            self.dim(),
            self.train_idx.len(),
            self.test_idx.len(),
            self.spec.sigma.name(),
            self.spec.calib,
            self.spec.mc_samples,
            self.spec.seed,
            self.seed
        )
    }
}

/// Draws `n` Gaussian inputs, labels them with the target and splits them.
pub fn gen_dataset(spec: &TargetSpec, n: usize, d: usize, test_fraction: f64, seed: u64) -> Result<Dataset> {
    Error::check_len("target dimension", d, spec.dim())?;
    if !(test_fraction > 0.0 && test_fraction < 1.0) {
        return Err(Error::invalid(format!("test fraction must lie in (0, 1), got {test_fraction}")));
    }
    let target = Target::new(spec.clone())?;
    let mut rng = rng::seeded(seed, stream::DATA_X);
    let x = Matrix::from_vec(n, d, rng::normal_vec(&mut rng, n * d))?;
    let y = x.iter_rows().map(|r| target.value_unchecked(r)).collect();

    let n_test = libm::round(n as f64 * test_fraction) as usize;
    let perm = rng::permutation(&mut rng::seeded(seed, stream::SPLIT), n);
    let mut test_idx = perm[..n_test].to_vec();
    let mut train_idx = perm[n_test..].to_vec();
    test_idx.sort_unstable();
    train_idx.sort_unstable();
    Dataset::new(x, y, train_idx, test_idx, spec.clone(), seed)
}
