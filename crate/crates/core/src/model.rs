//! Finite-width models: the learnable-activation random feature model and the
//! fixed-activation baselines it is compared against.

use alloc::format;
use alloc::vec::Vec;

use crate::basis::{ActivationGrid, ActivationWeights};
use crate::linalg::{dot, norm, Matrix};
use crate::rng::{self, stream};
use crate::{Error, Result};

/// Frozen first-layer directions `w_m ~ N(0, I_d)`, one per row.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureBank {
    weights: Matrix,
    seed: u64,
}

/// Draws `n_features` i.i.d. standard Gaussian directions in `dim` dimensions.
pub fn sample_features(dim: usize, n_features: usize, seed: u64) -> Result<FeatureBank> {
    FeatureBank::sample(dim, n_features, seed)
}

impl FeatureBank {
    pub fn sample(dim: usize, n_features: usize, seed: u64) -> Result<Self> {
        if dim == 0 || n_features == 0 {
            return Err(Error::invalid("feature bank needs dim >= 1 and n_features >= 1"));
        }
        let mut rng = rng::seeded(seed, stream::FEATURES);
        let data = rng::normal_vec(&mut rng, dim * n_features);
        Ok(FeatureBank {
            weights: Matrix::from_vec(n_features, dim, data)?,
            seed,
        })
    }

    /// Wraps explicit directions, e.g. read back from a checkpoint.
    pub fn from_weights(weights: Matrix, seed: u64) -> Result<Self> {
        if weights.rows() == 0 || weights.cols() == 0 {
            return Err(Error::invalid("feature bank needs dim >= 1 and n_features >= 1"));
        }
        if !weights.as_slice().iter().all(|w| w.is_finite()) {
            return Err(Error::invalid("feature directions must be finite"));
        }
        Ok(FeatureBank { weights, seed })
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.weights.cols()
    }

    #[inline]
    pub fn n_features(&self) -> usize {
        self.weights.rows()
    }

    #[inline]
    pub fn seed(&self) -> u64 {
        self.seed
    }

    #[inline]
    pub fn weights(&self) -> &Matrix {
        &self.weights
    }

    /// `w_m·x` for every feature.
    pub fn project(&self, x: &[f64]) -> Result<Vec<f64>> {
        Error::check_len("input dimension", self.dim(), x.len())?;
        Ok(self.weights.iter_rows().map(|w| dot(w, x)).collect())
    }

    pub(crate) fn project_into(&self, x: &[f64], out: &mut [f64]) {
        debug_assert_eq!(out.len(), self.n_features());
        for (o, w) in out.iter_mut().zip(self.weights.iter_rows()) {
            *o = dot(w, x);
        }
    }
}

/// `(B(x))_{k,m} = B_k(w_m·x)`, an `N × M` matrix.
pub fn feature_matrix(grid: &ActivationGrid, bank: &FeatureBank, x: &[f64]) -> Result<Matrix> {
    let z = bank.project(x)?;
    let mut out = Matrix::zeros(grid.n_basis(), bank.n_features());
    for (m, &zm) in z.iter().enumerate() {
        for k in 0..grid.n_basis() {
            out.set(k, m, grid.basis(k, zm));
        }
    }
    Ok(out)
}

/// `f̂(x; a, v) = (1/M) Σ_m Σ_i a_i B_i(w_m·x) v_m`.
#[derive(Debug, Clone, PartialEq)]
pub struct RflafModel {
    pub(crate) bank: FeatureBank,
    pub(crate) grid: ActivationGrid,
    pub(crate) a: ActivationWeights,
    pub(crate) v: Vec<f64>,
}

impl RflafModel {
    pub fn new(bank: FeatureBank, grid: ActivationGrid, a: ActivationWeights, v: Vec<f64>) -> Result<Self> {
        Error::check_len("activation weights", grid.n_basis(), a.len())?;
        Error::check_len("output weights", bank.n_features(), v.len())?;
        if !v.iter().all(|x| x.is_finite()) {
            return Err(Error::invalid("output weights must be finite"));
        }
        Ok(RflafModel { bank, grid, a, v })
    }

    /// Balanced Gaussian initialization: `a ~ N(0, 1/N)`, `v ~ N(0, 1/M)`, so
    /// both norms start near one.
    pub fn init(bank: FeatureBank, grid: ActivationGrid, seed: u64) -> Result<Self> {
        let mut rng = rng::seeded(seed, stream::INIT);
        let sa = 1.0 / libm::sqrt(grid.n_basis() as f64);
        let sv = 1.0 / libm::sqrt(bank.n_features() as f64);
        let a = (0..grid.n_basis()).map(|_| sa * rng::normal(&mut rng)).collect();
        let v = (0..bank.n_features()).map(|_| sv * rng::normal(&mut rng)).collect();
        Self::new(bank, grid, ActivationWeights::new(a)?, v)
    }

    pub fn bank(&self) -> &FeatureBank {
        &self.bank
    }

    pub fn grid(&self) -> &ActivationGrid {
        &self.grid
    }

    pub fn a(&self) -> &ActivationWeights {
        &self.a
    }

    pub fn v(&self) -> &[f64] {
        &self.v
    }

    pub fn set_params(&mut self, a: &[f64], v: &[f64]) -> Result<()> {
        Error::check_len("activation weights", self.a.len(), a.len())?;
        Error::check_len("output weights", self.v.len(), v.len())?;
        self.a.as_mut_slice().copy_from_slice(a);
        self.v.copy_from_slice(v);
        Ok(())
    }

    /// The learned activation `σ̃(z)`.
    pub fn activation(&self, z: f64) -> f64 {
        self.grid.activation(self.a.as_slice(), z)
    }

    pub fn forward(&self, x: &[f64]) -> Result<f64> {
        Error::check_len("input dimension", self.bank.dim(), x.len())?;
        Ok(self.forward_unchecked(x))
    }

    pub(crate) fn forward_unchecked(&self, x: &[f64]) -> f64 {
        let a = self.a.as_slice();
        let s: f64 = self
            .bank
            .weights
            .iter_rows()
            .zip(&self.v)
            .map(|(w, &vm)| self.grid.activation(a, dot(w, x)) * vm)
            .sum();
        s / self.bank.n_features() as f64
    }

    pub fn forward_batch(&self, x: &Matrix) -> Result<Vec<f64>> {
        if x.rows() > 0 {
            Error::check_len("input dimension", self.bank.dim(), x.cols())?;
        }
        Ok(x.iter_rows().map(|r| self.forward_unchecked(r)).collect())
    }

    /// `√(N/M) ‖a‖₂ ‖v‖₂`, an upper bound on `|f̂(x)|` for every `x`.
    pub fn output_bound(&self) -> f64 {
        let n = self.grid.n_basis() as f64;
        let m = self.bank.n_features() as f64;
        libm::sqrt(n / m) * norm(self.a.as_slice()) * norm(&self.v)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BaselineActivation {
    Relu,
    Tanh,
    /// `exp(-z² / (2·0.5²))`
    Rbf1,
    /// `exp(-(z - 1.5)² / (2·0.5²))`
    Rbf2,
}

impl BaselineActivation {
    pub const ALL: [BaselineActivation; 4] = [Self::Relu, Self::Tanh, Self::Rbf1, Self::Rbf2];

    #[inline]
    pub fn eval(self, z: f64) -> f64 {
        match self {
            Self::Relu => z.max(0.0),
            Self::Tanh => libm::tanh(z),
            Self::Rbf1 => libm::exp(-z * z / 0.5),
            Self::Rbf2 => {
                let t = z - 1.5;
                libm::exp(-t * t / 0.5)
            }
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::Relu => "relu",
            Self::Tanh => "tanh",
            Self::Rbf1 => "rbf1",
            Self::Rbf2 => "rbf2",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|a| a.name() == name)
    }
}

/// Random feature model with a fixed activation: `(1/W) Σ_m act(w_m·x) v_m`.
#[derive(Debug, Clone, PartialEq)]
pub struct BaselineRfModel {
    pub(crate) bank: FeatureBank,
    pub(crate) activation: BaselineActivation,
    pub(crate) v: Vec<f64>,
}

impl BaselineRfModel {
    pub fn new(bank: FeatureBank, activation: BaselineActivation, v: Vec<f64>) -> Result<Self> {
        Error::check_len("output weights", bank.n_features(), v.len())?;
        Ok(BaselineRfModel { bank, activation, v })
    }

    /// A baseline whose width matches the parameter count `M + N` of the
    /// learnable-activation model it is compared with.
    pub fn paired(bank: FeatureBank, activation: BaselineActivation, v: Vec<f64>, rflaf: &RflafModel) -> Result<Self> {
        let expected = rflaf.bank.n_features() + rflaf.grid.n_basis();
        if bank.n_features() != expected {
            return Err(Error::invalid(format!(
                "baseline width {} must equal M + N = {expected}",
                bank.n_features()
            )));
        }
        Self::new(bank, activation, v)
    }

    /// `v ~ N(0, 1/W)`.
    pub fn init(bank: FeatureBank, activation: BaselineActivation, seed: u64) -> Result<Self> {
        let mut rng = rng::seeded(seed, stream::INIT);
        let s = 1.0 / libm::sqrt(bank.n_features() as f64);
        let v = (0..bank.n_features()).map(|_| s * rng::normal(&mut rng)).collect();
        Self::new(bank, activation, v)
    }

    pub fn width(&self) -> usize {
        self.bank.n_features()
    }

    pub fn activation(&self) -> BaselineActivation {
        self.activation
    }

    pub fn bank(&self) -> &FeatureBank {
        &self.bank
    }

    pub fn v(&self) -> &[f64] {
        &self.v
    }

    pub fn forward(&self, x: &[f64]) -> Result<f64> {
        Error::check_len("input dimension", self.bank.dim(), x.len())?;
        Ok(self.forward_unchecked(x))
    }

    pub(crate) fn forward_unchecked(&self, x: &[f64]) -> f64 {
        let s: f64 = self
            .bank
            .weights
            .iter_rows()
            .zip(&self.v)
            .map(|(w, &vm)| self.activation.eval(dot(w, x)) * vm)
            .sum();
        s / self.width() as f64
    }

    pub fn forward_batch(&self, x: &Matrix) -> Result<Vec<f64>> {
        if x.rows() > 0 {
            Error::check_len("input dimension", self.bank.dim(), x.cols())?;
        }
        Ok(x.iter_rows().map(|r| self.forward_unchecked(r)).collect())
    }
}

/// Free-function form of [`BaselineRfModel::forward`].
pub fn baseline_forward(model: &BaselineRfModel, x: &[f64]) -> Result<f64> {
    model.forward(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::build_grid;
    use alloc::vec;
    use proptest::prelude::*;
    use rand::Rng;

    fn brute_forward(m: &RflafModel, x: &[f64]) -> f64 {
        let (nb, nf) = (m.grid.n_basis(), m.bank.n_features());
        let h = m.grid.width();
        let mut s = 0.0;
        for mi in 0..nf {
            let w = m.bank.weights.row(mi);
            let z: f64 = (0..x.len()).map(|j| w[j] * x[j]).sum();
            for k in 0..nb {
                let c = m.grid.centers()[k];
                s += m.a.as_slice()[k] * libm::exp(-(z - c) * (z - c) / (2.0 * h * h)) * m.v[mi];
            }
        }
        s / nf as f64
    }

    fn random_model(seed: u64, d: usize, nf: usize, nb: usize) -> RflafModel {
        let mut rng = rng::seeded(seed, 100);
        let bank = FeatureBank::sample(d, nf, seed).unwrap();
        let grid = build_grid(-2.0, 2.0, nb.max(2), rng.random_range(0.1..1.0)).unwrap();
        let a = rng::normal_vec(&mut rng, grid.n_basis());
        let v = rng::normal_vec(&mut rng, nf);
        RflafModel::new(bank, grid, ActivationWeights::new(a).unwrap(), v).unwrap()
    }

    #[test]
    fn feature_bank_determinism_and_shape() {
        let a = sample_features(2, 1000, 0).unwrap();
        let b = sample_features(2, 1000, 0).unwrap();
        assert_eq!((a.n_features(), a.dim()), (1000, 2));
        assert_eq!(a, b);
        assert_ne!(a, sample_features(2, 1000, 1).unwrap());
        assert_eq!(sample_features(1, 1, 3).unwrap().weights().as_slice().len(), 1);
        assert!(sample_features(0, 3, 0).is_err());
        assert!(sample_features(3, 0, 0).is_err());
    }

    #[test]
    fn feature_bank_moments() {
        let bank = sample_features(2, 100_000, 11).unwrap();
        for j in 0..2 {
            let col: Vec<f64> = bank.weights().iter_rows().map(|r| r[j]).collect();
            let mean = col.iter().sum::<f64>() / col.len() as f64;
            let var = col.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / col.len() as f64;
            assert!(mean.abs() <= 0.02, "{mean}");
            assert!((var - 1.0).abs() <= 0.2, "{var}");
        }
    }

    #[test]
    fn feature_matrix_examples() {
        let grid = build_grid(-1.0, 1.0, 4, 0.3).unwrap(); // centers -0.5, 0, 0.5, 1
        let bank = sample_features(3, 5, 2).unwrap();
        let fm = feature_matrix(&grid, &bank, &[0.0; 3]).unwrap();
        assert!((0..5).all(|m| fm.get(1, m) == 1.0));

        let bank1 = sample_features(2, 1, 4).unwrap();
        let grid1 = build_grid(0.0, 1.0, 2, 0.2).unwrap();
        let x = [0.3, -0.8];
        let fm = feature_matrix(&grid1, &bank1, &x).unwrap();
        let z = bank1.project(&x).unwrap()[0];
        let direct = crate::basis::rbf_features(&grid1, z);
        assert_eq!((fm.get(0, 0), fm.get(1, 0)), (direct[0], direct[1]));
        assert!(feature_matrix(&grid1, &bank1, &[1.0]).is_err());
    }

    #[test]
    fn feature_matrix_matches_double_loop() {
        let grid = build_grid(-2.0, 2.0, 6, 0.5).unwrap();
        let bank = sample_features(3, 7, 9).unwrap();
        let x = [0.4, -1.1, 0.25];
        let fm = feature_matrix(&grid, &bank, &x).unwrap();
        for k in 0..6 {
            for m in 0..7 {
                let w = bank.weights().row(m);
                let z = w[0] * x[0] + w[1] * x[1] + w[2] * x[2];
                let c = grid.centers()[k];
                let expected = libm::exp(-(z - c) * (z - c) / (2.0 * 0.25));
                assert!((fm.get(k, m) - expected).abs() < 1e-15);
                assert!(fm.get(k, m) > 0.0 && fm.get(k, m) <= 1.0);
            }
        }
    }

    #[test]
    fn forward_examples() {
        let mut m = random_model(1, 2, 5, 3);
        let zero = vec![0.0; 3];
        let v = m.v.clone();
        m.set_params(&zero, &v).unwrap();
        assert_eq!(m.forward(&[0.3, 0.2]).unwrap(), 0.0);

        let bank = sample_features(2, 1, 3).unwrap();
        let grid = build_grid(0.0, 1.0, 2, 0.3).unwrap();
        let model = RflafModel::new(bank.clone(), grid.clone(), ActivationWeights::new(vec![1.0, 0.0]).unwrap(), vec![1.0]).unwrap();
        let x = [0.7, -0.1];
        let z = bank.project(&x).unwrap()[0];
        assert_eq!(model.forward(&x).unwrap(), grid.basis(0, z));
        assert!(model.forward(&[1.0]).is_err());
    }

    #[test]
    fn forward_matches_brute_force() {
        for seed in 0..20 {
            let m = random_model(seed, 1 + seed as usize % 4, 1 + seed as usize % 8, 2 + seed as usize % 7);
            let x = rng::normal_vec(&mut rng::seeded(seed, 200), m.bank.dim());
            assert!((m.forward(&x).unwrap() - brute_forward(&m, &x)).abs() <= 1e-12);
        }
        let m = random_model(42, 2, 5, 3);
        let x = [0.5, -0.5];
        assert!((m.forward(&x).unwrap() - brute_forward(&m, &x)).abs() <= 1e-12);
    }

    #[test]
    fn batch_matches_scalar_loop() {
        let m = random_model(3, 2, 6, 4);
        assert!(m.forward_batch(&Matrix::zeros(0, 2)).unwrap().is_empty());
        let mut rng = rng::seeded(5, 300);
        let x = Matrix::from_vec(100, 2, rng::normal_vec(&mut rng, 200)).unwrap();
        let batch = m.forward_batch(&x).unwrap();
        for (i, row) in x.iter_rows().enumerate() {
            assert_eq!(batch[i].to_bits(), m.forward(row).unwrap().to_bits());
        }
        let single = x.select_rows(&[7]);
        assert_eq!(m.forward_batch(&single).unwrap(), vec![m.forward(x.row(7)).unwrap()]);
    }

    #[test]
    fn one_hot_activation_is_a_single_rbf_model() {
        let m0 = random_model(8, 3, 6, 5);
        for k in 0..m0.grid.n_basis() {
            let mut a = vec![0.0; m0.grid.n_basis()];
            a[k] = 1.0;
            let mut m = m0.clone();
            let v = m.v.clone();
            m.set_params(&a, &v).unwrap();
            let x = [0.2, -0.4, 0.9];
            let z = m.bank.project(&x).unwrap();
            let expected: f64 = z.iter().zip(&v).map(|(&zm, vm)| m.grid.basis(k, zm) * vm).sum::<f64>() / 6.0;
            assert!((m.forward(&x).unwrap() - expected).abs() < 1e-15);
        }
    }

    #[test]
    fn baseline_examples() {
        let bank = sample_features(1, 3, 0).unwrap();
        let neg = bank.weights().iter_rows().map(|r| -r[0].abs()).collect::<Vec<_>>();
        let bank_neg = FeatureBank { weights: Matrix::from_vec(3, 1, neg).unwrap(), seed: 0 };
        let relu = BaselineRfModel::new(bank_neg, BaselineActivation::Relu, vec![1.0; 3]).unwrap();
        assert_eq!(relu.forward(&[1.0]).unwrap(), 0.0);

        let tanh = BaselineRfModel::new(bank.clone(), BaselineActivation::Tanh, vec![0.0; 3]).unwrap();
        assert_eq!(baseline_forward(&tanh, &[0.4]).unwrap(), 0.0);

        let one = FeatureBank { weights: Matrix::from_vec(1, 1, vec![1.0]).unwrap(), seed: 0 };
        let rbf2 = BaselineRfModel::new(one, BaselineActivation::Rbf2, vec![1.0]).unwrap();
        assert_eq!(rbf2.forward(&[1.5]).unwrap(), 1.0);
        assert!((BaselineActivation::Rbf1.eval(0.5) - libm::exp(-0.5)).abs() < 1e-15);
    }

    #[test]
    fn paired_baseline_enforces_width() {
        let m = random_model(0, 2, 5, 3);
        let ok = sample_features(2, 8, 1).unwrap();
        assert!(BaselineRfModel::paired(ok, BaselineActivation::Tanh, vec![0.0; 8], &m).is_ok());
        let bad = sample_features(2, 7, 1).unwrap();
        assert!(BaselineRfModel::paired(bad, BaselineActivation::Tanh, vec![0.0; 7], &m).is_err());
        assert!(BaselineActivation::from_name("rbf2") == Some(BaselineActivation::Rbf2));
        assert!(BaselineActivation::from_name("gelu").is_none());
    }

    proptest! {
        #[test]
        fn bilinear_in_a_and_v(seed in 0u64..1000, alpha in -3.0f64..3.0, beta in -3.0f64..3.0) {
            let m = random_model(seed, 2, 6, 5);
            let mut rng = rng::seeded(seed, 400);
            let x = rng::normal_vec(&mut rng, 2);
            let a2 = rng::normal_vec(&mut rng, 5);
            let v2 = rng::normal_vec(&mut rng, 6);
            let eval = |a: &[f64], v: &[f64]| {
                let mut mm = m.clone();
                mm.set_params(a, v).unwrap();
                mm.forward(&x).unwrap()
            };
            let a1 = m.a.as_slice().to_vec();
            let v1 = m.v.clone();
            let mix_a: Vec<f64> = a1.iter().zip(&a2).map(|(p, q)| alpha * p + beta * q).collect();
            let lhs = eval(&mix_a, &v1);
            let rhs = alpha * eval(&a1, &v1) + beta * eval(&a2, &v1);
            prop_assert!((lhs - rhs).abs() <= 1e-12 * (1.0 + lhs.abs()));
            let mix_v: Vec<f64> = v1.iter().zip(&v2).map(|(p, q)| alpha * p + beta * q).collect();
            let lhs = eval(&a1, &mix_v);
            let rhs = alpha * eval(&a1, &v1) + beta * eval(&a1, &v2);
            prop_assert!((lhs - rhs).abs() <= 1e-12 * (1.0 + lhs.abs()));
        }

        #[test]
        fn output_bound_holds(seed in 0u64..2000) {
            let m = random_model(seed, 1 + (seed % 4) as usize, 1 + (seed % 9) as usize, 2 + (seed % 11) as usize);
            let x = rng::normal_vec(&mut rng::seeded(seed, 500), m.bank.dim());
            prop_assert!(m.forward(&x).unwrap().abs() <= m.output_bound() + 1e-12);
        }
    }
}
