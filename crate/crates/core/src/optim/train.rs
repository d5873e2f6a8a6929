use alloc::vec;
use alloc::vec::Vec;

use super::{
    baseline_data_term, rflaf_data_term, rflaf_regularizers, AdamState, LossBreakdown, TrainConfig,
    Workspace,
};
use crate::data::Dataset;
use crate::linalg::Matrix;
use crate::model::{BaselineRfModel, RflafModel};
use crate::rng::{self, stream};
use crate::{Error, Result};

/// Losses after one epoch. `test_mse` is NaN when the test split is empty.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpochRecord {
    pub epoch: usize,
    pub train_total: f64,
    pub train_mse: f64,
    pub test_mse: f64,
}

/// A model with a flat parameter vector and a differentiable objective.
pub trait Trainable: Clone {
    fn dim(&self) -> usize;
    fn params(&self) -> Vec<f64>;
    fn set_params_flat(&mut self, params: &[f64]);

    /// Objective over `rows` of `(x, y)`. When `grad` is given it is overwritten
    /// with the gradient in the layout of [`Trainable::params`].
    fn objective(
        &self,
        x: &Matrix,
        y: &[f64],
        rows: &[usize],
        cfg: &TrainConfig,
        grad: Option<&mut [f64]>,
    ) -> LossBreakdown;
}

impl Trainable for RflafModel {
    fn dim(&self) -> usize {
        self.bank.dim()
    }

    /// `[a; v]`
    fn params(&self) -> Vec<f64> {
        let mut p = self.a.as_slice().to_vec();
        p.extend_from_slice(&self.v);
        p
    }

    fn set_params_flat(&mut self, params: &[f64]) {
        let n = self.a.len();
        self.a.as_mut_slice().copy_from_slice(&params[..n]);
        self.v.copy_from_slice(&params[n..]);
    }

    fn objective(
        &self,
        x: &Matrix,
        y: &[f64],
        rows: &[usize],
        cfg: &TrainConfig,
        grad: Option<&mut [f64]>,
    ) -> LossBreakdown {
        let mut ws = Workspace::default();
        match grad {
            Some(g) => {
                g.fill(0.0);
                let (ga, gv) = g.split_at_mut(self.a.len());
                let mse = rflaf_data_term(self, x, y, rows, Some((&mut *ga, &mut *gv)), &mut ws);
                let (balance, l1) = rflaf_regularizers(self.a.as_slice(), &self.v, cfg, Some((ga, gv)));
                LossBreakdown::new(mse, balance, l1)
            }
            None => {
                let mse = rflaf_data_term(self, x, y, rows, None, &mut ws);
                let (balance, l1) = rflaf_regularizers(self.a.as_slice(), &self.v, cfg, None);
                LossBreakdown::new(mse, balance, l1)
            }
        }
    }
}

/// Baselines are fit on the mean squared error alone.
impl Trainable for BaselineRfModel {
    fn dim(&self) -> usize {
        self.bank.dim()
    }

    fn params(&self) -> Vec<f64> {
        self.v.clone()
    }

    fn set_params_flat(&mut self, params: &[f64]) {
        self.v.copy_from_slice(params);
    }

    fn objective(
        &self,
        x: &Matrix,
        y: &[f64],
        rows: &[usize],
        _cfg: &TrainConfig,
        grad: Option<&mut [f64]>,
    ) -> LossBreakdown {
        let mut ws = Workspace::default();
        let grad = grad.map(|g| {
            g.fill(0.0);
            g
        });
        LossBreakdown::new(baseline_data_term(self, x, y, rows, grad, &mut ws), 0.0, 0.0)
    }
}

/// Mini-batch Adam on the training split, recording losses after every epoch.
///
/// Batches follow a fresh seeded permutation each epoch and gradients are
/// reduced in index order, so equal seeds give bit-identical trajectories.
pub fn train_model<T: Trainable>(model: &T, dataset: &Dataset, cfg: &TrainConfig) -> Result<(T, Vec<EpochRecord>)> {
    cfg.validate()?;
    Error::check_len("input dimension", model.dim(), dataset.dim())?;
    let (x_train, y_train) = dataset.train_set();
    let (x_test, y_test) = dataset.test_set();
    if y_train.is_empty() {
        return Err(Error::invalid("training split is empty"));
    }
    let mut model = model.clone();
    let mut params = model.params();
    let mut adam = AdamState::new(params.len());
    let mut g = vec![0.0; params.len()];
    let mut shuffle = rng::seeded(cfg.seed, stream::SHUFFLE);
    let all_train: Vec<usize> = (0..y_train.len()).collect();
    let all_test: Vec<usize> = (0..y_test.len()).collect();
    let mut history = Vec::with_capacity(cfg.epochs);

    for epoch in 0..cfg.epochs {
        let order = rng::permutation(&mut shuffle, y_train.len());
        for batch in order.chunks(cfg.batch_size) {
            model.objective(&x_train, &y_train, batch, cfg, Some(&mut g));
            adam.update(&mut params, &g, cfg)?;
            model.set_params_flat(&params);
        }
        let train = model.objective(&x_train, &y_train, &all_train, cfg, None);
        let test_mse = if all_test.is_empty() {
            f64::NAN
        } else {
            model.objective(&x_test, &y_test, &all_test, cfg, None).mse
        };
        history.push(EpochRecord {
            epoch: epoch + 1,
            train_total: train.total,
            train_mse: train.mse,
            test_mse,
        });
    }
    Ok((model, history))
}

pub fn train(model: &RflafModel, dataset: &Dataset, cfg: &TrainConfig) -> Result<(RflafModel, Vec<EpochRecord>)> {
    train_model(model, dataset, cfg)
}

pub fn train_baseline(
    model: &BaselineRfModel,
    dataset: &Dataset,
    cfg: &TrainConfig,
) -> Result<(BaselineRfModel, Vec<EpochRecord>)> {
    train_model(model, dataset, cfg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::build_grid;
    use crate::data::{gen_dataset, Sigma, TargetSpec};
    use crate::model::{BaselineActivation, FeatureBank};

    fn tiny() -> (RflafModel, Dataset) {
        let spec = TargetSpec { mc_samples: 2_000, ..TargetSpec::new(Sigma::S1, 2, 1) };
        let ds = gen_dataset(&spec, 80, 2, 0.2, 3).unwrap();
        let bank = FeatureBank::sample(2, 16, 5).unwrap();
        let grid = build_grid(-2.0, 2.0, 8, 1.0).unwrap();
        (RflafModel::init(bank, grid, 7).unwrap(), ds)
    }

    #[test]
    fn zero_epochs_is_identity() {
        let (model, ds) = tiny();
        let cfg = TrainConfig { epochs: 0, ..TrainConfig::default() };
        let (trained, hist) = train(&model, &ds, &cfg).unwrap();
        assert_eq!(trained, model);
        assert!(hist.is_empty());
    }

    #[test]
    fn training_reduces_loss() {
        let (model, ds) = tiny();
        assert_eq!(ds.train_idx.len(), 64);
        let cfg = TrainConfig { epochs: 50, batch_size: 16, learning_rate: 1e-2, ..TrainConfig::default() };
        let (x, y) = ds.train_set();
        let rows: Vec<usize> = (0..y.len()).collect();
        let initial = model.objective(&x, &y, &rows, &cfg, None).total;
        let (_, hist) = train(&model, &ds, &cfg).unwrap();
        assert_eq!(hist.len(), 50);
        assert!(hist.last().unwrap().train_total < initial);
        assert!(hist.iter().all(|h| h.test_mse.is_finite()));
    }

    #[test]
    fn training_is_deterministic() {
        let (model, ds) = tiny();
        let cfg = TrainConfig { epochs: 5, batch_size: 8, ..TrainConfig::default() };
        let (m1, h1) = train(&model, &ds, &cfg).unwrap();
        let (m2, h2) = train(&model, &ds, &cfg).unwrap();
        assert_eq!(h1, h2);
        assert_eq!(m1.params(), m2.params());
        let other = TrainConfig { seed: 1, ..cfg };
        assert_ne!(train(&model, &ds, &other).unwrap().0.params(), m1.params());
    }

    #[test]
    fn baselines_train_too() {
        let (_, ds) = tiny();
        let bank = FeatureBank::sample(2, 24, 9).unwrap();
        let model = BaselineRfModel::init(bank, BaselineActivation::Tanh, 2).unwrap();
        let cfg = TrainConfig { epochs: 30, batch_size: 16, learning_rate: 1e-2, ..TrainConfig::default() };
        let (x, y) = ds.train_set();
        let rows: Vec<usize> = (0..y.len()).collect();
        let initial = model.objective(&x, &y, &rows, &cfg, None).mse;
        let (_, hist) = train_baseline(&model, &ds, &cfg).unwrap();
        assert!(hist.last().unwrap().train_mse < initial);
    }

    #[test]
    fn baseline_gradient_matches_finite_differences() {
        let (_, ds) = tiny();
        let (x, y) = ds.train_set();
        let rows: Vec<usize> = (0..y.len()).collect();
        let bank = FeatureBank::sample(2, 6, 4).unwrap();
        let model = BaselineRfModel::init(bank, BaselineActivation::Rbf2, 1).unwrap();
        let cfg = TrainConfig::default();
        let mut g = vec![0.0; 6];
        model.objective(&x, &y, &rows, &cfg, Some(&mut g));
        let h = 1e-6;
        for j in 0..6 {
            let mut p = model.params();
            p[j] += h;
            let mut plus = model.clone();
            plus.set_params_flat(&p);
            p[j] -= 2.0 * h;
            let mut minus = model.clone();
            minus.set_params_flat(&p);
            let fd = (plus.objective(&x, &y, &rows, &cfg, None).mse - minus.objective(&x, &y, &rows, &cfg, None).mse) / (2.0 * h);
            assert!((fd - g[j]).abs() <= 1e-6 * (1.0 + g[j].abs()), "{fd} {}", g[j]);
        }
    }
}
