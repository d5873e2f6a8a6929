use proptest::prelude::*;
use rflaf_core::basis::{build_grid, quadrature_weights_of, ActivationWeights, QuadratureBounds};
use rflaf_core::data::Sigma;
use rflaf_core::linalg::Matrix;
use rflaf_core::model::{FeatureBank, RflafModel};
use rflaf_core::optim::{loss, train, TrainConfig};
use rflaf_core::data::{gen_dataset, TargetSpec};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn output_never_exceeds_norm_bound(
        seed in any::<u64>(),
        n_basis in 2usize..40,
        m in 1usize..40,
        a in prop::collection::vec(-5.0f64..5.0, 40),
        v in prop::collection::vec(-5.0f64..5.0, 40),
        x in prop::collection::vec(-10.0f64..10.0, 3),
    ) {
        let grid = build_grid(-1.5, 2.5, n_basis, 0.3).unwrap();
        let bank = FeatureBank::sample(3, m, seed).unwrap();
        let model = RflafModel::new(
            bank,
            grid,
            ActivationWeights::new(a[..n_basis].to_vec()).unwrap(),
            v[..m].to_vec(),
        ).unwrap();
        prop_assert!(model.forward(&x).unwrap().abs() <= model.output_bound() + 1e-12);
    }

    #[test]
    fn forward_batch_matches_rows(seed in any::<u64>()) {
        let bank = FeatureBank::sample(2, 7, seed).unwrap();
        let model = RflafModel::init(bank, build_grid(-2.0, 2.0, 9, 0.8).unwrap(), seed).unwrap();
        let x = Matrix::from_rows(&[vec![0.1, -0.3], vec![2.0, 1.0], vec![0.0, 0.0]]).unwrap();
        let batch = model.forward_batch(&x).unwrap();
        for (i, row) in x.iter_rows().enumerate() {
            prop_assert_eq!(batch[i], model.forward(row).unwrap());
        }
    }
}

#[test]
fn quadrature_weights_respect_bounds() {
    for sigma in [Sigma::S1, Sigma::S2, Sigma::S3] {
        for n in [50, 100, 200, 400, 800] {
            let grid = build_grid(-2.0, 2.0, n, 2.0 * 4.0 / n as f64).unwrap();
            let a = quadrature_weights_of(&grid, |z| sigma.eval(z)).unwrap();
            assert!(QuadratureBounds::new(&grid, sigma.sup_norm()).holds_for(&a), "{} N={n}", sigma.name());
        }
    }
}

#[test]
fn short_training_run_reduces_loss() {
    let spec = TargetSpec { mc_samples: 2000, ..TargetSpec::new(Sigma::S1, 2, 1) };
    let data = gen_dataset(&spec, 400, 2, 0.25, 2).unwrap();
    let bank = FeatureBank::sample(2, 40, 3).unwrap();
    let model = RflafModel::init(bank, build_grid(-2.0, 2.0, 30, 4.0 / 15.0).unwrap(), 4).unwrap();
    let cfg = TrainConfig { learning_rate: 1e-2, epochs: 10, batch_size: 32, ..TrainConfig::default() };
    let (x, y) = data.train_set();
    let before = loss(&model, &x, &y, &cfg).unwrap().total;
    let (trained, history) = train(&model, &data, &cfg).unwrap();
    assert_eq!(history.len(), 10);
    let after = loss(&trained, &x, &y, &cfg).unwrap().total;
    assert!(after < 0.5 * before, "{before} -> {after}");
    assert!(history.iter().all(|h| h.test_mse.is_finite()));
}
