use rflaf_core::basis::{build_grid, linspace};
use rflaf_core::data::{calibrate, gen_dataset, Dataset, Sigma, TargetSpec};
use rflaf_core::model::{BaselineRfModel, FeatureBank, RflafModel};
use rflaf_core::optim::{train, train_baseline, EpochRecord};
use rflaf_core::rng::derive_seed;
use rflaf_core::stats::{ls_scale, pearson};

use super::{num, Check, Outputs};
use crate::config::TrainCompareConfig;
use crate::error::Result;
use crate::format::{export_csv, save_checkpoint, save_dataset};
use crate::table::Table;

#[derive(Debug, Clone, PartialEq)]
pub struct ModelRun {
    pub name: String,
    pub params: usize,
    pub history: Vec<EpochRecord>,
}

impl ModelRun {
    /// Test error after the last epoch, NaN without any.
    pub fn final_test_mse(&self) -> f64 {
        self.history.last().map_or(f64::NAN, |h| h.test_mse)
    }
}

/// Learned activation against the true one on a common grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ActivationComparison {
    pub z: Vec<f64>,
    pub learned: Vec<f64>,
    pub truth: Vec<f64>,
    /// Least-squares factor mapping `learned` onto `truth`.
    pub scale: f64,
    /// Pearson correlation of the scaled learned activation with the truth.
    pub correlation: f64,
    /// Same against `σ(-z)`, reported for diagnosis only.
    pub mirror_correlation: f64,
}

pub fn compare_activation(
    activation: impl Fn(f64) -> f64,
    sigma: &Sigma,
    support: [f64; 2],
    points: usize,
) -> Result<ActivationComparison> {
    let z = linspace(support[0], support[1], points);
    let learned: Vec<f64> = z.iter().map(|&t| activation(t)).collect();
    let truth: Vec<f64> = z.iter().map(|&t| sigma.eval(t)).collect();
    let mirror: Vec<f64> = z.iter().map(|&t| sigma.eval(-t)).collect();
    let scale = ls_scale(&learned, &truth)?;
    let aligned: Vec<f64> = learned.iter().map(|l| scale * l).collect();
    let correlation = pearson(&aligned, &truth)?;
    let mirror_scale = ls_scale(&learned, &mirror)?;
    let mirrored: Vec<f64> = learned.iter().map(|l| mirror_scale * l).collect();
    let mirror_correlation = pearson(&mirrored, &mirror)?;
    Ok(ActivationComparison { z, learned, truth, scale, correlation, mirror_correlation })
}

#[derive(Debug, Clone)]
pub struct TargetRun {
    pub sigma: Sigma,
    pub dataset: Dataset,
    pub rflaf: RflafModel,
    /// The learnable-activation model first, then the baselines in config order.
    pub runs: Vec<ModelRun>,
    pub activation: ActivationComparison,
}

impl TargetRun {
    pub fn rflaf_test_mse(&self) -> f64 {
        self.runs[0].final_test_mse()
    }

    pub fn best_baseline(&self) -> Option<&ModelRun> {
        self.runs[1..]
            .iter()
            .min_by(|a, b| a.final_test_mse().total_cmp(&b.final_test_mse()))
    }
}

fn sigma_tag(sigma: &Sigma) -> u64 {
    match sigma {
        Sigma::S1 => 1,
        Sigma::S2 => 2,
        Sigma::S3 => 3,
        Sigma::Table(_) => 4,
    }
}

/// Generates the dataset for `sigma`, trains the learnable-activation model
/// and every baseline under the same optimizer settings, and compares the
/// learned activation with the true one.
pub fn train_compare_target(cfg: &TrainCompareConfig, sigma: &Sigma, seed: u64) -> Result<TargetRun> {
    let base = derive_seed(seed, sigma_tag(sigma));
    let sub = |tag| derive_seed(base, tag);

    let mut spec = TargetSpec::new(sigma.clone(), cfg.dim, sub(1));
    spec.mc_samples = cfg.mc_samples;
    if cfg.calibrate {
        spec.calib = calibrate(&spec)?;
    }
    let dataset = gen_dataset(&spec, cfg.n, cfg.dim, cfg.test_fraction, sub(2))?;

    let grid = build_grid(cfg.support[0], cfg.support[1], cfg.basis, cfg.width())?;
    let bank = FeatureBank::sample(cfg.dim, cfg.features, sub(3))?;
    let model = RflafModel::init(bank, grid, sub(4))?;
    let train_cfg = cfg.train_config(sub(5));
    let (rflaf, history) = train(&model, &dataset, &train_cfg)?;
    let mut runs = vec![ModelRun { name: "rflaf".into(), params: cfg.features + cfg.basis, history }];

    let width = cfg.features + cfg.basis;
    for (i, act) in cfg.baseline_activations()?.into_iter().enumerate() {
        let bank = FeatureBank::sample(cfg.dim, width, sub(6))?;
        let init = BaselineRfModel::init(bank, act, sub(7 + i as u64))?;
        let baseline = BaselineRfModel::paired(init.bank().clone(), act, init.v().to_vec(), &model)?;
        let (_, history) = train_baseline(&baseline, &dataset, &train_cfg)?;
        runs.push(ModelRun { name: act.name().into(), params: width, history });
    }

    let activation = compare_activation(|z| rflaf.activation(z), sigma, cfg.support, cfg.activation_points)?;
    Ok(TargetRun { sigma: sigma.clone(), dataset, rflaf, runs, activation })
}

pub(super) fn run(cfg: &TrainCompareConfig, seed: u64, out: &mut Outputs) -> Result<Vec<Check>> {
    let mut checks = Vec::new();
    for sigma in cfg.sigmas()? {
        let name = sigma.name();
        let run = train_compare_target(cfg, &sigma, seed)?;

        let mut summary = Table::new(["model", "params", "final_train_mse", "final_test_mse"]);
        for m in &run.runs {
            let mut history = Table::new(["epoch", "train_total", "train_mse", "test_mse"]);
            for h in &m.history {
                history.push([h.epoch.to_string(), num(h.train_total), num(h.train_mse), num(h.test_mse)]);
            }
            out.table(&format!("history_{name}_{}.txt", m.name), &history)?;
            let train_mse = m.history.last().map_or(f64::NAN, |h| h.train_mse);
            summary.push([m.name.clone(), m.params.to_string(), num(train_mse), num(m.final_test_mse())]);
        }
        out.table(&format!("summary_{name}.txt", ), &summary)?;

        let a = &run.activation;
        let mut act = Table::new(["z", "learned", "learned_aligned", "true"]);
        for i in 0..a.z.len() {
            act.push([num(a.z[i]), num(a.learned[i]), num(a.scale * a.learned[i]), num(a.truth[i])]);
        }
        out.table(&format!("activation_{name}.txt"), &act)?;
        save_checkpoint(&run.rflaf, &out.path(&format!("rflaf_{name}.ckpt")))?;
        if cfg.save_data {
            save_dataset(&run.dataset, &out.path(&format!("data_{name}.rfd")))?;
            export_csv(&run.dataset, &out.path(&format!("data_{name}.csv")))?;
        }

        let rflaf_mse = run.rflaf_test_mse();
        if let Some(best) = run.best_baseline() {
            let ratio = rflaf_mse / best.final_test_mse();
            checks.push(Check::new(
                format!("{name} test mse ratio"),
                ratio <= cfg.max_mse_ratio,
                format!(
                    "rflaf {rflaf_mse:.4e} vs best baseline {} {:.4e}: ratio {ratio:.4} (max {})",
                    best.name,
                    best.final_test_mse(),
                    cfg.max_mse_ratio
                ),
            ));
        }
        checks.push(Check::new(
            format!("{name} activation correlation"),
            a.correlation >= cfg.min_correlation,
            format!(
                "pearson {:.4} (min {}), against reflected target {:.4}",
                a.correlation, cfg.min_correlation, a.mirror_correlation
            ),
        ));
    }
    Ok(checks)
}
