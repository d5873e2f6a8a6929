//! Training objective and optimizer.
//!
//! The objective is mean squared error through the model plus a balance
//! penalty and an L1 penalty on the activation weights:
//!
//! ```text
//! (1/n) Σ_i (f̂(x_i) - y_i)² + λ₁ (‖a‖² - ‖v‖²)² + λ₂ ‖a‖₁
//! ```
//!
//! Gradients are analytic; the L1 term contributes the subgradient
//! `λ₂ sign(a_i)` with `sign(0) = 0`.

mod adam;
mod train;

pub use adam::{adam_step, AdamState};
pub use train::{train, train_baseline, train_model, EpochRecord, Trainable};

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::linalg::{dot, norm_l1, norm_sq, Matrix};
use crate::model::{BaselineRfModel, RflafModel};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub lambda1: f64,
    pub lambda2: f64,
    pub learning_rate: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub seed: u64,
    pub adam_beta1: f64,
    pub adam_beta2: f64,
    pub adam_eps: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            lambda1: 1e-3,
            lambda2: 1e-4,
            learning_rate: 1e-3,
            epochs: 5,
            batch_size: 256,
            seed: 0,
            adam_beta1: 0.9,
            adam_beta2: 0.999,
            adam_eps: 1e-8,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.lambda1 >= 0.0 && self.lambda2 >= 0.0) {
            return Err(Error::invalid("regularization weights must be >= 0"));
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::invalid("learning rate must be positive"));
        }
        if self.batch_size == 0 {
            return Err(Error::invalid("batch size must be >= 1"));
        }
        if !((0.0..1.0).contains(&self.adam_beta1) && (0.0..1.0).contains(&self.adam_beta2)) {
            return Err(Error::invalid("adam betas must lie in [0, 1)"));
        }
        if !(self.adam_eps > 0.0) {
            return Err(Error::invalid("adam eps must be positive"));
        }
        Ok(())
    }
}

/// Objective split into its three terms.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LossBreakdown {
    pub mse: f64,
    pub balance: f64,
    pub l1: f64,
    pub total: f64,
}

impl LossBreakdown {
    fn new(mse: f64, balance: f64, l1: f64) -> Self {
        LossBreakdown {
            mse,
            balance,
            l1,
            total: mse + balance + l1,
        }
    }
}

/// Gradient of the objective with respect to `a` and `v`.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradient {
    pub a: Vec<f64>,
    pub v: Vec<f64>,
}

#[inline]
fn sign(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        -1.0
    } else {
        0.0
    }
}

fn check_data(dim: usize, x: &Matrix, y: &[f64]) -> Result<()> {
    if y.is_empty() {
        return Err(Error::invalid("objective needs at least one sample"));
    }
    Error::check_len("sample count", x.rows(), y.len())?;
    Error::check_len("input dimension", dim, x.cols())
}

/// Scratch buffers for one pass over samples.
#[derive(Debug, Default)]
pub(crate) struct Workspace {
    z: Vec<f64>,
    s: Vec<f64>,
    basis: Vec<f64>,
    spans: Vec<(usize, usize)>,
}

/// Mean squared error of the learnable-activation model over `rows`; when
/// `grad = (g_a, g_v)` is given its gradient is added in.
pub(crate) fn rflaf_data_term(
    model: &RflafModel,
    x: &Matrix,
    y: &[f64],
    rows: &[usize],
    mut grad: Option<(&mut [f64], &mut [f64])>,
    ws: &mut Workspace,
) -> f64 {
    let m = model.bank.n_features();
    let inv_m = 1.0 / m as f64;
    let inv_n = 1.0 / rows.len() as f64;
    let a = model.a.as_slice();
    let grid = &model.grid;
    ws.z.resize(m, 0.0);
    ws.s.resize(m, 0.0);
    let mut sq = 0.0;
    for &i in rows {
        model.bank.project_into(x.row(i), &mut ws.z);
        ws.basis.clear();
        ws.spans.clear();
        let mut f = 0.0;
        for mi in 0..m {
            let range = grid.active_range(ws.z[mi]);
            ws.spans.push((range.start, ws.basis.len()));
            let mut s = 0.0;
            for k in range {
                let b = grid.basis(k, ws.z[mi]);
                ws.basis.push(b);
                s += a[k] * b;
            }
            ws.s[mi] = s;
            f += s * model.v[mi];
        }
        let r = f * inv_m - y[i];
        sq += r * r;
        if let Some((ga, gv)) = grad.as_mut() {
            let coef = 2.0 * r * inv_n * inv_m;
            for mi in 0..m {
                gv[mi] += coef * ws.s[mi];
                let (k0, off) = ws.spans[mi];
                let end = ws.spans.get(mi + 1).map_or(ws.basis.len(), |s| s.1);
                let cv = coef * model.v[mi];
                for (j, &b) in ws.basis[off..end].iter().enumerate() {
                    ga[k0 + j] += cv * b;
                }
            }
        }
    }
    sq * inv_n
}

/// Balance and L1 terms, adding their (sub)gradients when requested.
pub(crate) fn rflaf_regularizers(
    a: &[f64],
    v: &[f64],
    cfg: &TrainConfig,
    grad: Option<(&mut [f64], &mut [f64])>,
) -> (f64, f64) {
    let diff = norm_sq(a) - norm_sq(v);
    let balance = cfg.lambda1 * diff * diff;
    let l1 = cfg.lambda2 * norm_l1(a);
    if let Some((ga, gv)) = grad {
        let c = 4.0 * cfg.lambda1 * diff;
        for (g, &ai) in ga.iter_mut().zip(a) {
            *g += c * ai + cfg.lambda2 * sign(ai);
        }
        for (g, &vi) in gv.iter_mut().zip(v) {
            *g -= c * vi;
        }
    }
    (balance, l1)
}

pub(crate) fn baseline_data_term(
    model: &BaselineRfModel,
    x: &Matrix,
    y: &[f64],
    rows: &[usize],
    mut grad: Option<&mut [f64]>,
    ws: &mut Workspace,
) -> f64 {
    let w = model.width();
    let inv_w = 1.0 / w as f64;
    let inv_n = 1.0 / rows.len() as f64;
    ws.s.resize(w, 0.0);
    let mut sq = 0.0;
    for &i in rows {
        let xi = x.row(i);
        let mut f = 0.0;
        for (mi, wm) in model.bank.weights().iter_rows().enumerate() {
            let s = model.activation.eval(dot(wm, xi));
            ws.s[mi] = s;
            f += s * model.v[mi];
        }
        let r = f * inv_w - y[i];
        sq += r * r;
        if let Some(gv) = grad.as_mut() {
            let coef = 2.0 * r * inv_n * inv_w;
            for (g, &s) in gv.iter_mut().zip(&ws.s) {
                *g += coef * s;
            }
        }
    }
    sq * inv_n
}

/// Objective of `model` on `(x, y)`.
pub fn loss(model: &RflafModel, x: &Matrix, y: &[f64], cfg: &TrainConfig) -> Result<LossBreakdown> {
    check_data(model.bank.dim(), x, y)?;
    let rows: Vec<usize> = (0..y.len()).collect();
    let mse = rflaf_data_term(model, x, y, &rows, None, &mut Workspace::default());
    let (balance, l1) = rflaf_regularizers(model.a.as_slice(), &model.v, cfg, None);
    Ok(LossBreakdown::new(mse, balance, l1))
}

/// Analytic gradient of [`loss`].
pub fn grad(model: &RflafModel, x: &Matrix, y: &[f64], cfg: &TrainConfig) -> Result<Gradient> {
    check_data(model.bank.dim(), x, y)?;
    let rows: Vec<usize> = (0..y.len()).collect();
    let mut ga = vec![0.0; model.grid.n_basis()];
    let mut gv = vec![0.0; model.bank.n_features()];
    rflaf_data_term(model, x, y, &rows, Some((&mut ga, &mut gv)), &mut Workspace::default());
    rflaf_regularizers(model.a.as_slice(), &model.v, cfg, Some((&mut ga, &mut gv)));
    Ok(Gradient { a: ga, v: gv })
}

/// Gradients below this magnitude are compared in absolute rather than relative terms.
pub const GRAD_CHECK_FLOOR: f64 = 1e-6;

/// Worst coordinate-wise relative error between [`grad`] and central finite
/// differences of [`loss`] with the given step,
/// `|g - g_fd| / max(|g|, |g_fd|, GRAD_CHECK_FLOOR)`.
///
/// Every `|a_i|` must exceed `10 * step` so that no difference straddles the
/// kink of the L1 term.
pub fn grad_check(model: &RflafModel, x: &Matrix, y: &[f64], cfg: &TrainConfig, step: f64) -> Result<f64> {
    if !(step > 0.0 && step.is_finite()) {
        return Err(Error::invalid("finite-difference step must be positive"));
    }
    if let Some(ai) = model.a.as_slice().iter().find(|ai| ai.abs() <= 10.0 * step) {
        return Err(Error::Precondition(format!(
            "activation weight {ai} within 10 steps of the L1 kink"
        )));
    }
    let analytic = grad(model, x, y, cfg)?;
    let n_a = model.grid.n_basis();
    let mut work = model.clone();
    let mut worst: f64 = 0.0;
    let total_at = |work: &mut RflafModel, idx: usize, value: f64| -> Result<f64> {
        if idx < n_a {
            work.a.as_mut_slice()[idx] = value;
        } else {
            work.v[idx - n_a] = value;
        }
        Ok(loss(work, x, y, cfg)?.total)
    };
    for idx in 0..n_a + model.v.len() {
        let (orig, g) = if idx < n_a {
            (model.a.as_slice()[idx], analytic.a[idx])
        } else {
            (model.v[idx - n_a], analytic.v[idx - n_a])
        };
        let plus = total_at(&mut work, idx, orig + step)?;
        let minus = total_at(&mut work, idx, orig - step)?;
        total_at(&mut work, idx, orig)?;
        let fd = (plus - minus) / (2.0 * step);
        let denom = g.abs().max(fd.abs()).max(GRAD_CHECK_FLOOR);
        worst = worst.max((g - fd).abs() / denom);
    }
    Ok(worst)
}
