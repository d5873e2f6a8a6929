//! Empirical check of the `1/√M` approximation rate.
//!
//! The target is `φ(x) = E_w[v(w) B(w·x)]` for a single RBF `B` and the affine
//! coefficient map `v(w) = v₀ + b·w`, which is `‖b‖`-Lipschitz. With
//! `s = ‖x‖` the expectation has the closed form
//!
//! ```text
//! φ(x) = E[B] · (v₀ + (b·x) c / (s² + h²)),   E[B] = h/√(s² + h²) · exp(-c² / (2(s² + h²)))
//! ```
//!
//! The random feature estimate uses `v_m = v(w_m)`:
//! `φ̂(x) = (1/M) Σ_m v(w_m) B(w_m·x)`.

use alloc::vec::Vec;

use rand::RngCore;

use crate::kernel::RbfParams;
use crate::linalg::{dot, norm_sq, Matrix};
use crate::model::FeatureBank;
use crate::rng::{self, stream};
use crate::stats::{linear_fit, mean};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct RateTarget {
    pub rbf: RbfParams,
    pub v0: f64,
    pub b: Vec<f64>,
}

impl RateTarget {
    pub fn new(rbf: RbfParams, v0: f64, b: Vec<f64>) -> Result<Self> {
        if b.is_empty() {
            return Err(Error::invalid("coefficient direction must have dimension >= 1"));
        }
        if !v0.is_finite() || b.iter().any(|t| !t.is_finite()) {
            return Err(Error::invalid("coefficient map must be finite"));
        }
        Ok(RateTarget { rbf, v0, b })
    }

    pub fn dim(&self) -> usize {
        self.b.len()
    }

    pub fn coefficient(&self, w: &[f64]) -> f64 {
        self.v0 + dot(&self.b, w)
    }

    pub fn exact(&self, x: &[f64]) -> f64 {
        let (c, h) = (self.rbf.center(), self.rbf.width());
        let q = norm_sq(x) + h * h;
        let mean_b = h / libm::sqrt(q) * libm::exp(-c * c / (2.0 * q));
        mean_b * (self.v0 + dot(&self.b, x) * c / q)
    }

    pub fn estimate(&self, bank: &FeatureBank, x: &[f64]) -> f64 {
        let mut acc = 0.0;
        for w in bank.weights().iter_rows() {
            acc += self.coefficient(w) * self.rbf.eval(dot(w, x));
        }
        acc / bank.n_features() as f64
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RateRow {
    pub m: usize,
    /// Mean over trials of `mean_x |φ̂(x) - φ(x)|`.
    pub mean_abs_err: f64,
    pub trial_errors: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RateStudy {
    pub rows: Vec<RateRow>,
    /// Slope of `log(error)` against `log(M)`; `None` with fewer than two
    /// widths or when some error is exactly zero.
    pub slope: Option<f64>,
}

/// Runs `trials` fresh feature banks for every width in `m_list`, scoring each
/// on the same `test_points` standard Gaussian inputs.
pub fn rate_study(
    target: &RateTarget,
    m_list: &[usize],
    trials: usize,
    test_points: usize,
    seed: u64,
) -> Result<RateStudy> {
    if m_list.is_empty() || m_list.contains(&0) {
        return Err(Error::invalid("widths must be a non-empty list of positive counts"));
    }
    if trials == 0 || test_points == 0 {
        return Err(Error::invalid("trials and test points must be >= 1"));
    }
    let d = target.dim();
    let mut test_rng = rng::seeded(seed, stream::RATE_TEST);
    let x = Matrix::from_vec(test_points, d, rng::normal_vec(&mut test_rng, test_points * d))?;
    let exact: Vec<f64> = x.iter_rows().map(|xi| target.exact(xi)).collect();
    let mut bank_seeds = rng::seeded(seed, stream::RATE_BANKS);

    let mut rows = Vec::with_capacity(m_list.len());
    for &m in m_list {
        let mut trial_errors = Vec::with_capacity(trials);
        for _ in 0..trials {
            let bank = FeatureBank::sample(d, m, bank_seeds.next_u64())?;
            let err: f64 = x
                .iter_rows()
                .zip(&exact)
                .map(|(xi, &phi)| (target.estimate(&bank, xi) - phi).abs())
                .sum::<f64>()
                / test_points as f64;
            trial_errors.push(err);
        }
        rows.push(RateRow { m, mean_abs_err: mean(&trial_errors), trial_errors });
    }

    let slope = if rows.len() >= 2 && rows.iter().all(|r| r.mean_abs_err > 0.0) {
        let lx: Vec<f64> = rows.iter().map(|r| libm::log(r.m as f64)).collect();
        let ly: Vec<f64> = rows.iter().map(|r| libm::log(r.mean_abs_err)).collect();
        Some(linear_fit(&lx, &ly)?.slope)
    } else {
        None
    };
    Ok(RateStudy { rows, slope })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::McEstimate;
    use alloc::vec;

    fn target() -> RateTarget {
        RateTarget::new(RbfParams::new(0.5, 1.0).unwrap(), 1.0, vec![0.6, -0.4, 0.3]).unwrap()
    }

    #[test]
    fn closed_form_matches_monte_carlo() {
        let t = target();
        let bank = FeatureBank::sample(3, 400_000, 17).unwrap();
        for x in [[0.0, 0.0, 0.0], [1.0, 0.5, -0.3], [-0.2, 1.4, 0.9]] {
            let samples = bank.weights().iter_rows().map(|w| t.coefficient(w) * t.rbf.eval(dot(w, &x)));
            let est = McEstimate::from_samples(samples);
            assert!(est.covers(t.exact(&x), 4.0), "{x:?}: {} vs {est:?}", t.exact(&x));
            assert!((t.estimate(&bank, &x) - est.mean).abs() < 1e-10);
        }
    }

    #[test]
    fn zero_coefficients_give_zero_error() {
        let t = RateTarget::new(RbfParams::new(0.5, 1.0).unwrap(), 0.0, vec![0.0; 3]).unwrap();
        let study = rate_study(&t, &[4, 16], 2, 50, 0).unwrap();
        assert!(study.rows.iter().all(|r| r.mean_abs_err == 0.0));
        assert_eq!(study.slope, None);
    }

    #[test]
    fn reproducible_and_decreasing() {
        let t = target();
        let a = rate_study(&t, &[16, 256], 3, 200, 5).unwrap();
        assert_eq!(a, rate_study(&t, &[16, 256], 3, 200, 5).unwrap());
        assert!(a.rows[1].mean_abs_err < a.rows[0].mean_abs_err);
        assert!(a.slope.unwrap() < 0.0);
    }

    #[test]
    fn rejects_empty_inputs() {
        let t = target();
        assert!(rate_study(&t, &[], 1, 10, 0).is_err());
        assert!(rate_study(&t, &[0], 1, 10, 0).is_err());
        assert!(rate_study(&t, &[4], 0, 10, 0).is_err());
    }
}
