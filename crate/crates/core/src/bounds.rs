//! Norm-ball radii for the constrained parameter set and the grid schedule
//! that guarantees an ε-accurate RBF approximation of the activation.

use alloc::format;
use core::f64::consts::{E, PI};

use libm::{log, sqrt};

use crate::linalg::norm;
use crate::model::RflafModel;
use crate::{Error, Result};

/// Inputs to [`theory_bounds`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundsInput {
    pub h: f64,
    pub n_basis: usize,
    pub n_features: usize,
    pub delta: f64,
    pub sigma_sup: f64,
    pub support_len: f64,
    pub radius: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundsReport {
    pub input: BoundsInput,
    /// `‖σ‖∞ |𝒦| / (h √(2πN))`
    pub a_norm_bound: f64,
    /// `7 R √(M log(2/δ))`
    pub v_norm_bound: f64,
    /// `7 ‖σ‖∞ |𝒦| R √(log(2/δ)) / (h √(2π))`
    pub f_sup_bound: f64,
}

/// Evaluates the three bounds.
///
/// Every input must be positive and `δ ∈ (0, 1/2)`.
pub fn theory_bounds(
    h: f64,
    n_basis: usize,
    n_features: usize,
    delta: f64,
    sigma_sup: f64,
    support_len: f64,
    radius: f64,
) -> Result<BoundsReport> {
    BoundsReport::new(BoundsInput {
        h,
        n_basis,
        n_features,
        delta,
        sigma_sup,
        support_len,
        radius,
    })
}

impl BoundsReport {
    pub fn new(input: BoundsInput) -> Result<Self> {
        let BoundsInput { h, n_basis, n_features, delta, sigma_sup, support_len, radius } = input;
        if !(delta > 0.0 && delta < 0.5) {
            return Err(Error::domain(format!("delta must lie in (0, 1/2), got {delta}")));
        }
        for (name, value) in [("h", h), ("sigma_sup", sigma_sup), ("support_len", support_len), ("R", radius)] {
            if !(value > 0.0 && value.is_finite()) {
                return Err(Error::invalid(format!("{name} must be positive and finite, got {value}")));
            }
        }
        if n_basis == 0 || n_features == 0 {
            return Err(Error::invalid("N and M must be >= 1"));
        }
        let root_2pi = sqrt(2.0 * PI);
        let log_term = log(2.0 / delta);
        Ok(BoundsReport {
            input,
            a_norm_bound: sigma_sup * support_len / (h * sqrt(2.0 * PI * n_basis as f64)),
            v_norm_bound: 7.0 * radius * sqrt(n_features as f64 * log_term),
            f_sup_bound: 7.0 * sigma_sup * support_len * radius * sqrt(log_term) / (h * root_2pi),
        })
    }

    /// Whether the model's weights lie inside the two norm balls.
    pub fn contains(&self, model: &RflafModel) -> NormCheck {
        let a_norm = norm(model.a().as_slice());
        let v_norm = norm(model.v());
        NormCheck {
            a_norm,
            v_norm,
            a_inside: a_norm <= self.a_norm_bound,
            v_inside: v_norm <= self.v_norm_bound,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormCheck {
    pub a_norm: f64,
    pub v_norm: f64,
    pub a_inside: bool,
    pub v_inside: bool,
}

/// Largest width and spacing allowed by the sufficient grid conditions for
/// a target accuracy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridRequirement {
    pub max_width: f64,
    pub max_spacing: f64,
}

impl GridRequirement {
    /// Smallest grid number whose spacing meets the requirement.
    pub fn min_basis(&self, support_len: f64) -> usize {
        libm::ceil(support_len / self.max_spacing) as usize
    }

    pub fn admits(&self, width: f64, spacing: f64) -> bool {
        width <= self.max_width && spacing <= self.max_spacing
    }
}

/// Grid conditions for approximating an `L`-Lipschitz activation to sup-norm
/// accuracy `eps` on inputs of norm at most `R`:
///
/// ```text
/// h ≤ ε / (4√2 L R √log(16‖σ‖∞R/ε))
/// |𝒦|/N ≤ ε h √(πe) / (16√2 ‖σ‖∞ R log(8‖σ‖∞|𝒦|R / (√(2π) ε h²)))  ∧  ε/(4LR)
/// ```
///
/// The spacing condition is evaluated at the largest admissible `h`. Both
/// logarithms must be positive, so `eps` has to be small relative to
/// `‖σ‖∞ R`.
pub fn grid_requirement(
    eps: f64,
    lipschitz: f64,
    radius: f64,
    sigma_sup: f64,
    support_len: f64,
) -> Result<GridRequirement> {
    for (name, value) in [
        ("eps", eps),
        ("L", lipschitz),
        ("R", radius),
        ("sigma_sup", sigma_sup),
        ("support_len", support_len),
    ] {
        if !(value > 0.0 && value.is_finite()) {
            return Err(Error::invalid(format!("{name} must be positive and finite, got {value}")));
        }
    }
    let log_h = log(16.0 * sigma_sup * radius / eps);
    if !(log_h > 0.0) {
        return Err(Error::domain("eps too large: 16·sup|σ|·R/eps must exceed 1"));
    }
    let h = eps / (4.0 * sqrt(2.0) * lipschitz * radius * sqrt(log_h));
    let log_s = log(8.0 * sigma_sup * support_len * radius / (sqrt(2.0 * PI) * eps * h * h));
    if !(log_s > 0.0) {
        return Err(Error::domain("spacing condition has a non-positive logarithm"));
    }
    let quad = eps * h * sqrt(PI * E) / (16.0 * sqrt(2.0) * sigma_sup * radius * log_s);
    let lip = eps / (4.0 * lipschitz * radius);
    Ok(GridRequirement {
        max_width: h,
        max_spacing: quad.min(lip),
    })
}
