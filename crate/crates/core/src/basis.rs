//! The RBF grid that parametrizes a learnable activation
//! `σ̃(z) = Σ_i a_i exp(-(z - c_i)² / (2h²))`.
//!
//! Centers sit at the right endpoints of the uniform partition of the support
//! `[lo, hi]` into `N` cells, and all basis functions share one width.

use alloc::format;
use alloc::vec::Vec;
use core::f64::consts::PI;
use core::ops::Range;

use crate::{Error, Result};

/// Basis functions with `(z - c)² / (2h²)` above this are skipped in sums;
/// each skipped term is below `2^-64` of the peak value.
pub const TRUNCATION_EXPONENT: f64 = 45.0;

#[derive(Debug, Clone, PartialEq)]
pub struct ActivationGrid {
    support_lo: f64,
    support_hi: f64,
    width: f64,
    centers: Vec<f64>,
}

/// Builds the uniform grid with `n_basis` centers on `[support_lo, support_hi]`.
pub fn build_grid(support_lo: f64, support_hi: f64, n_basis: usize, width: f64) -> Result<ActivationGrid> {
    ActivationGrid::new(support_lo, support_hi, n_basis, width)
}

impl ActivationGrid {
    pub fn new(support_lo: f64, support_hi: f64, n_basis: usize, width: f64) -> Result<Self> {
        if !(support_lo.is_finite() && support_hi.is_finite() && support_lo < support_hi) {
            return Err(Error::invalid(format!(
                "support [{support_lo}, {support_hi}] must be a finite non-empty interval"
            )));
        }
        if n_basis < 2 {
            return Err(Error::invalid(format!("grid needs at least 2 basis functions, got {n_basis}")));
        }
        if !(width > 0.0 && width.is_finite()) {
            return Err(Error::invalid(format!("RBF width must be positive, got {width}")));
        }
        let len = support_hi - support_lo;
        let n = n_basis as f64;
        let centers = (1..=n_basis)
            .map(|i| support_lo + len * (i as f64 / n))
            .collect();
        Ok(ActivationGrid {
            support_lo,
            support_hi,
            width,
            centers,
        })
    }

    /// Grid whose width is `ratio` times the spacing.
    pub fn with_width_ratio(support_lo: f64, support_hi: f64, n_basis: usize, ratio: f64) -> Result<Self> {
        let spacing = (support_hi - support_lo) / n_basis as f64;
        Self::new(support_lo, support_hi, n_basis, ratio * spacing)
    }

    #[inline]
    pub fn n_basis(&self) -> usize {
        self.centers.len()
    }

    #[inline]
    pub fn width(&self) -> f64 {
        self.width
    }

    #[inline]
    pub fn support(&self) -> (f64, f64) {
        (self.support_lo, self.support_hi)
    }

    /// `|𝒦| = hi - lo`.
    #[inline]
    pub fn support_len(&self) -> f64 {
        self.support_hi - self.support_lo
    }

    #[inline]
    pub fn spacing(&self) -> f64 {
        self.support_len() / self.n_basis() as f64
    }

    #[inline]
    pub fn centers(&self) -> &[f64] {
        &self.centers
    }

    /// `B_i(z)`.
    #[inline]
    pub fn basis(&self, i: usize, z: f64) -> f64 {
        let t = (z - self.centers[i]) / self.width;
        libm::exp(-0.5 * t * t)
    }

    /// Indices whose basis value at `z` can exceed `exp(-TRUNCATION_EXPONENT)`.
    pub fn active_range(&self, z: f64) -> Range<usize> {
        let n = self.n_basis();
        if !z.is_finite() {
            return 0..n;
        }
        let reach = self.width * libm::sqrt(2.0 * TRUNCATION_EXPONENT);
        let spacing = self.spacing();
        // center k is lo + (k+1)·spacing; pad by one index on each side
        let lo = libm::floor((z - reach - self.support_lo) / spacing) - 2.0;
        let hi = libm::ceil((z + reach - self.support_lo) / spacing) + 1.0;
        let clamp = |v: f64| -> usize {
            if v <= 0.0 {
                0
            } else if v >= n as f64 {
                n
            } else {
                v as usize
            }
        };
        clamp(lo)..clamp(hi)
    }

    /// Calls `f(i, B_i(z))` for every index in [`Self::active_range`].
    #[inline]
    pub fn for_each_active(&self, z: f64, mut f: impl FnMut(usize, f64)) {
        for i in self.active_range(z) {
            f(i, self.basis(i, z));
        }
    }

    /// `σ̃(z)` for the weights `a`, summing only the active basis functions.
    #[inline]
    pub fn activation(&self, a: &[f64], z: f64) -> f64 {
        let mut s = 0.0;
        self.for_each_active(z, |i, b| s += a[i] * b);
        s
    }
}

/// Learnable weights `a_i` of the activation.
#[derive(Debug, Clone, PartialEq)]
pub struct ActivationWeights(Vec<f64>);

impl ActivationWeights {
    pub fn new(a: Vec<f64>) -> Result<Self> {
        if a.iter().all(|x| x.is_finite()) {
            Ok(ActivationWeights(a))
        } else {
            Err(Error::invalid("activation weights must be finite"))
        }
    }

    pub fn zeros(n: usize) -> Self {
        ActivationWeights(alloc::vec![0.0; n])
    }

    #[inline]
    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    #[inline]
    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.0
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.0.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

/// `(B_1(z), ..., B_N(z))`.
pub fn rbf_features(grid: &ActivationGrid, z: f64) -> Vec<f64> {
    (0..grid.n_basis()).map(|i| grid.basis(i, z)).collect()
}

/// `σ̃(z) = Σ_i a_i B_i(z)`.
pub fn eval_activation(grid: &ActivationGrid, weights: &ActivationWeights, z: f64) -> Result<f64> {
    Error::check_len("activation weights", grid.n_basis(), weights.len())?;
    Ok(grid.activation(weights.as_slice(), z))
}

/// Quadrature weights `a_i = |𝒦| / (√(2π) h N) · σ(c_i)`: the Riemann sum of the
/// convolution of `σ` with a Gaussian of width `h`.
pub fn quadrature_weights(grid: &ActivationGrid, sigma_at_centers: &[f64]) -> Result<ActivationWeights> {
    Error::check_len("sigma samples", grid.n_basis(), sigma_at_centers.len())?;
    let scale = quadrature_scale(grid);
    ActivationWeights::new(sigma_at_centers.iter().map(|s| scale * s).collect())
}

/// [`quadrature_weights`] sampling `sigma` at the grid centers.
pub fn quadrature_weights_of(grid: &ActivationGrid, sigma: impl Fn(f64) -> f64) -> Result<ActivationWeights> {
    let samples: Vec<f64> = grid.centers().iter().map(|&c| sigma(c)).collect();
    quadrature_weights(grid, &samples)
}

fn quadrature_scale(grid: &ActivationGrid) -> f64 {
    grid.support_len() / (libm::sqrt(2.0 * PI) * grid.width() * grid.n_basis() as f64)
}

/// Upper bounds on `Σ|a_i|` and `Σa_i²` satisfied by quadrature weights of any
/// `σ` with `‖σ‖∞ <= sigma_sup`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureBounds {
    pub l1: f64,
    pub l2_squared: f64,
}

impl QuadratureBounds {
    pub fn new(grid: &ActivationGrid, sigma_sup: f64) -> Self {
        let k = grid.support_len();
        let h = grid.width();
        QuadratureBounds {
            l1: sigma_sup * k / (libm::sqrt(2.0 * PI) * h),
            l2_squared: sigma_sup * sigma_sup * k * k / (2.0 * PI * h * h * grid.n_basis() as f64),
        }
    }

    pub fn holds_for(&self, weights: &ActivationWeights) -> bool {
        let a = weights.as_slice();
        crate::linalg::norm_l1(a) <= self.l1 && crate::linalg::norm_sq(a) <= self.l2_squared
    }
}

/// `points` samples `(z, σ̃(z))` evenly spaced over `[z_lo, z_hi]`.
pub fn activation_table(
    grid: &ActivationGrid,
    weights: &ActivationWeights,
    z_lo: f64,
    z_hi: f64,
    points: usize,
) -> Result<Vec<(f64, f64)>> {
    Error::check_len("activation weights", grid.n_basis(), weights.len())?;
    Ok(linspace(z_lo, z_hi, points)
        .into_iter()
        .map(|z| (z, grid.activation(weights.as_slice(), z)))
        .collect())
}

/// `points` evenly spaced values from `lo` to `hi` inclusive.
pub fn linspace(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    match points {
        0 => Vec::new(),
        1 => alloc::vec![lo],
        _ => {
            let step = (hi - lo) / (points - 1) as f64;
            (0..points)
                .map(|i| if i + 1 == points { hi } else { lo + step * i as f64 })
                .collect()
        }
    }
}
