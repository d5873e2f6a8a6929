//! Small descriptive statistics used by the experiment reports.

use crate::linalg::dot;
use crate::{Error, Result};

pub fn mean(x: &[f64]) -> f64 {
    x.iter().sum::<f64>() / x.len() as f64
}

/// Pearson correlation. Fails on length mismatch, fewer than two points, or
/// a constant input.
pub fn pearson(x: &[f64], y: &[f64]) -> Result<f64> {
    Error::check_len("correlation input", x.len(), y.len())?;
    if x.len() < 2 {
        return Err(Error::invalid("correlation needs at least two points"));
    }
    let (mx, my) = (mean(x), mean(y));
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (da, db) = (a - mx, b - my);
        sxy += da * db;
        sxx += da * da;
        syy += db * db;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::invalid("correlation of a constant sequence is undefined"));
    }
    Ok(sxy / libm::sqrt(sxx * syy))
}

/// The `s` minimizing `‖s·x - y‖²`.
pub fn ls_scale(x: &[f64], y: &[f64]) -> Result<f64> {
    Error::check_len("scale-fit input", x.len(), y.len())?;
    let xx = dot(x, x);
    if xx == 0.0 {
        return Err(Error::invalid("cannot fit a scale to a zero vector"));
    }
    Ok(dot(x, y) / xx)
}

/// Ordinary least-squares line `y ≈ slope·x + intercept`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
}

pub fn linear_fit(x: &[f64], y: &[f64]) -> Result<LinearFit> {
    Error::check_len("fit input", x.len(), y.len())?;
    if x.len() < 2 {
        return Err(Error::invalid("line fit needs at least two points"));
    }
    let (mx, my) = (mean(x), mean(y));
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
    }
    if sxx == 0.0 {
        return Err(Error::invalid("line fit needs distinct abscissae"));
    }
    let slope = sxy / sxx;
    Ok(LinearFit { slope, intercept: my - slope * mx })
}
