//! The kernel induced by a random feature model with a single Gaussian RBF
//! activation `B(z) = exp(-(z - c)² / (2h²))`:
//!
//! ```text
//! K(x, x') = E_{w ~ N(0, I_d)} [ B(w·x) B(w·x') ]
//! ```
//!
//! [`kernel_closed`] evaluates it in closed form, [`kernel_mc`] estimates the
//! expectation directly and serves as an independent oracle, and
//! [`kernel_rot`] / [`kernel_taylor`] give the rotation-invariant restriction to
//! the unit sphere and its power series in the inner product.

mod taylor;

pub use taylor::{
    poly_p, poly_q, r_n, r_poly, series_coefficients, taylor_derivs, TaylorTable,
    MAX_EXACT_P_DEGREE, MAX_EXACT_Q_DEGREE,
};

use alloc::format;
use rand::Rng;

use crate::linalg::{dot, norm_sq};
use crate::rng;
use crate::{Error, Result};

/// Center and width of a Gaussian radial basis function.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RbfParams {
    center: f64,
    width: f64,
}

impl RbfParams {
    pub fn new(center: f64, width: f64) -> Result<Self> {
        if !center.is_finite() || !width.is_finite() {
            return Err(Error::invalid("RBF center and width must be finite"));
        }
        if width <= 0.0 {
            return Err(Error::invalid(format!("RBF width must be positive, got {width}")));
        }
        Ok(RbfParams { center, width })
    }

    #[inline]
    pub fn center(&self) -> f64 {
        self.center
    }

    #[inline]
    pub fn width(&self) -> f64 {
        self.width
    }

    /// `B(z) = exp(-(z - c)² / (2h²))`.
    #[inline]
    pub fn eval(&self, z: f64) -> f64 {
        let t = (z - self.center) / self.width;
        libm::exp(-0.5 * t * t)
    }

    /// `p = c² / (1 + h²)`, the argument of the Taylor polynomials.
    #[inline]
    pub fn taylor_p(&self) -> f64 {
        self.center * self.center / (1.0 + self.width * self.width)
    }
}

/// A Monte-Carlo mean together with its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate {
    pub mean: f64,
    pub stderr: f64,
    pub samples: usize,
}

impl McEstimate {
    /// Mean and standard error in one pass, accumulating deviations from the
    /// first value to limit cancellation.
    pub fn from_samples(values: impl IntoIterator<Item = f64>) -> Self {
        let mut iter = values.into_iter();
        let Some(shift) = iter.next() else {
            return McEstimate { mean: 0.0, stderr: 0.0, samples: 0 };
        };
        let mut n = 1usize;
        let (mut s1, mut s2) = (0.0, 0.0);
        for x in iter {
            let d = x - shift;
            s1 += d;
            s2 += d * d;
            n += 1;
        }
        let nf = n as f64;
        let mean = shift + s1 / nf;
        let stderr = if n > 1 {
            let var = ((s2 - s1 * s1 / nf) / (nf - 1.0)).max(0.0);
            libm::sqrt(var / nf)
        } else {
            0.0
        };
        McEstimate {
            mean,
            stderr,
            samples: n,
        }
    }

    /// `|mean - value| <= k * stderr`.
    pub fn covers(&self, value: f64, k: f64) -> bool {
        (self.mean - value).abs() <= k * self.stderr
    }
}

/// Closed-form kernel for arbitrary `x, x'`.
pub fn kernel_closed(x: &[f64], x2: &[f64], params: &RbfParams) -> Result<f64> {
    Error::check_len("kernel inputs", x.len(), x2.len())?;
    let h2 = params.width * params.width;
    let a = h2 + norm_sq(x);
    let b = h2 + norm_sq(x2);
    let ip = dot(x, x2);
    let det = a * b - ip * ip;
    if !(det > 0.0) || !det.is_finite() {
        return Err(Error::domain(format!("non-positive kernel determinant {det}")));
    }
    let c2 = params.center * params.center;
    Ok(h2 / libm::sqrt(det) * libm::exp(-0.5 * c2 * (a + b - 2.0 * ip) / det))
}

/// The kernel on the unit sphere as a function of `r = <x, x'>`.
pub fn kernel_rot(r: f64, params: &RbfParams) -> Result<f64> {
    if !(r.abs() <= 1.0) {
        return Err(Error::domain(format!("inner product {r} outside [-1, 1]")));
    }
    let h2 = params.width * params.width;
    let s = 1.0 + h2;
    let c2 = params.center * params.center;
    Ok(h2 / libm::sqrt(s * s - r * r) * libm::exp(-c2 / (s + r)))
}

/// Monte-Carlo estimate of `E[B(w·x) B(w·x')]` over `samples` standard-Gaussian `w`.
pub fn kernel_mc(
    x: &[f64],
    x2: &[f64],
    params: &RbfParams,
    samples: usize,
    seed: u64,
) -> Result<McEstimate> {
    Error::check_len("kernel inputs", x.len(), x2.len())?;
    if samples < 2 {
        return Err(Error::invalid("Monte-Carlo estimate needs at least 2 samples"));
    }
    let mut rng = rng::seeded(seed, rng::stream::KERNEL_MC);
    let d = x.len();
    let mut w = alloc::vec![0.0; d];
    let values = (0..samples).map(|_| {
        w.iter_mut().for_each(|wi| *wi = rng::normal(&mut rng));
        params.eval(dot(&w, x)) * params.eval(dot(&w, x2))
    });
    Ok(McEstimate::from_samples(values))
}

/// Partial sum of the power series of [`kernel_rot`] in `r` with `n_terms` terms.
///
/// The coefficients come from [`series_coefficients`], so there is no exact-range
/// limit on `n_terms`. The series ratio is `1/(1+h²)`, so small widths need many
/// terms near `|r| = 1`.
pub fn kernel_taylor(r: f64, params: &RbfParams, n_terms: usize) -> Result<f64> {
    if !(r.abs() <= 1.0) {
        return Err(Error::domain(format!("inner product {r} outside [-1, 1]")));
    }
    if n_terms == 0 {
        return Err(Error::invalid("kernel_taylor needs at least one term"));
    }
    let h2 = params.width * params.width;
    let s = 1.0 + h2;
    let coeffs = series_coefficients(params.taylor_p(), n_terms)?;
    let u = r / s;
    let mut pow = 1.0;
    let mut sum = 0.0;
    for t in coeffs {
        sum += t * pow;
        pow *= u;
    }
    Ok(h2 / s * sum)
}

/// Draws a point uniformly on the unit sphere in `d` dimensions.
pub fn unit_vector<R: Rng + ?Sized>(rng: &mut R, d: usize) -> alloc::vec::Vec<f64> {
    loop {
        let v = rng::normal_vec(rng, d);
        let n = libm::sqrt(norm_sq(&v));
        if n > 1e-12 {
            return v.into_iter().map(|x| x / n).collect();
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use alloc::vec::Vec;

    fn p(c: f64, h: f64) -> RbfParams {
        RbfParams::new(c, h).unwrap()
    }

    #[test]
    fn invalid_params_rejected() {
        assert!(RbfParams::new(0.0, 0.0).is_err());
        assert!(RbfParams::new(0.0, -1.0).is_err());
        assert!(RbfParams::new(f64::NAN, 1.0).is_err());
        assert!(RbfParams::new(0.0, f64::INFINITY).is_err());
    }

    #[test]
    fn closed_form_trivial_values() {
        for d in [1, 3, 7] {
            let z = vec![0.0; d];
            assert_eq!(kernel_closed(&z, &z, &p(0.0, 1.0)).unwrap(), 1.0);
        }
        let k = kernel_closed(&[1.0, 0.0], &[0.0, 1.0], &p(0.0, 1.0)).unwrap();
        assert!((k - 0.5).abs() < 1e-15);
    }

    #[test]
    fn closed_form_rejects_bad_input() {
        assert!(kernel_closed(&[1.0], &[1.0, 2.0], &p(0.0, 1.0)).is_err());
        assert!(kernel_closed(&[f64::NAN], &[1.0], &p(0.0, 1.0)).is_err());
        assert!(kernel_closed(&[f64::INFINITY], &[1.0], &p(0.0, 1.0)).is_err());
    }

    #[test]
    fn rotation_form_trivial_values() {
        assert!((kernel_rot(0.0, &p(0.0, 1.0)).unwrap() - 0.5).abs() < 1e-15);
        assert!((kernel_rot(1.0, &p(0.0, 1.0)).unwrap() - 1.0 / libm::sqrt(3.0)).abs() < 1e-15);
        let expected = 0.5 * libm::exp(-0.5);
        assert!((kernel_rot(0.0, &p(1.0, 1.0)).unwrap() - expected).abs() < 1e-15);
        assert!(kernel_rot(1.0 + 1e-12, &p(0.0, 1.0)).is_err());
        assert!(kernel_rot(f64::NAN, &p(0.0, 1.0)).is_err());
    }

    #[test]
    fn mc_constant_integrand_is_exact() {
        let z = [0.0, 0.0, 0.0];
        for seed in [0, 1, 99] {
            let est = kernel_mc(&z, &z, &p(0.0, 1.0), 1000, seed).unwrap();
            assert_eq!(est.mean, 1.0);
            assert_eq!(est.stderr, 0.0);
            assert_eq!(est.samples, 1000);
        }
    }

    #[test]
    fn mc_needs_two_samples() {
        assert!(kernel_mc(&[1.0], &[1.0], &p(0.0, 1.0), 1, 0).is_err());
    }

    #[test]
    fn mc_matches_closed_form() {
        let params = p(0.0, 1.0);
        let x = [1.0, 0.0];
        let est = kernel_mc(&x, &x, &params, 1_000_000, 5).unwrap();
        assert!(est.covers(kernel_closed(&x, &x, &params).unwrap(), 4.0));

        let params = p(1.0, 1.0);
        let x2 = [0.6, 0.8];
        let est = kernel_mc(&x, &x2, &params, 1_000_000, 6).unwrap();
        assert!(est.covers(kernel_closed(&x, &x2, &params).unwrap(), 4.0));
        // orthogonal unit vectors: the (1/2)·e^(-1/2) value of the rotation form
        let est = kernel_mc(&x, &[0.0, 1.0], &params, 1_000_000, 7).unwrap();
        assert!(est.covers(0.5 * libm::exp(-0.5), 4.0));
    }

    #[test]
    fn mc_is_seed_deterministic() {
        let params = p(1.0, 0.5);
        let a = kernel_mc(&[1.0, 0.0], &[1.0, 0.0], &params, 10_000, 1).unwrap();
        let b = kernel_mc(&[1.0, 0.0], &[1.0, 0.0], &params, 10_000, 1).unwrap();
        let c = kernel_mc(&[1.0, 0.0], &[1.0, 0.0], &params, 10_000, 2).unwrap();
        assert_eq!(a, b);
        assert_ne!(a.mean, c.mean);
        let joint = libm::sqrt(a.stderr * a.stderr + c.stderr * c.stderr);
        assert!((a.mean - c.mean).abs() <= 4.0 * joint);
    }

    #[test]
    fn mc_stderr_scales_inverse_sqrt() {
        let params = p(1.0, 1.0);
        let x = [0.3, -0.9, 0.2];
        let small = kernel_mc(&x, &x, &params, 10_000, 3).unwrap();
        let large = kernel_mc(&x, &x, &params, 1_000_000, 3).unwrap();
        let ratio = small.stderr / large.stderr;
        assert!((ratio - 10.0).abs() < 1.0, "ratio {ratio}");
    }

    #[test]
    fn taylor_single_term_and_origin() {
        for r in [-1.0, -0.3, 0.0, 0.8, 1.0] {
            assert!((kernel_taylor(r, &p(0.0, 1.0), 1).unwrap() - 0.5).abs() < 1e-15);
        }
        for (c, h) in [(0.0, 1.0), (1.0, 0.5), (2.0, 0.3), (-1.5, 2.0)] {
            let rot = kernel_rot(0.0, &p(c, h)).unwrap();
            for n in [1, 2, 10, 60] {
                assert_eq!(kernel_taylor(0.0, &p(c, h), n).unwrap(), rot);
            }
        }
        assert!(kernel_taylor(0.5, &p(0.0, 1.0), 0).is_err());
        assert!(kernel_taylor(1.5, &p(0.0, 1.0), 3).is_err());
    }

    #[test]
    fn taylor_converges_at_unit_width() {
        let params = p(1.0, 1.0);
        let err = (kernel_taylor(1.0, &params, 60).unwrap() - kernel_rot(1.0, &params).unwrap()).abs();
        assert!(err <= 1e-8, "{err}");
        for c in [0.0, 1.0, 2.0] {
            let params = p(c, 1.0);
            for i in 0..=100 {
                let r = -1.0 + 0.02 * i as f64;
                let err = (kernel_taylor(r, &params, 60).unwrap() - kernel_rot(r, &params).unwrap()).abs();
                assert!(err <= 1e-8, "c={c} r={r} err={err}");
            }
        }
    }

    #[test]
    fn taylor_converges_at_half_width_with_more_terms() {
        // ratio 1/(1+h²) = 0.8: 60 terms leave ~1e-7 at |r| = 1, 90 terms do not.
        for c in [0.0, 1.0, 2.0] {
            let params = p(c, 0.5);
            for i in 0..=100 {
                let r = -1.0 + 0.02 * i as f64;
                let err = (kernel_taylor(r, &params, 90).unwrap() - kernel_rot(r, &params).unwrap()).abs();
                assert!(err <= 1e-8, "c={c} r={r} err={err}");
            }
        }
    }

    #[test]
    fn partial_sums_are_cauchy() {
        let params = p(2.0, 0.5);
        let sums: Vec<f64> = (1..=120)
            .map(|n| kernel_taylor(0.9, &params, n).unwrap())
            .collect();
        let tail_gap = |from: usize| {
            sums[from..]
                .iter()
                .map(|s| (s - sums[from]).abs())
                .fold(0.0, f64::max)
        };
        assert!(tail_gap(40) > tail_gap(80));
        assert!(tail_gap(80) < 1e-8);
    }
}
