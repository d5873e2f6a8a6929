//! Taylor machinery of the rotation-invariant kernel.
//!
//! With `p = c²/(1+h²)` and `f(u) = (1-u²)^(-1/2) exp(-p/(1+u))`, the derivatives
//! at zero satisfy `f⁽ⁿ⁾(0) = e^(-p) R_n(p)`, where `R_{2k} = P_k²` and
//! `R_{2k+1} = x·Q_k²` for the integer polynomials
//!
//! ```text
//! P_k(x) = Σ_i (-1)^(k-i) (2k-1)!!/(2i-1)!! · C(k,i) · x^i
//! Q_k(x) = Σ_i (-1)^(k-i) (2k+1)!!/(2i+1)!! · C(k,i) · x^i
//! ```
//!
//! Two independent routes are provided: the three-term derivative recurrence in
//! floating point ([`taylor_derivs`]) and exact 128-bit coefficients
//! ([`poly_p`], [`poly_q`], [`r_n`]).

use alloc::vec;
use alloc::vec::Vec;

use crate::{Error, Result};

/// Largest `k` whose `P_k` coefficients fit in `i128`.
pub const MAX_EXACT_P_DEGREE: usize = 27;
/// Largest `k` whose `Q_k` coefficients fit in `i128`.
pub const MAX_EXACT_Q_DEGREE: usize = 26;

/// `f⁽ⁿ⁾(0)` for `n = 0..=n_max` from
/// `y⁽ⁿ⁺¹⁾ = (p-n) y⁽ⁿ⁾ - n(p-n) y⁽ⁿ⁻¹⁾ + n(n-1)² y⁽ⁿ⁻²⁾`.
///
/// Values grow like `((n-1)!!)²`; compare them with relative tolerances.
pub fn taylor_derivs(p: f64, n_max: usize) -> Result<Vec<f64>> {
    check_p(p)?;
    if n_max < 2 {
        return Err(Error::invalid("taylor_derivs needs n_max >= 2"));
    }
    let e = libm::exp(-p);
    let mut y = Vec::with_capacity(n_max + 1);
    y.extend_from_slice(&[e, p * e, (p - 1.0) * (p - 1.0) * e]);
    for n in 2..n_max {
        let nf = n as f64;
        let next = (p - nf) * y[n] - nf * (p - nf) * y[n - 1] + nf * (nf - 1.0) * (nf - 1.0) * y[n - 2];
        y.push(next);
    }
    Ok(y)
}

/// Normalized Taylor coefficients `f⁽ⁿ⁾(0) / n!` for `n < n_terms`.
///
/// Dividing the derivative recurrence by `(n+1)!` gives
/// `t_{n+1} = ((p-n)(t_n - t_{n-1}) + (n-1) t_{n-2}) / (n+1)`,
/// whose entries stay bounded, so it is stable to any order.
pub fn series_coefficients(p: f64, n_terms: usize) -> Result<Vec<f64>> {
    check_p(p)?;
    let e = libm::exp(-p);
    let mut t = vec![e, p * e, 0.5 * (p - 1.0) * (p - 1.0) * e];
    for n in 2..n_terms.saturating_sub(1) {
        let nf = n as f64;
        let next = ((p - nf) * (t[n] - t[n - 1]) + (nf - 1.0) * t[n - 2]) / (nf + 1.0);
        t.push(next);
    }
    t.truncate(n_terms);
    Ok(t)
}

fn check_p(p: f64) -> Result<()> {
    if p >= 0.0 && p.is_finite() {
        Ok(())
    } else {
        Err(Error::domain(alloc::format!("p must be finite and >= 0, got {p}")))
    }
}

/// `(lo)(lo+2)...(hi)` over odd numbers, `1` for an empty range.
fn odd_product(lo: i64, hi: i64, degree: usize) -> Result<i128> {
    let mut acc: i128 = 1;
    let mut j = lo;
    while j <= hi {
        acc = acc
            .checked_mul(j as i128)
            .ok_or(Error::Overflow { degree })?;
        j += 2;
    }
    Ok(acc)
}

fn binomials(k: usize) -> Result<Vec<i128>> {
    let mut row = Vec::with_capacity(k + 1);
    let mut c: i128 = 1;
    row.push(c);
    for j in 0..k {
        c = c
            .checked_mul((k - j) as i128)
            .ok_or(Error::Overflow { degree: k })?
            / (j as i128 + 1);
        row.push(c);
    }
    Ok(row)
}

fn signed_family(k: usize, offset: i64) -> Result<Vec<i128>> {
    let binom = binomials(k)?;
    (0..=k)
        .map(|i| {
            let ratio = odd_product(2 * i as i64 + 1 + offset, 2 * k as i64 - 1 + offset, k)?;
            let mag = ratio
                .checked_mul(binom[i])
                .ok_or(Error::Overflow { degree: k })?;
            Ok(if (k - i) % 2 == 0 { mag } else { -mag })
        })
        .collect()
}

/// Exact coefficients of `P_k`, constant term first.
pub fn poly_p(k: usize) -> Result<Vec<i128>> {
    signed_family(k, 0)
}

/// Exact coefficients of `Q_k`, constant term first.
pub fn poly_q(k: usize) -> Result<Vec<i128>> {
    signed_family(k, 2)
}

fn poly_mul(a: &[i128], b: &[i128], degree: usize) -> Result<Vec<i128>> {
    let mut out = vec![0i128; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        for (j, &y) in b.iter().enumerate() {
            let term = x.checked_mul(y).ok_or(Error::Overflow { degree })?;
            out[i + j] = out[i + j]
                .checked_add(term)
                .ok_or(Error::Overflow { degree })?;
        }
    }
    Ok(out)
}

/// Exact coefficients of the expanded `R_n`.
pub fn r_poly(n: usize) -> Result<Vec<i128>> {
    let k = n / 2;
    if n % 2 == 0 {
        let pk = poly_p(k)?;
        poly_mul(&pk, &pk, n)
    } else {
        let qk = poly_q(k)?;
        let mut sq = poly_mul(&qk, &qk, n)?;
        sq.insert(0, 0);
        Ok(sq)
    }
}

fn horner(coeffs: &[i128], x: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, &c| acc * x + c as f64)
}

/// `R_n(p)`, evaluating `P_k` or `Q_k` by Horner's rule and squaring.
pub fn r_n(p: f64, n: usize) -> Result<f64> {
    let k = n / 2;
    if n % 2 == 0 {
        let v = horner(&poly_p(k)?, p);
        Ok(v * v)
    } else {
        let v = horner(&poly_q(k)?, p);
        Ok(p * v * v)
    }
}

/// Derivatives at zero alongside the exact polynomial families that explain them.
#[derive(Debug, Clone, PartialEq)]
pub struct TaylorTable {
    pub p: f64,
    pub derivs: Vec<f64>,
    pub p_polys: Vec<Vec<i128>>,
    pub q_polys: Vec<Vec<i128>>,
}

impl TaylorTable {
    pub fn new(p: f64, n_max: usize) -> Result<Self> {
        let derivs = taylor_derivs(p, n_max)?;
        let p_polys = (0..=n_max / 2).map(poly_p).collect::<Result<_>>()?;
        let q_polys = (0..=(n_max - 1) / 2).map(poly_q).collect::<Result<_>>()?;
        Ok(TaylorTable {
            p,
            derivs,
            p_polys,
            q_polys,
        })
    }

    /// `e^(-p) R_n(p)` from the exact polynomials.
    pub fn closed_form(&self, n: usize) -> f64 {
        let k = n / 2;
        let e = libm::exp(-self.p);
        if n % 2 == 0 {
            let v = horner(&self.p_polys[k], self.p);
            e * v * v
        } else {
            let v = horner(&self.q_polys[k], self.p);
            e * self.p * v * v
        }
    }

    /// Worst relative disagreement between the recurrence and the closed form.
    /// Entries where both vanish count as exact.
    pub fn max_relative_error(&self) -> f64 {
        self.derivs
            .iter()
            .enumerate()
            .map(|(n, &y)| relative_error(y, self.closed_form(n)))
            .fold(0.0, f64::max)
    }
}

pub(crate) fn relative_error(a: f64, b: f64) -> f64 {
    let scale = a.abs().max(b.abs());
    if scale == 0.0 {
        0.0
    } else {
        (a - b).abs() / scale
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn derivatives_at_zero_p() {
        let y = taylor_derivs(0.0, 4).unwrap();
        assert_eq!(y, vec![1.0, 0.0, 1.0, 0.0, 9.0]);
    }

    #[test]
    fn derivative_examples() {
        assert_eq!(taylor_derivs(1.0, 2).unwrap()[2], 0.0);
        let y3 = taylor_derivs(2.0, 3).unwrap()[3];
        let expected = 2.0 * (2.0f64 - 3.0).powi(2) * libm::exp(-2.0);
        assert!((y3 - expected).abs() <= 1e-15 * expected);
        assert!(taylor_derivs(1.0, 1).is_err());
        assert!(taylor_derivs(-0.1, 4).is_err());
    }

    #[test]
    fn small_polynomials() {
        assert_eq!(poly_p(0).unwrap(), vec![1]);
        assert_eq!(poly_p(1).unwrap(), vec![-1, 1]);
        assert_eq!(poly_p(2).unwrap(), vec![3, -6, 1]);
        assert_eq!(poly_q(0).unwrap(), vec![1]);
        assert_eq!(poly_q(1).unwrap(), vec![-3, 1]);
        assert_eq!(poly_q(3).unwrap(), vec![-105, 105, -21, 1]);
    }

    #[test]
    fn leading_coefficients_are_one() {
        for k in 0..=MAX_EXACT_Q_DEGREE {
            let p = poly_p(k).unwrap();
            let q = poly_q(k).unwrap();
            assert_eq!((p.len(), q.len()), (k + 1, k + 1));
            assert_eq!((p[k], q[k]), (1, 1));
        }
    }

    #[test]
    fn exact_range_is_enforced() {
        assert!(poly_p(MAX_EXACT_P_DEGREE).is_ok());
        assert_eq!(
            poly_p(MAX_EXACT_P_DEGREE + 1),
            Err(Error::Overflow { degree: MAX_EXACT_P_DEGREE + 1 })
        );
        assert!(poly_q(MAX_EXACT_Q_DEGREE).is_ok());
        assert!(matches!(poly_q(MAX_EXACT_Q_DEGREE + 1), Err(Error::Overflow { .. })));
        assert!(r_n(1.0, 200).is_err());
    }

    #[test]
    fn r_n_examples() {
        for p in [0.0, 0.3, 4.0] {
            assert_eq!(r_n(p, 0).unwrap(), 1.0);
        }
        assert_eq!(r_n(0.0, 1).unwrap(), 0.0);
        assert_eq!(r_n(3.0, 4).unwrap(), 36.0);
    }

    #[test]
    fn r_poly_parity() {
        assert_eq!(r_poly(3).unwrap(), vec![0, 9, -6, 1]);
        assert_eq!(r_poly(4).unwrap(), vec![9, -36, 42, -12, 1]);
    }

    #[test]
    fn normalized_coefficients_match_derivatives() {
        for p in [0.0, 0.5, 2.0, 5.0] {
            let y = taylor_derivs(p, 16).unwrap();
            let t = series_coefficients(p, 17).unwrap();
            let mut fact = 1.0;
            for n in 0..=16 {
                if n > 0 {
                    fact *= n as f64;
                }
                assert!(relative_error(t[n] * fact, y[n]) < 1e-12 || y[n].abs() < 1e-12);
            }
        }
        assert_eq!(series_coefficients(1.0, 1).unwrap().len(), 1);
        assert_eq!(series_coefficients(1.0, 0).unwrap().len(), 0);
    }

    #[test]
    fn table_agrees_with_closed_form() {
        for p in [0.0, 0.5, 1.0, 2.0, 5.0] {
            let table = TaylorTable::new(p, 16).unwrap();
            assert!(table.max_relative_error() <= 1e-8);
            for n in 0..=16 {
                assert!(relative_error(table.closed_form(n), libm::exp(-p) * r_n(p, n).unwrap()) < 1e-15);
            }
        }
    }
}
