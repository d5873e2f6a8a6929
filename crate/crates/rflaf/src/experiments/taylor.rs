use rflaf_core::basis::linspace;
use rflaf_core::kernel::{kernel_rot, kernel_taylor, poly_p, poly_q, r_poly, RbfParams, TaylorTable};

use super::{num, Check, Outputs};
use crate::config::TaylorVerifyConfig;
use crate::error::Result;
use crate::table::Table;

/// `R_0 .. R_8` written out in full, constant term first.
pub const LISTED_R: [&[i128]; 9] = [
    &[1],
    &[0, 1],
    &[1, -2, 1],
    &[0, 9, -6, 1],
    &[9, -36, 42, -12, 1],
    &[0, 225, -300, 130, -20, 1],
    &[225, -1350, 2475, -1380, 315, -30, 1],
    &[0, 11025, -22050, 15435, -4620, 651, -42, 1],
    &[11025, -88200, 220500, -182280, 67830, -12600, 1204, -56, 1],
];

/// `P_0 .. P_4`, constant term first.
pub const LISTED_P: [&[i128]; 5] = [&[1], &[-1, 1], &[3, -6, 1], &[-15, 45, -15, 1], &[105, -420, 210, -28, 1]];

/// `Q_0 .. Q_3`, constant term first.
pub const LISTED_Q: [&[i128]; 4] = [&[1], &[-3, 1], &[15, -10, 1], &[-105, 105, -21, 1]];

/// Mismatches between the computed families and the listed ones, as
/// `(family, index)`.
pub fn listed_mismatches() -> Result<Vec<(char, usize)>> {
    let mut bad = Vec::new();
    for (k, want) in LISTED_P.iter().enumerate() {
        if poly_p(k)? != *want {
            bad.push(('P', k));
        }
    }
    for (k, want) in LISTED_Q.iter().enumerate() {
        if poly_q(k)? != *want {
            bad.push(('Q', k));
        }
    }
    for (n, want) in LISTED_R.iter().enumerate() {
        if r_poly(n)? != *want {
            bad.push(('R', n));
        }
    }
    Ok(bad)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IdentityRow {
    pub p: f64,
    pub n: usize,
    pub recurrence: f64,
    pub closed: f64,
    pub rel_err: f64,
}

/// Recurrence values against `e^(-p) R_n(p)` for every `p` and `n <= n_max`.
pub fn identity_rows(p_values: &[f64], n_max: usize) -> Result<Vec<IdentityRow>> {
    let mut rows = Vec::new();
    for &p in p_values {
        let table = TaylorTable::new(p, n_max)?;
        for (n, &recurrence) in table.derivs.iter().enumerate() {
            let closed = table.closed_form(n);
            let scale = recurrence.abs().max(closed.abs());
            let rel_err = if scale == 0.0 { 0.0 } else { (recurrence - closed).abs() / scale };
            rows.push(IdentityRow { p, n, recurrence, closed, rel_err });
        }
    }
    Ok(rows)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvergenceRow {
    pub width: f64,
    pub center: f64,
    pub n_terms: usize,
    pub max_abs_err: f64,
    pub worst_r: f64,
}

/// Largest truncation error of the `n_terms` partial sum over an evenly
/// spaced grid of inner products in `[-1, 1]`.
pub fn convergence_row(params: &RbfParams, n_terms: usize, grid_points: usize) -> Result<ConvergenceRow> {
    let mut worst = (0.0f64, 0.0);
    for r in linspace(-1.0, 1.0, grid_points) {
        let err = (kernel_taylor(r, params, n_terms)? - kernel_rot(r, params)?).abs();
        if err > worst.0 {
            worst = (err, r);
        }
    }
    Ok(ConvergenceRow {
        width: params.width(),
        center: params.center(),
        n_terms,
        max_abs_err: worst.0,
        worst_r: worst.1,
    })
}

fn coeffs(c: &[i128]) -> String {
    c.iter().map(i128::to_string).collect::<Vec<_>>().join(",")
}

pub(super) fn run(cfg: &TaylorVerifyConfig, out: &mut Outputs) -> Result<Vec<Check>> {
    let mut checks = Vec::new();

    let mut polys = Table::new(["family", "index", "coefficients"]);
    for k in 0..=cfg.n_max / 2 {
        polys.push(["P".to_string(), k.to_string(), coeffs(&poly_p(k)?)]);
    }
    for k in 0..=(cfg.n_max - 1) / 2 {
        polys.push(["Q".to_string(), k.to_string(), coeffs(&poly_q(k)?)]);
    }
    for n in 0..=cfg.n_max {
        polys.push(["R".to_string(), n.to_string(), coeffs(&r_poly(n)?)]);
    }
    out.table("polynomials.txt", &polys)?;
    let bad = listed_mismatches()?;
    checks.push(Check::new(
        "listed polynomials",
        bad.is_empty(),
        if bad.is_empty() { "P0..P4 Q0..Q3 R0..R8 exact".to_string() } else { format!("mismatch {bad:?}") },
    ));

    let rows = identity_rows(&cfg.p_values, cfg.n_max)?;
    let mut identity = Table::new(["p", "n", "recurrence", "closed_form", "rel_err", "pass"]);
    for r in &rows {
        identity.push([
            r.p.to_string(),
            r.n.to_string(),
            num(r.recurrence),
            num(r.closed),
            num(r.rel_err),
            (r.rel_err <= cfg.rel_tol).to_string(),
        ]);
    }
    out.table("identity.txt", &identity)?;
    let worst = rows.iter().map(|r| r.rel_err).fold(0.0, f64::max);
    checks.push(Check::new(
        "recurrence identity",
        worst <= cfg.rel_tol,
        format!("max rel err {worst:.3e} (tol {:e})", cfg.rel_tol),
    ));

    let mut conv = Table::new(["h", "c", "terms", "max_abs_err", "worst_r", "pass"]);
    for &width in &cfg.widths {
        for &center in &cfg.centers {
            let row = convergence_row(&RbfParams::new(center, width)?, cfg.n_terms, cfg.grid_points)?;
            let ok = row.max_abs_err <= cfg.abs_tol;
            conv.push([
                width.to_string(),
                center.to_string(),
                row.n_terms.to_string(),
                num(row.max_abs_err),
                row.worst_r.to_string(),
                ok.to_string(),
            ]);
            checks.push(Check::new(
                format!("series h={width} c={center}"),
                ok,
                format!("max err {:.3e} at r={:.4} with {} terms (tol {:e})", row.max_abs_err, row.worst_r, row.n_terms, cfg.abs_tol),
            ));
        }
    }
    out.table("convergence.txt", &conv)?;
    Ok(checks)
}
