use rflaf_core::basis::{linspace, quadrature_weights_of, ActivationGrid, QuadratureBounds};
use rflaf_core::bounds::{grid_requirement, theory_bounds};
use rflaf_core::data::Sigma;
use rflaf_core::linalg::{norm_l1, norm_sq};

use super::{num, Check, Outputs};
use crate::config::{parse_sigma, BoundsConfig};
use crate::error::Result;
use crate::table::Table;

#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRow {
    pub n_basis: usize,
    pub width: f64,
    pub l1: f64,
    pub l2_squared: f64,
    pub bounds: QuadratureBounds,
    pub sup_err: f64,
}

impl QuadratureRow {
    pub fn holds(&self) -> bool {
        self.l1 <= self.bounds.l1 && self.l2_squared <= self.bounds.l2_squared
    }
}

/// Quadrature weights for `sigma` on a grid with `N` centers and width
/// `ratio` spacings, with their norms, the bounds and the sup-norm error on
/// `points` evenly spaced points of the support.
pub fn quadrature_row(sigma: &Sigma, support: [f64; 2], n_basis: usize, ratio: f64, points: usize) -> Result<QuadratureRow> {
    let grid = ActivationGrid::with_width_ratio(support[0], support[1], n_basis, ratio)?;
    let a = quadrature_weights_of(&grid, |z| sigma.eval(z))?;
    let bounds = QuadratureBounds::new(&grid, sigma.sup_norm());
    let sup_err = linspace(support[0], support[1], points)
        .into_iter()
        .map(|z| (grid.activation(a.as_slice(), z) - sigma.eval(z)).abs())
        .fold(0.0, f64::max);
    Ok(QuadratureRow {
        n_basis,
        width: grid.width(),
        l1: norm_l1(a.as_slice()),
        l2_squared: norm_sq(a.as_slice()),
        bounds,
        sup_err,
    })
}

pub(super) fn run(cfg: &BoundsConfig, out: &mut Outputs) -> Result<Vec<Check>> {
    let mut checks = Vec::new();
    let report = theory_bounds(cfg.h, cfg.basis, cfg.features, cfg.delta, cfg.sigma_sup, cfg.support_len, cfg.radius)?;
    let mut table = Table::new(["quantity", "value"]);
    for (k, v) in [
        ("h", cfg.h),
        ("N", cfg.basis as f64),
        ("M", cfg.features as f64),
        ("delta", cfg.delta),
        ("sigma_sup", cfg.sigma_sup),
        ("support_len", cfg.support_len),
        ("R", cfg.radius),
        ("a_norm_bound", report.a_norm_bound),
        ("v_norm_bound", report.v_norm_bound),
        ("f_sup_bound", report.f_sup_bound),
    ] {
        table.push([k.to_string(), num(v)]);
    }
    if let (Some(eps), Some(l)) = (cfg.eps, cfg.lipschitz) {
        let req = grid_requirement(eps, l, cfg.radius, cfg.sigma_sup, cfg.support_len)?;
        table.push(["grid_max_width".to_string(), num(req.max_width)]);
        table.push(["grid_max_spacing".to_string(), num(req.max_spacing)]);
        table.push(["grid_min_basis".to_string(), req.min_basis(cfg.support_len).to_string()]);
    }
    out.table("bounds.txt", &table)?;
    let finite = [report.a_norm_bound, report.v_norm_bound, report.f_sup_bound]
        .iter()
        .all(|b| b.is_finite() && *b >= 0.0);
    checks.push(Check::new(
        "norm bounds",
        finite,
        format!("a {:.4e} v {:.4e} f {:.4e}", report.a_norm_bound, report.v_norm_bound, report.f_sup_bound),
    ));

    let mut quad = Table::new(["target", "N", "h", "l1", "l1_bound", "l2_squared", "l2_squared_bound", "sup_err", "holds"]);
    for name in &cfg.quadrature_targets {
        let sigma = parse_sigma(name)?;
        let mut rows = Vec::new();
        for &n in &cfg.quadrature_basis {
            let r = quadrature_row(&sigma, cfg.quadrature_support, n, cfg.quadrature_width_ratio, cfg.quadrature_points)?;
            quad.push([
                name.clone(),
                n.to_string(),
                num(r.width),
                num(r.l1),
                num(r.bounds.l1),
                num(r.l2_squared),
                num(r.bounds.l2_squared),
                num(r.sup_err),
                r.holds().to_string(),
            ]);
            rows.push(r);
        }
        let held = rows.iter().filter(|r| r.holds()).count();
        checks.push(Check::new(
            format!("{name} quadrature norm bounds"),
            held == rows.len(),
            format!("{held}/{} grids within both bounds", rows.len()),
        ));
        let decreasing = rows.windows(2).all(|w| w[1].sup_err < w[0].sup_err);
        let errs: Vec<String> = rows.iter().map(|r| format!("{:.3e}", r.sup_err)).collect();
        checks.push(Check::new(
            format!("{name} quadrature refinement"),
            decreasing,
            format!("sup errors {}", errs.join(" ")),
        ));
    }
    out.table("quadrature.txt", &quad)?;
    Ok(checks)
}
