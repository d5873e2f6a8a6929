use rflaf_core::basis::{build_grid, linspace, quadrature_weights_of};
use rflaf_core::model::RflafModel;

use super::train::compare_activation;
use super::{num, Check, Outputs};
use crate::config::{parse_sigma, ExportConfig};
use crate::error::Result;
use crate::format::load_checkpoint;
use crate::table::Table;

enum Source {
    Learned(RflafModel),
    Quadrature { grid: rflaf_core::basis::ActivationGrid, weights: Vec<f64> },
}

impl Source {
    fn eval(&self, z: f64) -> f64 {
        match self {
            Source::Learned(m) => m.activation(z),
            Source::Quadrature { grid, weights } => grid.activation(weights, z),
        }
    }
}

pub(super) fn run(cfg: &ExportConfig, out: &mut Outputs) -> Result<Vec<Check>> {
    let sigma = cfg.target.as_deref().map(parse_sigma).transpose()?;
    let source = match (&cfg.checkpoint, &sigma) {
        (Some(path), _) => Source::Learned(load_checkpoint(path)?),
        (None, Some(s)) => {
            let grid = build_grid(cfg.support[0], cfg.support[1], cfg.basis, cfg.width)?;
            let weights = quadrature_weights_of(&grid, |z| s.eval(z))?.into_inner();
            Source::Quadrature { grid, weights }
        }
        (None, None) => unreachable!("validated: a target is required without a checkpoint"),
    };

    let Some(sigma) = sigma else {
        let mut table = Table::new(["z", "learned"]);
        for z in linspace(cfg.support[0], cfg.support[1], cfg.points) {
            table.push([num(z), num(source.eval(z))]);
        }
        out.table("activation.txt", &table)?;
        return Ok(Vec::new());
    };

    let cmp = compare_activation(|z| source.eval(z), &sigma, cfg.support, cfg.points)?;
    let mut table = Table::new(["z", "learned", "learned_aligned", "true"]);
    for i in 0..cmp.z.len() {
        table.push([num(cmp.z[i]), num(cmp.learned[i]), num(cmp.scale * cmp.learned[i]), num(cmp.truth[i])]);
    }
    out.table("activation.txt", &table)?;
    let detail = format!("pearson {:.4} after scale {:.4e}", cmp.correlation, cmp.scale);
    Ok(match cfg.min_correlation {
        Some(min) => vec![Check::new("activation correlation", cmp.correlation >= min, format!("{detail} (min {min})"))],
        None => vec![Check::new("activation correlation", true, detail)],
    })
}
