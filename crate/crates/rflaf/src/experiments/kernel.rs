use rand::RngCore;
use rflaf_core::kernel::{kernel_closed, kernel_mc, McEstimate, RbfParams};
use rflaf_core::rng::{self, derive_seed, stream};

use super::{num, Check, Outputs};
use crate::config::KernelVerifyConfig;
use crate::error::Result;
use crate::table::Table;

#[derive(Debug, Clone, PartialEq)]
pub struct KernelTrial {
    pub x: Vec<f64>,
    pub x2: Vec<f64>,
    pub closed: f64,
    pub mc: McEstimate,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct KernelSetting {
    pub dim: usize,
    pub params: RbfParams,
    pub trials: Vec<KernelTrial>,
}

impl KernelSetting {
    pub fn passes(&self) -> usize {
        self.trials.iter().filter(|t| t.passed).count()
    }
}

/// Closed form against Monte Carlo for random pairs `x, x' ~ N(0, I_d/d)`,
/// one setting per `(d, c, h)` combination.
pub fn kernel_verify(cfg: &KernelVerifyConfig, seed: u64) -> Result<Vec<KernelSetting>> {
    let mut settings = Vec::new();
    for &dim in &cfg.dims {
        for &center in &cfg.centers {
            for &width in &cfg.widths {
                let params = RbfParams::new(center, width)?;
                let mut rng = rng::seeded(derive_seed(seed, settings.len() as u64), stream::PAIRS);
                let scale = 1.0 / (dim as f64).sqrt();
                let mut trials = Vec::with_capacity(cfg.trials);
                for _ in 0..cfg.trials {
                    let x: Vec<f64> = rng::normal_vec(&mut rng, dim).into_iter().map(|v| v * scale).collect();
                    let x2: Vec<f64> = rng::normal_vec(&mut rng, dim).into_iter().map(|v| v * scale).collect();
                    let closed = kernel_closed(&x, &x2, &params)?;
                    let mc = kernel_mc(&x, &x2, &params, cfg.samples, rng.next_u64())?;
                    let passed = mc.covers(closed, cfg.k_sigma);
                    trials.push(KernelTrial { x, x2, closed, mc, passed });
                }
                settings.push(KernelSetting { dim, params, trials });
            }
        }
    }
    Ok(settings)
}

pub(super) fn run(cfg: &KernelVerifyConfig, seed: u64, out: &mut Outputs) -> Result<Vec<Check>> {
    let settings = kernel_verify(cfg, seed)?;
    let mut trials = Table::new(["d", "c", "h", "trial", "closed", "mc_mean", "mc_stderr", "z_score", "pass"]);
    let mut summary = Table::new(["d", "c", "h", "passes", "trials", "pass"]);
    let mut checks = Vec::new();
    for s in &settings {
        let (c, h) = (s.params.center(), s.params.width());
        for (i, t) in s.trials.iter().enumerate() {
            let z = (t.mc.mean - t.closed) / t.mc.stderr;
            trials.push([
                s.dim.to_string(),
                c.to_string(),
                h.to_string(),
                i.to_string(),
                num(t.closed),
                num(t.mc.mean),
                num(t.mc.stderr),
                format!("{z:.3}"),
                t.passed.to_string(),
            ]);
        }
        let ok = s.passes() >= cfg.min_passes;
        summary.push([
            s.dim.to_string(),
            c.to_string(),
            h.to_string(),
            s.passes().to_string(),
            s.trials.len().to_string(),
            ok.to_string(),
        ]);
        checks.push(Check::new(
            format!("kernel d={} c={c} h={h}", s.dim),
            ok,
            format!("{}/{} within {} stderr", s.passes(), s.trials.len(), cfg.k_sigma),
        ));
    }
    out.table("kernel_trials.txt", &trials)?;
    out.table("kernel_summary.txt", &summary)?;
    Ok(checks)
}
