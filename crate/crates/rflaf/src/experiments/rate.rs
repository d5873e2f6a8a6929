use rflaf_core::kernel::RbfParams;
use rflaf_core::rate::{rate_study, RateStudy, RateTarget};

use super::{num, Check, Outputs};
use crate::config::RateStudyConfig;
use crate::error::Result;
use crate::table::Table;

pub fn study(cfg: &RateStudyConfig, seed: u64) -> Result<RateStudy> {
    let target = RateTarget::new(RbfParams::new(cfg.center, cfg.width)?, cfg.v0, cfg.b.clone())?;
    Ok(rate_study(&target, &cfg.m_list, cfg.trials, cfg.test_points, seed)?)
}

pub(super) fn run(cfg: &RateStudyConfig, seed: u64, out: &mut Outputs) -> Result<Vec<Check>> {
    let study = study(cfg, seed)?;
    let mut table = Table::new(["M", "mean_abs_err", "min_trial", "max_trial"]);
    for r in &study.rows {
        let lo = r.trial_errors.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = r.trial_errors.iter().copied().fold(0.0, f64::max);
        table.push([r.m.to_string(), num(r.mean_abs_err), num(lo), num(hi)]);
    }
    out.table("rate.txt", &table)?;
    let mut fit = Table::new(["slope", "slope_min", "slope_max"]);
    let slope = study.slope.map_or("nan".to_string(), |s| format!("{s:.4}"));
    fit.push([slope.clone(), cfg.slope_min.to_string(), cfg.slope_max.to_string()]);
    out.table("rate_fit.txt", &fit)?;
    let ok = study.slope.is_some_and(|s| (cfg.slope_min..=cfg.slope_max).contains(&s));
    Ok(vec![Check::new(
        "log-log slope",
        ok,
        format!("slope {slope} (accepted [{}, {}])", cfg.slope_min, cfg.slope_max),
    )])
}
