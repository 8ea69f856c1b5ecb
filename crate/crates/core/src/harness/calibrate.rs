//! Fits the two free knobs of the buffer surplus model, premium per slot and
//! claim size unit, so that the analytic ruin probability passes through a
//! set of target points of a sweep.

use super::first_server_surplus;
use crate::error::ConfigError;
use crate::scenario::Config;

#[derive(Debug, Clone, PartialEq)]
pub struct CalibrationPoint {
    pub swept_value: f64,
    pub target: f64,
    pub model: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Calibration {
    pub premium_kb_per_slot: f64,
    pub claim_unit_kb: f64,
    pub points: Vec<CalibrationPoint>,
}

impl Calibration {
    pub fn max_abs_error(&self) -> f64 {
        self.points
            .iter()
            .map(|p| (p.model - p.target).abs())
            .fold(0.0, f64::max)
    }
}

fn model_values(
    base: &Config,
    swept_param: &str,
    targets: &[(f64, f64)],
    premium_kb: f64,
    unit_kb: f64,
) -> Result<Vec<f64>, ConfigError> {
    targets
        .iter()
        .map(|&(x, _)| {
            let mut c = base.clone();
            c.ruin.premium_kb_per_slot = Some(premium_kb);
            c.ruin.claim_unit_kb = unit_kb;
            c.set_param(swept_param, x)?;
            let params = first_server_surplus(&c).ok_or_else(|| {
                ConfigError::Invalid(vec![crate::error::FieldError::new(
                    "servers.count",
                    "no server to calibrate",
                )])
            })?;
            Ok(params
                .analytic(c.ruin.analytic_terms)
                .map_or(f64::NAN, |e| e.probability))
        })
        .collect()
}

/// Grid search in log space over (premium, claim unit), refined around the
/// best cell a few times. The first pass is dense because the error surface
/// has narrow valleys.
pub fn calibrate_ruin(base: &Config, swept_param: &str, targets: &[(f64, f64)]) -> Result<Calibration, ConfigError> {
    let mut center = (2.5f64, 2.5f64); // log10 KB
    let mut half_span = 3.5f64;
    let mut best = (f64::INFINITY, 0.0, 0.0);
    for pass in 0..12 {
        let steps: usize = if pass == 0 { 281 } else { 41 };
        for i in 0..steps {
            for j in 0..steps {
                let lp = center.0 - half_span + 2.0 * half_span * i as f64 / (steps - 1) as f64;
                let lu = center.1 - half_span + 2.0 * half_span * j as f64 / (steps - 1) as f64;
                let (premium, unit) = (10f64.powf(lp), 10f64.powf(lu));
                let values = model_values(base, swept_param, targets, premium, unit)?;
                let sse: f64 = values.iter().zip(targets).map(|(m, (_, t))| (m - t).powi(2)).sum();
                if sse < best.0 {
                    best = (sse, lp, lu);
                }
            }
        }
        center = (best.1, best.2);
        half_span /= if pass == 0 { 40.0 } else { 3.0 };
    }
    let premium_kb_per_slot = 10f64.powf(best.1);
    let claim_unit_kb = 10f64.powf(best.2);
    let values = model_values(base, swept_param, targets, premium_kb_per_slot, claim_unit_kb)?;
    Ok(Calibration {
        premium_kb_per_slot,
        claim_unit_kb,
        points: targets
            .iter()
            .zip(values)
            .map(|(&(swept_value, target), model)| CalibrationPoint {
                swept_value,
                target,
                model,
            })
            .collect(),
    })
}
