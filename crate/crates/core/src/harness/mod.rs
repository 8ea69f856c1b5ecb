//! Replicated experiments over swept parameters.
//!
//! Replication `r` of every swept value uses sub-seed `derive(seed, r)`, so
//! compared values and methods see common random numbers. Results are sorted
//! by (swept value, replication) before they leave this module, which keeps
//! output independent of the worker count.

mod calibrate;
mod output;
mod presets;

pub use calibrate::{calibrate_ruin, Calibration, CalibrationPoint};
pub use output::{emit_csv, format_sig9, write_csv, CSV_HEADER};
pub use presets::{ExperimentPreset, Pipeline, PresetName};

use rayon::prelude::*;

use crate::association::{
    admission_metrics, baseline_association_greedy, baseline_association_uncapped, ruin_association, Association,
    AssociationOptions,
};
use crate::error::{HarnessError, ModelError};
use crate::offload::{
    baseline_offload, contexts_for, counted, optimal_offload, total_energy, BaselinePolicy, EnergyTotals,
    OffloadContext, OffloadDecision,
};
use crate::ruin::{ruin_probability_mc, SurplusParams};
use crate::scenario::{generate_scenario, server_specs, Config, Scenario};
use crate::seed::{self, Stream};
use crate::units::bits_to_mb;

/// Named metric values of one replication.
pub type Metrics = Vec<(&'static str, f64)>;

/// Environment variable selecting the worker count (0 or unset = automatic).
pub const THREADS_ENV: &str = "MECSIM_THREADS";

#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub swept_value: f64,
    pub replication: usize,
    pub metric: String,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Aggregate {
    pub swept_value: f64,
    pub metric: String,
    pub mean: f64,
    pub std_error: f64,
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentResult {
    pub preset: String,
    pub swept_param: String,
    pub rows: Vec<Row>,
    pub aggregates: Vec<Aggregate>,
}

impl ExperimentResult {
    pub fn new(preset: String, swept_param: String, rows: Vec<Row>) -> Self {
        let aggregates = aggregate(&rows);
        ExperimentResult {
            preset,
            swept_param,
            rows,
            aggregates,
        }
    }

    pub fn aggregate(&self, swept_value: f64, metric: &str) -> Option<&Aggregate> {
        self.aggregates
            .iter()
            .find(|a| a.swept_value == swept_value && a.metric == metric)
    }

    /// Per-replication values of one metric at one swept value.
    pub fn samples(&self, swept_value: f64, metric: &str) -> Vec<f64> {
        self.rows
            .iter()
            .filter(|r| r.swept_value == swept_value && r.metric == metric)
            .map(|r| r.value)
            .collect()
    }

    /// Swept values in sweep order.
    pub fn swept_values(&self) -> Vec<f64> {
        let mut out: Vec<f64> = Vec::new();
        for r in &self.rows {
            if out.last() != Some(&r.swept_value) {
                out.push(r.swept_value);
            }
        }
        out
    }
}

/// Mean and standard error (sample standard deviation over √n) per
/// (swept value, metric), in order of first appearance.
pub fn aggregate(rows: &[Row]) -> Vec<Aggregate> {
    let mut groups: Vec<(f64, &str, Vec<f64>)> = Vec::new();
    for r in rows {
        match groups
            .iter_mut()
            .find(|(v, m, _)| *v == r.swept_value && *m == r.metric)
        {
            Some(g) => g.2.push(r.value),
            None => groups.push((r.swept_value, &r.metric, vec![r.value])),
        }
    }
    groups
        .into_iter()
        .map(|(swept_value, metric, values)| {
            let n = values.len() as f64;
            let mean = values.iter().sum::<f64>() / n;
            let std_error = if values.len() > 1 {
                let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
                (var / n).sqrt()
            } else {
                0.0
            };
            Aggregate {
                swept_value,
                metric: metric.to_string(),
                mean,
                std_error,
                count: values.len(),
            }
        })
        .collect()
}

/// Worker count from `MECSIM_THREADS`; 0 means let rayon decide.
pub fn threads_from_env() -> usize {
    std::env::var(THREADS_ENV)
        .ok()
        .and_then(|v| v.trim().parse().ok())
        .unwrap_or(0)
}

pub fn run_experiment(preset: &ExperimentPreset) -> Result<ExperimentResult, HarnessError> {
    run_experiment_with_threads(preset, threads_from_env())
}

pub fn run_experiment_with_threads(
    preset: &ExperimentPreset,
    threads: usize,
) -> Result<ExperimentResult, HarnessError> {
    let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build()?;
    pool.install(|| run_in_pool(preset))
}

fn run_in_pool(preset: &ExperimentPreset) -> Result<ExperimentResult, HarnessError> {
    let configs = preset.configs()?;
    let pipeline = preset.pipeline();
    let jobs: Vec<(usize, usize)> = (0..configs.len())
        .flat_map(|v| (0..preset.replications).map(move |r| (v, r)))
        .collect();

    let mut outcomes: Vec<(usize, usize, Result<Metrics, ModelError>)> = jobs
        .into_par_iter()
        .map(|(v, r)| {
            let sub_seed = seed::derive(preset.seed, r as u64);
            (v, r, run_replication(&configs[v], pipeline, sub_seed))
        })
        .collect();
    outcomes.sort_by_key(|(v, r, _)| (*v, *r));

    let mut rows = Vec::new();
    for (v, r, outcome) in outcomes {
        let metrics = outcome.map_err(|source| HarnessError::Replication {
            replication: r,
            sub_seed: seed::derive(preset.seed, r as u64),
            source,
        })?;
        rows.extend(metrics.into_iter().map(|(metric, value)| Row {
            swept_value: preset.values[v],
            replication: r,
            metric: metric.to_string(),
            value,
        }));
    }
    Ok(ExperimentResult::new(
        preset.name.as_str().to_string(),
        preset.swept_param.clone(),
        rows,
    ))
}

/// Metrics of one replication, in a fixed order.
pub fn run_replication(config: &Config, pipeline: Pipeline, sub_seed: u64) -> Result<Metrics, ModelError> {
    match pipeline {
        Pipeline::Ruin => ruin_metrics(config, sub_seed),
        Pipeline::Association => association_metrics(config, sub_seed),
        Pipeline::Full => full_metrics(config, sub_seed),
    }
}

/// Surplus model of the first configured server.
pub fn first_server_surplus(config: &Config) -> Option<SurplusParams> {
    let server = server_specs(config).into_iter().next()?;
    Some(SurplusParams::for_server(
        &server,
        &config.ruin,
        config.channel.cycles_per_bit,
    ))
}

fn ruin_metrics(config: &Config, sub_seed: u64) -> Result<Metrics, ModelError> {
    let Some(params) = first_server_surplus(config) else {
        return Ok(Vec::new());
    };
    let mc = ruin_probability_mc(
        &params,
        config.ruin.paths,
        seed::stream_seed(sub_seed, Stream::RuinPaths),
    )?;
    let analytic = params.analytic(config.ruin.analytic_terms)?;
    Ok(vec![
        ("ruin_probability", mc.probability),
        ("ruin_std_error", mc.std_error),
        ("ruin_probability_analytic", analytic.probability),
        ("ruin_analytic_clamped", f64::from(u8::from(analytic.clamped))),
    ])
}

struct Associated {
    scenario: Scenario,
    proposed: Association,
    greedy: Association,
    uncapped: Association,
}

/// Ruin-aware association on one scenario, with each server's Ψ refreshed
/// from the analytic sum at its current residual buffer.
pub fn associate_proposed(config: &Config, scenario: &Scenario) -> Result<Association, ModelError> {
    let options = AssociationOptions {
        literal_or: config.experiment.algorithm1_literal_or,
    };
    let surplus: Vec<SurplusParams> = scenario
        .servers
        .iter()
        .map(|s| SurplusParams::for_server(s, &config.ruin, config.channel.cycles_per_bit))
        .collect();
    let terms = config.ruin.analytic_terms;
    let mut failure = None;
    let (proposed, _) = ruin_association(scenario, options, |n, residual| {
        match surplus[n].with_surplus(residual).analytic(terms) {
            Ok(e) => e.probability,
            Err(e) => {
                failure.get_or_insert(e);
                1.0
            }
        }
    });
    match failure {
        Some(e) => Err(e),
        None => Ok(proposed),
    }
}

fn associate(config: &Config, sub_seed: u64) -> Result<Associated, ModelError> {
    let scenario = generate_scenario(config, sub_seed);
    let proposed = associate_proposed(config, &scenario)?;
    let greedy = baseline_association_greedy(&scenario);
    let uncapped = baseline_association_uncapped(&scenario);
    Ok(Associated {
        scenario,
        proposed,
        greedy,
        uncapped,
    })
}

fn admission_rows(a: &Associated) -> Metrics {
    let mp = admission_metrics(&a.proposed, &a.scenario);
    let mg = admission_metrics(&a.greedy, &a.scenario);
    let mu = admission_metrics(&a.uncapped, &a.scenario);
    let capacity: f64 = a.scenario.servers.iter().map(|s| s.buffer_free_init - s.epsilon).sum();
    let mut out = vec![
        ("admitted_fraction_proposed", mp.admitted_fraction),
        ("admitted_fraction_greedy", mg.admitted_fraction),
        ("admitted_fraction_uncapped", mu.admitted_fraction),
        ("buffer_usage_mb_proposed", bits_to_mb(mp.sum_buffer_usage)),
        ("buffer_usage_mb_greedy", bits_to_mb(mg.sum_buffer_usage)),
        ("buffer_usage_mb_uncapped", bits_to_mb(mu.sum_buffer_usage)),
        ("buffer_capacity_mb", bits_to_mb(capacity)),
        ("association_rounds", a.proposed.rounds as f64),
    ];
    if mp.zero_denominator {
        out.push(("zero_denominator", 1.0));
    }
    out
}

fn association_metrics(config: &Config, sub_seed: u64) -> Result<Metrics, ModelError> {
    Ok(admission_rows(&associate(config, sub_seed)?))
}

fn full_metrics(config: &Config, sub_seed: u64) -> Result<Metrics, ModelError> {
    let associated = associate(config, sub_seed)?;
    let mut out = admission_rows(&associated);
    let Associated {
        scenario,
        proposed: assoc,
        ..
    } = associated;

    let omega = config.offload.omega;
    let contexts = contexts_for(&scenario, &assoc, omega)?;
    let optimal: Vec<OffloadDecision> = contexts.iter().map(|(_, c)| optimal_offload(c)).collect();
    let keep: Vec<bool> = optimal
        .iter()
        .map(|d| counted(d, config.offload.infeasible_policy))
        .collect();
    let select = |decisions: &[OffloadDecision]| -> (Vec<OffloadDecision>, Vec<OffloadContext>) {
        decisions
            .iter()
            .zip(&contexts)
            .zip(&keep)
            .filter(|(_, &k)| k)
            .map(|((d, (_, c)), _)| (*d, *c))
            .unzip()
    };
    let equal: Vec<OffloadDecision> = contexts
        .iter()
        .map(|(_, c)| baseline_offload(c, BaselinePolicy::Equal))
        .collect();
    let all: Vec<OffloadDecision> = contexts
        .iter()
        .map(|(_, c)| baseline_offload(c, BaselinePolicy::All))
        .collect();

    let (d_opt, c_opt) = select(&optimal);
    let (d_eq, c_eq) = select(&equal);
    let (d_all, c_all) = select(&all);
    let e_opt = total_energy(&d_opt, &c_opt, omega);
    let e_eq = total_energy(&d_eq, &c_eq, omega);
    let e_all = total_energy(&d_all, &c_all, omega);
    let reduction = |base: f64| {
        if base > 0.0 {
            100.0 * (1.0 - e_opt.total / base)
        } else {
            0.0
        }
    };
    out.extend([
        ("energy_optimal_j", e_opt.total),
        ("energy_equal_j", e_eq.total),
        ("energy_all_j", e_all.total),
        ("server_energy_optimal_j", e_opt.server),
        ("reduction_vs_all_pct", reduction(e_all.total)),
        ("reduction_vs_equal_pct", reduction(e_eq.total)),
        ("counted_users", e_opt.users as f64),
        (
            "infeasible_users",
            optimal.iter().filter(|d| !d.feasible).count() as f64,
        ),
        (
            "equal_infeasible_users",
            equal.iter().filter(|d| !d.feasible).count() as f64,
        ),
        (
            "all_infeasible_users",
            all.iter().filter(|d| !d.feasible).count() as f64,
        ),
    ]);
    Ok(out)
}

/// Outcome of one user in a single solved scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct UserOutcome {
    pub user: usize,
    pub server: Option<usize>,
    pub task_bits: f64,
    /// `None` for unassociated users.
    pub decision: Option<OffloadDecision>,
}

#[derive(Debug, Clone)]
pub struct Solution {
    pub scenario: Scenario,
    pub association: Association,
    pub users: Vec<UserOutcome>,
    /// Over users counted under the configured infeasibility policy.
    pub energy: EnergyTotals,
}

/// Association followed by optimal offloading on the scenario drawn from
/// `seed`.
pub fn solve(config: &Config, seed: u64) -> Result<Solution, ModelError> {
    let scenario = generate_scenario(config, seed);
    let association = associate_proposed(config, &scenario)?;
    let omega = config.offload.omega;
    let contexts = contexts_for(&scenario, &association, omega)?;
    let mut users: Vec<UserOutcome> = scenario
        .users
        .iter()
        .enumerate()
        .map(|(k, u)| UserOutcome {
            user: k,
            server: association.assignment[k],
            task_bits: u.task_bits,
            decision: None,
        })
        .collect();
    let mut kept = (Vec::new(), Vec::new());
    for (k, ctx) in &contexts {
        let d = optimal_offload(ctx);
        users[*k].decision = Some(d);
        if counted(&d, config.offload.infeasible_policy) {
            kept.0.push(d);
            kept.1.push(*ctx);
        }
    }
    let energy = total_energy(&kept.0, &kept.1, omega);
    Ok(Solution {
        scenario,
        association,
        users,
        energy,
    })
}
