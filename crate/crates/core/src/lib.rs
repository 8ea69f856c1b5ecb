//! Simulator for two-phase resource management at multi-access edge
//! computing (MEC) servers.
//!
//! Phase one associates users with buffer-limited servers. Users rank
//! servers by SNR; servers admit proposers smallest-impact first, where the
//! impact weighs a task's size against the ruin probability of the server's
//! buffer surplus process. Phase two splits every associated user's task
//! between local execution and offloading to minimize energy under a
//! completion deadline.
//!
//! Modules map onto the pipeline:
//! - [`scenario`]: configuration, domain records, seeded scenario generation
//! - [`radio`]: path loss, gain, SNR, shared-band uplink rate
//! - [`cost`]: latency and energy of each execution leg
//! - [`ruin`]: buffer surplus paths, Monte Carlo and closed-form ruin probability
//! - [`association`]: ruin-aware association and two baselines
//! - [`offload`]: exact per-user split, grid oracle, fixed-split baselines
//! - [`harness`]: replicated sweeps, presets, calibration and CSV output

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod association;
pub mod cost;
pub mod error;
pub mod harness;
pub mod offload;
pub mod radio;
pub mod ruin;
pub mod scenario;
pub mod seed;
pub mod units;

pub use association::{
    admission_metrics, baseline_association_greedy, baseline_association_uncapped, build_user_preferences,
    ruin_association, ruin_association_fixed, AdmissionMetrics, Association, AssociationOptions, PreferenceProfiles,
};
pub use cost::CostBreakdown;
pub use error::{ConfigError, FieldError, HarnessError, ModelError};
pub use harness::{
    emit_csv, run_experiment, run_experiment_with_threads, solve, Aggregate, ExperimentPreset, ExperimentResult,
    Pipeline, PresetName, Row, Solution, UserOutcome,
};
pub use offload::{
    baseline_offload, offload_bounds, optimal_offload, oracle_offload_grid, total_energy, BaselinePolicy, EnergyTotals,
    OffloadBounds, OffloadContext, OffloadDecision,
};
pub use radio::LinkQuality;
pub use ruin::{
    priority_factor, ruin_probability_analytic, ruin_probability_mc, simulate_surplus_path, RuinEstimate, RuinMethod,
    SurplusParams, SurplusPath,
};
pub use scenario::{generate_scenario, validate_config, ChannelParams, Config, Scenario, ServerSpec, UserSpec};
