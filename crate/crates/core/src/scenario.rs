//! Domain records, the configuration schema, validation and seeded scenario
//! generation.
//!
//! Configuration is TOML with sections `area`, `servers`, `users`, `channel`,
//! `ruin`, `offload` and `experiment`. Physical quantities carry their unit in
//! the key name (`buffer_free_mb`, `tx_power_mw`, ...). Every key is optional;
//! absent keys take the documented defaults.

use rand::distr::Open01;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{ConfigError, FieldError};
use crate::radio;
use crate::seed::{self, Stream};
use crate::units::{kb_to_bits, mb_to_bits};

// ---------------------------------------------------------------------------
// Configuration
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub area: AreaConfig,
    pub servers: ServersConfig,
    pub users: UsersConfig,
    pub channel: ChannelConfig,
    pub ruin: RuinConfig,
    pub offload: OffloadConfig,
    pub experiment: ExperimentConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AreaConfig {
    pub width_m: f64,
    pub height_m: f64,
}

impl Default for AreaConfig {
    fn default() -> Self {
        Self {
            width_m: 5000.0,
            height_m: 5000.0,
        }
    }
}

/// How a server's CPU is shared among its associated users.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum CpuSplit {
    /// γ_{k,n} = cpu_rate / |K_n|
    #[default]
    Equal,
    /// Every user sees the full cpu_rate.
    Full,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ServersConfig {
    pub count: usize,
    /// Explicit positions; when absent servers sit on a circle around the
    /// area center (a single server sits at the center).
    pub positions_m: Option<Vec<[f64; 2]>>,
    pub buffer_total_mb: f64,
    /// Defaults to `buffer_total_mb`.
    pub buffer_free_mb: Option<f64>,
    pub epsilon_mb: f64,
    pub cpu_rate_hz: f64,
    pub bandwidth_mhz: f64,
    pub eta: f64,
    pub cpu_split: CpuSplit,
}

impl Default for ServersConfig {
    fn default() -> Self {
        Self {
            count: 3,
            positions_m: None,
            buffer_total_mb: 8.0,
            buffer_free_mb: None,
            epsilon_mb: 0.0,
            cpu_rate_hz: 6.0e5,
            bandwidth_mhz: 20.0,
            eta: 1e-28,
            cpu_split: CpuSplit::Equal,
        }
    }
}

impl ServersConfig {
    pub fn buffer_free(&self) -> f64 {
        self.buffer_free_mb.unwrap_or(self.buffer_total_mb)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct UsersConfig {
    pub count: usize,
    /// Task sizes are uniform on (task_min_kb, task_max_kb].
    pub task_min_kb: f64,
    pub task_max_kb: f64,
    pub tx_power_mw: f64,
    pub cpu_rate_hz: f64,
    pub eta: f64,
    pub deadline_ms: f64,
}

impl Default for UsersConfig {
    fn default() -> Self {
        Self {
            count: 100,
            task_min_kb: 0.0,
            task_max_kb: 100.0,
            tx_power_mw: 200.0,
            cpu_rate_hz: 7.0e4,
            eta: 1e-28,
            deadline_ms: 100.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum FadingModel {
    #[default]
    Rayleigh,
    /// Every fading draw is 0 dB.
    None,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ChannelConfig {
    pub pl_ref_db: f64,
    pub ref_distance_m: f64,
    pub pl_exponent: f64,
    pub noise_psd_dbm_hz: f64,
    /// Fixed inter-server interference added to the noise floor. Off when absent.
    pub interference_dbm: Option<f64>,
    pub cycles_per_bit: f64,
    pub fading: FadingModel,
}

impl Default for ChannelConfig {
    fn default() -> Self {
        Self {
            pl_ref_db: 30.0,
            ref_distance_m: 1.0,
            pl_exponent: 3.0,
            noise_psd_dbm_hz: -174.0,
            interference_dbm: None,
            cycles_per_bit: 10.0,
            fading: FadingModel::Rayleigh,
        }
    }
}

/// Claim arrival process of the buffer surplus model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Arrivals {
    /// Poisson claim epochs with intensity λ per slot.
    #[default]
    Poisson,
    /// One claim every 1/λ slots. The analytic ruin sum is exact for this case.
    Periodic,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RuinConfig {
    pub tau_s: f64,
    pub claim_intensity_per_slot: f64,
    /// Mean claim size is `claim_scale × claim_unit_kb`.
    pub claim_unit_kb: f64,
    pub claim_scale: f64,
    /// Overrides the server-derived premium cpu_rate·τ/μ₀.
    pub premium_kb_per_slot: Option<f64>,
    pub horizon_slots: f64,
    pub analytic_terms: usize,
    /// Monte Carlo paths per replication for ruin-only experiments.
    pub paths: usize,
    pub arrivals: Arrivals,
}

impl Default for RuinConfig {
    fn default() -> Self {
        Self {
            tau_s: 1.0,
            claim_intensity_per_slot: 1.0,
            claim_unit_kb: 50.0,
            claim_scale: 1.0,
            premium_kb_per_slot: None,
            horizon_slots: 50.0,
            analytic_terms: 50,
            paths: 1000,
            arrivals: Arrivals::Poisson,
        }
    }
}

/// Treatment of users whose deadline constraints admit no split.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum InfeasiblePolicy {
    #[default]
    Exclude,
    ClampAlphaLo,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OffloadConfig {
    pub omega: f64,
    pub infeasible_policy: InfeasiblePolicy,
}

impl Default for OffloadConfig {
    fn default() -> Self {
        Self {
            omega: 1.0,
            infeasible_policy: InfeasiblePolicy::Exclude,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub preset: Option<String>,
    /// `ruin`, `association` or `full`; only consulted by the custom preset.
    pub pipeline: Option<String>,
    pub swept_param: Option<String>,
    pub values: Vec<f64>,
    pub replications: usize,
    pub seed: u64,
    /// Keep Algorithm 1's literal "or" loop guard (admit while the buffer is
    /// still above ε, even if the task overshoots it).
    pub algorithm1_literal_or: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            preset: None,
            pipeline: None,
            swept_param: None,
            values: Vec::new(),
            replications: 1,
            seed: 0,
            algorithm1_literal_or: false,
        }
    }
}

/// Parameters that experiments can sweep, by their config name.
pub const SWEEPABLE: &[&str] = &[
    "epsilon_mb",
    "buffer_mb",
    "buffer_free_mb",
    "mu",
    "claim_intensity_per_slot",
    "premium_kb_per_slot",
    "horizon_slots",
    "users",
    "task_max_kb",
    "omega",
    "deadline_ms",
    "user_cpu_rate_hz",
    "server_cpu_rate_hz",
];

impl Config {
    /// Parses and validates a TOML document.
    pub fn from_toml_str(text: &str) -> Result<Self, ConfigError> {
        let config: Config = toml::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn from_path(path: &std::path::Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// Checks every invariant, reporting all violations at once.
    pub fn validate(&self) -> Result<(), ConfigError> {
        let mut errs = Vec::new();
        let mut positive = |path: &str, v: f64| {
            if !(v > 0.0 && v.is_finite()) {
                errs.push(FieldError::new(path, format!("must be positive, got {v}")));
            }
        };
        positive("area.width_m", self.area.width_m);
        positive("area.height_m", self.area.height_m);
        positive("servers.cpu_rate_hz", self.servers.cpu_rate_hz);
        positive("servers.bandwidth_mhz", self.servers.bandwidth_mhz);
        positive("users.tx_power_mw", self.users.tx_power_mw);
        positive("users.cpu_rate_hz", self.users.cpu_rate_hz);
        positive("users.deadline_ms", self.users.deadline_ms);
        positive("channel.ref_distance_m", self.channel.ref_distance_m);
        positive("channel.pl_exponent", self.channel.pl_exponent);
        positive("channel.cycles_per_bit", self.channel.cycles_per_bit);
        positive("ruin.tau_s", self.ruin.tau_s);
        positive("ruin.claim_unit_kb", self.ruin.claim_unit_kb);
        positive("ruin.claim_scale", self.ruin.claim_scale);
        positive("ruin.horizon_slots", self.ruin.horizon_slots);

        let mut nonneg = |path: &str, v: f64| {
            if !(v >= 0.0 && v.is_finite()) {
                errs.push(FieldError::new(path, format!("must be non-negative, got {v}")));
            }
        };
        nonneg("servers.buffer_total_mb", self.servers.buffer_total_mb);
        nonneg("servers.epsilon_mb", self.servers.epsilon_mb);
        nonneg("servers.eta", self.servers.eta);
        nonneg("users.task_min_kb", self.users.task_min_kb);
        nonneg("users.task_max_kb", self.users.task_max_kb);
        nonneg("users.eta", self.users.eta);
        nonneg("ruin.claim_intensity_per_slot", self.ruin.claim_intensity_per_slot);
        nonneg("offload.omega", self.offload.omega);
        if let Some(p) = self.ruin.premium_kb_per_slot {
            nonneg("ruin.premium_kb_per_slot", p);
        }

        let s = &self.servers;
        let free = s.buffer_free();
        if !(free >= 0.0) {
            errs.push(FieldError::new(
                "servers.buffer_free_mb",
                format!("must be non-negative, got {free}"),
            ));
        } else if free > s.buffer_total_mb {
            errs.push(FieldError::new(
                "servers.buffer_free_mb",
                "free buffer exceeds total buffer",
            ));
        }
        if s.epsilon_mb > free {
            errs.push(FieldError::new("servers.epsilon_mb", "epsilon exceeds free buffer"));
        }
        if let Some(positions) = &s.positions_m {
            if positions.len() != s.count {
                errs.push(FieldError::new(
                    "servers.positions_m",
                    format!("expected {} positions, got {}", s.count, positions.len()),
                ));
            }
            for (i, p) in positions.iter().enumerate() {
                if !p.iter().all(|c| c.is_finite()) {
                    errs.push(FieldError::new(format!("servers.positions_m[{i}]"), "not finite"));
                }
            }
        }
        if self.users.task_min_kb > self.users.task_max_kb {
            errs.push(FieldError::new("users.task_min_kb", "task_min_kb exceeds task_max_kb"));
        }
        if self.ruin.analytic_terms == 0 {
            errs.push(FieldError::new("ruin.analytic_terms", "must be at least 1"));
        }
        if self.ruin.paths < 100 {
            errs.push(FieldError::new("ruin.paths", "must be at least 100"));
        }

        let e = &self.experiment;
        if e.replications == 0 {
            errs.push(FieldError::new("experiment.replications", "must be at least 1"));
        }
        match &e.swept_param {
            Some(name) if !SWEEPABLE.contains(&name.as_str()) => {
                errs.push(FieldError::new(
                    "experiment.swept_param",
                    format!("unknown parameter `{name}`"),
                ));
            }
            Some(_) if e.values.is_empty() => {
                errs.push(FieldError::new("experiment.values", "missing required key"));
            }
            _ => {}
        }
        if let Some(p) = &e.pipeline {
            if !["ruin", "association", "full"].contains(&p.as_str()) {
                errs.push(FieldError::new(
                    "experiment.pipeline",
                    format!("expected ruin, association or full, got `{p}`"),
                ));
            }
        }

        if errs.is_empty() {
            Ok(())
        } else {
            Err(ConfigError::Invalid(errs))
        }
    }

    /// Overrides one sweepable parameter. The result is not re-validated.
    pub fn set_param(&mut self, name: &str, value: f64) -> Result<(), ConfigError> {
        match name {
            "epsilon_mb" => self.servers.epsilon_mb = value,
            "buffer_mb" => {
                self.servers.buffer_total_mb = value;
                self.servers.buffer_free_mb = Some(value);
            }
            "buffer_free_mb" => self.servers.buffer_free_mb = Some(value),
            "mu" => self.ruin.claim_scale = value,
            "claim_intensity_per_slot" => self.ruin.claim_intensity_per_slot = value,
            "premium_kb_per_slot" => self.ruin.premium_kb_per_slot = Some(value),
            "horizon_slots" => self.ruin.horizon_slots = value,
            "users" => {
                if !(value >= 0.0 && value.fract() == 0.0) {
                    return Err(ConfigError::Invalid(vec![FieldError::new(
                        "users.count",
                        format!("swept user count must be a whole number, got {value}"),
                    )]));
                }
                self.users.count = value as usize;
            }
            "task_max_kb" => self.users.task_max_kb = value,
            "omega" => self.offload.omega = value,
            "deadline_ms" => self.users.deadline_ms = value,
            "user_cpu_rate_hz" => self.users.cpu_rate_hz = value,
            "server_cpu_rate_hz" => self.servers.cpu_rate_hz = value,
            other => return Err(ConfigError::UnknownParameter(other.to_string())),
        }
        Ok(())
    }

    pub fn channel_params(&self) -> ChannelParams {
        let c = &self.channel;
        ChannelParams {
            pl_ref_db: c.pl_ref_db,
            ref_distance: c.ref_distance_m,
            pl_exponent: c.pl_exponent,
            noise_psd_dbm_hz: c.noise_psd_dbm_hz,
            interference_dbm: c.interference_dbm,
            cycles_per_bit: c.cycles_per_bit,
        }
    }

    pub fn server_positions(&self) -> Vec<[f64; 2]> {
        if let Some(p) = &self.servers.positions_m {
            return p.clone();
        }
        let n = self.servers.count;
        let (cx, cy) = (self.area.width_m / 2.0, self.area.height_m / 2.0);
        if n == 1 {
            return vec![[cx, cy]];
        }
        let radius = 0.3 * self.area.width_m.min(self.area.height_m);
        (0..n)
            .map(|i| {
                let angle = std::f64::consts::FRAC_PI_2 + std::f64::consts::TAU * i as f64 / n as f64;
                [cx + radius * angle.cos(), cy + radius * angle.sin()]
            })
            .collect()
    }
}

/// Validates a raw TOML tree and returns the normalized configuration.
pub fn validate_config(raw: &str) -> Result<Config, ConfigError> {
    Config::from_toml_str(raw)
}

// ---------------------------------------------------------------------------
// Domain records
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq)]
pub struct ServerSpec {
    pub id: usize,
    pub position: [f64; 2],
    pub buffer_total: f64,
    pub buffer_free_init: f64,
    pub cpu_rate: f64,
    pub bandwidth: f64,
    pub epsilon: f64,
    pub eta_server: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct UserSpec {
    pub id: usize,
    pub position: [f64; 2],
    pub task_bits: f64,
    pub tx_power: f64,
    pub cpu_rate: f64,
    pub eta_local: f64,
    pub deadline: f64,
}

/// Propagation and processing constants shared by every link.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelParams {
    pub pl_ref_db: f64,
    pub ref_distance: f64,
    pub pl_exponent: f64,
    pub noise_psd_dbm_hz: f64,
    pub interference_dbm: Option<f64>,
    pub cycles_per_bit: f64,
}

impl Default for ChannelParams {
    fn default() -> Self {
        Config::default().channel_params()
    }
}

/// Immutable world description for one replication.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub servers: Vec<ServerSpec>,
    pub users: Vec<UserSpec>,
    pub channel: ChannelParams,
    /// Fading term Y_g in dB, indexed `[user][server]`.
    pub fading_db: Vec<Vec<f64>>,
    /// Linear channel gain g_{k,n}, indexed `[user][server]`.
    pub gain: Vec<Vec<f64>>,
    pub cpu_split: CpuSplit,
    pub seed: u64,
}

impl Scenario {
    pub fn n_users(&self) -> usize {
        self.users.len()
    }

    pub fn n_servers(&self) -> usize {
        self.servers.len()
    }

    /// SNR of user `k` towards server `n` over the server's full band. Used
    /// for preference ranking before the band is shared out.
    pub fn ranking_snr(&self, k: usize, n: usize) -> f64 {
        let noise = radio::noise_power(&self.channel, self.servers[n].bandwidth);
        self.users[k].tx_power * self.gain[k][n] / noise
    }

    pub fn total_task_bits(&self) -> f64 {
        self.users.iter().map(|u| u.task_bits).sum()
    }

    /// Builds a scenario from explicit parts, computing gains from geometry
    /// and the given fading draws.
    pub fn from_parts(
        servers: Vec<ServerSpec>,
        users: Vec<UserSpec>,
        channel: ChannelParams,
        fading_db: Vec<Vec<f64>>,
    ) -> Self {
        let gain = users
            .iter()
            .zip(&fading_db)
            .map(|(u, fades)| {
                servers
                    .iter()
                    .zip(fades)
                    .map(|(s, &fade)| link_gain(&channel, u.position, s.position, fade))
                    .collect()
            })
            .collect();
        Scenario {
            servers,
            users,
            channel,
            fading_db,
            gain,
            cpu_split: CpuSplit::Equal,
            seed: 0,
        }
    }

    /// Builds a scenario with a directly specified gain matrix.
    pub fn with_gains(
        servers: Vec<ServerSpec>,
        users: Vec<UserSpec>,
        channel: ChannelParams,
        gain: Vec<Vec<f64>>,
    ) -> Self {
        let fading_db = vec![vec![0.0; servers.len()]; users.len()];
        Scenario {
            servers,
            users,
            channel,
            fading_db,
            gain,
            cpu_split: CpuSplit::Equal,
            seed: 0,
        }
    }
}

fn distance(a: [f64; 2], b: [f64; 2]) -> f64 {
    (a[0] - b[0]).hypot(a[1] - b[1])
}

// Distances below d₀ are floored to d₀ so co-located nodes stay finite.
fn link_gain(channel: &ChannelParams, user: [f64; 2], server: [f64; 2], fading_db: f64) -> f64 {
    let d = distance(user, server).max(channel.ref_distance);
    let theta = radio::path_loss_db(d, channel, fading_db).expect("distance floored at d0 > 0");
    radio::channel_gain(theta)
}

/// Rayleigh amplitude with unit scale, expressed in dB as 20·log10(a).
pub fn rayleigh_fading_db<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    let v: f64 = rng.sample(Open01);
    let amplitude = (-2.0 * v.ln()).sqrt();
    20.0 * amplitude.log10()
}

/// Draws a scenario from a validated configuration. Pure in `(config, seed)`.
pub fn generate_scenario(config: &Config, seed: u64) -> Scenario {
    let channel = config.channel_params();
    let s = &config.servers;
    let servers = server_specs(config);

    let u = &config.users;
    let mut placement = seed::rng(seed::stream_seed(seed, Stream::Placement));
    let mut sizes = seed::rng(seed::stream_seed(seed, Stream::TaskSizes));
    let mut fading = seed::rng(seed::stream_seed(seed, Stream::Fading));
    let (lo, hi) = (kb_to_bits(u.task_min_kb), kb_to_bits(u.task_max_kb));

    let mut users = Vec::with_capacity(u.count);
    let mut fading_db = Vec::with_capacity(u.count);
    for id in 0..u.count {
        let position = [
            placement.random::<f64>() * config.area.width_m,
            placement.random::<f64>() * config.area.height_m,
        ];
        // 1 - U lies in (0, 1], so sizes land in (lo, hi].
        let task_bits = lo + (hi - lo) * (1.0 - sizes.random::<f64>());
        users.push(UserSpec {
            id,
            position,
            task_bits,
            tx_power: u.tx_power_mw * 1e-3,
            cpu_rate: u.cpu_rate_hz,
            eta_local: u.eta,
            deadline: u.deadline_ms * 1e-3,
        });
        let row: Vec<f64> = (0..servers.len())
            .map(|_| match config.channel.fading {
                FadingModel::Rayleigh => rayleigh_fading_db(&mut fading),
                FadingModel::None => 0.0,
            })
            .collect();
        fading_db.push(row);
    }

    let mut scenario = Scenario::from_parts(servers, users, channel, fading_db);
    scenario.cpu_split = s.cpu_split;
    scenario.seed = seed;
    scenario
}

/// Server records of a configuration. These involve no randomness.
pub fn server_specs(config: &Config) -> Vec<ServerSpec> {
    let s = &config.servers;
    config
        .server_positions()
        .into_iter()
        .enumerate()
        .map(|(id, position)| ServerSpec {
            id,
            position,
            buffer_total: mb_to_bits(s.buffer_total_mb),
            buffer_free_init: mb_to_bits(s.buffer_free()),
            cpu_rate: s.cpu_rate_hz,
            bandwidth: s.bandwidth_mhz * 1e6,
            epsilon: mb_to_bits(s.epsilon_mb),
            eta_server: s.eta,
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn paper_buffer_config_is_valid() {
        let cfg = validate_config(
            r#"
            [servers]
            buffer_total_mb = 8.0
            buffer_free_mb = 8.0
            epsilon_mb = 2.0
            "#,
        )
        .unwrap();
        assert_eq!(cfg.servers.epsilon_mb, 2.0);
        assert_eq!(cfg.servers.buffer_free(), 8.0);
    }

    #[test]
    fn epsilon_above_free_buffer_is_rejected() {
        let err = validate_config(
            r#"
            [servers]
            buffer_total_mb = 8.0
            buffer_free_mb = 1.0
            epsilon_mb = 2.0
            "#,
        )
        .unwrap_err();
        let fields = err.fields();
        assert_eq!(fields.len(), 1);
        assert_eq!(fields[0].path, "servers.epsilon_mb");
        assert_eq!(fields[0].reason, "epsilon exceeds free buffer");
    }

    #[test]
    fn every_violation_is_reported() {
        let err = validate_config(
            r#"
            [users]
            task_min_kb = -1.0
            cpu_rate_hz = 0.0
            [channel]
            pl_exponent = -3.0
            "#,
        )
        .unwrap_err();
        let paths: Vec<_> = err.fields().iter().map(|f| f.path.as_str()).collect();
        assert!(paths.contains(&"users.task_min_kb"));
        assert!(paths.contains(&"users.cpu_rate_hz"));
        assert!(paths.contains(&"channel.pl_exponent"));
    }

    #[test]
    fn unknown_keys_are_parse_errors() {
        assert!(matches!(
            validate_config("[servers]\nbuffer_gb = 1.0\n"),
            Err(ConfigError::Parse(_))
        ));
    }

    #[test]
    fn sweep_without_values_is_rejected() {
        let err = validate_config("[experiment]\nswept_param = \"users\"\n").unwrap_err();
        assert_eq!(err.fields()[0].path, "experiment.values");
    }

    #[test]
    fn empty_user_list_is_valid() {
        let cfg = validate_config("[users]\ncount = 0\n").unwrap();
        let sc = generate_scenario(&cfg, 1);
        assert_eq!(sc.n_users(), 0);
        assert_eq!(sc.total_task_bits(), 0.0);
        assert!(sc.gain.is_empty());
    }

    #[test]
    fn paper_topology_dimensions() {
        let cfg = Config::default();
        let sc = generate_scenario(&cfg, 7);
        assert_eq!(sc.n_servers(), 3);
        assert_eq!(sc.n_users(), 100);
        assert_eq!(sc.gain.len(), 100);
        assert!(sc.gain.iter().all(|row| row.len() == 3));
    }

    #[test]
    fn generation_is_deterministic() {
        let cfg = Config::default();
        assert_eq!(generate_scenario(&cfg, 99), generate_scenario(&cfg, 99));
        assert_ne!(generate_scenario(&cfg, 99).gain, generate_scenario(&cfg, 100).gain);
    }

    #[test]
    fn degenerate_fading_at_reference_distance() {
        let mut cfg = Config::default();
        cfg.channel.fading = FadingModel::None;
        cfg.servers.count = 1;
        cfg.servers.positions_m = Some(vec![[0.0, 0.0]]);
        cfg.area.width_m = 1e-9;
        cfg.area.height_m = 1e-9;
        let sc = generate_scenario(&cfg, 3);
        let expected = 10f64.powf(-cfg.channel.pl_ref_db / 10.0);
        for row in &sc.gain {
            assert!((row[0] - expected).abs() <= 1e-15 * expected);
        }
    }

    #[test]
    fn uniform_placement_is_centered() {
        let mut cfg = Config::default();
        cfg.users.count = 10_000;
        let sc = generate_scenario(&cfg, 2024);
        let n = sc.n_users() as f64;
        let mx = sc.users.iter().map(|u| u.position[0]).sum::<f64>() / n;
        let my = sc.users.iter().map(|u| u.position[1]).sum::<f64>() / n;
        assert!((mx / 2500.0 - 1.0).abs() < 0.02, "mean x {mx}");
        assert!((my / 2500.0 - 1.0).abs() < 0.02, "mean y {my}");
    }

    #[test]
    fn rayleigh_power_has_unit_scale() {
        // E[a²] = 2 for a unit-scale Rayleigh amplitude.
        let mut rng = seed::rng(5);
        let n = 200_000;
        let mean_power = (0..n)
            .map(|_| 10f64.powf(rayleigh_fading_db(&mut rng) / 10.0))
            .sum::<f64>()
            / n as f64;
        assert!((mean_power - 2.0).abs() < 0.03, "{mean_power}");
    }

    #[test]
    fn config_round_trips_through_toml() {
        let mut cfg = Config::default();
        cfg.experiment.swept_param = Some("users".into());
        cfg.experiment.values = vec![10.0, 20.0];
        let text = cfg.to_toml_string();
        assert_eq!(Config::from_toml_str(&text).unwrap(), cfg);
    }

    proptest! {
        #[test]
        fn generated_records_satisfy_invariants(
            servers in 1usize..6,
            users in 0usize..60,
            total in 0.1f64..20.0,
            free_frac in 0.0f64..=1.0,
            eps_frac in 0.0f64..=1.0,
            task_max in 0.0f64..500.0,
            seed in any::<u64>(),
        ) {
            let mut cfg = Config::default();
            cfg.servers.count = servers;
            cfg.servers.buffer_total_mb = total;
            cfg.servers.buffer_free_mb = Some(total * free_frac);
            cfg.servers.epsilon_mb = total * free_frac * eps_frac;
            cfg.users.count = users;
            cfg.users.task_max_kb = task_max;
            prop_assume!(cfg.validate().is_ok());
            let sc = generate_scenario(&cfg, seed);
            prop_assert_eq!(sc.gain.len(), users);
            for s in &sc.servers {
                prop_assert!(0.0 <= s.buffer_free_init && s.buffer_free_init <= s.buffer_total);
                prop_assert!(0.0 <= s.epsilon && s.epsilon <= s.buffer_free_init);
                prop_assert!(s.cpu_rate > 0.0 && s.bandwidth > 0.0);
            }
            for (u, row) in sc.users.iter().zip(&sc.gain) {
                prop_assert!(u.task_bits >= 0.0 && u.task_bits <= kb_to_bits(task_max));
                prop_assert!(u.tx_power > 0.0 && u.cpu_rate > 0.0 && u.deadline > 0.0);
                prop_assert_eq!(row.len(), servers);
                for (g, fade) in row.iter().zip(&sc.fading_db[u.id]) {
                    let theta = -10.0 * g.log10();
                    if theta >= 0.0 {
                        prop_assert!(*g > 0.0 && *g <= 1.0);
                    }
                    prop_assert!(fade.is_finite());
                }
            }
        }
    }
}
