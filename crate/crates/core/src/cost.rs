//! Latency and energy of the three execution legs: uplink transmission,
//! server-side execution and local execution. Each returns `(seconds, joules)`.

use crate::error::ModelError;

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct CostBreakdown {
    pub tx_latency: f64,
    pub tx_energy: f64,
    pub server_latency: f64,
    pub server_energy: f64,
    pub local_latency: f64,
    pub local_energy: f64,
}

impl CostBreakdown {
    /// Completion time of the offloaded portion (upload then execute).
    pub fn offload_latency(&self) -> f64 {
        self.tx_latency + self.server_latency
    }
}

pub fn uplink_costs(alpha_bits: f64, rate_bps: f64, tx_power: f64) -> Result<(f64, f64), ModelError> {
    if alpha_bits == 0.0 {
        return Ok((0.0, 0.0));
    }
    if !(rate_bps > 0.0) {
        return Err(ModelError::UnreachableServer { bits: alpha_bits });
    }
    let latency = alpha_bits / rate_bps;
    Ok((latency, tx_power * latency))
}

pub fn server_costs(alpha_bits: f64, gamma_server: f64, mu0: f64, eta_server: f64) -> Result<(f64, f64), ModelError> {
    execution_costs(alpha_bits, gamma_server, mu0, eta_server, "server CPU rate")
}

pub fn local_costs(beta_bits: f64, gamma_local: f64, mu0: f64, eta_local: f64) -> Result<(f64, f64), ModelError> {
    execution_costs(beta_bits, gamma_local, mu0, eta_local, "local CPU rate")
}

// Both sides share the same dynamic-power model: E = η·γ²·μ₀·bits.
fn execution_costs(bits: f64, gamma: f64, mu0: f64, eta: f64, what: &'static str) -> Result<(f64, f64), ModelError> {
    if !(gamma > 0.0) {
        return Err(ModelError::NonPositive { what, value: gamma });
    }
    let cycles = mu0 * bits;
    Ok((cycles / gamma, eta * gamma * gamma * cycles))
}
