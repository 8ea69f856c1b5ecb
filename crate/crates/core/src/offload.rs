//! Per-user data split between local execution and offloading.
//!
//! Once association fixes each server's load, the rate and CPU share of a
//! user are constants and the energy objective is linear in the offloaded
//! bits α:
//!
//!   E(α) = η_k·γ_k²·μ₀·(D − α) + ω·P·α/R
//!
//! The deadlines turn into an interval [lo, hi] for α, so the optimum sits
//! on whichever endpoint the slope points to.

use crate::association::Association;
use crate::cost::{self, CostBreakdown};
use crate::error::ModelError;
use crate::radio;
use crate::scenario::{CpuSplit, InfeasiblePolicy, Scenario};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OffloadContext {
    pub task_bits: f64,
    pub rate_bps: f64,
    pub gamma_server: f64,
    pub gamma_local: f64,
    pub mu0: f64,
    pub tx_power: f64,
    pub eta_local: f64,
    pub eta_server: f64,
    pub deadline: f64,
    pub omega: f64,
}

impl OffloadContext {
    pub fn validate(&self) -> Result<(), ModelError> {
        let positive = [
            ("uplink rate", self.rate_bps),
            ("server CPU share", self.gamma_server),
            ("local CPU rate", self.gamma_local),
            ("cycles per bit", self.mu0),
            ("transmit power", self.tx_power),
            ("deadline", self.deadline),
        ];
        for (what, value) in positive {
            if !(value > 0.0) {
                return Err(ModelError::NonPositive { what, value });
            }
        }
        for (what, value) in [("task size", self.task_bits), ("omega", self.omega)] {
            if !(value >= 0.0) {
                return Err(ModelError::NonPositive { what, value });
            }
        }
        Ok(())
    }

    /// Energy cost per bit kept local.
    pub fn local_energy_per_bit(&self) -> f64 {
        self.eta_local * self.gamma_local * self.gamma_local * self.mu0
    }

    /// d E / d α.
    pub fn slope(&self) -> f64 {
        self.omega * self.tx_power / self.rate_bps - self.local_energy_per_bit()
    }

    /// Latency and energy of every leg for a given split.
    pub fn costs(&self, alpha_bits: f64) -> CostBreakdown {
        let beta = self.task_bits - alpha_bits;
        let (tx_latency, tx_energy) = cost::uplink_costs(alpha_bits, self.rate_bps, self.tx_power)
            .expect("validated context has a positive rate");
        let (server_latency, server_energy) =
            cost::server_costs(alpha_bits, self.gamma_server, self.mu0, self.eta_server)
                .expect("validated context has a positive server share");
        let (local_latency, local_energy) = cost::local_costs(beta, self.gamma_local, self.mu0, self.eta_local)
            .expect("validated context has a positive local rate");
        CostBreakdown {
            tx_latency,
            tx_energy,
            server_latency,
            server_energy,
            local_latency,
            local_energy,
        }
    }

    /// The user's objective term: local energy plus ω-weighted uplink energy.
    pub fn objective(&self, alpha_bits: f64) -> f64 {
        let c = self.costs(alpha_bits);
        c.local_energy + self.omega * c.tx_energy
    }

    /// Both deadline constraints and the box constraint, checked by direct
    /// substitution.
    pub fn meets_deadlines(&self, alpha_bits: f64) -> bool {
        if !(0.0..=self.task_bits).contains(&alpha_bits) {
            return false;
        }
        let c = self.costs(alpha_bits);
        c.local_latency <= self.deadline && c.offload_latency() <= self.deadline
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OffloadBounds {
    pub lo: f64,
    pub hi: f64,
}

impl OffloadBounds {
    pub fn is_feasible(&self) -> bool {
        self.lo <= self.hi
    }
}

/// Interval of α allowed by the local deadline (lower end) and the offload
/// deadline plus α ≤ D (upper end). Infeasible when `lo > hi`.
pub fn offload_bounds(ctx: &OffloadContext) -> OffloadBounds {
    let d = ctx.task_bits;
    let mut lo = (d - ctx.gamma_local * ctx.deadline / ctx.mu0).max(0.0);
    let mut hi = (ctx.deadline / (ctx.mu0 / ctx.gamma_server + 1.0 / ctx.rate_bps)).min(d);
    // Nudge endpoints inward by ulps until they pass the direct check, so
    // rounding never returns an α that violates a deadline.
    let local_ok = |a: f64| ctx.costs(a).local_latency <= ctx.deadline;
    let offload_ok = |a: f64| ctx.costs(a).offload_latency() <= ctx.deadline;
    while lo < d && !local_ok(lo) {
        lo = lo.next_up();
    }
    while hi > 0.0 && !offload_ok(hi) {
        hi = hi.next_down();
    }
    OffloadBounds { lo, hi }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OffloadDecision {
    pub alpha_bits: f64,
    pub beta_bits: f64,
    pub feasible: bool,
    /// The user's objective term, joules.
    pub objective_value: f64,
    pub bound_lo: f64,
    pub bound_hi: f64,
    pub costs: CostBreakdown,
}

impl OffloadDecision {
    fn at(ctx: &OffloadContext, alpha_bits: f64, feasible: bool, bounds: OffloadBounds) -> Self {
        OffloadDecision {
            alpha_bits,
            beta_bits: ctx.task_bits - alpha_bits,
            feasible,
            objective_value: ctx.objective(alpha_bits),
            bound_lo: bounds.lo,
            bound_hi: bounds.hi,
            costs: ctx.costs(alpha_bits),
        }
    }
}

/// Energy-minimizing split. Infeasible users get `feasible = false` and
/// α = lo, the least deadline-violating choice on the local side.
pub fn optimal_offload(ctx: &OffloadContext) -> OffloadDecision {
    let bounds = offload_bounds(ctx);
    if !bounds.is_feasible() {
        return OffloadDecision::at(ctx, bounds.lo, false, bounds);
    }
    // Ties go to lo: the least network use.
    let alpha = if ctx.slope() < 0.0 { bounds.hi } else { bounds.lo };
    OffloadDecision::at(ctx, alpha, true, bounds)
}

/// Brute-force reference: evaluates `grid_points` evenly spaced splits in
/// [0, D], drops those violating a deadline and keeps the cheapest (ties go
/// to the smaller α).
pub fn oracle_offload_grid(ctx: &OffloadContext, grid_points: usize) -> OffloadDecision {
    assert!(grid_points >= 2, "grid needs at least two points");
    let d = ctx.task_bits;
    let last = grid_points - 1;
    let mut best: Option<(f64, f64)> = None;
    for i in 0..grid_points {
        let alpha = if i == last { d } else { d * i as f64 / last as f64 };
        if !ctx.meets_deadlines(alpha) {
            continue;
        }
        let value = ctx.objective(alpha);
        if best.is_none_or(|(_, v)| value < v) {
            best = Some((alpha, value));
        }
    }
    let bounds = offload_bounds(ctx);
    match best {
        Some((alpha, _)) => OffloadDecision::at(ctx, alpha, true, bounds),
        None => OffloadDecision::at(ctx, bounds.lo, false, bounds),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BaselinePolicy {
    /// Offload half the task.
    Equal,
    /// Offload everything.
    All,
}

/// Fixed-split baselines. Feasibility is reported, never enforced.
pub fn baseline_offload(ctx: &OffloadContext, policy: BaselinePolicy) -> OffloadDecision {
    let alpha = match policy {
        BaselinePolicy::Equal => ctx.task_bits / 2.0,
        BaselinePolicy::All => ctx.task_bits,
    };
    OffloadDecision::at(ctx, alpha, ctx.meets_deadlines(alpha), offload_bounds(ctx))
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct EnergyTotals {
    /// Σ E_local + ω·Σ E_trans, joules.
    pub total: f64,
    pub local: f64,
    pub transmission: f64,
    /// Server-side execution energy. Reported only; not part of the objective.
    pub server: f64,
    pub users: usize,
}

pub fn total_energy(decisions: &[OffloadDecision], ctxs: &[OffloadContext], omega: f64) -> EnergyTotals {
    assert_eq!(decisions.len(), ctxs.len(), "decisions and contexts must align");
    let mut totals = EnergyTotals::default();
    for (d, ctx) in decisions.iter().zip(ctxs) {
        let local = ctx.local_energy_per_bit() * d.beta_bits;
        let tx = if d.alpha_bits > 0.0 {
            ctx.tx_power * d.alpha_bits / ctx.rate_bps
        } else {
            0.0
        };
        totals.local += local;
        totals.transmission += tx;
        totals.total += local + omega * tx;
        totals.server += d.costs.server_energy;
        totals.users += 1;
    }
    totals
}

/// Users whose optimal decision counts towards energy totals.
pub fn counted(decision: &OffloadDecision, policy: InfeasiblePolicy) -> bool {
    decision.feasible || policy == InfeasiblePolicy::ClampAlphaLo
}

/// Offloading context of every associated user, evaluated with the final
/// server loads. Returns `(user, context)` pairs in user order.
pub fn contexts_for(
    scenario: &Scenario,
    assoc: &Association,
    omega: f64,
) -> Result<Vec<(usize, OffloadContext)>, ModelError> {
    let loads = assoc.loads();
    let mu0 = scenario.channel.cycles_per_bit;
    let mut out = Vec::with_capacity(assoc.n_assigned());
    for (k, server) in assoc.assignment.iter().enumerate() {
        let Some(n) = *server else { continue };
        let user = &scenario.users[k];
        let srv = &scenario.servers[n];
        let theta = -10.0 * scenario.gain[k][n].log10();
        let link = radio::link_quality(&scenario.channel, theta, user.tx_power, srv.bandwidth, loads[n])?;
        let gamma_server = match scenario.cpu_split {
            CpuSplit::Equal => srv.cpu_rate / loads[n] as f64,
            CpuSplit::Full => srv.cpu_rate,
        };
        let ctx = OffloadContext {
            task_bits: user.task_bits,
            rate_bps: link.rate_bps,
            gamma_server,
            gamma_local: user.cpu_rate,
            mu0,
            tx_power: user.tx_power,
            eta_local: user.eta_local,
            eta_server: srv.eta_server,
            deadline: user.deadline,
            omega,
        };
        ctx.validate()?;
        out.push((k, ctx));
    }
    Ok(out)
}
