//! Surplus-process model of a server's free buffer.
//!
//! Free buffer starts at `initial_surplus`, grows linearly at `premium_rate`
//! bits per slot as queued work drains, and drops by a random claim whenever
//! offloaded data arrives. Ruin is the surplus dipping strictly below the
//! tolerance ε at any time within the horizon. Because the path only
//! decreases at claim instants, checking the post-claim values is exact.

use rand::distr::Open01;
use rand::Rng;
use rayon::prelude::*;

use crate::error::ModelError;
use crate::scenario::{Arrivals, RuinConfig, ServerSpec};
use crate::seed;
use crate::units::kb_to_bits;

/// Floor applied to Ψ when forming priorities, so a zero-risk server still
/// orders proposers by task size.
pub const PSI_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SurplusParams {
    /// B^s(0), bits.
    pub initial_surplus: f64,
    /// Bits of buffer recovered per slot.
    pub premium_rate: f64,
    /// Claims per slot (λ).
    pub claim_intensity: f64,
    /// Exponential rate of claim sizes, 1/bits.
    pub claim_rate: f64,
    /// Slots.
    pub horizon: f64,
    /// Tolerable surplus ε, bits.
    pub epsilon: f64,
    /// Seconds per slot.
    pub tau: f64,
    pub arrivals: Arrivals,
}

impl SurplusParams {
    /// Surplus model of a server's buffer. The premium is the server's
    /// aggregate drain rate cpu_rate·τ/μ₀ unless the config overrides it.
    pub fn for_server(server: &ServerSpec, ruin: &RuinConfig, cycles_per_bit: f64) -> Self {
        let premium_rate = match ruin.premium_kb_per_slot {
            Some(kb) => kb_to_bits(kb),
            None => server.cpu_rate * ruin.tau_s / cycles_per_bit,
        };
        SurplusParams {
            initial_surplus: server.buffer_free_init,
            premium_rate,
            claim_intensity: ruin.claim_intensity_per_slot,
            claim_rate: 1.0 / (ruin.claim_scale * kb_to_bits(ruin.claim_unit_kb)),
            horizon: ruin.horizon_slots,
            epsilon: server.epsilon,
            tau: ruin.tau_s,
            arrivals: ruin.arrivals,
        }
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        let checks = [
            ("claim size rate", self.claim_rate, true),
            ("horizon", self.horizon, true),
            ("initial surplus", self.initial_surplus, false),
            ("premium rate", self.premium_rate, false),
            ("claim intensity", self.claim_intensity, false),
        ];
        for (what, value, strict) in checks {
            let ok = if strict { value > 0.0 } else { value >= 0.0 };
            if !ok {
                return Err(ModelError::NonPositive { what, value });
            }
        }
        Ok(())
    }

    /// Number of claim epochs inside the horizon under periodic arrivals.
    pub fn periodic_claims(&self) -> usize {
        (self.claim_intensity * self.horizon).floor() as usize
    }

    /// Closed-form Ψ against ε: the analytic sum evaluated at u − ε with one
    /// term per claim interval of length 1/λ.
    pub fn analytic(&self, n_terms: usize) -> Result<RuinEstimate, ModelError> {
        if self.initial_surplus < self.epsilon {
            return Ok(RuinEstimate::certain(RuinMethod::Analytic, n_terms));
        }
        if self.claim_intensity == 0.0 {
            return Ok(RuinEstimate {
                probability: 0.0,
                std_error: 0.0,
                method: RuinMethod::Analytic,
                samples: n_terms,
                clamped: false,
            });
        }
        ruin_probability_analytic(
            self.initial_surplus - self.epsilon,
            self.premium_rate / self.claim_intensity,
            self.claim_rate,
            n_terms,
        )
    }

    /// Ψ of the same server once its free buffer has shrunk to `residual`.
    pub fn with_surplus(&self, residual: f64) -> Self {
        SurplusParams {
            initial_surplus: residual,
            ..*self
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RuinMethod {
    Analytic,
    MonteCarlo,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RuinEstimate {
    pub probability: f64,
    /// Binomial standard error for Monte Carlo, zero otherwise.
    pub std_error: f64,
    pub method: RuinMethod,
    /// Series terms or simulated paths.
    pub samples: usize,
    /// The analytic sum exceeded one and was clamped.
    pub clamped: bool,
}

impl RuinEstimate {
    fn certain(method: RuinMethod, samples: usize) -> Self {
        RuinEstimate {
            probability: 1.0,
            std_error: 0.0,
            method,
            samples,
            clamped: false,
        }
    }
}

/// Lowest and terminal surplus of one simulated path.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SurplusPath {
    pub min_surplus: f64,
    pub final_surplus: f64,
    pub claims: usize,
}

/// Replays a path from explicit `(time, size)` claims, which must be sorted
/// by time. Claims after the horizon are ignored.
pub fn surplus_path_from_claims(params: &SurplusParams, claims: &[(f64, f64)]) -> SurplusPath {
    let mut min_surplus = params.initial_surplus;
    let mut total_claims = 0.0;
    let mut count = 0;
    for &(t, z) in claims.iter().take_while(|(t, _)| *t <= params.horizon) {
        total_claims += z;
        count += 1;
        min_surplus = min_surplus.min(params.initial_surplus + params.premium_rate * t - total_claims);
    }
    SurplusPath {
        min_surplus,
        final_surplus: params.initial_surplus + params.premium_rate * params.horizon - total_claims,
        claims: count,
    }
}

/// Walks the claim sequence of one path. `stop_below` ends the walk at the
/// first post-claim surplus under that level.
fn walk<R: Rng + ?Sized>(params: &SurplusParams, rng: &mut R, stop_below: Option<f64>) -> SurplusPath {
    let u = params.initial_surplus;
    let mut min_surplus = u;
    let mut total_claims = 0.0;
    let mut claims = 0usize;
    let mut t = 0.0;
    let max_periodic = params.periodic_claims();
    if params.claim_intensity > 0.0 {
        loop {
            // Draw order (arrival, then size) is fixed so paths stay coupled
            // across parameter changes.
            t = match params.arrivals {
                Arrivals::Poisson => {
                    let e: f64 = rng.sample(Open01);
                    t - e.ln() / params.claim_intensity
                }
                Arrivals::Periodic => {
                    if claims == max_periodic {
                        break;
                    }
                    (claims + 1) as f64 / params.claim_intensity
                }
            };
            if t > params.horizon {
                break;
            }
            let e: f64 = rng.sample(Open01);
            total_claims += -e.ln() / params.claim_rate;
            claims += 1;
            let level = u + params.premium_rate * t - total_claims;
            if level < min_surplus {
                min_surplus = level;
                if stop_below.is_some_and(|floor| level < floor) {
                    break;
                }
            }
        }
    }
    SurplusPath {
        min_surplus,
        final_surplus: u + params.premium_rate * params.horizon - total_claims,
        claims,
    }
}

/// Simulates one surplus path over `[0, horizon]`. Deterministic per seed.
pub fn simulate_surplus_path(params: &SurplusParams, seed: u64) -> SurplusPath {
    walk(params, &mut seed::rng(seed), None)
}

/// Fraction of paths whose surplus drops below ε. Path `i` uses sub-seed
/// `derive(seed, i)`, so the estimate does not depend on thread scheduling
/// and paths are coupled across parameter values.
pub fn ruin_probability_mc(params: &SurplusParams, n_paths: usize, seed: u64) -> Result<RuinEstimate, ModelError> {
    if n_paths < 100 {
        return Err(ModelError::TooSmall {
            what: "path count",
            min: 100,
            value: n_paths,
        });
    }
    params.validate()?;
    let ruined: usize = (0..n_paths)
        .into_par_iter()
        .map(|i| {
            let mut rng = seed::rng(seed::derive(seed, i as u64));
            let path = walk(params, &mut rng, Some(params.epsilon));
            usize::from(path.min_surplus < params.epsilon)
        })
        .sum();
    let p = ruined as f64 / n_paths as f64;
    Ok(RuinEstimate {
        probability: p,
        std_error: (p * (1.0 - p) / n_paths as f64).sqrt(),
        method: RuinMethod::MonteCarlo,
        samples: n_paths,
        clamped: false,
    })
}

/// Finite-horizon ruin probability with exponential claims of rate `claim_rate`,
/// one claim per interval and `premium` bits earned per interval:
///
/// Ψ = Σ_{j=1}^{n} (μ c_j)^{j−1}/(j−1)! · e^{−μ c_j} · c_1/c_j,  c_j = u + j·premium.
///
/// Terms are evaluated in log space. A sum above one is clamped and flagged.
pub fn ruin_probability_analytic(
    initial_surplus: f64,
    premium: f64,
    claim_rate: f64,
    n_terms: usize,
) -> Result<RuinEstimate, ModelError> {
    if n_terms == 0 {
        return Err(ModelError::TooSmall {
            what: "analytic term count",
            min: 1,
            value: 0,
        });
    }
    if !(claim_rate > 0.0) {
        return Err(ModelError::NonPositive {
            what: "claim size rate",
            value: claim_rate,
        });
    }
    if initial_surplus < 0.0 {
        return Ok(RuinEstimate::certain(RuinMethod::Analytic, n_terms));
    }
    let c1 = initial_surplus + premium;
    let mut sum = 0.0;
    let mut ln_factorial = 0.0; // ln((j-1)!)
    for j in 1..=n_terms {
        if j > 1 {
            ln_factorial += ((j - 1) as f64).ln();
        }
        let cj = initial_surplus + j as f64 * premium;
        let term = if cj > 0.0 {
            let x = claim_rate * cj;
            ((j - 1) as f64 * x.ln() - ln_factorial - x + (c1 / cj).ln()).exp()
        } else if j == 1 {
            // u = premium = 0: the first claim always ruins.
            1.0
        } else {
            0.0
        };
        sum += term;
    }
    let clamped = sum > 1.0;
    Ok(RuinEstimate {
        probability: sum.clamp(0.0, 1.0),
        std_error: 0.0,
        method: RuinMethod::Analytic,
        samples: n_terms,
        clamped,
    })
}

/// ζ = D/Ψ. Smaller is admitted first.
pub fn priority_factor(task_bits: f64, ruin_probability: f64) -> f64 {
    let psi = if ruin_probability > 0.0 {
        ruin_probability
    } else {
        PSI_FLOOR
    };
    task_bits / psi
}
