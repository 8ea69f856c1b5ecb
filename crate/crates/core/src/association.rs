//! User association: the ruin-aware proposal scheme and the two baselines.
//!
//! Users rank servers by SNR. In each synchronous round every unassigned user
//! proposes to its best server not yet tried; each server orders its
//! proposers by ζ = D/Ψ and admits them while the worst-case demand fits
//! above ε. Rejected users strike that server and propose again next round.

use crate::ruin::priority_factor;
use crate::scenario::Scenario;

#[derive(Debug, Clone, PartialEq)]
pub struct Association {
    /// Server of each user, if any.
    pub assignment: Vec<Option<usize>>,
    /// Admitted users per server, in admission order.
    pub admitted_sets: Vec<Vec<usize>>,
    /// Free buffer left per server, bits. May be negative for the uncapped baseline.
    pub residual_buffer: Vec<f64>,
    pub rounds: usize,
    /// Total proposals made.
    pub proposals: usize,
}

impl Association {
    fn empty(scenario: &Scenario) -> Self {
        Association {
            assignment: vec![None; scenario.n_users()],
            admitted_sets: vec![Vec::new(); scenario.n_servers()],
            residual_buffer: scenario.servers.iter().map(|s| s.buffer_free_init).collect(),
            rounds: 0,
            proposals: 0,
        }
    }

    fn admit(&mut self, scenario: &Scenario, user: usize, server: usize) {
        self.assignment[user] = Some(server);
        self.admitted_sets[server].push(user);
        self.residual_buffer[server] -= scenario.users[user].task_bits;
    }

    /// |K_n| for every server.
    pub fn loads(&self) -> Vec<usize> {
        self.admitted_sets.iter().map(Vec::len).collect()
    }

    pub fn n_assigned(&self) -> usize {
        self.assignment.iter().flatten().count()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PreferenceProfiles {
    /// Servers per user, best SNR first.
    pub user_prefs: Vec<Vec<usize>>,
    /// Proposers per server, lowest ζ first (for the last round built).
    pub server_prefs: Vec<Vec<usize>>,
}

/// Each user's servers ordered by SNR descending, ties by server index.
/// Servers with zero SNR are unreachable and left out.
pub fn build_user_preferences(scenario: &Scenario) -> Vec<Vec<usize>> {
    (0..scenario.n_users())
        .map(|k| {
            let snr: Vec<f64> = (0..scenario.n_servers()).map(|n| scenario.ranking_snr(k, n)).collect();
            let mut servers: Vec<usize> = (0..scenario.n_servers()).filter(|&n| snr[n] > 0.0).collect();
            servers.sort_by(|&a, &b| snr[b].total_cmp(&snr[a]).then(a.cmp(&b)));
            servers
        })
        .collect()
}

/// Proposers sorted by ζ ascending, ties by user index.
pub fn build_server_preferences(scenario: &Scenario, proposers: &[usize], psi: f64) -> Vec<usize> {
    let mut keyed: Vec<(f64, usize)> = proposers
        .iter()
        .map(|&k| (priority_factor(scenario.users[k].task_bits, psi), k))
        .collect();
    keyed.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    keyed.into_iter().map(|(_, k)| k).collect()
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct AssociationOptions {
    /// Admit while the residual is still at least ε, even if the task then
    /// overshoots it (the literal loop guard).
    pub literal_or: bool,
}

/// Ruin-based association. `ruin_prob(n, residual)` returns Ψ of server `n`
/// at its current free buffer; it is refreshed once per round.
pub fn ruin_association<F>(
    scenario: &Scenario,
    options: AssociationOptions,
    mut ruin_prob: F,
) -> (Association, PreferenceProfiles)
where
    F: FnMut(usize, f64) -> f64,
{
    let n_servers = scenario.n_servers();
    let user_prefs = build_user_preferences(scenario);
    let mut assoc = Association::empty(scenario);
    let mut next_choice = vec![0usize; scenario.n_users()];
    let mut server_prefs = vec![Vec::new(); n_servers];

    loop {
        let mut proposers: Vec<Vec<usize>> = vec![Vec::new(); n_servers];
        let mut smallest_pending = f64::INFINITY;
        for k in 0..scenario.n_users() {
            if assoc.assignment[k].is_none() {
                if let Some(&n) = user_prefs[k].get(next_choice[k]) {
                    proposers[n].push(k);
                    smallest_pending = smallest_pending.min(scenario.users[k].task_bits);
                }
            }
        }
        let n_proposals: usize = proposers.iter().map(Vec::len).sum();
        if n_proposals == 0 {
            break;
        }
        // Every buffer is down to its tolerance and no pending task is small
        // enough to fit anyway.
        let exhausted = !options.literal_or
            && scenario
                .servers
                .iter()
                .zip(&assoc.residual_buffer)
                .all(|(s, &r)| r - s.epsilon <= 0.0 && r - s.epsilon < smallest_pending);
        if exhausted {
            break;
        }

        assoc.rounds += 1;
        assoc.proposals += n_proposals;
        for (n, props) in proposers.iter().enumerate() {
            if props.is_empty() {
                continue;
            }
            let psi = ruin_prob(n, assoc.residual_buffer[n]);
            let ordered = build_server_preferences(scenario, props, psi);
            let eps = scenario.servers[n].epsilon;
            for &k in &ordered {
                let fits = if options.literal_or {
                    assoc.residual_buffer[n] >= eps
                } else {
                    scenario.users[k].task_bits <= assoc.residual_buffer[n] - eps
                };
                if fits {
                    assoc.admit(scenario, k, n);
                } else {
                    next_choice[k] += 1;
                }
            }
            server_prefs[n] = ordered;
        }
    }

    (
        assoc,
        PreferenceProfiles {
            user_prefs,
            server_prefs,
        },
    )
}

/// Ruin-based association with a fixed Ψ per server.
pub fn ruin_association_fixed(scenario: &Scenario, ruin_probs: &[f64]) -> Association {
    ruin_association(scenario, AssociationOptions::default(), |n, _| ruin_probs[n]).0
}

/// Baseline without preference profiles: one round, each user asks only its
/// best-SNR server, which admits requests in user-index order until the
/// first one that no longer fits above ε.
pub fn baseline_association_greedy(scenario: &Scenario) -> Association {
    let user_prefs = build_user_preferences(scenario);
    let mut assoc = Association::empty(scenario);
    let mut closed = vec![false; scenario.n_servers()];
    for (k, prefs) in user_prefs.iter().enumerate() {
        let Some(&n) = prefs.first() else { continue };
        assoc.proposals += 1;
        if closed[n] {
            continue;
        }
        let room = assoc.residual_buffer[n] - scenario.servers[n].epsilon;
        if scenario.users[k].task_bits <= room {
            assoc.admit(scenario, k, n);
        } else {
            closed[n] = true;
        }
    }
    assoc.rounds = usize::from(assoc.proposals > 0);
    assoc
}

/// Baseline ignoring buffer limits: everyone joins its best-SNR server.
pub fn baseline_association_uncapped(scenario: &Scenario) -> Association {
    let user_prefs = build_user_preferences(scenario);
    let mut assoc = Association::empty(scenario);
    for (k, prefs) in user_prefs.iter().enumerate() {
        if let Some(&n) = prefs.first() {
            assoc.proposals += 1;
            assoc.admit(scenario, k, n);
        }
    }
    assoc.rounds = usize::from(assoc.proposals > 0);
    assoc
}

#[derive(Debug, Clone, PartialEq)]
pub struct AdmissionMetrics {
    /// Percentage of users associated. 100 for an empty population.
    pub admitted_fraction: f64,
    /// Set when there are no users and the fraction is a convention.
    pub zero_denominator: bool,
    pub buffer_usage: Vec<f64>,
    pub sum_buffer_usage: f64,
}

pub fn admission_metrics(assoc: &Association, scenario: &Scenario) -> AdmissionMetrics {
    let total = scenario.n_users();
    let buffer_usage: Vec<f64> = assoc
        .admitted_sets
        .iter()
        .map(|set| set.iter().map(|&k| scenario.users[k].task_bits).sum())
        .collect();
    AdmissionMetrics {
        admitted_fraction: if total == 0 {
            100.0
        } else {
            100.0 * assoc.n_assigned() as f64 / total as f64
        },
        zero_denominator: total == 0,
        // Summed in user order, so a subset of admitted users never rounds
        // above a superset.
        sum_buffer_usage: assoc
            .assignment
            .iter()
            .zip(&scenario.users)
            .filter(|(a, _)| a.is_some())
            .map(|(_, u)| u.task_bits)
            .sum(),
        buffer_usage,
    }
}
