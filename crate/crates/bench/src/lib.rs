//! Fixtures shared by the benchmarks.

use mecsim_core::harness::{ExperimentPreset, PresetName};
use mecsim_core::offload::{contexts_for, OffloadContext};
use mecsim_core::scenario::{generate_scenario, Config, Scenario};

/// Base configuration of the energy preset with `users` users.
pub fn energy_config(users: usize) -> Config {
    let mut config = ExperimentPreset::builtin(PresetName::EnergyComparison)
        .expect("shipped preset")
        .base_config;
    config.users.count = users;
    config
}

pub fn scenario(users: usize, seed: u64) -> (Config, Scenario) {
    let config = energy_config(users);
    let sc = generate_scenario(&config, seed);
    (config, sc)
}

/// Offloading contexts of every user associated in the drawn scenario.
pub fn contexts(users: usize, seed: u64) -> Vec<OffloadContext> {
    let (config, sc) = scenario(users, seed);
    let assoc = mecsim_core::harness::associate_proposed(&config, &sc).expect("association succeeds");
    contexts_for(&sc, &assoc, config.offload.omega)
        .expect("valid contexts")
        .into_iter()
        .map(|(_, c)| c)
        .collect()
}
