use crate::error::ConfigError;
use crate::scenario::Config;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PresetName {
    RuinVsEpsilon,
    RuinVsMu,
    AdmittedVsBuffer,
    BufferUsageComparison,
    EnergyComparison,
    Custom,
}

impl PresetName {
    pub const ALL: [PresetName; 6] = [
        PresetName::RuinVsEpsilon,
        PresetName::RuinVsMu,
        PresetName::AdmittedVsBuffer,
        PresetName::BufferUsageComparison,
        PresetName::EnergyComparison,
        PresetName::Custom,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            PresetName::RuinVsEpsilon => "ruin_vs_epsilon",
            PresetName::RuinVsMu => "ruin_vs_mu",
            PresetName::AdmittedVsBuffer => "admitted_vs_buffer",
            PresetName::BufferUsageComparison => "buffer_usage_comparison",
            PresetName::EnergyComparison => "energy_comparison",
            PresetName::Custom => "custom",
        }
    }

    pub fn parse(name: &str) -> Result<Self, ConfigError> {
        Self::ALL
            .into_iter()
            .find(|p| p.as_str() == name)
            .ok_or_else(|| ConfigError::UnknownPreset(name.to_string()))
    }

    /// The shipped preset file, if this preset has one.
    pub fn source(self) -> Option<&'static str> {
        match self {
            PresetName::RuinVsEpsilon => Some(include_str!("../../presets/ruin_vs_epsilon.toml")),
            PresetName::RuinVsMu => Some(include_str!("../../presets/ruin_vs_mu.toml")),
            PresetName::AdmittedVsBuffer => Some(include_str!("../../presets/admitted_vs_buffer.toml")),
            PresetName::BufferUsageComparison => Some(include_str!("../../presets/buffer_usage_comparison.toml")),
            PresetName::EnergyComparison => Some(include_str!("../../presets/energy_comparison.toml")),
            PresetName::Custom => None,
        }
    }
}

impl std::fmt::Display for PresetName {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Which stages a replication runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Pipeline {
    Ruin,
    Association,
    Full,
}

/// Swept parameter name used when an experiment has no sweep.
pub const NO_SWEEP: &str = "none";

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentPreset {
    pub name: PresetName,
    pub swept_param: String,
    pub values: Vec<f64>,
    pub replications: usize,
    pub base_config: Config,
    pub seed: u64,
}

impl ExperimentPreset {
    pub fn builtin(name: PresetName) -> Result<Self, ConfigError> {
        match name.source() {
            Some(text) => {
                let mut preset = Self::from_config(Config::from_toml_str(text)?)?;
                preset.name = name;
                Ok(preset)
            }
            None => {
                let mut config = Config::default();
                config.experiment.preset = Some(name.as_str().to_string());
                Self::from_config(config)
            }
        }
    }

    /// Reads the sweep from the config's `experiment` section.
    pub fn from_config(config: Config) -> Result<Self, ConfigError> {
        config.validate()?;
        let e = &config.experiment;
        let name = match &e.preset {
            Some(n) => PresetName::parse(n)?,
            None => PresetName::Custom,
        };
        let (swept_param, values) = match &e.swept_param {
            Some(p) => (p.clone(), e.values.clone()),
            None => (NO_SWEEP.to_string(), vec![0.0]),
        };
        Ok(ExperimentPreset {
            name,
            swept_param,
            values,
            replications: e.replications,
            seed: e.seed,
            base_config: config,
        })
    }

    pub fn pipeline(&self) -> Pipeline {
        match self.name {
            PresetName::RuinVsEpsilon | PresetName::RuinVsMu => Pipeline::Ruin,
            PresetName::AdmittedVsBuffer | PresetName::BufferUsageComparison => Pipeline::Association,
            PresetName::EnergyComparison => Pipeline::Full,
            PresetName::Custom => match self.base_config.experiment.pipeline.as_deref() {
                Some("ruin") => Pipeline::Ruin,
                Some("association") => Pipeline::Association,
                _ => Pipeline::Full,
            },
        }
    }

    /// One validated configuration per swept value.
    pub fn configs(&self) -> Result<Vec<Config>, ConfigError> {
        if self.replications == 0 {
            return Err(ConfigError::Invalid(vec![crate::error::FieldError::new(
                "experiment.replications",
                "must be at least 1",
            )]));
        }
        if self.values.is_empty() {
            return Err(ConfigError::Invalid(vec![crate::error::FieldError::new(
                "experiment.values",
                "swept value list is empty",
            )]));
        }
        self.values
            .iter()
            .map(|&v| {
                let mut config = self.base_config.clone();
                if self.swept_param != NO_SWEEP {
                    config.set_param(&self.swept_param, v)?;
                }
                config.validate()?;
                Ok(config)
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shipped_presets_parse() {
        for name in PresetName::ALL {
            let preset = ExperimentPreset::builtin(name).unwrap();
            assert_eq!(preset.name, name);
            assert!(preset.replications >= 1);
            assert!(!preset.values.is_empty());
            preset.configs().unwrap();
        }
    }

    #[test]
    fn names_round_trip() {
        for name in PresetName::ALL {
            assert_eq!(PresetName::parse(name.as_str()).unwrap(), name);
        }
        assert!(PresetName::parse("fig7").is_err());
    }
}
