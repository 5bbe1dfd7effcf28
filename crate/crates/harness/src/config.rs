use std::path::PathBuf;

use qicost::qkernel::Tolerances;
use qicost::quantum::MAX_SIMULATED_QUBITS;

use crate::error::{HarnessError, Result};

/// Parameters shared by every check and replay.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub seed: u64,
    /// Overrides the per-check default sample count.
    pub samples: Option<usize>,
    pub tolerances: Tolerances,
    /// Largest graph size in the classical embedding checks.
    pub m: usize,
    /// Largest input width per party of random quantum protocols.
    pub k: usize,
    /// Largest round count of random protocols.
    pub rounds: usize,
    pub protocol: Option<PathBuf>,
    pub output: Option<PathBuf>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            samples: None,
            tolerances: Tolerances::default(),
            m: 4,
            k: 2,
            rounds: 4,
            protocol: None,
            output: None,
        }
    }
}

impl ExperimentConfig {
    pub fn with_seed(seed: u64) -> Self {
        Self {
            seed,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !self.tolerances.is_valid() {
            return Err(HarnessError::Config("tolerances must be positive".into()));
        }
        if self.samples == Some(0) {
            return Err(HarnessError::Config("at least one sample is needed".into()));
        }
        if !(3..=4).contains(&self.m) {
            return Err(HarnessError::Config(format!(
                "m = {} outside 3..=4",
                self.m
            )));
        }
        if self.k == 0 || 8 * self.k > MAX_SIMULATED_QUBITS {
            return Err(HarnessError::Config(format!(
                "k = {} outside the simulation cap",
                self.k
            )));
        }
        if self.rounds == 0 || self.rounds > 6 {
            return Err(HarnessError::Config(format!(
                "rounds = {} outside 1..=6",
                self.rounds
            )));
        }
        Ok(())
    }

    pub(crate) fn samples_or(&self, default: usize) -> usize {
        self.samples.unwrap_or(default)
    }
}
