use serde::{Deserialize, Serialize};

/// Numerical tolerances shared by the kernel and the check harness.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// Validity of states: normalization, Hermiticity, trace, eigenvalue clipping.
    pub state_tol: f64,
    /// Allowed violation of an inequality before a check fails.
    pub check_slack: f64,
    /// Allowed violation of exact identities.
    pub exact_tol: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            state_tol: 1e-9,
            check_slack: 1e-7,
            exact_tol: 1e-12,
        }
    }
}

impl Tolerances {
    pub fn is_valid(&self) -> bool {
        self.state_tol > 0.0 && self.check_slack > 0.0 && self.exact_tol > 0.0
    }
}
