use serde::{Deserialize, Serialize};

/// Default cap on the qubit count for anything that builds 2^n x 2^n matrices.
pub const DEFAULT_DENSE_CAP: u32 = 12;

/// Tunable constants shared by the simulator, testers and learners.
///
/// Every asymptotic sample count in the protocols is instantiated as
/// `ceil(budget_c * formula)` and clamped to `shot_cap`, so the constants
/// here fully determine the query budgets of a run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Config {
    /// Max n for dense simulation (overridable via HAMPROBE_DENSE_CAP).
    pub dense_cap: u32,
    /// Constant `c` of the first-order Taylor remainder bound; the locality
    /// tester evolves for (eps2 - eps1) / (3 c).
    pub taylor_c: f64,
    /// Global multiplier applied to every sample-count formula.
    pub budget_c: f64,
    /// Multiplier on the evolution time t = c_t (eps2^2 - eps1^2) / s used by
    /// both sparsity testers. The accept/reject thresholds are derived from
    /// the realized t, so values other than 1.0 remain consistent.
    pub sparsity_time_c: f64,
    /// Multiplier on t = c_t eps / sqrt(s) in the sparse learner.
    pub sparse_learner_time_c: f64,
    /// Bohnenblust-Hille constant governing the local learner's evolution
    /// time t = eps^(k+1) * C^(-k(k+1)/2).
    pub bh_constant: f64,
    /// Hard cap on any single sample count; exceeding it sets the
    /// budget-clamped flag on the resulting report.
    pub shot_cap: u64,
    /// Failure probability used by the junta tester (the statement fixes no
    /// delta of its own).
    pub junta_delta: f64,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            dense_cap: DEFAULT_DENSE_CAP,
            taylor_c: 1.0,
            budget_c: 1.0,
            sparsity_time_c: 1.0,
            sparse_learner_time_c: 0.5,
            bh_constant: 2.0,
            shot_cap: 1_000_000_000,
            junta_delta: 0.1,
        }
    }
}

impl Config {
    /// Default configuration with the dense cap taken from the
    /// HAMPROBE_DENSE_CAP environment variable when set.
    pub fn from_env() -> Self {
        let mut cfg = Config::default();
        if let Ok(v) = std::env::var("HAMPROBE_DENSE_CAP") {
            if let Ok(cap) = v.trim().parse::<u32>() {
                cfg.dense_cap = cap;
            }
        }
        cfg
    }

    pub(crate) fn check_dense(&self, n: u32) -> crate::error::Result<()> {
        if n > self.dense_cap {
            Err(crate::error::Error::CapacityExceeded {
                n,
                cap: self.dense_cap,
            })
        } else {
            Ok(())
        }
    }

    /// `ceil(budget_c * formula)` clamped to `shot_cap`; the bool reports
    /// whether clamping occurred.
    pub fn sample_budget(&self, formula: f64) -> (u64, bool) {
        let raw = (self.budget_c * formula).ceil();
        if !raw.is_finite() || raw >= self.shot_cap as f64 {
            (self.shot_cap, true)
        } else {
            (raw.max(1.0) as u64, false)
        }
    }
}
