//! Decision and learning reports emitted by the testers and learners.

use crate::hamiltonian::Hamiltonian;
use crate::ledger::Ledger;
use crate::pauli::PauliString;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Close,
    Far,
    /// The statistic fell strictly between the accept and reject cutoffs;
    /// only possible off the promise.
    Undecided,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct Thresholds {
    /// Accept (close) when the statistic is at or above this.
    pub accept: f64,
    /// Reject (far) when the statistic is at or below this.
    pub reject: f64,
}

impl Thresholds {
    pub fn decide(&self, gamma: f64) -> Verdict {
        if gamma >= self.accept {
            Verdict::Close
        } else if gamma <= self.reject {
            Verdict::Far
        } else {
            Verdict::Undecided
        }
    }
}

/// Outcome of one tester run; a pure function of (statistic, thresholds)
/// plus the provenance needed to reproduce it.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Decision {
    pub verdict: Verdict,
    pub gamma: f64,
    pub thresholds: Thresholds,
    /// Hex-encoded generators of the hashing subgroup, when one was drawn.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub subgroup_generators: Option<Vec<String>>,
    pub ledger: Ledger,
    pub seed: u64,
    pub budget_clamped: bool,
}

/// Output of a learner run. The achieved error is filled by the verifier
/// (harness side), never by the learner itself.
#[derive(Debug, Clone)]
pub struct LearnReport {
    pub hamiltonian: Hamiltonian,
    pub target_error: f64,
    pub achieved_error: Option<f64>,
    /// Stage-1 detected strings, in label order.
    pub detected: Vec<PauliString>,
    pub ledger: Ledger,
    pub seed: u64,
    pub budget_clamped: bool,
    /// Which learner ran (relevant for the dispatching variant).
    pub strategy: LearnStrategy,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LearnStrategy {
    Local,
    Sparse,
}
