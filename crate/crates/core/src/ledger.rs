use serde::{Deserialize, Serialize};

/// Query accounting for a single oracle: every issued batch adds its shot
/// count and shots * |t| of evolution time, in exact mode as well, so
/// budgets are comparable across modes.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Ledger {
    pub queries: u64,
    pub evolution_time: f64,
}

impl Ledger {
    pub fn charge(&mut self, queries: u64, duration_each: f64) {
        self.queries += queries;
        self.evolution_time += queries as f64 * duration_each.abs();
    }

    pub fn merge(&mut self, other: &Ledger) {
        self.queries += other.queries;
        self.evolution_time += other.evolution_time;
    }
}
