//! Shot-noise primitives and concentration-bound sample sizing.
//!
//! All sampled statistics are derived from exactly computed probabilities,
//! so batched draws (binomial / sequential-multinomial) are distributionally
//! identical to per-shot simulation and keep large budgets O(outcomes)
//! instead of O(shots).

use crate::error::{Error, Result};
use crate::pauli::PauliString;
use rand::Rng;
use rand_distr::{Binomial, Distribution};
use std::collections::BTreeMap;

/// Binomial(n, p) draw with the probability clamped into [0, 1] to absorb
/// floating-point slack.
pub fn binomial(rng: &mut impl Rng, n: u64, p: f64) -> u64 {
    if n == 0 {
        return 0;
    }
    let p = p.clamp(0.0, 1.0);
    if p == 0.0 {
        return 0;
    }
    if p == 1.0 {
        return n;
    }
    Binomial::new(n, p).expect("clamped p").sample(rng)
}

/// Exact multinomial counts by sequential conditional binomials.
pub fn multinomial(rng: &mut impl Rng, total: u64, probs: &[f64]) -> Vec<u64> {
    let mut counts = vec![0u64; probs.len()];
    let mut remaining = total;
    let mut mass_left: f64 = probs.iter().sum();
    for (i, &p) in probs.iter().enumerate() {
        if remaining == 0 {
            break;
        }
        if i + 1 == probs.len() || mass_left <= p {
            counts[i] = remaining;
            break;
        }
        let c = binomial(rng, remaining, p / mass_left);
        counts[i] = c;
        remaining -= c;
        mass_left -= p;
    }
    counts
}

/// Mean of `shots` +-1 outcomes with exact expectation `mean`.
pub fn pm_one_mean(rng: &mut impl Rng, shots: u64, mean: f64) -> f64 {
    let plus = binomial(rng, shots, (1.0 + mean) / 2.0);
    2.0 * plus as f64 / shots as f64 - 1.0
}

/// Empirical distribution of a non-empty sample list.
pub fn empirical_distribution(samples: &[PauliString]) -> Result<BTreeMap<PauliString, f64>> {
    if samples.is_empty() {
        return Err(Error::parameter("empirical distribution of no samples"));
    }
    let mut counts: BTreeMap<PauliString, f64> = BTreeMap::new();
    let w = 1.0 / samples.len() as f64;
    for s in samples {
        *counts.entry(*s).or_insert(0.0) += w;
    }
    Ok(counts)
}

/// Sizing rule selector for [`sample_count`].
#[derive(Debug, Clone, Copy)]
pub enum CountFlavor {
    Hoeffding,
    /// Bernstein with the given per-sample variance bound (|X| <= 1).
    Bernstein { var_bound: f64 },
}

/// Number of samples for an additive-eps estimate at confidence 1 - delta,
/// with a configurable leading constant.
pub fn sample_count(eps: f64, delta: f64, flavor: CountFlavor, constant: f64) -> Result<u64> {
    if !(0.0..1.0).contains(&eps) || eps == 0.0 || !(0.0..1.0).contains(&delta) || delta == 0.0 {
        return Err(Error::parameter(format!(
            "eps and delta must lie in (0, 1), got eps = {eps}, delta = {delta}"
        )));
    }
    let log = (2.0 / delta).ln();
    let raw = match flavor {
        CountFlavor::Hoeffding => constant * log / (eps * eps),
        CountFlavor::Bernstein { var_bound } => {
            constant * 2.0 * (var_bound + eps / 3.0) * log / (eps * eps)
        }
    };
    Ok(raw.ceil().max(1.0) as u64)
}
