//! Pauli channels: error rates, fidelities, energies, distances, and the
//! Pauli-twirled channel induced by Hamiltonian evolution.

use crate::config::Config;
use crate::error::{Error, Result};
use crate::hamiltonian::Hamiltonian;
use crate::ledger::Ledger;
use crate::pauli::{symplectic_inner, PauliString};
use crate::sampling;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use std::collections::BTreeMap;

/// rho -> sum_x p(x) sigma_x rho sigma_x with error rates p on the simplex.
#[derive(Debug, Clone, PartialEq)]
pub struct PauliChannel {
    n: u32,
    rates: BTreeMap<PauliString, f64>,
}

impl PauliChannel {
    /// Validates non-negativity and normalization within 1e-9.
    pub fn new(n: u32, rates: impl IntoIterator<Item = (PauliString, f64)>) -> Result<Self> {
        let mut map = BTreeMap::new();
        let mut total = 0.0;
        for (x, p) in rates {
            if x.n() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    got: x.n(),
                });
            }
            if !p.is_finite() || p < -1e-12 {
                return Err(Error::validation(format!("invalid rate {p} at {x}")));
            }
            if p > 0.0 {
                total += p;
                *map.entry(x).or_insert(0.0) += p;
            }
        }
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::validation(format!(
                "error rates sum to {total}, expected 1"
            )));
        }
        Ok(PauliChannel { n, rates: map })
    }

    /// The identity channel p(0) = 1.
    pub fn identity(n: u32) -> Self {
        let mut rates = BTreeMap::new();
        rates.insert(PauliString::identity(n), 1.0);
        PauliChannel { n, rates }
    }

    #[inline]
    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn rate(&self, x: &PauliString) -> f64 {
        self.rates.get(x).copied().unwrap_or(0.0)
    }

    pub fn rates(&self) -> impl Iterator<Item = (&PauliString, f64)> {
        self.rates.iter().map(|(x, &p)| (x, p))
    }

    pub fn support_size(&self) -> usize {
        self.rates.len()
    }

    /// Pauli fidelity lambda(y) = sum_x (-1)^{[x,y]} p(x) in [-1, 1].
    pub fn fidelity(&self, y: &PauliString) -> Result<f64> {
        let mut acc = 0.0;
        for (x, p) in self.rates() {
            if symplectic_inner(x, y)? == 1 {
                acc -= p;
            } else {
                acc += p;
            }
        }
        Ok(acc)
    }

    /// Recover rates from a full fidelity table via the symplectic Fourier
    /// inverse p(a) = 4^{-n} sum_y (-1)^{[a,y]} lambda(y). Exponential in n;
    /// verifier-side only.
    pub fn from_fidelities(n: u32, fidelities: &[f64]) -> Result<Self> {
        let total = 1usize << (2 * n);
        if fidelities.len() != total {
            return Err(Error::parameter(format!(
                "need {total} fidelities, got {}",
                fidelities.len()
            )));
        }
        let mut rates = Vec::new();
        for a in crate::pauli::all_strings(n) {
            let mut acc = 0.0;
            for (idx, lam) in fidelities.iter().enumerate() {
                let y = PauliString::from_index(n, idx)?;
                if symplectic_inner(&a, &y)? == 1 {
                    acc -= lam;
                } else {
                    acc += lam;
                }
            }
            let p = acc / total as f64;
            if p.abs() > 1e-12 {
                rates.push((a, p));
            }
        }
        PauliChannel::new(n, rates)
    }

    /// Rates sorted descending, ties broken by label order.
    pub fn sorted_rates(&self) -> Vec<(PauliString, f64)> {
        let mut v: Vec<(PauliString, f64)> = self.rates.iter().map(|(x, &p)| (*x, p)).collect();
        v.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then_with(|| a.0.cmp(&b.0)));
        v
    }

    /// Energy(E; s): the sum of the s largest error rates.
    pub fn energy(&self, s: usize) -> f64 {
        self.sorted_rates().iter().take(s).map(|(_, p)| p).sum()
    }

    /// Energy restricted to non-identity strings (the Hamiltonian tester
    /// always separates the identity bucket).
    pub fn energy_excluding_identity(&self, s: usize) -> f64 {
        let mut v: Vec<f64> = self
            .rates
            .iter()
            .filter(|(x, _)| !x.is_identity())
            .map(|(_, &p)| p)
            .collect();
        v.sort_by(|a, b| b.partial_cmp(a).unwrap());
        v.iter().take(s).sum()
    }

    /// Exact distance to the s-sparse channels: keeping the top s rates and
    /// renormalizing is optimal, giving 1 - Energy(E; s).
    pub fn distance_to_sparse(&self, s: usize) -> f64 {
        (1.0 - self.energy(s)).max(0.0)
    }

    /// Dense superoperator application sum_x p(x) sigma_x rho sigma_x.
    pub fn apply_dense(&self, rho: &crate::dense::CMatrix, dense_cap: u32) -> Result<crate::dense::CMatrix> {
        if self.n > dense_cap {
            return Err(Error::CapacityExceeded {
                n: self.n,
                cap: dense_cap,
            });
        }
        let dim = 1usize << self.n;
        let mut out = crate::dense::CMatrix::zeros(dim, dim);
        for (x, p) in self.rates() {
            let m = crate::dense::pauli_matrix(x);
            out += &m * rho * &m * num_complex::Complex64::new(p, 0.0);
        }
        Ok(out)
    }
}

/// Total variation distance between the error-rate vectors.
pub fn channel_distance(a: &PauliChannel, b: &PauliChannel) -> Result<f64> {
    if a.n() != b.n() {
        return Err(Error::DimensionMismatch {
            expected: a.n(),
            got: b.n(),
        });
    }
    let mut sum = 0.0;
    for (x, p) in a.rates() {
        sum += (p - b.rate(x)).abs();
    }
    for (x, p) in b.rates() {
        if a.rate(x) == 0.0 {
            sum += p;
        }
    }
    Ok(sum / 2.0)
}

/// The Pauli-twirled evolution channel: p_t(x) = |Uhat_x(t)|^2, a valid
/// Pauli channel by Parseval.
pub fn twirled_channel_from_evolution(
    h: &Hamiltonian,
    t: f64,
    cfg: &Config,
) -> Result<PauliChannel> {
    if !h.is_traceless() {
        return Err(Error::validation("twirl target must be traceless"));
    }
    let u = crate::evolution::evolution_unitary(h, t, cfg.dense_cap)?;
    let spectrum = crate::spectrum::UnitarySpectrum::of_matrix(&u)?;
    let n = h.n();
    let rates = spectrum
        .probs()
        .iter()
        .enumerate()
        .filter(|(_, &p)| p > 0.0)
        .map(|(idx, &p)| (PauliString::from_index(n, idx).unwrap(), p))
        .collect::<Vec<_>>();
    PauliChannel::new(n, rates)
}

/// Prepare-apply-measure access to a hidden Pauli channel: fidelities are
/// the only observable, one +-1 outcome per query.
pub struct ChannelOracle {
    channel: PauliChannel,
    mode: crate::evolution::OracleMode,
    rng: ChaCha12Rng,
    seed: u64,
    ledger: Ledger,
}

impl ChannelOracle {
    pub fn new(channel: PauliChannel, seed: u64, mode: crate::evolution::OracleMode) -> Self {
        ChannelOracle {
            channel,
            mode,
            rng: ChaCha12Rng::seed_from_u64(seed),
            seed,
            ledger: Ledger::default(),
        }
    }

    #[inline]
    pub fn n(&self) -> u32 {
        self.channel.n()
    }

    #[inline]
    pub fn mode(&self) -> crate::evolution::OracleMode {
        self.mode
    }

    #[inline]
    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn ledger(&self) -> Ledger {
        self.ledger
    }

    /// Ground truth for verifiers.
    pub fn hidden_channel(&self) -> &PauliChannel {
        &self.channel
    }

    /// Empirical mean of `shots` +-1 outcomes whose exact mean is the Pauli
    /// fidelity lambda(z); exact mode returns lambda(z) itself.
    pub fn fidelity_shot(&mut self, z: &PauliString, shots: u64) -> Result<f64> {
        if shots == 0 {
            return Err(Error::parameter("fidelity_shot needs at least one shot"));
        }
        let lambda = self.channel.fidelity(z)?;
        self.ledger.charge(shots, 0.0);
        Ok(match self.mode {
            crate::evolution::OracleMode::Exact => lambda,
            crate::evolution::OracleMode::Shots => {
                sampling::pm_one_mean(&mut self.rng, shots, lambda)
            }
        })
    }
}

/// Channel promise-instance generator: plants s dominant rates (identity
/// included with probability half) and spreads residual mass d across many
/// small equal rates, so the exact sparse distance is d.
pub fn generate_channel_instance(
    n: u32,
    s: usize,
    distance: f64,
    rng: &mut impl Rng,
) -> Result<PauliChannel> {
    if s == 0 {
        return Err(Error::Generation("channel sparsity must be positive".into()));
    }
    if !(0.0..1.0).contains(&distance) {
        return Err(Error::Generation(format!(
            "sparse distance {distance} outside [0, 1)"
        )));
    }
    let total = 1usize << (2 * n);
    if s >= total {
        return Err(Error::Generation(format!(
            "s = {s} leaves no room for residual mass on {total} strings"
        )));
    }
    // top block: random simplex weights bounded away from zero
    let mut top_weights: Vec<f64> = (0..s).map(|_| rng.random_range(0.5..1.0)).collect();
    let top_sum: f64 = top_weights.iter().sum();
    for w in top_weights.iter_mut() {
        *w *= (1.0 - distance) / top_sum;
    }
    let min_top = top_weights.iter().cloned().fold(f64::INFINITY, f64::min);
    // residual block: equal rates strictly below the top block
    let mut residual_count = if distance > 0.0 {
        ((distance / min_top).ceil() as usize + 1).max(4)
    } else {
        0
    };
    residual_count = residual_count.min(total - s);
    if distance > 0.0 && distance / residual_count as f64 >= min_top {
        return Err(Error::Generation(format!(
            "residual mass {distance} cannot stay below the top rates with only \
             {residual_count} strings available"
        )));
    }
    // choose distinct strings: identity first with probability 1/2
    let mut chosen: Vec<PauliString> = Vec::new();
    let mut seen = std::collections::HashSet::new();
    if rng.random_bool(0.5) {
        let id = PauliString::identity(n);
        chosen.push(id);
        seen.insert(id);
    }
    let mask = (1u64 << (2 * n)) - 1;
    while chosen.len() < s + residual_count {
        let x = PauliString::from_packed(n, rng.random::<u64>() & mask)?;
        if seen.insert(x) {
            chosen.push(x);
        }
    }
    let mut rates: Vec<(PauliString, f64)> = Vec::with_capacity(s + residual_count);
    for (i, w) in top_weights.iter().enumerate() {
        rates.push((chosen[i], *w));
    }
    let tau = if residual_count > 0 {
        distance / residual_count as f64
    } else {
        0.0
    };
    for x in &chosen[s..] {
        rates.push((*x, tau));
    }
    let ch = PauliChannel::new(n, rates)?;
    let got = ch.distance_to_sparse(s);
    if (got - distance).abs() > 1e-9 {
        return Err(Error::Internal(format!(
            "channel instance distance {got} != requested {distance}"
        )));
    }
    Ok(ch)
}
