//! Pauli hashing: coset projections of symplectic functions, bucket-energy
//! estimation, the tolerant sparse-Pauli-channel tester, hashing-error
//! diagnostics, and the memory-less Hamiltonian sparsity tester obtained by
//! twirling the evolution channel.

use crate::channel::{ChannelOracle, PauliChannel};
use crate::error::{Error, Result};
use crate::evolution::{EvolutionOracle, OracleMode};
use crate::pauli::{symplectic_inner, PauliString};
use crate::report::{Decision, Thresholds};
use crate::subgroup::SymplecticSubgroup;
use rand::Rng;

/// Failure budget reserved for the energy-estimation stage of the hashing
/// testers (the subgroup draw carries its own 0.04 from the hashing-error
/// bound, matching the 0.9 overall guarantee).
const ESTIMATION_DELTA: f64 = 0.04;

/// In-place Walsh-Hadamard transform over the 2n-bit index.
fn wht_f64(v: &mut [f64]) {
    let n = v.len();
    let mut h = 1;
    while h < n {
        for block in (0..n).step_by(2 * h) {
            for i in block..block + h {
                let a = v[i];
                let b = v[i + h];
                v[i] = a + b;
                v[i + h] = a - b;
            }
        }
        h *= 2;
    }
}

/// Symplectic Fourier coefficients of a dense function on F_2^{2n}:
/// breve_f(a) = 4^{-n} sum_x (-1)^{[a,x]} f(x). Since [a, x] is the dot
/// product of x against the half-swapped a, this is a Walsh-Hadamard
/// transform composed with the swap reindexing.
pub fn symplectic_fourier(n: u32, f: &[f64]) -> Result<Vec<f64>> {
    let total = 1usize << (2 * n);
    if f.len() != total {
        return Err(Error::parameter(format!(
            "function table must have 4^n = {total} entries, got {}",
            f.len()
        )));
    }
    let mut v = f.to_vec();
    wht_f64(&mut v);
    let norm = 1.0 / total as f64;
    let mask = (1usize << n) - 1;
    let mut out = vec![0.0; total];
    for (a, slot) in out.iter_mut().enumerate() {
        let swapped = ((a & mask) << n) | (a >> n);
        *slot = v[swapped] * norm;
    }
    Ok(out)
}

/// f|_{a+V}(z) evaluated through the centralizer average
/// E_{x in C(V)}[f(x + z) chi_a(x)].
pub fn project_coset(
    f: &[f64],
    a: &PauliString,
    subspace: &SymplecticSubgroup,
    z: &PauliString,
) -> Result<f64> {
    let n = subspace.n();
    if f.len() != 1usize << (2 * n) {
        return Err(Error::parameter("function table size mismatch"));
    }
    let members = subspace.bucket_members(0)?;
    let mut acc = 0.0;
    for x in &members {
        let sign = if symplectic_inner(a, x)? == 1 { -1.0 } else { 1.0 };
        acc += sign * f[x.xor(z)?.index()];
    }
    Ok(acc / members.len() as f64)
}

/// Fourier-side projection sum_{beta in a+V} breve_f(beta) chi_beta(z).
pub fn project_coset_fourier(
    f: &[f64],
    a: &PauliString,
    subspace: &SymplecticSubgroup,
    z: &PauliString,
) -> Result<f64> {
    let breve = symplectic_fourier(subspace.n(), f)?;
    let mut acc = 0.0;
    for v in subspace.elements() {
        let beta = a.xor(&v)?;
        let sign = if symplectic_inner(&beta, z)? == 1 { -1.0 } else { 1.0 };
        acc += breve[beta.index()] * sign;
    }
    Ok(acc)
}

/// Coset weight wt_f(a + V) = sum_{alpha in a+V} breve_f(alpha)^2.
pub fn coset_weight(f: &[f64], a: &PauliString, subspace: &SymplecticSubgroup) -> Result<f64> {
    let breve = symplectic_fourier(subspace.n(), f)?;
    let mut acc = 0.0;
    for v in subspace.elements() {
        acc += breve[a.xor(&v)?.index()].powi(2);
    }
    Ok(acc)
}

/// The autocorrelation route to the same weight:
/// E_{x in F_2^{2n}, z in C(V)}[chi_a(z) f(x) f(x + z)].
pub fn coset_weight_autocorrelation(
    f: &[f64],
    a: &PauliString,
    subspace: &SymplecticSubgroup,
) -> Result<f64> {
    let n = subspace.n();
    let total = 1usize << (2 * n);
    if f.len() != total {
        return Err(Error::parameter("function table size mismatch"));
    }
    let members = subspace.bucket_members(0)?;
    let mut acc = 0.0;
    for z in &members {
        let sign = if symplectic_inner(a, z)? == 1 { -1.0 } else { 1.0 };
        let mut inner = 0.0;
        for x in 0..total {
            inner += f[x] * f[x ^ z.index()];
        }
        acc += sign * inner / total as f64;
    }
    Ok(acc / members.len() as f64)
}

/// How a bucket table was produced.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Provenance {
    Exact,
    Estimated { eps: f64, delta: f64 },
}

/// Per-bucket energies E(b) for a fixed subgroup.
#[derive(Debug, Clone)]
pub struct BucketTable {
    pub subgroup: SymplecticSubgroup,
    pub energies: Vec<f64>,
    pub provenance: Provenance,
}

impl BucketTable {
    /// Sum of the top `count` energies over all buckets.
    pub fn top_sum(&self, count: usize) -> f64 {
        let mut v = self.energies.clone();
        v.sort_by(|a, b| b.partial_cmp(a).unwrap());
        v.iter().take(count).sum()
    }

    /// E(0^t) plus the top `count` energies over the non-zero buckets.
    pub fn zero_bucket_plus_top(&self, count: usize) -> f64 {
        let mut rest: Vec<f64> = self.energies[1..].to_vec();
        rest.sort_by(|a, b| b.partial_cmp(a).unwrap());
        self.energies[0] + rest.iter().take(count).sum::<f64>()
    }
}

/// Exact bucket energies by direct coset sums over the channel support.
pub fn bucket_energies_exact(
    channel: &PauliChannel,
    subgroup: &SymplecticSubgroup,
) -> Result<BucketTable> {
    if channel.n() != subgroup.n() {
        return Err(Error::DimensionMismatch {
            expected: channel.n(),
            got: subgroup.n(),
        });
    }
    let mut energies = vec![0.0; subgroup.num_buckets()];
    for (x, p) in channel.rates() {
        energies[subgroup.bucket_index(x)? as usize] += p;
    }
    Ok(BucketTable {
        subgroup: subgroup.clone(),
        energies,
        provenance: Provenance::Exact,
    })
}

/// The fidelity-sum route to the same energies:
/// E(b) = 2^{-t} sum_{z in V} lambda(z) (-1)^{[z, a_b]}.
pub fn bucket_energies_fidelity_form(
    channel: &PauliChannel,
    subgroup: &SymplecticSubgroup,
) -> Result<Vec<f64>> {
    let elems = subgroup.elements();
    let lambdas: Vec<f64> = elems
        .iter()
        .map(|z| channel.fidelity(z))
        .collect::<Result<_>>()?;
    assemble_from_fidelities(subgroup, &elems, &lambdas)
}

fn assemble_from_fidelities(
    subgroup: &SymplecticSubgroup,
    elems: &[PauliString],
    lambdas: &[f64],
) -> Result<Vec<f64>> {
    let scale = 1.0 / elems.len() as f64;
    let mut energies = vec![0.0; subgroup.num_buckets()];
    for b in 0..subgroup.num_buckets() as u32 {
        let rep = subgroup.bucket_representative(b)?;
        let mut acc = 0.0;
        for (z, lam) in elems.iter().zip(lambdas.iter()) {
            if symplectic_inner(z, &rep)? == 1 {
                acc -= lam;
            } else {
                acc += lam;
            }
        }
        energies[b as usize] = acc * scale;
    }
    Ok(energies)
}

/// Estimate every bucket energy to within eps (with probability 1 - delta)
/// by estimating the 2^t fidelities lambda(z), z in the subgroup, with
/// O(2^t / eps^2 log(2^t / delta)) total queries. Returns the table and the
/// budget-clamped flag.
pub fn estimate_bucket_energies(
    oracle: &mut ChannelOracle,
    subgroup: &SymplecticSubgroup,
    eps: f64,
    delta: f64,
) -> Result<(BucketTable, bool)> {
    if oracle.n() != subgroup.n() {
        return Err(Error::DimensionMismatch {
            expected: oracle.n(),
            got: subgroup.n(),
        });
    }
    let elems = subgroup.elements();
    let per_fid = 2.0 * (2.0 * elems.len() as f64 / delta).ln() / (eps * eps);
    // the budget multiplier comes with the oracle-independent default config
    let (shots, clamped) = crate::config::Config::default().sample_budget(per_fid);
    let mut lambdas = Vec::with_capacity(elems.len());
    for z in &elems {
        lambdas.push(oracle.fidelity_shot(z, shots)?);
    }
    let energies = assemble_from_fidelities(subgroup, &elems, &lambdas)?;
    Ok((
        BucketTable {
            subgroup: subgroup.clone(),
            energies,
            provenance: Provenance::Estimated { eps, delta },
        },
        clamped,
    ))
}

/// Hashing-error diagnostics of a channel against one subgroup draw.
#[derive(Debug, Clone)]
pub struct HashingDiagnostics {
    /// err(E; V, s) = sum_{j<=s} (E_j - p_{y_j}).
    pub err: f64,
    /// Collision errors err_j = E_j - E'_j for every bucket, sorted by
    /// bucket energy descending.
    pub collision_errors: Vec<f64>,
    /// Bucket ids sorted by energy descending (ties by id).
    pub top_bucket_order: Vec<u32>,
    /// Gamma - Energy(E; s) for the exact table; equal to `err`.
    pub gamma_energy_gap: f64,
}

pub fn hashing_diagnostics(
    channel: &PauliChannel,
    subgroup: &SymplecticSubgroup,
    s: usize,
) -> Result<HashingDiagnostics> {
    let table = bucket_energies_exact(channel, subgroup)?;
    // E'_b: largest single rate inside bucket b
    let mut best_rate = vec![0.0f64; subgroup.num_buckets()];
    for (x, p) in channel.rates() {
        let b = subgroup.bucket_index(x)? as usize;
        if p > best_rate[b] {
            best_rate[b] = p;
        }
    }
    let mut order: Vec<u32> = (0..subgroup.num_buckets() as u32).collect();
    order.sort_by(|&a, &b| {
        table.energies[b as usize]
            .partial_cmp(&table.energies[a as usize])
            .unwrap()
            .then(a.cmp(&b))
    });
    let collision_errors: Vec<f64> = order
        .iter()
        .map(|&b| table.energies[b as usize] - best_rate[b as usize])
        .collect();
    let top_rates: Vec<f64> = channel
        .sorted_rates()
        .iter()
        .take(s)
        .map(|(_, p)| *p)
        .collect();
    let top_energy_sum: f64 = order
        .iter()
        .take(s)
        .map(|&b| table.energies[b as usize])
        .sum();
    let err = top_energy_sum - top_rates.iter().sum::<f64>();
    Ok(HashingDiagnostics {
        err,
        collision_errors,
        top_bucket_order: order,
        gamma_energy_gap: err,
    })
}

/// Tolerant s-sparsity tester for Pauli channels. Promised either
/// eps1-close or eps2-far (total variation of the error rates), decides
/// with probability >= 0.9.
pub fn test_channel_sparsity(
    oracle: &mut ChannelOracle,
    s: usize,
    eps1: f64,
    eps2: f64,
    rng: &mut impl Rng,
) -> Result<Decision> {
    if s == 0 {
        return Err(Error::parameter("sparsity s must be positive"));
    }
    if !(eps1 >= 0.0 && 2.0 * eps1 < eps2 && eps2 < 1.0) {
        return Err(Error::parameter(format!(
            "need 0 <= 2 eps1 < eps2 < 1, got eps1 = {eps1}, eps2 = {eps2}"
        )));
    }
    let n = oracle.n();
    let e = (eps2 - 2.0 * eps1) / 3.0;
    let t = ((2.0 * s as f64 / (e * e)).log2().ceil().max(0.0) as u32).min(2 * n);
    let subgroup = SymplecticSubgroup::random(n, t, rng)?;
    // sum_b |estimated - exact| <= e/2 via per-bucket accuracy e / 2^{t+1}
    let per_bucket = e / (2.0 * subgroup.num_buckets() as f64);
    let (table, clamped) =
        estimate_bucket_energies(oracle, &subgroup, per_bucket, ESTIMATION_DELTA)?;
    let gamma = table.top_sum(s);
    // Energy >= 1 - 2 eps1 on close inputs, <= 1 - eps2 on far ones, and
    // |Gamma - Energy| <= e: accept/reject at the certified bounds.
    let thresholds = Thresholds {
        accept: 1.0 - 2.0 * eps1 - e,
        reject: 1.0 - eps2 + e,
    };
    Ok(Decision {
        verdict: thresholds.decide(gamma),
        gamma,
        thresholds,
        subgroup_generators: Some(subgroup.generators_hex()),
        ledger: oracle.ledger(),
        seed: oracle.seed(),
        budget_clamped: clamped,
    })
}

/// Twirled-channel fidelities lambda_t(z) = sum_x (-1)^{[x,z]} |Uhat_x(t)|^2
/// for each subgroup element, from the exact spectrum.
fn twirled_fidelities(
    oracle: &mut EvolutionOracle,
    t_evol: f64,
    elems: &[PauliString],
) -> Result<Vec<f64>> {
    let entry = oracle.spectrum(t_evol)?;
    let n = oracle.n();
    let probs = entry.spectrum.probs();
    let mut out = Vec::with_capacity(elems.len());
    for z in elems {
        let mut acc = 0.0;
        for (idx, &p) in probs.iter().enumerate() {
            if p == 0.0 {
                continue;
            }
            let x = PauliString::from_index(n, idx)?;
            if symplectic_inner(&x, z)? == 1 {
                acc -= p;
            } else {
                acc += p;
            }
        }
        out.push(acc);
    }
    Ok(out)
}

/// Bucket energies of the Pauli-twirled evolution channel, estimated by
/// `budget` rounds per subgroup element of: prepare the sigma_z eigenstate
/// mixture, conjugate by a uniform Pauli, evolve, conjugate back, measure
/// sigma_z. The outcome mean is exactly the twirled fidelity, so shot noise
/// is a +-1 batch per element. In exact mode the table equals the direct
/// coset sums of the twirled channel.
pub fn estimate_bucket_energies_hamiltonian(
    oracle: &mut EvolutionOracle,
    t_evol: f64,
    subgroup: &SymplecticSubgroup,
    budget: u64,
) -> Result<BucketTable> {
    if oracle.n() != subgroup.n() {
        return Err(Error::DimensionMismatch {
            expected: oracle.n(),
            got: subgroup.n(),
        });
    }
    if budget == 0 {
        return Err(Error::parameter("budget must be positive"));
    }
    let elems = subgroup.elements();
    let exact = twirled_fidelities(oracle, t_evol, &elems)?;
    oracle.charge(budget * elems.len() as u64, t_evol);
    let lambdas: Vec<f64> = match oracle.mode() {
        OracleMode::Exact => exact,
        OracleMode::Shots => exact
            .iter()
            .map(|&lam| crate::sampling::pm_one_mean(oracle.rng(), budget, lam))
            .collect(),
    };
    let energies = assemble_from_fidelities(subgroup, &elems, &lambdas)?;
    Ok(BucketTable {
        subgroup: subgroup.clone(),
        energies,
        provenance: Provenance::Estimated {
            eps: 0.0,
            delta: 0.0,
        },
    })
}

/// Memory-less tolerant s-sparsity tester for Hamiltonians (normalized
/// Frobenius distance), via Pauli hashing of the twirled evolution channel.
pub fn test_hamiltonian_sparsity_memoryless(
    oracle: &mut EvolutionOracle,
    s: usize,
    eps1: f64,
    eps2: f64,
    rng: &mut impl Rng,
) -> Result<Decision> {
    if s == 0 {
        return Err(Error::parameter("sparsity s must be positive"));
    }
    if !(eps1 >= 0.0 && eps1 < eps2 && eps2 <= 1.0) {
        return Err(Error::parameter(format!(
            "need 0 <= eps1 < eps2 <= 1, got eps1 = {eps1}, eps2 = {eps2}"
        )));
    }
    let n = oracle.n();
    let tau = eps2 * eps2 - eps1 * eps1;
    let t_evol = oracle.config().sparsity_time_c * tau / s as f64;
    let (thresholds, eps_est) = sparsity_thresholds(eps1, eps2, s, t_evol);
    let d = ((2.0 * s as f64 / (eps_est * eps_est))
        .log2()
        .ceil()
        .max(0.0) as u32)
        .min(2 * n);
    let subgroup = SymplecticSubgroup::random(n, d, rng)?;
    let per_fid = eps_est / (2.0 * subgroup.num_buckets() as f64);
    let (budget, clamped) = oracle.config().sample_budget(
        2.0 * (2.0 * subgroup.num_buckets() as f64 / ESTIMATION_DELTA).ln() / (per_fid * per_fid),
    );
    let table = estimate_bucket_energies_hamiltonian(oracle, t_evol, &subgroup, budget)?;
    let gamma = table.zero_bucket_plus_top(s);
    Ok(Decision {
        verdict: thresholds.decide(gamma),
        gamma,
        thresholds,
        subgroup_generators: Some(subgroup.generators_hex()),
        ledger: oracle.ledger(),
        seed: oracle.seed(),
        budget_clamped: clamped,
    })
}

/// Accept/reject cutoffs of the sparsity testers, derived from the
/// structural dichotomy at the realized evolution time t:
/// close => TopEnergy >= 1 - eps1^2 t^2 - t^3 s / 3, far => TopEnergy <=
/// 1 - eps2^2 t^2 + t^3 s / 3, with the estimation target eps chosen to
/// consume the remaining gap. At t = tau / s this reduces to
/// accept = 1 - eps1^2 tau^2/s^2 - tau^3/(2 s^2) and the mirrored reject.
pub(crate) fn sparsity_thresholds(
    eps1: f64,
    eps2: f64,
    s: usize,
    t_evol: f64,
) -> (Thresholds, f64) {
    let sf = s as f64;
    let tau = eps2 * eps2 - eps1 * eps1;
    let third_order = t_evol.powi(3) * sf / 3.0;
    let gap = tau * t_evol * t_evol - 2.0 * third_order;
    let eps_est = (gap / 2.0).max(f64::MIN_POSITIVE);
    (
        Thresholds {
            accept: 1.0 - eps1 * eps1 * t_evol * t_evol - third_order - eps_est,
            reject: 1.0 - eps2 * eps2 * t_evol * t_evol + third_order + eps_est,
        },
        eps_est,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::generate_channel_instance;
    use crate::config::Config;
    use crate::hamiltonian::Hamiltonian;
    use crate::pauli::all_strings;
    use rand::SeedableRng;
    use rand_chacha::ChaCha12Rng;

    fn p(s: &str) -> PauliString {
        s.parse().unwrap()
    }

    #[test]
    fn fourier_of_constant_function() {
        // f == 1 concentrates on the zero string; coset weight is the
        // indicator of 0 in the coset.
        let n = 2;
        let f = vec![1.0; 16];
        let breve = symplectic_fourier(n, &f).unwrap();
        assert!((breve[0] - 1.0).abs() < 1e-12);
        assert!(breve[1..].iter().all(|v| v.abs() < 1e-12));
        let mut rng = ChaCha12Rng::seed_from_u64(2);
        let sub = SymplecticSubgroup::random(n, 2, &mut rng).unwrap();
        let w0 = coset_weight(&f, &PauliString::identity(n), &sub).unwrap();
        assert!((w0 - 1.0).abs() < 1e-12);
        // a coset a + V missing the zero string (a outside V) has weight 0
        let members = sub.elements();
        let off = all_strings(n).find(|x| !members.contains(x)).unwrap();
        assert!(coset_weight(&f, &off, &sub).unwrap().abs() < 1e-12);
    }

    #[test]
    fn trivial_subspace_projection_keeps_single_coefficient() {
        let n = 1;
        let mut rng = ChaCha12Rng::seed_from_u64(3);
        let f: Vec<f64> = (0..4).map(|_| rng.random_range(-1.0..1.0)).collect();
        let sub = SymplecticSubgroup::trivial(n);
        let breve = symplectic_fourier(n, &f).unwrap();
        for a in all_strings(n) {
            for z in all_strings(n) {
                let proj = project_coset(&f, &a, &sub, &z).unwrap();
                let sign = if symplectic_inner(&a, &z).unwrap() == 1 {
                    -1.0
                } else {
                    1.0
                };
                assert!((proj - breve[a.index()] * sign).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn projection_and_weight_formulas_agree() {
        let n = 2;
        let mut rng = ChaCha12Rng::seed_from_u64(5);
        let f: Vec<f64> = (0..16).map(|_| rng.random_range(-1.0..1.0)).collect();
        for t in 0..=4u32 {
            let sub = SymplecticSubgroup::random(n, t, &mut rng).unwrap();
            for a in all_strings(n).take(6) {
                for z in all_strings(n).take(4) {
                    let direct = project_coset(&f, &a, &sub, &z).unwrap();
                    let fourier = project_coset_fourier(&f, &a, &sub, &z).unwrap();
                    assert!((direct - fourier).abs() < 1e-10, "t={t} a={a} z={z}");
                }
                let w = coset_weight(&f, &a, &sub).unwrap();
                let w2 = coset_weight_autocorrelation(&f, &a, &sub).unwrap();
                assert!((w - w2).abs() < 1e-10, "t={t} a={a}");
            }
        }
    }

    #[test]
    fn bucket_energy_single_qubit_example() {
        let ch = PauliChannel::new(
            1,
            [(p("I"), 0.7), (p("X"), 0.1), (p("Y"), 0.1), (p("Z"), 0.1)],
        )
        .unwrap();
        let sub = SymplecticSubgroup::new(1, vec![p("Z")]).unwrap();
        let table = bucket_energies_exact(&ch, &sub).unwrap();
        assert!((table.energies[0] - 0.8).abs() < 1e-12); // {I, Z}
        assert!((table.energies[1] - 0.2).abs() < 1e-12); // {X, Y}
        let fid = bucket_energies_fidelity_form(&ch, &sub).unwrap();
        // (1 + lambda(Z) = 0.6) / 2 = 0.8
        assert!((fid[0] - 0.8).abs() < 1e-12);
        assert!((fid[1] - 0.2).abs() < 1e-12);
    }

    #[test]
    fn trivial_subgroup_single_bucket() {
        let ch = PauliChannel::identity(2);
        let sub = SymplecticSubgroup::trivial(2);
        let table = bucket_energies_exact(&ch, &sub).unwrap();
        assert_eq!(table.energies.len(), 1);
        assert!((table.energies[0] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn coset_sum_equals_fidelity_sum_exhaustively() {
        let mut rng = ChaCha12Rng::seed_from_u64(7);
        for n in 1..=3u32 {
            let ch = generate_channel_instance(n, 2, 0.3, &mut rng).unwrap();
            for t in 0..=(2 * n) {
                let sub = SymplecticSubgroup::random(n, t, &mut rng).unwrap();
                let direct = bucket_energies_exact(&ch, &sub).unwrap();
                let fid = bucket_energies_fidelity_form(&ch, &sub).unwrap();
                for (a, b) in direct.energies.iter().zip(fid.iter()) {
                    assert!((a - b).abs() < 1e-9, "n={n} t={t}");
                }
                let total: f64 = direct.energies.iter().sum();
                assert!((total - 1.0).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn estimated_energies_exact_mode_reproduce() {
        let mut rng = ChaCha12Rng::seed_from_u64(9);
        let ch = generate_channel_instance(2, 2, 0.2, &mut rng).unwrap();
        let sub = SymplecticSubgroup::random(2, 3, &mut rng).unwrap();
        let exact = bucket_energies_exact(&ch, &sub).unwrap();
        let mut oracle = ChannelOracle::new(ch, 4, OracleMode::Exact);
        let (est, _) = estimate_bucket_energies(&mut oracle, &sub, 0.05, 0.1).unwrap();
        for (a, b) in exact.energies.iter().zip(est.energies.iter()) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn estimated_energies_within_eps_shot_mode() {
        let mut rng = ChaCha12Rng::seed_from_u64(11);
        let ch = generate_channel_instance(2, 2, 0.2, &mut rng).unwrap();
        let sub = SymplecticSubgroup::random(2, 3, &mut rng).unwrap();
        let exact = bucket_energies_exact(&ch, &sub).unwrap();
        let mut fails = 0;
        let trials = 60;
        for seed in 0..trials {
            let mut oracle = ChannelOracle::new(ch.clone(), seed, OracleMode::Shots);
            let (est, _) = estimate_bucket_energies(&mut oracle, &sub, 0.05, 0.1).unwrap();
            let linf = exact
                .energies
                .iter()
                .zip(est.energies.iter())
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
            if linf > 0.05 {
                fails += 1;
            }
        }
        assert!(fails <= 4, "{fails}/{trials} runs exceeded eps");
    }

    #[test]
    fn channel_tester_promise_examples() {
        // p(I) = 0.95, p(X1) = 0.05 is exactly 2-sparse
        let ch = PauliChannel::new(2, [(p("II"), 0.95), (p("XI"), 0.05)]).unwrap();
        let mut rng = ChaCha12Rng::seed_from_u64(1);
        let mut oracle = ChannelOracle::new(ch, 0, OracleMode::Exact);
        let d = test_channel_sparsity(&mut oracle, 2, 0.1, 0.8, &mut rng).unwrap();
        assert_eq!(d.verdict, crate::report::Verdict::Close);
        // uniform channel over all 16 two-qubit Paulis is far from 1-sparse
        let uniform = PauliChannel::new(
            2,
            all_strings(2).map(|x| (x, 1.0 / 16.0)),
        )
        .unwrap();
        assert!((uniform.distance_to_sparse(1) - 15.0 / 16.0).abs() < 1e-12);
        let mut oracle = ChannelOracle::new(uniform, 0, OracleMode::Exact);
        let d = test_channel_sparsity(&mut oracle, 1, 0.05, 0.8, &mut rng).unwrap();
        assert_eq!(d.verdict, crate::report::Verdict::Far);
        // parameter error when 2 eps1 >= eps2
        let ch = PauliChannel::identity(2);
        let mut oracle = ChannelOracle::new(ch, 0, OracleMode::Exact);
        assert!(test_channel_sparsity(&mut oracle, 1, 0.3, 0.5, &mut rng).is_err());
    }

    #[test]
    fn diagnostics_isolated_support_has_zero_error() {
        // three isolated support elements, s = 2: top buckets match top rates
        let ch = PauliChannel::new(
            2,
            [(p("II"), 0.5), (p("XI"), 0.3), (p("ZZ"), 0.2)],
        )
        .unwrap();
        // full-dimension subgroup isolates every string
        let mut rng = ChaCha12Rng::seed_from_u64(3);
        let sub = SymplecticSubgroup::random(2, 4, &mut rng).unwrap();
        let diag = hashing_diagnostics(&ch, &sub, 2).unwrap();
        assert!(diag.err.abs() < 1e-12);
    }

    #[test]
    fn diagnostics_forced_collision() {
        // t = 0: a single bucket, err equals the smaller rate at s = 1
        let ch = PauliChannel::new(1, [(p("I"), 0.7), (p("X"), 0.3)]).unwrap();
        let sub = SymplecticSubgroup::trivial(1);
        let diag = hashing_diagnostics(&ch, &sub, 1).unwrap();
        assert!((diag.err - 0.3).abs() < 1e-12);
        assert!((diag.collision_errors[0] - 0.3).abs() < 1e-12);
    }

    #[test]
    fn hamiltonian_bucket_energies_match_twirl() {
        let cfg = Config::default();
        let h = Hamiltonian::from_terms(2, [(p("ZI"), 0.5), (p("XX"), 0.4)]).unwrap();
        let t = 0.7;
        let twirled = crate::channel::twirled_channel_from_evolution(&h, t, &cfg).unwrap();
        let mut rng = ChaCha12Rng::seed_from_u64(5);
        for d in [1u32, 2, 4] {
            let sub = SymplecticSubgroup::random(2, d, &mut rng).unwrap();
            let expect = bucket_energies_exact(&twirled, &sub).unwrap();
            let mut oracle = EvolutionOracle::new(h.clone(), 3, OracleMode::Exact, &cfg).unwrap();
            let table = estimate_bucket_energies_hamiltonian(&mut oracle, t, &sub, 10).unwrap();
            for (a, b) in expect.energies.iter().zip(table.energies.iter()) {
                assert!((a - b).abs() < 1e-9, "d={d}");
            }
        }
    }

    #[test]
    fn hamiltonian_bucket_single_qubit_example() {
        // H = Z, t = pi/4, subgroup {Z}: twirled rates p(I) = p(Z) = 1/2 are
        // both in the centralizer coset, so E(0) = 1
        let cfg = Config::default();
        let h = Hamiltonian::from_terms(1, [(p("Z"), 1.0)]).unwrap();
        let sub = SymplecticSubgroup::new(1, vec![p("Z")]).unwrap();
        let mut oracle = EvolutionOracle::new(h, 0, OracleMode::Exact, &cfg).unwrap();
        let table = estimate_bucket_energies_hamiltonian(
            &mut oracle,
            std::f64::consts::FRAC_PI_4,
            &sub,
            5,
        )
        .unwrap();
        assert!((table.energies[0] - 1.0).abs() < 1e-12);
        assert!(table.energies[1].abs() < 1e-12);
        // t = 0: identity channel, all fidelities 1
        let table0 = estimate_bucket_energies_hamiltonian(&mut oracle, 0.0, &sub, 5).unwrap();
        assert!((table0.energies[0] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn ham_tester_exact_promise_cases() {
        let cfg = Config::default();
        let mut rng = ChaCha12Rng::seed_from_u64(21);
        // 1-sparse instance is close
        let h = Hamiltonian::from_terms(1, [(p("Z"), 0.9)]).unwrap();
        let mut oracle = EvolutionOracle::new(h, 1, OracleMode::Exact, &cfg).unwrap();
        let d = test_hamiltonian_sparsity_memoryless(&mut oracle, 1, 0.2, 0.9, &mut rng).unwrap();
        assert_eq!(d.verdict, crate::report::Verdict::Close, "gamma={}", d.gamma);
        // far instance: certified distance above eps2
        let params = crate::instances::InstanceParams::default();
        let h = crate::instances::generate_instance(
            crate::instances::InstanceKind::FarFromSSparse { s: 2, eps2: 0.85 },
            4,
            &params,
            &mut ChaCha12Rng::seed_from_u64(5),
        )
        .unwrap();
        let mut oracle = EvolutionOracle::new(h, 1, OracleMode::Exact, &cfg).unwrap();
        let d = test_hamiltonian_sparsity_memoryless(&mut oracle, 2, 0.15, 0.85, &mut rng).unwrap();
        assert_eq!(d.verdict, crate::report::Verdict::Far, "gamma={}", d.gamma);
    }
}
