//! With-memory tolerant testers: locality, general support testing,
//! sparsity, and the k-junta unitary tester (with and without memory).

use crate::error::{Error, Result};
use crate::evolution::{EvolutionOracle, OracleMode, UnitaryOracle};
use crate::pauli::PauliString;
use crate::report::{Decision, Thresholds, Verdict};
use crate::spectrum::UnitarySpectrum;

/// TopEnergy(t; s): |Uhat_0(t)|^2 plus the s largest non-identity
/// |Uhat_x(t)|^2, the sparsity tester's decision statistic.
#[derive(Debug, Clone, Copy)]
pub struct TopEnergyStat {
    pub t: f64,
    pub s: usize,
    pub value: f64,
}

/// TopEnergy from an exact spectrum.
pub fn top_energy(spectrum: &UnitarySpectrum, t: f64, s: usize) -> TopEnergyStat {
    let value = top_energy_of_probs(spectrum.n(), spectrum.probs(), s);
    TopEnergyStat { t, s, value }
}

/// Identity mass plus the top s non-identity masses of a dense probability
/// table, ties broken by label order.
pub fn top_energy_of_probs(n: u32, probs: &[f64], s: usize) -> f64 {
    let mut rest: Vec<(f64, u64)> = probs
        .iter()
        .enumerate()
        .skip(1)
        .map(|(idx, &p)| (p, PauliString::from_index(n, idx).unwrap().label_key()))
        .collect();
    rest.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap().then(a.1.cmp(&b.1)));
    probs[0] + rest.iter().take(s).map(|(p, _)| p).sum::<f64>()
}

/// One support set for [`test_support`], as an allow-mask over packed
/// indices. The identity string is always allowed: it carries no
/// Hamiltonian weight (targets are traceless) but essentially all of the
/// short-time evolution weight.
#[derive(Debug, Clone)]
pub struct SupportMask {
    allowed: Vec<bool>,
}

impl SupportMask {
    pub fn from_strings<'a>(n: u32, strings: impl IntoIterator<Item = &'a PauliString>) -> Result<Self> {
        let mut allowed = vec![false; 1usize << (2 * n)];
        allowed[0] = true;
        for x in strings {
            if x.n() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    got: x.n(),
                });
            }
            allowed[x.index()] = true;
        }
        Ok(SupportMask { allowed })
    }

    pub fn weight_at_most(n: u32, k: u32) -> Self {
        let mut allowed = vec![false; 1usize << (2 * n)];
        for (idx, slot) in allowed.iter_mut().enumerate() {
            *slot = PauliString::from_index(n, idx).unwrap().weight() <= k;
        }
        SupportMask { allowed }
    }

    pub fn contains(&self, x: &PauliString) -> bool {
        self.allowed[x.index()]
    }

    pub fn as_slice(&self) -> &[bool] {
        &self.allowed
    }

    fn mass_outside_counts(&self, counts: &[u64], total: u64) -> f64 {
        let off: u64 = counts
            .iter()
            .zip(self.allowed.iter())
            .filter(|(_, &ok)| !ok)
            .map(|(&c, _)| c)
            .sum();
        off as f64 / total as f64
    }
}

/// Simultaneous tolerant support tests against M candidate supports with a
/// shared two-phase Bell-sampling pass. Each decision compares the off-
/// support mass of U(t), t = (eps2 - eps1)/(3c), against the screening
/// cutoff 3/4 (eps2 - eps1)^2 and then the refined squared-midpoint cutoff.
/// The recorded gamma is the deciding off-support statistic (large = far).
pub fn test_support(
    oracle: &mut EvolutionOracle,
    supports: &[SupportMask],
    eps1: f64,
    eps2: f64,
    delta: f64,
) -> Result<Vec<Decision>> {
    if supports.is_empty() {
        return Err(Error::parameter("need at least one candidate support"));
    }
    if !(eps1 >= 0.0 && eps1 < eps2 && eps2 <= 1.0) {
        return Err(Error::parameter(format!(
            "need 0 <= eps1 < eps2 <= 1, got eps1 = {eps1}, eps2 = {eps2}"
        )));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::parameter(format!("delta must lie in (0,1), got {delta}")));
    }
    let gap = eps2 - eps1;
    let c = oracle.config().taylor_c;
    let t = gap / (3.0 * c);
    let m = supports.len() as f64;
    let (shots, clamped) = oracle
        .config()
        .sample_budget((2.0 * m / delta).ln() / gap.powi(4));
    // screening cutoff and refined cutoff: the structural bounds put close
    // instances below a = gap(2 eps1 + eps2)/(9c) and far ones above
    // b = gap(eps1 + 2 eps2)/(9c) in off-support norm; the refined test
    // compares the squared statistic against the squared midpoint.
    let phase1_cut = 0.75 * gap * gap;
    let a_bound = gap * (2.0 * eps1 + eps2) / (9.0 * c);
    let b_bound = gap * (eps1 + 2.0 * eps2) / (9.0 * c);
    let phase2_cut = ((a_bound + b_bound) / 2.0).powi(2);
    let (alpha1, alpha2): (Vec<f64>, Vec<f64>) = match oracle.mode() {
        OracleMode::Exact => {
            oracle.charge(2 * shots, t);
            let entry = oracle.spectrum(t)?;
            let exact: Vec<f64> = supports
                .iter()
                .map(|s| entry.spectrum.mass_outside(s.as_slice()))
                .collect();
            (exact.clone(), exact)
        }
        OracleMode::Shots => {
            let counts1 = oracle.bell_counts(t, shots)?;
            let counts2 = oracle.bell_counts(t, shots)?;
            (
                supports
                    .iter()
                    .map(|s| s.mass_outside_counts(&counts1, shots))
                    .collect(),
                supports
                    .iter()
                    .map(|s| s.mass_outside_counts(&counts2, shots))
                    .collect(),
            )
        }
    };
    let ledger = oracle.ledger();
    Ok(supports
        .iter()
        .enumerate()
        .map(|(i, _)| {
            let screened_far = alpha1[i] >= phase1_cut;
            let refined_far = alpha2[i] >= phase2_cut;
            let (gamma, cut) = if screened_far {
                (alpha1[i], phase1_cut)
            } else {
                (alpha2[i], phase2_cut)
            };
            Decision {
                verdict: if screened_far || refined_far {
                    Verdict::Far
                } else {
                    Verdict::Close
                },
                gamma,
                thresholds: Thresholds {
                    accept: cut,
                    reject: cut,
                },
                subgroup_generators: None,
                ledger,
                seed: oracle.seed(),
                budget_clamped: clamped,
            }
        })
        .collect())
}

/// Tolerant k-locality tester: support testing against the weight-<=k set.
pub fn test_locality(
    oracle: &mut EvolutionOracle,
    k: u32,
    eps1: f64,
    eps2: f64,
    delta: f64,
) -> Result<Decision> {
    let mask = SupportMask::weight_at_most(oracle.n(), k);
    Ok(test_support(oracle, &[mask], eps1, eps2, delta)?.remove(0))
}

/// Tolerant s-sparsity tester with memory: Bell-sample U(t) at
/// t = c_t (eps2^2 - eps1^2)/s and accept when the captured TopEnergy
/// statistic clears the dichotomy cutoff.
pub fn test_sparsity(
    oracle: &mut EvolutionOracle,
    s: usize,
    eps1: f64,
    eps2: f64,
    delta: f64,
) -> Result<Decision> {
    if s == 0 {
        return Err(Error::parameter("sparsity s must be positive"));
    }
    if !(eps1 >= 0.0 && eps1 < eps2 && eps2 <= 1.0) {
        return Err(Error::parameter(format!(
            "need 0 <= eps1 < eps2 <= 1, got eps1 = {eps1}, eps2 = {eps2}"
        )));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::parameter(format!("delta must lie in (0,1), got {delta}")));
    }
    let tau = eps2 * eps2 - eps1 * eps1;
    let t = oracle.config().sparsity_time_c * tau / s as f64;
    let (thresholds, _) = crate::hashing::sparsity_thresholds(eps1, eps2, s, t);
    let (shots, clamped) = oracle
        .config()
        .sample_budget((s as f64).powi(6) / tau.powi(12) * (2.0 / delta).ln());
    let gamma = match oracle.mode() {
        OracleMode::Exact => {
            oracle.charge(shots, t);
            let entry = oracle.spectrum(t)?;
            top_energy(&entry.spectrum, t, s).value
        }
        OracleMode::Shots => {
            let counts = oracle.bell_counts(t, shots)?;
            let probs: Vec<f64> = counts.iter().map(|&c| c as f64 / shots as f64).collect();
            top_energy_of_probs(oracle.n(), &probs, s)
        }
    };
    Ok(Decision {
        verdict: thresholds.decide(gamma),
        gamma,
        thresholds,
        subgroup_generators: None,
        ledger: oracle.ledger(),
        seed: oracle.seed(),
        budget_clamped: clamped,
    })
}

/// Tolerant k-junta tester for a unitary: estimate the full Pauli weight
/// distribution (Bell sampling with memory, MUB sampling without) and
/// accept when some k-subset of qubits captures at least the midpoint of
/// the 1 - eps1^2 vs 1 - eps2^2/4 dichotomy.
pub fn test_junta(
    oracle: &mut UnitaryOracle,
    k: u32,
    eps1: f64,
    eps2: f64,
    memory: bool,
) -> Result<Decision> {
    let n = oracle.n();
    if k > n {
        return Err(Error::parameter(format!("k = {k} exceeds n = {n}")));
    }
    if !(eps1 >= 0.0 && 2.0 * eps1 < eps2) {
        return Err(Error::parameter(format!(
            "need 0 <= 2 eps1 < eps2, got eps1 = {eps1}, eps2 = {eps2}"
        )));
    }
    let delta = oracle.config_junta_delta();
    let target = (eps2 * eps2 / 4.0 - eps1 * eps1) / (2.0 * 4f64.powi(k as i32));
    let all: Vec<PauliString> = crate::pauli::all_strings(n).collect();
    let (weights, clamped): (Vec<f64>, bool) = if memory {
        let (shots, clamped) = oracle
            .config_budget((2.0 / delta).ln() / (target * target));
        match oracle.mode() {
            OracleMode::Exact => {
                oracle.charge(shots);
                (all.iter().map(|x| oracle.spectrum().prob(x)).collect(), clamped)
            }
            OracleMode::Shots => {
                let counts = oracle.bell_counts(shots)?;
                (
                    all.iter()
                        .map(|x| counts[x.index()] as f64 / shots as f64)
                        .collect(),
                    clamped,
                )
            }
        }
    } else {
        oracle.memoryless_pauli_sampling(&all, target, delta)?
    };
    // exhaustive search over k-subsets, lexicographically smallest first
    let mut best = f64::NEG_INFINITY;
    for subset in k_subsets(n, k) {
        let w: f64 = all
            .iter()
            .zip(weights.iter())
            .filter(|(x, _)| x.support_mask() & !subset == 0)
            .map(|(_, q)| q)
            .sum();
        if w > best {
            best = w;
        }
    }
    let threshold = 1.0 - (eps1 * eps1 + eps2 * eps2 / 4.0) / 2.0;
    let thresholds = Thresholds {
        accept: threshold,
        reject: threshold,
    };
    Ok(Decision {
        verdict: if best >= threshold {
            Verdict::Close
        } else {
            Verdict::Far
        },
        gamma: best,
        thresholds,
        subgroup_generators: None,
        ledger: oracle.ledger(),
        seed: oracle.seed(),
        budget_clamped: clamped,
    })
}

/// Bitmasks of all k-subsets of [n], in lexicographic order.
fn k_subsets(n: u32, k: u32) -> Vec<u64> {
    fn rec(out: &mut Vec<u64>, mask: u64, next: u32, n: u32, left: u32) {
        if left == 0 {
            out.push(mask);
            return;
        }
        for q in next..n {
            if n - q < left {
                break;
            }
            rec(out, mask | (1 << q), q + 1, n, left - 1);
        }
    }
    let mut out = Vec::new();
    rec(&mut out, 0, 0, n, k);
    if k == 0 {
        // rec already pushed the empty mask
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::Config;
    use crate::hamiltonian::Hamiltonian;
    use rand::SeedableRng;
    use rand_chacha::ChaCha12Rng;

    fn p(s: &str) -> PauliString {
        s.parse().unwrap()
    }

    fn ham(n: u32, terms: &[(&str, f64)]) -> Hamiltonian {
        Hamiltonian::from_terms(n, terms.iter().map(|(s, c)| (p(s), *c))).unwrap()
    }

    fn cfg() -> Config {
        Config::default()
    }

    #[test]
    fn top_energy_single_term_is_one() {
        // H = Z: cos^2 + sin^2 = 1 at every t
        let h = ham(1, &[("Z", 1.0)]);
        for t in [0.1, 0.5, 1.2] {
            let u = crate::evolution::evolution_unitary(&h, t, 12).unwrap();
            let s = UnitarySpectrum::of_matrix(&u).unwrap();
            assert!((top_energy(&s, t, 1).value - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn locality_tester_exact_cases() {
        let c = cfg();
        // weight-1 Hamiltonian on 4 qubits is 1-local
        let h = ham(4, &[("ZIII", 1.0)]);
        let mut oracle = EvolutionOracle::new(h, 0, OracleMode::Exact, &c).unwrap();
        let d = test_locality(&mut oracle, 1, 0.05, 0.6, 0.1).unwrap();
        assert_eq!(d.verdict, Verdict::Close);
        // XXX is exactly distance 1 from 2-local
        let h = ham(3, &[("XXX", 1.0)]);
        let mut oracle = EvolutionOracle::new(h, 0, OracleMode::Exact, &c).unwrap();
        let d = test_locality(&mut oracle, 2, 0.05, 0.9, 0.1).unwrap();
        assert_eq!(d.verdict, Verdict::Far, "gamma = {}", d.gamma);
        // zero Hamiltonian is close for every k
        let mut oracle = EvolutionOracle::new(Hamiltonian::zero(3), 0, OracleMode::Exact, &c).unwrap();
        for k in 1..=3 {
            let d = test_locality(&mut oracle, k, 0.05, 0.6, 0.1).unwrap();
            assert_eq!(d.verdict, Verdict::Close);
        }
        // parameter validation
        let mut oracle = EvolutionOracle::new(Hamiltonian::zero(2), 0, OracleMode::Exact, &c).unwrap();
        assert!(test_locality(&mut oracle, 1, 0.5, 0.4, 0.1).is_err());
    }

    #[test]
    fn locality_tester_shot_mode_majority() {
        let c = cfg();
        let mut correct = 0;
        let trials = 40;
        for seed in 0..trials {
            let h = ham(4, &[("ZIII", 0.7), ("IXII", 0.5)]);
            let norm = h.operator_norm(12).unwrap();
            let h = h.scale(1.0 / norm);
            let mut oracle = EvolutionOracle::new(h, seed, OracleMode::Shots, &c).unwrap();
            let d = test_locality(&mut oracle, 1, 0.05, 0.6, 0.1).unwrap();
            if d.verdict == Verdict::Close {
                correct += 1;
            }
        }
        assert!(correct >= trials - 2, "close {correct}/{trials}");
    }

    #[test]
    fn support_tester_cases() {
        let c = cfg();
        // S = everything: always close
        let h = ham(2, &[("XZ", 0.9)]);
        let mut oracle = EvolutionOracle::new(h.clone(), 0, OracleMode::Exact, &c).unwrap();
        let all: Vec<PauliString> = crate::pauli::all_strings(2).collect();
        let full = SupportMask::from_strings(2, all.iter()).unwrap();
        let d = test_support(&mut oracle, &[full], 0.05, 0.9, 0.1).unwrap();
        assert_eq!(d[0].verdict, Verdict::Close);
        // S = {identity}: H = Z is distance 1 from it
        let h = ham(1, &[("Z", 1.0)]);
        let mut oracle = EvolutionOracle::new(h, 0, OracleMode::Exact, &c).unwrap();
        let only_id = SupportMask::from_strings(1, std::iter::empty()).unwrap();
        let d = test_support(&mut oracle, &[only_id], 0.05, 0.9, 0.1).unwrap();
        assert_eq!(d[0].verdict, Verdict::Far);
        // nested supports decide monotonically
        let h = ham(3, &[("ZII", 0.6), ("XXI", 0.5)]);
        let norm = h.operator_norm(12).unwrap();
        let h = h.scale(1.0 / norm);
        let mut oracle = EvolutionOracle::new(h, 0, OracleMode::Exact, &c).unwrap();
        let masks = vec![
            SupportMask::weight_at_most(3, 1),
            SupportMask::weight_at_most(3, 2),
            SupportMask::weight_at_most(3, 3),
        ];
        let ds = test_support(&mut oracle, &masks, 0.1, 0.7, 0.1).unwrap();
        let far_flags: Vec<bool> = ds.iter().map(|d| d.verdict == Verdict::Far).collect();
        for w in far_flags.windows(2) {
            assert!(w[0] >= w[1], "larger support flagged far while smaller was close");
        }
        assert!(test_support(&mut oracle, &[], 0.1, 0.7, 0.1).is_err());
    }

    #[test]
    fn sparsity_tester_exact_cases() {
        let c = cfg();
        let h = ham(1, &[("Z", 0.9)]);
        let mut oracle = EvolutionOracle::new(h, 0, OracleMode::Exact, &c).unwrap();
        let d = test_sparsity(&mut oracle, 1, 0.2, 0.9, 0.1).unwrap();
        assert_eq!(d.verdict, Verdict::Close, "gamma = {}", d.gamma);
        // far instance with certified distance
        let params = crate::instances::InstanceParams::default();
        let h = crate::instances::generate_instance(
            crate::instances::InstanceKind::FarFromSSparse { s: 2, eps2: 0.85 },
            4,
            &params,
            &mut ChaCha12Rng::seed_from_u64(7),
        )
        .unwrap();
        let mut oracle = EvolutionOracle::new(h, 0, OracleMode::Exact, &c).unwrap();
        let d = test_sparsity(&mut oracle, 2, 0.15, 0.85, 0.1).unwrap();
        assert_eq!(d.verdict, Verdict::Far, "gamma = {}", d.gamma);
    }

    #[test]
    fn junta_tester_cases() {
        let c = cfg();
        // single-qubit rotation is a 1-junta
        let h = ham(3, &[("XII", 0.8)]);
        let mut oracle = UnitaryOracle::from_evolution(&h, 1.0, 0, OracleMode::Exact, &c).unwrap();
        let d = test_junta(&mut oracle, 1, 0.1, 0.9, true).unwrap();
        assert_eq!(d.verdict, Verdict::Close);
        // exp(-i pi/4 XXX) has off-weight 1/2 for every 2-subset
        let h = ham(3, &[("XXX", std::f64::consts::FRAC_PI_4)]);
        let u = crate::evolution::evolution_unitary(&h.scale(4.0 / std::f64::consts::PI), std::f64::consts::FRAC_PI_4, 12).unwrap();
        let mut oracle = UnitaryOracle::from_unitary(u, 0, OracleMode::Exact, &c).unwrap();
        let d = test_junta(&mut oracle, 2, 0.1, 0.9, true).unwrap();
        assert_eq!(d.verdict, Verdict::Far, "gamma = {}", d.gamma);
        assert!((d.gamma - 0.5).abs() < 1e-9);
        // memory and memory-less agree in exact mode
        let h = ham(3, &[("XII", 0.8)]);
        let mut o1 = UnitaryOracle::from_evolution(&h, 1.0, 0, OracleMode::Exact, &c).unwrap();
        let m = test_junta(&mut o1, 1, 0.1, 0.9, true).unwrap();
        let mut o2 = UnitaryOracle::from_evolution(&h, 1.0, 0, OracleMode::Exact, &c).unwrap();
        let nm = test_junta(&mut o2, 1, 0.1, 0.9, false).unwrap();
        assert_eq!(m.verdict, nm.verdict);
        assert!((m.gamma - nm.gamma).abs() < 1e-12);
        // parameter validation: 2 eps1 >= eps2
        let mut o3 = UnitaryOracle::from_evolution(&h, 1.0, 0, OracleMode::Exact, &c).unwrap();
        assert!(test_junta(&mut o3, 1, 0.3, 0.5, true).is_err());
    }

    #[test]
    fn k_subset_enumeration() {
        assert_eq!(k_subsets(4, 2).len(), 6);
        assert_eq!(k_subsets(3, 0), vec![0]);
        assert_eq!(k_subsets(3, 3), vec![0b111]);
        let subs = k_subsets(4, 2);
        let mut sorted = subs.clone();
        sorted.sort();
        assert_eq!(subs.len(), sorted.len());
    }
}
