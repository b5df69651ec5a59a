//! Two-stage learners for local and sparse Hamiltonians, their memory-less
//! variants, and the dispatch for targets that are both.
//!
//! Stage 1 detects the big Pauli coefficients of U(t) (Bell sampling with
//! memory, MUB sampling without); stage 2 estimates each detected
//! coefficient and divides out the short evolution time. Outputs are always
//! real and traceless: the coefficient read-out takes Re(i Uhat_x / t).

use crate::error::{Error, Result};
use crate::evolution::{EvolutionOracle, OracleMode};
use crate::hamiltonian::Hamiltonian;
use crate::pauli::PauliString;
use crate::report::{LearnReport, LearnStrategy};

fn check_eps_delta(eps: f64, delta: f64) -> Result<()> {
    if !(eps > 0.0 && eps < 1.0) || !(delta > 0.0 && delta < 1.0) {
        return Err(Error::parameter(format!(
            "eps and delta must lie in (0, 1), got eps = {eps}, delta = {delta}"
        )));
    }
    Ok(())
}

/// Stage-1 detection from a dense frequency table: strings (identity
/// excluded) whose estimate clears the threshold, in label order.
fn detect(n: u32, estimates: &[f64], threshold: f64) -> Vec<PauliString> {
    let mut found: Vec<PauliString> = estimates
        .iter()
        .enumerate()
        .skip(1)
        .filter(|(_, &f)| f >= threshold)
        .map(|(idx, _)| PauliString::from_index(n, idx).unwrap())
        .collect();
    found.sort();
    found
}

/// Frequencies over a candidate list -> dense table for [`detect`].
fn dense_from_list(n: u32, list: &[PauliString], values: &[f64]) -> Vec<f64> {
    let mut dense = vec![f64::NEG_INFINITY; 1 << (2 * n)];
    for (x, &v) in list.iter().zip(values.iter()) {
        dense[x.index()] = v;
    }
    dense
}

struct StageOutcome {
    detected: Vec<PauliString>,
    clamped: bool,
}

fn stage_one(
    oracle: &mut EvolutionOracle,
    t: f64,
    threshold: f64,
    eps_infty: f64,
    delta: f64,
    candidates: Option<Vec<PauliString>>,
    memory: bool,
) -> Result<StageOutcome> {
    let n = oracle.n();
    if memory {
        let (shots, clamped) = oracle
            .config()
            .sample_budget((2.0 / delta).ln() / (eps_infty * eps_infty));
        let freqs: Vec<f64> = match oracle.mode() {
            OracleMode::Exact => {
                oracle.charge(shots, t);
                oracle.spectrum(t)?.spectrum.probs().to_vec()
            }
            OracleMode::Shots => {
                let counts = oracle.bell_counts(t, shots)?;
                counts.iter().map(|&c| c as f64 / shots as f64).collect()
            }
        };
        Ok(StageOutcome {
            detected: detect(n, &freqs, threshold),
            clamped,
        })
    } else {
        let list = candidates.unwrap_or_else(|| crate::pauli::all_strings(n).collect());
        let (ests, clamped) = oracle.memoryless_pauli_sampling(t, &list, eps_infty, delta)?;
        let dense = dense_from_list(n, &list, &ests);
        Ok(StageOutcome {
            detected: detect(n, &dense, threshold),
            clamped,
        })
    }
}

fn stage_two(
    oracle: &mut EvolutionOracle,
    t: f64,
    detected: &[PauliString],
    coeff_eps: f64,
    delta: f64,
    memory: bool,
) -> Result<(Hamiltonian, bool)> {
    let mut h = Hamiltonian::zero(oracle.n());
    let mut clamped = false;
    let per_coeff_delta = delta / detected.len().max(1) as f64;
    for x in detected {
        let lambda = if memory {
            let (est, cl) = oracle.estimate_coefficient(t, x, coeff_eps * t, per_coeff_delta)?;
            clamped |= cl;
            // Re(i z / t) = -Im(z) / t keeps the output self-adjoint
            -est.im / t
        } else {
            let (est, cl) = oracle.memoryless_estimate_coefficient(x, coeff_eps, per_coeff_delta)?;
            clamped |= cl;
            est
        };
        h.add_term(*x, lambda)?;
    }
    Ok((h, clamped))
}

/// Learn a k-local Hamiltonian to 2-norm error eps. The evolution time
/// t = eps^{k+1} C^{-k(k+1)/2} comes from the Bohnenblust-Hille bound on
/// the tail mass of undetected coefficients; the detection threshold is
/// gamma = t^2 on frequencies and coefficients are estimated to t^3 eps.
pub fn learn_local(
    oracle: &mut EvolutionOracle,
    k: u32,
    eps: f64,
    delta: f64,
    memory: bool,
) -> Result<LearnReport> {
    check_eps_delta(eps, delta)?;
    let n = oracle.n();
    if k == 0 || k > n {
        return Err(Error::parameter(format!("k = {k} out of range 1..={n}")));
    }
    let c_bh = oracle.config().bh_constant;
    let kf = k as f64;
    let t = eps.powi(k as i32 + 1) * c_bh.powf(-kf * (kf + 1.0) / 2.0);
    let gamma = t * t;
    let beta = t.powi(3) * eps;
    let candidates: Vec<PauliString> = crate::pauli::all_strings(n)
        .filter(|x| x.weight() >= 1 && x.weight() <= k)
        .collect();
    let stage1 = stage_one(
        oracle,
        t,
        gamma * gamma, // frequency threshold: |alpha_x| > gamma
        gamma * gamma, // ell_infty target gamma^2 on |Uhat|^2
        delta / 2.0,
        if memory { None } else { Some(candidates) },
        memory,
    )?;
    let (h, clamped2) = stage_two(oracle, t, &stage1.detected, beta / t, delta / 2.0, memory)?;
    Ok(LearnReport {
        hamiltonian: h,
        target_error: eps,
        achieved_error: None,
        detected: stage1.detected,
        ledger: oracle.ledger(),
        seed: oracle.seed(),
        budget_clamped: stage1.clamped || clamped2,
        strategy: LearnStrategy::Local,
    })
}

/// Learn an s-sparse Hamiltonian to 2-norm error O(eps): Bell-sample
/// U(c_t eps / sqrt(s)), keep frequencies >= 2 eps^4 / s^2, estimate those
/// coefficients to t eps / sqrt(s).
pub fn learn_sparse(
    oracle: &mut EvolutionOracle,
    s: usize,
    eps: f64,
    delta: f64,
    memory: bool,
) -> Result<LearnReport> {
    check_eps_delta(eps, delta)?;
    if s == 0 {
        return Err(Error::parameter("sparsity s must be positive"));
    }
    let sf = s as f64;
    let t = oracle.config().sparse_learner_time_c * eps / sf.sqrt();
    let threshold = 2.0 * eps.powi(4) / (sf * sf);
    let stage1 = {
        let eps_infty = eps.powi(4) / (sf * sf);
        if memory {
            // T = O(s^4 / eps^8 log(1/delta)) Bell samples
            let (shots, clamped) = oracle
                .config()
                .sample_budget(sf.powi(4) / eps.powi(8) * (4.0 / delta).ln());
            let n = oracle.n();
            let freqs: Vec<f64> = match oracle.mode() {
                OracleMode::Exact => {
                    oracle.charge(shots, t);
                    oracle.spectrum(t)?.spectrum.probs().to_vec()
                }
                OracleMode::Shots => {
                    let counts = oracle.bell_counts(t, shots)?;
                    counts.iter().map(|&c| c as f64 / shots as f64).collect()
                }
            };
            StageOutcome {
                detected: detect(n, &freqs, threshold),
                clamped,
            }
        } else {
            stage_one(oracle, t, threshold, eps_infty, delta / 2.0, None, false)?
        }
    };
    let (h, clamped2) = stage_two(
        oracle,
        t,
        &stage1.detected,
        eps / sf.sqrt(),
        delta / 2.0,
        memory,
    )?;
    Ok(LearnReport {
        hamiltonian: h,
        target_error: eps,
        achieved_error: None,
        detected: stage1.detected,
        ledger: oracle.ledger(),
        seed: oracle.seed(),
        budget_clamped: stage1.clamped || clamped2,
        strategy: LearnStrategy::Sparse,
    })
}

/// Nominal stage-1 + stage-2 query counts of each learner, used to dispatch
/// targets that are both k-local and s-sparse.
pub fn learner_budgets(k: u32, s: usize, eps: f64, c_bh: f64) -> (f64, f64) {
    let kf = k as f64;
    let t = eps.powi(k as i32 + 1) * c_bh.powf(-kf * (kf + 1.0) / 2.0);
    let gamma = t * t;
    let beta = t.powi(3) * eps;
    let local = gamma.powi(-4) + 1.0 / (gamma * gamma * beta * beta);
    let sf = s as f64;
    let ts = eps / (2.0 * sf.sqrt());
    let beta_s = ts * eps / sf.sqrt();
    let sparse = sf.powi(4) / eps.powi(8) + sf / (beta_s * beta_s);
    (local, sparse)
}

/// Learn a target promised both k-local and s-sparse by running whichever
/// learner has the smaller nominal budget.
pub fn learn_local_sparse(
    oracle: &mut EvolutionOracle,
    k: u32,
    s: usize,
    eps: f64,
    delta: f64,
    memory: bool,
) -> Result<LearnReport> {
    let (local, sparse) = learner_budgets(k, s, eps, oracle.config().bh_constant);
    if local <= sparse {
        learn_local(oracle, k, eps, delta, memory)
    } else {
        learn_sparse(oracle, s, eps, delta, memory)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::Config;
    use crate::hamiltonian::frobenius_distance;
    use crate::report::LearnStrategy;

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
    fn local_learner_exact_recovers() {
        let c = cfg();
        let target = ham(3, &[("ZII", 0.7), ("IXI", 0.3)]);
        let mut oracle = EvolutionOracle::new(target.clone(), 0, OracleMode::Exact, &c).unwrap();
        let report = learn_local(&mut oracle, 1, 0.1, 0.1, true).unwrap();
        let err = frobenius_distance(&target, &report.hamiltonian).unwrap();
        assert!(err <= 0.1, "err = {err}");
        assert_eq!(report.detected, vec![p("IXI"), p("ZII")]);
    }

    #[test]
    fn local_learner_shot_mode_recovers() {
        let c = cfg();
        let target = ham(3, &[("ZII", 0.7), ("IXI", 0.3)]);
        let mut good = 0;
        let trials = 20;
        for seed in 0..trials {
            let mut oracle =
                EvolutionOracle::new(target.clone(), seed, OracleMode::Shots, &c).unwrap();
            let report = learn_local(&mut oracle, 1, 0.1, 0.1, true).unwrap();
            let err = frobenius_distance(&target, &report.hamiltonian).unwrap();
            if err <= 0.1 {
                good += 1;
            }
        }
        assert!(good >= trials - 1, "good = {good}/{trials}");
    }

    #[test]
    fn zero_hamiltonian_learns_zero() {
        let c = cfg();
        let mut oracle =
            EvolutionOracle::new(Hamiltonian::zero(2), 0, OracleMode::Exact, &c).unwrap();
        let report = learn_local(&mut oracle, 1, 0.1, 0.1, true).unwrap();
        assert_eq!(report.hamiltonian.support_size(), 0);
        assert!(report.detected.is_empty());
    }

    #[test]
    fn sparse_learner_exact_recovers_and_contains_support() {
        let c = cfg();
        let target = ham(3, &[("ZII", 0.5), ("IXX", 0.5)]);
        let mut oracle = EvolutionOracle::new(target.clone(), 0, OracleMode::Exact, &c).unwrap();
        let report = learn_sparse(&mut oracle, 2, 0.1, 0.1, true).unwrap();
        let err = frobenius_distance(&target, &report.hamiltonian).unwrap();
        assert!(err <= 0.2, "err = {err}");
        // detected set contained in the true support
        for x in &report.detected {
            assert!(target.coefficient(x) != 0.0, "spurious {x}");
        }
    }

    #[test]
    fn sparse_learner_missed_coefficients_are_small() {
        // every x outside the detected set has |lambda_x| <= 4 eps / sqrt(s)
        let c = cfg();
        let eps = 0.15;
        let target = ham(3, &[("ZII", 0.6), ("IXX", 0.4), ("YYZ", 0.05)]);
        let norm = target.operator_norm(12).unwrap();
        let target = target.scale(1.0 / norm.max(1.0));
        let mut oracle = EvolutionOracle::new(target.clone(), 0, OracleMode::Exact, &c).unwrap();
        let report = learn_sparse(&mut oracle, 3, eps, 0.1, true).unwrap();
        let bound = 4.0 * eps / (3f64).sqrt();
        for (x, lam) in target.terms() {
            if !report.detected.contains(x) {
                assert!(lam.abs() <= bound, "{x} missed with lambda = {lam}");
            }
        }
    }

    #[test]
    fn memoryless_variants_match_exact_mode_and_are_deterministic() {
        let c = cfg();
        let target = ham(3, &[("ZII", 0.7), ("IXI", 0.3)]);
        let run = |seed: u64, memory: bool| {
            let mut oracle =
                EvolutionOracle::new(target.clone(), seed, OracleMode::Exact, &c).unwrap();
            learn_local(&mut oracle, 1, 0.1, 0.1, memory).unwrap()
        };
        // exact mode consumes no randomness: different seeds, identical bits
        let a = run(1, false);
        let b = run(999, false);
        assert_eq!(a.hamiltonian, b.hamiltonian);
        assert_eq!(a.detected, b.detected);
        // the memory-less detection agrees with the with-memory one
        let m = run(1, true);
        assert_eq!(a.detected, m.detected);
        // both estimates land within the target error of the truth
        let err = frobenius_distance(&target, &a.hamiltonian).unwrap();
        assert!(err <= 0.1, "memoryless exact err = {err}");
    }

    #[test]
    fn dispatch_picks_the_cheap_branch() {
        // huge sparsity: the local budget wins
        let (local, sparse) = learner_budgets(1, 1 << 20, 0.2, 2.0);
        assert!(local < sparse);
        // k = n with tiny sparsity: the sparse budget wins
        let (local, sparse) = learner_budgets(5, 2, 0.2, 2.0);
        assert!(sparse < local);
        let c = cfg();
        let target = ham(4, &[("ZIII", 0.5), ("IXII", 0.5)]);
        let mut oracle = EvolutionOracle::new(target.clone(), 0, OracleMode::Exact, &c).unwrap();
        let report = learn_local_sparse(&mut oracle, 4, 2, 0.15, 0.1, true).unwrap();
        assert_eq!(report.strategy, LearnStrategy::Sparse);
        let err = frobenius_distance(&target, &report.hamiltonian).unwrap();
        assert!(err <= 0.3, "err = {err}");
    }

    #[test]
    fn output_is_traceless_and_real() {
        let c = cfg();
        let target = ham(2, &[("ZI", 0.6), ("XX", 0.4)]);
        let mut oracle = EvolutionOracle::new(target, 3, OracleMode::Shots, &c).unwrap();
        let report = learn_sparse(&mut oracle, 2, 0.15, 0.1, true).unwrap();
        assert!(report.hamiltonian.is_traceless());
        for (_, lam) in report.hamiltonian.terms() {
            assert!(lam.is_finite());
        }
    }

    #[test]
    fn detection_monotone_in_exact_mode() {
        // enlarging the stage-1 budget cannot shrink the detected set when
        // the estimates are exact (they do not depend on the budget)
        let c = cfg();
        let target = ham(3, &[("ZII", 0.7), ("IXI", 0.3)]);
        let mut small = EvolutionOracle::new(target.clone(), 0, OracleMode::Exact, &c).unwrap();
        let r1 = learn_local(&mut small, 1, 0.1, 0.1, true).unwrap();
        let mut big_cfg = cfg();
        big_cfg.shot_cap = u64::MAX / 2;
        let mut big = EvolutionOracle::new(target, 0, OracleMode::Exact, &big_cfg).unwrap();
        let r2 = learn_local(&mut big, 1, 0.1, 0.1, true).unwrap();
        for x in &r1.detected {
            assert!(r2.detected.contains(x));
        }
    }

    #[test]
    fn rejects_bad_parameters() {
        let c = cfg();
        let mut oracle =
            EvolutionOracle::new(Hamiltonian::zero(2), 0, OracleMode::Exact, &c).unwrap();
        assert!(learn_local(&mut oracle, 0, 0.1, 0.1, true).is_err());
        assert!(learn_local(&mut oracle, 3, 0.1, 0.1, true).is_err());
        assert!(learn_sparse(&mut oracle, 0, 0.1, 0.1, true).is_err());
        assert!(learn_sparse(&mut oracle, 2, 0.0, 0.1, true).is_err());
    }
}
