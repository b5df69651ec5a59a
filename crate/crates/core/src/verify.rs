//! Named verification suites driving the structural identities at fixed
//! small n: exhaustive or Monte-Carlo checks of the Taylor remainder, the
//! locality/sparsity dichotomies, the MUB identities, the hashing
//! propositions, bucket-energy consistency, the twirl bridge, and the
//! sparse-channel dichotomy. The acceptance tests and the CLI both run
//! these with their own instance counts.

use crate::channel::{generate_channel_instance, twirled_channel_from_evolution, PauliChannel};
use crate::config::Config;
use crate::dense;
use crate::error::{Error, Result};
use crate::evolution::{evolution_unitary, EvolutionOracle, MubSampler, OracleMode};
use crate::hamiltonian::Hamiltonian;
use crate::instances::{generate_instance, InstanceKind, InstanceParams};
use crate::mub::MubFamily;
use crate::pauli::{all_strings, PauliString};
use crate::spectrum::UnitarySpectrum;
use crate::subgroup::SymplecticSubgroup;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use std::fmt::Write as _;
use std::sync::Arc;

#[derive(Debug, Clone)]
pub struct CheckResult {
    pub label: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone)]
pub struct SuiteReport {
    pub suite: String,
    pub checks: Vec<CheckResult>,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn first_failure(&self) -> Option<&CheckResult> {
        self.checks.iter().find(|c| !c.passed)
    }

    fn push(&mut self, label: impl Into<String>, passed: bool, detail: impl Into<String>) {
        self.checks.push(CheckResult {
            label: label.into(),
            passed,
            detail: detail.into(),
        });
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    Taylor,
    LocalityDichotomy,
    SparsityDichotomy,
    MubDesign,
    HashingProps,
    BucketEnergy,
    TwirlIdentity,
    ChannelDichotomy,
}

impl Suite {
    pub const ALL: [Suite; 8] = [
        Suite::Taylor,
        Suite::LocalityDichotomy,
        Suite::SparsityDichotomy,
        Suite::MubDesign,
        Suite::HashingProps,
        Suite::BucketEnergy,
        Suite::TwirlIdentity,
        Suite::ChannelDichotomy,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Suite::Taylor => "taylor",
            Suite::LocalityDichotomy => "locality_dichotomy",
            Suite::SparsityDichotomy => "sparsity_dichotomy",
            Suite::MubDesign => "mub_design",
            Suite::HashingProps => "hashing_props",
            Suite::BucketEnergy => "bucket_energy",
            Suite::TwirlIdentity => "twirl_identity",
            Suite::ChannelDichotomy => "channel_dichotomy",
        }
    }
}

impl std::str::FromStr for Suite {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Suite::ALL
            .iter()
            .find(|suite| suite.name() == s)
            .copied()
            .ok_or_else(|| {
                Error::parameter(format!(
                    "unknown suite '{s}'; valid: {}",
                    Suite::ALL.map(|s| s.name()).join(", ")
                ))
            })
    }
}

/// Run one suite at its default scale.
pub fn run_suite(suite: Suite, cfg: &Config, seed: u64) -> Result<SuiteReport> {
    match suite {
        Suite::Taylor => check_taylor(cfg, seed, 100, &[0.5, 0.25, 0.1]),
        Suite::LocalityDichotomy => check_locality_dichotomy(cfg, seed, 50),
        Suite::SparsityDichotomy => check_sparsity_dichotomy(cfg, seed, 20, &[0.1, 0.05, 0.025]),
        Suite::MubDesign => check_mub_design(cfg, 2),
        Suite::HashingProps => check_hashing_props(cfg, seed, 10_000, 1_000),
        Suite::BucketEnergy => check_bucket_energy(cfg, seed, 3),
        Suite::TwirlIdentity => check_twirl_identity(cfg, seed, 50),
        Suite::ChannelDichotomy => check_channel_dichotomy(cfg, seed, 50),
    }
}

fn random_normalized(n: u32, params: &InstanceParams, rng: &mut ChaCha12Rng) -> Result<Hamiltonian> {
    generate_instance(InstanceKind::KLocalSSparse { k: n, s: 2 * n as usize }, n, params, rng)
}

/// First-order Taylor remainder: ||U(t) - Id + itH||_inf <= c t^2 for every
/// normalized H, plus the second-order behavior of the identity
/// coefficient, whose defect must shrink at least cubically under halving.
pub fn check_taylor(cfg: &Config, seed: u64, instances: usize, times: &[f64]) -> Result<SuiteReport> {
    let mut report = SuiteReport {
        suite: "taylor".into(),
        checks: Vec::new(),
    };
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let params = InstanceParams::default();
    let mut worst_ratio = 0.0f64;
    let mut violations = 0usize;
    for i in 0..instances {
        let n = 1 + (i % 4) as u32;
        let h = random_normalized(n, &params, &mut rng)?;
        let dim = 1usize << n;
        let hm = h.to_matrix(cfg.dense_cap)?;
        for &t in times {
            let u = evolution_unitary(&h, t, cfg.dense_cap)?;
            let lin = dense::identity(dim) - &hm * Complex64::new(0.0, t);
            let defect = dense::operator_norm(&(u - lin));
            let bound = cfg.taylor_c * t * t;
            worst_ratio = worst_ratio.max(defect / bound);
            if defect > bound {
                violations += 1;
            }
        }
    }
    report.push(
        format!("first-order remainder <= c t^2 over {instances} instances"),
        violations == 0,
        format!("violations = {violations}, worst defect/bound = {worst_ratio:.4}"),
    );
    // identity-coefficient defect |Uhat_0 - (1 - t^2/2 sum lambda^2)|
    // shrinks at least ~cubically when t halves
    let mut slope_ok = true;
    let mut detail = String::new();
    for i in 0..5usize {
        let n = 2 + (i % 3) as u32;
        let h = random_normalized(n, &params, &mut rng)?;
        let norm2 = h.two_norm().powi(2);
        let defect_at = |t: f64| -> Result<f64> {
            let u = evolution_unitary(&h, t, cfg.dense_cap)?;
            let s = UnitarySpectrum::of_matrix(&u)?;
            let u0 = s.get(&PauliString::identity(n));
            Ok((u0 - Complex64::new(1.0 - t * t / 2.0 * norm2, 0.0)).norm())
        };
        let t = 0.2;
        let (d1, d2) = (defect_at(t)?, defect_at(t / 2.0)?);
        if d2 > 1e-13 {
            let ratio = d1 / d2;
            let _ = write!(detail, "ratio {ratio:.2} ");
            if ratio < 2f64.powf(2.5) {
                slope_ok = false;
            }
        }
    }
    report.push(
        "identity coefficient is 1 - t^2/2 |lambda|^2 + O(t^3)",
        slope_ok,
        detail,
    );
    Ok(report)
}

/// Structural dichotomy for locality: with alpha = (eps2 - eps1)/(3c),
/// close instances keep ||U(alpha)_{>k}||_2 below
/// (eps2-eps1)(2 eps1 + eps2)/(9c) and far ones above
/// (eps2-eps1)(eps1 + 2 eps2)/(9c).
pub fn check_locality_dichotomy(cfg: &Config, seed: u64, per_side: usize) -> Result<SuiteReport> {
    let mut report = SuiteReport {
        suite: "locality_dichotomy".into(),
        checks: Vec::new(),
    };
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let params = InstanceParams::default();
    let grid = [(4u32, 1u32, 0.1, 0.7), (5, 2, 0.05, 0.6), (4, 1, 0.15, 0.8)];
    let c = cfg.taylor_c;
    let mut close_viol = 0usize;
    let mut far_viol = 0usize;
    let mut worst_close = 0.0f64;
    let mut worst_far = f64::INFINITY;
    for i in 0..per_side {
        let (n, k, eps1, eps2) = grid[i % grid.len()];
        let gap = eps2 - eps1;
        let alpha = gap / (3.0 * c);
        let close = generate_instance(InstanceKind::CloseToKLocal { k, eps1 }, n, &params, &mut rng)?;
        let u = evolution_unitary(&close, alpha, cfg.dense_cap)?;
        let off = UnitarySpectrum::of_matrix(&u)?.mass_above_weight(k).sqrt();
        let bound = gap * (2.0 * eps1 + eps2) / (9.0 * c);
        worst_close = worst_close.max(off / bound);
        if off > bound {
            close_viol += 1;
        }
        let far = generate_instance(InstanceKind::FarFromKLocal { k, eps2 }, n, &params, &mut rng)?;
        let u = evolution_unitary(&far, alpha, cfg.dense_cap)?;
        let off = UnitarySpectrum::of_matrix(&u)?.mass_above_weight(k).sqrt();
        let bound = gap * (eps1 + 2.0 * eps2) / (9.0 * c);
        worst_far = worst_far.min(off / bound);
        if off < bound {
            far_viol += 1;
        }
    }
    report.push(
        format!("close bound over {per_side} planted instances"),
        close_viol == 0,
        format!("violations = {close_viol}, worst off/bound = {worst_close:.4}"),
    );
    report.push(
        format!("far bound over {per_side} planted instances"),
        far_viol == 0,
        format!("violations = {far_viol}, worst off/bound = {worst_far:.4}"),
    );
    Ok(report)
}

/// TopEnergy gap between eps1-close and eps2-far ensembles scales as t^2
/// (with a t^3 correction) over the given times: log-log slope within 15%.
pub fn check_sparsity_dichotomy(
    cfg: &Config,
    seed: u64,
    per_side: usize,
    times: &[f64],
) -> Result<SuiteReport> {
    let mut report = SuiteReport {
        suite: "sparsity_dichotomy".into(),
        checks: Vec::new(),
    };
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let params = InstanceParams::default();
    let (n, s, eps2) = (4u32, 2usize, 0.8);
    let close: Vec<Hamiltonian> = (0..per_side)
        .map(|_| generate_instance(InstanceKind::CloseToSSparse { s, eps1: 0.0 }, n, &params, &mut rng))
        .collect::<Result<_>>()?;
    let far: Vec<Hamiltonian> = (0..per_side)
        .map(|_| generate_instance(InstanceKind::FarFromSSparse { s, eps2 }, n, &params, &mut rng))
        .collect::<Result<_>>()?;
    let mut gaps = Vec::with_capacity(times.len());
    for &t in times {
        let mean = |hs: &[Hamiltonian]| -> Result<f64> {
            let mut acc = 0.0;
            for h in hs {
                let u = evolution_unitary(h, t, cfg.dense_cap)?;
                let spec = UnitarySpectrum::of_matrix(&u)?;
                acc += crate::testers::top_energy(&spec, t, s).value;
            }
            Ok(acc / hs.len() as f64)
        };
        let gap = mean(&close)? - mean(&far)?;
        if gap <= 0.0 {
            report.push("ensemble gap positive", false, format!("gap = {gap} at t = {t}"));
            return Ok(report);
        }
        gaps.push((t.ln(), gap.ln()));
    }
    // least-squares slope of ln(gap) against ln(t)
    let m = gaps.len() as f64;
    let sx: f64 = gaps.iter().map(|(x, _)| x).sum();
    let sy: f64 = gaps.iter().map(|(_, y)| y).sum();
    let sxx: f64 = gaps.iter().map(|(x, _)| x * x).sum();
    let sxy: f64 = gaps.iter().map(|(x, y)| x * y).sum();
    let slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
    report.push(
        format!("gap slope within 15% of quadratic over t = {times:?}"),
        (slope - 2.0).abs() <= 0.3,
        format!("slope = {slope:.4}"),
    );
    Ok(report)
}

/// The 2-design identity sum |phi><phi|^{x2} = Id + F entrywise, and the
/// memory-less sampling expectation identity by full enumeration.
pub fn check_mub_design(cfg: &Config, max_n: u32) -> Result<SuiteReport> {
    let mut report = SuiteReport {
        suite: "mub_design".into(),
        checks: Vec::new(),
    };
    for n in 1..=max_n {
        let fam = MubFamily::new(n, cfg.dense_cap)?;
        let dim = 1usize << n;
        let mut acc = dense::CMatrix::zeros(dim * dim, dim * dim);
        for i in 0..fam.num_bases() {
            for j in 0..dim {
                let v = fam.state(i, j)?;
                let proj = &v * v.adjoint();
                acc += proj.kronecker(&proj);
            }
        }
        let expect = dense::identity(dim * dim) + dense::swap_operator(dim);
        let max_entry = (&acc - &expect)
            .iter()
            .map(|c| c.norm())
            .fold(0.0, f64::max);
        report.push(
            format!("2-design identity at n = {n}"),
            max_entry < 1e-10,
            format!("max entry defect = {max_entry:.2e}"),
        );
    }
    // expectation identity E[|alpha_x|^2] = 1/(N+1) + N |Uhat_x|^2/(N+1)
    let mut rng = ChaCha12Rng::seed_from_u64(12);
    let params = InstanceParams::default();
    for n in 1..=max_n.min(2) {
        let fam = Arc::new(MubFamily::new(n, cfg.dense_cap)?);
        let h = random_normalized(n, &params, &mut rng)?;
        let t = 0.8;
        let u = evolution_unitary(&h, t, cfg.dense_cap)?;
        let spec = UnitarySpectrum::of_matrix(&u)?;
        let sampler = MubSampler::new(fam.clone(), &u)?;
        let nf = fam.basis_size() as f64;
        let mut worst = 0.0f64;
        for x in all_strings(n) {
            let hit = sampler.exact_hit_probability(&x)?;
            let expect = 1.0 / (nf + 1.0) + nf / (nf + 1.0) * spec.prob(&x);
            worst = worst.max((hit - expect).abs());
        }
        report.push(
            format!("memory-less sampling expectation identity at n = {n}"),
            worst < 1e-9,
            format!("max defect = {worst:.2e}"),
        );
    }
    Ok(report)
}

/// Hashing proposition frequencies over random subgroup draws, and the
/// collision-error mean bound sqrt(2s / 2^t).
pub fn check_hashing_props(
    cfg: &Config,
    seed: u64,
    draws: usize,
    collision_draws: usize,
) -> Result<SuiteReport> {
    let _ = cfg;
    let mut report = SuiteReport {
        suite: "hashing_props".into(),
        checks: Vec::new(),
    };
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let (n, t) = (4u32, 3u32);
    let alpha: PauliString = "XZIY".parse().unwrap();
    let alpha2: PauliString = "IYXI".parse().unwrap();
    let target_bucket = 0b011u32;
    let mut hit_b = 0usize;
    let mut collide = 0usize;
    let mut joint_b = 0usize;
    let mut hit2_b = 0usize;
    for _ in 0..draws {
        let sub = SymplecticSubgroup::random(n, t, &mut rng)?;
        let b1 = sub.bucket_index(&alpha)?;
        let b2 = sub.bucket_index(&alpha2)?;
        if b1 == target_bucket {
            hit_b += 1;
        }
        if b2 == target_bucket {
            hit2_b += 1;
        }
        if b1 == b2 {
            collide += 1;
        }
        if b1 == target_bucket && b2 == target_bucket {
            joint_b += 1;
        }
    }
    let df = draws as f64;
    let p_single = 2f64.powi(-(t as i32));
    let sigma_single = (p_single * (1.0 - p_single) / df).sqrt();
    let freq = hit_b as f64 / df;
    report.push(
        "P[alpha in C(b)] = 2^-t within 3 sigma",
        (freq - p_single).abs() <= 3.0 * sigma_single,
        format!("freq = {freq:.5}, expected {p_single:.5} +- {:.5}", 3.0 * sigma_single),
    );
    let freq_c = collide as f64 / df;
    report.push(
        "collision probability 2^-t within 3 sigma",
        (freq_c - p_single).abs() <= 3.0 * sigma_single,
        format!("freq = {freq_c:.5}"),
    );
    let p_joint = p_single * p_single;
    let sigma_joint = (p_joint * (1.0 - p_joint) / df).sqrt();
    let freq_joint = joint_b as f64 / df;
    let freq_prod = (hit_b as f64 / df) * (hit2_b as f64 / df);
    report.push(
        "pairwise independence: joint frequency factorizes",
        (freq_joint - p_joint).abs() <= 3.0 * sigma_joint
            && (freq_joint - freq_prod).abs() <= 4.0 * sigma_joint,
        format!("joint = {freq_joint:.6}, product = {freq_prod:.6}, expected {p_joint:.6}"),
    );
    // collision-error mean bound on a fixed channel
    let (cn, s) = (3u32, 2usize);
    let channel = generate_channel_instance(cn, s, 0.3, &mut rng)?;
    for td in [3u32, 4] {
        let mut total = 0.0;
        for _ in 0..collision_draws {
            let sub = SymplecticSubgroup::random(cn, td, &mut rng)?;
            let diag = crate::hashing::hashing_diagnostics(&channel, &sub, s)?;
            let collision_sum: f64 = diag.collision_errors.iter().take(s).sum();
            total += collision_sum;
        }
        let mean = total / collision_draws as f64;
        let bound = (2.0 * s as f64 / 2f64.powi(td as i32)).sqrt();
        report.push(
            format!("collision-error mean bound at t = {td}"),
            mean <= bound,
            format!("mean = {mean:.4}, bound = {bound:.4}"),
        );
    }
    Ok(report)
}

/// Coset-sum vs fidelity-sum bucket energies agree to 1e-9 for random
/// channels and every subgroup dimension, n <= max_n.
pub fn check_bucket_energy(cfg: &Config, seed: u64, max_n: u32) -> Result<SuiteReport> {
    let _ = cfg;
    let mut report = SuiteReport {
        suite: "bucket_energy".into(),
        checks: Vec::new(),
    };
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    for n in 1..=max_n {
        let mut worst = 0.0f64;
        let mut sum_defect = 0.0f64;
        let channel = generate_channel_instance(n, 2, 0.35, &mut rng)?;
        for t in 0..=(2 * n) {
            for _ in 0..3 {
                let sub = SymplecticSubgroup::random(n, t, &mut rng)?;
                let direct = crate::hashing::bucket_energies_exact(&channel, &sub)?;
                let fid = crate::hashing::bucket_energies_fidelity_form(&channel, &sub)?;
                for (a, b) in direct.energies.iter().zip(fid.iter()) {
                    worst = worst.max((a - b).abs());
                }
                sum_defect = sum_defect.max((direct.energies.iter().sum::<f64>() - 1.0).abs());
            }
        }
        report.push(
            format!("coset sum equals fidelity sum at n = {n}"),
            worst < 1e-9,
            format!("max defect = {worst:.2e}"),
        );
        report.push(
            format!("bucket energies partition the simplex at n = {n}"),
            sum_defect < 1e-9,
            format!("max sum defect = {sum_defect:.2e}"),
        );
    }
    Ok(report)
}

/// Twirl bridge: twirled rates equal |Uhat_x(t)|^2, and the memory-less
/// sparsity tester's exact-mode statistic equals the with-memory TopEnergy
/// at the same evolution time.
pub fn check_twirl_identity(cfg: &Config, seed: u64, instances: usize) -> Result<SuiteReport> {
    let mut report = SuiteReport {
        suite: "twirl_identity".into(),
        checks: Vec::new(),
    };
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let params = InstanceParams::default();
    let mut worst_rate = 0.0f64;
    let mut worst_gamma = 0.0f64;
    let (s, eps1, eps2) = (2usize, 0.15, 0.8);
    for i in 0..instances {
        let n = 3 + (i % 2) as u32;
        let h = random_normalized(n, &params, &mut rng)?;
        let t: f64 = rng.random_range(0.2..1.0);
        let twirled = twirled_channel_from_evolution(&h, t, cfg)?;
        let u = evolution_unitary(&h, t, cfg.dense_cap)?;
        let spec = UnitarySpectrum::of_matrix(&u)?;
        for x in all_strings(n) {
            worst_rate = worst_rate.max((twirled.rate(&x) - spec.prob(&x)).abs());
        }
        // exact-mode memory-less Gamma vs with-memory TopEnergy at the
        // tester's own evolution time
        let mut oracle = EvolutionOracle::new(h.clone(), seed ^ i as u64, OracleMode::Exact, cfg)?;
        let d = crate::hashing::test_hamiltonian_sparsity_memoryless(
            &mut oracle,
            s,
            eps1,
            eps2,
            &mut rng,
        )?;
        let t_evol = cfg.sparsity_time_c * (eps2 * eps2 - eps1 * eps1) / s as f64;
        let u = evolution_unitary(&h, t_evol, cfg.dense_cap)?;
        let top = crate::testers::top_energy(&UnitarySpectrum::of_matrix(&u)?, t_evol, s);
        worst_gamma = worst_gamma.max((d.gamma - top.value).abs());
    }
    report.push(
        format!("twirled rates equal |Uhat_x|^2 over {instances} instances"),
        worst_rate < 1e-9,
        format!("max defect = {worst_rate:.2e}"),
    );
    report.push(
        "memory-less exact Gamma equals TopEnergy",
        worst_gamma < 1e-9,
        format!("max defect = {worst_gamma:.2e}"),
    );
    Ok(report)
}

/// Sparse-channel dichotomy: dist <= eps1 implies Energy >= 1 - 2 eps1 and
/// dist >= eps2 implies Energy <= 1 - eps2, plus optimality of the
/// renormalized top-s channel.
pub fn check_channel_dichotomy(cfg: &Config, seed: u64, instances: usize) -> Result<SuiteReport> {
    let _ = cfg;
    let mut report = SuiteReport {
        suite: "channel_dichotomy".into(),
        checks: Vec::new(),
    };
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut ok = true;
    let mut detail = String::new();
    for i in 0..instances {
        let n = 2 + (i % 2) as u32;
        let total = 1usize << (2 * n);
        let mut weights: Vec<f64> = (0..total).map(|_| rng.random_range(0.0f64..1.0)).collect();
        let sum: f64 = weights.iter().sum();
        for w in weights.iter_mut() {
            *w /= sum;
        }
        let ch = PauliChannel::new(
            n,
            weights
                .iter()
                .enumerate()
                .map(|(idx, &w)| (PauliString::from_index(n, idx).unwrap(), w)),
        )?;
        for s in 1..=4usize {
            let dist = ch.distance_to_sparse(s);
            let energy = ch.energy(s);
            if energy < 1.0 - 2.0 * dist - 1e-12 || energy > 1.0 - dist + 1e-12 {
                ok = false;
                let _ = write!(detail, "violation at instance {i}, s = {s}; ");
            }
            // the renormalized top-s channel achieves exactly 1 - Energy
            let sorted = ch.sorted_rates();
            let top: Vec<(PauliString, f64)> = sorted
                .iter()
                .take(s)
                .map(|(x, p)| (*x, p / energy))
                .collect();
            let candidate = PauliChannel::new(n, top)?;
            let d = crate::channel::channel_distance(&ch, &candidate)?;
            if (d - (1.0 - energy)).abs() > 1e-9 {
                ok = false;
                let _ = write!(detail, "minimizer off at instance {i}, s = {s}; ");
            }
        }
    }
    report.push(
        format!("dichotomy and minimizer over {instances} random channels"),
        ok,
        if detail.is_empty() { "all held".into() } else { detail },
    );
    Ok(report)
}
