//! Reproducible experiment runner: builds promise instances per seed, runs
//! the chosen protocol across a seed grid on a worker pool, verifies each
//! run against the exact oracles, and emits a frozen-schema CSV plus a JSON
//! summary. Re-running a config byte-reproduces the CSV; timestamps live
//! only in the summary.

use anyhow::{bail, Context};
use hamprobe_core::channel::{generate_channel_instance, ChannelOracle, PauliChannel};
use hamprobe_core::config::Config;
use hamprobe_core::evolution::{evolution_unitary, EvolutionOracle, OracleMode, UnitaryOracle};
use hamprobe_core::hamiltonian::{frobenius_distance, Hamiltonian};
use hamprobe_core::instances::{generate_instance, InstanceKind, InstanceParams};
use hamprobe_core::pauli::PauliString;
use hamprobe_core::report::Verdict;
use hamprobe_core::{hashing, learners, testers};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Protocol {
    TestLocality,
    TestSupport,
    TestSparsity,
    TestJunta,
    TestChannelSparsity,
    TestHamSparsityNomem,
    LearnLocal,
    LearnSparse,
    LearnLocalSparse,
}

impl Protocol {
    pub fn is_learner(&self) -> bool {
        matches!(
            self,
            Protocol::LearnLocal | Protocol::LearnSparse | Protocol::LearnLocalSparse
        )
    }
}

/// Which instance each seed gets: alternate close/far (promise grid), all
/// close, all far, or a fixed target loaded from a file.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum InstancePolicy {
    #[default]
    Promise,
    Close,
    Far,
    FromFile,
}

/// Fully determines a run; serialized alongside every result.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub protocol: Protocol,
    pub n: u32,
    #[serde(default)]
    pub k: Option<u32>,
    #[serde(default)]
    pub s: Option<usize>,
    #[serde(default)]
    pub eps: Option<f64>,
    #[serde(default)]
    pub eps1: Option<f64>,
    #[serde(default)]
    pub eps2: Option<f64>,
    #[serde(default = "default_delta")]
    pub delta: f64,
    #[serde(default = "default_true")]
    pub memory: bool,
    pub mode: OracleMode,
    #[serde(default)]
    pub seed_start: u64,
    #[serde(default = "default_trials")]
    pub trials: u64,
    #[serde(default)]
    pub instance: InstancePolicy,
    #[serde(default)]
    pub hamiltonian_file: Option<String>,
    #[serde(default)]
    pub channel_file: Option<String>,
    /// Comma-separated Pauli labels per support (test-support only).
    #[serde(default)]
    pub supports: Vec<String>,
    /// Weight-cap supports, one mask per entry (test-support only).
    #[serde(default)]
    pub support_weights: Vec<u32>,
    #[serde(default)]
    pub out: Option<String>,
    #[serde(default)]
    pub constants: Config,
    #[serde(default)]
    pub instance_params: InstanceParamsConfig,
}

fn default_delta() -> f64 {
    0.1
}
fn default_true() -> bool {
    true
}
fn default_trials() -> u64 {
    1
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct InstanceParamsConfig {
    pub coeff_min: f64,
    pub coeff_max: f64,
    #[serde(default)]
    pub terms: Option<usize>,
}

impl Default for InstanceParamsConfig {
    fn default() -> Self {
        let p = InstanceParams::default();
        InstanceParamsConfig {
            coeff_min: p.coeff_min,
            coeff_max: p.coeff_max,
            terms: None,
        }
    }
}

impl ExperimentConfig {
    pub fn default_toml() -> String {
        let cfg = ExperimentConfig {
            protocol: Protocol::TestLocality,
            n: 4,
            k: Some(1),
            s: Some(2),
            eps: Some(0.15),
            eps1: Some(0.05),
            eps2: Some(0.6),
            delta: 0.1,
            memory: true,
            mode: OracleMode::Shots,
            seed_start: 0,
            trials: 200,
            instance: InstancePolicy::Promise,
            hamiltonian_file: None,
            channel_file: None,
            supports: Vec::new(),
            support_weights: Vec::new(),
            out: None,
            constants: Config::default(),
            instance_params: InstanceParamsConfig::default(),
        };
        toml::to_string_pretty(&cfg).expect("serializable defaults")
    }

    fn params(&self) -> InstanceParams {
        InstanceParams {
            coeff_min: self.instance_params.coeff_min,
            coeff_max: self.instance_params.coeff_max,
            terms: self.instance_params.terms,
            dense_cap: self.constants.dense_cap,
        }
    }
}

/// One row of the frozen CSV schema.
#[derive(Debug, Clone, Serialize)]
pub struct Row {
    pub seed: u64,
    /// Verdict name for testers, achieved exact error for learners.
    pub verdict_or_err: String,
    /// Decision statistic for testers, empty for learners.
    pub gamma: Option<f64>,
    /// Exact ground-truth distance of the instance (testers) or achieved
    /// error (learners).
    pub exact_distance: Option<f64>,
    pub queries: u64,
    pub evolution_time: f64,
    pub clamped: bool,
    /// Whether the run counted as a success for the aggregate (present only
    /// when a ground-truth label exists).
    pub success: Option<bool>,
}

pub const CSV_HEADER: &str =
    "seed,verdict_or_err,gamma,exact_distance,queries,evolution_time,clamped_flag";

impl Row {
    pub fn to_csv(&self) -> String {
        let fmt_opt = |v: Option<f64>| v.map(|x| format!("{x}")).unwrap_or_default();
        format!(
            "{},{},{},{},{},{},{}",
            self.seed,
            self.verdict_or_err,
            fmt_opt(self.gamma),
            fmt_opt(self.exact_distance),
            self.queries,
            self.evolution_time,
            self.clamped
        )
    }
}

#[derive(Debug, Serialize)]
pub struct ExperimentReport {
    pub config: ExperimentConfig,
    pub trials: u64,
    pub successes: u64,
    pub labeled: u64,
    pub success_rate: Option<f64>,
    pub mean_queries: f64,
    pub mean_evolution_time: f64,
    pub timestamp_unix: u64,
    #[serde(skip)]
    pub rows: Vec<Row>,
}

fn require(opt: Option<f64>, name: &str) -> anyhow::Result<f64> {
    opt.with_context(|| format!("missing required parameter --{name}"))
}

/// Hidden Hamiltonian for one seed under the configured policy, plus its
/// close/far ground-truth label when one exists.
fn hamiltonian_for_seed(
    cfg: &ExperimentConfig,
    fixed: Option<&Hamiltonian>,
    seed: u64,
) -> anyhow::Result<(Hamiltonian, Option<bool>)> {
    let params = cfg.params();
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let close = match cfg.instance {
        InstancePolicy::Promise => seed % 2 == 0,
        InstancePolicy::Close => true,
        InstancePolicy::Far => false,
        InstancePolicy::FromFile => {
            let h = fixed.context("instance = from_file needs --hamiltonian")?;
            return Ok((h.clone(), label_from_distances(cfg, h)));
        }
    };
    let h = match cfg.protocol {
        Protocol::TestLocality | Protocol::TestSupport | Protocol::TestJunta => {
            let k = cfg.k.context("missing --k")?;
            if close {
                generate_instance(InstanceKind::KLocal { k }, cfg.n, &params, &mut rng)?
            } else {
                let eps2 = require(cfg.eps2, "eps2")?;
                generate_instance(InstanceKind::FarFromKLocal { k, eps2 }, cfg.n, &params, &mut rng)?
            }
        }
        Protocol::TestSparsity | Protocol::TestHamSparsityNomem => {
            let s = cfg.s.context("missing --s")?;
            if close {
                let eps1 = require(cfg.eps1, "eps1")?;
                generate_instance(InstanceKind::CloseToSSparse { s, eps1 }, cfg.n, &params, &mut rng)?
            } else {
                let eps2 = require(cfg.eps2, "eps2")?;
                generate_instance(InstanceKind::FarFromSSparse { s, eps2 }, cfg.n, &params, &mut rng)?
            }
        }
        Protocol::LearnLocal => {
            let k = cfg.k.context("missing --k")?;
            generate_instance(InstanceKind::CloseToKLocal { k, eps1: 0.0 }, cfg.n, &params, &mut rng)?
        }
        Protocol::LearnSparse => {
            let s = cfg.s.context("missing --s")?;
            generate_instance(InstanceKind::CloseToSSparse { s, eps1: 0.0 }, cfg.n, &params, &mut rng)?
        }
        Protocol::LearnLocalSparse => {
            let k = cfg.k.context("missing --k")?;
            let s = cfg.s.context("missing --s")?;
            generate_instance(InstanceKind::KLocalSSparse { k, s }, cfg.n, &params, &mut rng)?
        }
        Protocol::TestChannelSparsity => bail!("channel protocol handled separately"),
    };
    Ok((h, Some(close)))
}

/// Ground-truth label of a fixed target from its exact structure distance.
fn label_from_distances(cfg: &ExperimentConfig, h: &Hamiltonian) -> Option<bool> {
    let (eps1, eps2) = (cfg.eps1?, cfg.eps2?);
    let d = match cfg.protocol {
        Protocol::TestLocality | Protocol::TestSupport => h.distance_to_local(cfg.k?),
        Protocol::TestSparsity | Protocol::TestHamSparsityNomem => h.distance_to_sparse(cfg.s?),
        _ => return None,
    };
    if d <= eps1 {
        Some(true)
    } else if d >= eps2 {
        Some(false)
    } else {
        None
    }
}

fn support_masks(cfg: &ExperimentConfig) -> anyhow::Result<Vec<testers::SupportMask>> {
    let mut masks = Vec::new();
    for &w in &cfg.support_weights {
        masks.push(testers::SupportMask::weight_at_most(cfg.n, w));
    }
    for spec in &cfg.supports {
        let strings: Vec<PauliString> = spec
            .split(',')
            .map(|s| s.trim().parse::<PauliString>())
            .collect::<hamprobe_core::Result<_>>()?;
        masks.push(testers::SupportMask::from_strings(cfg.n, strings.iter())?);
    }
    if masks.is_empty() {
        let k = cfg.k.context("test-support needs --support, --support-weight or --k")?;
        masks.push(testers::SupportMask::weight_at_most(cfg.n, k));
    }
    Ok(masks)
}

fn run_tester_seed(
    cfg: &ExperimentConfig,
    fixed: Option<&Hamiltonian>,
    fixed_channel: Option<&PauliChannel>,
    seed: u64,
) -> anyhow::Result<(Row, Vec<hamprobe_core::report::Decision>)> {
    let core = &cfg.constants;
    match cfg.protocol {
        Protocol::TestChannelSparsity => {
            let s = cfg.s.context("missing --s")?;
            let eps1 = require(cfg.eps1, "eps1")?;
            let eps2 = require(cfg.eps2, "eps2")?;
            let mut rng = ChaCha12Rng::seed_from_u64(seed);
            let (channel, label) = match (cfg.instance, fixed_channel) {
                (InstancePolicy::FromFile, Some(ch)) => {
                    let d = ch.distance_to_sparse(s);
                    let label = if d <= eps1 {
                        Some(true)
                    } else if d >= eps2 {
                        Some(false)
                    } else {
                        None
                    };
                    (ch.clone(), label)
                }
                _ => {
                    let close = match cfg.instance {
                        InstancePolicy::Close => true,
                        InstancePolicy::Far => false,
                        _ => seed % 2 == 0,
                    };
                    let d = if close {
                        eps1 * rng.random_range(0.2..0.8)
                    } else {
                        (eps2 + (1.0 - eps2) * rng.random_range(0.02..0.2)).min(0.95)
                    };
                    (generate_channel_instance(cfg.n, s, d, &mut rng)?, Some(close))
                }
            };
            let exact_distance = channel.distance_to_sparse(s);
            let mut oracle = ChannelOracle::new(channel, seed, cfg.mode);
            let d = hashing::test_channel_sparsity(&mut oracle, s, eps1, eps2, &mut rng)?;
            Ok((decision_row(seed, &d, exact_distance, label), vec![d]))
        }
        Protocol::TestJunta => {
            let k = cfg.k.context("missing --k")?;
            let eps1 = require(cfg.eps1, "eps1")?;
            let eps2 = require(cfg.eps2, "eps2")?;
            let (h, label) = hamiltonian_for_seed(cfg, fixed, seed)?;
            let u = evolution_unitary(&h, 1.0, core.dense_cap)?;
            let mut oracle = UnitaryOracle::from_unitary(u, seed, cfg.mode, core)?;
            let d = testers::test_junta(&mut oracle, k, eps1, eps2, cfg.memory)?;
            // junta ground truth: a k-local instance acting on at most k
            // qubits is a k-junta; far instances are labeled by the planted
            // locality distance, counted only when the off-support weight
            // certificate holds
            let junta_label = label.filter(|_| {
                let support = h
                    .support()
                    .fold(0u64, |acc, x| acc | x.support_mask());
                if label == Some(true) {
                    support.count_ones() <= k
                } else {
                    true
                }
            });
            Ok((decision_row(seed, &d, h.distance_to_local(k), junta_label), vec![d]))
        }
        Protocol::TestLocality => {
            let k = cfg.k.context("missing --k")?;
            let eps1 = require(cfg.eps1, "eps1")?;
            let eps2 = require(cfg.eps2, "eps2")?;
            let (h, label) = hamiltonian_for_seed(cfg, fixed, seed)?;
            let exact = h.distance_to_local(k);
            let mut oracle = EvolutionOracle::new(h, seed, cfg.mode, core)?;
            let d = testers::test_locality(&mut oracle, k, eps1, eps2, cfg.delta)?;
            Ok((decision_row(seed, &d, exact, label), vec![d]))
        }
        Protocol::TestSupport => {
            let eps1 = require(cfg.eps1, "eps1")?;
            let eps2 = require(cfg.eps2, "eps2")?;
            let masks = support_masks(cfg)?;
            let (h, _) = hamiltonian_for_seed(cfg, fixed, seed)?;
            let mut oracle = EvolutionOracle::new(h.clone(), seed, cfg.mode, core)?;
            let ds = testers::test_support(&mut oracle, &masks, eps1, eps2, cfg.delta)?;
            // aggregate over supports: success when every on-promise support
            // is decided correctly
            let mut successes = Vec::new();
            for (mask, d) in masks.iter().zip(ds.iter()) {
                let allowed: std::collections::HashSet<PauliString> =
                    hamprobe_core::pauli::all_strings(cfg.n)
                        .filter(|x| mask.contains(x))
                        .collect();
                let dist = h.distance_to_support(&allowed);
                let label = if dist <= eps1 {
                    Some(true)
                } else if dist >= eps2 {
                    Some(false)
                } else {
                    None
                };
                if let Some(close) = label {
                    successes.push((d.verdict == Verdict::Close) == close);
                }
            }
            let success = if successes.is_empty() {
                None
            } else {
                Some(successes.iter().all(|&b| b))
            };
            let first = &ds[0];
            let row = Row {
                seed,
                verdict_or_err: verdict_name(first.verdict).into(),
                gamma: Some(first.gamma),
                exact_distance: Some(h.distance_to_local(cfg.k.unwrap_or(cfg.n))),
                queries: first.ledger.queries,
                evolution_time: first.ledger.evolution_time,
                clamped: first.budget_clamped,
                success,
            };
            Ok((row, ds))
        }
        Protocol::TestSparsity => {
            let s = cfg.s.context("missing --s")?;
            let eps1 = require(cfg.eps1, "eps1")?;
            let eps2 = require(cfg.eps2, "eps2")?;
            let (h, label) = hamiltonian_for_seed(cfg, fixed, seed)?;
            let exact = h.distance_to_sparse(s);
            let mut oracle = EvolutionOracle::new(h, seed, cfg.mode, core)?;
            let d = testers::test_sparsity(&mut oracle, s, eps1, eps2, cfg.delta)?;
            Ok((decision_row(seed, &d, exact, label), vec![d]))
        }
        Protocol::TestHamSparsityNomem => {
            let s = cfg.s.context("missing --s")?;
            let eps1 = require(cfg.eps1, "eps1")?;
            let eps2 = require(cfg.eps2, "eps2")?;
            let (h, label) = hamiltonian_for_seed(cfg, fixed, seed)?;
            let exact = h.distance_to_sparse(s);
            let mut rng = ChaCha12Rng::seed_from_u64(seed ^ 0x5eed);
            let mut oracle = EvolutionOracle::new(h, seed, cfg.mode, core)?;
            let d = hashing::test_hamiltonian_sparsity_memoryless(&mut oracle, s, eps1, eps2, &mut rng)?;
            Ok((decision_row(seed, &d, exact, label), vec![d]))
        }
        _ => unreachable!("learners handled in run_learner_seed"),
    }
}

fn run_learner_seed(
    cfg: &ExperimentConfig,
    fixed: Option<&Hamiltonian>,
    seed: u64,
) -> anyhow::Result<(Row, hamprobe_core::report::LearnReport)> {
    let core = &cfg.constants;
    let eps = require(cfg.eps, "eps")?;
    let (h, _) = hamiltonian_for_seed(cfg, fixed, seed)?;
    let mut oracle = EvolutionOracle::new(h.clone(), seed, cfg.mode, core)?;
    let mut report = match cfg.protocol {
        Protocol::LearnLocal => {
            learners::learn_local(&mut oracle, cfg.k.context("missing --k")?, eps, cfg.delta, cfg.memory)?
        }
        Protocol::LearnSparse => {
            learners::learn_sparse(&mut oracle, cfg.s.context("missing --s")?, eps, cfg.delta, cfg.memory)?
        }
        Protocol::LearnLocalSparse => learners::learn_local_sparse(
            &mut oracle,
            cfg.k.context("missing --k")?,
            cfg.s.context("missing --s")?,
            eps,
            cfg.delta,
            cfg.memory,
        )?,
        _ => unreachable!(),
    };
    let err = frobenius_distance(&h, &report.hamiltonian)?;
    report.achieved_error = Some(err);
    let row = Row {
        seed,
        verdict_or_err: format!("{err}"),
        gamma: None,
        exact_distance: Some(err),
        queries: report.ledger.queries,
        evolution_time: report.ledger.evolution_time,
        clamped: report.budget_clamped,
        success: Some(err <= eps),
    };
    Ok((row, report))
}

fn verdict_name(v: Verdict) -> &'static str {
    match v {
        Verdict::Close => "close",
        Verdict::Far => "far",
        Verdict::Undecided => "undecided",
    }
}

fn decision_row(
    seed: u64,
    d: &hamprobe_core::report::Decision,
    exact_distance: f64,
    label: Option<bool>,
) -> Row {
    Row {
        seed,
        verdict_or_err: verdict_name(d.verdict).into(),
        gamma: Some(d.gamma),
        exact_distance: Some(exact_distance),
        queries: d.ledger.queries,
        evolution_time: d.ledger.evolution_time,
        clamped: d.budget_clamped,
        success: label.map(|close| (d.verdict == Verdict::Close) == close),
    }
}

/// Run every seed of the config on the rayon pool; rows come back sorted.
pub fn run_experiment(cfg: &ExperimentConfig) -> anyhow::Result<ExperimentReport> {
    let (fixed, fixed_channel) = load_fixed(cfg)?;
    let seeds: Vec<u64> = (cfg.seed_start..cfg.seed_start + cfg.trials).collect();
    let mut rows: Vec<Row> = seeds
        .par_iter()
        .map(|&seed| {
            if cfg.protocol.is_learner() {
                run_learner_seed(cfg, fixed.as_ref(), seed).map(|(row, _)| row)
            } else {
                run_tester_seed(cfg, fixed.as_ref(), fixed_channel.as_ref(), seed)
                    .map(|(row, _)| row)
            }
        })
        .collect::<anyhow::Result<_>>()?;
    rows.sort_by_key(|r| r.seed);
    let labeled = rows.iter().filter(|r| r.success.is_some()).count() as u64;
    let successes = rows.iter().filter(|r| r.success == Some(true)).count() as u64;
    let mean_queries = rows.iter().map(|r| r.queries as f64).sum::<f64>() / rows.len().max(1) as f64;
    let mean_time = rows.iter().map(|r| r.evolution_time).sum::<f64>() / rows.len().max(1) as f64;
    Ok(ExperimentReport {
        config: cfg.clone(),
        trials: cfg.trials,
        successes,
        labeled,
        success_rate: (labeled > 0).then(|| successes as f64 / labeled as f64),
        mean_queries,
        mean_evolution_time: mean_time,
        timestamp_unix: std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0),
        rows,
    })
}

pub fn write_outputs(report: &ExperimentReport, out: &str) -> anyhow::Result<()> {
    if let Some(parent) = std::path::Path::new(out).parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)?;
        }
    }
    let mut csv = String::from(CSV_HEADER);
    csv.push('\n');
    for row in &report.rows {
        csv.push_str(&row.to_csv());
        csv.push('\n');
    }
    std::fs::write(format!("{out}.csv"), csv).context("writing CSV")?;
    let json = serde_json::to_string_pretty(report).context("serializing summary")?;
    std::fs::write(format!("{out}.json"), json).context("writing JSON summary")?;
    Ok(())
}

/// Load the optional fixed targets named by the config.
fn load_fixed(cfg: &ExperimentConfig) -> anyhow::Result<(Option<Hamiltonian>, Option<PauliChannel>)> {
    let fixed = match &cfg.hamiltonian_file {
        Some(path) if !path.is_empty() => {
            let text = std::fs::read_to_string(path)
                .with_context(|| format!("reading hamiltonian file {path}"))?;
            Some(if path.ends_with(".json") {
                hamprobe_core::io::hamiltonian_from_json(&text)?
            } else {
                hamprobe_core::io::hamiltonian_from_text(&text)?
            })
        }
        _ => None,
    };
    let fixed_channel = match &cfg.channel_file {
        Some(path) if !path.is_empty() => {
            let text = std::fs::read_to_string(path)
                .with_context(|| format!("reading channel file {path}"))?;
            let (ch, renormalized) = hamprobe_core::io::channel_from_text(&text)?;
            if renormalized {
                eprintln!("warning: channel rates renormalized to the simplex");
            }
            Some(ch)
        }
        _ => None,
    };
    Ok((fixed, fixed_channel))
}

/// Full Decision JSON for one tester run (the external single-run surface).
pub fn single_decision_json(cfg: &ExperimentConfig) -> anyhow::Result<String> {
    let (fixed, fixed_channel) = load_fixed(cfg)?;
    let (_, decisions) =
        run_tester_seed(cfg, fixed.as_ref(), fixed_channel.as_ref(), cfg.seed_start)?;
    if decisions.len() == 1 {
        Ok(serde_json::to_string_pretty(&decisions[0])?)
    } else {
        Ok(serde_json::to_string_pretty(&decisions)?)
    }
}

/// Learned-Hamiltonian text plus the LearnReport JSON for one learner run.
pub fn single_learn_output(cfg: &ExperimentConfig) -> anyhow::Result<(String, String)> {
    let (fixed, _) = load_fixed(cfg)?;
    let (row, report) = run_learner_seed(cfg, fixed.as_ref(), cfg.seed_start)?;
    let text = hamprobe_core::io::hamiltonian_to_text(&report.hamiltonian);
    let json = serde_json::to_string_pretty(&serde_json::json!({
        "seed": report.seed,
        "strategy": report.strategy,
        "target_error": report.target_error,
        "achieved_exact_error": report.achieved_error,
        "detected": report.detected.iter().map(|x| x.to_string()).collect::<Vec<_>>(),
        "ledger": report.ledger,
        "budget_clamped": report.budget_clamped,
        "success": row.success,
        "hamiltonian": serde_json::from_str::<serde_json::Value>(
            &hamprobe_core::io::hamiltonian_to_json(&report.hamiltonian)
        )?,
    }))?;
    Ok((text, json))
}
