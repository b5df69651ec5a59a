//! `hamprobe`: run the testers and learners against simulated evolution
//! oracles across seed grids, verify against exact ground truth, and emit
//! CSV/JSON reports; also drives the named lemma-verification suites.

mod experiment;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use experiment::{ExperimentConfig, InstancePolicy, Protocol};
use hamprobe_core::config::Config;
use hamprobe_core::evolution::OracleMode;
use hamprobe_core::verify::{run_suite, Suite};

#[derive(Parser)]
#[command(name = "hamprobe", version, about = "testers and learners for structured Hamiltonians and Pauli channels at exactly simulable scale")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
struct CommonArgs {
    /// Qubit count of the hidden target.
    #[arg(long, default_value_t = 4)]
    n: u32,
    /// Failure probability budget.
    #[arg(long, default_value_t = 0.1)]
    delta: f64,
    /// First seed of the grid.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Number of seeds to run.
    #[arg(long, default_value_t = 1)]
    trials: u64,
    /// exact | shots
    #[arg(long, default_value = "shots")]
    mode: String,
    /// promise | close | far | from_file
    #[arg(long, default_value = "promise")]
    instance: String,
    /// Load the hidden Hamiltonian from a text/JSON file.
    #[arg(long)]
    hamiltonian: Option<String>,
    /// Output prefix: writes PREFIX.csv and PREFIX.json.
    #[arg(long)]
    out: Option<String>,
    /// Run from a TOML experiment config instead of flags.
    #[arg(long)]
    config: Option<String>,
    /// Global sample-count multiplier c_T.
    #[arg(long)]
    ct: Option<f64>,
    /// Evolution-time multiplier c_t for the sparsity testers.
    #[arg(long)]
    time_c: Option<f64>,
    /// Bohnenblust-Hille constant for the local learner.
    #[arg(long)]
    bh: Option<f64>,
    /// Hard cap on any single sample count.
    #[arg(long)]
    shot_cap: Option<u64>,
}

impl CommonArgs {
    fn build(&self, protocol: Protocol) -> anyhow::Result<ExperimentConfig> {
        if let Some(path) = &self.config {
            let text = std::fs::read_to_string(path)
                .with_context(|| format!("reading config {path}"))?;
            let cfg: ExperimentConfig = toml::from_str(&text).context("parsing TOML config")?;
            return Ok(cfg);
        }
        let mut constants = Config::from_env();
        if let Some(ct) = self.ct {
            constants.budget_c = ct;
        }
        if let Some(tc) = self.time_c {
            constants.sparsity_time_c = tc;
        }
        if let Some(bh) = self.bh {
            constants.bh_constant = bh;
        }
        if let Some(cap) = self.shot_cap {
            constants.shot_cap = cap;
        }
        let instance = match self.instance.as_str() {
            "promise" => InstancePolicy::Promise,
            "close" => InstancePolicy::Close,
            "far" => InstancePolicy::Far,
            "from_file" => InstancePolicy::FromFile,
            other => anyhow::bail!("unknown instance policy '{other}'"),
        };
        let instance = if self.hamiltonian.is_some() {
            InstancePolicy::FromFile
        } else {
            instance
        };
        Ok(ExperimentConfig {
            protocol,
            n: self.n,
            k: None,
            s: None,
            eps: None,
            eps1: None,
            eps2: None,
            delta: self.delta,
            memory: true,
            mode: self.mode.parse::<OracleMode>()?,
            seed_start: self.seed,
            trials: self.trials,
            instance,
            hamiltonian_file: self.hamiltonian.clone(),
            channel_file: None,
            supports: Vec::new(),
            support_weights: Vec::new(),
            out: self.out.clone(),
            constants,
            instance_params: Default::default(),
        })
    }
}

#[derive(Subcommand)]
enum Command {
    /// Tolerant k-locality tester.
    TestLocality {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long)]
        k: u32,
        #[arg(long)]
        eps1: f64,
        #[arg(long)]
        eps2: f64,
    },
    /// Simultaneous tolerant support tests.
    TestSupport {
        #[command(flatten)]
        common: CommonArgs,
        /// Locality parameter used to plant promise instances.
        #[arg(long)]
        k: u32,
        #[arg(long)]
        eps1: f64,
        #[arg(long)]
        eps2: f64,
        /// Candidate support as comma-separated Pauli labels (repeatable).
        #[arg(long = "support")]
        supports: Vec<String>,
        /// Candidate support of all strings with weight <= W (repeatable).
        #[arg(long = "support-weight")]
        support_weights: Vec<u32>,
    },
    /// Tolerant s-sparsity tester with memory.
    TestSparsity {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long)]
        s: usize,
        #[arg(long)]
        eps1: f64,
        #[arg(long)]
        eps2: f64,
    },
    /// Tolerant k-junta tester for the evolution unitary.
    TestJunta {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long)]
        k: u32,
        #[arg(long)]
        eps1: f64,
        #[arg(long)]
        eps2: f64,
        /// true: Bell sampling; false: memory-less MUB sampling.
        #[arg(long, default_value_t = true)]
        memory: std::primitive::bool,
    },
    /// Tolerant s-sparsity tester for Pauli channels via Pauli hashing.
    TestChannelSparsity {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long)]
        s: usize,
        #[arg(long)]
        eps1: f64,
        #[arg(long)]
        eps2: f64,
        /// Load the hidden channel from a text file.
        #[arg(long)]
        channel: Option<String>,
    },
    /// Memory-less tolerant s-sparsity tester for Hamiltonians.
    TestHamSparsityNomem {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long)]
        s: usize,
        #[arg(long)]
        eps1: f64,
        #[arg(long)]
        eps2: f64,
    },
    /// Two-stage k-local Hamiltonian learner.
    LearnLocal {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long)]
        k: u32,
        #[arg(long)]
        eps: f64,
        #[arg(long, default_value_t = true)]
        memory: std::primitive::bool,
    },
    /// Two-stage s-sparse Hamiltonian learner.
    LearnSparse {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long)]
        s: usize,
        #[arg(long)]
        eps: f64,
        #[arg(long, default_value_t = true)]
        memory: std::primitive::bool,
    },
    /// Dispatch to the cheaper of the two learners.
    LearnLocalSparse {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long)]
        k: u32,
        #[arg(long)]
        s: usize,
        #[arg(long)]
        eps: f64,
        #[arg(long, default_value_t = true)]
        memory: std::primitive::bool,
    },
    /// Run a named verification suite (or all of them).
    VerifyLemmas {
        /// taylor | locality_dichotomy | sparsity_dichotomy | mub_design |
        /// hashing_props | bucket_energy | twirl_identity |
        /// channel_dichotomy | all
        #[arg(long, default_value = "all")]
        suite: String,
        #[arg(long, default_value_t = 7)]
        seed: u64,
    },
    /// Print the default experiment configuration as TOML.
    Config {
        #[arg(long, default_value_t = true)]
        defaults: std::primitive::bool,
    },
}

fn finish(cfg: ExperimentConfig) -> anyhow::Result<()> {
    if cfg.trials == 1 && cfg.out.is_none() && !cfg.protocol.is_learner() {
        println!("{}", experiment::single_decision_json(&cfg)?);
        return Ok(());
    }
    if cfg.trials == 1 && cfg.out.is_none() && cfg.protocol.is_learner() {
        let (text, json) = experiment::single_learn_output(&cfg)?;
        println!("{json}");
        if !text.is_empty() {
            eprintln!("learned Hamiltonian:\n{text}");
        }
        return Ok(());
    }
    let report = experiment::run_experiment(&cfg)?;
    if let Some(out) = &cfg.out {
        experiment::write_outputs(&report, out)?;
        eprintln!("wrote {out}.csv and {out}.json");
    }
    println!(
        "{}",
        serde_json::to_string_pretty(&serde_json::json!({
            "protocol": report.config.protocol,
            "trials": report.trials,
            "labeled": report.labeled,
            "successes": report.successes,
            "success_rate": report.success_rate,
            "mean_queries": report.mean_queries,
            "mean_evolution_time": report.mean_evolution_time,
        }))?
    );
    Ok(())
}

fn main() -> anyhow::Result<()> {
    let cli = Cli::parse();
    match cli.command {
        Command::TestLocality { common, k, eps1, eps2 } => {
            let mut cfg = common.build(Protocol::TestLocality)?;
            cfg.k.get_or_insert(k);
            cfg.eps1.get_or_insert(eps1);
            cfg.eps2.get_or_insert(eps2);
            finish(cfg)
        }
        Command::TestSupport {
            common,
            k,
            eps1,
            eps2,
            supports,
            support_weights,
        } => {
            let mut cfg = common.build(Protocol::TestSupport)?;
            cfg.k.get_or_insert(k);
            cfg.eps1.get_or_insert(eps1);
            cfg.eps2.get_or_insert(eps2);
            if cfg.supports.is_empty() {
                cfg.supports = supports;
            }
            if cfg.support_weights.is_empty() {
                cfg.support_weights = support_weights;
            }
            finish(cfg)
        }
        Command::TestSparsity { common, s, eps1, eps2 } => {
            let mut cfg = common.build(Protocol::TestSparsity)?;
            cfg.s.get_or_insert(s);
            cfg.eps1.get_or_insert(eps1);
            cfg.eps2.get_or_insert(eps2);
            finish(cfg)
        }
        Command::TestJunta {
            common,
            k,
            eps1,
            eps2,
            memory,
        } => {
            let mut cfg = common.build(Protocol::TestJunta)?;
            cfg.k.get_or_insert(k);
            cfg.eps1.get_or_insert(eps1);
            cfg.eps2.get_or_insert(eps2);
            cfg.memory = memory;
            finish(cfg)
        }
        Command::TestChannelSparsity {
            common,
            s,
            eps1,
            eps2,
            channel,
        } => {
            let mut cfg = common.build(Protocol::TestChannelSparsity)?;
            cfg.s.get_or_insert(s);
            cfg.eps1.get_or_insert(eps1);
            cfg.eps2.get_or_insert(eps2);
            if cfg.channel_file.is_none() {
                cfg.channel_file = channel;
            }
            if cfg.channel_file.is_some() {
                cfg.instance = InstancePolicy::FromFile;
            }
            finish(cfg)
        }
        Command::TestHamSparsityNomem { common, s, eps1, eps2 } => {
            let mut cfg = common.build(Protocol::TestHamSparsityNomem)?;
            cfg.s.get_or_insert(s);
            cfg.eps1.get_or_insert(eps1);
            cfg.eps2.get_or_insert(eps2);
            finish(cfg)
        }
        Command::LearnLocal { common, k, eps, memory } => {
            let mut cfg = common.build(Protocol::LearnLocal)?;
            cfg.k.get_or_insert(k);
            cfg.eps.get_or_insert(eps);
            cfg.memory = memory;
            finish(cfg)
        }
        Command::LearnSparse { common, s, eps, memory } => {
            let mut cfg = common.build(Protocol::LearnSparse)?;
            cfg.s.get_or_insert(s);
            cfg.eps.get_or_insert(eps);
            cfg.memory = memory;
            finish(cfg)
        }
        Command::LearnLocalSparse {
            common,
            k,
            s,
            eps,
            memory,
        } => {
            let mut cfg = common.build(Protocol::LearnLocalSparse)?;
            cfg.k.get_or_insert(k);
            cfg.s.get_or_insert(s);
            cfg.eps.get_or_insert(eps);
            cfg.memory = memory;
            finish(cfg)
        }
        Command::VerifyLemmas { suite, seed } => {
            let cfg = Config::from_env();
            let suites: Vec<Suite> = if suite == "all" {
                Suite::ALL.to_vec()
            } else {
                vec![suite.parse()?]
            };
            let mut all_ok = true;
            for s in suites {
                let report = run_suite(s, &cfg, seed)?;
                let status = if report.passed() { "PASS" } else { "FAIL" };
                println!("[{status}] {}", report.suite);
                for c in &report.checks {
                    println!(
                        "  {} {} -- {}",
                        if c.passed { "ok  " } else { "FAIL" },
                        c.label,
                        c.detail
                    );
                }
                if let Some(fail) = report.first_failure() {
                    eprintln!("first violated inequality: {} ({})", fail.label, fail.detail);
                    all_ok = false;
                }
            }
            if !all_ok {
                std::process::exit(1);
            }
            Ok(())
        }
        Command::Config { defaults } => {
            if defaults {
                print!("{}", ExperimentConfig::default_toml());
            }
            Ok(())
        }
    }
}
