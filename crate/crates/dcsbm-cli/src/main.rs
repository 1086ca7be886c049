//! Command-line interface: seeded generation, counters, likelihoods,
//! evidence, order selection, numerical check sweeps, and Monte Carlo
//! experiments. Data goes to files or stdout; progress and diagnostics go to
//! stderr.

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};

use dcsbm::likelihood::{
    log_c, log_joint, log_profile_sup, mle_params, SearchStrategy, DEFAULT_ENUM_BUDGET,
};
use dcsbm::marginal::{log_marginal_bracket, log_marginal_exact, EvidenceBackend};
use dcsbm::sampler::{sample_dataset, substream, GeneratorConfig, GeneratorMode, WeightMode};
use dcsbm::selection::{select_k, SelectOptions};
use dcsbm::stats::compute_stats;

use dcsbm_cli::checks::run_all_checks;
use dcsbm_cli::experiment::{records_csv, run_experiment, summary_csv, ExperimentConfig};
use dcsbm_cli::io;

#[derive(Parser)]
#[command(
    name = "dcsbm",
    version,
    about = "Degree-corrected stochastic block model toolkit"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum BackendArg {
    Exact,
    Bracket,
}

impl From<BackendArg> for EvidenceBackend {
    fn from(b: BackendArg) -> Self {
        match b {
            BackendArg::Exact => EvidenceBackend::Exact,
            BackendArg::Bracket => EvidenceBackend::Bracket,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum WeightsArg {
    Ones,
    Prior,
}

impl From<WeightsArg> for WeightMode {
    fn from(w: WeightsArg) -> Self {
        match w {
            WeightsArg::Ones => WeightMode::Ones,
            WeightsArg::Prior => WeightMode::Prior,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Sample (params, labels, network) from the hierarchical model or from
    /// fixed (pi, lambda_tilde).
    Generate {
        #[arg(long)]
        nodes: usize,
        /// True number of communities (required without --model).
        #[arg(long)]
        communities: Option<usize>,
        /// Sparsity scale applied to the base rates.
        #[arg(long, default_value_t = 1.0)]
        rho: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// JSON file with fixed {"pi": [...], "lambda_tilde": [[...]]}.
        #[arg(long)]
        model: Option<PathBuf>,
        /// Node weights under --model: unit weights or prior draws.
        #[arg(long, value_enum, default_value_t = WeightsArg::Prior)]
        weights: WeightsArg,
        #[arg(long)]
        out_network: PathBuf,
        #[arg(long)]
        out_labels: Option<PathBuf>,
        #[arg(long)]
        out_params: Option<PathBuf>,
    },
    /// Sufficient statistics of a (network, labels) pair, as JSON.
    Stats {
        #[arg(long)]
        network: PathBuf,
        #[arg(long)]
        labels: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Log-likelihood values at a labeling: normalizer, profile maximum,
    /// MLE plug-ins, and optionally the joint at given parameters.
    Loglik {
        #[arg(long)]
        network: PathBuf,
        #[arg(long)]
        labels: PathBuf,
        #[arg(long)]
        params: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Log-evidence of the k-community model (exact or bracket backend).
    Marginal {
        #[arg(long)]
        network: PathBuf,
        #[arg(long)]
        k: usize,
        #[arg(long, value_enum, default_value_t = BackendArg::Exact)]
        backend: BackendArg,
        /// Cap on k^n for exact enumeration.
        #[arg(long, default_value_t = DEFAULT_ENUM_BUDGET)]
        budget: u64,
        #[arg(long, default_value_t = 10)]
        restarts: usize,
        #[arg(long, default_value_t = 100)]
        max_sweeps: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Select the number of communities by penalized evidence.
    Select {
        #[arg(long)]
        network: PathBuf,
        /// Largest order to score (default: the number of nodes).
        #[arg(long)]
        k_max: Option<usize>,
        #[arg(long, value_enum, default_value_t = BackendArg::Exact)]
        backend: BackendArg,
        #[arg(long, default_value_t = DEFAULT_ENUM_BUDGET)]
        budget: u64,
        #[arg(long, default_value_t = 10)]
        restarts: usize,
        #[arg(long, default_value_t = 100)]
        max_sweeps: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// With the exact backend, skip infeasible orders instead of failing.
        #[arg(long)]
        allow_partial: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the numerical check sweeps; nonzero exit on any failure.
    Check {
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Run a Monte Carlo consistency experiment from a JSON config.
    Experiment {
        #[arg(long)]
        config: PathBuf,
        /// Results CSV path (overrides the config's `out`).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Worker threads (default: all cores). Output bytes do not depend
        /// on this.
        #[arg(long)]
        threads: Option<usize>,
        /// Record real wall times in the CSV instead of zeros; this makes
        /// the output non-reproducible byte-for-byte.
        #[arg(long)]
        timing: bool,
    },
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::FAILURE
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Generate {
            nodes,
            communities,
            rho,
            seed,
            model,
            weights,
            out_network,
            out_labels,
            out_params,
        } => {
            let cfg = match model {
                Some(path) => {
                    let m = io::read_generator_model(&path)
                        .with_context(|| format!("reading model {}", path.display()))?;
                    if let Some(k0) = communities {
                        if k0 != m.pi.len() {
                            bail!(
                                "--communities {k0} does not match the model's {} communities",
                                m.pi.len()
                            );
                        }
                    }
                    GeneratorConfig {
                        n: nodes,
                        k0: m.pi.len(),
                        rho,
                        seed,
                        mode: GeneratorMode::Fixed {
                            pi: m.pi,
                            lambda_tilde: m.lambda_tilde,
                            weights: weights.into(),
                        },
                    }
                }
                None => {
                    let k0 = communities
                        .context("--communities is required when no --model is given")?;
                    GeneratorConfig::hierarchical(nodes, k0, rho, seed)
                }
            };
            let dataset = sample_dataset(&cfg)?;
            io::write_network(&out_network, &dataset.network)?;
            if let Some(path) = out_labels {
                io::write_labels(&path, &dataset.labels)?;
            }
            if let Some(path) = out_params {
                io::write_params(&path, &dataset.params)?;
            }
            eprintln!(
                "generated n = {}, k0 = {}, edges = {}",
                dataset.network.n(),
                cfg.k0,
                dataset.network.edge_count()
            );
            Ok(ExitCode::SUCCESS)
        }

        Command::Stats {
            network,
            labels,
            out,
        } => {
            let x = io::read_network(&network)?;
            let z = io::read_labels(&labels)?;
            let stats = compute_stats(&x, &z)?;
            let value = io::stats_json(&x, &stats);
            io::emit(
                out.as_deref(),
                &(serde_json::to_string_pretty(&value)? + "\n"),
            )?;
            Ok(ExitCode::SUCCESS)
        }

        Command::Loglik {
            network,
            labels,
            params,
            out,
        } => {
            let x = io::read_network(&network)?;
            let z = io::read_labels(&labels)?;
            let mle = mle_params(&x, &z)?;
            let mut value = serde_json::json!({
                "log_c": log_c(&x),
                "log_profile_sup": log_profile_sup(&x, &z)?,
                "mle": io::params_value(&mle),
            });
            if let Some(path) = params {
                let p = io::read_params(&path)?;
                value["log_joint"] = serde_json::json!(log_joint(&x, &z, &p)?);
            }
            io::emit(
                out.as_deref(),
                &(serde_json::to_string_pretty(&value)? + "\n"),
            )?;
            Ok(ExitCode::SUCCESS)
        }

        Command::Marginal {
            network,
            k,
            backend,
            budget,
            restarts,
            max_sweeps,
            seed,
            out,
        } => {
            let x = io::read_network(&network)?;
            let evidence = match EvidenceBackend::from(backend) {
                EvidenceBackend::Exact => log_marginal_exact(&x, k, budget)?,
                EvidenceBackend::Bracket => {
                    let mut rng = substream(seed, k as u64);
                    log_marginal_bracket(
                        &x,
                        k,
                        SearchStrategy::Greedy {
                            restarts,
                            max_sweeps,
                        },
                        &mut rng,
                    )?
                }
            };
            io::emit(
                out.as_deref(),
                &(serde_json::to_string_pretty(&evidence)? + "\n"),
            )?;
            Ok(ExitCode::SUCCESS)
        }

        Command::Select {
            network,
            k_max,
            backend,
            budget,
            restarts,
            max_sweeps,
            seed,
            allow_partial,
            out,
        } => {
            let x = io::read_network(&network)?;
            let k_max = k_max.unwrap_or(x.n());
            let opts = SelectOptions {
                budget,
                allow_partial,
                restarts,
                max_sweeps,
                seed,
            };
            let report = select_k(&x, k_max, backend.into(), &opts)?;
            io::emit(out.as_deref(), &io::format_report(&report))?;
            Ok(ExitCode::SUCCESS)
        }

        Command::Check { seed } => {
            let lines = run_all_checks(seed);
            let mut all_passed = true;
            for line in &lines {
                let status = if line.passed { "PASS" } else { "FAIL" };
                println!("{status} {} — {}", line.name, line.detail);
                all_passed &= line.passed;
            }
            if all_passed {
                Ok(ExitCode::SUCCESS)
            } else {
                eprintln!("one or more checks failed");
                Ok(ExitCode::FAILURE)
            }
        }

        Command::Experiment {
            config,
            out,
            threads,
            timing,
        } => {
            let text = std::fs::read_to_string(&config)
                .with_context(|| format!("reading config {}", config.display()))?;
            let cfg: ExperimentConfig = serde_json::from_str(&text)
                .with_context(|| format!("parsing config {}", config.display()))?;
            let output = match threads {
                Some(t) => rayon::ThreadPoolBuilder::new()
                    .num_threads(t)
                    .build()
                    .context("building worker pool")?
                    .install(|| run_experiment(&cfg)),
                None => run_experiment(&cfg),
            }?;
            let csv = records_csv(&output.records, cfg.k_max, timing);
            let summary = summary_csv(&output.summary);
            let out_path = out.or_else(|| cfg.out.as_ref().map(PathBuf::from));
            match out_path {
                Some(path) => {
                    io::emit(Some(&path), &csv)?;
                    print!("{summary}");
                }
                None => {
                    print!("{csv}");
                    eprint!("{summary}");
                }
            }
            Ok(ExitCode::SUCCESS)
        }
    }
}
