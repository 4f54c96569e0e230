//! Experiment harness for the FTPL semi-bandit crate.
//!
//! Subcommands: `simulate` (seeded replication runs with trace/summary CSVs),
//! `benchmark` (resampling-cost grid), `verify` (inequality and estimator
//! sweeps), `counterexample` (the non-monotonicity scan), and `render`
//! (SVG line charts from the emitted CSVs). Log level comes from the
//! `SEMIBAND_LOG` environment variable. All output files are UTF-8.

mod bench;
mod config;
mod render;
mod simulate;
mod verify;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use semiband::perturbation::{Family, PerturbationSpec};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "semiband", version, about = "FTPL size-invariant semi-bandit laboratory")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run seeded FTPL replications and emit trace/summary CSVs.
    Simulate {
        /// JSON experiment config (required fields: d, m, T).
        #[arg(long)]
        config: PathBuf,
        /// Override the config's base seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Override the config's output directory.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Worker threads across replications (results are independent of it).
        #[arg(long, default_value_t = 1)]
        jobs: usize,
    },
    /// Mean resampling cost of GR and CGR over a (d, m) grid.
    Benchmark {
        /// Comma-separated dimensions.
        #[arg(long, default_value = "256,1024,4096", value_delimiter = ',')]
        dims: Vec<usize>,
        /// Comma-separated selection budgets m.
        #[arg(long, default_value = "1,8,64", value_delimiter = ',')]
        budgets: Vec<usize>,
        /// Rounds per cell.
        #[arg(long, default_value_t = 1000)]
        rounds: usize,
        /// Perturbation family (frechet|pareto).
        #[arg(long, default_value = "pareto")]
        family: String,
        /// Perturbation shape.
        #[arg(long, default_value_t = 2.0)]
        alpha: f64,
        /// Per-round trial cap.
        #[arg(long, default_value_t = bench::BENCH_CAP)]
        cap: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value = "out")]
        out: PathBuf,
        #[arg(long, default_value_t = 1)]
        jobs: usize,
    },
    /// Run a verification sweep; exit code 0 iff every check passes.
    Verify {
        /// Suite: lemmas | estimators | counterexample | penalty.
        suite: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value = "out")]
        out: PathBuf,
        /// Instance count override (lemmas: rank-ratio sweep; estimators: instances).
        #[arg(long)]
        instances: Option<usize>,
        /// Monte Carlo calls per estimator instance.
        #[arg(long, default_value_t = 200_000)]
        calls: usize,
        /// Resampling budget cap for the estimator suite.
        #[arg(long, default_value_t = semiband::resample::ResamplingBudget::DEFAULT_CAP)]
        cap: u64,
    },
    /// Scan the counterexample ratio over lambda_q0 and report monotonicity.
    Counterexample {
        #[arg(long, default_value_t = 0.0)]
        lo: f64,
        #[arg(long, default_value_t = 5.0)]
        hi: f64,
        #[arg(long, default_value_t = 0.05)]
        step: f64,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Render an emitted CSV as an SVG line chart.
    Render {
        #[arg(long)]
        input: PathBuf,
        /// Chart kind: loss (trace CSV) | ratio (counterexample CSV).
        #[arg(long)]
        kind: String,
        #[arg(long)]
        out: PathBuf,
    },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("SEMIBAND_LOG", "warn")).init();
    match run() {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn run() -> Result<ExitCode> {
    let cli = Cli::parse();
    match cli.command {
        Command::Simulate { config, seed, out, jobs } => {
            let mut cfg = config::ExperimentConfig::load(&config)?;
            if let Some(s) = seed {
                cfg.base_seed = s;
            }
            let out_dir = out.unwrap_or_else(|| cfg.output_dir.clone());
            let jobs = jobs.max(1);
            log::info!(
                "simulate: d={} m={} T={} reps={} seed={} jobs={jobs}",
                cfg.d, cfg.m, cfg.horizon, cfg.replications, cfg.base_seed
            );
            let summary = simulate::run(&cfg, &out_dir, jobs)?;
            println!(
                "replications:        {}\n\
                 mean pseudo-regret:  {:.4}\n\
                 stddev:              {:.4}\n\
                 theoretical bound:   {:.4}\n\
                 mean resamples/round:{:.3}\n\
                 cap events:          {}\n\
                 wall seconds:        {:.3}\n\
                 output:              {}",
                cfg.replications,
                summary.mean_regret,
                summary.stddev_regret,
                summary.theoretical_bound,
                summary.mean_resamples,
                summary.cap_events,
                summary.wall_seconds,
                out_dir.display()
            );
            Ok(ExitCode::SUCCESS)
        }
        Command::Benchmark { dims, budgets, rounds, family, alpha, cap, seed, out, jobs } => {
            let spec = parse_spec(&family, alpha)?;
            let opts = bench::BenchOptions {
                dims,
                budgets,
                rounds,
                cap,
                seed,
                jobs: jobs.max(1),
            };
            let cells = bench::run_grid(&spec, &opts)?;
            std::fs::create_dir_all(&out)?;
            let path = out.join("benchmark.csv");
            bench::write_csv(&cells, &path)?;
            println!("{}", bench::to_csv(&cells).trim_end());
            println!("wrote {}", path.display());
            let violations = cells.iter().filter(|c| c.mean_resamples > c.bound).count();
            if violations > 0 {
                eprintln!("{violations} cells exceed their cost ceiling");
                return Ok(ExitCode::FAILURE);
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Verify { suite, seed, out, instances, calls, cap } => {
            std::fs::create_dir_all(&out)?;
            let (rows, extra) = match suite.as_str() {
                "lemmas" => {
                    let n = instances.unwrap_or(200);
                    let flat = instances.map(|n| n / 2).unwrap_or(100);
                    (verify::lemma_suite(seed, n, flat)?, None)
                }
                "estimators" => {
                    let n = instances.unwrap_or(4);
                    (verify::estimator_suite(seed, n, calls, cap)?, None)
                }
                "counterexample" => {
                    let (rows, points) = verify::counterexample_suite(0.05)?;
                    (rows, Some(points))
                }
                "penalty" => (verify::penalty_suite(seed, 100_000, 1_000_000)?, None),
                other => bail!("unknown suite `{other}` (lemmas|estimators|counterexample|penalty)"),
            };
            if let Some(points) = extra {
                std::fs::write(out.join("counterexample.csv"), verify::scan_to_csv(&points))
                    .context("writing counterexample.csv")?;
            }
            let path = out.join(format!("verify_{suite}.csv"));
            verify::write_report(&rows, &path)?;
            let failed = rows.iter().filter(|r| !r.ok).count();
            println!(
                "{}: {} checks, {} failed; report at {}",
                suite,
                rows.len(),
                failed,
                path.display()
            );
            if failed > 0 {
                for r in rows.iter().filter(|r| !r.ok).take(10) {
                    eprintln!(
                        "FAIL {} instance={} i={} lhs={} rhs={}",
                        r.check, r.instance_id, r.i, r.lhs, r.rhs
                    );
                }
                return Ok(ExitCode::FAILURE);
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Counterexample { lo, hi, step, out } => {
            let settings = semiband::analytics::QuadratureSettings::default();
            let points = semiband::analytics::counterexample_scan(lo, hi, step, &settings)
                .map_err(|e| anyhow::anyhow!("{e}"))?;
            let verdict = semiband::analytics::assess_scan(&points);
            std::fs::create_dir_all(&out)?;
            let path = out.join("counterexample.csv");
            std::fs::write(&path, verify::scan_to_csv(&points))?;
            println!(
                "scan [{lo}, {hi}] step {step}: rise={:.6} fall={:.6} noise={:.2e} \
                 non_monotone={} exceeds_baseline={}\nwrote {}",
                verdict.max_rise,
                verdict.max_fall,
                verdict.noise_floor,
                verdict.non_monotone,
                verdict.exceeds_value_at_lambda_i,
                path.display()
            );
            if verdict.non_monotone && verdict.exceeds_value_at_lambda_i {
                Ok(ExitCode::SUCCESS)
            } else {
                Ok(ExitCode::FAILURE)
            }
        }
        Command::Render { input, kind, out } => {
            render::render_csv(&input, &kind, &out)?;
            println!("wrote {}", out.display());
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn parse_spec(family: &str, alpha: f64) -> Result<PerturbationSpec> {
    let family = match family {
        "frechet" => Family::Frechet,
        "pareto" => Family::Pareto,
        other => bail!("family must be frechet|pareto, got `{other}`"),
    };
    PerturbationSpec::new(family, alpha).map_err(|e| anyhow::anyhow!("{e}"))
}
