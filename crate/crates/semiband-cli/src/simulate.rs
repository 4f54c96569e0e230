//! Seeded replication runner.
//!
//! Replication r draws from the stream keyed by (base_seed, r), so traces are
//! a pure function of (config, seed) and independent of the worker count:
//! workers compute into an indexed buffer and the main thread writes files in
//! replication order. Output per replication is `trace_r{r:04}.csv` with the
//! pinned schema `t,action_indices,round_loss,resamples,capped`
//! (action indices semicolon-joined, capped as 0/1), plus one aggregate
//! `summary.csv` row per replication. The `seconds` column of the aggregate
//! is wall time and is the one value that varies between runs.

use crate::config::ExperimentConfig;
use anyhow::{Context, Result};
use rayon::prelude::*;
use semiband::env::{run_episode, RegretTrace};
use semiband::policy::{theoretical_regret_bound, PolicyState};
use semiband::replication_rng;
use semiband::resample::ResamplingBudget;
use std::fmt::Write as _;
use std::path::Path;
use std::time::Instant;

pub struct ReplicationOutput {
    pub pseudo_regret: f64,
    pub mean_resamples: f64,
    pub cap_events: usize,
    pub seconds: f64,
    pub trace_csv: String,
}

pub struct RunSummary {
    pub mean_regret: f64,
    pub stddev_regret: f64,
    pub mean_resamples: f64,
    pub cap_events: usize,
    pub wall_seconds: f64,
    pub theoretical_bound: f64,
}

fn trace_to_csv(trace: &RegretTrace) -> String {
    let mut out = String::with_capacity(32 * trace.len() + 64);
    out.push_str("t,action_indices,round_loss,resamples,capped\n");
    for rec in trace.records() {
        let joined = rec
            .action
            .iter()
            .map(|i| i.to_string())
            .collect::<Vec<_>>()
            .join(";");
        writeln!(
            out,
            "{},{},{},{},{}",
            rec.t,
            joined,
            rec.round_loss,
            rec.resamples,
            u8::from(rec.capped)
        )
        .expect("string write");
    }
    out
}

pub fn run_one_replication(cfg: &ExperimentConfig, replication: u64) -> Result<ReplicationOutput> {
    let start = Instant::now();
    let mut policy = PolicyState::new(
        cfg.d,
        cfg.m,
        cfg.spec()?,
        cfg.estimator()?,
        cfg.learning_rate(),
        cfg.horizon,
        ResamplingBudget::new(cfg.budget_cap).map_err(|e| anyhow::anyhow!("{e}"))?,
    )
    .map_err(|e| anyhow::anyhow!("policy setup: {e}"))?;
    let mut env = cfg.build_environment()?;
    let mut rng = replication_rng(cfg.base_seed, replication);
    let episode =
        run_episode(&mut policy, &mut env, &mut rng).map_err(|e| anyhow::anyhow!("episode: {e}"))?;
    Ok(ReplicationOutput {
        pseudo_regret: episode.pseudo_regret,
        mean_resamples: episode.trace.mean_resamples(),
        cap_events: episode.trace.cap_events(),
        seconds: start.elapsed().as_secs_f64(),
        trace_csv: trace_to_csv(&episode.trace),
    })
}

pub fn run(cfg: &ExperimentConfig, out_dir: &Path, jobs: usize) -> Result<RunSummary> {
    std::fs::create_dir_all(out_dir)
        .with_context(|| format!("creating output dir {}", out_dir.display()))?;
    let started = Instant::now();
    let indices: Vec<u64> = (0..cfg.replications as u64).collect();
    let results: Vec<ReplicationOutput> = if jobs > 1 {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build()
            .context("building worker pool")?;
        pool.install(|| {
            indices
                .par_iter()
                .map(|&r| run_one_replication(cfg, r))
                .collect::<Result<Vec<_>>>()
        })?
    } else {
        indices
            .iter()
            .map(|&r| run_one_replication(cfg, r))
            .collect::<Result<Vec<_>>>()?
    };

    let mut summary_csv = String::from("replication,pseudo_regret,mean_resamples,cap_events,seconds\n");
    for (r, res) in results.iter().enumerate() {
        let path = out_dir.join(format!("trace_r{r:04}.csv"));
        std::fs::write(&path, &res.trace_csv)
            .with_context(|| format!("writing {}", path.display()))?;
        writeln!(
            summary_csv,
            "{},{},{},{},{:.6}",
            r, res.pseudo_regret, res.mean_resamples, res.cap_events, res.seconds
        )
        .expect("string write");
    }
    std::fs::write(out_dir.join("summary.csv"), &summary_csv).context("writing summary.csv")?;

    let n = results.len() as f64;
    let mean_regret = results.iter().map(|r| r.pseudo_regret).sum::<f64>() / n;
    let var = if results.len() > 1 {
        results
            .iter()
            .map(|r| (r.pseudo_regret - mean_regret).powi(2))
            .sum::<f64>()
            / (n - 1.0)
    } else {
        0.0
    };
    let bound = theoretical_regret_bound(&cfg.spec()?, cfg.m, cfg.d, cfg.horizon)
        .map_err(|e| anyhow::anyhow!("{e}"))?;
    Ok(RunSummary {
        mean_regret,
        stddev_regret: var.sqrt(),
        mean_resamples: results.iter().map(|r| r.mean_resamples).sum::<f64>() / n,
        cap_events: results.iter().map(|r| r.cap_events).sum(),
        wall_seconds: started.elapsed().as_secs_f64(),
        theoretical_bound: bound.total,
    })
}
