//! Verification sweeps: the inequality checks behind the regret analysis,
//! estimator unbiasedness spot checks, the penalty-side lemmas, and the
//! non-monotonicity counterexample. Each suite emits one CSV row per check
//! (`check,instance_id,i,lhs,rhs,ok,err_estimate`) and the process exits
//! nonzero if any row fails.

use anyhow::{Context, Result};
use rand::Rng;
use semiband::analytics::{
    assess_scan, check_lambda_star_bound, check_sigma_ratio_bound, counterexample_scan, phi_i,
    LambdaProfile, QuadratureSettings, ScanPoint,
};
use semiband::perturbation::{
    pareto_order_statistic_mean, penalty_bound, PerturbationSpec,
};
use semiband::policy::Estimator;
use semiband::replication_rng;
use semiband::resample::{
    conditional_geometric_resample, geometric_resample, ResamplingBudget,
};
use semiband::select::{ascending_ranks, Action};
use std::fmt::Write as _;
use std::path::Path;

/// Acceptance slack for the quadrature inequality sweeps (10× looser than
/// the quadrature error budget).
pub const SWEEP_SLACK: f64 = 1e-6;

#[derive(Debug, Clone)]
pub struct CheckRow {
    pub check: &'static str,
    pub instance_id: String,
    pub i: usize,
    pub lhs: f64,
    pub rhs: f64,
    pub ok: bool,
    pub err_estimate: f64,
}

pub fn rows_to_csv(rows: &[CheckRow]) -> String {
    let mut out = String::from("check,instance_id,i,lhs,rhs,ok,err_estimate\n");
    for r in rows {
        writeln!(
            out,
            "{},{},{},{},{},{},{}",
            r.check,
            r.instance_id,
            r.i,
            r.lhs,
            r.rhs,
            u8::from(r.ok),
            r.err_estimate
        )
        .expect("string write");
    }
    out
}

pub fn write_report(rows: &[CheckRow], path: &Path) -> Result<()> {
    std::fs::write(path, rows_to_csv(rows)).with_context(|| format!("writing {}", path.display()))
}

/// A random sweep instance: dimension, budget, shape, family, offsets.
pub struct SweepInstance {
    pub spec: PerturbationSpec,
    pub m: usize,
    pub lambda: Vec<f64>,
}

pub fn random_instance(seed: u64, idx: u64, max_d: usize, sorted: bool) -> SweepInstance {
    let mut rng = replication_rng(seed, idx);
    let d = 3 + rng.random_range(0..=(max_d - 3));
    let m = 1 + rng.random_range(0..d);
    let alpha = [1.5, 2.0, 3.0][rng.random_range(0..3)];
    let spec = if rng.random::<f64>() < 0.5 {
        PerturbationSpec::frechet(alpha).unwrap()
    } else {
        PerturbationSpec::pareto(alpha).unwrap()
    };
    let mut lambda: Vec<f64> = (0..d).map(|_| rng.random::<f64>() * 3.0).collect();
    if sorted {
        lambda.sort_by(f64::total_cmp);
    }
    SweepInstance { spec, m, lambda }
}

/// Lemma sweeps: per-rank ratio bounds on `ratio_instances` random profiles
/// and the flattening bound on `flatten_instances` sorted profiles.
pub fn lemma_suite(seed: u64, ratio_instances: usize, flatten_instances: usize) -> Result<Vec<CheckRow>> {
    let settings = QuadratureSettings::default();
    let mut rows = Vec::new();
    for idx in 0..ratio_instances {
        let inst = random_instance(seed, idx as u64, 8, false);
        let checks =
            check_sigma_ratio_bound(&inst.lambda, inst.m, &inst.spec, &settings, SWEEP_SLACK)
                .map_err(|e| anyhow::anyhow!("rank-ratio sweep instance {idx}: {e}"))?;
        for c in checks {
            rows.push(CheckRow {
                check: "rank_ratio_bound",
                instance_id: format!("{idx}"),
                i: c.arm,
                lhs: c.lhs,
                rhs: c.rhs,
                ok: c.ok,
                err_estimate: c.err_estimate,
            });
        }
    }
    for idx in 0..flatten_instances {
        let inst = random_instance(seed.wrapping_add(1), idx as u64, 8, true);
        for arm in 0..inst.lambda.len() {
            let c = check_lambda_star_bound(
                &inst.lambda,
                arm,
                inst.m,
                &inst.spec,
                &settings,
                SWEEP_SLACK,
            )
            .map_err(|e| anyhow::anyhow!("flattening sweep instance {idx} arm {arm}: {e}"))?;
            rows.push(CheckRow {
                check: "flattening_bound",
                instance_id: format!("{idx}"),
                i: arm,
                lhs: c.lhs,
                rhs: c.rhs,
                ok: c.ok,
                err_estimate: c.err_estimate,
            });
        }
    }
    Ok(rows)
}

/// An estimator-check instance: moderate offsets keep every selection
/// probability far enough from zero for a Monte Carlo mean to settle.
pub struct EstimatorInstance {
    pub spec: PerturbationSpec,
    pub m: usize,
    pub cum_loss: Vec<f64>,
    pub chosen: Action,
}

pub fn estimator_instance(seed: u64, idx: u64) -> EstimatorInstance {
    let mut rng = replication_rng(seed, idx);
    let d = 4 + rng.random_range(0..=4usize); // 4..=8
    let m = 1 + rng.random_range(0..d.min(4));
    let alpha = [1.5, 2.0][rng.random_range(0..2)];
    let spec = if idx % 2 == 0 {
        PerturbationSpec::frechet(alpha).unwrap()
    } else {
        PerturbationSpec::pareto(alpha).unwrap()
    };
    let cum_loss: Vec<f64> = (0..d).map(|_| rng.random::<f64>() * 0.8).collect();
    // chosen action: the most expensive arm plus the m−1 cheapest, so both
    // resampling branches are exercised whenever m < d
    let sigma = ascending_ranks(&cum_loss).unwrap();
    let by_rank = sigma.arms_by_rank();
    let mut picks: Vec<usize> = by_rank[..m - 1].to_vec();
    picks.push(by_rank[d - 1]);
    if m == d {
        picks = (0..d).collect();
    }
    let chosen = Action::new(picks, d).unwrap();
    EstimatorInstance { spec, m, cum_loss, chosen }
}

/// Unbiasedness spot check: Monte Carlo mean of ŵ⁻¹ against 1/φ_i from
/// quadrature for every chosen arm, both estimators, with cap events
/// reported as their own failing rows.
pub fn estimator_suite(seed: u64, instances: usize, calls: usize, cap: u64) -> Result<Vec<CheckRow>> {
    let settings = QuadratureSettings::default();
    let budget = ResamplingBudget::new(cap).map_err(|e| anyhow::anyhow!("{e}"))?;
    let tol = 0.02;
    let mut rows = Vec::new();
    for idx in 0..instances {
        let inst = estimator_instance(seed, idx as u64);
        let eta = 1.0;
        let profile = LambdaProfile::full(inst.cum_loss.clone(), inst.m)
            .map_err(|e| anyhow::anyhow!("{e}"))?;
        let sigma = ascending_ranks(&inst.cum_loss).unwrap();
        for estimator in [Estimator::Gr, Estimator::Cgr] {
            let mut rng = replication_rng(seed ^ 0xABCD, (idx * 2) as u64 + u64::from(estimator == Estimator::Cgr));
            let mut sums: Vec<f64> = vec![0.0; inst.chosen.m()];
            let mut capped = 0usize;
            for _ in 0..calls {
                let rep = match estimator {
                    Estimator::Gr => geometric_resample(
                        &inst.cum_loss, eta, &inst.chosen, &inst.spec, &mut rng, &budget,
                    ),
                    Estimator::Cgr => conditional_geometric_resample(
                        &inst.cum_loss, eta, &inst.chosen, &sigma, &inst.spec, &mut rng, &budget,
                    ),
                }
                .map_err(|e| anyhow::anyhow!("instance {idx}: {e}"))?;
                capped += usize::from(rep.capped);
                for (slot, &arm) in inst.chosen.indices().iter().enumerate() {
                    sums[slot] += rep.estimate_for(arm).expect("chosen arm");
                }
            }
            let check = match estimator {
                Estimator::Gr => "unbiasedness_gr",
                Estimator::Cgr => "unbiasedness_cgr",
            };
            for (slot, &arm) in inst.chosen.indices().iter().enumerate() {
                let w = phi_i(&profile, arm, &inst.spec, &settings)
                    .map_err(|e| anyhow::anyhow!("{e}"))?;
                let expect = 1.0 / w.value;
                let mean = sums[slot] / calls as f64;
                rows.push(CheckRow {
                    check,
                    instance_id: format!("{idx}"),
                    i: arm,
                    lhs: mean,
                    rhs: expect,
                    ok: capped == 0 && (mean - expect).abs() / expect <= tol,
                    err_estimate: w.abs_error,
                });
            }
            rows.push(CheckRow {
                check: "cap_events",
                instance_id: format!("{idx}-{estimator}"),
                i: 0,
                lhs: capped as f64,
                rhs: 0.0,
                ok: capped == 0,
                err_estimate: 0.0,
            });
        }
    }
    Ok(rows)
}

/// Counterexample suite: scan the integral ratio over λ_q0 ∈ [0,5] and test
/// for a significant rise, a significant fall, and a point above the value
/// at λ_q0 = λ_i.
pub fn counterexample_suite(step: f64) -> Result<(Vec<CheckRow>, Vec<ScanPoint>)> {
    let settings = QuadratureSettings::default();
    let points = counterexample_scan(0.0, 5.0, step, &settings)
        .map_err(|e| anyhow::anyhow!("counterexample scan: {e}"))?;
    let verdict = assess_scan(&points);
    let rows = vec![
        CheckRow {
            check: "counterexample_rise",
            instance_id: "scan".into(),
            i: 0,
            lhs: verdict.max_rise,
            rhs: verdict.noise_floor,
            ok: verdict.max_rise > verdict.noise_floor,
            err_estimate: verdict.noise_floor / 10.0,
        },
        CheckRow {
            check: "counterexample_fall",
            instance_id: "scan".into(),
            i: 0,
            lhs: verdict.max_fall,
            rhs: verdict.noise_floor,
            ok: verdict.max_fall > verdict.noise_floor,
            err_estimate: verdict.noise_floor / 10.0,
        },
        CheckRow {
            check: "counterexample_exceeds_baseline",
            instance_id: "scan".into(),
            i: 0,
            lhs: f64::from(u8::from(verdict.exceeds_value_at_lambda_i)),
            rhs: 1.0,
            ok: verdict.exceeds_value_at_lambda_i,
            err_estimate: verdict.noise_floor / 10.0,
        },
    ];
    Ok((rows, points))
}

pub fn scan_to_csv(points: &[ScanPoint]) -> String {
    let mut out = String::from("lambda_q0,ratio,err_estimate\n");
    for p in points {
        writeln!(out, "{},{},{}", p.lambda_q0, p.ratio, p.abs_error).expect("string write");
    }
    out
}

/// Penalty-side checks: the top-m sum bound, the order-statistic closed
/// form, and Fréchet-vs-Pareto order-statistic dominance.
pub fn penalty_suite(seed: u64, grid_trials: usize, os_trials: usize) -> Result<Vec<CheckRow>> {
    let mut rows = Vec::new();
    let mut rng = replication_rng(seed, 99);

    // top-m sums under both families against the closed-form bound
    for &alpha in &[1.5, 2.0, 3.0] {
        for &d in &[2usize, 4, 8, 16] {
            for m in [1, d / 2, d] {
                let m = m.max(1);
                for spec in [
                    PerturbationSpec::pareto(alpha).unwrap(),
                    PerturbationSpec::frechet(alpha).unwrap(),
                ] {
                    let mut acc = 0.0;
                    let mut buf = vec![0.0f64; d];
                    for _ in 0..grid_trials {
                        spec.fill(&mut buf, &mut rng);
                        buf.sort_unstable_by(|a, b| b.partial_cmp(a).unwrap());
                        acc += buf[..m].iter().sum::<f64>();
                    }
                    let mc = acc / grid_trials as f64;
                    let bound = penalty_bound(&spec, d, m).map_err(|e| anyhow::anyhow!("{e}"))?;
                    rows.push(CheckRow {
                        check: "penalty_top_m_bound",
                        instance_id: format!("{}-a{alpha}-d{d}-m{m}", spec.family()),
                        i: 0,
                        lhs: mc,
                        rhs: bound,
                        ok: mc <= bound,
                        err_estimate: 0.0,
                    });
                }
            }
        }
    }

    // order-statistic means: closed form against Monte Carlo (1% relative)
    for &(alpha, k, n) in &[(2.0, 1usize, 1usize), (2.0, 1, 3), (2.0, 5, 5), (2.0, 2, 5), (1.5, 1, 4)] {
        let spec = PerturbationSpec::pareto(alpha).unwrap();
        let mut acc = 0.0;
        let mut buf = vec![0.0f64; n];
        for _ in 0..os_trials {
            spec.fill(&mut buf, &mut rng);
            buf.sort_unstable_by(|a, b| b.partial_cmp(a).unwrap());
            acc += buf[k - 1];
        }
        let mc = acc / os_trials as f64;
        let formula = pareto_order_statistic_mean(alpha, k, n).map_err(|e| anyhow::anyhow!("{e}"))?;
        rows.push(CheckRow {
            check: "order_statistic_mean",
            instance_id: format!("a{alpha}-k{k}-n{n}"),
            i: k,
            lhs: mc,
            rhs: formula,
            ok: (mc - formula).abs() / formula <= 0.01,
            err_estimate: formula * 0.01,
        });
    }

    // dominance: E[Fréchet k-th largest] ≤ E[Pareto k-th largest] + 1 (+3 SE)
    for &alpha in &[1.5, 2.0, 3.0] {
        for &(k, n) in &[(1usize, 1usize), (1, 3), (2, 5), (5, 5), (3, 8)] {
            let fre = PerturbationSpec::frechet(alpha).unwrap();
            let par = PerturbationSpec::pareto(alpha).unwrap();
            let trials = os_trials / 2;
            let mut buf = vec![0.0f64; n];
            let mut stats = |spec: &PerturbationSpec, rng: &mut dyn rand::RngCore| {
                let mut acc = 0.0;
                let mut acc2 = 0.0;
                for _ in 0..trials {
                    spec.fill(&mut buf, rng);
                    buf.sort_unstable_by(|a, b| b.partial_cmp(a).unwrap());
                    let v = buf[k - 1];
                    acc += v;
                    acc2 += v * v;
                }
                let mean = acc / trials as f64;
                let var = (acc2 / trials as f64 - mean * mean).max(0.0);
                (mean, (var / trials as f64).sqrt())
            };
            let (mf, se_f) = stats(&fre, &mut rng);
            let (mp, se_p) = stats(&par, &mut rng);
            let se = (se_f * se_f + se_p * se_p).sqrt();
            rows.push(CheckRow {
                check: "frechet_pareto_dominance",
                instance_id: format!("a{alpha}-k{k}-n{n}"),
                i: k,
                lhs: mf,
                rhs: mp + 1.0 + 3.0 * se,
                ok: mf <= mp + 1.0 + 3.0 * se,
                err_estimate: se,
            });
        }
    }
    Ok(rows)
}
