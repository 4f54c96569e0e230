//! Geometric resampling estimators for reciprocal selection probabilities.
//!
//! Semi-bandit feedback never reveals the marginal probability w_i that a
//! base-arm sits in the selected action, so the loss estimator needs an
//! unbiased stand-in for 1/w_i. Both estimators below repeat independent
//! perturbed selections until the arm of interest is re-selected; the trial
//! count is geometric with mean 1/w_i.
//!
//! - Plain geometric resampling (GR) redraws the full perturbation and waits
//!   for every chosen arm to reappear; its expected total trial count is at
//!   most d per round.
//! - Conditional geometric resampling (CGR) handles arms whose cumulative
//!   loss ranks σ_i above the budget m by conditioning each redraw on the
//!   necessary event that the arm's raw perturbation ranks within the top m
//!   of the arms at or below its loss rank. Conditioning is implemented by a
//!   rank-θ swap (θ uniform on [m]) of the shared redraw, and the estimate is
//!   rescaled by σ_i/m. Expected total trials drop to m(1 + log(d/m)).
//!
//! Per iteration the RNG stream is consumed in a fixed order: the d
//! perturbation draws, then (CGR only) the θ draw, so replays are
//! bit-identical.
//!
//! The loops terminate almost surely but not boundedly; a budget cap turns a
//! pathologically small w_i into a surfaced `capped` report instead of a
//! hang, and the caller decides whether to accept the truncated counts.

use crate::perturbation::PerturbationSpec;
use crate::select::{ascending_ranks, Action, RankProfile, TopMSelector};
use rand::Rng;
use std::fmt;

/// Errors from the resampling estimators.
#[derive(Debug, Clone, PartialEq)]
pub enum ResampleError {
    DimensionMismatch { expected: usize, got: usize },
    NonPositiveEta(f64),
    NonFiniteLoss { index: usize },
    /// The supplied rank profile does not rank the supplied losses.
    RankMismatch,
    /// Swap preconditions: σ_i > m and 1 ≤ θ ≤ m.
    BadSwap { sigma_i: usize, theta: usize, m: usize },
    BadBudget(u64),
}

impl fmt::Display for ResampleError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ResampleError::DimensionMismatch { expected, got } => {
                write!(f, "dimension mismatch: expected {expected}, got {got}")
            }
            ResampleError::NonPositiveEta(e) => write!(f, "learning rate must be > 0, got {e}"),
            ResampleError::NonFiniteLoss { index } => {
                write!(f, "non-finite cumulative loss at index {index}")
            }
            ResampleError::RankMismatch => {
                write!(f, "rank profile is not the ascending ranking of the losses")
            }
            ResampleError::BadSwap { sigma_i, theta, m } => write!(
                f,
                "swap requires sigma_i > m and 1 <= theta <= m, got sigma_i={sigma_i}, theta={theta}, m={m}"
            ),
            ResampleError::BadBudget(c) => write!(f, "budget cap must be >= 1, got {c}"),
        }
    }
}

impl std::error::Error for ResampleError {}

/// Hard cap on the number of global resampling iterations per call.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ResamplingBudget {
    cap: u64,
}

impl ResamplingBudget {
    pub const DEFAULT_CAP: u64 = 10_000_000;

    pub fn new(cap: u64) -> Result<Self, ResampleError> {
        if cap < 1 {
            return Err(ResampleError::BadBudget(cap));
        }
        Ok(Self { cap })
    }

    pub fn cap(&self) -> u64 {
        self.cap
    }
}

impl Default for ResamplingBudget {
    fn default() -> Self {
        Self { cap: Self::DEFAULT_CAP }
    }
}

/// Inverse-probability estimates for one round's chosen arms.
///
/// `total_rounds` follows the cost accounting of the resampling analysis:
/// the maximum trial count over the plainly resampled arms plus the sum of
/// trial counts of the conditionally resampled arms (for GR the second group
/// is empty, so it is simply the number of loop iterations).
#[derive(Debug, Clone, PartialEq)]
pub struct EstimatorReport {
    /// (arm, ŵ⁻¹) for each chosen arm, sorted by arm.
    pub inv_prob_estimates: Vec<(usize, f64)>,
    /// (arm, trial count M_i) for each chosen arm, sorted by arm.
    pub per_arm_counts: Vec<(usize, u64)>,
    /// Resampling cost of the round (see above).
    pub total_rounds: u64,
    /// True when the budget cap cut the loop short; estimates then come from
    /// the truncated counts.
    pub capped: bool,
}

impl EstimatorReport {
    pub fn estimate_for(&self, arm: usize) -> Option<f64> {
        self.inv_prob_estimates
            .binary_search_by_key(&arm, |&(a, _)| a)
            .ok()
            .map(|i| self.inv_prob_estimates[i].1)
    }

    pub fn count_for(&self, arm: usize) -> Option<u64> {
        self.per_arm_counts
            .binary_search_by_key(&arm, |&(a, _)| a)
            .ok()
            .map(|i| self.per_arm_counts[i].1)
    }
}

fn validate_common(
    cum_loss: &[f64],
    eta: f64,
    chosen: &Action,
) -> Result<(), ResampleError> {
    if chosen.d() != cum_loss.len() {
        return Err(ResampleError::DimensionMismatch {
            expected: chosen.d(),
            got: cum_loss.len(),
        });
    }
    if !(eta > 0.0 && eta.is_finite()) {
        return Err(ResampleError::NonPositiveEta(eta));
    }
    if let Some(i) = cum_loss.iter().position(|v| !v.is_finite()) {
        return Err(ResampleError::NonFiniteLoss { index: i });
    }
    Ok(())
}

/// Plain geometric resampling: redraw the perturbation and re-select until
/// every chosen arm has been re-selected once; ŵ⁻¹_i is arm i's trial count.
pub fn geometric_resample<R: Rng + ?Sized>(
    cum_loss: &[f64],
    eta: f64,
    chosen: &Action,
    spec: &PerturbationSpec,
    rng: &mut R,
    budget: &ResamplingBudget,
) -> Result<EstimatorReport, ResampleError> {
    validate_common(cum_loss, eta, chosen)?;
    let d = cum_loss.len();
    let m = chosen.m();
    let base: Vec<f64> = cum_loss.iter().map(|l| -eta * l).collect();
    let mut scores = vec![0.0f64; d];
    let mut selector = TopMSelector::new(d);
    let mut in_top = vec![false; d];

    let mut alive: Vec<usize> = chosen.indices().to_vec();
    let mut counts: Vec<(usize, u64)> = chosen.indices().iter().map(|&a| (a, 0)).collect();
    let mut iterations: u64 = 0;
    let mut capped = false;

    loop {
        iterations += 1;
        for &a in &alive {
            let slot = counts.binary_search_by_key(&a, |&(x, _)| x).unwrap();
            counts[slot].1 += 1;
        }
        for (j, s) in scores.iter_mut().enumerate() {
            *s = spec.draw(rng) + base[j];
        }
        let top = selector.top_m(&scores, m);
        for &t in top {
            in_top[t as usize] = true;
        }
        alive.retain(|&a| !in_top[a]);
        for &t in top {
            in_top[t as usize] = false;
        }
        if alive.is_empty() {
            break;
        }
        if iterations >= budget.cap() {
            capped = true;
            break;
        }
    }

    let estimates = counts.iter().map(|&(a, k)| (a, k as f64)).collect();
    Ok(EstimatorReport {
        inv_prob_estimates: estimates,
        per_arm_counts: counts,
        total_rounds: iterations,
        capped,
    })
}

/// Conditional geometric resampling.
///
/// Arms with σ_i ≤ m resample exactly as GR off the shared redraw. An arm
/// with σ_i > m tests membership on the redraw after swapping its entry with
/// the θ-th largest raw perturbation among the arms ranked at or below it,
/// which realizes a draw from the perturbation law conditioned on the
/// necessary selection event; its estimate is rescaled by σ_i/m.
pub fn conditional_geometric_resample<R: Rng + ?Sized>(
    cum_loss: &[f64],
    eta: f64,
    chosen: &Action,
    sigma: &RankProfile,
    spec: &PerturbationSpec,
    rng: &mut R,
    budget: &ResamplingBudget,
) -> Result<EstimatorReport, ResampleError> {
    validate_common(cum_loss, eta, chosen)?;
    let d = cum_loss.len();
    if sigma.d() != d {
        return Err(ResampleError::DimensionMismatch { expected: d, got: sigma.d() });
    }
    let expected = ascending_ranks(cum_loss).expect("validated finite");
    if expected.sigma() != sigma.sigma() {
        return Err(ResampleError::RankMismatch);
    }
    let m = chosen.m();
    let base: Vec<f64> = cum_loss.iter().map(|l| -eta * l).collect();
    let arms_by_rank = sigma.arms_by_rank();

    let mut plain_alive: Vec<usize> = Vec::new();
    let mut cond_alive: Vec<usize> = Vec::new();
    for &a in chosen.indices() {
        if sigma.rank_of(a) > m {
            cond_alive.push(a);
        } else {
            plain_alive.push(a);
        }
    }
    let is_conditional = |arm: usize| sigma.rank_of(arm) > m;

    let mut counts: Vec<(usize, u64)> = chosen.indices().iter().map(|&a| (a, 0)).collect();
    let mut scores = vec![0.0f64; d];
    let mut raw = vec![0.0f64; d];
    let mut selector = TopMSelector::new(d);
    let mut in_top = vec![false; d];
    let mut prefix_scratch: Vec<usize> = Vec::with_capacity(d);
    let mut iterations: u64 = 0;
    let mut capped = false;

    loop {
        iterations += 1;
        for &a in plain_alive.iter().chain(cond_alive.iter()) {
            let slot = counts.binary_search_by_key(&a, |&(x, _)| x).unwrap();
            counts[slot].1 += 1;
        }
        for j in 0..d {
            let r = spec.draw(rng);
            raw[j] = r;
            scores[j] = r + base[j];
        }
        let theta = rng.random_range(1..=m);

        if !plain_alive.is_empty() {
            let top = selector.top_m(&scores, m);
            for &t in top {
                in_top[t as usize] = true;
            }
            plain_alive.retain(|&a| !in_top[a]);
            for &t in top {
                in_top[t as usize] = false;
            }
        }

        cond_alive.retain(|&u| {
            let prefix_len = sigma.rank_of(u); // arms ranked at or below u
            prefix_scratch.clear();
            prefix_scratch.extend_from_slice(&arms_by_rank[..prefix_len]);
            let swap_with =
                crate::select::theta_th_largest_scratch(&raw, &mut prefix_scratch, theta);
            !swapped_membership(&raw, &scores, &base, u, swap_with, m)
        });

        if plain_alive.is_empty() && cond_alive.is_empty() {
            break;
        }
        if iterations >= budget.cap() {
            capped = true;
            break;
        }
    }

    let mut plain_max = 0u64;
    let mut cond_sum = 0u64;
    for &(a, k) in &counts {
        if is_conditional(a) {
            cond_sum += k;
        } else {
            plain_max = plain_max.max(k);
        }
    }
    let estimates = counts
        .iter()
        .map(|&(a, k)| {
            let scale = if is_conditional(a) {
                sigma.rank_of(a) as f64 / m as f64
            } else {
                1.0
            };
            (a, scale * k as f64)
        })
        .collect();
    Ok(EstimatorReport {
        inv_prob_estimates: estimates,
        per_arm_counts: counts,
        total_rounds: plain_max + cond_sum,
        capped,
    })
}

/// Is arm `u` in the top-m of the score vector after swapping the raw
/// perturbations at `u` and `swap_with`? Only the two touched entries differ
/// from `scores`, so a counting scan suffices.
#[inline]
fn swapped_membership(
    raw: &[f64],
    scores: &[f64],
    base: &[f64],
    u: usize,
    swap_with: usize,
    m: usize,
) -> bool {
    let su = raw[swap_with] + base[u];
    let mut ahead = 0usize;
    for (j, &sj) in scores.iter().enumerate() {
        if j == u || j == swap_with {
            continue;
        }
        if sj > su || (sj == su && j < u) {
            ahead += 1;
            if ahead >= m {
                return false;
            }
        }
    }
    if swap_with != u {
        let s_other = raw[u] + base[swap_with];
        if s_other > su || (s_other == su && swap_with < u) {
            ahead += 1;
        }
    }
    ahead < m
}

/// The swapped redraw used by CGR, exposed for statistical verification:
/// returns `r_prime` with entries `i` and the θ-th largest raw perturbation
/// among the arms ranked at or below `i` exchanged.
pub fn swap_conditioned_draw(
    r_prime: &[f64],
    i: usize,
    sigma: &RankProfile,
    theta: usize,
    m: usize,
) -> Result<Vec<f64>, ResampleError> {
    if sigma.d() != r_prime.len() {
        return Err(ResampleError::DimensionMismatch {
            expected: sigma.d(),
            got: r_prime.len(),
        });
    }
    let sigma_i = sigma.rank_of(i);
    if sigma_i <= m || theta < 1 || theta > m {
        return Err(ResampleError::BadSwap { sigma_i, theta, m });
    }
    let arms_by_rank = sigma.arms_by_rank();
    let mut prefix: Vec<usize> = arms_by_rank[..sigma_i].to_vec();
    let swap_with = crate::select::theta_th_largest_scratch(r_prime, &mut prefix, theta);
    let mut out = r_prime.to_vec();
    out.swap(i, swap_with);
    Ok(out)
}
