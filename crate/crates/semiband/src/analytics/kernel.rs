//! Exact selection-probability kernels.
//!
//! For a loss-offset profile λ and base-arm set ℬ, the probability that arm
//! i's perturbed score ranks θ-th among ℬ is
//!
//!   φ_{i,θ}(λ) = ∫ P[exactly θ−1 arms j ∈ ℬ∖{i} have r_j − λ_j > z] dF(z+λ_i),
//!
//! and J_{i,θ} is the same integral carrying an extra 1/(z+λ_i) factor. Both
//! are computed by substituting u = F(z+λ_i), which maps the integral to
//! (0,1), absorbs the density factor, and handles the heavy tail and the
//! Fréchet z→0 endpoint in one stroke. The inner sum over rank patterns is a
//! Poisson-binomial coefficient obtained by dynamic programming rather than
//! the exponential subset enumeration in the defining formula.
//!
//! These kernels are the oracle layer: the live policy never evaluates them.

use crate::analytics::quad::{integrate_segmented, Estimate, QuadratureError, QuadratureSettings};
use crate::perturbation::PerturbationSpec;
use rand::Rng;
use std::fmt;

/// Exact kernels are restricted to small arm sets; beyond this Monte Carlo
/// is the intended tool.
pub const MAX_EXACT_SUBSET: usize = 12;

/// Errors from kernel evaluation.
#[derive(Debug, Clone, PartialEq)]
pub enum KernelError {
    InvalidProfile(String),
    ArmNotInSubset { arm: usize },
    ThetaOutOfRange { theta: usize, len: usize },
    SubsetTooLarge { len: usize },
    /// Quadrature ran out of budget; carries the achieved estimate.
    NonConvergent { context: &'static str, achieved: Estimate, subdivisions: usize },
}

impl fmt::Display for KernelError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            KernelError::InvalidProfile(msg) => write!(f, "invalid profile: {msg}"),
            KernelError::ArmNotInSubset { arm } => write!(f, "arm {arm} not in the subset"),
            KernelError::ThetaOutOfRange { theta, len } => {
                write!(f, "theta={theta} out of range for subset of size {len}")
            }
            KernelError::SubsetTooLarge { len } => {
                write!(f, "subset of {len} arms exceeds the exact-kernel cap {MAX_EXACT_SUBSET}")
            }
            KernelError::NonConvergent { context, achieved, subdivisions } => write!(
                f,
                "{context}: quadrature stalled after {subdivisions} subdivisions \
                 (value={}, error={})",
                achieved.value, achieved.abs_error
            ),
        }
    }
}

impl std::error::Error for KernelError {}

fn lift(context: &'static str, e: QuadratureError) -> KernelError {
    KernelError::NonConvergent {
        context,
        achieved: e.achieved,
        subdivisions: e.subdivisions,
    }
}

/// A loss-offset profile λ = ηL̂ restricted to a base-arm subset ℬ with a
/// selection budget m̃ ≤ |ℬ|.
#[derive(Debug, Clone, PartialEq)]
pub struct LambdaProfile {
    lambda: Vec<f64>,
    subset: Vec<usize>,
    budget: usize,
}

impl LambdaProfile {
    /// Profile over the full arm set [d].
    pub fn full(lambda: Vec<f64>, budget: usize) -> Result<Self, KernelError> {
        let d = lambda.len();
        Self::with_subset(lambda, (0..d).collect(), budget)
    }

    /// Profile restricted to `subset` ⊆ [d].
    pub fn with_subset(
        lambda: Vec<f64>,
        mut subset: Vec<usize>,
        budget: usize,
    ) -> Result<Self, KernelError> {
        if lambda.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(KernelError::InvalidProfile(
                "lambda entries must be finite and >= 0".into(),
            ));
        }
        subset.sort_unstable();
        subset.dedup();
        if subset.is_empty() {
            return Err(KernelError::InvalidProfile("subset must be non-empty".into()));
        }
        if *subset.last().unwrap() >= lambda.len() {
            return Err(KernelError::InvalidProfile(format!(
                "subset index {} out of range for d={}",
                subset.last().unwrap(),
                lambda.len()
            )));
        }
        if budget < 1 || budget > subset.len() {
            return Err(KernelError::InvalidProfile(format!(
                "budget must satisfy 1 <= m <= |subset|, got m={budget}, |subset|={}",
                subset.len()
            )));
        }
        Ok(Self { lambda, subset, budget })
    }

    pub fn lambda(&self) -> &[f64] {
        &self.lambda
    }

    pub fn subset(&self) -> &[usize] {
        &self.subset
    }

    pub fn budget(&self) -> usize {
        self.budget
    }

    pub fn dim(&self) -> usize {
        self.lambda.len()
    }
}

/// Coefficients of Π_j ((1−p_j) + p_j x): entry k is the probability that
/// exactly k of the independent events with probabilities `probs` occur.
pub fn poisson_binomial_coefficients(probs: &[f64]) -> Vec<f64> {
    let mut coef = vec![0.0; probs.len() + 1];
    coef[0] = 1.0;
    for (j, &p) in probs.iter().enumerate() {
        let q = 1.0 - p;
        for k in (1..=j + 1).rev() {
            coef[k] = coef[k] * q + coef[k - 1] * p;
        }
        coef[0] *= q;
    }
    coef
}

/// Shared shape of the φ and J integrands after the u = F(z+λ_i) substitution.
struct RankIntegrand<'a> {
    spec: &'a PerturbationSpec,
    lambda_i: f64,
    others: Vec<f64>,
    theta: usize,
    with_reciprocal: bool,
}

impl RankIntegrand<'_> {
    #[inline]
    fn eval(&self, u: f64) -> f64 {
        if u <= 0.0 || u >= 1.0 {
            return 0.0;
        }
        let x = self.spec.inverse_cdf(u); // x = z + λ_i
        let n = self.others.len();
        debug_assert!(n < 16);
        let mut coef = [0.0f64; 16];
        coef[0] = 1.0;
        for (j, &lj) in self.others.iter().enumerate() {
            // P[r_j − λ_j > z] = 1 − F(z + λ_j)
            let p = 1.0 - self.spec.cdf(x - self.lambda_i + lj);
            let q = 1.0 - p;
            for k in (1..=j + 1).rev() {
                coef[k] = coef[k] * q + coef[k - 1] * p;
            }
            coef[0] *= q;
        }
        let c = coef[self.theta - 1];
        if self.with_reciprocal {
            c / x
        } else {
            c
        }
    }

    /// Segment boundaries in u where a shifted CDF factor enters its support;
    /// the integrand has a kink at each.
    fn split_points(&self) -> Vec<f64> {
        let nu = self.spec.support_start();
        let mut points = vec![0.0, 1.0];
        for &lj in &self.others {
            if lj < self.lambda_i {
                let u = self.spec.cdf(nu + self.lambda_i - lj);
                if u > 1e-14 && u < 1.0 - 1e-14 {
                    points.push(u);
                }
            }
        }
        points.sort_by(f64::total_cmp);
        points.dedup();
        points
    }
}

fn build_integrand<'a>(
    profile: &LambdaProfile,
    arm: usize,
    theta: usize,
    spec: &'a PerturbationSpec,
    with_reciprocal: bool,
) -> Result<RankIntegrand<'a>, KernelError> {
    let b = profile.subset();
    if b.len() > MAX_EXACT_SUBSET {
        return Err(KernelError::SubsetTooLarge { len: b.len() });
    }
    if !b.contains(&arm) {
        return Err(KernelError::ArmNotInSubset { arm });
    }
    if theta < 1 || theta > b.len() {
        return Err(KernelError::ThetaOutOfRange { theta, len: b.len() });
    }
    let lambda = profile.lambda();
    Ok(RankIntegrand {
        spec,
        lambda_i: lambda[arm],
        others: b.iter().filter(|&&j| j != arm).map(|&j| lambda[j]).collect(),
        theta,
        with_reciprocal,
    })
}

/// φ_{i,θ}: probability that arm `arm` ranks exactly θ-th within the subset.
pub fn phi_i_theta(
    profile: &LambdaProfile,
    arm: usize,
    theta: usize,
    spec: &PerturbationSpec,
    settings: &QuadratureSettings,
) -> Result<Estimate, KernelError> {
    let g = build_integrand(profile, arm, theta, spec, false)?;
    let pts = g.split_points();
    integrate_segmented(|u| g.eval(u), &pts, settings).map_err(|e| lift("phi_i_theta", e))
}

/// φ_i: probability that arm `arm` is selected, i.e. ranks within the budget.
pub fn phi_i(
    profile: &LambdaProfile,
    arm: usize,
    spec: &PerturbationSpec,
    settings: &QuadratureSettings,
) -> Result<Estimate, KernelError> {
    sum_over_theta(profile, arm, spec, settings, false)
}

/// J_{i,θ}: the φ integrand weighted by 1/(z+λ_i).
pub fn j_i_theta(
    profile: &LambdaProfile,
    arm: usize,
    theta: usize,
    spec: &PerturbationSpec,
    settings: &QuadratureSettings,
) -> Result<Estimate, KernelError> {
    let g = build_integrand(profile, arm, theta, spec, true)?;
    let pts = g.split_points();
    integrate_segmented(|u| g.eval(u), &pts, settings).map_err(|e| lift("j_i_theta", e))
}

/// J_i = Σ_{θ ≤ m̃} J_{i,θ}.
pub fn j_i(
    profile: &LambdaProfile,
    arm: usize,
    spec: &PerturbationSpec,
    settings: &QuadratureSettings,
) -> Result<Estimate, KernelError> {
    sum_over_theta(profile, arm, spec, settings, true)
}

fn sum_over_theta(
    profile: &LambdaProfile,
    arm: usize,
    spec: &PerturbationSpec,
    settings: &QuadratureSettings,
    with_reciprocal: bool,
) -> Result<Estimate, KernelError> {
    let mut value = 0.0;
    let mut abs_error = 0.0;
    for theta in 1..=profile.budget() {
        let g = build_integrand(profile, arm, theta, spec, with_reciprocal)?;
        let pts = g.split_points();
        let est = integrate_segmented(|u| g.eval(u), &pts, settings)
            .map_err(|e| lift(if with_reciprocal { "j_i" } else { "phi_i" }, e))?;
        value += est.value;
        abs_error += est.abs_error;
    }
    Ok(Estimate { value, abs_error })
}

/// Monte Carlo selection frequencies: entry i is the fraction of draws in
/// which arm i ranks within the budget among the subset (zero for arms
/// outside the subset). The oracle backing the quadrature in tests.
pub fn mc_selection_prob<R: Rng + ?Sized>(
    profile: &LambdaProfile,
    spec: &PerturbationSpec,
    n_draws: usize,
    rng: &mut R,
) -> Vec<f64> {
    let b = profile.subset();
    let lambda = profile.lambda();
    let mut hits = vec![0u64; b.len()];
    let mut shifted = vec![0.0f64; b.len()];
    for _ in 0..n_draws {
        for (slot, &j) in b.iter().enumerate() {
            shifted[slot] = spec.draw(rng) - lambda[j];
        }
        for slot in 0..b.len() {
            let mut rank = 1usize;
            for other in 0..b.len() {
                if other == slot {
                    continue;
                }
                // same tie rule as the selection oracle: lower index wins
                if shifted[other] > shifted[slot]
                    || (shifted[other] == shifted[slot] && b[other] < b[slot])
                {
                    rank += 1;
                }
            }
            if rank <= profile.budget() {
                hits[slot] += 1;
            }
        }
    }
    let mut freq = vec![0.0; profile.dim()];
    for (slot, &j) in b.iter().enumerate() {
        freq[j] = hits[slot] as f64 / n_draws as f64;
    }
    freq
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::replication_rng;

    fn settings() -> QuadratureSettings {
        QuadratureSettings::default()
    }

    #[test]
    fn profile_validation() {
        assert!(LambdaProfile::full(vec![0.0, -0.1], 1).is_err());
        assert!(LambdaProfile::full(vec![0.0, 0.1], 3).is_err());
        assert!(LambdaProfile::with_subset(vec![0.0, 0.1], vec![2], 1).is_err());
        assert!(LambdaProfile::with_subset(vec![0.0, 0.1], vec![], 1).is_err());
        let p = LambdaProfile::with_subset(vec![0.0, 0.1, 0.4], vec![2, 0], 2).unwrap();
        assert_eq!(p.subset(), &[0, 2]);
    }

    #[test]
    fn poisson_binomial_small_cases() {
        let c = poisson_binomial_coefficients(&[0.5, 0.5]);
        assert!((c[0] - 0.25).abs() < 1e-15);
        assert!((c[1] - 0.5).abs() < 1e-15);
        assert!((c[2] - 0.25).abs() < 1e-15);
        let c = poisson_binomial_coefficients(&[1.0, 0.0, 0.3]);
        assert!((c[0] - 0.0).abs() < 1e-15);
        assert!((c[1] - 0.7).abs() < 1e-15);
        assert!((c[2] - 0.3).abs() < 1e-15);
    }

    #[test]
    fn poisson_binomial_matches_brute_force() {
        // exact subset enumeration for |B|−1 events
        let probs = [0.1, 0.35, 0.62, 0.99, 0.5, 0.2, 0.77, 0.01, 0.444, 0.9, 0.3, 0.66];
        for n in 1..=probs.len() {
            let p = &probs[..n];
            let dp = poisson_binomial_coefficients(p);
            let mut brute = vec![0.0f64; n + 1];
            for mask in 0u32..(1 << n) {
                let mut prob = 1.0;
                for (j, &pj) in p.iter().enumerate() {
                    prob *= if mask >> j & 1 == 1 { pj } else { 1.0 - pj };
                }
                brute[mask.count_ones() as usize] += prob;
            }
            for k in 0..=n {
                assert!((dp[k] - brute[k]).abs() < 1e-12, "n={n} k={k}");
            }
        }
    }

    #[test]
    fn symmetric_two_arm_probability() {
        let spec = PerturbationSpec::pareto(2.0).unwrap();
        let profile = LambdaProfile::full(vec![0.0, 0.0], 1).unwrap();
        let est = phi_i_theta(&profile, 0, 1, &spec, &settings()).unwrap();
        assert!((est.value - 0.5).abs() < 1e-9, "{est:?}");
    }

    #[test]
    fn rank_probabilities_sum_to_one() {
        let spec = PerturbationSpec::frechet(1.7).unwrap();
        let profile =
            LambdaProfile::full(vec![0.3, 0.0, 1.4, 0.7, 0.05], 2).unwrap();
        for arm in 0..5 {
            let mut total = 0.0;
            for theta in 1..=5 {
                total += phi_i_theta(&profile, arm, theta, &spec, &settings()).unwrap().value;
            }
            assert!((total - 1.0).abs() < 1e-7, "arm={arm} total={total}");
        }
    }

    #[test]
    fn selection_probabilities_sum_to_budget() {
        let spec = PerturbationSpec::pareto(1.5).unwrap();
        let profile = LambdaProfile::full(vec![0.9, 0.0, 0.31, 2.2], 3).unwrap();
        let total: f64 = (0..4)
            .map(|arm| phi_i(&profile, arm, &spec, &settings()).unwrap().value)
            .sum();
        assert!((total - 3.0).abs() < 1e-7, "total={total}");
    }

    #[test]
    fn frozen_frechet_three_arm_values() {
        // Independent high-precision evaluation of the same integrals:
        // d=3, λ=(0, 0.5, 1.0), Fréchet α=2, arm 0.
        let spec = PerturbationSpec::frechet(2.0).unwrap();
        let profile = LambdaProfile::full(vec![0.0, 0.5, 1.0], 1).unwrap();
        let p1 = phi_i_theta(&profile, 0, 1, &spec, &settings()).unwrap();
        let p2 = phi_i_theta(&profile, 0, 2, &spec, &settings()).unwrap();
        let j1 = j_i_theta(&profile, 0, 1, &spec, &settings()).unwrap();
        assert!((p1.value - 0.587811515306156).abs() < 1e-9, "{}", p1.value);
        assert!((p2.value - 0.342249823204960).abs() < 1e-9, "{}", p2.value);
        assert!((j1.value - 0.431528057915165).abs() < 1e-9, "{}", j1.value);
    }

    #[test]
    fn quadrature_matches_monte_carlo() {
        let spec = PerturbationSpec::frechet(2.0).unwrap();
        let profile = LambdaProfile::full(vec![0.0, 0.5, 1.0], 1).unwrap();
        let mut rng = replication_rng(11, 0);
        let n = 400_000;
        let freq = mc_selection_prob(&profile, &spec, n, &mut rng);
        for arm in 0..3 {
            let exact = phi_i(&profile, arm, &spec, &settings()).unwrap().value;
            let sigma = (exact * (1.0 - exact) / n as f64).sqrt();
            assert!(
                (freq[arm] - exact).abs() < 3.5 * sigma + 1e-9,
                "arm={arm} freq={} exact={exact}",
                freq[arm]
            );
        }
    }

    #[test]
    fn subset_kernels_ignore_outside_arms() {
        let spec = PerturbationSpec::pareto(2.0).unwrap();
        // arm 3 has a huge offset but sits outside the subset: no effect
        let p1 = LambdaProfile::with_subset(vec![0.1, 0.6, 0.3, 9.9], vec![0, 1, 2], 2).unwrap();
        let p2 = LambdaProfile::with_subset(vec![0.1, 0.6, 0.3, 0.0], vec![0, 1, 2], 2).unwrap();
        for arm in [0, 1, 2] {
            let a = phi_i(&p1, arm, &spec, &settings()).unwrap().value;
            let b = phi_i(&p2, arm, &spec, &settings()).unwrap().value;
            assert!((a - b).abs() < 1e-10);
        }
        assert!(matches!(
            phi_i(&p1, 3, &spec, &settings()),
            Err(KernelError::ArmNotInSubset { arm: 3 })
        ));
    }

    #[test]
    fn full_budget_selects_everything() {
        let spec = PerturbationSpec::frechet(3.0).unwrap();
        let profile = LambdaProfile::full(vec![0.0, 2.0, 0.4], 3).unwrap();
        for arm in 0..3 {
            let est = phi_i(&profile, arm, &spec, &settings()).unwrap();
            assert!((est.value - 1.0).abs() < 1e-8);
        }
        let mut rng = replication_rng(12, 0);
        let freq = mc_selection_prob(&profile, &spec, 1000, &mut rng);
        assert!(freq.iter().all(|&f| (f - 1.0).abs() < 1e-12));
    }
}
