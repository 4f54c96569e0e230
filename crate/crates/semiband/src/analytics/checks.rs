//! Numeric verification of the stability analysis.
//!
//! Two inequalities carry the regret bound and are checked here by quadrature
//! on randomized profiles: the flattening bound that caps J_i/φ_i by a
//! maximum over equalized sub-profiles, and the per-rank ratio bound
//!
//!   J_i/φ_i ≤ ((σ_i∧m + 1/α)/((σ_i−m+1)∨1))^{1/α}          (Fréchet)
//!   J_i/φ_i ≤ (2α/(α+1)) ((σ_i∧m + 1/α)/σ_i)^{1/α}          (Pareto)
//!
//! A failure in either sweep is a release blocker. The per-round and summed
//! stability constants that feed the learning-rate formulas live here too.

use crate::analytics::kernel::{j_i, j_i_theta, phi_i, phi_i_theta, KernelError, LambdaProfile};
use crate::analytics::quad::QuadratureSettings;
use crate::perturbation::{Family, ParamError, PerturbationSpec};
use crate::select::ascending_ranks;

/// One verified inequality instance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RatioCheck {
    pub arm: usize,
    pub lhs: f64,
    pub rhs: f64,
    pub ok: bool,
    pub err_estimate: f64,
}

/// Closed-form bound on J_i/φ_i for an arm of ascending rank σ.
pub fn ratio_bound(spec: &PerturbationSpec, m: usize, sigma: usize) -> f64 {
    let a = spec.alpha();
    let inv_a = 1.0 / a;
    let top = (sigma.min(m)) as f64 + inv_a;
    match spec.family() {
        Family::Frechet => {
            let bottom = (sigma as isize - m as isize + 1).max(1) as f64;
            (top / bottom).powf(inv_a)
        }
        Family::Pareto => 2.0 * a / (a + 1.0) * (top / sigma as f64).powf(inv_a),
    }
}

/// Per-round ratio check on the full arm set: for every arm, J_i/φ_i against
/// the closed-form rank bound, with ranks taken from the profile itself.
pub fn check_sigma_ratio_bound(
    lambda: &[f64],
    m: usize,
    spec: &PerturbationSpec,
    settings: &QuadratureSettings,
    slack: f64,
) -> Result<Vec<RatioCheck>, KernelError> {
    let profile = LambdaProfile::full(lambda.to_vec(), m)?;
    let ranks = ascending_ranks(lambda)
        .map_err(|e| KernelError::InvalidProfile(e.to_string()))?;
    let mut out = Vec::with_capacity(lambda.len());
    for arm in 0..lambda.len() {
        let num = j_i(&profile, arm, spec, settings)?;
        let den = phi_i(&profile, arm, spec, settings)?;
        let lhs = num.value / den.value;
        let err = ratio_error(num.value, num.abs_error, den.value, den.abs_error);
        let rhs = ratio_bound(spec, m, ranks.rank_of(arm));
        out.push(RatioCheck {
            arm,
            lhs,
            rhs,
            ok: lhs <= rhs + slack,
            err_estimate: err,
        });
    }
    Ok(out)
}

/// Flattening check for one arm of a profile sorted in ascending order
/// (so the arm's rank is `arm + 1`): J_i/φ_i on the full set against the
/// maximum of per-rank ratios on the flattened profile λ*, where every
/// offset below λ_i is raised to λ_i and the candidate subsets are
/// ℬ_{i,w} = {w+1, …, i} for w ∈ {0} ∪ [(m∧i)−1], θ ∈ [(m∧i)−w].
pub fn check_lambda_star_bound(
    lambda_sorted: &[f64],
    arm: usize,
    m: usize,
    spec: &PerturbationSpec,
    settings: &QuadratureSettings,
    slack: f64,
) -> Result<RatioCheck, KernelError> {
    if lambda_sorted.windows(2).any(|w| w[0] > w[1]) {
        return Err(KernelError::InvalidProfile(
            "flattening check requires lambda sorted ascending".into(),
        ));
    }
    let d = lambda_sorted.len();
    if arm >= d {
        return Err(KernelError::ArmNotInSubset { arm });
    }
    let profile = LambdaProfile::full(lambda_sorted.to_vec(), m)?;
    let num = j_i(&profile, arm, spec, settings)?;
    let den = phi_i(&profile, arm, spec, settings)?;
    let lhs = num.value / den.value;
    let mut err = ratio_error(num.value, num.abs_error, den.value, den.abs_error);

    // λ*: raise every offset below this arm's to λ_i
    let mut flattened = lambda_sorted.to_vec();
    for v in flattened.iter_mut().take(arm) {
        *v = lambda_sorted[arm];
    }
    let sigma = arm + 1; // 1-based rank in the sorted profile
    let cap = m.min(sigma);
    let mut rhs = f64::NEG_INFINITY;
    for w in 0..cap {
        // ℬ_{i,w} = {w+1, …, i} in 1-based arm labels
        let subset: Vec<usize> = (w..=arm).collect();
        let sub_budget = subset.len().min(cap - w);
        let sub = LambdaProfile::with_subset(flattened.clone(), subset, sub_budget)?;
        for theta in 1..=(cap - w) {
            let n = j_i_theta(&sub, arm, theta, spec, settings)?;
            let p = phi_i_theta(&sub, arm, theta, spec, settings)?;
            let candidate = n.value / p.value;
            if candidate > rhs {
                rhs = candidate;
            }
            err = err.max(ratio_error(n.value, n.abs_error, p.value, p.abs_error));
        }
    }
    Ok(RatioCheck {
        arm,
        lhs,
        rhs,
        ok: lhs <= rhs + slack,
        err_estimate: err,
    })
}

fn ratio_error(num: f64, num_err: f64, den: f64, den_err: f64) -> f64 {
    if den == 0.0 {
        return f64::INFINITY;
    }
    (num / den).abs() * (num_err / num.abs().max(f64::MIN_POSITIVE) + den_err / den.abs())
}

/// Summed stability constant (the η-free factor of the stability term):
///
///   Fréchet: 2(α+1)(m+1/α)^{1/α} (m + α/(α−1)(d−m+1)^{1−1/α})
///   Pareto:  4α²/(α−1) (m+1/α)^{1/α} d^{1−1/α}
pub fn stability_constant(spec: &PerturbationSpec, m: usize, d: usize) -> Result<f64, ParamError> {
    if m < 1 || m > d {
        return Err(ParamError::BudgetOutOfRange { m, d });
    }
    let a = spec.alpha();
    let inv_a = 1.0 / a;
    let mf = m as f64;
    let df = d as f64;
    Ok(match spec.family() {
        Family::Frechet => {
            2.0 * (a + 1.0)
                * (mf + inv_a).powf(inv_a)
                * (mf + a / (a - 1.0) * (df - mf + 1.0).powf(1.0 - inv_a))
        }
        Family::Pareto => {
            4.0 * a * a / (a - 1.0) * (mf + inv_a).powf(inv_a) * df.powf(1.0 - inv_a)
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::policy::per_arm_stability_bound;
    use crate::replication_rng;
    use crate::special::beta;
    use rand::Rng;

    fn settings() -> QuadratureSettings {
        QuadratureSettings::default()
    }

    #[test]
    fn ratio_bound_examples() {
        let fre = PerturbationSpec::frechet(2.0).unwrap();
        let par = PerturbationSpec::pareto(2.0).unwrap();
        // rank 1, m=1: Fréchet bound (1 + 1/2)^{1/2}
        assert!((ratio_bound(&fre, 1, 1) - 1.5f64.sqrt()).abs() < 1e-12);
        // Pareto, m=1, d=3 equal profile bound at rank σ: (4/3)(1.5/σ)^{1/2}
        for sigma in 1..=3 {
            let expect = 4.0 / 3.0 * (1.5 / sigma as f64).sqrt();
            assert!((ratio_bound(&par, 1, sigma) - expect).abs() < 1e-12);
        }
    }

    #[test]
    fn sigma_ratio_bound_on_equal_profile() {
        let par = PerturbationSpec::pareto(2.0).unwrap();
        let checks = check_sigma_ratio_bound(&[0.4, 0.4, 0.4], 1, &par, &settings(), 1e-6).unwrap();
        assert!(checks.iter().all(|c| c.ok), "{checks:?}");
    }

    #[test]
    fn sigma_ratio_bound_randomized_spot() {
        let mut rng = replication_rng(21, 0);
        for trial in 0..8 {
            let d = 3 + (trial % 4);
            let m = 1 + trial % 3.min(d - 1);
            let lambda: Vec<f64> = (0..d).map(|_| rng.random::<f64>() * 2.0).collect();
            for spec in [
                PerturbationSpec::frechet(2.0).unwrap(),
                PerturbationSpec::pareto(1.5).unwrap(),
            ] {
                let checks =
                    check_sigma_ratio_bound(&lambda, m, &spec, &settings(), 1e-6).unwrap();
                for c in &checks {
                    assert!(c.ok, "trial={trial} {spec:?} {c:?} lambda={lambda:?}");
                }
            }
        }
    }

    #[test]
    fn lambda_star_bound_examples() {
        let fre = PerturbationSpec::frechet(2.0).unwrap();
        // first arm of a sorted profile: λ* = λ and ℬ_{1,0} = {1}
        let c = check_lambda_star_bound(&[0.2, 0.8, 1.5], 0, 2, &fre, &settings(), 1e-6).unwrap();
        assert!(c.ok, "{c:?}");
        // equal profile: LHS equals one of the RHS candidates (w = 0 family)
        let par = PerturbationSpec::pareto(2.0).unwrap();
        let c = check_lambda_star_bound(&[0.6; 4], 2, 2, &par, &settings(), 1e-6).unwrap();
        assert!(c.ok && (c.rhs - c.lhs) > -1e-6, "{c:?}");
    }

    #[test]
    fn lambda_star_bound_randomized_spot() {
        let mut rng = replication_rng(22, 0);
        for trial in 0..6 {
            let d = 3 + (trial % 3);
            let m = 1 + trial % d.min(3);
            let mut lambda: Vec<f64> = (0..d).map(|_| rng.random::<f64>() * 2.5).collect();
            lambda.sort_by(f64::total_cmp);
            for spec in [
                PerturbationSpec::frechet(2.0).unwrap(),
                PerturbationSpec::pareto(2.0).unwrap(),
            ] {
                for arm in 0..d {
                    let c = check_lambda_star_bound(&lambda, arm, m, &spec, &settings(), 1e-6)
                        .unwrap();
                    assert!(c.ok, "trial={trial} arm={arm} {spec:?} {c:?} λ={lambda:?}");
                }
            }
        }
    }

    #[test]
    fn beta_ratio_closed_form_at_equal_profiles() {
        // On an equalized subset the Pareto J/φ ratio per rank collapses to
        // B(θ+1/α, n+1−θ)/B(θ, n+1−θ).
        let spec = PerturbationSpec::pareto(2.0).unwrap();
        let inv_a = 0.5;
        for n in [2usize, 4, 6] {
            let profile = LambdaProfile::full(vec![0.7; n], 1).unwrap();
            for theta in 1..=n {
                let j = j_i_theta(&profile, 0, theta, &spec, &settings()).unwrap();
                let p = phi_i_theta(&profile, 0, theta, &spec, &settings()).unwrap();
                let quad_ratio = j.value / p.value;
                let closed = beta(theta as f64 + inv_a, (n + 1 - theta) as f64)
                    / beta(theta as f64, (n + 1 - theta) as f64);
                assert!(
                    (quad_ratio - closed).abs() < 1e-6,
                    "n={n} θ={theta}: quad={quad_ratio} closed={closed}"
                );
            }
        }
    }

    #[test]
    fn stability_constant_values_and_scaling() {
        let par = PerturbationSpec::pareto(2.0).unwrap();
        let v = stability_constant(&par, 1, 1).unwrap();
        assert!((v - 16.0 * 1.5f64.sqrt()).abs() < 1e-12);
        // d^{1−1/α} scaling
        let a = stability_constant(&par, 1, 100).unwrap();
        let b = stability_constant(&par, 1, 400).unwrap();
        assert!((b / a - 2.0).abs() < 1e-12);
        assert!(stability_constant(&par, 3, 2).is_err());
    }

    #[test]
    fn per_arm_sum_below_stability_constant() {
        for &alpha in &[1.5, 2.0, 3.0] {
            for &(m, d) in &[(1usize, 1usize), (1, 8), (2, 8), (4, 16), (8, 64)] {
                for spec in [
                    PerturbationSpec::frechet(alpha).unwrap(),
                    PerturbationSpec::pareto(alpha).unwrap(),
                ] {
                    let sum: f64 = (1..=d)
                        .map(|sigma| per_arm_stability_bound(&spec, m, sigma))
                        .sum();
                    let cap = stability_constant(&spec, m, d).unwrap();
                    assert!(
                        sum <= cap * (1.0 + 1e-12),
                        "{spec:?} m={m} d={d}: sum={sum} cap={cap}"
                    );
                }
            }
        }
    }
}
