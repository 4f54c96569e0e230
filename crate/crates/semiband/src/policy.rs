//! The FTPL decision loop and the closed-form rate/bound evaluators.
//!
//! Each round the policy perturbs the cumulative estimated losses L̂ with a
//! fresh heavy-tailed draw r, plays the m arms maximizing r − ηL̂, observes
//! the chosen arms' losses only, runs the configured resampling estimator,
//! and adds ℓ_i·ŵ⁻¹_i to L̂ on the chosen coordinates. The selection
//! probabilities w never appear in the loop; that is the point of the
//! resampling estimators.
//!
//! The tuned learning rates and the resulting regret ceilings (penalty and
//! stability constants and their 2√(S·P·T) combination) are evaluated
//! exactly as printed, with the Pareto rate algebraically identical to the
//! √(P/(S·T)) form (asserted in tests).

use crate::perturbation::{Family, ParamError, PerturbationSpec};
use crate::resample::{
    conditional_geometric_resample, geometric_resample, EstimatorReport, ResampleError,
    ResamplingBudget,
};
use crate::select::{ascending_ranks, select_top_m, Action};
use crate::special::ln_gamma;
use rand::Rng;
use std::fmt;

/// Which inverse-probability estimator the policy runs after each selection.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Estimator {
    Gr,
    Cgr,
}

impl fmt::Display for Estimator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Estimator::Gr => write!(f, "gr"),
            Estimator::Cgr => write!(f, "cgr"),
        }
    }
}

/// Learning-rate choice: the horizon-tuned closed form or a fixed constant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LearningRate {
    Theoretical,
    Fixed(f64),
}

/// Errors from policy construction or a round.
#[derive(Debug, Clone, PartialEq)]
pub enum PolicyError {
    BadDimensions { m: usize, d: usize },
    BadHorizon,
    BadLearningRate(f64),
    /// Semi-bandit feedback must return one loss per chosen arm.
    WrongLossCount { expected: usize, got: usize },
    /// Losses live in [0,1].
    LossOutOfRange { arm: usize, value: f64 },
    Resample(ResampleError),
}

impl fmt::Display for PolicyError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PolicyError::BadDimensions { m, d } => {
                write!(f, "need 1 <= m <= d, got m={m}, d={d}")
            }
            PolicyError::BadHorizon => write!(f, "horizon must be >= 1"),
            PolicyError::BadLearningRate(e) => {
                write!(f, "learning rate must be finite and > 0, got {e}")
            }
            PolicyError::WrongLossCount { expected, got } => {
                write!(f, "loss callback returned {got} losses for {expected} chosen arms")
            }
            PolicyError::LossOutOfRange { arm, value } => {
                write!(f, "loss {value} for arm {arm} outside [0,1]")
            }
            PolicyError::Resample(e) => write!(f, "resampling failed: {e}"),
        }
    }
}

impl std::error::Error for PolicyError {}

impl From<ResampleError> for PolicyError {
    fn from(e: ResampleError) -> Self {
        PolicyError::Resample(e)
    }
}

/// Horizon-tuned learning rate, exactly as printed:
///
///   Fréchet: √( ((α/(α−1) m^{1−1/α} + Γ(1−1/α))(d+1)^{1/α} + m)
///              / (2(α+1)(m+1/α)^{1/α}(m + α/(α−1)(d−m+1)^{1−1/α}) T) )
///   Pareto:  √( (α m^{1−1/α} + (α−1)Γ(1−1/α))(d+1)^{1/α}
///              / (4α²(m+1/α)^{1/α} d^{1−1/α} T) )
pub fn theoretical_learning_rate(
    spec: &PerturbationSpec,
    m: usize,
    d: usize,
    horizon: usize,
) -> Result<f64, ParamError> {
    if m < 1 || m > d {
        return Err(ParamError::BudgetOutOfRange { m, d });
    }
    let a = spec.alpha();
    let inv_a = 1.0 / a;
    let (mf, df, t) = (m as f64, d as f64, horizon.max(1) as f64);
    let gamma_term = ln_gamma(1.0 - inv_a).exp();
    Ok(match spec.family() {
        Family::Frechet => {
            let num = (a / (a - 1.0) * mf.powf(1.0 - inv_a) + gamma_term)
                * (df + 1.0).powf(inv_a)
                + mf;
            let den = 2.0
                * (a + 1.0)
                * (mf + inv_a).powf(inv_a)
                * (mf + a / (a - 1.0) * (df - mf + 1.0).powf(1.0 - inv_a))
                * t;
            (num / den).sqrt()
        }
        Family::Pareto => {
            let num = (a * mf.powf(1.0 - inv_a) + (a - 1.0) * gamma_term) * (df + 1.0).powf(inv_a);
            let den = 4.0 * a * a * (mf + inv_a).powf(inv_a) * df.powf(1.0 - inv_a) * t;
            (num / den).sqrt()
        }
    })
}

/// The adversarial regret ceiling and its two ingredients.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegretBound {
    /// 2 √(stability_const · penalty_const · T).
    pub total: f64,
    /// Penalty numerator: the bound on E[a₁ᵀr₁] (with the +m term only for
    /// Fréchet, matching the two cases of the regret decomposition).
    pub penalty_const: f64,
    /// Summed per-round stability constant (η-free).
    pub stability_const: f64,
}

/// Evaluate the regret ceiling for the tuned learning rate.
pub fn theoretical_regret_bound(
    spec: &PerturbationSpec,
    m: usize,
    d: usize,
    horizon: usize,
) -> Result<RegretBound, ParamError> {
    let penalty = crate::perturbation::penalty_bound(spec, d, m)?;
    let stability = crate::analytics::stability_constant(spec, m, d)?;
    let t = horizon.max(1) as f64;
    Ok(RegretBound {
        total: 2.0 * (stability * penalty * t).sqrt(),
        penalty_const: penalty,
        stability_const: stability,
    })
}

/// Per-round, per-arm stability constant (η-free):
///
///   Fréchet: 2(α+1) ((σ∧m + 1/α)/((σ−m+1)∨1))^{1/α}
///   Pareto:  4α ((σ∧m + 1/α)/σ)^{1/α}
pub fn per_arm_stability_bound(spec: &PerturbationSpec, m: usize, sigma_i: usize) -> f64 {
    let a = spec.alpha();
    let inv_a = 1.0 / a;
    let top = sigma_i.min(m) as f64 + inv_a;
    match spec.family() {
        Family::Frechet => {
            let bottom = (sigma_i as isize - m as isize + 1).max(1) as f64;
            2.0 * (a + 1.0) * (top / bottom).powf(inv_a)
        }
        Family::Pareto => 4.0 * a * (top / sigma_i as f64).powf(inv_a),
    }
}

/// One round's outputs.
#[derive(Debug, Clone, PartialEq)]
pub struct RoundOutcome {
    pub action: Action,
    /// (arm, observed loss) for chosen arms, sorted by arm.
    pub observed_losses: Vec<(usize, f64)>,
    pub estimate: EstimatorReport,
    /// Sparse ℓ̂: (arm, ℓ_i·ŵ⁻¹_i) for chosen arms, zero elsewhere.
    pub est_loss: Vec<(usize, f64)>,
}

/// FTPL policy state: cumulative estimated losses plus the fixed round setup.
#[derive(Debug, Clone)]
pub struct PolicyState {
    d: usize,
    m: usize,
    eta: f64,
    spec: PerturbationSpec,
    estimator: Estimator,
    budget: ResamplingBudget,
    round: usize,
    cum_est_loss: Vec<f64>,
}

impl PolicyState {
    pub fn new(
        d: usize,
        m: usize,
        spec: PerturbationSpec,
        estimator: Estimator,
        rate: LearningRate,
        horizon: usize,
        budget: ResamplingBudget,
    ) -> Result<Self, PolicyError> {
        if m < 1 || m > d {
            return Err(PolicyError::BadDimensions { m, d });
        }
        if horizon < 1 {
            return Err(PolicyError::BadHorizon);
        }
        let eta = match rate {
            LearningRate::Fixed(e) => e,
            LearningRate::Theoretical => theoretical_learning_rate(&spec, m, d, horizon)
                .expect("dimensions validated"),
        };
        if !(eta > 0.0 && eta.is_finite()) {
            return Err(PolicyError::BadLearningRate(eta));
        }
        Ok(Self {
            d,
            m,
            eta,
            spec,
            estimator,
            budget,
            round: 0,
            cum_est_loss: vec![0.0; d],
        })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    pub fn round(&self) -> usize {
        self.round
    }

    pub fn estimator(&self) -> Estimator {
        self.estimator
    }

    pub fn cum_est_loss(&self) -> &[f64] {
        &self.cum_est_loss
    }

    /// Play one round. `observe` receives the chosen action and must return
    /// the losses of exactly the chosen arms, in the order of
    /// `action.indices()` — the policy never sees the other coordinates.
    pub fn play_round<F, R>(&mut self, observe: F, rng: &mut R) -> Result<RoundOutcome, PolicyError>
    where
        F: FnOnce(&Action) -> Vec<f64>,
        R: Rng + ?Sized,
    {
        // perturb and select: top-m of r − ηL̂
        let mut scores = vec![0.0f64; self.d];
        for (j, s) in scores.iter_mut().enumerate() {
            *s = self.spec.draw(rng) - self.eta * self.cum_est_loss[j];
        }
        let action = select_top_m(&scores, self.m).expect("finite scores by construction");

        let losses = observe(&action);
        if losses.len() != action.m() {
            return Err(PolicyError::WrongLossCount {
                expected: action.m(),
                got: losses.len(),
            });
        }
        for (&arm, &l) in action.indices().iter().zip(&losses) {
            if !(l.is_finite() && (0.0..=1.0).contains(&l)) {
                return Err(PolicyError::LossOutOfRange { arm, value: l });
            }
        }

        let estimate = match self.estimator {
            Estimator::Gr => geometric_resample(
                &self.cum_est_loss,
                self.eta,
                &action,
                &self.spec,
                rng,
                &self.budget,
            )?,
            Estimator::Cgr => {
                let sigma = ascending_ranks(&self.cum_est_loss).expect("finite cumulative losses");
                conditional_geometric_resample(
                    &self.cum_est_loss,
                    self.eta,
                    &action,
                    &sigma,
                    &self.spec,
                    rng,
                    &self.budget,
                )?
            }
        };

        let mut est_loss = Vec::with_capacity(action.m());
        for (&arm, &l) in action.indices().iter().zip(&losses) {
            let inv_w = estimate.estimate_for(arm).expect("chosen arm has an estimate");
            let contribution = l * inv_w;
            self.cum_est_loss[arm] += contribution;
            est_loss.push((arm, contribution));
        }
        self.round += 1;
        Ok(RoundOutcome {
            observed_losses: action.indices().iter().cloned().zip(losses).collect(),
            action,
            estimate,
            est_loss,
        })
    }
}
