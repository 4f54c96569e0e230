//! Loss generators and pseudo-regret accounting.
//!
//! The environment hands the learner a loss vector ℓ_t ∈ [0,1]^d each round,
//! chosen stochastically, from a fixed schedule, or adaptively from the full
//! past history of losses and actions (the adversary is omniscient; the
//! learner still only observes the chosen coordinates). Pseudo-regret is
//! realized cumulative loss minus the loss of the best fixed action in
//! hindsight; in the size-invariant action set the hindsight argmin is
//! separable, so it is just the bottom-m of the per-arm loss column sums.

use crate::policy::{PolicyState, RoundOutcome};
use crate::select::{Action, SelectError};
use rand::Rng;
use std::fmt;
use std::io::BufRead;
use std::path::Path;

/// Errors from loss generation, schedules, and regret accounting.
#[derive(Debug)]
pub enum EnvError {
    BadMu(String),
    BadSchedule(String),
    LossOutOfRange { t: usize, arm: usize, value: f64 },
    HorizonExceeded { t: usize, horizon: usize },
    DimensionMismatch { expected: usize, got: usize },
    Io(std::io::Error),
    Select(SelectError),
    Policy(crate::policy::PolicyError),
}

impl fmt::Display for EnvError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EnvError::BadMu(msg) => write!(f, "invalid Bernoulli means: {msg}"),
            EnvError::BadSchedule(msg) => write!(f, "invalid loss schedule: {msg}"),
            EnvError::LossOutOfRange { t, arm, value } => {
                write!(f, "loss {value} outside [0,1] at round {t}, arm {arm}")
            }
            EnvError::HorizonExceeded { t, horizon } => {
                write!(f, "round {t} beyond horizon {horizon}")
            }
            EnvError::DimensionMismatch { expected, got } => {
                write!(f, "dimension mismatch: expected {expected}, got {got}")
            }
            EnvError::Io(e) => write!(f, "schedule I/O: {e}"),
            EnvError::Select(e) => write!(f, "{e}"),
            EnvError::Policy(e) => write!(f, "{e}"),
        }
    }
}

impl std::error::Error for EnvError {}

impl From<std::io::Error> for EnvError {
    fn from(e: std::io::Error) -> Self {
        EnvError::Io(e)
    }
}

impl From<SelectError> for EnvError {
    fn from(e: SelectError) -> Self {
        EnvError::Select(e)
    }
}

impl From<crate::policy::PolicyError> for EnvError {
    fn from(e: crate::policy::PolicyError) -> Self {
        EnvError::Policy(e)
    }
}

/// Full history visible to an adaptive adversary: the realized loss vectors
/// and the actions played so far.
#[derive(Debug, Default)]
pub struct History {
    pub losses: Vec<Vec<f64>>,
    pub actions: Vec<Action>,
}

type Hook = Box<dyn FnMut(usize, &History) -> Vec<f64> + Send>;

enum Kind {
    Bernoulli { mu: Vec<f64> },
    Schedule { table: Vec<Vec<f64>> },
    ConstantGap { good_arms: usize, gap: f64 },
    Sinusoidal { period: usize },
    Switching { cheap_arms: usize, block: usize },
    Adaptive { hook: Hook },
}

impl fmt::Debug for Kind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Kind::Bernoulli { mu } => f.debug_struct("Bernoulli").field("mu", mu).finish(),
            Kind::Schedule { table } => {
                f.debug_struct("Schedule").field("rows", &table.len()).finish()
            }
            Kind::ConstantGap { good_arms, gap } => f
                .debug_struct("ConstantGap")
                .field("good_arms", good_arms)
                .field("gap", gap)
                .finish(),
            Kind::Sinusoidal { period } => {
                f.debug_struct("Sinusoidal").field("period", period).finish()
            }
            Kind::Switching { cheap_arms, block } => f
                .debug_struct("Switching")
                .field("cheap_arms", cheap_arms)
                .field("block", block)
                .finish(),
            Kind::Adaptive { .. } => f.write_str("Adaptive"),
        }
    }
}

/// A loss-vector source over `d` arms for `horizon` rounds.
#[derive(Debug)]
pub struct Environment {
    d: usize,
    horizon: usize,
    kind: Kind,
}

impl Environment {
    /// Independent Bernoulli(μ_i) losses.
    pub fn bernoulli(mu: Vec<f64>, horizon: usize) -> Result<Self, EnvError> {
        if mu.is_empty() {
            return Err(EnvError::BadMu("empty mean vector".into()));
        }
        if let Some(v) = mu.iter().find(|v| !v.is_finite() || **v < 0.0 || **v > 1.0) {
            return Err(EnvError::BadMu(format!("mean {v} outside [0,1]")));
        }
        Ok(Self { d: mu.len(), horizon, kind: Kind::Bernoulli { mu } })
    }

    /// Fixed schedule: row t (0-based) is the loss vector of round t+1.
    pub fn from_schedule(table: Vec<Vec<f64>>) -> Result<Self, EnvError> {
        if table.is_empty() || table[0].is_empty() {
            return Err(EnvError::BadSchedule("empty table".into()));
        }
        let d = table[0].len();
        for (t, row) in table.iter().enumerate() {
            if row.len() != d {
                return Err(EnvError::BadSchedule(format!(
                    "row {t} has {} entries, expected {d}",
                    row.len()
                )));
            }
            for (arm, &v) in row.iter().enumerate() {
                if !v.is_finite() || !(0.0..=1.0).contains(&v) {
                    return Err(EnvError::LossOutOfRange { t: t + 1, arm, value: v });
                }
            }
        }
        Ok(Self { d, horizon: table.len(), kind: Kind::Schedule { table } })
    }

    /// Loads a fixed schedule from CSV with header `t,loss_0,...,loss_{d-1}`.
    pub fn from_csv_path(path: &Path) -> Result<Self, EnvError> {
        let file = std::fs::File::open(path)?;
        let mut lines = std::io::BufReader::new(file).lines();
        let header = lines
            .next()
            .ok_or_else(|| EnvError::BadSchedule("empty file".into()))??;
        let cols: Vec<&str> = header.trim().split(',').collect();
        if cols.first() != Some(&"t") || cols.len() < 2 {
            return Err(EnvError::BadSchedule(format!(
                "header must be t,loss_0,...,loss_{{d-1}}, got `{header}`"
            )));
        }
        for (k, c) in cols.iter().enumerate().skip(1) {
            let expect = format!("loss_{}", k - 1);
            if *c != expect {
                return Err(EnvError::BadSchedule(format!(
                    "column {k} must be `{expect}`, got `{c}`"
                )));
            }
        }
        let d = cols.len() - 1;
        let mut table = Vec::new();
        for (row_idx, line) in lines.enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.trim().split(',').collect();
            if fields.len() != d + 1 {
                return Err(EnvError::BadSchedule(format!(
                    "line {}: {} fields, expected {}",
                    row_idx + 2,
                    fields.len(),
                    d + 1
                )));
            }
            let mut row = Vec::with_capacity(d);
            for f in &fields[1..] {
                let v: f64 = f.trim().parse().map_err(|_| {
                    EnvError::BadSchedule(format!("line {}: bad number `{f}`", row_idx + 2))
                })?;
                row.push(v);
            }
            table.push(row);
        }
        Self::from_schedule(table)
    }

    /// First `good_arms` arms pay 0.5 − gap/2, the rest 0.5 + gap/2.
    pub fn constant_gap(
        d: usize,
        horizon: usize,
        good_arms: usize,
        gap: f64,
    ) -> Result<Self, EnvError> {
        if good_arms == 0 || good_arms > d || !(0.0..=1.0).contains(&gap) {
            return Err(EnvError::BadSchedule(format!(
                "constant gap needs 1 <= good_arms <= d and gap in [0,1], got {good_arms}, {gap}"
            )));
        }
        Ok(Self { d, horizon, kind: Kind::ConstantGap { good_arms, gap } })
    }

    /// Phase-shifted sinusoids: arm i pays 0.5 + 0.45 sin(2πt/period + 2πi/d).
    pub fn sinusoidal(d: usize, horizon: usize, period: usize) -> Result<Self, EnvError> {
        if period == 0 || d == 0 {
            return Err(EnvError::BadSchedule("period and d must be >= 1".into()));
        }
        Ok(Self { d, horizon, kind: Kind::Sinusoidal { period } })
    }

    /// Switching adversary: the cheap arm set rotates every horizon/10
    /// rounds (cheap arms pay 0.1, the rest 0.9).
    pub fn switching(d: usize, horizon: usize, cheap_arms: usize) -> Result<Self, EnvError> {
        if cheap_arms == 0 || cheap_arms > d {
            return Err(EnvError::BadSchedule(format!(
                "switching needs 1 <= cheap_arms <= d, got {cheap_arms}"
            )));
        }
        let block = (horizon / 10).max(1);
        Ok(Self { d, horizon, kind: Kind::Switching { cheap_arms, block } })
    }

    /// Adaptive adversary: the hook sees the round index and the full
    /// history {(ℓ_s, a_s)}_{s<t} and returns ℓ_t; outputs are validated
    /// into [0,1]^d.
    pub fn adaptive<F>(d: usize, horizon: usize, hook: F) -> Result<Self, EnvError>
    where
        F: FnMut(usize, &History) -> Vec<f64> + Send + 'static,
    {
        if d == 0 {
            return Err(EnvError::BadSchedule("d must be >= 1".into()));
        }
        Ok(Self { d, horizon, kind: Kind::Adaptive { hook: Box::new(hook) } })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn is_adaptive(&self) -> bool {
        matches!(self.kind, Kind::Adaptive { .. })
    }

    /// Loss vector of round `t` (1-based). The adaptive kind receives the
    /// history of strictly earlier rounds.
    pub fn next_loss<R: Rng + ?Sized>(
        &mut self,
        t: usize,
        history: &History,
        rng: &mut R,
    ) -> Result<Vec<f64>, EnvError> {
        if t < 1 || t > self.horizon {
            return Err(EnvError::HorizonExceeded { t, horizon: self.horizon });
        }
        let d = self.d;
        let row = match &mut self.kind {
            Kind::Bernoulli { mu } => mu
                .iter()
                .map(|&p| if rng.random::<f64>() < p { 1.0 } else { 0.0 })
                .collect(),
            Kind::Schedule { table } => table[t - 1].clone(),
            Kind::ConstantGap { good_arms, gap } => (0..d)
                .map(|i| if i < *good_arms { 0.5 - *gap / 2.0 } else { 0.5 + *gap / 2.0 })
                .collect(),
            Kind::Sinusoidal { period } => {
                let w = 2.0 * std::f64::consts::PI;
                (0..d)
                    .map(|i| {
                        0.5 + 0.45
                            * (w * (t as f64) / (*period as f64) + w * (i as f64) / (d as f64))
                                .sin()
                    })
                    .collect()
            }
            Kind::Switching { cheap_arms, block } => {
                let shift = ((t - 1) / *block) * *cheap_arms;
                (0..d)
                    .map(|i| {
                        let pos = (i + d - shift % d) % d;
                        if pos < *cheap_arms {
                            0.1
                        } else {
                            0.9
                        }
                    })
                    .collect()
            }
            Kind::Adaptive { hook } => {
                let row = hook(t, history);
                if row.len() != d {
                    return Err(EnvError::DimensionMismatch { expected: d, got: row.len() });
                }
                for (arm, &v) in row.iter().enumerate() {
                    if !v.is_finite() || !(0.0..=1.0).contains(&v) {
                        return Err(EnvError::LossOutOfRange { t, arm, value: v });
                    }
                }
                row
            }
        };
        debug_assert_eq!(row.len(), d);
        Ok(row)
    }
}

/// Per-round record kept by the harness.
#[derive(Debug, Clone, PartialEq)]
pub struct RoundRecord {
    pub t: usize,
    pub action: Vec<usize>,
    pub round_loss: f64,
    pub resamples: u64,
    pub capped: bool,
}

/// Trace of one replication: per-round records plus running realized loss.
#[derive(Debug, Default, Clone)]
pub struct RegretTrace {
    records: Vec<RoundRecord>,
    cumulative_loss: f64,
}

impl RegretTrace {
    pub fn push(&mut self, record: RoundRecord) {
        self.cumulative_loss += record.round_loss;
        self.records.push(record);
    }

    pub fn records(&self) -> &[RoundRecord] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn realized_loss(&self) -> f64 {
        self.cumulative_loss
    }

    pub fn cap_events(&self) -> usize {
        self.records.iter().filter(|r| r.capped).count()
    }

    pub fn mean_resamples(&self) -> f64 {
        if self.records.is_empty() {
            return 0.0;
        }
        self.records.iter().map(|r| r.resamples as f64).sum::<f64>() / self.records.len() as f64
    }
}

/// Best fixed action in hindsight: the m arms with the smallest loss column
/// sums (ties toward the lower index).
pub fn best_fixed_action(column_sums: &[f64], m: usize) -> Result<Action, EnvError> {
    let negated: Vec<f64> = column_sums.iter().map(|v| -v).collect();
    // lowest sums = top of the negation; the tie rule carries over
    Ok(crate::select::select_top_m(&negated, m)?)
}

/// Pseudo-regret of a complete trace against a full loss table:
/// Σ_t ⟨ℓ_t, a_t⟩ − Σ_{i ∈ a*} Σ_t ℓ_{t,i}.
pub fn pseudo_regret(trace: &RegretTrace, true_losses: &[Vec<f64>]) -> Result<f64, EnvError> {
    if trace.len() != true_losses.len() {
        return Err(EnvError::DimensionMismatch {
            expected: trace.len(),
            got: true_losses.len(),
        });
    }
    if true_losses.is_empty() {
        return Ok(0.0);
    }
    let d = true_losses[0].len();
    let mut column_sums = vec![0.0f64; d];
    let mut realized = 0.0;
    for (rec, row) in trace.records().iter().zip(true_losses) {
        if row.len() != d {
            return Err(EnvError::DimensionMismatch { expected: d, got: row.len() });
        }
        for (s, &v) in column_sums.iter_mut().zip(row) {
            *s += v;
        }
        realized += rec.action.iter().map(|&i| row[i]).sum::<f64>();
    }
    let m = trace.records()[0].action.len();
    let best = best_fixed_action(&column_sums, m)?;
    let best_total: f64 = best.indices().iter().map(|&i| column_sums[i]).sum();
    Ok(realized - best_total)
}

/// Result of driving a policy against an environment for its full horizon.
#[derive(Debug)]
pub struct EpisodeResult {
    pub trace: RegretTrace,
    /// Per-arm sums of the realized loss vectors.
    pub column_sums: Vec<f64>,
    /// Realized pseudo-regret of this replication.
    pub pseudo_regret: f64,
}

/// Play `policy` against `env` for the environment's horizon.
///
/// Losses are generated before the action each round (the adversary may use
/// history up to t−1 only); the policy observes the chosen coordinates.
pub fn run_episode<R: Rng + ?Sized>(
    policy: &mut PolicyState,
    env: &mut Environment,
    rng: &mut R,
) -> Result<EpisodeResult, EnvError> {
    if policy.d() != env.d() {
        return Err(EnvError::DimensionMismatch { expected: policy.d(), got: env.d() });
    }
    let horizon = env.horizon();
    let keep_history = env.is_adaptive();
    let mut history = History::default();
    let mut trace = RegretTrace::default();
    let mut column_sums = vec![0.0f64; env.d()];
    for t in 1..=horizon {
        let loss = env.next_loss(t, &history, rng)?;
        for (s, &v) in column_sums.iter_mut().zip(&loss) {
            *s += v;
        }
        let outcome: RoundOutcome =
            policy.play_round(|a| a.indices().iter().map(|&i| loss[i]).collect(), rng)?;
        let round_loss: f64 = outcome.observed_losses.iter().map(|&(_, l)| l).sum();
        trace.push(RoundRecord {
            t,
            action: outcome.action.indices().to_vec(),
            round_loss,
            resamples: outcome.estimate.total_rounds,
            capped: outcome.estimate.capped,
        });
        if keep_history {
            history.losses.push(loss);
            history.actions.push(outcome.action);
        }
    }
    let m = policy.m();
    let best = best_fixed_action(&column_sums, m)?;
    let best_total: f64 = best.indices().iter().map(|&i| column_sums[i]).sum();
    let pseudo_regret = trace.realized_loss() - best_total;
    Ok(EpisodeResult { trace, column_sums, pseudo_regret })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::perturbation::PerturbationSpec;
    use crate::policy::{Estimator, LearningRate};
    use crate::replication_rng;
    use crate::resample::ResamplingBudget;

    #[test]
    fn bernoulli_zero_and_means() {
        let mut env = Environment::bernoulli(vec![0.0, 0.0], 100).unwrap();
        let mut rng = replication_rng(51, 0);
        let h = History::default();
        for t in 1..=100 {
            assert_eq!(env.next_loss(t, &h, &mut rng).unwrap(), vec![0.0, 0.0]);
        }
        let mut env = Environment::bernoulli(vec![0.5, 0.2], 50_000).unwrap();
        let mut sums = [0.0f64; 2];
        for t in 1..=50_000 {
            let row = env.next_loss(t, &h, &mut rng).unwrap();
            sums[0] += row[0];
            sums[1] += row[1];
        }
        assert!((sums[0] / 50_000.0 - 0.5).abs() < 3.0 * (0.25f64 / 50_000.0).sqrt());
        assert!((sums[1] / 50_000.0 - 0.2).abs() < 3.0 * (0.16f64 / 50_000.0).sqrt());
        assert!(Environment::bernoulli(vec![1.2], 10).is_err());
    }

    #[test]
    fn schedule_rows_verbatim_and_validation() {
        let table = vec![vec![0.1, 0.9], vec![0.5, 0.5]];
        let mut env = Environment::from_schedule(table.clone()).unwrap();
        let mut rng = replication_rng(52, 0);
        let h = History::default();
        assert_eq!(env.next_loss(1, &h, &mut rng).unwrap(), table[0]);
        assert_eq!(env.next_loss(2, &h, &mut rng).unwrap(), table[1]);
        assert!(env.next_loss(3, &h, &mut rng).is_err());
        assert!(Environment::from_schedule(vec![vec![1.5]]).is_err());
        assert!(Environment::from_schedule(vec![vec![0.1], vec![0.1, 0.2]]).is_err());
    }

    #[test]
    fn csv_round_trip() {
        let dir = std::env::temp_dir().join("semiband_env_test");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("sched.csv");
        std::fs::write(&path, "t,loss_0,loss_1\n1,0.25,0.75\n2,1.0,0.0\n").unwrap();
        let mut env = Environment::from_csv_path(&path).unwrap();
        assert_eq!(env.d(), 2);
        assert_eq!(env.horizon(), 2);
        let mut rng = replication_rng(53, 0);
        let h = History::default();
        assert_eq!(env.next_loss(1, &h, &mut rng).unwrap(), vec![0.25, 0.75]);
        std::fs::write(&path, "x,loss_0\n1,0.5\n").unwrap();
        assert!(Environment::from_csv_path(&path).is_err());
        std::fs::write(&path, "t,loss_0\n1,2.5\n").unwrap();
        assert!(Environment::from_csv_path(&path).is_err());
    }

    #[test]
    fn adaptive_hook_sees_history_and_is_validated() {
        let mut env = Environment::adaptive(2, 5, |t, h: &History| {
            assert_eq!(h.losses.len(), t - 1);
            assert_eq!(h.actions.len(), t - 1);
            vec![0.25, 0.5]
        })
        .unwrap();
        let mut rng = replication_rng(54, 0);
        let mut h = History::default();
        for t in 1..=3 {
            let row = env.next_loss(t, &h, &mut rng).unwrap();
            h.losses.push(row);
            h.actions.push(Action::new(vec![0], 2).unwrap());
        }
        let mut bad = Environment::adaptive(2, 5, |_, _| vec![2.0, 0.0]).unwrap();
        assert!(matches!(
            bad.next_loss(1, &History::default(), &mut rng),
            Err(EnvError::LossOutOfRange { .. })
        ));
    }

    #[test]
    fn hindsight_optimum_matches_exhaustive_search() {
        let mut rng = replication_rng(55, 0);
        use rand::Rng;
        for _ in 0..40 {
            let d = 2 + rng.random_range(0..7usize);
            let m = 1 + rng.random_range(0..d);
            let sums: Vec<f64> = (0..d).map(|_| rng.random::<f64>() * 10.0).collect();
            let fast = best_fixed_action(&sums, m).unwrap();
            // brute force over all C(d, m) subsets via bitmasks
            let mut best_total = f64::INFINITY;
            let mut best = 0u32;
            for mask in 0u32..(1 << d) {
                if mask.count_ones() as usize != m {
                    continue;
                }
                let total: f64 = (0..d).filter(|&i| mask >> i & 1 == 1).map(|i| sums[i]).sum();
                if total < best_total - 1e-12 {
                    best_total = total;
                    best = mask;
                }
            }
            let total_fast: f64 = fast.indices().iter().map(|&i| sums[i]).sum();
            assert!(
                (total_fast - best_total).abs() < 1e-9,
                "d={d} m={m} fast={:?} best={best:#b}",
                fast.indices(),
            );
        }
    }

    #[test]
    fn pseudo_regret_examples() {
        // playing the best action every round: zero regret
        let mut trace = RegretTrace::default();
        let table = vec![vec![0.0, 1.0]; 10];
        for t in 1..=10 {
            trace.push(RoundRecord {
                t,
                action: vec![0],
                round_loss: 0.0,
                resamples: 1,
                capped: false,
            });
        }
        assert_eq!(pseudo_regret(&trace, &table).unwrap(), 0.0);
        // always playing the bad arm: regret T
        let mut trace = RegretTrace::default();
        for t in 1..=10 {
            trace.push(RoundRecord {
                t,
                action: vec![1],
                round_loss: 1.0,
                resamples: 1,
                capped: false,
            });
        }
        assert_eq!(pseudo_regret(&trace, &table).unwrap(), 10.0);
    }

    #[test]
    fn full_set_runs_have_zero_regret() {
        let spec = PerturbationSpec::frechet(2.0).unwrap();
        let mut policy = PolicyState::new(
            3,
            3,
            spec,
            Estimator::Gr,
            LearningRate::Theoretical,
            50,
            ResamplingBudget::default(),
        )
        .unwrap();
        let mut env = Environment::bernoulli(vec![0.3, 0.6, 0.9], 50).unwrap();
        let mut rng = replication_rng(56, 0);
        let out = run_episode(&mut policy, &mut env, &mut rng).unwrap();
        assert!(out.pseudo_regret.abs() < 1e-9);
        assert_eq!(out.trace.len(), 50);
    }

    #[test]
    fn switching_schedule_rotates_cheap_set() {
        let mut env = Environment::switching(4, 40, 2).unwrap();
        let mut rng = replication_rng(57, 0);
        let h = History::default();
        let first = env.next_loss(1, &h, &mut rng).unwrap();
        let later = env.next_loss(5, &h, &mut rng).unwrap(); // next block (block = 4)
        assert_eq!(first.iter().filter(|&&v| v == 0.1).count(), 2);
        assert_eq!(later.iter().filter(|&&v| v == 0.1).count(), 2);
        assert_ne!(first, later);
        let sinus = Environment::sinusoidal(3, 10, 5).unwrap();
        assert_eq!(sinus.horizon(), 10);
    }

    #[test]
    fn averaged_regret_of_calibrated_run_is_nonnegative() {
        let spec = PerturbationSpec::pareto(2.0).unwrap();
        let reps = 60;
        let mut total = 0.0;
        let mut values = Vec::with_capacity(reps);
        for r in 0..reps {
            let mut policy = PolicyState::new(
                4,
                1,
                spec,
                Estimator::Cgr,
                LearningRate::Theoretical,
                300,
                ResamplingBudget::default(),
            )
            .unwrap();
            let mut env =
                Environment::bernoulli(vec![0.2, 0.5, 0.5, 0.8], 300).unwrap();
            let mut rng = replication_rng(58, r as u64);
            let out = run_episode(&mut policy, &mut env, &mut rng).unwrap();
            total += out.pseudo_regret;
            values.push(out.pseudo_regret);
        }
        let mean = total / reps as f64;
        let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (reps - 1) as f64;
        let se = (var / reps as f64).sqrt();
        assert!(mean > -3.0 * se, "mean={mean} se={se}");
    }
}
