//! Top-m selection oracle and rank bookkeeping.
//!
//! The action set is size-invariant: every action picks exactly `m` of `d`
//! base-arms, so the FTPL argmin over actions reduces to taking the `m`
//! largest perturbed scores. Ties are broken deterministically toward the
//! lowest index everywhere; perturbations are continuous so ties carry no
//! probability at runtime, but the deterministic rule makes replays exact.

use std::cmp::Ordering;
use std::fmt;

/// Errors from the selection oracle.
#[derive(Debug, Clone, PartialEq)]
pub enum SelectError {
    /// Budget must satisfy 1 ≤ m ≤ d.
    BudgetOutOfRange { m: usize, d: usize },
    /// Scores and loss vectors must be finite.
    NonFiniteInput { index: usize, value: f64 },
    /// Rank query must satisfy 1 ≤ θ ≤ |eligible|.
    ThetaOutOfRange { theta: usize, len: usize },
    /// Action indices must be distinct and within [0, d).
    BadActionIndices(String),
    /// A rank vector must be a permutation of 1..=d.
    NotAPermutation,
}

impl fmt::Display for SelectError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SelectError::BudgetOutOfRange { m, d } => {
                write!(f, "selection budget must satisfy 1 <= m <= d, got m={m}, d={d}")
            }
            SelectError::NonFiniteInput { index, value } => {
                write!(f, "non-finite entry {value} at index {index}")
            }
            SelectError::ThetaOutOfRange { theta, len } => {
                write!(f, "theta={theta} out of range for eligible set of size {len}")
            }
            SelectError::BadActionIndices(msg) => write!(f, "invalid action: {msg}"),
            SelectError::NotAPermutation => write!(f, "ranks are not a permutation of 1..=d"),
        }
    }
}

impl std::error::Error for SelectError {}

/// An action: `m` distinct base-arm indices out of `d`, kept sorted.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Action {
    indices: Vec<usize>,
    d: usize,
}

impl Action {
    pub fn new(mut indices: Vec<usize>, d: usize) -> Result<Self, SelectError> {
        if indices.is_empty() || indices.len() > d {
            return Err(SelectError::BadActionIndices(format!(
                "need 1..=d indices, got {} with d={d}",
                indices.len()
            )));
        }
        indices.sort_unstable();
        if indices.windows(2).any(|w| w[0] == w[1]) {
            return Err(SelectError::BadActionIndices("duplicate index".into()));
        }
        if *indices.last().unwrap() >= d {
            return Err(SelectError::BadActionIndices(format!(
                "index {} out of range for d={d}",
                indices.last().unwrap()
            )));
        }
        Ok(Self { indices, d })
    }

    /// Sorted selected indices.
    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn d(&self) -> usize {
        self.d
    }

    /// Number of selected arms m.
    pub fn m(&self) -> usize {
        self.indices.len()
    }

    pub fn contains(&self, arm: usize) -> bool {
        self.indices.binary_search(&arm).is_ok()
    }
}

/// Ascending ranks σ of a loss vector: σ_i = 1 means arm i has the smallest
/// cumulative loss (ties resolved by index, so σ is always a permutation).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RankProfile {
    sigma: Vec<usize>,
}

impl RankProfile {
    /// Validates that `sigma` is a permutation of 1..=d.
    pub fn new(sigma: Vec<usize>) -> Result<Self, SelectError> {
        let d = sigma.len();
        let mut seen = vec![false; d + 1];
        for &s in &sigma {
            if s < 1 || s > d || seen[s] {
                return Err(SelectError::NotAPermutation);
            }
            seen[s] = true;
        }
        Ok(Self { sigma })
    }

    pub fn sigma(&self) -> &[usize] {
        &self.sigma
    }

    /// 1-based ascending rank of arm `i`.
    pub fn rank_of(&self, i: usize) -> usize {
        self.sigma[i]
    }

    pub fn d(&self) -> usize {
        self.sigma.len()
    }

    /// Arms listed in rank order (cheapest first).
    pub fn arms_by_rank(&self) -> Vec<usize> {
        let mut by_rank = vec![0usize; self.sigma.len()];
        for (arm, &s) in self.sigma.iter().enumerate() {
            by_rank[s - 1] = arm;
        }
        by_rank
    }
}

/// `(score, index)` ordering used everywhere: higher score first, ties toward
/// the lower index.
#[inline]
pub(crate) fn desc_before(scores: &[f64], a: usize, b: usize) -> Ordering {
    match scores[b].partial_cmp(&scores[a]) {
        Some(Ordering::Equal) | None => a.cmp(&b),
        Some(ord) => ord,
    }
}

/// Reusable top-m partition (quickselect, O(d) expected per call).
#[derive(Debug)]
pub(crate) struct TopMSelector {
    idx: Vec<u32>,
}

impl TopMSelector {
    pub(crate) fn new(d: usize) -> Self {
        Self {
            idx: (0..d as u32).collect(),
        }
    }

    /// Indices of the m largest scores, unsorted. The comparator resolves
    /// ties toward lower indices, so the returned set is always exact.
    pub(crate) fn top_m(&mut self, scores: &[f64], m: usize) -> &[u32] {
        let d = scores.len();
        debug_assert_eq!(d, self.idx.len());
        debug_assert!(m >= 1 && m <= d);
        for (k, v) in self.idx.iter_mut().enumerate() {
            *v = k as u32;
        }
        if m < d {
            self.idx
                .select_nth_unstable_by(m - 1, |&a, &b| desc_before(scores, a as usize, b as usize));
        }
        &self.idx[..m]
    }
}

/// The indices of the m largest entries of `scores` as an [`Action`].
///
/// This is the FTPL selection oracle: argmin_a aᵀ(ηL̂ − r) over the
/// size-invariant action set equals the top-m of r − ηL̂.
pub fn select_top_m(scores: &[f64], m: usize) -> Result<Action, SelectError> {
    let d = scores.len();
    if m < 1 || m > d {
        return Err(SelectError::BudgetOutOfRange { m, d });
    }
    if let Some((i, &v)) = scores.iter().enumerate().find(|(_, v)| !v.is_finite()) {
        return Err(SelectError::NonFiniteInput { index: i, value: v });
    }
    let mut selector = TopMSelector::new(d);
    let chosen: Vec<usize> = selector.top_m(scores, m).iter().map(|&i| i as usize).collect();
    Action::new(chosen, d)
}

/// Ascending ranks of a loss vector:
/// σ_i = |{j : L_j < L_i}| + |{j ≤ i : L_j = L_i}|.
pub fn ascending_ranks(losses: &[f64]) -> Result<RankProfile, SelectError> {
    if let Some((i, &v)) = losses.iter().enumerate().find(|(_, v)| !v.is_finite()) {
        return Err(SelectError::NonFiniteInput { index: i, value: v });
    }
    let d = losses.len();
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_unstable_by(|&a, &b| match losses[a].partial_cmp(&losses[b]).unwrap() {
        Ordering::Equal => a.cmp(&b),
        ord => ord,
    });
    let mut sigma = vec![0usize; d];
    for (pos, &arm) in order.iter().enumerate() {
        sigma[arm] = pos + 1;
    }
    Ok(RankProfile { sigma })
}

/// Index holding the θ-th largest value among `eligible` (ties toward the
/// lowest index). θ is 1-based; θ = |eligible| returns the minimum.
pub fn theta_th_largest_in_prefix(
    values: &[f64],
    eligible: &[usize],
    theta: usize,
) -> Result<usize, SelectError> {
    if theta < 1 || theta > eligible.len() {
        return Err(SelectError::ThetaOutOfRange {
            theta,
            len: eligible.len(),
        });
    }
    let mut buf = eligible.to_vec();
    Ok(theta_th_largest_scratch(values, &mut buf, theta))
}

/// Same as [`theta_th_largest_in_prefix`] but destroys `scratch` instead of
/// allocating; used in the resampling inner loop.
#[inline]
pub(crate) fn theta_th_largest_scratch(values: &[f64], scratch: &mut [usize], theta: usize) -> usize {
    debug_assert!(theta >= 1 && theta <= scratch.len());
    scratch.select_nth_unstable_by(theta - 1, |&a, &b| desc_before(values, a, b));
    scratch[theta - 1]
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn top_m_examples() {
        let a = select_top_m(&[1.0, 2.0, 3.0], 2).unwrap();
        assert_eq!(a.indices(), &[1, 2]);
        let b = select_top_m(&[5.0, 5.0, 1.0], 1).unwrap();
        assert_eq!(b.indices(), &[0]);
        let c = select_top_m(&[0.4, -1.0, 2.0, 0.0], 4).unwrap();
        assert_eq!(c.indices(), &[0, 1, 2, 3]);
    }

    #[test]
    fn top_m_rejections() {
        assert!(matches!(
            select_top_m(&[1.0, f64::NAN], 1),
            Err(SelectError::NonFiniteInput { index: 1, .. })
        ));
        assert!(select_top_m(&[1.0, 2.0], 0).is_err());
        assert!(select_top_m(&[1.0, 2.0], 3).is_err());
        assert!(select_top_m(&[1.0, f64::INFINITY], 1).is_err());
    }

    #[test]
    fn ranks_examples() {
        assert_eq!(ascending_ranks(&[0.5, 0.2, 0.9]).unwrap().sigma(), &[2, 1, 3]);
        assert_eq!(ascending_ranks(&[0.3, 0.3]).unwrap().sigma(), &[1, 2]);
        assert_eq!(
            ascending_ranks(&[1.0; 5]).unwrap().sigma(),
            &[1, 2, 3, 4, 5]
        );
        assert!(ascending_ranks(&[f64::NAN]).is_err());
    }

    #[test]
    fn theta_th_largest_examples() {
        let v = [9.0, 4.0, 7.0];
        assert_eq!(theta_th_largest_in_prefix(&v, &[0, 1, 2], 2).unwrap(), 2);
        assert_eq!(theta_th_largest_in_prefix(&v, &[0, 1], 1).unwrap(), 0);
        assert_eq!(theta_th_largest_in_prefix(&v, &[0, 1, 2], 3).unwrap(), 1);
        assert!(theta_th_largest_in_prefix(&v, &[0, 1], 3).is_err());
        assert!(theta_th_largest_in_prefix(&v, &[0, 1], 0).is_err());
    }

    #[test]
    fn action_validation() {
        assert!(Action::new(vec![0, 0], 3).is_err());
        assert!(Action::new(vec![3], 3).is_err());
        assert!(Action::new(vec![], 3).is_err());
        let a = Action::new(vec![2, 0], 3).unwrap();
        assert_eq!(a.indices(), &[0, 2]);
        assert!(a.contains(2) && !a.contains(1));
    }

    #[test]
    fn rank_profile_validation() {
        assert!(RankProfile::new(vec![1, 2, 2]).is_err());
        assert!(RankProfile::new(vec![0, 1]).is_err());
        let p = RankProfile::new(vec![3, 1, 2]).unwrap();
        assert_eq!(p.arms_by_rank(), vec![1, 2, 0]);
    }

    proptest! {
        #[test]
        fn complement_duality(scores in proptest::collection::vec(-1e6..1e6f64, 2..24), m in 1usize..23) {
            // distinct scores: nudge duplicates apart deterministically
            let mut s = scores.clone();
            s.sort_by(|a, b| a.partial_cmp(b).unwrap());
            prop_assume!(s.windows(2).all(|w| w[0] != w[1]));
            let d = scores.len();
            prop_assume!(m < d);
            let top = select_top_m(&scores, m).unwrap();
            let neg: Vec<f64> = scores.iter().map(|v| -v).collect();
            let bottom = select_top_m(&neg, d - m).unwrap();
            let mut union: Vec<usize> = top.indices().iter().chain(bottom.indices()).cloned().collect();
            union.sort_unstable();
            prop_assert_eq!(union, (0..d).collect::<Vec<_>>());
        }

        #[test]
        fn ranks_are_permutations_and_shift_invariant(
            losses in proptest::collection::vec(-1e3..1e3f64, 1..32),
            shift in -1e3..1e3f64,
        ) {
            let r1 = ascending_ranks(&losses).unwrap();
            let shifted: Vec<f64> = losses.iter().map(|v| v + shift).collect();
            let r2 = ascending_ranks(&shifted).unwrap();
            prop_assert_eq!(r1.sigma(), r2.sigma());
            let mut sorted = r1.sigma().to_vec();
            sorted.sort_unstable();
            prop_assert_eq!(sorted, (1..=losses.len()).collect::<Vec<_>>());
        }

        #[test]
        fn membership_matches_rank_event(
            scores in proptest::collection::vec(-1e3..1e3f64, 2..16),
            m in 1usize..15,
        ) {
            let d = scores.len();
            prop_assume!(m <= d);
            let mut s = scores.clone();
            s.sort_by(|a, b| a.partial_cmp(b).unwrap());
            prop_assume!(s.windows(2).all(|w| w[0] != w[1]));
            let action = select_top_m(&scores, m).unwrap();
            for i in 0..d {
                let rank = scores.iter().filter(|&&v| v > scores[i]).count() + 1;
                prop_assert_eq!(action.contains(i), rank <= m);
            }
        }
    }
}
