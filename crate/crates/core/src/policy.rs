//! The learner side of the interaction protocol.
//!
//! A round is split into [`Policy::select`] and [`Policy::update`]. Between the
//! two calls the protocol computes which components the action reveals and
//! hands the policy a [`RevealedLosses`] view. That view is the only way a
//! policy can read a loss, and it refuses hidden entries.

use std::cell::RefCell;

use rand::{Rng, RngCore};

use crate::error::{Error, Result};
use crate::graph::ObservabilityGraph;

/// A binary action vector stored as its sorted support.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Action {
    support: Vec<usize>,
}

impl Action {
    pub fn from_support(mut support: Vec<usize>) -> Self {
        support.sort_unstable();
        support.dedup();
        Self { support }
    }

    pub fn single(i: usize) -> Self {
        Self { support: vec![i] }
    }

    pub fn support(&self) -> &[usize] {
        &self.support
    }

    pub fn contains(&self, i: usize) -> bool {
        self.support.binary_search(&i).is_ok()
    }

    /// `v · x`.
    pub fn dot(&self, x: &[f64]) -> f64 {
        self.support.iter().map(|&i| x[i]).sum()
    }

    pub fn to_indicator(&self, d: usize) -> Vec<bool> {
        let mut v = vec![false; d];
        for &i in &self.support {
            v[i] = true;
        }
        v
    }
}

/// When a policy may look at the round's observability graph.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GraphAccess {
    /// Only after the action is fixed (IX policies).
    PostAction,
    /// Before choosing the action (Exp3-DOM).
    PreAction,
}

/// What the environment reveals after an action.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FeedbackModel {
    /// Losses on the out-neighborhood of the action's support.
    SideObservations,
    /// The whole loss vector, regardless of the action.
    FullInformation,
}

/// `O_i = 1` iff some component in the support of `action` has an edge to `i`.
pub fn observation_indicators(g: &ObservabilityGraph, action: &Action) -> Vec<bool> {
    let mut observed = vec![false; g.dim()];
    for &j in action.support() {
        for &i in g.out_neighbors(j) {
            observed[i] = true;
        }
    }
    observed
}

/// Read-only access to the revealed part of a loss vector.
///
/// Every read is recorded, so tests can check that a policy reads exactly the
/// revealed entries and nothing else.
#[derive(Debug)]
pub struct RevealedLosses<'a> {
    losses: &'a [f64],
    observed: Vec<bool>,
    reads: RefCell<Vec<usize>>,
}

impl<'a> RevealedLosses<'a> {
    pub fn new(losses: &'a [f64], observed: Vec<bool>) -> Self {
        debug_assert_eq!(losses.len(), observed.len());
        Self {
            losses,
            observed,
            reads: RefCell::new(Vec::new()),
        }
    }

    pub fn dim(&self) -> usize {
        self.losses.len()
    }

    pub fn is_observed(&self, i: usize) -> bool {
        self.observed[i]
    }

    pub fn observed(&self) -> &[bool] {
        &self.observed
    }

    pub fn observed_indices(&self) -> impl Iterator<Item = usize> + '_ {
        self.observed
            .iter()
            .enumerate()
            .filter_map(|(i, &o)| o.then_some(i))
    }

    /// Loss of component `i`; hidden components are a protocol violation.
    pub fn get(&self, i: usize) -> Result<f64> {
        if i >= self.losses.len() || !self.observed[i] {
            return Err(Error::Protocol(format!(
                "loss of component {i} was not revealed this round"
            )));
        }
        self.reads.borrow_mut().push(i);
        Ok(self.losses[i])
    }

    /// Sorted, deduplicated indices read so far.
    pub fn reads(&self) -> Vec<usize> {
        let mut r = self.reads.borrow().clone();
        r.sort_unstable();
        r.dedup();
        r
    }
}

/// What a policy reports back after processing a round's feedback.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RoundUpdate {
    /// The loss estimate vector added to the cumulative estimates.
    pub estimates: Vec<f64>,
    /// Learning rate used for this round's action.
    pub rate: f64,
    /// Implicit-exploration parameter (equal to `rate` for the IX policies).
    pub gamma: f64,
    /// `Q_t = sum_i p_i / (o_i + gamma)`, for policies that can compute it.
    pub q_t: Option<f64>,
    /// Independence-number estimate the policy used for its rate schedule.
    pub alpha_tilde: Option<usize>,
    /// Linear-optimization oracle calls made this round.
    pub oracle_calls: u64,
    /// Whether geometric resampling hit its safety stop.
    pub hard_cap_hit: bool,
}

pub trait Policy: Send {
    fn name(&self) -> &'static str;

    fn dim(&self) -> usize;

    fn graph_access(&self) -> GraphAccess {
        GraphAccess::PostAction
    }

    fn feedback_model(&self) -> FeedbackModel {
        FeedbackModel::SideObservations
    }

    /// Chooses this round's action. `graph` is `Some` only for policies that
    /// declare [`GraphAccess::PreAction`].
    fn select(
        &mut self,
        graph: Option<&ObservabilityGraph>,
        rng: &mut dyn RngCore,
    ) -> Result<Action>;

    /// Consumes the feedback for the action returned by the preceding `select`.
    fn update(
        &mut self,
        action: &Action,
        graph: &ObservabilityGraph,
        losses: &RevealedLosses<'_>,
        rng: &mut dyn RngCore,
    ) -> Result<RoundUpdate>;
}

/// Inverse-CDF draw from `p` with cumulative sums in index order.
pub fn sample_index(p: &[f64], rng: &mut (impl Rng + ?Sized)) -> usize {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    for (i, &pi) in p.iter().enumerate() {
        acc += pi;
        if u < acc {
            return i;
        }
    }
    // Rounding left the total just under u: take the last positive entry.
    p.iter().rposition(|&x| x > 0.0).unwrap_or(p.len() - 1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn observation_indicator_examples() {
        let g = ObservabilityGraph::new(3, [(0, 2)]).unwrap();
        assert_eq!(
            observation_indicators(&g, &Action::single(0)),
            vec![true, false, true]
        );
        let g = ObservabilityGraph::complete(4).unwrap();
        assert_eq!(
            observation_indicators(&g, &Action::single(3)),
            vec![true; 4]
        );
        let g = ObservabilityGraph::new(4, [(1, 3)]).unwrap();
        assert_eq!(
            observation_indicators(&g, &Action::from_support(vec![0, 1])),
            vec![true, true, false, true]
        );
    }

    #[test]
    fn revealed_losses_refuse_hidden_entries() {
        let losses = [0.1, 0.2, 0.3];
        let r = RevealedLosses::new(&losses, vec![true, false, true]);
        assert_eq!(r.get(2).unwrap(), 0.3);
        assert!(matches!(r.get(1), Err(Error::Protocol(_))));
        assert!(r.get(9).is_err());
        r.get(0).unwrap();
        r.get(2).unwrap();
        assert_eq!(r.reads(), vec![0, 2]);
    }

    #[test]
    fn inverse_cdf_sampling_frequencies() {
        let p = [0.1, 0.0, 0.6, 0.3];
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let n = 200_000;
        let mut counts = [0usize; 4];
        for _ in 0..n {
            counts[sample_index(&p, &mut rng)] += 1;
        }
        assert_eq!(counts[1], 0);
        for i in 0..4 {
            let f = counts[i] as f64 / n as f64;
            let se = (p[i] * (1.0 - p[i]) / n as f64).sqrt();
            assert!((f - p[i]).abs() <= 4.0 * se + 1e-12, "{i}: {f}");
        }
    }

    #[test]
    fn action_dot_and_support() {
        let a = Action::from_support(vec![3, 1, 3]);
        assert_eq!(a.support(), &[1, 3]);
        assert!(a.contains(3) && !a.contains(0));
        assert_eq!(a.dot(&[1.0, 2.0, 4.0, 8.0]), 10.0);
    }
}
