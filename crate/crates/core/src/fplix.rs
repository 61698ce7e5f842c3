//! Combinatorial semi-bandits with side observations: decision sets with a
//! linear-minimization oracle, follow-the-perturbed-leader, and the
//! geometric-resampling IX estimator that together form FPL-IX.

use std::fmt;
use std::str::FromStr;

use log::warn;
use rand::{Rng, RngCore};
use rand_distr::{Distribution, Exp1};
use serde::{Deserialize, Serialize};

use crate::error::{usage, Error, Result};
use crate::graph::ObservabilityGraph;
use crate::policy::{
    observation_indicators, Action, FeedbackModel, Policy, RevealedLosses, RoundUpdate,
};

/// A family of binary actions `S ⊆ {0,1}^d` with `|v| <= m`, accessed through
/// a linear-minimization oracle.
pub trait DecisionSet: Send + Sync + fmt::Debug {
    fn dim(&self) -> usize;

    /// Largest support size `m`.
    fn max_support(&self) -> usize;

    /// `argmin_{v in S} v · score`, ties toward the lexicographically
    /// smallest support.
    fn oracle(&self, score: &[f64]) -> Result<Action>;

    /// Every action in `S`, when the family is small enough to list.
    fn enumerate(&self) -> Option<Vec<Action>> {
        None
    }
}

fn check_scores(score: &[f64], d: usize) -> Result<()> {
    if score.len() != d {
        return Err(Error::Oracle(format!(
            "score vector has length {}, expected {d}",
            score.len()
        )));
    }
    if score.iter().any(|x| !x.is_finite()) {
        return Err(Error::Oracle("non-finite score".into()));
    }
    Ok(())
}

/// Single components: the multi-armed bandit action set.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Simplex {
    pub d: usize,
}

impl DecisionSet for Simplex {
    fn dim(&self) -> usize {
        self.d
    }

    fn max_support(&self) -> usize {
        1
    }

    fn oracle(&self, score: &[f64]) -> Result<Action> {
        simplex_oracle(score)
    }

    fn enumerate(&self) -> Option<Vec<Action>> {
        Some((0..self.d).map(Action::single).collect())
    }
}

/// All subsets of exactly `m` components.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MSets {
    pub d: usize,
    pub m: usize,
}

impl DecisionSet for MSets {
    fn dim(&self) -> usize {
        self.d
    }

    fn max_support(&self) -> usize {
        self.m
    }

    fn oracle(&self, score: &[f64]) -> Result<Action> {
        check_scores(score, self.d)?;
        mset_oracle(score, self.m)
    }

    fn enumerate(&self) -> Option<Vec<Action>> {
        if self.d > 20 {
            return None;
        }
        let sets = (0u32..1 << self.d)
            .filter(|s| s.count_ones() as usize == self.m)
            .map(|s| Action::from_support((0..self.d).filter(|&i| s & (1 << i) != 0).collect()))
            .collect();
        Some(sets)
    }
}

/// `e_argmin`, lowest index on ties.
pub fn simplex_oracle(score: &[f64]) -> Result<Action> {
    check_scores(score, score.len())?;
    let best = score
        .iter()
        .enumerate()
        .fold(None::<(usize, f64)>, |acc, (i, &s)| match acc {
            Some((_, b)) if b <= s => acc,
            _ => Some((i, s)),
        })
        .ok_or_else(|| Error::Oracle("empty score vector".into()))?;
    Ok(Action::single(best.0))
}

/// Indicator of the `m` smallest scores, lower indices first on ties.
pub fn mset_oracle(score: &[f64], m: usize) -> Result<Action> {
    check_scores(score, score.len())?;
    if m == 0 || m > score.len() {
        return Err(Error::Oracle(format!(
            "m = {m} is not in 1..={}",
            score.len()
        )));
    }
    let mut idx: Vec<usize> = (0..score.len()).collect();
    idx.sort_by(|&a, &b| score[a].total_cmp(&score[b]).then(a.cmp(&b)));
    idx.truncate(m);
    Ok(Action::from_support(idx))
}

/// Config-level choice of decision set, written `simplex` or `msets(m)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum DecisionSetKind {
    Simplex,
    Msets { m: usize },
}

impl DecisionSetKind {
    pub fn build(self, d: usize) -> Result<Box<dyn DecisionSet>> {
        match self {
            DecisionSetKind::Simplex => Ok(Box::new(Simplex { d })),
            DecisionSetKind::Msets { m } if m >= 1 && m <= d => Ok(Box::new(MSets { d, m })),
            DecisionSetKind::Msets { m } => Err(Error::Config(format!(
                "msets(m) needs 1 <= m <= d, got m = {m}, d = {d}"
            ))),
        }
    }

    pub fn max_support(self) -> usize {
        match self {
            DecisionSetKind::Simplex => 1,
            DecisionSetKind::Msets { m } => m,
        }
    }
}

impl FromStr for DecisionSetKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s == "simplex" {
            return Ok(DecisionSetKind::Simplex);
        }
        s.strip_prefix("msets(")
            .and_then(|rest| rest.strip_suffix(')'))
            .and_then(|m| m.trim().parse().ok())
            .map(|m| DecisionSetKind::Msets { m })
            .ok_or_else(|| {
                Error::Config(format!(
                    "unknown decision set {s:?}; expected simplex or msets(m)"
                ))
            })
    }
}

impl TryFrom<String> for DecisionSetKind {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<DecisionSetKind> for String {
    fn from(kind: DecisionSetKind) -> String {
        kind.to_string()
    }
}

impl fmt::Display for DecisionSetKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DecisionSetKind::Simplex => write!(f, "simplex"),
            DecisionSetKind::Msets { m } => write!(f, "msets({m})"),
        }
    }
}

/// `argmin_{v in S} v · (η L̂ - z)` for a given perturbation `z`.
pub fn lead_with_perturbation(
    cumulative: &[f64],
    eta: f64,
    z: &[f64],
    set: &dyn DecisionSet,
) -> Result<Action> {
    let score: Vec<f64> = cumulative
        .iter()
        .zip(z)
        .map(|(&l, &zi)| eta * l - zi)
        .collect();
    set.oracle(&score)
}

/// Follow-the-perturbed-leader with fresh unit-mean exponential perturbations.
pub fn perturb_and_lead(
    cumulative: &[f64],
    eta: f64,
    set: &dyn DecisionSet,
    rng: &mut (impl Rng + ?Sized),
) -> Result<Action> {
    if !(eta >= 0.0) {
        return Err(usage(format!("eta must be >= 0, got {eta}")));
    }
    let z: Vec<f64> = (0..cumulative.len()).map(|_| Exp1.sample(rng)).collect();
    lead_with_perturbation(cumulative, eta, &z, set)
}

/// Draw from the geometric distribution on `{1, 2, ...}` with success
/// probability `gamma`, by exact inverse CDF.
pub fn sample_geometric(gamma: f64, rng: &mut (impl Rng + ?Sized)) -> u64 {
    if gamma >= 1.0 {
        return 1;
    }
    let u = 1.0 - rng.random::<f64>();
    let k = (u.ln() / (1.0 - gamma).ln()).ceil();
    if k < 1.0 {
        1
    } else {
        k as u64
    }
}

/// Safety stop for resampling: `ceil((d/γ) ln(d · 10^6))` copies.
pub fn default_hard_cap(d: usize, gamma: f64) -> u64 {
    let d = d as f64;
    ((d / gamma) * (d * 1e6).ln()).ceil() as u64
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ResampleOutcome {
    /// `K_i` for observed components, 0 elsewhere.
    pub k: Vec<u64>,
    /// Copies drawn, i.e. oracle calls spent.
    pub oracle_calls: u64,
    /// `K_i` was set by the geometric cap `U_i` rather than an observation.
    pub capped: Vec<bool>,
    /// Sampling stopped at the hard cap with components still pending.
    pub hard_cap_hit: bool,
}

/// Geometric resampling with an arbitrary source of observation copies.
///
/// For each observed component draw `U_i ~ Geometric(γ)`; then draw copies
/// `O'(1), O'(2), ...` one at a time, each serving every pending component,
/// and set `K_i` to the first `k` with `O'_i(k) = 1`, or `U_i` if that comes
/// first. Components whose cap is reached are resolved without a new copy.
pub fn geometric_resample_with<R, F>(
    observed: &[bool],
    gamma: f64,
    hard_cap: u64,
    rng: &mut R,
    mut next_copy: F,
) -> Result<ResampleOutcome>
where
    R: Rng + ?Sized,
    F: FnMut(&mut R) -> Result<Vec<bool>>,
{
    if !(gamma > 0.0 && gamma <= 1.0) {
        return Err(usage(format!("gamma must lie in (0, 1], got {gamma}")));
    }
    let d = observed.len();
    let mut k = vec![0u64; d];
    let mut capped = vec![false; d];
    let mut cap = vec![0u64; d];
    let mut pending: Vec<usize> = Vec::new();
    for i in (0..d).filter(|&i| observed[i]) {
        cap[i] = sample_geometric(gamma, rng);
        pending.push(i);
    }
    let mut calls = 0u64;
    let mut hard_cap_hit = false;
    let mut step = 1u64;
    loop {
        pending.retain(|&i| {
            if cap[i] <= step {
                k[i] = cap[i];
                capped[i] = true;
                false
            } else {
                true
            }
        });
        if pending.is_empty() {
            break;
        }
        if step > hard_cap {
            hard_cap_hit = true;
            for &i in &pending {
                k[i] = cap[i].min(hard_cap);
                capped[i] = true;
            }
            warn!(
                "geometric resampling hit the hard cap of {hard_cap} copies with {} components pending",
                pending.len()
            );
            break;
        }
        let copy = next_copy(rng)?;
        calls += 1;
        pending.retain(|&i| {
            if copy[i] {
                k[i] = step;
                false
            } else {
                true
            }
        });
        step += 1;
    }
    Ok(ResampleOutcome {
        k,
        oracle_calls: calls,
        capped,
        hard_cap_hit,
    })
}

/// Geometric resampling where each copy is a fresh FPL draw with the current
/// round's `L̂` and `η`, pushed through the observability graph.
#[allow(clippy::too_many_arguments)]
pub fn geometric_resample(
    graph: &ObservabilityGraph,
    observed: &[bool],
    gamma: f64,
    set: &dyn DecisionSet,
    cumulative: &[f64],
    eta: f64,
    rng: &mut (impl Rng + ?Sized),
    hard_cap: u64,
) -> Result<ResampleOutcome> {
    geometric_resample_with(observed, gamma, hard_cap, rng, |rng| {
        let copy = perturb_and_lead(cumulative, eta, set, rng)?;
        Ok(observation_indicators(graph, &copy))
    })
}

/// `ℓ̂_i = K_i O_i ℓ_i`, reading only observed entries.
pub fn fplix_estimate(outcome: &ResampleOutcome, losses: &RevealedLosses<'_>) -> Result<Vec<f64>> {
    let mut est = vec![0.0; losses.dim()];
    for i in losses.observed_indices() {
        est[i] = outcome.k[i] as f64 * losses.get(i)?;
    }
    Ok(est)
}

/// FPL-IX rate `η_t = γ_t = sqrt((ln d + 1) / (m (d + sum_{s<t} α̃_s)))`,
/// clamped to at most 1/2.
pub fn fplix_rate(d: usize, m: usize, sum_alpha_tilde: f64) -> Result<f64> {
    if d < 2 || m == 0 {
        return Err(usage(format!(
            "FPL-IX rate needs d >= 2 and m >= 1 (d = {d}, m = {m})"
        )));
    }
    if m * d <= 4 {
        warn!(
            "m d = {} <= 4: outside the range the FPL-IX tuning assumes",
            m * d
        );
    }
    let raw = (((d as f64).ln() + 1.0) / (m as f64 * (d as f64 + sum_alpha_tilde))).sqrt();
    Ok(raw.min(0.5))
}

#[derive(Debug, Clone, PartialEq)]
pub struct FplIxState {
    pub cumulative_estimates: Vec<f64>,
    pub sum_alpha_tilde: f64,
    /// 1-based index of the next round.
    pub round: u64,
}

/// FPL-IX: perturbed leader on geometric-resampling IX estimates.
#[derive(Debug)]
pub struct FplIx {
    set: Box<dyn DecisionSet>,
    state: FplIxState,
    pending_rate: Option<f64>,
}

impl FplIx {
    pub fn new(set: Box<dyn DecisionSet>) -> Result<Self> {
        let d = set.dim();
        fplix_rate(d, set.max_support(), 0.0)?;
        Ok(Self {
            set,
            state: FplIxState {
                cumulative_estimates: vec![0.0; d],
                sum_alpha_tilde: 0.0,
                round: 1,
            },
            pending_rate: None,
        })
    }

    pub fn state(&self) -> &FplIxState {
        &self.state
    }

    pub fn decision_set(&self) -> &dyn DecisionSet {
        self.set.as_ref()
    }

    pub fn current_rate(&self) -> Result<f64> {
        fplix_rate(
            self.set.dim(),
            self.set.max_support(),
            self.state.sum_alpha_tilde,
        )
    }
}

impl Policy for FplIx {
    fn name(&self) -> &'static str {
        "fplix"
    }

    fn dim(&self) -> usize {
        self.set.dim()
    }

    fn select(&mut self, _: Option<&ObservabilityGraph>, rng: &mut dyn RngCore) -> Result<Action> {
        let rate = self.current_rate()?;
        let action = perturb_and_lead(
            &self.state.cumulative_estimates,
            rate,
            self.set.as_ref(),
            rng,
        )?;
        self.pending_rate = Some(rate);
        Ok(action)
    }

    fn update(
        &mut self,
        _action: &Action,
        graph: &ObservabilityGraph,
        losses: &RevealedLosses<'_>,
        rng: &mut dyn RngCore,
    ) -> Result<RoundUpdate> {
        let rate = self
            .pending_rate
            .take()
            .ok_or_else(|| usage("update called before select"))?;
        let d = self.set.dim();
        let outcome = geometric_resample(
            graph,
            losses.observed(),
            rate,
            self.set.as_ref(),
            &self.state.cumulative_estimates,
            rate,
            rng,
            default_hard_cap(d, rate),
        )?;
        let estimates = fplix_estimate(&outcome, losses)?;
        let alpha_tilde = graph.independence_number_greedy();
        for (acc, e) in self.state.cumulative_estimates.iter_mut().zip(&estimates) {
            *acc += e;
        }
        self.state.sum_alpha_tilde += alpha_tilde as f64;
        self.state.round += 1;
        Ok(RoundUpdate {
            estimates,
            rate,
            gamma: rate,
            q_t: None,
            alpha_tilde: Some(alpha_tilde),
            oracle_calls: outcome.oracle_calls,
            hard_cap_hit: outcome.hard_cap_hit,
        })
    }
}

/// Full-information FPL on the true losses, rate
/// `sqrt((ln d + 1) / (m (d + t - 1)))`.
#[derive(Debug)]
pub struct FplFullInfo {
    set: Box<dyn DecisionSet>,
    cumulative: Vec<f64>,
    round: u64,
}

impl FplFullInfo {
    pub fn new(set: Box<dyn DecisionSet>) -> Result<Self> {
        let d = set.dim();
        fplix_rate(d, set.max_support(), 0.0)?;
        Ok(Self {
            set,
            cumulative: vec![0.0; d],
            round: 1,
        })
    }

    fn rate(&self) -> Result<f64> {
        fplix_rate(
            self.set.dim(),
            self.set.max_support(),
            (self.round - 1) as f64,
        )
    }
}

impl Policy for FplFullInfo {
    fn name(&self) -> &'static str {
        "fpl_full_info"
    }

    fn dim(&self) -> usize {
        self.set.dim()
    }

    fn feedback_model(&self) -> FeedbackModel {
        FeedbackModel::FullInformation
    }

    fn select(&mut self, _: Option<&ObservabilityGraph>, rng: &mut dyn RngCore) -> Result<Action> {
        let rate = self.rate()?;
        perturb_and_lead(&self.cumulative, rate, self.set.as_ref(), rng)
    }

    fn update(
        &mut self,
        _action: &Action,
        _graph: &ObservabilityGraph,
        losses: &RevealedLosses<'_>,
        _rng: &mut dyn RngCore,
    ) -> Result<RoundUpdate> {
        let rate = self.rate()?;
        let estimates = (0..losses.dim())
            .map(|i| losses.get(i))
            .collect::<Result<Vec<_>>>()?;
        for (acc, e) in self.cumulative.iter_mut().zip(&estimates) {
            *acc += e;
        }
        self.round += 1;
        Ok(RoundUpdate {
            estimates,
            rate,
            ..RoundUpdate::default()
        })
    }
}
