//! Single-component learners (`m = 1`): Exp3-IX with adaptive rates, plus the
//! vanilla Exp3, simplified Exp3-DOM and full-information Hedge baselines.

use rand::RngCore;

use crate::error::{usage, Result};
use crate::graph::ObservabilityGraph;
use crate::policy::{
    sample_index, Action, FeedbackModel, GraphAccess, Policy, RevealedLosses, RoundUpdate,
};

/// Exponential weights `p_i ∝ exp(-η L̂_i)`, max-shifted so the smallest
/// cumulative estimate gets weight one. `η = 0` gives the uniform distribution.
pub fn exp3_weights(cumulative: &[f64], eta: f64) -> Result<Vec<f64>> {
    if cumulative.is_empty() {
        return Err(usage("empty estimate vector"));
    }
    if let Some(i) = cumulative.iter().position(|x| !x.is_finite()) {
        return Err(usage(format!("cumulative estimate {i} is not finite")));
    }
    if !(eta >= 0.0) || !eta.is_finite() {
        return Err(usage(format!(
            "learning rate must be finite and >= 0, got {eta}"
        )));
    }
    let min = cumulative.iter().copied().fold(f64::INFINITY, f64::min);
    let mut w: Vec<f64> = cumulative
        .iter()
        .map(|&l| (-eta * (l - min)).exp())
        .collect();
    let total: f64 = w.iter().sum();
    for x in &mut w {
        *x /= total;
    }
    Ok(w)
}

/// IX loss estimate `ℓ̂_i = O_i ℓ_i / (o_i + γ)`.
pub fn ix_estimate(losses: &RevealedLosses<'_>, o: &[f64], gamma: f64) -> Result<Vec<f64>> {
    if !(gamma > 0.0) {
        return Err(usage(format!(
            "implicit exploration needs gamma > 0, got {gamma}"
        )));
    }
    if o.len() != losses.dim() {
        return Err(usage("observation probabilities have the wrong length"));
    }
    let mut est = vec![0.0; o.len()];
    for i in losses.observed_indices() {
        est[i] = losses.get(i)? / (o[i] + gamma);
    }
    Ok(est)
}

/// `Q = sum_i p_i / (o_i + γ)`.
pub fn q_value(p: &[f64], o: &[f64], gamma: f64) -> f64 {
    p.iter().zip(o).map(|(&pi, &oi)| pi / (oi + gamma)).sum()
}

/// Adaptive Exp3-IX rate `η_t = γ_t = sqrt(ln d / (d + sum_{s<t} Q_s))`.
pub fn exp3ix_rate(d: usize, sum_q: f64) -> Result<f64> {
    if d < 2 {
        return Err(usage("Exp3-IX rate needs d >= 2"));
    }
    if !(sum_q >= 0.0) {
        return Err(usage(format!("sum of Q must be >= 0, got {sum_q}")));
    }
    Ok(((d as f64).ln() / (d as f64 + sum_q)).sqrt())
}

#[derive(Debug, Clone, PartialEq)]
pub struct Exp3IxState {
    pub cumulative_estimates: Vec<f64>,
    pub sum_q: f64,
    /// 1-based index of the next round.
    pub round: u64,
}

impl Exp3IxState {
    pub fn new(d: usize) -> Self {
        Self {
            cumulative_estimates: vec![0.0; d],
            sum_q: 0.0,
            round: 1,
        }
    }
}

/// Exp3-IX: exponential weights on IX estimates, no explicit exploration,
/// graph needed only after the action is drawn.
#[derive(Debug, Clone)]
pub struct Exp3Ix {
    state: Exp3IxState,
    pending: Option<(Vec<f64>, f64)>,
}

impl Exp3Ix {
    pub fn new(d: usize) -> Result<Self> {
        exp3ix_rate(d, 0.0)?;
        Ok(Self {
            state: Exp3IxState::new(d),
            pending: None,
        })
    }

    pub fn state(&self) -> &Exp3IxState {
        &self.state
    }

    /// Rate and sampling distribution for the upcoming round.
    pub fn distribution(&self) -> Result<(f64, Vec<f64>)> {
        let d = self.state.cumulative_estimates.len();
        let rate = exp3ix_rate(d, self.state.sum_q)?;
        let p = exp3_weights(&self.state.cumulative_estimates, rate)?;
        Ok((rate, p))
    }
}

impl Policy for Exp3Ix {
    fn name(&self) -> &'static str {
        "exp3ix"
    }

    fn dim(&self) -> usize {
        self.state.cumulative_estimates.len()
    }

    fn select(&mut self, _: Option<&ObservabilityGraph>, rng: &mut dyn RngCore) -> Result<Action> {
        let (rate, p) = self.distribution()?;
        let i = sample_index(&p, rng);
        self.pending = Some((p, rate));
        Ok(Action::single(i))
    }

    fn update(
        &mut self,
        _action: &Action,
        graph: &ObservabilityGraph,
        losses: &RevealedLosses<'_>,
        _rng: &mut dyn RngCore,
    ) -> Result<RoundUpdate> {
        let (p, rate) = self
            .pending
            .take()
            .ok_or_else(|| usage("update called before select"))?;
        let o = graph.observation_probabilities(&p)?;
        let estimates = ix_estimate(losses, &o, rate)?;
        let q = q_value(&p, &o, rate);
        for (acc, e) in self.state.cumulative_estimates.iter_mut().zip(&estimates) {
            *acc += e;
        }
        self.state.sum_q += q;
        self.state.round += 1;
        Ok(RoundUpdate {
            estimates,
            rate,
            gamma: rate,
            q_t: Some(q),
            ..RoundUpdate::default()
        })
    }
}

/// Exp3 ignoring side observations: importance-weighted estimate of the played
/// arm only, fixed `η = sqrt(ln d / (d T))`, uniform mixing `γ_explore`.
#[derive(Debug, Clone)]
pub struct Exp3 {
    cumulative: Vec<f64>,
    eta: f64,
    explore: f64,
    pending: Option<Vec<f64>>,
}

impl Exp3 {
    pub fn new(d: usize, horizon: u64, explore: f64) -> Result<Self> {
        if d < 2 {
            return Err(usage("Exp3 needs d >= 2"));
        }
        if horizon == 0 {
            return Err(usage("Exp3 needs the horizon T"));
        }
        if !(0.0..=1.0).contains(&explore) {
            return Err(usage(format!(
                "exploration rate must lie in [0,1], got {explore}"
            )));
        }
        Ok(Self {
            cumulative: vec![0.0; d],
            eta: Self::default_rate(d, horizon),
            explore,
            pending: None,
        })
    }

    pub fn default_rate(d: usize, horizon: u64) -> f64 {
        ((d as f64).ln() / (d as f64 * horizon as f64)).sqrt()
    }

    pub fn distribution(&self) -> Result<Vec<f64>> {
        let d = self.cumulative.len() as f64;
        let mut p = exp3_weights(&self.cumulative, self.eta)?;
        for x in &mut p {
            *x = (1.0 - self.explore) * *x + self.explore / d;
        }
        Ok(p)
    }
}

impl Policy for Exp3 {
    fn name(&self) -> &'static str {
        "exp3"
    }

    fn dim(&self) -> usize {
        self.cumulative.len()
    }

    fn select(&mut self, _: Option<&ObservabilityGraph>, rng: &mut dyn RngCore) -> Result<Action> {
        let p = self.distribution()?;
        let i = sample_index(&p, rng);
        self.pending = Some(p);
        Ok(Action::single(i))
    }

    fn update(
        &mut self,
        action: &Action,
        _graph: &ObservabilityGraph,
        losses: &RevealedLosses<'_>,
        _rng: &mut dyn RngCore,
    ) -> Result<RoundUpdate> {
        let p = self
            .pending
            .take()
            .ok_or_else(|| usage("update called before select"))?;
        let i = action.support()[0];
        let mut estimates = vec![0.0; p.len()];
        estimates[i] = losses.get(i)? / p[i];
        self.cumulative[i] += estimates[i];
        Ok(RoundUpdate {
            estimates,
            rate: self.eta,
            gamma: self.explore,
            ..RoundUpdate::default()
        })
    }
}

/// Simplified Exp3-DOM: one fixed `γ`, exploration uniform over a greedy
/// dominating set of the round's graph (seen before acting), unbiased
/// estimates `ℓ_i / o_i`, weights updated with rate `γ`.
#[derive(Debug, Clone)]
pub struct Exp3Dom {
    cumulative: Vec<f64>,
    gamma: f64,
    pending: Option<Vec<f64>>,
}

impl Exp3Dom {
    pub fn new(d: usize, gamma: f64) -> Result<Self> {
        if d < 2 {
            return Err(usage("Exp3-DOM needs d >= 2"));
        }
        if !(0.0..=1.0).contains(&gamma) {
            return Err(usage(format!("gamma must lie in [0,1], got {gamma}")));
        }
        Ok(Self {
            cumulative: vec![0.0; d],
            gamma,
            pending: None,
        })
    }

    pub fn default_gamma(d: usize, horizon: u64) -> f64 {
        ((d as f64).ln() / (d as f64 * horizon.max(1) as f64))
            .sqrt()
            .min(0.5)
    }

    /// `(1-γ) p + γ μ`, with `μ` uniform over the dominating set of `graph`.
    pub fn distribution(&self, graph: &ObservabilityGraph) -> Result<Vec<f64>> {
        let p = exp3_weights(&self.cumulative, self.gamma)?;
        let dom = graph.greedy_dominating_set();
        let share = self.gamma / dom.len() as f64;
        let mut mixed: Vec<f64> = p.iter().map(|&x| (1.0 - self.gamma) * x).collect();
        for &j in &dom {
            mixed[j] += share;
        }
        Ok(mixed)
    }
}

impl Policy for Exp3Dom {
    fn name(&self) -> &'static str {
        "exp3dom"
    }

    fn dim(&self) -> usize {
        self.cumulative.len()
    }

    fn graph_access(&self) -> GraphAccess {
        GraphAccess::PreAction
    }

    fn select(
        &mut self,
        graph: Option<&ObservabilityGraph>,
        rng: &mut dyn RngCore,
    ) -> Result<Action> {
        let graph = graph.ok_or_else(|| usage("Exp3-DOM needs the graph before acting"))?;
        let mixed = self.distribution(graph)?;
        let i = sample_index(&mixed, rng);
        self.pending = Some(mixed);
        Ok(Action::single(i))
    }

    fn update(
        &mut self,
        _action: &Action,
        graph: &ObservabilityGraph,
        losses: &RevealedLosses<'_>,
        _rng: &mut dyn RngCore,
    ) -> Result<RoundUpdate> {
        let mixed = self
            .pending
            .take()
            .ok_or_else(|| usage("update called before select"))?;
        let o = graph.observation_probabilities(&mixed)?;
        let mut estimates = vec![0.0; o.len()];
        for i in losses.observed_indices() {
            estimates[i] = losses.get(i)? / o[i];
        }
        for (acc, e) in self.cumulative.iter_mut().zip(&estimates) {
            *acc += e;
        }
        Ok(RoundUpdate {
            estimates,
            rate: self.gamma,
            gamma: self.gamma,
            ..RoundUpdate::default()
        })
    }
}

/// Exponential weights with the full loss vector, `η = sqrt(8 ln d / T)`.
#[derive(Debug, Clone)]
pub struct Hedge {
    cumulative: Vec<f64>,
    eta: f64,
}

impl Hedge {
    pub fn new(d: usize, horizon: u64) -> Result<Self> {
        if d < 2 || horizon == 0 {
            return Err(usage("Hedge needs d >= 2 and T >= 1"));
        }
        Ok(Self {
            cumulative: vec![0.0; d],
            eta: (8.0 * (d as f64).ln() / horizon as f64).sqrt(),
        })
    }
}

impl Policy for Hedge {
    fn name(&self) -> &'static str {
        "hedge_full_info"
    }

    fn dim(&self) -> usize {
        self.cumulative.len()
    }

    fn feedback_model(&self) -> FeedbackModel {
        FeedbackModel::FullInformation
    }

    fn select(&mut self, _: Option<&ObservabilityGraph>, rng: &mut dyn RngCore) -> Result<Action> {
        let p = exp3_weights(&self.cumulative, self.eta)?;
        Ok(Action::single(sample_index(&p, rng)))
    }

    fn update(
        &mut self,
        _action: &Action,
        _graph: &ObservabilityGraph,
        losses: &RevealedLosses<'_>,
        _rng: &mut dyn RngCore,
    ) -> Result<RoundUpdate> {
        let estimates = (0..losses.dim())
            .map(|i| losses.get(i))
            .collect::<Result<Vec<_>>>()?;
        for (acc, e) in self.cumulative.iter_mut().zip(&estimates) {
            *acc += e;
        }
        Ok(RoundUpdate {
            estimates,
            rate: self.eta,
            ..RoundUpdate::default()
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::policy::observation_indicators;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn weights_examples() {
        for eta in [0.0, 0.7, 3.0] {
            let p = exp3_weights(&[0.0; 4], eta).unwrap();
            assert!(p.iter().all(|&x| (x - 0.25).abs() < 1e-15));
        }
        let p = exp3_weights(&[1.0, 5.0, 9.0], 0.0).unwrap();
        assert!(p.iter().all(|&x| (x - 1.0 / 3.0).abs() < 1e-15));

        let p = exp3_weights(&[0.0, 2f64.ln()], 1.0).unwrap();
        assert!((p[0] - 2.0 / 3.0).abs() < 1e-15);
        assert!((p[1] - 1.0 / 3.0).abs() < 1e-15);

        assert!(exp3_weights(&[0.0, f64::NAN], 1.0).is_err());
        assert!(exp3_weights(&[0.0, f64::INFINITY], 1.0).is_err());
    }

    #[test]
    fn weights_survive_huge_estimates() {
        let p = exp3_weights(&[1e6, 1e6 + 1.0, 2e6], 5.0).unwrap();
        assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!(p[0] > 0.99);
    }

    #[test]
    fn ix_estimate_examples() {
        let losses = [1.0, 0.6, 0.9];
        let r = RevealedLosses::new(&losses, vec![true, true, false]);
        let est = ix_estimate(&r, &[0.5, 0.2, 0.3], 0.5).unwrap();
        assert_eq!(est[0], 1.0);
        assert_eq!(est[2], 0.0);
        let est = ix_estimate(&r, &[0.5, 0.2, 0.3], 0.1).unwrap();
        assert!((est[1] - 2.0).abs() < 1e-14);
        assert!(ix_estimate(&r, &[0.5, 0.2, 0.3], 0.0).is_err());
        assert!(ix_estimate(&r, &[0.5, 0.2, 0.3], -1.0).is_err());
    }

    #[test]
    fn q_value_examples() {
        let p = [0.1, 0.2, 0.3, 0.4];
        let q = q_value(&p, &[1.0; 4], 0.25);
        assert!((q - 1.0 / 1.25).abs() < 1e-15);

        let d = 5;
        let gamma = 0.3;
        let uniform = vec![1.0 / d as f64; d];
        let q = q_value(&uniform, &uniform, gamma);
        assert!((q - d as f64 / (1.0 + d as f64 * gamma)).abs() < 1e-12);
    }

    #[test]
    fn rate_examples() {
        assert!((exp3ix_rate(10, 0.0).unwrap() - 0.4799).abs() < 1e-4);
        assert!((exp3ix_rate(10, 1.0).unwrap() - 0.4576).abs() < 1e-4);
        assert!(exp3ix_rate(10, 1e12).unwrap() < 1e-5);
        assert!(exp3ix_rate(1, 0.0).is_err());
        assert!(exp3ix_rate(10, 2.0).unwrap() < exp3ix_rate(10, 1.0).unwrap());
    }

    #[test]
    fn complete_graph_estimates_are_deterministic() {
        let d = 6;
        let g = ObservabilityGraph::complete(d).unwrap();
        let mut policy = Exp3Ix::new(d).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let losses = [0.1, 0.9, 0.4, 0.0, 1.0, 0.55];
        for _ in 0..20 {
            let a = policy.select(None, &mut rng).unwrap();
            let r = RevealedLosses::new(&losses, observation_indicators(&g, &a));
            let u = policy.update(&a, &g, &r, &mut rng).unwrap();
            for (est, l) in u.estimates.iter().zip(&losses) {
                assert_eq!(*est, l / (1.0 + u.gamma));
            }
        }
    }

    #[test]
    fn empty_graph_estimate_has_single_support() {
        let d = 5;
        let g = ObservabilityGraph::empty(d).unwrap();
        let mut policy = Exp3Ix::new(d).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let losses = [0.5; 5];
        for _ in 0..20 {
            let a = policy.select(None, &mut rng).unwrap();
            let r = RevealedLosses::new(&losses, observation_indicators(&g, &a));
            let u = policy.update(&a, &g, &r, &mut rng).unwrap();
            let nz: Vec<usize> = (0..d).filter(|&i| u.estimates[i] != 0.0).collect();
            assert_eq!(nz, a.support());
            assert_eq!(r.reads(), a.support());
        }
    }

    #[test]
    fn rates_never_increase_and_state_grows() {
        let d = 8;
        let g = ObservabilityGraph::new(d, [(0, 1), (2, 3), (4, 5), (6, 7), (7, 0)]).unwrap();
        let mut policy = Exp3Ix::new(d).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let losses: Vec<f64> = (0..d).map(|i| i as f64 / d as f64).collect();
        let mut last_rate = f64::INFINITY;
        let mut last_sum_q = 0.0;
        for _ in 0..100 {
            let a = policy.select(None, &mut rng).unwrap();
            let r = RevealedLosses::new(&losses, observation_indicators(&g, &a));
            let u = policy.update(&a, &g, &r, &mut rng).unwrap();
            assert!(u.rate <= last_rate);
            last_rate = u.rate;
            assert!(policy.state().sum_q >= last_sum_q);
            last_sum_q = policy.state().sum_q;
            assert!(policy
                .state()
                .cumulative_estimates
                .iter()
                .all(|&x| x >= 0.0));
        }
        assert_eq!(policy.state().round, 101);
    }

    #[test]
    fn exp3_estimate_examples() {
        let g = ObservabilityGraph::complete(2).unwrap();
        let mut policy = Exp3::new(2, 100, 0.0).unwrap();
        let losses = [1.0, 0.3];
        // First round is uniform; force the action through the pending state.
        policy.pending = Some(vec![0.5, 0.5]);
        let a = Action::single(0);
        let r = RevealedLosses::new(&losses, observation_indicators(&g, &a));
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let u = policy.update(&a, &g, &r, &mut rng).unwrap();
        assert_eq!(u.estimates, vec![2.0, 0.0]);
        // Side observations are available but never read.
        assert_eq!(r.reads(), vec![0]);
        assert!(Exp3::new(2, 0, 0.0).is_err());
    }

    #[test]
    fn exp3_is_unbiased() {
        let d = 3;
        let g = ObservabilityGraph::empty(d).unwrap();
        let losses = [0.2, 0.7, 1.0];
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let policy = Exp3::new(d, 10, 0.1).unwrap();
        let n = 200_000;
        let mut sum = [0.0; 3];
        let mut sum_sq = [0.0; 3];
        for _ in 0..n {
            let mut p = policy.clone();
            let a = p.select(None, &mut rng).unwrap();
            let r = RevealedLosses::new(&losses, observation_indicators(&g, &a));
            let u = p.update(&a, &g, &r, &mut rng).unwrap();
            for i in 0..d {
                sum[i] += u.estimates[i];
                sum_sq[i] += u.estimates[i] * u.estimates[i];
            }
        }
        for i in 0..d {
            let mean = sum[i] / n as f64;
            let var = sum_sq[i] / n as f64 - mean * mean;
            let se = (var / n as f64).sqrt();
            assert!((mean - losses[i]).abs() <= 4.0 * se, "{i}: {mean}");
        }
    }

    #[test]
    fn exp3dom_examples() {
        let g = ObservabilityGraph::complete(4).unwrap();
        let mut policy = Exp3Dom::new(4, 0.2).unwrap();
        policy.cumulative = vec![0.0, 1.0, 2.0, 3.0];
        let p = exp3_weights(&policy.cumulative, 0.2).unwrap();
        let mixed = policy.distribution(&g).unwrap();
        for i in 0..4 {
            let expected = 0.8 * p[i] + if i == 0 { 0.2 } else { 0.0 };
            assert!((mixed[i] - expected).abs() < 1e-15);
        }

        let plain = Exp3Dom::new(4, 0.0).unwrap();
        let mixed = plain.distribution(&g).unwrap();
        assert!(mixed.iter().all(|&x| (x - 0.25).abs() < 1e-15));

        let mut rng = ChaCha8Rng::seed_from_u64(4);
        assert!(policy.select(None, &mut rng).is_err());
    }

    #[test]
    fn exp3dom_observation_floor() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let d = 7;
        let g = ObservabilityGraph::new(d, [(0, 1), (1, 2), (3, 4), (5, 6), (6, 5)]).unwrap();
        let gamma = 0.3;
        let mut policy = Exp3Dom::new(d, gamma).unwrap();
        let losses = [0.3, 0.1, 0.9, 0.4, 0.8, 0.2, 0.6];
        let dom = g.greedy_dominating_set().len() as f64;
        for _ in 0..50 {
            let mixed = policy.distribution(&g).unwrap();
            assert!((mixed.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            let o = g.observation_probabilities(&mixed).unwrap();
            assert!(o.iter().all(|&x| x >= gamma / dom - 1e-15));
            let a = policy.select(Some(&g), &mut rng).unwrap();
            let r = RevealedLosses::new(&losses, observation_indicators(&g, &a));
            policy.update(&a, &g, &r, &mut rng).unwrap();
        }
    }
}
