//! Closed-form regret and complexity bounds, evaluated on realized run
//! quantities so experiments can assert them.

use log::info;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::environment::{EnvironmentTrace, RoundLog};
use crate::error::{usage, Result};
use crate::fplix::{fplix_rate, perturb_and_lead, DecisionSet};
use crate::graph::{graph_inequality_rhs, ObservabilityGraph};
use crate::policy::{observation_indicators, Action};

/// Upper bound on `Q_t`: `2 α log(1 + (ceil(d²/γ) + d)/α) + 2`.
pub fn q_bound(alpha: usize, d: usize, gamma: f64) -> Result<f64> {
    if alpha == 0 || alpha > d {
        return Err(usage(format!(
            "need 1 <= alpha <= d, got alpha = {alpha}, d = {d}"
        )));
    }
    if !(gamma > 0.0) {
        return Err(usage(format!("gamma must be positive, got {gamma}")));
    }
    Ok(graph_inequality_rhs(alpha, d, 1, gamma))
}

/// Upper bound on `Q̃_t(c)`: `2 m α log(1 + (m ceil(d²/c) + d)/α) + 2m`, `c ∈ (0,1)`.
pub fn qtilde_bound(alpha: usize, d: usize, m: usize, c: f64) -> Result<f64> {
    if alpha == 0 || alpha > d || m == 0 {
        return Err(usage(format!(
            "need 1 <= alpha <= d and m >= 1, got alpha = {alpha}, d = {d}, m = {m}"
        )));
    }
    if !(c > 0.0 && c < 1.0) {
        return Err(usage(format!("c must lie in (0, 1), got {c}")));
    }
    Ok(graph_inequality_rhs(alpha, d, m, c))
}

/// Exp3-IX regret bound on realized independence numbers:
/// `4 sqrt((d + 2 sum_t (H_t α_t + 1)) ln d)` with
/// `H_t = ln(1 + (ceil(d² sqrt(t d / ln d)) + d) / α_t)`.
pub fn exp3ix_regret_bound(d: usize, alphas: &[usize]) -> Result<f64> {
    if d < 2 {
        return Err(usage("bound needs d >= 2"));
    }
    let ln_d = (d as f64).ln();
    let df = d as f64;
    let mut sum = 0.0;
    for (idx, &alpha) in alphas.iter().enumerate() {
        if alpha == 0 {
            return Err(usage(format!("alpha at round {} is zero", idx + 1)));
        }
        let t = (idx + 1) as f64;
        let a = alpha as f64;
        let h = (1.0 + ((df * df * (t * df / ln_d).sqrt()).ceil() + df) / a).ln();
        sum += h * a + 1.0;
    }
    Ok(4.0 * ((df + 2.0 * sum) * ln_d).sqrt())
}

/// `4 sqrt((d + sum_t Q_t) ln d)`: the Exp3-IX bound on one run's realized
/// `Q_t`. The guarantee holds for the mean over runs; per run it is a
/// diagnostic.
pub fn exp3ix_realized_bound(d: usize, q: &[f64]) -> f64 {
    let total: f64 = q.iter().sum();
    4.0 * ((d as f64 + total) * (d as f64).ln()).sqrt()
}

/// Largest `c` passed to [`qtilde_bound`] when `γ/(1-γ)` reaches 1.
pub const QTILDE_C_CEILING: f64 = 1.0 - 1e-9;

/// Fully explicit FPL-IX bound:
/// `m (ln d + 1)/η_T + 4m sum_t η_t B(α_t, γ_t/(1-γ_t)) + sum_t γ_t B(α_t, γ_t)`
/// where `B` is [`qtilde_bound`]. With no rounds, `η_T` is the first-round rate.
pub fn fplix_regret_bound(
    m: usize,
    d: usize,
    etas: &[f64],
    gammas: &[f64],
    alphas: &[usize],
) -> Result<f64> {
    if etas.len() != gammas.len() || etas.len() != alphas.len() {
        return Err(usage("rate and alpha sequences differ in length"));
    }
    if gammas.iter().any(|&g| !(g > 0.0 && g <= 0.5)) {
        return Err(usage("every gamma must lie in (0, 1/2]"));
    }
    if etas.windows(2).any(|w| w[1] > w[0]) {
        return Err(usage("learning rates must be nonincreasing"));
    }
    let eta_last = match etas.last() {
        Some(&eta) => eta,
        None => fplix_rate(d, m, 0.0)?,
    };
    let mf = m as f64;
    let mut total = mf * ((d as f64).ln() + 1.0) / eta_last;
    let mut touched = 0usize;
    for ((&eta, &gamma), &alpha) in etas.iter().zip(gammas).zip(alphas) {
        let mut c = gamma / (1.0 - gamma);
        if c >= QTILDE_C_CEILING {
            c = QTILDE_C_CEILING;
            touched += 1;
        }
        total += 4.0 * mf * eta * qtilde_bound(alpha, d, m, c)?;
        total += gamma * qtilde_bound(alpha, d, m, gamma)?;
    }
    if touched > 0 {
        info!("{touched} rounds had gamma/(1-gamma) >= 1; evaluated at c = {QTILDE_C_CEILING}");
    }
    Ok(total)
}

/// Shape of the FPL-IX regret rate without its unspecified log factor:
/// `m^{3/2} sqrt((d + C sum α_t)(ln d + 1))`. Reported, never asserted.
pub fn fplix_regret_shape(m: usize, d: usize, alphas: &[usize], c: f64) -> f64 {
    let sum: f64 = alphas.iter().map(|&a| a as f64).sum();
    (m as f64).powf(1.5) * ((d as f64 + c * sum) * ((d as f64).ln() + 1.0)).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QTildeEstimate {
    pub value: f64,
    /// Standard error from batch means.
    pub std_error: f64,
}

/// Monte Carlo estimate of `Q̃(c) = sum_i q_i / (o_i + c)`, where `q` and `o`
/// are the marginals of the FPL action and of its observation indicators.
/// Diagnostics only.
pub fn qtilde_diagnostic(
    set: &dyn DecisionSet,
    cumulative: &[f64],
    eta: f64,
    graph: &ObservabilityGraph,
    c: f64,
    rng: &mut (impl Rng + ?Sized),
    samples: usize,
) -> Result<QTildeEstimate> {
    const BATCHES: usize = 20;
    if samples < BATCHES {
        return Err(usage(format!("need at least {BATCHES} samples")));
    }
    let d = set.dim();
    let per_batch = samples / BATCHES;
    let mut q_all = vec![0.0; d];
    let mut o_all = vec![0.0; d];
    let mut batch_values = Vec::with_capacity(BATCHES);
    for _ in 0..BATCHES {
        let mut q = vec![0.0; d];
        let mut o = vec![0.0; d];
        for _ in 0..per_batch {
            let action = perturb_and_lead(cumulative, eta, set, rng)?;
            for &i in action.support() {
                q[i] += 1.0;
            }
            for (i, seen) in observation_indicators(graph, &action)
                .into_iter()
                .enumerate()
            {
                if seen {
                    o[i] += 1.0;
                }
            }
        }
        let n = per_batch as f64;
        batch_values.push((0..d).map(|i| (q[i] / n) / (o[i] / n + c)).sum::<f64>());
        for i in 0..d {
            q_all[i] += q[i];
            o_all[i] += o[i];
        }
    }
    let n = (per_batch * BATCHES) as f64;
    let value = (0..d).map(|i| (q_all[i] / n) / (o_all[i] / n + c)).sum();
    let mean_b = batch_values.iter().sum::<f64>() / BATCHES as f64;
    let var_b = batch_values
        .iter()
        .map(|v| (v - mean_b).powi(2))
        .sum::<f64>()
        / (BATCHES - 1) as f64;
    Ok(QTildeEstimate {
        value,
        std_error: (var_b / BATCHES as f64).sqrt(),
    })
}

/// Loss of the best fixed action over the first `rounds` rounds.
pub fn best_fixed_loss(
    trace: &EnvironmentTrace,
    set: &dyn DecisionSet,
    rounds: usize,
) -> Result<f64> {
    let totals = trace.cumulative_losses(rounds);
    Ok(set.oracle(&totals)?.dot(&totals))
}

/// `sum_t V_t · ℓ_t - min_v v · sum_t ℓ_t` over a complete run.
pub fn empirical_regret(
    logs: &[RoundLog],
    trace: &EnvironmentTrace,
    set: &dyn DecisionSet,
) -> Result<f64> {
    let incurred: f64 = logs.iter().map(|l| l.loss).sum();
    Ok(incurred - best_fixed_loss(trace, set, logs.len())?)
}

/// Cumulative regret after each round in `rounds` (1-based, ascending).
pub fn regret_at(
    logs: &[RoundLog],
    trace: &EnvironmentTrace,
    set: &dyn DecisionSet,
    rounds: &[usize],
) -> Result<Vec<f64>> {
    let d = trace.d;
    let mut totals = vec![0.0; d];
    let mut incurred = 0.0;
    let mut out = Vec::with_capacity(rounds.len());
    let mut next = rounds.iter().peekable();
    for (t, log) in logs.iter().enumerate() {
        incurred += log.loss;
        for (acc, l) in totals.iter_mut().zip(&trace.losses[t]) {
            *acc += l;
        }
        while next.peek() == Some(&&(t + 1)) {
            let best: Action = set.oracle(&totals)?;
            out.push(incurred - best.dot(&totals));
            next.next();
        }
    }
    Ok(out)
}

/// Realized inputs a bound was evaluated on, in summary form.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InputsDigest {
    pub d: usize,
    pub m: usize,
    pub horizon: usize,
    pub mean_alpha: Option<f64>,
    pub mean_alpha_tilde: f64,
    pub final_gamma: Option<f64>,
    pub sum_q: Option<f64>,
}

impl InputsDigest {
    pub fn from_logs(d: usize, m: usize, logs: &[RoundLog]) -> Self {
        let n = logs.len().max(1) as f64;
        let alphas: Option<Vec<usize>> = logs.iter().map(|l| l.alpha_t).collect();
        let qs: Option<Vec<f64>> = logs.iter().map(|l| l.q_t).collect();
        Self {
            d,
            m,
            horizon: logs.len(),
            mean_alpha: alphas.map(|a| a.iter().sum::<usize>() as f64 / n),
            mean_alpha_tilde: logs.iter().map(|l| l.alpha_tilde_t as f64).sum::<f64>() / n,
            final_gamma: logs.last().map(|l| l.gamma),
            sum_q: qs.filter(|q| !q.is_empty()).map(|q| q.iter().sum()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub name: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub per_round_values: Option<Vec<f64>>,
    pub final_value: f64,
    pub inputs_digest: InputsDigest,
}
