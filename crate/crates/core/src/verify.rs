//! Randomized property suites for the graph inequalities, the IX estimator
//! and geometric resampling. Each suite compares the library against either a
//! closed form or an independent Monte Carlo estimate.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::bounds::{q_bound, qtilde_bound, qtilde_diagnostic};
use crate::environment::{gen_graph, GraphKind};
use crate::error::{Error, Result};
use crate::exp3ix::{ix_estimate, q_value};
use crate::fplix::{default_hard_cap, geometric_resample_with, MSets};
use crate::graph::{graph_inequality_sides, ObservabilityGraph};
use crate::policy::{observation_indicators, sample_index, Action, RevealedLosses};
use crate::rng::{Role, SeedTree};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Suite {
    /// Weighted in-neighborhood inequality on random graphs and weights.
    #[serde(rename = "lemma1")]
    GraphInequality,
    /// Exp3-IX `Q` against its graph bound.
    #[serde(rename = "lemma2")]
    QBound,
    /// Monte Carlo FPL-IX `Q̃(c)` against its graph bound.
    #[serde(rename = "lemma4")]
    QTildeBound,
    Optimism,
    Resampling,
}

impl Suite {
    pub const ALL: [Suite; 5] = [
        Suite::GraphInequality,
        Suite::QBound,
        Suite::QTildeBound,
        Suite::Optimism,
        Suite::Resampling,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::GraphInequality => "lemma1",
            Suite::QBound => "lemma2",
            Suite::QTildeBound => "lemma4",
            Suite::Optimism => "optimism",
            Suite::Resampling => "resampling",
        }
    }

    pub fn default_cases(self) -> usize {
        match self {
            Suite::GraphInequality | Suite::QBound => 500,
            Suite::QTildeBound => 300,
            Suite::Optimism => 50,
            Suite::Resampling => RESAMPLING_GRID_SIZE,
        }
    }

    /// Monte Carlo draws per case.
    pub fn default_draws(self) -> usize {
        match self {
            Suite::GraphInequality | Suite::QBound => 0,
            Suite::QTildeBound => 100_000,
            Suite::Optimism | Suite::Resampling => 1_000_000,
        }
    }

    fn stream_id(self) -> u64 {
        self as u64
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Suite::ALL
            .into_iter()
            .find(|suite| suite.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown suite {s:?}")))
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct VerifyOptions {
    /// Overrides [`Suite::default_cases`].
    pub cases: Option<usize>,
    pub seed: u64,
    /// Overrides [`Suite::default_draws`].
    pub draws: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteReport {
    pub suite: Suite,
    pub cases: usize,
    pub checks: usize,
    pub failures: usize,
    /// Largest observed `lhs / rhs` for deterministic suites, largest
    /// `|error| / tolerance` for Monte Carlo suites. Below 1 means a pass.
    pub worst_ratio: f64,
    pub elapsed_secs: f64,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.failures == 0
    }
}

impl fmt::Display for SuiteReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} {:<10} cases={} checks={} failures={} worst_ratio={:.4} time={:.2}s",
            if self.passed() { "PASS" } else { "FAIL" },
            self.suite.name(),
            self.cases,
            self.checks,
            self.failures,
            self.worst_ratio,
            self.elapsed_secs
        )
    }
}

#[derive(Default)]
struct Tally {
    checks: usize,
    failures: usize,
    worst: f64,
}

impl Tally {
    /// Records `value <= limit`.
    fn ratio(&mut self, value: f64, limit: f64) {
        self.checks += 1;
        if !(value <= limit) {
            self.failures += 1;
        }
        self.worst = self.worst.max(value / limit);
    }

    /// Records `|estimate - target| <= tolerance`.
    fn close(&mut self, estimate: f64, target: f64, tolerance: f64) {
        self.checks += 1;
        let err = (estimate - target).abs();
        if !(err <= tolerance) {
            self.failures += 1;
        }
        self.worst = self.worst.max(err / tolerance);
    }
}

pub fn run_suite(suite: Suite, opts: &VerifyOptions) -> Result<SuiteReport> {
    let start = Instant::now();
    let cases = opts.cases.unwrap_or(suite.default_cases());
    let draws = opts.draws.unwrap_or(suite.default_draws());
    let mut rng = SeedTree::new(opts.seed).stream(suite.stream_id(), Role::Verify);
    let tally = match suite {
        Suite::GraphInequality => graph_inequality_suite(cases, &mut rng)?,
        Suite::QBound => q_bound_suite(cases, &mut rng)?,
        Suite::QTildeBound => qtilde_bound_suite(cases, draws, &mut rng)?,
        Suite::Optimism => optimism_suite(cases, draws, &mut rng)?,
        Suite::Resampling => resampling_suite(cases, draws, &mut rng)?,
    };
    Ok(SuiteReport {
        suite,
        cases,
        checks: tally.checks,
        failures: tally.failures,
        worst_ratio: tally.worst,
        elapsed_secs: start.elapsed().as_secs_f64(),
    })
}

pub fn run_all(opts: &VerifyOptions) -> Result<Vec<SuiteReport>> {
    Suite::ALL.iter().map(|&s| run_suite(s, opts)).collect()
}

fn random_graph(d: usize, rng: &mut ChaCha8Rng) -> Result<ObservabilityGraph> {
    let r = rng.random::<f64>();
    gen_graph(&GraphKind::ErdosRenyi { r }, d, rng)
}

/// Weights in `[0, 1]` with a random total of at most `m`.
fn random_weights(d: usize, m: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    // Skewed draws so that some weights sit near zero.
    let mut p: Vec<f64> = (0..d).map(|_| rng.random::<f64>().powi(3)).collect();
    let target = rng.random::<f64>() * m.min(d) as f64;
    let total: f64 = p.iter().sum();
    if total > target && total > 0.0 {
        for x in &mut p {
            *x *= target / total;
        }
    }
    p
}

fn random_distribution(d: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let spread = 6.0 * rng.random::<f64>();
    let w: Vec<f64> = (0..d)
        .map(|_| (spread * rng.random::<f64>()).exp())
        .collect();
    let total: f64 = w.iter().sum();
    w.into_iter().map(|x| x / total).collect()
}

fn graph_inequality_suite(cases: usize, rng: &mut ChaCha8Rng) -> Result<Tally> {
    let mut tally = Tally::default();
    for _ in 0..cases {
        let d = rng.random_range(1..=12);
        let m = rng.random_range(1..=3);
        let c = rng.random_range(0.01..=1.0);
        let g = random_graph(d, rng)?;
        let p = random_weights(d, m, rng);
        let sides = graph_inequality_sides(&g, &p, m, c)?;
        debug_assert!(sides.alpha_exact);
        tally.ratio(sides.lhs, sides.rhs);
    }
    Ok(tally)
}

fn q_bound_suite(cases: usize, rng: &mut ChaCha8Rng) -> Result<Tally> {
    let mut tally = Tally::default();
    for _ in 0..cases {
        let d = rng.random_range(2..=20);
        let gamma = rng.random_range(1e-4..=1.0);
        let g = random_graph(d, rng)?;
        let p = random_distribution(d, rng);
        let o = g.observation_probabilities(&p)?;
        let alpha = g.independence_number_exact()?;
        tally.ratio(q_value(&p, &o, gamma), q_bound(alpha, d, gamma)?);
    }
    Ok(tally)
}

fn qtilde_bound_suite(cases: usize, draws: usize, rng: &mut ChaCha8Rng) -> Result<Tally> {
    let mut tally = Tally::default();
    for _ in 0..cases {
        let d = rng.random_range(2..=10);
        let m = rng.random_range(1..=3.min(d));
        let c = rng.random_range(0.01..0.99);
        let eta = rng.random_range(0.0..1.0);
        let g = random_graph(d, rng)?;
        let cumulative: Vec<f64> = (0..d).map(|_| 10.0 * rng.random::<f64>()).collect();
        let set = MSets { d, m };
        let est = qtilde_diagnostic(&set, &cumulative, eta, &g, c, rng, draws)?;
        let bound = qtilde_bound(g.independence_number_exact()?, d, m, c)?;
        tally.ratio(est.value, bound + 4.0 * est.std_error);
    }
    Ok(tally)
}

/// Per-component sums for a running mean and variance.
#[derive(Clone, Copy, Default)]
struct Moments {
    sum: f64,
    sum_sq: f64,
}

impl Moments {
    fn push(&mut self, x: f64) {
        self.sum += x;
        self.sum_sq += x * x;
    }

    fn mean_se(&self, n: usize) -> (f64, f64) {
        let n = n as f64;
        let mean = self.sum / n;
        let var = ((self.sum_sq - n * mean * mean) / (n - 1.0)).max(0.0);
        (mean, (var / n).sqrt())
    }
}

fn optimism_suite(cases: usize, draws: usize, rng: &mut ChaCha8Rng) -> Result<Tally> {
    let mut tally = Tally::default();
    for _ in 0..cases {
        let d = rng.random_range(2..=10);
        let gamma = rng.random_range(0.01..=1.0);
        let g = random_graph(d, rng)?;
        let p = random_distribution(d, rng);
        let losses: Vec<f64> = (0..d).map(|_| rng.random::<f64>()).collect();
        let o = g.observation_probabilities(&p)?;

        // The estimate depends only on the played arm, so tabulate it once.
        let table: Vec<Vec<f64>> = (0..d)
            .map(|arm| {
                let revealed =
                    RevealedLosses::new(&losses, observation_indicators(&g, &Action::single(arm)));
                ix_estimate(&revealed, &o, gamma)
            })
            .collect::<Result<_>>()?;
        let weighted: Vec<f64> = table
            .iter()
            .map(|est| p.iter().zip(est).map(|(pi, e)| pi * e).sum())
            .collect();

        let mut per_component = vec![Moments::default(); d];
        let mut total = Moments::default();
        for _ in 0..draws {
            let arm = sample_index(&p, rng);
            for (acc, &e) in per_component.iter_mut().zip(&table[arm]) {
                acc.push(e);
            }
            total.push(weighted[arm]);
        }

        for i in 0..d {
            let (mean, se) = per_component[i].mean_se(draws);
            let target = losses[i] * o[i] / (o[i] + gamma);
            tally.close(mean, target, 4.0 * se + 1e-9);
        }
        let (mean, se) = total.mean_se(draws);
        let target: f64 = (0..d)
            .map(|i| p[i] * losses[i] - gamma * p[i] * losses[i] / (o[i] + gamma))
            .sum();
        tally.close(mean, target, 4.0 * se + 1e-9);
    }
    Ok(tally)
}

const RESAMPLING_OBS: [f64; 9] = [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9];
const RESAMPLING_GAMMAS: [f64; 3] = [0.1, 0.3, 0.5];
const RESAMPLING_GRID_SIZE: usize = RESAMPLING_OBS.len() * RESAMPLING_GAMMAS.len();

/// Mean `K` against `1 / (o + (1 - o) γ)` with a 2% relative tolerance.
fn resampling_suite(cases: usize, draws: usize, rng: &mut ChaCha8Rng) -> Result<Tally> {
    let mut tally = Tally::default();
    let grid = RESAMPLING_GAMMAS
        .iter()
        .flat_map(|&gamma| RESAMPLING_OBS.iter().map(move |&o| (o, gamma)))
        .take(cases);
    for (o, gamma) in grid {
        let cap = default_hard_cap(1, gamma);
        let mut sum = 0u64;
        for _ in 0..draws {
            let out = geometric_resample_with(&[true], gamma, cap, rng, |r: &mut ChaCha8Rng| {
                Ok(vec![r.random::<f64>() < o])
            })?;
            sum += out.k[0];
        }
        let mean = sum as f64 / draws as f64;
        let target = 1.0 / (o + (1.0 - o) * gamma);
        tally.close(mean, target, 0.02 * target);
    }
    Ok(tally)
}
