//! Experiment configuration, seeded replication, aggregation and output.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use log::{info, warn};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bounds::{
    exp3ix_realized_bound, exp3ix_regret_bound, fplix_regret_bound, fplix_regret_shape, q_bound,
    regret_at, BoundReport, InputsDigest,
};
use crate::environment::{
    run_protocol, EnvironmentConfig, EnvironmentTrace, LossKind, ProtocolOptions, RoundLog,
};
use crate::error::{Error, Result};
use crate::exp3ix::{Exp3, Exp3Dom, Exp3Ix, Hedge};
use crate::fplix::{DecisionSetKind, FplFullInfo, FplIx};
use crate::graph::EXACT_ALPHA_LIMIT;
use crate::policy::Policy;
use crate::rng::{Role, SeedTree};

/// Header of the per-checkpoint CSV.
pub const CSV_HEADER: [&str; 10] = [
    "rep",
    "round",
    "policy",
    "cum_loss",
    "cum_regret",
    "rate",
    "q_t",
    "alpha_t",
    "alpha_tilde_t",
    "oracle_calls",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PolicyKind {
    Exp3ix,
    Exp3,
    Exp3dom,
    Fplix,
    HedgeFullInfo,
    FplFullInfo,
}

impl PolicyKind {
    pub fn as_str(self) -> &'static str {
        match self {
            PolicyKind::Exp3ix => "exp3ix",
            PolicyKind::Exp3 => "exp3",
            PolicyKind::Exp3dom => "exp3dom",
            PolicyKind::Fplix => "fplix",
            PolicyKind::HedgeFullInfo => "hedge_full_info",
            PolicyKind::FplFullInfo => "fpl_full_info",
        }
    }

    fn needs_simplex(self) -> bool {
        matches!(
            self,
            PolicyKind::Exp3ix | PolicyKind::Exp3 | PolicyKind::Exp3dom | PolicyKind::HedgeFullInfo
        )
    }
}

impl fmt::Display for PolicyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Optional knobs for the baselines.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolicyParams {
    /// Uniform mixing for vanilla Exp3 (default 0).
    pub exp3_explore: Option<f64>,
    /// Exploration / learning rate for Exp3-DOM (default `sqrt(ln d / (d T))`, at most 1/2).
    pub exp3dom_gamma: Option<f64>,
}

fn default_true() -> bool {
    true
}

fn default_decision_set() -> DecisionSetKind {
    DecisionSetKind::Simplex
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub policy: PolicyKind,
    #[serde(default = "default_decision_set")]
    pub decision_set: DecisionSetKind,
    pub environment: EnvironmentConfig,
    pub d: usize,
    /// Number of rounds `T`.
    #[serde(alias = "T")]
    pub horizon: usize,
    pub replications: usize,
    pub base_seed: u64,
    /// Default output directory when the CLI gets no `--out`.
    #[serde(default)]
    pub output: Option<PathBuf>,
    #[serde(default = "default_true")]
    pub bound_checks: bool,
    #[serde(default)]
    pub params: PolicyParams,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let mut cfg = Self::from_json(&fs::read_to_string(path)?)?;
        // Relative data paths are resolved against the config file.
        if let Some(dir) = path.parent() {
            cfg.resolve_paths(dir);
        }
        Ok(cfg)
    }

    fn resolve_paths(&mut self, dir: &Path) {
        use crate::environment::GraphKind;
        if let LossKind::FromFile { path } = &mut self.environment.losses {
            if path.is_relative() {
                *path = dir.join(&*path);
            }
        }
        if let GraphKind::FromFile { path } = &mut self.environment.graph {
            if path.is_relative() {
                *path = dir.join(&*path);
            }
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        if self.d < 2 {
            return bad(format!("d must be at least 2, got {}", self.d));
        }
        if self.horizon < 1 {
            return bad("horizon must be at least 1".into());
        }
        if self.replications < 1 {
            return bad("replications must be at least 1".into());
        }
        if self.policy.needs_simplex() && self.decision_set != DecisionSetKind::Simplex {
            return bad(format!(
                "policy {} runs on the simplex only, not {}",
                self.policy, self.decision_set
            ));
        }
        if let DecisionSetKind::Msets { m } = self.decision_set {
            if m < 1 || m > self.d {
                return bad(format!("msets({m}) needs 1 <= m <= d = {}", self.d));
            }
        }
        if let LossKind::IidBernoulli { means } = &self.environment.losses {
            if means.len() != self.d {
                return bad(format!(
                    "iid_bernoulli lists {} means but d = {}",
                    means.len(),
                    self.d
                ));
            }
        }
        if let Some(x) = self.params.exp3_explore {
            if !(0.0..=1.0).contains(&x) {
                return bad(format!("exp3_explore must lie in [0, 1], got {x}"));
            }
        }
        if let Some(x) = self.params.exp3dom_gamma {
            if !(0.0..=1.0).contains(&x) {
                return bad(format!("exp3dom_gamma must lie in [0, 1], got {x}"));
            }
        }
        Ok(())
    }

    pub fn max_support(&self) -> usize {
        self.decision_set.max_support()
    }

    pub fn build_policy(&self) -> Result<Box<dyn Policy>> {
        let d = self.d;
        let t = self.horizon as u64;
        Ok(match self.policy {
            PolicyKind::Exp3ix => Box::new(Exp3Ix::new(d)?),
            PolicyKind::Exp3 => Box::new(Exp3::new(d, t, self.params.exp3_explore.unwrap_or(0.0))?),
            PolicyKind::Exp3dom => Box::new(Exp3Dom::new(
                d,
                self.params
                    .exp3dom_gamma
                    .unwrap_or_else(|| Exp3Dom::default_gamma(d, t)),
            )?),
            PolicyKind::HedgeFullInfo => Box::new(Hedge::new(d, t)?),
            PolicyKind::Fplix => Box::new(FplIx::new(self.decision_set.build(d)?)?),
            PolicyKind::FplFullInfo => Box::new(FplFullInfo::new(self.decision_set.build(d)?)?),
        })
    }

    /// The trace of one replication; depends only on the environment stream.
    pub fn generate_trace(&self, rep: usize) -> Result<EnvironmentTrace> {
        let mut rng = SeedTree::new(self.base_seed).stream(rep as u64, Role::Environment);
        EnvironmentTrace::generate(&self.environment, self.d, self.horizon, &mut rng)
    }
}

/// Rounds `1, 2, 5, 10, 20, 50, ...` up to `horizon`, plus `horizon`.
pub fn checkpoints(horizon: usize) -> Vec<usize> {
    let mut out = Vec::new();
    let mut decade = 1usize;
    'outer: loop {
        for step in [1, 2, 5] {
            let r = step * decade;
            if r > horizon {
                break 'outer;
            }
            out.push(r);
        }
        decade *= 10;
    }
    if out.last() != Some(&horizon) {
        out.push(horizon);
    }
    out
}

/// One CSV row.
#[derive(Debug, Clone, PartialEq)]
pub struct CheckpointRow {
    pub rep: usize,
    pub round: usize,
    pub policy: String,
    pub cum_loss: f64,
    pub cum_regret: f64,
    pub rate: f64,
    pub q_t: Option<f64>,
    pub alpha_t: Option<usize>,
    pub alpha_tilde_t: usize,
    pub oracle_calls: u64,
}

/// Named bound values from one replication.
#[derive(Debug, Clone, PartialEq)]
pub struct ReplicationBounds {
    pub exp3ix_regret_bound: Option<f64>,
    pub exp3ix_realized_bound: Option<f64>,
    pub fplix_regret_bound: Option<f64>,
    pub fplix_regret_shape: Option<f64>,
    pub digest: InputsDigest,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReplicationResult {
    pub rep: usize,
    pub rows: Vec<CheckpointRow>,
    pub final_regret: f64,
    /// Rounds on which `Q_t` was checked against the exact-α bound.
    pub q_bound_checked: usize,
    pub q_bound_violations: usize,
    /// Rounds above the bound evaluated with greedy α̃ (advisory only).
    pub q_bound_greedy_exceedances: usize,
    pub total_oracle_calls: u64,
    pub hard_cap_hits: usize,
    pub bounds: ReplicationBounds,
    pub elapsed_secs: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeanSe {
    pub mean: f64,
    pub se: f64,
}

impl MeanSe {
    pub fn of(values: &[f64]) -> Self {
        let n = values.len() as f64;
        if values.is_empty() {
            return Self { mean: 0.0, se: 0.0 };
        }
        let mean = values.iter().sum::<f64>() / n;
        let se = if values.len() > 1 {
            let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
            (var / n).sqrt()
        } else {
            0.0
        };
        Self { mean, se }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckpointSummary {
    pub round: usize,
    pub regret: MeanSe,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AssertionOutcome {
    pub name: String,
    pub passed: bool,
    /// Diagnostic checks are reported but do not affect the exit status.
    pub diagnostic: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub policy: PolicyKind,
    pub decision_set: DecisionSetKind,
    pub d: usize,
    pub horizon: usize,
    pub replications: usize,
    pub base_seed: u64,
    pub final_regret: MeanSe,
    pub checkpoints: Vec<CheckpointSummary>,
    pub mean_oracle_calls_per_round: f64,
    pub bounds: Vec<BoundReport>,
    pub assertions: Vec<AssertionOutcome>,
    pub all_passed: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RuntimeStats {
    pub total_secs: f64,
    pub mean_replication_secs: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentResult {
    pub replications: Vec<ReplicationResult>,
    pub summary: Summary,
    pub runtime: RuntimeStats,
}

impl ExperimentResult {
    pub fn all_passed(&self) -> bool {
        self.summary.all_passed
    }

    pub fn rows(&self) -> impl Iterator<Item = &CheckpointRow> {
        self.replications.iter().flat_map(|r| r.rows.iter())
    }

    pub fn final_regrets(&self) -> Vec<f64> {
        self.replications.iter().map(|r| r.final_regret).collect()
    }

    /// Mean and standard error of cumulative regret at a checkpoint round.
    pub fn regret_at(&self, round: usize) -> Option<MeanSe> {
        self.summary
            .checkpoints
            .iter()
            .find(|c| c.round == round)
            .map(|c| c.regret)
    }
}

/// Runs one replication end to end.
pub fn run_replication(config: &ExperimentConfig, rep: usize) -> Result<ReplicationResult> {
    let start = Instant::now();
    let trace = config.generate_trace(rep)?;
    let mut policy = config.build_policy()?;
    let set = config.decision_set.build(config.d)?;
    let mut rng = SeedTree::new(config.base_seed).stream(rep as u64, Role::Policy);
    let opts = ProtocolOptions {
        exact_alpha_limit: EXACT_ALPHA_LIMIT,
        record_estimates: false,
    };
    let logs = run_protocol(policy.as_mut(), &trace, &mut rng, &opts)?;

    let rounds = checkpoints(config.horizon);
    let regrets = regret_at(&logs, &trace, set.as_ref(), &rounds)?;
    let mut cum_loss = 0.0;
    let mut rows = Vec::with_capacity(rounds.len());
    let mut next = 0;
    for log in &logs {
        cum_loss += log.loss;
        if next < rounds.len() && log.round == rounds[next] {
            rows.push(CheckpointRow {
                rep,
                round: log.round,
                policy: config.policy.as_str().to_string(),
                cum_loss,
                cum_regret: regrets[next],
                rate: log.rate,
                q_t: log.q_t,
                alpha_t: log.alpha_t,
                alpha_tilde_t: log.alpha_tilde_t,
                oracle_calls: log.oracle_calls,
            });
            next += 1;
        }
    }
    let final_regret = *regrets.last().unwrap_or(&0.0);

    let (q_bound_checked, q_bound_violations, q_bound_greedy_exceedances) = if config.bound_checks {
        check_q_bound(config.d, &logs)?
    } else {
        (0, 0, 0)
    };
    let bounds = replication_bounds(config, &logs)?;
    Ok(ReplicationResult {
        rep,
        rows,
        final_regret,
        q_bound_checked,
        q_bound_violations,
        q_bound_greedy_exceedances,
        total_oracle_calls: logs.iter().map(|l| l.oracle_calls).sum(),
        hard_cap_hits: logs.iter().filter(|l| l.hard_cap_hit).count(),
        bounds,
        elapsed_secs: start.elapsed().as_secs_f64(),
    })
}

/// Checks `Q_t` against its deterministic bound on every logged round.
fn check_q_bound(d: usize, logs: &[RoundLog]) -> Result<(usize, usize, usize)> {
    let mut checked = 0;
    let mut violations = 0;
    let mut advisory = 0;
    for log in logs {
        let Some(q) = log.q_t else { continue };
        match log.alpha_t {
            Some(alpha) => {
                checked += 1;
                let bound = q_bound(alpha, d, log.gamma)?;
                if q > bound {
                    violations += 1;
                    warn!("round {}: Q_t = {q} exceeds its bound {bound}", log.round);
                }
            }
            None => {
                if q > q_bound(log.alpha_tilde_t, d, log.gamma)? {
                    advisory += 1;
                }
            }
        }
    }
    Ok((checked, violations, advisory))
}

fn replication_bounds(config: &ExperimentConfig, logs: &[RoundLog]) -> Result<ReplicationBounds> {
    let d = config.d;
    let m = config.max_support();
    let alphas: Option<Vec<usize>> = logs.iter().map(|l| l.alpha_t).collect();
    let digest = InputsDigest::from_logs(d, m, logs);
    let mut out = ReplicationBounds {
        exp3ix_regret_bound: None,
        exp3ix_realized_bound: None,
        fplix_regret_bound: None,
        fplix_regret_shape: None,
        digest,
    };
    match config.policy {
        PolicyKind::Exp3ix => {
            if let Some(alphas) = &alphas {
                out.exp3ix_regret_bound = Some(exp3ix_regret_bound(d, alphas)?);
            }
            let qs: Vec<f64> = logs.iter().filter_map(|l| l.q_t).collect();
            out.exp3ix_realized_bound = Some(exp3ix_realized_bound(d, &qs));
        }
        PolicyKind::Fplix => {
            if let Some(alphas) = &alphas {
                let etas: Vec<f64> = logs.iter().map(|l| l.rate).collect();
                let gammas: Vec<f64> = logs.iter().map(|l| l.gamma).collect();
                out.fplix_regret_bound = Some(fplix_regret_bound(m, d, &etas, &gammas, alphas)?);
                let c = logs
                    .iter()
                    .zip(alphas)
                    .map(|(l, &a)| a as f64 / l.alpha_tilde_t as f64)
                    .fold(1.0, f64::max);
                out.fplix_regret_shape = Some(fplix_regret_shape(m, d, alphas, c));
            }
        }
        _ => {}
    }
    Ok(out)
}

/// Runs every replication on a pool of `jobs` threads. The result does not
/// depend on `jobs`.
pub fn run_experiment(config: &ExperimentConfig, jobs: usize) -> Result<ExperimentResult> {
    config.validate()?;
    let start = Instant::now();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| Error::Config(format!("cannot start {jobs} worker threads: {e}")))?;
    let replications: Vec<ReplicationResult> = pool.install(|| {
        (0..config.replications)
            .into_par_iter()
            .map(|rep| run_replication(config, rep))
            .collect::<Result<Vec<_>>>()
    })?;
    let summary = summarize(config, &replications)?;
    let total_secs = start.elapsed().as_secs_f64();
    let mean_replication_secs =
        replications.iter().map(|r| r.elapsed_secs).sum::<f64>() / replications.len() as f64;
    info!(
        "{}: {} replications of {} rounds in {total_secs:.2}s",
        config.policy, config.replications, config.horizon
    );
    Ok(ExperimentResult {
        replications,
        summary,
        runtime: RuntimeStats {
            total_secs,
            mean_replication_secs,
        },
    })
}

fn mean_of(values: impl Iterator<Item = Option<f64>>) -> Option<f64> {
    let vals: Option<Vec<f64>> = values.collect();
    vals.filter(|v| !v.is_empty())
        .map(|v| v.iter().sum::<f64>() / v.len() as f64)
}

fn summarize(config: &ExperimentConfig, reps: &[ReplicationResult]) -> Result<Summary> {
    let rounds = checkpoints(config.horizon);
    let checkpoints: Vec<CheckpointSummary> = rounds
        .iter()
        .enumerate()
        .map(|(k, &round)| {
            let vals: Vec<f64> = reps.iter().map(|r| r.rows[k].cum_regret).collect();
            CheckpointSummary {
                round,
                regret: MeanSe::of(&vals),
            }
        })
        .collect();
    let finals: Vec<f64> = reps.iter().map(|r| r.final_regret).collect();
    let final_regret = MeanSe::of(&finals);
    let total_rounds = (config.horizon * reps.len()) as f64;
    let mean_oracle_calls_per_round = reps
        .iter()
        .map(|r| r.total_oracle_calls as f64)
        .sum::<f64>()
        / total_rounds;

    let digest = reps[0].bounds.digest.clone();
    let report = |name: &str, value: f64| BoundReport {
        name: name.to_string(),
        per_round_values: None,
        final_value: value,
        inputs_digest: digest.clone(),
    };
    let mut bounds = Vec::new();
    let mut assertions = Vec::new();

    let ix_bound = mean_of(reps.iter().map(|r| r.bounds.exp3ix_regret_bound));
    let ix_realized = mean_of(reps.iter().map(|r| r.bounds.exp3ix_realized_bound));
    let fpl_bound = mean_of(reps.iter().map(|r| r.bounds.fplix_regret_bound));
    let fpl_shape = mean_of(reps.iter().map(|r| r.bounds.fplix_regret_shape));
    for (name, value) in [
        ("exp3ix_regret_bound", ix_bound),
        ("exp3ix_realized_bound", ix_realized),
        ("fplix_regret_bound", fpl_bound),
        ("fplix_regret_shape", fpl_shape),
    ] {
        if let Some(v) = value {
            bounds.push(report(name, v));
        }
    }

    if config.bound_checks {
        if config.policy == PolicyKind::Exp3ix {
            let checked: usize = reps.iter().map(|r| r.q_bound_checked).sum();
            let violations: usize = reps.iter().map(|r| r.q_bound_violations).sum();
            let advisory: usize = reps.iter().map(|r| r.q_bound_greedy_exceedances).sum();
            assertions.push(AssertionOutcome {
                name: "q_bound".into(),
                passed: violations == 0,
                diagnostic: false,
                detail: format!(
                    "{violations} violations over {checked} rounds with exact alpha; \
                     {advisory} greedy-alpha exceedances (advisory)"
                ),
            });
            if let Some(b) = ix_bound {
                assertions.push(AssertionOutcome {
                    name: "exp3ix_regret_bound".into(),
                    passed: final_regret.mean <= b,
                    diagnostic: false,
                    detail: format!("mean regret {:.3} vs bound {b:.3}", final_regret.mean),
                });
            }
            if let Some(b) = ix_realized {
                assertions.push(AssertionOutcome {
                    name: "exp3ix_realized_bound".into(),
                    passed: final_regret.mean <= b,
                    diagnostic: false,
                    detail: format!(
                        "mean regret {:.3} vs mean realized bound {b:.3}",
                        final_regret.mean
                    ),
                });
                let per_run = reps
                    .iter()
                    .filter(|r| {
                        r.bounds
                            .exp3ix_realized_bound
                            .is_some_and(|b| r.final_regret > b)
                    })
                    .count();
                assertions.push(AssertionOutcome {
                    name: "exp3ix_realized_bound_per_run".into(),
                    passed: per_run == 0,
                    diagnostic: true,
                    detail: format!("{per_run} runs above their own realized bound"),
                });
            }
        }
        if config.policy == PolicyKind::Fplix {
            if let Some(b) = fpl_bound {
                assertions.push(AssertionOutcome {
                    name: "fplix_regret_bound".into(),
                    passed: final_regret.mean <= b,
                    diagnostic: false,
                    detail: format!("mean regret {:.3} vs bound {b:.3}", final_regret.mean),
                });
            }
            let caps: usize = reps.iter().map(|r| r.hard_cap_hits).sum();
            assertions.push(AssertionOutcome {
                name: "resampling_hard_cap".into(),
                passed: caps == 0,
                diagnostic: true,
                detail: format!("{caps} rounds stopped at the resampling safety cap"),
            });
        }
    }
    let all_passed = assertions.iter().all(|a| a.passed || a.diagnostic);
    Ok(Summary {
        policy: config.policy,
        decision_set: config.decision_set,
        d: config.d,
        horizon: config.horizon,
        replications: config.replications,
        base_seed: config.base_seed,
        final_regret,
        checkpoints,
        mean_oracle_calls_per_round,
        bounds,
        assertions,
        all_passed,
    })
}

fn opt_to_string<T: ToString>(x: Option<T>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

/// Writes checkpoint rows under [`CSV_HEADER`].
pub fn write_csv<'a, W: std::io::Write>(
    rows: impl IntoIterator<Item = &'a CheckpointRow>,
    out: W,
) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER)?;
    for r in rows {
        w.write_record([
            r.rep.to_string(),
            r.round.to_string(),
            r.policy.clone(),
            r.cum_loss.to_string(),
            r.cum_regret.to_string(),
            r.rate.to_string(),
            opt_to_string(r.q_t),
            opt_to_string(r.alpha_t),
            r.alpha_tilde_t.to_string(),
            r.oracle_calls.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn emit_csv(result: &ExperimentResult, path: &Path) -> Result<()> {
    write_csv(result.rows(), fs::File::create(path)?)
}

pub fn emit_summary(result: &ExperimentResult, path: &Path) -> Result<()> {
    let mut text = serde_json::to_string_pretty(&result.summary)?;
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}

/// Writes `results.csv` and `summary.json` into `dir`.
pub fn emit_all(result: &ExperimentResult, dir: &Path) -> Result<(PathBuf, PathBuf)> {
    fs::create_dir_all(dir)?;
    let csv_path = dir.join("results.csv");
    let json_path = dir.join("summary.json");
    emit_csv(result, &csv_path)?;
    emit_summary(result, &json_path)?;
    Ok((csv_path, json_path))
}

/// Reads rows written by [`write_csv`].
pub fn read_csv<R: std::io::Read>(input: R) -> Result<Vec<CheckpointRow>> {
    let mut reader = csv::Reader::from_reader(input);
    let header: Vec<String> = reader.headers()?.iter().map(str::to_string).collect();
    if header != CSV_HEADER {
        return Err(Error::Config(format!("unexpected CSV header {header:?}")));
    }
    let num = |field: &str, what: &str| -> Result<f64> {
        field
            .parse()
            .map_err(|e| Error::Config(format!("bad {what} {field:?}: {e}")))
    };
    let int = |field: &str, what: &str| -> Result<u64> {
        field
            .parse()
            .map_err(|e| Error::Config(format!("bad {what} {field:?}: {e}")))
    };
    let mut rows = Vec::new();
    for record in reader.records() {
        let rec = record?;
        let opt = |i: usize| (!rec[i].is_empty()).then(|| &rec[i]);
        rows.push(CheckpointRow {
            rep: int(&rec[0], "rep")? as usize,
            round: int(&rec[1], "round")? as usize,
            policy: rec[2].to_string(),
            cum_loss: num(&rec[3], "cum_loss")?,
            cum_regret: num(&rec[4], "cum_regret")?,
            rate: num(&rec[5], "rate")?,
            q_t: opt(6).map(|f| num(f, "q_t")).transpose()?,
            alpha_t: opt(7)
                .map(|f| int(f, "alpha_t").map(|v| v as usize))
                .transpose()?,
            alpha_tilde_t: int(&rec[8], "alpha_tilde_t")? as usize,
            oracle_calls: int(&rec[9], "oracle_calls")?,
        });
    }
    Ok(rows)
}
