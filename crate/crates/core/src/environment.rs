//! Oblivious adversaries and the interaction protocol.
//!
//! A trace (losses and graphs for every round) is materialized before the
//! learner acts. [`run_protocol`] then plays it against a policy, revealing
//! only the losses the round's graph and action allow.

use std::path::{Path, PathBuf};

use rand::{Rng, RngCore};
use serde::{Deserialize, Serialize};

use crate::error::{usage, Error, Result};
use crate::graph::{read_graphs, ObservabilityGraph, EXACT_ALPHA_LIMIT};
use crate::policy::{
    observation_indicators, Action, FeedbackModel, GraphAccess, Policy, RevealedLosses,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LossKind {
    /// Independent Bernoulli losses with per-component means.
    IidBernoulli { means: Vec<f64> },
    /// Independent uniform losses on `[0, 1]`.
    IidUniform,
    /// Bernoulli losses with mean 0.5, except one component at `0.5 - gap`;
    /// that component moves to the next index every `period` rounds.
    Switching { period: usize, gap: f64 },
    /// CSV file with `T` rows and `d` columns.
    FromFile { path: PathBuf },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GraphKind {
    Empty,
    Complete,
    /// Each ordered cross pair independently with probability `r`.
    ErdosRenyi {
        r: f64,
    },
    /// `c` bidirected cliques over contiguous blocks of nodes.
    CliquePartition {
        c: usize,
    },
    /// The center observes every node.
    Star {
        center: usize,
    },
    /// Graph text file: one block for a fixed graph or `T` blocks, one per round.
    FromFile {
        path: PathBuf,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnvironmentConfig {
    pub losses: LossKind,
    pub graph: GraphKind,
    /// Redraw the graph independently every round.
    #[serde(default)]
    pub per_round: bool,
}

fn bernoulli(mean: f64, rng: &mut (impl Rng + ?Sized)) -> f64 {
    if rng.random::<f64>() < mean {
        1.0
    } else {
        0.0
    }
}

/// `T x d` loss array in `[0, 1]`.
pub fn gen_losses(
    kind: &LossKind,
    d: usize,
    horizon: usize,
    rng: &mut (impl Rng + ?Sized),
) -> Result<Vec<Vec<f64>>> {
    match kind {
        LossKind::IidBernoulli { means } => {
            if means.len() != d {
                return Err(usage(format!("{} means given for d = {d}", means.len())));
            }
            if means.iter().any(|m| !(0.0..=1.0).contains(m)) {
                return Err(usage("Bernoulli means must lie in [0, 1]"));
            }
            Ok((0..horizon)
                .map(|_| means.iter().map(|&m| bernoulli(m, rng)).collect())
                .collect())
        }
        LossKind::IidUniform => Ok((0..horizon)
            .map(|_| (0..d).map(|_| rng.random::<f64>()).collect())
            .collect()),
        LossKind::Switching { period, gap } => {
            if *period == 0 {
                return Err(usage("switching period must be positive"));
            }
            if !(0.0..=0.5).contains(gap) {
                return Err(usage(format!(
                    "switching gap must lie in [0, 0.5], got {gap}"
                )));
            }
            Ok((0..horizon)
                .map(|t| {
                    let best = (t / period) % d;
                    (0..d)
                        .map(|i| bernoulli(if i == best { 0.5 - gap } else { 0.5 }, rng))
                        .collect()
                })
                .collect())
        }
        LossKind::FromFile { path } => {
            let losses = read_loss_csv(path)?;
            if losses.len() != horizon || losses.iter().any(|r| r.len() != d) {
                return Err(usage(format!(
                    "{} holds a {}x{} array, expected {horizon}x{d}",
                    path.display(),
                    losses.len(),
                    losses.first().map_or(0, Vec::len)
                )));
            }
            Ok(losses)
        }
    }
}

/// Reads a headerless CSV of losses in `[0, 1]`.
pub fn read_loss_csv(path: &Path) -> Result<Vec<Vec<f64>>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_path(path)?;
    let mut rows = Vec::new();
    for (idx, record) in reader.records().enumerate() {
        let record = record?;
        let row = record
            .iter()
            .map(|field| {
                let v: f64 = field.parse().map_err(|e| Error::Parse {
                    path: path.to_path_buf(),
                    line: idx + 1,
                    msg: format!("{field:?}: {e}"),
                })?;
                if (0.0..=1.0).contains(&v) {
                    Ok(v)
                } else {
                    Err(Error::Parse {
                        path: path.to_path_buf(),
                        line: idx + 1,
                        msg: format!("loss {v} outside [0, 1]"),
                    })
                }
            })
            .collect::<Result<Vec<f64>>>()?;
        rows.push(row);
    }
    Ok(rows)
}

pub fn gen_graph(
    kind: &GraphKind,
    d: usize,
    rng: &mut (impl Rng + ?Sized),
) -> Result<ObservabilityGraph> {
    match kind {
        GraphKind::Empty => ObservabilityGraph::empty(d),
        GraphKind::Complete => ObservabilityGraph::complete(d),
        GraphKind::ErdosRenyi { r } => {
            if !(0.0..=1.0).contains(r) {
                return Err(usage(format!(
                    "edge probability must lie in [0, 1], got {r}"
                )));
            }
            let mut edges = Vec::new();
            for j in 0..d {
                for i in 0..d {
                    if i != j && rng.random::<f64>() < *r {
                        edges.push((j, i));
                    }
                }
            }
            ObservabilityGraph::new(d, edges)
        }
        GraphKind::CliquePartition { c } => {
            if *c == 0 || *c > d {
                return Err(usage(format!(
                    "need 1 <= c <= d cliques, got c = {c}, d = {d}"
                )));
            }
            let block = |i: usize| i * c / d;
            let edges = (0..d)
                .flat_map(|j| (0..d).map(move |i| (j, i)))
                .filter(|&(j, i)| block(j) == block(i));
            ObservabilityGraph::new(d, edges)
        }
        GraphKind::Star { center } => {
            if *center >= d {
                return Err(usage(format!(
                    "star center {center} out of range for d = {d}"
                )));
            }
            ObservabilityGraph::new(d, (0..d).map(|i| (*center, i)))
        }
        GraphKind::FromFile { path } => {
            let mut graphs = read_graphs(path)?;
            if graphs.len() != 1 {
                return Err(usage(format!(
                    "{} holds {} graphs; a single graph was expected",
                    path.display(),
                    graphs.len()
                )));
            }
            let g = graphs.remove(0);
            if g.dim() != d {
                return Err(usage(format!(
                    "graph file has d = {}, expected {d}",
                    g.dim()
                )));
            }
            Ok(g)
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum GraphSequence {
    Fixed(ObservabilityGraph),
    PerRound(Vec<ObservabilityGraph>),
}

/// Everything the adversary commits to before the first round.
#[derive(Debug, Clone, PartialEq)]
pub struct EnvironmentTrace {
    pub d: usize,
    pub losses: Vec<Vec<f64>>,
    pub graphs: GraphSequence,
}

impl EnvironmentTrace {
    pub fn new(losses: Vec<Vec<f64>>, graphs: GraphSequence) -> Result<Self> {
        let d = match &graphs {
            GraphSequence::Fixed(g) => g.dim(),
            GraphSequence::PerRound(gs) => gs
                .first()
                .map(ObservabilityGraph::dim)
                .ok_or_else(|| usage("empty graph sequence"))?,
        };
        if let GraphSequence::PerRound(gs) = &graphs {
            if gs.len() != losses.len() {
                return Err(usage(format!(
                    "{} graphs for {} rounds",
                    gs.len(),
                    losses.len()
                )));
            }
            if gs.iter().any(|g| g.dim() != d) {
                return Err(usage("graphs of mixed dimension"));
            }
        }
        for (t, row) in losses.iter().enumerate() {
            if row.len() != d {
                return Err(usage(format!(
                    "round {} has {} losses, expected {d}",
                    t + 1,
                    row.len()
                )));
            }
            if row.iter().any(|l| !(0.0..=1.0).contains(l)) {
                return Err(usage(format!("round {} has a loss outside [0, 1]", t + 1)));
            }
        }
        Ok(Self { d, losses, graphs })
    }

    /// Draws a full trace from `config`.
    pub fn generate(
        config: &EnvironmentConfig,
        d: usize,
        horizon: usize,
        rng: &mut (impl Rng + ?Sized),
    ) -> Result<Self> {
        let losses = gen_losses(&config.losses, d, horizon, rng)?;
        let graphs = match (&config.graph, config.per_round) {
            (GraphKind::FromFile { path }, _) => {
                let gs = read_graphs(path)?;
                if gs.len() == 1 {
                    GraphSequence::Fixed(gs.into_iter().next().unwrap())
                } else {
                    GraphSequence::PerRound(gs)
                }
            }
            (kind, true) => GraphSequence::PerRound(
                (0..horizon)
                    .map(|_| gen_graph(kind, d, rng))
                    .collect::<Result<_>>()?,
            ),
            (kind, false) => GraphSequence::Fixed(gen_graph(kind, d, rng)?),
        };
        Self::new(losses, graphs)
    }

    pub fn horizon(&self) -> usize {
        self.losses.len()
    }

    /// Graph of round `t` (0-based).
    pub fn graph(&self, t: usize) -> &ObservabilityGraph {
        match &self.graphs {
            GraphSequence::Fixed(g) => g,
            GraphSequence::PerRound(gs) => &gs[t],
        }
    }

    /// `sum_t ℓ_t` over the first `rounds` rounds.
    pub fn cumulative_losses(&self, rounds: usize) -> Vec<f64> {
        let mut total = vec![0.0; self.d];
        for row in &self.losses[..rounds] {
            for (acc, l) in total.iter_mut().zip(row) {
                *acc += l;
            }
        }
        total
    }
}

/// One round of interaction as seen from outside the learner.
#[derive(Debug, Clone, PartialEq)]
pub struct RoundLog {
    /// 1-based.
    pub round: usize,
    pub action: Vec<usize>,
    pub loss: f64,
    /// Components whose losses were revealed.
    pub observed: Vec<usize>,
    pub rate: f64,
    pub gamma: f64,
    pub q_t: Option<f64>,
    /// Exact independence number of the round's graph, when small enough.
    pub alpha_t: Option<usize>,
    pub alpha_tilde_t: usize,
    pub oracle_calls: u64,
    /// Whether the policy saw the graph before acting.
    pub graph_pre_action: bool,
    pub hard_cap_hit: bool,
    pub estimates: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ProtocolOptions {
    /// Exact α is logged only for graphs with at most this many nodes.
    pub exact_alpha_limit: usize,
    /// Keep the per-round estimate vectors in the logs.
    pub record_estimates: bool,
}

impl Default for ProtocolOptions {
    fn default() -> Self {
        Self {
            exact_alpha_limit: EXACT_ALPHA_LIMIT,
            record_estimates: false,
        }
    }
}

fn graph_alphas(g: &ObservabilityGraph, opts: &ProtocolOptions) -> (Option<usize>, usize) {
    let exact = if g.dim() <= opts.exact_alpha_limit {
        g.independence_number_if_small()
    } else {
        None
    };
    (exact, g.independence_number_greedy())
}

/// Plays `trace` against `policy`. Each round the policy acts on its own
/// history (plus the graph, for pre-action policies), then sees the graph and
/// the revealed losses.
pub fn run_protocol(
    policy: &mut dyn Policy,
    trace: &EnvironmentTrace,
    rng: &mut dyn RngCore,
    opts: &ProtocolOptions,
) -> Result<Vec<RoundLog>> {
    if policy.dim() != trace.d {
        return Err(usage(format!(
            "policy has dimension {}, trace has {}",
            policy.dim(),
            trace.d
        )));
    }
    let fixed_alphas = match &trace.graphs {
        GraphSequence::Fixed(g) => Some(graph_alphas(g, opts)),
        GraphSequence::PerRound(_) => None,
    };
    let pre_action = policy.graph_access() == GraphAccess::PreAction;
    let mut logs = Vec::with_capacity(trace.horizon());
    for t in 0..trace.horizon() {
        let graph = trace.graph(t);
        let losses = &trace.losses[t];
        let action = policy.select(pre_action.then_some(graph), rng)?;
        validate_action(&action, trace.d)?;
        let observed = match policy.feedback_model() {
            FeedbackModel::SideObservations => observation_indicators(graph, &action),
            FeedbackModel::FullInformation => vec![true; trace.d],
        };
        let revealed = RevealedLosses::new(losses, observed);
        let update = policy.update(&action, graph, &revealed, rng)?;
        let (alpha_t, alpha_tilde_t) = fixed_alphas.unwrap_or_else(|| graph_alphas(graph, opts));
        logs.push(RoundLog {
            round: t + 1,
            loss: action.dot(losses),
            observed: revealed.observed_indices().collect(),
            action: action.support().to_vec(),
            rate: update.rate,
            gamma: update.gamma,
            q_t: update.q_t,
            alpha_t,
            alpha_tilde_t,
            oracle_calls: update.oracle_calls,
            graph_pre_action: pre_action,
            hard_cap_hit: update.hard_cap_hit,
            estimates: opts.record_estimates.then_some(update.estimates),
        });
    }
    Ok(logs)
}

fn validate_action(action: &Action, d: usize) -> Result<()> {
    if action.support().is_empty() || action.support().iter().any(|&i| i >= d) {
        return Err(Error::Protocol(format!(
            "invalid action {:?} for d = {d}",
            action.support()
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exp3ix::Exp3Ix;
    use crate::fplix::{FplIx, MSets};
    use crate::policy::RoundUpdate;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn bernoulli_losses() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let zeros = gen_losses(
            &LossKind::IidBernoulli {
                means: vec![0.0; 3],
            },
            3,
            50,
            &mut rng,
        )
        .unwrap();
        assert!(zeros.iter().flatten().all(|&l| l == 0.0));

        let n = 100_000;
        let means = [0.3, 0.5];
        let losses = gen_losses(
            &LossKind::IidBernoulli {
                means: means.to_vec(),
            },
            2,
            n,
            &mut rng,
        )
        .unwrap();
        for (i, &m) in means.iter().enumerate() {
            let mean = losses.iter().map(|r| r[i]).sum::<f64>() / n as f64;
            let se = (m * (1.0 - m) / n as f64).sqrt();
            assert!((mean - m).abs() <= 4.0 * se);
        }

        assert!(gen_losses(
            &LossKind::IidBernoulli {
                means: vec![1.5, 0.0]
            },
            2,
            1,
            &mut rng
        )
        .is_err());
    }

    #[test]
    fn single_segment_switching_is_iid() {
        let (d, t, gap) = (4, 300, 0.2);
        let switching = gen_losses(
            &LossKind::Switching { period: t, gap },
            d,
            t,
            &mut ChaCha8Rng::seed_from_u64(5),
        )
        .unwrap();
        let mut means = vec![0.5; d];
        means[0] = 0.5 - gap;
        let iid = gen_losses(
            &LossKind::IidBernoulli { means },
            d,
            t,
            &mut ChaCha8Rng::seed_from_u64(5),
        )
        .unwrap();
        assert_eq!(switching, iid);
    }

    #[test]
    fn switching_moves_the_best_component() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let losses = gen_losses(
            &LossKind::Switching {
                period: 2,
                gap: 0.5,
            },
            3,
            6,
            &mut rng,
        )
        .unwrap();
        // gap 0.5 makes the best component's loss identically zero.
        for (t, row) in losses.iter().enumerate() {
            assert_eq!(row[(t / 2) % 3], 0.0);
        }
    }

    #[test]
    fn graph_families() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let g = gen_graph(&GraphKind::Empty, 5, &mut rng).unwrap();
        assert_eq!(g.cross_edge_count(), 0);
        assert_eq!(g.independence_number_exact().unwrap(), 5);

        let g = gen_graph(&GraphKind::Complete, 5, &mut rng).unwrap();
        assert_eq!(g.cross_edge_count() + 5, 25);
        assert_eq!(g.independence_number_exact().unwrap(), 1);

        let g = gen_graph(&GraphKind::CliquePartition { c: 3 }, 9, &mut rng).unwrap();
        assert_eq!(g.cross_edge_count(), 3 * 6);
        assert_eq!(g.independence_number_exact().unwrap(), 3);

        let g = gen_graph(&GraphKind::Star { center: 2 }, 5, &mut rng).unwrap();
        assert_eq!(g.greedy_dominating_set(), vec![2]);

        let g = gen_graph(&GraphKind::ErdosRenyi { r: 1.0 }, 4, &mut rng).unwrap();
        assert_eq!(g, ObservabilityGraph::complete(4).unwrap());

        assert!(gen_graph(&GraphKind::ErdosRenyi { r: 2.0 }, 4, &mut rng).is_err());
        assert!(gen_graph(&GraphKind::CliquePartition { c: 0 }, 4, &mut rng).is_err());
        assert!(gen_graph(&GraphKind::Star { center: 4 }, 4, &mut rng).is_err());
    }

    #[test]
    fn erdos_renyi_edge_density() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let (d, r, reps) = (10, 0.3, 400);
        let total: usize = (0..reps)
            .map(|_| {
                gen_graph(&GraphKind::ErdosRenyi { r }, d, &mut rng)
                    .unwrap()
                    .cross_edge_count()
            })
            .sum();
        let n = (reps * d * (d - 1)) as f64;
        let se = (r * (1.0 - r) / n).sqrt();
        assert!((total as f64 / n - r).abs() <= 4.0 * se);
    }

    fn trace(d: usize, t: usize, graph: GraphKind, per_round: bool, seed: u64) -> EnvironmentTrace {
        EnvironmentTrace::generate(
            &EnvironmentConfig {
                losses: LossKind::IidUniform,
                graph,
                per_round,
            },
            d,
            t,
            &mut ChaCha8Rng::seed_from_u64(seed),
        )
        .unwrap()
    }

    #[test]
    fn zero_losses_give_zero_total() {
        let tr = EnvironmentTrace::new(
            vec![vec![0.0; 4]; 30],
            GraphSequence::Fixed(ObservabilityGraph::empty(4).unwrap()),
        )
        .unwrap();
        let mut policy = Exp3Ix::new(4).unwrap();
        let logs = run_protocol(
            &mut policy,
            &tr,
            &mut ChaCha8Rng::seed_from_u64(0),
            &ProtocolOptions::default(),
        )
        .unwrap();
        assert_eq!(logs.len(), 30);
        assert!(logs.iter().all(|l| l.loss == 0.0));
    }

    #[test]
    fn complete_graph_reveals_everything() {
        let tr = trace(6, 40, GraphKind::Complete, false, 1);
        let mut policy = Exp3Ix::new(6).unwrap();
        let logs = run_protocol(
            &mut policy,
            &tr,
            &mut ChaCha8Rng::seed_from_u64(0),
            &ProtocolOptions::default(),
        )
        .unwrap();
        for log in logs {
            assert_eq!(log.observed, (0..6).collect::<Vec<_>>());
            assert_eq!(log.alpha_t, Some(1));
            assert!(!log.graph_pre_action);
        }
    }

    #[test]
    fn protocol_reveals_exactly_the_out_neighborhood() {
        let tr = trace(8, 60, GraphKind::ErdosRenyi { r: 0.25 }, true, 2);
        let mut policy = FplIx::new(Box::new(MSets { d: 8, m: 2 })).unwrap();
        let logs = run_protocol(
            &mut policy,
            &tr,
            &mut ChaCha8Rng::seed_from_u64(0),
            &ProtocolOptions::default(),
        )
        .unwrap();
        for (t, log) in logs.iter().enumerate() {
            let action = Action::from_support(log.action.clone());
            let expected: Vec<usize> = observation_indicators(tr.graph(t), &action)
                .iter()
                .enumerate()
                .filter_map(|(i, &o)| o.then_some(i))
                .collect();
            assert_eq!(log.observed, expected);
        }
    }

    /// Tries to read a loss it was never shown.
    struct Peeker;

    impl Policy for Peeker {
        fn name(&self) -> &'static str {
            "peeker"
        }
        fn dim(&self) -> usize {
            3
        }
        fn select(
            &mut self,
            _: Option<&ObservabilityGraph>,
            _: &mut dyn RngCore,
        ) -> Result<Action> {
            Ok(Action::single(0))
        }
        fn update(
            &mut self,
            _: &Action,
            _: &ObservabilityGraph,
            losses: &RevealedLosses<'_>,
            _: &mut dyn RngCore,
        ) -> Result<RoundUpdate> {
            losses.get(2)?;
            Ok(RoundUpdate::default())
        }
    }

    #[test]
    fn reading_hidden_losses_is_a_violation() {
        let tr = trace(3, 5, GraphKind::Empty, false, 3);
        let err = run_protocol(
            &mut Peeker,
            &tr,
            &mut ChaCha8Rng::seed_from_u64(0),
            &ProtocolOptions::default(),
        )
        .unwrap_err();
        assert!(matches!(err, Error::Protocol(_)));
    }

    #[test]
    fn trace_validation() {
        let g = ObservabilityGraph::empty(2).unwrap();
        assert!(
            EnvironmentTrace::new(vec![vec![0.5, 1.5]], GraphSequence::Fixed(g.clone())).is_err()
        );
        assert!(EnvironmentTrace::new(vec![vec![0.5]], GraphSequence::Fixed(g.clone())).is_err());
        assert!(
            EnvironmentTrace::new(vec![vec![0.5, 0.5]; 2], GraphSequence::PerRound(vec![g]))
                .is_err()
        );
    }

    #[test]
    fn loss_csv_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("losses.csv");
        std::fs::write(&path, "0.1, 0.2\n1,0\n0.5,0.25\n").unwrap();
        let kind = LossKind::FromFile { path: path.clone() };
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let losses = gen_losses(&kind, 2, 3, &mut rng).unwrap();
        assert_eq!(
            losses,
            vec![vec![0.1, 0.2], vec![1.0, 0.0], vec![0.5, 0.25]]
        );
        assert!(gen_losses(&kind, 2, 4, &mut rng).is_err());

        std::fs::write(&path, "0.1,1.2\n").unwrap();
        assert!(matches!(read_loss_csv(&path), Err(Error::Parse { .. })));
    }
}
