//! Exp3-IX with side observations against vanilla Exp3 and against Exp3-IX
//! with bandit feedback only.
//!
//! cargo run --release --example exp3ix_vs_exp3

use ixbandit::harness::{run_experiment, ExperimentConfig, PolicyParams};
use ixbandit::{DecisionSetKind, EnvironmentConfig, GraphKind, LossKind, PolicyKind};

fn config(policy: PolicyKind, graph: GraphKind) -> ExperimentConfig {
    let d = 20;
    let mut means = vec![0.5; d];
    means[0] = 0.3;
    ExperimentConfig {
        policy,
        decision_set: DecisionSetKind::Simplex,
        environment: EnvironmentConfig {
            losses: LossKind::IidBernoulli { means },
            graph,
            per_round: true,
        },
        d,
        horizon: 5000,
        replications: 20,
        base_seed: 1,
        output: None,
        bound_checks: true,
        params: PolicyParams::default(),
    }
}

fn main() -> ixbandit::Result<()> {
    let runs = [
        (
            "exp3ix, complete graph",
            config(PolicyKind::Exp3ix, GraphKind::Complete),
        ),
        (
            "exp3ix, ER(0.2) graphs",
            config(PolicyKind::Exp3ix, GraphKind::ErdosRenyi { r: 0.2 }),
        ),
        (
            "exp3ix, no side info",
            config(PolicyKind::Exp3ix, GraphKind::Empty),
        ),
        (
            "exp3 (ignores graph)",
            config(PolicyKind::Exp3, GraphKind::Complete),
        ),
        (
            "exp3dom, ER(0.2) graphs",
            config(PolicyKind::Exp3dom, GraphKind::ErdosRenyi { r: 0.2 }),
        ),
    ];
    for (label, cfg) in runs {
        let r = run_experiment(&cfg, 4)?;
        let s = &r.summary;
        println!(
            "{label:<26} regret {:>7.1} ± {:>5.1}   all checks passed: {}",
            s.final_regret.mean, s.final_regret.se, s.all_passed
        );
    }
    Ok(())
}
