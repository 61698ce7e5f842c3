//! A user-defined policy plugged into the protocol: follow the leader on the
//! revealed losses. The protocol hands it only what the graph reveals, and any
//! attempt to read past that is an error.
//!
//! cargo run --release --example custom_policy

use ixbandit::bounds::empirical_regret;
use ixbandit::environment::ProtocolOptions;
use ixbandit::policy::RoundUpdate;
use ixbandit::{
    run_protocol, Action, EnvironmentConfig, EnvironmentTrace, GraphKind, LossKind,
    ObservabilityGraph, Policy, RevealedLosses, Simplex,
};
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Plays the arm with the lowest average observed loss.
struct FollowTheLeader {
    sums: Vec<f64>,
    counts: Vec<f64>,
}

impl Policy for FollowTheLeader {
    fn name(&self) -> &'static str {
        "follow_the_leader"
    }

    fn dim(&self) -> usize {
        self.sums.len()
    }

    fn select(
        &mut self,
        _: Option<&ObservabilityGraph>,
        _: &mut dyn RngCore,
    ) -> ixbandit::Result<Action> {
        let avg = |i: usize| {
            if self.counts[i] == 0.0 {
                0.0
            } else {
                self.sums[i] / self.counts[i]
            }
        };
        let best = (0..self.dim())
            .min_by(|&a, &b| avg(a).total_cmp(&avg(b)))
            .unwrap();
        Ok(Action::single(best))
    }

    fn update(
        &mut self,
        _: &Action,
        _: &ObservabilityGraph,
        losses: &RevealedLosses<'_>,
        _: &mut dyn RngCore,
    ) -> ixbandit::Result<RoundUpdate> {
        for i in losses.observed_indices().collect::<Vec<_>>() {
            self.sums[i] += losses.get(i)?;
            self.counts[i] += 1.0;
        }
        Ok(RoundUpdate::default())
    }
}

fn main() -> ixbandit::Result<()> {
    let d = 8;
    let env = EnvironmentConfig {
        losses: LossKind::IidBernoulli {
            means: vec![0.6, 0.5, 0.5, 0.4, 0.5, 0.5, 0.5, 0.5],
        },
        graph: GraphKind::ErdosRenyi { r: 0.4 },
        per_round: true,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let trace = EnvironmentTrace::generate(&env, d, 2000, &mut rng)?;
    let mut ftl = FollowTheLeader {
        sums: vec![0.0; d],
        counts: vec![0.0; d],
    };
    let logs = run_protocol(&mut ftl, &trace, &mut rng, &ProtocolOptions::default())?;
    let observed: usize = logs.iter().map(|l| l.observed.len()).sum();
    println!(
        "observed {:.2} losses per round on average",
        observed as f64 / logs.len() as f64
    );
    println!(
        "regret: {:.1}",
        empirical_regret(&logs, &trace, &Simplex { d })?
    );
    Ok(())
}
