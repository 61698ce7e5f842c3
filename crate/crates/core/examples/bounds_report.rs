//! Plays one Exp3-IX run by hand and evaluates the regret bounds on the
//! realized graph sequence.
//!
//! cargo run --release --example bounds_report

use ixbandit::bounds::{empirical_regret, exp3ix_realized_bound, exp3ix_regret_bound, q_bound};
use ixbandit::environment::ProtocolOptions;
use ixbandit::{
    run_protocol, EnvironmentConfig, EnvironmentTrace, Exp3Ix, GraphKind, LossKind, Simplex,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> ixbandit::Result<()> {
    let (d, horizon) = (16, 4000);
    let env = EnvironmentConfig {
        losses: LossKind::Switching {
            period: 1000,
            gap: 0.2,
        },
        graph: GraphKind::CliquePartition { c: 4 },
        per_round: false,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let trace = EnvironmentTrace::generate(&env, d, horizon, &mut rng)?;
    let logs = run_protocol(
        &mut Exp3Ix::new(d)?,
        &trace,
        &mut rng,
        &ProtocolOptions::default(),
    )?;

    let alphas: Vec<usize> = logs
        .iter()
        .map(|l| l.alpha_t.expect("small graph"))
        .collect();
    let qs: Vec<f64> = logs.iter().map(|l| l.q_t.unwrap()).collect();
    let worst_q = logs
        .iter()
        .map(|l| l.q_t.unwrap() / q_bound(l.alpha_t.unwrap(), d, l.gamma).unwrap())
        .fold(0.0, f64::max);

    println!(
        "alpha = {}, final rate = {:.4}",
        alphas[0],
        logs.last().unwrap().rate
    );
    println!("largest Q_t / bound ratio: {worst_q:.3}");
    println!(
        "regret against the best fixed arm: {:.1}",
        empirical_regret(&logs, &trace, &Simplex { d })?
    );
    println!(
        "realized-Q bound:                  {:.1}",
        exp3ix_realized_bound(d, &qs)
    );
    println!(
        "graph-only bound:                  {:.1}",
        exp3ix_regret_bound(d, &alphas)?
    );
    Ok(())
}
