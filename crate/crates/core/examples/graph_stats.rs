//! Independence numbers, dominating sets and observation probabilities for a
//! few observability graphs.
//!
//! cargo run --example graph_stats

use ixbandit::environment::{gen_graph, GraphKind};
use ixbandit::graph::graph_inequality_sides;
use ixbandit::ObservabilityGraph;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> ixbandit::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let d = 9;
    let graphs = [
        ("empty", ObservabilityGraph::empty(d)?),
        ("complete", ObservabilityGraph::complete(d)?),
        (
            "3 cliques",
            gen_graph(&GraphKind::CliquePartition { c: 3 }, d, &mut rng)?,
        ),
        (
            "star",
            gen_graph(&GraphKind::Star { center: 0 }, d, &mut rng)?,
        ),
        (
            "ER(0.3)",
            gen_graph(&GraphKind::ErdosRenyi { r: 0.3 }, d, &mut rng)?,
        ),
    ];

    let p = vec![1.0 / d as f64; d];
    println!(
        "{:<10} {:>7} {:>7} {:>10} {:>8} {:>8}",
        "graph", "alpha", "greedy", "|dom|", "min o", "lhs/rhs"
    );
    for (name, g) in &graphs {
        let stats = g.stats();
        let o = g.observation_probabilities(&p)?;
        let min_o = o.iter().cloned().fold(f64::INFINITY, f64::min);
        let sides = graph_inequality_sides(g, &p, 1, 0.1)?;
        println!(
            "{name:<10} {:>7} {:>7} {:>10} {min_o:>8.3} {:>8.3}",
            stats.alpha_exact.map_or("-".into(), |a| a.to_string()),
            stats.alpha_greedy,
            stats.dominating_set.len(),
            sides.lhs / sides.rhs,
        );
    }
    Ok(())
}
