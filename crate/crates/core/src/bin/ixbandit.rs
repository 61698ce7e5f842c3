use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use ixbandit::graph::read_graphs;
use ixbandit::harness::{emit_all, run_experiment, ExperimentConfig};
use ixbandit::verify::{run_all, run_suite, Suite, VerifyOptions};
use ixbandit::Result;

#[derive(Parser)]
#[command(
    version,
    about = "Bandits with side observations: experiments and checks"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment described by a JSON config.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Worker threads for replications; results do not depend on it.
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        /// Output directory (defaults to the config's `output`, then `out/`).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run randomized property suites.
    Verify {
        #[arg(long, value_enum)]
        suite: SuiteArg,
        #[arg(long)]
        cases: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Print graph statistics for each graph in a file.
    Alpha {
        #[arg(long)]
        graph: PathBuf,
        /// Fail instead of falling back to greedy when exact α is out of reach.
        #[arg(long)]
        exact: bool,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum SuiteArg {
    /// Weighted in-neighborhood inequality.
    #[value(name = "lemma1")]
    GraphInequality,
    /// Exp3-IX `Q_t` against its graph bound.
    #[value(name = "lemma2")]
    QBound,
    /// FPL-IX `Q̃(c)` against its graph bound.
    #[value(name = "lemma4")]
    QTildeBound,
    /// IX estimator bias against its closed form.
    Optimism,
    /// Mean resampling count against its closed form.
    Resampling,
    All,
}

fn run(config: PathBuf, jobs: usize, out: Option<PathBuf>) -> Result<bool> {
    let cfg = ExperimentConfig::load(&config)?;
    let result = run_experiment(&cfg, jobs)?;
    let dir = out
        .or_else(|| cfg.output.clone())
        .unwrap_or_else(|| PathBuf::from("out"));
    let (csv, json) = emit_all(&result, &dir)?;
    let s = &result.summary;
    println!(
        "{} d={} T={} reps={}: final regret {:.3} ± {:.3}",
        s.policy, s.d, s.horizon, s.replications, s.final_regret.mean, s.final_regret.se
    );
    for a in &s.assertions {
        let tag = match (a.passed, a.diagnostic) {
            (true, _) => "PASS",
            (false, true) => "NOTE",
            (false, false) => "FAIL",
        };
        println!("{tag} {}: {}", a.name, a.detail);
    }
    println!("wrote {} and {}", csv.display(), json.display());
    Ok(s.all_passed)
}

fn verify(suite: SuiteArg, cases: Option<usize>, seed: u64) -> Result<bool> {
    let opts = VerifyOptions {
        cases,
        seed,
        draws: None,
    };
    let reports = match suite {
        SuiteArg::All => run_all(&opts)?,
        one => {
            let s = match one {
                SuiteArg::GraphInequality => Suite::GraphInequality,
                SuiteArg::QBound => Suite::QBound,
                SuiteArg::QTildeBound => Suite::QTildeBound,
                SuiteArg::Optimism => Suite::Optimism,
                SuiteArg::Resampling => Suite::Resampling,
                SuiteArg::All => unreachable!(),
            };
            vec![run_suite(s, &opts)?]
        }
    };
    for r in &reports {
        println!("{r}");
    }
    Ok(reports.iter().all(|r| r.passed()))
}

fn alpha(path: PathBuf, exact: bool) -> Result<bool> {
    for (k, g) in read_graphs(&path)?.iter().enumerate() {
        let alpha_exact = if exact {
            Some(g.independence_number_exact()?)
        } else {
            g.independence_number_if_small()
        };
        let stats = g.stats();
        let exact_text = alpha_exact.map_or("n/a".to_string(), |a| a.to_string());
        println!(
            "graph {k}: d={} edges={} alpha_exact={exact_text} alpha_greedy={} dominating_set={:?}",
            g.dim(),
            g.cross_edge_count(),
            stats.alpha_greedy,
            stats.dominating_set
        );
    }
    Ok(true)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Run { config, jobs, out } => run(config, jobs, out),
        Command::Verify { suite, cases, seed } => verify(suite, cases, seed),
        Command::Alpha { graph, exact } => alpha(graph, exact),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
