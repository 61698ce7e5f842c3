//! End-to-end acceptance checks. Runs as a plain binary so that every
//! criterion prints one PASS/FAIL line; exits non-zero if any fails.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use ixbandit::environment::{run_protocol, EnvironmentTrace, GraphSequence, ProtocolOptions};
use ixbandit::fplix::{mset_oracle, simplex_oracle};
use ixbandit::harness::{emit_csv, run_experiment, ExperimentConfig, ExperimentResult, PolicyKind};
use ixbandit::verify::{run_suite, Suite, VerifyOptions};
use ixbandit::{Exp3Ix, FplIx, MSets, ObservabilityGraph};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn configs_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("configs")
}

fn shipped_configs() -> Vec<PathBuf> {
    let mut paths: Vec<PathBuf> = fs::read_dir(configs_dir())
        .expect("configs directory")
        .map(|e| e.expect("dir entry").path())
        .filter(|p| p.extension().is_some_and(|x| x == "json"))
        .collect();
    paths.sort();
    paths
}

fn load(name: &str) -> ExperimentConfig {
    ExperimentConfig::load(&configs_dir().join(name)).expect("shipped config")
}

fn run(cfg: &ExperimentConfig) -> Result<ExperimentResult, String> {
    run_experiment(cfg, 8).map_err(|e| e.to_string())
}

fn within(elapsed: Duration, limit_secs: u64, detail: String) -> Outcome {
    let secs = elapsed.as_secs_f64();
    if elapsed > Duration::from_secs(limit_secs) {
        Err(format!("{detail}; took {secs:.1}s, limit {limit_secs}s"))
    } else {
        Ok(format!("{detail}; {secs:.1}s"))
    }
}

fn suite(suite: Suite, limit_secs: u64) -> Outcome {
    let start = Instant::now();
    let report = run_suite(
        suite,
        &VerifyOptions {
            seed: 2024,
            ..Default::default()
        },
    )
    .map_err(|e| e.to_string())?;
    let detail = format!(
        "{} cases, {} checks, {} failures, worst ratio {:.3}",
        report.cases, report.checks, report.failures, report.worst_ratio
    );
    if !report.passed() {
        return Err(detail);
    }
    within(start.elapsed(), limit_secs, detail)
}

fn graph_inequality() -> Outcome {
    suite(Suite::GraphInequality, 10)
}

fn q_bound_in_shipped_runs() -> Outcome {
    let mut checked = 0;
    let mut runs = 0;
    for path in shipped_configs() {
        let cfg = ExperimentConfig::load(&path).map_err(|e| e.to_string())?;
        if cfg.policy != PolicyKind::Exp3ix {
            continue;
        }
        let result = run(&cfg)?;
        runs += 1;
        for rep in &result.replications {
            if rep.q_bound_checked != cfg.horizon {
                return Err(format!(
                    "{}: only {} of {} rounds checked",
                    path.display(),
                    rep.q_bound_checked,
                    cfg.horizon
                ));
            }
            if rep.q_bound_violations > 0 {
                return Err(format!(
                    "{}: {} violations in rep {}",
                    path.display(),
                    rep.q_bound_violations,
                    rep.rep
                ));
            }
            checked += rep.q_bound_checked;
        }
    }
    if runs == 0 {
        return Err("no shipped Exp3-IX experiments".into());
    }
    Ok(format!(
        "{runs} experiments, {checked} rounds, 0 violations"
    ))
}

fn ix_optimism() -> Outcome {
    suite(Suite::Optimism, 60)
}

fn resampling_expectation() -> Outcome {
    suite(Suite::Resampling, 60)
}

fn oracle_calls_per_round() -> Outcome {
    let mut cfg = load("fplix_msets_er.json");
    cfg.horizon = 10_000;
    cfg.replications = 1;
    let result = run(&cfg)?;
    let mean = result.summary.mean_oracle_calls_per_round;
    let detail = format!("mean {mean:.3} oracle calls per round, d = {}", cfg.d);
    if mean <= cfg.d as f64 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn simple_setting() -> Outcome {
    let start = Instant::now();
    let complete = run(&load("exp3ix_complete.json"))?;
    let empty = run(&load("exp3ix_empty.json"))?;
    let (c, e) = (complete.summary.final_regret, empty.summary.final_regret);
    let se = (c.se.powi(2) + e.se.powi(2)).sqrt();
    let mut problems = Vec::new();
    if !(e.mean - c.mean >= 4.0 * se) {
        problems.push(format!(
            "complete {:.1} vs empty {:.1}, 4 SE = {:.1}",
            c.mean,
            e.mean,
            4.0 * se
        ));
    }
    for (name, r) in [("complete", &complete), ("empty", &empty)] {
        let bound = r
            .summary
            .bounds
            .iter()
            .find(|b| b.name == "exp3ix_regret_bound")
            .map(|b| b.final_value);
        match bound {
            Some(b) if r.summary.final_regret.mean <= b => {}
            _ => problems.push(format!("{name}: regret above its bound {bound:?}")),
        }
        let early = r.regret_at(500).ok_or("no checkpoint at 500")?.mean / 500.0;
        let late = r.regret_at(5000).ok_or("no checkpoint at 5000")?.mean / 5000.0;
        if !(late < early) {
            problems.push(format!(
                "{name}: regret/T {late:.4} at 5000 vs {early:.4} at 500"
            ));
        }
    }
    let detail = format!(
        "regret complete {:.1} ± {:.1}, empty {:.1} ± {:.1}",
        c.mean, c.se, e.mean, e.se
    );
    if !problems.is_empty() {
        return Err(format!("{detail}; {}", problems.join("; ")));
    }
    within(start.elapsed(), 300, detail)
}

fn combinatorial_setting() -> Outcome {
    let start = Instant::now();
    let graph = run(&load("fplix_msets_er.json"))?;
    let semi = run(&load("fplix_msets_empty.json"))?;
    let (g, s) = (graph.summary.final_regret, semi.summary.final_regret);
    let se = (g.se.powi(2) + s.se.powi(2)).sqrt();
    let bound = graph
        .summary
        .bounds
        .iter()
        .find(|b| b.name == "fplix_regret_bound")
        .map(|b| b.final_value)
        .ok_or("no explicit bound reported")?;
    let detail = format!(
        "regret ER {:.1} ± {:.1}, semi-bandit {:.1} ± {:.1}, bound {bound:.0}",
        g.mean, g.se, s.mean, s.se
    );
    if !(g.mean <= bound && g.mean <= s.mean - 4.0 * se) {
        return Err(detail);
    }
    within(start.elapsed(), 600, detail)
}

fn degenerate_graph() -> Outcome {
    let d = 8;
    let horizon = 300;
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let losses: Vec<Vec<f64>> = (0..horizon)
        .map(|_| (0..d).map(|_| rng.random::<f64>()).collect())
        .collect();
    let trace = EnvironmentTrace::new(
        losses,
        GraphSequence::Fixed(ObservabilityGraph::complete(d).unwrap()),
    )
    .map_err(|e| e.to_string())?;
    let opts = ProtocolOptions {
        record_estimates: true,
        ..Default::default()
    };

    let mut exp3ix = Exp3Ix::new(d).unwrap();
    let logs = run_protocol(&mut exp3ix, &trace, &mut rng, &opts).map_err(|e| e.to_string())?;
    for (log, l) in logs.iter().zip(&trace.losses) {
        let est = log.estimates.as_ref().unwrap();
        if (0..d).any(|i| est[i] != l[i] / (1.0 + log.gamma)) {
            return Err(format!("Exp3-IX round {}: {est:?}", log.round));
        }
    }

    let mut fplix = FplIx::new(Box::new(MSets { d, m: 3 })).unwrap();
    let logs = run_protocol(&mut fplix, &trace, &mut rng, &opts).map_err(|e| e.to_string())?;
    for (log, l) in logs.iter().zip(&trace.losses) {
        if log.estimates.as_ref().unwrap() != l {
            return Err(format!("FPL-IX round {}", log.round));
        }
    }
    Ok(format!("{horizon} rounds each, all estimates exact"))
}

fn csv_bytes(
    cfg: &ExperimentConfig,
    jobs: usize,
    dir: &Path,
    tag: &str,
) -> Result<Vec<u8>, String> {
    let result = run_experiment(cfg, jobs).map_err(|e| e.to_string())?;
    let path = dir.join(format!("{tag}.csv"));
    emit_csv(&result, &path).map_err(|e| e.to_string())?;
    fs::read(&path).map_err(|e| e.to_string())
}

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let configs = shipped_configs();
    for path in &configs {
        let cfg = ExperimentConfig::load(path).map_err(|e| e.to_string())?;
        let a = csv_bytes(&cfg, 1, dir.path(), "a")?;
        let b = csv_bytes(&cfg, 1, dir.path(), "b")?;
        let c = csv_bytes(&cfg, 8, dir.path(), "c")?;
        if a != b || a != c {
            return Err(format!("{} differs between runs", path.display()));
        }
    }

    // Same through the command-line tool.
    let config = configs_dir().join("fplix_msets_er.json");
    let mut outputs = Vec::new();
    for (jobs, out) in [("1", "cli1"), ("8", "cli8")] {
        let out_dir = dir.path().join(out);
        let status = Command::new(env!("CARGO_BIN_EXE_ixbandit"))
            .args(["run", "--config"])
            .arg(&config)
            .args(["--jobs", jobs, "--out"])
            .arg(&out_dir)
            .output()
            .map_err(|e| e.to_string())?;
        if !status.status.success() {
            return Err(format!(
                "CLI run failed: {}",
                String::from_utf8_lossy(&status.stderr)
            ));
        }
        outputs.push((
            fs::read(out_dir.join("results.csv")).map_err(|e| e.to_string())?,
            fs::read(out_dir.join("summary.json")).map_err(|e| e.to_string())?,
        ));
    }
    if outputs[0] != outputs[1] {
        return Err("CLI output differs between --jobs 1 and --jobs 8".into());
    }
    Ok(format!(
        "{} configs byte-identical at 1 and 8 jobs, CLI included",
        configs.len()
    ))
}

/// Lexicographically smallest minimizing subset of size `m`, by enumeration.
fn brute_force(score: &[f64], m: usize) -> Vec<usize> {
    let d = score.len();
    let mut best: Option<(f64, Vec<usize>)> = None;
    for mask in 0u32..1 << d {
        if mask.count_ones() as usize != m {
            continue;
        }
        let support: Vec<usize> = (0..d).filter(|&i| mask & (1 << i) != 0).collect();
        let value: f64 = support.iter().map(|&i| score[i]).sum();
        let better = match &best {
            None => true,
            Some((v, s)) => value < *v || (value == *v && support < *s),
        };
        if better {
            best = Some((value, support));
        }
    }
    best.unwrap().1
}

fn oracle_correctness() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    for case in 0..1000 {
        let d = rng.random_range(1..=12);
        // Every fourth case uses small integers to exercise ties.
        let score: Vec<f64> = (0..d)
            .map(|_| {
                if case % 4 == 0 {
                    rng.random_range(-2..=2) as f64
                } else {
                    rng.random_range(-1.0..1.0)
                }
            })
            .collect();
        let simplex = simplex_oracle(&score).map_err(|e| e.to_string())?;
        if simplex.support() != brute_force(&score, 1) {
            return Err(format!("simplex oracle on {score:?}"));
        }
        let m = rng.random_range(1..=d);
        let mset = mset_oracle(&score, m).map_err(|e| e.to_string())?;
        if mset.support() != brute_force(&score, m) {
            return Err(format!("m-set oracle (m = {m}) on {score:?}"));
        }
    }
    Ok("1000 scores each for simplex and m-sets".into())
}

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        ("graph inequality on random instances", graph_inequality),
        (
            "Q bound in every shipped Exp3-IX run",
            q_bound_in_shipped_runs,
        ),
        ("IX optimism and bias identity", ix_optimism),
        ("geometric resampling expectation", resampling_expectation),
        ("expected oracle calls per round", oracle_calls_per_round),
        ("regret, simple setting", simple_setting),
        ("regret, combinatorial setting", combinatorial_setting),
        ("degenerate-graph recovery", degenerate_graph),
        ("determinism", determinism),
        ("oracle correctness", oracle_correctness),
    ];
    let mut failed = 0;
    for (k, (name, check)) in criteria.iter().enumerate() {
        match check() {
            Ok(detail) => println!("criterion {:>2} PASS {name}: {detail}", k + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {:>2} FAIL {name}: {detail}", k + 1);
            }
        }
    }
    println!(
        "acceptance: {} passed, {failed} failed",
        criteria.len() - failed
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
