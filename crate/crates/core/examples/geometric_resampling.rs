//! Geometric resampling turns repeated draws into an estimate of `1/o`,
//! truncated by the implicit-exploration cap.
//!
//! cargo run --release --example geometric_resampling

use ixbandit::fplix::{default_hard_cap, geometric_resample_with};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() -> ixbandit::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let trials = 200_000;
    println!(
        "{:>5} {:>5} {:>10} {:>10} {:>8}",
        "o", "gamma", "mean K", "expected", "1/o"
    );
    for gamma in [0.05, 0.2, 0.5] {
        for o in [0.1, 0.4, 0.8] {
            let cap = default_hard_cap(1, gamma);
            let mut total = 0u64;
            for _ in 0..trials {
                let out = geometric_resample_with(
                    &[true],
                    gamma,
                    cap,
                    &mut rng,
                    |r: &mut ChaCha8Rng| Ok(vec![r.random::<f64>() < o]),
                )?;
                total += out.k[0];
            }
            println!(
                "{o:>5} {gamma:>5} {:>10.4} {:>10.4} {:>8.3}",
                total as f64 / trials as f64,
                1.0 / (o + (1.0 - o) * gamma),
                1.0 / o
            );
        }
    }
    Ok(())
}
