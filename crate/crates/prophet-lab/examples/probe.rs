//! Dev probe (not shipped): search quality and bound magnitudes.

use std::time::Instant;

use prophet_lab::bounds::{clean_upper_bound, delta_gap, tight_upper_bound};
use prophet_lab::dp::competitive_ratio;
use prophet_lab::search::{alpha_estimate, SearchBudget};

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let which = args.get(1).map(String::as_str).unwrap_or("small");

    match which {
        "small" => {
            for k in [2usize, 3, 5, 10, 25, 50] {
                let t0 = Instant::now();
                let entry = alpha_estimate(
                    k,
                    SearchBudget {
                        restarts: 6,
                        iters: 600,
                        max_support: 16,
                        seed: 42,
                    },
                );
                let w = entry.witness.as_ref().unwrap();
                println!(
                    "k={k:5} alpha={:.6} support={} elapsed={:.1?}",
                    entry.alpha,
                    w.len(),
                    t0.elapsed()
                );
            }
        }
        "big" => {
            for k in [100usize, 1000, 10000] {
                let t0 = Instant::now();
                let entry = alpha_estimate(
                    k,
                    SearchBudget {
                        restarts: 4,
                        iters: 600,
                        max_support: 32,
                        seed: 42,
                    },
                );
                let w = entry.witness.as_ref().unwrap();
                println!(
                    "k={k:6} alpha={:.6} support={} elapsed={:.1?}",
                    entry.alpha,
                    w.len(),
                    t0.elapsed()
                );
                println!("  witness={w}");
            }
        }
        "bounds" => {
            // alpha entries for candidate l values, then bound magnitudes.
            for (k, ls) in [
                (100usize, vec![5usize, 8, 10, 14, 20]),
                (1000, vec![10, 20, 32, 45]),
                (10000, vec![32, 64, 100, 141]),
            ] {
                for l in ls {
                    let t0 = Instant::now();
                    let entry = alpha_estimate(
                        l,
                        SearchBudget {
                            restarts: 4,
                            iters: 500,
                            max_support: 16,
                            seed: 7,
                        },
                    );
                    let witness = entry.witness.as_ref().unwrap();
                    let clean = clean_upper_bound(k, l, entry.alpha).unwrap();
                    let d_prime = witness.cdf_power(k as f64 / l as f64).unwrap();
                    let tight = tight_upper_bound(&d_prime, l, k, entry.alpha, 1e-4).unwrap();
                    println!(
                        "k={k:6} l={l:4} alpha_l={:.5} clean={clean:.5} tight={tight:.5} ({:.1?})",
                        entry.alpha,
                        t0.elapsed()
                    );
                }
            }
        }
        "delta" => {
            for k in [2usize, 3, 5] {
                let entry = alpha_estimate(
                    k,
                    SearchBudget {
                        restarts: 4,
                        iters: 400,
                        max_support: 8,
                        seed: 5,
                    },
                );
                let w = entry.witness.unwrap();
                println!("k={k} alpha={:.5} delta_gap={:.6}", entry.alpha, delta_gap(&w, k));
            }
        }
        "padcheck" => {
            // zero-pad robustness at desk scale.
            for k in [5usize, 10] {
                let entry = alpha_estimate(
                    k,
                    SearchBudget {
                        restarts: 4,
                        iters: 400,
                        max_support: 16,
                        seed: 9,
                    },
                );
                let w = entry.witness.unwrap();
                for n in [1000usize, 10000] {
                    let p = k as f64 / n as f64;
                    let padded = w.zero_pad(p).unwrap();
                    let r = competitive_ratio(&padded, n).unwrap();
                    println!(
                        "k={k} n={n} alpha={:.5} padded_ratio={:.5} diff={:+.5}",
                        entry.alpha,
                        r,
                        r - entry.alpha
                    );
                }
            }
        }
        other => eprintln!("unknown probe {other}"),
    }
}
