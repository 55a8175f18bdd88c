//! Acceptance suite. Runs every criterion at its stated tolerance and prints
//! one PASS/FAIL line each; exits nonzero if any fails.
//!
//! Positional numeric arguments select criteria, e.g.
//! `cargo test -p mmg-cli --test acceptance -- 1 4 9`.

mod common;
mod conservation;
mod equations;
mod gradients;
mod learning;
mod smoke;
mod tuner;

use std::process::ExitCode;
use std::time::{Duration, Instant};

/// `Ok(detail)` or `Err(reason)`.
pub type Outcome = Result<String, String>;

struct Criterion {
    id: u32,
    name: &'static str,
    limit: Option<Duration>,
    run: fn() -> Outcome,
}

const fn secs(s: u64) -> Option<Duration> {
    Some(Duration::from_secs(s))
}

const CRITERIA: &[Criterion] = &[
    Criterion { id: 1, name: "closed-form equations", limit: secs(1), run: equations::check },
    Criterion { id: 2, name: "environment conservation", limit: secs(30), run: conservation::check },
    Criterion { id: 3, name: "analytic gradients", limit: secs(60), run: gradients::check },
    Criterion { id: 4, name: "squashed-Gaussian density", limit: None, run: gradients::density },
    Criterion { id: 5, name: "toy learning sanity", limit: secs(300), run: learning::toy },
    Criterion { id: 6, name: "coupled mode cheaper than isolated", limit: secs(1200), run: learning::modes },
    Criterion { id: 7, name: "convergence shape", limit: None, run: learning::convergence },
    Criterion { id: 8, name: "determinism and seed robustness", limit: None, run: learning::determinism },
    Criterion { id: 9, name: "tuner", limit: secs(120), run: tuner::check },
    Criterion { id: 10, name: "end-to-end smoke", limit: secs(1800), run: smoke::check },
];

fn main() -> ExitCode {
    let selected: Vec<u32> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let mut failed = 0;
    let mut ran = 0;
    for c in CRITERIA {
        if !selected.is_empty() && !selected.contains(&c.id) {
            continue;
        }
        ran += 1;
        let start = Instant::now();
        let mut outcome = (c.run)();
        let elapsed = start.elapsed();
        if let (Ok(_), Some(limit)) = (&outcome, c.limit) {
            if elapsed > limit {
                outcome = Err(format!("took {elapsed:.1?}, limit {limit:?}"));
            }
        }
        match outcome {
            Ok(detail) => println!("PASS {:>2} {}: {detail} [{elapsed:.1?}]", c.id, c.name),
            Err(reason) => {
                failed += 1;
                println!("FAIL {:>2} {}: {reason} [{elapsed:.1?}]", c.id, c.name);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", ran - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
