//! Acceptance suite. One line per criterion is written straight to stdout so it shows
//! up even when the harness captures test output.

#[path = "../../../core/tests/support/cf_oracle.rs"]
mod cf_oracle;
#[path = "../../../core/tests/support/golden.rs"]
mod golden;
#[path = "../../../core/tests/support/lexicon.rs"]
mod lexicon;

mod common;
mod counterfactual_space;
mod determinism;
mod feedback_loop;
mod golden_suite;
mod lexicon_fidelity;
mod placement;
mod rejection;
mod reviewer_arithmetic;
mod sat_oracle;

use std::io::Write;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

type Check = fn() -> anyhow::Result<String>;

const CRITERIA: [(u8, &str, Option<u64>, Check); 9] = [
    (1, "lexicon fidelity", Some(1), lexicon_fidelity::run),
    (2, "counterfactual oracle equivalence", Some(30), counterfactual_space::run),
    (3, "behavior golden suite", Some(5), golden_suite::run),
    (4, "SAT oracle", Some(10), sat_oracle::run),
    (5, "reviewer arithmetic", None, reviewer_arithmetic::run),
    (6, "feedback-loop ablation", Some(120), feedback_loop::run),
    (7, "unreasonable-instruction rejection", Some(30), rejection::run),
    (8, "end-to-end determinism", None, determinism::run),
    (9, "placement math", None, placement::run),
];

#[test]
fn acceptance() {
    let mut failed = Vec::new();
    std::io::stdout().write_all(b"\n").unwrap();
    for (id, name, budget, check) in CRITERIA {
        let start = Instant::now();
        let result = match catch_unwind(AssertUnwindSafe(check)) {
            Ok(r) => r,
            Err(panic) => {
                let msg = panic.downcast_ref::<String>().cloned().or_else(|| panic.downcast_ref::<&str>().map(|s| s.to_string()));
                Err(anyhow::anyhow!("panicked: {}", msg.unwrap_or_default()))
            }
        };
        let elapsed = start.elapsed();
        let result = match (result, budget) {
            (Ok(_), Some(b)) if elapsed > Duration::from_secs(b) => Err(anyhow::anyhow!("over the {b} s budget")),
            (r, _) => r,
        };
        let (verdict, detail) = match &result {
            Ok(d) => ("PASS", d.clone()),
            Err(e) => ("FAIL", format!("{e:#}")),
        };
        let line = format!("acceptance {id} {name}: {verdict} ({detail}; {:.2} s)\n", elapsed.as_secs_f64());
        std::io::stdout().write_all(line.as_bytes()).unwrap();
        if result.is_err() {
            failed.push(id);
        }
    }
    assert!(failed.is_empty(), "failing criteria: {failed:?}");
}
