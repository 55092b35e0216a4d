//! The acceptance suite at its pinned scales and tolerances.
//!
//! Runs all twelve criteria through the same runner as `lerw validate`,
//! printing one pass/fail line per criterion (visible with `--nocapture`).
//! The full suite performs large solves and multi-million-sample Monte
//! Carlo runs; expect tens of minutes on a single core.

use lerw::validate::{run, ValidateConfig};

#[test]
fn acceptance_suite() {
    let report = run(&ValidateConfig {
        quick: false,
        filter: None,
        seed: 1,
    });
    assert_eq!(report.results.len(), 12, "all criteria must execute");
    let failing: Vec<String> = report
        .results
        .iter()
        .filter(|r| !r.passed)
        .map(|r| {
            format!(
                "criterion {} ({}):\n  {}",
                r.id,
                r.name,
                r.details.join("\n  ")
            )
        })
        .collect();
    assert!(
        report.all_passed,
        "failing criteria:\n{}",
        failing.join("\n")
    );
}
