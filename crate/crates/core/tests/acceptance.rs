//! Acceptance suite: runs every check and prints one PASS/FAIL line each.
//! Runs without the libtest harness so the lines always reach stdout.

use std::process::ExitCode;

use vpatch::acceptance;

fn main() -> ExitCode {
    // `cargo test -- <filter>` passes extra arguments; a numeric one selects checks
    let only: Vec<usize> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let mut failed = 0;
    let mut ran = 0;
    for report in (1..=acceptance::CHECK_COUNT).filter(|id| only.is_empty() || only.contains(id)).map(acceptance::run) {
        println!("{}", report.line());
        ran += 1;
        if !report.passed {
            failed += 1;
        }
    }
    println!("acceptance: {} of {ran} checks passed", ran - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
