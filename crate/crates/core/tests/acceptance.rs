//! Runs every acceptance criterion in order and prints one PASS/FAIL line each.

use aml_core::suite::{run_suite, CRITERIA};

fn main() {
    println!("acceptance: {} criteria", CRITERIA.len());
    let summary = run_suite(&CRITERIA, |o| {
        println!("{}", o.line());
        for c in o.checks.iter().filter(|c| !c.passed) {
            println!("       failed check {}: {}", c.label, c.detail);
        }
    });
    println!("acceptance: {} passed, {} failed", summary.passed, summary.failed);
    if !summary.all_passed() {
        std::process::exit(1);
    }
}
