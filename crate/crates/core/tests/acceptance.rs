//! Acceptance gate: runs every verification criterion and prints one line
//! per criterion. Exits non-zero if any criterion fails.

use geowrap::testkit::suite::run_all;

fn main() {
    let threads = std::thread::available_parallelism().map_or(1, |n| n.get());
    let report = run_all(threads);
    println!("acceptance: {} criteria", report.checks.len());
    for c in &report.checks {
        println!("{}", c.line());
    }
    println!("acceptance: {} passed, {} failed", report.passed, report.failed);
    if !report.all_passed {
        std::process::exit(1);
    }
}
