//! Driving the scenario runner from code: parse a scenario, run it, and
//! inspect the structured report (the same machinery behind
//! `epscalc scenario run`).
//!
//! Run with: cargo run --example scenario_runner

use epscalc::scenario::{builtin_scenarios, run_scenario_text, RunOptions};

const INLINE: &str = "
name inline-demo
precision 16

let closed = 1/(1 - e)
series G tail e^j bound j

check sum G == closed
check valuation closed - 1 == 1
check eval G at e^2 == 1/(1 - e^3)
";

fn main() {
    let report = run_scenario_text(INLINE, &RunOptions::default()).expect("scenario parses");
    print!("{}", report.render_text());
    println!("json:\n{}\n", report.to_json());

    println!("built-in scenarios:");
    for (name, body) in builtin_scenarios() {
        let report = run_scenario_text(body, &RunOptions::default()).expect("builtin parses");
        println!(
            "  {:<26} {} ({} checks)",
            name,
            if report.all_passed() { "ok" } else { "FAILED" },
            report.checks.len()
        );
    }
}
