//! The pointer-probe program as clauses: probing one observable leaves its
//! statistics intact, probing a second incompatible one afterwards disturbs
//! the first, and the subsequent state-equality goal fails.
//!
//! Run with `cargo run --example probe_clauses`.

use qhorn::horn::{fixtures, load_program, parse_goal, solve, SolveLimits};

fn main() {
    for goal_text in ["sequence_ok", "sequence_disturbed"] {
        let (program, mut registry) = load_program(fixtures::PROBE, 42).unwrap();
        let goal = parse_goal(goal_text).unwrap();
        let trace = solve(&goal, &program, &mut registry, SolveLimits::default()).unwrap();
        println!("goal {goal_text}: {}", trace.outcome);
        if trace.outcome != qhorn::horn::Outcome::Proved {
            // Show why the disturbed sequence cannot close.
            for line in trace.events.iter().rev().take(3).rev() {
                println!("  {line}");
            }
        }
        println!();
    }
}
