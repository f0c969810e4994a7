//! Constructive refutation of universal cloning: the positive goal fails, and
//! the negated goal is refuted with the linearity contradiction visible in
//! the trace (the cross amplitude 0.48 must vanish and 0.36 must equal 0.6).
//!
//! Run with `cargo run --example no_cloning`.

use qhorn::horn::{fixtures, load_program, parse_goal, solve, Outcome, SolveLimits};

fn main() {
    let goal_text = "clone(0.6|0⟩ + 0.8|1⟩, 0.6|0⟩ + 0.8|1⟩)";

    let (program, mut registry) = load_program(fixtures::NO_CLONING, 42).unwrap();
    let positive = parse_goal(goal_text).unwrap();
    let trace = solve(&positive, &program, &mut registry, SolveLimits::default()).unwrap();
    println!("positive goal: {}", trace.outcome);
    assert_eq!(trace.outcome, Outcome::Failed);

    let (program, mut registry) = load_program(fixtures::NO_CLONING, 42).unwrap();
    let negated = parse_goal(&format!("~{goal_text}")).unwrap();
    let trace = solve(&negated, &program, &mut registry, SolveLimits::default()).unwrap();
    println!("negated goal:  {}\n", trace.outcome);
    print!("{}", trace.render());

    // Basis states clone fine.
    let (program, mut registry) = load_program(fixtures::NO_CLONING, 42).unwrap();
    let basis = parse_goal("clone(|1⟩, |1⟩)").unwrap();
    let trace = solve(&basis, &program, &mut registry, SolveLimits::default()).unwrap();
    println!("\nbasis-state goal: {}", trace.outcome);
}
