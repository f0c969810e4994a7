//! Proving the heralded-entanglement program: the proof drives the protocol,
//! the post-selection collapses the photons, and the registry ends up holding
//! a Bell pair of the remote spins.
//!
//! Run with `cargo run --example herald_prove`.

use qhorn::dynamics::wootters_concurrence;
use qhorn::horn::{fixtures, load_program, parse_goal, solve, SolveLimits};
use qhorn::qprob::QuantumState;

fn main() {
    let (program, mut registry) = load_program(fixtures::HERALD, 42).unwrap();
    let goal = parse_goal("herald(nv1, nv2, p1, p2)").unwrap();
    let trace = solve(&goal, &program, &mut registry, SolveLimits::default()).unwrap();
    print!("{}", trace.render());

    let psi = registry.named_kets.get("Psi").unwrap();
    println!("\nregistry Psi = {psi}");
    let v = psi.to_vector().unwrap().normalized();
    let conc = wootters_concurrence(&QuantumState::pure(&v).unwrap()).unwrap();
    println!("concurrence(Psi) = {conc:.12}");
}
