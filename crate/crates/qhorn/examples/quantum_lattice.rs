//! Projection-lattice quantum logic: meets, joins, orthocomplements, the
//! failure of distributivity on incompatible projections, and Gleason
//! probabilities.
//!
//! Run with `cargo run --example quantum_lattice`.

use qhorn::linalg::ComplexVector;
use qhorn::qprob::{
    check_automorphism, gleason_probability, is_compatible, lattice_join, lattice_meet,
    orthocomplement, Projection, QuantumState,
};

fn main() {
    // Two rays at ±θ to |0⟩ with cos²θ = 0.9999999: individually near-certain,
    // jointly impossible.
    let theta = (0.9999999f64).sqrt().acos();
    let ray = |angle: f64| {
        Projection::onto_vector(&ComplexVector::from_real(&[angle.cos(), angle.sin()])).unwrap()
    };
    let e_p = ray(theta);
    let e_q = ray(-theta);
    let state = QuantumState::pure(&ComplexVector::basis(2, 0)).unwrap();

    println!("P(E_p)        = {:.7}", gleason_probability(&state, &e_p).unwrap());
    println!("P(E_q)        = {:.7}", gleason_probability(&state, &e_q).unwrap());
    let meet = lattice_meet(&e_p, &e_q).unwrap();
    println!("P(E_p ⊓ E_q)  = {:.7}", gleason_probability(&state, &meet).unwrap());
    println!("compatible?     {}", is_compatible(&e_p, &e_q).unwrap());

    // Distributivity fails on this sample.
    let q0 = Projection::onto_vector(&ComplexVector::basis(2, 0)).unwrap();
    let q1 = Projection::onto_vector(&ComplexVector::basis(2, 1)).unwrap();
    let lhs = lattice_meet(&e_p, &lattice_join(&q0, &q1).unwrap()).unwrap();
    let rhs = lattice_join(
        &lattice_meet(&e_p, &q0).unwrap(),
        &lattice_meet(&e_p, &q1).unwrap(),
    )
    .unwrap();
    println!(
        "distributive law residual: {:.3} (nonzero ⇒ non-Boolean)",
        lhs.matrix().sub(rhs.matrix()).max_abs()
    );

    // De Morgan still holds, and unitary conjugation is a lattice automorphism.
    let lhs = orthocomplement(&lattice_join(&e_p, &e_q).unwrap());
    let rhs = lattice_meet(&orthocomplement(&e_p), &orthocomplement(&e_q)).unwrap();
    println!("De Morgan residual:        {:.3e}", lhs.matrix().sub(rhs.matrix()).max_abs());
    let sample = vec![Projection::zero(2), Projection::identity(2), q0, q1];
    println!(
        "Hadamard conjugation is an automorphism: {}",
        check_automorphism(&qhorn::linalg::gates::hadamard(), &sample).unwrap()
    );
}
