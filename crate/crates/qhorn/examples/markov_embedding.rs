//! A classical two-state Markov chain embedded as a quantum flow: the
//! stochastic-row unitary, the induced transition matrix, and vacuum flow
//! statistics matching the classical n-step expectations.
//!
//! Run with `cargo run --example markov_embedding`.

use qhorn::linalg::{ComplexMatrix, ComplexVector, C64};
use qhorn::qwalk::{condition_on_past, embed_markov_chain, markov_chain_unitary, Flow};

fn main() {
    let p_row = [0.25, 0.75];
    let u = markov_chain_unitary(&p_row).unwrap();
    println!("stochastic-row unitary (p = {:?}):", p_row);
    for i in 0..2 {
        println!("  [{:+.4}, {:+.4}]", u.get(i, 0).re, u.get(i, 1).re);
    }
    println!("unitarity defect: {:.2e}", u.unitarity_defect());

    // Chain: stay with p₀, swap with p₁.
    let emb = embed_markov_chain(&p_row, &[vec![0, 1], vec![1, 0]], 2).unwrap();
    println!("\ninduced transition matrix:");
    for row in &emb.transition.probs {
        println!("  {row:?}");
    }

    let f_values = [1.0, -1.0];
    let f = ComplexMatrix::diag(&[C64::new(f_values[0], 0.0), C64::new(f_values[1], 0.0)]);
    let vacuum = ComplexVector::basis(2, 0);
    let mut flow = Flow::initial(2, 2);
    println!("\nvacuum flow vs classical chain, f = {f_values:?}:");
    for n in 1..=5usize {
        flow = flow.step(&emb.maps).unwrap();
        let conditioned = condition_on_past(&flow.apply(&f), 2, 2, n, 0, &vacuum).unwrap();
        let quantum = conditioned.get(0, 0).re;
        let classical = emb.transition.expectation(&f_values, 0, n);
        println!("  n = {n}: quantum {quantum:+.10}  classical {classical:+.10}");
    }
}
