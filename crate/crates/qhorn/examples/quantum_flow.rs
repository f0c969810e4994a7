//! The operator-valued flow behind the walk: structure maps, the step
//! recursion, the Markov property under vacuum conditioning, and the discrete
//! noise martingales.
//!
//! Run with `cargo run --example quantum_flow`.

use qhorn::linalg::{ComplexMatrix, ComplexVector, C64};
use qhorn::qwalk::{
    chain_basis, condition_on_past, discrete_noise_ops, gauge_count, CoinSpec, Flow,
    StructureMaps,
};

fn main() {
    let walker_dim = 3;
    let maps = StructureMaps::from_coined(&CoinSpec::hadamard(), walker_dim).unwrap();
    println!("θ_0^0 unitality defect: {:.2e}", maps.unitality_defect());

    // Flow a position observable for three steps and condition back.
    let mut x = ComplexMatrix::zeros(walker_dim, walker_dim);
    x.set(0, 0, C64::new(1.0, 0.0));
    x.set(1, 1, C64::new(-1.0, 0.0));
    let vacuum = ComplexVector::basis(2, 0);
    let mut flow = Flow::initial(walker_dim, 2);
    for n in 1..=3usize {
        let next = flow.step(&maps).unwrap();
        let conditioned =
            condition_on_past(&next.apply(&x), walker_dim, 2, n, n - 1, &vacuum).unwrap();
        let expected = flow.apply(&maps.theta(0, 0, &x));
        println!(
            "step {n}: flow dimension {:>3}, Markov residual {:.2e}",
            next.dim(),
            conditioned.sub(&expected).max_abs()
        );
        flow = next;
    }

    // Slot martingales on a 5-slot chain.
    let ops = discrete_noise_ops(3, 5).unwrap();
    let excited = chain_basis(&[1, 3, 5], 5);
    let counted = ops.gauge.apply(&excited);
    println!(
        "\ngauge eigenvalue on e_{{1,3,5}} with n = 3: {} (set count {})",
        counted.inner(&excited).re.round(),
        gauge_count(&[1, 3, 5], 3)
    );
    let vacuum_chain = chain_basis(&[], 5);
    println!(
        "vacuum expectation of Λ_3: {:.1}",
        vacuum_chain.inner(&ops.gauge.apply(&vacuum_chain)).re
    );
}
