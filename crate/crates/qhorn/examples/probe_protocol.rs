//! Copying an observable onto a pointer factor: the copy identity, the
//! conditional-probability ratio, and the disturbance caused by probing an
//! incompatible observable in between.
//!
//! Run with `cargo run --example probe_protocol`.

use qhorn::linalg::{gates, ComplexVector};
use qhorn::qprob::{
    build_probe_unitary, probe_disturbance, QuantumState, SpectralDecomposition,
};

fn main() {
    let spec = SpectralDecomposition::of(&gates::sigma_z(), 1e-9).unwrap();
    let probe = build_probe_unitary(&spec, 0).unwrap();
    let state = QuantumState::pure(&ComplexVector::from_real(&[0.6, 0.8])).unwrap();

    println!("probing σz with pointer index 0:");
    for outcome in 0..2 {
        println!(
            "  outcome {outcome}: copy-identity residual {:.2e}, conditional ratio {:.12}",
            probe.copy_identity_residual(outcome),
            probe.conditional_ratio(&state, outcome).unwrap()
        );
        println!(
            "  pointer statistic {:.6} vs direct tr(ρP) {:.6}",
            probe.pointer_statistic(&state, outcome),
            gleason(&state, &spec, outcome)
        );
    }

    let a = SpectralDecomposition::of(&gates::sigma_z(), 1e-9).unwrap();
    let b = SpectralDecomposition::of(&gates::sigma_x(), 1e-9).unwrap();
    let ket0 = QuantumState::pure(&ComplexVector::basis(2, 0)).unwrap();
    println!(
        "\nprobe σz, then σx, then measure σz again: max outcome shift {:.4}",
        probe_disturbance(&a, &b, &ket0).unwrap()
    );
    println!(
        "same with the identical observable twice:  max outcome shift {:.2e}",
        probe_disturbance(&a, &a, &ket0).unwrap()
    );
}

fn gleason(state: &QuantumState, spec: &SpectralDecomposition, outcome: usize) -> f64 {
    state
        .rho()
        .matmul(spec.projectors[outcome].matrix())
        .trace()
        .re
}
