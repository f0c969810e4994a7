//! Circuit algebra for the driven two-cavity cascade: concatenation, the
//! series product, the channel crossing, and the eliminated two-qubit model.
//!
//! Run with `cargo run --example slh_cascade`.

use qhorn::slh::{
    adiabatic_jc_cascade, cascade_paper, format_triple, JCParams, NetworkSpec,
};

fn main() {
    let mut p = JCParams::reference();
    p.alpha = qhorn::C64::new(1.0, 0.0);
    p.fock_cutoff = 2;

    println!("=== full composite (cutoff 2) ===");
    let composite = cascade_paper(&p).unwrap();
    print!("{}", format_triple(&composite));

    println!("\n=== adiabatically eliminated two-qubit model ===");
    let eliminated = adiabatic_jc_cascade(&p).unwrap();
    print!("{}", format_triple(&eliminated));

    // The same composite assembled from the shipped network file.
    let json = include_str!("../fixtures/cascade.json");
    let spec = NetworkSpec::from_json(json).unwrap();
    let network = spec.build(Some(2)).unwrap();
    let reference = composite.promoted_to(&network.space).unwrap();
    println!(
        "\nnetwork file reproduces the assembled composite: max deviation {:.2e}",
        network.h.sub(&reference.h).max_abs()
    );
}
