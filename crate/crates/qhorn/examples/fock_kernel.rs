//! The symbolic Fock layer: exponential-vector kernels, Weyl displacement,
//! gauge/annihilation matrix elements, and the Monte-Carlo Poisson oracle.
//!
//! Run with `cargo run --example fock_kernel`.

use qhorn::fockweyl::{
    annihilation_elem, coherent_expectation, exp_kernel, gauge_elem, poisson_mc_oracle,
    weyl_apply, weyl_compose_check, ExponentialVectorSum, TestFunction,
};
use qhorn::linalg::C64;

fn main() {
    let horizon = 1.0;
    let cells = 10;
    let amp = C64::new(0.9, -0.4);
    let f = TestFunction::constant(amp, horizon, cells);
    let vacuum = TestFunction::zero(horizon, cells);

    println!("⟨e(0), e(0)⟩ = {:.6} (= e^-T)", exp_kernel(&vacuum, &vacuum).unwrap().re);
    println!(
        "⟨e(f), e(f)⟩ = {:.6} (= e^(|c|²-1)T)",
        exp_kernel(&f, &f).unwrap().re
    );

    // Weyl displacement of the vacuum.
    let displaced = weyl_apply(&f, &ExponentialVectorSum::vacuum(horizon, cells)).unwrap();
    println!(
        "W(f) e(0): coefficient {:.6} (= e^(-½‖f‖²)), norm {:.6}",
        displaced.terms[0].0.re,
        displaced.norm()
    );

    // Composition scalar against the kernel prediction.
    let g = TestFunction::constant(C64::new(-0.3, 0.7), horizon, cells);
    let probes = vec![vacuum.clone(), f.clone()];
    let phase = weyl_compose_check(&f, &g, &probes).unwrap();
    println!(
        "W(f)W(g) = c·W(f+g) with c = {:.6}{:+.6}i (|c| = {:.6})",
        phase.re,
        phase.im,
        phase.norm()
    );

    // Coherent-state statistics: counting and annihilation.
    let t = 0.6;
    let gauge = coherent_expectation(|u, v| gauge_elem(t, u, v), &f).unwrap();
    println!("\nE[N_t] from the kernel:  {:.6} (exact |c|²t = {:.6})", gauge.re, amp.norm_sqr() * t);
    let mc = poisson_mc_oracle(t, &f, 100_000, 42).unwrap();
    println!("E[N_t] from Monte Carlo: {mc:.6} (100k samples)");
    let ann = coherent_expectation(|u, v| annihilation_elem(t, u, v), &f).unwrap();
    println!("E[A_t] = {:.6}{:+.6}i (exact c·t = {:.6}{:+.6}i)", ann.re, ann.im, amp.re * t, amp.im * t);
}
