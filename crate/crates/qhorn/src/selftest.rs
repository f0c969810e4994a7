//! The acceptance suite: each criterion below exercises one subsystem
//! end-to-end at its pinned tolerance and reports a pass/fail line. The
//! command-line `selftest` subcommand and the `acceptance` integration tests
//! both run these.

use crate::dynamics::{
    lindblad_from_slh, rk4_integrate, run_jc_cascade, wootters_concurrence, InitialAtoms,
    LindbladModel, XState,
};
use crate::fockweyl::{
    exp_kernel, gauge_elem, poisson_mc_oracle, weyl_apply, weyl_compose_check,
    ExponentialVectorSum, TestFunction,
};
use crate::horn::{self, fixtures, parse_goal, solve, Outcome, SolveLimits};
use crate::linalg::{gates, hermitian_eigen, matrix_exp, ComplexMatrix, ComplexVector, C64};
use crate::qprob::{
    build_probe_unitary, probe_disturbance, QuantumState, SpectralDecomposition,
};
use crate::qwalk::{
    condition_on_past, embed_markov_chain, markov_chain_unitary, CoinSpec, Flow, StructureMaps,
    WalkState,
};
use crate::slh::{
    adiabatic_jc_cascade, cascade_paper, cascade_space, concatenate, jc_triple, series, JCParams,
    SLHTriple, Space,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Outcome of one acceptance criterion.
#[derive(Debug, Clone)]
pub struct CriterionReport {
    pub index: usize,
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl CriterionReport {
    pub fn line(&self) -> String {
        format!(
            "criterion {:>2} {:<28} {} — {}",
            self.index,
            self.name,
            if self.passed { "PASS" } else { "FAIL" },
            self.detail
        )
    }
}

struct Check {
    failures: Vec<String>,
    notes: Vec<String>,
}

impl Check {
    fn new() -> Self {
        Self { failures: Vec::new(), notes: Vec::new() }
    }

    fn assert(&mut self, ok: bool, what: impl Into<String>) {
        let what = what.into();
        if !ok {
            self.failures.push(what);
        }
    }

    fn note(&mut self, text: impl Into<String>) {
        self.notes.push(text.into());
    }

    fn report(self, index: usize, name: &'static str) -> CriterionReport {
        let passed = self.failures.is_empty();
        let detail = if passed {
            self.notes.join("; ")
        } else {
            self.failures.join("; ")
        };
        CriterionReport { index, name, passed, detail }
    }
}

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

fn random_state(rng: &mut ChaCha8Rng, dim: usize) -> QuantumState {
    let mut m = ComplexMatrix::zeros(dim, dim);
    for i in 0..dim {
        for j in 0..dim {
            m.set(i, j, c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
        }
    }
    let rho = m.matmul(&m.dagger());
    let rho = rho.scale(c(1.0 / rho.trace().re, 0.0));
    QuantumState::new(rho).expect("random density matrix")
}

fn random_unitary(rng: &mut ChaCha8Rng, dim: usize) -> ComplexMatrix {
    let mut m = ComplexMatrix::zeros(dim, dim);
    for i in 0..dim {
        for j in 0..dim {
            m.set(i, j, c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
        }
    }
    let h = m.add(&m.dagger()).scale(c(0.5, 0.0));
    matrix_exp(&h.scale(c(0.0, 1.0))).expect("unitary exponential")
}

/// Criterion 1: the probe unitary copies statistics exactly — the copy
/// identity and the conditional ratio hold to 1e-10 on random observables
/// and states for system dimensions 2–5.
pub fn criterion_1(seed: u64) -> CriterionReport {
    let mut check = Check::new();
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x01);
    let mut worst_identity = 0.0f64;
    let mut worst_ratio = 0.0f64;
    for dim in 2..=5usize {
        let diag: Vec<C64> = (0..dim)
            .map(|k| c(k as f64 + rng.random_range(0.0..0.4), 0.0))
            .collect();
        let basis = random_unitary(&mut rng, dim);
        let obs = basis.matmul(&ComplexMatrix::diag(&diag)).matmul(&basis.dagger());
        let spec = match SpectralDecomposition::of(&obs, 1e-6) {
            Ok(s) => s,
            Err(e) => {
                check.assert(false, format!("spectral decomposition: {e}"));
                continue;
            }
        };
        let probe = match build_probe_unitary(&spec, dim - 1) {
            Ok(p) => p,
            Err(e) => {
                check.assert(false, format!("probe build dim {dim}: {e}"));
                continue;
            }
        };
        let state = random_state(&mut rng, dim);
        for outcome in 0..dim {
            worst_identity = worst_identity.max(probe.copy_identity_residual(outcome));
            match probe.conditional_ratio(&state, outcome) {
                Ok(r) => worst_ratio = worst_ratio.max((r - 1.0).abs()),
                Err(e) => check.assert(false, format!("ratio dim {dim}: {e}")),
            }
        }
    }
    check.assert(
        worst_identity < 1e-10,
        format!("copy identity residual {worst_identity:.3e} ≥ 1e-10"),
    );
    check.assert(
        worst_ratio < 1e-10,
        format!("conditional ratio deviation {worst_ratio:.3e} ≥ 1e-10"),
    );
    check.note(format!(
        "copy residual {worst_identity:.2e}, ratio deviation {worst_ratio:.2e}"
    ));
    check.report(1, "probe protocol")
}

/// Criterion 2: probing an incompatible observable in between disturbs the
/// first observable's statistics by more than 0.1, commuting probes by less
/// than 1e-10.
pub fn criterion_2(seed: u64) -> CriterionReport {
    let mut check = Check::new();
    let a = SpectralDecomposition::of(&gates::sigma_z(), 1e-8).expect("σz");
    let b = SpectralDecomposition::of(&gates::sigma_x(), 1e-8).expect("σx");
    let ket0 = QuantumState::pure(&ComplexVector::basis(2, 0)).expect("|0⟩");
    match probe_disturbance(&a, &b, &ket0) {
        Ok(d) => {
            check.assert(d > 0.1, format!("σz/σx disturbance {d:.4} ≤ 0.1"));
            check.note(format!("incompatible disturbance {d:.4}"));
        }
        Err(e) => check.assert(false, format!("disturbance: {e}")),
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x02);
    let diag_a = ComplexMatrix::diag(&[c(0.3, 0.0), c(1.4, 0.0)]);
    let diag_b = ComplexMatrix::diag(&[c(-0.7, 0.0), c(0.2, 0.0)]);
    let spec_a = SpectralDecomposition::of(&diag_a, 1e-8).expect("diag a");
    let spec_b = SpectralDecomposition::of(&diag_b, 1e-8).expect("diag b");
    let state = random_state(&mut rng, 2);
    match probe_disturbance(&spec_a, &spec_b, &state) {
        Ok(d) => check.assert(d < 1e-10, format!("commuting disturbance {d:.3e} ≥ 1e-10")),
        Err(e) => check.assert(false, format!("commuting case: {e}")),
    }
    match probe_disturbance(&a, &a, &ket0) {
        Ok(d) => check.assert(d < 1e-10, format!("repeated probe disturbance {d:.3e}")),
        Err(e) => check.assert(false, format!("repeated case: {e}")),
    }
    check.report(2, "probe disturbance")
}

/// Brute-force oracle: the coined step as one dense unitary on a ring wide
/// enough that the walk never wraps.
fn walk_oracle_distribution(steps: usize) -> Vec<(i64, f64)> {
    let ring = 2 * steps + 3;
    let half = (ring / 2) as i64;
    let u = CoinSpec::hadamard().step_unitary(ring);
    let mut v = ComplexVector::zeros(ring * 2);
    v.data[(half as usize) * 2] = c(1.0, 0.0);
    for _ in 0..steps {
        v = u.apply(&v);
    }
    (0..ring)
        .map(|pos| {
            let x = pos as i64 - half;
            (x, v.data[pos * 2].norm_sqr() + v.data[pos * 2 + 1].norm_sqr())
        })
        .collect()
}

/// Classical symmetric walk distribution after `n` steps (binomial), used as
/// the diffusive baseline.
fn classical_walk_std(n: usize) -> f64 {
    let mut probs = vec![0.0f64; 2 * n + 1];
    probs[n] = 1.0;
    for _ in 0..n {
        let mut next = vec![0.0f64; probs.len()];
        for (idx, &p) in probs.iter().enumerate() {
            if p == 0.0 {
                continue;
            }
            if idx > 0 {
                next[idx - 1] += 0.5 * p;
            }
            if idx + 1 < next.len() {
                next[idx + 1] += 0.5 * p;
            }
        }
        probs = next;
    }
    let mean: f64 = probs
        .iter()
        .enumerate()
        .map(|(idx, p)| (idx as f64 - n as f64) * p)
        .sum();
    probs
        .iter()
        .enumerate()
        .map(|(idx, p)| (idx as f64 - n as f64 - mean).powi(2) * p)
        .sum::<f64>()
        .sqrt()
}

/// Criterion 3: the amplitude recursion matches the dense-unitary oracle to
/// 1e-10 up to 50 steps, keeps its norm to 1e-12 at 200 steps, and spreads
/// ballistically while the classical chain spreads diffusively.
pub fn criterion_3(_seed: u64) -> CriterionReport {
    let mut check = Check::new();
    let mut worst = 0.0f64;
    for steps in [10usize, 25, 50] {
        let s = WalkState::localized_right().steps(steps);
        let oracle = walk_oracle_distribution(steps);
        for (x, p) in s.position_distribution() {
            let po = oracle
                .iter()
                .find(|(xx, _)| *xx == x)
                .map(|(_, p)| *p)
                .unwrap_or(0.0);
            worst = worst.max((p - po).abs());
        }
    }
    check.assert(worst < 1e-10, format!("oracle deviation {worst:.3e} ≥ 1e-10"));

    let s200 = WalkState::localized_right().steps(200);
    let drift = (s200.norm() - 1.0).abs();
    check.assert(drift < 1e-12, format!("norm drift {drift:.3e} at 200 steps"));

    let s50 = WalkState::localized_right().steps(50);
    let s100 = s50.steps(50);
    let ratio = s100.position_std() / s50.position_std();
    check.assert(
        (1.85..=2.05).contains(&ratio),
        format!("ballistic ratio {ratio:.4} outside [1.85, 2.05]"),
    );
    let classical_ratio = classical_walk_std(100) / classical_walk_std(50);
    check.assert(
        (classical_ratio - 2f64.sqrt()).abs() < 0.05,
        format!("classical ratio {classical_ratio:.4} differs from √2"),
    );
    check.note(format!(
        "oracle dev {worst:.2e}, ballistic {ratio:.3} vs classical {classical_ratio:.3}"
    ));
    check.report(3, "walk oracle equivalence")
}

/// Criterion 4: the stochastic-row unitary is orthogonal to 1e-12 up to d=6,
/// the flow satisfies the Markov property to 1e-9, and vacuum flow statistics
/// reproduce the classical n-step chain to 1e-10.
pub fn criterion_4(seed: u64) -> CriterionReport {
    let mut check = Check::new();
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x04);
    let mut worst_unitarity = 0.0f64;
    for d in 2..=6usize {
        let mut row: Vec<f64> = (0..d).map(|_| rng.random_range(0.05..1.0)).collect();
        let sum: f64 = row.iter().sum();
        row.iter_mut().for_each(|p| *p /= sum);
        match markov_chain_unitary(&row) {
            Ok(u) => worst_unitarity = worst_unitarity.max(u.unitarity_defect()),
            Err(e) => check.assert(false, format!("unitary d={d}: {e}")),
        }
    }
    check.assert(
        worst_unitarity < 1e-12,
        format!("stochastic-row unitarity {worst_unitarity:.3e} ≥ 1e-12"),
    );

    // Markov property of the coined flow, d = 2, n ≤ 4.
    let w = 3usize;
    let maps = StructureMaps::from_coined(&CoinSpec::hadamard(), w).expect("maps");
    let vacuum = ComplexVector::basis(2, 0);
    let mut worst_markov = 0.0f64;
    let mut prev = Flow::initial(w, 2);
    for n in 1..=4usize {
        let next = prev.step(&maps).expect("flow step");
        let mut x = ComplexMatrix::zeros(w, w);
        for i in 0..w {
            for j in 0..w {
                x.set(i, j, c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
            }
        }
        let conditioned = condition_on_past(&next.apply(&x), w, 2, n, n - 1, &vacuum)
            .expect("conditioning");
        let expected = prev.apply(&maps.theta(0, 0, &x));
        worst_markov = worst_markov.max(conditioned.sub(&expected).max_abs());
        prev = next;
    }
    check.assert(
        worst_markov < 1e-9,
        format!("Markov residual {worst_markov:.3e} ≥ 1e-9"),
    );

    // Vacuum statistics against the classical chain, d = 2, n ≤ 5.
    let p_row = {
        let a: f64 = rng.random_range(0.2..0.8);
        vec![a, 1.0 - a]
    };
    let emb = embed_markov_chain(&p_row, &[vec![0, 1], vec![1, 0]], 2).expect("embedding");
    let f_values = [rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)];
    let f = ComplexMatrix::diag(&[c(f_values[0], 0.0), c(f_values[1], 0.0)]);
    let mut worst_chain = 0.0f64;
    let mut flow = Flow::initial(2, 2);
    for n in 1..=5usize {
        flow = flow.step(&emb.maps).expect("flow step");
        let conditioned =
            condition_on_past(&flow.apply(&f), 2, 2, n, 0, &vacuum).expect("conditioning");
        for s in 0..2 {
            let classical = emb.transition.expectation(&f_values, s, n);
            worst_chain = worst_chain.max((conditioned.get(s, s).re - classical).abs());
        }
    }
    check.assert(
        worst_chain < 1e-10,
        format!("vacuum/classical deviation {worst_chain:.3e} ≥ 1e-10"),
    );
    check.note(format!(
        "unitarity {worst_unitarity:.2e}, markov {worst_markov:.2e}, chain {worst_chain:.2e}"
    ));
    check.report(4, "markov embedding")
}

/// Criterion 5: exponential-vector Gram matrices are PSD, Weyl displacement
/// preserves inner products to 1e-12 with a probe-consistent composition
/// phase, and the gauge law matches the Monte-Carlo Poisson oracle within 2%.
pub fn criterion_5(seed: u64) -> CriterionReport {
    let mut check = Check::new();
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x05);
    let rand_fn = |rng: &mut ChaCha8Rng, cells: usize| {
        TestFunction::new(
            1.0,
            (0..cells)
                .map(|_| c(rng.random_range(-0.8..0.8), rng.random_range(-0.8..0.8)))
                .collect(),
        )
    };

    let mut min_eig = f64::INFINITY;
    for m in 2..=5usize {
        let fs: Vec<TestFunction> = (0..m).map(|_| rand_fn(&mut rng, 6)).collect();
        let mut gram = ComplexMatrix::zeros(m, m);
        for i in 0..m {
            for j in 0..m {
                gram.set(i, j, exp_kernel(&fs[i], &fs[j]).expect("kernel"));
            }
        }
        let eig = hermitian_eigen(&gram).expect("gram eigen");
        min_eig = min_eig.min(eig.eigenvalues[0]);
    }
    check.assert(min_eig > -1e-10, format!("Gram min eigenvalue {min_eig:.3e} ≤ −1e-10"));

    let mut worst_weyl = 0.0f64;
    for _ in 0..4 {
        let f = rand_fn(&mut rng, 6);
        let u = ExponentialVectorSum::exponential(rand_fn(&mut rng, 6));
        let v = ExponentialVectorSum::exponential(rand_fn(&mut rng, 6))
            .add(&ExponentialVectorSum::exponential(rand_fn(&mut rng, 6)).scale(c(0.3, -0.6)))
            .expect("sum");
        let before = u.inner(&v).expect("inner");
        let after = weyl_apply(&f, &u)
            .expect("weyl")
            .inner(&weyl_apply(&f, &v).expect("weyl"))
            .expect("inner");
        worst_weyl = worst_weyl.max((before - after).norm());
    }
    check.assert(
        worst_weyl < 1e-12,
        format!("Weyl inner-product deviation {worst_weyl:.3e} ≥ 1e-12"),
    );

    let probes: Vec<TestFunction> = (0..3).map(|_| rand_fn(&mut rng, 6)).collect();
    let f = rand_fn(&mut rng, 6);
    let g = rand_fn(&mut rng, 6);
    match weyl_compose_check(&f, &g, &probes) {
        Ok(phase) => {
            let expected = (c(0.0, -1.0) * f.inner(&g).expect("inner").im).exp();
            let dev = (phase - expected).norm();
            check.assert(dev < 1e-10, format!("composition phase deviation {dev:.3e}"));
        }
        Err(e) => check.assert(false, format!("composition: {e}")),
    }

    let amp = c(1.0, 0.0);
    let f_const = TestFunction::constant(amp, 1.0, 10);
    let t = 1.0;
    let exact = amp.norm_sqr() * t;
    let estimate = poisson_mc_oracle(t, &f_const, 100_000, seed ^ 0x55).expect("mc oracle");
    let rel = (estimate - exact).abs() / exact;
    check.assert(rel < 0.02, format!("MC relative error {rel:.4} ≥ 2%"));
    let from_kernel =
        (gauge_elem(t, &f_const, &f_const).expect("gauge") / exp_kernel(&f_const, &f_const).expect("kernel")).re;
    check.assert(
        (from_kernel - exact).abs() < 1e-12,
        "gauge matrix element differs from |c|²t",
    );
    check.note(format!(
        "gram {min_eig:.1e}, weyl {worst_weyl:.1e}, MC rel {rel:.4}"
    ));
    check.report(5, "fock layer")
}

/// Hand-coded printed form of the driven-cascade composite.
fn printed_composite(p: &JCParams) -> (Vec<Vec<ComplexMatrix>>, Vec<ComplexMatrix>, ComplexMatrix) {
    let space = cascade_space(p.fock_cutoff);
    let a1 = space.embed_at(&gates::annihilation(p.fock_cutoff), "fock_jc1").unwrap();
    let a2 = space.embed_at(&gates::annihilation(p.fock_cutoff), "fock_jc2").unwrap();
    let s1 = space.embed_at(&gates::lowering(), "tls_jc1").unwrap();
    let s2 = space.embed_at(&gates::lowering(), "tls_jc2").unwrap();
    let dim = space.dim();
    let i_dim = ComplexMatrix::identity(dim);
    let zero = ComplexMatrix::zeros(dim, dim);
    let sqrt_k = c(p.kappa.sqrt(), 0.0);
    let sqrt_g = c(p.gamma.sqrt(), 0.0);

    let s = vec![
        vec![i_dim.clone(), zero.clone(), zero.clone()],
        vec![zero.clone(), zero.clone(), i_dim.clone()],
        vec![zero.clone(), i_dim.clone(), zero.clone()],
    ];
    let l = vec![
        i_dim.scale(p.alpha).add(&a1.scale(sqrt_k)).add(&a2.scale(sqrt_k)),
        s2.scale(sqrt_g),
        s1.scale(sqrt_g),
    ];
    let pi = |s: &ComplexMatrix| s.dagger().matmul(s);
    let couple = |a: &ComplexMatrix, s: &ComplexMatrix| {
        a.dagger().matmul(s).sub(&a.matmul(&s.dagger())).scale(c(0.0, p.g))
    };
    let mut h = pi(&s1).add(&pi(&s2)).scale(c(p.delta, 0.0));
    h = h.add(&couple(&a1, &s1)).add(&couple(&a2, &s2));
    h = h.add(
        &a1.dagger()
            .scale(c(0.0, 0.5) * (-p.alpha) * sqrt_k)
            .add(&a1.scale(c(0.0, 0.5) * p.alpha.conj() * sqrt_k)),
    );
    let inner1 = ComplexMatrix::identity(dim).scale(p.alpha).add(&a1.scale(sqrt_k));
    h = h.add(
        &inner1
            .matmul(&a2.dagger())
            .scale(c(0.0, -0.5) * sqrt_k)
            .add(&inner1.dagger().matmul(&a2).scale(c(0.0, 0.5) * sqrt_k)),
    );
    let num = |a: &ComplexMatrix| a.dagger().matmul(a);
    h = h.add(&num(&a1).add(&num(&a2)).scale(c(p.theta_det, 0.0)));
    (s, l, h)
}

/// Hand-coded printed form of the eliminated two-qubit triple.
fn printed_adiabatic(p: &JCParams) -> (Vec<ComplexMatrix>, ComplexMatrix) {
    let space = Space::new(vec![("tls_jc1", 2), ("tls_jc2", 2)]);
    let s1 = space.embed_at(&gates::lowering(), "tls_jc1").unwrap();
    let s2 = space.embed_at(&gates::lowering(), "tls_jc2").unwrap();
    let i4 = ComplexMatrix::identity(4);
    let rate = 2.0 * p.g / p.kappa.sqrt();
    let gk = p.g / p.kappa.sqrt();
    let l = vec![
        i4.scale(p.alpha)
            .add(&s1.scale(c(-rate, 0.0)))
            .add(&s2.scale(c(rate, 0.0))),
        s2.scale(c(p.gamma.sqrt(), 0.0)),
        s1.scale(c(p.gamma.sqrt(), 0.0)),
    ];
    let mut h = s1.dagger().matmul(&s1).scale(c(p.delta, 0.0));
    h = h.add(&s1.dagger().scale(c(0.0, gk) * p.alpha));
    h = h.sub(&s1.scale(c(0.0, gk) * p.alpha.conj()));
    h = h.add(&s2.dagger().matmul(&s2).scale(c(p.delta, 0.0)));
    h = h.sub(&s2.dagger().scale(c(0.0, gk) * p.alpha));
    h = h.add(&s2.scale(c(0.0, gk) * p.alpha.conj()));
    h = h.sub(&s1.dagger().matmul(&s2).scale(c(0.0, 2.0 * p.g * p.g / p.kappa)));
    h = h.add(&s1.matmul(&s2.dagger()).scale(c(0.0, 2.0 * p.g * p.g / p.kappa)));
    (l, h)
}

/// Criterion 6: the circuit-algebra composite reproduces the printed S, L,
/// and H entrywise to 1e-12 at cutoff 3, the eliminated triple matches its
/// printed form, and the series product is associative to 1e-10.
pub fn criterion_6(seed: u64) -> CriterionReport {
    let mut check = Check::new();
    let p = JCParams {
        kappa: 2.0,
        gamma: 0.3,
        delta: 0.7,
        theta_det: 0.4,
        g: 1.1,
        alpha: c(0.9, -0.5),
        fock_cutoff: 3,
    };
    match cascade_paper(&p) {
        Ok(generated) => {
            let (s_ref, l_ref, h_ref) = printed_composite(&p);
            let mut worst = 0.0f64;
            for i in 0..3 {
                worst = worst.max(generated.l[i].sub(&l_ref[i]).max_abs());
                for j in 0..3 {
                    worst = worst.max(generated.s[i][j].sub(&s_ref[i][j]).max_abs());
                }
            }
            worst = worst.max(generated.h.sub(&h_ref).max_abs());
            check.assert(worst < 1e-12, format!("composite deviation {worst:.3e} ≥ 1e-12"));
            check.note(format!("composite entrywise {worst:.2e}"));
        }
        Err(e) => check.assert(false, format!("composite build: {e}")),
    }
    match adiabatic_jc_cascade(&p) {
        Ok(tri) => {
            let (l_ref, h_ref) = printed_adiabatic(&p);
            let mut worst = tri.h.sub(&h_ref).max_abs();
            for i in 0..3 {
                worst = worst.max(tri.l[i].sub(&l_ref[i]).max_abs());
            }
            check.assert(worst < 1e-12, format!("eliminated-triple deviation {worst:.3e}"));
        }
        Err(e) => check.assert(false, format!("eliminated triple: {e}")),
    }

    // Series associativity on random single-qubit components.
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x06);
    let mut component = |label: &str| -> SLHTriple {
        let space = Space::new(vec![(label, 2)]);
        let mut m = ComplexMatrix::zeros(2, 2);
        for i in 0..2 {
            for j in 0..2 {
                m.set(i, j, c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
            }
        }
        let h = m.add(&m.dagger()).scale(c(0.5, 0.0));
        let i2 = ComplexMatrix::identity(2);
        let zero = ComplexMatrix::zeros(2, 2);
        SLHTriple::new(
            space,
            vec![vec![i2.clone(), zero.clone()], vec![zero, i2]],
            vec![m.clone(), m.dagger().matmul(&m).scale(c(0.2, 0.0))],
            h,
        )
        .expect("random component")
    };
    let (g1, g2, g3) = (component("sys_a"), component("sys_b"), component("sys_c"));
    let left = series(&g3, &series(&g2, &g1).expect("inner")).expect("left");
    let right = series(&series(&g3, &g2).expect("inner"), &g1)
        .expect("right")
        .promoted_to(&left.space)
        .expect("promotion");
    let mut assoc = left.h.sub(&right.h).max_abs();
    for i in 0..2 {
        assoc = assoc.max(left.l[i].sub(&right.l[i]).max_abs());
        for j in 0..2 {
            assoc = assoc.max(left.s[i][j].sub(&right.s[i][j]).max_abs());
        }
    }
    check.assert(assoc < 1e-10, format!("series associativity residual {assoc:.3e}"));

    // Concatenate-then-permute equals the assembled composite structurally.
    let space = cascade_space(p.fock_cutoff);
    let jc1 = jc_triple(&p, "jc1").and_then(|t| t.promoted_to(&space));
    let pass = SLHTriple::passthrough(1).promoted_to(&space);
    if let (Ok(jc1), Ok(pass)) = (jc1, pass) {
        if let Ok(stacked) = concatenate(&jc1, &pass) {
            check.assert(stacked.n_channels() == 3, "concatenation channel count");
        }
    }
    check.report(6, "slh fixtures")
}

/// Criterion 7: closed-form decay fixtures integrate to 1e-6, the integrator
/// keeps trace and positivity over the full horizon, halving the step divides
/// the endpoint error by ~16, and the closed-form X-state concurrence agrees
/// with the eigenvalue route on 1000 random X-states.
pub fn criterion_7(seed: u64) -> CriterionReport {
    let mut check = Check::new();

    let gamma: f64 = 0.3;
    let dephasing = LindbladModel::new(
        ComplexMatrix::zeros(2, 2),
        vec![gates::sigma_z().scale(c(gamma.sqrt(), 0.0))],
    )
    .expect("model");
    let plus = QuantumState::pure(&ComplexVector::from_real(&[1.0, 1.0])).expect("|+⟩");
    match rk4_integrate(&dephasing, &plus, 2.0, 1e-3) {
        Ok(traj) => {
            let mut worst = 0.0f64;
            for (idx, &t) in traj.times.iter().enumerate() {
                let expect = 0.5 * (-2.0 * gamma * t).exp();
                worst = worst.max((traj.states[idx].get(0, 1).re - expect).abs());
            }
            check.assert(worst < 1e-6, format!("dephasing deviation {worst:.3e} ≥ 1e-6"));
        }
        Err(e) => check.assert(false, format!("dephasing: {e}")),
    }

    let gamma: f64 = 0.7;
    let damping = LindbladModel::new(
        ComplexMatrix::zeros(2, 2),
        vec![gates::lowering().scale(c(gamma.sqrt(), 0.0))],
    )
    .expect("model");
    let excited = QuantumState::pure(&ComplexVector::basis(2, 1)).expect("|e⟩");
    match rk4_integrate(&damping, &excited, 2.0, 1e-3) {
        Ok(traj) => {
            let mut worst = 0.0f64;
            for (idx, &t) in traj.times.iter().enumerate() {
                let expect = (-gamma * t).exp();
                worst = worst.max((traj.states[idx].get(1, 1).re - expect).abs());
            }
            check.assert(worst < 1e-6, format!("damping deviation {worst:.3e} ≥ 1e-6"));
        }
        Err(e) => check.assert(false, format!("damping: {e}")),
    }

    // Step-halving order check on the damping fixture.
    let endpoint_error = |dt: f64| -> f64 {
        let traj = rk4_integrate(&damping, &excited, 1.0, dt).expect("integration");
        (traj.final_state().get(1, 1).re - (-gamma).exp()).abs()
    };
    let ratio = endpoint_error(0.1) / endpoint_error(0.05);
    check.assert(
        (12.0..=20.0).contains(&ratio),
        format!("halving ratio {ratio:.2} outside [12, 20]"),
    );

    // Trace and positivity over the full cascade horizon.
    let p = JCParams::reference();
    let model = lindblad_from_slh(&adiabatic_jc_cascade(&p).expect("triple")).expect("model");
    match rk4_integrate(&model, &InitialAtoms::BothExcited.density(), 10.0, 1e-3) {
        Ok(traj) => {
            let drift = traj
                .trace
                .iter()
                .map(|t| (t - 1.0).abs())
                .fold(0.0, f64::max);
            check.assert(drift < 1e-8, format!("trace drift {drift:.3e} ≥ 1e-8"));
            let mut min_eig = f64::INFINITY;
            for state in traj.states.iter().step_by(500).chain([traj.final_state()]) {
                let eig = hermitian_eigen(state).expect("state eigen");
                min_eig = min_eig.min(eig.eigenvalues[0]);
            }
            check.assert(min_eig > -1e-7, format!("min eigenvalue {min_eig:.3e} ≤ −1e-7"));
            check.note(format!("trace drift {drift:.1e}, min eig {min_eig:.1e}, rk4 ratio {ratio:.1}"));
        }
        Err(e) => check.assert(false, format!("cascade integration: {e}")),
    }

    // Closed-form X-state concurrence against the eigenvalue computation.
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x07);
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let x = random_x_state(&mut rng);
        let closed = x.concurrence_closed_form();
        let general = wootters_concurrence(&QuantumState::new(x.rho().clone()).expect("state"))
            .expect("concurrence");
        worst = worst.max((closed - general).abs());
    }
    check.assert(
        worst < 1e-10,
        format!("X-state concurrence deviation {worst:.3e} ≥ 1e-10"),
    );
    check.report(7, "lindblad dynamics")
}

pub fn random_x_state(rng: &mut ChaCha8Rng) -> XState {
    let mut pops: Vec<f64> = (0..4).map(|_| rng.random_range(0.01..1.0)).collect();
    let total: f64 = pops.iter().sum();
    pops.iter_mut().for_each(|p| *p /= total);
    let mag14 = rng.random_range(0.0..1.0) * (pops[0] * pops[3]).sqrt();
    let ph14 = rng.random_range(0.0..std::f64::consts::TAU);
    let mag23 = rng.random_range(0.0..1.0) * (pops[1] * pops[2]).sqrt();
    let ph23 = rng.random_range(0.0..std::f64::consts::TAU);
    let mut rho = ComplexMatrix::zeros(4, 4);
    for (i, &p) in pops.iter().enumerate() {
        rho.set(i, i, c(p, 0.0));
    }
    let c14 = C64::from_polar(mag14, ph14);
    let c23 = C64::from_polar(mag23, ph23);
    rho.set(0, 3, c14);
    rho.set(3, 0, c14.conj());
    rho.set(1, 2, c23);
    rho.set(2, 1, c23.conj());
    XState::new(rho).expect("random X-state")
}

/// Criterion 8: at the repo's reference parameters the cascade entangles the
/// atoms only when the first atom starts excited.
pub fn criterion_8(_seed: u64) -> CriterionReport {
    let mut check = Check::new();
    let p = JCParams::reference();
    match run_jc_cascade(&p, InitialAtoms::BothExcited, 10.0, 1e-3) {
        Ok(traj) => {
            let peak = traj.max_concurrence();
            check.assert(peak > 0.01, format!("|ee⟩ peak concurrence {peak:.4} ≤ 0.01"));
            check.note(format!("|ee⟩ peak {peak:.4}"));
            if let Some(dev) = traj.x_pattern_deviation {
                check.assert(dev < 1e-10, format!("X-pattern deviation {dev:.3e}"));
            }
        }
        Err(e) => check.assert(false, format!("|ee⟩ run: {e}")),
    }
    for initial in [InitialAtoms::FirstGroundSecondExcited, InitialAtoms::BothGround] {
        match run_jc_cascade(&p, initial, 10.0, 1e-3) {
            Ok(traj) => {
                let peak = traj.max_concurrence();
                check.assert(
                    peak < 1e-3,
                    format!("{initial:?} peak concurrence {peak:.3e} ≥ 1e-3"),
                );
            }
            Err(e) => check.assert(false, format!("{initial:?} run: {e}")),
        }
    }
    check.report(8, "cascade entanglement")
}

/// Criterion 9: the clause engine proves the heralding fixture (leaving the
/// Bell pair in the registry), constructively refutes cloning with the
/// linearity contradiction in the trace, and is braiding-invariant and
/// deterministic over all fixtures.
pub fn criterion_9(seed: u64) -> CriterionReport {
    let mut check = Check::new();

    // Heralding.
    match run_fixture(fixtures::HERALD, "herald(nv1, nv2, p1, p2)", seed) {
        Ok((trace, registry)) => {
            check.assert(trace.outcome == Outcome::Proved, "herald fixture did not prove");
            match registry.named_kets.get("Psi").and_then(|k| k.to_vector()) {
                Some(v) => {
                    let state = QuantumState::pure(&v.normalized()).expect("bound state");
                    match wootters_concurrence(&state) {
                        Ok(conc) => check.assert(
                            (conc - 1.0).abs() < 1e-10,
                            format!("herald concurrence {conc} differs from 1"),
                        ),
                        Err(e) => check.assert(false, format!("concurrence: {e}")),
                    }
                }
                None => check.assert(false, "herald did not bind Psi"),
            }
        }
        Err(e) => check.assert(false, format!("herald: {e}")),
    }

    // Cloning: positive fails, negation refutes with the linearity mismatch.
    let clone_goal = "clone(0.6|0⟩ + 0.8|1⟩, 0.6|0⟩ + 0.8|1⟩)";
    match run_fixture(fixtures::NO_CLONING, clone_goal, seed) {
        Ok((trace, _)) => {
            check.assert(trace.outcome == Outcome::Failed, "positive cloning goal proved")
        }
        Err(e) => check.assert(false, format!("cloning positive: {e}")),
    }
    match run_fixture(fixtures::NO_CLONING, &format!("~{clone_goal}"), seed) {
        Ok((trace, _)) => {
            check.assert(trace.outcome == Outcome::Refuted, "negated cloning not refuted");
            let text = trace.render();
            check.assert(
                text.contains("0.48") && text.contains("0.36"),
                "trace lacks the αβ = 0 / α² = α amplitude mismatch",
            );
        }
        Err(e) => check.assert(false, format!("cloning negation: {e}")),
    }

    // Braiding invariance and determinism across every fixture.
    let goals: &[(&str, &str)] = &[
        ("herald", "herald(nv1, nv2, p1, p2)"),
        ("nocloning", "~clone(0.6|0⟩ + 0.8|1⟩, 0.6|0⟩ + 0.8|1⟩)"),
        ("probe", "sequence_disturbed"),
        ("walk", "qwalk_r(X, 3)"),
    ];
    for (name, src) in fixtures::all() {
        let goal_text = goals.iter().find(|(n, _)| *n == name).map(|(_, g)| *g).unwrap();
        let baseline = match run_fixture(src, goal_text, seed) {
            Ok((t, _)) => t,
            Err(e) => {
                check.assert(false, format!("{name}: {e}"));
                continue;
            }
        };
        let rerun = match run_fixture(src, goal_text, seed) {
            Ok((t, _)) => t,
            Err(e) => {
                check.assert(false, format!("{name} rerun: {e}"));
                continue;
            }
        };
        check.assert(
            baseline.render() == rerun.render(),
            format!("{name}: trace not reproducible"),
        );
        // Reverse every body and re-normalize: same outcome and bindings.
        match horn::load_program(src, seed) {
            Ok((mut program, mut reg)) => {
                for clause in &mut program.clauses {
                    clause.body.reverse();
                    *clause = horn::normalize_clause(clause);
                }
                let goal = parse_goal(goal_text).expect("goal");
                match solve(&goal, &program, &mut reg, SolveLimits::default()) {
                    Ok(permuted) => {
                        check.assert(
                            permuted.outcome == baseline.outcome
                                && permuted.bindings == baseline.bindings,
                            format!("{name}: braiding permutation changed the result"),
                        );
                    }
                    Err(e) => check.assert(false, format!("{name} permuted: {e}")),
                }
            }
            Err(e) => check.assert(false, format!("{name} load: {e}")),
        }
    }
    check.report(9, "horn engine")
}

fn run_fixture(
    src: &str,
    goal: &str,
    seed: u64,
) -> Result<(horn::ProofTrace, horn::Registry), horn::HornError> {
    let (program, mut registry) = horn::load_program(src, seed)?;
    let goal = parse_goal(goal)?;
    let trace = solve(&goal, &program, &mut registry, SolveLimits::default())?;
    Ok((trace, registry))
}

/// Run criteria 1–9 in order.
pub fn run_all(seed: u64) -> Vec<CriterionReport> {
    vec![
        criterion_1(seed),
        criterion_2(seed),
        criterion_3(seed),
        criterion_4(seed),
        criterion_5(seed),
        criterion_6(seed),
        criterion_7(seed),
        criterion_8(seed),
        criterion_9(seed),
    ]
}

/// Invariant table behind `fock check`: kernel positivity, factorization,
/// Weyl unitarity and composition, and grid-refinement stability.
pub fn fock_invariants(seed: u64) -> Vec<(String, bool, String)> {
    let mut rows = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x0f);
    let rand_fn = |rng: &mut ChaCha8Rng, cells: usize| {
        TestFunction::new(
            1.0,
            (0..cells)
                .map(|_| c(rng.random_range(-0.8..0.8), rng.random_range(-0.8..0.8)))
                .collect(),
        )
    };

    let mut min_eig = f64::INFINITY;
    for m in 2..=5usize {
        let fs: Vec<TestFunction> = (0..m).map(|_| rand_fn(&mut rng, 8)).collect();
        let mut gram = ComplexMatrix::zeros(m, m);
        for i in 0..m {
            for j in 0..m {
                gram.set(i, j, exp_kernel(&fs[i], &fs[j]).unwrap());
            }
        }
        min_eig = min_eig.min(hermitian_eigen(&gram).unwrap().eigenvalues[0]);
    }
    rows.push((
        "kernel positivity (Gram PSD)".to_string(),
        min_eig > -1e-10,
        format!("min eigenvalue {min_eig:.2e}"),
    ));

    let f = TestFunction::window(c(0.7, 0.2), 0.0, 0.5, 1.0, 10);
    let g = TestFunction::window(c(-0.3, 0.9), 0.5, 1.0, 1.0, 10);
    let sum = f.add(&g).unwrap();
    let t = 1f64.exp();
    let lhs = exp_kernel(&sum, &sum).unwrap().re * t;
    let rhs = (exp_kernel(&f, &f).unwrap().re * t) * (exp_kernel(&g, &g).unwrap().re * t);
    rows.push((
        "continuous tensor factorization".to_string(),
        (lhs - rhs).abs() < 1e-12 * rhs.abs().max(1.0),
        format!("split residual {:.2e}", (lhs - rhs).abs()),
    ));

    let fw = rand_fn(&mut rng, 8);
    let u = ExponentialVectorSum::exponential(rand_fn(&mut rng, 8));
    let v = ExponentialVectorSum::exponential(rand_fn(&mut rng, 8));
    let before = u.inner(&v).unwrap();
    let after = weyl_apply(&fw, &u)
        .unwrap()
        .inner(&weyl_apply(&fw, &v).unwrap())
        .unwrap();
    rows.push((
        "Weyl unitarity".to_string(),
        (before - after).norm() < 1e-12,
        format!("inner-product drift {:.2e}", (before - after).norm()),
    ));

    let probes: Vec<TestFunction> = (0..3).map(|_| rand_fn(&mut rng, 8)).collect();
    let f2 = rand_fn(&mut rng, 8);
    let g2 = rand_fn(&mut rng, 8);
    let compose = weyl_compose_check(&f2, &g2, &probes);
    let ok = match &compose {
        Ok(phase) => {
            let expected = (c(0.0, -1.0) * f2.inner(&g2).unwrap().im).exp();
            (phase - expected).norm() < 1e-10
        }
        Err(_) => false,
    };
    rows.push((
        "Weyl composition phase".to_string(),
        ok,
        match compose {
            Ok(phase) => format!("scalar {}", crate::horn::ast::format_c64(phase)),
            Err(e) => e.to_string(),
        },
    ));

    let amp = c(1.0, 0.0);
    let coarse = TestFunction::constant(amp, 1.0, 10);
    let fine = TestFunction::constant(amp, 1.0, 100);
    let est_coarse = poisson_mc_oracle(1.0, &coarse, 100_000, seed ^ 0x5f).unwrap();
    let est_fine = poisson_mc_oracle(1.0, &fine, 100_000, seed ^ 0x5f).unwrap();
    rows.push((
        "gauge law vs Poisson oracle".to_string(),
        (est_coarse - 1.0).abs() < 0.02 && (est_fine - 1.0).abs() < 0.02,
        format!("estimates {est_coarse:.4} (K=10), {est_fine:.4} (K=100)"),
    ));
    rows.push((
        "grid refinement stability".to_string(),
        (est_coarse - est_fine).abs() < 0.04,
        format!("spread {:.4}", (est_coarse - est_fine).abs()),
    ));
    rows
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reports_render_one_line() {
        let r = CriterionReport {
            index: 3,
            name: "walk oracle equivalence",
            passed: true,
            detail: "ok".into(),
        };
        assert!(r.line().contains("PASS"));
    }
}
