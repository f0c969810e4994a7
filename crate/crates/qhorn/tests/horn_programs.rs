//! End-to-end behavior of the clause language over the shipped fixture
//! programs: proofs, refutations, braiding invariance, and determinism.

use qhorn::dynamics::wootters_concurrence;
use qhorn::horn::{
    ast::normalize_clause, compactness_restore, compactness_rewrite, fixtures, load_program,
    parse_goal, parse_program, solve, HornError, Outcome, SolveLimits,
};
use qhorn::linalg::C64;
use qhorn::qprob::QuantumState;

const SEED: u64 = 42;

fn run(src: &str, goal: &str) -> (qhorn::horn::ProofTrace, qhorn::horn::Registry) {
    let (program, mut registry) = load_program(src, SEED).expect("load");
    let goal = parse_goal(goal).expect("goal");
    let trace = solve(&goal, &program, &mut registry, SolveLimits::default()).expect("solve");
    (trace, registry)
}

#[test]
fn parser_round_trips_the_first_fixture_clause() {
    let program = parse_program(fixtures::HERALD).unwrap();
    assert_eq!(program.clauses.len(), 3);
    let entangle = &program.clauses[0];
    assert_eq!(entangle.head.functor, "entangle");
    assert_eq!(entangle.head.decoration, Some(2));
    assert_eq!(entangle.body.len(), 2);
}

#[test]
fn empty_program_parses() {
    let program = parse_program("").unwrap();
    assert!(program.clauses.is_empty());
    assert!(program.directives.is_empty());
}

#[test]
fn missing_comma_is_a_syntax_error() {
    let err = parse_program("p(X) :- q(X) r(X).").unwrap_err();
    let text = err.to_string();
    assert!(text.contains("parse error"), "{text}");
    assert!(text.contains(':'), "{text}");
}

#[test]
fn unknown_decoration_is_rejected() {
    assert!(parse_program("@4 p(X).").is_err());
}

#[test]
fn unbound_operator_names_are_rejected_at_load() {
    let err = load_program("broken :- @2 missing_gate(sys).", SEED).unwrap_err();
    assert!(matches!(err, HornError::UnboundOperator(name) if name == "missing_gate"));
}

#[test]
fn herald_fixture_proves_and_yields_the_bell_state() {
    let (trace, registry) = run(fixtures::HERALD, "herald(nv1, nv2, p1, p2)");
    assert_eq!(trace.outcome, Outcome::Proved, "{}", trace.render());

    // The bound name holds the printed target state.
    let psi = registry.named_kets.get("Psi").expect("Psi bound");
    let v = psi.to_vector().unwrap().normalized();
    let expected = [
        C64::new(0.0, 0.0),
        C64::new(1.0 / 2f64.sqrt(), 0.0),
        C64::new(1.0 / 2f64.sqrt(), 0.0),
        C64::new(0.0, 0.0),
    ];
    for (a, b) in v.data.iter().zip(expected.iter()) {
        assert!((a - b).norm() < 1e-9);
    }

    // And it is maximally entangled.
    let state = QuantumState::pure(&v).unwrap();
    let conc = wootters_concurrence(&state).unwrap();
    assert!((conc - 1.0).abs() < 1e-10, "concurrence {conc}");

    // The coincidence outcome carried probability 1/4.
    let (_, probs) = trace
        .distributions
        .iter()
        .find(|(k, _)| k.starts_with("project"))
        .expect("projection recorded");
    assert!((probs[0] - 0.25).abs() < 1e-12);
}

#[test]
fn no_cloning_positive_fails_and_negation_refutes() {
    let goal = "clone(0.6|0⟩ + 0.8|1⟩, 0.6|0⟩ + 0.8|1⟩)";
    let (trace, _) = run(fixtures::NO_CLONING, goal);
    assert_eq!(trace.outcome, Outcome::Failed, "{}", trace.render());

    let (trace, _) = run(fixtures::NO_CLONING, &format!("~{goal}"));
    assert_eq!(trace.outcome, Outcome::Refuted, "{}", trace.render());
    // The contradiction exhibits the linearity mismatch: the cross term
    // α·β must vanish while the diagonal forces α² = α.
    let text = trace.render();
    assert!(text.contains("|01⟩"), "{text}");
    assert!(text.contains("0.48"), "{text}");
    assert!(text.contains("0.36"), "{text}");
    assert!(!trace.contradictions.is_empty());
}

#[test]
fn cloning_basis_states_still_works() {
    let (trace, _) = run(fixtures::NO_CLONING, "clone(|1⟩, |1⟩)");
    assert_eq!(trace.outcome, Outcome::Proved, "{}", trace.render());
}

#[test]
fn probe_sequence_disturbs_the_first_observable() {
    let (trace, _) = run(fixtures::PROBE, "sequence_ok");
    assert_eq!(trace.outcome, Outcome::Proved, "{}", trace.render());

    let (trace, _) = run(fixtures::PROBE, "sequence_disturbed");
    assert_eq!(trace.outcome, Outcome::Failed, "{}", trace.render());
    assert!(trace.render().contains("mixed"), "{}", trace.render());
}

#[test]
fn walk_fixture_delegates_to_the_walk_register() {
    let (trace, registry) = run(fixtures::WALK, "qwalk_r(X, 5)");
    assert_eq!(trace.outcome, Outcome::Proved);
    let walk = registry.walk.expect("walk register initialized");
    assert_eq!(walk.n, 5);
    let direct = qhorn::qwalk::WalkState::localized_right().steps(5);
    for (a, b) in walk
        .position_distribution()
        .iter()
        .zip(direct.position_distribution().iter())
    {
        assert_eq!(a, b);
    }
}

#[test]
fn braiding_invariance_over_all_fixtures() {
    // Permuting any clause body leaves outcomes, bindings, and traces
    // untouched: bodies load in braiding normal form.
    let goals: &[(&str, &str)] = &[
        ("herald", "herald(nv1, nv2, p1, p2)"),
        ("nocloning", "~clone(0.6|0⟩ + 0.8|1⟩, 0.6|0⟩ + 0.8|1⟩)"),
        ("probe", "sequence_disturbed"),
        ("walk", "qwalk_r(X, 3)"),
    ];
    for (name, src) in fixtures::all() {
        let goal_text = goals
            .iter()
            .find(|(n, _)| *n == name)
            .map(|(_, g)| *g)
            .unwrap();
        let baseline = {
            let (program, mut reg) = load_program(src, SEED).unwrap();
            let goal = parse_goal(goal_text).unwrap();
            solve(&goal, &program, &mut reg, SolveLimits::default()).unwrap()
        };
        // Reverse every clause body in the source-level AST and re-normalize.
        let (mut program, mut reg) = load_program(src, SEED).unwrap();
        for clause in &mut program.clauses {
            clause.body.reverse();
            *clause = normalize_clause(clause);
        }
        let goal = parse_goal(goal_text).unwrap();
        let permuted = solve(&goal, &program, &mut reg, SolveLimits::default()).unwrap();
        assert_eq!(baseline.outcome, permuted.outcome, "{name}");
        assert_eq!(baseline.bindings, permuted.bindings, "{name}");
        assert_eq!(baseline.render(), permuted.render(), "{name}");
    }
}

#[test]
fn identical_seeds_give_byte_identical_traces() {
    let goal = "herald(nv1, nv2, p1, p2)";
    let (a, _) = run(fixtures::HERALD, goal);
    let (b, _) = run(fixtures::HERALD, goal);
    assert_eq!(a.render(), b.render());
}

#[test]
fn solve_is_sound_on_ground_builtin_conjunctions() {
    // A conjunction of ground builtins proves exactly when each conjunct
    // evaluates on its own.
    let src = r#"
#system s 2.
#state s |0⟩.
#op flip [[0, 1], [1, 0]].
#op idm [[1, 0], [0, 1]].
both :- [flip, idm] = 0, state(s) = |0⟩.
one_bad :- [flip, idm] = 0, state(s) = |1⟩.
"#;
    let (trace, _) = run(src, "both");
    assert_eq!(trace.outcome, Outcome::Proved);
    let (trace, _) = run(src, "one_bad");
    assert_eq!(trace.outcome, Outcome::Failed);

    // Direct evaluation agrees conjunct by conjunct.
    let (program, reg) = load_program(src, SEED).unwrap();
    use qhorn::horn::builtins::{eval_builtin, BuiltinResult};
    let clause = program.clauses_for("one_bad", 0)[0].1.clone();
    let mut good = 0;
    for p in &clause.body {
        let mut branch = reg.clone();
        if matches!(
            eval_builtin(p, &Default::default(), &mut branch, &program).unwrap(),
            BuiltinResult::Proved(_)
        ) {
            good += 1;
        }
    }
    assert_eq!(good, 1, "exactly the commutator conjunct holds");
}

#[test]
fn depth_limit_terminates_cyclic_programs() {
    let src = "loop(X) :- loop(X).";
    let (program, mut reg) = load_program(src, SEED).unwrap();
    let goal = parse_goal("loop(a)").unwrap();
    let trace = solve(
        &goal,
        &program,
        &mut reg,
        SolveLimits { max_depth: 16, max_steps: 10_000 },
    )
    .unwrap();
    assert_eq!(trace.outcome, Outcome::Failed);
    assert!(trace.render().contains("depth limit") || trace.render().contains("step limit"));
}

#[test]
fn phase_invariant_state_equality() {
    let src = r#"
#system s 2.
#state s |0⟩.
check :- state(s) = (0.7648421872844885+0.644217687237691i)|0⟩.
"#;
    let (trace, _) = run(src, "check");
    assert_eq!(trace.outcome, Outcome::Proved, "{}", trace.render());
}

#[test]
fn decoration_violation_on_non_unitary_application() {
    let src = r#"
#system s 2.
#op lossy [[1, 0], [0, 0.5]].
bad :- @2 lossy(s).
"#;
    let (program, mut reg) = load_program(src, SEED).unwrap();
    let goal = parse_goal("bad").unwrap();
    let err = solve(&goal, &program, &mut reg, SolveLimits::default()).unwrap_err();
    assert!(matches!(err, HornError::DecorationViolation(_)), "{err}");
}

#[test]
fn weyl_requires_third_decoration() {
    let src = "displace :- @3 weyl(0.5).\nwrong :- @2 weyl(0.5).";
    let (program, mut reg) = load_program(src, SEED).unwrap();
    let ok = solve(
        &parse_goal("displace").unwrap(),
        &program,
        &mut reg,
        SolveLimits::default(),
    )
    .unwrap();
    assert_eq!(ok.outcome, Outcome::Proved);
    // The register now holds a displaced coherent vector.
    let fock = reg.fock.as_ref().unwrap();
    assert_eq!(fock.terms.len(), 1);
    assert!((fock.terms[0].1.values[0] - C64::new(0.5, 0.0)).norm() < 1e-12);

    let err = solve(
        &parse_goal("wrong").unwrap(),
        &program,
        &mut reg,
        SolveLimits::default(),
    )
    .unwrap_err();
    assert!(matches!(err, HornError::DecorationViolation(_)));
}

#[test]
fn antiunitary_branch_conjugates_amplitudes() {
    let src = r#"
#system s 2.
#state s 0.7071067811865476|0⟩ + (0+0.7071067811865476i)|1⟩.
step :- @2 conj_gate(s).
"#;
    // Registered through the API after parsing, so skip load-time validation.
    let program = parse_program(src).unwrap();
    let mut reg = qhorn::horn::Registry::from_program(&program, SEED).unwrap();
    reg.register_antiunitary("conj_gate", qhorn::linalg::ComplexMatrix::identity(2));
    let trace = solve(
        &parse_goal("step").unwrap(),
        &program,
        &mut reg,
        SolveLimits::default(),
    )
    .unwrap();
    assert_eq!(trace.outcome, Outcome::Proved);
    let state = reg.joint_state();
    assert!((state.data[1] - C64::new(0.0, -1.0 / 2f64.sqrt())).norm() < 1e-12);
}

#[test]
fn measurement_records_distributions_and_is_seeded() {
    let src = r#"
#system s 2.
#state s 0.7071067811865476|0⟩ + 0.7071067811865476|1⟩.
#op obs [[1, 0], [0, -1]].
observe :- measure(s, obs)*.
"#;
    let (trace_a, _) = run(src, "observe");
    let (trace_b, _) = run(src, "observe");
    assert_eq!(trace_a.render(), trace_b.render());
    let (_, probs) = &trace_a.distributions[0];
    assert_eq!(probs.len(), 2);
    assert!((probs[0] - 0.5).abs() < 1e-12);
    assert!((probs[1] - 0.5).abs() < 1e-12);
}

#[test]
fn conditional_expectation_builtin_registers_result() {
    let src = r#"
#system s 2.
#state s 0.8|0⟩ + 0.6|1⟩.
#op d [[1, 0], [0, -1]].
#op a [[2, 0], [0, 3]].
ce(R) :- cond_expect(d, a, R).
"#;
    let (trace, reg) = run(src, "ce(R)");
    assert_eq!(trace.outcome, Outcome::Proved, "{}", trace.render());
    assert_eq!(trace.bindings.get("R").unwrap(), "ce_d_a");
    let ce = &reg.operators.get("ce_d_a").unwrap().matrix;
    // d is diagonal in a's eigenbasis, so the conditional expectation
    // reproduces d itself.
    assert!((ce.get(0, 0) - C64::new(1.0, 0.0)).norm() < 1e-10);
    assert!((ce.get(1, 1) - C64::new(-1.0, 0.0)).norm() < 1e-10);
}

#[test]
fn compactness_rewrite_round_trip() {
    let program = parse_program("@2 p(X) :- @2 q(X), r(X).").unwrap();
    let clause = &program.clauses[0];
    let rewritten = compactness_rewrite(clause).unwrap();
    assert_eq!(rewritten.head.functor, "⊥");
    assert_eq!(rewritten.body.len(), 3);
    let restored = compactness_restore(&rewritten).unwrap();
    assert_eq!(&restored, clause);

    // Decoration-0 heads have no dagger.
    let c0 = parse_program("p(X) :- q(X).").unwrap().clauses[0].clone();
    assert!(compactness_rewrite(&c0).is_err());
}

#[test]
fn braiding_identity_example() {
    // (p ⊸ p⊗r) and (p ⊸ r⊗p) normalize identically.
    let a = parse_program("@1 p(X) :- @1 q(X), @1 r(X).").unwrap().clauses[0].clone();
    let b = parse_program("@1 p(X) :- @1 r(X), @1 q(X).").unwrap().clauses[0].clone();
    assert_eq!(a, b);
}
