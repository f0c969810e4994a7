//! Semantic builtins: equality over states and kets, commutator checks,
//! unitary application, measurement and post-selection, conditional
//! expectation, walk steps, and Weyl displacement.

use super::ast::{KetExpr, Predicate, Program, Term};
use super::registry::Registry;
use super::unify::{eval_ket, resolve, unify, Subst, UnifyOutcome, KET_TOL};
use super::HornError;
use crate::linalg::{commutator, kron, ComplexMatrix, C64};
use crate::qprob::{conditional_expectation, QuantumState, SpectralDecomposition};

type Result<T> = std::result::Result<T, HornError>;

/// Failure record of a builtin: `contradiction` marks definite semantic
/// refutations (amplitude or commutator mismatches) as opposed to plain
/// dead ends.
#[derive(Debug, Clone)]
pub struct BuiltinFailure {
    pub reason: String,
    pub contradiction: bool,
    pub detail: Vec<(String, C64, C64)>,
}

#[derive(Debug)]
pub enum BuiltinResult {
    Proved(Subst),
    Failed(BuiltinFailure),
    /// The functor is not a builtin; resolve against the clause base.
    NotBuiltin,
}

pub const BUILTIN_FUNCTORS: &[&str] = &[
    "=",
    "commutes",
    "state_eq",
    "measure",
    "project",
    "cond_expect",
    "walk_step",
    "weyl",
    "a_n",
    "adag_n",
    "lambda_n",
    "linear",
];

fn plain_failure(reason: impl Into<String>) -> BuiltinResult {
    BuiltinResult::Failed(BuiltinFailure {
        reason: reason.into(),
        contradiction: false,
        detail: Vec::new(),
    })
}

fn contradiction(reason: impl Into<String>, detail: Vec<(String, C64, C64)>) -> BuiltinResult {
    BuiltinResult::Failed(BuiltinFailure { reason: reason.into(), contradiction: true, detail })
}

/// Strip the renaming suffix from a clause-local variable.
fn base_var_name(name: &str) -> String {
    name.split('#').next().unwrap_or(name).to_string()
}

/// Dispatch one predicate. The registry is mutated in place; the caller is
/// responsible for snapshotting it at choice points.
pub fn eval_builtin(
    p: &Predicate,
    subst: &Subst,
    reg: &mut Registry,
    program: &Program,
) -> Result<BuiltinResult> {
    match p.functor.as_str() {
        "=" => eval_equality(p, subst, reg),
        "state_eq" => {
            let (Some(a), Some(b)) = (
                eval_ket(&p.args[0], subst, &reg.named_kets),
                eval_ket(&p.args[1], subst, &reg.named_kets),
            ) else {
                return Ok(plain_failure("state_eq arguments are not kets"));
            };
            Ok(compare_kets(&a, &b, subst))
        }
        "commutes" => {
            let a = eval_operator(&p.args[0], subst, reg)?;
            let b = eval_operator(&p.args[1], subst, reg)?;
            let comm = commutator(&a, &b).map_err(|e| HornError::Builtin(e.to_string()))?;
            let norm = comm.max_abs();
            if norm < 1e-9 {
                Ok(BuiltinResult::Proved(subst.clone()))
            } else {
                Ok(contradiction(
                    format!("commutator norm {norm:.3e} exceeds 1e-9"),
                    Vec::new(),
                ))
            }
        }
        "measure" => eval_measure(p, subst, reg),
        "project" => eval_project(p, subst, reg),
        "cond_expect" => eval_cond_expect(p, subst, reg),
        "walk_step" => {
            let steps = match p.args.first().map(|t| resolve(t, subst)) {
                Some(Term::Number(n)) if n >= 0.0 && n.fract() == 0.0 => n as usize,
                None => 1,
                _ => return Ok(plain_failure("walk_step expects a nonnegative integer")),
            };
            reg.walk_steps(steps);
            Ok(BuiltinResult::Proved(subst.clone()))
        }
        // Martingale predicates ride along as annotations on walk clauses.
        "a_n" | "adag_n" | "lambda_n" => Ok(BuiltinResult::Proved(subst.clone())),
        "weyl" => {
            if p.decoration != Some(3) {
                return Err(HornError::DecorationViolation(
                    "weyl requires decoration @3".into(),
                ));
            }
            let amp = match p.args.first().map(|t| resolve(t, subst)) {
                Some(Term::Number(n)) => C64::new(n, 0.0),
                _ => {
                    return Ok(plain_failure("weyl expects a numeric amplitude"));
                }
            };
            reg.weyl_displace(amp)?;
            Ok(BuiltinResult::Proved(subst.clone()))
        }
        "linear" => eval_linear(p, subst, reg, program),
        functor if reg.operators.contains_key(functor) => eval_operator_predicate(p, subst, reg),
        _ => Ok(BuiltinResult::NotBuiltin),
    }
}

fn compare_kets(a: &KetExpr, b: &KetExpr, subst: &Subst) -> BuiltinResult {
    match a.phase_eq(b, KET_TOL) {
        Ok(()) => BuiltinResult::Proved(subst.clone()),
        Err(detail) => contradiction("state amplitudes disagree", detail),
    }
}

fn eval_equality(p: &Predicate, subst: &Subst, reg: &mut Registry) -> Result<BuiltinResult> {
    let lhs = resolve(&p.args[0], subst);
    let rhs = resolve(&p.args[1], subst);
    // `state(...) = rhs` (or mirrored).
    if let Term::Compound(f, sargs) = &lhs {
        if f == "state" {
            return eval_state_equality(sargs, &rhs, subst, reg);
        }
    }
    if let Term::Compound(f, sargs) = &rhs {
        if f == "state" {
            return eval_state_equality(sargs, &lhs, subst, reg);
        }
    }
    // Evaluate ket-valued expressions before unifying so mismatches carry
    // amplitude detail.
    let lhs_e = eval_ket(&lhs, subst, &reg.named_kets)
        .map(Term::Ket)
        .unwrap_or(lhs);
    let rhs_e = eval_ket(&rhs, subst, &reg.named_kets)
        .map(Term::Ket)
        .unwrap_or(rhs);
    match unify(&lhs_e, &rhs_e, subst) {
        UnifyOutcome::Ok(s) => Ok(BuiltinResult::Proved(s)),
        UnifyOutcome::Fail => Ok(plain_failure("terms do not unify")),
        UnifyOutcome::KetMismatch(d) => Ok(contradiction("state amplitudes disagree", d.entries)),
    }
}

fn eval_state_equality(
    sargs: &[Term],
    rhs: &Term,
    subst: &Subst,
    reg: &mut Registry,
) -> Result<BuiltinResult> {
    let rhs_ket = eval_ket(rhs, subst, &reg.named_kets);

    // All arguments name systems: compare or capture the joint marginal.
    let system_names: Option<Vec<String>> = sargs
        .iter()
        .map(|t| match resolve(t, subst) {
            Term::Atom(name) if reg.has_system(&name) => Some(name),
            _ => None,
        })
        .collect();
    if let Some(names) = system_names {
        let marginal = match reg.marginal_ket(&names)? {
            Ok(k) => k,
            Err(reason) => return Ok(plain_failure(reason)),
        };
        return match (rhs_ket, rhs) {
            (Some(k), _) => Ok(compare_kets(&marginal, &k, subst)),
            (None, Term::Variable(v)) => {
                let mut s = subst.clone();
                s.insert(v.clone(), Term::Ket(marginal.clone()));
                reg.named_kets.insert(base_var_name(v), marginal);
                Ok(BuiltinResult::Proved(s))
            }
            _ => Ok(plain_failure("state comparison target is not a ket")),
        };
    }

    // Naming form: state(X) = ket binds or checks the name X.
    if let [single] = sargs {
        match resolve(single, subst) {
            Term::Variable(v) => {
                let Some(k) = rhs_ket else {
                    return Ok(plain_failure("cannot bind a state name to a non-ket"));
                };
                return match subst.get(&v) {
                    None => {
                        let mut s = subst.clone();
                        s.insert(v.clone(), Term::Ket(k.clone()));
                        reg.named_kets.insert(base_var_name(&v), k);
                        Ok(BuiltinResult::Proved(s))
                    }
                    Some(_) => unreachable!("resolve returned an unbound variable"),
                };
            }
            Term::Ket(bound) => {
                let Some(k) = rhs_ket else {
                    return Ok(plain_failure("state comparison target is not a ket"));
                };
                return Ok(compare_kets(&bound, &k, subst));
            }
            Term::Atom(name) => {
                let Some(k) = rhs_ket else {
                    return Ok(plain_failure("state comparison target is not a ket"));
                };
                return match reg.named_kets.get(&name) {
                    Some(existing) => Ok(compare_kets(&existing.clone(), &k, subst)),
                    None => {
                        reg.named_kets.insert(name, k);
                        Ok(BuiltinResult::Proved(subst.clone()))
                    }
                };
            }
            _ => {}
        }
    }
    Err(HornError::Builtin(format!(
        "ill-formed state predicate over {} arguments",
        sargs.len()
    )))
}

/// Operator expressions: registered names, `kron`, `conj` (sandwich `u†xu`),
/// `dag`, `mul`.
fn eval_operator(term: &Term, subst: &Subst, reg: &Registry) -> Result<ComplexMatrix> {
    match resolve(term, subst) {
        Term::Atom(name) => reg
            .operators
            .get(&name)
            .map(|op| op.matrix.clone())
            .ok_or_else(|| HornError::Registry(format!("unknown operator {name}"))),
        Term::Compound(f, args) => match (f.as_str(), args.as_slice()) {
            ("kron", [a, b]) => Ok(kron(
                &eval_operator(a, subst, reg)?,
                &eval_operator(b, subst, reg)?,
            )),
            ("dag", [a]) => Ok(eval_operator(a, subst, reg)?.dagger()),
            ("conj", [u, x]) => {
                let u = eval_operator(u, subst, reg)?;
                let x = eval_operator(x, subst, reg)?;
                checked_mul(&checked_mul(&u.dagger(), &x)?, &u)
            }
            ("mul", [a, b]) => checked_mul(
                &eval_operator(a, subst, reg)?,
                &eval_operator(b, subst, reg)?,
            ),
            (other, _) => Err(HornError::Builtin(format!(
                "unknown operator expression {other}/{}",
                args.len()
            ))),
        },
        other => Err(HornError::Builtin(format!(
            "term {other} does not denote an operator"
        ))),
    }
}

fn checked_mul(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<ComplexMatrix> {
    if a.cols != b.rows {
        return Err(HornError::Builtin(format!(
            "operator product dimension mismatch: {}x{} by {}x{}",
            a.rows, a.cols, b.rows, b.cols
        )));
    }
    Ok(a.matmul(b))
}

/// A decorated predicate whose functor names a registered operator.
/// Decoration 2 applies it to the listed systems; decorations 0/1 only check
/// well-formedness; decoration 3 is reserved for the Weyl layer.
fn eval_operator_predicate(
    p: &Predicate,
    subst: &Subst,
    reg: &mut Registry,
) -> Result<BuiltinResult> {
    let systems: Vec<String> = p
        .args
        .iter()
        .map(|t| match resolve(t, subst) {
            Term::Atom(name) => Ok(name),
            other => Err(HornError::Builtin(format!(
                "operator predicate argument {other} is not a system name"
            ))),
        })
        .collect::<Result<_>>()?;
    match p.decoration {
        Some(2) => {
            reg.apply_operator(&p.functor, &systems)?;
            Ok(BuiltinResult::Proved(subst.clone()))
        }
        Some(3) => Err(HornError::DecorationViolation(format!(
            "{} is a matrix operator; decoration @3 names second-quantized predicates",
            p.functor
        ))),
        _ => {
            // Operator-level predicate: verify the named operator fits the
            // listed systems, without evolving anything.
            let op = reg.operators.get(&p.functor).expect("dispatched on key").clone();
            if systems.is_empty() {
                return Ok(BuiltinResult::Proved(subst.clone()));
            }
            if !systems.iter().all(|s| reg.has_system(s)) {
                return Ok(plain_failure("unknown system in operator predicate"));
            }
            let dim: usize = systems
                .iter()
                .map(|s| {
                    reg.joint_dims()[reg
                        .system_names()
                        .iter()
                        .position(|n| n == s)
                        .expect("checked")]
                })
                .product();
            if op.matrix.rows == dim {
                Ok(BuiltinResult::Proved(subst.clone()))
            } else {
                Ok(plain_failure(format!(
                    "operator {} is {}x{} but systems span {dim}",
                    p.functor, op.matrix.rows, op.matrix.cols
                )))
            }
        }
    }
}

fn eval_measure(p: &Predicate, subst: &Subst, reg: &mut Registry) -> Result<BuiltinResult> {
    if p.args.len() < 2 {
        return Err(HornError::Builtin("measure(systems..., op) needs arguments".into()));
    }
    let (op_term, sys_terms) = p.args.split_last().unwrap();
    let Term::Atom(op_name) = resolve(op_term, subst) else {
        return Err(HornError::Builtin("measure: last argument must name an operator".into()));
    };
    let systems: Vec<String> = sys_terms
        .iter()
        .map(|t| match resolve(t, subst) {
            Term::Atom(name) => Ok(name),
            other => Err(HornError::Builtin(format!("measure: {other} is not a system"))),
        })
        .collect::<Result<_>>()?;
    let key = format!("measure({}, {op_name})", systems.join(", "));
    reg.measure(&op_name, &systems, key)?;
    Ok(BuiltinResult::Proved(subst.clone()))
}

fn eval_project(p: &Predicate, subst: &Subst, reg: &mut Registry) -> Result<BuiltinResult> {
    if p.args.len() < 2 {
        return Err(HornError::Builtin(
            "project(systems..., target) needs arguments".into(),
        ));
    }
    let (target_term, sys_terms) = p.args.split_last().unwrap();
    let Some(target) = eval_ket(target_term, subst, &reg.named_kets) else {
        return Ok(plain_failure("projection target is not a ket"));
    };
    let systems: Vec<String> = sys_terms
        .iter()
        .map(|t| match resolve(t, subst) {
            Term::Atom(name) => Ok(name),
            other => Err(HornError::Builtin(format!("project: {other} is not a system"))),
        })
        .collect::<Result<_>>()?;
    let prob = reg.project(&systems, &target)?;
    let key = format!("project({})", systems.join(", "));
    reg.distributions.push((key, vec![prob]));
    if prob <= 1e-12 {
        return Ok(plain_failure("null event: projection annihilates the state"));
    }
    Ok(BuiltinResult::Proved(subst.clone()))
}

fn eval_cond_expect(p: &Predicate, subst: &Subst, reg: &mut Registry) -> Result<BuiltinResult> {
    let [d_term, a_term, out] = p.args.as_slice() else {
        return Err(HornError::Builtin("cond_expect(d, a, Out) takes three arguments".into()));
    };
    let (Term::Atom(d_name), Term::Atom(a_name)) =
        (resolve(d_term, subst), resolve(a_term, subst))
    else {
        return Err(HornError::Builtin("cond_expect operands must name operators".into()));
    };
    let d = reg
        .operators
        .get(&d_name)
        .ok_or_else(|| HornError::Registry(format!("unknown operator {d_name}")))?
        .matrix
        .clone();
    let a = reg
        .operators
        .get(&a_name)
        .ok_or_else(|| HornError::Registry(format!("unknown operator {a_name}")))?
        .matrix
        .clone();
    let spec = SpectralDecomposition::of(&a, 1e-9)
        .map_err(|e| HornError::Builtin(e.to_string()))?;
    let psi = reg.joint_state().clone();
    let state = QuantumState::pure(&psi).map_err(|e| HornError::Builtin(e.to_string()))?;
    let ce = conditional_expectation(&d, &spec, &state)
        .map_err(|e| HornError::Builtin(e.to_string()))?;
    let result_name = format!("ce_{d_name}_{a_name}");
    reg.operators.insert(
        result_name.clone(),
        super::registry::RegisteredOp { matrix: ce, antiunitary: false },
    );
    match unify(out, &Term::Atom(result_name), subst) {
        UnifyOutcome::Ok(s) => Ok(BuiltinResult::Proved(s)),
        _ => Ok(plain_failure("cond_expect result does not unify")),
    }
}

/// Linearity closure: expand the input ket over the unit-ket facts of
/// `functor` and bind the superposed image.
fn eval_linear(
    p: &Predicate,
    subst: &Subst,
    reg: &mut Registry,
    program: &Program,
) -> Result<BuiltinResult> {
    let [f_term, input, output] = p.args.as_slice() else {
        return Err(HornError::Builtin("linear(functor, In, Out) takes three arguments".into()));
    };
    let Term::Atom(functor) = resolve(f_term, subst) else {
        return Err(HornError::Builtin("linear: first argument must be a functor name".into()));
    };
    let Some(in_ket) = eval_ket(input, subst, &reg.named_kets) else {
        return Ok(plain_failure("linear: input is not a ket"));
    };
    let mut image = KetExpr::new(vec![]);
    for (label, coeff) in &in_ket.terms {
        let mut found = None;
        for (_, clause) in program.clauses_for(&functor, 2) {
            if !clause.body.is_empty() {
                continue;
            }
            if let Term::Ket(k) = &clause.head.args[0] {
                if k.unit_label() == Some(label.as_str()) {
                    if let Term::Ket(out_k) = &clause.head.args[1] {
                        found = Some(out_k.clone());
                        break;
                    }
                }
            }
        }
        let Some(base_image) = found else {
            return Ok(plain_failure(format!("no registered action for |{label}⟩")));
        };
        image = image.add(&base_image.scale(*coeff));
    }
    match unify(output, &Term::Ket(image), subst) {
        UnifyOutcome::Ok(s) => Ok(BuiltinResult::Proved(s)),
        UnifyOutcome::Fail => Ok(plain_failure("linear image does not unify")),
        UnifyOutcome::KetMismatch(d) => {
            Ok(contradiction("linear image amplitudes disagree", d.entries))
        }
    }
}
