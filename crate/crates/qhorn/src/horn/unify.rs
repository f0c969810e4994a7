//! First-order unification with occurs check; ket terms unify up to a global
//! phase.

use super::ast::{KetExpr, Term};
use std::collections::BTreeMap;

pub type Subst = BTreeMap<String, Term>;

/// Phase tolerance for ket unification.
pub const KET_TOL: f64 = 1e-9;

/// Walk a term to its current value under the substitution (deep).
pub fn resolve(term: &Term, subst: &Subst) -> Term {
    match term {
        Term::Variable(v) => match subst.get(v) {
            Some(t) => resolve(t, subst),
            None => term.clone(),
        },
        Term::Compound(f, args) => Term::Compound(
            f.clone(),
            args.iter().map(|a| resolve(a, subst)).collect(),
        ),
        _ => term.clone(),
    }
}

fn occurs(var: &str, term: &Term, subst: &Subst) -> bool {
    match term {
        Term::Variable(v) => {
            if v == var {
                return true;
            }
            match subst.get(v) {
                Some(t) => occurs(var, t, subst),
                None => false,
            }
        }
        Term::Compound(_, args) => args.iter().any(|a| occurs(var, a, subst)),
        _ => false,
    }
}

/// Failure detail carried out of a ket mismatch: per-label coefficients after
/// phase alignment.
#[derive(Debug, Clone, Default)]
pub struct MismatchDetail {
    pub entries: Vec<(String, crate::linalg::C64, crate::linalg::C64)>,
}

#[derive(Debug)]
pub enum UnifyOutcome {
    Ok(Subst),
    /// Plain structural failure (different functors, occurs check, ...).
    Fail,
    /// Two ground kets disagree; the detail names the offending amplitudes.
    KetMismatch(MismatchDetail),
}

/// Most general unifier extending `subst`.
pub fn unify(a: &Term, b: &Term, subst: &Subst) -> UnifyOutcome {
    let a = resolve(a, subst);
    let b = resolve(b, subst);
    match (&a, &b) {
        (Term::Variable(x), Term::Variable(y)) if x == y => UnifyOutcome::Ok(subst.clone()),
        (Term::Variable(x), t) | (t, Term::Variable(x)) => {
            if occurs(x, t, subst) {
                return UnifyOutcome::Fail;
            }
            let mut s = subst.clone();
            s.insert(x.clone(), t.clone());
            UnifyOutcome::Ok(s)
        }
        (Term::Atom(x), Term::Atom(y)) => {
            if x == y {
                UnifyOutcome::Ok(subst.clone())
            } else {
                UnifyOutcome::Fail
            }
        }
        (Term::Number(x), Term::Number(y)) => {
            if (x - y).abs() < 1e-12 {
                UnifyOutcome::Ok(subst.clone())
            } else {
                UnifyOutcome::Fail
            }
        }
        (Term::Ket(x), Term::Ket(y)) => match x.phase_eq(y, KET_TOL) {
            Ok(()) => UnifyOutcome::Ok(subst.clone()),
            Err(entries) => UnifyOutcome::KetMismatch(MismatchDetail { entries }),
        },
        (Term::Compound(f, fa), Term::Compound(g, ga)) => {
            if f != g || fa.len() != ga.len() {
                return UnifyOutcome::Fail;
            }
            let mut current = subst.clone();
            for (x, y) in fa.iter().zip(ga.iter()) {
                match unify(x, y, &current) {
                    UnifyOutcome::Ok(s) => current = s,
                    other => return other,
                }
            }
            UnifyOutcome::Ok(current)
        }
        _ => UnifyOutcome::Fail,
    }
}

/// Ket-aware equality used by builtins: like [`unify`] but first evaluates
/// ket-valued compound terms (`tensor`).
pub fn eval_ket(term: &Term, subst: &Subst, named: &BTreeMap<String, KetExpr>) -> Option<KetExpr> {
    match resolve(term, subst) {
        Term::Ket(k) => Some(k),
        Term::Atom(name) => named.get(&name).cloned(),
        Term::Compound(f, args) if f == "tensor" && args.len() == 2 => {
            let a = eval_ket(&args[0], subst, named)?;
            let b = eval_ket(&args[1], subst, named)?;
            Some(a.tensor(&b))
        }
        _ => None,
    }
}
