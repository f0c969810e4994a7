//! The decorated Horn-clause language: parser, unification, backward-chaining
//! resolution with braiding normalization and constructive refutation, and
//! semantic builtins that delegate to the numeric modules.

pub mod ast;
pub mod builtins;
pub mod fixtures;
pub mod parser;
pub mod registry;
pub mod solve;
pub mod unify;

pub use ast::{
    compactness_restore, compactness_rewrite, normalize_clause, Clause, Directive, KetExpr,
    Predicate, Program, Term,
};
pub use parser::{parse_goal, parse_program, ParseError};
pub use registry::Registry;
pub use solve::{solve, Outcome, ProofTrace, SolveLimits};
pub use unify::{resolve, unify, Subst, UnifyOutcome};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum HornError {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Linalg(#[from] crate::linalg::LinalgError),
    #[error("registry: {0}")]
    Registry(String),
    #[error("decoration violation: {0}")]
    DecorationViolation(String),
    #[error("builtin: {0}")]
    Builtin(String),
    #[error("unbound operator name at load time: {0}")]
    UnboundOperator(String),
}

/// Parse, validate, and stage a program: returns the normalized clause base
/// and a registry initialized from the directives.
pub fn load_program(src: &str, seed: u64) -> Result<(Program, Registry), HornError> {
    let program = parse_program(src)?;
    let registry = Registry::from_program(&program, seed)?;
    validate_program(&program, &registry)?;
    Ok((program, registry))
}

/// Decoration-2/3 functors must resolve somewhere: a clause head, a builtin,
/// or (for decoration 2) a registered operator.
fn validate_program(program: &Program, registry: &Registry) -> Result<(), HornError> {
    let clause_heads: Vec<&str> = program
        .clauses
        .iter()
        .map(|c| c.head.functor.as_str())
        .collect();
    let known = |functor: &str, allow_op: bool| -> bool {
        clause_heads.contains(&functor)
            || builtins::BUILTIN_FUNCTORS.contains(&functor)
            || (allow_op && registry.operators.contains_key(functor))
    };
    for clause in &program.clauses {
        for p in std::iter::once(&clause.head).chain(clause.body.iter()) {
            match p.decoration {
                Some(2) if !known(&p.functor, true) => {
                    return Err(HornError::UnboundOperator(p.functor.clone()))
                }
                Some(3) if !known(&p.functor, false) => {
                    return Err(HornError::UnboundOperator(p.functor.clone()))
                }
                _ => {}
            }
        }
    }
    Ok(())
}
