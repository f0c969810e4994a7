//! Backward-chaining resolution over the normalized clause base, with
//! constructive refutation: a negated goal is `refuted` exactly when every
//! derivation branch of the positive atom dies in a builtin contradiction.

use super::ast::{format_c64, Predicate, Program, Term};
use super::builtins::{eval_builtin, BuiltinResult};
use super::registry::Registry;
use super::unify::{resolve, unify, Subst, UnifyOutcome};
use super::HornError;
use std::collections::BTreeMap;
use std::fmt;

type Result<T> = std::result::Result<T, HornError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Proved,
    Refuted,
    Failed,
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Outcome::Proved => write!(f, "proved"),
            Outcome::Refuted => write!(f, "refuted"),
            Outcome::Failed => write!(f, "failed"),
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct SolveLimits {
    pub max_depth: usize,
    pub max_steps: usize,
}

impl Default for SolveLimits {
    fn default() -> Self {
        Self { max_depth: 64, max_steps: 20_000 }
    }
}

/// Full record of a solve run: deterministic given program, goal, registry
/// seed, and limits.
#[derive(Debug, Clone)]
pub struct ProofTrace {
    pub outcome: Outcome,
    pub reason: String,
    pub events: Vec<String>,
    pub bindings: BTreeMap<String, String>,
    pub distributions: Vec<(String, Vec<f64>)>,
    pub contradictions: Vec<String>,
}

impl ProofTrace {
    pub fn render(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("outcome: {}", self.outcome));
        if !self.reason.is_empty() {
            out.push_str(&format!(" ({})", self.reason));
        }
        out.push('\n');
        if !self.bindings.is_empty() {
            out.push_str("bindings:\n");
            for (var, value) in &self.bindings {
                out.push_str(&format!("  {var} = {value}\n"));
            }
        }
        if !self.distributions.is_empty() {
            out.push_str("recorded distributions:\n");
            for (key, probs) in &self.distributions {
                let cells: Vec<String> = probs.iter().map(|p| format!("{p}")).collect();
                out.push_str(&format!("  {key}: [{}]\n", cells.join(", ")));
            }
        }
        if !self.contradictions.is_empty() {
            out.push_str("contradictions:\n");
            for c in &self.contradictions {
                out.push_str(&format!("  {c}\n"));
            }
        }
        out.push_str("trace:\n");
        for e in &self.events {
            out.push_str(&format!("  {e}\n"));
        }
        out
    }
}

struct Engine<'a> {
    program: &'a Program,
    limits: SolveLimits,
    steps: usize,
    rename_counter: usize,
    events: Vec<String>,
    contradictions: Vec<String>,
    /// Leaf accounting for the refutation decision.
    contradicted_leaves: usize,
    plain_failed_leaves: usize,
}

enum Status {
    Proved(Subst, Box<Registry>),
    Exhausted,
    Aborted(String),
}

impl<'a> Engine<'a> {
    fn log(&mut self, depth: usize, text: String) {
        self.events.push(format!("{}{text}", "  ".repeat(depth)));
    }

    fn rename_predicate(&self, p: &Predicate, tag: usize) -> Predicate {
        let mut q = p.clone();
        q.args = q.args.iter().map(|t| rename_term(t, tag)).collect();
        q
    }

    fn solve_goals(
        &mut self,
        goals: &[Predicate],
        subst: &Subst,
        reg: &Registry,
        depth: usize,
    ) -> Result<Status> {
        let Some((goal, rest)) = goals.split_first() else {
            return Ok(Status::Proved(subst.clone(), Box::new(reg.clone())));
        };
        self.steps += 1;
        if self.steps > self.limits.max_steps {
            self.log(depth, "dead end: step limit exceeded".into());
            self.plain_failed_leaves += 1;
            return Ok(Status::Aborted("step limit exceeded".into()));
        }
        if depth > self.limits.max_depth {
            self.log(depth, format!("dead end: depth limit at {}", render_goal(goal, subst)));
            self.plain_failed_leaves += 1;
            return Ok(Status::Exhausted);
        }

        // Builtins first; the registry snapshot isolates this branch.
        let mut branch_reg = reg.clone();
        match eval_builtin(goal, subst, &mut branch_reg, self.program)? {
            BuiltinResult::Proved(new_subst) => {
                self.log(
                    depth,
                    format!("builtin {} ✓", render_goal(goal, &new_subst)),
                );
                return self.solve_goals(rest, &new_subst, &branch_reg, depth);
            }
            BuiltinResult::Failed(failure) => {
                self.log(
                    depth,
                    format!(
                        "builtin {} ✗ ({})",
                        render_goal(goal, subst),
                        failure.reason
                    ),
                );
                if failure.contradiction {
                    let mut line = format!(
                        "{} — {}",
                        render_goal(goal, subst),
                        failure.reason
                    );
                    if !failure.detail.is_empty() {
                        let cells: Vec<String> = failure
                            .detail
                            .iter()
                            .map(|(label, a, b)| {
                                format!("|{label}⟩: {} vs {}", format_c64(*a), format_c64(*b))
                            })
                            .collect();
                        line.push_str(&format!(" [{}]", cells.join("; ")));
                    }
                    self.contradictions.push(line);
                    self.contradicted_leaves += 1;
                } else {
                    self.plain_failed_leaves += 1;
                }
                return Ok(Status::Exhausted);
            }
            BuiltinResult::NotBuiltin => {}
        }

        // Clause resolution in program order.
        let candidates = self.program.clauses_for(&goal.functor, goal.args.len());
        if candidates.is_empty() {
            self.log(
                depth,
                format!("dead end: no clause for {}", render_goal(goal, subst)),
            );
            self.plain_failed_leaves += 1;
            return Ok(Status::Exhausted);
        }
        let mut any_head_unified = false;
        for (idx, clause) in candidates {
            self.rename_counter += 1;
            let tag = self.rename_counter;
            let head = self.rename_predicate(&clause.head, tag);
            let goal_term = predicate_term(goal);
            let head_term = predicate_term(&head);
            let UnifyOutcome::Ok(new_subst) = unify(&goal_term, &head_term, subst) else {
                continue;
            };
            any_head_unified = true;
            self.log(
                depth,
                format!(
                    "{} ⟸ clause {}: {}",
                    render_goal(goal, &new_subst),
                    idx,
                    clause.head
                ),
            );
            let mut body: Vec<Predicate> = clause
                .body
                .iter()
                .map(|p| self.rename_predicate(p, tag))
                .collect();
            body.extend(rest.iter().cloned());
            match self.solve_goals(&body, &new_subst, reg, depth + 1)? {
                Status::Proved(s, r) => return Ok(Status::Proved(s, r)),
                Status::Exhausted => continue,
                Status::Aborted(reason) => return Ok(Status::Aborted(reason)),
            }
        }
        if !any_head_unified {
            self.log(
                depth,
                format!("dead end: no head unifies with {}", render_goal(goal, subst)),
            );
            self.plain_failed_leaves += 1;
        }
        Ok(Status::Exhausted)
    }
}

fn rename_term(t: &Term, tag: usize) -> Term {
    match t {
        Term::Variable(v) => Term::Variable(format!("{v}#{tag}")),
        Term::Compound(f, args) => {
            Term::Compound(f.clone(), args.iter().map(|a| rename_term(a, tag)).collect())
        }
        _ => t.clone(),
    }
}

/// View a predicate as a compound term for head unification.
fn predicate_term(p: &Predicate) -> Term {
    Term::Compound(p.functor.clone(), p.args.clone())
}

fn render_goal(p: &Predicate, subst: &Subst) -> String {
    let mut q = p.clone();
    q.args = q.args.iter().map(|t| resolve(t, subst)).collect();
    q.to_string()
}

fn goal_variables(p: &Predicate) -> Vec<String> {
    fn collect(t: &Term, out: &mut Vec<String>) {
        match t {
            Term::Variable(v) => {
                if !out.contains(v) {
                    out.push(v.clone());
                }
            }
            Term::Compound(_, args) => args.iter().for_each(|a| collect(a, out)),
            _ => {}
        }
    }
    let mut out = Vec::new();
    p.args.iter().for_each(|a| collect(a, &mut out));
    out
}

/// Solve a goal against the program. On a proof, `registry` is advanced to
/// the winning branch's state; otherwise it is left untouched.
///
/// A `~`-negated goal asks for a constructive refutation of the positive
/// atom: `Refuted` when every derivation branch ends in a builtin
/// contradiction, `Failed` otherwise (including when the atom is provable).
pub fn solve(
    goal: &Predicate,
    program: &Program,
    registry: &mut Registry,
    limits: SolveLimits,
) -> Result<ProofTrace> {
    let mut engine = Engine {
        program,
        limits,
        steps: 0,
        rename_counter: 0,
        events: Vec::new(),
        contradictions: Vec::new(),
        contradicted_leaves: 0,
        plain_failed_leaves: 0,
    };
    let positive = {
        let mut g = goal.clone();
        g.negated = false;
        g
    };
    let status = engine.solve_goals(
        std::slice::from_ref(&positive),
        &Subst::new(),
        registry,
        0,
    )?;

    let (outcome, reason, bindings, distributions) = match (goal.negated, status) {
        (false, Status::Proved(subst, winning_reg)) => {
            let mut bindings = BTreeMap::new();
            for var in goal_variables(goal) {
                let value = resolve(&Term::Variable(var.clone()), &subst);
                if !matches!(value, Term::Variable(_)) {
                    bindings.insert(var, value.to_string());
                }
            }
            let dists = winning_reg.distributions.clone();
            *registry = *winning_reg;
            (Outcome::Proved, String::new(), bindings, dists)
        }
        (false, Status::Exhausted) => (
            Outcome::Failed,
            "no proof found".to_string(),
            BTreeMap::new(),
            Vec::new(),
        ),
        (false, Status::Aborted(reason)) | (true, Status::Aborted(reason)) => {
            (Outcome::Failed, reason, BTreeMap::new(), Vec::new())
        }
        (true, Status::Proved(_, _)) => (
            Outcome::Failed,
            "goal is provable; refutation impossible".to_string(),
            BTreeMap::new(),
            Vec::new(),
        ),
        (true, Status::Exhausted) => {
            if engine.contradicted_leaves > 0 && engine.plain_failed_leaves == 0 {
                (
                    Outcome::Refuted,
                    format!(
                        "all {} derivation branches reach a contradiction",
                        engine.contradicted_leaves
                    ),
                    BTreeMap::new(),
                    Vec::new(),
                )
            } else {
                (
                    Outcome::Failed,
                    "refutation incomplete: some branches fail without contradiction"
                        .to_string(),
                    BTreeMap::new(),
                    Vec::new(),
                )
            }
        }
    };
    Ok(ProofTrace {
        outcome,
        reason,
        events: engine.events,
        bindings,
        distributions,
        contradictions: engine.contradictions,
    })
}
