//! Terms, predicates, clauses, and the canonical braiding order.

use crate::linalg::{ComplexMatrix, ComplexVector, C64};
use std::fmt;

/// Normalized ket expression: sorted basis labels with complex amplitudes.
///
/// Labels are bitstrings; tensoring concatenates them.
#[derive(Debug, Clone, PartialEq)]
pub struct KetExpr {
    pub terms: Vec<(String, C64)>,
}

impl KetExpr {
    pub fn new(mut terms: Vec<(String, C64)>) -> Self {
        terms.sort_by(|a, b| a.0.cmp(&b.0));
        let mut merged: Vec<(String, C64)> = Vec::new();
        for (label, coeff) in terms {
            match merged.last_mut() {
                Some((last, acc)) if *last == label => *acc += coeff,
                _ => merged.push((label, coeff)),
            }
        }
        merged.retain(|(_, c)| c.norm() > 1e-15);
        Self { terms: merged }
    }

    pub fn basis(label: &str) -> Self {
        Self::new(vec![(label.to_string(), C64::new(1.0, 0.0))])
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// A single unit basis ket `|label⟩`?
    pub fn unit_label(&self) -> Option<&str> {
        match self.terms.as_slice() {
            [(label, coeff)] if (coeff - C64::new(1.0, 0.0)).norm() < 1e-12 => Some(label),
            _ => None,
        }
    }

    pub fn scale(&self, s: C64) -> KetExpr {
        KetExpr::new(self.terms.iter().map(|(l, c)| (l.clone(), c * s)).collect())
    }

    pub fn add(&self, other: &KetExpr) -> KetExpr {
        let mut terms = self.terms.clone();
        terms.extend(other.terms.iter().cloned());
        KetExpr::new(terms)
    }

    /// Tensor product: labels concatenate, amplitudes multiply.
    pub fn tensor(&self, other: &KetExpr) -> KetExpr {
        let mut terms = Vec::new();
        for (la, ca) in &self.terms {
            for (lb, cb) in &other.terms {
                terms.push((format!("{la}{lb}"), ca * cb));
            }
        }
        KetExpr::new(terms)
    }

    pub fn norm(&self) -> f64 {
        self.terms
            .iter()
            .map(|(_, c)| c.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    pub fn inner(&self, other: &KetExpr) -> C64 {
        let mut acc = C64::new(0.0, 0.0);
        let mut i = 0;
        let mut j = 0;
        while i < self.terms.len() && j < other.terms.len() {
            match self.terms[i].0.cmp(&other.terms[j].0) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => {
                    acc += self.terms[i].1.conj() * other.terms[j].1;
                    i += 1;
                    j += 1;
                }
            }
        }
        acc
    }

    /// Bitstring labels to a dense vector of dimension `2^len`.
    pub fn to_vector(&self) -> Option<ComplexVector> {
        let len = self.terms.first().map(|(l, _)| l.len())?;
        if self.terms.iter().any(|(l, _)| l.len() != len) {
            return None;
        }
        let dim = 1usize << len;
        let mut v = ComplexVector::zeros(dim);
        for (label, coeff) in &self.terms {
            let mut idx = 0usize;
            for ch in label.chars() {
                idx = idx * 2
                    + match ch {
                        '0' => 0,
                        '1' => 1,
                        _ => return None,
                    };
            }
            v.data[idx] += coeff;
        }
        Some(v)
    }

    /// Dense vector back to a labeled expression (`bits` binary digits).
    pub fn from_vector(v: &ComplexVector, bits: usize) -> Self {
        assert_eq!(v.dim(), 1 << bits);
        let mut terms = Vec::new();
        for (idx, coeff) in v.data.iter().enumerate() {
            if coeff.norm() > 1e-12 {
                let label: String = (0..bits)
                    .rev()
                    .map(|b| if idx >> b & 1 == 1 { '1' } else { '0' })
                    .collect();
                terms.push((label, *coeff));
            }
        }
        KetExpr::new(terms)
    }

    /// Phase-invariant equality of the normalized vectors within `tol`;
    /// on failure, the per-label coefficient pairs after optimal phase
    /// alignment are returned for contradiction reporting.
    pub fn phase_eq(&self, other: &KetExpr, tol: f64) -> Result<(), Vec<(String, C64, C64)>> {
        let na = self.norm();
        let nb = other.norm();
        if na < 1e-12 && nb < 1e-12 {
            return Ok(());
        }
        if na < 1e-12 || nb < 1e-12 {
            return Err(self.alignment_report(other, C64::new(1.0, 0.0)));
        }
        let a = self.scale(C64::new(1.0 / na, 0.0));
        let b = other.scale(C64::new(1.0 / nb, 0.0));
        let overlap = b.inner(&a);
        let phase = if overlap.norm() < 1e-15 {
            C64::new(1.0, 0.0)
        } else {
            overlap / overlap.norm()
        };
        let deviation = a.add(&b.scale(-phase)).norm();
        if deviation < tol {
            Ok(())
        } else {
            Err(a.alignment_report(&b, phase))
        }
    }

    fn alignment_report(&self, other: &KetExpr, phase: C64) -> Vec<(String, C64, C64)> {
        let mut labels: Vec<String> = self
            .terms
            .iter()
            .chain(other.terms.iter())
            .map(|(l, _)| l.clone())
            .collect();
        labels.sort();
        labels.dedup();
        let coeff_of = |k: &KetExpr, label: &str| {
            k.terms
                .iter()
                .find(|(l, _)| l == label)
                .map(|(_, c)| *c)
                .unwrap_or(C64::new(0.0, 0.0))
        };
        labels
            .into_iter()
            .map(|l| {
                let a = coeff_of(self, &l);
                let b = coeff_of(other, &l) * phase;
                (l, a, b)
            })
            .filter(|(_, a, b)| (a - b).norm() > 1e-9)
            .collect()
    }
}

/// First-order terms of the clause language.
#[derive(Debug, Clone, PartialEq)]
pub enum Term {
    Variable(String),
    Atom(String),
    Number(f64),
    Ket(KetExpr),
    Compound(String, Vec<Term>),
}

impl Term {
    pub fn complex(&self) -> Option<C64> {
        match self {
            Term::Number(n) => Some(C64::new(*n, 0.0)),
            _ => None,
        }
    }
}

pub fn format_c64(v: C64) -> String {
    if v.im.abs() < 1e-12 {
        format!("{}", v.re)
    } else if v.re.abs() < 1e-12 {
        format!("{}i", v.im)
    } else if v.im < 0.0 {
        format!("({}{}i)", v.re, v.im)
    } else {
        format!("({}+{}i)", v.re, v.im)
    }
}

impl fmt::Display for KetExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0|⟩");
        }
        for (idx, (label, coeff)) in self.terms.iter().enumerate() {
            if idx > 0 {
                write!(f, " + ")?;
            }
            if (coeff - C64::new(1.0, 0.0)).norm() < 1e-12 {
                write!(f, "|{label}⟩")?;
            } else {
                write!(f, "{}|{label}⟩", format_c64(*coeff))?;
            }
        }
        Ok(())
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Variable(v) => write!(f, "{v}"),
            Term::Atom(a) => write!(f, "{a}"),
            Term::Number(n) => write!(f, "{n}"),
            Term::Ket(k) => write!(f, "{k}"),
            Term::Compound(functor, args) => {
                write!(f, "{functor}(")?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{a}")?;
                }
                write!(f, ")")
            }
        }
    }
}

/// Head-of-clause marker for the compactness rewrite.
pub const EMPTY_HEAD: &str = "⊥";

/// Decorated predicate; `measured` marks the trailing `*`, `negated` a `~`
/// refutation goal, `daggered` the compactness image of a head.
#[derive(Debug, Clone, PartialEq)]
pub struct Predicate {
    pub decoration: Option<u8>,
    pub functor: String,
    pub args: Vec<Term>,
    pub measured: bool,
    pub negated: bool,
    pub daggered: bool,
}

impl Predicate {
    pub fn plain(functor: &str, args: Vec<Term>) -> Self {
        Self {
            decoration: None,
            functor: functor.to_string(),
            args,
            measured: false,
            negated: false,
            daggered: false,
        }
    }

    /// Braiding rank: applications (decoration ≥ 2, unmeasured) run first,
    /// measurement steps second, checks and undecorated calls last.
    pub fn braid_rank(&self) -> u8 {
        if self.measured {
            1
        } else if matches!(self.decoration, Some(d) if d >= 2) {
            0
        } else {
            2
        }
    }

    /// Canonical sort key: rank, then functor and rendered arguments in
    /// descending lexicographic order.
    pub fn braid_key(&self) -> (u8, std::cmp::Reverse<String>, std::cmp::Reverse<String>) {
        let args = self
            .args
            .iter()
            .map(|a| a.to_string())
            .collect::<Vec<_>>()
            .join(",");
        (
            self.braid_rank(),
            std::cmp::Reverse(self.functor.clone()),
            std::cmp::Reverse(args),
        )
    }
}

impl fmt::Display for Predicate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.negated {
            write!(f, "~")?;
        }
        if let Some(d) = self.decoration {
            write!(f, "@{d} ")?;
        }
        if self.daggered {
            write!(f, "†")?;
        }
        match self.functor.as_str() {
            "=" => write!(f, "{} = {}", self.args[0], self.args[1])?,
            "commutes" => write!(f, "[{}, {}] = 0", self.args[0], self.args[1])?,
            _ => {
                write!(f, "{}", self.functor)?;
                if !self.args.is_empty() {
                    write!(f, "(")?;
                    for (i, a) in self.args.iter().enumerate() {
                        if i > 0 {
                            write!(f, ", ")?;
                        }
                        write!(f, "{a}")?;
                    }
                    write!(f, ")")?;
                }
            }
        }
        if self.measured {
            write!(f, "*")?;
        }
        Ok(())
    }
}

/// Horn clause with a single head and a ⊗-conjunction body.
#[derive(Debug, Clone, PartialEq)]
pub struct Clause {
    pub head: Predicate,
    pub body: Vec<Predicate>,
}

impl fmt::Display for Clause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.head)?;
        if !self.body.is_empty() {
            write!(f, " :- ")?;
            for (i, p) in self.body.iter().enumerate() {
                if i > 0 {
                    write!(f, ", ")?;
                }
                write!(f, "{p}")?;
            }
        }
        write!(f, ".")
    }
}

/// Braiding normal form: the body is sorted by the canonical key, so any
/// permutation of a source body loads to the same clause.
pub fn normalize_clause(c: &Clause) -> Clause {
    let mut body = c.body.clone();
    body.sort_by_key(|p| p.braid_key());
    Clause { head: c.head.clone(), body }
}

/// Compactness rewrite: move the head into the body as its dagger under an
/// empty head marker. Requires an operator-level head (decoration ≥ 1).
pub fn compactness_rewrite(c: &Clause) -> Result<Clause, String> {
    match c.head.decoration {
        Some(d) if d >= 1 => {}
        _ => return Err("undefined dagger for decoration-0 head".to_string()),
    }
    let mut daggered = c.head.clone();
    daggered.daggered = true;
    let mut body = vec![daggered];
    body.extend(c.body.iter().cloned());
    Ok(Clause {
        head: Predicate::plain(EMPTY_HEAD, vec![]),
        body,
    })
}

/// Undo [`compactness_rewrite`]: the unique daggered body element becomes the
/// head again.
pub fn compactness_restore(c: &Clause) -> Result<Clause, String> {
    if c.head.functor != EMPTY_HEAD {
        return Err("clause head is not the empty marker".to_string());
    }
    let daggered: Vec<&Predicate> = c.body.iter().filter(|p| p.daggered).collect();
    let [original] = daggered.as_slice() else {
        return Err("expected exactly one daggered body element".to_string());
    };
    let mut head = (*original).clone();
    head.daggered = false;
    let body = c
        .body
        .iter()
        .filter(|p| !p.daggered)
        .cloned()
        .collect();
    Ok(Clause { head, body })
}

/// Program directives.
#[derive(Debug, Clone)]
pub enum Directive {
    /// `#op name [[...]].`
    Op(String, ComplexMatrix),
    /// `#state name ket.`
    State(String, KetExpr),
    /// `#system name dims.`
    System(String, Vec<usize>),
}

/// A parsed program: directives plus clauses in braiding normal form.
#[derive(Debug, Clone, Default)]
pub struct Program {
    pub directives: Vec<Directive>,
    pub clauses: Vec<Clause>,
}

impl Program {
    pub fn clauses_for(&self, functor: &str, arity: usize) -> Vec<(usize, &Clause)> {
        self.clauses
            .iter()
            .enumerate()
            .filter(|(_, c)| c.head.functor == functor && c.head.args.len() == arity)
            .collect()
    }
}
