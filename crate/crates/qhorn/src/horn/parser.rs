//! Recursive-descent parser for the clause language.
//!
//! ```text
//! program    := (directive | clause)* ;
//! directive  := "#op" name matrixliteral "." | "#state" name ketliteral "."
//!             | "#system" name dims "." ;
//! clause     := head [":-" body] "." ;
//! body       := predicate ("," predicate)* ;
//! predicate  := ["~"] [deco] name ["(" terms ")"] ["*"]
//!             | term "=" term
//!             | "[" term "," term "]" "=" "0" ;
//! deco       := "@0" | "@1" | "@2" | "@3" ;
//! term       := VARIABLE | atom | number | ket | name ["(" terms ")"] ;
//! ket        := coefficient? "|" label "⟩" (("+"|"-") coefficient? "|" label "⟩")* ;
//! ```
//!
//! `%` starts a line comment. Complex scalars are written `a`, `bi`, `a+bi`,
//! or parenthesized in ket-coefficient position.

use super::ast::{Clause, Directive, KetExpr, Predicate, Program, Term};
use crate::linalg::{ComplexMatrix, C64};
use thiserror::Error;

#[derive(Debug, Error)]
#[error("parse error at {line}:{col}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub col: usize,
    pub message: String,
}

type Result<T> = std::result::Result<T, ParseError>;

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Name(String),
    Variable(String),
    Number(f64, bool), // value, imaginary flag
    Directive(String),
    Ket(String),
    Deco(u8),
    Implies, // :-
    LParen,
    RParen,
    LBracket,
    RBracket,
    Comma,
    Dot,
    Equals,
    Star,
    Tilde,
    Plus,
    Minus,
}

struct Lexer<'a> {
    chars: std::iter::Peekable<std::str::Chars<'a>>,
    line: usize,
    col: usize,
}

impl<'a> Lexer<'a> {
    fn new(src: &'a str) -> Self {
        Self { chars: src.chars().peekable(), line: 1, col: 1 }
    }

    fn err<T>(&self, message: impl Into<String>) -> Result<T> {
        Err(ParseError { line: self.line, col: self.col, message: message.into() })
    }

    fn bump(&mut self) -> Option<char> {
        let ch = self.chars.next()?;
        if ch == '\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(ch)
    }

    fn tokens(mut self) -> Result<Vec<(Tok, usize, usize)>> {
        let mut out = Vec::new();
        while let Some(&ch) = self.chars.peek() {
            let (line, col) = (self.line, self.col);
            match ch {
                ' ' | '\t' | '\r' | '\n' => {
                    self.bump();
                }
                '%' => {
                    while let Some(&c) = self.chars.peek() {
                        if c == '\n' {
                            break;
                        }
                        self.bump();
                    }
                }
                '(' => {
                    self.bump();
                    out.push((Tok::LParen, line, col));
                }
                ')' => {
                    self.bump();
                    out.push((Tok::RParen, line, col));
                }
                '[' => {
                    self.bump();
                    out.push((Tok::LBracket, line, col));
                }
                ']' => {
                    self.bump();
                    out.push((Tok::RBracket, line, col));
                }
                ',' => {
                    self.bump();
                    out.push((Tok::Comma, line, col));
                }
                '.' => {
                    self.bump();
                    out.push((Tok::Dot, line, col));
                }
                '=' => {
                    self.bump();
                    out.push((Tok::Equals, line, col));
                }
                '*' => {
                    self.bump();
                    out.push((Tok::Star, line, col));
                }
                '~' => {
                    self.bump();
                    out.push((Tok::Tilde, line, col));
                }
                '+' => {
                    self.bump();
                    out.push((Tok::Plus, line, col));
                }
                '-' => {
                    self.bump();
                    out.push((Tok::Minus, line, col));
                }
                ':' => {
                    self.bump();
                    if self.chars.peek() == Some(&'-') {
                        self.bump();
                        out.push((Tok::Implies, line, col));
                    } else {
                        return self.err("expected ':-'");
                    }
                }
                '@' => {
                    self.bump();
                    match self.bump() {
                        Some(d @ '0'..='3') => {
                            out.push((Tok::Deco(d as u8 - b'0'), line, col))
                        }
                        Some(d) => return self.err(format!("unknown decoration @{d}")),
                        None => return self.err("dangling '@'"),
                    }
                }
                '#' => {
                    self.bump();
                    let name = self.lex_word()?;
                    out.push((Tok::Directive(name), line, col));
                }
                '|' => {
                    self.bump();
                    let mut label = String::new();
                    while let Some(&c) = self.chars.peek() {
                        if c.is_alphanumeric() || c == '_' {
                            label.push(c);
                            self.bump();
                        } else {
                            break;
                        }
                    }
                    match self.chars.peek() {
                        Some('⟩') | Some('>') => {
                            self.bump();
                        }
                        _ => return self.err("unterminated ket: expected '⟩'"),
                    }
                    out.push((Tok::Ket(label), line, col));
                }
                c if c.is_ascii_digit() => {
                    let (value, imag) = self.lex_number()?;
                    out.push((Tok::Number(value, imag), line, col));
                }
                c if c.is_alphabetic() || c == '_' => {
                    let word = self.lex_word()?;
                    let first = word.chars().next().unwrap();
                    if first.is_uppercase() || first == '_' {
                        out.push((Tok::Variable(word), line, col));
                    } else {
                        out.push((Tok::Name(word), line, col));
                    }
                }
                other => return self.err(format!("unexpected character {other:?}")),
            }
        }
        Ok(out)
    }

    fn lex_word(&mut self) -> Result<String> {
        let mut word = String::new();
        while let Some(&c) = self.chars.peek() {
            if c.is_alphanumeric() || c == '_' {
                word.push(c);
                self.bump();
            } else {
                break;
            }
        }
        if word.is_empty() {
            return self.err("expected identifier");
        }
        Ok(word)
    }

    fn lex_number(&mut self) -> Result<(f64, bool)> {
        let mut text = String::new();
        while let Some(&c) = self.chars.peek() {
            if c.is_ascii_digit() {
                text.push(c);
                self.bump();
            } else if c == '.' {
                // A dot is part of the number only when a digit follows;
                // otherwise it terminates the clause.
                let mut look = self.chars.clone();
                look.next();
                if look.next().is_some_and(|d| d.is_ascii_digit()) {
                    text.push(c);
                    self.bump();
                } else {
                    break;
                }
            } else {
                break;
            }
        }
        // Exponent part.
        if let Some(&c) = self.chars.peek() {
            if c == 'e' || c == 'E' {
                let mut probe = text.clone();
                probe.push(c);
                self.bump();
                if let Some(&sign) = self.chars.peek() {
                    if sign == '+' || sign == '-' {
                        probe.push(sign);
                        self.bump();
                    }
                }
                while let Some(&d) = self.chars.peek() {
                    if d.is_ascii_digit() {
                        probe.push(d);
                        self.bump();
                    } else {
                        break;
                    }
                }
                text = probe;
            }
        }
        let imag = if self.chars.peek() == Some(&'i') {
            self.bump();
            true
        } else {
            false
        };
        match text.parse::<f64>() {
            Ok(v) => Ok((v, imag)),
            Err(_) => self.err(format!("bad number literal {text:?}")),
        }
    }
}

struct Parser {
    tokens: Vec<(Tok, usize, usize)>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.tokens.get(self.pos).map(|(t, _, _)| t)
    }

    fn peek2(&self) -> Option<&Tok> {
        self.tokens.get(self.pos + 1).map(|(t, _, _)| t)
    }

    fn next(&mut self) -> Option<Tok> {
        let t = self.tokens.get(self.pos).map(|(t, _, _)| t.clone());
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn here(&self) -> (usize, usize) {
        self.tokens
            .get(self.pos.min(self.tokens.len().saturating_sub(1)))
            .map(|(_, l, c)| (*l, *c))
            .unwrap_or((0, 0))
    }

    fn err<T>(&self, message: impl Into<String>) -> Result<T> {
        let (line, col) = self.here();
        Err(ParseError { line, col, message: message.into() })
    }

    fn expect(&mut self, tok: Tok, what: &str) -> Result<()> {
        match self.next() {
            Some(t) if t == tok => Ok(()),
            other => {
                self.pos = self.pos.saturating_sub(1);
                self.err(format!("expected {what}, found {other:?}"))
            }
        }
    }

    fn parse_program(&mut self) -> Result<Program> {
        let mut program = Program::default();
        while self.peek().is_some() {
            if let Some(Tok::Directive(_)) = self.peek() {
                program.directives.push(self.parse_directive()?);
            } else {
                let clause = self.parse_clause()?;
                program.clauses.push(super::ast::normalize_clause(&clause));
            }
        }
        Ok(program)
    }

    fn parse_directive(&mut self) -> Result<Directive> {
        let Some(Tok::Directive(kind)) = self.next() else {
            return self.err("expected directive");
        };
        let name = match self.next() {
            Some(Tok::Name(n)) => n,
            other => return self.err(format!("expected name after directive, found {other:?}")),
        };
        let directive = match kind.as_str() {
            "op" => {
                let matrix = self.parse_matrix()?;
                Directive::Op(name, matrix)
            }
            "state" => {
                let ket = self.parse_ket()?;
                Directive::State(name, ket)
            }
            "system" => {
                let mut dims = Vec::new();
                while let Some(Tok::Number(v, false)) = self.peek() {
                    let d = *v;
                    if d.fract() != 0.0 || d < 1.0 {
                        return self.err("system dimensions must be positive integers");
                    }
                    dims.push(d as usize);
                    self.next();
                }
                if dims.is_empty() {
                    return self.err("expected at least one dimension");
                }
                Directive::System(name, dims)
            }
            other => return self.err(format!("unknown directive #{other}")),
        };
        self.expect(Tok::Dot, "'.'")?;
        Ok(directive)
    }

    fn parse_matrix(&mut self) -> Result<ComplexMatrix> {
        self.expect(Tok::LBracket, "'[' opening matrix")?;
        let mut rows: Vec<Vec<C64>> = Vec::new();
        loop {
            self.expect(Tok::LBracket, "'[' opening row")?;
            let mut row = Vec::new();
            loop {
                row.push(self.parse_scalar()?);
                match self.next() {
                    Some(Tok::Comma) => continue,
                    Some(Tok::RBracket) => break,
                    other => return self.err(format!("expected ',' or ']', found {other:?}")),
                }
            }
            if let Some(prev) = rows.first() {
                if prev.len() != row.len() {
                    return self.err("ragged matrix literal");
                }
            }
            rows.push(row);
            match self.next() {
                Some(Tok::Comma) => continue,
                Some(Tok::RBracket) => break,
                other => return self.err(format!("expected ',' or ']', found {other:?}")),
            }
        }
        Ok(ComplexMatrix::from_rows(&rows))
    }

    /// Signed complex scalar: `a`, `bi`, `a+bi`, `a-bi`, with leading sign.
    fn parse_scalar(&mut self) -> Result<C64> {
        let sign = match self.peek() {
            Some(Tok::Minus) => {
                self.next();
                -1.0
            }
            Some(Tok::Plus) => {
                self.next();
                1.0
            }
            _ => 1.0,
        };
        let Some(Tok::Number(v, imag)) = self.next() else {
            self.pos = self.pos.saturating_sub(1);
            return self.err("expected number");
        };
        let first = if imag {
            C64::new(0.0, sign * v)
        } else {
            C64::new(sign * v, 0.0)
        };
        // Optional second component: only a real followed by imaginary.
        if !imag {
            if let (Some(Tok::Plus | Tok::Minus), Some(Tok::Number(_, true))) =
                (self.peek(), self.peek2())
            {
                let s2 = match self.next() {
                    Some(Tok::Minus) => -1.0,
                    _ => 1.0,
                };
                let Some(Tok::Number(v2, true)) = self.next() else {
                    return self.err("expected imaginary part");
                };
                return Ok(first + C64::new(0.0, s2 * v2));
            }
        }
        Ok(first)
    }

    fn at_ket_start(&self) -> bool {
        match self.peek() {
            Some(Tok::Ket(_)) => true,
            Some(Tok::Number(_, _)) | Some(Tok::Minus) | Some(Tok::LParen) => {
                // A coefficient is a ket start only if a ket token follows.
                let mut look = self.pos;
                // Skip a leading sign.
                if matches!(self.tokens.get(look).map(|(t, _, _)| t), Some(Tok::Minus)) {
                    look += 1;
                }
                match self.tokens.get(look).map(|(t, _, _)| t) {
                    Some(Tok::Number(_, _)) => matches!(
                        self.tokens.get(look + 1).map(|(t, _, _)| t),
                        Some(Tok::Ket(_))
                    ),
                    Some(Tok::LParen) => {
                        // (a+bi)|k⟩ — scan to the closing paren.
                        let mut depth = 0usize;
                        let mut idx = look;
                        while let Some((t, _, _)) = self.tokens.get(idx) {
                            match t {
                                Tok::LParen => depth += 1,
                                Tok::RParen => {
                                    depth -= 1;
                                    if depth == 0 {
                                        return matches!(
                                            self.tokens.get(idx + 1).map(|(t, _, _)| t),
                                            Some(Tok::Ket(_))
                                        );
                                    }
                                }
                                Tok::Dot => return false,
                                _ => {}
                            }
                            idx += 1;
                        }
                        false
                    }
                    _ => false,
                }
            }
            _ => false,
        }
    }

    fn parse_ket(&mut self) -> Result<KetExpr> {
        let mut terms: Vec<(String, C64)> = Vec::new();
        let mut pending_sign = 1.0;
        loop {
            let coeff = match self.peek() {
                Some(Tok::Ket(_)) => C64::new(pending_sign, 0.0),
                Some(Tok::LParen) => {
                    self.next();
                    let c = self.parse_scalar()?;
                    self.expect(Tok::RParen, "')'")?;
                    c * pending_sign
                }
                Some(Tok::Number(_, _)) | Some(Tok::Minus) => {
                    self.parse_scalar()? * pending_sign
                }
                other => return self.err(format!("expected ket term, found {other:?}")),
            };
            let Some(Tok::Ket(label)) = self.next() else {
                self.pos = self.pos.saturating_sub(1);
                return self.err("expected '|label⟩'");
            };
            terms.push((label, coeff));
            match self.peek() {
                Some(Tok::Plus) => {
                    self.next();
                    pending_sign = 1.0;
                }
                Some(Tok::Minus) => {
                    self.next();
                    pending_sign = -1.0;
                }
                _ => break,
            }
        }
        Ok(KetExpr::new(terms))
    }

    fn parse_clause(&mut self) -> Result<Clause> {
        let head = self.parse_predicate()?;
        let mut body = Vec::new();
        match self.next() {
            Some(Tok::Dot) => {}
            Some(Tok::Implies) => loop {
                body.push(self.parse_predicate()?);
                match self.next() {
                    Some(Tok::Comma) => continue,
                    Some(Tok::Dot) => break,
                    other => {
                        self.pos = self.pos.saturating_sub(1);
                        return self.err(format!("expected ',' or '.', found {other:?}"));
                    }
                }
            },
            other => {
                self.pos = self.pos.saturating_sub(1);
                return self.err(format!("expected ':-' or '.', found {other:?}"));
            }
        }
        Ok(Clause { head, body })
    }

    pub(super) fn parse_predicate(&mut self) -> Result<Predicate> {
        let negated = if self.peek() == Some(&Tok::Tilde) {
            self.next();
            true
        } else {
            false
        };
        let decoration = if let Some(Tok::Deco(d)) = self.peek() {
            let d = *d;
            self.next();
            Some(d)
        } else {
            None
        };

        // Commutator form: "[" term "," term "]" "=" "0".
        if self.peek() == Some(&Tok::LBracket) {
            self.next();
            let a = self.parse_term()?;
            self.expect(Tok::Comma, "','")?;
            let b = self.parse_term()?;
            self.expect(Tok::RBracket, "']'")?;
            self.expect(Tok::Equals, "'='")?;
            match self.next() {
                Some(Tok::Number(0.0, false)) => {}
                other => {
                    self.pos = self.pos.saturating_sub(1);
                    return self.err(format!("expected 0 after commutator, found {other:?}"));
                }
            }
            return Ok(Predicate {
                decoration,
                functor: "commutes".to_string(),
                args: vec![a, b],
                measured: false,
                negated,
                daggered: false,
            });
        }

        // Either a predicate with a functor or an equality between terms.
        let term = self.parse_term()?;
        if self.peek() == Some(&Tok::Equals) {
            self.next();
            let rhs = self.parse_term()?;
            return Ok(Predicate {
                decoration,
                functor: "=".to_string(),
                args: vec![term, rhs],
                measured: false,
                negated,
                daggered: false,
            });
        }
        let (functor, args) = match term {
            Term::Compound(f, args) => (f, args),
            Term::Atom(f) => (f, Vec::new()),
            other => return self.err(format!("expected predicate, found term {other}")),
        };
        let measured = if self.peek() == Some(&Tok::Star) {
            self.next();
            true
        } else {
            false
        };
        Ok(Predicate {
            decoration,
            functor,
            args,
            measured,
            negated,
            daggered: false,
        })
    }

    fn parse_term(&mut self) -> Result<Term> {
        if self.at_ket_start() {
            return Ok(Term::Ket(self.parse_ket()?));
        }
        match self.next() {
            Some(Tok::Variable(v)) => Ok(Term::Variable(v)),
            Some(Tok::Number(v, imag)) => {
                if imag {
                    self.pos = self.pos.saturating_sub(1);
                    self.err("bare imaginary numbers are only allowed in kets and matrices")
                } else {
                    Ok(Term::Number(v))
                }
            }
            Some(Tok::Minus) => match self.next() {
                Some(Tok::Number(v, false)) => Ok(Term::Number(-v)),
                other => {
                    self.pos = self.pos.saturating_sub(1);
                    self.err(format!("expected number after '-', found {other:?}"))
                }
            },
            Some(Tok::Name(name)) => {
                if self.peek() == Some(&Tok::LParen) {
                    self.next();
                    let mut args = Vec::new();
                    if self.peek() == Some(&Tok::RParen) {
                        self.next();
                        return Ok(Term::Compound(name, args));
                    }
                    loop {
                        args.push(self.parse_term()?);
                        match self.next() {
                            Some(Tok::Comma) => continue,
                            Some(Tok::RParen) => break,
                            other => {
                                self.pos = self.pos.saturating_sub(1);
                                return self
                                    .err(format!("expected ',' or ')', found {other:?}"));
                            }
                        }
                    }
                    Ok(Term::Compound(name, args))
                } else {
                    Ok(Term::Atom(name))
                }
            }
            other => {
                self.pos = self.pos.saturating_sub(1);
                self.err(format!("expected term, found {other:?}"))
            }
        }
    }
}

/// Parse a full program (directives and clauses).
pub fn parse_program(src: &str) -> Result<Program> {
    let tokens = Lexer::new(src).tokens()?;
    let mut parser = Parser { tokens, pos: 0 };
    parser.parse_program()
}

/// Parse a single predicate, e.g. a query goal (optionally `~`-negated).
pub fn parse_goal(src: &str) -> Result<Predicate> {
    let tokens = Lexer::new(src).tokens()?;
    let mut parser = Parser { tokens, pos: 0 };
    let goal = parser.parse_predicate()?;
    // Allow an optional trailing dot.
    if parser.peek() == Some(&Tok::Dot) {
        parser.next();
    }
    if parser.peek().is_some() {
        return parser.err("trailing input after goal");
    }
    Ok(goal)
}
