//! Text syntax for operator expressions.
//!
//! ```text
//! expr := term { "(+)" term }
//! term := atom [ "^" mult ] | "adj" "(" expr ")"
//! atom := "ushift" [ "(" gq "," gq ")" ] | "bshift" [ "(" gq "," gq ")" ]
//!       | "diag" "{" gq ":" mult { "," gq ":" mult } "}"
//! mult := nat | "inf"
//! gq   := rat [ ("+" | "-") rat "i" ] | rat "i"
//! rat  := [ "-" ] nat [ "/" nat ]
//! ```
//!
//! Whitespace is ignored between tokens. The printed form of an
//! [`OperatorExpr`] parses back to the same expression.

use std::fmt;

use mcomp::numeric::{ExtNat, Rat, GQ};
use mcomp::operator::{Affine, Atom, AtomKind, Eigen, OperatorExpr};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Pos {
    pub line: usize,
    pub col: usize,
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}, column {}", self.line, self.col)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Span {
    pub start: Pos,
    pub end: Pos,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ErrorKind {
    /// Input does not match the grammar; `expected` lists what would.
    Syntax { expected: Vec<String>, found: String },
    /// Grammatical input describing an invalid operator.
    Semantic(String),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DslError {
    pub pos: Pos,
    pub kind: ErrorKind,
}

impl fmt::Display for DslError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            ErrorKind::Syntax { expected, found } => {
                write!(f, "{}: syntax error: expected {}, found {found}", self.pos, expected.join(" or "))
            }
            ErrorKind::Semantic(m) => write!(f, "{}: {m}", self.pos),
        }
    }
}

impl std::error::Error for DslError {}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum AtomAst {
    UShift(Option<(GQ, GQ)>),
    BShift(Option<(GQ, GQ)>),
    Diag(Vec<(GQ, ExtNat, Span)>),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Ast {
    Sum { terms: Vec<Ast>, span: Span },
    Adj { inner: Box<Ast>, span: Span },
    Atom { atom: AtomAst, mult: Option<ExtNat>, span: Span },
}

impl Ast {
    pub fn span(&self) -> Span {
        match self {
            Ast::Sum { span, .. } | Ast::Adj { span, .. } | Ast::Atom { span, .. } => *span,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    Word(String),
    Num(String),
    Sym(char),
    End,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Word(w) => write!(f, "`{w}`"),
            Tok::Num(n) => write!(f, "`{n}`"),
            Tok::Sym(c) => write!(f, "`{c}`"),
            Tok::End => f.write_str("end of input"),
        }
    }
}

fn lex(src: &str) -> Result<Vec<(Tok, Span)>, DslError> {
    let mut out = Vec::new();
    let (mut line, mut col) = (1, 1);
    let mut chars = src.chars().peekable();
    while let Some(&c) = chars.peek() {
        let start = Pos { line, col };
        let mut take = |chars: &mut std::iter::Peekable<std::str::Chars<'_>>| {
            let c = chars.next().unwrap();
            if c == '\n' {
                line += 1;
                col = 1;
            } else {
                col += 1;
            }
            c
        };
        if c.is_whitespace() {
            take(&mut chars);
            continue;
        }
        let tok = if c.is_ascii_alphabetic() || c == '_' {
            let mut w = String::new();
            while chars.peek().is_some_and(|c| c.is_ascii_alphabetic() || *c == '_') {
                w.push(take(&mut chars));
            }
            Tok::Word(w)
        } else if c.is_ascii_digit() {
            let mut n = String::new();
            while chars.peek().is_some_and(char::is_ascii_digit) {
                n.push(take(&mut chars));
            }
            Tok::Num(n)
        } else if "(){}^,:+-/".contains(c) {
            Tok::Sym(take(&mut chars))
        } else {
            return Err(DslError {
                pos: start,
                kind: ErrorKind::Syntax { expected: vec!["a token".into()], found: format!("`{c}`") },
            });
        };
        out.push((tok, Span { start, end: Pos { line, col } }));
    }
    out.push((Tok::End, Span { start: Pos { line, col }, end: Pos { line, col } }));
    Ok(out)
}

struct Parser {
    toks: Vec<(Tok, Span)>,
    at: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.at].0
    }

    fn peek_at(&self, k: usize) -> &Tok {
        &self.toks[(self.at + k).min(self.toks.len() - 1)].0
    }

    fn span(&self) -> Span {
        self.toks[self.at].1
    }

    fn last_end(&self) -> Pos {
        self.toks[self.at.saturating_sub(1)].1.end
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.at].0.clone();
        if self.at + 1 < self.toks.len() {
            self.at += 1;
        }
        t
    }

    fn fail<T>(&self, expected: &[&str]) -> Result<T, DslError> {
        Err(DslError {
            pos: self.span().start,
            kind: ErrorKind::Syntax {
                expected: expected.iter().map(|s| s.to_string()).collect(),
                found: self.peek().to_string(),
            },
        })
    }

    fn sym(&mut self, c: char) -> Result<(), DslError> {
        if *self.peek() == Tok::Sym(c) {
            self.bump();
            Ok(())
        } else {
            self.fail(&[&format!("`{c}`")])
        }
    }

    fn at_separator(&self) -> bool {
        *self.peek() == Tok::Sym('(') && *self.peek_at(1) == Tok::Sym('+') && *self.peek_at(2) == Tok::Sym(')')
    }

    fn expr(&mut self) -> Result<Ast, DslError> {
        let start = self.span().start;
        let mut terms = vec![self.term()?];
        while self.at_separator() {
            self.bump();
            self.bump();
            self.bump();
            terms.push(self.term()?);
        }
        if terms.len() == 1 {
            return Ok(terms.pop().unwrap());
        }
        Ok(Ast::Sum { terms, span: Span { start, end: self.last_end() } })
    }

    fn term(&mut self) -> Result<Ast, DslError> {
        let start = self.span().start;
        let word = match self.peek() {
            Tok::Word(w) => w.clone(),
            _ => return self.fail(&["`ushift`", "`bshift`", "`diag`", "`adj`"]),
        };
        let atom = match word.as_str() {
            "adj" => {
                self.bump();
                self.sym('(')?;
                let inner = self.expr()?;
                self.sym(')')?;
                return Ok(Ast::Adj { inner: Box::new(inner), span: Span { start, end: self.last_end() } });
            }
            "ushift" | "bshift" => {
                self.bump();
                let args = if *self.peek() == Tok::Sym('(') && !self.at_separator() {
                    self.bump();
                    let a = self.gq()?;
                    self.sym(',')?;
                    let b = self.gq()?;
                    self.sym(')')?;
                    Some((a, b))
                } else {
                    None
                };
                if word == "ushift" {
                    AtomAst::UShift(args)
                } else {
                    AtomAst::BShift(args)
                }
            }
            "diag" => {
                self.bump();
                self.sym('{')?;
                let mut values = Vec::new();
                loop {
                    let vs = self.span().start;
                    let v = self.gq()?;
                    self.sym(':')?;
                    let m = self.mult()?;
                    values.push((v, m, Span { start: vs, end: self.last_end() }));
                    match self.peek() {
                        Tok::Sym(',') => {
                            self.bump();
                        }
                        Tok::Sym('}') => {
                            self.bump();
                            break;
                        }
                        _ => return self.fail(&["`,`", "`}`"]),
                    }
                }
                AtomAst::Diag(values)
            }
            _ => return self.fail(&["`ushift`", "`bshift`", "`diag`", "`adj`"]),
        };
        let mult = if *self.peek() == Tok::Sym('^') {
            self.bump();
            Some(self.mult()?)
        } else {
            None
        };
        Ok(Ast::Atom { atom, mult, span: Span { start, end: self.last_end() } })
    }

    fn mult(&mut self) -> Result<ExtNat, DslError> {
        match self.peek().clone() {
            Tok::Word(w) if w == "inf" => {
                self.bump();
                Ok(ExtNat::Inf)
            }
            Tok::Num(n) => match n.parse::<u64>() {
                Ok(k) => {
                    self.bump();
                    Ok(ExtNat::Fin(k))
                }
                Err(_) => Err(DslError {
                    pos: self.span().start,
                    kind: ErrorKind::Semantic(format!("multiplicity {n} is too large")),
                }),
            },
            _ => self.fail(&["a natural number", "`inf`"]),
        }
    }

    fn nat(&mut self) -> Result<String, DslError> {
        match self.peek().clone() {
            Tok::Num(n) => {
                self.bump();
                Ok(n)
            }
            _ => self.fail(&["a natural number"]),
        }
    }

    fn rat(&mut self) -> Result<Rat, DslError> {
        let neg = *self.peek() == Tok::Sym('-');
        if neg {
            self.bump();
        }
        let num = self.nat()?;
        let den = if *self.peek() == Tok::Sym('/') {
            self.bump();
            let pos = self.span().start;
            let d = self.nat()?;
            if d.bytes().all(|b| b == b'0') {
                return Err(DslError { pos, kind: ErrorKind::Semantic("zero denominator".into()) });
            }
            d
        } else {
            "1".to_string()
        };
        let sign = if neg { "-" } else { "" };
        Ok(format!("{sign}{num}/{den}").parse().expect("digits form a rational"))
    }

    fn imaginary_unit(&mut self) -> Result<(), DslError> {
        match self.peek() {
            Tok::Word(w) if w == "i" => {
                self.bump();
                Ok(())
            }
            _ => self.fail(&["`i`"]),
        }
    }

    fn gq(&mut self) -> Result<GQ, DslError> {
        let re = self.rat()?;
        if matches!(self.peek(), Tok::Word(w) if w == "i") {
            self.bump();
            return Ok(GQ::new(Rat::int(0), re));
        }
        let neg = match self.peek() {
            Tok::Sym('+') => false,
            Tok::Sym('-') => true,
            _ => return Ok(GQ::real(re)),
        };
        self.bump();
        let im = self.rat()?;
        self.imaginary_unit()?;
        let im = if neg { -&im } else { im };
        Ok(GQ::new(re, im))
    }

    fn finish(&self) -> Result<(), DslError> {
        if *self.peek() == Tok::End {
            Ok(())
        } else if self.at_separator() || *self.peek() == Tok::Sym('(') {
            self.fail(&["`(+)`", "end of input"])
        } else {
            self.fail(&["`(+)`", "`^`", "end of input"])
        }
    }
}

/// Parses operator-expression text into a syntax tree.
pub fn parse(src: &str) -> Result<Ast, DslError> {
    let mut p = Parser { toks: lex(src)?, at: 0 };
    let ast = p.expr()?;
    p.finish()?;
    Ok(ast)
}

/// Parses a Gaussian rational such as `1/2-3i`.
pub fn parse_gq(src: &str) -> Result<GQ, DslError> {
    let mut p = Parser { toks: lex(src)?, at: 0 };
    let v = p.gq()?;
    if *p.peek() != Tok::End {
        return p.fail(&["end of input"]);
    }
    Ok(v)
}

/// Parses a rational such as `-3/4`.
pub fn parse_rat(src: &str) -> Result<Rat, DslError> {
    let mut p = Parser { toks: lex(src)?, at: 0 };
    let v = p.rat()?;
    if *p.peek() != Tok::End {
        return p.fail(&["end of input"]);
    }
    Ok(v)
}

fn semantic(span: Span, e: impl fmt::Display) -> DslError {
    DslError { pos: span.start, kind: ErrorKind::Semantic(e.to_string()) }
}

fn atoms(ast: &Ast) -> Result<Vec<Atom>, DslError> {
    match ast {
        Ast::Sum { terms, .. } => {
            let mut out = Vec::new();
            for t in terms {
                out.extend(atoms(t)?);
            }
            Ok(out)
        }
        Ast::Adj { inner, .. } => Ok(atoms(inner)?.iter().map(Atom::adjoint).collect()),
        Ast::Atom { atom, mult, span } => {
            let affine = |args: &Option<(GQ, GQ)>| match args {
                None => Ok(Affine::unit()),
                Some((a, b)) => Affine::new(a.clone(), b.clone()).map_err(|e| semantic(*span, e)),
            };
            let kind = match atom {
                AtomAst::UShift(args) => AtomKind::UShift(affine(args)?),
                AtomAst::BShift(args) => AtomKind::BShift(affine(args)?),
                AtomAst::Diag(values) => {
                    for (i, (v, _, s)) in values.iter().enumerate() {
                        if values[..i].iter().any(|(w, _, _)| w == v) {
                            return Err(semantic(*s, format!("duplicate diag value {v}")));
                        }
                    }
                    AtomKind::Diag(values.iter().map(|(v, m, _)| Eigen { value: v.clone(), mult: *m }).collect())
                }
            };
            Ok(vec![Atom::new(kind, mult.unwrap_or(ExtNat::Fin(1))).map_err(|e| semantic(*span, e))?])
        }
    }
}

/// Builds the operator a syntax tree describes.
pub fn elaborate(ast: &Ast) -> Result<OperatorExpr, DslError> {
    OperatorExpr::new(atoms(ast)?).map_err(|e| semantic(ast.span(), e))
}

pub fn parse_expr(src: &str) -> Result<OperatorExpr, DslError> {
    elaborate(&parse(src)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn examples() {
        let e = parse_expr("ushift (+) adj(ushift)").unwrap();
        assert_eq!(e, OperatorExpr::new(vec![Atom::ushift(), Atom::ushift_adj()]).unwrap());
        let e = parse_expr("diag{1:inf, -1/2:3}").unwrap();
        let want = Atom::diag(&[(GQ::one(), ExtNat::Inf), (GQ::real(Rat::new(-1, 2)), ExtNat::Fin(3))]).unwrap();
        assert_eq!(e.atoms(), &[want]);
        let e = parse_expr("ushift(2, 3)^inf").unwrap();
        assert_eq!(e.atoms()[0].mult, ExtNat::Inf);
        assert_eq!(e.atoms()[0].affine().unwrap(), &Affine::new(GQ::int(2, 0), GQ::int(3, 0)).unwrap());
    }

    #[test]
    fn gaussian_literals() {
        assert_eq!(parse_gq("1/2-3i").unwrap(), GQ::new(Rat::new(1, 2), Rat::int(-3)));
        assert_eq!(parse_gq("-2i").unwrap(), GQ::int(0, -2));
        assert_eq!(parse_gq(" 3 + 1/4 i ").unwrap(), GQ::new(Rat::int(3), Rat::new(1, 4)));
        assert!(parse_gq("i").is_err());
        assert!(parse_gq("1/0").is_err());
    }

    #[test]
    fn positions() {
        let e = parse("ushift (+)\n  bshift(1, )").unwrap_err();
        assert_eq!(e.pos, Pos { line: 2, col: 13 });
        assert!(matches!(e.kind, ErrorKind::Syntax { .. }));
        let e = parse_expr("ushift(1, 0)").unwrap_err();
        assert!(matches!(e.kind, ErrorKind::Semantic(_)));
        let e = parse_expr("ushift (+) diag{1:1, 1:2}").unwrap_err();
        assert_eq!(e.pos, Pos { line: 1, col: 22 });
        assert!(parse_expr("diag{1:2}").is_err());
        assert!(parse("ushift ushift").is_err());
        assert!(parse("ushift^0").is_ok() && parse_expr("ushift^0").is_err());
    }
}
