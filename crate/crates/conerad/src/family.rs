//! Text format for finite families of cone maps.
//!
//! ```text
//! # comments run to end of line
//! dim 2
//! map f = [ x1 + min(x1, x2) ; x2 ]
//! map g = [ 0.9*max(x1, x2) ; geo(0.5: x1, 0.5: x2) ]
//! ```
//!
//! Grammar:
//!
//! ```text
//! family := "dim" INT mapdef+
//! mapdef := "map" NAME "=" "[" expr (";" expr)* "]"
//! expr   := term ("+" term)*
//! term   := NUMBER "*" factor | NUMBER | factor
//! factor := VAR | "max" "(" expr ("," expr)* ")"
//!               | "min" "(" expr ("," expr)* ")"
//!               | "geo" "(" NUMBER ":" expr ("," NUMBER ":" expr)* ")"
//!               | "(" expr ")"
//! ```
//!
//! `VAR` is `x1 .. xn`. A bare `NUMBER` term must be `0` (any other constant
//! would break homogeneity), coefficients must be nonnegative, and `geo`
//! weights must be positive and sum to 1 within 1e-12. Coefficients written
//! against `max`/`min`/`geo`/parenthesized expressions are distributed into
//! the tree at parse time, so the in-memory form has coefficients only on
//! variables.
//!
//! Errors carry 1-based line and column and display as `line:col: message`.
//! [`format_family`] emits a canonical form that parses back to a structurally
//! identical family.

use crate::expr::{Classification, EvalError, Expr, ExprError, MapDef, SupportSet};
use std::fmt::Write as _;
use thiserror::Error;

/// Parse or validation failure for the family text format.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum FamilyError {
    /// The text does not match the grammar.
    #[error("{line}:{column}: {message}")]
    Parse { line: usize, column: usize, message: String },
    /// The text matches the grammar but violates a semantic rule
    /// (bad dimension, negative coefficient, out-of-range variable, ...).
    #[error("{line}:{column}: {message}")]
    Semantic { line: usize, column: usize, message: String },
    /// Programmatic construction with inconsistent pieces; not produced by
    /// the parser.
    #[error("{message}")]
    Invalid { message: String },
}

/// A finite family of same-dimension cone maps, the unit of analysis for
/// everything in this crate.
#[derive(Clone, Debug, PartialEq)]
pub struct Family {
    n: usize,
    maps: Vec<MapDef>,
}

impl Family {
    pub fn new(n: usize, maps: Vec<MapDef>) -> Result<Family, FamilyError> {
        let invalid = |message: String| FamilyError::Invalid { message };
        if n == 0 || n > SupportSet::MAX_DIM {
            return Err(invalid(format!(
                "dimension must be between 1 and {}, got {n}",
                SupportSet::MAX_DIM
            )));
        }
        if maps.is_empty() {
            return Err(invalid("family defines no maps".into()));
        }
        for m in &maps {
            if m.dim() != n {
                return Err(invalid(format!(
                    "map '{}' has {} coordinates, family dimension is {n}",
                    m.name,
                    m.dim()
                )));
            }
            for e in &m.coords {
                if e.max_var() > n {
                    return Err(invalid(format!(
                        "map '{}' uses x{} but dimension is {n}",
                        m.name,
                        e.max_var()
                    )));
                }
            }
        }
        for (i, m) in maps.iter().enumerate() {
            if maps[..i].iter().any(|p| p.name == m.name) {
                return Err(invalid(format!("duplicate map name '{}'", m.name)));
            }
        }
        Ok(Family { n, maps })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn maps(&self) -> &[MapDef] {
        &self.maps
    }

    pub fn map(&self, idx: usize) -> &MapDef {
        &self.maps[idx]
    }

    pub fn map_index(&self, name: &str) -> Option<usize> {
        self.maps.iter().position(|m| m.name == name)
    }

    /// Apply a word of map indices left to right: `apply(&[a, b], x)` is
    /// `f_b(f_a(x))`, matching trajectory order (the letter chosen at step k
    /// is applied at step k).
    pub fn apply(&self, word: &[u16], x: &[f64]) -> Result<Vec<f64>, EvalError> {
        let mut v = x.to_vec();
        for &a in word {
            v = self.maps[a as usize].eval(&v)?;
        }
        Ok(v)
    }

    /// Word rendered as space-separated map names in application order.
    pub fn word_names(&self, word: &[u16]) -> String {
        word.iter()
            .map(|&a| self.maps[a as usize].name.as_str())
            .collect::<Vec<_>>()
            .join(" ")
    }

    /// The family `{c * f : f in self}`.
    pub fn scaled(&self, c: f64) -> Result<Family, ExprError> {
        Ok(Family {
            n: self.n,
            maps: self
                .maps
                .iter()
                .map(|m| m.scaled(c))
                .collect::<Result<_, _>>()?,
        })
    }

    /// Combined classification: certified subadditive only if every member is.
    pub fn classify(&self) -> Classification {
        let per_map: Vec<_> = self.maps.iter().map(MapDef::classify).collect();
        Classification {
            subadditive_certified: per_map.iter().all(|c| c.subadditive_certified),
            contains_min: per_map.iter().any(|c| c.contains_min),
            contains_geo: per_map.iter().any(|c| c.contains_geo),
        }
    }
}

// ---------------------------------------------------------------------------
// Lexer
// ---------------------------------------------------------------------------

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Var(usize),
    Punct(char),
}

#[derive(Clone, Debug)]
struct Token {
    tok: Tok,
    line: usize,
    col: usize,
}

fn describe(tok: &Tok) -> String {
    match tok {
        Tok::Num(v) => format!("number {v}"),
        Tok::Ident(s) => format!("'{s}'"),
        Tok::Var(j) => format!("'x{j}'"),
        Tok::Punct(c) => format!("'{c}'"),
    }
}

fn lex(src: &str) -> Result<(Vec<Token>, usize, usize), FamilyError> {
    let mut toks = Vec::new();
    let mut line = 1usize;
    let mut col = 1usize;
    let mut it = src.chars().peekable();

    macro_rules! bump {
        () => {{
            let c = it.next().unwrap();
            if c == '\n' {
                line += 1;
                col = 1;
            } else {
                col += 1;
            }
            c
        }};
    }

    while let Some(&c) = it.peek() {
        if c.is_whitespace() {
            bump!();
        } else if c == '#' {
            while let Some(&c) = it.peek() {
                if c == '\n' {
                    break;
                }
                bump!();
            }
        } else if matches!(c, '=' | '[' | ']' | '(' | ')' | ';' | ',' | ':' | '+' | '*') {
            toks.push(Token { tok: Tok::Punct(c), line, col });
            bump!();
        } else if c.is_ascii_digit() || c == '-' {
            let (tl, tc) = (line, col);
            let mut text = String::new();
            if c == '-' {
                text.push(bump!());
                if !matches!(it.peek(), Some(d) if d.is_ascii_digit()) {
                    return Err(FamilyError::Parse {
                        line: tl,
                        column: tc,
                        message: "expected digits after '-'".into(),
                    });
                }
            }
            while matches!(it.peek(), Some(d) if d.is_ascii_digit()) {
                text.push(bump!());
            }
            if it.peek() == Some(&'.') {
                text.push(bump!());
                while matches!(it.peek(), Some(d) if d.is_ascii_digit()) {
                    text.push(bump!());
                }
            }
            if matches!(it.peek(), Some('e') | Some('E')) {
                text.push(bump!());
                if matches!(it.peek(), Some('+') | Some('-')) {
                    text.push(bump!());
                }
                if !matches!(it.peek(), Some(d) if d.is_ascii_digit()) {
                    return Err(FamilyError::Parse {
                        line: tl,
                        column: tc,
                        message: format!("malformed number literal '{text}'"),
                    });
                }
                while matches!(it.peek(), Some(d) if d.is_ascii_digit()) {
                    text.push(bump!());
                }
            }
            let v: f64 = text.parse().map_err(|_| FamilyError::Parse {
                line: tl,
                column: tc,
                message: format!("malformed number literal '{text}'"),
            })?;
            toks.push(Token { tok: Tok::Num(v), line: tl, col: tc });
        } else if c.is_ascii_alphabetic() || c == '_' {
            let (tl, tc) = (line, col);
            let mut text = String::new();
            while matches!(it.peek(), Some(&d) if d.is_ascii_alphanumeric() || d == '_') {
                text.push(bump!());
            }
            let tok = if text.len() > 1
                && text.starts_with('x')
                && text[1..].chars().all(|d| d.is_ascii_digit())
            {
                let j: usize = text[1..].parse().map_err(|_| FamilyError::Semantic {
                    line: tl,
                    column: tc,
                    message: format!("variable index in '{text}' is out of range"),
                })?;
                Tok::Var(j)
            } else {
                Tok::Ident(text)
            };
            toks.push(Token { tok, line: tl, col: tc });
        } else {
            return Err(FamilyError::Parse {
                line,
                column: col,
                message: format!("unexpected character '{c}'"),
            });
        }
    }
    Ok((toks, line, col))
}

// ---------------------------------------------------------------------------
// Parser
// ---------------------------------------------------------------------------

const RESERVED: [&str; 5] = ["dim", "map", "max", "min", "geo"];

struct Parser {
    toks: Vec<Token>,
    pos: usize,
    eof_line: usize,
    eof_col: usize,
    n: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Token> {
        self.toks.get(self.pos)
    }

    fn next(&mut self) -> Option<Token> {
        let t = self.toks.get(self.pos).cloned();
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn here(&self) -> (usize, usize) {
        self.peek()
            .map(|t| (t.line, t.col))
            .unwrap_or((self.eof_line, self.eof_col))
    }

    fn parse_err(&self, at: (usize, usize), message: impl Into<String>) -> FamilyError {
        FamilyError::Parse { line: at.0, column: at.1, message: message.into() }
    }

    fn sem_err(&self, at: (usize, usize), message: impl Into<String>) -> FamilyError {
        FamilyError::Semantic { line: at.0, column: at.1, message: message.into() }
    }

    fn expect_punct(&mut self, c: char) -> Result<Token, FamilyError> {
        let at = self.here();
        match self.next() {
            Some(t) if t.tok == Tok::Punct(c) => Ok(t),
            Some(t) => Err(self.parse_err(
                (t.line, t.col),
                format!("expected '{c}', found {}", describe(&t.tok)),
            )),
            None => Err(self.parse_err(at, format!("expected '{c}', found end of input"))),
        }
    }

    fn expect_keyword(&mut self, kw: &str) -> Result<(), FamilyError> {
        let at = self.here();
        match self.next() {
            Some(t) if t.tok == Tok::Ident(kw.to_string()) => Ok(()),
            Some(t) => Err(self.parse_err(
                (t.line, t.col),
                format!("expected '{kw}', found {}", describe(&t.tok)),
            )),
            None => Err(self.parse_err(at, format!("expected '{kw}', found end of input"))),
        }
    }

    fn expect_number(&mut self, what: &str) -> Result<(f64, usize, usize), FamilyError> {
        let at = self.here();
        match self.next() {
            Some(Token { tok: Tok::Num(v), line, col }) => Ok((v, line, col)),
            Some(t) => Err(self.parse_err(
                (t.line, t.col),
                format!("expected {what}, found {}", describe(&t.tok)),
            )),
            None => Err(self.parse_err(at, format!("expected {what}, found end of input"))),
        }
    }

    fn family(&mut self) -> Result<Family, FamilyError> {
        self.expect_keyword("dim")?;
        let (v, dl, dc) = self.expect_number("dimension")?;
        if v.fract() != 0.0 || v < 1.0 || v > SupportSet::MAX_DIM as f64 {
            return Err(self.sem_err(
                (dl, dc),
                format!("dimension must be an integer between 1 and {}", SupportSet::MAX_DIM),
            ));
        }
        self.n = v as usize;

        let mut maps: Vec<MapDef> = Vec::new();
        while self.peek().is_some() {
            self.expect_keyword("map")?;
            let at = self.here();
            let (name, nl, nc) = match self.next() {
                Some(Token { tok: Tok::Ident(s), line, col }) => (s, line, col),
                Some(t) => {
                    return Err(self.parse_err(
                        (t.line, t.col),
                        format!("expected map name, found {}", describe(&t.tok)),
                    ))
                }
                None => return Err(self.parse_err(at, "expected map name, found end of input")),
            };
            if RESERVED.contains(&name.as_str()) {
                return Err(
                    self.sem_err((nl, nc), format!("'{name}' is reserved and cannot name a map"))
                );
            }
            if maps.iter().any(|m| m.name == name) {
                return Err(self.sem_err((nl, nc), format!("duplicate map name '{name}'")));
            }
            self.expect_punct('=')?;
            let open = self.expect_punct('[')?;
            let mut coord_list = vec![self.expr()?];
            while matches!(self.peek(), Some(t) if t.tok == Tok::Punct(';')) {
                self.next();
                coord_list.push(self.expr()?);
            }
            self.expect_punct(']')?;
            if coord_list.len() != self.n {
                return Err(self.sem_err(
                    (open.line, open.col),
                    format!(
                        "map '{name}' has {} coordinates, family dimension is {}",
                        coord_list.len(),
                        self.n
                    ),
                ));
            }
            maps.push(MapDef::new(name, coord_list));
        }
        if maps.is_empty() {
            return Err(self.sem_err((self.eof_line, self.eof_col), "family defines no maps"));
        }
        Ok(Family { n: self.n, maps })
    }

    fn expr(&mut self) -> Result<Expr, FamilyError> {
        let mut terms = vec![self.term()?];
        while matches!(self.peek(), Some(t) if t.tok == Tok::Punct('+')) {
            self.next();
            terms.push(self.term()?);
        }
        Ok(Expr::sum(terms))
    }

    fn term(&mut self) -> Result<Expr, FamilyError> {
        if let Some(Token { tok: Tok::Num(_), .. }) = self.peek() {
            let (v, l, c) = self.expect_number("number")?;
            if matches!(self.peek(), Some(t) if t.tok == Tok::Punct('*')) {
                self.next();
                let f = self.factor()?;
                if v < 0.0 {
                    return Err(
                        self.sem_err((l, c), format!("coefficient must be nonnegative, got {v}"))
                    );
                }
                return f.scale(v).map_err(|e| self.sem_err((l, c), e.to_string()));
            }
            return if v == 0.0 {
                Ok(Expr::Zero)
            } else if v < 0.0 {
                Err(self.sem_err((l, c), format!("negative constant {v} is not allowed")))
            } else {
                Err(self.sem_err(
                    (l, c),
                    format!("constant term {v} breaks homogeneity (only 0 is allowed)"),
                ))
            };
        }
        self.factor()
    }

    fn factor(&mut self) -> Result<Expr, FamilyError> {
        let at = self.here();
        match self.next() {
            Some(Token { tok: Tok::Var(j), line, col }) => {
                if j == 0 {
                    return Err(self.sem_err(
                        (line, col),
                        "variable index must be at least 1 (x0 is invalid)",
                    ));
                }
                if j > self.n {
                    return Err(self.sem_err(
                        (line, col),
                        format!("variable x{j} out of range for dimension {}", self.n),
                    ));
                }
                Ok(Expr::Atom(1.0, j))
            }
            Some(Token { tok: Tok::Ident(s), line, col }) if s == "max" || s == "min" => {
                self.expect_punct('(')?;
                let mut args = vec![self.expr()?];
                while matches!(self.peek(), Some(t) if t.tok == Tok::Punct(',')) {
                    self.next();
                    args.push(self.expr()?);
                }
                self.expect_punct(')')?;
                let _ = (line, col);
                Ok(if s == "max" { Expr::max(args) } else { Expr::min(args) })
            }
            Some(Token { tok: Tok::Ident(s), line, col }) if s == "geo" => {
                self.expect_punct('(')?;
                let mut parts = Vec::new();
                loop {
                    let (w, wl, wc) = self.expect_number("geo weight")?;
                    self.expect_punct(':')?;
                    let e = self.expr()?;
                    if !w.is_finite() || w <= 0.0 {
                        return Err(self.sem_err(
                            (wl, wc),
                            format!("geometric-mean weight must be positive, got {w}"),
                        ));
                    }
                    parts.push((w, e));
                    if matches!(self.peek(), Some(t) if t.tok == Tok::Punct(',')) {
                        self.next();
                    } else {
                        break;
                    }
                }
                self.expect_punct(')')?;
                Expr::geo(parts).map_err(|e| self.sem_err((line, col), e.to_string()))
            }
            Some(Token { tok: Tok::Punct('('), .. }) => {
                let e = self.expr()?;
                self.expect_punct(')')?;
                Ok(e)
            }
            Some(t) => Err(self.parse_err(
                (t.line, t.col),
                format!("expected expression, found {}", describe(&t.tok)),
            )),
            None => Err(self.parse_err(at, "expected expression, found end of input")),
        }
    }
}

/// Parse the family text format. See the module docs for the grammar.
pub fn parse_family(src: &str) -> Result<Family, FamilyError> {
    let (toks, eof_line, eof_col) = lex(src)?;
    let mut p = Parser { toks, pos: 0, eof_line, eof_col, n: 0 };
    p.family()
}

// ---------------------------------------------------------------------------
// Formatter
// ---------------------------------------------------------------------------

fn format_expr(e: &Expr, out: &mut String) {
    match e {
        Expr::Zero => out.push('0'),
        Expr::Atom(c, j) => {
            if *c == 1.0 {
                let _ = write!(out, "x{j}");
            } else {
                let _ = write!(out, "{c}*x{j}");
            }
        }
        Expr::Sum(ts) => {
            for (i, t) in ts.iter().enumerate() {
                if i > 0 {
                    out.push_str(" + ");
                }
                format_expr(t, out);
            }
        }
        Expr::Max(ts) | Expr::Min(ts) => {
            out.push_str(if matches!(e, Expr::Max(_)) { "max(" } else { "min(" });
            for (i, t) in ts.iter().enumerate() {
                if i > 0 {
                    out.push_str(", ");
                }
                format_expr(t, out);
            }
            out.push(')');
        }
        Expr::Geo(ps) => {
            out.push_str("geo(");
            for (i, (w, t)) in ps.iter().enumerate() {
                if i > 0 {
                    out.push_str(", ");
                }
                let _ = write!(out, "{w}: ");
                format_expr(t, out);
            }
            out.push(')');
        }
    }
}

/// Canonical text for a family. Parsing the output reproduces the family
/// exactly (structure and floating-point values), so `parse . format` is the
/// identity on parsed families.
pub fn format_family(fam: &Family) -> String {
    let mut out = format!("dim {}\n", fam.dim());
    for m in fam.maps() {
        let _ = write!(out, "map {} = [ ", m.name);
        for (i, e) in m.coords.iter().enumerate() {
            if i > 0 {
                out.push_str(" ; ");
            }
            format_expr(e, &mut out);
        }
        out.push_str(" ]\n");
    }
    out
}
