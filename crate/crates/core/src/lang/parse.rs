//! Concrete syntax. Sugar is expanded here, so the returned [`Term`] is
//! always in the core calculus.

use std::fmt;

use crate::lang::syntax::{Term, Type, Value};
use crate::rational::{parse_rational, Rational};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Pos {
    pub line: usize,
    pub col: usize,
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("syntax error at {pos}: {message}")]
pub struct ParseError {
    pub pos: Pos,
    pub message: String,
}

const KEYWORDS: &[&str] = &[
    "let", "in", "case", "of", "inl", "inr", "absurd", "new", "edge", "bernoulli", "true", "false",
    "if", "then", "else", "not", "fst", "snd", "subm", "unit", "void", "bool", "vertex",
];

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Keyword(&'static str),
    Number(String),
    Sym(&'static str),
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Ident(s) => write!(f, "identifier `{s}`"),
            Tok::Keyword(k) => write!(f, "`{k}`"),
            Tok::Number(n) => write!(f, "number `{n}`"),
            Tok::Sym(s) => write!(f, "`{s}`"),
            Tok::Eof => write!(f, "end of input"),
        }
    }
}

const SYMBOLS: &[&str] = &[
    "->", "(", ")", "{", "}", "[", "]", ",", ";", "=", "&", "|", "*", "+", "/", "#",
];

fn lex(src: &str) -> Result<Vec<(Tok, Pos)>, ParseError> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);
    let advance = |i: &mut usize, line: &mut usize, col: &mut usize, c: char| {
        *i += 1;
        if c == '\n' {
            *line += 1;
            *col = 1;
        } else {
            *col += 1;
        }
    };
    while i < chars.len() {
        let c = chars[i];
        let pos = Pos { line, col };
        if c.is_whitespace() {
            advance(&mut i, &mut line, &mut col, c);
            continue;
        }
        if c == '-' && chars.get(i + 1) == Some(&'-') {
            while i < chars.len() && chars[i] != '\n' {
                let ch = chars[i];
                advance(&mut i, &mut line, &mut col, ch);
            }
            continue;
        }
        if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len()
                && (chars[i].is_ascii_alphanumeric() || chars[i] == '_' || chars[i] == '\'')
            {
                let ch = chars[i];
                advance(&mut i, &mut line, &mut col, ch);
            }
            let word: String = chars[start..i].iter().collect();
            let tok = match KEYWORDS.iter().find(|k| **k == word) {
                Some(k) => Tok::Keyword(k),
                None => Tok::Ident(word),
            };
            out.push((tok, pos));
            continue;
        }
        if c.is_ascii_digit() || (c == '.' && chars.get(i + 1).is_some_and(|d| d.is_ascii_digit())) {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                let ch = chars[i];
                advance(&mut i, &mut line, &mut col, ch);
            }
            out.push((Tok::Number(chars[start..i].iter().collect()), pos));
            continue;
        }
        let rest: String = chars[i..chars.len().min(i + 2)].iter().collect();
        if let Some(sym) = SYMBOLS.iter().find(|s| rest.starts_with(**s)) {
            for _ in 0..sym.len() {
                let ch = chars[i];
                advance(&mut i, &mut line, &mut col, ch);
            }
            out.push((Tok::Sym(sym), pos));
            continue;
        }
        return Err(ParseError {
            pos,
            message: format!("unexpected character `{c}`"),
        });
    }
    out.push((Tok::Eof, Pos { line, col }));
    Ok(out)
}

struct Parser {
    toks: Vec<(Tok, Pos)>,
    at: usize,
}

type PResult<T> = Result<T, ParseError>;

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.at].0
    }

    fn pos(&self) -> Pos {
        self.toks[self.at].1
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.at].0.clone();
        if self.at + 1 < self.toks.len() {
            self.at += 1;
        }
        t
    }

    fn error<T>(&self, message: impl Into<String>) -> PResult<T> {
        Err(ParseError {
            pos: self.pos(),
            message: message.into(),
        })
    }

    fn eat_sym(&mut self, s: &str) -> bool {
        if matches!(self.peek(), Tok::Sym(x) if *x == s) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn eat_kw(&mut self, k: &str) -> bool {
        if matches!(self.peek(), Tok::Keyword(x) if *x == k) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn expect_sym(&mut self, s: &str) -> PResult<()> {
        if self.eat_sym(s) {
            Ok(())
        } else {
            self.error(format!("expected `{s}`, found {}", self.peek()))
        }
    }

    fn expect_kw(&mut self, k: &str) -> PResult<()> {
        if self.eat_kw(k) {
            Ok(())
        } else {
            self.error(format!("expected `{k}`, found {}", self.peek()))
        }
    }

    fn binder(&mut self) -> PResult<String> {
        match self.peek().clone() {
            Tok::Ident(x) => {
                self.bump();
                Ok(x)
            }
            other => self.error(format!("expected a variable name, found {other}")),
        }
    }

    fn usize_lit(&mut self) -> PResult<usize> {
        match self.peek().clone() {
            Tok::Number(n) => match n.parse::<usize>() {
                Ok(v) => {
                    self.bump();
                    Ok(v)
                }
                Err(_) => self.error(format!("expected a natural number, found `{n}`")),
            },
            other => self.error(format!("expected a natural number, found {other}")),
        }
    }

    fn rational_lit(&mut self) -> PResult<Rational> {
        let pos = self.pos();
        let num = match self.bump() {
            Tok::Number(n) => n,
            other => {
                return Err(ParseError {
                    pos,
                    message: format!("expected a rational literal, found {other}"),
                })
            }
        };
        let text = if self.eat_sym("/") {
            match self.bump() {
                Tok::Number(d) => format!("{num}/{d}"),
                other => {
                    return Err(ParseError {
                        pos,
                        message: format!("expected a denominator, found {other}"),
                    })
                }
            }
        } else {
            num
        };
        let q = parse_rational(&text).map_err(|e| ParseError {
            pos,
            message: e.to_string(),
        })?;
        if !crate::rational::is_probability(&q) {
            return Err(ParseError {
                pos,
                message: format!("bernoulli parameter {text} is outside [0, 1]"),
            });
        }
        Ok(q)
    }

    fn term(&mut self) -> PResult<Term> {
        let mut lhs = self.and_term()?;
        while self.eat_sym("|") {
            let rhs = self.and_term()?;
            lhs = Term::or(lhs, rhs);
        }
        Ok(lhs)
    }

    fn and_term(&mut self) -> PResult<Term> {
        let mut lhs = self.unary()?;
        while self.eat_sym("&") {
            let rhs = self.unary()?;
            lhs = Term::and(lhs, rhs);
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> PResult<Term> {
        let kw = match self.peek() {
            Tok::Keyword(k) => *k,
            _ => return self.atom(),
        };
        match kw {
            "not" | "fst" | "snd" | "inl" | "inr" | "absurd" => {
                self.bump();
                let t = self.unary()?;
                Ok(match kw {
                    "not" => Term::not(t),
                    "fst" => Term::fst(t),
                    "snd" => Term::snd(t),
                    "inl" => Term::inl(t),
                    "inr" => Term::inr(t),
                    _ => Term::absurd(t),
                })
            }
            "let" => {
                self.bump();
                let x = self.binder()?;
                self.expect_sym("=")?;
                let t = self.term()?;
                self.expect_kw("in")?;
                let u = self.term()?;
                Ok(Term::let_in(&x, t, u))
            }
            "if" => {
                self.bump();
                let c = self.term()?;
                self.expect_kw("then")?;
                let t = self.term()?;
                self.expect_kw("else")?;
                let e = self.term()?;
                Ok(Term::ite(c, t, e))
            }
            "case" => {
                self.bump();
                let s = self.term()?;
                self.expect_kw("of")?;
                self.expect_sym("{")?;
                self.expect_kw("inl")?;
                let x1 = self.binder()?;
                self.expect_sym("->")?;
                let u1 = self.term()?;
                self.expect_sym(";")?;
                self.expect_kw("inr")?;
                let x2 = self.binder()?;
                self.expect_sym("->")?;
                let u2 = self.term()?;
                self.eat_sym(";");
                self.expect_sym("}")?;
                Ok(Term::case(s, &x1, u1, &x2, u2))
            }
            _ => self.atom(),
        }
    }

    fn atom(&mut self) -> PResult<Term> {
        let pos = self.pos();
        match self.bump() {
            Tok::Ident(x) if x == "_" => Err(ParseError {
                pos,
                message: "`_` can only appear as a binder".into(),
            }),
            Tok::Ident(x) => Ok(Term::Var(x)),
            Tok::Keyword("true") => Ok(Term::tt()),
            Tok::Keyword("false") => Ok(Term::ff()),
            Tok::Keyword("new") => {
                self.expect_sym("(")?;
                if self.eat_sym(")") {
                    return Ok(Term::new_vertex());
                }
                let arg = self.term()?;
                self.expect_sym(")")?;
                Ok(Term::App(crate::lang::Constant::New, Box::new(arg)))
            }
            Tok::Keyword("edge") => {
                self.expect_sym("(")?;
                let a = self.term()?;
                let arg = if self.eat_sym(",") {
                    let b = self.term()?;
                    Term::pair(a, b)
                } else {
                    a
                };
                self.expect_sym(")")?;
                Ok(Term::App(crate::lang::Constant::Edge, Box::new(arg)))
            }
            Tok::Keyword("bernoulli") => {
                self.expect_sym("(")?;
                let q = self.rational_lit()?;
                let arg = if self.eat_sym(",") { self.term()? } else { Term::Unit };
                self.expect_sym(")")?;
                Ok(Term::App(crate::lang::Constant::Bernoulli(q), Box::new(arg)))
            }
            Tok::Keyword("subm") => self.subm(),
            Tok::Sym("(") => {
                if self.eat_sym(")") {
                    return Ok(Term::Unit);
                }
                let first = self.term()?;
                let mut items = vec![first];
                while self.eat_sym(",") {
                    items.push(self.term()?);
                }
                self.expect_sym(")")?;
                Ok(Term::tuple(items))
            }
            Tok::Sym("[") => self.matrix_rest(pos),
            other => Err(ParseError {
                pos,
                message: format!("expected a term, found {other}"),
            }),
        }
    }

    // `[[a, b], [c, d]]`, the opening bracket already consumed.
    fn matrix_rest(&mut self, pos: Pos) -> PResult<Term> {
        let mut rows = Vec::new();
        loop {
            self.expect_sym("[")?;
            let mut row = vec![self.term()?];
            while self.eat_sym(",") {
                row.push(self.term()?);
            }
            self.expect_sym("]")?;
            rows.push(row);
            if !self.eat_sym(",") {
                break;
            }
        }
        self.expect_sym("]")?;
        let width = rows[0].len();
        if rows.iter().any(|r| r.len() != width) {
            return Err(ParseError {
                pos,
                message: "matrix rows have different lengths".into(),
            });
        }
        Ok(Term::matrix(rows))
    }

    // `subm[n; i1, ..., ik](t)` with 1-based indices into an n×n matrix.
    fn subm(&mut self) -> PResult<Term> {
        let pos = self.pos();
        self.expect_sym("[")?;
        let n = self.usize_lit()?;
        self.expect_sym(";")?;
        let mut idx = vec![self.usize_lit()?];
        while self.eat_sym(",") {
            idx.push(self.usize_lit()?);
        }
        self.expect_sym("]")?;
        self.expect_sym("(")?;
        let t = self.term()?;
        self.expect_sym(")")?;
        if n == 0 || idx.iter().any(|&i| i == 0 || i > n) {
            return Err(ParseError {
                pos,
                message: format!("subm indices must lie in 1..={n}"),
            });
        }
        let idx: Vec<usize> = idx.into_iter().map(|i| i - 1).collect();
        Ok(submatrix(t, n, &idx))
    }

    fn ty(&mut self) -> PResult<Type> {
        let lhs = self.ty_prod()?;
        if self.eat_sym("+") {
            let rhs = self.ty()?;
            return Ok(Type::sum(lhs, rhs));
        }
        Ok(lhs)
    }

    fn ty_prod(&mut self) -> PResult<Type> {
        let lhs = self.ty_atom()?;
        if self.eat_sym("*") {
            let rhs = self.ty_prod()?;
            return Ok(Type::prod(lhs, rhs));
        }
        Ok(lhs)
    }

    fn ty_atom(&mut self) -> PResult<Type> {
        let pos = self.pos();
        match self.bump() {
            Tok::Keyword("unit") => Ok(Type::Unit),
            Tok::Keyword("void") => Ok(Type::Empty),
            Tok::Keyword("bool") => Ok(Type::bool()),
            Tok::Keyword("vertex") => Ok(Type::Vertex),
            Tok::Sym("(") => {
                let t = self.ty()?;
                self.expect_sym(")")?;
                Ok(t)
            }
            other => Err(ParseError {
                pos,
                message: format!("expected a type, found {other}"),
            }),
        }
    }

    fn value(&mut self) -> PResult<Value> {
        let pos = self.pos();
        match self.bump() {
            Tok::Keyword("true") => Ok(Value::bool(true)),
            Tok::Keyword("false") => Ok(Value::bool(false)),
            Tok::Keyword("inl") => Ok(Value::Inl(Box::new(self.value()?))),
            Tok::Keyword("inr") => Ok(Value::Inr(Box::new(self.value()?))),
            Tok::Sym("#") => Ok(Value::Vertex(self.usize_lit()? as u32)),
            Tok::Sym("(") => {
                if self.eat_sym(")") {
                    return Ok(Value::Unit);
                }
                let mut items = vec![self.value()?];
                while self.eat_sym(",") {
                    items.push(self.value()?);
                }
                self.expect_sym(")")?;
                Ok(Value::tuple(items))
            }
            other => Err(ParseError {
                pos,
                message: format!("expected a value, found {other}"),
            }),
        }
    }

    fn finish<T>(&mut self, out: T) -> PResult<T> {
        match self.peek() {
            Tok::Eof => Ok(out),
            other => self.error(format!("unexpected {other} after the end of the term")),
        }
    }
}

/// Expands `subm_I(t)`: binds the matrix once and rebuilds the rows and
/// columns listed in `indices` (0-based) by projection.
pub fn submatrix(t: Term, n: usize, indices: &[usize]) -> Term {
    const M: &str = "_subm";
    let rows = indices
        .iter()
        .map(|&i| {
            indices
                .iter()
                .map(|&j| {
                    let row = Term::tuple_proj(Term::var(M), i, n);
                    Term::tuple_proj(row, j, n)
                })
                .collect()
        })
        .collect();
    Term::let_in(M, t, Term::matrix(rows))
}

fn parser(src: &str) -> PResult<Parser> {
    Ok(Parser {
        toks: lex(src)?,
        at: 0,
    })
}

pub fn parse(src: &str) -> PResult<Term> {
    let mut p = parser(src)?;
    let t = p.term()?;
    p.finish(t)
}

pub fn parse_type(src: &str) -> PResult<Type> {
    let mut p = parser(src)?;
    let t = p.ty()?;
    p.finish(t)
}

/// Parses the canonical text of a value (as printed by `Value`'s `Display`).
pub fn parse_value(src: &str) -> PResult<Value> {
    let mut p = parser(src)?;
    let v = p.value()?;
    p.finish(v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lang::Constant;
    use crate::rational::ratio;

    #[test]
    fn true_is_left_injection_of_unit() {
        assert_eq!(parse("true").unwrap(), Term::inl(Term::Unit));
        assert_eq!(parse("false").unwrap(), Term::inr(Term::Unit));
    }

    #[test]
    fn let_new_edge() {
        let t = parse("let a = new() in edge(a,a)").unwrap();
        assert_eq!(
            t,
            Term::let_in(
                "a",
                Term::App(Constant::New, Box::new(Term::Unit)),
                Term::App(
                    Constant::Edge,
                    Box::new(Term::pair(Term::var("a"), Term::var("a")))
                )
            )
        );
    }

    #[test]
    fn conjunction_of_coins_desugars_to_case() {
        let t = parse("bernoulli(1/2) & bernoulli(1/2)").unwrap();
        let coin = Term::bernoulli(ratio(1, 2));
        assert_eq!(t, Term::case(coin.clone(), "_", coin, "_", Term::ff()));
    }

    #[test]
    fn decimal_bernoulli_is_exact() {
        let t = parse("bernoulli(0.25)").unwrap();
        assert_eq!(t, Term::bernoulli(ratio(1, 4)));
        assert!(parse("bernoulli(3/2)").is_err());
    }

    #[test]
    fn operator_precedence() {
        // `|` binds looser than `&`, `not` tighter than both
        let t = parse("not a & b | c").unwrap();
        let expected = Term::or(
            Term::and(Term::not(Term::var("a")), Term::var("b")),
            Term::var("c"),
        );
        assert_eq!(t, expected);
    }

    #[test]
    fn if_then_else_and_comments() {
        let t = parse("-- header\nif x then () -- trailing\n else ()").unwrap();
        assert_eq!(t, Term::case(Term::var("x"), "_", Term::Unit, "_", Term::Unit));
    }

    #[test]
    fn case_syntax() {
        let t = parse("case s of { inl a -> a; inr b -> b }").unwrap();
        assert_eq!(t, Term::case(Term::var("s"), "a", Term::var("a"), "b", Term::var("b")));
    }

    #[test]
    fn matrix_literal_is_row_major_nested_pairs() {
        let t = parse("[[a, b], [c, d]]").unwrap();
        let expected = Term::pair(
            Term::pair(Term::var("a"), Term::var("b")),
            Term::pair(Term::var("c"), Term::var("d")),
        );
        assert_eq!(t, expected);
        assert!(parse("[[a, b], [c]]").is_err());
    }

    #[test]
    fn subm_projects_requested_block() {
        let t = parse("subm[2; 2](m)").unwrap();
        let expected = Term::let_in(
            "_subm",
            Term::var("m"),
            Term::snd(Term::snd(Term::var("_subm"))),
        );
        assert_eq!(t, expected);
        assert!(parse("subm[2; 3](m)").is_err());
    }

    #[test]
    fn errors_carry_line_and_column() {
        let err = parse("let x = \n  in x").unwrap_err();
        assert_eq!(err.pos, Pos { line: 2, col: 3 });
        let err = parse("(x, y").unwrap_err();
        assert!(err.message.contains("`)`"), "{}", err.message);
        assert!(parse("x y").is_err());
        assert!(parse("?").is_err());
    }

    #[test]
    fn types() {
        assert_eq!(parse_type("bool * bool").unwrap(), Type::prod(Type::bool(), Type::bool()));
        assert_eq!(
            parse_type("unit + vertex * void").unwrap(),
            Type::sum(Type::Unit, Type::prod(Type::Vertex, Type::Empty))
        );
        assert_eq!(parse_type("(unit + unit)").unwrap(), Type::bool());
    }

    #[test]
    fn values_round_trip_through_display() {
        let vs = [
            Value::bool(true),
            Value::Unit,
            Value::pair(Value::bool(false), Value::Vertex(2)),
            Value::Inl(Box::new(Value::Inr(Box::new(Value::bool(true))))),
            Value::tuple(vec![Value::Unit, Value::Unit, Value::bool(true)]),
        ];
        for v in vs {
            assert_eq!(parse_value(&v.to_string()).unwrap(), v, "{v}");
        }
    }
}
