use std::collections::BTreeSet;
use std::fmt;
use std::rc::Rc;

use crate::rational::{Frac, Rational};

pub type Name = String;

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Type {
    Unit,
    Empty,
    Prod(Box<Type>, Box<Type>),
    Sum(Box<Type>, Box<Type>),
    Vertex,
}

impl Type {
    pub fn bool() -> Type {
        Type::Sum(Box::new(Type::Unit), Box::new(Type::Unit))
    }

    pub fn prod(a: Type, b: Type) -> Type {
        Type::Prod(Box::new(a), Box::new(b))
    }

    pub fn sum(a: Type, b: Type) -> Type {
        Type::Sum(Box::new(a), Box::new(b))
    }

    /// Right-nested product `A * (A * (... * A))` with `n >= 1` factors.
    pub fn power(base: &Type, n: usize) -> Type {
        assert!(n >= 1, "power of zero factors");
        (1..n).fold(base.clone(), |acc, _| Type::prod(base.clone(), acc))
    }

    pub fn mentions_vertex(&self) -> bool {
        match self {
            Type::Vertex => true,
            Type::Unit | Type::Empty => false,
            Type::Prod(a, b) | Type::Sum(a, b) => a.mentions_vertex() || b.mentions_vertex(),
        }
    }

    /// Cardinality of the denotation; `None` when the type mentions `vertex`.
    pub fn numeral_size(&self) -> Option<usize> {
        self.cardinality(None)
    }

    /// Cardinality when `vertex` denotes a set of `vertices` elements.
    pub fn cardinality(&self, vertices: Option<usize>) -> Option<usize> {
        match self {
            Type::Unit => Some(1),
            Type::Empty => Some(0),
            Type::Vertex => vertices,
            Type::Prod(a, b) => Some(a.cardinality(vertices)? * b.cardinality(vertices)?),
            Type::Sum(a, b) => Some(a.cardinality(vertices)? + b.cardinality(vertices)?),
        }
    }

    fn fmt_prec(&self, f: &mut fmt::Formatter<'_>, prec: u8) -> fmt::Result {
        // prec: 0 = sum position, 1 = product position, 2 = atomic
        match self {
            Type::Unit => write!(f, "unit"),
            Type::Empty => write!(f, "void"),
            Type::Vertex => write!(f, "vertex"),
            Type::Sum(a, b) if **a == Type::Unit && **b == Type::Unit => write!(f, "bool"),
            Type::Sum(a, b) => {
                if prec > 0 {
                    write!(f, "(")?;
                }
                a.fmt_prec(f, 1)?;
                write!(f, " + ")?;
                b.fmt_prec(f, 0)?;
                if prec > 0 {
                    write!(f, ")")?;
                }
                Ok(())
            }
            Type::Prod(a, b) => {
                if prec > 1 {
                    write!(f, "(")?;
                }
                a.fmt_prec(f, 2)?;
                write!(f, " * ")?;
                b.fmt_prec(f, 1)?;
                if prec > 1 {
                    write!(f, ")")?;
                }
                Ok(())
            }
        }
    }
}

impl fmt::Display for Type {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.fmt_prec(f, 0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Constant {
    New,
    Edge,
    Bernoulli(Rational),
}

impl Constant {
    pub fn signature(&self) -> (Type, Type) {
        match self {
            Constant::New => (Type::Unit, Type::Vertex),
            Constant::Edge => (Type::prod(Type::Vertex, Type::Vertex), Type::bool()),
            Constant::Bernoulli(_) => (Type::Unit, Type::bool()),
        }
    }
}

impl fmt::Display for Constant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Constant::New => write!(f, "new"),
            Constant::Edge => write!(f, "edge"),
            Constant::Bernoulli(q) => write!(f, "bernoulli({})", Frac(q)),
        }
    }
}

/// Core calculus. Surface sugar (booleans, `if`, `&`, `|`, `not`,
/// matrices, `subm`) is expanded by the parser and never appears here.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Term {
    Var(Name),
    Unit,
    Pair(Box<Term>, Box<Term>),
    Fst(Box<Term>),
    Snd(Box<Term>),
    Inl(Box<Term>),
    Inr(Box<Term>),
    Let(Name, Box<Term>, Box<Term>),
    Absurd(Box<Term>),
    Case(Box<Term>, Name, Box<Term>, Name, Box<Term>),
    App(Constant, Box<Term>),
}

impl Term {
    pub fn var(name: &str) -> Term {
        Term::Var(name.to_string())
    }

    pub fn pair(a: Term, b: Term) -> Term {
        Term::Pair(Box::new(a), Box::new(b))
    }

    pub fn fst(t: Term) -> Term {
        Term::Fst(Box::new(t))
    }

    pub fn snd(t: Term) -> Term {
        Term::Snd(Box::new(t))
    }

    pub fn inl(t: Term) -> Term {
        Term::Inl(Box::new(t))
    }

    pub fn inr(t: Term) -> Term {
        Term::Inr(Box::new(t))
    }

    pub fn let_in(x: &str, t: Term, u: Term) -> Term {
        Term::Let(x.to_string(), Box::new(t), Box::new(u))
    }

    pub fn case(scrut: Term, x1: &str, u1: Term, x2: &str, u2: Term) -> Term {
        Term::Case(
            Box::new(scrut),
            x1.to_string(),
            Box::new(u1),
            x2.to_string(),
            Box::new(u2),
        )
    }

    pub fn absurd(t: Term) -> Term {
        Term::Absurd(Box::new(t))
    }

    pub fn tt() -> Term {
        Term::inl(Term::Unit)
    }

    pub fn ff() -> Term {
        Term::inr(Term::Unit)
    }

    pub fn new_vertex() -> Term {
        Term::App(Constant::New, Box::new(Term::Unit))
    }

    pub fn edge(a: Term, b: Term) -> Term {
        Term::App(Constant::Edge, Box::new(Term::pair(a, b)))
    }

    pub fn bernoulli(q: Rational) -> Term {
        Term::App(Constant::Bernoulli(q), Box::new(Term::Unit))
    }

    /// `if c then t else e`, expanded to a case with unused binders.
    pub fn ite(c: Term, t: Term, e: Term) -> Term {
        Term::case(c, "_", t, "_", e)
    }

    pub fn and(a: Term, b: Term) -> Term {
        Term::ite(a, b, Term::ff())
    }

    pub fn or(a: Term, b: Term) -> Term {
        Term::ite(a, Term::tt(), b)
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(a: Term) -> Term {
        Term::ite(a, Term::ff(), Term::tt())
    }

    /// Right-nested tuple; a single element is returned unchanged.
    pub fn tuple(mut items: Vec<Term>) -> Term {
        assert!(!items.is_empty(), "empty tuple");
        let mut acc = items.pop().expect("non-empty");
        while let Some(t) = items.pop() {
            acc = Term::pair(t, acc);
        }
        acc
    }

    /// Row-major matrix: a tuple of row tuples.
    pub fn matrix(rows: Vec<Vec<Term>>) -> Term {
        Term::tuple(rows.into_iter().map(Term::tuple).collect())
    }

    /// Projection of component `index` out of a right-nested tuple of `len` items.
    pub fn tuple_proj(t: Term, index: usize, len: usize) -> Term {
        assert!(index < len, "projection out of range");
        let mut acc = t;
        for _ in 0..index {
            acc = Term::snd(acc);
        }
        if index + 1 < len {
            acc = Term::fst(acc);
        }
        acc
    }

    pub fn free_vars(&self) -> BTreeSet<Name> {
        let mut out = BTreeSet::new();
        self.collect_free(&mut Vec::new(), &mut out);
        out
    }

    fn collect_free(&self, bound: &mut Vec<Name>, out: &mut BTreeSet<Name>) {
        match self {
            Term::Var(x) => {
                if !bound.contains(x) {
                    out.insert(x.clone());
                }
            }
            Term::Unit => {}
            Term::Pair(a, b) => {
                a.collect_free(bound, out);
                b.collect_free(bound, out);
            }
            Term::Fst(t) | Term::Snd(t) | Term::Inl(t) | Term::Inr(t) | Term::Absurd(t) => {
                t.collect_free(bound, out)
            }
            Term::App(_, t) => t.collect_free(bound, out),
            Term::Let(x, t, u) => {
                t.collect_free(bound, out);
                bound.push(x.clone());
                u.collect_free(bound, out);
                bound.pop();
            }
            Term::Case(s, x1, u1, x2, u2) => {
                s.collect_free(bound, out);
                bound.push(x1.clone());
                u1.collect_free(bound, out);
                bound.pop();
                bound.push(x2.clone());
                u2.collect_free(bound, out);
                bound.pop();
            }
        }
    }

    /// True when no `new`, `edge`, or `bernoulli` occurs anywhere in the term.
    pub fn is_syntactically_deterministic(&self) -> bool {
        match self {
            Term::Var(_) | Term::Unit => true,
            Term::App(..) => false,
            Term::Pair(a, b) | Term::Let(_, a, b) => {
                a.is_syntactically_deterministic() && b.is_syntactically_deterministic()
            }
            Term::Fst(t) | Term::Snd(t) | Term::Inl(t) | Term::Inr(t) | Term::Absurd(t) => {
                t.is_syntactically_deterministic()
            }
            Term::Case(s, _, u1, _, u2) => {
                s.is_syntactically_deterministic()
                    && u1.is_syntactically_deterministic()
                    && u2.is_syntactically_deterministic()
            }
        }
    }

    /// Every name occurring in the term, bound or free.
    pub fn all_names(&self) -> BTreeSet<Name> {
        let mut out = BTreeSet::new();
        self.visit(&mut |t| match t {
            Term::Var(x) => {
                out.insert(x.clone());
            }
            Term::Let(x, ..) => {
                out.insert(x.clone());
            }
            Term::Case(_, x1, _, x2, _) => {
                out.insert(x1.clone());
                out.insert(x2.clone());
            }
            _ => {}
        });
        out
    }

    /// Pre-order traversal.
    pub fn visit<'a>(&'a self, f: &mut impl FnMut(&'a Term)) {
        f(self);
        match self {
            Term::Var(_) | Term::Unit => {}
            Term::Pair(a, b) | Term::Let(_, a, b) => {
                a.visit(f);
                b.visit(f);
            }
            Term::Fst(t) | Term::Snd(t) | Term::Inl(t) | Term::Inr(t) | Term::Absurd(t) => {
                t.visit(f)
            }
            Term::App(_, t) => t.visit(f),
            Term::Case(s, _, u1, _, u2) => {
                s.visit(f);
                u1.visit(f);
                u2.visit(f);
            }
        }
    }

    pub fn size(&self) -> usize {
        let mut n = 0;
        self.visit(&mut |_| n += 1);
        n
    }

    /// Capture-avoiding substitution `self[v/x]`.
    pub fn subst(&self, x: &str, v: &Term) -> Term {
        let fv = v.free_vars();
        let mut taken: BTreeSet<Name> = self.all_names();
        taken.extend(v.all_names());
        taken.insert(x.to_string());
        self.subst_inner(x, v, &fv, &mut taken)
    }

    fn subst_inner(&self, x: &str, v: &Term, fv: &BTreeSet<Name>, taken: &mut BTreeSet<Name>) -> Term {
        let go = |t: &Term, taken: &mut BTreeSet<Name>| Box::new(t.subst_inner(x, v, fv, taken));
        match self {
            Term::Var(y) if y == x => v.clone(),
            Term::Var(_) | Term::Unit => self.clone(),
            Term::Pair(a, b) => Term::Pair(go(a, taken), go(b, taken)),
            Term::Fst(t) => Term::Fst(go(t, taken)),
            Term::Snd(t) => Term::Snd(go(t, taken)),
            Term::Inl(t) => Term::Inl(go(t, taken)),
            Term::Inr(t) => Term::Inr(go(t, taken)),
            Term::Absurd(t) => Term::Absurd(go(t, taken)),
            Term::App(c, t) => Term::App(c.clone(), go(t, taken)),
            Term::Let(y, t, u) => {
                let t2 = go(t, taken);
                let (y2, u2) = subst_under_binder(y, u, x, v, fv, taken);
                Term::Let(y2, t2, Box::new(u2))
            }
            Term::Case(s, y1, u1, y2, u2) => {
                let s2 = go(s, taken);
                let (y1b, u1b) = subst_under_binder(y1, u1, x, v, fv, taken);
                let (y2b, u2b) = subst_under_binder(y2, u2, x, v, fv, taken);
                Term::Case(s2, y1b, Box::new(u1b), y2b, Box::new(u2b))
            }
        }
    }

    /// Renames free occurrences of `from` to `to` (assumed fresh).
    fn rename_free(&self, from: &str, to: &str) -> Term {
        self.subst(from, &Term::var(to))
    }
}

fn subst_under_binder(
    y: &str,
    body: &Term,
    x: &str,
    v: &Term,
    fv: &BTreeSet<Name>,
    taken: &mut BTreeSet<Name>,
) -> (Name, Term) {
    if y == x {
        return (y.to_string(), body.clone());
    }
    if fv.contains(y) && body.free_vars().contains(x) {
        let fresh = fresh_name(y, taken);
        let renamed = body.rename_free(y, &fresh);
        let out = renamed.subst_inner(x, v, fv, taken);
        return (fresh, out);
    }
    (y.to_string(), body.subst_inner(x, v, fv, taken))
}

pub fn fresh_name(base: &str, taken: &mut BTreeSet<Name>) -> Name {
    let stem = base.trim_end_matches(|c: char| c.is_ascii_digit() || c == '\'');
    let stem = if stem.is_empty() || stem == "_" { "v" } else { stem };
    let mut i = 0usize;
    loop {
        let candidate = format!("{stem}{i}");
        if !taken.contains(&candidate) {
            taken.insert(candidate.clone());
            return candidate;
        }
        i += 1;
    }
}

/// Ordered typing context. Extending with an existing name removes the older
/// binding so names stay pairwise distinct.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Context {
    entries: Vec<(Name, Type)>,
}

impl Context {
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn from_entries(entries: impl IntoIterator<Item = (Name, Type)>) -> Self {
        let mut ctx = Self::empty();
        for (x, ty) in entries {
            ctx.push(x, ty);
        }
        ctx
    }

    pub fn push(&mut self, x: Name, ty: Type) {
        self.entries.retain(|(y, _)| *y != x);
        self.entries.push((x, ty));
    }

    pub fn extended(&self, x: &str, ty: Type) -> Self {
        let mut out = self.clone();
        out.push(x.to_string(), ty);
        out
    }

    pub fn lookup(&self, x: &str) -> Option<&Type> {
        self.entries.iter().rev().find(|(y, _)| y == x).map(|(_, t)| t)
    }

    pub fn entries(&self) -> &[(Name, Type)] {
        &self.entries
    }

    pub fn names(&self) -> impl Iterator<Item = &Name> {
        self.entries.iter().map(|(x, _)| x)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// Runtime values. The derived order is the canonical inhabitant order:
/// `inl` before `inr`, pairs compared left component first.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Value {
    Unit,
    Pair(Box<Value>, Box<Value>),
    Inl(Box<Value>),
    Inr(Box<Value>),
    Vertex(u32),
}

impl Value {
    pub fn bool(b: bool) -> Value {
        if b {
            Value::Inl(Box::new(Value::Unit))
        } else {
            Value::Inr(Box::new(Value::Unit))
        }
    }

    pub fn pair(a: Value, b: Value) -> Value {
        Value::Pair(Box::new(a), Box::new(b))
    }

    pub fn as_bool(&self) -> Option<bool> {
        match self {
            Value::Inl(u) if **u == Value::Unit => Some(true),
            Value::Inr(u) if **u == Value::Unit => Some(false),
            _ => None,
        }
    }

    pub fn as_vertex(&self) -> Option<u32> {
        match self {
            Value::Vertex(v) => Some(*v),
            _ => None,
        }
    }

    pub fn tuple(mut items: Vec<Value>) -> Value {
        assert!(!items.is_empty(), "empty tuple");
        let mut acc = items.pop().expect("non-empty");
        while let Some(v) = items.pop() {
            acc = Value::pair(v, acc);
        }
        acc
    }

    /// Splits a right-nested tuple into exactly `len` components.
    pub fn untuple(&self, len: usize) -> Option<Vec<&Value>> {
        let mut out = Vec::with_capacity(len);
        let mut cur = self;
        for _ in 1..len {
            match cur {
                Value::Pair(a, b) => {
                    out.push(a.as_ref());
                    cur = b;
                }
                _ => return None,
            }
        }
        out.push(cur);
        Some(out)
    }

    /// Reads an `n`×`n` boolean matrix in the row-major nested-pair encoding.
    pub fn as_bool_matrix(&self, n: usize) -> Option<Vec<Vec<bool>>> {
        self.untuple(n)?
            .into_iter()
            .map(|row| row.untuple(n)?.into_iter().map(Value::as_bool).collect())
            .collect()
    }

    pub fn bool_matrix(rows: &[Vec<bool>]) -> Value {
        Value::tuple(
            rows.iter()
                .map(|r| Value::tuple(r.iter().map(|&b| Value::bool(b)).collect()))
                .collect(),
        )
    }

    pub fn to_term(&self) -> Option<Term> {
        Some(match self {
            Value::Unit => Term::Unit,
            Value::Pair(a, b) => Term::pair(a.to_term()?, b.to_term()?),
            Value::Inl(v) => Term::inl(v.to_term()?),
            Value::Inr(v) => Term::inr(v.to_term()?),
            Value::Vertex(_) => return None,
        })
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(b) = self.as_bool() {
            return write!(f, "{b}");
        }
        match self {
            Value::Unit => write!(f, "()"),
            Value::Pair(a, b) => write!(f, "({a}, {b})"),
            Value::Inl(v) => match **v {
                Value::Inl(_) | Value::Inr(_) if v.as_bool().is_none() => write!(f, "inl ({v})"),
                _ => write!(f, "inl {v}"),
            },
            Value::Inr(v) => match **v {
                Value::Inl(_) | Value::Inr(_) if v.as_bool().is_none() => write!(f, "inr ({v})"),
                _ => write!(f, "inr {v}"),
            },
            Value::Vertex(i) => write!(f, "#{i}"),
        }
    }
}

/// Persistent runtime environment shared by the evaluators.
#[derive(Debug, Clone, Default)]
pub struct Env(Option<Rc<EnvNode>>);

#[derive(Debug)]
struct EnvNode {
    name: Name,
    value: Value,
    next: Env,
}

impl Env {
    pub fn empty() -> Self {
        Env(None)
    }

    pub fn bind(&self, name: &str, value: Value) -> Self {
        Env(Some(Rc::new(EnvNode {
            name: name.to_string(),
            value,
            next: self.clone(),
        })))
    }

    pub fn lookup(&self, name: &str) -> Option<&Value> {
        let mut cur = self;
        while let Some(node) = &cur.0 {
            if node.name == name {
                return Some(&node.value);
            }
            cur = &node.next;
        }
        None
    }

    pub fn from_bindings<'a>(bindings: impl IntoIterator<Item = (&'a str, Value)>) -> Self {
        bindings
            .into_iter()
            .fold(Env::empty(), |env, (x, v)| env.bind(x, v))
    }
}
