use std::fmt;

use crate::lang::syntax::{Constant, Term};
use crate::rational::Frac;

fn is_atomic(t: &Term) -> bool {
    matches!(t, Term::Var(_) | Term::Unit | Term::Pair(..) | Term::App(..))
        || t == &Term::tt()
        || t == &Term::ff()
}

fn arg(f: &mut fmt::Formatter<'_>, t: &Term) -> fmt::Result {
    if is_atomic(t) {
        write!(f, "{t}")
    } else {
        write!(f, "({t})")
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self == &Term::tt() {
            return write!(f, "true");
        }
        if self == &Term::ff() {
            return write!(f, "false");
        }
        match self {
            Term::Var(x) => write!(f, "{x}"),
            Term::Unit => write!(f, "()"),
            Term::Pair(a, b) => write!(f, "({a}, {b})"),
            Term::Fst(t) => {
                write!(f, "fst ")?;
                arg(f, t)
            }
            Term::Snd(t) => {
                write!(f, "snd ")?;
                arg(f, t)
            }
            Term::Inl(t) => {
                write!(f, "inl ")?;
                arg(f, t)
            }
            Term::Inr(t) => {
                write!(f, "inr ")?;
                arg(f, t)
            }
            Term::Absurd(t) => {
                write!(f, "absurd ")?;
                arg(f, t)
            }
            Term::Let(x, t, u) => write!(f, "let {x} = {t} in {u}"),
            Term::Case(s, x1, u1, x2, u2) if x1 == "_" && x2 == "_" => {
                write!(f, "if {s} then {u1} else {u2}")
            }
            Term::Case(s, x1, u1, x2, u2) => {
                write!(f, "case {s} of {{ inl {x1} -> {u1}; inr {x2} -> {u2} }}")
            }
            Term::App(Constant::New, t) if **t == Term::Unit => write!(f, "new()"),
            Term::App(Constant::New, t) => write!(f, "new({t})"),
            Term::App(Constant::Edge, t) => match t.as_ref() {
                Term::Pair(a, b) => write!(f, "edge({a}, {b})"),
                other => write!(f, "edge({other})"),
            },
            Term::App(Constant::Bernoulli(q), t) if **t == Term::Unit => {
                write!(f, "bernoulli({})", Frac(q))
            }
            Term::App(Constant::Bernoulli(q), t) => write!(f, "bernoulli({}, {t})", Frac(q)),
        }
    }
}
