//! Type inference for the core calculus.
//!
//! Injections and `absurd` do not determine their full type locally, so
//! inference runs first-order unification over meta-variables. Any
//! meta-variable left unconstrained at the end defaults to `unit`.

use std::fmt;

use crate::lang::syntax::{Context, Term, Type};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum TypeError {
    #[error("unbound variable `{0}`")]
    Unbound(String),
    #[error("type mismatch in `{term}`: expected {expected}, found {found}")]
    Mismatch {
        expected: String,
        found: String,
        term: String,
    },
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum IType {
    Meta(usize),
    Unit,
    Empty,
    Vertex,
    Prod(Box<IType>, Box<IType>),
    Sum(Box<IType>, Box<IType>),
}

impl IType {
    fn from_type(t: &Type) -> IType {
        match t {
            Type::Unit => IType::Unit,
            Type::Empty => IType::Empty,
            Type::Vertex => IType::Vertex,
            Type::Prod(a, b) => IType::Prod(Box::new(Self::from_type(a)), Box::new(Self::from_type(b))),
            Type::Sum(a, b) => IType::Sum(Box::new(Self::from_type(a)), Box::new(Self::from_type(b))),
        }
    }

    /// Like `Display`, without parentheses around the outermost constructor.
    fn top_level(&self) -> String {
        match self {
            IType::Prod(a, b) => format!("{a} * {b}"),
            IType::Sum(a, b) if !(**a == IType::Unit && **b == IType::Unit) => format!("{a} + {b}"),
            other => other.to_string(),
        }
    }
}

impl fmt::Display for IType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            IType::Meta(i) => write!(f, "?{i}"),
            IType::Unit => write!(f, "unit"),
            IType::Empty => write!(f, "void"),
            IType::Vertex => write!(f, "vertex"),
            IType::Sum(a, b) if **a == IType::Unit && **b == IType::Unit => write!(f, "bool"),
            IType::Prod(a, b) => write!(f, "({a} * {b})"),
            IType::Sum(a, b) => write!(f, "({a} + {b})"),
        }
    }
}

/// Result of inference: the term's type plus the type of every subterm in
/// pre-order (the order of [`Term::visit`]).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Elaboration {
    pub ty: Type,
    pub node_types: Vec<Type>,
}

struct Infer {
    subst: Vec<Option<IType>>,
    nodes: Vec<IType>,
}

impl Infer {
    fn fresh(&mut self) -> IType {
        self.subst.push(None);
        IType::Meta(self.subst.len() - 1)
    }

    fn resolve(&self, t: &IType) -> IType {
        match t {
            IType::Meta(i) => match &self.subst[*i] {
                Some(bound) => self.resolve(bound),
                None => t.clone(),
            },
            IType::Prod(a, b) => IType::Prod(Box::new(self.resolve(a)), Box::new(self.resolve(b))),
            IType::Sum(a, b) => IType::Sum(Box::new(self.resolve(a)), Box::new(self.resolve(b))),
            other => other.clone(),
        }
    }

    fn occurs(&self, m: usize, t: &IType) -> bool {
        match self.resolve(t) {
            IType::Meta(j) => j == m,
            IType::Prod(a, b) | IType::Sum(a, b) => self.occurs(m, &a) || self.occurs(m, &b),
            _ => false,
        }
    }

    fn unify(&mut self, expected: &IType, found: &IType, at: &Term) -> Result<(), TypeError> {
        let (e, f) = (self.resolve(expected), self.resolve(found));
        match (&e, &f) {
            (IType::Meta(i), IType::Meta(j)) if i == j => Ok(()),
            (IType::Meta(i), other) | (other, IType::Meta(i)) => {
                if self.occurs(*i, other) {
                    return Err(self.mismatch(&e, &f, at));
                }
                self.subst[*i] = Some(other.clone());
                Ok(())
            }
            (IType::Unit, IType::Unit) | (IType::Empty, IType::Empty) | (IType::Vertex, IType::Vertex) => {
                Ok(())
            }
            (IType::Prod(a1, b1), IType::Prod(a2, b2)) | (IType::Sum(a1, b1), IType::Sum(a2, b2)) => {
                self.unify(a1, a2, at).map_err(|_| self.mismatch(&e, &f, at))?;
                self.unify(b1, b2, at).map_err(|_| self.mismatch(&e, &f, at))
            }
            _ => Err(self.mismatch(&e, &f, at)),
        }
    }

    fn mismatch(&self, expected: &IType, found: &IType, at: &Term) -> TypeError {
        let mut term = at.to_string();
        if term.len() > 60 {
            term.truncate(57);
            term.push_str("...");
        }
        TypeError::Mismatch {
            expected: self.resolve(expected).top_level(),
            found: self.resolve(found).top_level(),
            term,
        }
    }

    fn infer(&mut self, ctx: &[(String, IType)], t: &Term) -> Result<IType, TypeError> {
        let slot = self.nodes.len();
        self.nodes.push(IType::Unit);
        let ty = match t {
            Term::Var(x) => ctx
                .iter()
                .rev()
                .find(|(y, _)| y == x)
                .map(|(_, ty)| ty.clone())
                .ok_or_else(|| TypeError::Unbound(x.clone()))?,
            Term::Unit => IType::Unit,
            Term::Pair(a, b) => {
                let ta = self.infer(ctx, a)?;
                let tb = self.infer(ctx, b)?;
                IType::Prod(Box::new(ta), Box::new(tb))
            }
            Term::Fst(p) | Term::Snd(p) => {
                let tp = self.infer(ctx, p)?;
                let (l, r) = (self.fresh(), self.fresh());
                let want = IType::Prod(Box::new(l.clone()), Box::new(r.clone()));
                self.unify(&want, &tp, p)?;
                if matches!(t, Term::Fst(_)) { l } else { r }
            }
            Term::Inl(a) | Term::Inr(a) => {
                let ta = self.infer(ctx, a)?;
                let other = self.fresh();
                if matches!(t, Term::Inl(_)) {
                    IType::Sum(Box::new(ta), Box::new(other))
                } else {
                    IType::Sum(Box::new(other), Box::new(ta))
                }
            }
            Term::Let(x, bound, body) => {
                let tb = self.infer(ctx, bound)?;
                let mut inner = ctx.to_vec();
                inner.push((x.clone(), tb));
                self.infer(&inner, body)?
            }
            Term::Absurd(s) => {
                let ts = self.infer(ctx, s)?;
                self.unify(&IType::Empty, &ts, s)?;
                self.fresh()
            }
            Term::Case(s, x1, u1, x2, u2) => {
                let ts = self.infer(ctx, s)?;
                let (l, r) = (self.fresh(), self.fresh());
                let want = IType::Sum(Box::new(l.clone()), Box::new(r.clone()));
                self.unify(&want, &ts, s)?;
                let mut c1 = ctx.to_vec();
                c1.push((x1.clone(), l));
                let t1 = self.infer(&c1, u1)?;
                let mut c2 = ctx.to_vec();
                c2.push((x2.clone(), r));
                let t2 = self.infer(&c2, u2)?;
                self.unify(&t1, &t2, u2)?;
                t1
            }
            Term::App(c, a) => {
                let (dom, cod) = c.signature();
                let ta = self.infer(ctx, a)?;
                self.unify(&IType::from_type(&dom), &ta, a)?;
                IType::from_type(&cod)
            }
        };
        self.nodes[slot] = ty.clone();
        Ok(ty)
    }

    fn finish(&self, t: &IType) -> Type {
        match self.resolve(t) {
            IType::Meta(_) | IType::Unit => Type::Unit,
            IType::Empty => Type::Empty,
            IType::Vertex => Type::Vertex,
            IType::Prod(a, b) => Type::prod(self.finish(&a), self.finish(&b)),
            IType::Sum(a, b) => Type::sum(self.finish(&a), self.finish(&b)),
        }
    }
}

pub fn elaborate(ctx: &Context, t: &Term) -> Result<Elaboration, TypeError> {
    let mut inf = Infer {
        subst: Vec::new(),
        nodes: Vec::new(),
    };
    let ictx: Vec<(String, IType)> = ctx
        .entries()
        .iter()
        .map(|(x, ty)| (x.clone(), IType::from_type(ty)))
        .collect();
    let ty = inf.infer(&ictx, t)?;
    let node_types = inf.nodes.iter().map(|n| inf.finish(n)).collect();
    Ok(Elaboration {
        ty: inf.finish(&ty),
        node_types,
    })
}

pub fn typecheck(ctx: &Context, t: &Term) -> Result<Type, TypeError> {
    elaborate(ctx, t).map(|e| e.ty)
}

/// Checks `t` against a known type, which also fixes otherwise ambiguous
/// injections inside it.
pub fn check(ctx: &Context, t: &Term, expected: &Type) -> Result<(), TypeError> {
    let mut inf = Infer {
        subst: Vec::new(),
        nodes: Vec::new(),
    };
    let ictx: Vec<(String, IType)> = ctx
        .entries()
        .iter()
        .map(|(x, ty)| (x.clone(), IType::from_type(ty)))
        .collect();
    let ty = inf.infer(&ictx, t)?;
    inf.unify(&IType::from_type(expected), &ty, t)
}
