//! Seeded generation of random well-typed terms and law instances.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::exact::laws::{Law, LawInstance};
use crate::lang::{Context, Term, Type};
use crate::rational::{ratio, Rational};

const COINS: [(i64, i64); 7] = [(0, 1), (1, 4), (1, 3), (1, 2), (2, 3), (3, 4), (1, 1)];

#[derive(Debug, Clone)]
pub struct TermGen {
    rng: ChaCha8Rng,
    /// Maximum nesting of eliminators and binders.
    pub max_depth: usize,
    /// Whether `vertex`, `new` and `edge` may appear.
    pub vertices: bool,
    next_name: usize,
}

impl TermGen {
    pub fn new(seed: u64) -> Self {
        TermGen {
            rng: ChaCha8Rng::seed_from_u64(seed),
            max_depth: 3,
            vertices: true,
            next_name: 0,
        }
    }

    pub fn without_vertices(mut self) -> Self {
        self.vertices = false;
        self
    }

    pub fn with_depth(mut self, depth: usize) -> Self {
        self.max_depth = depth;
        self
    }

    pub fn fresh(&mut self) -> String {
        self.next_name += 1;
        format!("v{}", self.next_name)
    }

    fn coin(&mut self) -> Rational {
        let (n, d) = *COINS.choose(&mut self.rng).expect("non-empty");
        ratio(n, d)
    }

    /// A small inhabited type.
    pub fn gen_type(&mut self, depth: usize) -> Type {
        let leaf_choices = if self.vertices { 4 } else { 2 };
        let pick = if depth == 0 {
            self.rng.gen_range(0..leaf_choices)
        } else {
            self.rng.gen_range(0..leaf_choices + 2)
        };
        match (pick, self.vertices) {
            (0, _) => Type::Unit,
            (1, _) => Type::bool(),
            (2, true) | (3, true) => Type::Vertex,
            (p, _) if p == leaf_choices => Type::prod(self.gen_type(depth - 1), self.gen_type(depth - 1)),
            _ => Type::sum(self.gen_type(depth - 1), self.gen_type(depth - 1)),
        }
    }

    /// A context of up to `max_len` variables with fresh names.
    pub fn gen_context(&mut self, max_len: usize) -> Context {
        let len = self.rng.gen_range(0..=max_len);
        let mut ctx = Context::empty();
        for _ in 0..len {
            let ty = self.gen_type(1);
            let x = self.fresh();
            ctx.push(x, ty);
        }
        ctx
    }

    fn var_of(&mut self, ctx: &Context, ty: &Type) -> Option<Term> {
        let names: Vec<&String> = ctx
            .entries()
            .iter()
            .filter(|(_, t)| t == ty)
            .map(|(x, _)| x)
            .collect();
        names.choose(&mut self.rng).map(|x| Term::var(x))
    }

    /// A binder name: usually fresh, sometimes shadowing a context entry.
    fn binder(&mut self, ctx: &Context) -> String {
        if !ctx.is_empty() && self.rng.gen_bool(0.15) {
            let i = self.rng.gen_range(0..ctx.len());
            ctx.entries()[i].0.clone()
        } else {
            self.fresh()
        }
    }

    /// A term of type `ty` in `ctx`.
    pub fn gen_term(&mut self, ctx: &Context, ty: &Type, depth: usize) -> Term {
        if depth > 0 && self.rng.gen_bool(0.45) {
            return self.gen_elim(ctx, ty, depth);
        }
        if self.rng.gen_bool(0.3) {
            if let Some(v) = self.var_of(ctx, ty) {
                return v;
            }
        }
        let sub = depth.saturating_sub(1);
        match ty {
            Type::Unit => Term::Unit,
            Type::Empty => self
                .var_of(ctx, ty)
                .map(Term::absurd)
                .expect("void terms are only generated under a void variable"),
            Type::Vertex => Term::new_vertex(),
            Type::Prod(a, b) => Term::pair(self.gen_term(ctx, a, sub), self.gen_term(ctx, b, sub)),
            Type::Sum(a, b) => {
                if **a == Type::Unit && **b == Type::Unit {
                    match self.rng.gen_range(0..5) {
                        0 | 1 => return Term::bernoulli(self.coin()),
                        2 if self.vertices => {
                            return Term::edge(
                                self.gen_term(ctx, &Type::Vertex, sub),
                                self.gen_term(ctx, &Type::Vertex, sub),
                            )
                        }
                        3 => return if self.rng.gen() { Term::tt() } else { Term::ff() },
                        _ => {}
                    }
                }
                if self.rng.gen() {
                    Term::inl(self.gen_term(ctx, a, sub))
                } else {
                    Term::inr(self.gen_term(ctx, b, sub))
                }
            }
        }
    }

    fn gen_elim(&mut self, ctx: &Context, ty: &Type, depth: usize) -> Term {
        let sub = depth - 1;
        match self.rng.gen_range(0..4) {
            0 | 1 => {
                let a = self.gen_type(1);
                let x = self.binder(ctx);
                let bound = self.gen_term(ctx, &a, sub);
                let body = self.gen_term(&ctx.extended(&x, a), ty, sub);
                Term::let_in(&x, bound, body)
            }
            2 => {
                let (l, r) = (self.gen_type(1), self.gen_type(1));
                let scrut = self.gen_term(ctx, &Type::sum(l.clone(), r.clone()), sub);
                let (x1, x2) = (self.binder(ctx), self.binder(ctx));
                let u1 = self.gen_term(&ctx.extended(&x1, l), ty, sub);
                let u2 = self.gen_term(&ctx.extended(&x2, r), ty, sub);
                Term::case(scrut, &x1, u1, &x2, u2)
            }
            _ => {
                let other = self.gen_type(1);
                if self.rng.gen() {
                    Term::fst(self.gen_term(ctx, &Type::prod(ty.clone(), other), sub))
                } else {
                    Term::snd(self.gen_term(ctx, &Type::prod(other, ty.clone()), sub))
                }
            }
        }
    }

    /// A syntactically deterministic term of type `ty`. Vertices can only
    /// come from the context, so `None` when one is needed and absent.
    pub fn gen_deterministic(&mut self, ctx: &Context, ty: &Type, depth: usize) -> Option<Term> {
        if self.rng.gen_bool(0.4) {
            if let Some(v) = self.var_of(ctx, ty) {
                return Some(v);
            }
        }
        let sub = depth.saturating_sub(1);
        Some(match ty {
            Type::Unit => Term::Unit,
            Type::Empty => Term::absurd(self.var_of(ctx, ty)?),
            Type::Vertex => self.var_of(ctx, ty)?,
            Type::Prod(a, b) => Term::pair(self.gen_deterministic(ctx, a, sub)?, self.gen_deterministic(ctx, b, sub)?),
            Type::Sum(a, b) => {
                let left = self.rng.gen();
                let (first, second) = if left { (a, b) } else { (b, a) };
                match self.gen_deterministic(ctx, first, sub) {
                    Some(t) if left => Term::inl(t),
                    Some(t) => Term::inr(t),
                    None => {
                        let t = self.gen_deterministic(ctx, second, sub)?;
                        if left { Term::inr(t) } else { Term::inl(t) }
                    }
                }
            }
        })
    }

    /// A closed program of the given type.
    pub fn gen_program(&mut self, ty: &Type) -> Term {
        self.gen_term(&Context::empty(), ty, self.max_depth)
    }

    /// A random instance of one of the program equations. Side conditions
    /// hold by construction.
    pub fn law_instance(&mut self, law: Law) -> LawInstance {
        let ctx = self.gen_context(2);
        let d = self.max_depth;
        let ty = |g: &mut Self| g.gen_type(1);
        match law {
            Law::LetAssoc => {
                let (a, b, c) = (ty(self), ty(self), ty(self));
                let (x, y) = (self.fresh(), self.fresh());
                let t = self.gen_term(&ctx, &a, d);
                let u = self.gen_term(&ctx.extended(&x, a), &b, d);
                let t2 = self.gen_term(&ctx.extended(&y, b), &c, d);
                LawInstance::let_assoc(ctx, &x, t, u, &y, t2)
            }
            Law::LetPair => {
                let (a, b) = (ty(self), ty(self));
                let (x, y) = (self.fresh(), self.fresh());
                let t = self.gen_term(&ctx, &a, d);
                let u = self.gen_term(&ctx, &b, d);
                LawInstance::let_pair(ctx, &x, t, &y, u)
            }
            Law::LetComm => {
                let (a, b, c) = (ty(self), ty(self), ty(self));
                let (x, x2) = (self.fresh(), self.fresh());
                let t = self.gen_term(&ctx, &a, d);
                let t2 = self.gen_term(&ctx, &b, d);
                let inner = ctx.extended(&x, a).extended(&x2, b);
                let u = self.gen_term(&inner, &c, d);
                LawInstance::let_comm(ctx, &x, t, &x2, t2, u)
            }
            Law::Affine => {
                let (a, b) = (ty(self), ty(self));
                let x = self.fresh();
                let discarded = self.gen_term(&ctx, &a, d);
                let t = self.gen_term(&ctx, &b, d);
                LawInstance::affine(ctx, &x, discarded, t)
            }
            Law::LetValue => {
                let x = self.fresh();
                let (a, v) = loop {
                    let a = ty(self);
                    if let Some(v) = self.gen_deterministic(&ctx, &a, 2) {
                        break (a, v);
                    }
                };
                let b = ty(self);
                let t = self.gen_term(&ctx.extended(&x, a), &b, d);
                Ok(LawInstance::let_value(ctx, &x, v, t))
            }
            Law::SelfLoop | Law::Symmetry | Law::Determinism => {
                Ok(law.axiom_instance().expect("axioms have a canonical instance"))
            }
        }
        .expect("generated instances satisfy their side conditions")
    }

    pub fn law_instances(&mut self, law: Law, count: usize) -> Vec<LawInstance> {
        (0..count).map(|_| self.law_instance(law)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lang::{check, typecheck};

    #[test]
    fn generated_terms_have_their_type() {
        let mut g = TermGen::new(7);
        for _ in 0..300 {
            let ctx = g.gen_context(2);
            let ty = g.gen_type(2);
            let t = g.gen_term(&ctx, &ty, 3);
            check(&ctx, &t, &ty).unwrap_or_else(|e| panic!("{t}: {e}"));
        }
    }

    #[test]
    fn seeds_are_reproducible() {
        let a: Vec<Term> = {
            let mut g = TermGen::new(11);
            (0..20).map(|_| g.gen_program(&Type::bool())).collect()
        };
        let mut g = TermGen::new(11);
        let b: Vec<Term> = (0..20).map(|_| g.gen_program(&Type::bool())).collect();
        assert_eq!(a, b);
    }

    #[test]
    fn vertex_free_generation() {
        let mut g = TermGen::new(3).without_vertices();
        for _ in 0..200 {
            let t = g.gen_program(&Type::prod(Type::bool(), Type::bool()));
            let mut ok = true;
            t.visit(&mut |s| {
                if matches!(s, Term::App(crate::lang::Constant::New | crate::lang::Constant::Edge, _)) {
                    ok = false;
                }
            });
            assert!(ok, "{t}");
            typecheck(&Context::empty(), &t).unwrap();
        }
    }

    #[test]
    fn law_instances_typecheck() {
        let mut g = TermGen::new(5);
        for law in Law::PROGRAM_EQUATIONS {
            for inst in g.law_instances(law, 50) {
                let l = typecheck(&inst.ctx, &inst.lhs).unwrap();
                let r = typecheck(&inst.ctx, &inst.rhs).unwrap();
                assert_eq!(l, r, "{law}: {} vs {}", inst.lhs, inst.rhs);
            }
        }
    }
}
