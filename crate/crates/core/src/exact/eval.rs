//! Two evaluators for the same compositional semantics over a finite model:
//! a monadic interpreter on environments, and a stochastic-matrix builder
//! that composes one matrix per syntactic clause.

use std::collections::HashMap;

use num_traits::Zero;

use crate::exact::dist::FinDist;
use crate::exact::matrix::{MatrixError, StochMatrix};
use crate::exact::model::FiniteModel;
use crate::lang::{elaborate, enumerate_with_vertices, Constant, Context, Env, LangError, Term, Type, TypeError, Value};
use crate::rational::Rational;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ExactError {
    #[error(transparent)]
    Type(#[from] TypeError),
    #[error("term is not closed: free variable `{0}`")]
    Open(String),
    #[error("unbound variable `{0}` at run time")]
    Unbound(String),
    #[error("runtime shape error: expected {expected}, got `{found}`")]
    Shape { expected: &'static str, found: String },
    #[error("vertex #{0} is outside the model")]
    VertexRange(u32),
    #[error(transparent)]
    Matrix(#[from] MatrixError),
    #[error(transparent)]
    Lang(#[from] LangError),
}

fn shape(expected: &'static str, v: &Value) -> ExactError {
    ExactError::Shape {
        expected,
        found: v.to_string(),
    }
}

/// Exact outcome distribution of a closed, well-typed program.
pub fn eval_exact(model: &FiniteModel, t: &Term) -> Result<FinDist<Value>, ExactError> {
    if let Some(x) = t.free_vars().into_iter().next() {
        return Err(ExactError::Open(x));
    }
    elaborate(&Context::empty(), t)?;
    eval_in(model, &Env::empty(), t)
}

/// Evaluates `t` under a concrete environment. The term is assumed to be
/// well-typed for the environment; shape mismatches surface as errors.
pub fn eval_in(model: &FiniteModel, env: &Env, t: &Term) -> Result<FinDist<Value>, ExactError> {
    match t {
        Term::Var(x) => env
            .lookup(x)
            .cloned()
            .map(FinDist::dirac)
            .ok_or_else(|| ExactError::Unbound(x.clone())),
        Term::Unit => Ok(FinDist::dirac(Value::Unit)),
        Term::Pair(a, b) => eval_in(model, env, a)?.try_bind(|va| {
            Ok(eval_in(model, env, b)?.map(|vb| Value::pair(va.clone(), vb.clone())))
        }),
        Term::Fst(p) | Term::Snd(p) => {
            let first = matches!(t, Term::Fst(_));
            eval_in(model, env, p)?.try_bind(|v| match v {
                Value::Pair(a, b) => Ok(FinDist::dirac(if first { (**a).clone() } else { (**b).clone() })),
                other => Err(shape("a pair", other)),
            })
        }
        Term::Inl(a) => Ok(eval_in(model, env, a)?.map(|v| Value::Inl(Box::new(v.clone())))),
        Term::Inr(a) => Ok(eval_in(model, env, a)?.map(|v| Value::Inr(Box::new(v.clone())))),
        Term::Let(x, bound, body) => {
            eval_in(model, env, bound)?.try_bind(|v| eval_in(model, &env.bind(x, v.clone()), body))
        }
        Term::Absurd(s) => eval_in(model, env, s)?.try_bind(|v| Err(shape("nothing (void)", v))),
        Term::Case(s, x1, u1, x2, u2) => eval_in(model, env, s)?.try_bind(|v| match v {
            Value::Inl(a) => eval_in(model, &env.bind(x1, (**a).clone()), u1),
            Value::Inr(b) => eval_in(model, &env.bind(x2, (**b).clone()), u2),
            other => Err(shape("an injection", other)),
        }),
        Term::App(c, a) => {
            let arg = eval_in(model, env, a)?;
            match c {
                Constant::New => Ok(arg.bind(|_| model.new_distribution())),
                Constant::Bernoulli(q) => Ok(arg.bind(|_| FinDist::bernoulli(q))),
                Constant::Edge => arg.try_bind(|v| {
                    let (i, j) = vertex_pair(v, model)?;
                    Ok(model.edge_distribution(i, j))
                }),
            }
        }
    }
}

fn vertex_pair(v: &Value, model: &FiniteModel) -> Result<(usize, usize), ExactError> {
    let (a, b) = match v {
        Value::Pair(a, b) => (a, b),
        other => return Err(shape("a pair of vertices", other)),
    };
    let idx = |x: &Value| -> Result<usize, ExactError> {
        let i = x.as_vertex().ok_or_else(|| shape("a vertex", x))?;
        if (i as usize) < model.vertex_count() {
            Ok(i as usize)
        } else {
            Err(ExactError::VertexRange(i))
        }
    };
    Ok((idx(a)?, idx(b)?))
}

/// All environments for `ctx`, as value tuples in lexicographic order of
/// the context entries.
pub fn enumerate_envs(ctx: &Context, vertices: u32) -> Vec<Vec<Value>> {
    ctx.entries().iter().fold(vec![Vec::new()], |acc, (_, ty)| {
        let vals = enumerate_with_vertices(ty, vertices);
        acc.into_iter()
            .flat_map(|prefix| {
                vals.iter().map(move |v| {
                    let mut p = prefix.clone();
                    p.push(v.clone());
                    p
                })
            })
            .collect()
    })
}

pub fn env_of(ctx: &Context, values: &[Value]) -> Env {
    Env::from_bindings(ctx.names().map(String::as_str).zip(values.iter().cloned()))
}

/// The denotation of `ctx ⊢ t` as a stochastic matrix from the enumerated
/// environments of `ctx` to the canonical inhabitants of the result type.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Denotation {
    pub domain: Vec<Vec<Value>>,
    pub codomain: Vec<Value>,
    pub matrix: StochMatrix,
}

impl Denotation {
    pub fn row_dist(&self, row: usize) -> FinDist<Value> {
        FinDist::accumulate(
            self.codomain
                .iter()
                .cloned()
                .zip(self.matrix.row(row).iter().cloned()),
        )
    }
}

pub fn denote(model: &FiniteModel, ctx: &Context, t: &Term) -> Result<Denotation, ExactError> {
    let elab = elaborate(ctx, t)?;
    let mut builder = MatrixBuilder {
        model,
        m: model.vertex_count() as u32,
        types: &elab.node_types,
        cursor: 0,
    };
    let matrix = builder.build(ctx, t)?;
    Ok(Denotation {
        domain: enumerate_envs(ctx, builder.m),
        codomain: enumerate_with_vertices(&elab.ty, builder.m),
        matrix,
    })
}

struct MatrixBuilder<'a> {
    model: &'a FiniteModel,
    m: u32,
    types: &'a [Type],
    cursor: usize,
}

fn index_of(values: &[Value]) -> HashMap<&Value, usize> {
    values.iter().enumerate().map(|(i, v)| (v, i)).collect()
}

fn stochastic_rows(cols: usize, rows: Vec<Vec<Rational>>) -> Result<StochMatrix, ExactError> {
    Ok(StochMatrix::new(cols, rows)?)
}

impl MatrixBuilder<'_> {
    fn values(&self, ty: &Type) -> Vec<Value> {
        enumerate_with_vertices(ty, self.m)
    }

    /// Deterministic matrix of a function between enumerated sets.
    fn function(&self, from: &[Value], to: &[Value], f: impl Fn(&Value) -> Value) -> StochMatrix {
        let idx = index_of(to);
        StochMatrix::deterministic(from.len(), to.len(), |i| idx[&f(&from[i])])
    }

    /// `Γ → Γ × A`: copy the environment, run `m_t`, keep both.
    fn with_context(&self, envs: &[Vec<Value>], ext: &[Value], m_t: &StochMatrix) -> Vec<Vec<Rational>> {
        (0..envs.len())
            .map(|g| {
                let mut row = vec![Rational::zero(); envs.len() * ext.len()];
                for (a, p) in m_t.row(g).iter().enumerate() {
                    row[g * ext.len() + a] = p.clone();
                }
                row
            })
            .collect()
    }

    /// Reindexing `Γ × A → Γ, x:A` (the extended context may drop a
    /// shadowed entry of `Γ`).
    fn reindex(&self, ctx: &Context, x: &str, ty: &Type, ext: &[Value]) -> (Context, StochMatrix) {
        let inner = ctx.extended(x, ty.clone());
        let envs = enumerate_envs(ctx, self.m);
        let inner_envs = enumerate_envs(&inner, self.m);
        let idx: HashMap<&Vec<Value>, usize> = inner_envs.iter().enumerate().map(|(i, e)| (e, i)).collect();
        let names: Vec<&String> = ctx.names().collect();
        let rows = envs.len() * ext.len();
        let matrix = StochMatrix::deterministic(rows, inner_envs.len(), |r| {
            let (g, a) = (r / ext.len(), r % ext.len());
            let mut target: Vec<Value> = names
                .iter()
                .zip(&envs[g])
                .filter(|(n, _)| n.as_str() != x)
                .map(|(_, v)| v.clone())
                .collect();
            target.push(ext[a].clone());
            idx[&target]
        });
        (inner, matrix)
    }

    fn build(&mut self, ctx: &Context, t: &Term) -> Result<StochMatrix, ExactError> {
        let here = self.cursor;
        self.cursor += 1;
        let out_ty = self.types[here].clone();
        let out_vals = self.values(&out_ty);
        let envs = enumerate_envs(ctx, self.m);
        match t {
            Term::Var(x) => {
                let pos = ctx
                    .names()
                    .position(|n| n == x)
                    .ok_or_else(|| ExactError::Unbound(x.clone()))?;
                let idx = index_of(&out_vals);
                Ok(StochMatrix::deterministic(envs.len(), out_vals.len(), |g| idx[&envs[g][pos]]))
            }
            Term::Unit => Ok(StochMatrix::deterministic(envs.len(), 1, |_| 0)),
            Term::Pair(a, b) => {
                let ma = self.build(ctx, a)?;
                let mb = self.build(ctx, b)?;
                // independent product of the two rows, then flatten (A × B)
                let rows = (0..envs.len())
                    .map(|g| {
                        let mut row = Vec::with_capacity(ma.cols() * mb.cols());
                        for pa in ma.row(g) {
                            for pb in mb.row(g) {
                                row.push(pa * pb);
                            }
                        }
                        row
                    })
                    .collect();
                stochastic_rows(out_vals.len(), rows)
            }
            Term::Fst(p) | Term::Snd(p) => {
                let pair_ty = self.types[self.cursor].clone();
                let mp = self.build(ctx, p)?;
                let first = matches!(t, Term::Fst(_));
                let proj = self.function(&self.values(&pair_ty), &out_vals, |v| match v {
                    Value::Pair(a, b) => if first { (**a).clone() } else { (**b).clone() },
                    _ => unreachable!("enumerated product values are pairs"),
                });
                Ok(mp.compose(&proj)?)
            }
            Term::Inl(a) | Term::Inr(a) => {
                let inner_ty = self.types[self.cursor].clone();
                let ma = self.build(ctx, a)?;
                let left = matches!(t, Term::Inl(_));
                let inj = self.function(&self.values(&inner_ty), &out_vals, |v| {
                    if left { Value::Inl(Box::new(v.clone())) } else { Value::Inr(Box::new(v.clone())) }
                });
                Ok(ma.compose(&inj)?)
            }
            Term::Let(x, bound, body) => {
                let bound_ty = self.types[self.cursor].clone();
                let ext = self.values(&bound_ty);
                let mt = self.build(ctx, bound)?;
                let pairing = stochastic_rows(envs.len() * ext.len(), self.with_context(&envs, &ext, &mt))?;
                let (inner, reindex) = self.reindex(ctx, x, &bound_ty, &ext);
                let mu = self.build(&inner, body)?;
                Ok(pairing.compose(&reindex)?.compose(&mu)?)
            }
            Term::Absurd(s) => {
                let ms = self.build(ctx, s)?;
                if ms.rows() > 0 {
                    return Err(ExactError::Shape {
                        expected: "an empty context for absurd",
                        found: format!("{} environments", ms.rows()),
                    });
                }
                Ok(StochMatrix::new(out_vals.len(), Vec::new())?)
            }
            Term::Case(s, x1, u1, x2, u2) => {
                let sum_ty = self.types[self.cursor].clone();
                let (l_ty, r_ty) = match &sum_ty {
                    Type::Sum(l, r) => ((**l).clone(), (**r).clone()),
                    other => {
                        return Err(ExactError::Shape {
                            expected: "a sum type",
                            found: other.to_string(),
                        })
                    }
                };
                let scrut_vals = self.values(&sum_ty);
                let ms = self.build(ctx, s)?;
                let pairing = stochastic_rows(envs.len() * scrut_vals.len(), self.with_context(&envs, &scrut_vals, &ms))?;
                let (ctx1, re1) = self.reindex(ctx, x1, &l_ty, &self.values(&l_ty));
                let m1 = self.build(&ctx1, u1)?;
                let (ctx2, re2) = self.reindex(ctx, x2, &r_ty, &self.values(&r_ty));
                let m2 = self.build(&ctx2, u2)?;
                let k1 = re1.compose(&m1)?;
                let k2 = re2.compose(&m2)?;
                let (nl, nr) = (self.values(&l_ty).len(), self.values(&r_ty).len());
                // distributivity Γ × (A1 + A2) ≅ Γ × A1 + Γ × A2, then copair
                let rows = (0..envs.len() * scrut_vals.len())
                    .map(|r| {
                        let (g, s) = (r / scrut_vals.len(), r % scrut_vals.len());
                        if s < nl {
                            k1.row(g * nl + s).to_vec()
                        } else {
                            k2.row(g * nr + (s - nl)).to_vec()
                        }
                    })
                    .collect();
                let copair = stochastic_rows(out_vals.len(), rows)?;
                Ok(pairing.compose(&copair)?)
            }
            Term::App(c, a) => {
                let arg_ty = self.types[self.cursor].clone();
                let ma = self.build(ctx, a)?;
                let arg_vals = self.values(&arg_ty);
                let kernel_rows: Vec<Vec<Rational>> = arg_vals
                    .iter()
                    .map(|v| {
                        let d = match c {
                            Constant::New => self.model.new_distribution(),
                            Constant::Bernoulli(q) => FinDist::bernoulli(q),
                            Constant::Edge => {
                                let (i, j) = vertex_pair(v, self.model)?;
                                self.model.edge_distribution(i, j)
                            }
                        };
                        Ok(out_vals.iter().map(|o| d.prob(o)).collect())
                    })
                    .collect::<Result<_, ExactError>>()?;
                let kernel = stochastic_rows(out_vals.len(), kernel_rows)?;
                Ok(ma.compose(&kernel)?)
            }
        }
    }
}

/// Convenience: `P(outcome = true)` of a closed boolean program.
pub fn prob_true(model: &FiniteModel, t: &Term) -> Result<Rational, ExactError> {
    Ok(eval_exact(model, t)?.prob_true())
}
