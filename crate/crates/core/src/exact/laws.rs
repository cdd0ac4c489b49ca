//! Program equations and model axioms, checked by exact comparison of both
//! sides in every environment of their context.

use std::fmt;

use rayon::prelude::*;
use serde::Serialize;

use crate::exact::eval::{enumerate_envs, env_of, eval_in, ExactError};
use crate::exact::model::FiniteModel;
use crate::lang::{elaborate, Context, Term, Type, Value};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Law {
    /// `let y = (let x = t in u) in t'  ≡  let x = t in let y = u in t'`
    LetAssoc,
    /// `(t, u)  ≡  let x = t in let y = u in (x, y)`
    LetPair,
    /// `let x = t in let x' = t' in u  ≡  let x' = t' in let x = t in u`
    LetComm,
    /// `let x = t' in t  ≡  t`
    Affine,
    /// `let x = v in t  ≡  t[v/x]`
    LetValue,
    /// `edge(x, x)  ≡  false`
    SelfLoop,
    /// `edge(x, y)  ≡  edge(y, x)`
    Symmetry,
    /// `edge(a, b) & not edge(a, b)  ≡  false`
    Determinism,
}

impl Law {
    pub const ALL: [Law; 8] = [
        Law::LetAssoc,
        Law::LetPair,
        Law::LetComm,
        Law::Affine,
        Law::LetValue,
        Law::SelfLoop,
        Law::Symmetry,
        Law::Determinism,
    ];

    pub const PROGRAM_EQUATIONS: [Law; 5] = [Law::LetAssoc, Law::LetPair, Law::LetComm, Law::Affine, Law::LetValue];

    pub fn name(self) -> &'static str {
        match self {
            Law::LetAssoc => "let-assoc",
            Law::LetPair => "let-pair",
            Law::LetComm => "let-comm",
            Law::Affine => "affine",
            Law::LetValue => "let-value",
            Law::SelfLoop => "self-loop",
            Law::Symmetry => "symmetry",
            Law::Determinism => "determinism",
        }
    }

    pub fn from_name(s: &str) -> Option<Law> {
        Law::ALL.into_iter().find(|l| l.name() == s)
    }

    fn failure_note(self) -> &'static str {
        match self {
            Law::SelfLoop | Law::Symmetry => "model violates simple-graph axiom",
            Law::Determinism => "model edge kernel resamples repeated queries",
            _ => "sides denote different distributions",
        }
    }

    /// The canonical open instance of a model axiom.
    pub fn axiom_instance(self) -> Option<LawInstance> {
        let v = || Type::Vertex;
        let (ctx, lhs, rhs) = match self {
            Law::SelfLoop => (
                Context::from_entries([("x".into(), v())]),
                Term::edge(Term::var("x"), Term::var("x")),
                Term::ff(),
            ),
            Law::Symmetry => (
                Context::from_entries([("x".into(), v()), ("y".into(), v())]),
                Term::edge(Term::var("x"), Term::var("y")),
                Term::edge(Term::var("y"), Term::var("x")),
            ),
            Law::Determinism => {
                let e = || Term::edge(Term::var("a"), Term::var("b"));
                (
                    Context::from_entries([("a".into(), v()), ("b".into(), v())]),
                    Term::and(e(), Term::not(e())),
                    Term::ff(),
                )
            }
            _ => return None,
        };
        Some(LawInstance {
            law: self,
            ctx,
            lhs,
            rhs,
            value: None,
        })
    }
}

impl fmt::Display for Law {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum LawError {
    #[error("side condition of {law} fails: `{var}` is free in `{term}`")]
    SideCondition { law: Law, var: String, term: String },
    #[error("instance of {law} is ill-typed: {source}")]
    IllTyped { law: Law, source: ExactError },
    #[error("instance of {law} has sides of different types: {lhs} vs {rhs}")]
    TypeDisagreement { law: Law, lhs: Type, rhs: Type },
    #[error("instance of {found} submitted to the {expected} check")]
    WrongLaw { expected: Law, found: Law },
}

/// Both sides of one law instance, typed in `ctx`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LawInstance {
    pub law: Law,
    pub ctx: Context,
    pub lhs: Term,
    pub rhs: Term,
    /// The substituted term for [`Law::LetValue`].
    pub value: Option<Term>,
}

fn fresh_in(law: Law, x: &str, t: &Term) -> Result<(), LawError> {
    if t.free_vars().contains(x) {
        Err(LawError::SideCondition {
            law,
            var: x.to_string(),
            term: t.to_string(),
        })
    } else {
        Ok(())
    }
}

impl LawInstance {
    pub fn let_assoc(ctx: Context, x: &str, t: Term, u: Term, y: &str, t2: Term) -> Result<Self, LawError> {
        fresh_in(Law::LetAssoc, x, &t2)?;
        Ok(LawInstance {
            law: Law::LetAssoc,
            lhs: Term::let_in(y, Term::let_in(x, t.clone(), u.clone()), t2.clone()),
            rhs: Term::let_in(x, t, Term::let_in(y, u, t2)),
            ctx,
            value: None,
        })
    }

    pub fn let_pair(ctx: Context, x: &str, t: Term, y: &str, u: Term) -> Result<Self, LawError> {
        fresh_in(Law::LetPair, x, &u)?;
        if x == y {
            return Err(LawError::SideCondition {
                law: Law::LetPair,
                var: x.to_string(),
                term: format!("({x}, {y})"),
            });
        }
        Ok(LawInstance {
            law: Law::LetPair,
            lhs: Term::pair(t.clone(), u.clone()),
            rhs: Term::let_in(x, t, Term::let_in(y, u, Term::pair(Term::var(x), Term::var(y)))),
            ctx,
            value: None,
        })
    }

    pub fn let_comm(ctx: Context, x: &str, t: Term, x2: &str, t2: Term, u: Term) -> Result<Self, LawError> {
        fresh_in(Law::LetComm, x, &t2)?;
        fresh_in(Law::LetComm, x2, &t)?;
        if x == x2 {
            return Err(LawError::SideCondition {
                law: Law::LetComm,
                var: x.to_string(),
                term: u.to_string(),
            });
        }
        Ok(LawInstance {
            law: Law::LetComm,
            lhs: Term::let_in(x, t.clone(), Term::let_in(x2, t2.clone(), u.clone())),
            rhs: Term::let_in(x2, t2, Term::let_in(x, t, u)),
            ctx,
            value: None,
        })
    }

    pub fn affine(ctx: Context, x: &str, discarded: Term, t: Term) -> Result<Self, LawError> {
        fresh_in(Law::Affine, x, &t)?;
        Ok(LawInstance {
            law: Law::Affine,
            lhs: Term::let_in(x, discarded, t.clone()),
            rhs: t,
            ctx,
            value: None,
        })
    }

    pub fn let_value(ctx: Context, x: &str, v: Term, t: Term) -> Self {
        LawInstance {
            law: Law::LetValue,
            lhs: Term::let_in(x, v.clone(), t.clone()),
            rhs: t.subst(x, &v),
            ctx,
            value: Some(v),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "verdict", rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail {
        /// The first environment (variable bindings) on which the sides differ.
        env: Vec<(String, String)>,
        lhs: String,
        rhs: String,
        note: String,
    },
    /// The instance falls outside the law's side condition.
    Skipped { reason: String },
}

impl Verdict {
    pub fn is_fail(&self) -> bool {
        matches!(self, Verdict::Fail { .. })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LawReport {
    pub law: Law,
    pub passed: usize,
    pub failed: usize,
    pub skipped: usize,
    pub verdicts: Vec<Verdict>,
}

impl LawReport {
    pub fn ok(&self) -> bool {
        self.failed == 0
    }

    pub fn first_failure(&self) -> Option<&Verdict> {
        self.verdicts.iter().find(|v| v.is_fail())
    }
}

fn check_one(model: &FiniteModel, inst: &LawInstance) -> Result<Verdict, LawError> {
    let law = inst.law;
    if law == Law::LetValue {
        if let Some(v) = &inst.value {
            if !v.is_syntactically_deterministic() {
                return Ok(Verdict::Skipped {
                    reason: format!("`{v}` is not syntactically deterministic"),
                });
            }
        }
    }
    let typed = |t: &Term| {
        elaborate(&inst.ctx, t)
            .map(|e| e.ty)
            .map_err(|e| LawError::IllTyped { law, source: e.into() })
    };
    let (lt, rt) = (typed(&inst.lhs)?, typed(&inst.rhs)?);
    if lt != rt {
        return Err(LawError::TypeDisagreement { law, lhs: lt, rhs: rt });
    }
    for values in enumerate_envs(&inst.ctx, model.vertex_count() as u32) {
        let env = env_of(&inst.ctx, &values);
        let eval = |t: &Term| eval_in(model, &env, t).map_err(|e| LawError::IllTyped { law, source: e });
        let (l, r) = (eval(&inst.lhs)?, eval(&inst.rhs)?);
        if l != r {
            return Ok(Verdict::Fail {
                env: inst.ctx.names().cloned().zip(values.iter().map(Value::to_string)).collect(),
                lhs: l.to_string(),
                rhs: r.to_string(),
                note: law.failure_note().to_string(),
            });
        }
    }
    Ok(Verdict::Pass)
}

/// Checks every instance of `law` against `model`. Instances are evaluated
/// in parallel; verdicts keep the input order.
pub fn check_law(model: &FiniteModel, law: Law, instances: &[LawInstance]) -> Result<LawReport, LawError> {
    if let Some(bad) = instances.iter().find(|i| i.law != law) {
        return Err(LawError::WrongLaw {
            expected: law,
            found: bad.law,
        });
    }
    let verdicts = instances
        .par_iter()
        .map(|inst| check_one(model, inst))
        .collect::<Result<Vec<_>, _>>()?;
    let count = |f: fn(&Verdict) -> bool| verdicts.iter().filter(|v| f(v)).count();
    Ok(LawReport {
        law,
        passed: count(|v| matches!(v, Verdict::Pass)),
        failed: count(Verdict::is_fail),
        skipped: count(|v| matches!(v, Verdict::Skipped { .. })),
        verdicts,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lang::parse;
    use crate::rational::ratio;

    fn p(s: &str) -> Term {
        parse(s).unwrap()
    }

    #[test]
    fn let_comm_on_coins() {
        let inst = LawInstance::let_comm(
            Context::empty(),
            "x",
            p("bernoulli(1/3)"),
            "x2",
            p("bernoulli(1/4)"),
            p("(x, x2)"),
        )
        .unwrap();
        let model = FiniteModel::two_cluster();
        let report = check_law(&model, Law::LetComm, std::slice::from_ref(&inst)).unwrap();
        assert!(report.ok());
        // oracle: the four-outcome product table
        let d = crate::exact::eval_exact(&model, &inst.lhs).unwrap();
        for (a, pa) in [(true, ratio(1, 3)), (false, ratio(2, 3))] {
            for (b, pb) in [(true, ratio(1, 4)), (false, ratio(3, 4))] {
                assert_eq!(d.prob(&Value::pair(Value::bool(a), Value::bool(b))), &pa * &pb);
            }
        }
    }

    #[test]
    fn two_cluster_has_self_loops() {
        let model = FiniteModel::two_cluster();
        let inst = Law::SelfLoop.axiom_instance().unwrap();
        let report = check_law(&model, Law::SelfLoop, &[inst]).unwrap();
        assert!(!report.ok());
        match report.first_failure().unwrap() {
            Verdict::Fail { note, lhs, .. } => {
                assert_eq!(note, "model violates simple-graph axiom");
                assert_eq!(lhs, "{true: 1/1}");
            }
            _ => unreachable!(),
        }
        let sym = check_law(&model, Law::Symmetry, &[Law::Symmetry.axiom_instance().unwrap()]).unwrap();
        assert!(sym.ok());
        let det = check_law(&model, Law::Determinism, &[Law::Determinism.axiom_instance().unwrap()]).unwrap();
        assert!(det.ok());
    }

    #[test]
    fn resampling_fails_determinism_with_quarter() {
        let model = FiniteModel::resampling(&ratio(1, 2), 2);
        let report = check_law(&model, Law::Determinism, &[Law::Determinism.axiom_instance().unwrap()]).unwrap();
        match report.first_failure().unwrap() {
            Verdict::Fail { lhs, .. } => assert_eq!(lhs, "{true: 1/4, false: 3/4}"),
            _ => unreachable!(),
        }
    }

    #[test]
    fn side_conditions_are_enforced() {
        assert!(LawInstance::affine(Context::empty(), "x", p("new()"), p("x")).is_err());
        assert!(LawInstance::let_comm(Context::empty(), "x", p("()"), "y", p("x"), p("()")).is_err());
        assert!(LawInstance::let_assoc(Context::empty(), "x", p("()"), p("()"), "y", p("x")).is_err());
    }

    #[test]
    fn let_value_requires_deterministic_value() {
        let model = FiniteModel::two_cluster();
        let effectful = LawInstance::let_value(Context::empty(), "x", p("bernoulli(1/2)"), p("x & x"));
        let pure = LawInstance::let_value(Context::empty(), "x", p("inl ()"), p("(x, x)"));
        let report = check_law(&model, Law::LetValue, &[effectful, pure]).unwrap();
        assert_eq!((report.passed, report.skipped, report.failed), (1, 1, 0));
    }

    #[test]
    fn ill_typed_instances_error() {
        let inst = LawInstance::affine(Context::empty(), "x", p("edge(())"), p("true")).unwrap();
        assert!(matches!(
            check_law(&FiniteModel::two_cluster(), Law::Affine, &[inst]),
            Err(LawError::IllTyped { .. })
        ));
    }
}
