//! Symbolic evaluation: a closed program becomes a finite list of weighted
//! leaves, each recording the edge queries it depends on among abstract
//! vertices `0..k`. Probabilities under a graphon follow by summing leaf
//! weights times the graphon's probability of the recorded edges.

use std::collections::{BTreeMap, BTreeSet};

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::exact::FinDist;
use crate::graphon::{constraint_probability, AdjMatrix, Graphon, GraphonError, RandomGraphModel};
use crate::lang::{elaborate, gen_t_n, Constant, Context, Env, Term, Type, TypeError, Value};
use crate::rational::{format_rational, one_minus, Rational};

pub const DEFAULT_RGM_BOUND: usize = 4;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SymbolicError {
    #[error(transparent)]
    Type(#[from] TypeError),
    #[error("term is not closed: free variable `{0}`")]
    Open(String),
    #[error("result type `{0}` mentions vertex; only numeral types can be observed")]
    VertexResult(Type),
    #[error("runtime shape error at `{0}`")]
    Shape(String),
    #[error(transparent)]
    Graphon(#[from] GraphonError),
}

/// Decided edges between abstract vertices, keyed on unordered pairs.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct EdgeAssignment(BTreeMap<(u32, u32), bool>);

fn key(i: u32, j: u32) -> (u32, u32) {
    assert_ne!(i, j, "edge assignments never contain self-pairs");
    (i.min(j), i.max(j))
}

impl EdgeAssignment {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get(&self, i: u32, j: u32) -> Option<bool> {
        if i == j {
            return None;
        }
        self.0.get(&key(i, j)).copied()
    }

    pub fn insert(&mut self, i: u32, j: u32, edge: bool) {
        self.0.insert(key(i, j), edge);
    }

    pub fn iter(&self) -> impl Iterator<Item = ((u32, u32), bool)> + '_ {
        self.0.iter().map(|(&k, &b)| (k, b))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn vertices(&self) -> BTreeSet<u32> {
        self.0.keys().flat_map(|&(i, j)| [i, j]).collect()
    }

    /// Whether the graph `g` agrees with every decided pair.
    pub fn consistent_with(&self, g: &AdjMatrix) -> bool {
        self.iter().all(|((i, j), b)| g.get(i as usize, j as usize) == b)
    }

    fn to_json(&self) -> BTreeMap<String, bool> {
        self.iter().map(|((i, j), b)| (format!("{i}-{j}"), b)).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Leaf {
    pub weight: Rational,
    pub edges: EdgeAssignment,
    /// Number of vertices allocated on the path to this leaf.
    pub k: u32,
    pub out: Value,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LeafJson {
    pub w: String,
    pub edges: BTreeMap<String, bool>,
    pub k: u32,
    pub out: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NormalForm {
    pub ty: Type,
    pub leaves: Vec<Leaf>,
}

impl NormalForm {
    pub fn max_k(&self) -> u32 {
        self.leaves.iter().map(|l| l.k).max().unwrap_or(0)
    }

    /// Total coin weight of the leaves consistent with the graph `g` on
    /// `max_k()` or more vertices. Equals one for every such graph.
    pub fn consistent_weight(&self, g: &AdjMatrix) -> Rational {
        self.leaves
            .iter()
            .filter(|l| l.edges.consistent_with(g))
            .map(|l| l.weight.clone())
            .sum()
    }

    pub fn to_json(&self) -> Vec<LeafJson> {
        self.leaves
            .iter()
            .map(|l| LeafJson {
                w: format_rational(&l.weight),
                edges: l.edges.to_json(),
                k: l.k,
                out: l.out.to_string(),
            })
            .collect()
    }
}

#[derive(Debug, Clone)]
struct State {
    weight: Rational,
    edges: EdgeAssignment,
    k: u32,
}

type Branches = Vec<(State, Value)>;

fn shape(t: &Term) -> SymbolicError {
    let mut s = t.to_string();
    if s.len() > 60 {
        s.truncate(57);
        s.push_str("...");
    }
    SymbolicError::Shape(s)
}

/// Runs `t` through every branch, left to right, true branches first.
fn run(env: &Env, t: &Term, st: State) -> Result<Branches, SymbolicError> {
    match t {
        Term::Var(x) => {
            let v = env.lookup(x).cloned().ok_or_else(|| SymbolicError::Open(x.clone()))?;
            Ok(vec![(st, v)])
        }
        Term::Unit => Ok(vec![(st, Value::Unit)]),
        Term::Pair(a, b) => {
            let mut out = Vec::new();
            for (s1, va) in run(env, a, st)? {
                for (s2, vb) in run(env, b, s1)? {
                    out.push((s2, Value::pair(va.clone(), vb)));
                }
            }
            Ok(out)
        }
        Term::Fst(p) | Term::Snd(p) => run(env, p, st)?
            .into_iter()
            .map(|(s, v)| match v {
                Value::Pair(a, b) => Ok((s, if matches!(t, Term::Fst(_)) { *a } else { *b })),
                _ => Err(shape(t)),
            })
            .collect(),
        Term::Inl(a) => Ok(run(env, a, st)?
            .into_iter()
            .map(|(s, v)| (s, Value::Inl(Box::new(v))))
            .collect()),
        Term::Inr(a) => Ok(run(env, a, st)?
            .into_iter()
            .map(|(s, v)| (s, Value::Inr(Box::new(v))))
            .collect()),
        Term::Let(x, bound, body) => {
            let mut out = Vec::new();
            for (s, v) in run(env, bound, st)? {
                out.extend(run(&env.bind(x, v), body, s)?);
            }
            Ok(out)
        }
        Term::Absurd(_) => Err(shape(t)),
        Term::Case(scrut, x1, u1, x2, u2) => {
            let mut out = Vec::new();
            for (s, v) in run(env, scrut, st)? {
                match v {
                    Value::Inl(a) => out.extend(run(&env.bind(x1, *a), u1, s)?),
                    Value::Inr(b) => out.extend(run(&env.bind(x2, *b), u2, s)?),
                    _ => return Err(shape(t)),
                }
            }
            Ok(out)
        }
        Term::App(c, arg) => {
            let mut out = Vec::new();
            for (s, v) in run(env, arg, st)? {
                match c {
                    Constant::New => {
                        let fresh = s.k;
                        out.push((State { k: s.k + 1, ..s }, Value::Vertex(fresh)));
                    }
                    Constant::Bernoulli(q) => {
                        for (b, p) in [(true, q.clone()), (false, one_minus(q))] {
                            if !p.is_zero() {
                                let weight = &s.weight * p;
                                out.push((State { weight, ..s.clone() }, Value::bool(b)));
                            }
                        }
                    }
                    Constant::Edge => {
                        let (i, j) = match &v {
                            Value::Pair(a, b) => match (a.as_vertex(), b.as_vertex()) {
                                (Some(i), Some(j)) => (i, j),
                                _ => return Err(shape(t)),
                            },
                            _ => return Err(shape(t)),
                        };
                        if i == j {
                            out.push((s, Value::bool(false)));
                        } else if let Some(b) = s.edges.get(i, j) {
                            out.push((s, Value::bool(b)));
                        } else {
                            for b in [true, false] {
                                let mut next = s.clone();
                                next.edges.insert(i, j, b);
                                out.push((next, Value::bool(b)));
                            }
                        }
                    }
                }
            }
            Ok(out)
        }
    }
}

/// Symbolically evaluates a closed program of numeral (vertex-free) type.
pub fn normalize(t: &Term) -> Result<NormalForm, SymbolicError> {
    if let Some(x) = t.free_vars().into_iter().next() {
        return Err(SymbolicError::Open(x));
    }
    let ty = elaborate(&Context::empty(), t)?.ty;
    if ty.mentions_vertex() {
        return Err(SymbolicError::VertexResult(ty));
    }
    let start = State {
        weight: Rational::one(),
        edges: EdgeAssignment::new(),
        k: 0,
    };
    let leaves = run(&Env::empty(), t, start)?
        .into_iter()
        .map(|(s, out)| Leaf {
            weight: s.weight,
            edges: s.edges,
            k: s.k,
            out,
        })
        .collect();
    Ok(NormalForm { ty, leaves })
}

/// The outcome distribution of a normal form under a constant or step
/// graphon.
pub fn outcome_distribution(nf: &NormalForm, w: &Graphon) -> Result<FinDist<Value>, SymbolicError> {
    let mut items = Vec::with_capacity(nf.leaves.len());
    for leaf in &nf.leaves {
        let p = constraint_probability(w, leaf.k, &leaf.edges)?;
        items.push((leaf.out.clone(), &leaf.weight * p));
    }
    Ok(FinDist::from_weights(items).expect("leaf weights of a normal form sum to one"))
}

pub fn induced_rgm(w: &Graphon, n_max: usize) -> Result<RandomGraphModel, SymbolicError> {
    induced_rgm_bounded(w, n_max, DEFAULT_RGM_BOUND)
}

/// The random graph model `(⟦t_n⟧)_n` of the matrix programs, each
/// evaluated symbolically under `w`.
pub fn induced_rgm_bounded(w: &Graphon, n_max: usize, bound: usize) -> Result<RandomGraphModel, SymbolicError> {
    if n_max > bound {
        return Err(GraphonError::Bound { n: n_max, bound }.into());
    }
    let mut levels = Vec::with_capacity(n_max);
    for n in 1..=n_max {
        let nf = normalize(&gen_t_n(n))?;
        let dist = outcome_distribution(&nf, w)?;
        let items = dist.iter().map(|(v, p)| {
            let rows = v.as_bool_matrix(n).ok_or_else(|| SymbolicError::Shape(v.to_string()))?;
            let g = AdjMatrix::from_rows(&rows)?;
            Ok((g, p.clone()))
        });
        let items = items.collect::<Result<Vec<_>, SymbolicError>>()?;
        levels.push(FinDist::from_weights(items).expect("reshaping preserves mass"));
    }
    Ok(RandomGraphModel::new(levels)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graphon::p_w_n;
    use crate::lang::parse;
    use crate::rational::{int, pow, ratio};

    fn nf(src: &str) -> NormalForm {
        normalize(&parse(src).unwrap()).unwrap()
    }

    const TRIANGLE: &str = "let a = new() in let b = new() in let c = new() in \
                            edge(a,b) & edge(b,c) & edge(a,c)";

    #[test]
    fn single_query_forks_once() {
        let n = nf("let a = new() in let b = new() in edge(a,b)");
        assert_eq!(n.leaves.len(), 2);
        let first = &n.leaves[0];
        assert_eq!((first.weight.clone(), first.k, first.out.clone()), (int(1), 2, Value::bool(true)));
        assert_eq!(first.edges.get(0, 1), Some(true));
        assert_eq!(n.leaves[1].edges.get(1, 0), Some(false));
        assert_eq!(n.leaves[1].out, Value::bool(false));
    }

    #[test]
    fn repeated_queries_are_memoized() {
        let n = nf("let a = new() in let b = new() in edge(a,b) & not edge(a,b)");
        assert!(n.leaves.iter().all(|l| l.out == Value::bool(false)));
        let loop_nf = nf("let a = new() in edge(a,a)");
        assert_eq!(loop_nf.leaves.len(), 1);
        assert_eq!(loop_nf.leaves[0].out, Value::bool(false));
        assert!(loop_nf.leaves[0].edges.is_empty());
        assert_eq!(loop_nf.leaves[0].k, 1);
    }

    #[test]
    fn triangle_under_constant_half() {
        let d = outcome_distribution(&nf(TRIANGLE), &Graphon::constant(ratio(1, 2)).unwrap()).unwrap();
        // oracle: sum over the 8 assignments of the three pairs
        let mut oracle = int(0);
        for mask in 0..8u32 {
            let present = mask.count_ones() as usize;
            let weight = pow(&ratio(1, 2), present) * pow(&ratio(1, 2), 3 - present);
            if mask == 0b111 {
                oracle += weight;
            }
        }
        assert_eq!(d.prob_true(), oracle);
        assert_eq!(d.prob_true(), ratio(1, 8));
    }

    #[test]
    fn discard_and_degenerate_coins() {
        let w = Graphon::constant(ratio(1, 5)).unwrap();
        let d = outcome_distribution(&nf("let a = new() in true"), &w).unwrap();
        assert_eq!(d, FinDist::dirac(Value::bool(true)));
        assert_eq!(nf("bernoulli(1)").leaves.len(), 1);
        assert_eq!(nf("bernoulli(0)").leaves[0].out, Value::bool(false));
    }

    #[test]
    fn vertex_results_are_rejected() {
        assert!(matches!(normalize(&parse("new()").unwrap()), Err(SymbolicError::VertexResult(_))));
        assert!(matches!(normalize(&parse("x").unwrap()), Err(SymbolicError::Open(_))));
    }

    #[test]
    fn t2_structure() {
        let a = ratio(3, 7);
        let w = Graphon::constant(a.clone()).unwrap();
        let d = outcome_distribution(&normalize(&gen_t_n(2)).unwrap(), &w).unwrap();
        let m = |e: bool| Value::bool_matrix(&[vec![false, e], vec![e, false]]);
        assert_eq!(d.prob(&m(true)), a);
        assert_eq!(d.prob(&m(false)), one_minus(&a));
    }

    #[test]
    fn induced_rgm_equals_pwn() {
        let w = Graphon::step(
            vec![ratio(1, 3), ratio(2, 3)],
            vec![vec![ratio(1, 2), ratio(1, 4)], vec![ratio(1, 4), ratio(3, 4)]],
        )
        .unwrap();
        let rgm = induced_rgm(&w, 4).unwrap();
        for n in 1..=4 {
            assert_eq!(rgm.p(n), &p_w_n(&w, n).unwrap());
        }
        assert!(induced_rgm(&w, 5).is_err());
    }

    #[test]
    fn leaf_totality() {
        let n = nf("let a = new() in let b = new() in let c = new() in \
                    if bernoulli(1/3) then edge(a,b) | edge(b,c) else edge(c,a)");
        let k = n.max_k() as usize;
        for g in AdjMatrix::all(k) {
            assert_eq!(n.consistent_weight(&g), int(1));
        }
    }

    #[test]
    fn json_dump() {
        let n = nf("let a = new() in let b = new() in edge(b,a)");
        let j = serde_json::to_value(n.to_json()).unwrap();
        assert_eq!(j[0], serde_json::json!({"w": "1/1", "edges": {"0-1": true}, "k": 2, "out": "true"}));
    }
}
