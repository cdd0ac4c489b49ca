//! Forward sampling: programs run against concrete random-graph
//! implementations with a memoized edge oracle, and Monte Carlo estimates
//! of their outcome distributions.

use std::collections::{BTreeMap, HashMap};

use num_traits::ToPrimitive;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;

use crate::exact::{FiniteModel, ModelJson};
use crate::graphon::{AdjMatrix, Graphon, SphereSpec};
use crate::lang::{elaborate, gen_t_n, Constant, Context, Env, Term, Type, TypeError, Value};
use crate::rational::{as_u64_pair, is_probability, lcm_of_denominators, parse_rational, to_f64, Rational};

const UNIT_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SamplerError {
    #[error(transparent)]
    Type(#[from] TypeError),
    #[error("term is not closed: free variable `{0}`")]
    Open(String),
    #[error("result type `{0}` mentions vertex; only numeral types can be sampled")]
    VertexResult(Type),
    #[error("runtime shape error at `{0}`")]
    Shape(String),
    #[error("vector of norm {0} is not a unit vector")]
    NonUnit(f64),
    #[error("vectors have dimensions {0} and {1}")]
    Dimension(usize, usize),
    #[error("need at least one trial")]
    NoTrials,
    #[error("invalid implementation spec: {0}")]
    Spec(String),
}

/// A concrete implementation of the graph interface.
#[derive(Debug, Clone, PartialEq)]
pub enum GraphImpl {
    /// Uniform points on the unit sphere, adjacent when closer than an angle.
    Sphere(SphereSpec),
    /// Fresh vertices; each queried pair is decided once by a coin of bias `α`.
    ErMemo(Rational),
    /// Vertices draw a colour from `weights`; pairs are decided once with
    /// probability `matrix[c][c']`.
    StepColor { weights: Vec<Rational>, matrix: Vec<Vec<Rational>> },
    /// Vertices drawn from a finite model; queries on the same pair of model
    /// vertices are decided once per run.
    Finite(FiniteModel),
}

impl GraphImpl {
    pub fn from_graphon(w: &Graphon) -> Self {
        match w {
            Graphon::Constant { alpha } => GraphImpl::ErMemo(alpha.clone()),
            Graphon::Step { weights, matrix } => GraphImpl::StepColor {
                weights: weights.clone(),
                matrix: matrix.clone(),
            },
            Graphon::Predicate(spec) => GraphImpl::Sphere(*spec),
        }
    }

    /// Parses an implementation spec: any graphon spec, or
    /// `{"kind":"er-memo","alpha":"1/2"}`, or `{"kind":"finite", ...model}`.
    pub fn parse_json(text: &str) -> Result<Self, SamplerError> {
        let spec = |e: String| SamplerError::Spec(e);
        let raw: serde_json::Value = serde_json::from_str(text).map_err(|e| spec(e.to_string()))?;
        let kind = raw.get("kind").and_then(|k| k.as_str()).ok_or_else(|| spec("missing \"kind\"".into()))?;
        match kind {
            "er-memo" => {
                let alpha = raw
                    .get("alpha")
                    .and_then(|a| a.as_str())
                    .ok_or_else(|| spec("er-memo needs \"alpha\"".into()))?;
                let alpha = parse_rational(alpha).map_err(|e| spec(e.to_string()))?;
                if !is_probability(&alpha) {
                    return Err(spec(format!("alpha {alpha} is outside [0, 1]")));
                }
                Ok(GraphImpl::ErMemo(alpha))
            }
            "finite" => {
                let json: ModelJson = serde_json::from_value(raw).map_err(|e| spec(e.to_string()))?;
                Ok(GraphImpl::Finite(FiniteModel::from_json(&json).map_err(|e| spec(e.to_string()))?))
            }
            _ => Ok(GraphImpl::from_graphon(&Graphon::parse_json(text).map_err(spec)?)),
        }
    }
}

/// Draws `true` with probability `p`; exact when the fraction fits in `u64`.
fn coin(rng: &mut ChaCha8Rng, p: &Rational) -> bool {
    match as_u64_pair(p) {
        Some((n, d)) => rng.gen_range(0..d) < n,
        None => rng.gen_bool(to_f64(p).clamp(0.0, 1.0)),
    }
}

/// Draws an index with probability proportional to `weights`.
fn pick(rng: &mut ChaCha8Rng, weights: &[Rational]) -> usize {
    let lcm = lcm_of_denominators(weights);
    if let Some(total) = lcm.to_u64() {
        let scaled: Vec<u64> = weights
            .iter()
            .map(|w| (w.numer() * (&lcm / w.denom())).to_u64().expect("at most the common denominator"))
            .collect();
        let mut u = rng.gen_range(0..total);
        for (i, s) in scaled.iter().enumerate() {
            if u < *s {
                return i;
            }
            u -= s;
        }
        return weights.len() - 1;
    }
    let mut u: f64 = rng.gen();
    for (i, w) in weights.iter().enumerate() {
        u -= to_f64(w);
        if u < 0.0 {
            return i;
        }
    }
    weights.len() - 1
}

pub fn random_unit_vector(rng: &mut impl Rng, d: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..d).map(|_| rng.sample(StandardNormal)).collect();
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-12 {
            return v.into_iter().map(|x| x / norm).collect();
        }
    }
}

/// Whether the angle between unit vectors `v` and `w` is strictly below
/// `theta`.
pub fn sphere_edge(v: &[f64], w: &[f64], theta: f64) -> Result<bool, SamplerError> {
    if v.len() != w.len() {
        return Err(SamplerError::Dimension(v.len(), w.len()));
    }
    for x in [v, w] {
        let norm = x.iter().map(|c| c * c).sum::<f64>().sqrt();
        if (norm - 1.0).abs() > UNIT_TOLERANCE {
            return Err(SamplerError::NonUnit(norm));
        }
    }
    let dot: f64 = v.iter().zip(w).map(|(a, b)| a * b).sum();
    Ok(dot.clamp(-1.0, 1.0).acos() < theta)
}

/// Which trial of which seed: together they fix every random choice.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RunSeed {
    pub seed: u64,
    pub trial: u64,
}

impl RunSeed {
    pub fn rng(self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.trial);
        rng
    }
}

enum Latent {
    Point(Vec<f64>),
    Color(usize),
    Model(usize),
    Plain,
}

/// Per-run state: the allocated vertices and the memo of decided pairs.
struct Run<'a> {
    imp: &'a GraphImpl,
    rng: ChaCha8Rng,
    vertices: Vec<Latent>,
    memo: HashMap<(usize, usize), bool>,
}

fn shape(t: &Term) -> SamplerError {
    SamplerError::Shape(t.to_string())
}

impl Run<'_> {
    fn new_vertex(&mut self) -> Value {
        let latent = match self.imp {
            GraphImpl::Sphere(spec) => Latent::Point(random_unit_vector(&mut self.rng, spec.d)),
            GraphImpl::ErMemo(_) => Latent::Plain,
            GraphImpl::StepColor { weights, .. } => Latent::Color(pick(&mut self.rng, weights)),
            GraphImpl::Finite(model) => Latent::Model(pick(&mut self.rng, model.new_weights())),
        };
        self.vertices.push(latent);
        Value::Vertex((self.vertices.len() - 1) as u32)
    }

    fn edge(&mut self, i: usize, j: usize) -> Result<bool, SamplerError> {
        let key = match (&self.vertices[i], &self.vertices[j]) {
            (Latent::Model(a), Latent::Model(b)) => (*a.min(b), *a.max(b)),
            _ if i == j => return Ok(false),
            _ => (i.min(j), i.max(j)),
        };
        if let Some(&b) = self.memo.get(&key) {
            return Ok(b);
        }
        let b = match (self.imp, &self.vertices[i], &self.vertices[j]) {
            (GraphImpl::Sphere(spec), Latent::Point(v), Latent::Point(w)) => sphere_edge(v, w, spec.theta)?,
            (GraphImpl::ErMemo(alpha), ..) => coin(&mut self.rng, alpha),
            (GraphImpl::StepColor { matrix, .. }, Latent::Color(a), Latent::Color(b)) => {
                coin(&mut self.rng, &matrix[*a][*b])
            }
            (GraphImpl::Finite(model), ..) => coin(&mut self.rng, model.edge_prob(key.0, key.1)),
            _ => unreachable!("latent data matches the implementation"),
        };
        self.memo.insert(key, b);
        Ok(b)
    }

    fn eval(&mut self, env: &Env, t: &Term) -> Result<Value, SamplerError> {
        Ok(match t {
            Term::Var(x) => env.lookup(x).cloned().ok_or_else(|| SamplerError::Open(x.clone()))?,
            Term::Unit => Value::Unit,
            Term::Pair(a, b) => {
                let va = self.eval(env, a)?;
                Value::pair(va, self.eval(env, b)?)
            }
            Term::Fst(p) | Term::Snd(p) => match self.eval(env, p)? {
                Value::Pair(a, b) => {
                    if matches!(t, Term::Fst(_)) {
                        *a
                    } else {
                        *b
                    }
                }
                _ => return Err(shape(t)),
            },
            Term::Inl(a) => Value::Inl(Box::new(self.eval(env, a)?)),
            Term::Inr(a) => Value::Inr(Box::new(self.eval(env, a)?)),
            Term::Let(x, bound, body) => {
                let v = self.eval(env, bound)?;
                self.eval(&env.bind(x, v), body)?
            }
            Term::Absurd(_) => return Err(shape(t)),
            Term::Case(s, x1, u1, x2, u2) => match self.eval(env, s)? {
                Value::Inl(a) => self.eval(&env.bind(x1, *a), u1)?,
                Value::Inr(b) => self.eval(&env.bind(x2, *b), u2)?,
                _ => return Err(shape(t)),
            },
            Term::App(c, arg) => {
                let v = self.eval(env, arg)?;
                match c {
                    Constant::New => self.new_vertex(),
                    Constant::Bernoulli(q) => Value::bool(coin(&mut self.rng, q)),
                    Constant::Edge => {
                        let (i, j) = match &v {
                            Value::Pair(a, b) => match (a.as_vertex(), b.as_vertex()) {
                                (Some(i), Some(j)) => (i as usize, j as usize),
                                _ => return Err(shape(t)),
                            },
                            _ => return Err(shape(t)),
                        };
                        Value::bool(self.edge(i, j)?)
                    }
                }
            }
        })
    }
}

fn prepare(t: &Term) -> Result<Type, SamplerError> {
    if let Some(x) = t.free_vars().into_iter().next() {
        return Err(SamplerError::Open(x));
    }
    let ty = elaborate(&Context::empty(), t)?.ty;
    if ty.mentions_vertex() {
        return Err(SamplerError::VertexResult(ty));
    }
    Ok(ty)
}

fn run_checked(t: &Term, imp: &GraphImpl, seed: RunSeed) -> Result<Value, SamplerError> {
    let mut run = Run {
        imp,
        rng: seed.rng(),
        vertices: Vec::new(),
        memo: HashMap::new(),
    };
    run.eval(&Env::empty(), t)
}

/// One forward run of a closed program of numeral type.
pub fn run_once(t: &Term, imp: &GraphImpl, seed: RunSeed) -> Result<Value, SamplerError> {
    prepare(t)?;
    run_checked(t, imp, seed)
}

/// Outcome counts over a number of independent trials.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EmpiricalDist<T: Ord> {
    pub counts: BTreeMap<T, u64>,
    pub trials: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EmpiricalOutcome {
    pub value: String,
    pub count: u64,
    pub p: f64,
    pub se: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EmpiricalJson {
    pub trials: u64,
    pub outcomes: Vec<EmpiricalOutcome>,
}

impl<T: Ord + Clone> EmpiricalDist<T> {
    pub fn frequency(&self, v: &T) -> f64 {
        self.counts.get(v).copied().unwrap_or(0) as f64 / self.trials as f64
    }

    /// `sqrt(p̂ (1 - p̂) / N)`.
    pub fn standard_error(&self, v: &T) -> f64 {
        let p = self.frequency(v);
        (p * (1.0 - p) / self.trials as f64).sqrt()
    }

    /// Distance from `p` in standard errors; infinite when the estimate is
    /// degenerate and differs from `p`.
    pub fn z_score(&self, v: &T, p: f64) -> f64 {
        let diff = (self.frequency(v) - p).abs();
        let se = self.standard_error(v);
        if se == 0.0 {
            if diff < 1e-12 {
                0.0
            } else {
                f64::INFINITY
            }
        } else {
            diff / se
        }
    }

    pub fn map<U: Ord + Clone>(&self, f: impl Fn(&T) -> U) -> EmpiricalDist<U> {
        let mut counts = BTreeMap::new();
        for (v, c) in &self.counts {
            *counts.entry(f(v)).or_insert(0) += c;
        }
        EmpiricalDist {
            counts,
            trials: self.trials,
        }
    }
}

impl<T: Ord + Clone + std::fmt::Display> EmpiricalDist<T> {
    pub fn to_json(&self) -> EmpiricalJson {
        EmpiricalJson {
            trials: self.trials,
            outcomes: self
                .counts
                .iter()
                .map(|(v, &count)| EmpiricalOutcome {
                    value: v.to_string(),
                    count,
                    p: self.frequency(v),
                    se: self.standard_error(v),
                })
                .collect(),
        }
    }
}

/// Monte Carlo estimate over `trials` runs. Trial `i` uses substream `i` of
/// `seed`, so the result does not depend on the thread schedule.
pub fn estimate(t: &Term, imp: &GraphImpl, trials: u64, seed: u64) -> Result<EmpiricalDist<Value>, SamplerError> {
    if trials == 0 {
        return Err(SamplerError::NoTrials);
    }
    prepare(t)?;
    let counts = (0..trials)
        .into_par_iter()
        .try_fold(BTreeMap::new, |mut acc: BTreeMap<Value, u64>, trial| {
            let v = run_checked(t, imp, RunSeed { seed, trial })?;
            *acc.entry(v).or_insert(0) += 1;
            Ok::<_, SamplerError>(acc)
        })
        .try_reduce(BTreeMap::new, |mut a, b| {
            for (v, c) in b {
                *a.entry(v).or_insert(0) += c;
            }
            Ok(a)
        })?;
    Ok(EmpiricalDist { counts, trials })
}

/// Sampled adjacency matrices of the `n`-vertex matrix program.
pub fn empirical_rgm(imp: &GraphImpl, n: usize, trials: u64, seed: u64) -> Result<EmpiricalDist<AdjMatrix>, SamplerError> {
    let est = estimate(&gen_t_n(n), imp, trials, seed)?;
    let mut counts = BTreeMap::new();
    for (v, c) in est.counts {
        let rows = v.as_bool_matrix(n).ok_or_else(|| SamplerError::Shape(v.to_string()))?;
        let g = AdjMatrix::from_rows(&rows).map_err(|e| SamplerError::Shape(e.to_string()))?;
        *counts.entry(g).or_insert(0) += c;
    }
    Ok(EmpiricalDist { counts, trials })
}
