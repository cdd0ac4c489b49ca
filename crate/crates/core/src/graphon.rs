//! Graphons, the random graph models they induce, and exact checkers for
//! exchangeability, consistency and locality.

use std::collections::BTreeSet;
use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use num_traits::{One, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::exact::{DistJson, FinDist};
use crate::rational::{self, is_probability, one_minus, pow, Rational};
use crate::symbolic::EdgeAssignment;

pub const DEFAULT_PWN_BOUND: usize = 5;
pub const MAX_EXCHANGEABLE_N: usize = 4;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum GraphonError {
    #[error("edge probability {0} is outside [0, 1]")]
    Probability(String),
    #[error("step weights must be non-negative and sum to 1")]
    Weights,
    #[error("step matrix must be a symmetric {k}x{k} table of probabilities")]
    Matrix { k: usize },
    #[error("sphere graphon needs d >= 2 and 0 < theta < pi (got d = {d}, theta = {theta})")]
    Sphere { d: usize, theta: String },
    #[error("the sphere graphon has no exact path; use the sampler")]
    NotExact,
    #[error("n = {n} exceeds the enumeration bound {bound}")]
    Bound { n: usize, bound: usize },
    #[error("edge constraint mentions vertex {vertex} but only {k} are allocated")]
    VertexOutOfRange { vertex: u32, k: u32 },
    #[error("invalid adjacency matrix: {0}")]
    Adjacency(String),
    #[error("index sets must be non-empty, disjoint and below n = {n}")]
    IndexSets { n: usize },
}

/// Latent geometry of the sphere graphon: points uniform on the unit
/// sphere in `R^d`, adjacent when their angle is below `theta`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SphereSpec {
    pub d: usize,
    pub theta: f64,
}

impl SphereSpec {
    pub fn new(d: usize, theta: f64) -> Result<Self, GraphonError> {
        let spec = SphereSpec { d, theta };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<(), GraphonError> {
        if self.d >= 2 && self.theta > 0.0 && self.theta < PI {
            Ok(())
        } else {
            Err(GraphonError::Sphere {
                d: self.d,
                theta: self.theta.to_string(),
            })
        }
    }

    /// Probability that two independent uniform points are within angle
    /// `theta`: the normalized area of a spherical cap,
    /// `∫_0^θ sin^{d-2} / ∫_0^π sin^{d-2}`.
    pub fn edge_probability(&self) -> f64 {
        if self.d == 3 {
            return (1.0 - self.theta.cos()) / 2.0;
        }
        let k = (self.d - 2) as i32;
        let f = |x: f64| x.sin().powi(k);
        simpson(f, 0.0, self.theta, 4096) / simpson(f, 0.0, PI, 4096)
    }
}

fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    let n = n + n % 2;
    let h = (b - a) / n as f64;
    let inner: f64 = (1..n)
        .map(|i| f(a + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 })
        .sum();
    (f(a) + f(b) + inner) * h / 3.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Graphon {
    Constant {
        #[serde(with = "rational::as_string")]
        alpha: Rational,
    },
    Step {
        #[serde(with = "rational::vec_as_string")]
        weights: Vec<Rational>,
        #[serde(with = "rational::matrix_as_string")]
        matrix: Vec<Vec<Rational>>,
    },
    /// A black-and-white graphon given by a predicate on latent points.
    #[serde(rename = "sphere")]
    Predicate(SphereSpec),
}

impl Graphon {
    pub fn constant(alpha: Rational) -> Result<Self, GraphonError> {
        let g = Graphon::Constant { alpha };
        g.validate()?;
        Ok(g)
    }

    pub fn step(weights: Vec<Rational>, matrix: Vec<Vec<Rational>>) -> Result<Self, GraphonError> {
        let g = Graphon::Step { weights, matrix };
        g.validate()?;
        Ok(g)
    }

    pub fn sphere(d: usize, theta: f64) -> Result<Self, GraphonError> {
        Ok(Graphon::Predicate(SphereSpec::new(d, theta)?))
    }

    pub fn validate(&self) -> Result<(), GraphonError> {
        match self {
            Graphon::Constant { alpha } if !is_probability(alpha) => {
                Err(GraphonError::Probability(rational::format_rational(alpha)))
            }
            Graphon::Constant { .. } => Ok(()),
            Graphon::Step { weights, matrix } => {
                let k = weights.len();
                if k == 0 || weights.iter().any(|w| !is_probability(w)) || !weights.iter().sum::<Rational>().is_one() {
                    return Err(GraphonError::Weights);
                }
                let square = matrix.len() == k && matrix.iter().all(|r| r.len() == k);
                if !square
                    || (0..k).any(|i| (0..k).any(|j| matrix[i][j] != matrix[j][i] || !is_probability(&matrix[i][j])))
                {
                    return Err(GraphonError::Matrix { k });
                }
                Ok(())
            }
            Graphon::Predicate(spec) => spec.validate(),
        }
    }

    pub fn parse_json(text: &str) -> Result<Self, String> {
        let g: Graphon = serde_json::from_str(text).map_err(|e| e.to_string())?;
        g.validate().map_err(|e| e.to_string())?;
        Ok(g)
    }

    /// The marginal probability of a single edge.
    pub fn edge_density(&self) -> f64 {
        match self {
            Graphon::Predicate(spec) => spec.edge_probability(),
            exact => rational::to_f64(&exact.exact_edge_density().expect("exact graphon")),
        }
    }

    pub fn exact_edge_density(&self) -> Result<Rational, GraphonError> {
        let mut c = EdgeAssignment::new();
        c.insert(0, 1, true);
        constraint_probability(self, 2, &c)
    }
}

/// True when every edge probability is 0 or 1 (edges are a deterministic
/// function of the latent points).
pub fn is_black_and_white(w: &Graphon) -> bool {
    let crisp = |p: &Rational| p.is_zero() || p.is_one();
    match w {
        Graphon::Constant { alpha } => crisp(alpha),
        Graphon::Step { matrix, .. } => matrix.iter().flatten().all(crisp),
        Graphon::Predicate(_) => true,
    }
}

/// Probability under `w` that the decided pairs of `c` have the recorded
/// edge values, for `k` vertices drawn independently.
pub fn constraint_probability(w: &Graphon, k: u32, c: &EdgeAssignment) -> Result<Rational, GraphonError> {
    if let Some(v) = c.vertices().into_iter().find(|&v| v >= k) {
        return Err(GraphonError::VertexOutOfRange { vertex: v, k });
    }
    match w {
        Graphon::Constant { alpha } => {
            let yes = c.iter().filter(|(_, b)| *b).count();
            Ok(pow(alpha, yes) * pow(&one_minus(alpha), c.len() - yes))
        }
        Graphon::Step { weights, matrix } => {
            let verts: Vec<u32> = c.vertices().into_iter().collect();
            let slot = |v: u32| verts.binary_search(&v).expect("mentioned vertex");
            let pairs: Vec<(usize, usize, bool)> = c.iter().map(|((i, j), b)| (slot(i), slot(j), b)).collect();
            let kk = weights.len();
            let mut colors = vec![0usize; verts.len()];
            let mut total = Rational::zero();
            loop {
                let mut term: Rational = colors.iter().map(|&g| &weights[g]).product();
                for &(i, j, b) in &pairs {
                    if term.is_zero() {
                        break;
                    }
                    let p = &matrix[colors[i]][colors[j]];
                    term *= if b { p.clone() } else { one_minus(p) };
                }
                total += term;
                // odometer over [K]^V
                let mut pos = 0;
                loop {
                    if pos == colors.len() {
                        return Ok(total);
                    }
                    colors[pos] += 1;
                    if colors[pos] < kk {
                        break;
                    }
                    colors[pos] = 0;
                    pos += 1;
                }
            }
        }
        Graphon::Predicate(_) => Err(GraphonError::NotExact),
    }
}

/// A simple graph on `n ≤ 8` labelled vertices, as row-major adjacency
/// bits. Serialized as the string of its `n²` bits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct AdjMatrix {
    n: usize,
    bits: u64,
}

impl AdjMatrix {
    pub const MAX_N: usize = 8;

    pub fn empty(n: usize) -> Self {
        assert!(n <= Self::MAX_N, "at most {} vertices", Self::MAX_N);
        AdjMatrix { n, bits: 0 }
    }

    pub fn from_rows(rows: &[Vec<bool>]) -> Result<Self, GraphonError> {
        let n = rows.len();
        if n > Self::MAX_N || rows.iter().any(|r| r.len() != n) {
            return Err(GraphonError::Adjacency(format!("expected a square matrix of side at most {}", Self::MAX_N)));
        }
        let mut bits = 0u64;
        for (i, row) in rows.iter().enumerate() {
            for (j, &b) in row.iter().enumerate() {
                if b {
                    bits |= 1 << (i * n + j);
                }
            }
        }
        Self::from_bits(n, bits)
    }

    pub fn from_bits(n: usize, bits: u64) -> Result<Self, GraphonError> {
        let a = AdjMatrix { n, bits };
        if n > Self::MAX_N || (n * n < 64 && bits >> (n * n) != 0) {
            return Err(GraphonError::Adjacency("bits outside the matrix".into()));
        }
        for i in 0..n {
            if a.get(i, i) {
                return Err(GraphonError::Adjacency(format!("self-loop at {i}")));
            }
            for j in 0..i {
                if a.get(i, j) != a.get(j, i) {
                    return Err(GraphonError::Adjacency(format!("asymmetric at ({i}, {j})")));
                }
            }
        }
        Ok(a)
    }

    /// Every simple graph on `n` vertices, in order of the upper-triangle
    /// bit pattern.
    pub fn all(n: usize) -> Vec<AdjMatrix> {
        let pairs = Self::pairs(n);
        (0u64..1 << pairs.len())
            .map(|mask| {
                let mut a = AdjMatrix::empty(n);
                for (k, &(i, j)) in pairs.iter().enumerate() {
                    a.set(i, j, mask >> k & 1 == 1);
                }
                a
            })
            .collect()
    }

    /// Unordered pairs `i < j` of `[n]`, lexicographic.
    pub fn pairs(n: usize) -> Vec<(usize, usize)> {
        (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect()
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> bool {
        self.bits >> (i * self.n + j) & 1 == 1
    }

    /// Sets both `(i, j)` and `(j, i)`; `i` must differ from `j`.
    pub fn set(&mut self, i: usize, j: usize, edge: bool) {
        assert_ne!(i, j, "simple graphs have no self-loops");
        for (a, b) in [(i, j), (j, i)] {
            let bit = 1u64 << (a * self.n + b);
            if edge {
                self.bits |= bit;
            } else {
                self.bits &= !bit;
            }
        }
    }

    pub fn edge_count(&self) -> usize {
        self.bits.count_ones() as usize / 2
    }

    pub fn rows(&self) -> Vec<Vec<bool>> {
        (0..self.n).map(|i| (0..self.n).map(|j| self.get(i, j)).collect()).collect()
    }

    /// Relabels vertex `i` as `sigma[i]`.
    pub fn permuted(&self, sigma: &[usize]) -> AdjMatrix {
        let mut out = AdjMatrix::empty(self.n);
        for (i, j) in Self::pairs(self.n) {
            if self.get(i, j) {
                out.set(sigma[i], sigma[j], true);
            }
        }
        out
    }

    /// The subgraph induced on `indices`, relabelled `0..indices.len()`.
    pub fn induced(&self, indices: &[usize]) -> AdjMatrix {
        let mut out = AdjMatrix::empty(indices.len());
        for (a, &i) in indices.iter().enumerate() {
            for (b, &j) in indices.iter().enumerate().skip(a + 1) {
                out.set(a, b, self.get(i, j));
            }
        }
        out
    }

    pub fn delete_last(&self) -> AdjMatrix {
        let keep: Vec<usize> = (0..self.n.saturating_sub(1)).collect();
        self.induced(&keep)
    }
}

impl fmt::Display for AdjMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for k in 0..self.n * self.n {
            f.write_str(if self.bits >> k & 1 == 1 { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl FromStr for AdjMatrix {
    type Err = GraphonError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let n = (s.len() as f64).sqrt().round() as usize;
        if n * n != s.len() {
            return Err(GraphonError::Adjacency(format!("`{s}` is not a square bit string")));
        }
        let mut bits = 0u64;
        for (k, c) in s.chars().enumerate() {
            match c {
                '1' => bits |= 1 << k,
                '0' => {}
                _ => return Err(GraphonError::Adjacency(format!("bad bit `{c}`"))),
            }
        }
        AdjMatrix::from_bits(n, bits)
    }
}

impl Serialize for AdjMatrix {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for AdjMatrix {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// The sequence `p_1, ..., p_N` of distributions over labelled graphs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RandomGraphModel {
    levels: Vec<FinDist<AdjMatrix>>,
}

impl RandomGraphModel {
    pub fn new(levels: Vec<FinDist<AdjMatrix>>) -> Result<Self, GraphonError> {
        for (idx, p) in levels.iter().enumerate() {
            if let Some(bad) = p.support().find(|a| a.n() != idx + 1) {
                return Err(GraphonError::Adjacency(format!("level {} holds a graph on {} vertices", idx + 1, bad.n())));
            }
        }
        Ok(RandomGraphModel { levels })
    }

    /// `p_n`, for `1 ≤ n ≤ len()`.
    pub fn p(&self, n: usize) -> &FinDist<AdjMatrix> {
        &self.levels[n - 1]
    }

    pub fn len(&self) -> usize {
        self.levels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.levels.is_empty()
    }

    pub fn to_json(&self) -> Vec<DistJson> {
        self.levels.iter().map(FinDist::to_json).collect()
    }
}

/// `p_{W,n}`: the exact distribution of the graph on `n` vertices sampled
/// from `w`.
pub fn p_w_n(w: &Graphon, n: usize) -> Result<FinDist<AdjMatrix>, GraphonError> {
    p_w_n_bounded(w, n, DEFAULT_PWN_BOUND)
}

pub fn p_w_n_bounded(w: &Graphon, n: usize, bound: usize) -> Result<FinDist<AdjMatrix>, GraphonError> {
    if n > bound || n > AdjMatrix::MAX_N {
        return Err(GraphonError::Bound { n, bound });
    }
    if matches!(w, Graphon::Predicate(_)) {
        return Err(GraphonError::NotExact);
    }
    let mut items = Vec::new();
    for g in AdjMatrix::all(n) {
        let mut c = EdgeAssignment::new();
        for (i, j) in AdjMatrix::pairs(n) {
            c.insert(i as u32, j as u32, g.get(i, j));
        }
        items.push((g, constraint_probability(w, n as u32, &c)?));
    }
    Ok(FinDist::from_weights(items).expect("graph probabilities sum to one"))
}

pub fn graphon_rgm(w: &Graphon, n_max: usize) -> Result<RandomGraphModel, GraphonError> {
    RandomGraphModel::new((1..=n_max).map(|n| p_w_n(w, n)).collect::<Result<_, _>>()?)
}

/// Outcome of one property check.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PropertyCheck {
    pub property: String,
    pub pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<String>,
}

impl PropertyCheck {
    fn new(property: String, failure: Option<String>) -> Self {
        PropertyCheck {
            property,
            pass: failure.is_none(),
            witness: failure,
        }
    }
}

fn ensure_level(p: &FinDist<AdjMatrix>, n: usize) -> Result<(), GraphonError> {
    match p.support().find(|a| a.n() != n) {
        Some(a) => Err(GraphonError::Adjacency(format!("expected {n} vertices, found graph {a}"))),
        None => Ok(()),
    }
}

/// All permutations of `0..n` in lexicographic order.
pub fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for first in 0..n {
        for rest in permutations(n - 1) {
            let mut p = vec![first];
            p.extend(rest.into_iter().map(|x| if x >= first { x + 1 } else { x }));
            out.push(p);
        }
    }
    out
}

pub fn check_exchangeable(p: &FinDist<AdjMatrix>, n: usize) -> Result<PropertyCheck, GraphonError> {
    if n > MAX_EXCHANGEABLE_N {
        return Err(GraphonError::Bound {
            n,
            bound: MAX_EXCHANGEABLE_N,
        });
    }
    ensure_level(p, n)?;
    let failure = permutations(n)
        .into_iter()
        .find(|sigma| &p.map(|g| g.permuted(sigma)) != p)
        .map(|sigma| format!("relabelling {sigma:?} changes the distribution"));
    Ok(PropertyCheck::new(format!("exchangeable n={n}"), failure))
}

pub fn check_consistent(p_next: &FinDist<AdjMatrix>, p: &FinDist<AdjMatrix>) -> Result<PropertyCheck, GraphonError> {
    let n = p.support().next().map_or(0, AdjMatrix::n);
    ensure_level(p, n)?;
    ensure_level(p_next, n + 1)?;
    let marginal = p_next.map(AdjMatrix::delete_last);
    let failure = (&marginal != p).then(|| format!("marginal {marginal} differs from {p}"));
    Ok(PropertyCheck::new(format!("consistent n={n}->{}", n + 1), failure))
}

/// Independence of the subgraphs induced on the disjoint 0-based index
/// sets `a` and `b`.
pub fn check_local(p: &FinDist<AdjMatrix>, n: usize, a: &[usize], b: &[usize]) -> Result<PropertyCheck, GraphonError> {
    let sa: BTreeSet<usize> = a.iter().copied().collect();
    let sb: BTreeSet<usize> = b.iter().copied().collect();
    if sa.is_empty() || sb.is_empty() || !sa.is_disjoint(&sb) || sa.iter().chain(&sb).any(|&i| i >= n) {
        return Err(GraphonError::IndexSets { n });
    }
    ensure_level(p, n)?;
    let (a, b): (Vec<usize>, Vec<usize>) = (sa.into_iter().collect(), sb.into_iter().collect());
    let joint = p.map(|g| (g.induced(&a), g.induced(&b)));
    let product = p.map(|g| g.induced(&a)).product(&p.map(|g| g.induced(&b)));
    let failure = (joint != product).then(|| "joint law of the two blocks is not the product of marginals".to_string());
    Ok(PropertyCheck::new(format!("local n={n} A={a:?} B={b:?}"), failure))
}

/// Exchangeability for every level, consistency between consecutive
/// levels, and locality for every pair of disjoint non-empty index sets.
pub fn check_all(rgm: &RandomGraphModel) -> Result<Vec<PropertyCheck>, GraphonError> {
    let mut out = Vec::new();
    for n in 1..=rgm.len() {
        let p = rgm.p(n);
        out.push(check_exchangeable(p, n)?);
        if n > 1 {
            out.push(check_consistent(p, rgm.p(n - 1))?);
        }
        for (a, b) in disjoint_pairs(n) {
            out.push(check_local(p, n, &a, &b)?);
        }
    }
    Ok(out)
}

/// Unordered pairs of disjoint non-empty subsets of `0..n`.
pub fn disjoint_pairs(n: usize) -> Vec<(Vec<usize>, Vec<usize>)> {
    let mut out = Vec::new();
    // each vertex goes to A (1), B (2) or neither (0)
    for code in 0..3usize.pow(n as u32) {
        let (mut a, mut b, mut c) = (Vec::new(), Vec::new(), code);
        for i in 0..n {
            match c % 3 {
                1 => a.push(i),
                2 => b.push(i),
                _ => {}
            }
            c /= 3;
        }
        if !a.is_empty() && !b.is_empty() && a[0] < b[0] {
            out.push((a, b));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, ratio};

    fn assignment(pairs: &[(u32, u32, bool)]) -> EdgeAssignment {
        let mut c = EdgeAssignment::new();
        for &(i, j, b) in pairs {
            c.insert(i, j, b);
        }
        c
    }

    fn two_blocks() -> Graphon {
        Graphon::step(vec![ratio(1, 2), ratio(1, 2)], vec![vec![int(1), int(0)], vec![int(0), int(1)]]).unwrap()
    }

    fn mixed_blocks() -> Graphon {
        Graphon::step(
            vec![ratio(1, 3), ratio(2, 3)],
            vec![vec![ratio(1, 2), ratio(1, 4)], vec![ratio(1, 4), ratio(3, 4)]],
        )
        .unwrap()
    }

    // Oracle for step graphons: sum over every coloring of all n vertices.
    fn step_graph_probability(w: &Graphon, g: &AdjMatrix) -> Rational {
        let Graphon::Step { weights, matrix } = w else { unreachable!() };
        let n = g.n();
        let k = weights.len();
        let mut total = int(0);
        for code in 0..k.pow(n as u32) {
            let colors: Vec<usize> = (0..n).map(|i| code / k.pow(i as u32) % k).collect();
            let mut term: Rational = colors.iter().map(|&c| weights[c].clone()).product();
            for (i, j) in AdjMatrix::pairs(n) {
                let p = &matrix[colors[i]][colors[j]];
                term *= if g.get(i, j) { p.clone() } else { int(1) - p };
            }
            total += term;
        }
        total
    }

    #[test]
    fn constraint_probability_examples() {
        let half = Graphon::constant(ratio(1, 2)).unwrap();
        assert_eq!(constraint_probability(&half, 2, &assignment(&[(0, 1, true)])).unwrap(), ratio(1, 2));
        let third = Graphon::constant(ratio(1, 3)).unwrap();
        let c = assignment(&[(0, 1, true), (1, 2, false)]);
        assert_eq!(constraint_probability(&third, 3, &c).unwrap(), ratio(2, 9));
        assert_eq!(constraint_probability(&two_blocks(), 2, &assignment(&[(0, 1, true)])).unwrap(), ratio(1, 2));
        assert!(constraint_probability(&third, 1, &assignment(&[(0, 1, true)])).is_err());
        let sphere = Graphon::sphere(3, 1.0).unwrap();
        assert_eq!(constraint_probability(&sphere, 2, &EdgeAssignment::new()), Err(GraphonError::NotExact));
    }

    #[test]
    fn pwn_examples() {
        let half = Graphon::constant(ratio(1, 2)).unwrap();
        let p3 = p_w_n(&half, 3).unwrap();
        assert_eq!(p3.len(), 8);
        assert!(p3.iter().all(|(_, p)| *p == ratio(1, 8)));
        let a = ratio(2, 7);
        let p2 = p_w_n(&Graphon::constant(a.clone()).unwrap(), 2).unwrap();
        let edge = AdjMatrix::from_rows(&[vec![false, true], vec![true, false]]).unwrap();
        assert_eq!(p2.prob(&edge), a);
        assert_eq!(p_w_n(&half, 1).unwrap(), FinDist::dirac(AdjMatrix::empty(1)));
        assert!(p_w_n(&half, 6).is_err());
    }

    #[test]
    fn step_pwn_matches_full_coloring_oracle() {
        for w in [two_blocks(), mixed_blocks()] {
            for n in 1..=4 {
                let p = p_w_n(&w, n).unwrap();
                for g in AdjMatrix::all(n) {
                    assert_eq!(p.prob(&g), step_graph_probability(&w, &g));
                }
            }
        }
    }

    #[test]
    fn checkers_pass_on_graphons() {
        for w in [Graphon::constant(ratio(1, 3)).unwrap(), two_blocks(), mixed_blocks()] {
            let rgm = graphon_rgm(&w, 4).unwrap();
            let checks = check_all(&rgm).unwrap();
            assert!(checks.iter().all(|c| c.pass), "{checks:?}");
        }
    }

    #[test]
    fn checkers_detect_counterexamples() {
        let mut g = AdjMatrix::empty(3);
        g.set(0, 1, true);
        assert!(!check_exchangeable(&FinDist::dirac(g), 3).unwrap().pass);

        let mut e = AdjMatrix::empty(2);
        e.set(0, 1, true);
        let c = check_consistent(&FinDist::dirac(AdjMatrix::empty(3)), &FinDist::dirac(e)).unwrap();
        assert!(!c.pass);

        // the A- and B-blocks always agree
        let mut both = AdjMatrix::empty(4);
        both.set(0, 1, true);
        both.set(2, 3, true);
        let correlated = FinDist::uniform([AdjMatrix::empty(4), both]);
        assert!(!check_local(&correlated, 4, &[0, 1], &[2, 3]).unwrap().pass);
        assert!(check_local(&correlated, 4, &[0, 1], &[1, 3]).is_err());
    }

    #[test]
    fn black_and_white() {
        assert!(is_black_and_white(&two_blocks()));
        assert!(!is_black_and_white(&Graphon::constant(ratio(1, 2)).unwrap()));
        let w = Graphon::step(
            vec![ratio(1, 2), ratio(1, 2)],
            vec![vec![int(1), ratio(1, 2)], vec![ratio(1, 2), int(0)]],
        )
        .unwrap();
        assert!(!is_black_and_white(&w));
    }

    #[test]
    fn json_forms() {
        let c: Graphon = serde_json::from_str(r#"{"kind":"constant","alpha":"1/3"}"#).unwrap();
        assert_eq!(c, Graphon::constant(ratio(1, 3)).unwrap());
        let s = Graphon::parse_json(r#"{"kind":"step","weights":["1/2","1/2"],"matrix":[["1","0"],["0","1"]]}"#).unwrap();
        assert_eq!(s, two_blocks());
        let p = Graphon::parse_json(r#"{"kind":"sphere","d":3,"theta":1.0471975511965976}"#).unwrap();
        assert!(matches!(p, Graphon::Predicate(SphereSpec { d: 3, .. })));
        assert!(Graphon::parse_json(r#"{"kind":"step","weights":["1/2","1/2"],"matrix":[["1","1/3"],["0","1"]]}"#).is_err());
        let back: Graphon = serde_json::from_str(&serde_json::to_string(&mixed_blocks()).unwrap()).unwrap();
        assert_eq!(back, mixed_blocks());
    }

    #[test]
    fn adjacency_encoding() {
        let g: AdjMatrix = "0110".parse().unwrap();
        assert!(g.get(0, 1) && g.get(1, 0));
        assert_eq!(g.to_string(), "0110");
        assert!("1000".parse::<AdjMatrix>().is_err());
        assert!("0100".parse::<AdjMatrix>().is_err());
        assert_eq!(AdjMatrix::all(4).len(), 64);
    }

    #[test]
    fn sphere_cap_fraction() {
        let spec = SphereSpec::new(3, PI / 3.0).unwrap();
        assert!((spec.edge_probability() - 0.25).abs() < 1e-12);
        // d = 2: angle uniform on [0, π]
        let circle = SphereSpec::new(2, PI / 4.0).unwrap();
        assert!((circle.edge_probability() - 0.25).abs() < 1e-9);
        assert!(SphereSpec::new(3, 0.0).is_err());
        assert!(SphereSpec::new(1, 1.0).is_err());
    }
}
