//! Finitely supported subsets of the Rado graph and the internal measure
//! `ν_α` on them.
//!
//! A set with finite support `A = {a_1, ..., a_m}` is determined by which
//! support vertices it contains and, for vertices outside `A`, by their
//! connectivity type: the set of support vertices they are adjacent to. A
//! type is a bitmask whose bit `i` means adjacency to `a_i`. Under `ν_α` a
//! fresh vertex has type `τ` with probability `α^|τ| (1-α)^(m-|τ|)`; support
//! vertices themselves have measure zero.

use std::collections::BTreeMap;

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::exact::FinDist;
use crate::graphon::{p_w_n, AdjMatrix, Graphon};
use crate::rational::{format_rational, is_probability, one_minus, pow, Rational};

/// Arity-2 machinery caps the cross-check at three vertices.
pub const MAX_CROSS_CHECK_N: usize = 3;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum RadoError {
    #[error("support graph: {0}")]
    Support(String),
    #[error("support vertex `{0}` has different adjacency in the two supports")]
    Incompatible(String),
    #[error("adjacency between `{0}` and `{1}` is unknown; give an explicit common support")]
    UnknownAdjacency(String, String),
    #[error("table has {found} entries, expected {expected}")]
    TableSize { expected: usize, found: usize },
    #[error("value {0} is outside [0, 1]")]
    Range(String),
    #[error("unknown support vertex `{0}`")]
    UnknownName(String),
    #[error("cross-check is available for n <= {MAX_CROSS_CHECK_N}, got {0}")]
    Arity(usize),
    #[error("invalid JSON: {0}")]
    Json(String),
}

type Mask = u32;

fn pop(t: Mask) -> usize {
    t.count_ones() as usize
}

/// `ν_α` of the fresh vertices of type `t` over a support of size `m`.
pub fn type_weight(alpha: &Rational, m: usize, t: Mask) -> Rational {
    pow(alpha, pop(t)) * pow(&one_minus(alpha), m - pop(t))
}

/// Named support vertices with a simple graph among them.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SupportGraph {
    pub names: Vec<String>,
    pub adj: Vec<Vec<bool>>,
}

impl SupportGraph {
    pub const MAX_SIZE: usize = 12;

    pub fn empty() -> Self {
        SupportGraph {
            names: Vec::new(),
            adj: Vec::new(),
        }
    }

    pub fn new(names: Vec<String>, adj: Vec<Vec<bool>>) -> Result<Self, RadoError> {
        let g = SupportGraph { names, adj };
        g.validate()?;
        Ok(g)
    }

    /// Support vertices with no edges among them.
    pub fn independent(names: &[&str]) -> Self {
        let m = names.len();
        SupportGraph::new(names.iter().map(|s| s.to_string()).collect(), vec![vec![false; m]; m])
            .expect("distinct names")
    }

    pub fn validate(&self) -> Result<(), RadoError> {
        let m = self.names.len();
        if m > Self::MAX_SIZE {
            return Err(RadoError::Support(format!("at most {} vertices", Self::MAX_SIZE)));
        }
        if self.adj.len() != m || self.adj.iter().any(|r| r.len() != m) {
            return Err(RadoError::Support(format!("adjacency must be {m}x{m}")));
        }
        for i in 0..m {
            if self.adj[i][i] {
                return Err(RadoError::Support(format!("self-loop at `{}`", self.names[i])));
            }
            for j in 0..i {
                if self.adj[i][j] != self.adj[j][i] {
                    return Err(RadoError::Support("adjacency is not symmetric".into()));
                }
                if self.names[i] == self.names[j] {
                    return Err(RadoError::Support(format!("duplicate name `{}`", self.names[i])));
                }
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    pub fn types(&self) -> std::ops::Range<Mask> {
        0..(1 << self.len())
    }

    /// Adds a vertex with the given adjacency to the existing ones.
    pub fn extended(&self, name: &str, links: Mask) -> Result<Self, RadoError> {
        let mut names = self.names.clone();
        names.push(name.to_string());
        let m = self.len();
        let mut adj: Vec<Vec<bool>> = self
            .adj
            .iter()
            .enumerate()
            .map(|(i, row)| {
                let mut r = row.clone();
                r.push(links >> i & 1 == 1);
                r
            })
            .collect();
        adj.push((0..=m).map(|i| i < m && links >> i & 1 == 1).collect());
        SupportGraph::new(names, adj)
    }

    /// The type of support vertex `b` of `self` relative to the vertices of
    /// `sub`, which must be a subgraph of `self`.
    fn type_relative_to(&self, b: usize, sub: &SupportGraph) -> Mask {
        sub.names.iter().enumerate().fold(0, |acc, (i, n)| {
            let j = self.index_of(n).expect("subgraph name");
            acc | (self.adj[b][j] as Mask) << i
        })
    }

    /// For each type over `self`, the restriction to `sub`'s vertices.
    fn restriction(&self, sub: &SupportGraph) -> Vec<usize> {
        let pos: Vec<usize> = sub.names.iter().map(|n| self.index_of(n).expect("subgraph name")).collect();
        self.types()
            .map(|t| pos.iter().enumerate().fold(0, |acc, (i, &j)| acc | ((t >> j & 1) as usize) << i))
            .collect()
    }

    fn check_subgraph_of(&self, big: &SupportGraph) -> Result<(), RadoError> {
        for (i, n) in self.names.iter().enumerate() {
            let bi = big.index_of(n).ok_or_else(|| RadoError::UnknownName(n.clone()))?;
            for (j, n2) in self.names.iter().enumerate() {
                let bj = big.index_of(n2).expect("checked above");
                if self.adj[i][j] != big.adj[bi][bj] {
                    return Err(RadoError::Incompatible(n.clone()));
                }
            }
        }
        Ok(())
    }

    /// The union of two supports. Shared vertices must agree; adjacency
    /// between a vertex only in `self` and one only in `other` is not
    /// determined, so one support must contain the other unless an explicit
    /// common support is used.
    pub fn merge(&self, other: &SupportGraph) -> Result<SupportGraph, RadoError> {
        if other.check_subgraph_of(self).is_ok() {
            return Ok(self.clone());
        }
        if self.check_subgraph_of(other).is_ok() {
            return Ok(other.clone());
        }
        for (i, n) in self.names.iter().enumerate() {
            if let Some(oi) = other.index_of(n) {
                for (j, n2) in self.names.iter().enumerate() {
                    if let Some(oj) = other.index_of(n2) {
                        if self.adj[i][j] != other.adj[oi][oj] {
                            return Err(RadoError::Incompatible(n.clone()));
                        }
                    }
                }
            }
        }
        let only_self = self.names.iter().find(|n| other.index_of(n).is_none());
        let only_other = other.names.iter().find(|n| self.index_of(n).is_none());
        match (only_self, only_other) {
            (Some(a), Some(b)) => Err(RadoError::UnknownAdjacency(a.clone(), b.clone())),
            _ => unreachable!("one support contains the other"),
        }
    }

    fn type_key(&self, t: Mask) -> String {
        (0..self.len()).map(|i| if t >> i & 1 == 1 { '1' } else { '0' }).collect()
    }

    fn parse_type_key(&self, key: &str) -> Result<Mask, RadoError> {
        if key.len() != self.len() {
            return Err(RadoError::Json(format!("type key `{key}` has the wrong length")));
        }
        key.chars().enumerate().try_fold(0, |acc, (i, c)| match c {
            '1' => Ok(acc | 1 << i),
            '0' => Ok(acc),
            _ => Err(RadoError::Json(format!("bad type key `{key}`"))),
        })
    }
}

/// A finitely supported subset of the Rado graph's vertices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DefinableSet1 {
    support: SupportGraph,
    table: Vec<bool>,
    atoms: Vec<bool>,
}

impl DefinableSet1 {
    pub fn new(support: SupportGraph, table: Vec<bool>, atoms: Vec<bool>) -> Result<Self, RadoError> {
        support.validate()?;
        let expected = 1usize << support.len();
        if table.len() != expected {
            return Err(RadoError::TableSize {
                expected,
                found: table.len(),
            });
        }
        if atoms.len() != support.len() {
            return Err(RadoError::TableSize {
                expected: support.len(),
                found: atoms.len(),
            });
        }
        Ok(DefinableSet1 { support, table, atoms })
    }

    pub fn from_types(support: SupportGraph, member: impl Fn(Mask) -> bool) -> Self {
        let table = support.types().map(member).collect();
        let atoms = vec![false; support.len()];
        DefinableSet1 { support, table, atoms }
    }

    pub fn full(support: SupportGraph) -> Self {
        let mut s = Self::from_types(support, |_| true);
        s.atoms.iter_mut().for_each(|a| *a = true);
        s
    }

    pub fn empty(support: SupportGraph) -> Self {
        Self::from_types(support, |_| false)
    }

    /// `{name}` as a set supported by `support`.
    pub fn singleton(support: SupportGraph, name: &str) -> Result<Self, RadoError> {
        let i = support.index_of(name).ok_or_else(|| RadoError::UnknownName(name.into()))?;
        let mut s = Self::empty(support);
        s.atoms[i] = true;
        Ok(s)
    }

    /// Fresh vertices adjacent to `name` (support vertices excluded).
    pub fn neighbours_of(support: SupportGraph, name: &str) -> Result<Self, RadoError> {
        let i = support.index_of(name).ok_or_else(|| RadoError::UnknownName(name.into()))?;
        Ok(Self::from_types(support, |t| t >> i & 1 == 1))
    }

    pub fn support(&self) -> &SupportGraph {
        &self.support
    }

    pub fn contains_type(&self, t: Mask) -> bool {
        self.table[t as usize]
    }

    pub fn contains_atom(&self, name: &str) -> Option<bool> {
        self.support.index_of(name).map(|i| self.atoms[i])
    }

    pub fn measure(&self, alpha: &Rational) -> Rational {
        let m = self.support.len();
        self.support
            .types()
            .filter(|&t| self.table[t as usize])
            .map(|t| type_weight(alpha, m, t))
            .sum()
    }

    /// The same set described over a larger support, which must contain
    /// the current one as an induced subgraph.
    pub fn with_support(&self, big: &SupportGraph) -> Result<Self, RadoError> {
        self.support.check_subgraph_of(big)?;
        let restrict = big.restriction(&self.support);
        let table = restrict.iter().map(|&t| self.table[t]).collect();
        let atoms = (0..big.len())
            .map(|b| match self.support.index_of(&big.names[b]) {
                Some(i) => self.atoms[i],
                None => self.table[big.type_relative_to(b, &self.support) as usize],
            })
            .collect();
        Ok(DefinableSet1 {
            support: big.clone(),
            table,
            atoms,
        })
    }

    pub fn complement(&self) -> Self {
        DefinableSet1 {
            support: self.support.clone(),
            table: self.table.iter().map(|b| !b).collect(),
            atoms: self.atoms.iter().map(|b| !b).collect(),
        }
    }

    fn combine(&self, other: &Self, common: &SupportGraph, op: fn(bool, bool) -> bool) -> Result<Self, RadoError> {
        let (a, b) = (self.with_support(common)?, other.with_support(common)?);
        Ok(DefinableSet1 {
            support: common.clone(),
            table: a.table.iter().zip(&b.table).map(|(x, y)| op(*x, *y)).collect(),
            atoms: a.atoms.iter().zip(&b.atoms).map(|(x, y)| op(*x, *y)).collect(),
        })
    }

    pub fn union(&self, other: &Self) -> Result<Self, RadoError> {
        self.union_over(other, &self.support.merge(&other.support)?)
    }

    pub fn intersection(&self, other: &Self) -> Result<Self, RadoError> {
        self.intersection_over(other, &self.support.merge(&other.support)?)
    }

    pub fn union_over(&self, other: &Self, common: &SupportGraph) -> Result<Self, RadoError> {
        self.combine(other, common, |x, y| x || y)
    }

    pub fn intersection_over(&self, other: &Self, common: &SupportGraph) -> Result<Self, RadoError> {
        self.combine(other, common, |x, y| x && y)
    }

    /// Renames support vertices by `rename` (which must be injective).
    pub fn renamed(&self, rename: impl Fn(&str) -> String) -> Result<Self, RadoError> {
        let support = SupportGraph::new(self.support.names.iter().map(|n| rename(n)).collect(), self.support.adj.clone())?;
        Ok(DefinableSet1 {
            support,
            ..self.clone()
        })
    }

    pub fn to_json(&self) -> DefinableSet1Json {
        DefinableSet1Json {
            support: self.support.clone(),
            table: self
                .support
                .types()
                .map(|t| (self.support.type_key(t), self.table[t as usize]))
                .collect(),
            atoms: self.support.names.iter().cloned().zip(self.atoms.iter().copied()).collect(),
        }
    }

    pub fn from_json(json: &DefinableSet1Json) -> Result<Self, RadoError> {
        json.support.validate()?;
        let s = &json.support;
        let mut table = vec![None; 1 << s.len()];
        for (k, &b) in &json.table {
            table[s.parse_type_key(k)? as usize] = Some(b);
        }
        let table = table
            .into_iter()
            .enumerate()
            .map(|(t, b)| b.ok_or_else(|| RadoError::Json(format!("missing type {}", s.type_key(t as Mask)))))
            .collect::<Result<Vec<_>, _>>()?;
        let atoms = s
            .names
            .iter()
            .map(|n| json.atoms.get(n).copied().unwrap_or(false))
            .collect();
        if let Some(unknown) = json.atoms.keys().find(|k| s.index_of(k).is_none()) {
            return Err(RadoError::UnknownName(unknown.clone()));
        }
        DefinableSet1::new(s.clone(), table, atoms)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DefinableSet1Json {
    pub support: SupportGraph,
    pub table: BTreeMap<String, bool>,
    pub atoms: BTreeMap<String, bool>,
}

/// A finitely supported function from vertices to `[0, 1]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FinSuppFunction1 {
    support: SupportGraph,
    values: Vec<Rational>,
    atoms: Vec<Rational>,
}

impl FinSuppFunction1 {
    pub fn new(support: SupportGraph, values: Vec<Rational>, atoms: Vec<Rational>) -> Result<Self, RadoError> {
        let expected = 1usize << support.len();
        if values.len() != expected || atoms.len() != support.len() {
            return Err(RadoError::TableSize {
                expected,
                found: values.len(),
            });
        }
        if let Some(bad) = values.iter().chain(&atoms).find(|v| !is_probability(v)) {
            return Err(RadoError::Range(format_rational(bad)));
        }
        Ok(FinSuppFunction1 { support, values, atoms })
    }

    pub fn constant(support: SupportGraph, q: Rational) -> Result<Self, RadoError> {
        let m = support.len();
        Self::new(support, vec![q.clone(); 1 << m], vec![q; m])
    }

    pub fn indicator(s: &DefinableSet1) -> Self {
        let bit = |b: &bool| if *b { Rational::one() } else { Rational::zero() };
        FinSuppFunction1 {
            support: s.support.clone(),
            values: s.table.iter().map(bit).collect(),
            atoms: s.atoms.iter().map(bit).collect(),
        }
    }

    pub fn value_at_type(&self, t: Mask) -> &Rational {
        &self.values[t as usize]
    }

    pub fn support(&self) -> &SupportGraph {
        &self.support
    }
}

/// `∫ f dν_α`.
pub fn integrate(alpha: &Rational, f: &FinSuppFunction1) -> Rational {
    let m = f.support.len();
    f.support
        .types()
        .map(|t| &f.values[t as usize] * type_weight(alpha, m, t))
        .sum()
}

/// Where a pair `(x, y)` sits relative to the support.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PairPoint {
    /// Distinct fresh vertices with types `tx`, `ty` and edge bit `e`.
    Fresh { tx: Mask, ty: Mask, e: bool },
    /// `x = y`, fresh, of type `t`.
    Diagonal { t: Mask },
    /// `x` is support vertex `i`, `y` fresh of type `ty`.
    XAtom { i: usize, ty: Mask },
    /// `y` is support vertex `j`, `x` fresh of type `tx`.
    YAtom { j: usize, tx: Mask },
    BothAtoms { i: usize, j: usize },
}

/// A finitely supported subset of pairs of vertices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DefinableSet2 {
    support: SupportGraph,
    /// Indexed `(tx * 2^m + ty) * 2 + e`.
    pair: Vec<bool>,
    diag: Vec<bool>,
    x_atom: Vec<Vec<bool>>,
    y_atom: Vec<Vec<bool>>,
    both_atoms: Vec<Vec<bool>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Order {
    /// Inner integral over `y` with `ν_α`, outer over `x` with `ν_β`.
    Xy,
    /// Inner integral over `x` with `ν_β`, outer over `y` with `ν_α`.
    Yx,
}

impl DefinableSet2 {
    pub fn from_fn(support: SupportGraph, member: impl Fn(PairPoint) -> bool) -> Self {
        let m = support.len();
        let types: Vec<Mask> = support.types().collect();
        let mut pair = Vec::with_capacity(types.len() * types.len() * 2);
        for &tx in &types {
            for &ty in &types {
                for e in [false, true] {
                    pair.push(member(PairPoint::Fresh { tx, ty, e }));
                }
            }
        }
        DefinableSet2 {
            diag: types.iter().map(|&t| member(PairPoint::Diagonal { t })).collect(),
            x_atom: (0..m).map(|i| types.iter().map(|&ty| member(PairPoint::XAtom { i, ty })).collect()).collect(),
            y_atom: (0..m).map(|j| types.iter().map(|&tx| member(PairPoint::YAtom { j, tx })).collect()).collect(),
            both_atoms: (0..m).map(|i| (0..m).map(|j| member(PairPoint::BothAtoms { i, j })).collect()).collect(),
            support,
            pair,
        }
    }

    /// `{(x, y) : E(x, y)}`.
    pub fn edge() -> Self {
        Self::from_fn(SupportGraph::empty(), |p| matches!(p, PairPoint::Fresh { e: true, .. }))
    }

    /// `{(x, y) : x = y}`.
    pub fn diagonal() -> Self {
        Self::from_fn(SupportGraph::empty(), |p| matches!(p, PairPoint::Diagonal { .. }))
    }

    pub fn full(support: SupportGraph) -> Self {
        Self::from_fn(support, |_| true)
    }

    /// Pairs of distinct fresh vertices whose connections to the support
    /// are `phi` (for `x`) and `psi` (for `y`), with edge bit `eps`.
    pub fn extension(support: SupportGraph, phi: Mask, psi: Mask, eps: bool) -> Self {
        Self::from_fn(support, |p| p == PairPoint::Fresh { tx: phi, ty: psi, e: eps })
    }

    pub fn support(&self) -> &SupportGraph {
        &self.support
    }

    pub fn contains(&self, p: PairPoint) -> bool {
        let n = 1usize << self.support.len();
        match p {
            PairPoint::Fresh { tx, ty, e } => self.pair[(tx as usize * n + ty as usize) * 2 + e as usize],
            PairPoint::Diagonal { t } => self.diag[t as usize],
            PairPoint::XAtom { i, ty } => self.x_atom[i][ty as usize],
            PairPoint::YAtom { j, tx } => self.y_atom[j][tx as usize],
            PairPoint::BothAtoms { i, j } => self.both_atoms[i][j],
        }
    }

    /// The section at a fresh outer vertex of type `outer`, integrated over
    /// the inner variable with `ν_inner`. Inner points equal to the outer
    /// vertex or to a support vertex have measure zero; the remaining fresh
    /// points have a type over the support plus the edge to the outer one.
    fn inner_integral(&self, inner: &Rational, outer: Mask, order: Order) -> Rational {
        let m = self.support.len();
        let mut total = Rational::zero();
        for t in self.support.types() {
            for e in [false, true] {
                let p = match order {
                    Order::Xy => PairPoint::Fresh { tx: outer, ty: t, e },
                    Order::Yx => PairPoint::Fresh { tx: t, ty: outer, e },
                };
                if self.contains(p) {
                    total += type_weight(inner, m + 1, t | (e as Mask) << m);
                }
            }
        }
        total
    }

    /// The function of the outer variable obtained by integrating out the
    /// inner one.
    pub fn section(&self, alpha: &Rational, beta: &Rational, order: Order) -> FinSuppFunction1 {
        let inner = match order {
            Order::Xy => alpha,
            Order::Yx => beta,
        };
        let m = self.support.len();
        let values = self.support.types().map(|t| self.inner_integral(inner, t, order)).collect();
        // an outer support vertex sees inner fresh points by their type alone
        let atoms = (0..m)
            .map(|i| {
                self.support
                    .types()
                    .filter(|&t| match order {
                        Order::Xy => self.contains(PairPoint::XAtom { i, ty: t }),
                        Order::Yx => self.contains(PairPoint::YAtom { j: i, tx: t }),
                    })
                    .map(|t| type_weight(inner, m, t))
                    .sum()
            })
            .collect();
        FinSuppFunction1::new(self.support.clone(), values, atoms).expect("integrals of indicators lie in [0, 1]")
    }
}

/// `∫∫ [S](x, y)` in the given order: `Xy` is `∫ (∫ [S] ν_α(dy)) ν_β(dx)`,
/// `Yx` is `∫ (∫ [S] ν_β(dx)) ν_α(dy)`.
pub fn iterated_integral(alpha: &Rational, beta: &Rational, s: &DefinableSet2, order: Order) -> Rational {
    let outer = match order {
        Order::Xy => beta,
        Order::Yx => alpha,
    };
    integrate(outer, &s.section(alpha, beta, order))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FubiniItem {
    pub name: String,
    #[serde(serialize_with = "crate::rational::as_string::serialize")]
    pub xy: Rational,
    #[serde(serialize_with = "crate::rational::as_string::serialize")]
    pub yx: Rational,
    pub equal: bool,
    #[serde(skip_serializing_if = "Option::is_none", serialize_with = "ser_opt")]
    pub expected: Option<Rational>,
}

fn ser_opt<S: serde::Serializer>(v: &Option<Rational>, s: S) -> Result<S::Ok, S::Error> {
    match v {
        Some(r) => s.serialize_str(&format_rational(r)),
        None => s.serialize_none(),
    }
}

/// A named corpus entry with the value both orders should give
/// when `α = β`, if known.
#[derive(Debug, Clone)]
pub struct CorpusItem {
    pub name: String,
    pub set: DefinableSet2,
    pub expected: Option<Rational>,
}

/// Both iterated integrals for every item.
pub fn fubini_check(alpha: &Rational, beta: &Rational, corpus: &[CorpusItem]) -> Vec<FubiniItem> {
    corpus
        .iter()
        .map(|item| {
            let xy = iterated_integral(alpha, beta, &item.set, Order::Xy);
            let yx = iterated_integral(alpha, beta, &item.set, Order::Yx);
            FubiniItem {
                name: item.name.clone(),
                equal: xy == yx,
                xy,
                yx,
                expected: item.expected.clone(),
            }
        })
        .collect()
}

pub fn edge_corpus() -> Vec<CorpusItem> {
    vec![CorpusItem {
        name: "E(x,y)".into(),
        set: DefinableSet2::edge(),
        expected: None,
    }]
}

/// Every two-vertex extension `Φ_{A,φ,ψ,ε}` of a support `A` with at most
/// one vertex, plus the degenerate sets `x = y`, `x = a`, `y = a`. With
/// `α` the measure, extensions have value `α^k (1-α)^(2|A|+1-k)`; the
/// degenerate sets have value 0.
pub fn phi_corpus(alpha: &Rational) -> Vec<CorpusItem> {
    let mut out = Vec::new();
    for support in [SupportGraph::empty(), SupportGraph::independent(&["a"])] {
        let m = support.len();
        for phi in support.types() {
            for psi in support.types() {
                for eps in [false, true] {
                    let k = pop(phi) + pop(psi) + eps as usize;
                    let expected = pow(alpha, k) * pow(&one_minus(alpha), 2 * m + 1 - k);
                    out.push(CorpusItem {
                        name: format!(
                            "Phi[A={{{}}}, phi={}, psi={}, eps={}]",
                            support.names.join(","),
                            support.type_key(phi),
                            support.type_key(psi),
                            eps
                        ),
                        set: DefinableSet2::extension(support.clone(), phi, psi, eps),
                        expected: Some(expected),
                    });
                }
            }
        }
    }
    let a = SupportGraph::independent(&["a"]);
    let degenerate: [(&str, DefinableSet2); 3] = [
        ("x=y", DefinableSet2::diagonal()),
        ("x=a", DefinableSet2::from_fn(a.clone(), |p| matches!(p, PairPoint::XAtom { .. } | PairPoint::BothAtoms { .. }))),
        ("y=a", DefinableSet2::from_fn(a, |p| matches!(p, PairPoint::YAtom { .. } | PairPoint::BothAtoms { .. }))),
    ];
    for (name, set) in degenerate {
        out.push(CorpusItem {
            name: name.into(),
            set,
            expected: Some(Rational::zero()),
        });
    }
    out
}

/// The concrete graph on the support plus the points `x`, `y` of `p`
/// (identified when they coincide). Returns the adjacency matrix and the
/// indices of `x` and `y` in it.
pub fn realize(support: &SupportGraph, p: PairPoint) -> (Vec<Vec<bool>>, usize, usize) {
    let m = support.len();
    let linked = |t: Mask, i: usize| t >> i & 1 == 1;
    let mut fresh: Vec<Mask> = Vec::new();
    let (x, y) = match p {
        PairPoint::Fresh { tx, ty, .. } => {
            fresh.extend([tx, ty]);
            (m, m + 1)
        }
        PairPoint::Diagonal { t } => {
            fresh.push(t);
            (m, m)
        }
        PairPoint::XAtom { i, ty } => {
            fresh.push(ty);
            (i, m)
        }
        PairPoint::YAtom { j, tx } => {
            fresh.push(tx);
            (m, j)
        }
        PairPoint::BothAtoms { i, j } => (i, j),
    };
    let n = m + fresh.len();
    let mut adj = vec![vec![false; n]; n];
    for (row, src) in adj.iter_mut().zip(&support.adj) {
        row[..m].copy_from_slice(src);
    }
    for (f, &t) in fresh.iter().enumerate() {
        let links: Vec<bool> = (0..m).map(|i| linked(t, i)).collect();
        adj[m + f][..m].copy_from_slice(&links);
        for (row, &l) in adj.iter_mut().zip(&links) {
            row[m + f] = l;
        }
    }
    if let PairPoint::Fresh { e, .. } = p {
        adj[m][m + 1] = e;
        adj[m + 1][m] = e;
    }
    (adj, x, y)
}

/// Distribution of the edge-query matrix of `n` fresh vertices computed by
/// iterated integration against `ν_α`, next to `p_{W,n}` for the constant
/// graphon `α`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ErCrossCheck {
    pub n: usize,
    pub integrated: FinDist<AdjMatrix>,
    pub graphon: FinDist<AdjMatrix>,
    pub equal: bool,
}

/// Probability that `n` vertices drawn from `ν_α`, the first allocated
/// outermost, have the edge-query matrix `target` (diagonal included).
fn matrix_probability(alpha: &Rational, n: usize, target: &[Vec<bool>]) -> Rational {
    let matches = |adj: &[Vec<bool>], pts: &[usize]| {
        (0..n).all(|i| (0..n).all(|j| adj[pts[i]][pts[j]] == target[i][j]))
    };
    match n {
        1 => {
            // one fresh vertex over the empty support; no self-loops
            let s = DefinableSet1::from_types(SupportGraph::empty(), |_| matches(&[vec![false]], &[0]));
            s.measure(alpha)
        }
        2 => {
            let s = DefinableSet2::from_fn(SupportGraph::empty(), |p| {
                let (adj, x, y) = realize(&SupportGraph::empty(), p);
                matches(&adj, &[x, y])
            });
            iterated_integral(alpha, alpha, &s, Order::Xy)
        }
        3 => {
            // the first vertex is fresh over the empty support, hence of the
            // single type; the rest is an arity-2 integral over {x1}
            let x1 = SupportGraph::independent(&["x1"]);
            let s = DefinableSet2::from_fn(x1.clone(), |p| {
                let (adj, x, y) = realize(&x1, p);
                matches(&adj, &[0, x, y])
            });
            let inner = iterated_integral(alpha, alpha, &s, Order::Xy);
            let outer = FinSuppFunction1::constant(SupportGraph::empty(), inner).expect("probability");
            integrate(alpha, &outer)
        }
        _ => unreachable!("arity checked by caller"),
    }
}

pub fn er_cross_check(alpha: &Rational, n: usize) -> Result<ErCrossCheck, RadoError> {
    if n == 0 || n > MAX_CROSS_CHECK_N {
        return Err(RadoError::Arity(n));
    }
    if !is_probability(alpha) {
        return Err(RadoError::Range(format_rational(alpha)));
    }
    let mut items = Vec::new();
    let mut total = Rational::zero();
    for bits in 0u64..1 << (n * n) {
        let target: Vec<Vec<bool>> = (0..n).map(|i| (0..n).map(|j| bits >> (i * n + j) & 1 == 1).collect()).collect();
        let p = matrix_probability(alpha, n, &target);
        if p.is_zero() {
            continue;
        }
        total += &p;
        let g = AdjMatrix::from_rows(&target).map_err(|e| RadoError::Support(e.to_string()))?;
        items.push((g, p));
    }
    debug_assert!(total.is_one());
    let integrated = FinDist::from_weights(items).map_err(|e| RadoError::Range(e.to_string()))?;
    let w = Graphon::constant(alpha.clone()).expect("validated probability");
    let graphon = p_w_n(&w, n).expect("n within bound");
    Ok(ErCrossCheck {
        n,
        equal: integrated == graphon,
        integrated,
        graphon,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, ratio};

    fn horn() -> DefinableSet1 {
        let bc = SupportGraph::independent(&["b", "c"]);
        DefinableSet1::neighbours_of(bc.clone(), "b")
            .unwrap()
            .intersection(&DefinableSet1::neighbours_of(bc, "c").unwrap())
            .unwrap()
    }

    #[test]
    fn measure_examples() {
        let a = ratio(2, 5);
        assert_eq!(horn().measure(&a), &a * &a);
        assert_eq!(DefinableSet1::full(SupportGraph::empty()).measure(&a), int(1));
        let single = DefinableSet1::singleton(SupportGraph::independent(&["a"]), "a").unwrap();
        assert_eq!(single.measure(&a), int(0));
    }

    #[test]
    fn boolean_algebra() {
        let third = ratio(1, 3);
        let h = horn();
        assert_eq!(h.measure(&third), ratio(1, 9));
        assert_eq!(h.complement().measure(&third), ratio(8, 9));
        let all = h.union(&h.complement()).unwrap();
        assert_eq!(all, DefinableSet1::full(h.support().clone()));
        let b = SupportGraph::independent(&["b"]);
        let adj = DefinableSet1::neighbours_of(b, "b").unwrap();
        let none = adj.intersection(&adj.complement()).unwrap();
        assert_eq!(none.measure(&third), int(0));
    }

    #[test]
    fn supports_merge_or_refuse() {
        let b = DefinableSet1::neighbours_of(SupportGraph::independent(&["b"]), "b").unwrap();
        let c = DefinableSet1::neighbours_of(SupportGraph::independent(&["c"]), "c").unwrap();
        assert_eq!(b.union(&c), Err(RadoError::UnknownAdjacency("b".into(), "c".into())));
        let bc = SupportGraph::new(vec!["b".into(), "c".into()], vec![vec![false, true], vec![true, false]]).unwrap();
        let u = b.union_over(&c, &bc).unwrap();
        let a = ratio(1, 4);
        // ν(B ∪ C) = ν(B) + ν(C) − ν(B ∩ C)
        assert_eq!(u.measure(&a), &a + &a - &a * &a);
        // c is adjacent to b, so c itself belongs to N(b)
        assert_eq!(u.contains_atom("c"), Some(true));
        let other = SupportGraph::new(vec!["b".into(), "c".into()], vec![vec![false, false], vec![false, false]]).unwrap();
        let stranger = DefinableSet1::full(other);
        assert_eq!(u.union(&stranger), Err(RadoError::Incompatible("b".into())));
    }

    #[test]
    fn measure_is_invariant_under_support_changes() {
        let a = ratio(3, 7);
        let h = horn();
        let bigger = h.support().extended("d", 0b01).unwrap();
        assert_eq!(h.with_support(&bigger).unwrap().measure(&a), h.measure(&a));
        let renamed = h.renamed(|n| format!("{n}'")).unwrap();
        assert_eq!(renamed.measure(&a), h.measure(&a));
    }

    #[test]
    fn finite_additivity() {
        let a = ratio(1, 3);
        let bc = SupportGraph::independent(&["b", "c"]);
        let s = DefinableSet1::from_types(bc.clone(), |t| t == 0b01);
        let t = DefinableSet1::from_types(bc, |t| t == 0b11 || t == 0b00);
        assert_eq!(s.union(&t).unwrap().measure(&a), s.measure(&a) + t.measure(&a));
    }

    #[test]
    fn integration() {
        let half = ratio(1, 2);
        assert_eq!(integrate(&half, &FinSuppFunction1::indicator(&horn())), ratio(1, 4));
        let f = FinSuppFunction1::constant(SupportGraph::independent(&["p", "q"]), ratio(3, 4)).unwrap();
        assert_eq!(integrate(&ratio(1, 5), &f), ratio(3, 4));
        let g = FinSuppFunction1::constant(SupportGraph::empty(), ratio(2, 9)).unwrap();
        assert_eq!(integrate(&half, &g), ratio(2, 9));
    }

    #[test]
    fn fubini_counterexample() {
        let (a, b) = (ratio(1, 4), ratio(3, 4));
        let e = DefinableSet2::edge();
        assert_eq!(iterated_integral(&a, &b, &e, Order::Xy), a);
        assert_eq!(iterated_integral(&a, &b, &e, Order::Yx), b);
        assert_eq!(iterated_integral(&a, &a, &e, Order::Yx), a);
        let d = DefinableSet2::diagonal();
        assert_eq!(iterated_integral(&a, &b, &d, Order::Xy), int(0));
        assert_eq!(iterated_integral(&a, &b, &d, Order::Yx), int(0));
        let full = DefinableSet2::full(SupportGraph::independent(&["a"]));
        assert_eq!(iterated_integral(&a, &a, &full, Order::Xy), int(1));
    }

    #[test]
    fn phi_corpus_commutes() {
        for alpha in [ratio(1, 3), ratio(1, 2), ratio(5, 6)] {
            let corpus = phi_corpus(&alpha);
            assert_eq!(corpus.len(), 2 + 8 + 3);
            for item in fubini_check(&alpha, &alpha, &corpus) {
                assert!(item.equal, "{}", item.name);
                assert_eq!(Some(item.xy), item.expected, "{}", item.name);
            }
        }
    }

    #[test]
    fn er_cross_check_matches_graphon() {
        for (alpha, n) in [(ratio(1, 2), 2), (ratio(2, 5), 1), (ratio(1, 3), 3), (ratio(3, 4), 3)] {
            let c = er_cross_check(&alpha, n).unwrap();
            assert!(c.equal, "{n}");
        }
        let c = er_cross_check(&ratio(1, 3), 3).unwrap();
        for (g, p) in c.integrated.iter() {
            let e = g.edge_count();
            assert_eq!(*p, pow(&ratio(1, 3), e) * pow(&ratio(2, 3), 3 - e));
        }
        assert!(er_cross_check(&ratio(1, 2), 4).is_err());
    }

    #[test]
    fn json_round_trip() {
        let text = r#"{"support":{"names":["b","c"],"adj":[[false,false],[false,false]]},"table":{"00":false,"01":false,"10":false,"11":true},"atoms":{"b":false,"c":false}}"#;
        let json: DefinableSet1Json = serde_json::from_str(text).unwrap();
        let s = DefinableSet1::from_json(&json).unwrap();
        assert_eq!(s, horn());
        assert_eq!(serde_json::to_string(&s.to_json()).unwrap(), text);
    }
}
