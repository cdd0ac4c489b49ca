use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::exact::dist::FinDist;
use crate::lang::Value;
use crate::rational::{format_rational, is_probability, parse_rational, Rational};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ModelError {
    #[error("a finite model needs at least one vertex")]
    NoVertices,
    #[error("`new` distribution has {found} entries for {m} vertices")]
    NewLength { m: usize, found: usize },
    #[error("`new` weights must be non-negative and sum to 1")]
    NewNotDistribution,
    #[error("edge table must be {m}x{m}")]
    EdgeShape { m: usize },
    #[error("edge probability at ({0}, {1}) is outside [0, 1]")]
    EdgeRange(usize, usize),
    #[error("model is declared deterministic but edge ({0}, {1}) is not 0/1")]
    NotDeterministic(usize, usize),
    #[error("invalid model JSON: {0}")]
    Json(String),
}

/// A finite interpretation of the graph interface: `vertex` denotes
/// `{0, ..., m-1}`, `new()` draws from `new_dist`, and `edge(i, j)` is true
/// with probability `edge[i][j]`. Stochastic edge tables are allowed; they
/// resample on every query and so break the determinism law.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FiniteModel {
    m: usize,
    new_dist: Vec<Rational>,
    edge: Vec<Vec<Rational>>,
    deterministic: bool,
}

impl FiniteModel {
    pub fn new(new_dist: Vec<Rational>, edge: Vec<Vec<Rational>>) -> Result<Self, ModelError> {
        let deterministic = edge.iter().flatten().all(|p| p.is_zero() || p.is_one());
        Self::with_flag(new_dist, edge, deterministic)
    }

    fn with_flag(
        new_dist: Vec<Rational>,
        edge: Vec<Vec<Rational>>,
        deterministic: bool,
    ) -> Result<Self, ModelError> {
        let m = new_dist.len();
        if m == 0 {
            return Err(ModelError::NoVertices);
        }
        if new_dist.iter().any(|p| !is_probability(p)) || !new_dist.iter().sum::<Rational>().is_one() {
            return Err(ModelError::NewNotDistribution);
        }
        if edge.len() != m || edge.iter().any(|r| r.len() != m) {
            return Err(ModelError::EdgeShape { m });
        }
        for (i, row) in edge.iter().enumerate() {
            for (j, p) in row.iter().enumerate() {
                if !is_probability(p) {
                    return Err(ModelError::EdgeRange(i, j));
                }
                if deterministic && !(p.is_zero() || p.is_one()) {
                    return Err(ModelError::NotDeterministic(i, j));
                }
            }
        }
        Ok(FiniteModel {
            m,
            new_dist,
            edge,
            deterministic,
        })
    }

    /// Two disjoint complete clusters, each picked with probability 1/2.
    /// `edge(i, j)` holds exactly when `i == j`, including on the diagonal.
    pub fn two_cluster() -> Self {
        let half = Rational::new(1.into(), 2.into());
        let edge = (0..2)
            .map(|i| (0..2).map(|j| if i == j { Rational::one() } else { Rational::zero() }).collect())
            .collect();
        Self::new(vec![half.clone(), half], edge).expect("valid model")
    }

    /// `m` equiprobable vertices where every query, diagonal included, is an
    /// independent `bernoulli(alpha)`.
    pub fn resampling(alpha: &Rational, m: usize) -> Self {
        let w = Rational::new(1.into(), m.into());
        Self::new(vec![w; m], vec![vec![alpha.clone(); m]; m]).expect("valid model")
    }

    pub fn vertex_count(&self) -> usize {
        self.m
    }

    pub fn is_deterministic(&self) -> bool {
        self.deterministic
    }

    pub fn new_weights(&self) -> &[Rational] {
        &self.new_dist
    }

    pub fn edge_prob(&self, i: usize, j: usize) -> &Rational {
        &self.edge[i][j]
    }

    pub fn new_distribution(&self) -> FinDist<Value> {
        FinDist::accumulate(
            self.new_dist
                .iter()
                .enumerate()
                .map(|(i, p)| (Value::Vertex(i as u32), p.clone())),
        )
    }

    pub fn edge_distribution(&self, i: usize, j: usize) -> FinDist<Value> {
        FinDist::bernoulli(&self.edge[i][j])
    }

    pub fn to_json(&self) -> ModelJson {
        ModelJson {
            m: self.m,
            new: self.new_dist.iter().map(format_rational).collect(),
            edge: self
                .edge
                .iter()
                .map(|r| r.iter().map(|p| EdgeEntry::Prob(format_rational(p))).collect())
                .collect(),
            deterministic: Some(self.deterministic),
        }
    }

    pub fn from_json(json: &ModelJson) -> Result<Self, ModelError> {
        let bad = |e: crate::rational::RationalParseError| ModelError::Json(e.to_string());
        let new_dist = json
            .new
            .iter()
            .map(|s| parse_rational(s).map_err(bad))
            .collect::<Result<Vec<_>, _>>()?;
        if new_dist.len() != json.m {
            return Err(ModelError::NewLength {
                m: json.m,
                found: new_dist.len(),
            });
        }
        let edge = json
            .edge
            .iter()
            .map(|row| {
                row.iter()
                    .map(|e| match e {
                        EdgeEntry::Bool(b) => Ok(if *b { Rational::one() } else { Rational::zero() }),
                        EdgeEntry::Prob(s) => parse_rational(s).map_err(bad),
                    })
                    .collect::<Result<Vec<_>, _>>()
            })
            .collect::<Result<Vec<_>, _>>()?;
        match json.deterministic {
            Some(flag) => Self::with_flag(new_dist, edge, flag),
            None => Self::new(new_dist, edge),
        }
    }
}

/// Edge table cells may be written as booleans or as `"num/den"` strings.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum EdgeEntry {
    Bool(bool),
    Prob(String),
}

/// `{"m":2,"new":["1/2","1/2"],"edge":[[..]],"deterministic":true}`
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModelJson {
    pub m: usize,
    pub new: Vec<String>,
    pub edge: Vec<Vec<EdgeEntry>>,
    /// Inferred from the edge table when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub deterministic: Option<bool>,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::ratio;

    #[test]
    fn two_cluster_shape() {
        let m = FiniteModel::two_cluster();
        assert_eq!(m.vertex_count(), 2);
        assert!(m.is_deterministic());
        assert_eq!(m.edge_distribution(0, 0), FinDist::dirac(Value::bool(true)));
        assert_eq!(m.edge_distribution(0, 1), FinDist::dirac(Value::bool(false)));
    }

    #[test]
    fn json_round_trip_and_bool_cells() {
        let src = r#"{"m":2,"new":["1/2","1/2"],"edge":[[true,false],[false,true]],"deterministic":true}"#;
        let json: ModelJson = serde_json::from_str(src).unwrap();
        let model = FiniteModel::from_json(&json).unwrap();
        assert_eq!(model, FiniteModel::two_cluster());
        let again = FiniteModel::from_json(&model.to_json()).unwrap();
        assert_eq!(again, model);
    }

    #[test]
    fn rejects_inconsistent_models() {
        let half = ratio(1, 2);
        assert_eq!(
            FiniteModel::with_flag(vec![half.clone(), half.clone()], vec![vec![half.clone(); 2]; 2], true),
            Err(ModelError::NotDeterministic(0, 0))
        );
        assert!(FiniteModel::new(vec![half.clone()], vec![vec![half.clone()]]).is_err());
        assert!(FiniteModel::new(vec![], vec![]).is_err());
        assert!(FiniteModel::new(vec![ratio(1, 1)], vec![vec![ratio(2, 1)]]).is_err());
    }
}
