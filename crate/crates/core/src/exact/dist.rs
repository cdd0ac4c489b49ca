use std::collections::BTreeMap;
use std::fmt;

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::lang::{parse_value, Value};
use crate::rational::{format_rational, one_minus, parse_rational, Frac, Rational};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum DistError {
    #[error("negative probability {0}")]
    Negative(String),
    #[error("probabilities sum to {0}, not 1")]
    NotNormalized(String),
    #[error("invalid outcome `{0}`: {1}")]
    BadOutcome(String, String),
    #[error(transparent)]
    Rational(#[from] crate::rational::RationalParseError),
}

/// A finitely supported probability distribution with exact weights.
/// Zero-probability outcomes are never stored.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FinDist<T: Ord> {
    probs: BTreeMap<T, Rational>,
}

impl<T: Ord + Clone> FinDist<T> {
    pub fn dirac(v: T) -> Self {
        let mut probs = BTreeMap::new();
        probs.insert(v, Rational::one());
        FinDist { probs }
    }

    /// Builds a distribution, merging repeated outcomes. Fails unless the
    /// weights are non-negative and sum to exactly one.
    pub fn from_weights(items: impl IntoIterator<Item = (T, Rational)>) -> Result<Self, DistError> {
        let mut probs: BTreeMap<T, Rational> = BTreeMap::new();
        for (v, p) in items {
            if p.is_negative() {
                return Err(DistError::Negative(format_rational(&p)));
            }
            *probs.entry(v).or_insert_with(Rational::zero) += p;
        }
        probs.retain(|_, p| !p.is_zero());
        let total: Rational = probs.values().sum();
        if !total.is_one() {
            return Err(DistError::NotNormalized(format_rational(&total)));
        }
        Ok(FinDist { probs })
    }

    pub fn uniform(items: impl IntoIterator<Item = T>) -> Self {
        let items: Vec<T> = items.into_iter().collect();
        assert!(!items.is_empty(), "uniform distribution over nothing");
        let w = Rational::new(1.into(), items.len().into());
        Self::accumulate(items.into_iter().map(|v| (v, w.clone())))
    }

    // Sums weights without checking normalization; callers guarantee it.
    pub(crate) fn accumulate(items: impl IntoIterator<Item = (T, Rational)>) -> Self {
        let mut probs: BTreeMap<T, Rational> = BTreeMap::new();
        for (v, p) in items {
            if p.is_zero() {
                continue;
            }
            *probs.entry(v).or_insert_with(Rational::zero) += p;
        }
        probs.retain(|_, p| !p.is_zero());
        FinDist { probs }
    }

    pub fn prob(&self, v: &T) -> Rational {
        self.probs.get(v).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn prob_where(&self, mut pred: impl FnMut(&T) -> bool) -> Rational {
        self.probs
            .iter()
            .filter(|(v, _)| pred(v))
            .map(|(_, p)| p.clone())
            .sum()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&T, &Rational)> {
        self.probs.iter()
    }

    pub fn support(&self) -> impl Iterator<Item = &T> {
        self.probs.keys()
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn total(&self) -> Rational {
        self.probs.values().sum()
    }

    pub fn is_normalized(&self) -> bool {
        self.total().is_one() && self.probs.values().all(|p| p.is_positive())
    }

    /// Monadic bind: `(d >>= k)(y) = Σ_x d(x) · k(x)(y)`.
    pub fn bind<U: Ord + Clone>(&self, mut k: impl FnMut(&T) -> FinDist<U>) -> FinDist<U> {
        let mut out: Vec<(U, Rational)> = Vec::new();
        for (x, px) in &self.probs {
            for (y, py) in k(x).probs {
                out.push((y, px * py));
            }
        }
        FinDist::accumulate(out)
    }

    pub fn try_bind<U: Ord + Clone, E>(
        &self,
        mut k: impl FnMut(&T) -> Result<FinDist<U>, E>,
    ) -> Result<FinDist<U>, E> {
        let mut out: Vec<(U, Rational)> = Vec::new();
        for (x, px) in &self.probs {
            for (y, py) in k(x)?.probs {
                out.push((y, px * py));
            }
        }
        Ok(FinDist::accumulate(out))
    }

    /// Pushforward along `f`.
    pub fn map<U: Ord + Clone>(&self, mut f: impl FnMut(&T) -> U) -> FinDist<U> {
        FinDist::accumulate(self.probs.iter().map(|(x, p)| (f(x), p.clone())))
    }

    pub fn product<U: Ord + Clone>(&self, other: &FinDist<U>) -> FinDist<(T, U)> {
        self.bind(|x| other.map(|y| (x.clone(), y.clone())))
    }
}

impl FinDist<Value> {
    pub fn bernoulli(q: &Rational) -> Self {
        FinDist::accumulate([(Value::bool(true), q.clone()), (Value::bool(false), one_minus(q))])
    }

    pub fn prob_true(&self) -> Rational {
        self.prob(&Value::bool(true))
    }

    pub fn from_json(json: &DistJson) -> Result<Self, DistError> {
        let items = json
            .outcomes
            .iter()
            .map(|o| {
                let v = parse_value(&o.value)
                    .map_err(|e| DistError::BadOutcome(o.value.clone(), e.to_string()))?;
                Ok((v, parse_rational(&o.p)?))
            })
            .collect::<Result<Vec<_>, DistError>>()?;
        Self::from_weights(items)
    }
}

impl<T: Ord + Clone + fmt::Display> FinDist<T> {
    pub fn to_json(&self) -> DistJson {
        DistJson {
            outcomes: self
                .probs
                .iter()
                .map(|(v, p)| OutcomeJson {
                    value: v.to_string(),
                    p: format_rational(p),
                })
                .collect(),
        }
    }
}

impl<T: Ord + Clone + fmt::Display> fmt::Display for FinDist<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, (v, p)) in self.probs.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{v}: {}", Frac(p))?;
        }
        write!(f, "}}")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OutcomeJson {
    pub value: String,
    pub p: String,
}

/// `{"outcomes":[{"value":"<canonical text>","p":"num/den"}]}`
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DistJson {
    pub outcomes: Vec<OutcomeJson>,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::ratio;

    fn coin(q: Rational) -> FinDist<Value> {
        FinDist::bernoulli(&q)
    }

    #[test]
    fn dirac_is_point_mass() {
        let d = FinDist::dirac(Value::bool(true));
        assert_eq!(d.prob_true(), ratio(1, 1));
        assert_eq!(d.len(), 1);
        assert_eq!(FinDist::dirac(Value::Unit).prob(&Value::Unit), ratio(1, 1));
    }

    #[test]
    fn bind_with_dirac_is_identity() {
        let d = FinDist::uniform([0u8, 1]);
        assert_eq!(d.bind(|x| FinDist::dirac(*x)), d);
    }

    #[test]
    fn bind_along_permutation() {
        let d = FinDist::uniform([0u8, 1]);
        let swapped = d.bind(|x| FinDist::dirac(1 - *x));
        assert_eq!(swapped, d);
    }

    #[test]
    fn bind_sums_over_paths() {
        // P(true) = 1/3 * 1/2 + 2/3 * 1/4 = 1/3
        let d = coin(ratio(1, 3)).bind(|x| {
            if x.as_bool().unwrap() {
                coin(ratio(1, 2))
            } else {
                coin(ratio(1, 4))
            }
        });
        assert_eq!(d.prob_true(), ratio(1, 3));
        assert_eq!(d.prob(&Value::bool(false)), ratio(2, 3));
        assert!(d.is_normalized());
    }

    #[test]
    fn degenerate_coins_drop_zero_outcomes() {
        assert_eq!(coin(ratio(0, 1)).len(), 1);
        assert_eq!(coin(ratio(1, 1)), FinDist::dirac(Value::bool(true)));
    }

    #[test]
    fn from_weights_validates() {
        assert!(FinDist::from_weights([(0u8, ratio(1, 2)), (1, ratio(1, 3))]).is_err());
        assert!(FinDist::from_weights([(0u8, ratio(3, 2)), (1, ratio(-1, 2))]).is_err());
        let d = FinDist::from_weights([(0u8, ratio(1, 2)), (0, ratio(1, 2))]).unwrap();
        assert_eq!(d, FinDist::dirac(0));
    }

    #[test]
    fn json_round_trip() {
        let d = coin(ratio(1, 8)).product(&FinDist::dirac(Value::Unit)).map(|(a, b)| Value::pair(a.clone(), b.clone()));
        let json = serde_json::to_string(&d.to_json()).unwrap();
        assert!(json.contains(r#""p":"1/8""#), "{json}");
        let back: DistJson = serde_json::from_str(&json).unwrap();
        assert_eq!(FinDist::from_json(&back).unwrap(), d);
    }
}
