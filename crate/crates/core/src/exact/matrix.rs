use std::fmt;

use num_traits::{One, Signed, Zero};

use crate::rational::{format_rational, Frac, Rational};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum MatrixError {
    #[error("cannot compose {0}x{1} with {2}x{3}")]
    DimensionMismatch(usize, usize, usize, usize),
    #[error("row {row} sums to {sum}, not 1")]
    RowNotStochastic { row: usize, sum: String },
    #[error("negative entry at ({0}, {1})")]
    Negative(usize, usize),
    #[error("row {0} has the wrong length")]
    Ragged(usize),
}

/// Row-stochastic matrix with exact entries: a Kleisli morphism between
/// finite sets of sizes `rows` and `cols`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StochMatrix {
    cols: usize,
    entries: Vec<Vec<Rational>>,
}

impl StochMatrix {
    pub fn new(cols: usize, entries: Vec<Vec<Rational>>) -> Result<Self, MatrixError> {
        for (i, row) in entries.iter().enumerate() {
            if row.len() != cols {
                return Err(MatrixError::Ragged(i));
            }
            if let Some(j) = row.iter().position(|x| x.is_negative()) {
                return Err(MatrixError::Negative(i, j));
            }
            let sum: Rational = row.iter().sum();
            if !sum.is_one() {
                return Err(MatrixError::RowNotStochastic {
                    row: i,
                    sum: format_rational(&sum),
                });
            }
        }
        Ok(StochMatrix { cols, entries })
    }

    pub fn identity(n: usize) -> Self {
        Self::deterministic(n, n, |i| i)
    }

    /// The 0/1 matrix of a function `[rows] -> [cols]`.
    pub fn deterministic(rows: usize, cols: usize, f: impl Fn(usize) -> usize) -> Self {
        let entries = (0..rows)
            .map(|i| {
                let j = f(i);
                assert!(j < cols, "function leaves the codomain");
                (0..cols)
                    .map(|k| if k == j { Rational::one() } else { Rational::zero() })
                    .collect()
            })
            .collect();
        StochMatrix { cols, entries }
    }

    pub fn rows(&self) -> usize {
        self.entries.len()
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &Rational {
        &self.entries[i][j]
    }

    pub fn row(&self, i: usize) -> &[Rational] {
        &self.entries[i]
    }

    /// Kleisli composition `self ; other`, i.e. the matrix product.
    pub fn compose(&self, other: &StochMatrix) -> Result<StochMatrix, MatrixError> {
        if self.cols != other.rows() {
            return Err(MatrixError::DimensionMismatch(
                self.rows(),
                self.cols,
                other.rows(),
                other.cols,
            ));
        }
        let entries = self
            .entries
            .iter()
            .map(|row| {
                let mut out = vec![Rational::zero(); other.cols];
                for (k, a) in row.iter().enumerate() {
                    if a.is_zero() {
                        continue;
                    }
                    for (j, b) in other.entries[k].iter().enumerate() {
                        if !b.is_zero() {
                            out[j] += a * b;
                        }
                    }
                }
                out
            })
            .collect();
        Ok(StochMatrix {
            cols: other.cols,
            entries,
        })
    }

    pub fn is_stochastic(&self) -> bool {
        self.entries
            .iter()
            .all(|r| r.iter().sum::<Rational>().is_one() && r.iter().all(|x| !x.is_negative()))
    }
}

impl fmt::Display for StochMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for row in &self.entries {
            let cells: Vec<String> = row.iter().map(|x| Frac(x).to_string()).collect();
            writeln!(f, "[{}]", cells.join(", "))?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, ratio};

    fn m(rows: &[&[(i64, i64)]]) -> StochMatrix {
        let cols = rows[0].len();
        StochMatrix::new(
            cols,
            rows.iter()
                .map(|r| r.iter().map(|&(n, d)| ratio(n, d)).collect())
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn identity_is_neutral() {
        let a = m(&[&[(1, 2), (1, 2)], &[(1, 3), (2, 3)]]);
        assert_eq!(a.compose(&StochMatrix::identity(2)).unwrap(), a);
        assert_eq!(StochMatrix::identity(2).compose(&a).unwrap(), a);
    }

    #[test]
    fn half_half_through_identity() {
        let row = m(&[&[(1, 2), (1, 2)]]);
        assert_eq!(row.compose(&StochMatrix::identity(2)).unwrap(), row);
    }

    #[test]
    fn collapse_to_first_column() {
        let row = m(&[&[(1, 2), (1, 2)]]);
        let collapse = m(&[&[(1, 1), (0, 1)], &[(1, 1), (0, 1)]]);
        let out = row.compose(&collapse).unwrap();
        assert_eq!(out.row(0), &[int(1), int(0)]);
    }

    #[test]
    fn dimension_mismatch() {
        let a = StochMatrix::identity(2);
        let b = StochMatrix::identity(3);
        assert_eq!(a.compose(&b), Err(MatrixError::DimensionMismatch(2, 2, 3, 3)));
    }

    #[test]
    fn validation() {
        assert!(StochMatrix::new(2, vec![vec![ratio(1, 2), ratio(1, 3)]]).is_err());
        assert!(StochMatrix::new(2, vec![vec![ratio(3, 2), ratio(-1, 2)]]).is_err());
        assert!(StochMatrix::new(2, vec![vec![int(1)]]).is_err());
    }
}
