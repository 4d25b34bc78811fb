//! Criterion weights: equal, Shannon-entropy and their hybrid average.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kpi::DecisionMatrix;
use crate::mcdm::NormalizedMatrix;

const SUM_TOLERANCE: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeightVector(Vec<f64>);

impl WeightVector {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(Error::Ranking(
                "weights must be finite and non-negative".into(),
            ));
        }
        let sum: f64 = weights.iter().sum();
        if (sum - 1.0).abs() > SUM_TOLERANCE {
            return Err(Error::Ranking(format!("weights sum to {sum}, expected 1")));
        }
        Ok(Self(weights))
    }

    /// Scales non-negative scores so they sum to one.
    pub fn from_scores(scores: Vec<f64>) -> Result<Self> {
        let sum: f64 = scores.iter().sum();
        if !(sum > 0.0) {
            return Err(Error::Ranking(
                "weight scores must have a positive sum".into(),
            ));
        }
        Self::new(scores.into_iter().map(|s| s / sum).collect())
    }

    pub fn equal(n: usize) -> Self {
        Self(vec![1.0 / n as f64; n])
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn sum(&self) -> f64 {
        self.0.iter().sum()
    }
}

/// Which values the entropy weights are computed from.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EntropyBasis {
    /// Raw decision-matrix values (columns with negative entries fall back
    /// to their normalized values).
    #[default]
    Raw,
    /// The oriented min-max normalized matrix.
    Normalized,
}

/// Shannon entropy of a non-negative column scaled to a distribution,
/// normalized by ln m, with 0·ln 0 = 0. `None` for an all-zero column.
fn column_entropy(column: &[f64]) -> Option<f64> {
    let total: f64 = column.iter().sum();
    if total <= 0.0 {
        return None;
    }
    let h: f64 = column
        .iter()
        .map(|&x| {
            let p = x / total;
            if p > 0.0 {
                p * p.ln()
            } else {
                0.0
            }
        })
        .sum();
    Some(-h / (column.len() as f64).ln())
}

fn weights_from_divergence(divergence: Vec<f64>) -> WeightVector {
    let n = divergence.len();
    let total: f64 = divergence.iter().sum();
    if total > 0.0 {
        WeightVector(divergence.into_iter().map(|d| d / total).collect())
    } else {
        WeightVector::equal(n)
    }
}

fn divergence(column: &[f64], constant: bool) -> f64 {
    if constant {
        return 0.0;
    }
    match column_entropy(column) {
        Some(e) => (1.0 - e).max(0.0),
        None => 0.0,
    }
}

fn check_alternatives(m: usize) -> Result<()> {
    if m < 2 {
        return Err(Error::Ranking(format!(
            "entropy weights need at least 2 alternatives, got {m}"
        )));
    }
    Ok(())
}

/// Entropy weights of the normalized matrix. Constant columns carry no
/// information and get zero weight; if every column is constant the
/// weights fall back to equal.
pub fn entropy_weights(norm: &NormalizedMatrix) -> Result<WeightVector> {
    check_alternatives(norm.n_alternatives())?;
    let d = (0..norm.n_criteria())
        .map(|j| {
            let col: Vec<f64> = norm.column(j).collect();
            divergence(&col, norm.is_constant(j))
        })
        .collect();
    Ok(weights_from_divergence(d))
}

/// Entropy weights of the raw decision-matrix values.
pub fn entropy_weights_raw(
    matrix: &DecisionMatrix,
    norm: &NormalizedMatrix,
) -> Result<WeightVector> {
    check_alternatives(matrix.n_alternatives())?;
    let d = (0..matrix.n_criteria())
        .map(|j| {
            let raw: Vec<f64> = matrix.column(j).collect();
            if raw.iter().any(|&x| x < 0.0) {
                let col: Vec<f64> = norm.column(j).collect();
                divergence(&col, norm.is_constant(j))
            } else {
                divergence(&raw, norm.is_constant(j))
            }
        })
        .collect();
    Ok(weights_from_divergence(d))
}

fn average(a: &WeightVector, b: &WeightVector) -> WeightVector {
    WeightVector(a.0.iter().zip(&b.0).map(|(x, y)| (x + y) / 2.0).collect())
}

/// Mean of equal and (normalized-basis) entropy weights.
pub fn hybrid_weights(norm: &NormalizedMatrix) -> Result<WeightVector> {
    let entropy = entropy_weights(norm)?;
    Ok(average(&WeightVector::equal(norm.n_criteria()), &entropy))
}

/// Equal, entropy and hybrid weights side by side.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeightSet {
    pub equal: WeightVector,
    pub entropy: WeightVector,
    pub hybrid: WeightVector,
}

pub fn weight_set(
    matrix: &DecisionMatrix,
    norm: &NormalizedMatrix,
    basis: EntropyBasis,
) -> Result<WeightSet> {
    let equal = WeightVector::equal(matrix.n_criteria());
    let entropy = match basis {
        EntropyBasis::Raw => entropy_weights_raw(matrix, norm)?,
        EntropyBasis::Normalized => entropy_weights(norm)?,
    };
    let hybrid = average(&equal, &entropy);
    Ok(WeightSet {
        equal,
        entropy,
        hybrid,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kpi::{Criterion, Orientation};
    use crate::mcdm::minmax_normalize;

    fn matrix(rows: Vec<Vec<f64>>) -> DecisionMatrix {
        let n = rows[0].len();
        DecisionMatrix::new(
            (0..rows.len()).map(|i| format!("a{i}")).collect(),
            (0..n)
                .map(|j| Criterion {
                    name: format!("c{j}"),
                    orientation: Orientation::Benefit,
                })
                .collect(),
            rows,
        )
        .unwrap()
    }

    #[test]
    fn constant_column_gets_zero_weight() {
        let m = matrix(vec![vec![3.0, 1.0], vec![3.0, 2.0], vec![3.0, 5.0]]);
        let n = minmax_normalize(&m).unwrap();
        for w in [
            entropy_weights(&n).unwrap(),
            entropy_weights_raw(&m, &n).unwrap(),
        ] {
            assert_eq!(w.as_slice()[0], 0.0);
            assert!((w.as_slice()[1] - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn two_point_column_has_zero_entropy() {
        // p = (0, 1): -(1/ln 2)(1·ln 1) = 0.
        assert_eq!(column_entropy(&[0.0, 1.0]), Some(0.0));
        let m = matrix(vec![vec![0.0], vec![1.0]]);
        let w = entropy_weights(&minmax_normalize(&m).unwrap()).unwrap();
        assert_eq!(w.as_slice(), &[1.0]);
    }

    #[test]
    fn all_constant_falls_back_to_equal() {
        let m = matrix(vec![vec![1.0, 2.0, 3.0], vec![1.0, 2.0, 3.0]]);
        let n = minmax_normalize(&m).unwrap();
        assert_eq!(entropy_weights(&n).unwrap(), WeightVector::equal(3));
        assert_eq!(hybrid_weights(&n).unwrap(), WeightVector::equal(3));
    }

    #[test]
    fn single_alternative_rejected() {
        let m = matrix(vec![vec![1.0, 2.0]]);
        assert!(entropy_weights(&minmax_normalize(&m).unwrap()).is_err());
    }

    #[test]
    fn hybrid_averages_with_equal() {
        // Column 1 constant: entropy (1, 0) → hybrid (0.75, 0.25).
        let m = matrix(vec![vec![0.0, 7.0], vec![1.0, 7.0], vec![0.3, 7.0]]);
        let n = minmax_normalize(&m).unwrap();
        let w = hybrid_weights(&n).unwrap();
        assert_eq!(w.as_slice(), &[0.75, 0.25]);
        assert!((w.sum() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn equally_informative_columns_give_equal_hybrid() {
        let m = matrix(vec![vec![0.0, 1.0], vec![1.0, 0.0], vec![0.5, 0.5]]);
        let n = minmax_normalize(&m).unwrap();
        let w = hybrid_weights(&n).unwrap();
        assert!((w.as_slice()[0] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn raw_basis_falls_back_for_negative_columns() {
        let m = matrix(vec![vec![-1.0, 1.0], vec![1.0, 2.0], vec![0.0, 4.0]]);
        let n = minmax_normalize(&m).unwrap();
        let w = entropy_weights_raw(&m, &n).unwrap();
        assert!((w.sum() - 1.0).abs() < 1e-12);
        assert!(w.as_slice().iter().all(|&x| x > 0.0));
    }

    #[test]
    fn raw_basis_ignores_column_scale() {
        let m = matrix(vec![vec![1.0, 10.0], vec![4.0, 30.0], vec![2.0, 25.0]]);
        let scaled = m.map_column(0, |x| 1000.0 * x).unwrap();
        let a = entropy_weights_raw(&m, &minmax_normalize(&m).unwrap()).unwrap();
        let b = entropy_weights_raw(&scaled, &minmax_normalize(&scaled).unwrap()).unwrap();
        for (x, y) in a.as_slice().iter().zip(b.as_slice()) {
            assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn weight_vector_validation() {
        assert!(WeightVector::new(vec![0.5, 0.6]).is_err());
        assert!(WeightVector::new(vec![-0.5, 1.5]).is_err());
        assert!(WeightVector::new(vec![0.25, 0.75]).is_ok());
        assert_eq!(
            WeightVector::from_scores(vec![1.0, 3.0])
                .unwrap()
                .as_slice(),
            &[0.25, 0.75]
        );
    }
}
