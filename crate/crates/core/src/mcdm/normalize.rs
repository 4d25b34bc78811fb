use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kpi::{DecisionMatrix, Orientation};

/// Min-max scaled matrix with every criterion oriented so that larger is better.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormalizedMatrix {
    alternatives: Vec<String>,
    criteria: Vec<String>,
    values: Vec<Vec<f64>>,
    constant: Vec<bool>,
}

impl NormalizedMatrix {
    pub fn alternatives(&self) -> &[String] {
        &self.alternatives
    }

    pub fn criteria(&self) -> &[String] {
        &self.criteria
    }

    pub fn values(&self) -> &[Vec<f64>] {
        &self.values
    }

    pub fn n_alternatives(&self) -> usize {
        self.values.len()
    }

    pub fn n_criteria(&self) -> usize {
        self.criteria.len()
    }

    /// Whether the source column held a single repeated value.
    pub fn is_constant(&self, j: usize) -> bool {
        self.constant[j]
    }

    pub fn column(&self, j: usize) -> impl Iterator<Item = f64> + '_ {
        self.values.iter().map(move |row| row[j])
    }
}

/// Benefit columns map to `(x − min)/(max − min)`, cost columns to
/// `(max − x)/(max − min)`; a constant column maps to 0.5 throughout.
pub fn minmax_normalize(matrix: &DecisionMatrix) -> Result<NormalizedMatrix> {
    let m = matrix.n_alternatives();
    let n = matrix.n_criteria();
    let mut values = vec![vec![0.0; n]; m];
    let mut constant = vec![false; n];
    for (j, criterion) in matrix.criteria().iter().enumerate() {
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for x in matrix.column(j) {
            if !x.is_finite() {
                return Err(Error::Matrix(format!(
                    "non-finite value in '{}'",
                    criterion.name
                )));
            }
            lo = lo.min(x);
            hi = hi.max(x);
        }
        let range = hi - lo;
        constant[j] = range == 0.0;
        for (i, x) in matrix.column(j).enumerate() {
            values[i][j] = if constant[j] {
                0.5
            } else {
                match criterion.orientation {
                    Orientation::Benefit => (x - lo) / range,
                    Orientation::Cost => (hi - x) / range,
                }
            };
        }
    }
    Ok(NormalizedMatrix {
        alternatives: matrix.alternatives().to_vec(),
        criteria: matrix.criteria().iter().map(|c| c.name.clone()).collect(),
        values,
        constant,
    })
}
