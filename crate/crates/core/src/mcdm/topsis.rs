use crate::error::{Error, Result};
use crate::kpi::{DecisionMatrix, Orientation};
use crate::mcdm::{
    ranks_from_scores, Diagnostics, Method, MethodRanking, NormalizedMatrix, WeightVector,
};

fn check_dims(n_criteria: usize, w: &WeightVector) -> Result<()> {
    if n_criteria != w.len() {
        return Err(Error::Ranking(format!(
            "{} weights for {n_criteria} criteria",
            w.len()
        )));
    }
    Ok(())
}

/// Ranks by relative closeness `D⁻ / (D⁺ + D⁻)` to the ideal point of the
/// weighted matrix. Every column is treated as a benefit.
fn closeness(
    alternatives: &[String],
    weighted: Vec<Vec<f64>>,
    ideal: Vec<f64>,
    anti_ideal: Vec<f64>,
) -> MethodRanking {
    let dist = |row: &[f64], target: &[f64]| {
        row.iter()
            .zip(target)
            .map(|(a, b)| (a - b).powi(2))
            .sum::<f64>()
            .sqrt()
    };
    let d_plus: Vec<f64> = weighted.iter().map(|r| dist(r, &ideal)).collect();
    let d_minus: Vec<f64> = weighted.iter().map(|r| dist(r, &anti_ideal)).collect();
    let scores: Vec<f64> = d_plus
        .iter()
        .zip(&d_minus)
        .map(|(&p, &m)| if p + m == 0.0 { 0.5 } else { m / (p + m) })
        .collect();
    MethodRanking {
        method: Method::Topsis,
        alternatives: alternatives.to_vec(),
        ranks: ranks_from_scores(&scores, true),
        scores,
        diagnostics: Diagnostics::Topsis { d_plus, d_minus },
    }
}

/// TOPSIS on the min-max normalized, oriented matrix.
pub fn topsis(norm: &NormalizedMatrix, w: &WeightVector) -> Result<MethodRanking> {
    check_dims(norm.n_criteria(), w)?;
    let weighted: Vec<Vec<f64>> = norm
        .values()
        .iter()
        .map(|row| row.iter().zip(w.as_slice()).map(|(r, w)| r * w).collect())
        .collect();
    let n = norm.n_criteria();
    let col_max = (0..n)
        .map(|j| {
            weighted
                .iter()
                .map(|r| r[j])
                .fold(f64::NEG_INFINITY, f64::max)
        })
        .collect();
    let col_min = (0..n)
        .map(|j| weighted.iter().map(|r| r[j]).fold(f64::INFINITY, f64::min))
        .collect();
    Ok(closeness(norm.alternatives(), weighted, col_max, col_min))
}

/// Classical TOPSIS: vector (Euclidean) normalization of the raw matrix, with
/// ideal and anti-ideal chosen per criterion orientation.
pub fn topsis_vector(matrix: &DecisionMatrix, w: &WeightVector) -> Result<MethodRanking> {
    check_dims(matrix.n_criteria(), w)?;
    let n = matrix.n_criteria();
    let norms: Vec<f64> = (0..n)
        .map(|j| matrix.column(j).map(|x| x * x).sum::<f64>().sqrt())
        .collect();
    let weighted: Vec<Vec<f64>> = matrix
        .values()
        .iter()
        .map(|row| {
            (0..n)
                .map(|j| {
                    let sign = match matrix.criteria()[j].orientation {
                        Orientation::Benefit => 1.0,
                        Orientation::Cost => -1.0,
                    };
                    // Negating cost columns lets ideal = max throughout.
                    if norms[j] == 0.0 {
                        0.0
                    } else {
                        sign * w.as_slice()[j] * row[j] / norms[j]
                    }
                })
                .collect()
        })
        .collect();
    let col_max = (0..n)
        .map(|j| {
            weighted
                .iter()
                .map(|r: &Vec<f64>| r[j])
                .fold(f64::NEG_INFINITY, f64::max)
        })
        .collect();
    let col_min = (0..n)
        .map(|j| {
            weighted
                .iter()
                .map(|r: &Vec<f64>| r[j])
                .fold(f64::INFINITY, f64::min)
        })
        .collect();
    Ok(closeness(matrix.alternatives(), weighted, col_max, col_min))
}
