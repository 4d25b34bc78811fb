use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mcdm::{
    ranks_from_scores, Diagnostics, Method, MethodRanking, NormalizedMatrix, WeightVector,
};

/// Preference function applied to the difference `d = r_a − r_b` on a criterion.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum PreferenceFunction {
    /// Strict preference for any positive difference.
    Usual,
    /// `clamp(d / p_j, 0, 1)` with one threshold per criterion.
    Linear { thresholds: Vec<f64> },
}

impl PreferenceFunction {
    pub fn linear_uniform(threshold: f64, n_criteria: usize) -> Self {
        PreferenceFunction::Linear {
            thresholds: vec![threshold; n_criteria],
        }
    }

    fn preference(&self, j: usize, d: f64) -> f64 {
        if d <= 0.0 {
            return 0.0;
        }
        match self {
            PreferenceFunction::Usual => 1.0,
            PreferenceFunction::Linear { thresholds } => (d / thresholds[j]).min(1.0),
        }
    }
}

/// PROMETHEE II net outranking flows.
pub fn promethee2(
    norm: &NormalizedMatrix,
    w: &WeightVector,
    preference: &PreferenceFunction,
) -> Result<MethodRanking> {
    let m = norm.n_alternatives();
    let n = norm.n_criteria();
    if w.len() != n {
        return Err(Error::Ranking(format!(
            "{} weights for {n} criteria",
            w.len()
        )));
    }
    if m < 2 {
        return Err(Error::Ranking(
            "PROMETHEE II needs at least 2 alternatives".into(),
        ));
    }
    if let PreferenceFunction::Linear { thresholds } = preference {
        if thresholds.len() != n {
            return Err(Error::Ranking(format!(
                "{} thresholds for {n} criteria",
                thresholds.len()
            )));
        }
        if let Some(p) = thresholds.iter().find(|p| !(p.is_finite() && **p > 0.0)) {
            return Err(Error::Ranking(format!(
                "linear preference threshold {p} must be positive"
            )));
        }
    }

    let r = norm.values();
    let weights = w.as_slice();
    // pi[a][b]: aggregated preference of a over b.
    let pi: Vec<Vec<f64>> = (0..m)
        .map(|a| {
            (0..m)
                .map(|b| {
                    if a == b {
                        return 0.0;
                    }
                    (0..n)
                        .map(|j| weights[j] * preference.preference(j, r[a][j] - r[b][j]))
                        .sum()
                })
                .collect()
        })
        .collect();
    let scale = 1.0 / (m - 1) as f64;
    let phi_plus: Vec<f64> = (0..m).map(|a| pi[a].iter().sum::<f64>() * scale).collect();
    let phi_minus: Vec<f64> = (0..m)
        .map(|a| (0..m).map(|b| pi[b][a]).sum::<f64>() * scale)
        .collect();
    let phi: Vec<f64> = phi_plus
        .iter()
        .zip(&phi_minus)
        .map(|(p, q)| p - q)
        .collect();

    Ok(MethodRanking {
        method: Method::Promethee2,
        alternatives: norm.alternatives().to_vec(),
        ranks: ranks_from_scores(&phi, true),
        scores: phi.clone(),
        diagnostics: Diagnostics::Promethee {
            phi_plus,
            phi_minus,
            phi,
        },
    })
}
