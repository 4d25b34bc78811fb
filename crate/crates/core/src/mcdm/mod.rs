//! Multi-criteria ranking of experiment alternatives.

mod normalize;
mod promethee;
mod topsis;
mod vikor;
mod weights;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kpi::DecisionMatrix;
use crate::market::comment_block;

pub use normalize::{minmax_normalize, NormalizedMatrix};
pub use promethee::{promethee2, PreferenceFunction};
pub use topsis::{topsis, topsis_vector};
pub use vikor::vikor;
pub use weights::{
    entropy_weights, entropy_weights_raw, hybrid_weights, weight_set, EntropyBasis, WeightSet,
    WeightVector,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Topsis,
    Promethee2,
    Vikor,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Topsis => "topsis",
            Method::Promethee2 => "promethee",
            Method::Vikor => "vikor",
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Method::Topsis => "TOPSIS",
            Method::Promethee2 => "PROMETHEE II",
            Method::Vikor => "VIKOR",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum Diagnostics {
    Topsis {
        d_plus: Vec<f64>,
        d_minus: Vec<f64>,
    },
    Promethee {
        phi_plus: Vec<f64>,
        phi_minus: Vec<f64>,
        phi: Vec<f64>,
    },
    Vikor {
        s: Vec<f64>,
        r: Vec<f64>,
        q: Vec<f64>,
        acceptable_advantage: bool,
        acceptable_stability: bool,
    },
}

/// Scores and 1-based ranks of one method, indexed like the matrix rows.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MethodRanking {
    pub method: Method,
    pub alternatives: Vec<String>,
    pub scores: Vec<f64>,
    pub ranks: Vec<usize>,
    pub diagnostics: Diagnostics,
}

/// Ranks 1..=m from scores. Equal scores keep their listed order, so the
/// result is always a permutation.
pub fn ranks_from_scores(scores: &[f64], higher_is_better: bool) -> Vec<usize> {
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| {
        let ord = scores[a].total_cmp(&scores[b]);
        if higher_is_better {
            ord.reverse()
        } else {
            ord
        }
    });
    let mut ranks = vec![0; scores.len()];
    for (pos, &i) in order.iter().enumerate() {
        ranks[i] = pos + 1;
    }
    ranks
}

/// Combined ranking across methods.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StudyRanking {
    pub alternatives: Vec<String>,
    pub methods: Vec<MethodRanking>,
    /// Mean of `m + 1 − rank` over methods.
    pub aggregate_scores: Vec<f64>,
    /// 1-based final position per alternative.
    pub final_positions: Vec<usize>,
}

impl StudyRanking {
    /// Alternative indices from best to worst.
    pub fn order(&self) -> Vec<usize> {
        let mut order: Vec<usize> = (0..self.alternatives.len()).collect();
        order.sort_by_key(|&i| self.final_positions[i]);
        order
    }

    pub fn method(&self, method: Method) -> Option<&MethodRanking> {
        self.methods.iter().find(|r| r.method == method)
    }

    pub fn index_of(&self, alternative: &str) -> Option<usize> {
        self.alternatives.iter().position(|a| a == alternative)
    }
}

pub fn aggregate(rankings: &[MethodRanking]) -> Result<StudyRanking> {
    let first = rankings
        .first()
        .ok_or_else(|| Error::Ranking("no method rankings to aggregate".into()))?;
    let m = first.alternatives.len();
    if let Some(r) = rankings
        .iter()
        .find(|r| r.alternatives != first.alternatives)
    {
        return Err(Error::Ranking(format!(
            "{} ranks a different set of alternatives than {}",
            r.method, first.method
        )));
    }
    let aggregate_scores: Vec<f64> = (0..m)
        .map(|i| {
            rankings
                .iter()
                .map(|r| (m + 1 - r.ranks[i]) as f64)
                .sum::<f64>()
                / rankings.len() as f64
        })
        .collect();
    Ok(StudyRanking {
        alternatives: first.alternatives.clone(),
        methods: rankings.to_vec(),
        final_positions: ranks_from_scores(&aggregate_scores, true),
        aggregate_scores,
    })
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WeightScheme {
    Equal,
    Entropy,
    #[default]
    Hybrid,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PreferenceKind {
    #[default]
    Usual,
    Linear,
}

impl FromStr for PreferenceKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "usual" => Ok(PreferenceKind::Usual),
            "linear" => Ok(PreferenceKind::Linear),
            other => Err(Error::Config(format!(
                "unknown preference function '{other}' (usual|linear)"
            ))),
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TopsisNormalization {
    #[default]
    MinMax,
    Vector,
}

pub const DEFAULT_LINEAR_THRESHOLD: f64 = 0.5;
pub const DEFAULT_VIKOR_V: f64 = 0.5;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct McdmSettings {
    pub weights: WeightScheme,
    pub entropy_basis: EntropyBasis,
    pub preference: PreferenceKind,
    /// Threshold on normalized differences for the linear preference function.
    pub linear_threshold: f64,
    pub vikor_v: f64,
    pub topsis_normalization: TopsisNormalization,
}

impl Default for McdmSettings {
    fn default() -> Self {
        Self {
            weights: WeightScheme::Hybrid,
            entropy_basis: EntropyBasis::Raw,
            preference: PreferenceKind::Usual,
            linear_threshold: DEFAULT_LINEAR_THRESHOLD,
            vikor_v: DEFAULT_VIKOR_V,
            topsis_normalization: TopsisNormalization::MinMax,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RankingOutcome {
    pub normalized: NormalizedMatrix,
    pub weight_set: WeightSet,
    pub ranking: StudyRanking,
}

impl RankingOutcome {
    pub fn applied_weights(&self, scheme: WeightScheme) -> &WeightVector {
        match scheme {
            WeightScheme::Equal => &self.weight_set.equal,
            WeightScheme::Entropy => &self.weight_set.entropy,
            WeightScheme::Hybrid => &self.weight_set.hybrid,
        }
    }
}

/// Normalize, weight, and rank with all three methods.
pub fn rank(matrix: &DecisionMatrix, settings: &McdmSettings) -> Result<RankingOutcome> {
    let normalized = minmax_normalize(matrix)?;
    let weight_set = weight_set(matrix, &normalized, settings.entropy_basis)?;
    let w = match settings.weights {
        WeightScheme::Equal => &weight_set.equal,
        WeightScheme::Entropy => &weight_set.entropy,
        WeightScheme::Hybrid => &weight_set.hybrid,
    };
    let t = match settings.topsis_normalization {
        TopsisNormalization::MinMax => topsis(&normalized, w)?,
        TopsisNormalization::Vector => topsis_vector(matrix, w)?,
    };
    let preference = match settings.preference {
        PreferenceKind::Usual => PreferenceFunction::Usual,
        PreferenceKind::Linear => {
            PreferenceFunction::linear_uniform(settings.linear_threshold, matrix.n_criteria())
        }
    };
    let p = promethee2(&normalized, w, &preference)?;
    let v = vikor(matrix, w, settings.vikor_v)?;
    let ranking = aggregate(&[t, p, v])?;
    Ok(RankingOutcome {
        normalized,
        weight_set,
        ranking,
    })
}

/// `rankings.csv`: per alternative, score and rank for each method, then the
/// aggregate score and final position.
pub fn rankings_csv(ranking: &StudyRanking, header: &[String]) -> String {
    let mut out = comment_block(header);
    out.push_str("alternative");
    for r in &ranking.methods {
        let name = r.method.name();
        out.push_str(&format!(",{name}_score,{name}_rank"));
    }
    out.push_str(",aggregate_score,final_position\n");
    for (i, alt) in ranking.alternatives.iter().enumerate() {
        out.push_str(alt);
        for r in &ranking.methods {
            out.push_str(&format!(",{},{}", r.scores[i], r.ranks[i]));
        }
        out.push_str(&format!(
            ",{},{}\n",
            ranking.aggregate_scores[i], ranking.final_positions[i]
        ));
    }
    out
}

/// `weights.csv`: equal, entropy and hybrid weight per criterion.
pub fn weights_csv(criteria: &[String], weights: &WeightSet, header: &[String]) -> String {
    let mut out = comment_block(header);
    out.push_str("criterion,equal,entropy,hybrid\n");
    for (j, name) in criteria.iter().enumerate() {
        out.push_str(&format!(
            "{name},{},{},{}\n",
            weights.equal.as_slice()[j],
            weights.entropy.as_slice()[j],
            weights.hybrid.as_slice()[j]
        ));
    }
    out
}
