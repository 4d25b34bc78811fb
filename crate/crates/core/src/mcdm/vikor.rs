use crate::error::{Error, Result};
use crate::kpi::{DecisionMatrix, Orientation};
use crate::mcdm::{ranks_from_scores, Diagnostics, Method, MethodRanking, WeightVector};

const DEGENERATE_SPREAD: f64 = 1e-12;

/// VIKOR compromise ranking; lower Q is better. `v` weighs group utility
/// against individual regret.
pub fn vikor(matrix: &DecisionMatrix, w: &WeightVector, v: f64) -> Result<MethodRanking> {
    if !(0.0..=1.0).contains(&v) {
        return Err(Error::Ranking(format!("VIKOR v = {v} outside [0, 1]")));
    }
    let m = matrix.n_alternatives();
    let n = matrix.n_criteria();
    if w.len() != n {
        return Err(Error::Ranking(format!(
            "{} weights for {n} criteria",
            w.len()
        )));
    }
    if m < 2 {
        return Err(Error::Ranking("VIKOR needs at least 2 alternatives".into()));
    }

    let mut best = vec![0.0; n];
    let mut worst = vec![0.0; n];
    for (j, c) in matrix.criteria().iter().enumerate() {
        let lo = matrix.column(j).fold(f64::INFINITY, f64::min);
        let hi = matrix.column(j).fold(f64::NEG_INFINITY, f64::max);
        (best[j], worst[j]) = match c.orientation {
            Orientation::Benefit => (hi, lo),
            Orientation::Cost => (lo, hi),
        };
    }

    let mut s = vec![0.0; m];
    let mut r = vec![0.0; m];
    for (i, row) in matrix.values().iter().enumerate() {
        for j in 0..n {
            let span = best[j] - worst[j];
            let term = if span == 0.0 {
                0.0
            } else {
                w.as_slice()[j] * (best[j] - row[j]) / span
            };
            s[i] += term;
            r[i] = f64::max(r[i], term);
        }
    }

    let (s_best, s_worst) = min_max(&s);
    let (r_best, r_worst) = min_max(&r);
    // S and R lie in [0, 1]; a spread at rounding level is a tie, not a range.
    let scaled = |x: f64, lo: f64, hi: f64| {
        if hi - lo <= DEGENERATE_SPREAD {
            0.0
        } else {
            (x - lo) / (hi - lo)
        }
    };
    let q: Vec<f64> = (0..m)
        .map(|i| v * scaled(s[i], s_best, s_worst) + (1.0 - v) * scaled(r[i], r_best, r_worst))
        .collect();
    let ranks = ranks_from_scores(&q, false);

    let mut by_q: Vec<usize> = (0..m).collect();
    by_q.sort_by_key(|&i| ranks[i]);
    let (first, second) = (by_q[0], by_q[1]);
    let acceptable_advantage = q[second] - q[first] >= 1.0 / (m - 1) as f64;
    let acceptable_stability = s[first] == s_best || r[first] == r_best;

    Ok(MethodRanking {
        method: Method::Vikor,
        alternatives: matrix.alternatives().to_vec(),
        scores: q.clone(),
        ranks,
        diagnostics: Diagnostics::Vikor {
            s,
            r,
            q,
            acceptable_advantage,
            acceptable_stability,
        },
    })
}

fn min_max(x: &[f64]) -> (f64, f64) {
    x.iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
            (lo.min(v), hi.max(v))
        })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kpi::Criterion;

    fn matrix(rows: Vec<Vec<f64>>, orientations: &[Orientation]) -> DecisionMatrix {
        DecisionMatrix::new(
            (0..rows.len()).map(|i| format!("a{i}")).collect(),
            orientations
                .iter()
                .enumerate()
                .map(|(j, &o)| Criterion {
                    name: format!("c{j}"),
                    orientation: o,
                })
                .collect(),
            rows,
        )
        .unwrap()
    }

    fn diag(r: &MethodRanking) -> (Vec<f64>, Vec<f64>, bool, bool) {
        match &r.diagnostics {
            Diagnostics::Vikor {
                s,
                r,
                acceptable_advantage,
                acceptable_stability,
                ..
            } => (
                s.clone(),
                r.clone(),
                *acceptable_advantage,
                *acceptable_stability,
            ),
            _ => unreachable!(),
        }
    }

    #[test]
    fn dominant_alternative_has_zero_regret() {
        let o = [Orientation::Benefit, Orientation::Cost];
        let m = matrix(vec![vec![1.0, 5.0], vec![3.0, 1.0], vec![2.0, 4.0]], &o);
        let r = vikor(&m, &WeightVector::equal(2), 0.5).unwrap();
        let (s, reg, _, stable) = diag(&r);
        assert_eq!((s[1], reg[1], r.scores[1]), (0.0, 0.0, 0.0));
        assert_eq!(r.ranks[1], 1);
        assert!(stable);
    }

    #[test]
    fn two_alternatives_span_q() {
        let o = [Orientation::Benefit; 2];
        let m = matrix(vec![vec![1.0, 1.0], vec![2.0, 2.0]], &o);
        let r = vikor(&m, &WeightVector::equal(2), 0.5).unwrap();
        assert_eq!(r.scores, vec![1.0, 0.0]);
        assert_eq!(r.ranks, vec![2, 1]);
        let (_, _, advantage, _) = diag(&r);
        assert!(advantage);
    }

    #[test]
    fn identical_alternatives_are_degenerate() {
        let o = [Orientation::Benefit; 2];
        let m = matrix(vec![vec![3.0, 1.0]; 3], &o);
        let r = vikor(&m, &WeightVector::equal(2), 0.5).unwrap();
        assert_eq!(r.scores, vec![0.0; 3]);
        assert_eq!(r.ranks, vec![1, 2, 3]);
    }

    #[test]
    fn rounding_level_spread_is_a_tie() {
        let o = [Orientation::Benefit; 2];
        let m = matrix(vec![vec![1.0, 2.0], vec![2.0, 1.0]], &o);
        let w = WeightVector::new(vec![0.5 + 1e-14, 0.5 - 1e-14]).unwrap();
        let r = vikor(&m, &w, 0.5).unwrap();
        assert_eq!(r.scores, vec![0.0, 0.0]);
    }

    #[test]
    fn v_out_of_range() {
        let m = matrix(vec![vec![1.0], vec![2.0]], &[Orientation::Cost]);
        assert!(vikor(&m, &WeightVector::equal(1), 1.5).is_err());
        assert!(vikor(&m, &WeightVector::equal(1), -0.1).is_err());
        assert!(vikor(&m, &WeightVector::equal(1), 1.0).is_ok());
    }
}
