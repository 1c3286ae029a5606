//! Rank statistics: Spearman correlation, golden ranks, template gating.

use serde::{Deserialize, Serialize};

use super::EvalError;

/// 1-based ranks, ties receiving the average of the positions they span.
pub fn average_ranks(values: &[f64]) -> Vec<f64> {
    let n = values.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; n];
    let mut i = 0;
    while i < n {
        let mut j = i;
        while j + 1 < n && values[order[j + 1]] == values[order[i]] {
            j += 1;
        }
        let avg = (i + j) as f64 / 2.0 + 1.0;
        for &k in &order[i..=j] {
            ranks[k] = avg;
        }
        i = j + 1;
    }
    ranks
}

fn check_pair(x: &[f64], y: &[f64]) -> Result<(), EvalError> {
    if x.len() != y.len() {
        return Err(EvalError::LengthMismatch(x.len(), y.len()));
    }
    if x.len() < 2 {
        return Err(EvalError::DegenerateInput("need at least two observations"));
    }
    if x.iter().chain(y).any(|v| v.is_nan()) {
        return Err(EvalError::NonFinite);
    }
    let constant = |v: &[f64]| v.iter().all(|a| *a == v[0]);
    if constant(x) || constant(y) {
        return Err(EvalError::DegenerateInput("constant input"));
    }
    Ok(())
}

/// Spearman's ρ = 1 − 6 Σd² / (n(n² − 1)) over average ranks. With ties the
/// value approximates the Pearson correlation of the ranks.
pub fn spearman(x: &[f64], y: &[f64]) -> Result<f64, EvalError> {
    check_pair(x, y)?;
    let (rx, ry) = (average_ranks(x), average_ranks(y));
    let n = x.len() as f64;
    let d2: f64 = rx.iter().zip(&ry).map(|(a, b)| (a - b) * (a - b)).sum();
    Ok(1.0 - 6.0 * d2 / (n * (n * n - 1.0)))
}

/// Pearson product-moment correlation.
pub fn pearson(x: &[f64], y: &[f64]) -> Result<f64, EvalError> {
    check_pair(x, y)?;
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
    }
    Ok(sxy / (sxx * syy).sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind", content = "k")]
pub enum GoldenStatistic {
    MeanAll,
    MinScore,
    MeanKLowest(usize),
    MaxScore,
    MeanKHighest(usize),
}

impl GoldenStatistic {
    pub fn name(self) -> String {
        match self {
            GoldenStatistic::MeanAll => "mean_all".into(),
            GoldenStatistic::MinScore => "min_score".into(),
            GoldenStatistic::MeanKLowest(k) => format!("mean_{k}_lowest"),
            GoldenStatistic::MaxScore => "max_score".into(),
            GoldenStatistic::MeanKHighest(k) => format!("mean_{k}_highest"),
        }
    }

    pub fn apply(self, scores: &[f64]) -> Result<f64, EvalError> {
        if scores.is_empty() {
            return Err(EvalError::EmptyScores);
        }
        let mut s = scores.to_vec();
        s.sort_by(f64::total_cmp);
        let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
        let k_check = |k: usize| {
            if k == 0 || k > s.len() {
                Err(EvalError::KTooLarge { k, len: s.len() })
            } else {
                Ok(k)
            }
        };
        Ok(match self {
            GoldenStatistic::MeanAll => mean(&s),
            GoldenStatistic::MinScore => s[0],
            GoldenStatistic::MaxScore => s[s.len() - 1],
            GoldenStatistic::MeanKLowest(k) => mean(&s[..k_check(k)?]),
            GoldenStatistic::MeanKHighest(k) => mean(&s[s.len() - k_check(k)?..]),
        })
    }

    /// Direction in which the statistic signals an error-prone template:
    /// low imposter statistics mean easily accepted forgeries, high genuine
    /// statistics mean frequent rejections.
    pub fn default_order(self) -> RankOrder {
        match self {
            GoldenStatistic::MaxScore | GoldenStatistic::MeanKHighest(_) => RankOrder::HighIsWorse,
            _ => RankOrder::LowIsWorse,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RankOrder {
    LowIsWorse,
    HighIsWorse,
}

/// Ground-truth ordering of templates. Rank 1 is the most error-prone
/// template, so a useful quality measure correlates positively with the
/// ranks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GoldenRank {
    pub statistic: GoldenStatistic,
    pub order: RankOrder,
    pub values: Vec<f64>,
    pub ranks: Vec<f64>,
}

pub fn golden_rank(
    score_lists: &[Vec<f64>],
    statistic: GoldenStatistic,
    order: RankOrder,
) -> Result<GoldenRank, EvalError> {
    let values = score_lists
        .iter()
        .map(|s| statistic.apply(s))
        .collect::<Result<Vec<_>, _>>()?;
    let keyed: Vec<f64> = match order {
        RankOrder::LowIsWorse => values.clone(),
        RankOrder::HighIsWorse => values.iter().map(|v| -v).collect(),
    };
    Ok(GoldenRank {
        statistic,
        order,
        ranks: average_ranks(&keyed),
        values,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GateOutcome {
    pub kept: Vec<usize>,
    pub discarded: Vec<usize>,
}

fn check_fraction(fraction: f64) -> Result<(), EvalError> {
    if fraction > 0.0 && fraction < 1.0 {
        Ok(())
    } else {
        Err(EvalError::InvalidFraction(fraction))
    }
}

/// Discards the `⌊fraction · n⌋` lowest-quality templates; ties are broken
/// by template id.
pub fn gate_templates(
    ids: &[String],
    quality: &[f64],
    fraction: f64,
) -> Result<GateOutcome, EvalError> {
    check_fraction(fraction)?;
    if ids.len() != quality.len() {
        return Err(EvalError::LengthMismatch(ids.len(), quality.len()));
    }
    if quality.iter().any(|q| q.is_nan()) {
        return Err(EvalError::NonFinite);
    }
    let n = ids.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        quality[a]
            .total_cmp(&quality[b])
            .then_with(|| ids[a].cmp(&ids[b]))
    });
    let cut = (fraction * n as f64).floor() as usize;
    let mut discarded = order[..cut].to_vec();
    let mut kept = order[cut..].to_vec();
    discarded.sort_unstable();
    kept.sort_unstable();
    Ok(GateOutcome { kept, discarded })
}

/// Keeps only templates that fall in the discarded fraction of none of the
/// given metrics.
pub fn gate_multi(
    ids: &[String],
    metrics: &[&[f64]],
    fraction: f64,
) -> Result<GateOutcome, EvalError> {
    check_fraction(fraction)?;
    let mut dropped = vec![false; ids.len()];
    for m in metrics {
        for i in gate_templates(ids, m, fraction)?.discarded {
            dropped[i] = true;
        }
    }
    let (discarded, kept): (Vec<usize>, Vec<usize>) = (0..ids.len()).partition(|&i| dropped[i]);
    Ok(GateOutcome { kept, discarded })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ranks_average_ties() {
        assert_eq!(
            average_ranks(&[10.0, 20.0, 20.0, 5.0]),
            vec![2.0, 3.5, 3.5, 1.0]
        );
    }

    #[test]
    fn spearman_examples() {
        let x = [1.0, 2.0, 3.0, 4.0];
        assert_eq!(spearman(&x, &[2.0, 4.0, 6.0, 8.0]).unwrap(), 1.0);
        assert_eq!(spearman(&x, &[4.0, 3.0, 2.0, 1.0]).unwrap(), -1.0);
        assert_eq!(spearman(&[1.0, 2.0, 3.0], &[1.0, 3.0, 2.0]).unwrap(), 0.5);
        assert!(matches!(
            spearman(&[1.0, 2.0], &[1.0]),
            Err(EvalError::LengthMismatch(2, 1))
        ));
        assert!(matches!(
            spearman(&[1.0, 1.0, 1.0], &[1.0, 2.0, 3.0]),
            Err(EvalError::DegenerateInput(_))
        ));
    }

    #[test]
    fn golden_statistics() {
        let imp = [5.0, 3.0, 1.0, 4.0, 2.0];
        assert_eq!(GoldenStatistic::MinScore.apply(&imp).unwrap(), 1.0);
        assert_eq!(GoldenStatistic::MeanKLowest(3).apply(&imp).unwrap(), 2.0);
        assert_eq!(GoldenStatistic::MeanAll.apply(&imp).unwrap(), 3.0);
        let gen = [1.0, 2.0, 3.0, 4.0, 5.0, 6.0];
        assert_eq!(GoldenStatistic::MaxScore.apply(&gen).unwrap(), 6.0);
        assert_eq!(GoldenStatistic::MeanKHighest(5).apply(&gen).unwrap(), 4.0);
        assert_eq!(
            GoldenStatistic::MeanKLowest(9).apply(&imp).unwrap_err(),
            EvalError::KTooLarge { k: 9, len: 5 }
        );
        assert_eq!(
            GoldenStatistic::MeanAll.apply(&[]).unwrap_err(),
            EvalError::EmptyScores
        );
    }

    #[test]
    fn golden_rank_worst_first() {
        let lists = vec![vec![3.0], vec![1.0], vec![2.0]];
        let low = golden_rank(&lists, GoldenStatistic::MeanAll, RankOrder::LowIsWorse).unwrap();
        assert_eq!(low.ranks, vec![3.0, 1.0, 2.0]);
        let high = golden_rank(&lists, GoldenStatistic::MaxScore, RankOrder::HighIsWorse).unwrap();
        assert_eq!(high.ranks, vec![1.0, 3.0, 2.0]);
    }

    fn ids(n: usize) -> Vec<String> {
        (0..n).map(|i| format!("u{i:03}")).collect()
    }

    #[test]
    fn gate_ninety_four() {
        let q: Vec<f64> = (0..94).map(|i| ((i * 37) % 94) as f64).collect();
        let g = gate_templates(&ids(94), &q, 0.1).unwrap();
        assert_eq!(g.discarded.len(), 9);
        assert_eq!(g.kept.len(), 85);
        assert!(g.discarded.iter().all(|&i| q[i] < 9.0));
    }

    #[test]
    fn gate_ties_by_id() {
        let names = vec![
            "c".to_string(),
            "a".to_string(),
            "b".to_string(),
            "d".to_string(),
        ];
        let g = gate_templates(&names, &[1.0; 4], 0.5).unwrap();
        assert_eq!(g.discarded, vec![1, 2]);
        assert!(matches!(
            gate_templates(&names, &[1.0; 4], 1.0),
            Err(EvalError::InvalidFraction(_))
        ));
        assert!(gate_templates(&names, &[1.0; 4], 0.0).is_err());
    }

    #[test]
    fn gate_multi_unions_discards() {
        let a = [1.0, 2.0, 3.0, 4.0];
        let b = [4.0, 3.0, 2.0, 1.0];
        let g = gate_multi(&ids(4), &[&a, &b], 0.25).unwrap();
        assert_eq!(g.discarded, vec![0, 3]);
        assert_eq!(g.kept, vec![1, 2]);
    }
}
