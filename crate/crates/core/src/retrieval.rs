//! Query-by-Example over a labeled dataset: similarity matrices, k-NN voting
//! and leave-one-out evaluation.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::inference::{match_with_sigmas, MatchConfig, SigmaMode};
use crate::model::{estimate_sigmas, EventGraph, SigmaConfig, SIGMA_FLOOR};

#[derive(Debug, Clone, PartialEq)]
pub struct DatasetItem {
    pub id: String,
    pub label: Option<String>,
    pub graph: EventGraph,
    pub source: Option<std::path::PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Dataset {
    items: Vec<DatasetItem>,
}

impl Dataset {
    pub fn new(items: Vec<DatasetItem>) -> Result<Self> {
        let mut seen = std::collections::HashSet::new();
        for it in &items {
            if !seen.insert(it.id.as_str()) {
                return Err(Error::InvalidParameter(format!("duplicate item id `{}`", it.id)));
            }
        }
        Ok(Dataset { items })
    }

    pub fn items(&self) -> &[DatasetItem] {
        &self.items
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn graphs(&self) -> Vec<&EventGraph> {
        self.items.iter().map(|i| &i.graph).collect()
    }

    pub fn labels(&self) -> Vec<Option<&str>> {
        self.items.iter().map(|i| i.label.as_deref()).collect()
    }
}

/// Noise deviations for one query row, shared by every candidate in the row.
///
/// Under [`SigmaMode::Estimate`] each component is the median of the
/// per-candidate estimates, so every similarity in a row is measured on the
/// same scale and rows can be ranked.
pub fn row_sigmas(
    query: &EventGraph,
    candidates: &[&EventGraph],
    cfg: &MatchConfig,
) -> Result<SigmaConfig> {
    match cfg.sigmas {
        SigmaMode::Fixed(s) => {
            s.validate()?;
            Ok(s)
        }
        SigmaMode::Estimate => {
            let est: Vec<SigmaConfig> = candidates
                .iter()
                .map(|y| estimate_sigmas(query, y))
                .collect::<Result<_>>()?;
            if est.is_empty() {
                return Ok(SigmaConfig::uniform(SIGMA_FLOOR));
            }
            let median = |f: fn(&SigmaConfig) -> f64| {
                let mut v: Vec<f64> = est.iter().map(f).collect();
                v.sort_by(f64::total_cmp);
                let n = v.len();
                if n % 2 == 1 {
                    v[n / 2]
                } else {
                    0.5 * (v[n / 2 - 1] + v[n / 2])
                }
            };
            Ok(SigmaConfig {
                node: median(|s| s.node),
                temporal: median(|s| s.temporal),
                spatial: median(|s| s.spatial),
            })
        }
    }
}

/// `S[i][j] = log p(Z = queries[i] | Y = models[j])`. When `skip_diagonal`
/// is set the diagonal is not evaluated (`None`); failed cells are `None` too.
///
/// Cells are computed in parallel on the current rayon pool; the result does
/// not depend on scheduling.
pub fn cross_similarity(
    queries: &[&EventGraph],
    models: &[&EventGraph],
    cfg: &MatchConfig,
    skip_diagonal: bool,
) -> Vec<Vec<Option<f64>>> {
    queries
        .par_iter()
        .enumerate()
        .map(|(i, z)| {
            let candidates: Vec<&EventGraph> = models
                .iter()
                .enumerate()
                .filter(|(j, _)| !(skip_diagonal && *j == i))
                .map(|(_, y)| *y)
                .collect();
            let Ok(sigmas) = row_sigmas(z, &candidates, cfg) else {
                return vec![None; models.len()];
            };
            models
                .par_iter()
                .enumerate()
                .map(|(j, y)| {
                    if skip_diagonal && i == j {
                        return None;
                    }
                    match_with_sigmas(z, y, &sigmas, cfg)
                        .ok()
                        .map(|r| r.log_similarity)
                })
                .collect()
        })
        .collect()
}

/// All ordered pairs of the dataset, diagonal skipped.
pub fn similarity_matrix(dataset: &Dataset, cfg: &MatchConfig) -> Result<Vec<Vec<Option<f64>>>> {
    if dataset.len() < 2 {
        return Err(Error::InvalidParameter(
            "a similarity matrix needs at least 2 items".into(),
        ));
    }
    let graphs = dataset.graphs();
    Ok(cross_similarity(&graphs, &graphs, cfg, true))
}

/// Candidate indices by descending similarity, ties to the lower index.
/// Missing values and `exclude` are dropped.
pub fn rank(row: &[Option<f64>], exclude: Option<usize>) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..row.len())
        .filter(|&j| Some(j) != exclude && row[j].is_some_and(|v| !v.is_nan()))
        .collect();
    idx.sort_by(|&a, &b| row[b].unwrap().total_cmp(&row[a].unwrap()).then(a.cmp(&b)));
    idx
}

/// Majority label among the `k` most similar labeled candidates. A tie
/// between labels goes to the one holding the most similar candidate.
pub fn knn_classify(
    row: &[Option<f64>],
    labels: &[Option<&str>],
    k: usize,
    exclude: Option<usize>,
) -> Result<String> {
    if k == 0 {
        return Err(Error::InvalidParameter("k must be at least 1".into()));
    }
    let voters: Vec<usize> = rank(row, exclude)
        .into_iter()
        .filter(|&j| labels.get(j).copied().flatten().is_some())
        .take(k)
        .collect();
    if voters.is_empty() {
        return Err(Error::NoCandidates);
    }
    let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
    for &j in &voters {
        *counts.entry(labels[j].unwrap()).or_default() += 1;
    }
    let top = *counts.values().max().unwrap();
    // voters are in similarity order, so the first with a top count wins
    let winner = voters
        .iter()
        .map(|&j| labels[j].unwrap())
        .find(|l| counts[l] == top)
        .unwrap();
    Ok(winner.to_string())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub labels: Vec<String>,
    /// `rows[t][p]`: fraction of items with true label `t` predicted as `p`.
    pub rows: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LeaveOneOut {
    pub predictions: Vec<String>,
    pub confusion: ConfusionMatrix,
    pub accuracy: f64,
}

/// Every label needs `k + 1` items so leave-one-out always has `k` voters.
pub fn check_labels(labels: &[Option<&str>], k: usize) -> Result<()> {
    if k == 0 {
        return Err(Error::InvalidParameter("k must be at least 1".into()));
    }
    let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
    for l in labels.iter().flatten() {
        *counts.entry(l).or_default() += 1;
    }
    if counts.is_empty() {
        return Err(Error::NoCandidates);
    }
    for (l, &c) in &counts {
        if c < k + 1 {
            return Err(Error::UnderpopulatedLabel {
                label: l.to_string(),
                count: c,
                k,
                needed: k + 1,
            });
        }
    }
    Ok(())
}

/// Classify every labeled item against all others with the k-NN rule.
/// `matrix[i][j]` is the similarity of item `i` (as query) to item `j`.
pub fn leave_one_out_from_matrix(
    matrix: &[Vec<Option<f64>>],
    labels: &[Option<&str>],
    k: usize,
) -> Result<LeaveOneOut> {
    check_labels(labels, k)?;
    let mut names: Vec<String> = labels.iter().flatten().map(|s| s.to_string()).collect();
    names.sort();
    names.dedup();
    let pos = |l: &str| names.iter().position(|n| n == l).unwrap();

    let mut tally = vec![vec![0usize; names.len()]; names.len()];
    let mut predictions = Vec::new();
    let mut correct = 0usize;
    let mut total = 0usize;
    for (i, truth) in labels.iter().enumerate() {
        let Some(truth) = truth else { continue };
        let pred = knn_classify(&matrix[i], labels, k, Some(i))?;
        tally[pos(truth)][pos(&pred)] += 1;
        correct += usize::from(pred == *truth);
        total += 1;
        predictions.push(pred);
    }
    let rows = tally
        .iter()
        .map(|r| {
            let n: usize = r.iter().sum();
            r.iter()
                .map(|&c| if n == 0 { 0.0 } else { c as f64 / n as f64 })
                .collect()
        })
        .collect();
    Ok(LeaveOneOut {
        predictions,
        confusion: ConfusionMatrix { labels: names, rows },
        accuracy: correct as f64 / total as f64,
    })
}

/// Leave-one-out k-NN evaluation of a dataset.
pub fn leave_one_out(dataset: &Dataset, cfg: &MatchConfig, k: usize) -> Result<(Vec<Vec<Option<f64>>>, LeaveOneOut)> {
    let labels = dataset.labels();
    check_labels(&labels, k)?;
    let matrix = similarity_matrix(dataset, cfg)?;
    let loo = leave_one_out_from_matrix(&matrix, &labels, k)?;
    Ok((matrix, loo))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(v: &[f64]) -> Vec<Option<f64>> {
        v.iter().map(|&x| Some(x)).collect()
    }

    #[test]
    fn knn_examples() {
        let labels = [Some("A"), Some("A"), Some("B"), Some("C")];
        assert_eq!(knn_classify(&row(&[5.0, 4.0, 1.0, 0.0]), &labels, 2, None).unwrap(), "A");
        // nearest two are A (3.0) and B (9.0): tie goes to B
        assert_eq!(knn_classify(&row(&[3.0, -1.0, 9.0, 0.0]), &labels, 2, None).unwrap(), "B");
        assert_eq!(knn_classify(&row(&[0.0, 0.0, 0.0, 1.0]), &labels, 1, None).unwrap(), "C");
        assert!(matches!(
            knn_classify(&row(&[1.0]), &[None], 2, None),
            Err(Error::NoCandidates)
        ));
    }

    #[test]
    fn knn_is_invariant_to_monotone_transforms() {
        let labels = [Some("A"), Some("B"), Some("B"), Some("A"), Some("C")];
        let r = [0.3, -2.0, 0.1, 0.25, -0.5];
        let t: Vec<f64> = r.iter().map(|v| (3.0f64 * v).exp() + 7.0).collect();
        for k in 1..=4 {
            assert_eq!(
                knn_classify(&row(&r), &labels, k, None).unwrap(),
                knn_classify(&row(&t), &labels, k, None).unwrap()
            );
        }
    }

    #[test]
    fn leave_one_out_never_votes_for_self() {
        // each item is most similar to itself, then to its class mate
        let labels = [Some("A"), Some("A"), Some("B"), Some("B")];
        let m = vec![
            vec![Some(10.0), Some(1.0), Some(0.0), Some(0.5)],
            vec![Some(1.0), Some(10.0), Some(0.5), Some(0.0)],
            vec![Some(0.0), Some(0.5), Some(10.0), Some(1.0)],
            vec![Some(0.5), Some(0.0), Some(1.0), Some(10.0)],
        ];
        let r = leave_one_out_from_matrix(&m, &labels, 1).unwrap();
        assert_eq!(r.accuracy, 1.0);
        assert_eq!(r.confusion.rows, vec![vec![1.0, 0.0], vec![0.0, 1.0]]);
        assert!(matches!(
            leave_one_out_from_matrix(&m, &labels, 2),
            Err(Error::UnderpopulatedLabel { .. })
        ));
    }

    #[test]
    fn confusion_rows_sum_to_one() {
        let labels = [Some("A"), Some("A"), Some("A"), Some("B"), Some("B"), Some("B")];
        let m: Vec<Vec<Option<f64>>> = (0..6)
            .map(|i| (0..6).map(|j| Some(((i * 7 + j * 5) % 11) as f64)).collect())
            .collect();
        let r = leave_one_out_from_matrix(&m, &labels, 2).unwrap();
        for rw in &r.confusion.rows {
            assert!((rw.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        }
        assert!((0.0..=1.0).contains(&r.accuracy));
    }

    #[test]
    fn rank_drops_missing_and_excluded() {
        let r = vec![Some(1.0), None, Some(3.0), Some(3.0), Some(f64::NAN)];
        assert_eq!(rank(&r, Some(0)), vec![2, 3]);
    }
}
