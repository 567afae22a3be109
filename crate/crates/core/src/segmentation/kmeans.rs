//! Seeded k-means with k-means++ initialization and restarts.

use nalgebra::DMatrix;
use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

const MAX_LLOYD_ITERS: usize = 300;

/// Cluster the rows of `points` into `k` non-empty groups.
///
/// Labels are canonical: cluster ids are numbered by first appearance in row
/// order, so a permutation of the input that keeps the partition yields the
/// same labels up to that relabeling.
pub fn cluster_motions(points: &DMatrix<f64>, k: usize, restarts: usize, seed: u64) -> Result<Vec<usize>> {
    let n = points.nrows();
    if k == 0 {
        return Err(Error::InvalidParameter("k must be at least 1".into()));
    }
    if n < k {
        return Err(Error::InvalidParameter(format!(
            "cannot form {k} clusters from {n} trajectories"
        )));
    }
    let rows: Vec<Vec<f64>> = (0..n).map(|i| points.row(i).iter().copied().collect()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let mut best: Option<(f64, Vec<usize>)> = None;
    for _ in 0..restarts.max(1) {
        let centers = plus_plus(&rows, k, &mut rng);
        let (inertia, labels) = lloyd(&rows, centers);
        if best.as_ref().is_none_or(|(b, _)| inertia < *b - 1e-12) {
            best = Some((inertia, labels));
        }
    }
    Ok(canonical(&best.unwrap().1))
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn plus_plus(rows: &[Vec<f64>], k: usize, rng: &mut impl Rng) -> Vec<Vec<f64>> {
    let n = rows.len();
    let mut chosen = vec![rng.random_range(0..n)];
    let mut nearest: Vec<f64> = rows.iter().map(|r| sq_dist(r, &rows[chosen[0]])).collect();
    while chosen.len() < k {
        let next = match WeightedIndex::new(&nearest) {
            Ok(w) => w.sample(rng),
            // every point already coincides with a center
            Err(_) => (0..n).find(|i| !chosen.contains(i)).unwrap(),
        };
        chosen.push(next);
        for (d, r) in nearest.iter_mut().zip(rows) {
            *d = d.min(sq_dist(r, &rows[next]));
        }
    }
    chosen.into_iter().map(|i| rows[i].clone()).collect()
}

fn assign(rows: &[Vec<f64>], centers: &[Vec<f64>]) -> Vec<usize> {
    rows.iter()
        .map(|r| {
            let mut best = 0;
            let mut best_d = f64::INFINITY;
            for (c, center) in centers.iter().enumerate() {
                let d = sq_dist(r, center);
                if d < best_d {
                    best_d = d;
                    best = c;
                }
            }
            best
        })
        .collect()
}

fn lloyd(rows: &[Vec<f64>], mut centers: Vec<Vec<f64>>) -> (f64, Vec<usize>) {
    let k = centers.len();
    let dim = rows[0].len();
    let mut labels = assign(rows, &centers);
    for _ in 0..MAX_LLOYD_ITERS {
        fill_empty(rows, &centers, &mut labels, k);
        let mut sums = vec![vec![0.0; dim]; k];
        let mut counts = vec![0usize; k];
        for (r, &l) in rows.iter().zip(&labels) {
            counts[l] += 1;
            for (s, v) in sums[l].iter_mut().zip(r) {
                *s += v;
            }
        }
        for c in 0..k {
            centers[c] = sums[c].iter().map(|s| s / counts[c] as f64).collect();
        }
        let next = assign(rows, &centers);
        if next == labels {
            break;
        }
        labels = next;
    }
    fill_empty(rows, &centers, &mut labels, k);
    let inertia = rows
        .iter()
        .zip(&labels)
        .map(|(r, &l)| sq_dist(r, &centers[l]))
        .sum();
    (inertia, labels)
}

/// Re-seed each empty cluster with the point farthest from its center, taken
/// from a cluster that can spare it.
fn fill_empty(rows: &[Vec<f64>], centers: &[Vec<f64>], labels: &mut [usize], k: usize) {
    loop {
        let mut counts = vec![0usize; k];
        labels.iter().for_each(|&l| counts[l] += 1);
        let Some(empty) = counts.iter().position(|&c| c == 0) else {
            return;
        };
        let far = (0..rows.len())
            .filter(|&i| counts[labels[i]] > 1)
            .max_by(|&a, &b| {
                sq_dist(&rows[a], &centers[labels[a]])
                    .total_cmp(&sq_dist(&rows[b], &centers[labels[b]]))
                    .then(b.cmp(&a))
            })
            .expect("n >= k guarantees a donor cluster");
        labels[far] = empty;
    }
}

fn canonical(labels: &[usize]) -> Vec<usize> {
    let mut map: Vec<Option<usize>> = vec![None; labels.iter().max().map_or(0, |m| m + 1)];
    let mut next = 0;
    labels
        .iter()
        .map(|&l| {
            *map[l].get_or_insert_with(|| {
                next += 1;
                next - 1
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_bundles() -> (DMatrix<f64>, Vec<usize>) {
        let truth = vec![0, 1, 0, 0, 1, 1, 0, 1];
        let m = DMatrix::from_fn(8, 3, |i, j| {
            truth[i] as f64 * 5.0 + 0.01 * ((i + 2 * j) % 3) as f64
        });
        (m, truth)
    }

    #[test]
    fn k_one_is_single_cluster() {
        let (m, _) = two_bundles();
        assert_eq!(cluster_motions(&m, 1, 4, 7).unwrap(), vec![0; 8]);
    }

    #[test]
    fn recovers_bundle_membership() {
        let (m, truth) = two_bundles();
        for seed in 0..20 {
            assert_eq!(cluster_motions(&m, 2, 4, seed).unwrap(), truth);
        }
    }

    #[test]
    fn too_few_points() {
        let (m, _) = two_bundles();
        assert!(cluster_motions(&m, 9, 1, 0).is_err());
        assert!(cluster_motions(&m, 0, 1, 0).is_err());
    }

    #[test]
    fn permutation_is_label_matched() {
        let (m, _) = two_bundles();
        let perm = [5, 2, 7, 0, 3, 1, 6, 4];
        let pm = DMatrix::from_fn(8, 3, |i, j| m[(perm[i], j)]);
        let a = cluster_motions(&m, 2, 4, 11).unwrap();
        let b = cluster_motions(&pm, 2, 4, 11).unwrap();
        // same partition: i and j together in one iff together in the other
        for i in 0..8 {
            for j in 0..8 {
                assert_eq!(a[perm[i]] == a[perm[j]], b[i] == b[j]);
            }
        }
    }

    #[test]
    fn every_cluster_non_empty() {
        // all points identical forces the empty-cluster path
        let m = DMatrix::from_element(6, 2, 1.0);
        let labels = cluster_motions(&m, 3, 2, 3).unwrap();
        for c in 0..3 {
            assert!(labels.contains(&c));
        }
    }
}
