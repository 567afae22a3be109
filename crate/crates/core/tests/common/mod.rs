#![allow(dead_code)]

use rand::Rng;
use trajmatch::model::{EventGraph, PotentialTable};
use trajmatch::motion::AtomicMotion;

/// A graph of `n` motions with random intervals in `[0, 100]`, one or two
/// segments of `atom_len` random points each.
pub fn random_graph<R: Rng>(rng: &mut R, n: usize, atom_len: usize) -> EventGraph {
    let motions = (0..n)
        .map(|c| {
            let s = rng.random_range(0..90);
            let e = rng.random_range(s + 1..=100);
            let count = rng.random_range(1..=2);
            let segments = (0..count)
                .map(|_| {
                    (0..atom_len)
                        .map(|_| [rng.random::<f64>(), rng.random::<f64>()])
                        .collect()
                })
                .collect();
            AtomicMotion::new(c, [s, e], vec![], segments).unwrap()
        })
        .collect();
    EventGraph::build(motions).unwrap()
}

/// Random non-negative energies; pairwise terms scaled by `coupling`.
pub fn random_table<R: Rng>(rng: &mut R, n: usize, m: usize, coupling: f64) -> PotentialTable {
    let unary: Vec<f64> = (0..n * m).map(|_| rng.random_range(0.0..3.0)).collect();
    let pair: Vec<f64> = (0..n * n * m * m).map(|_| coupling * rng.random_range(0.0..2.0)).collect();
    PotentialTable::from_fn(
        n,
        m,
        |i, a| unary[i * m + a],
        |i, j, a, b| pair[((i * n + j) * m + a) * m + b],
    )
}

/// Instances whose node terms decide the optimum: each node has one model
/// node cheaper than every alternative by more than the largest possible
/// pairwise total.
pub fn node_dominant_table<R: Rng>(rng: &mut R, n: usize, m: usize) -> (PotentialTable, Vec<usize>) {
    let best: Vec<usize> = (0..n).map(|_| rng.random_range(0..m)).collect();
    let pair: Vec<f64> = (0..n * n * m * m).map(|_| rng.random_range(0.0..1.0)).collect();
    let pair_total = (n * (n - 1) / 2) as f64;
    let unary: Vec<f64> = (0..n * m)
        .map(|k| {
            let (i, a) = (k / m, k % m);
            if a == best[i] {
                rng.random_range(0.0..0.5)
            } else {
                0.5 + 2.0 * pair_total + rng.random_range(0.0..1.0)
            }
        })
        .collect();
    let t = PotentialTable::from_fn(
        n,
        m,
        |i, a| unary[i * m + a],
        |i, j, a, b| pair[((i * n + j) * m + a) * m + b],
    );
    (t, best)
}

/// Fisher-Yates permutation of `0..n`.
pub fn permutation<R: Rng>(rng: &mut R, n: usize) -> Vec<usize> {
    let mut p: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        p.swap(i, rng.random_range(0..=i));
    }
    p
}
