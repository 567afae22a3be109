//! Laplacian eigenmaps over a symmetric kNN heat-kernel graph.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use super::EmbeddingConfig;
use crate::error::{Error, Result};

/// Edge weights are floored here so stitched components stay numerically connected.
const MIN_WEIGHT: f64 = 1e-12;

/// Embed each row of `features` into `cfg.dim` coordinates: the generalized
/// eigenvectors of `L y = λ D y` following the constant one, in ascending
/// eigenvalue order.
pub fn laplacian_embedding(features: &DMatrix<f64>, cfg: &EmbeddingConfig) -> Result<DMatrix<f64>> {
    cfg.validate()?;
    let n = features.nrows();
    if n < cfg.dim + 1 {
        return Err(Error::InvalidParameter(format!(
            "embedding into {} dimensions needs at least {} rows, got {n}",
            cfg.dim,
            cfg.dim + 1
        )));
    }

    let dist = pairwise_distances(features);
    let sigma = match cfg.heat_sigma {
        Some(s) if s > 0.0 => s,
        Some(s) => {
            return Err(Error::InvalidParameter(format!(
                "heat_sigma must be positive, got {s}"
            )))
        }
        None => median_distance(&dist),
    };

    let adjacency = knn_graph(&dist, cfg.knn);
    let weights = DMatrix::from_fn(n, n, |i, j| {
        if adjacency[(i, j)] {
            let d = dist[(i, j)];
            (-(d * d) / (sigma * sigma)).exp().max(MIN_WEIGHT)
        } else {
            0.0
        }
    });

    let degree: Vec<f64> = (0..n).map(|i| weights.row(i).sum()).collect();
    let inv_sqrt: Vec<f64> = degree.iter().map(|d| 1.0 / d.sqrt()).collect();

    // L_sym = I - D^-1/2 W D^-1/2; its null vector D^1/2 1 is shifted above the
    // spectrum (which lies in [0, 2]) so the remaining vectors sort first.
    let trivial = {
        let v = DVector::from_iterator(n, degree.iter().map(|d| d.sqrt()));
        let norm = v.norm();
        v / norm
    };
    let mut lsym = DMatrix::from_fn(n, n, |i, j| {
        let a = inv_sqrt[i] * weights[(i, j)] * inv_sqrt[j];
        if i == j {
            1.0 - a
        } else {
            -a
        }
    });
    lsym += &trivial * trivial.transpose() * 3.0;
    // exact symmetry for the eigensolver
    let lsym = (&lsym + lsym.transpose()) * 0.5;

    let eig = SymmetricEigen::new(lsym);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        eig.eigenvalues[a]
            .total_cmp(&eig.eigenvalues[b])
            .then(a.cmp(&b))
    });

    let mut out = DMatrix::zeros(n, cfg.dim);
    for (c, &idx) in order.iter().take(cfg.dim).enumerate() {
        let u = eig.eigenvectors.column(idx);
        let mut y: Vec<f64> = (0..n).map(|i| u[i] * inv_sqrt[i]).collect();
        orient(&mut y);
        for (i, v) in y.into_iter().enumerate() {
            out[(i, c)] = v;
        }
    }
    Ok(out)
}

/// Fix the eigenvector sign: the entry of largest magnitude is positive.
fn orient(v: &mut [f64]) {
    let mut best = 0;
    for i in 1..v.len() {
        if v[i].abs() > v[best].abs() + 1e-12 {
            best = i;
        }
    }
    if v[best] < 0.0 {
        v.iter_mut().for_each(|x| *x = -*x);
    }
}

pub(crate) fn pairwise_distances(features: &DMatrix<f64>) -> DMatrix<f64> {
    let n = features.nrows();
    let mut d = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in i + 1..n {
            let v = (features.row(i) - features.row(j)).norm();
            d[(i, j)] = v;
            d[(j, i)] = v;
        }
    }
    d
}

fn median_distance(dist: &DMatrix<f64>) -> f64 {
    let n = dist.nrows();
    let mut all: Vec<f64> = (0..n)
        .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
        .map(|(i, j)| dist[(i, j)])
        .collect();
    all.sort_by(f64::total_cmp);
    let median = if all.is_empty() {
        0.0
    } else if all.len() % 2 == 1 {
        all[all.len() / 2]
    } else {
        0.5 * (all[all.len() / 2 - 1] + all[all.len() / 2])
    };
    if median > 0.0 {
        return median;
    }
    // more than half the rows coincide
    let positive: Vec<f64> = all.into_iter().filter(|&d| d > 0.0).collect();
    if positive.is_empty() {
        1.0
    } else {
        positive.iter().sum::<f64>() / positive.len() as f64
    }
}

/// Symmetric kNN adjacency, with disconnected components joined through their
/// nearest inter-component pair until one component remains.
fn knn_graph(dist: &DMatrix<f64>, knn: usize) -> DMatrix<bool> {
    let n = dist.nrows();
    let mut adj = DMatrix::from_element(n, n, false);
    for i in 0..n {
        let mut others: Vec<usize> = (0..n).filter(|&j| j != i).collect();
        others.sort_by(|&a, &b| dist[(i, a)].total_cmp(&dist[(i, b)]).then(a.cmp(&b)));
        for &j in others.iter().take(knn) {
            adj[(i, j)] = true;
            adj[(j, i)] = true;
        }
    }

    let mut comp = UnionFind::new(n);
    for i in 0..n {
        for j in i + 1..n {
            if adj[(i, j)] {
                comp.union(i, j);
            }
        }
    }
    while comp.count > 1 {
        let mut best: Option<(f64, usize, usize)> = None;
        for i in 0..n {
            for j in i + 1..n {
                if comp.find(i) != comp.find(j) && best.is_none_or(|(d, _, _)| dist[(i, j)] < d) {
                    best = Some((dist[(i, j)], i, j));
                }
            }
        }
        let (_, i, j) = best.expect("more than one component implies a cross pair");
        adj[(i, j)] = true;
        adj[(j, i)] = true;
        comp.union(i, j);
    }
    adj
}

struct UnionFind {
    parent: Vec<usize>,
    count: usize,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n).collect(),
            count: n,
        }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.parent[ra.max(rb)] = ra.min(rb);
            self.count -= 1;
        }
    }
}
