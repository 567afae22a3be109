use crate::model::{Mapping, PotentialTable};

use super::{argmin, Marginals, Method, SimilarityReport};

/// Fully factorized variational approximation `q(X) = prod_i q(x_i)`.
///
/// Starting from uniform marginals, nodes are updated in index order with
///
/// ```text
/// q(x_k = a) ∝ exp(-V1(k, a) - sum_{i != k} sum_b q(x_i = b) V2(i, k, b, a))
/// ```
///
/// which zeroes the derivative of the bound for a pairwise energy. Sweeps stop
/// once no marginal moves by `tol` or more, or after `max_iters` sweeps. The
/// reported similarity is the Jensen lower bound
/// `LS(q) = -E_q[U] + sum_i H(q_i)`.
pub fn meanfield_similarity(t: &PotentialTable, max_iters: usize, tol: f64) -> SimilarityReport {
    let (n, m) = (t.n(), t.m());
    let mut q = vec![vec![1.0 / m as f64; m]; n];
    let mut field = vec![0.0; m];
    let mut iterations = 0;
    let mut converged = false;

    while iterations < max_iters.max(1) {
        iterations += 1;
        let mut max_change = 0.0f64;
        for k in 0..n {
            for (a, f) in field.iter_mut().enumerate() {
                *f = t.unary(k, a);
            }
            for (i, qi) in q.iter().enumerate() {
                if i == k {
                    continue;
                }
                let block = t.pair_block(k, i);
                for (a, f) in field.iter_mut().enumerate() {
                    let row = &block[a * m..(a + 1) * m];
                    *f += row.iter().zip(qi).map(|(v, p)| v * p).sum::<f64>();
                }
            }
            let lo = field.iter().cloned().fold(f64::INFINITY, f64::min);
            let weights: Vec<f64> = field.iter().map(|f| (lo - f).exp()).collect();
            let norm: f64 = weights.iter().sum();
            for (qa, w) in q[k].iter_mut().zip(&weights) {
                let next = w / norm;
                max_change = max_change.max((next - *qa).abs());
                *qa = next;
            }
        }
        if max_change < tol {
            converged = true;
            break;
        }
    }

    let mapping = q
        .iter()
        .map(|row| {
            let neg: Vec<f64> = row.iter().map(|p| -p).collect();
            argmin(&neg)
        })
        .collect();
    SimilarityReport {
        method: Method::Meanfield,
        log_similarity: lower_bound(t, &q),
        mapping: Mapping(mapping),
        marginals: Some(Marginals { q }),
        iterations,
        converged,
        energy_trace: Vec::new(),
        sigmas: None,
    }
}

/// `LS(q) = -sum_i sum_a q_i(a) V1(i, a) - sum_{i<j} sum_{a,b} q_i(a) q_j(b) V2(i, j, a, b)
///          - sum_i sum_a q_i(a) log q_i(a)`.
pub fn lower_bound(t: &PotentialTable, q: &[Vec<f64>]) -> f64 {
    let (n, m) = (t.n(), t.m());
    let mut ls = 0.0;
    for (i, qi) in q.iter().enumerate() {
        for (a, &p) in qi.iter().enumerate() {
            if p > 0.0 {
                ls -= p * (t.unary(i, a) + p.ln());
            }
        }
    }
    for i in 0..n {
        for j in i + 1..n {
            let block = t.pair_block(i, j);
            let mut e = 0.0;
            for a in 0..m {
                let row = &block[a * m..(a + 1) * m];
                e += q[i][a] * row.iter().zip(&q[j]).map(|(v, p)| v * p).sum::<f64>();
            }
            ls -= e;
        }
    }
    ls
}
