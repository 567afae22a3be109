use crate::error::{Error, Result};
use crate::model::{Mapping, PotentialTable};

use super::{Marginals, Method, SimilarityReport};

/// Default cap on the number of enumerated mappings.
pub const DEFAULT_BUDGET: u64 = 10_000_000;

fn configurations(t: &PotentialTable, budget: u64) -> Result<u64> {
    let count = (t.m() as f64).powi(t.n() as i32);
    if count > budget as f64 {
        return Err(Error::BudgetExceeded {
            configurations: count,
            budget,
        });
    }
    Ok(count as u64)
}

/// Visit every mapping in lexicographic order with its joint energy. Partial
/// energies are accumulated node by node.
fn for_each_mapping(t: &PotentialTable, mut visit: impl FnMut(&[usize], f64)) {
    let (n, m) = (t.n(), t.m());
    let mut x = vec![0usize; n];
    // partial[k] = energy of nodes 0..k
    let mut partial = vec![0.0f64; n + 1];
    let mut depth = 0usize;
    loop {
        // extend from `depth` with the current digits
        for k in depth..n {
            let a = x[k];
            let mut e = partial[k] + t.unary(k, a);
            for i in 0..k {
                e += t.pair(i, k, x[i], a);
            }
            partial[k + 1] = e;
        }
        visit(&x, partial[n]);
        // increment the mixed-radix counter
        let mut k = n;
        loop {
            if k == 0 {
                return;
            }
            k -= 1;
            x[k] += 1;
            if x[k] < m {
                break;
            }
            x[k] = 0;
        }
        depth = k;
    }
}

/// Neumaier-compensated sum.
#[derive(Default)]
struct Sum {
    sum: f64,
    comp: f64,
}

impl Sum {
    fn add(&mut self, v: f64) {
        let t = self.sum + v;
        if self.sum.abs() >= v.abs() {
            self.comp += (self.sum - t) + v;
        } else {
            self.comp += (v - t) + self.sum;
        }
        self.sum = t;
    }

    fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

/// `(log sum_x exp(-U(x)), argmin_x U(x), min U)`.
fn log_partition(t: &PotentialTable, budget: u64) -> Result<(f64, Vec<usize>, f64)> {
    configurations(t, budget)?;
    let (u_min, map) = minimum(t);
    let mut acc = Sum::default();
    for_each_mapping(t, |_, u| acc.add((u_min - u).exp()));
    Ok((acc.value().ln() - u_min, map, u_min))
}

fn minimum(t: &PotentialTable) -> (f64, Vec<usize>) {
    let mut best = (f64::INFINITY, vec![0; t.n()]);
    for_each_mapping(t, |x, u| {
        if u < best.0 {
            best = (u, x.to_vec());
        }
    });
    best
}

/// Exact unnormalized log similarity `log sum_X exp(-U(Z, X | Y))` by
/// enumerating all `M^N` mappings, with the MAP mapping and the posterior
/// marginals `p(x_i = a | Z, Y)`.
pub fn exact_log_similarity(t: &PotentialTable, budget: u64) -> Result<SimilarityReport> {
    configurations(t, budget)?;
    let (n, m) = (t.n(), t.m());
    let (u_min, map) = minimum(t);
    let mut acc = Sum::default();
    let mut cells: Vec<Sum> = (0..n * m).map(|_| Sum::default()).collect();
    for_each_mapping(t, |x, u| {
        let w = (u_min - u).exp();
        acc.add(w);
        for (i, &a) in x.iter().enumerate() {
            cells[i * m + a].add(w);
        }
    });
    let total = acc.value();
    let q = (0..n)
        .map(|i| (0..m).map(|a| cells[i * m + a].value() / total).collect())
        .collect();
    Ok(SimilarityReport {
        method: Method::Exact,
        log_similarity: total.ln() - u_min,
        mapping: Mapping(map),
        marginals: Some(Marginals { q }),
        iterations: 1,
        converged: true,
        energy_trace: Vec::new(),
        sigmas: None,
    })
}

/// Posterior probability `exp(-U(x)) / sum_x' exp(-U(x'))` of one mapping.
pub fn posterior_optimality(t: &PotentialTable, x: &Mapping, budget: u64) -> Result<f64> {
    t.check_mapping(&x.0)?;
    let (log_z, _, _) = log_partition(t, budget)?;
    Ok((-t.energy(&x.0) - log_z).exp())
}

/// Every mapping with its posterior probability, in lexicographic order.
pub fn posterior_table(t: &PotentialTable, budget: u64) -> Result<Vec<(Vec<usize>, f64)>> {
    let (log_z, _, _) = log_partition(t, budget)?;
    let mut out = Vec::new();
    for_each_mapping(t, |x, u| out.push((x.to_vec(), (-u - log_z).exp())));
    Ok(out)
}
