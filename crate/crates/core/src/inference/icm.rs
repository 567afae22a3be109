use crate::error::Result;
use crate::model::{Mapping, PotentialTable};

use super::{argmin, Method, SimilarityReport};

/// Which observed nodes interact during an ICM update.
#[derive(Debug, Clone, PartialEq)]
pub enum Neighborhood {
    /// Every other node.
    Dense,
    /// `adj[i][k]`: node `i` is a neighbor of node `k`.
    Sparse(Vec<Vec<bool>>),
}

impl Neighborhood {
    fn contains(&self, i: usize, k: usize) -> bool {
        match self {
            Neighborhood::Dense => i != k,
            Neighborhood::Sparse(adj) => i != k && adj[i][k],
        }
    }
}

/// Greedy start: each node takes its cheapest model node, ties to the smallest index.
pub fn greedy_init(t: &PotentialTable) -> Vec<usize> {
    (0..t.n())
        .map(|i| {
            let row: Vec<f64> = (0..t.m()).map(|a| t.unary(i, a)).collect();
            argmin(&row)
        })
        .collect()
}

/// The part of the energy that depends on node `k` when it takes value `a`,
/// restricted to its neighbors.
pub fn local_energy(t: &PotentialTable, nbr: &Neighborhood, x: &[usize], k: usize, a: usize) -> f64 {
    let mut e = t.unary(k, a);
    for (i, &xi) in x.iter().enumerate() {
        if nbr.contains(i, k) {
            e += t.pair(k, i, a, xi);
        }
    }
    e
}

/// Iterated conditional modes: sweep nodes in index order, moving each to the
/// model node minimizing its local energy (ties to the smallest index), until
/// a sweep changes nothing or `max_sweeps` is reached.
///
/// `energy_trace` holds the full energy of the start mapping followed by the
/// energy after each sweep. The reported similarity is `-U` of the final
/// mapping over all pairs, unnormalized.
pub fn icm_match(
    t: &PotentialTable,
    nbr: &Neighborhood,
    init: Option<&Mapping>,
    max_sweeps: usize,
) -> Result<SimilarityReport> {
    let mut x = match init {
        Some(m) => {
            t.check_mapping(&m.0)?;
            m.0.clone()
        }
        None => greedy_init(t),
    };
    if let Neighborhood::Sparse(adj) = nbr {
        if adj.len() != t.n() || adj.iter().any(|r| r.len() != t.n()) {
            return Err(crate::error::Error::DimensionMismatch(format!(
                "neighborhood is not {0} x {0}",
                t.n()
            )));
        }
    }

    let mut trace = vec![t.energy(&x)];
    let mut sweeps = 0;
    let mut converged = false;
    let mut local = vec![0.0; t.m()];
    while sweeps < max_sweeps.max(1) {
        sweeps += 1;
        let mut changed = false;
        for k in 0..t.n() {
            for (a, l) in local.iter_mut().enumerate() {
                *l = local_energy(t, nbr, &x, k, a);
            }
            let best = argmin(&local);
            if best != x[k] {
                x[k] = best;
                changed = true;
            }
        }
        trace.push(t.energy(&x));
        if !changed {
            converged = true;
            break;
        }
    }

    Ok(SimilarityReport {
        method: Method::Icm,
        log_similarity: -t.energy(&x),
        mapping: Mapping(x),
        marginals: None,
        iterations: sweeps,
        converged,
        energy_trace: trace,
        sigmas: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn greedy_start_on_diagonal_instance_is_fixed_point() {
        let t = PotentialTable::from_fn(3, 3, |i, a| if i == a { 0.0 } else { 1.0 }, |i, j, a, b| if i == a && j == b { 0.0 } else { 0.5 });
        let r = icm_match(&t, &Neighborhood::Dense, None, 50).unwrap();
        assert_eq!(r.mapping.0, vec![0, 1, 2]);
        assert_eq!(r.iterations, 1);
        assert_eq!(r.log_similarity, 0.0);
        assert!(r.converged);
    }

    #[test]
    fn pairwise_terms_pull_nodes_together() {
        // node 1 leans to 1 on its own; the coupling pulls it to 0
        let t = PotentialTable::from_fn(2, 2, |i, a| if i == 0 { [0.0, 2.0][a] } else { [0.5, 0.0][a] }, |_, _, a, b| if a == b { 0.0 } else { 1.0 });
        let r = icm_match(&t, &Neighborhood::Dense, Some(&Mapping(vec![0, 1])), 10).unwrap();
        assert_eq!(r.mapping.0, vec![0, 0]);
        assert_eq!(r.log_similarity, -0.5);
        let sparse = Neighborhood::Sparse(vec![vec![false; 2]; 2]);
        let r = icm_match(&t, &sparse, Some(&Mapping(vec![0, 1])), 10).unwrap();
        assert_eq!(r.mapping.0, vec![0, 1]);
        assert_eq!(r.log_similarity, -1.0);
    }

    #[test]
    fn bad_init_and_neighborhood() {
        let t = PotentialTable::from_fn(2, 2, |_, _| 0.0, |_, _, _, _| 0.0);
        assert!(icm_match(&t, &Neighborhood::Dense, Some(&Mapping(vec![0, 5])), 5).is_err());
        assert!(icm_match(&t, &Neighborhood::Sparse(vec![vec![true; 3]; 3]), None, 5).is_err());
    }
}
