//! Semantic similarity `p(Z | Y)` between an observation graph and a model
//! graph: exact marginalization over all mappings, a mean-field lower bound,
//! and ICM optimization of a single mapping.
//!
//! Normalization constants are never computed. All three similarities are
//! unnormalized log values and only their ordering across models matters.

mod exact;
mod icm;
mod meanfield;

use serde::{Deserialize, Serialize};

pub use exact::{exact_log_similarity, posterior_optimality, posterior_table, DEFAULT_BUDGET};
pub use icm::{greedy_init, icm_match, local_energy, Neighborhood};
pub use meanfield::{lower_bound, meanfield_similarity};

use crate::error::Result;
use crate::model::{estimate_sigmas, EventGraph, Mapping, PotentialTable, SigmaConfig};
use crate::relations::neighborhood;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Exact,
    Meanfield,
    Icm,
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Method::Exact => "exact",
            Method::Meanfield => "meanfield",
            Method::Icm => "icm",
        })
    }
}

/// Row-stochastic `N x M` matrix, `q[i][a] = q(x_i = a)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Marginals {
    pub q: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimilarityReport {
    pub method: Method,
    /// exact: `log sum_X exp(-U)`; meanfield: the bound `LS(q)`; icm: `-U(X*)`.
    pub log_similarity: f64,
    /// Best mapping found, 0-based model node per observed node.
    pub mapping: Mapping,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub marginals: Option<Marginals>,
    pub iterations: usize,
    pub converged: bool,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub energy_trace: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sigmas: Option<SigmaConfig>,
}

/// Index of the smallest value; ties go to the smallest index.
pub(crate) fn argmin(v: &[f64]) -> usize {
    let mut best = 0;
    for (i, x) in v.iter().enumerate().skip(1) {
        if *x < v[best] {
            best = i;
        }
    }
    best
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SigmaMode {
    /// Estimate from the observation for each (observation, model) pair.
    Estimate,
    Fixed(SigmaConfig),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NeighborhoodMode {
    Dense,
    /// Neighbors are within this fraction of the observation's frame span
    /// by the neighborhood measure.
    Threshold(f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MatchConfig {
    pub method: Method,
    pub sigmas: SigmaMode,
    pub exact_budget: u64,
    pub meanfield_max_iters: usize,
    pub meanfield_tol: f64,
    pub icm_max_sweeps: usize,
    pub neighborhood: NeighborhoodMode,
}

impl Default for MatchConfig {
    fn default() -> Self {
        MatchConfig {
            method: Method::Icm,
            sigmas: SigmaMode::Estimate,
            exact_budget: DEFAULT_BUDGET,
            meanfield_max_iters: 200,
            meanfield_tol: 1e-8,
            icm_max_sweeps: 50,
            neighborhood: NeighborhoodMode::Threshold(0.25),
        }
    }
}

impl MatchConfig {
    pub fn resolve_sigmas(&self, z: &EventGraph, y: &EventGraph) -> Result<SigmaConfig> {
        match self.sigmas {
            SigmaMode::Estimate => estimate_sigmas(z, y),
            SigmaMode::Fixed(s) => {
                s.validate()?;
                Ok(s)
            }
        }
    }

    /// ICM neighborhood over the observation's nodes.
    pub fn neighborhood_for(&self, z: &EventGraph) -> Neighborhood {
        match self.neighborhood {
            NeighborhoodMode::Dense => Neighborhood::Dense,
            NeighborhoodMode::Threshold(f) => {
                Neighborhood::Sparse(neighborhood(&z.intervals(), f * z.frame_span() as f64))
            }
        }
    }
}

/// Run the configured method on a prepared energy table.
pub fn run_method(t: &PotentialTable, z: &EventGraph, cfg: &MatchConfig) -> Result<SimilarityReport> {
    match cfg.method {
        Method::Exact => exact_log_similarity(t, cfg.exact_budget),
        Method::Meanfield => Ok(meanfield_similarity(t, cfg.meanfield_max_iters, cfg.meanfield_tol)),
        Method::Icm => icm_match(t, &cfg.neighborhood_for(z), None, cfg.icm_max_sweeps),
    }
}

/// Similarity of observation `z` to model `y`.
pub fn match_graphs(z: &EventGraph, y: &EventGraph, cfg: &MatchConfig) -> Result<SimilarityReport> {
    let sigmas = cfg.resolve_sigmas(z, y)?;
    match_with_sigmas(z, y, &sigmas, cfg)
}

pub fn match_with_sigmas(
    z: &EventGraph,
    y: &EventGraph,
    sigmas: &SigmaConfig,
    cfg: &MatchConfig,
) -> Result<SimilarityReport> {
    let t = PotentialTable::from_graphs(z, y, sigmas)?;
    let mut report = run_method(&t, z, cfg)?;
    report.sigmas = Some(*sigmas);
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn argmin_prefers_first() {
        assert_eq!(argmin(&[2.0, 1.0, 1.0]), 1);
        assert_eq!(argmin(&[0.0]), 0);
    }

    #[test]
    fn report_json_shape() {
        let r = SimilarityReport {
            method: Method::Icm,
            log_similarity: -1.5,
            mapping: Mapping(vec![0, 2]),
            marginals: None,
            iterations: 2,
            converged: true,
            energy_trace: vec![],
            sigmas: None,
        };
        let v: serde_json::Value = serde_json::to_value(&r).unwrap();
        assert_eq!(v["method"], "icm");
        assert_eq!(v["mapping"], serde_json::json!([0, 2]));
        assert!(v.get("marginals").is_none());
    }
}
