//! Event graphs and the Gaussian node/pairwise potentials of the matching MRF.
//!
//! Observation graph `Z` has `N` nodes, model graph `Y` has `M`; a mapping
//! sends each observed node to a model node (many-to-one allowed). The joint
//! energy of a mapping `x` is
//!
//! ```text
//! U(x) = sum_i V1(z_i | x_i) + sum_{i<j} [ V2(z^s_ij | x_i, x_j) + V2(z^t_ij | x_i, x_j) ]
//! ```
//!
//! plus optional prior tables (zero by default).

mod assignment;
mod graph;

use serde::{Deserialize, Serialize};

pub use assignment::min_cost_assignment;
pub use graph::{EdgeDump, EventGraph, GraphDump, NodeDump};

use crate::error::{Error, Result};
use crate::motion::AtomicMotion;
use crate::relations::IntervalRelation;

/// Lower bound for estimated noise deviations.
pub const SIGMA_FLOOR: f64 = 1e-3;

/// Noise deviations for node, temporal-edge and spatial-edge observations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SigmaConfig {
    pub node: f64,
    pub temporal: f64,
    pub spatial: f64,
}

impl SigmaConfig {
    pub fn uniform(sigma: f64) -> Self {
        SigmaConfig {
            node: sigma,
            temporal: sigma,
            spatial: sigma,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if [self.node, self.temporal, self.spatial]
            .iter()
            .all(|s| s.is_finite() && *s > 0.0)
        {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!(
                "sigmas must be positive and finite, got {self:?}"
            )))
        }
    }

    pub fn scaled(&self, factor: f64) -> Self {
        SigmaConfig {
            node: self.node * factor,
            temporal: self.temporal * factor,
            spatial: self.spatial * factor,
        }
    }
}

/// Squared distance between two equal-length sample sequences.
fn segment_cost(a: &[[f64; 2]], b: &[[f64; 2]]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(p, q)| (p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2))
        .sum()
}

fn check_segment_lengths(z: &AtomicMotion, y: &AtomicMotion) -> Result<()> {
    if z.segment_len() != y.segment_len() {
        return Err(Error::DimensionMismatch(format!(
            "segments of {} and {} samples",
            z.segment_len(),
            y.segment_len()
        )));
    }
    Ok(())
}

/// Raw residual of the best segment correspondence: `(sum of squared
/// residuals, correspondence)` with pairs as `(z segment, y segment)`.
fn correspondence(z: &AtomicMotion, y: &AtomicMotion) -> (f64, Vec<(usize, usize)>) {
    let (p, q) = (z.segments.len(), y.segments.len());
    let cost: Vec<f64> = z
        .segments
        .iter()
        .flat_map(|zs| y.segments.iter().map(move |ys| segment_cost(zs, ys)))
        .collect();
    min_cost_assignment(&cost, p, q)
}

/// Node energy `sum_{(p,q) in S} |z^(p) - y^(q)|^2 / (2 sigma^2)` where `S`
/// is the minimum-cost one-to-one correspondence between the segments of the
/// two motions. Unmatched segments cost nothing.
pub fn node_potential(
    z: &AtomicMotion,
    y: &AtomicMotion,
    sigma: f64,
) -> Result<(f64, Vec<(usize, usize)>)> {
    check_segment_lengths(z, y)?;
    let (raw, pairs) = correspondence(z, y);
    Ok((raw / (2.0 * sigma * sigma), pairs))
}

/// Gaussian pairwise energy `|z - y|^2 / (2 sigma^2)`.
pub fn pairwise_potential(z: &[f64], y: &[f64], sigma: f64) -> f64 {
    let sq: f64 = z.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum();
    sq / (2.0 * sigma * sigma)
}

/// Temporal pairwise energy on the compact measures, plus `mismatch_penalty`
/// when one pair is simultaneous and the other sequential.
pub fn temporal_potential(
    z: &IntervalRelation,
    y: &IntervalRelation,
    sigma: f64,
    mismatch_penalty: f64,
) -> f64 {
    let base = pairwise_potential(&[z.measure()], &[y.measure()], sigma);
    if z.compact == y.compact {
        base
    } else {
        base + mismatch_penalty
    }
}

/// Spatial pairwise energy on `(distance, orientation)`.
pub fn spatial_potential(z: [f64; 2], y: [f64; 2], sigma: f64) -> f64 {
    pairwise_potential(&z, &y, sigma)
}

/// Prior energies `V1(x_i | Y)` (length `M`) and `V2(x_i, x_j | Y)` (`M x M`,
/// row-major).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Prior {
    pub node: Vec<f64>,
    pub pair: Vec<f64>,
}

/// Dense node and pairwise energy tables for one (observation, model) pair.
#[derive(Debug, Clone, PartialEq)]
pub struct PotentialTable {
    n: usize,
    m: usize,
    unary: Vec<f64>,
    // (i, j, a, b) at ((i * n + j) * m + a) * m + b, mirrored, zero on i == j
    pair: Vec<f64>,
    mismatch_penalty: f64,
}

impl PotentialTable {
    /// Build from explicit energies; `pair(i, j, a, b)` is queried for `i < j` only.
    pub fn from_fn(
        n: usize,
        m: usize,
        unary: impl Fn(usize, usize) -> f64,
        pair: impl Fn(usize, usize, usize, usize) -> f64,
    ) -> Self {
        let mut t = PotentialTable {
            n,
            m,
            unary: (0..n * m).map(|k| unary(k / m, k % m)).collect(),
            pair: vec![0.0; n * n * m * m],
            mismatch_penalty: 0.0,
        };
        for i in 0..n {
            for j in i + 1..n {
                for a in 0..m {
                    for b in 0..m {
                        t.set_pair(i, j, a, b, pair(i, j, a, b));
                    }
                }
            }
        }
        t
    }

    /// Energies of observation `z` against model `y`.
    ///
    /// The compact-type mismatch penalty is twice the largest same-type
    /// temporal energy in this instance.
    pub fn from_graphs(z: &EventGraph, y: &EventGraph, sigmas: &SigmaConfig) -> Result<Self> {
        sigmas.validate()?;
        if z.is_empty() || y.is_empty() {
            return Err(Error::DimensionMismatch("matching needs non-empty graphs".into()));
        }
        let (n, m) = (z.len(), y.len());
        let mut unary = Vec::with_capacity(n * m);
        for zi in z.nodes() {
            for ya in y.nodes() {
                unary.push(node_potential(zi, ya, sigmas.node)?.0);
            }
        }

        let mut max_same = 0.0f64;
        let mut max_any = 0.0f64;
        for i in 0..n {
            for j in i + 1..n {
                let zt = z.temporal(i, j);
                for a in 0..m {
                    for b in 0..m {
                        let yt = y.temporal(a, b);
                        let v = temporal_potential(zt, yt, sigmas.temporal, 0.0);
                        max_any = max_any.max(v);
                        if zt.compact == yt.compact {
                            max_same = max_same.max(v);
                        }
                    }
                }
            }
        }
        let penalty = 2.0 * if max_same > 0.0 { max_same } else { max_any };

        let mut t = PotentialTable {
            n,
            m,
            unary,
            pair: vec![0.0; n * n * m * m],
            mismatch_penalty: penalty,
        };
        for i in 0..n {
            for j in i + 1..n {
                let zt = z.temporal(i, j);
                let zs = z.spatial(i, j);
                for a in 0..m {
                    for b in 0..m {
                        let v = temporal_potential(zt, y.temporal(a, b), sigmas.temporal, penalty)
                            + spatial_potential(zs, y.spatial(a, b), sigmas.spatial);
                        t.set_pair(i, j, a, b, v);
                    }
                }
            }
        }
        Ok(t)
    }

    /// Add prior energies to every node and pair term.
    pub fn with_prior(mut self, prior: &Prior) -> Result<Self> {
        let m = self.m;
        if prior.node.len() != m || prior.pair.len() != m * m {
            return Err(Error::DimensionMismatch(format!(
                "prior tables for {} / {} model nodes, model has {m}",
                prior.node.len(),
                prior.pair.len()
            )));
        }
        for i in 0..self.n {
            for a in 0..m {
                self.unary[i * m + a] += prior.node[a];
            }
            for j in i + 1..self.n {
                for a in 0..m {
                    for b in 0..m {
                        let v = self.pair(i, j, a, b) + prior.pair[a * m + b];
                        self.set_pair(i, j, a, b, v);
                    }
                }
            }
        }
        Ok(self)
    }

    fn set_pair(&mut self, i: usize, j: usize, a: usize, b: usize, v: f64) {
        let (n, m) = (self.n, self.m);
        self.pair[((i * n + j) * m + a) * m + b] = v;
        self.pair[((j * n + i) * m + b) * m + a] = v;
    }

    /// Observed nodes.
    pub fn n(&self) -> usize {
        self.n
    }

    /// Model nodes.
    pub fn m(&self) -> usize {
        self.m
    }

    pub fn mismatch_penalty(&self) -> f64 {
        self.mismatch_penalty
    }

    #[inline]
    pub fn unary(&self, i: usize, a: usize) -> f64 {
        self.unary[i * self.m + a]
    }

    /// Pairwise energy of observed nodes `i`, `j` mapped to `a`, `b`. Symmetric
    /// under swapping `(i, a)` with `(j, b)`; zero when `i == j`.
    #[inline]
    pub fn pair(&self, i: usize, j: usize, a: usize, b: usize) -> f64 {
        self.pair[((i * self.n + j) * self.m + a) * self.m + b]
    }

    /// The `M x M` block for observed pair `(i, j)`, indexed `[a * M + b]`.
    #[inline]
    pub(crate) fn pair_block(&self, i: usize, j: usize) -> &[f64] {
        let mm = self.m * self.m;
        let start = (i * self.n + j) * mm;
        &self.pair[start..start + mm]
    }

    pub fn check_mapping(&self, x: &[usize]) -> Result<()> {
        if x.len() != self.n {
            return Err(Error::DimensionMismatch(format!(
                "mapping has {} entries for {} observed nodes",
                x.len(),
                self.n
            )));
        }
        if let Some(&bad) = x.iter().find(|&&a| a >= self.m) {
            return Err(Error::DimensionMismatch(format!(
                "mapping target {bad} out of range for {} model nodes",
                self.m
            )));
        }
        Ok(())
    }

    /// Joint energy `U(x)`; `x` must be a valid mapping.
    pub fn energy(&self, x: &[usize]) -> f64 {
        let mut u = 0.0;
        for i in 0..self.n {
            u += self.unary(i, x[i]);
        }
        for i in 0..self.n {
            for j in i + 1..self.n {
                u += self.pair(i, j, x[i], x[j]);
            }
        }
        u
    }
}

/// A mapping from observed nodes to model nodes (0-based).
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Mapping(pub Vec<usize>);

/// `U(Z, X | Y)` under the given sigmas and a uniform prior.
pub fn joint_energy(z: &EventGraph, x: &Mapping, y: &EventGraph, sigmas: &SigmaConfig) -> Result<f64> {
    let t = PotentialTable::from_graphs(z, y, sigmas)?;
    t.check_mapping(&x.0)?;
    Ok(t.energy(&x.0))
}

/// Estimate noise deviations from the observation: each observed node is
/// paired with the model node of least residual, and every deviation is the
/// RMS of the resulting per-coordinate (node) or per-component (edge)
/// residuals, floored at [`SIGMA_FLOOR`].
pub fn estimate_sigmas(z: &EventGraph, y: &EventGraph) -> Result<SigmaConfig> {
    if z.is_empty() || y.is_empty() {
        return Err(Error::DimensionMismatch("sigma estimation needs non-empty graphs".into()));
    }
    let mut nearest = Vec::with_capacity(z.len());
    let mut node_sq = 0.0;
    let mut node_count = 0usize;
    for zi in z.nodes() {
        let mut best: Option<(f64, usize, usize)> = None;
        for (a, ya) in y.nodes().iter().enumerate() {
            check_segment_lengths(zi, ya)?;
            let (raw, pairs) = correspondence(zi, ya);
            if best.is_none_or(|(b, _, _)| raw < b) {
                best = Some((raw, a, pairs.len() * zi.segment_len()));
            }
        }
        let (raw, a, samples) = best.unwrap();
        nearest.push(a);
        node_sq += raw;
        node_count += 2 * samples;
    }

    let (mut t_sq, mut s_sq, mut pairs) = (0.0, 0.0, 0usize);
    for i in 0..z.len() {
        for j in i + 1..z.len() {
            let (a, b) = (nearest[i], nearest[j]);
            t_sq += (z.temporal(i, j).measure() - y.temporal(a, b).measure()).powi(2);
            let (zs, ys) = (z.spatial(i, j), y.spatial(a, b));
            s_sq += (zs[0] - ys[0]).powi(2) + (zs[1] - ys[1]).powi(2);
            pairs += 1;
        }
    }

    let rms = |sq: f64, count: usize| {
        if count == 0 {
            SIGMA_FLOOR
        } else {
            (sq / count as f64).sqrt().max(SIGMA_FLOOR)
        }
    };
    Ok(SigmaConfig {
        node: rms(node_sq, node_count),
        temporal: rms(t_sq, pairs),
        spatial: rms(s_sq, 2 * pairs),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::relations::classify_intervals;

    fn motion(interval: [i64; 2], segs: Vec<Vec<[f64; 2]>>) -> AtomicMotion {
        AtomicMotion::new(0, interval, vec![], segs).unwrap()
    }

    fn ramp(x0: f64, y0: f64) -> Vec<[f64; 2]> {
        (0..16).map(|k| [x0 + 0.01 * k as f64, y0]).collect()
    }

    #[test]
    fn node_potential_identity_and_offset() {
        let a = motion([0, 10], vec![ramp(0.1, 0.1), ramp(0.5, 0.2)]);
        assert_eq!(node_potential(&a, &a, 1.0).unwrap().0, 0.0);

        let z = motion([0, 10], vec![ramp(1.0, 0.0)]);
        let y = motion([0, 10], vec![ramp(0.0, 0.0)]);
        let (v, s) = node_potential(&z, &y, 1.0).unwrap();
        assert!((v - 8.0).abs() < 1e-12);
        assert_eq!(s, vec![(0, 0)]);
    }

    #[test]
    fn node_potential_picks_best_correspondence() {
        // z = [A, B]; y = [seg1, seg2] with seg1 == A and B offset from seg2 by 0.1 in y
        let a = ramp(0.0, 0.0);
        let b = ramp(0.0, 0.6);
        let z = motion([0, 10], vec![a.clone(), b.clone()]);
        let seg2: Vec<[f64; 2]> = b.iter().map(|p| [p[0], p[1] + 0.1]).collect();
        let y = motion([0, 10], vec![a.clone(), seg2.clone()]);
        let (v, s) = node_potential(&z, &y, 1.0).unwrap();
        let direct = segment_cost(&b, &seg2) / 2.0;
        let crossed = (segment_cost(&a, &seg2) + segment_cost(&b, &a)) / 2.0;
        assert!(direct < crossed);
        assert!((v - direct).abs() < 1e-12);
        assert_eq!(s, vec![(0, 0), (1, 1)]);
    }

    #[test]
    fn node_potential_symmetric_for_equal_counts() {
        let z = motion([0, 10], vec![ramp(0.0, 0.0), ramp(0.3, 0.5), ramp(0.2, 0.9)]);
        let y = motion([0, 10], vec![ramp(0.1, 0.4), ramp(0.0, 0.1), ramp(0.7, 0.7)]);
        let ab = node_potential(&z, &y, 0.5).unwrap().0;
        let ba = node_potential(&y, &z, 0.5).unwrap().0;
        assert!((ab - ba).abs() < 1e-12);
    }

    #[test]
    fn pairwise_examples() {
        assert_eq!(pairwise_potential(&[3.0], &[3.0], 1.0), 0.0);
        assert_eq!(pairwise_potential(&[2.0], &[5.0], 1.0), 4.5);
        assert_eq!(spatial_potential([0.5, 1.0], [0.5, 0.0], 1.0), 0.5);
        let sim = classify_intervals([0, 10], [0, 10]).unwrap();
        let seq = classify_intervals([0, 10], [12, 20]).unwrap();
        assert_eq!(temporal_potential(&sim, &seq, 1.0, 7.0), 2.0 + 7.0);
        assert_eq!(temporal_potential(&seq, &seq, 1.0, 7.0), 0.0);
    }

    #[test]
    fn graph_shape() {
        let g = EventGraph::build(vec![motion([0, 10], vec![ramp(0.0, 0.0)])]).unwrap();
        assert_eq!(g.edge_count(), 0);
        let g = EventGraph::build(vec![
            motion([0, 10], vec![ramp(0.0, 0.0)]),
            motion([0, 10], vec![ramp(0.2, 0.0)]),
            motion([12, 30], vec![ramp(0.0, 0.5)]),
        ])
        .unwrap();
        assert_eq!(g.edge_count(), 3);
        assert_eq!(g.dump(None).edges.len(), 3);
        let t = g.temporal(0, 1);
        assert_eq!((t.measure(), t.compact), (0.0, crate::relations::Compact::Simultaneous));
        let json = serde_json::to_string(&g).unwrap();
        let back: EventGraph = serde_json::from_str(&json).unwrap();
        assert_eq!(back, g);
    }

    #[test]
    fn joint_energy_examples() {
        let y = EventGraph::build(vec![
            motion([0, 10], vec![ramp(0.0, 0.0)]),
            motion([10, 30], vec![ramp(0.0, 0.5)]),
        ])
        .unwrap();
        let sig = SigmaConfig::uniform(1.0);
        assert_eq!(joint_energy(&y, &Mapping(vec![0, 1]), &y, &sig).unwrap(), 0.0);
        assert!(joint_energy(&y, &Mapping(vec![0]), &y, &sig).is_err());
        assert!(joint_energy(&y, &Mapping(vec![0, 2]), &y, &sig).is_err());

        // N = 1: node term only
        let z1 = EventGraph::build(vec![motion([0, 10], vec![ramp(1.0, 0.0)])]).unwrap();
        assert!((joint_energy(&z1, &Mapping(vec![0]), &y, &sig).unwrap() - 8.0).abs() < 1e-12);

        // N = 2 by hand: shift both nodes by 0.1 in x and stretch the second interval
        let z = EventGraph::build(vec![
            motion([0, 10], vec![ramp(0.1, 0.0)]),
            motion([10, 33], vec![ramp(0.1, 0.5)]),
        ])
        .unwrap();
        let node = 16.0 * 0.01 / 2.0;
        // temporal: both pairs sequential (meets), measure 0 vs 0
        // spatial: distance equal (same shift), orientation changes with the shift
        let cz = [z.nodes()[0].centroid, z.nodes()[1].centroid];
        let cy = [y.nodes()[0].centroid, y.nodes()[1].centroid];
        let cos = |a: [f64; 2], b: [f64; 2]| {
            (a[0] * b[0] + a[1] * b[1]) / (a[0].hypot(a[1]) * b[0].hypot(b[1]))
        };
        let dz = (cz[0][0] - cz[1][0]).hypot(cz[0][1] - cz[1][1]);
        let dy = (cy[0][0] - cy[1][0]).hypot(cy[0][1] - cy[1][1]);
        let edge = ((dz - dy).powi(2) + (cos(cz[0], cz[1]) - cos(cy[0], cy[1])).powi(2)) / 2.0;
        let u = joint_energy(&z, &Mapping(vec![0, 1]), &y, &sig).unwrap();
        assert!((u - (2.0 * node + edge)).abs() < 1e-12, "{u}");
    }

    #[test]
    fn doubling_sigma_quarters_energy() {
        let y = EventGraph::build(vec![
            motion([0, 10], vec![ramp(0.0, 0.0)]),
            motion([5, 30], vec![ramp(0.0, 0.5)]),
        ])
        .unwrap();
        let z = EventGraph::build(vec![
            motion([0, 12], vec![ramp(0.1, 0.0)]),
            motion([4, 25], vec![ramp(0.2, 0.4)]),
        ])
        .unwrap();
        let sig = SigmaConfig { node: 0.3, temporal: 2.0, spatial: 0.7 };
        let t1 = PotentialTable::from_graphs(&z, &y, &sig).unwrap();
        let t2 = PotentialTable::from_graphs(&z, &y, &sig.scaled(2.0)).unwrap();
        for x in [[0, 0], [0, 1], [1, 0], [1, 1]] {
            assert!((t1.energy(&x) / 4.0 - t2.energy(&x)).abs() < 1e-12);
        }
    }

    #[test]
    fn sigma_estimates() {
        let y = EventGraph::build(vec![
            motion([0, 10], vec![ramp(0.0, 0.0)]),
            motion([10, 30], vec![ramp(0.0, 0.5)]),
        ])
        .unwrap();
        let s = estimate_sigmas(&y, &y).unwrap();
        assert_eq!(s, SigmaConfig::uniform(SIGMA_FLOOR));

        // every coordinate residual equal to c: shift x and y by c, c
        let c = 0.05;
        let z = EventGraph::build(
            y.nodes()
                .iter()
                .map(|n| {
                    let segs = n
                        .segments
                        .iter()
                        .map(|s| s.iter().map(|p| [p[0] + c, p[1] + c]).collect())
                        .collect();
                    motion(n.interval, segs)
                })
                .collect(),
        )
        .unwrap();
        let s = estimate_sigmas(&z, &y).unwrap();
        assert!((s.node - c).abs() < 1e-12);
        assert!(s.temporal > 0.0 && s.spatial > 0.0);
    }

    #[test]
    fn prior_hook_adds_energy() {
        let t = PotentialTable::from_fn(2, 2, |i, a| (i + a) as f64, |_, _, a, b| (a * b) as f64);
        let p = Prior { node: vec![0.5, 0.0], pair: vec![0.0, 1.0, 1.0, 0.0] };
        let tp = t.clone().with_prior(&p).unwrap();
        assert_eq!(tp.energy(&[0, 1]), t.energy(&[0, 1]) + 0.5 + 1.0);
        assert!(t.with_prior(&Prior { node: vec![0.0], pair: vec![] }).is_err());
    }
}
