//! Joint segmentation of a scene's trajectories into atomic motions.
//!
//! Trajectories are embedded with Laplacian eigenmaps, grouped by k-means on
//! the leading embedding coordinates, and each group is cut at the peaks of
//! its summed curvature. Every group's trajectories are split at the group's
//! own cut points.

mod cuts;
mod embedding;
mod kmeans;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

pub use cuts::{detect_cut_points, FrameSignal};
pub use embedding::laplacian_embedding;
pub use kmeans::cluster_motions;

use crate::error::{Error, Result};
use crate::motion::{AtomicMotion, DEFAULT_ATOM_LEN};
use crate::traj::{curvature_of_sequence, Scene, Trajectory, MIN_CURVATURE_SAMPLES};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EmbeddingConfig {
    /// Samples per coordinate in each trajectory's feature vector.
    pub feature_len: usize,
    /// Neighbors per node in the affinity graph.
    pub knn: usize,
    /// Heat-kernel bandwidth; the median pairwise feature distance when unset.
    pub heat_sigma: Option<f64>,
    /// Embedding dimension.
    pub dim: usize,
}

impl Default for EmbeddingConfig {
    fn default() -> Self {
        EmbeddingConfig {
            feature_len: 32,
            knn: 8,
            heat_sigma: None,
            dim: 3,
        }
    }
}

impl EmbeddingConfig {
    pub fn validate(&self) -> Result<()> {
        if self.dim == 0 || self.knn == 0 || self.feature_len < 4 {
            return Err(Error::InvalidParameter(format!(
                "embedding needs dim >= 1, knn >= 1, feature_len >= 4 (got {}, {}, {})",
                self.dim, self.knn, self.feature_len
            )));
        }
        Ok(())
    }
}

/// Peak prominence threshold for cut detection.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Prominence {
    /// Fraction of the smoothed signal's maximum.
    Relative(f64),
    Absolute(f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SegmentationConfig {
    /// Number of motion clusters. Unset: 5 for single-entity scenes, otherwise
    /// the entity count rounded to the nearest of 3, 5, 7 (ties go up).
    pub k: Option<usize>,
    pub smooth_window: usize,
    pub prominence: Prominence,
    /// Minimum frames between cuts, and between a cut and a span end.
    pub min_segment: usize,
    /// Central-difference half-width, in frames, for curvature derivatives.
    pub derivative_step: usize,
    /// Samples per atomic-motion segment.
    pub atom_len: usize,
    pub kmeans_restarts: usize,
}

impl Default for SegmentationConfig {
    fn default() -> Self {
        SegmentationConfig {
            k: None,
            smooth_window: 5,
            prominence: Prominence::Relative(0.25),
            min_segment: 8,
            derivative_step: 8,
            atom_len: DEFAULT_ATOM_LEN,
            kmeans_restarts: 8,
        }
    }
}

impl SegmentationConfig {
    pub fn validate(&self) -> Result<()> {
        if self.k == Some(0) {
            return Err(Error::InvalidParameter("k must be at least 1".into()));
        }
        if self.min_segment < 2 {
            return Err(Error::InvalidParameter("min_segment must be at least 2".into()));
        }
        if self.atom_len < 2 || self.derivative_step == 0 {
            return Err(Error::InvalidParameter(
                "atom_len must be at least 2 and derivative_step at least 1".into(),
            ));
        }
        match self.prominence {
            Prominence::Relative(v) | Prominence::Absolute(v) if !(v >= 0.0) => Err(
                Error::InvalidParameter(format!("prominence must be non-negative, got {v}")),
            ),
            _ => Ok(()),
        }
    }

    /// The cluster count used for a scene with `entities` tracks.
    pub fn effective_k(&self, entities: usize) -> usize {
        self.k.unwrap_or(match entities {
            0 | 1 => 5,
            e => [3usize, 5, 7]
                .into_iter()
                .min_by_key(|&c| (c.abs_diff(e), std::cmp::Reverse(c)))
                .unwrap(),
        })
    }
}

/// A group of jointly segmented trajectories.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MotionCluster {
    /// `entity_id/point_id` of each member.
    pub members: Vec<String>,
    /// Frame span covered by the cluster's atomic motions.
    pub span: [i64; 2],
    pub cut_points: Vec<i64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Segmentation {
    pub clusters: Vec<MotionCluster>,
    pub motions: Vec<AtomicMotion>,
}

/// Trajectories of the scene with their `entity_id/point_id` names, in scene order.
pub(crate) fn named_trajectories(scene: &Scene) -> Vec<(String, &Trajectory)> {
    scene
        .tracks()
        .iter()
        .flat_map(|t| {
            t.trajectories()
                .iter()
                .map(move |tr| (format!("{}/{}", t.entity_id(), tr.point_id()), tr))
        })
        .collect()
}

/// One row per trajectory: its x coordinates resampled to `feature_len`,
/// followed by its y coordinates.
pub fn trajectory_features(scene: &Scene, cfg: &EmbeddingConfig) -> Result<DMatrix<f64>> {
    cfg.validate()?;
    let f = cfg.feature_len;
    let trajs: Vec<&Trajectory> = scene.trajectories().collect();
    let mut m = DMatrix::zeros(trajs.len(), 2 * f);
    for (i, t) in trajs.iter().enumerate() {
        let pts = crate::traj::resample_uniform(t, f)?;
        for (j, p) in pts.iter().enumerate() {
            m[(i, j)] = p[0];
            m[(i, f + j)] = p[1];
        }
    }
    Ok(m)
}

/// Per-frame sum of member curvatures over the frames all members share.
///
/// `members` index trajectories in scene order.
pub fn aggregated_curvature(
    scene: &Scene,
    members: &[usize],
    derivative_step: usize,
) -> Result<FrameSignal> {
    if members.is_empty() {
        return Err(Error::InvalidParameter("empty cluster".into()));
    }
    let trajs: Vec<&Trajectory> = scene.trajectories().collect();
    let mut selected = Vec::with_capacity(members.len());
    for &m in members {
        selected.push(*trajs.get(m).ok_or_else(|| {
            Error::InvalidParameter(format!("cluster member {m} out of range"))
        })?);
    }
    let start = selected.iter().map(|t| t.first_frame()).max().unwrap();
    let end = selected.iter().map(|t| t.last_frame()).min().unwrap();
    if end < start {
        return Err(Error::EmptyFrameIntersection);
    }
    let len = (end - start + 1) as usize;
    let mut values = vec![0.0; len];
    for t in selected {
        let pts = t.per_frame();
        if pts.len() < MIN_CURVATURE_SAMPLES {
            // too short to carry a discontinuity
            continue;
        }
        let k = curvature_of_sequence(&pts, 1.0, derivative_step)?;
        let offset = (start - t.first_frame()) as usize;
        for (v, c) in values.iter_mut().zip(&k[offset..offset + len]) {
            *v += c;
        }
    }
    Ok(FrameSignal { start, values })
}

/// Segment a normalized scene into atomic motions.
///
/// Motions are ordered by cluster, then by time. Clusters are numbered by the
/// first appearance of a member in scene order.
pub fn segment_scene(
    scene: &Scene,
    emb_cfg: &EmbeddingConfig,
    seg_cfg: &SegmentationConfig,
    seed: u64,
) -> Result<Segmentation> {
    if !scene.is_normalized() {
        return Err(Error::InvalidParameter(
            "segmentation expects a normalized scene".into(),
        ));
    }
    emb_cfg.validate()?;
    seg_cfg.validate()?;

    let named = named_trajectories(scene);
    let n = named.len();
    let k = match seg_cfg.k {
        Some(k) if k > n => {
            return Err(Error::InvalidParameter(format!(
                "cannot form {k} clusters from {n} trajectories"
            )))
        }
        Some(k) => k,
        None => seg_cfg.effective_k(scene.tracks().len()).min(n),
    };

    let labels = if k == 1 {
        vec![0; n]
    } else {
        let features = trajectory_features(scene, emb_cfg)?;
        let dim = emb_cfg.dim.min(n - 1);
        let embedding = laplacian_embedding(
            &features,
            &EmbeddingConfig {
                dim,
                ..emb_cfg.clone()
            },
        )?;
        cluster_motions(&embedding, k, seg_cfg.kmeans_restarts, seed)?
    };

    let mut clusters = Vec::with_capacity(k);
    let mut motions = Vec::new();
    for c in 0..k {
        let members: Vec<usize> = (0..n).filter(|&i| labels[i] == c).collect();
        let signal = aggregated_curvature(scene, &members, seg_cfg.derivative_step)?;
        let cut_points = detect_cut_points(&signal, seg_cfg);
        let span = [
            members.iter().map(|&i| named[i].1.first_frame()).min().unwrap(),
            members.iter().map(|&i| named[i].1.last_frame()).max().unwrap(),
        ];

        let mut bounds = vec![span[0]];
        bounds.extend(cut_points.iter().copied());
        bounds.push(span[1]);
        for w in bounds.windows(2) {
            let (s, e) = (w[0], w[1]);
            let segments = members
                .iter()
                .map(|&i| named[i].1.resample_between(s as f64, e as f64, seg_cfg.atom_len))
                .collect::<Result<Vec<_>>>()?;
            let ids = members.iter().map(|&i| named[i].0.clone()).collect();
            motions.push(AtomicMotion::new(c, [s, e], ids, segments)?);
        }
        clusters.push(MotionCluster {
            members: members.iter().map(|&i| named[i].0.clone()).collect(),
            span,
            cut_points,
        });
    }
    Ok(Segmentation { clusters, motions })
}
