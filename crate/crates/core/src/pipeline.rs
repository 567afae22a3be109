//! Scene to event graph: normalize, segment, build.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::inference::MatchConfig;
use crate::model::EventGraph;
use crate::segmentation::{segment_scene, EmbeddingConfig, SegmentationConfig, Segmentation};
use crate::traj::{normalize_scene, Scene};

/// Every tunable of the scene-to-similarity pipeline.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub seed: u64,
    pub embedding: EmbeddingConfig,
    pub segmentation: SegmentationConfig,
    pub matching: MatchConfig,
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<()> {
        self.embedding.validate()?;
        self.segmentation.validate()
    }
}

/// Normalize and segment a scene.
pub fn segment(scene: &Scene, cfg: &PipelineConfig) -> Result<Segmentation> {
    let normalized = normalize_scene(scene)?;
    segment_scene(&normalized, &cfg.embedding, &cfg.segmentation, cfg.seed)
}

/// Normalize, segment and build the event graph of a scene.
pub fn scene_graph(scene: &Scene, cfg: &PipelineConfig) -> Result<EventGraph> {
    EventGraph::build(segment(scene, cfg)?.motions)
}
