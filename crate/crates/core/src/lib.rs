//! Semantic similarity between multi-entity trajectory scenes.
//!
//! A scene (landmark trajectories of one or more moving entities) is cut into
//! atomic motions by joint segmentation, the motions and their pairwise
//! temporal and spatial relations form an event graph, and two scenes are
//! compared by probabilistic graph matching that needs no correspondence
//! between their entities.
//!
//! ```no_run
//! use trajmatch::{io, pipeline::{PipelineConfig, scene_graph}, inference::match_graphs};
//! # fn main() -> trajmatch::Result<()> {
//! let cfg = PipelineConfig::default();
//! let query = scene_graph(&io::read_scene_csv("query.csv".as_ref())?, &cfg)?;
//! let model = scene_graph(&io::read_scene_csv("model.csv".as_ref())?, &cfg)?;
//! let report = match_graphs(&query, &model, &cfg.matching)?;
//! println!("{}", report.log_similarity);
//! # Ok(())
//! # }
//! ```

pub mod cli;
pub mod error;
pub mod inference;
pub mod io;
pub mod model;
pub mod motion;
pub mod pipeline;
pub mod relations;
pub mod retrieval;
pub mod segmentation;
pub mod synth;
pub mod traj;

pub use error::{Error, Result};
