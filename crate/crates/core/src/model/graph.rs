use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::motion::AtomicMotion;
use crate::relations::{classify_intervals, spatial_distance, spatial_orientation, IntervalRelation};

use super::SigmaConfig;

/// Complete graph over atomic motions. Edge records are kept for every
/// ordered node pair, including a node with itself, since a many-to-one
/// mapping can send two observed nodes to the same model node.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "GraphNodes", into = "GraphNodes")]
pub struct EventGraph {
    nodes: Vec<AtomicMotion>,
    temporal: Vec<IntervalRelation>,
    spatial: Vec<[f64; 2]>,
}

#[derive(Serialize, Deserialize)]
struct GraphNodes {
    nodes: Vec<AtomicMotion>,
}

impl TryFrom<GraphNodes> for EventGraph {
    type Error = crate::error::Error;

    fn try_from(g: GraphNodes) -> Result<Self> {
        EventGraph::build(g.nodes)
    }
}

impl From<EventGraph> for GraphNodes {
    fn from(g: EventGraph) -> Self {
        GraphNodes { nodes: g.nodes }
    }
}

impl EventGraph {
    /// Nodes keep the input order.
    pub fn build(motions: Vec<AtomicMotion>) -> Result<Self> {
        let m = motions.len();
        let mut temporal = Vec::with_capacity(m * m);
        let mut spatial = Vec::with_capacity(m * m);
        for a in &motions {
            for b in &motions {
                temporal.push(classify_intervals(a.interval, b.interval)?);
                spatial.push([
                    spatial_distance(a.centroid, b.centroid),
                    spatial_orientation(a.centroid, b.centroid),
                ]);
            }
        }
        Ok(EventGraph {
            nodes: motions,
            temporal,
            spatial,
        })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[AtomicMotion] {
        &self.nodes
    }

    pub fn temporal(&self, i: usize, j: usize) -> &IntervalRelation {
        &self.temporal[i * self.nodes.len() + j]
    }

    /// `(distance, orientation)` between the centroids of nodes `i` and `j`.
    pub fn spatial(&self, i: usize, j: usize) -> [f64; 2] {
        self.spatial[i * self.nodes.len() + j]
    }

    /// Number of distinct undirected edges, `M(M-1)/2`.
    pub fn edge_count(&self) -> usize {
        let m = self.nodes.len();
        m * m.saturating_sub(1) / 2
    }

    /// Frames from the earliest start to the latest end.
    pub fn frame_span(&self) -> i64 {
        let lo = self.nodes.iter().map(|n| n.start()).min().unwrap_or(0);
        let hi = self.nodes.iter().map(|n| n.end()).max().unwrap_or(0);
        hi - lo
    }

    pub fn intervals(&self) -> Vec<[i64; 2]> {
        self.nodes.iter().map(|n| n.interval).collect()
    }

    /// A new graph with nodes reordered so that new node `k` is old node `perm[k]`.
    pub fn permuted(&self, perm: &[usize]) -> Result<Self> {
        EventGraph::build(perm.iter().map(|&i| self.nodes[i].clone()).collect())
    }

    /// Debug view: nodes, undirected edges and optionally the sigmas in use.
    pub fn dump(&self, sigmas: Option<&SigmaConfig>) -> GraphDump {
        let m = self.nodes.len();
        GraphDump {
            nodes: self
                .nodes
                .iter()
                .map(|n| NodeDump {
                    cluster: n.cluster,
                    interval: n.interval,
                    centroid: n.centroid,
                    segments: n.segments.len(),
                })
                .collect(),
            edges: (0..m)
                .flat_map(|i| (i + 1..m).map(move |j| (i, j)))
                .map(|(i, j)| {
                    let t = self.temporal(i, j);
                    let [distance, orientation] = self.spatial(i, j);
                    EdgeDump {
                        nodes: [i, j],
                        category: t.category,
                        compact: t.compact,
                        temporal: t.measure(),
                        distance,
                        orientation,
                    }
                })
                .collect(),
            sigmas: sigmas.cloned(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct GraphDump {
    pub nodes: Vec<NodeDump>,
    pub edges: Vec<EdgeDump>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sigmas: Option<SigmaConfig>,
}

#[derive(Debug, Clone, Serialize)]
pub struct NodeDump {
    pub cluster: usize,
    pub interval: [i64; 2],
    pub centroid: [f64; 2],
    pub segments: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct EdgeDump {
    pub nodes: [usize; 2],
    pub category: crate::relations::Category,
    pub compact: crate::relations::Compact,
    pub temporal: f64,
    pub distance: f64,
    pub orientation: f64,
}
