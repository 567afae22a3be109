use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::traj::{mean_point, Point};

/// Default number of samples per atomic-motion segment.
pub const DEFAULT_ATOM_LEN: usize = 16;

/// A jointly segmented bundle of trajectory pieces sharing the interval
/// `[start, end]`, each resampled to the same number of samples.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AtomicMotion {
    pub cluster: usize,
    pub interval: [i64; 2],
    pub centroid: Point,
    /// Point ids of the member trajectories, parallel to `segments`.
    #[serde(default)]
    pub members: Vec<String>,
    pub segments: Vec<Vec<Point>>,
}

impl AtomicMotion {
    pub fn new(
        cluster: usize,
        interval: [i64; 2],
        members: Vec<String>,
        segments: Vec<Vec<Point>>,
    ) -> Result<Self> {
        if interval[0] >= interval[1] {
            return Err(Error::InvalidInterval {
                start: interval[0],
                end: interval[1],
            });
        }
        if segments.is_empty() {
            return Err(Error::InvalidParameter(
                "atomic motion needs at least one segment".into(),
            ));
        }
        let len = segments[0].len();
        if len < 2 || segments.iter().any(|s| s.len() != len) {
            return Err(Error::InvalidParameter(
                "atomic motion segments must share one length of at least 2".into(),
            ));
        }
        if !members.is_empty() && members.len() != segments.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} member ids for {} segments",
                members.len(),
                segments.len()
            )));
        }
        let centroid = centroid_of(&segments)?;
        Ok(AtomicMotion {
            cluster,
            interval,
            centroid,
            members,
            segments,
        })
    }

    pub fn start(&self) -> i64 {
        self.interval[0]
    }

    pub fn end(&self) -> i64 {
        self.interval[1]
    }

    /// Samples per segment.
    pub fn segment_len(&self) -> usize {
        self.segments[0].len()
    }
}

/// Mean over all samples of all segments.
pub fn centroid(motion: &AtomicMotion) -> Point {
    motion.centroid
}

pub(crate) fn centroid_of(segments: &[Vec<Point>]) -> Result<Point> {
    mean_point(segments.iter().map(Vec::as_slice))
        .ok_or_else(|| Error::InvalidParameter("centroid of an empty motion".into()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn centroid_examples() {
        let m = AtomicMotion::new(0, [0, 4], vec![], vec![vec![[0.5, 0.5]; 16]]).unwrap();
        assert_eq!(centroid(&m), [0.5, 0.5]);

        let a: Vec<Point> = (0..16).map(|i| [0.1 + 0.01 * i as f64, 0.2]).collect();
        let b: Vec<Point> = a.iter().map(|p| [1.0 - p[0], 1.0 - p[1]]).collect();
        let m = AtomicMotion::new(0, [0, 4], vec![], vec![a, b]).unwrap();
        assert!((m.centroid[0] - 0.5).abs() < 1e-15 && (m.centroid[1] - 0.5).abs() < 1e-15);

        let sq = vec![[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]];
        let m = AtomicMotion::new(0, [0, 4], vec![], vec![sq]).unwrap();
        assert_eq!(m.centroid, [0.5, 0.5]);
    }

    #[test]
    fn rejects_bad_shapes() {
        assert!(AtomicMotion::new(0, [3, 3], vec![], vec![vec![[0.0, 0.0]; 4]]).is_err());
        assert!(AtomicMotion::new(0, [0, 3], vec![], vec![]).is_err());
        assert!(AtomicMotion::new(0, [0, 3], vec![], vec![vec![[0.0; 2]; 4], vec![[0.0; 2]; 5]])
            .is_err());
        assert!(
            AtomicMotion::new(0, [0, 3], vec!["a".into()], vec![vec![[0.0; 2]; 4]; 2]).is_err()
        );
    }
}
