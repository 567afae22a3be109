//! Pairwise temporal and spatial measures between atomic motions.
//!
//! Temporal measures are in frames. Allen's equal/during/overlap are folded
//! into a *simultaneous* relation measured by `max(|s1-s2|, |e1-e2|)`, and
//! before/after into a *sequential* relation measured by
//! `min(|e1-s2|, |e2-s1|)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::traj::Point;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Category {
    Equal,
    During,
    Overlap,
    /// The second interval starts after the first ends.
    After,
    /// The first interval starts after the second ends.
    Before,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Compact {
    Simultaneous,
    Sequential,
}

impl Category {
    pub fn compact(self) -> Compact {
        match self {
            Category::Equal | Category::During | Category::Overlap => Compact::Simultaneous,
            Category::After | Category::Before => Compact::Sequential,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntervalRelation {
    pub category: Category,
    pub compact: Compact,
    pub simultaneous_measure: f64,
    pub sequential_measure: f64,
}

impl IntervalRelation {
    /// The measure matching the compact relation.
    pub fn measure(&self) -> f64 {
        match self.compact {
            Compact::Simultaneous => self.simultaneous_measure,
            Compact::Sequential => self.sequential_measure,
        }
    }
}

fn check(iv: [i64; 2]) -> Result<()> {
    if iv[0] < iv[1] {
        Ok(())
    } else {
        Err(Error::InvalidInterval {
            start: iv[0],
            end: iv[1],
        })
    }
}

pub fn simultaneous_measure(a: [i64; 2], b: [i64; 2]) -> f64 {
    (a[0] - b[0]).abs().max((a[1] - b[1]).abs()) as f64
}

pub fn sequential_measure(a: [i64; 2], b: [i64; 2]) -> f64 {
    (a[1] - b[0]).abs().min((b[1] - a[0]).abs()) as f64
}

/// Classify two intervals `[s, e]`.
///
/// Configurations outside the five categories (shared endpoints, meets) go to
/// whichever compact relation has the smaller measure, simultaneous on ties.
pub fn classify_intervals(a: [i64; 2], b: [i64; 2]) -> Result<IntervalRelation> {
    check(a)?;
    check(b)?;
    let ([s1, e1], [s2, e2]) = (a, b);
    let sim = simultaneous_measure(a, b);
    let seq = sequential_measure(a, b);

    let category = if s1 == s2 && e1 == e2 {
        Category::Equal
    } else if (s1 < s2 && e1 > e2) || (s2 < s1 && e2 > e1) {
        Category::During
    } else if (s1 < s2 && e1 > s2 && e1 < e2) || (s2 < s1 && e2 > s1 && e2 < e1) {
        Category::Overlap
    } else if s2 > e1 {
        Category::After
    } else if s1 > e2 {
        Category::Before
    } else if sim <= seq {
        let contains = (s1 <= s2 && e1 >= e2) || (s2 <= s1 && e2 >= e1);
        if contains {
            Category::During
        } else {
            Category::Overlap
        }
    } else if (e1 - s2).abs() <= (e2 - s1).abs() {
        Category::After
    } else {
        Category::Before
    };

    Ok(IntervalRelation {
        category,
        compact: category.compact(),
        simultaneous_measure: sim,
        sequential_measure: seq,
    })
}

/// `min(simultaneous, sequential)`: how close two motions are in time.
pub fn neighborhood_measure(a: [i64; 2], b: [i64; 2]) -> f64 {
    simultaneous_measure(a, b).min(sequential_measure(a, b))
}

pub fn spatial_distance(a: Point, b: Point) -> f64 {
    (a[0] - b[0]).hypot(a[1] - b[1])
}

/// Cosine of the angle between two centroid vectors; 0 when either is the origin.
pub fn spatial_orientation(a: Point, b: Point) -> f64 {
    let na = a[0].hypot(a[1]);
    let nb = b[0].hypot(b[1]);
    if na == 0.0 || nb == 0.0 {
        return 0.0;
    }
    ((a[0] * b[0] + a[1] * b[1]) / (na * nb)).clamp(-1.0, 1.0)
}

/// `adj[i][j]` is true when intervals `i` and `j` (i != j) are within
/// `threshold` frames by the neighborhood measure.
pub fn neighborhood(intervals: &[[i64; 2]], threshold: f64) -> Vec<Vec<bool>> {
    let n = intervals.len();
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| i != j && neighborhood_measure(intervals[i], intervals[j]) <= threshold)
                .collect()
        })
        .collect()
}
