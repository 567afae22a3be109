//! Trajectory containers, coordinate normalization, uniform resampling and
//! spatio-temporal curvature.
//!
//! Time is measured in frames. All resampling is linear interpolation in the
//! frame parameter, so a trajectory that is piecewise linear in time is
//! reproduced exactly at any resolution.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A planar point `[x, y]`.
pub type Point = [f64; 2];

/// Minimum number of samples for which curvature is defined.
pub const MIN_CURVATURE_SAMPLES: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub frame: i64,
    pub x: f64,
    pub y: f64,
}

impl Sample {
    pub fn new(frame: i64, x: f64, y: f64) -> Self {
        Sample { frame, x, y }
    }

    pub fn point(&self) -> Point {
        [self.x, self.y]
    }
}

/// The track of one landmark point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    point_id: String,
    samples: Vec<Sample>,
}

impl Trajectory {
    /// Frames must be strictly increasing and there must be at least two samples.
    pub fn new(point_id: impl Into<String>, samples: Vec<Sample>) -> Result<Self> {
        let point_id = point_id.into();
        if samples.len() < 2 {
            return Err(Error::InvalidTrajectory {
                point_id,
                reason: format!("needs at least 2 samples, got {}", samples.len()),
            });
        }
        if let Some(w) = samples.windows(2).find(|w| w[1].frame <= w[0].frame) {
            return Err(Error::InvalidTrajectory {
                point_id,
                reason: format!(
                    "frames must be strictly increasing ({} then {})",
                    w[0].frame, w[1].frame
                ),
            });
        }
        if let Some(s) = samples.iter().find(|s| !s.x.is_finite() || !s.y.is_finite()) {
            return Err(Error::InvalidTrajectory {
                point_id,
                reason: format!("non-finite coordinate at frame {}", s.frame),
            });
        }
        Ok(Trajectory { point_id, samples })
    }

    pub fn point_id(&self) -> &str {
        &self.point_id
    }

    pub fn samples(&self) -> &[Sample] {
        &self.samples
    }

    pub fn first_frame(&self) -> i64 {
        self.samples[0].frame
    }

    pub fn last_frame(&self) -> i64 {
        self.samples[self.samples.len() - 1].frame
    }

    /// Position at real-valued frame `t`, clamped to the trajectory's span.
    pub fn position_at(&self, t: f64) -> Point {
        let s = &self.samples;
        if t <= s[0].frame as f64 {
            return s[0].point();
        }
        let last = s[s.len() - 1];
        if t >= last.frame as f64 {
            return last.point();
        }
        // first sample with frame > t; t is strictly inside the span so 1 <= hi < len
        let hi = s.partition_point(|p| (p.frame as f64) <= t);
        let (a, b) = (s[hi - 1], s[hi]);
        let w = (t - a.frame as f64) / (b.frame - a.frame) as f64;
        [a.x + w * (b.x - a.x), a.y + w * (b.y - a.y)]
    }

    /// `L` points at equally spaced frame parameters over `[start, end]`.
    /// The endpoints are evaluated exactly at `start` and `end`.
    pub fn resample_between(&self, start: f64, end: f64, len: usize) -> Result<Vec<Point>> {
        if len < 2 {
            return Err(Error::InvalidParameter(format!(
                "resample length must be at least 2, got {len}"
            )));
        }
        if !(end > start) {
            return Err(Error::InvalidParameter(format!(
                "resample range [{start}, {end}] is empty"
            )));
        }
        let span = end - start;
        let denom = (len - 1) as f64;
        Ok((0..len)
            .map(|k| {
                let t = if k + 1 == len {
                    end
                } else {
                    start + span * k as f64 / denom
                };
                self.position_at(t)
            })
            .collect())
    }

    /// Positions at every integer frame of the trajectory's own span.
    pub fn per_frame(&self) -> Vec<Point> {
        (self.first_frame()..=self.last_frame())
            .map(|f| self.position_at(f as f64))
            .collect()
    }

    pub(crate) fn map_points(&mut self, mut f: impl FnMut(Point) -> Point) {
        for s in &mut self.samples {
            let [x, y] = f(s.point());
            s.x = x;
            s.y = y;
        }
    }
}

/// All landmark trajectories of one moving entity (a person, body part or object).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntityTrack {
    entity_id: String,
    trajectories: Vec<Trajectory>,
}

impl EntityTrack {
    pub fn new(entity_id: impl Into<String>, trajectories: Vec<Trajectory>) -> Result<Self> {
        let entity_id = entity_id.into();
        if trajectories.is_empty() {
            return Err(Error::InvalidParameter(format!(
                "entity `{entity_id}` has no trajectories"
            )));
        }
        Ok(EntityTrack {
            entity_id,
            trajectories,
        })
    }

    pub fn entity_id(&self) -> &str {
        &self.entity_id
    }

    pub fn trajectories(&self) -> &[Trajectory] {
        &self.trajectories
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scene {
    tracks: Vec<EntityTrack>,
    frame_range: (i64, i64),
    normalized: bool,
}

impl Scene {
    pub fn new(tracks: Vec<EntityTrack>) -> Result<Self> {
        if tracks.is_empty() {
            return Err(Error::EmptyScene);
        }
        let trajs = tracks.iter().flat_map(|t| t.trajectories.iter());
        let first = trajs.clone().map(Trajectory::first_frame).min().unwrap();
        let last = trajs.map(Trajectory::last_frame).max().unwrap();
        Ok(Scene {
            tracks,
            frame_range: (first, last),
            normalized: false,
        })
    }

    pub fn tracks(&self) -> &[EntityTrack] {
        &self.tracks
    }

    pub fn frame_range(&self) -> (i64, i64) {
        self.frame_range
    }

    pub fn frame_span(&self) -> i64 {
        self.frame_range.1 - self.frame_range.0
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    /// Trajectories in entity order, then landmark order.
    pub fn trajectories(&self) -> impl Iterator<Item = &Trajectory> + '_ {
        self.tracks.iter().flat_map(|t| t.trajectories.iter())
    }

    pub fn trajectory_count(&self) -> usize {
        self.tracks.iter().map(|t| t.trajectories.len()).sum()
    }

    /// Apply `f` to every sample position. Clears the normalized flag.
    pub fn map_points(&mut self, mut f: impl FnMut(Point) -> Point) {
        for track in &mut self.tracks {
            for traj in &mut track.trajectories {
                traj.map_points(&mut f);
            }
        }
        self.normalized = false;
    }

    /// Remove the tracks at the given indices. At least one track must remain.
    pub fn without_tracks(&self, drop: &[usize]) -> Result<Scene> {
        let tracks: Vec<EntityTrack> = self
            .tracks
            .iter()
            .enumerate()
            .filter(|(i, _)| !drop.contains(i))
            .map(|(_, t)| t.clone())
            .collect();
        let mut scene = Scene::new(tracks)?;
        scene.normalized = self.normalized;
        Ok(scene)
    }

    fn bounds(&self) -> (Point, Point) {
        let mut lo = [f64::INFINITY; 2];
        let mut hi = [f64::NEG_INFINITY; 2];
        for s in self.trajectories().flat_map(|t| t.samples.iter()) {
            lo = [lo[0].min(s.x), lo[1].min(s.y)];
            hi = [hi[0].max(s.x), hi[1].max(s.y)];
        }
        (lo, hi)
    }
}

/// Shift the minimal coordinates to the origin and divide by the larger of
/// the two extents, so every coordinate lies in `[0, 1]` with the aspect
/// ratio preserved.
pub fn normalize_scene(scene: &Scene) -> Result<Scene> {
    let (lo, hi) = scene.bounds();
    let scale = (hi[0] - lo[0]).max(hi[1] - lo[1]);
    if !(scale > 0.0) {
        return Err(Error::ZeroExtent);
    }
    let mut out = scene.clone();
    out.map_points(|[x, y]| [(x - lo[0]) / scale, (y - lo[1]) / scale]);
    out.normalized = true;
    Ok(out)
}

/// Resample a trajectory to `len` points equally spaced in time over its frame span.
pub fn resample_uniform(traj: &Trajectory, len: usize) -> Result<Vec<Point>> {
    traj.resample_between(traj.first_frame() as f64, traj.last_frame() as f64, len)
}

/// Resample an index-parameterized sequence to `len` points.
pub fn resample_sequence(points: &[Point], len: usize) -> Result<Vec<Point>> {
    if len < 2 {
        return Err(Error::InvalidParameter(format!(
            "resample length must be at least 2, got {len}"
        )));
    }
    if points.len() < 2 {
        return Err(Error::TooFewSamples {
            needed: 2,
            got: points.len(),
        });
    }
    let last = points.len() - 1;
    let denom = (len - 1) as f64;
    Ok((0..len)
        .map(|k| {
            if k + 1 == len {
                return points[last];
            }
            let t = last as f64 * k as f64 / denom;
            let i = (t.floor() as usize).min(last - 1);
            let w = t - i as f64;
            let (a, b) = (points[i], points[i + 1]);
            [a[0] + w * (b[0] - a[0]), a[1] + w * (b[1] - a[1])]
        })
        .collect())
}

/// Spatio-temporal curvature of a trajectory, sampled at every integer frame
/// of its span with unit-step central differences.
pub fn curvature(traj: &Trajectory) -> Result<Vec<f64>> {
    curvature_of_sequence(&traj.per_frame(), 1.0, 1)
}

/// Spatio-temporal curvature of a uniformly sampled sequence with sample
/// spacing `dt`.
///
/// First and second derivatives use central differences over `step` samples
/// on each side. Near the ends the stencil shrinks to whatever fits, and the
/// two endpoints use one-sided differences.
pub fn curvature_of_sequence(points: &[Point], dt: f64, step: usize) -> Result<Vec<f64>> {
    let n = points.len();
    if n < MIN_CURVATURE_SAMPLES {
        return Err(Error::TooFewSamples {
            needed: MIN_CURVATURE_SAMPLES,
            got: n,
        });
    }
    if !(dt > 0.0) || step == 0 {
        return Err(Error::InvalidParameter(format!(
            "curvature needs dt > 0 and step >= 1 (dt={dt}, step={step})"
        )));
    }
    Ok((0..n)
        .map(|i| {
            let (d1, d2) = derivatives(points, i, dt, step);
            spatio_temporal_curvature(d1, d2)
        })
        .collect())
}

fn derivatives(p: &[Point], i: usize, dt: f64, step: usize) -> (Point, Point) {
    let n = p.len();
    let h = step.min(i).min(n - 1 - i);
    let sub = |a: Point, b: Point| [a[0] - b[0], a[1] - b[1]];
    if h == 0 {
        // one-sided at the endpoints
        let (a, b, c) = if i == 0 {
            (p[0], p[1], p[2])
        } else {
            (p[n - 3], p[n - 2], p[n - 1])
        };
        let d1 = if i == 0 { sub(b, a) } else { sub(c, b) };
        let d2 = [a[0] - 2.0 * b[0] + c[0], a[1] - 2.0 * b[1] + c[1]];
        return (
            [d1[0] / dt, d1[1] / dt],
            [d2[0] / (dt * dt), d2[1] / (dt * dt)],
        );
    }
    let (prev, cur, next) = (p[i - h], p[i], p[i + h]);
    let hd = h as f64 * dt;
    let d1 = [(next[0] - prev[0]) / (2.0 * hd), (next[1] - prev[1]) / (2.0 * hd)];
    let d2 = [
        (next[0] - 2.0 * cur[0] + prev[0]) / (hd * hd),
        (next[1] - 2.0 * cur[1] + prev[1]) / (hd * hd),
    ];
    (d1, d2)
}

/// `sqrt(y''^2 + x''^2 + (x'y'' - x''y')^2) / sqrt(x'^2 + y'^2 + 1)^3`
pub fn spatio_temporal_curvature(d1: Point, d2: Point) -> f64 {
    let [dx, dy] = d1;
    let [ddx, ddy] = d2;
    let cross = dx * ddy - ddx * dy;
    let num = (ddy * ddy + ddx * ddx + cross * cross).sqrt();
    let den = (dx * dx + dy * dy + 1.0).sqrt();
    num / (den * den * den)
}

/// Arithmetic mean over all points of all sequences.
pub fn mean_point<'a>(seqs: impl IntoIterator<Item = &'a [Point]>) -> Option<Point> {
    let mut sum = [0.0; 2];
    let mut count = 0usize;
    for p in seqs.into_iter().flatten() {
        sum[0] += p[0];
        sum[1] += p[1];
        count += 1;
    }
    (count > 0).then(|| [sum[0] / count as f64, sum[1] / count as f64])
}
