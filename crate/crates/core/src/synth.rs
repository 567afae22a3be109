//! Synthetic multi-entity plays: role paths through waypoints, seen through a
//! view affine, replayed at a warped rate and observed with noise.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::traj::{EntityTrack, Point, Sample, Scene, Trajectory};

/// Landmark offsets around a role path sit on a circle of this radius.
pub const LANDMARK_RADIUS: f64 = 0.015;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Waypoint {
    pub frame: i64,
    pub x: f64,
    pub y: f64,
}

impl Waypoint {
    pub const fn new(frame: i64, x: f64, y: f64) -> Self {
        Waypoint { frame, x, y }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoleSpec {
    pub name: String,
    pub waypoints: Vec<Waypoint>,
    pub landmarks_per_role: usize,
}

impl RoleSpec {
    /// Position along the piecewise-linear path at continuous time `t`,
    /// held at the first and last waypoint outside their range.
    pub fn position_at(&self, t: f64) -> Point {
        let w = &self.waypoints;
        if t <= w[0].frame as f64 {
            return [w[0].x, w[0].y];
        }
        for pair in w.windows(2) {
            let (a, b) = (pair[0], pair[1]);
            if t <= b.frame as f64 {
                let u = (t - a.frame as f64) / (b.frame - a.frame) as f64;
                return [a.x + u * (b.x - a.x), a.y + u * (b.y - a.y)];
            }
        }
        let last = w[w.len() - 1];
        [last.x, last.y]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlaySpec {
    pub name: String,
    pub roles: Vec<RoleSpec>,
    /// Trajectories cover frames `0..=frame_span`.
    pub frame_span: i64,
}

impl PlaySpec {
    pub fn validate(&self) -> Result<()> {
        if self.roles.is_empty() {
            return Err(Error::InvalidParameter(format!("play `{}` has no roles", self.name)));
        }
        if self.frame_span < 4 {
            return Err(Error::InvalidParameter(format!(
                "frame_span must be at least 4, got {}",
                self.frame_span
            )));
        }
        for r in &self.roles {
            if r.waypoints.is_empty() {
                return Err(Error::InvalidParameter(format!("role `{}` has no waypoints", r.name)));
            }
            if r.landmarks_per_role == 0 {
                return Err(Error::InvalidParameter(format!("role `{}` has no landmarks", r.name)));
            }
            if r.waypoints.windows(2).any(|w| w[1].frame <= w[0].frame) {
                return Err(Error::InvalidParameter(format!(
                    "waypoint frames of role `{}` are not strictly increasing",
                    r.name
                )));
            }
            if r.waypoints.iter().any(|w| !w.x.is_finite() || !w.y.is_finite()) {
                return Err(Error::InvalidParameter(format!("role `{}` has a non-finite waypoint", r.name)));
            }
        }
        Ok(())
    }
}

/// `p' = scale * R(rotation) * [[1, shear], [0, 1]] * p + translation`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ViewTransform {
    pub rotation: f64,
    pub scale: f64,
    pub shear: f64,
    pub translation: [f64; 2],
}

impl Default for ViewTransform {
    fn default() -> Self {
        ViewTransform {
            rotation: 0.0,
            scale: 1.0,
            shear: 0.0,
            translation: [0.0, 0.0],
        }
    }
}

impl ViewTransform {
    pub fn new(rotation_deg: f64, scale: f64, shear: f64) -> Self {
        ViewTransform {
            rotation: rotation_deg.to_radians(),
            scale,
            shear,
            translation: [0.0, 0.0],
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.scale > 0.0 && self.scale.is_finite()) {
            return Err(Error::InvalidParameter(format!("view scale must be positive, got {}", self.scale)));
        }
        if !self.rotation.is_finite() || !self.shear.is_finite() || self.translation.iter().any(|t| !t.is_finite()) {
            return Err(Error::InvalidParameter("view parameters must be finite".into()));
        }
        Ok(())
    }

    pub fn apply(&self, p: Point) -> Point {
        let sx = p[0] + self.shear * p[1];
        let sy = p[1];
        let (s, c) = self.rotation.sin_cos();
        [
            self.scale * (c * sx - s * sy) + self.translation[0],
            self.scale * (s * sx + c * sy) + self.translation[1],
        ]
    }
}

/// Monotone piecewise-linear map from original time to replayed time.
/// Knots are `(original, warped)` pairs; the first and last are the span ends.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateWarp {
    pub knots: Vec<[f64; 2]>,
}

impl RateWarp {
    pub fn identity(span: i64) -> Self {
        RateWarp {
            knots: vec![[0.0, 0.0], [span as f64, span as f64]],
        }
    }

    pub fn validate(&self, span: i64) -> Result<()> {
        let k = &self.knots;
        let span = span as f64;
        if k.len() < 2 {
            return Err(Error::InvalidWarp("a warp needs at least two knots".into()));
        }
        if k[0] != [0.0, 0.0] || k[k.len() - 1] != [span, span] {
            return Err(Error::InvalidWarp(format!(
                "warp must fix the span ends (0, 0) and ({span}, {span})"
            )));
        }
        if k.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::InvalidWarp("non-finite knot".into()));
        }
        if k.windows(2).any(|w| w[1][0] <= w[0][0] || w[1][1] <= w[0][1]) {
            return Err(Error::InvalidWarp("knots must be strictly increasing in both coordinates".into()));
        }
        Ok(())
    }

    fn interpolate(&self, t: f64, from: usize) -> f64 {
        let to = 1 - from;
        let k = &self.knots;
        for w in k.windows(2) {
            if t <= w[1][from] {
                let u = (t - w[0][from]) / (w[1][from] - w[0][from]);
                return w[0][to] + u * (w[1][to] - w[0][to]);
            }
        }
        k[k.len() - 1][to]
    }

    /// Replayed time of original time `t`.
    pub fn forward(&self, t: f64) -> f64 {
        self.interpolate(t, 0)
    }

    /// Original time shown at replayed time `t`.
    pub fn inverse(&self, t: f64) -> f64 {
        self.interpolate(t, 1)
    }

    /// A random warp through `pieces - 1` interior knots, spaced evenly in
    /// original time, with piece slopes drawn from `[1 / max_slope, max_slope]`.
    pub fn random<R: Rng>(span: i64, pieces: usize, max_slope: f64, rng: &mut R) -> Result<Self> {
        if pieces == 0 || max_slope < 1.0 {
            return Err(Error::InvalidWarp("need at least one piece and max_slope >= 1".into()));
        }
        let span = span as f64;
        let lo = max_slope.recip().ln();
        let hi = max_slope.ln();
        let slopes: Vec<f64> = (0..pieces).map(|_| rng.random_range(lo..=hi).exp()).collect();
        let total: f64 = slopes.iter().sum();
        let mut knots = vec![[0.0, 0.0]];
        let mut acc = 0.0;
        for (i, s) in slopes.iter().enumerate().take(pieces - 1) {
            acc += s / total * span;
            knots.push([(i + 1) as f64 * span / pieces as f64, acc]);
        }
        knots.push([span, span]);
        let w = RateWarp { knots };
        w.validate(span as i64)?;
        Ok(w)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PerturbConfig {
    pub view: ViewTransform,
    /// `None` replays at the original rate.
    pub rate_warp: Option<RateWarp>,
    /// Standard deviation as a fraction of the larger scene extent.
    pub noise_sigma: f64,
    pub shuffle_entities: bool,
    pub seed: u64,
}

impl Default for PerturbConfig {
    fn default() -> Self {
        PerturbConfig {
            view: ViewTransform::default(),
            rate_warp: None,
            noise_sigma: 0.0,
            shuffle_entities: false,
            seed: 0,
        }
    }
}

fn landmark_offset(l: usize, count: usize) -> Point {
    if count == 1 {
        return [0.0, 0.0];
    }
    let a = std::f64::consts::TAU * l as f64 / count as f64;
    [LANDMARK_RADIUS * a.cos(), LANDMARK_RADIUS * a.sin()]
}

/// Render a play as an un-normalized scene. One entity per role, named after
/// the role, with landmarks `p0, p1, ...`.
pub fn generate_play(spec: &PlaySpec, perturb: &PerturbConfig) -> Result<Scene> {
    spec.validate()?;
    perturb.view.validate()?;
    if !(perturb.noise_sigma >= 0.0 && perturb.noise_sigma.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "noise_sigma must be non-negative, got {}",
            perturb.noise_sigma
        )));
    }
    let warp = match &perturb.rate_warp {
        Some(w) => {
            w.validate(spec.frame_span)?;
            w.clone()
        }
        None => RateWarp::identity(spec.frame_span),
    };

    let mut paths: Vec<(String, Vec<(String, Vec<Point>)>)> = spec
        .roles
        .iter()
        .map(|role| {
            let landmarks = (0..role.landmarks_per_role)
                .map(|l| {
                    let off = landmark_offset(l, role.landmarks_per_role);
                    let pts = (0..=spec.frame_span)
                        .map(|f| {
                            let p = role.position_at(warp.inverse(f as f64));
                            perturb.view.apply([p[0] + off[0], p[1] + off[1]])
                        })
                        .collect();
                    (format!("p{l}"), pts)
                })
                .collect();
            (role.name.clone(), landmarks)
        })
        .collect();

    let mut rng = ChaCha8Rng::seed_from_u64(perturb.seed);
    if perturb.noise_sigma > 0.0 {
        let (mut lo, mut hi) = ([f64::INFINITY; 2], [f64::NEG_INFINITY; 2]);
        for p in paths.iter().flat_map(|(_, ls)| ls.iter().flat_map(|(_, pts)| pts)) {
            for d in 0..2 {
                lo[d] = lo[d].min(p[d]);
                hi[d] = hi[d].max(p[d]);
            }
        }
        let extent = (hi[0] - lo[0]).max(hi[1] - lo[1]);
        let normal = Normal::new(0.0, perturb.noise_sigma * extent)
            .map_err(|e| Error::InvalidParameter(e.to_string()))?;
        for (_, landmarks) in &mut paths {
            for (_, pts) in landmarks {
                for p in pts {
                    p[0] += normal.sample(&mut rng);
                    p[1] += normal.sample(&mut rng);
                }
            }
        }
    }
    if perturb.shuffle_entities {
        paths.shuffle(&mut rng);
    }

    let tracks = paths
        .into_iter()
        .map(|(name, landmarks)| {
            let trajs = landmarks
                .into_iter()
                .map(|(id, pts)| {
                    let samples = pts
                        .into_iter()
                        .enumerate()
                        .map(|(f, p)| Sample::new(f as i64, p[0], p[1]))
                        .collect();
                    Trajectory::new(id, samples)
                })
                .collect::<Result<Vec<_>>>()?;
            EntityTrack::new(name, trajs)
        })
        .collect::<Result<Vec<_>>>()?;
    Scene::new(tracks)
}

/// Remove `count` entities chosen uniformly at random.
pub fn drop_entities<R: Rng>(scene: &Scene, count: usize, rng: &mut R) -> Result<Scene> {
    if count == 0 {
        return Ok(scene.clone());
    }
    let n = scene.tracks().len();
    if count >= n {
        return Err(Error::InvalidParameter(format!(
            "cannot drop {count} of {n} entities"
        )));
    }
    let mut idx: Vec<usize> = (0..n).collect();
    idx.shuffle(rng);
    let mut drop = idx[..count].to_vec();
    drop.sort_unstable();
    scene.without_tracks(&drop)
}

#[derive(Debug, Clone, PartialEq)]
pub struct LabeledScene {
    pub id: String,
    pub label: String,
    pub scene: Scene,
}

pub const BENCHMARK_FRAMES: i64 = 100;
pub const BENCHMARK_LANDMARKS: usize = 2;
pub const BENCHMARK_NOISE: f64 = 0.005;
pub const BENCHMARK_ITEMS_PER_CLASS: usize = 8;
/// Pieces and largest slope of the random benchmark rate warps.
pub const BENCHMARK_WARP: (usize, f64) = (3, 1.3);

/// The eight views: `(rotation in degrees, scale, shear)`.
pub const BENCHMARK_VIEWS: [(f64, f64, f64); 8] = [
    (0.0, 1.0, 0.0),
    (15.0, 0.8, 0.05),
    (-15.0, 1.25, -0.05),
    (30.0, 1.0, 0.1),
    (-30.0, 0.8, -0.1),
    (15.0, 1.25, 0.0),
    (-15.0, 1.0, 0.1),
    (0.0, 0.8, -0.1),
];

fn role(name: &str, waypoints: &[(i64, f64, f64)]) -> RoleSpec {
    RoleSpec {
        name: name.to_string(),
        waypoints: waypoints.iter().map(|&(f, x, y)| Waypoint::new(f, x, y)).collect(),
        landmarks_per_role: BENCHMARK_LANDMARKS,
    }
}

/// Drop-back pass: both wide receivers run up the field and cut inside
/// together while the quarterback drops back.
pub fn drop_back_play() -> PlaySpec {
    PlaySpec {
        name: "drop_back".into(),
        frame_span: BENCHMARK_FRAMES,
        roles: vec![
            role("qb", &[(0, 0.5, 0.25), (25, 0.5, 0.05), (70, 0.5, 0.1), (100, 0.55, 0.15)]),
            role("rb", &[(0, 0.5, 0.12), (30, 0.35, 0.2), (100, 0.3, 0.6)]),
            role("te", &[(0, 0.7, 0.3), (40, 0.75, 0.6), (100, 1.0, 0.65)]),
            role("wl", &[(0, 0.1, 0.3), (50, 0.1, 0.8), (100, 0.4, 0.95)]),
            role("wr", &[(0, 0.9, 0.3), (50, 0.9, 0.8), (100, 0.6, 0.95)]),
        ],
    }
}

/// Run to the left: the back sweeps wide left, the right receiver crosses late.
pub fn wide_left_play() -> PlaySpec {
    PlaySpec {
        name: "wide_left".into(),
        frame_span: BENCHMARK_FRAMES,
        roles: vec![
            role("qb", &[(0, 0.5, 0.25), (20, 0.4, 0.2), (100, 0.35, 0.22)]),
            role("rb", &[(0, 0.5, 0.12), (35, 0.1, 0.2), (100, 0.05, 0.8)]),
            role("te", &[(0, 0.7, 0.3), (25, 0.55, 0.4), (100, 0.3, 0.5)]),
            role("wl", &[(0, 0.1, 0.3), (30, 0.1, 0.5), (100, 0.25, 0.55)]),
            role("wr", &[(0, 0.9, 0.3), (60, 0.6, 0.7), (100, 0.3, 0.75)]),
        ],
    }
}

/// Run to the right: the back cuts up the right side after a long sweep.
pub fn wide_right_play() -> PlaySpec {
    PlaySpec {
        name: "wide_right".into(),
        frame_span: BENCHMARK_FRAMES,
        roles: vec![
            role("qb", &[(0, 0.5, 0.25), (30, 0.6, 0.2), (100, 0.62, 0.2)]),
            role("rb", &[(0, 0.5, 0.12), (50, 0.95, 0.2), (100, 0.95, 0.75)]),
            role("te", &[(0, 0.3, 0.3), (60, 0.55, 0.45), (100, 0.7, 0.6)]),
            role("wl", &[(0, 0.1, 0.3), (40, 0.4, 0.7), (100, 0.75, 0.75)]),
            role("wr", &[(0, 0.9, 0.3), (20, 0.9, 0.45), (100, 0.75, 0.5)]),
        ],
    }
}

pub fn benchmark_plays() -> Vec<PlaySpec> {
    vec![drop_back_play(), wide_left_play(), wide_right_play()]
}

/// Perturbation for item `index` of a class: view `index % 8`, a random rate
/// warp and noise, entities shuffled. Streams are derived from `seed`, the
/// class and the index, so items can be generated independently.
pub fn benchmark_perturbation(seed: u64, class: usize, index: usize) -> Result<PerturbConfig> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream((class * 1000 + index) as u64);
    let (rot, scale, shear) = BENCHMARK_VIEWS[index % BENCHMARK_VIEWS.len()];
    let mut view = ViewTransform::new(rot, scale, shear);
    view.translation = [rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)];
    let (pieces, slope) = BENCHMARK_WARP;
    let warp = RateWarp::random(BENCHMARK_FRAMES, pieces, slope, &mut rng)?;
    Ok(PerturbConfig {
        view,
        rate_warp: Some(warp),
        noise_sigma: BENCHMARK_NOISE,
        shuffle_entities: true,
        seed: rng.random(),
    })
}

/// Three play classes, eight items each, ids `<class>_<index>`.
pub fn standard_benchmark(seed: u64) -> Result<Vec<LabeledScene>> {
    let mut out = Vec::new();
    for (c, play) in benchmark_plays().iter().enumerate() {
        for i in 0..BENCHMARK_ITEMS_PER_CLASS {
            let p = benchmark_perturbation(seed, c, i)?;
            out.push(LabeledScene {
                id: format!("{}_{i}", play.name),
                label: play.name.clone(),
                scene: generate_play(play, &p)?,
            });
        }
    }
    Ok(out)
}

/// Two entities turning 90 degrees at the same frame `corner`.
pub fn corner_play(corner: i64, frame_span: i64) -> Result<PlaySpec> {
    if corner <= 0 || corner >= frame_span {
        return Err(Error::InvalidParameter(format!(
            "corner frame {corner} is outside (0, {frame_span})"
        )));
    }
    let one = |name: &str, x0: f64| RoleSpec {
        name: name.to_string(),
        waypoints: vec![
            Waypoint::new(0, x0, 0.0),
            Waypoint::new(corner, x0, 1.0),
            Waypoint::new(frame_span, x0 + 1.0, 1.0),
        ],
        landmarks_per_role: BENCHMARK_LANDMARKS,
    };
    Ok(PlaySpec {
        name: "corners".into(),
        frame_span,
        roles: vec![one("a", 0.0), one("b", 0.6)],
    })
}

/// Corner scenes with the corner frame drawn from the middle third of the
/// span, each with a benchmark view and noise. Returns the scene and its corner frame.
pub fn corner_trial(seed: u64, trial: usize, frame_span: i64, noise_sigma: f64) -> Result<(Scene, i64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial as u64);
    let corner = rng.random_range(frame_span / 3..=2 * frame_span / 3);
    let (rot, scale, shear) = BENCHMARK_VIEWS[trial % BENCHMARK_VIEWS.len()];
    let p = PerturbConfig {
        view: ViewTransform::new(rot, scale, shear),
        rate_warp: None,
        noise_sigma,
        shuffle_entities: true,
        seed: rng.random(),
    };
    Ok((generate_play(&corner_play(corner, frame_span)?, &p)?, corner))
}
