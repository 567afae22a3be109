//! Cut-point detection on an aggregated curvature signal.

use super::{Prominence, SegmentationConfig};

/// Peaks below this prominence are rounding noise on a flat signal.
const MIN_PROMINENCE: f64 = 1e-9;

/// A per-frame signal starting at frame `start`.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameSignal {
    pub start: i64,
    pub values: Vec<f64>,
}

impl FrameSignal {
    pub fn frame(&self, idx: usize) -> i64 {
        self.start + idx as i64
    }
}

/// Smooth with a centered moving average, find local maxima whose prominence
/// clears the threshold, snap each to the raw maximum under its smoothing
/// window, and keep them greedily by prominence so that no two cuts (and no
/// cut and either end of the signal) are closer than `min_segment` frames.
pub fn detect_cut_points(signal: &FrameSignal, cfg: &SegmentationConfig) -> Vec<i64> {
    let raw = &signal.values;
    let n = raw.len();
    let window = cfg.smooth_window.max(1);
    if n < 2 * window || n < 3 {
        return Vec::new();
    }
    let smooth = moving_average(raw, window);
    let min_gap = cfg.min_segment;
    if n <= 2 * min_gap {
        return Vec::new();
    }
    // cuts are never placed within min_segment of either end, so the
    // relative threshold ignores those frames
    let peak_height = smooth[min_gap..n - min_gap].iter().cloned().fold(0.0, f64::max);
    let threshold = match cfg.prominence {
        Prominence::Relative(f) => f * peak_height,
        Prominence::Absolute(v) => v,
    };

    let half = window / 2;
    let mut candidates: Vec<(f64, usize)> = local_maxima(&smooth)
        .into_iter()
        .map(|p| (prominence(&smooth, p), p))
        .filter(|&(prom, _)| prom > MIN_PROMINENCE && prom >= threshold)
        .map(|(prom, p)| (prom, snap_to_raw(raw, p, half)))
        .collect();
    candidates.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));

    let mut kept: Vec<usize> = Vec::new();
    for (_, p) in candidates {
        if p < min_gap || p + min_gap > n - 1 {
            continue;
        }
        if kept.iter().all(|&q| p.abs_diff(q) >= min_gap) {
            kept.push(p);
        }
    }
    kept.sort_unstable();
    kept.into_iter().map(|p| signal.frame(p)).collect()
}

pub(crate) fn moving_average(v: &[f64], window: usize) -> Vec<f64> {
    let half = window / 2;
    let n = v.len();
    (0..n)
        .map(|i| {
            let lo = i.saturating_sub(half);
            let hi = (i + half).min(n - 1);
            v[lo..=hi].iter().sum::<f64>() / (hi - lo + 1) as f64
        })
        .collect()
}

/// Interior local maxima; a plateau counts once, at its middle.
fn local_maxima(v: &[f64]) -> Vec<usize> {
    let n = v.len();
    let mut out = Vec::new();
    let mut i = 1;
    while i + 1 < n {
        if v[i] > v[i - 1] {
            let mut j = i;
            while j + 1 < n && v[j + 1] == v[i] {
                j += 1;
            }
            if j + 1 < n && v[j + 1] < v[i] {
                out.push((i + j) / 2);
            }
            i = j + 1;
        } else {
            i += 1;
        }
    }
    out
}

/// Height above the higher of the two bases reached before meeting a strictly
/// higher sample on either side.
fn prominence(v: &[f64], p: usize) -> f64 {
    let h = v[p];
    let mut left_min = h;
    for i in (0..p).rev() {
        if v[i] > h {
            break;
        }
        left_min = left_min.min(v[i]);
    }
    let mut right_min = h;
    for &x in &v[p + 1..] {
        if x > h {
            break;
        }
        right_min = right_min.min(x);
    }
    h - left_min.max(right_min)
}

fn snap_to_raw(raw: &[f64], p: usize, half: usize) -> usize {
    let lo = p.saturating_sub(half);
    let hi = (p + half).min(raw.len() - 1);
    (lo..=hi)
        .max_by(|&a, &b| {
            raw[a]
                .total_cmp(&raw[b])
                .then_with(|| b.abs_diff(p).cmp(&a.abs_diff(p)))
                .then(b.cmp(&a))
        })
        .unwrap_or(p)
}
