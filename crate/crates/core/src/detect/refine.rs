//! Sub-pixel corner refinement for detected quadrilaterals.
//!
//! Each side is re-measured from the grayscale frame: across the side, a
//! short intensity profile is normalized between its two plateaus and its
//! integral gives the step position (exact for a box-filtered straight
//! edge). The step positions are fitted with a line per side, and
//! adjacent lines are intersected.

use nalgebra::{Point2, Vector2};

use crate::imaging::GrayImage;

/// Half-width of the search across each side for the strongest step.
const SEARCH: i64 = 20;
/// Half-width of the window integrated around that step.
const BAND: i64 = 5;
/// Fraction of each side skipped next to its corners.
const END_MARGIN: f64 = 0.15;
const MIN_CONTRAST: f64 = 20.0;
const MIN_SAMPLES: usize = 5;
/// Samples further than this from the first line fit are dropped.
const OUTLIER_PX: f64 = 1.0;
/// Largest corner displacement accepted from refinement: the larger of a
/// fixed pixel count and a fraction of the mean side length.
const MAX_SHIFT_PX: f64 = 20.0;
const MAX_SHIFT_FRAC: f64 = 0.1;

/// Line `n . p = c` with unit normal `n`.
#[derive(Clone, Copy, Debug)]
struct Line {
    n: Vector2<f64>,
    c: f64,
}

impl Line {
    fn through(a: &Point2<f64>, b: &Point2<f64>) -> Option<Self> {
        let d = b - a;
        let len = d.norm();
        if len == 0.0 {
            return None;
        }
        let n = Vector2::new(-d.y, d.x) / len;
        Some(Self { n, c: n.dot(&a.coords) })
    }

    fn intersect(&self, o: &Line) -> Option<Point2<f64>> {
        let det = self.n.x * o.n.y - self.n.y * o.n.x;
        if det.abs() < 1e-9 {
            return None;
        }
        let x = (self.c * o.n.y - self.n.y * o.c) / det;
        let y = (self.n.x * o.c - self.c * o.n.x) / det;
        Some(Point2::new(x, y))
    }
}

/// Step position along a profile of pixel values sampled at integer
/// offsets `first..=first+len-1`.
fn step_position(values: &[f64], first: i64) -> Option<f64> {
    let n = values.len();
    if n < 4 {
        return None;
    }
    let lo = (values[0] + values[1]) / 2.0;
    let hi = (values[n - 1] + values[n - 2]) / 2.0;
    if (hi - lo).abs() < MIN_CONTRAST {
        return None;
    }
    let sum: f64 = values
        .iter()
        .map(|v| ((v - lo) / (hi - lo)).clamp(0.0, 1.0))
        .sum();
    let last = first + n as i64 - 1;
    Some(last as f64 + 0.5 - sum)
}

/// Least squares `minor = m * major + q`.
fn fit_line(samples: &[(f64, f64)]) -> Option<(f64, f64)> {
    let n = samples.len() as f64;
    let mx = samples.iter().map(|s| s.0).sum::<f64>() / n;
    let my = samples.iter().map(|s| s.1).sum::<f64>() / n;
    let sxx: f64 = samples.iter().map(|s| (s.0 - mx).powi(2)).sum();
    let sxy: f64 = samples.iter().map(|s| (s.0 - mx) * (s.1 - my)).sum();
    if sxx == 0.0 {
        return None;
    }
    let m = sxy / sxx;
    Some((m, my - m * mx))
}

/// Measures one side `a`-`b` and returns its fitted line.
fn fit_side(img: &GrayImage, a: &Point2<f64>, b: &Point2<f64>) -> Option<Line> {
    let d = b - a;
    let horizontal = d.x.abs() >= d.y.abs();
    // Parametrize along the dominant axis: minor = slope * major + offset.
    let (a_maj, a_min, b_maj, b_min) = if horizontal {
        (a.x, a.y, b.x, b.y)
    } else {
        (a.y, a.x, b.y, b.x)
    };
    let span = b_maj - a_maj;
    if span.abs() < 1.0 {
        return None;
    }
    let slope = (b_min - a_min) / span;
    let (lo, hi) = if span > 0.0 { (a_maj, b_maj) } else { (b_maj, a_maj) };
    let margin = END_MARGIN * (hi - lo) + BAND as f64;
    let start = (lo + margin).ceil() as i64;
    let end = (hi - margin).floor() as i64;

    let (w, h) = (img.width() as i64, img.height() as i64);
    let pixel = |major: i64, minor: i64| {
        let (x, y) = if horizontal { (major, minor) } else { (minor, major) };
        (x >= 0 && y >= 0 && x < w && y < h).then(|| img.get(x as usize, y as usize) as f64)
    };
    let mut samples: Vec<(f64, f64)> = Vec::new();
    for major in start..=end {
        let centre = (a_min + slope * (major as f64 - a_maj)).round() as i64;
        // strongest step between consecutive pixels within the search band
        let mut best: Option<(f64, i64)> = None;
        for minor in centre - SEARCH..centre + SEARCH {
            if let (Some(p), Some(q)) = (pixel(major, minor), pixel(major, minor + 1)) {
                let g = (q - p).abs();
                if best.is_none_or(|(bg, _)| g > bg) {
                    best = Some((g, minor));
                }
            }
        }
        let Some((_, step)) = best else {
            continue;
        };
        let first = step - BAND + 1;
        let values: Option<Vec<f64>> = (first..=step + BAND).map(|minor| pixel(major, minor)).collect();
        if let Some(pos) = values.and_then(|v| step_position(&v, first)) {
            samples.push((major as f64, pos));
        }
    }
    if samples.len() < MIN_SAMPLES {
        return None;
    }
    let (m, q) = fit_line(&samples)?;
    let inliers: Vec<(f64, f64)> = samples
        .into_iter()
        .filter(|s| (s.1 - (m * s.0 + q)).abs() <= OUTLIER_PX)
        .collect();
    if inliers.len() < MIN_SAMPLES {
        return None;
    }
    let (m, q) = fit_line(&inliers)?;
    let (p0, p1) = if horizontal {
        (Point2::new(0.0, q), Point2::new(1.0, m + q))
    } else {
        (Point2::new(q, 0.0), Point2::new(m + q, 1.0))
    };
    Line::through(&p0, &p1)
}

fn refine_once(img: &GrayImage, corners: &[Point2<f64>; 4]) -> Option<[Point2<f64>; 4]> {
    let mut lines = [None; 4];
    for (i, line) in lines.iter_mut().enumerate() {
        *line = Some(fit_side(img, &corners[i], &corners[(i + 1) % 4])?);
    }
    let mut out = [Point2::origin(); 4];
    for (i, corner) in out.iter_mut().enumerate() {
        let prev = lines[(i + 3) % 4]?;
        let next = lines[i]?;
        *corner = prev.intersect(&next)?;
    }
    Some(out)
}

/// Sub-pixel estimate of the four corners. Returns `None` when a side has
/// too little contrast or the refined corners move implausibly far.
pub fn refine_corners(img: &GrayImage, corners: &[Point2<f64>; 4]) -> Option<[Point2<f64>; 4]> {
    let first = refine_once(img, corners)?;
    let second = refine_once(img, &first).unwrap_or(first);
    let mean_side = (0..4).map(|i| (corners[(i + 1) % 4] - corners[i]).norm()).sum::<f64>() / 4.0;
    let limit = MAX_SHIFT_PX.max(MAX_SHIFT_FRAC * mean_side);
    let moved = corners
        .iter()
        .zip(second.iter())
        .all(|(a, b)| (a - b).norm() <= limit);
    moved.then_some(second)
}
