use nalgebra::Point2;

use super::DetectError;
use crate::imaging::RgbImage;

pub const BINS_PER_CHANNEL: usize = 8;
pub const HISTOGRAM_BINS: usize = BINS_PER_CHANNEL * BINS_PER_CHANNEL * BINS_PER_CHANNEL;

/// Normalized 8x8x8 RGB colour histogram.
#[derive(Clone, Debug, PartialEq)]
pub struct Histogram {
    bins: Vec<f64>,
}

impl Histogram {
    /// Normalizes raw counts. All-zero counts are rejected.
    pub fn from_counts(counts: &[f64]) -> Result<Self, DetectError> {
        if counts.len() != HISTOGRAM_BINS {
            return Err(DetectError::HistogramShape(counts.len()));
        }
        let total: f64 = counts.iter().sum();
        if !(total > 0.0) || counts.iter().any(|&c| c < 0.0 || !c.is_finite()) {
            return Err(DetectError::EmptyRegion);
        }
        Ok(Self {
            bins: counts.iter().map(|c| c / total).collect(),
        })
    }

    /// Wraps bins as given; [`bhattacharyya_distance`] checks normalization.
    pub fn from_bins(bins: Vec<f64>) -> Result<Self, DetectError> {
        if bins.len() != HISTOGRAM_BINS {
            return Err(DetectError::HistogramShape(bins.len()));
        }
        Ok(Self { bins })
    }

    pub fn bins(&self) -> &[f64] {
        &self.bins
    }

    pub fn bin_index(rgb: [u8; 3]) -> usize {
        let q = |v: u8| (v as usize * BINS_PER_CHANNEL) >> 8;
        (q(rgb[0]) * BINS_PER_CHANNEL + q(rgb[1])) * BINS_PER_CHANNEL + q(rgb[2])
    }

    fn is_normalized(&self) -> bool {
        let sum: f64 = self.bins.iter().sum();
        (sum - 1.0).abs() <= 1e-6 && self.bins.iter().all(|&b| b >= 0.0)
    }
}

fn on_segment(p: &Point2<f64>, a: &Point2<f64>, b: &Point2<f64>) -> bool {
    let ab = b - a;
    let ap = p - a;
    let cross = ab.x * ap.y - ab.y * ap.x;
    if cross.abs() > 1e-9 * (1.0 + ab.norm()) {
        return false;
    }
    let t = ap.dot(&ab);
    t >= 0.0 && t <= ab.norm_squared()
}

/// Crossing-number test; points on the boundary count as outside.
pub fn strictly_inside(p: &Point2<f64>, poly: &[Point2<f64>]) -> bool {
    let n = poly.len();
    let mut inside = false;
    for i in 0..n {
        let (a, b) = (poly[i], poly[(i + 1) % n]);
        if on_segment(p, &a, &b) {
            return false;
        }
        if (a.y > p.y) != (b.y > p.y) {
            let x = a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y);
            if p.x < x {
                inside = !inside;
            }
        }
    }
    inside
}

/// Colour histogram of the pixels whose centres lie strictly inside the
/// quadrilateral.
pub fn region_histogram(img: &RgbImage, corners: &[Point2<f64>; 4]) -> Result<Histogram, DetectError> {
    let min_x = corners.iter().map(|p| p.x).fold(f64::INFINITY, f64::min);
    let max_x = corners.iter().map(|p| p.x).fold(f64::NEG_INFINITY, f64::max);
    let min_y = corners.iter().map(|p| p.y).fold(f64::INFINITY, f64::min);
    let max_y = corners.iter().map(|p| p.y).fold(f64::NEG_INFINITY, f64::max);
    let x0 = min_x.floor().max(0.0) as usize;
    let y0 = min_y.floor().max(0.0) as usize;
    let x1 = (max_x.ceil() as isize).min(img.width() as isize - 1);
    let y1 = (max_y.ceil() as isize).min(img.height() as isize - 1);
    let mut counts = vec![0.0; HISTOGRAM_BINS];
    if x1 >= 0 && y1 >= 0 {
        for y in y0..=y1 as usize {
            for x in x0..=x1 as usize {
                if strictly_inside(&Point2::new(x as f64, y as f64), corners) {
                    counts[Histogram::bin_index(img.get(x, y))] += 1.0;
                }
            }
        }
    }
    Histogram::from_counts(&counts)
}

/// `sqrt(1 - sum_i sqrt(p_i q_i))`, clamped to `[0, 1]`.
pub fn bhattacharyya_distance(p: &Histogram, q: &Histogram) -> Result<f64, DetectError> {
    if !p.is_normalized() || !q.is_normalized() {
        return Err(DetectError::NotNormalized);
    }
    let bc: f64 = p.bins.iter().zip(&q.bins).map(|(a, b)| (a * b).sqrt()).sum();
    Ok((1.0 - bc).clamp(0.0, 1.0).sqrt())
}
