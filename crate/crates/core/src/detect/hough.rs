use nalgebra::Point2;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::LineSegment;
use crate::imaging::EdgeMap;

/// Accumulator and line-walk settings for [`hough_lines_p`].
#[derive(Clone, Debug, PartialEq)]
pub struct HoughParams {
    /// Distance resolution of the accumulator, pixels.
    pub rho_res: f64,
    /// Angle resolution of the accumulator, radians.
    pub theta_res: f64,
    /// Accumulator count at which a line is extracted.
    pub votes: usize,
    pub min_line_length: f64,
    pub max_line_gap: usize,
    pub seed: u64,
}

impl Default for HoughParams {
    fn default() -> Self {
        Self {
            rho_res: 1.0,
            theta_res: 1f64.to_radians(),
            votes: 30,
            min_line_length: 30.0,
            max_line_gap: 10,
            seed: 0,
        }
    }
}

struct Accumulator {
    num_rho: usize,
    cos: Vec<f64>,
    sin: Vec<f64>,
    counts: Vec<i32>,
}

impl Accumulator {
    fn new(width: usize, height: usize, params: &HoughParams) -> Self {
        let num_angle = ((std::f64::consts::PI / params.theta_res).round() as usize).max(1);
        let num_rho = (((width + height) * 2 + 1) as f64 / params.rho_res).round() as usize;
        let (cos, sin) = (0..num_angle)
            .map(|n| {
                let t = n as f64 * params.theta_res;
                (t.cos() / params.rho_res, t.sin() / params.rho_res)
            })
            .unzip();
        Self {
            num_rho,
            cos,
            sin,
            counts: vec![0; num_angle * num_rho],
        }
    }

    #[inline]
    fn bin(&self, n: usize, x: usize, y: usize) -> usize {
        let r = (x as f64 * self.cos[n] + y as f64 * self.sin[n]).round() as isize;
        let r = r + (self.num_rho as isize - 1) / 2;
        n * self.num_rho + r as usize
    }

    /// Adds one vote per angle and returns the largest updated count.
    fn vote(&mut self, x: usize, y: usize) -> i32 {
        let mut best = 0;
        for n in 0..self.cos.len() {
            let b = self.bin(n, x, y);
            self.counts[b] += 1;
            best = best.max(self.counts[b]);
        }
        best
    }

    fn unvote(&mut self, x: usize, y: usize) {
        for n in 0..self.cos.len() {
            let b = self.bin(n, x, y);
            self.counts[b] -= 1;
        }
    }
}

/// Walks from `(x0, y0)` along `(dx, dy)` (one axis stepping by exactly
/// one pixel) and yields pixel coordinates until the image border.
fn walk(
    x0: f64,
    y0: f64,
    dx: f64,
    dy: f64,
    width: usize,
    height: usize,
) -> impl Iterator<Item = (usize, usize)> {
    (0..).map_while(move |k| {
        let x = (x0 + k as f64 * dx + 0.5).floor();
        let y = (y0 + k as f64 * dy + 0.5).floor();
        if x < 0.0 || y < 0.0 || x >= width as f64 || y >= height as f64 {
            None
        } else {
            Some((x as usize, y as usize))
        }
    })
}

/// Unit step along the line with normal angle `theta`, normalized so the
/// dominant axis advances by exactly one pixel.
fn direction(theta: f64) -> (f64, f64) {
    let (a, b) = (-theta.sin(), theta.cos());
    if a.abs() > b.abs() {
        (a.signum(), b / a.abs())
    } else {
        (a / b.abs(), b.signum())
    }
}

/// Pixels of the walk corridor at `(px, py)`: the pixel itself and its
/// neighbours across the walk direction.
fn corridor(px: usize, py: usize, (dx, _dy): (f64, f64), w: usize, h: usize) -> impl Iterator<Item = usize> {
    let across_y = dx.abs() == 1.0;
    (-1isize..=1).filter_map(move |o| {
        let (x, y) = if across_y {
            (px as isize, py as isize + o)
        } else {
            (px as isize + o, py as isize)
        };
        (x >= 0 && y >= 0 && (x as usize) < w && (y as usize) < h).then(|| y as usize * w + x as usize)
    })
}

/// Last corridor position reached in each direction from `start` before a
/// run of more than `max_gap` empty positions.
fn walk_ends(
    mask: &[bool],
    w: usize,
    h: usize,
    start: (usize, usize),
    (dx, dy): (f64, f64),
    max_gap: usize,
) -> [(usize, usize); 2] {
    let mut ends = [start; 2];
    for (k, end) in ends.iter_mut().enumerate() {
        let s = if k == 0 { 1.0 } else { -1.0 };
        let mut gap = 0;
        for (px, py) in walk(start.0 as f64, start.1 as f64, s * dx, s * dy, w, h) {
            if corridor(px, py, (dx, dy), w, h).any(|i| mask[i]) {
                gap = 0;
                *end = (px, py);
            } else {
                gap += 1;
                if gap > max_gap {
                    break;
                }
            }
        }
    }
    ends
}

/// Progressive probabilistic Hough transform.
///
/// Edge pixels are visited in a seeded random order. Each pixel votes in
/// the `(rho, theta)` accumulator; once bins through it reach `votes`, the
/// line of each such bin is walked in both directions through a corridor
/// three pixels wide, tolerating gaps of up to `max_line_gap` empty
/// positions, and the longest walk is kept. A walk
/// of at least `min_line_length` becomes a segment: its pixels leave the
/// pool and their votes are withdrawn. Shorter walks claim nothing.
pub fn hough_lines_p(map: &EdgeMap, params: &HoughParams) -> Vec<LineSegment> {
    let (w, h) = (map.width(), map.height());
    let mut points: Vec<(usize, usize)> = map.iter_set().collect();
    if points.is_empty() {
        return Vec::new();
    }
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    points.shuffle(&mut rng);

    let mut acc = Accumulator::new(w, h, params);
    let mut mask: Vec<bool> = (0..w * h).map(|i| map.get(i % w, i / w)).collect();
    let mut voted = vec![false; w * h];
    let mut lines = Vec::new();

    for &(x, y) in &points {
        if !mask[y * w + x] {
            continue;
        }
        let best = acc.vote(x, y);
        voted[y * w + x] = true;
        if (best as usize) < params.votes {
            continue;
        }

        // Every bin through this pixel that reached the threshold is a
        // candidate direction; the longest walk wins.
        let mut chosen: Option<([(usize, usize); 2], (f64, f64), f64)> = None;
        for n in 0..acc.cos.len() {
            if (acc.counts[acc.bin(n, x, y)] as usize) < params.votes {
                continue;
            }
            let dir = direction(n as f64 * params.theta_res);
            let ends = walk_ends(&mask, w, h, (x, y), dir, params.max_line_gap);
            let len = ((ends[0].0 as f64 - ends[1].0 as f64).powi(2)
                + (ends[0].1 as f64 - ends[1].1 as f64).powi(2))
            .sqrt();
            if chosen.as_ref().is_none_or(|c| len > c.2) {
                chosen = Some((ends, dir, len));
            }
        }
        let Some((ends, (dx, dy), len)) = chosen else {
            continue;
        };
        if len < params.min_line_length || ends[0] == ends[1] {
            continue;
        }

        for (k, end) in ends.iter().enumerate() {
            let s = if k == 0 { 1.0 } else { -1.0 };
            for (px, py) in walk(x as f64, y as f64, s * dx, s * dy, w, h) {
                for i in corridor(px, py, (dx, dy), w, h) {
                    if mask[i] {
                        if voted[i] {
                            acc.unvote(i % w, i / w);
                            voted[i] = false;
                        }
                        mask[i] = false;
                    }
                }
                if (px, py) == *end {
                    break;
                }
            }
        }

        let p0 = Point2::new(ends[1].0 as f64, ends[1].1 as f64);
        let p1 = Point2::new(ends[0].0 as f64, ends[0].1 as f64);
        if let Ok(seg) = LineSegment::new(p0, p1) {
            lines.push(seg);
        }
    }
    lines
}
