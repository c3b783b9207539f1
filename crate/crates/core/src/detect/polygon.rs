use nalgebra::Point2;

use super::contour::Contour;
use super::{DetectError, DetectParams, WindowCandidate};

/// Closed polygon; the last vertex connects back to the first.
#[derive(Clone, Debug, PartialEq)]
pub struct Polygon {
    pub vertices: Vec<Point2<f64>>,
}

impl Polygon {
    pub fn new(mut vertices: Vec<Point2<f64>>) -> Result<Self, DetectError> {
        vertices.dedup();
        while vertices.len() > 1 && vertices.first() == vertices.last() {
            vertices.pop();
        }
        if vertices.len() < 3 {
            return Err(DetectError::DegeneratePolygon(vertices.len()));
        }
        Ok(Self { vertices })
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }
}

fn cross(o: &Point2<f64>, a: &Point2<f64>, b: &Point2<f64>) -> f64 {
    (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x)
}

/// Distance from `p` to the closed segment `a`-`b`.
pub fn point_segment_distance(p: &Point2<f64>, a: &Point2<f64>, b: &Point2<f64>) -> f64 {
    let ab = b - a;
    let len2 = ab.norm_squared();
    if len2 == 0.0 {
        return (p - a).norm();
    }
    let t = ((p - a).dot(&ab) / len2).clamp(0.0, 1.0);
    (p - (a + ab * t)).norm()
}

/// Shoelace area (absolute value).
pub fn polygon_area(p: &Polygon) -> f64 {
    signed_area(&p.vertices).abs()
}

pub(crate) fn signed_area(v: &[Point2<f64>]) -> f64 {
    let n = v.len();
    let twice: f64 = (0..n)
        .map(|i| {
            let (a, b) = (v[i], v[(i + 1) % n]);
            a.x * b.y - b.x * a.y
        })
        .sum();
    twice / 2.0
}

fn hull_points(pts: &[Point2<f64>]) -> Vec<Point2<f64>> {
    let mut pts: Vec<Point2<f64>> = pts.to_vec();
    pts.sort_by(|a, b| a.x.total_cmp(&b.x).then(a.y.total_cmp(&b.y)));
    pts.dedup();
    if pts.len() < 3 {
        return pts;
    }
    let mut lower: Vec<Point2<f64>> = Vec::new();
    for p in &pts {
        while lower.len() >= 2 && cross(&lower[lower.len() - 2], &lower[lower.len() - 1], p) <= 0.0 {
            lower.pop();
        }
        lower.push(*p);
    }
    let mut upper: Vec<Point2<f64>> = Vec::new();
    for p in pts.iter().rev() {
        while upper.len() >= 2 && cross(&upper[upper.len() - 2], &upper[upper.len() - 1], p) <= 0.0 {
            upper.pop();
        }
        upper.push(*p);
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    lower
}

/// Andrew's monotone chain; collinear points are dropped.
pub fn convex_hull(p: &Polygon) -> Polygon {
    let hull = hull_points(&p.vertices);
    // A hull of fewer than three points only arises from collinear input,
    // which polygon construction already rules out for non-zero area.
    Polygon { vertices: hull }
}

/// Douglas-Peucker simplification of the open chain `pts[lo..=hi]`,
/// marking kept indices.
fn rdp_chain(pts: &[Point2<f64>], lo: usize, hi: usize, eps: f64, keep: &mut [bool]) {
    let mut stack = vec![(lo, hi)];
    while let Some((a, b)) = stack.pop() {
        if b <= a + 1 {
            continue;
        }
        let (mut worst, mut dmax) = (a, -1.0);
        for (i, p) in pts.iter().enumerate().take(b).skip(a + 1) {
            let d = point_segment_distance(p, &pts[a], &pts[b]);
            if d > dmax {
                dmax = d;
                worst = i;
            }
        }
        if dmax > eps {
            keep[worst] = true;
            stack.push((a, worst));
            stack.push((worst, b));
        }
    }
}

/// Ramer-Douglas-Peucker on a closed contour. The contour is split at its
/// two mutually farthest points and each half is simplified separately.
pub fn approx_polygon(c: &Contour, epsilon: f64) -> Result<Polygon, DetectError> {
    let n = c.points.len();
    if n < 3 {
        return Err(DetectError::ContourTooShort(n));
    }
    if !(epsilon > 0.0) {
        return Err(DetectError::Epsilon(epsilon));
    }
    let pts: Vec<Point2<f64>> = c
        .points
        .iter()
        .map(|p| Point2::new(p.x as f64, p.y as f64))
        .collect();

    // The farthest pair lies on the hull.
    let hull = hull_points(&pts);
    let (mut fa, mut fb, mut best) = (pts[0], pts[0], -1.0);
    for (i, a) in hull.iter().enumerate() {
        for b in hull.iter().skip(i + 1) {
            let d = (a - b).norm_squared();
            if d > best {
                best = d;
                fa = *a;
                fb = *b;
            }
        }
    }
    let ia = pts.iter().position(|p| *p == fa).expect("hull point is a contour point");
    let ib = pts.iter().position(|p| *p == fb).expect("hull point is a contour point");
    let (i, j) = (ia.min(ib), ia.max(ib));

    // Rotate so the split points sit at 0 and m, then close the loop.
    let mut ring: Vec<Point2<f64>> = pts[i..].iter().chain(pts[..i].iter()).copied().collect();
    let m = j - i;
    ring.push(ring[0]);
    let mut keep = vec![false; ring.len()];
    keep[0] = true;
    keep[m] = true;
    rdp_chain(&ring, 0, m, epsilon, &mut keep);
    rdp_chain(&ring, m, ring.len() - 1, epsilon, &mut keep);
    let vertices: Vec<Point2<f64>> = ring[..ring.len() - 1]
        .iter()
        .zip(&keep)
        .filter(|(_, &k)| k)
        .map(|(p, _)| *p)
        .collect();
    Polygon::new(vertices)
}

fn line_intersection(
    a0: &Point2<f64>,
    a1: &Point2<f64>,
    b0: &Point2<f64>,
    b1: &Point2<f64>,
) -> Option<Point2<f64>> {
    let (da, db) = (a1 - a0, b1 - b0);
    let den = da.x * db.y - da.y * db.x;
    if den.abs() < 1e-9 {
        return None;
    }
    let t = ((b0 - a0).x * db.y - (b0 - a0).y * db.x) / den;
    Some(a0 + da * t)
}

/// Replaces edges shorter than `min_len` by the intersection of their two
/// neighbouring edges, shortest first, while more than four vertices
/// remain. Undoes corners that a polygon approximation cut off.
pub fn collapse_short_edges(p: &Polygon, min_len: f64) -> Polygon {
    let mut v = p.vertices.clone();
    while v.len() > 4 {
        let n = v.len();
        let (i, len) = (0..n)
            .map(|i| (i, (v[(i + 1) % n] - v[i]).norm()))
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .expect("non-empty polygon");
        if len >= min_len {
            break;
        }
        let j = (i + 1) % n;
        let Some(x) = line_intersection(&v[(i + n - 1) % n], &v[i], &v[j], &v[(j + 1) % n]) else {
            break;
        };
        v[i] = x;
        v.remove(j);
    }
    Polygon { vertices: v }
}

/// Orders four corners clockwise on screen (y down), starting from the
/// corner with the smallest `x + y`.
pub fn order_corners(corners: &[Point2<f64>; 4]) -> [Point2<f64>; 4] {
    let cx = corners.iter().map(|p| p.x).sum::<f64>() / 4.0;
    let cy = corners.iter().map(|p| p.y).sum::<f64>() / 4.0;
    let mut v = *corners;
    v.sort_by(|a, b| {
        let ta = (a.y - cy).atan2(a.x - cx);
        let tb = (b.y - cy).atan2(b.x - cx);
        ta.total_cmp(&tb)
    });
    let start = (0..4)
        .min_by(|&i, &j| (v[i].x + v[i].y).total_cmp(&(v[j].x + v[j].y)))
        .expect("four corners");
    [v[start], v[(start + 1) % 4], v[(start + 2) % 4], v[(start + 3) % 4]]
}

/// Interior angles in degrees, one per vertex.
pub fn interior_angles(v: &[Point2<f64>]) -> Vec<f64> {
    let n = v.len();
    (0..n)
        .map(|i| {
            let prev = v[(i + n - 1) % n] - v[i];
            let next = v[(i + 1) % n] - v[i];
            let c = prev.dot(&next) / (prev.norm() * next.norm());
            c.clamp(-1.0, 1.0).acos().to_degrees()
        })
        .collect()
}

/// Geometric metrics of a quadrilateral, computed from its corners.
pub(crate) fn candidate_from_corners(corners: &[Point2<f64>; 4]) -> Option<WindowCandidate> {
    let corners = order_corners(corners);
    let poly = Polygon::new(corners.to_vec()).ok()?;
    if poly.len() != 4 {
        return None;
    }
    let area = polygon_area(&poly);
    if !(area > 0.0) {
        return None;
    }
    let hull_area = polygon_area(&convex_hull(&poly));
    let (min_x, max_x) = minmax(corners.iter().map(|p| p.x));
    let (min_y, max_y) = minmax(corners.iter().map(|p| p.y));
    let (bw, bh) = (max_x - min_x, max_y - min_y);
    if !(bh > 0.0 && bw > 0.0) {
        return None;
    }
    let angles = interior_angles(&corners);
    let (min_angle, max_angle) = minmax(angles.iter().copied());
    let centroid = Point2::new(
        corners.iter().map(|p| p.x).sum::<f64>() / 4.0,
        corners.iter().map(|p| p.y).sum::<f64>() / 4.0,
    );
    Some(WindowCandidate {
        corners,
        centroid,
        area,
        aspect_ratio: bw / bh,
        hull_ratio: area / hull_area,
        min_angle_deg: min_angle,
        max_angle_deg: max_angle,
        hist_distance: None,
    })
}

fn minmax(it: impl Iterator<Item = f64>) -> (f64, f64) {
    it.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)))
}

/// The five window constraints: four corners (implied by the candidate
/// type), area range, bounding-box aspect range, convexity ratio and
/// near-right interior angles.
pub fn satisfies_constraints(c: &WindowCandidate, params: &DetectParams) -> bool {
    let tol = params.angle_tolerance_deg;
    c.area >= params.area_min
        && c.area <= params.area_max
        && c.aspect_ratio >= params.aspect_min
        && c.aspect_ratio <= params.aspect_max
        && c.hull_ratio >= params.hull_ratio_min
        && (c.min_angle_deg - 90.0).abs() <= tol
        && (c.max_angle_deg - 90.0).abs() <= tol
}

/// Keeps four-vertex polygons that pass every constraint.
pub fn filter_candidates(polys: &[Polygon], params: &DetectParams) -> Vec<WindowCandidate> {
    polys
        .iter()
        .filter(|p| p.len() == 4)
        .filter_map(|p| candidate_from_corners(&[p.vertices[0], p.vertices[1], p.vertices[2], p.vertices[3]]))
        .filter(|c| satisfies_constraints(c, params))
        .collect()
}
