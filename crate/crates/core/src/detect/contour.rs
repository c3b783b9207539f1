use nalgebra::Point2;

use crate::imaging::EdgeMap;

/// Closed outer boundary of one 8-connected component, in tracing order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Contour {
    pub points: Vec<Point2<i32>>,
}

impl Contour {
    /// Closed polyline length, counting the edge back to the first point.
    pub fn perimeter(&self) -> f64 {
        let n = self.points.len();
        (0..n)
            .map(|i| {
                let a = self.points[i];
                let b = self.points[(i + 1) % n];
                (((a.x - b.x).pow(2) + (a.y - b.y).pow(2)) as f64).sqrt()
            })
            .sum()
    }
}

/// Clockwise neighbour offsets (y down), starting west.
const DIRS: [(i32, i32); 8] = [
    (-1, 0),
    (-1, -1),
    (0, -1),
    (1, -1),
    (1, 0),
    (1, 1),
    (0, 1),
    (-1, 1),
];

fn dir_index(dx: i32, dy: i32) -> usize {
    DIRS.iter()
        .position(|&d| d == (dx, dy))
        .expect("offset is an 8-neighbour")
}

/// Moore-neighbour trace of the component containing `start`, which must
/// be its first pixel in raster order. Stops with Jacob's criterion:
/// re-entering `start` from the same backtrack direction, or leaving it
/// again along the first step taken.
fn trace(map: &EdgeMap, start: (i32, i32)) -> Vec<Point2<i32>> {
    let set = |x: i32, y: i32| map.get_signed(x as isize, y as isize);
    // The west neighbour of a raster-first pixel is background.
    let start_back = 0usize;
    let mut p = start;
    let mut back = start_back;
    let mut out = vec![Point2::new(p.0, p.1)];
    let limit = 4 * map.width() * map.height() + 16;
    for _ in 0..limit {
        let mut next = None;
        for k in 1..=8 {
            let d = (back + k) % 8;
            let c = (p.0 + DIRS[d].0, p.1 + DIRS[d].1);
            if set(c.0, c.1) {
                let prev = (d + 7) % 8;
                let bp = (p.0 + DIRS[prev].0, p.1 + DIRS[prev].1);
                next = Some((c, dir_index(bp.0 - c.0, bp.1 - c.1)));
                break;
            }
        }
        let Some((c, b)) = next else {
            break;
        };
        if c == start && b == start_back {
            break;
        }
        // Thin components re-enter the start from another side; stop
        // before the first step would be repeated.
        if p == start && out.len() > 1 && c == (out[1].x, out[1].y) {
            break;
        }
        p = c;
        back = b;
        out.push(Point2::new(p.0, p.1));
    }
    if out.len() > 1 && out.last() == out.first() {
        out.pop();
    }
    out
}

/// External boundaries of all 8-connected components, ordered by each
/// component's first pixel in raster order. Components whose boundary has
/// fewer than three points are dropped.
pub fn find_contours(map: &EdgeMap) -> Vec<Contour> {
    let (w, h) = (map.width(), map.height());
    let mut labelled = vec![false; w * h];
    let mut contours = Vec::new();
    let mut stack = Vec::new();
    for y in 0..h {
        for x in 0..w {
            if !map.get(x, y) || labelled[y * w + x] {
                continue;
            }
            labelled[y * w + x] = true;
            stack.push((x, y));
            while let Some((cx, cy)) = stack.pop() {
                for (dx, dy) in DIRS {
                    let (nx, ny) = (cx as isize + dx as isize, cy as isize + dy as isize);
                    if map.get_signed(nx, ny) {
                        let i = ny as usize * w + nx as usize;
                        if !labelled[i] {
                            labelled[i] = true;
                            stack.push((nx as usize, ny as usize));
                        }
                    }
                }
            }
            let points = trace(map, (x as i32, y as i32));
            if points.len() >= 3 {
                contours.push(Contour { points });
            }
        }
    }
    contours
}

#[cfg(test)]
mod tests {
    use super::*;

    fn outline(x0: usize, y0: usize, w: usize, h: usize) -> impl Fn(usize, usize) -> bool {
        move |x, y| {
            let inside = x >= x0 && x < x0 + w && y >= y0 && y < y0 + h;
            let border = x == x0 || x == x0 + w - 1 || y == y0 || y == y0 + h - 1;
            inside && border
        }
    }

    #[test]
    fn empty_map() {
        assert!(find_contours(&EdgeMap::empty(10, 10)).is_empty());
    }

    #[test]
    fn hollow_rectangle_trace() {
        let map = EdgeMap::from_fn(30, 20, outline(3, 4, 20, 10));
        let contours = find_contours(&map);
        assert_eq!(contours.len(), 1);
        let n = contours[0].points.len() as i64;
        assert!((n - 56).abs() <= 4, "{n}");
        // consecutive points are 8-connected
        let pts = &contours[0].points;
        for i in 0..pts.len() {
            let (a, b) = (pts[i], pts[(i + 1) % pts.len()]);
            assert!((a.x - b.x).abs() <= 1 && (a.y - b.y).abs() <= 1);
        }
    }

    #[test]
    fn two_filled_squares() {
        let map = EdgeMap::from_fn(40, 20, |x, y| {
            (2..10).contains(&x) && (2..10).contains(&y) || (20..30).contains(&x) && (5..15).contains(&y)
        });
        let contours = find_contours(&map);
        assert_eq!(contours.len(), 2);
        // filled square boundary: 4 * (side - 1)
        assert_eq!(contours[0].points.len(), 28);
        assert_eq!(contours[1].points.len(), 36);
    }

    #[test]
    fn holes_are_ignored() {
        // Thick ring: outer 20x20, inner hole 10x10.
        let map = EdgeMap::from_fn(30, 30, |x, y| {
            let outer = (5..25).contains(&x) && (5..25).contains(&y);
            let hole = (10..20).contains(&x) && (10..20).contains(&y);
            outer && !hole
        });
        let contours = find_contours(&map);
        assert_eq!(contours.len(), 1);
        assert_eq!(contours[0].points.len(), 76);
    }

    #[test]
    fn single_pixels_are_dropped_and_diagonal_lines_traced() {
        let mut map = EdgeMap::empty(10, 10);
        map.set(1, 1, true);
        assert!(find_contours(&map).is_empty());
        let diag = EdgeMap::from_fn(10, 10, |x, y| x == y && x < 6);
        let c = find_contours(&diag);
        assert_eq!(c.len(), 1);
        // a one-pixel-wide line is walked out and back
        assert_eq!(c[0].points.len(), 10);
    }
}
