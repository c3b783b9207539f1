use super::LineSegment;
use crate::imaging::EdgeMap;

/// Integer Bresenham trace from `(x0, y0)` to `(x1, y1)`, both inclusive.
pub fn bresenham(x0: i64, y0: i64, x1: i64, y1: i64) -> Vec<(i64, i64)> {
    let dx = (x1 - x0).abs();
    let dy = -(y1 - y0).abs();
    let sx = if x0 < x1 { 1 } else { -1 };
    let sy = if y0 < y1 { 1 } else { -1 };
    let mut err = dx + dy;
    let (mut x, mut y) = (x0, y0);
    let mut out = Vec::with_capacity((dx.max(-dy) + 1) as usize);
    loop {
        out.push((x, y));
        if x == x1 && y == y1 {
            break;
        }
        let e2 = 2 * err;
        if e2 >= dy {
            err += dy;
            x += sx;
        }
        if e2 <= dx {
            err += dx;
            y += sy;
        }
    }
    out
}

/// Draws each segment with a square brush of side `thickness` centred on
/// the Bresenham trace. Pixels outside the map are clipped.
pub fn rasterize_segments(
    segments: &[LineSegment],
    width: usize,
    height: usize,
    thickness: usize,
) -> EdgeMap {
    let mut map = EdgeMap::empty(width, height);
    let t = thickness.max(1) as i64;
    let lo = -(t - 1) / 2;
    let hi = t / 2;
    for s in segments {
        let trace = bresenham(
            s.p0.x.round() as i64,
            s.p0.y.round() as i64,
            s.p1.x.round() as i64,
            s.p1.y.round() as i64,
        );
        for (x, y) in trace {
            for oy in lo..=hi {
                for ox in lo..=hi {
                    let (px, py) = (x + ox, y + oy);
                    if px >= 0 && py >= 0 && (px as usize) < width && (py as usize) < height {
                        map.set(px as usize, py as usize, true);
                    }
                }
            }
        }
    }
    map
}
