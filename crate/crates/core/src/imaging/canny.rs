use super::{EdgeMap, GrayImage, ImagingError};

/// 3x3 Sobel derivatives with edge replication, returned as `(gx, gy)`
/// planes in row-major order.
pub fn sobel(img: &GrayImage) -> (Vec<f64>, Vec<f64>) {
    let (w, h) = (img.width() as isize, img.height() as isize);
    let mut gx = Vec::with_capacity((w * h) as usize);
    let mut gy = Vec::with_capacity((w * h) as usize);
    let p = |x: isize, y: isize| img.get_clamped(x, y) as f64;
    for y in 0..h {
        for x in 0..w {
            let dx = (p(x + 1, y - 1) + 2.0 * p(x + 1, y) + p(x + 1, y + 1))
                - (p(x - 1, y - 1) + 2.0 * p(x - 1, y) + p(x - 1, y + 1));
            let dy = (p(x - 1, y + 1) + 2.0 * p(x, y + 1) + p(x + 1, y + 1))
                - (p(x - 1, y - 1) + 2.0 * p(x, y - 1) + p(x + 1, y - 1));
            gx.push(dx);
            gy.push(dy);
        }
    }
    (gx, gy)
}

/// Canny edge detector: Sobel gradients, 4-direction non-maximum
/// suppression, then hysteresis by flood fill from pixels at or above
/// `high_threshold` through 8-connected pixels at or above `low_threshold`.
pub fn canny(
    img: &GrayImage,
    low_threshold: f64,
    high_threshold: f64,
) -> Result<EdgeMap, ImagingError> {
    if !(low_threshold >= 0.0 && low_threshold < high_threshold) {
        return Err(ImagingError::Thresholds {
            low: low_threshold,
            high: high_threshold,
        });
    }
    let (w, h) = (img.width(), img.height());
    let (gx, gy) = sobel(img);
    let mag: Vec<f64> = gx.iter().zip(&gy).map(|(a, b)| a.hypot(*b)).collect();
    let mag_at = |x: isize, y: isize| -> f64 {
        if x < 0 || y < 0 || x >= w as isize || y >= h as isize {
            0.0
        } else {
            mag[y as usize * w + x as usize]
        }
    };

    // Non-maximum suppression. A tie with the forward neighbour keeps the
    // first pixel so a symmetric ridge thins to a single line.
    let mut nms = vec![0.0; w * h];
    for y in 0..h {
        for x in 0..w {
            let i = y * w + x;
            let m = mag[i];
            if m == 0.0 {
                continue;
            }
            let mut angle = gy[i].atan2(gx[i]).to_degrees();
            if angle < 0.0 {
                angle += 180.0;
            }
            let (dx, dy) = if !(22.5..157.5).contains(&angle) {
                (1, 0)
            } else if angle < 67.5 {
                (1, 1)
            } else if angle < 112.5 {
                (0, 1)
            } else {
                (-1, 1)
            };
            let (xi, yi) = (x as isize, y as isize);
            let before = mag_at(xi - dx, yi - dy);
            let after = mag_at(xi + dx, yi + dy);
            if m > before && m >= after {
                nms[i] = m;
            }
        }
    }

    let mut out = EdgeMap::empty(w, h);
    let mut stack: Vec<usize> = Vec::new();
    for (i, &m) in nms.iter().enumerate() {
        if m >= high_threshold {
            out.set(i % w, i / w, true);
            stack.push(i);
        }
    }
    while let Some(i) = stack.pop() {
        let (x, y) = ((i % w) as isize, (i / w) as isize);
        for ny in y - 1..=y + 1 {
            for nx in x - 1..=x + 1 {
                if nx < 0 || ny < 0 || nx >= w as isize || ny >= h as isize {
                    continue;
                }
                let (ux, uy) = (nx as usize, ny as usize);
                let j = uy * w + ux;
                if !out.get(ux, uy) && nms[j] >= low_threshold && nms[j] > 0.0 {
                    out.set(ux, uy, true);
                    stack.push(j);
                }
            }
        }
    }
    Ok(out)
}
