use nalgebra::{Point3, Vector3};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use super::{SimError, UavState, WorldModel};
use crate::imaging::RgbImage;
use crate::pose::CameraIntrinsics;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RenderOptions {
    /// Compute the exact area of every region inside pixels that straddle
    /// a region edge. Falls back to supersampling when a rectangle corner
    /// is behind the camera or the camera is past the wall.
    pub exact_coverage: bool,
    /// Samples per axis taken inside straddling pixels when coverage is not
    /// computed exactly.
    pub supersample: usize,
}

impl Default for RenderOptions {
    fn default() -> Self {
        Self {
            exact_coverage: true,
            supersample: 8,
        }
    }
}

type Poly = Vec<[f64; 2]>;

/// Keeps the part of `poly` where `f(p) >= 0`, for affine `f`.
fn clip(poly: &Poly, f: impl Fn(&[f64; 2]) -> f64) -> Poly {
    let mut out = Vec::with_capacity(poly.len() + 2);
    for i in 0..poly.len() {
        let (p, q) = (poly[i], poly[(i + 1) % poly.len()]);
        let (fp, fq) = (f(&p), f(&q));
        if fp >= 0.0 {
            out.push(p);
        }
        if (fp >= 0.0) != (fq >= 0.0) {
            let t = fp / (fp - fq);
            out.push([p[0] + t * (q[0] - p[0]), p[1] + t * (q[1] - p[1])]);
        }
    }
    out
}

fn area(poly: &Poly) -> f64 {
    let mut a = 0.0;
    for i in 0..poly.len() {
        let (p, q) = (poly[i], poly[(i + 1) % poly.len()]);
        a += p[0] * q[1] - q[0] * p[1];
    }
    a.abs() / 2.0
}

/// Image-space description of the scene for exact pixel coverage.
struct Exact {
    /// `a u + b v + c > 0` where pixel rays hit the wall.
    visible: [f64; 3],
    /// Projected rectangles, counter-clockwise in pixel coordinates.
    quads: Vec<([[f64; 2]; 4], [f64; 3])>,
}

impl Exact {
    fn new(world: &WorldModel, cam: &Camera) -> Option<Self> {
        if world.depth(&cam.center) >= 0.0 {
            return None;
        }
        let n = world.normal;
        let (rn, dn, fwd) = (cam.right.dot(&n), cam.down.dot(&n), cam.forward.dot(&n));
        let k = &cam.k;
        let visible = [rn / k.fx, dn / k.fy, fwd - rn * k.cx / k.fx - dn * k.cy / k.fy];
        let mut quads = Vec::new();
        for (corners, region) in world.painted_rects() {
            let mut q = [[0.0; 2]; 4];
            for (slot, c) in q.iter_mut().zip(corners.iter()) {
                let d = c - cam.center;
                let z = d.dot(&cam.forward);
                if z <= 1e-9 {
                    return None;
                }
                *slot = [k.fx * d.dot(&cam.right) / z + k.cx, k.fy * d.dot(&cam.down) / z + k.cy];
            }
            let signed: f64 = (0..4).map(|i| q[i][0] * q[(i + 1) % 4][1] - q[(i + 1) % 4][0] * q[i][1]).sum();
            if signed < 0.0 {
                q.reverse();
            }
            quads.push((q, world.region_color(region).map(f64::from)));
        }
        Some(Self { visible, quads })
    }

    /// Area-weighted colour of the unit pixel centred on `(x, y)`.
    fn pixel(&self, world: &WorldModel, x: f64, y: f64) -> [f64; 3] {
        let square = vec![[x - 0.5, y - 0.5], [x + 0.5, y - 0.5], [x + 0.5, y + 0.5], [x - 0.5, y + 0.5]];
        let [a, b, c] = self.visible;
        let wall = clip(&square, |p| a * p[0] + b * p[1] + c);
        let wall_area = area(&wall);
        let bg = world.background_color.map(f64::from);
        let wall_rgb = world.wall_color.map(f64::from);
        let mut acc = [0.0; 3];
        let mut painted = 0.0;
        for (q, rgb) in &self.quads {
            let mut poly = wall.clone();
            for i in 0..4 {
                let (p0, p1) = (q[i], q[(i + 1) % 4]);
                poly = clip(&poly, |p| (p1[0] - p0[0]) * (p[1] - p0[1]) - (p1[1] - p0[1]) * (p[0] - p0[0]));
                if poly.is_empty() {
                    break;
                }
            }
            let share = area(&poly);
            painted += share;
            for ch in 0..3 {
                acc[ch] += share * rgb[ch];
            }
        }
        let plain = (wall_area - painted).max(0.0);
        for ch in 0..3 {
            acc[ch] += plain * wall_rgb[ch] + (1.0 - wall_area).max(0.0) * bg[ch];
        }
        acc
    }
}

struct Camera {
    center: Point3<f64>,
    // columns: world directions of the camera right, down and forward axes
    right: Vector3<f64>,
    down: Vector3<f64>,
    forward: Vector3<f64>,
    k: CameraIntrinsics<f64>,
}

impl Camera {
    fn region(&self, world: &WorldModel, x: f64, y: f64) -> usize {
        let dir = self.right * ((x - self.k.cx) / self.k.fx) + self.down * ((y - self.k.cy) / self.k.fy) + self.forward;
        let denom = dir.dot(&world.normal);
        if denom <= 0.0 {
            return 0;
        }
        let t = (world.window_center - self.center).dot(&world.normal) / denom;
        if t <= 0.0 {
            return 0;
        }
        world.region_at(&(self.center + dir * t))
    }
}

/// Noise-free-then-noisy render with default options.
pub fn render(
    world: &WorldModel,
    uav: &UavState,
    k: &CameraIntrinsics<f64>,
    width: usize,
    height: usize,
    seed: u64,
) -> Result<RgbImage, SimError> {
    render_with(world, uav, k, width, height, seed, &RenderOptions::default())
}

/// Ray casts every pixel against the wall plane. Pixels whose corners see
/// more than one region are box-filtered, exactly or with `supersample`²
/// samples; Gaussian noise, if configured, is drawn from one seeded stream per row.
pub fn render_with(
    world: &WorldModel,
    uav: &UavState,
    k: &CameraIntrinsics<f64>,
    width: usize,
    height: usize,
    seed: u64,
    opts: &RenderOptions,
) -> Result<RgbImage, SimError> {
    if world.depth(&uav.position) == 0.0 {
        return Err(SimError::CameraOnPlane);
    }
    let cam = Camera {
        center: uav.position,
        right: uav.right(),
        down: Vector3::new(0.0, 0.0, 1.0),
        forward: uav.forward(),
        k: *k,
    };
    let n = opts.supersample.max(1);
    let exact = if opts.exact_coverage { Exact::new(world, &cam) } else { None };

    // Regions at pixel corners, (width + 1) x (height + 1).
    let cw = width + 1;
    let mut corners = vec![0usize; cw * (height + 1)];
    for y in 0..=height {
        for x in 0..=width {
            corners[y * cw + x] = cam.region(world, x as f64 - 0.5, y as f64 - 0.5);
        }
    }

    let noise = (world.noise_sigma > 0.0)
        .then(|| Normal::new(0.0, world.noise_sigma).expect("finite positive sigma"));
    let mut data = Vec::with_capacity(width * height * 3);
    for y in 0..height {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(y as u64);
        for x in 0..width {
            let r = corners[y * cw + x];
            let uniform = [corners[y * cw + x + 1], corners[(y + 1) * cw + x], corners[(y + 1) * cw + x + 1]]
                .iter()
                .all(|&c| c == r);
            let rgb = if uniform {
                world.region_color(r).map(f64::from)
            } else if let Some(e) = &exact {
                e.pixel(world, x as f64, y as f64)
            } else {
                let mut acc = [0.0; 3];
                for sy in 0..n {
                    for sx in 0..n {
                        let px = x as f64 - 0.5 + (sx as f64 + 0.5) / n as f64;
                        let py = y as f64 - 0.5 + (sy as f64 + 0.5) / n as f64;
                        let c = world.region_color(cam.region(world, px, py));
                        for ch in 0..3 {
                            acc[ch] += c[ch] as f64;
                        }
                    }
                }
                acc.map(|a| a / (n * n) as f64)
            };
            for v in rgb {
                let noisy = match &noise {
                    Some(d) => v + d.sample(&mut rng),
                    None => v,
                };
                data.push(noisy.round().clamp(0.0, 255.0) as u8);
            }
        }
    }
    Ok(RgbImage::new(width, height, data)?)
}
