//! Synthetic test world: one wall plane with a window opening and decoy
//! rectangles, a ray-cast pinhole camera and a kinematic vehicle.
//!
//! World coordinates are north-east-down. The vehicle camera looks along
//! the body forward axis, which is horizontal and rotated by `yaw` from
//! north towards east.

mod render;

pub use render::{render, render_with, RenderOptions};

use nalgebra::{Matrix3, Point2, Point3, Vector3};
use thiserror::Error;

use crate::detect::{region_histogram, DetectError, Histogram};
use crate::imaging::ImagingError;
use crate::pose::{project_point, wrap_angle, CameraIntrinsics, CameraPose, WindowGeometry};

#[derive(Debug, Error, PartialEq)]
pub enum SimError {
    #[error("invalid world: {0}")]
    World(&'static str),
    #[error("camera lies on the wall plane")]
    CameraOnPlane,
    #[error("command {axis} = {value} exceeds limit {limit}")]
    CommandOutOfBounds {
        axis: &'static str,
        value: f64,
        limit: f64,
    },
    #[error("window is not visible from the reference viewpoint")]
    Reference,
    #[error(transparent)]
    Imaging(#[from] ImagingError),
    #[error(transparent)]
    Detect(#[from] DetectError),
}

/// Axis-aligned rectangle on the wall, in wall-plane coordinates relative
/// to the window centre (u right, v down).
#[derive(Clone, Copy, Debug, PartialEq)]
struct PlaneRect {
    u: f64,
    v: f64,
    half_w: f64,
    half_h: f64,
}

impl PlaneRect {
    fn contains(&self, u: f64, v: f64) -> bool {
        (u - self.u).abs() <= self.half_w && (v - self.v).abs() <= self.half_h
    }

    fn overlaps(&self, o: &PlaneRect) -> bool {
        (self.u - o.u).abs() < self.half_w + o.half_w && (self.v - o.v).abs() < self.half_h + o.half_h
    }
}

/// A rectangle painted on the wall that is not an opening.
#[derive(Clone, Debug, PartialEq)]
pub struct Decoy {
    pub center: Point3<f64>,
    pub width: f64,
    pub height: f64,
    pub color: [u8; 3],
}

/// Wall, window and decoys. Construct through [`WorldModel::new`], which
/// checks that every rectangle lies on the wall and none overlap.
#[derive(Clone, Debug, PartialEq)]
pub struct WorldModel {
    normal: Vector3<f64>,
    right: Vector3<f64>,
    down: Vector3<f64>,
    window_center: Point3<f64>,
    window: WindowGeometry<f64>,
    decoys: Vec<Decoy>,
    decoy_rects: Vec<PlaneRect>,
    pub wall_color: [u8; 3],
    pub interior_color: [u8; 3],
    pub background_color: [u8; 3],
    /// Standard deviation of per-channel Gaussian pixel noise.
    pub noise_sigma: f64,
}

const ON_PLANE_TOL: f64 = 1e-6;

impl WorldModel {
    /// `normal` points from the approach side into the building; the
    /// wall passes through the window centre.
    pub fn new(
        normal: Vector3<f64>,
        window_center: Point3<f64>,
        window: WindowGeometry<f64>,
        decoys: Vec<Decoy>,
    ) -> Result<Self, SimError> {
        let n_len = normal.norm();
        if !(n_len > 0.0) || !n_len.is_finite() {
            return Err(SimError::World("wall normal must be non-zero"));
        }
        let normal = normal / n_len;
        let vertical = Vector3::new(0.0, 0.0, 1.0);
        let right = vertical.cross(&normal);
        if right.norm() < 1e-6 {
            return Err(SimError::World("wall must not be horizontal"));
        }
        let right = right.normalize();
        let down = normal.cross(&right);
        let mut world = Self {
            normal,
            right,
            down,
            window_center,
            window,
            decoys: Vec::new(),
            decoy_rects: Vec::new(),
            wall_color: [200, 200, 200],
            interior_color: [20, 20, 25],
            background_color: [90, 120, 160],
            noise_sigma: 0.0,
        };
        let window_rect = world.window_rect();
        for d in decoys {
            if !(d.width > 0.0 && d.height > 0.0) {
                return Err(SimError::World("decoy width and height must be positive"));
            }
            let offset = d.center - window_center;
            if offset.dot(&normal).abs() > ON_PLANE_TOL {
                return Err(SimError::World("decoy is not on the wall plane"));
            }
            let rect = PlaneRect {
                u: offset.dot(&right),
                v: offset.dot(&down),
                half_w: d.width / 2.0,
                half_h: d.height / 2.0,
            };
            if rect.overlaps(&window_rect) || world.decoy_rects.iter().any(|r| r.overlaps(&rect)) {
                return Err(SimError::World("rectangles on the wall overlap"));
            }
            world.decoy_rects.push(rect);
            world.decoys.push(d);
        }
        Ok(world)
    }

    pub fn normal(&self) -> Vector3<f64> {
        self.normal
    }

    pub fn window_center(&self) -> Point3<f64> {
        self.window_center
    }

    pub fn window(&self) -> WindowGeometry<f64> {
        self.window
    }

    pub fn decoys(&self) -> &[Decoy] {
        &self.decoys
    }

    /// World position of the window corners, top-left first, clockwise as
    /// seen from the approach side.
    pub fn window_corners(&self) -> [Point3<f64>; 4] {
        self.window
            .corners()
            .map(|c| self.window_center + self.right * c.x + self.down * c.y)
    }

    /// Heading of the inward normal, radians from north towards east.
    pub fn normal_heading(&self) -> f64 {
        self.normal.y.atan2(self.normal.x)
    }

    fn window_rect(&self) -> PlaneRect {
        PlaneRect {
            u: 0.0,
            v: 0.0,
            half_w: self.window.width / 2.0,
            half_h: self.window.height / 2.0,
        }
    }

    /// Signed distance of `p` past the wall along the inward normal.
    fn depth(&self, p: &Point3<f64>) -> f64 {
        (p - self.window_center).dot(&self.normal)
    }

    fn plane_coords(&self, p: &Point3<f64>) -> (f64, f64) {
        let d = p - self.window_center;
        (d.dot(&self.right), d.dot(&self.down))
    }

    /// Region index of a point on the wall: 1 wall, 2 opening, 3 + i for
    /// decoy `i`.
    fn region_at(&self, p: &Point3<f64>) -> usize {
        let (u, v) = self.plane_coords(p);
        if self.window_rect().contains(u, v) {
            return 2;
        }
        match self.decoy_rects.iter().position(|r| r.contains(u, v)) {
            Some(i) => 3 + i,
            None => 1,
        }
    }

    /// Opening and decoys as world-space corner quads (top-left first,
    /// clockwise from the approach side) with their region index.
    fn painted_rects(&self) -> Vec<([Point3<f64>; 4], usize)> {
        std::iter::once((self.window_rect(), 2))
            .chain(self.decoy_rects.iter().enumerate().map(|(i, r)| (*r, 3 + i)))
            .map(|(r, region)| {
                let at = |du: f64, dv: f64| {
                    self.window_center + self.right * (r.u + du * r.half_w) + self.down * (r.v + dv * r.half_h)
                };
                ([at(-1.0, -1.0), at(1.0, -1.0), at(1.0, 1.0), at(-1.0, 1.0)], region)
            })
            .collect()
    }

    fn region_color(&self, region: usize) -> [u8; 3] {
        match region {
            0 => self.background_color,
            1 => self.wall_color,
            2 => self.interior_color,
            r => self.decoys[r - 3].color,
        }
    }
}

impl Default for WorldModel {
    fn default() -> Self {
        let decoys = vec![
            Decoy {
                center: Point3::new(10.0, 1.8, -1.5),
                width: 1.2,
                height: 1.0,
                color: [110, 110, 110],
            },
            Decoy {
                center: Point3::new(10.0, -1.8, -1.6),
                width: 0.9,
                height: 0.9,
                color: [140, 90, 60],
            },
        ];
        Self::new(
            Vector3::new(1.0, 0.0, 0.0),
            Point3::new(10.0, 0.0, -1.5),
            WindowGeometry::new(1.0, 0.8).expect("positive size"),
            decoys,
        )
        .expect("default world is consistent")
    }
}

/// Vehicle position (north, east, down) and heading.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct UavState {
    pub position: Point3<f64>,
    /// Radians in `(-pi, pi]`, measured from north towards east.
    pub yaw: f64,
}

impl UavState {
    pub fn new(position: Point3<f64>, yaw: f64) -> Self {
        Self {
            position,
            yaw: wrap_angle(yaw),
        }
    }

    pub fn forward(&self) -> Vector3<f64> {
        Vector3::new(self.yaw.cos(), self.yaw.sin(), 0.0)
    }

    pub fn right(&self) -> Vector3<f64> {
        Vector3::new(-self.yaw.sin(), self.yaw.cos(), 0.0)
    }

    /// World-to-camera rotation (camera axes right, down, forward).
    pub fn camera_rotation(&self) -> Matrix3<f64> {
        let (r, f) = (self.right(), self.forward());
        Matrix3::new(r.x, r.y, r.z, 0.0, 0.0, 1.0, f.x, f.y, f.z)
    }
}

/// One navigation increment in the body frame. Forward, lateral (right)
/// and vertical (down) in world units, yaw in radians.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct NavCommand {
    pub forward: f64,
    pub lateral: f64,
    pub vertical: f64,
    pub yaw: f64,
}

impl NavCommand {
    pub fn is_translation(&self) -> bool {
        self.forward != 0.0 || self.lateral != 0.0 || self.vertical != 0.0
    }
}

/// Per-step magnitude limits enforced by [`step`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StepLimits {
    pub forward: f64,
    pub lateral: f64,
    pub vertical: f64,
    pub yaw: f64,
}

impl Default for StepLimits {
    fn default() -> Self {
        Self {
            forward: 0.5,
            lateral: 0.5,
            vertical: 0.5,
            yaw: 10f64.to_radians(),
        }
    }
}

/// Applies the yaw increment, then translates along the new body axes.
pub fn step(uav: &UavState, cmd: &NavCommand, limits: &StepLimits) -> Result<UavState, SimError> {
    let checks = [
        ("forward", cmd.forward, limits.forward),
        ("lateral", cmd.lateral, limits.lateral),
        ("vertical", cmd.vertical, limits.vertical),
        ("yaw", cmd.yaw, limits.yaw),
    ];
    for (axis, value, limit) in checks {
        if !(value.abs() <= limit) {
            return Err(SimError::CommandOutOfBounds { axis, value, limit });
        }
    }
    let next = UavState::new(uav.position, uav.yaw + cmd.yaw);
    let delta = next.forward() * cmd.forward + next.right() * cmd.lateral + Vector3::new(0.0, 0.0, cmd.vertical);
    Ok(UavState::new(uav.position + delta, next.yaw))
}

/// Simulator oracle for one vehicle state.
#[derive(Clone, Debug, PartialEq)]
pub struct GroundTruth {
    /// Camera heading relative to the inward normal, positive to the right.
    pub relative_yaw: f64,
    /// Projected window corners, `None` when any corner is behind the camera.
    pub corners: Option<[Point2<f64>; 4]>,
    /// The vehicle is past the wall plane and inside the opening's extent.
    pub through_window: bool,
    /// Pose of the camera with respect to the window plane.
    pub pose: CameraPose<f64>,
}

/// Exact camera pose relative to the window (window-plane coordinates x
/// right, y down, z inward).
pub fn true_pose(world: &WorldModel, uav: &UavState) -> CameraPose<f64> {
    let r_cw = uav.camera_rotation();
    let basis = Matrix3::from_columns(&[world.right, world.down, world.normal]);
    CameraPose {
        rotation: r_cw * basis,
        translation: r_cw * (world.window_center - uav.position),
    }
}

pub fn ground_truth(world: &WorldModel, uav: &UavState, k: &CameraIntrinsics<f64>) -> GroundTruth {
    let pose = true_pose(world, uav);
    let corners3 = world.window.corners_3d();
    let projected: Result<Vec<Point2<f64>>, _> = corners3.iter().map(|c| project_point(k, &pose, c)).collect();
    let corners = projected.ok().map(|v| [v[0], v[1], v[2], v[3]]);
    let (u, v) = world.plane_coords(&uav.position);
    GroundTruth {
        relative_yaw: wrap_angle(uav.yaw - world.normal_heading()),
        corners,
        through_window: world.depth(&uav.position) > 0.0 && world.window_rect().contains(u, v),
        pose,
    }
}

/// Outcome of moving between two positions with respect to the wall.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Crossing {
    None,
    Window,
    Wall,
}

/// Whether the straight move `from -> to` reaches or passes the wall plane
/// from the approach side, and where.
pub fn crossing(world: &WorldModel, from: &Point3<f64>, to: &Point3<f64>) -> Crossing {
    let (d0, d1) = (world.depth(from), world.depth(to));
    if !(d0 < 0.0 && d1 >= 0.0) {
        return Crossing::None;
    }
    let t = -d0 / (d1 - d0);
    let hit = from + (to - from) * t;
    let (u, v) = world.plane_coords(&hit);
    if world.window_rect().contains(u, v) {
        Crossing::Window
    } else {
        Crossing::Wall
    }
}

/// Reference colour histogram of the opening, taken from a noise-free
/// head-on render at `distance` along the normal.
pub fn reference_histogram(
    world: &WorldModel,
    k: &CameraIntrinsics<f64>,
    width: usize,
    height: usize,
    distance: f64,
) -> Result<Histogram, SimError> {
    let uav = UavState::new(world.window_center - world.normal * distance, world.normal_heading());
    let clean = WorldModel {
        noise_sigma: 0.0,
        ..world.clone()
    };
    let frame = render(&clean, &uav, k, width, height, 0)?;
    let corners = ground_truth(world, &uav, k).corners.ok_or(SimError::Reference)?;
    region_histogram(&frame, &corners).map_err(|e| match e {
        DetectError::EmptyRegion => SimError::Reference,
        e => SimError::Detect(e),
    })
}
