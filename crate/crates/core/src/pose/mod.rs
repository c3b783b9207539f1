//! Planar pose algebra: pinhole intrinsics, homography estimation and
//! decomposition, Euler angle extraction.
//!
//! Two frames are in play. The *vision* frame is the usual pinhole one
//! (x right, y down, z along the optical axis); a [`CameraPose`] maps
//! window-plane coordinates (x right, y down, z into the wall) into it.
//! The *body* frame is forward-right-down, matching the vehicle. Euler
//! angles are always reported in the body frame via
//! [`relative_attitude`], so `yaw` is the heading of the camera relative
//! to the inward wall normal, positive when the camera is turned right.

mod euler;
mod homography;

pub use euler::{euler_from_rotation, rotation_from_euler, wrap_angle, EulerAngles};
pub use homography::{decompose_homography, estimate_homography, Homography};

use nalgebra::{Matrix3, Point2, Point3, Vector3};
use thiserror::Error;

use crate::detect::WindowCandidate;
use crate::scalar::Real;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PoseError {
    #[error("need at least 4 correspondences, got {0}")]
    TooFewPoints(usize),
    #[error("point lists differ in length ({world} world vs {image} image)")]
    LengthMismatch { world: usize, image: usize },
    #[error("degenerate configuration: {0}")]
    Degenerate(&'static str),
    #[error("point is not in front of the camera (depth {0})")]
    BehindCamera(f64),
    #[error("rotation matrix is not orthonormal (error {0})")]
    NotOrthonormal(f64),
    #[error("invalid intrinsics: {0}")]
    Intrinsics(&'static str),
    #[error("invalid window geometry: {0}")]
    Geometry(&'static str),
    #[error("decomposed pose disagrees with the detected corners (rms {rms:.3} px)")]
    Inconsistent { rms: f64 },
}

/// Pinhole intrinsics `K = [[fx, 0, cx], [0, fy, cy], [0, 0, 1]]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CameraIntrinsics<T: Real> {
    pub fx: T,
    pub fy: T,
    pub cx: T,
    pub cy: T,
}

impl<T: Real> CameraIntrinsics<T> {
    pub fn new(fx: T, fy: T, cx: T, cy: T) -> Result<Self, PoseError> {
        if !(fx > T::zero() && fy > T::zero()) {
            return Err(PoseError::Intrinsics("focal lengths must be positive"));
        }
        if !(cx.is_finite() && cy.is_finite()) {
            return Err(PoseError::Intrinsics("principal point must be finite"));
        }
        Ok(Self { fx, fy, cx, cy })
    }

    /// Pixel aspect ratio `fx / fy`.
    pub fn aspect(&self) -> T {
        self.fx / self.fy
    }

    pub fn matrix(&self) -> Matrix3<T> {
        let (z, o) = (T::zero(), T::one());
        Matrix3::new(self.fx, z, self.cx, z, self.fy, self.cy, z, z, o)
    }

    pub fn inverse_matrix(&self) -> Matrix3<T> {
        let (z, o) = (T::zero(), T::one());
        Matrix3::new(
            o / self.fx,
            z,
            -self.cx / self.fx,
            z,
            o / self.fy,
            -self.cy / self.fy,
            z,
            z,
            o,
        )
    }

    /// Ray direction (z = 1) through a pixel.
    pub fn unproject(&self, u: T, v: T) -> Vector3<T> {
        Vector3::new((u - self.cx) / self.fx, (v - self.cy) / self.fy, T::one())
    }
}

/// Extrinsics mapping window-plane coordinates into the vision frame:
/// `X_cam = R * X_window + t`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CameraPose<T: Real> {
    pub rotation: Matrix3<T>,
    pub translation: Vector3<T>,
}

impl<T: Real> CameraPose<T> {
    pub fn new(rotation: Matrix3<T>, translation: Vector3<T>) -> Result<Self, PoseError> {
        check_rotation(&rotation, T::lit(1e-6))?;
        Ok(Self {
            rotation,
            translation,
        })
    }

    pub fn transform(&self, p: &Point3<T>) -> Vector3<T> {
        self.rotation * p.coords + self.translation
    }
}

pub(crate) fn check_rotation<T: Real>(r: &Matrix3<T>, tol: T) -> Result<(), PoseError> {
    let err = (r.transpose() * r - Matrix3::identity()).norm();
    let det = r.determinant();
    if !(err <= tol) || !((det - T::one()).abs() <= tol) {
        return Err(PoseError::NotOrthonormal(
            err.as_f64().max((det - T::one()).abs().as_f64()),
        ));
    }
    Ok(())
}

/// Pinhole projection `K (R X + t)` followed by division by depth.
pub fn project_point<T: Real>(
    k: &CameraIntrinsics<T>,
    pose: &CameraPose<T>,
    world_pt: &Point3<T>,
) -> Result<Point2<T>, PoseError> {
    let cam = pose.transform(world_pt);
    project_camera_point(k, &cam)
}

pub(crate) fn project_camera_point<T: Real>(
    k: &CameraIntrinsics<T>,
    cam: &Vector3<T>,
) -> Result<Point2<T>, PoseError> {
    if !(cam.z > T::zero()) {
        return Err(PoseError::BehindCamera(cam.z.as_f64()));
    }
    let h = k.matrix() * cam;
    Ok(Point2::new(h.x / h.z, h.y / h.z))
}

/// Physical window size; corners are listed top-left, top-right,
/// bottom-right, bottom-left in window-plane coordinates centred on the
/// opening (x right, y down, z = 0).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WindowGeometry<T: Real> {
    pub width: T,
    pub height: T,
}

impl<T: Real> WindowGeometry<T> {
    pub fn new(width: T, height: T) -> Result<Self, PoseError> {
        if !(width > T::zero() && height > T::zero()) {
            return Err(PoseError::Geometry("width and height must be positive"));
        }
        Ok(Self { width, height })
    }

    pub fn corners(&self) -> [Point2<T>; 4] {
        let hw = self.width / T::lit(2.0);
        let hh = self.height / T::lit(2.0);
        [
            Point2::new(-hw, -hh),
            Point2::new(hw, -hh),
            Point2::new(hw, hh),
            Point2::new(-hw, hh),
        ]
    }

    pub fn corners_3d(&self) -> [Point3<T>; 4] {
        self.corners().map(|p| Point3::new(p.x, p.y, T::zero()))
    }
}

/// Permutation taking vision-frame coordinates (right, down, forward) to
/// body-frame coordinates (forward, right, down).
pub fn vision_to_body<T: Real>() -> Matrix3<T> {
    let (z, o) = (T::zero(), T::one());
    Matrix3::new(z, z, o, o, z, z, z, o, z)
}

/// Orientation of the camera relative to the window, expressed in
/// forward-right-down axes. For a camera turned right by `a` about the
/// vertical this is a pure yaw of `+a`.
pub fn relative_attitude<T: Real>(pose: &CameraPose<T>) -> Matrix3<T> {
    let p = vision_to_body::<T>();
    p * pose.rotation.transpose() * p.transpose()
}

/// Inverse of [`relative_attitude`]: the vision-frame pose rotation for a
/// given body-frame relative attitude.
pub fn rotation_from_attitude<T: Real>(attitude: &Matrix3<T>) -> Matrix3<T> {
    let p = vision_to_body::<T>();
    (p.transpose() * attitude * p).transpose()
}

/// Pose of the camera with respect to a detected window.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WindowPose {
    pub pose: CameraPose<f64>,
    pub angles: EulerAngles<f64>,
    /// RMS distance between the detected corners and the window corners
    /// reprojected through the recovered pose.
    pub reprojection_rms: f64,
}

/// Largest corner residual accepted by [`window_pose`] before the
/// correspondence is reported as inconsistent.
pub const MAX_CORNER_RMS_PX: f64 = 3.0;

/// Homography from the metric window corners to the detected corners,
/// decomposed into a pose, with body-frame Euler angles.
pub fn window_pose(
    candidate: &WindowCandidate,
    geometry: &WindowGeometry<f64>,
    k: &CameraIntrinsics<f64>,
) -> Result<WindowPose, PoseError> {
    let world = geometry.corners();
    let image = candidate.corners.map(|c| Point2::new(c.x, c.y));
    let h = estimate_homography(&world, &image)?;
    let pose = decompose_homography(&h, k)?;
    let angles = euler_from_rotation(&relative_attitude(&pose))?;
    let mut sq = 0.0;
    for (w, img) in geometry.corners_3d().iter().zip(image.iter()) {
        let p = project_point(k, &pose, w)?;
        sq += (p - img).norm_squared();
    }
    let rms = (sq / 4.0).sqrt();
    if rms > MAX_CORNER_RMS_PX {
        return Err(PoseError::Inconsistent { rms });
    }
    Ok(WindowPose {
        pose,
        angles,
        reprojection_rms: rms,
    })
}
