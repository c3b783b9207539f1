//! Vision-based window detection, pose estimation and a simulated
//! ingress mission for a small quadrotor.

pub mod detect;
pub mod imaging;
pub mod nav;
pub mod pose;
pub mod scalar;
pub mod simworld;

pub use scalar::Real;

pub type Homography64 = pose::Homography<f64>;
pub type CameraIntrinsics64 = pose::CameraIntrinsics<f64>;
pub type CameraPose64 = pose::CameraPose<f64>;
pub type EulerAngles64 = pose::EulerAngles<f64>;
pub type WindowGeometry64 = pose::WindowGeometry<f64>;
