use nalgebra::Matrix3;

use super::{check_rotation, PoseError};
use crate::scalar::Real;

/// Roll (about x), pitch (about y) and yaw (about z), in radians.
///
/// The composition is `R = Rz(yaw) * Ry(pitch) * Rx(roll)`, for which
///
/// ```text
/// roll  = atan2(r32, r33)
/// pitch = atan2(-r31, sqrt(r32^2 + r33^2))
/// yaw   = atan2(r21, r11)
/// ```
///
/// are exact inverses away from pitch = ±90°.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EulerAngles<T: Real> {
    pub roll: T,
    pub pitch: T,
    pub yaw: T,
}

impl<T: Real> EulerAngles<T> {
    pub fn new(roll: T, pitch: T, yaw: T) -> Self {
        Self { roll, pitch, yaw }
    }

    pub fn from_degrees(roll: T, pitch: T, yaw: T) -> Self {
        let d = T::pi() / T::lit(180.0);
        Self::new(roll * d, pitch * d, yaw * d)
    }

    pub fn to_degrees(&self) -> [T; 3] {
        let d = T::lit(180.0) / T::pi();
        [self.roll * d, self.pitch * d, self.yaw * d]
    }
}

/// Maps an angle into `(-pi, pi]`.
pub fn wrap_angle<T: Real>(a: T) -> T {
    let two_pi = T::two_pi();
    let mut w = a % two_pi;
    if w <= -T::pi() {
        w += two_pi;
    } else if w > T::pi() {
        w -= two_pi;
    }
    w
}

/// `Rz(yaw) * Ry(pitch) * Rx(roll)`.
pub fn rotation_from_euler<T: Real>(angles: &EulerAngles<T>) -> Matrix3<T> {
    let (z, o) = (T::zero(), T::one());
    let (sr, cr) = angles.roll.sin_cos();
    let (sp, cp) = angles.pitch.sin_cos();
    let (sy, cy) = angles.yaw.sin_cos();
    let rx = Matrix3::new(o, z, z, z, cr, -sr, z, sr, cr);
    let ry = Matrix3::new(cp, z, sp, z, o, z, -sp, z, cp);
    let rz = Matrix3::new(cy, -sy, z, sy, cy, z, z, z, o);
    rz * ry * rx
}

/// Extracts roll, pitch and yaw. At gimbal lock (`cos(pitch)` below
/// `1e-9`) roll is pinned to zero and the coupled angle is folded into yaw.
pub fn euler_from_rotation<T: Real>(r: &Matrix3<T>) -> Result<EulerAngles<T>, PoseError> {
    check_rotation(r, T::lit(1e-6))?;
    let (r11, r21, r31) = (r[(0, 0)], r[(1, 0)], r[(2, 0)]);
    let (r32, r33) = (r[(2, 1)], r[(2, 2)]);
    let cos_pitch = (r32 * r32 + r33 * r33).sqrt();
    if cos_pitch < T::lit(1e-9) {
        let pitch = if r31 < T::zero() {
            T::frac_pi_2()
        } else {
            -T::frac_pi_2()
        };
        // With roll = 0 the first two columns reduce to yaw-only entries.
        let yaw = (-r[(0, 1)]).atan2(r[(1, 1)]);
        return Ok(EulerAngles::new(T::zero(), pitch, wrap_angle(yaw)));
    }
    let roll = r32.atan2(r33);
    let pitch = (-r31).atan2(cos_pitch);
    let yaw = r21.atan2(r11);
    Ok(EulerAngles::new(wrap_angle(roll), pitch, wrap_angle(yaw)))
}
