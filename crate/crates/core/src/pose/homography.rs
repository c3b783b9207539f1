use nalgebra::{DMatrix, Matrix3, Point2, Vector3};

use super::{CameraIntrinsics, CameraPose, PoseError};
use crate::scalar::Real;

/// Plane-to-image projective map, stored with `h33 = 1` when possible and
/// with unit Frobenius norm otherwise.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Homography<T: Real> {
    matrix: Matrix3<T>,
}

impl<T: Real> Homography<T> {
    pub fn new(matrix: Matrix3<T>) -> Result<Self, PoseError> {
        let norm = matrix.norm();
        if !(norm > T::zero()) || !norm.is_finite() {
            return Err(PoseError::Degenerate("homography is zero or non-finite"));
        }
        let scale = if matrix[(2, 2)].abs() > norm * T::rank_tolerance() {
            matrix[(2, 2)]
        } else {
            norm
        };
        let matrix = matrix / scale;
        let det = matrix.determinant();
        if det.abs() <= T::rank_tolerance() * matrix.norm().powi(3) {
            return Err(PoseError::Degenerate("homography is singular"));
        }
        Ok(Self { matrix })
    }

    pub fn matrix(&self) -> &Matrix3<T> {
        &self.matrix
    }

    pub fn apply(&self, p: &Point2<T>) -> Point2<T> {
        let h = self.matrix * Vector3::new(p.x, p.y, T::one());
        Point2::new(h.x / h.z, h.y / h.z)
    }
}

/// Similarity moving the centroid to the origin with mean distance sqrt(2).
fn hartley_transform<T: Real>(pts: &[Point2<T>]) -> Result<Matrix3<T>, PoseError> {
    let n = T::from_usize(pts.len()).expect("point count fits");
    let (mut mx, mut my) = (T::zero(), T::zero());
    for p in pts {
        mx += p.x;
        my += p.y;
    }
    mx /= n;
    my /= n;
    let mut mean_dist = T::zero();
    for p in pts {
        mean_dist += ((p.x - mx).powi(2) + (p.y - my).powi(2)).sqrt();
    }
    mean_dist /= n;
    if !(mean_dist > T::zero()) {
        return Err(PoseError::Degenerate("all points coincide"));
    }
    let s = T::lit(2.0).sqrt() / mean_dist;
    let z = T::zero();
    Ok(Matrix3::new(s, z, -s * mx, z, s, -s * my, z, z, T::one()))
}

fn transform<T: Real>(m: &Matrix3<T>, p: &Point2<T>) -> Point2<T> {
    let h = m * Vector3::new(p.x, p.y, T::one());
    Point2::new(h.x / h.z, h.y / h.z)
}

fn has_collinear_triple<T: Real>(pts: &[Point2<T>]) -> bool {
    // Points are Hartley-normalized, so an absolute area bound is meaningful.
    let tol = T::rank_tolerance().sqrt() * T::lit(1e-2);
    let n = pts.len();
    for i in 0..n {
        for j in i + 1..n {
            for k in j + 1..n {
                let a = pts[j] - pts[i];
                let b = pts[k] - pts[i];
                if (a.x * b.y - a.y * b.x).abs() < tol {
                    return true;
                }
            }
        }
    }
    false
}

/// Normalized DLT over `n >= 4` plane/image correspondences.
pub fn estimate_homography<T: Real>(
    world_pts: &[Point2<T>],
    image_pts: &[Point2<T>],
) -> Result<Homography<T>, PoseError> {
    if world_pts.len() != image_pts.len() {
        return Err(PoseError::LengthMismatch {
            world: world_pts.len(),
            image: image_pts.len(),
        });
    }
    let n = world_pts.len();
    if n < 4 {
        return Err(PoseError::TooFewPoints(n));
    }
    let tw = hartley_transform(world_pts)?;
    let ti = hartley_transform(image_pts)?;
    let wn: Vec<_> = world_pts.iter().map(|p| transform(&tw, p)).collect();
    let im: Vec<_> = image_pts.iter().map(|p| transform(&ti, p)).collect();
    if n <= 12 && (has_collinear_triple(&wn) || has_collinear_triple(&im)) {
        return Err(PoseError::Degenerate("three collinear points"));
    }

    // Padding to at least 9 rows keeps the full right singular basis.
    let rows = (2 * n).max(9);
    let mut a = DMatrix::<T>::zeros(rows, 9);
    let z = T::zero();
    let o = T::one();
    for (i, (w, p)) in wn.iter().zip(&im).enumerate() {
        let (x, y) = (w.x, w.y);
        let (u, v) = (p.x, p.y);
        let r0 = [-x, -y, -o, z, z, z, u * x, u * y, u];
        let r1 = [z, z, z, -x, -y, -o, v * x, v * y, v];
        for c in 0..9 {
            a[(2 * i, c)] = r0[c];
            a[(2 * i + 1, c)] = r1[c];
        }
    }
    let svd = a.svd(false, true);
    let v_t = svd.v_t.ok_or(PoseError::Degenerate("svd failed"))?;
    let sv = &svd.singular_values;
    let mut order: Vec<usize> = (0..sv.len()).collect();
    order.sort_by(|&i, &j| sv[i].partial_cmp(&sv[j]).unwrap_or(std::cmp::Ordering::Equal));
    let smallest = order[0];
    let largest = sv[order[order.len() - 1]];
    if sv[order[1]] <= largest * T::rank_tolerance() {
        return Err(PoseError::Degenerate("correspondence system is rank deficient"));
    }
    let h = v_t.row(smallest);
    let hn = Matrix3::new(h[0], h[1], h[2], h[3], h[4], h[5], h[6], h[7], h[8]);
    let ti_inv = ti
        .try_inverse()
        .ok_or(PoseError::Degenerate("normalization not invertible"))?;
    Homography::new(ti_inv * hn * tw)
}

/// Recovers `R, t` from `H ~ K [r1 r2 t]`, choosing the sign that puts the
/// plane in front of the camera and projecting onto SO(3) with an SVD.
pub fn decompose_homography<T: Real>(
    h: &Homography<T>,
    k: &CameraIntrinsics<T>,
) -> Result<CameraPose<T>, PoseError> {
    let m = k.inverse_matrix() * h.matrix();
    let m1 = m.column(0).into_owned();
    let m2 = m.column(1).into_owned();
    let m3 = m.column(2).into_owned();
    let n1 = m1.norm();
    if n1 <= T::rank_tolerance() * m.norm() {
        return Err(PoseError::Degenerate("first homography column vanishes"));
    }
    let mut lambda = T::one() / n1;
    if lambda * m3.z < T::zero() {
        lambda = -lambda;
    }
    let r1 = m1 * lambda;
    let r2 = m2 * lambda;
    let r3 = r1.cross(&r2);
    let t = m3 * lambda;
    let approx = Matrix3::from_columns(&[r1, r2, r3]);
    let svd = approx.svd(true, true);
    let (u, v_t) = match (svd.u, svd.v_t) {
        (Some(u), Some(v_t)) => (u, v_t),
        _ => return Err(PoseError::Degenerate("svd failed")),
    };
    let mut r = u * v_t;
    if r.determinant() < T::zero() {
        let sv = &svd.singular_values;
        let mut min_i = 0;
        for i in 1..3 {
            if sv[i] < sv[min_i] {
                min_i = i;
            }
        }
        let mut u_fixed = u;
        let col = -u_fixed.column(min_i).into_owned();
        u_fixed.set_column(min_i, &col);
        r = u_fixed * v_t;
    }
    CameraPose::new(r, t)
}
