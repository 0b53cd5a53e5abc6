use nalgebra::Matrix3;

use crate::Vec3;

/// Eigen-decomposition of a symmetric 3x3 matrix by cyclic Jacobi rotations.
///
/// Returns eigenvalues and the matching unit eigenvectors (as columns of the
/// returned matrix), unsorted.
pub fn symmetric_eigen3(m: &Matrix3<f64>) -> ([f64; 3], [Vec3; 3]) {
    let mut a = *m;
    let mut v = Matrix3::<f64>::identity();
    let scale = a.iter().fold(0.0f64, |acc, x| acc.max(x.abs()));
    if scale == 0.0 {
        return ([0.0; 3], [Vec3::x(), Vec3::y(), Vec3::z()]);
    }
    for _sweep in 0..64 {
        let off = a[(0, 1)].powi(2) + a[(0, 2)].powi(2) + a[(1, 2)].powi(2);
        if off.sqrt() <= 1e-15 * scale {
            break;
        }
        for (p, q) in [(0, 1), (0, 2), (1, 2)] {
            let apq = a[(p, q)];
            if apq.abs() <= f64::MIN_POSITIVE {
                continue;
            }
            let theta = (a[(q, q)] - a[(p, p)]) / (2.0 * apq);
            let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
            let t = if theta == 0.0 { 1.0 } else { t };
            let c = 1.0 / (t * t + 1.0).sqrt();
            let s = t * c;
            let mut rot = Matrix3::<f64>::identity();
            rot[(p, p)] = c;
            rot[(q, q)] = c;
            rot[(p, q)] = s;
            rot[(q, p)] = -s;
            a = rot.transpose() * a * rot;
            // clean the annihilated element
            a[(p, q)] = 0.0;
            a[(q, p)] = 0.0;
            v *= rot;
        }
    }
    let values = [a[(0, 0)], a[(1, 1)], a[(2, 2)]];
    let vectors = [
        v.column(0).normalize(),
        v.column(1).normalize(),
        v.column(2).normalize(),
    ];
    (values, vectors)
}
