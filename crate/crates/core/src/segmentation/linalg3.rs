//! Small dense 3×3 symmetric-matrix helpers for the colour models.

use crate::scalar::Real;

pub type Vec3<T> = [T; 3];
pub type Mat3<T> = [[T; 3]; 3];

pub fn zeros<T: Real>() -> Mat3<T> {
    [[T::zero(); 3]; 3]
}

pub fn diag<T: Real>(v: Vec3<T>) -> Mat3<T> {
    let mut m = zeros();
    for i in 0..3 {
        m[i][i] = v[i];
    }
    m
}

pub fn sub<T: Real>(a: Vec3<T>, b: Vec3<T>) -> Vec3<T> {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

pub fn dot<T: Real>(a: Vec3<T>, b: Vec3<T>) -> T {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

/// Eigen-decomposition of a symmetric matrix by cyclic Jacobi rotations.
/// Returns the eigenvalues and the eigenvectors as the columns of `V`, so
/// that `m = V · diag(λ) · Vᵀ`.
pub fn symmetric_eigen<T: Real>(m: &Mat3<T>) -> (Vec3<T>, Mat3<T>) {
    let mut a = *m;
    let mut v = diag([T::one(); 3]);
    let two = T::one() + T::one();
    for _sweep in 0..64 {
        let off = a[0][1] * a[0][1] + a[0][2] * a[0][2] + a[1][2] * a[1][2];
        let scale = (0..3).fold(T::zero(), |s, i| s + a[i][i] * a[i][i]);
        if off <= T::epsilon() * T::epsilon() * scale || off == T::zero() {
            break;
        }
        for (p, q) in [(0, 1), (0, 2), (1, 2)] {
            if a[p][q] == T::zero() {
                continue;
            }
            let theta = (a[q][q] - a[p][p]) / (two * a[p][q]);
            let t = theta.signum() / (theta.abs() + (theta * theta + T::one()).sqrt());
            let c = T::one() / (t * t + T::one()).sqrt();
            let s = t * c;
            // A <- Jᵀ A J
            for k in 0..3 {
                let (akp, akq) = (a[k][p], a[k][q]);
                a[k][p] = c * akp - s * akq;
                a[k][q] = s * akp + c * akq;
            }
            for k in 0..3 {
                let (apk, aqk) = (a[p][k], a[q][k]);
                a[p][k] = c * apk - s * aqk;
                a[q][k] = s * apk + c * aqk;
            }
            for row in v.iter_mut() {
                let (vkp, vkq) = (row[p], row[q]);
                row[p] = c * vkp - s * vkq;
                row[q] = s * vkp + c * vkq;
            }
        }
    }
    ([a[0][0], a[1][1], a[2][2]], v)
}

/// `V · diag(λ) · Vᵀ`.
pub fn compose<T: Real>(values: Vec3<T>, vectors: &Mat3<T>) -> Mat3<T> {
    let mut m = zeros();
    for i in 0..3 {
        for j in 0..3 {
            m[i][j] = (0..3).fold(T::zero(), |s, k| {
                s + vectors[i][k] * values[k] * vectors[j][k]
            });
        }
    }
    // exact symmetry
    for i in 0..3 {
        for j in 0..i {
            let avg = (m[i][j] + m[j][i]) / (T::one() + T::one());
            m[i][j] = avg;
            m[j][i] = avg;
        }
    }
    m
}

/// Raises every eigenvalue of a symmetric matrix to at least `floor`.
pub fn clamp_eigenvalues<T: Real>(m: &Mat3<T>, floor: T) -> Mat3<T> {
    let (values, vectors) = symmetric_eigen(m);
    compose(values.map(|l| l.max(floor)), &vectors)
}

/// Lower Cholesky factor, or `None` when the matrix is not positive
/// definite.
pub fn cholesky<T: Real>(m: &Mat3<T>) -> Option<Mat3<T>> {
    let mut l = zeros();
    for i in 0..3 {
        for j in 0..=i {
            let s = (0..j).fold(m[i][j], |s, k| s - l[i][k] * l[j][k]);
            if i == j {
                if !(s > T::zero()) {
                    return None;
                }
                l[i][i] = s.sqrt();
            } else {
                l[i][j] = s / l[j][j];
            }
        }
    }
    Some(l)
}

/// Solves `L y = b` for lower-triangular `L`.
pub fn forward_substitute<T: Real>(l: &Mat3<T>, b: Vec3<T>) -> Vec3<T> {
    let mut y = [T::zero(); 3];
    for i in 0..3 {
        let s = (0..i).fold(b[i], |s, k| s - l[i][k] * y[k]);
        y[i] = s / l[i][i];
    }
    y
}
