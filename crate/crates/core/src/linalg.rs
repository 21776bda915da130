//! Small dense linear algebra for the information matrices.

use crate::error::{Error, Result};

/// Condition numbers above this are treated as singular.
pub const CONDITION_LIMIT: f64 = 1e12;

pub type Matrix<const N: usize> = [[f64; N]; N];

fn norm1<const N: usize>(m: &Matrix<N>) -> f64 {
    (0..N)
        .map(|j| (0..N).map(|i| m[i][j].abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Inverse of a symmetric positive definite matrix by partial-pivot LU.
///
/// Fails when a diagonal entry or the determinant is not positive, or when
/// the 1-norm condition number exceeds [`CONDITION_LIMIT`].
pub fn spd_inverse<const N: usize>(m: &Matrix<N>) -> Result<Matrix<N>> {
    if m.iter().flatten().any(|v| !v.is_finite()) || (0..N).any(|i| !(m[i][i] > 0.0)) {
        return Err(Error::SingularInformation { condition: f64::INFINITY });
    }
    let mut lu = *m;
    let mut perm: [usize; N] = std::array::from_fn(|i| i);
    let mut sign = 1.0;
    for k in 0..N {
        let p = (k..N)
            .max_by(|&a, &b| lu[a][k].abs().total_cmp(&lu[b][k].abs()))
            .unwrap_or(k);
        if lu[p][k] == 0.0 {
            return Err(Error::SingularInformation { condition: f64::INFINITY });
        }
        if p != k {
            lu.swap(p, k);
            perm.swap(p, k);
            sign = -sign;
        }
        for i in k + 1..N {
            let f = lu[i][k] / lu[k][k];
            lu[i][k] = f;
            for j in k + 1..N {
                lu[i][j] -= f * lu[k][j];
            }
        }
    }
    let det = sign * (0..N).map(|k| lu[k][k]).product::<f64>();
    if !(det > 0.0) {
        return Err(Error::SingularInformation { condition: f64::INFINITY });
    }

    let mut inv = [[0.0; N]; N];
    for col in 0..N {
        let mut x: [f64; N] = std::array::from_fn(|i| if perm[i] == col { 1.0 } else { 0.0 });
        for i in 0..N {
            for j in 0..i {
                x[i] -= lu[i][j] * x[j];
            }
        }
        for i in (0..N).rev() {
            for j in i + 1..N {
                x[i] -= lu[i][j] * x[j];
            }
            x[i] /= lu[i][i];
        }
        for i in 0..N {
            inv[i][col] = x[i];
        }
    }

    let condition = norm1(m) * norm1(&inv);
    if !(condition.is_finite() && condition <= CONDITION_LIMIT) {
        return Err(Error::SingularInformation { condition });
    }
    Ok(inv)
}

/// Lower-triangular L with L·Lᵀ = m, for symmetric positive definite m.
pub fn cholesky<const N: usize>(m: &Matrix<N>) -> Result<Matrix<N>> {
    let mut l = [[0.0; N]; N];
    for i in 0..N {
        for j in 0..=i {
            let s = m[i][j] - (0..j).map(|k| l[i][k] * l[j][k]).sum::<f64>();
            if i == j {
                if !(s > 0.0) {
                    return Err(Error::SingularInformation { condition: f64::INFINITY });
                }
                l[i][i] = s.sqrt();
            } else {
                l[i][j] = s / l[j][j];
            }
        }
    }
    Ok(l)
}

/// Removes row and column `k`.
pub fn drop_index(m: &Matrix<4>, k: usize) -> Matrix<3> {
    let keep: Vec<usize> = (0..4).filter(|&i| i != k).collect();
    std::array::from_fn(|i| std::array::from_fn(|j| m[keep[i]][keep[j]]))
}
