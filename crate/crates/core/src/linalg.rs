//! Dense symmetric linear algebra for the tiny systems this crate solves.
//!
//! Parameter dimensions here are the data dimension plus an optional intercept,
//! so everything below targets matrices of order a handful at most. Matrices
//! are stored row-major in a flat slice.

/// Cholesky factorization of a symmetric positive definite matrix.
/// Returns the lower factor, or `None` if a pivot is non-positive or non-finite.
pub(crate) fn cholesky(a: &[f64], dim: usize) -> Option<Vec<f64>> {
    debug_assert_eq!(a.len(), dim * dim);
    let mut l = vec![0.0; dim * dim];
    for i in 0..dim {
        for j in 0..=i {
            let mut s = a[i * dim + j];
            for k in 0..j {
                s -= l[i * dim + k] * l[j * dim + k];
            }
            if i == j {
                if !s.is_finite() || s <= 0.0 {
                    return None;
                }
                l[i * dim + i] = s.sqrt();
            } else {
                l[i * dim + j] = s / l[j * dim + j];
            }
        }
    }
    Some(l)
}

/// Solve L Lᵀ x = b given the lower Cholesky factor.
pub(crate) fn cholesky_solve(l: &[f64], dim: usize, b: &[f64]) -> Vec<f64> {
    let mut y = b.to_vec();
    for i in 0..dim {
        for k in 0..i {
            y[i] -= l[i * dim + k] * y[k];
        }
        y[i] /= l[i * dim + i];
    }
    for i in (0..dim).rev() {
        for k in i + 1..dim {
            y[i] -= l[k * dim + i] * y[k];
        }
        y[i] /= l[i * dim + i];
    }
    y
}

/// Eigendecomposition of a symmetric matrix by cyclic Jacobi rotations.
/// Returns eigenvalues and an orthonormal matrix whose column `i` (stored
/// row-major, entry `[r * dim + i]`) is the eigenvector for eigenvalue `i`.
pub(crate) fn jacobi_eigen(a: &[f64], dim: usize) -> (Vec<f64>, Vec<f64>) {
    debug_assert_eq!(a.len(), dim * dim);
    let mut m = a.to_vec();
    let mut v = vec![0.0; dim * dim];
    for i in 0..dim {
        v[i * dim + i] = 1.0;
    }
    if dim == 1 {
        return (vec![m[0]], v);
    }
    let scale: f64 = (0..dim)
        .map(|i| m[i * dim + i].abs())
        .fold(0.0, f64::max)
        .max(1e-300);
    for _sweep in 0..64 {
        let mut off = 0.0;
        for p in 0..dim {
            for q in p + 1..dim {
                off += m[p * dim + q] * m[p * dim + q];
            }
        }
        if off.sqrt() <= 1e-15 * scale {
            break;
        }
        for p in 0..dim - 1 {
            for q in p + 1..dim {
                let apq = m[p * dim + q];
                if apq.abs() <= 1e-30 * scale {
                    continue;
                }
                let theta = (m[q * dim + q] - m[p * dim + p]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..dim {
                    let mkp = m[k * dim + p];
                    let mkq = m[k * dim + q];
                    m[k * dim + p] = c * mkp - s * mkq;
                    m[k * dim + q] = s * mkp + c * mkq;
                }
                for k in 0..dim {
                    let mpk = m[p * dim + k];
                    let mqk = m[q * dim + k];
                    m[p * dim + k] = c * mpk - s * mqk;
                    m[q * dim + k] = s * mpk + c * mqk;
                }
                for k in 0..dim {
                    let vkp = v[k * dim + p];
                    let vkq = v[k * dim + q];
                    v[k * dim + p] = c * vkp - s * vkq;
                    v[k * dim + q] = s * vkp + c * vkq;
                }
            }
        }
    }
    let values = (0..dim).map(|i| m[i * dim + i]).collect();
    (values, v)
}

/// Minimum-norm solution of the (possibly singular) symmetric system `g x = rhs`
/// via truncated eigendecomposition. Eigenvalues at or below
/// `rel_cutoff * max eigenvalue` are treated as zero.
pub(crate) fn solve_min_norm(g: &[f64], rhs: &[f64], dim: usize, rel_cutoff: f64) -> Vec<f64> {
    let (values, vectors) = jacobi_eigen(g, dim);
    let max_val = values.iter().cloned().fold(0.0, f64::max);
    let tau = rel_cutoff * max_val;
    let mut x = vec![0.0; dim];
    for i in 0..dim {
        if values[i] > tau && values[i] > 0.0 {
            let mut proj = 0.0;
            for r in 0..dim {
                proj += vectors[r * dim + i] * rhs[r];
            }
            let coef = proj / values[i];
            for r in 0..dim {
                x[r] += coef * vectors[r * dim + i];
            }
        }
    }
    x
}

pub(crate) fn mat_vec(a: &[f64], dim: usize, x: &[f64]) -> Vec<f64> {
    (0..dim)
        .map(|i| (0..dim).map(|j| a[i * dim + j] * x[j]).sum())
        .collect()
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}
