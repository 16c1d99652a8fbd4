//! Small dense helpers shared by the solvers.

use nalgebra::{Complex, DMatrix};

use crate::error::{Error, Result};
use crate::scalar::{eps, lit, Real};

/// `(X + X^T) / 2`.
pub fn symmetrize<T: Real>(x: &DMatrix<T>) -> DMatrix<T> {
    (x + x.transpose()) * lit::<T>(0.5)
}

/// Frobenius norm.
pub fn fro<T: Real>(x: &DMatrix<T>) -> T {
    x.norm()
}

/// Largest absolute entry (0 for an empty matrix).
pub fn max_abs<T: Real>(x: &DMatrix<T>) -> T {
    x.iter().fold(T::zero(), |acc, v| acc.max(v.abs()))
}

/// Extreme eigenvalues `(min, max)` of the symmetric part of `x`.
pub fn sym_eig_range<T: Real>(x: &DMatrix<T>) -> (T, T) {
    if x.nrows() == 0 {
        return (T::zero(), T::zero());
    }
    let e = symmetrize(x).symmetric_eigenvalues();
    let lo = e.iter().copied().fold(e[0], |a, b| a.min(b));
    let hi = e.iter().copied().fold(e[0], |a, b| a.max(b));
    (lo, hi)
}

/// Largest singular value; 0 for empty matrices.
pub fn sigma_max<T: Real>(x: &DMatrix<T>) -> T {
    if x.nrows() == 0 || x.ncols() == 0 {
        return T::zero();
    }
    x.singular_values().iter().copied().fold(T::zero(), |a, b| a.max(b))
}

/// Smallest singular value of a square matrix; 0 for singular or empty input.
pub fn sigma_min<T: Real>(x: &DMatrix<T>) -> T {
    if x.nrows() == 0 || x.ncols() == 0 {
        return T::zero();
    }
    let s = x.singular_values();
    s.iter().copied().fold(s[0], |a, b| a.min(b))
}

/// Largest singular value of a complex matrix.
pub fn sigma_max_complex<T: Real>(x: &DMatrix<Complex<T>>) -> T {
    if x.nrows() == 0 || x.ncols() == 0 {
        return T::zero();
    }
    // sigma_max^2 = lambda_max(G^H G); the Gram matrix is at most min(p, m) square.
    let g = if x.nrows() >= x.ncols() { x.adjoint() * x } else { x * x.adjoint() };
    if g.nrows() == 1 {
        return g[(0, 0)].re.max(T::zero()).sqrt();
    }
    if g.nrows() == 2 {
        let a = g[(0, 0)].re;
        let d = g[(1, 1)].re;
        let b = g[(0, 1)];
        let half_tr = (a + d) * lit(0.5);
        let disc = ((a - d) * lit(0.5)).powi(2) + b.norm_sqr();
        return (half_tr + disc.sqrt()).max(T::zero()).sqrt();
    }
    x.singular_values().iter().copied().fold(T::zero(), |a, b| a.max(b))
}

/// Principal square root of a symmetric positive definite matrix.
pub fn sqrtm_spd<T: Real>(x: &DMatrix<T>) -> Result<DMatrix<T>> {
    let n = x.nrows();
    if n == 0 {
        return Ok(DMatrix::zeros(0, 0));
    }
    let eig = symmetrize(x).symmetric_eigen();
    let scale = eig.eigenvalues.iter().fold(T::zero(), |a, &b| a.max(b.abs()));
    let mut d = eig.eigenvalues.clone();
    for v in d.iter_mut() {
        if *v <= eps::<T>() * scale * lit(n as f64) {
            return Err(Error::NotPositiveDefinite(crate::scalar::to_f64(*v)));
        }
        *v = v.sqrt();
    }
    let q = &eig.eigenvectors;
    Ok(symmetrize(&(q * DMatrix::from_diagonal(&d) * q.transpose())))
}

/// Solves `x * a = b` for `x`, i.e. `x = b a^-1`, through an LU factorization of `a^T`.
pub fn right_divide<T: Real>(b: &DMatrix<T>, a: &DMatrix<T>) -> Option<DMatrix<T>> {
    let lu = a.transpose().lu();
    lu.solve(&b.transpose()).map(|xt| xt.transpose())
}

/// Dense solve of an `n x n` system (`n <= 4`) by Gaussian elimination with
/// complete pivoting. `m` is row-major, `rhs` is overwritten by the solution.
/// Returns `false` when a pivot falls below `tiny`.
pub(crate) fn solve_small<T: Real>(n: usize, m: &mut [T; 16], rhs: &mut [T; 4], tiny: T) -> bool {
    let mut perm = [0usize, 1, 2, 3];
    for k in 0..n {
        let (mut pr, mut pc, mut best) = (k, k, T::zero());
        for r in k..n {
            for c in k..n {
                let v = m[r * 4 + c].abs();
                if v > best {
                    best = v;
                    pr = r;
                    pc = c;
                }
            }
        }
        if best <= tiny {
            return false;
        }
        if pr != k {
            for c in 0..n {
                m.swap(k * 4 + c, pr * 4 + c);
            }
            rhs.swap(k, pr);
        }
        if pc != k {
            for r in 0..n {
                m.swap(r * 4 + k, r * 4 + pc);
            }
            perm.swap(k, pc);
        }
        let piv = m[k * 4 + k];
        for r in k + 1..n {
            let f = m[r * 4 + k] / piv;
            if f.is_zero() {
                continue;
            }
            for c in k..n {
                let v = m[k * 4 + c];
                m[r * 4 + c] -= f * v;
            }
            let v = rhs[k];
            rhs[r] -= f * v;
        }
    }
    let mut sol = [T::zero(); 4];
    for k in (0..n).rev() {
        let mut acc = rhs[k];
        for c in k + 1..n {
            acc -= m[k * 4 + c] * sol[c];
        }
        sol[k] = acc / m[k * 4 + k];
    }
    for k in 0..n {
        rhs[perm[k]] = sol[k];
    }
    true
}

/// Solves the small Sylvester equation `A X + X B = C` with `A` `p x p`,
/// `B` `q x q` and `p, q <= 2`. All matrices are passed row-major with
/// leading dimension 2.
pub(crate) fn small_sylvester<T: Real>(
    p: usize,
    q: usize,
    a: &[[T; 2]; 2],
    b: &[[T; 2]; 2],
    c: &[[T; 2]; 2],
    tiny: T,
) -> Option<[[T; 2]; 2]> {
    // Unknown x[i][j] sits at index i + p * j.
    let n = p * q;
    let mut m = [T::zero(); 16];
    let mut rhs = [T::zero(); 4];
    for j in 0..q {
        for i in 0..p {
            let row = i + p * j;
            rhs[row] = c[i][j];
            for k in 0..p {
                m[row * 4 + k + p * j] += a[i][k];
            }
            for l in 0..q {
                m[row * 4 + i + p * l] += b[l][j];
            }
        }
    }
    if !solve_small(n, &mut m, &mut rhs, tiny) {
        return None;
    }
    let mut x = [[T::zero(); 2]; 2];
    for j in 0..q {
        for i in 0..p {
            x[i][j] = rhs[i + p * j];
        }
    }
    Some(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_sylvester_matches_direct_check() {
        let a: [[f64; 2]; 2] = [[1.0, 2.0], [-3.0, 0.5]];
        let b = [[4.0, 1.0], [0.0, 2.0]];
        let c = [[1.0, 0.0], [2.0, -1.0]];
        let x = small_sylvester(2, 2, &a, &b, &c, 1e-300).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                let mut lhs = 0.0f64;
                for k in 0..2 {
                    lhs += a[i][k] * x[k][j] + x[i][k] * b[k][j];
                }
                assert!((lhs - c[i][j]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn sqrtm_of_diagonal() {
        let x = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![4.0f64, 9.0]));
        let r = sqrtm_spd(&x).unwrap();
        assert!((r[(0, 0)] - 2.0).abs() < 1e-14 && (r[(1, 1)] - 3.0).abs() < 1e-14);
        assert!(sqrtm_spd(&(-x)).is_err());
    }

    #[test]
    fn complex_sigma_max_shortcuts_agree_with_svd() {
        let g = DMatrix::from_row_slice(
            3,
            2,
            &[
                Complex::new(1.0, 2.0),
                Complex::new(0.5, -1.0),
                Complex::new(-0.3, 0.0),
                Complex::new(2.0, 1.0),
                Complex::new(0.0, 0.7),
                Complex::new(1.1, -0.2),
            ],
        );
        let fast = sigma_max_complex(&g);
        let svd = g.singular_values().iter().copied().fold(0.0f64, f64::max);
        assert!((fast - svd).abs() < 1e-12);
    }
}
