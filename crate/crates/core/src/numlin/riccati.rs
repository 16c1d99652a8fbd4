//! Continuous algebraic Riccati equations via the ordered Schur form of the
//! Hamiltonian matrix.

use nalgebra::DMatrix;

use super::dense::{fro, right_divide, sigma_min, sym_eig_range, symmetrize};
use super::lyapunov::{stability_margin, LyapunovSolver, SolverReport};
use super::schur::{spectral_abscissa, RealSchur};
use crate::error::{Error, Result};
use crate::scalar::{eps, lit, to_f64, tol_floor, Real};

/// Relative residual target used by [`solve_care`] and [`solve_riccati`].
pub const DEFAULT_RICCATI_TOL: f64 = 1e-8;

/// Stabilizing solution of `A^T X + X A - X S X + Q = 0` for symmetric `S`
/// and `Q` (`S` may be indefinite).
///
/// The stable invariant subspace `[U1; U2]` of `[[A, -S], [-Q, -A^T]]` is
/// read off the reordered Schur form and `X = U2 U1^-1`. When the residual
/// misses the target a single Newton (Kleinman) correction is tried. The
/// returned `X` always makes `A - S X` Hurwitz.
pub fn solve_riccati<T: Real>(
    a: &DMatrix<T>,
    s: &DMatrix<T>,
    q: &DMatrix<T>,
) -> Result<(DMatrix<T>, SolverReport<T>)> {
    solve_riccati_with_tol(a, s, q, DEFAULT_RICCATI_TOL)
}

pub fn solve_riccati_with_tol<T: Real>(
    a: &DMatrix<T>,
    s: &DMatrix<T>,
    q: &DMatrix<T>,
    tol: f64,
) -> Result<(DMatrix<T>, SolverReport<T>)> {
    let n = a.nrows();
    if !a.is_square() || s.shape() != (n, n) || q.shape() != (n, n) {
        return Err(Error::DimensionMismatch(format!(
            "Riccati: A {:?}, S {:?}, Q {:?}",
            a.shape(),
            s.shape(),
            q.shape()
        )));
    }
    let tol = tol_floor::<T>(tol);
    if n == 0 {
        let report = SolverReport { residual_norm: T::zero(), iterations: 0, tolerance_used: tol };
        return Ok((DMatrix::zeros(0, 0), report));
    }

    let mut h = DMatrix::<T>::zeros(2 * n, 2 * n);
    h.view_mut((0, 0), (n, n)).copy_from(a);
    h.view_mut((0, n), (n, n)).copy_from(&(-s));
    h.view_mut((n, 0), (n, n)).copy_from(&(-q));
    h.view_mut((n, n), (n, n)).copy_from(&(-a.transpose()));

    let mut schur = RealSchur::new(&h)?;
    let stable = schur.reorder(|z| z.re < T::zero())?;
    if stable != n {
        return Err(Error::NoStabilizingSolution(format!(
            "Hamiltonian has {stable} stable eigenvalues, expected {n}"
        )));
    }
    let u = schur.u();
    let u1 = u.view((0, 0), (n, n)).clone_owned();
    let u2 = u.view((n, 0), (n, n)).clone_owned();
    let smin = sigma_min(&u1);
    if smin <= eps::<T>() * lit(n as f64 * 10.0) {
        return Err(Error::NoStabilizingSolution(format!(
            "stable subspace is not a graph (sigma_min(U1) = {:.3e})",
            to_f64(smin)
        )));
    }
    let mut x = symmetrize(
        &right_divide(&u2, &u1)
            .ok_or_else(|| Error::NoStabilizingSolution("U1 is singular".into()))?,
    );

    let target = tol * (T::one() + fro(q));
    let mut residual_norm = fro(&care_residual(a, s, q, &x));
    let mut iterations = 1;
    if residual_norm > target {
        if let Some(refined) = newton_step(a, s, q, &x) {
            let r = fro(&care_residual(a, s, q, &refined));
            iterations += 1;
            if r < residual_norm {
                x = refined;
                residual_norm = r;
            }
        }
    }

    let closed = a - s * &x;
    let abscissa = spectral_abscissa(&closed)?;
    if abscissa >= -stability_margin(&closed) {
        return Err(Error::NoStabilizingSolution(format!(
            "closed loop A - S X has eigenvalue with real part {:.3e}",
            to_f64(abscissa)
        )));
    }
    if residual_norm > target {
        return Err(Error::IllConditioned(format!(
            "Riccati residual {:.3e} exceeds target {:.3e}",
            to_f64(residual_norm),
            to_f64(target)
        )));
    }
    Ok((x, SolverReport { residual_norm, iterations, tolerance_used: tol }))
}

/// `A^T X + X A - X S X + Q`.
pub fn care_residual<T: Real>(
    a: &DMatrix<T>,
    s: &DMatrix<T>,
    q: &DMatrix<T>,
    x: &DMatrix<T>,
) -> DMatrix<T> {
    let xa = x * a;
    &xa + xa.transpose() - x * s * x + q
}

fn newton_step<T: Real>(
    a: &DMatrix<T>,
    s: &DMatrix<T>,
    q: &DMatrix<T>,
    x: &DMatrix<T>,
) -> Option<DMatrix<T>> {
    // (A - S X)^T X+ + X+ (A - S X) + Q + X S X = 0
    let closed = a - s * x;
    let solver = LyapunovSolver::new(&closed.transpose()).ok()?;
    let rhs = symmetrize(&(q + x * s * x));
    solver.solve(&rhs).ok().map(|(xn, _)| xn)
}

/// Stabilizing solution of `A^T X + X A - X (scale * B B^T) X + Q = 0`.
///
/// `scale` plays the role of `R^-1` for `R = scale^-1 I`; the H-infinity
/// family of a lossless plant uses `scale = 1 - gamma^-2`.
pub fn solve_care<T: Real>(
    a: &DMatrix<T>,
    b: &DMatrix<T>,
    q: &DMatrix<T>,
    scale: T,
) -> Result<(DMatrix<T>, SolverReport<T>)> {
    if scale <= T::zero() {
        return Err(Error::InvalidConfig("Riccati input weight must be positive".into()));
    }
    if b.nrows() != a.nrows() {
        return Err(Error::DimensionMismatch("Riccati: B rows must match A".into()));
    }
    let s = b * b.transpose() * scale;
    let (x, report) = solve_riccati(a, &s, q)?;
    let (lo, hi) = sym_eig_range(&x);
    if lo < -tol_floor::<T>(DEFAULT_RICCATI_TOL) * (T::one() + hi.abs()) {
        return Err(Error::NoStabilizingSolution(format!(
            "stabilizing solution is indefinite (min eigenvalue {:.3e})",
            to_f64(lo)
        )));
    }
    Ok((x, report))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn scalar_integrator() {
        let one = DMatrix::from_element(1, 1, 1.0);
        let (x, _) = solve_care(&DMatrix::zeros(1, 1), &one, &one, 1.0).unwrap();
        assert_relative_eq!(x[(0, 0)], 1.0, epsilon = 1e-12);
    }

    #[test]
    fn double_integrator_lqr() {
        // Known closed form: X = [[sqrt(3), 1], [1, sqrt(3)]].
        let a = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 0.0, 0.0]);
        let b = DMatrix::from_row_slice(2, 1, &[0.0, 1.0]);
        let q = DMatrix::identity(2, 2);
        let (x, rep) = solve_care(&a, &b, &q, 1.0).unwrap();
        let s3 = 3f64.sqrt();
        assert_relative_eq!(x, DMatrix::from_row_slice(2, 2, &[s3, 1.0, 1.0, s3]), epsilon = 1e-10);
        assert!(rep.residual_norm < 1e-10);
    }

    #[test]
    fn uncontrollable_unstable_mode_has_no_solution() {
        let a = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -1.0]);
        let b = DMatrix::from_row_slice(2, 1, &[0.0, 1.0]);
        let q = DMatrix::identity(2, 2);
        assert!(matches!(solve_care(&a, &b, &q, 1.0), Err(Error::NoStabilizingSolution(_))));
    }

    #[test]
    fn nonpositive_scale_rejected() {
        let one = DMatrix::from_element(1, 1, 1.0);
        assert!(solve_care(&one, &one, &one, 0.0).is_err());
    }
}
