//! Continuous Lyapunov equation `A X + X A^T + Q = 0` by Bartels–Stewart.

use nalgebra::DMatrix;

use super::dense::{fro, small_sylvester, symmetrize};
use super::schur::RealSchur;
use crate::error::{Error, Result};
use crate::scalar::{eps, lit, to_f64, tol_floor, Real};

/// Relative residual target used when no tolerance is given.
pub const DEFAULT_LYAPUNOV_TOL: f64 = 1e-8;

/// Diagnostics attached to an iterative or factorization-based solve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverReport<T> {
    pub residual_norm: T,
    pub iterations: usize,
    pub tolerance_used: T,
}

/// Hurwitz margin `1e-9 * (1 + |A|_F)`.
pub fn stability_margin<T: Real>(a: &DMatrix<T>) -> T {
    lit::<T>(1e-9) * (T::one() + fro(a))
}

/// Fails with [`Error::NotHurwitz`] unless every eigenvalue of `a` has real
/// part below `-stability_margin(a)`. Returns the spectral abscissa.
pub fn check_hurwitz<T: Real>(a: &DMatrix<T>) -> Result<T> {
    let abscissa = super::schur::spectral_abscissa(a)?;
    hurwitz_from_abscissa(a, abscissa)
}

fn hurwitz_from_abscissa<T: Real>(a: &DMatrix<T>, abscissa: T) -> Result<T> {
    let margin = stability_margin(a);
    if a.nrows() > 0 && abscissa >= -margin {
        return Err(Error::NotHurwitz { max_real: to_f64(abscissa), margin: to_f64(margin) });
    }
    Ok(abscissa)
}

/// Lyapunov solver bound to one Hurwitz matrix; the Schur factorization is
/// computed once and reused for every right-hand side.
#[derive(Debug, Clone)]
pub struct LyapunovSolver<T: Real> {
    a: DMatrix<T>,
    schur: RealSchur<T>,
    tol: T,
}

impl<T: Real> LyapunovSolver<T> {
    pub fn new(a: &DMatrix<T>) -> Result<Self> {
        Self::with_tolerance(a, DEFAULT_LYAPUNOV_TOL)
    }

    pub fn with_tolerance(a: &DMatrix<T>, tol: f64) -> Result<Self> {
        if !a.is_square() {
            return Err(Error::DimensionMismatch("Lyapunov: A must be square".into()));
        }
        let schur = RealSchur::new(a)?;
        let abscissa = schur
            .eigenvalues()
            .iter()
            .map(|z| z.re)
            .fold(lit::<T>(f64::NEG_INFINITY), |acc, v| acc.max(v));
        hurwitz_from_abscissa(a, abscissa)?;
        Ok(Self { a: a.clone(), schur, tol: tol_floor(tol) })
    }

    pub fn schur(&self) -> &RealSchur<T> {
        &self.schur
    }

    pub fn a(&self) -> &DMatrix<T> {
        &self.a
    }

    /// Solves `A X + X A^T + Q = 0` for symmetric `Q`.
    pub fn solve(&self, q: &DMatrix<T>) -> Result<(DMatrix<T>, SolverReport<T>)> {
        let n = self.a.nrows();
        if q.shape() != (n, n) {
            return Err(Error::DimensionMismatch(format!("Lyapunov: Q must be {n}x{n}")));
        }
        let u = self.schur.u();
        let target = self.tol * (T::one() + fro(q));

        let mut x = self.solve_full(u, q)?;
        let mut resid = self.residual(&x, q);
        let mut iterations = 1;
        if fro(&resid) > target {
            // One step of iterative refinement on the residual equation.
            let dx = self.solve_full(u, &resid)?;
            x += dx;
            x = symmetrize(&x);
            resid = self.residual(&x, q);
            iterations += 1;
        }
        let residual_norm = fro(&resid);
        if residual_norm > target {
            return Err(Error::IllConditioned(format!(
                "Lyapunov residual {:.3e} exceeds target {:.3e}",
                to_f64(residual_norm),
                to_f64(target)
            )));
        }
        Ok((x, SolverReport { residual_norm, iterations, tolerance_used: self.tol }))
    }

    fn solve_full(&self, u: &DMatrix<T>, q: &DMatrix<T>) -> Result<DMatrix<T>> {
        let f = u.transpose() * q * u;
        let y = self.solve_schur_basis(&f)?;
        Ok(symmetrize(&(u * y * u.transpose())))
    }

    fn residual(&self, x: &DMatrix<T>, q: &DMatrix<T>) -> DMatrix<T> {
        let ax = &self.a * x;
        &ax + ax.transpose() + q
    }

    /// Solves `T Y + Y T^T + F = 0` where `T` is the quasi-triangular Schur
    /// factor, i.e. the Lyapunov equation in Schur coordinates
    /// (`X = U Y U^T`, `F = U^T Q U`).
    pub fn solve_schur_basis(&self, f: &DMatrix<T>) -> Result<DMatrix<T>> {
        let t = self.schur.t();
        let n = t.nrows();
        let ranges = self.schur.block_ranges();
        let mut y = DMatrix::<T>::zeros(n, n);
        let tiny = eps::<T>() * fro(t).max(T::one()) * lit(1e-3);

        for &(js, jsz) in ranges.iter().rev() {
            let je = js + jsz;
            // G_J = -F[:, J] - Y[:, after J] T[J, after J]^T
            let mut g = -f.columns(js, jsz).clone_owned();
            if je < n {
                g -= y.columns(je, n - je) * t.view((js, je), (jsz, n - je)).transpose();
            }
            let mut tjj = [[T::zero(); 2]; 2];
            for a in 0..jsz {
                for b in 0..jsz {
                    // B in A X + X B = C is T_JJ^T.
                    tjj[a][b] = t[(js + b, js + a)];
                }
            }
            // Back substitution over row blocks: T_II Z_I + Z_I T_JJ^T = G_I - T[I, after I] Z[after I].
            let mut z = DMatrix::<T>::zeros(n, jsz);
            for &(is, isz) in ranges.iter().rev() {
                let ie = is + isz;
                let mut r = g.rows(is, isz).clone_owned();
                if ie < n {
                    r -= t.view((is, ie), (isz, n - ie)) * z.rows(ie, n - ie);
                }
                let mut tii = [[T::zero(); 2]; 2];
                let mut rhs = [[T::zero(); 2]; 2];
                for a in 0..isz {
                    for b in 0..isz {
                        tii[a][b] = t[(is + a, is + b)];
                    }
                    for b in 0..jsz {
                        rhs[a][b] = r[(a, b)];
                    }
                }
                let sol = small_sylvester(isz, jsz, &tii, &tjj, &rhs, tiny).ok_or_else(|| {
                    Error::IllConditioned("Lyapunov operator is singular (eigenvalues sum to zero)".into())
                })?;
                for a in 0..isz {
                    for b in 0..jsz {
                        z[(is + a, b)] = sol[a][b];
                    }
                }
            }
            y.columns_mut(js, jsz).copy_from(&z);
        }
        Ok(y)
    }
}

/// Solves `A X + X A^T + Q = 0` for Hurwitz `A` and symmetric `Q`.
pub fn solve_lyapunov<T: Real>(
    a: &DMatrix<T>,
    q: &DMatrix<T>,
) -> Result<(DMatrix<T>, SolverReport<T>)> {
    LyapunovSolver::new(a)?.solve(q)
}
