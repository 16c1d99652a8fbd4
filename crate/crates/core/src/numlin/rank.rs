//! Controllability rank tests.

use nalgebra::{Complex, DMatrix};

use super::schur::eigenvalues;
use crate::error::{Error, Result};
use crate::scalar::{lit, tol_floor, Real};

/// Outcome of [`controllability_rank`].
#[derive(Debug, Clone, PartialEq)]
pub struct ControllabilityReport {
    pub is_controllable: bool,
    /// Numerical rank of the (block-scaled) Krylov matrix.
    pub rank: usize,
    /// Verdict of the PBH eigenvalue test.
    pub pbh_controllable: bool,
    /// Set when the two tests disagree.
    pub warning: Option<String>,
}

/// Rank of `[B, AB, ..., A^{n-1} B]` with threshold `tol * sigma_max * sqrt(n m)`,
/// cross-checked by the PBH test `rank [A - lambda I, B] = n`.
///
/// Block `k` of the Krylov matrix is scaled by `max(1, |A|)^-k`, which leaves
/// the column space unchanged but keeps the powers of `A` on one scale.
pub fn controllability_rank<T: Real>(
    a: &DMatrix<T>,
    b: &DMatrix<T>,
    tol: f64,
) -> Result<ControllabilityReport> {
    let n = a.nrows();
    if !a.is_square() || b.nrows() != n {
        return Err(Error::DimensionMismatch(format!(
            "controllability: A {:?}, B {:?}",
            a.shape(),
            b.shape()
        )));
    }
    let m = b.ncols();
    if n == 0 {
        return Ok(ControllabilityReport { is_controllable: true, rank: 0, pbh_controllable: true, warning: None });
    }
    if m == 0 {
        return Ok(ControllabilityReport { is_controllable: false, rank: 0, pbh_controllable: false, warning: None });
    }
    let tol: T = tol_floor(tol);
    let scale = T::one().max(a.norm());

    let mut k = DMatrix::<T>::zeros(n, n * m);
    let mut block = b.clone();
    for j in 0..n {
        k.view_mut((0, j * m), (n, m)).copy_from(&block);
        block = (a * block) / scale;
    }
    let sv = k.singular_values();
    let smax = sv.iter().copied().fold(T::zero(), |x, y| x.max(y));
    let thresh = tol * smax * lit::<T>((n * m) as f64).sqrt();
    let rank = sv.iter().filter(|&&s| s > thresh).count();
    let is_controllable = rank == n;

    let pbh_controllable = pbh(a, b, tol)?;
    let warning = (pbh_controllable != is_controllable).then(|| {
        format!("Krylov rank test ({rank}/{n}) and PBH test disagree; the pair is ill-conditioned")
    });
    Ok(ControllabilityReport { is_controllable, rank, pbh_controllable, warning })
}

fn pbh<T: Real>(a: &DMatrix<T>, b: &DMatrix<T>, tol: T) -> Result<bool> {
    let n = a.nrows();
    let m = b.ncols();
    let mut ab = DMatrix::<T>::zeros(n, n + m);
    ab.view_mut((0, 0), (n, n)).copy_from(a);
    ab.view_mut((0, n), (n, m)).copy_from(b);
    let scale = T::one().max(ab.norm());
    let thresh = tol * scale * lit::<T>(((n + m) * n) as f64).sqrt();
    for lambda in eigenvalues(a)? {
        if lambda.im < T::zero() {
            continue;
        }
        let mut pencil = ab.map(|x| Complex::new(x, T::zero()));
        for i in 0..n {
            pencil[(i, i)] -= lambda;
        }
        let smin = pencil
            .singular_values()
            .iter()
            .copied()
            .fold(lit::<T>(f64::INFINITY), |x, y| x.min(y));
        if smin <= thresh {
            return Ok(false);
        }
    }
    Ok(true)
}
