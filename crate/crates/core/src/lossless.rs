//! Lossless systems: storage certificates and the fundamental H2/H-infinity
//! performance limits.
//!
//! A realization `(A, B, C, D)` is lossless when some `P = P^T > 0` satisfies
//!
//! ```text
//! P A + A^T P = 0,    P B = C^T,    D + D^T = 0.
//! ```
//!
//! For such systems the best achievable closed-loop H2 norm is
//! `sqrt(2 tr(C B))`, and, when `D = 0`, the best H-infinity norm is `sqrt(2)`.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::numlin::dense::{fro, sym_eig_range};
use crate::numlin::StateSpace;
use crate::scalar::{lit, to_f64, tol_floor, Real};

/// Relative tolerance used by [`find_certificate`] when none is given.
pub const DEFAULT_CERT_TOL: f64 = 1e-9;

/// Storage matrix `P` together with the residuals it was accepted with.
#[derive(Debug, Clone, PartialEq)]
pub struct LosslessCertificate<T: Real> {
    p: DMatrix<T>,
    /// `|P A + A^T P|_F`
    pub residual_eq_a: T,
    /// `|P B - C^T|_F`
    pub residual_eq_b: T,
    pub min_eigenvalue: T,
}

impl<T: Real> LosslessCertificate<T> {
    pub fn p(&self) -> &DMatrix<T> {
        &self.p
    }

    pub fn into_p(self) -> DMatrix<T> {
        self.p
    }
}

/// Residuals of the three lossless conditions for a candidate `P`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CertificateCheck<T> {
    pub valid: bool,
    pub residual_eq_a: T,
    pub residual_eq_b: T,
    /// `|D + D^T|_F`
    pub residual_d: T,
    /// `|P - P^T|_F`
    pub asymmetry: T,
    pub min_eigenvalue: T,
}

/// The two limits of a certified lossless system.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FundamentalLimits<T> {
    pub gamma_h2: T,
    /// `None` when `D != 0`: the H-infinity limit is only known for `D = 0`.
    pub gamma_hinf: Option<T>,
}

fn residuals<T: Real>(sys: &StateSpace<T>, p: &DMatrix<T>) -> (T, T, T) {
    let pa = p * sys.a();
    let ra = fro(&(&pa + pa.transpose()));
    let rb = fro(&(p * sys.b() - sys.c().transpose()));
    let rd = fro(&(sys.d() + sys.d().transpose()));
    (ra, rb, rd)
}

fn check_skew_feedthrough<T: Real>(sys: &StateSpace<T>, tol: T) -> Result<()> {
    let rd = fro(&(sys.d() + sys.d().transpose()));
    if rd > tol * (T::one() + fro(sys.d())) {
        return Err(Error::SkewFeedthroughViolated(to_f64(rd)));
    }
    Ok(())
}

/// Checks all three lossless conditions and positive definiteness of `p`.
///
/// Valid iff `|PA + A^T P| <= tol (1 + |A| |P|)`, `|PB - C^T| <= tol (1 + |C|)`,
/// `|D + D^T| <= tol (1 + |D|)`, `P` is symmetric to `tol |P|` and
/// `lambda_min(P) > tol`.
pub fn verify_certificate<T: Real>(
    sys: &StateSpace<T>,
    p: &DMatrix<T>,
    tol: f64,
) -> Result<CertificateCheck<T>> {
    let n = sys.n();
    if p.shape() != (n, n) {
        return Err(Error::DimensionMismatch(format!("certificate must be {n}x{n}, got {:?}", p.shape())));
    }
    let tol: T = tol_floor(tol);
    let (residual_eq_a, residual_eq_b, residual_d) = residuals(sys, p);
    let asymmetry = fro(&(p - p.transpose()));
    let pn = fro(p);
    let min_eigenvalue = if n == 0 { lit(f64::INFINITY) } else { sym_eig_range(p).0 };
    let valid = residual_eq_a <= tol * (T::one() + fro(sys.a()) * pn)
        && residual_eq_b <= tol * (T::one() + fro(sys.c()))
        && residual_d <= tol * (T::one() + fro(sys.d()))
        && asymmetry <= tol * pn
        && min_eigenvalue > tol;
    Ok(CertificateCheck { valid, residual_eq_a, residual_eq_b, residual_d, asymmetry, min_eigenvalue })
}

/// Solves the lossless conditions for the unique symmetric `P`.
///
/// The equations `P A + A^T P = 0` and `P B = C^T` are linear in the
/// `n (n + 1) / 2` free entries of a symmetric `P`. The stacked system (each
/// block scaled to unit operator norm) is solved in the least-squares sense
/// by SVD, so an inconsistent system and a rank-deficient one can be told
/// apart.
pub fn find_certificate<T: Real>(sys: &StateSpace<T>, tol: f64) -> Result<LosslessCertificate<T>> {
    let tol_t: T = tol_floor(tol);
    check_skew_feedthrough(sys, tol_t)?;
    let (a, b, c) = (sys.a(), sys.b(), sys.c());
    let n = sys.n();
    let m = sys.m();
    if n == 0 {
        return Ok(LosslessCertificate {
            p: DMatrix::zeros(0, 0),
            residual_eq_a: T::zero(),
            residual_eq_b: T::zero(),
            min_eigenvalue: lit(f64::INFINITY),
        });
    }

    let index: Vec<(usize, usize)> = (0..n).flat_map(|j| (0..=j).map(move |i| (i, j))).collect();
    let k = index.len();
    let rows = k + n * m;
    let sa = T::one() / T::one().max(fro(a));
    let sb = T::one() / T::one().max(fro(b));

    let mut op = DMatrix::<T>::zeros(rows, k);
    for (col, &(i, j)) in index.iter().enumerate() {
        // E = e_i e_j^T + e_j e_i^T (or e_i e_i^T on the diagonal).
        let mut e = DMatrix::<T>::zeros(n, n);
        e[(i, j)] = T::one();
        e[(j, i)] = T::one();
        let ea = &e * a;
        let lyap = &ea + ea.transpose();
        for (row, &(r, s)) in index.iter().enumerate() {
            op[(row, col)] = lyap[(r, s)] * sa;
        }
        let eb = &e * b;
        for q in 0..m {
            for r in 0..n {
                op[(k + q * n + r, col)] = eb[(r, q)] * sb;
            }
        }
    }
    let mut rhs = DVector::<T>::zeros(rows);
    for q in 0..m {
        for r in 0..n {
            rhs[k + q * n + r] = c[(q, r)] * sb;
        }
    }

    let svd = op.clone().svd(true, true);
    let smax = svd.singular_values.iter().copied().fold(T::zero(), |x, y| x.max(y));
    let thresh = tol_t * smax * lit::<T>((rows.max(k)) as f64).sqrt();
    let nullity = svd.singular_values.iter().filter(|&&s| s <= thresh).count();
    if nullity > 0 {
        return Err(Error::NotUnique(nullity));
    }
    let x = svd
        .solve(&rhs, thresh)
        .map_err(|e| Error::IllConditioned(format!("certificate least squares: {e}")))?;

    let mut p = DMatrix::<T>::zeros(n, n);
    for (col, &(i, j)) in index.iter().enumerate() {
        p[(i, j)] = x[col];
        p[(j, i)] = x[col];
    }

    let (residual_eq_a, residual_eq_b, _) = residuals(sys, &p);
    let pn = fro(&p);
    if residual_eq_a > tol_t * (T::one() + fro(a) * pn) || residual_eq_b > tol_t * (T::one() + fro(c)) {
        return Err(Error::NotLossless { residual_a: to_f64(residual_eq_a), residual_b: to_f64(residual_eq_b) });
    }
    let min_eigenvalue = sym_eig_range(&p).0;
    if min_eigenvalue <= tol_t * pn {
        return Err(Error::NotPositiveDefinite(to_f64(min_eigenvalue)));
    }
    Ok(LosslessCertificate { p, residual_eq_a, residual_eq_b, min_eigenvalue })
}

fn trace_cb<T: Real>(sys: &StateSpace<T>) -> Result<T> {
    let tr = (sys.c() * sys.b()).trace();
    let floor = tol_floor::<T>(DEFAULT_CERT_TOL) * (T::one() + fro(sys.c()) * fro(sys.b()));
    if tr < -floor {
        return Err(Error::NegativeTrace(to_f64(tr)));
    }
    Ok(tr.max(T::zero()))
}

/// `sqrt(2 tr(C B))` after certifying `sys`.
pub fn h2_limit<T: Real>(sys: &StateSpace<T>) -> Result<T> {
    LosslessSystem::certify(sys.clone(), DEFAULT_CERT_TOL)?.h2_limit()
}

/// `sqrt(2)` after certifying `sys`; requires `D = 0`.
pub fn hinf_limit<T: Real>(sys: &StateSpace<T>) -> Result<T> {
    LosslessSystem::certify(sys.clone(), DEFAULT_CERT_TOL)?.hinf_limit()
}

/// A state-space system bundled with a verified storage certificate.
///
/// Controller synthesis only accepts this type, so every synthesized design
/// was preceded by a successful losslessness check.
#[derive(Debug, Clone, PartialEq)]
pub struct LosslessSystem<T: Real> {
    sys: StateSpace<T>,
    certificate: LosslessCertificate<T>,
}

impl<T: Real> LosslessSystem<T> {
    /// Finds the certificate with [`find_certificate`].
    pub fn certify(sys: StateSpace<T>, tol: f64) -> Result<Self> {
        let certificate = find_certificate(&sys, tol)?;
        Ok(Self { sys, certificate })
    }

    /// Accepts a caller-supplied certificate after [`verify_certificate`].
    pub fn with_certificate(sys: StateSpace<T>, p: DMatrix<T>, tol: f64) -> Result<Self> {
        let tol_t: T = tol_floor(tol);
        check_skew_feedthrough(&sys, tol_t)?;
        let check = verify_certificate(&sys, &p, tol)?;
        if !check.valid {
            if check.min_eigenvalue <= tol_t {
                return Err(Error::NotPositiveDefinite(to_f64(check.min_eigenvalue)));
            }
            return Err(Error::NotLossless {
                residual_a: to_f64(check.residual_eq_a),
                residual_b: to_f64(check.residual_eq_b),
            });
        }
        let certificate = LosslessCertificate {
            p,
            residual_eq_a: check.residual_eq_a,
            residual_eq_b: check.residual_eq_b,
            min_eigenvalue: check.min_eigenvalue,
        };
        Ok(Self { sys, certificate })
    }

    pub fn sys(&self) -> &StateSpace<T> {
        &self.sys
    }

    pub fn certificate(&self) -> &LosslessCertificate<T> {
        &self.certificate
    }

    pub fn p(&self) -> &DMatrix<T> {
        &self.certificate.p
    }

    /// `sqrt(2 tr(C B))`, computed from `B` and `C` directly.
    pub fn h2_limit(&self) -> Result<T> {
        let tr = trace_cb(&self.sys)?;
        debug_assert!({
            let b = self.sys.b();
            let alt = (b.transpose() * self.p() * b).trace();
            (alt - tr).abs() <= lit::<T>(1e-6) * (T::one() + tr.abs())
        });
        Ok((tr * lit(2.0)).sqrt())
    }

    /// `sqrt(2)`; fails with [`Error::NonzeroFeedthrough`] when `D != 0`.
    pub fn hinf_limit(&self) -> Result<T> {
        if !self.sys.has_zero_feedthrough() {
            let dmax = self.sys.d().iter().fold(0.0f64, |acc, v| acc.max(to_f64(v.abs())));
            return Err(Error::NonzeroFeedthrough(dmax));
        }
        Ok(lit::<T>(2.0).sqrt())
    }

    pub fn limits(&self) -> Result<FundamentalLimits<T>> {
        Ok(FundamentalLimits { gamma_h2: self.h2_limit()?, gamma_hinf: self.hinf_limit().ok() })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn rotation() -> StateSpace<f64> {
        StateSpace::strictly_proper(
            DMatrix::from_row_slice(2, 2, &[0.0, -1.0, 1.0, 0.0]),
            DMatrix::from_row_slice(2, 1, &[1.0, 0.0]),
            DMatrix::from_row_slice(1, 2, &[1.0, 0.0]),
        )
        .unwrap()
    }

    #[test]
    fn skew_system_has_identity_certificate() {
        let cert = find_certificate(&rotation(), DEFAULT_CERT_TOL).unwrap();
        assert_relative_eq!(cert.p().clone(), DMatrix::identity(2, 2), epsilon = 1e-12);
        assert_relative_eq!(h2_limit(&rotation()).unwrap(), 2f64.sqrt(), epsilon = 1e-14);
        assert_relative_eq!(hinf_limit(&rotation()).unwrap(), 2f64.sqrt(), epsilon = 1e-15);
    }

    #[test]
    fn damped_system_is_not_lossless() {
        let one = DMatrix::from_element(1, 1, 1.0);
        let g = StateSpace::strictly_proper(-one.clone(), one.clone(), one).unwrap();
        assert!(matches!(find_certificate(&g, DEFAULT_CERT_TOL), Err(Error::NotLossless { .. })));
    }

    #[test]
    fn negative_identity_fails_verification() {
        let g = rotation();
        assert!(verify_certificate(&g, &DMatrix::identity(2, 2), 1e-9).unwrap().valid);
        assert!(!verify_certificate(&g, &-DMatrix::identity(2, 2), 1e-9).unwrap().valid);
    }

    #[test]
    fn skew_feedthrough_blocks_hinf_limit() {
        let d = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, -1.0, 0.0]);
        let g = StateSpace::new(
            DMatrix::from_row_slice(2, 2, &[0.0, -1.0, 1.0, 0.0]),
            DMatrix::identity(2, 2),
            DMatrix::identity(2, 2),
            d,
        )
        .unwrap();
        let ls = LosslessSystem::certify(g, DEFAULT_CERT_TOL).unwrap();
        assert_relative_eq!(ls.h2_limit().unwrap(), 2.0, epsilon = 1e-14);
        assert!(matches!(ls.hinf_limit(), Err(Error::NonzeroFeedthrough(_))));
    }

    #[test]
    fn symmetric_feedthrough_rejected() {
        let g = StateSpace::new(
            DMatrix::zeros(1, 1),
            DMatrix::from_element(1, 1, 1.0),
            DMatrix::from_element(1, 1, 1.0),
            DMatrix::from_element(1, 1, 0.5),
        )
        .unwrap();
        assert!(matches!(find_certificate(&g, 1e-9), Err(Error::SkewFeedthroughViolated(_))));
    }

    #[test]
    fn uncontrollable_pair_is_not_unique() {
        // The second oscillator is invisible from B and C.
        let mut a = DMatrix::zeros(4, 4);
        a[(0, 1)] = -1.0;
        a[(1, 0)] = 1.0;
        a[(2, 3)] = -2.0;
        a[(3, 2)] = 2.0;
        let b = DMatrix::from_row_slice(4, 1, &[1.0, 0.0, 0.0, 0.0]);
        let g = StateSpace::strictly_proper(a, b.clone(), b.transpose()).unwrap();
        assert!(matches!(find_certificate(&g, 1e-9), Err(Error::NotUnique(_))));
    }
}
