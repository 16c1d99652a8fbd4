//! Real Schur decomposition `A = U T U^T` with eigenvalue reordering.
//!
//! Householder reduction to Hessenberg form followed by the Francis
//! double-shift QR iteration with Wilkinson and ad hoc exceptional shifts.
//! `T` is quasi upper triangular: 1x1 blocks carry real eigenvalues, 2x2
//! blocks carry complex conjugate pairs (real pairs are always split).
//! [`RealSchur::reorder`] moves a selected set of blocks to the leading
//! positions by adjacent block swaps, which is what the Riccati solver needs
//! to extract a stable invariant subspace.

use nalgebra::{Complex, DMatrix};

use super::dense::small_sylvester;
use crate::error::{Error, Result};
use crate::scalar::{eps, lit, Real};

/// Total QR sweeps allowed per row of the matrix (counting at least ten rows).
const MAX_ITER_PER_ROW: usize = 30;

#[derive(Debug, Clone)]
pub struct RealSchur<T: Real> {
    t: DMatrix<T>,
    u: DMatrix<T>,
    /// Sizes (1 or 2) of the diagonal blocks of `t`, top to bottom.
    blocks: Vec<usize>,
}

/// Row-major square work matrix.
struct Sq<T> {
    n: usize,
    v: Vec<T>,
}

impl<T: Real> Sq<T> {
    fn from_dmatrix(a: &DMatrix<T>) -> Self {
        let n = a.nrows();
        let mut v = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                v.push(a[(i, j)]);
            }
        }
        Self { n, v }
    }

    fn identity(n: usize) -> Self {
        let mut v = vec![T::zero(); n * n];
        for i in 0..n {
            v[i * n + i] = T::one();
        }
        Self { n, v }
    }

    fn to_dmatrix(&self) -> DMatrix<T> {
        DMatrix::from_row_slice(self.n, self.n, &self.v)
    }

    #[inline(always)]
    fn get(&self, i: usize, j: usize) -> T {
        self.v[i * self.n + j]
    }

    #[inline(always)]
    fn set(&mut self, i: usize, j: usize, x: T) {
        self.v[i * self.n + j] = x;
    }
}

/// Householder reduction to upper Hessenberg form. Accumulates the
/// orthogonal factor into `v` when given. Entries below the subdiagonal are
/// zeroed on return.
fn orthes<T: Real>(h: &mut Sq<T>, mut v: Option<&mut Sq<T>>) {
    let n = h.n;
    if n < 3 {
        return;
    }
    let high = n - 1;
    let mut ort = vec![T::zero(); n];
    let mut fs = vec![T::zero(); n];
    for m in 1..high {
        let mut scale = T::zero();
        for i in m..=high {
            scale += h.get(i, m - 1).abs();
        }
        if scale.is_zero() {
            continue;
        }
        let mut hh = T::zero();
        for i in (m..=high).rev() {
            ort[i] = h.get(i, m - 1) / scale;
            hh += ort[i] * ort[i];
        }
        let mut g = hh.sqrt();
        if ort[m] > T::zero() {
            g = -g;
        }
        hh -= ort[m] * g;
        ort[m] -= g;

        // H = (I - u u^T / h) H (I - u u^T / h)
        // Row-major friendly: accumulate u^T H across rows, then update rows.
        for x in fs[m..].iter_mut() {
            *x = T::zero();
        }
        for i in m..=high {
            let oi = ort[i];
            let row = &h.v[i * n..(i + 1) * n];
            for j in m..n {
                fs[j] += oi * row[j];
            }
        }
        for x in fs[m..].iter_mut() {
            *x /= hh;
        }
        for i in m..=high {
            let oi = ort[i];
            let row = &mut h.v[i * n..(i + 1) * n];
            for j in m..n {
                row[j] -= fs[j] * oi;
            }
        }
        for i in 0..=high {
            let row = &mut h.v[i * n..(i + 1) * n];
            let mut f = T::zero();
            for j in (m..=high).rev() {
                f += ort[j] * row[j];
            }
            f /= hh;
            for j in m..=high {
                row[j] -= f * ort[j];
            }
        }
        ort[m] *= scale;
        h.set(m, m - 1, scale * g);
    }

    if let Some(v) = v.as_deref_mut() {
        for m in (1..high).rev() {
            let hm = h.get(m, m - 1);
            if hm.is_zero() {
                continue;
            }
            for i in m + 1..=high {
                ort[i] = h.get(i, m - 1);
            }
            for j in m..=high {
                let mut g = T::zero();
                for i in m..=high {
                    g += ort[i] * v.get(i, j);
                }
                // Double division avoids possible underflow.
                g = (g / ort[m]) / hm;
                for i in m..=high {
                    let x = v.get(i, j) + g * ort[i];
                    v.set(i, j, x);
                }
            }
        }
    }

    for i in 2..n {
        for j in 0..i - 1 {
            h.set(i, j, T::zero());
        }
    }
}

/// Francis double-shift QR on an upper Hessenberg matrix.
///
/// With `want_t` the full quasi-triangular form is produced (and `v`, when
/// given, accumulates the transformations); without it only the active window
/// is updated, which is enough for eigenvalues. Returns the imaginary parts
/// per position (nonzero marks the two rows of a complex 2x2 block).
#[allow(unused_assignments)]
fn hqr<T: Real>(h: &mut Sq<T>, mut v: Option<&mut Sq<T>>, want_t: bool) -> Result<Vec<T>> {
    let nn = h.n;
    let mut wi = vec![T::zero(); nn];
    if nn == 0 {
        return Ok(wi);
    }
    let low = 0usize;
    let high = nn - 1;
    let epsilon = eps::<T>();
    let half: T = lit(0.5);
    let mut exshift = T::zero();
    let (mut p, mut q, mut r, mut s, mut z) =
        (T::zero(), T::zero(), T::zero(), T::zero(), T::zero());
    let (mut w, mut x, mut y);

    let mut norm = T::zero();
    for i in 0..nn {
        for j in i.saturating_sub(1)..nn {
            norm += h.get(i, j).abs();
        }
    }

    let mut n = nn as isize - 1;
    let mut iter = 0usize;
    let mut total_iter = 0usize;
    while n >= low as isize {
        let nu = n as usize;
        // Look for a single small subdiagonal element.
        let mut l = nu;
        while l > low {
            s = h.get(l - 1, l - 1).abs() + h.get(l, l).abs();
            if s.is_zero() {
                s = norm;
            }
            if h.get(l, l - 1).abs() <= epsilon * s {
                break;
            }
            l -= 1;
        }
        // Columns/rows touched by updates in the current window.
        let col_end = if want_t { nn } else { nu + 1 };
        let row_start = if want_t { 0 } else { l };

        if l == nu {
            // One root found.
            let d = h.get(nu, nu) + exshift;
            h.set(nu, nu, d);
            if nu > 0 {
                h.set(nu, nu - 1, T::zero());
            }
            n -= 1;
            iter = 0;
        } else if l == nu - 1 {
            // Two roots found.
            w = h.get(nu, nu - 1) * h.get(nu - 1, nu);
            p = (h.get(nu - 1, nu - 1) - h.get(nu, nu)) * half;
            q = p * p + w;
            z = q.abs().sqrt();
            let a = h.get(nu, nu) + exshift;
            h.set(nu, nu, a);
            let b = h.get(nu - 1, nu - 1) + exshift;
            h.set(nu - 1, nu - 1, b);

            if q >= T::zero() {
                // Real pair: rotate to split the block.
                z = if p >= T::zero() { p + z } else { p - z };
                x = h.get(nu, nu - 1);
                s = x.abs() + z.abs();
                p = x / s;
                q = z / s;
                r = (p * p + q * q).sqrt();
                p /= r;
                q /= r;
                for j in (nu - 1)..col_end {
                    z = h.get(nu - 1, j);
                    let hn = h.get(nu, j);
                    h.set(nu - 1, j, q * z + p * hn);
                    h.set(nu, j, q * hn - p * z);
                }
                for i in row_start..=nu {
                    z = h.get(i, nu - 1);
                    let hn = h.get(i, nu);
                    h.set(i, nu - 1, q * z + p * hn);
                    h.set(i, nu, q * hn - p * z);
                }
                if let Some(v) = v.as_deref_mut() {
                    for i in low..=high {
                        z = v.get(i, nu - 1);
                        let vn = v.get(i, nu);
                        v.set(i, nu - 1, q * z + p * vn);
                        v.set(i, nu, q * vn - p * z);
                    }
                }
                h.set(nu, nu - 1, T::zero());
            } else {
                wi[nu - 1] = z;
                wi[nu] = -z;
            }
            if nu >= 2 {
                h.set(nu - 1, nu - 2, T::zero());
            }
            n -= 2;
            iter = 0;
        } else {
            // No convergence yet: form shift.
            x = h.get(nu, nu);
            y = T::zero();
            w = T::zero();
            if l < nu {
                y = h.get(nu - 1, nu - 1);
                w = h.get(nu, nu - 1) * h.get(nu - 1, nu);
            }
            let exceptional = iter > 0 && iter % 10 == 0;
            if exceptional && (iter / 10) % 2 == 1 {
                // Wilkinson's original ad hoc shift.
                exshift += x;
                for i in low..=nu {
                    let d = h.get(i, i) - x;
                    h.set(i, i, d);
                }
                s = h.get(nu, nu - 1).abs() + h.get(nu - 1, nu - 2).abs();
                x = lit::<T>(0.75) * s;
                y = x;
                w = lit::<T>(-0.4375) * s * s;
            }
            if exceptional && (iter / 10) % 2 == 0 {
                s = (y - x) * half;
                s = s * s + w;
                if s > T::zero() {
                    s = s.sqrt();
                    if y < x {
                        s = -s;
                    }
                    s = x - w / ((y - x) * half + s);
                    for i in low..=nu {
                        let d = h.get(i, i) - s;
                        h.set(i, i, d);
                    }
                    exshift += s;
                    x = lit(0.964);
                    y = x;
                    w = x;
                }
            }
            iter += 1;
            total_iter += 1;
            if total_iter > MAX_ITER_PER_ROW * nn.max(10) {
                return Err(Error::NoConvergence(total_iter));
            }

            // Look for two consecutive small subdiagonal elements.
            let mut m = nu - 2;
            loop {
                z = h.get(m, m);
                r = x - z;
                s = y - z;
                p = (r * s - w) / h.get(m + 1, m) + h.get(m, m + 1);
                q = h.get(m + 1, m + 1) - z - r - s;
                r = h.get(m + 2, m + 1);
                s = p.abs() + q.abs() + r.abs();
                p /= s;
                q /= s;
                r /= s;
                if m == l {
                    break;
                }
                let lhs = h.get(m, m - 1).abs() * (q.abs() + r.abs());
                let rhs = epsilon
                    * (p.abs() * (h.get(m - 1, m - 1).abs() + z.abs() + h.get(m + 1, m + 1).abs()));
                if lhs < rhs {
                    break;
                }
                m -= 1;
            }
            for i in m + 2..=nu {
                h.set(i, i - 2, T::zero());
                if i > m + 2 {
                    h.set(i, i - 3, T::zero());
                }
            }

            // Double QR step on rows l..=n and columns m..=n.
            for k in m..nu {
                let notlast = k != nu - 1;
                if k != m {
                    p = h.get(k, k - 1);
                    q = h.get(k + 1, k - 1);
                    r = if notlast { h.get(k + 2, k - 1) } else { T::zero() };
                    x = p.abs() + q.abs() + r.abs();
                    if x.is_zero() {
                        continue;
                    }
                    p /= x;
                    q /= x;
                    r /= x;
                }
                s = (p * p + q * q + r * r).sqrt();
                if p < T::zero() {
                    s = -s;
                }
                if s.is_zero() {
                    continue;
                }
                if k != m {
                    h.set(k, k - 1, -s * x);
                } else if l != m {
                    let d = -h.get(k, k - 1);
                    h.set(k, k - 1, d);
                }
                p += s;
                x = p / s;
                y = q / s;
                z = r / s;
                q /= p;
                r /= p;

                // Row modification.
                let nc = h.n;
                for j in k..col_end {
                    let (r0, r1) = (k * nc + j, (k + 1) * nc + j);
                    let mut pp = h.v[r0] + q * h.v[r1];
                    if notlast {
                        let r2 = (k + 2) * nc + j;
                        pp += r * h.v[r2];
                        h.v[r2] -= pp * z;
                    }
                    h.v[r0] -= pp * x;
                    h.v[r1] -= pp * y;
                }
                // Column modification.
                let imax = nu.min(k + 3);
                for i in row_start..=imax {
                    let row = &mut h.v[i * nc..(i + 1) * nc];
                    let mut pp = x * row[k] + y * row[k + 1];
                    if notlast {
                        pp += z * row[k + 2];
                        row[k + 2] -= pp * r;
                    }
                    row[k] -= pp;
                    row[k + 1] -= pp * q;
                }
                if let Some(v) = v.as_deref_mut() {
                    for i in low..=high {
                        let row = &mut v.v[i * nc..(i + 1) * nc];
                        let mut pp = x * row[k] + y * row[k + 1];
                        if notlast {
                            pp += z * row[k + 2];
                            row[k + 2] -= pp * r;
                        }
                        row[k] -= pp;
                        row[k + 1] -= pp * q;
                    }
                }
            }
        }
    }
    Ok(wi)
}

fn block_eigs<T: Real>(t: &DMatrix<T>, start: usize, size: usize) -> (Complex<T>, Complex<T>) {
    if size == 1 {
        let v = Complex::new(t[(start, start)], T::zero());
        return (v, v);
    }
    let (a, b, c, d) = (
        t[(start, start)],
        t[(start, start + 1)],
        t[(start + 1, start)],
        t[(start + 1, start + 1)],
    );
    let half: T = lit(0.5);
    let re = (a + d) * half;
    let disc = ((a - d) * half).powi(2) + b * c;
    if disc >= T::zero() {
        // Only reachable through roundoff after a swap; report as real pair.
        let s = disc.sqrt();
        (Complex::new(re + s, T::zero()), Complex::new(re - s, T::zero()))
    } else {
        let im = (-disc).sqrt();
        (Complex::new(re, im), Complex::new(re, -im))
    }
}

/// Eigenvalues of a square matrix (Hessenberg QR without Schur vectors).
pub fn eigenvalues<T: Real>(a: &DMatrix<T>) -> Result<Vec<Complex<T>>> {
    let mut h = Sq::from_dmatrix(a);
    orthes(&mut h, None);
    let wi = hqr(&mut h, None, false)?;
    let n = h.n;
    let mut out = Vec::with_capacity(n);
    let mut i = 0;
    while i < n {
        if i + 1 < n && !wi[i].is_zero() {
            // Diagonal of a complex 2x2 block: both entries hold the real part
            // after convergence only up to an orthogonal rotation, so use the
            // block trace.
            let re = (h.get(i, i) + h.get(i + 1, i + 1)) * lit(0.5);
            out.push(Complex::new(re, wi[i].abs()));
            out.push(Complex::new(re, -wi[i].abs()));
            i += 2;
        } else {
            out.push(Complex::new(h.get(i, i), T::zero()));
            i += 1;
        }
    }
    Ok(out)
}

/// Largest real part over the spectrum of `a` (`-inf` for an empty matrix).
pub fn spectral_abscissa<T: Real>(a: &DMatrix<T>) -> Result<T> {
    let ev = eigenvalues(a)?;
    Ok(ev.iter().map(|z| z.re).fold(lit(f64::NEG_INFINITY), |acc, v| acc.max(v)))
}

impl<T: Real> RealSchur<T> {
    pub fn new(a: &DMatrix<T>) -> Result<Self> {
        if !a.is_square() {
            return Err(Error::DimensionMismatch("Schur form needs a square matrix".into()));
        }
        let n = a.nrows();
        let mut h = Sq::from_dmatrix(a);
        let mut v = Sq::identity(n);
        orthes(&mut h, Some(&mut v));
        let wi = hqr(&mut h, Some(&mut v), true)?;
        let mut blocks = Vec::new();
        let mut i = 0;
        while i < n {
            if i + 1 < n && !wi[i].is_zero() {
                blocks.push(2);
                i += 2;
            } else {
                blocks.push(1);
                i += 1;
            }
        }
        let mut t = h.to_dmatrix();
        // Clean everything below the block diagonal.
        let mut start = 0;
        for &bs in &blocks {
            for j in start..start + bs {
                for r in start + bs..n {
                    t[(r, j)] = T::zero();
                }
            }
            start += bs;
        }
        Ok(Self { t, u: v.to_dmatrix(), blocks })
    }

    /// Quasi-triangular factor.
    pub fn t(&self) -> &DMatrix<T> {
        &self.t
    }

    /// Orthogonal factor (columns are Schur vectors).
    pub fn u(&self) -> &DMatrix<T> {
        &self.u
    }

    pub fn block_sizes(&self) -> &[usize] {
        &self.blocks
    }

    /// `(start, size)` for every diagonal block.
    pub fn block_ranges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::with_capacity(self.blocks.len());
        let mut start = 0;
        for &bs in &self.blocks {
            out.push((start, bs));
            start += bs;
        }
        out
    }

    pub fn eigenvalues(&self) -> Vec<Complex<T>> {
        let mut out = Vec::with_capacity(self.t.nrows());
        for (start, size) in self.block_ranges() {
            let (a, b) = block_eigs(&self.t, start, size);
            out.push(a);
            if size == 2 {
                out.push(b);
            }
        }
        out
    }

    /// Reorders the form so that every block whose eigenvalue satisfies
    /// `select` comes first. Returns the dimension of the leading invariant
    /// subspace spanned by the first columns of `U`.
    pub fn reorder<F: Fn(Complex<T>) -> bool>(&mut self, select: F) -> Result<usize> {
        let ranges = self.block_ranges();
        let mut sel: Vec<bool> = ranges
            .iter()
            .map(|&(s, size)| select(block_eigs(&self.t, s, size).0))
            .collect();
        let mut dest = 0;
        for b in 0..self.blocks.len() {
            if !sel[b] {
                continue;
            }
            let mut j = b;
            while j > dest {
                self.swap_adjacent(j - 1)?;
                self.blocks.swap(j - 1, j);
                sel.swap(j - 1, j);
                j -= 1;
            }
            dest += 1;
        }
        Ok(self.blocks[..dest].iter().sum())
    }

    /// Swaps diagonal blocks `k` and `k + 1` with an orthogonal similarity.
    fn swap_adjacent(&mut self, k: usize) -> Result<()> {
        let start: usize = self.blocks[..k].iter().sum();
        let p = self.blocks[k];
        let q = self.blocks[k + 1];
        let n = self.t.nrows();
        let w = p + q;

        let mut a11 = [[T::zero(); 2]; 2];
        let mut a22 = [[T::zero(); 2]; 2];
        let mut a12 = [[T::zero(); 2]; 2];
        for i in 0..p {
            for j in 0..p {
                a11[i][j] = self.t[(start + i, start + j)];
            }
            for j in 0..q {
                a12[i][j] = self.t[(start + i, start + p + j)];
            }
        }
        for i in 0..q {
            for j in 0..q {
                a22[i][j] = -self.t[(start + p + i, start + p + j)];
            }
        }
        let scale = self.t.view((start, start), (w, w)).norm();
        let tiny = eps::<T>() * scale;
        // A11 X - X A22 = A12
        let x = small_sylvester(p, q, &a11, &a22, &a12, tiny).ok_or_else(|| {
            Error::IllConditioned("Schur block swap with (nearly) equal eigenvalues".into())
        })?;

        // Columns 0..q of [[-X, I_p], [I_q, 0]] span the invariant subspace
        // of the second block.
        let mut basis = DMatrix::<T>::zeros(w, w);
        for i in 0..p {
            for j in 0..q {
                basis[(i, j)] = -x[i][j];
            }
            basis[(i, q + i)] = T::one();
        }
        for i in 0..q {
            basis[(p + i, i)] = T::one();
        }
        let qmat = basis.qr().q();

        let rows = self.t.rows(start, w).clone_owned();
        self.t.rows_mut(start, w).copy_from(&(qmat.transpose() * rows));
        let cols = self.t.columns(start, w).clone_owned();
        self.t.columns_mut(start, w).copy_from(&(cols * &qmat));
        let ucols = self.u.columns(start, w).clone_owned();
        self.u.columns_mut(start, w).copy_from(&(ucols * &qmat));

        let resid = self.t.view((start + q, start), (p, q)).norm();
        if resid > lit::<T>(1e-6) * scale.max(T::one()) {
            return Err(Error::IllConditioned(format!(
                "Schur block swap lost accuracy (residual {:.3e})",
                crate::scalar::to_f64(resid)
            )));
        }
        for i in start + q..n {
            for j in start..start + q {
                self.t[(i, j)] = T::zero();
            }
        }
        // A 2x2 block leaving the swap may have its subdiagonal pattern
        // disturbed below the block; only in-block entries survive.
        for i in start + w..n {
            for j in start..start + w {
                self.t[(i, j)] = T::zero();
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn check_decomposition(a: &DMatrix<f64>, s: &RealSchur<f64>, tol: f64) {
        let recon = s.u() * s.t() * s.u().transpose();
        let err = (&recon - a).norm() / (1.0 + a.norm());
        assert!(err < tol, "reconstruction error {err}");
        let orth = (s.u().transpose() * s.u() - DMatrix::identity(a.nrows(), a.nrows())).norm();
        assert!(orth < tol, "orthogonality error {orth}");
        let mut start = 0;
        for &bs in s.block_sizes() {
            for r in start + bs..a.nrows() {
                for c in start..start + bs {
                    assert_eq!(s.t()[(r, c)], 0.0);
                }
            }
            start += bs;
        }
    }

    fn pseudo_random(n: usize, seed: u64) -> DMatrix<f64> {
        let mut state = seed;
        DMatrix::from_fn(n, n, |_, _| {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((state >> 11) as f64 / (1u64 << 53) as f64) * 2.0 - 1.0
        })
    }

    #[test]
    fn cyclic_permutations_converge() {
        for n in [2, 3, 4, 5, 8, 16] {
            let a = DMatrix::from_fn(n, n, |i, j| if (i + 1) % n == j { 1.0 } else { 0.0 });
            let s = RealSchur::new(&a).unwrap();
            check_decomposition(&a, &s, 1e-12);
            for ev in s.eigenvalues() {
                assert!((ev.norm() - 1.0).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn random_matrices_decompose() {
        for (k, n) in [1usize, 2, 3, 7, 20, 45].into_iter().enumerate() {
            let a = pseudo_random(n, 11 + k as u64);
            let s = RealSchur::new(&a).unwrap();
            check_decomposition(&a, &s, 1e-11);
            let tr: f64 = s.eigenvalues().iter().map(|z| z.re).sum();
            assert!((tr - a.trace()).abs() < 1e-10 * (1.0 + a.norm()));
        }
    }

    #[test]
    fn zero_and_empty_matrices() {
        let s = RealSchur::new(&DMatrix::<f64>::zeros(6, 6)).unwrap();
        assert!(s.eigenvalues().iter().all(|z| z.norm() == 0.0));
        let e = RealSchur::new(&DMatrix::<f64>::zeros(0, 0)).unwrap();
        assert!(e.eigenvalues().is_empty());
    }

    #[test]
    fn eigenvalues_only_matches_schur() {
        let a = pseudo_random(30, 5);
        let mut fast: Vec<_> = eigenvalues(&a).unwrap();
        let mut full = RealSchur::new(&a).unwrap().eigenvalues();
        let key = |z: &Complex<f64>| (z.re * 1e6).round() as i64 * 1_000_000 + (z.im * 1e3).round() as i64;
        fast.sort_by_key(key);
        full.sort_by_key(key);
        for (x, y) in fast.iter().zip(&full) {
            assert!((x - y).norm() < 1e-9);
        }
    }

    #[test]
    fn reorder_moves_stable_blocks_first() {
        for seed in 0..6 {
            let a = pseudo_random(12, 100 + seed);
            let mut s = RealSchur::new(&a).unwrap();
            let stable = s.eigenvalues().iter().filter(|z| z.re < 0.0).count();
            let k = s.reorder(|z| z.re < 0.0).unwrap();
            assert_eq!(k, stable);
            check_decomposition(&a, &s, 1e-10);
            let ev = s.eigenvalues();
            assert!(ev[..k].iter().all(|z| z.re < 0.0));
            assert!(ev[k..].iter().all(|z| z.re >= 0.0));
        }
    }

    #[test]
    fn f32_decomposition() {
        let a = DMatrix::<f32>::from_row_slice(3, 3, &[0.0, -1.0, 0.5, 1.0, 0.0, 0.2, 0.0, 0.3, -2.0]);
        let s = RealSchur::new(&a).unwrap();
        let recon = s.u() * s.t() * s.u().transpose();
        assert!((recon - a).norm() < 1e-5);
    }
}
