//! System norms and frequency response.

use nalgebra::{Complex, DMatrix};

use super::dense::{sigma_max, sigma_max_complex};
use super::lyapunov::{check_hurwitz, LyapunovSolver};
use super::schur::eigenvalues;
use super::statespace::StateSpace;
use crate::error::{Error, Result};
use crate::scalar::{lit, to_f64, tol_floor, Real};

/// Default relative accuracy of [`hinf_norm`].
pub const DEFAULT_HINF_TOL: f64 = 1e-6;
/// Iteration cap of the H-infinity search.
pub const HINF_MAX_ITER: usize = 80;
const BRACKET_DOUBLINGS: usize = 30;
const SAFEGUARD_AFTER: usize = 12;

/// `G(jw) = C (jw I - A)^-1 B + D`.
pub fn frequency_response<T: Real>(sys: &StateSpace<T>, omega: T) -> Result<DMatrix<Complex<T>>> {
    let d = sys.d().map(|x| Complex::new(x, T::zero()));
    if sys.n() == 0 {
        return Ok(d);
    }
    let n = sys.n();
    let mut m = sys.a().map(|x| Complex::new(-x, T::zero()));
    for i in 0..n {
        m[(i, i)] += Complex::new(T::zero(), omega);
    }
    let b = sys.b().map(|x| Complex::new(x, T::zero()));
    let x = m.lu().solve(&b).ok_or_else(|| {
        Error::IllConditioned(format!("jwI - A is singular at w = {:.6e}", to_f64(omega)))
    })?;
    let c = sys.c().map(|v| Complex::new(v, T::zero()));
    Ok(c * x + d)
}

/// Largest singular value of `G(jw)`.
pub fn sigma_at<T: Real>(sys: &StateSpace<T>, omega: T) -> Result<T> {
    Ok(sigma_max_complex(&frequency_response(sys, omega)?))
}

/// `||G||_H2 = sqrt(tr(C Wc C^T))` with `A Wc + Wc A^T + B B^T = 0`.
///
/// Systems with a nonzero `D` have infinite H2 norm and are rejected with
/// [`Error::NonzeroFeedthrough`].
pub fn h2_norm<T: Real>(sys: &StateSpace<T>) -> Result<T> {
    if !sys.has_zero_feedthrough() {
        let dmax = sys.d().iter().fold(0.0f64, |acc, v| acc.max(to_f64(v.abs())));
        return Err(Error::NonzeroFeedthrough(dmax));
    }
    if sys.n() == 0 {
        return Ok(T::zero());
    }
    let solver = LyapunovSolver::new(sys.a())?;
    h2_norm_with(&solver, sys.b(), sys.c())
}

/// H2 norm of `(A, B, C, 0)` reusing a factored Lyapunov solver for `A`.
pub fn h2_norm_with<T: Real>(solver: &LyapunovSolver<T>, b: &DMatrix<T>, c: &DMatrix<T>) -> Result<T> {
    let (wc, _) = solver.solve(&(b * b.transpose()))?;
    let tr = (c * wc * c.transpose()).trace();
    Ok(tr.max(T::zero()).sqrt())
}

/// Options for [`hinf_norm_with`].
#[derive(Debug, Clone)]
pub struct HinfOptions<T> {
    /// Relative accuracy: the returned value is within `tol * (1 + norm)`.
    pub tol: f64,
    /// A known lower bound, typically a sampled `sigma_max(G(jw))`.
    pub lower_bound: Option<T>,
    /// Frequencies to sample before the iteration starts; the default
    /// samples `w = 0` only.
    pub frequencies: Vec<T>,
    /// Skip the Hurwitz check when the caller has already done it.
    pub assume_stable: bool,
}

impl<T: Real> Default for HinfOptions<T> {
    fn default() -> Self {
        Self { tol: DEFAULT_HINF_TOL, lower_bound: None, frequencies: vec![T::zero()], assume_stable: false }
    }
}

/// Result of the H-infinity computation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HinfResult<T> {
    pub value: T,
    pub lower: T,
    pub upper: T,
    /// Frequency at which the lower bound was attained.
    pub peak_frequency: T,
    /// Number of Hamiltonian eigenvalue tests.
    pub iterations: usize,
}

/// `||G||_Hinf` to relative accuracy `tol`.
pub fn hinf_norm<T: Real>(sys: &StateSpace<T>, tol: f64) -> Result<T> {
    let opts = HinfOptions { tol, ..HinfOptions::default() };
    hinf_norm_with(sys, &opts).map(|r| r.value)
}

/// H-infinity norm by the Hamiltonian imaginary-axis test.
///
/// The lower bound is always an evaluated `sigma_max(G(jw))`. A trial level
/// `gamma` just above it is tested; when the Hamiltonian has eigenvalues on
/// the imaginary axis, the response is sampled at those frequencies and at
/// their midpoints, which raises the lower bound (Bruinsma–Steinbuch). After
/// a few slow steps the search switches to bisection against an upper
/// bracket.
pub fn hinf_norm_with<T: Real>(sys: &StateSpace<T>, opts: &HinfOptions<T>) -> Result<HinfResult<T>> {
    let tol: T = tol_floor(opts.tol);
    let dnorm = sigma_max(sys.d());
    if sys.n() == 0 || sys.m() == 0 || sys.p() == 0 {
        return Ok(HinfResult { value: dnorm, lower: dnorm, upper: dnorm, peak_frequency: T::zero(), iterations: 0 });
    }
    if !opts.assume_stable {
        check_hurwitz(sys.a())?;
    }

    let mut lb = dnorm;
    let mut peak = T::zero();
    let sample = |w: T, lb: &mut T, peak: &mut T| -> Result<()> {
        let s = sigma_at(sys, w)?;
        if s > *lb {
            *lb = s;
            *peak = w;
        }
        Ok(())
    };
    for &w in &opts.frequencies {
        sample(w.abs(), &mut lb, &mut peak)?;
    }
    if let Some(h) = opts.lower_bound {
        if h > lb {
            lb = h;
        }
    }

    let gap = |lb: T, ub: T| ub - lb <= tol * (T::one() + lb);
    let mut ub: Option<T> = None;
    let mut iterations = 0;
    while iterations < HINF_MAX_ITER {
        if let Some(u) = ub {
            if gap(lb, u) {
                break;
            }
        }
        if iterations == SAFEGUARD_AFTER && ub.is_none() {
            ub = Some(upper_bracket(sys, lb, dnorm)?);
        }
        let gamma = match ub {
            Some(u) if iterations >= SAFEGUARD_AFTER => (lb + u) * lit(0.5),
            _ => lb + tol * (T::one() + lb) * lit(0.5),
        };
        iterations += 1;
        match crossing_peak(sys, gamma)? {
            None => ub = Some(ub.map_or(gamma, |u| u.min(gamma))),
            Some((s, w)) => {
                lb = s;
                peak = w;
            }
        }
    }
    let upper = ub.ok_or(Error::NoConvergence(iterations))?;
    if !gap(lb, upper) {
        return Err(Error::NoConvergence(iterations));
    }
    Ok(HinfResult { value: (lb + upper) * lit(0.5), lower: lb, upper, peak_frequency: peak, iterations })
}

/// Returns the largest sampled `sigma_max` above `gamma` near the
/// imaginary-axis eigenvalues of the Hamiltonian, with its frequency, or
/// `None` when no sample confirms a crossing.
fn crossing_peak<T: Real>(sys: &StateSpace<T>, gamma: T) -> Result<Option<(T, T)>> {
    let h = hamiltonian(sys, gamma)?;
    let scale = T::one() + h.norm();
    let thresh = lit::<T>(1e-7) * scale;
    let mut freqs: Vec<T> = eigenvalues(&h)?
        .into_iter()
        .filter(|z| z.re.abs() <= thresh + lit::<T>(1e-6) * z.im.abs())
        .map(|z| z.im.abs())
        .collect();
    if freqs.is_empty() {
        return Ok(None);
    }
    freqs.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    freqs.dedup_by(|a, b| (*a - *b).abs() <= lit::<T>(1e-12) * (T::one() + b.abs()));
    let mut probes = freqs.clone();
    for w in freqs.windows(2) {
        probes.push((w[0] + w[1]) * lit(0.5));
    }
    let mut best = (T::zero(), T::zero());
    for w in probes {
        // A probe exactly on a pole of an undamped mode cannot be sampled.
        if let Ok(s) = sigma_at(sys, w) {
            if s > best.0 {
                best = (s, w);
            }
        }
    }
    // Near-axis eigenvalues whose response stays below gamma are spurious.
    Ok((best.0 > gamma).then_some(best))
}

/// Bounded-real Hamiltonian for level `gamma > sigma_max(D)`:
/// `[[A - B R^-1 D^T C, -g B R^-1 B^T], [g C^T S^-1 C, -A^T + C^T D R^-1 B^T]]`
/// with `R = D^T D - g^2 I`, `S = D D^T - g^2 I`.
pub fn hamiltonian<T: Real>(sys: &StateSpace<T>, gamma: T) -> Result<DMatrix<T>> {
    let (a, b, c, d) = (sys.a(), sys.b(), sys.c(), sys.d());
    let n = sys.n();
    let g2 = gamma * gamma;
    let r = d.transpose() * d - DMatrix::identity(sys.m(), sys.m()) * g2;
    let s = d * d.transpose() - DMatrix::identity(sys.p(), sys.p()) * g2;
    let singular = || Error::IllConditioned("gamma is not above sigma_max(D)".into());
    let r_inv = r.try_inverse().ok_or_else(singular)?;
    let s_inv = s.try_inverse().ok_or_else(singular)?;
    let br = b * &r_inv;
    let mut h = DMatrix::zeros(2 * n, 2 * n);
    h.view_mut((0, 0), (n, n)).copy_from(&(a - &br * d.transpose() * c));
    h.view_mut((0, n), (n, n)).copy_from(&(-(&br * b.transpose()) * gamma));
    h.view_mut((n, 0), (n, n)).copy_from(&(c.transpose() * s_inv * c * gamma));
    h.view_mut((n, n), (n, n)).copy_from(&(-a.transpose() + c.transpose() * d * br.transpose()));
    Ok(h)
}

/// `sigma_max(D) + 2 sum(hankel sv)`, bounded above through
/// `sum(sigma) <= sqrt(n tr(Wc Wo))`; falls back to doubling when the
/// Gramians are unavailable.
fn upper_bracket<T: Real>(sys: &StateSpace<T>, lb: T, dnorm: T) -> Result<T> {
    let gramian_bound = || -> Result<T> {
        let solver = LyapunovSolver::new(sys.a())?;
        let (wc, _) = solver.solve(&(sys.b() * sys.b().transpose()))?;
        let at = LyapunovSolver::new(&sys.a().transpose())?;
        let (wo, _) = at.solve(&(sys.c().transpose() * sys.c()))?;
        let tr = (wc * wo).trace().max(T::zero());
        let n: T = lit(sys.n() as f64);
        Ok((dnorm + (n * tr).sqrt() * lit(2.0)) * lit(1.000001))
    };
    let mut ub = match gramian_bound() {
        Ok(u) if u > lb => u,
        _ => (lb * lit(2.0)).max(lit(1e-300)),
    };
    for _ in 0..BRACKET_DOUBLINGS {
        if crossing_peak(sys, ub)?.is_none() {
            return Ok(ub);
        }
        ub *= lit(2.0);
    }
    Err(Error::BracketFailure(to_f64(ub)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn first_order() -> StateSpace<f64> {
        let one = DMatrix::from_element(1, 1, 1.0);
        StateSpace::strictly_proper(-one.clone(), one.clone(), one).unwrap()
    }

    #[test]
    fn h2_first_order() {
        assert_relative_eq!(h2_norm(&first_order()).unwrap(), 0.5f64.sqrt(), epsilon = 1e-14);
    }

    #[test]
    fn h2_stacked_adds_in_squares() {
        let g = first_order();
        assert_relative_eq!(h2_norm(&g.append(&g)).unwrap(), 1.0, epsilon = 1e-14);
    }

    #[test]
    fn h2_rejects_feedthrough() {
        let g = StateSpace::static_gain(DMatrix::from_element(1, 1, 0.5)).unwrap();
        assert!(matches!(h2_norm(&g), Err(Error::NonzeroFeedthrough(_))));
    }

    #[test]
    fn hinf_first_order_and_static() {
        assert_relative_eq!(hinf_norm(&first_order(), 1e-8).unwrap(), 1.0, epsilon = 1e-7);
        let g = StateSpace::static_gain(DMatrix::from_element(1, 1, 3.0)).unwrap();
        assert_eq!(hinf_norm(&g, 1e-6).unwrap(), 3.0);
    }

    #[test]
    fn hinf_resonant_peak() {
        // w0^2 / (s^2 + 2 z w0 s + w0^2) peaks at 1 / (2 z sqrt(1 - z^2)).
        let (w0, z) = (3.0f64, 0.05f64);
        let a = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, -w0 * w0, -2.0 * z * w0]);
        let b = DMatrix::from_row_slice(2, 1, &[0.0, w0 * w0]);
        let c = DMatrix::from_row_slice(1, 2, &[1.0, 0.0]);
        let g = StateSpace::strictly_proper(a, b, c).unwrap();
        let exact = 1.0 / (2.0 * z * (1.0 - z * z).sqrt());
        let r = hinf_norm_with(&g, &HinfOptions { tol: 1e-9, ..Default::default() }).unwrap();
        assert_relative_eq!(r.value, exact, max_relative = 1e-8);
        assert_relative_eq!(r.peak_frequency, w0 * (1.0 - 2.0 * z * z).sqrt(), max_relative = 1e-4);
    }

    #[test]
    fn hinf_with_feedthrough() {
        // (s + 2) / (s + 1): |G| decreases from 2 at w = 0 to 1.
        let one = DMatrix::from_element(1, 1, 1.0);
        let g = StateSpace::new(-one.clone(), one.clone(), one.clone(), one).unwrap();
        assert_relative_eq!(hinf_norm(&g, 1e-9).unwrap(), 2.0, max_relative = 1e-8);
    }

    #[test]
    fn hinf_rejects_unstable() {
        let one = DMatrix::from_element(1, 1, 1.0);
        let g = StateSpace::strictly_proper(one.clone(), one.clone(), one).unwrap();
        assert!(matches!(hinf_norm(&g, 1e-6), Err(Error::NotHurwitz { .. })));
    }
}
