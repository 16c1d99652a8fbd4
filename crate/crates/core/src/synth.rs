//! Generalized plant, optimal controllers for lossless plants, loop shifting
//! and closed-loop interconnection.
//!
//! The generalized plant of a realization `(A, B, C, D)` takes the exogenous
//! input `w = (w_u, w_y)` (input and measurement disturbances) and the
//! control `u`, and produces the performance output `z = (C x + D u, u)` and
//! the measurement `y = C x + D (u + w_u) + w_y`:
//!
//! ```text
//! x' = A x + [B 0] w + B u
//! z  = [C; 0] x + 0 w + [D; I] u
//! y  = C x + [D I] w + D u
//! ```

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lossless::LosslessSystem;
use crate::numlin::dense::{fro, sigma_min, sqrtm_spd, sym_eig_range, symmetrize};
use crate::numlin::riccati::solve_riccati;
use crate::numlin::{eigenvalues, StateSpace};
use crate::scalar::{lit, to_f64, tol_floor, Real};

/// Threshold on `sigma_min(I - D_K D_yu)` below which an interconnection is
/// declared ill posed.
pub const WELL_POSED_THRESHOLD: f64 = 1e-12;

/// Nine-block generalized plant `(A, [B_w B_u], [C_z; C_y], [[D_zw, D_zu], [D_yw, D_yu]])`.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneralizedPlant<T: Real> {
    pub a: DMatrix<T>,
    pub b_w: DMatrix<T>,
    pub b_u: DMatrix<T>,
    pub c_z: DMatrix<T>,
    pub c_y: DMatrix<T>,
    pub d_zw: DMatrix<T>,
    pub d_zu: DMatrix<T>,
    pub d_yw: DMatrix<T>,
    pub d_yu: DMatrix<T>,
}

impl<T: Real> GeneralizedPlant<T> {
    /// Assembles a plant from its blocks after checking that they are conformal.
    #[allow(clippy::too_many_arguments)]
    pub fn from_blocks(
        a: DMatrix<T>,
        b_w: DMatrix<T>,
        b_u: DMatrix<T>,
        c_z: DMatrix<T>,
        c_y: DMatrix<T>,
        d_zw: DMatrix<T>,
        d_zu: DMatrix<T>,
        d_yw: DMatrix<T>,
        d_yu: DMatrix<T>,
    ) -> Result<Self> {
        let n = a.nrows();
        let (nw, nu, nz, ny) = (b_w.ncols(), b_u.ncols(), c_z.nrows(), c_y.nrows());
        let ok = a.ncols() == n
            && b_w.nrows() == n
            && b_u.nrows() == n
            && c_z.ncols() == n
            && c_y.ncols() == n
            && d_zw.shape() == (nz, nw)
            && d_zu.shape() == (nz, nu)
            && d_yw.shape() == (ny, nw)
            && d_yu.shape() == (ny, nu);
        if !ok {
            return Err(Error::DimensionMismatch("generalized plant blocks are not conformal".into()));
        }
        Ok(Self { a, b_w, b_u, c_z, c_y, d_zw, d_zu, d_yw, d_yu })
    }

    pub fn n(&self) -> usize {
        self.a.nrows()
    }

    /// Dimensions `(w, u, z, y)`.
    pub fn dims(&self) -> (usize, usize, usize, usize) {
        (self.b_w.ncols(), self.b_u.ncols(), self.c_z.nrows(), self.c_y.nrows())
    }

    /// The open-loop map from `(w, u)` to `(z, y)`.
    pub fn to_statespace(&self) -> Result<StateSpace<T>> {
        let (nw, nu, nz, ny) = self.dims();
        let n = self.n();
        let mut b = DMatrix::zeros(n, nw + nu);
        b.view_mut((0, 0), (n, nw)).copy_from(&self.b_w);
        b.view_mut((0, nw), (n, nu)).copy_from(&self.b_u);
        let mut c = DMatrix::zeros(nz + ny, n);
        c.view_mut((0, 0), (nz, n)).copy_from(&self.c_z);
        c.view_mut((nz, 0), (ny, n)).copy_from(&self.c_y);
        let mut d = DMatrix::zeros(nz + ny, nw + nu);
        d.view_mut((0, 0), (nz, nw)).copy_from(&self.d_zw);
        d.view_mut((0, nw), (nz, nu)).copy_from(&self.d_zu);
        d.view_mut((nz, 0), (ny, nw)).copy_from(&self.d_yw);
        d.view_mut((nz, nw), (ny, nu)).copy_from(&self.d_yu);
        StateSpace::new(self.a.clone(), b, c, d)
    }
}

/// Generalized plant of `sys` in the layout described in the module docs.
pub fn build_generalized_plant<T: Real>(sys: &StateSpace<T>) -> GeneralizedPlant<T> {
    let (n, m, p) = (sys.n(), sys.m(), sys.p());
    let (b, c, d) = (sys.b(), sys.c(), sys.d());

    let mut b_w = DMatrix::zeros(n, m + p);
    b_w.view_mut((0, 0), (n, m)).copy_from(b);
    let mut c_z = DMatrix::zeros(p + m, n);
    c_z.view_mut((0, 0), (p, n)).copy_from(c);
    let mut d_zu = DMatrix::zeros(p + m, m);
    d_zu.view_mut((0, 0), (p, m)).copy_from(d);
    d_zu.view_mut((p, 0), (m, m)).fill_with_identity();
    let mut d_yw = DMatrix::zeros(p, m + p);
    d_yw.view_mut((0, 0), (p, m)).copy_from(d);
    d_yw.view_mut((0, m), (p, p)).fill_with_identity();

    GeneralizedPlant {
        a: sys.a().clone(),
        b_w,
        b_u: b.clone(),
        c_z,
        c_y: c.clone(),
        d_zw: DMatrix::zeros(p + m, m + p),
        d_zu,
        d_yw,
        d_yu: d.clone(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ControllerKind {
    /// `K(s) = -C (sI - A + 2 B C)^-1 B`.
    StructuredH2,
    /// `K = -sqrt(2) I`.
    StaticHinf,
    /// Observer-form controller from the two H2 Riccati equations.
    RiccatiH2,
    /// Anything supplied by the caller.
    Custom,
}

/// Output-feedback controller `u = K y`, realized as `(A_K, B_K, C_K, D_K)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Controller<T: Real> {
    pub k: StateSpace<T>,
    pub kind: ControllerKind,
}

impl<T: Real> Controller<T> {
    pub fn new(k: StateSpace<T>, kind: ControllerKind) -> Self {
        Self { k, kind }
    }

    /// The zero controller with `m` outputs and `p` inputs.
    pub fn zero(m: usize, p: usize) -> Self {
        Self::new(
            StateSpace::static_gain(DMatrix::zeros(m, p)).expect("zero gain is finite"),
            ControllerKind::Custom,
        )
    }
}

fn require_zero_d<T: Real>(sys: &StateSpace<T>) -> Result<()> {
    if !sys.has_zero_feedthrough() {
        let dmax = sys.d().iter().fold(0.0f64, |acc, v| acc.max(to_f64(v.abs())));
        return Err(Error::NonzeroFeedthrough(dmax));
    }
    Ok(())
}

/// `A_K = A - 2 B C`, `B_K = B`, `C_K = -C`, `D_K = 0`.
pub fn structured_h2_controller<T: Real>(plant: &LosslessSystem<T>) -> Result<Controller<T>> {
    let sys = plant.sys();
    require_zero_d(sys)?;
    let (a, b, c) = (sys.a(), sys.b(), sys.c());
    let a_k = a - b * c * lit::<T>(2.0);
    let k = StateSpace::strictly_proper(a_k, b.clone(), -c)?;
    Ok(Controller::new(k, ControllerKind::StructuredH2))
}

/// `D_K = -sqrt(2) I` with no controller states.
pub fn static_hinf_controller<T: Real>(plant: &LosslessSystem<T>) -> Result<Controller<T>> {
    let sys = plant.sys();
    require_zero_d(sys)?;
    let (m, p) = (sys.m(), sys.p());
    let d_k = DMatrix::<T>::identity(m, p) * -lit::<T>(2.0).sqrt();
    Ok(Controller::new(StateSpace::static_gain(d_k)?, ControllerKind::StaticHinf))
}

/// Riccati-based H2 design together with the quantities it was built from.
#[derive(Debug, Clone, PartialEq)]
pub struct RiccatiH2Design<T: Real> {
    pub controller: Controller<T>,
    /// Control Riccati solution.
    pub x: DMatrix<T>,
    /// Filter Riccati solution.
    pub y: DMatrix<T>,
    /// State-feedback gain `F`.
    pub f: DMatrix<T>,
    /// Output-injection gain `L`.
    pub l: DMatrix<T>,
    /// `sqrt(tr(B_w^T X B_w) + tr(R1 F Y F^T))`, the optimal closed-loop H2 norm.
    pub optimal_cost: T,
}

/// H2-optimal output feedback for a plant with `D_yu = 0`.
///
/// With `R1 = D_zu^T D_zu` and `R2 = D_yw D_yw^T` (both positive definite),
/// `X` and `Y` are the stabilizing solutions of
///
/// ```text
/// (A - B_u R1^-1 D_zu^T C_z)^T X + X (.) - X B_u R1^-1 B_u^T X + C_z^T (I - D_zu R1^-1 D_zu^T) C_z = 0
/// (A - B_w D_yw^T R2^-1 C_y) Y + Y (.)^T - Y C_y^T R2^-1 C_y Y + B_w (I - D_yw^T R2^-1 D_yw) B_w^T = 0
/// ```
///
/// and the controller is the observer
/// `A_K = A + B_u F + L C_y`, `B_K = -L`, `C_K = F`, `D_K = 0` with
/// `F = -R1^-1 (B_u^T X + D_zu^T C_z)` and `L = -(Y C_y^T + B_w D_yw^T) R2^-1`.
pub fn riccati_h2_controller<T: Real>(gp: &GeneralizedPlant<T>) -> Result<RiccatiH2Design<T>> {
    let tol: T = tol_floor(1e-12);
    if fro(&gp.d_yu) > T::zero() {
        return Err(Error::NonzeroFeedthrough(to_f64(fro(&gp.d_yu))));
    }
    if fro(&gp.d_zw) > tol * (T::one() + fro(&gp.d_zu) + fro(&gp.d_yw)) {
        return Err(Error::NonzeroFeedthrough(to_f64(fro(&gp.d_zw))));
    }
    let (a, b1, b2, c1, c2, d12, d21) = (&gp.a, &gp.b_w, &gp.b_u, &gp.c_z, &gp.c_y, &gp.d_zu, &gp.d_yw);
    let (nw, _, nz, _) = gp.dims();

    let r1 = symmetrize(&(d12.transpose() * d12));
    let r2 = symmetrize(&(d21 * d21.transpose()));
    let singular = |what: &str| Error::IllConditioned(format!("{what} is singular"));
    let r1_inv = r1.clone().try_inverse().ok_or_else(|| singular("D_zu^T D_zu"))?;
    let r2_inv = r2.clone().try_inverse().ok_or_else(|| singular("D_yw D_yw^T"))?;

    let ax = a - b2 * &r1_inv * d12.transpose() * c1;
    let qx = c1.transpose() * (DMatrix::identity(nz, nz) - d12 * &r1_inv * d12.transpose()) * c1;
    let sx = b2 * &r1_inv * b2.transpose();
    let (x, _) = solve_riccati(&ax, &symmetrize(&sx), &symmetrize(&qx))?;

    let ay = a - b1 * d21.transpose() * &r2_inv * c2;
    let qy = b1 * (DMatrix::identity(nw, nw) - d21.transpose() * &r2_inv * d21) * b1.transpose();
    let sy = c2.transpose() * &r2_inv * c2;
    let (y, _) = solve_riccati(&ay.transpose(), &symmetrize(&sy), &symmetrize(&qy))?;

    let f = -(&r1_inv * (b2.transpose() * &x + d12.transpose() * c1));
    let l = -((&y * c2.transpose() + b1 * d21.transpose()) * &r2_inv);
    let a_k = a + b2 * &f + &l * c2;
    let k = StateSpace::strictly_proper(a_k, -l.clone(), f.clone())?;

    let cost2 = (b1.transpose() * &x * b1).trace() + (&r1 * &f * &y * f.transpose()).trace();
    Ok(RiccatiH2Design {
        controller: Controller::new(k, ControllerKind::RiccatiH2),
        x,
        y,
        f,
        l,
        optimal_cost: cost2.max(T::zero()).sqrt(),
    })
}

/// A plant normalized by [`loop_shift`] plus what is needed to map a
/// controller designed for it back to the original plant.
#[derive(Debug, Clone, PartialEq)]
pub struct LoopShift<T: Real> {
    pub plant: GeneralizedPlant<T>,
    /// `S = (D_zu^T D_zu)^{1/2}`; new control `u~ = S u`.
    pub s: DMatrix<T>,
    /// `R = (D_yw D_yw^T)^{1/2}`; new measurement `y~ = R^-1 (y - D_yu u)`.
    pub r: DMatrix<T>,
    s_inv: DMatrix<T>,
    r_inv: DMatrix<T>,
    d_yu: DMatrix<T>,
}

/// Normalizes `D_zu^T D_zu = I`, `D_yw D_yw^T = I` and removes `D_yu`.
///
/// For the plant of a lossless system `S = (I + D^T D)^{1/2}` and
/// `R = (I + D D^T)^{1/2}`. The substitution is
/// `B_u -> B_u S^-1`, `D_zu -> D_zu S^-1`, `C_y -> R^-1 C_y`,
/// `D_yw -> R^-1 D_yw`, `D_yu -> 0`; closed-loop maps are unchanged once the
/// controller is mapped back with [`LoopShift::unshift`].
pub fn loop_shift<T: Real>(gp: &GeneralizedPlant<T>) -> Result<LoopShift<T>> {
    let s = sqrtm_spd(&(gp.d_zu.transpose() * &gp.d_zu))?;
    let r = sqrtm_spd(&(&gp.d_yw * gp.d_yw.transpose()))?;
    let inv = |x: &DMatrix<T>| {
        x.clone().try_inverse().ok_or_else(|| Error::IllConditioned("loop-shift scaling is singular".into()))
    };
    let s_inv = inv(&s)?;
    let r_inv = inv(&r)?;
    let plant = GeneralizedPlant {
        a: gp.a.clone(),
        b_w: gp.b_w.clone(),
        b_u: &gp.b_u * &s_inv,
        c_z: gp.c_z.clone(),
        c_y: &r_inv * &gp.c_y,
        d_zw: gp.d_zw.clone(),
        d_zu: &gp.d_zu * &s_inv,
        d_yw: &r_inv * &gp.d_yw,
        d_yu: DMatrix::zeros(gp.d_yu.nrows(), gp.d_yu.ncols()),
    };
    Ok(LoopShift { plant, s, r, s_inv, r_inv, d_yu: gp.d_yu.clone() })
}

impl<T: Real> LoopShift<T> {
    /// Controller for the original plant equivalent to `k` on the shifted one.
    pub fn unshift(&self, k: &Controller<T>) -> Result<Controller<T>> {
        let (ah, bh, ch, dh) = (k.k.a(), k.k.b(), k.k.c(), k.k.d());
        let nu = self.s.nrows();
        // u~ = C^ x_k + D^ R^-1 (y - D_yu S^-1 u~)
        let w = (DMatrix::identity(nu, nu) + dh * &self.r_inv * &self.d_yu * &self.s_inv)
            .try_inverse()
            .ok_or_else(|| Error::IllPosedLoop(0.0))?;
        let c_k = &self.s_inv * &w * ch;
        let d_k = &self.s_inv * &w * dh * &self.r_inv;
        let ny = self.r.nrows();
        let a_k = ah - bh * &self.r_inv * &self.d_yu * &c_k;
        let b_k = bh * &self.r_inv * (DMatrix::identity(ny, ny) - &self.d_yu * &d_k);
        Ok(Controller::new(StateSpace::new(a_k, b_k, c_k, d_k)?, k.kind))
    }
}

/// Riccati H2 design for an arbitrary plant: loop-shifts first, designs on
/// the normalized plant and maps the controller back.
pub fn riccati_h2_shifted<T: Real>(gp: &GeneralizedPlant<T>) -> Result<RiccatiH2Design<T>> {
    let shift = loop_shift(gp)?;
    let mut design = riccati_h2_controller(&shift.plant)?;
    design.controller = shift.unshift(&design.controller)?;
    Ok(design)
}

/// Lower linear-fractional interconnection of `gp` with `u = K y`.
///
/// The closed loop maps `w` to `z`; its state is `(x, x_K)`.
pub fn close_loop<T: Real>(gp: &GeneralizedPlant<T>, k: &Controller<T>) -> Result<StateSpace<T>> {
    let (nw, nu, nz, ny) = gp.dims();
    let ks = &k.k;
    if ks.m() != ny || ks.p() != nu {
        return Err(Error::DimensionMismatch(format!(
            "controller is {}x{}, plant needs {nu}x{ny}",
            ks.p(),
            ks.m()
        )));
    }
    let (ak, bk, ck, dk) = (ks.a(), ks.b(), ks.c(), ks.d());
    let n = gp.n();
    let nk = ks.n();

    let well = DMatrix::<T>::identity(nu, nu) - dk * &gp.d_yu;
    let smin = if nu == 0 { T::one() } else { sigma_min(&well) };
    if smin <= lit(WELL_POSED_THRESHOLD) {
        return Err(Error::IllPosedLoop(to_f64(smin)));
    }
    let z = well.try_inverse().ok_or(Error::IllPosedLoop(to_f64(smin)))?;

    // u = Ux x + Uk x_k + Uw w
    let ux = &z * dk * &gp.c_y;
    let uk = &z * ck;
    let uw = &z * dk * &gp.d_yw;
    let yx = &gp.c_y + &gp.d_yu * &ux;
    let yk = &gp.d_yu * &uk;
    let yw = &gp.d_yw + &gp.d_yu * &uw;

    let mut a = DMatrix::zeros(n + nk, n + nk);
    a.view_mut((0, 0), (n, n)).copy_from(&(&gp.a + &gp.b_u * &ux));
    a.view_mut((0, n), (n, nk)).copy_from(&(&gp.b_u * &uk));
    a.view_mut((n, 0), (nk, n)).copy_from(&(bk * &yx));
    a.view_mut((n, n), (nk, nk)).copy_from(&(ak + bk * &yk));
    let mut b = DMatrix::zeros(n + nk, nw);
    b.view_mut((0, 0), (n, nw)).copy_from(&(&gp.b_w + &gp.b_u * &uw));
    b.view_mut((n, 0), (nk, nw)).copy_from(&(bk * &yw));
    let mut c = DMatrix::zeros(nz, n + nk);
    c.view_mut((0, 0), (nz, n)).copy_from(&(&gp.c_z + &gp.d_zu * &ux));
    c.view_mut((0, n), (nz, nk)).copy_from(&(&gp.d_zu * &uk));
    let d = &gp.d_zw + &gp.d_zu * &uw;
    StateSpace::new(a, b, c, d)
}

/// Outcome of the H-infinity level test.
#[derive(Debug, Clone, PartialEq)]
pub struct HinfFeasibility<T: Real> {
    pub gamma: T,
    pub feasible: bool,
    /// `X_gamma`, when a stabilizing positive semidefinite solution exists.
    pub x: Option<DMatrix<T>>,
    /// `Y_gamma`, likewise.
    pub y: Option<DMatrix<T>>,
    /// `rho(X_gamma Y_gamma)` when both exist.
    pub spectral_radius: Option<T>,
}

/// Tests whether level `gamma` is achievable for a plant satisfying the
/// normalized assumptions `D_zw = 0`, `D_yu = 0`, `D_zu^T [C_z D_zu] = [0 I]`
/// and `D_yw [B_w^T D_yw^T] = [0 I]`.
///
/// Following the standard characterization, `gamma` is feasible iff
///
/// ```text
/// A^T X + X A - X (B_u B_u^T - g^-2 B_w B_w^T) X + C_z^T C_z = 0
/// A Y + Y A^T - Y (C_y^T C_y - g^-2 C_z^T C_z) Y + B_w B_w^T = 0
/// ```
///
/// have stabilizing solutions `X, Y >= 0` and `rho(X Y) < g^2`.
pub fn hinf_feasibility<T: Real>(gp: &GeneralizedPlant<T>, gamma: T) -> Result<HinfFeasibility<T>> {
    let tol: T = tol_floor(1e-9);
    let (nw, nu, _, ny) = gp.dims();
    let normalized = fro(&gp.d_zw) <= tol
        && fro(&gp.d_yu) <= tol
        && fro(&(gp.d_zu.transpose() * &gp.c_z)) <= tol * (T::one() + fro(&gp.c_z))
        && fro(&(gp.d_zu.transpose() * &gp.d_zu - DMatrix::identity(nu, nu))) <= tol
        && fro(&(&gp.b_w * gp.d_yw.transpose())) <= tol * (T::one() + fro(&gp.b_w))
        && fro(&(&gp.d_yw * gp.d_yw.transpose() - DMatrix::identity(ny, ny))) <= tol;
    if !normalized || nw == 0 {
        return Err(Error::InvalidConfig(
            "H-infinity level test needs a plant with normalized, orthogonal feedthrough blocks".into(),
        ));
    }
    if gamma <= T::zero() {
        return Err(Error::InvalidConfig("gamma must be positive".into()));
    }
    let g2 = gamma * gamma;
    let infeasible = HinfFeasibility { gamma, feasible: false, x: None, y: None, spectral_radius: None };

    let b1b1 = &gp.b_w * gp.b_w.transpose();
    let c1c1 = gp.c_z.transpose() * &gp.c_z;
    let sx = symmetrize(&(&gp.b_u * gp.b_u.transpose() - &b1b1 / g2));
    let sy = symmetrize(&(gp.c_y.transpose() * &gp.c_y - &c1c1 / g2));

    let psd = |m: &DMatrix<T>| {
        let (lo, hi) = sym_eig_range(m);
        lo >= -tol * (T::one() + hi.abs())
    };
    let x = match solve_riccati(&gp.a, &sx, &symmetrize(&c1c1)) {
        Ok((x, _)) if psd(&x) => x,
        Ok(_) | Err(Error::NoStabilizingSolution(_)) => return Ok(infeasible),
        Err(e) => return Err(e),
    };
    let y = match solve_riccati(&gp.a.transpose(), &sy, &symmetrize(&b1b1)) {
        Ok((y, _)) if psd(&y) => y,
        Ok(_) | Err(Error::NoStabilizingSolution(_)) => {
            return Ok(HinfFeasibility { x: Some(x), ..infeasible })
        }
        Err(e) => return Err(e),
    };
    let rho = eigenvalues(&(&x * &y))?
        .iter()
        .map(|z| (z.re * z.re + z.im * z.im).sqrt())
        .fold(T::zero(), |acc, v| acc.max(v));
    Ok(HinfFeasibility { gamma, feasible: rho < g2, x: Some(x), y: Some(y), spectral_radius: Some(rho) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numlin::{h2_norm, hinf_norm};
    use approx::assert_relative_eq;

    fn unit_swing() -> LosslessSystem<f64> {
        let one = DMatrix::from_element(1, 1, 1.0);
        let sys = StateSpace::strictly_proper(DMatrix::zeros(1, 1), one.clone(), one).unwrap();
        LosslessSystem::certify(sys, 1e-9).unwrap()
    }

    #[test]
    fn generalized_plant_layout() {
        let gp = build_generalized_plant(unit_swing().sys());
        assert_eq!(gp.b_w.as_slice(), &[1.0, 0.0]);
        assert_eq!(gp.c_z.as_slice(), &[1.0, 0.0]);
        assert_eq!(gp.d_zu.as_slice(), &[0.0, 1.0]);
        assert_eq!(gp.d_yw.as_slice(), &[0.0, 1.0]);
    }

    #[test]
    fn structured_controller_on_rotation() {
        let sys = StateSpace::strictly_proper(
            DMatrix::from_row_slice(2, 2, &[0.0, -1.0, 1.0, 0.0]),
            DMatrix::from_row_slice(2, 1, &[1.0, 0.0]),
            DMatrix::from_row_slice(1, 2, &[1.0, 0.0]),
        )
        .unwrap();
        let k = structured_h2_controller(&LosslessSystem::certify(sys, 1e-9).unwrap()).unwrap();
        assert_eq!(k.k.a(), &DMatrix::from_row_slice(2, 2, &[-2.0, -1.0, 1.0, 0.0]));
        assert_eq!(k.k.b().as_slice(), &[1.0, 0.0]);
        assert_eq!(k.k.c().as_slice(), &[-1.0, 0.0]);
    }

    #[test]
    fn static_hinf_closed_loop_by_hand() {
        let plant = unit_swing();
        let gp = build_generalized_plant(plant.sys());
        let cl = close_loop(&gp, &static_hinf_controller(&plant).unwrap()).unwrap();
        let r2 = 2f64.sqrt();
        assert_relative_eq!(cl.a()[(0, 0)], -r2, epsilon = 1e-15);
        assert_relative_eq!(cl.b().clone(), DMatrix::from_row_slice(1, 2, &[1.0, -r2]), epsilon = 1e-15);
        assert_relative_eq!(cl.c().clone(), DMatrix::from_row_slice(2, 1, &[1.0, -r2]), epsilon = 1e-15);
        assert_relative_eq!(cl.d().clone(), DMatrix::from_row_slice(2, 2, &[0.0, 0.0, 0.0, -r2]), epsilon = 1e-15);
        assert_relative_eq!(hinf_norm(&cl, 1e-9).unwrap(), r2, max_relative = 1e-8);
    }

    #[test]
    fn structured_and_riccati_agree_on_unit_swing() {
        let plant = unit_swing();
        let gp = build_generalized_plant(plant.sys());
        let cl = close_loop(&gp, &structured_h2_controller(&plant).unwrap()).unwrap();
        assert_relative_eq!(h2_norm(&cl).unwrap(), 2f64.sqrt(), max_relative = 1e-12);
        let design = riccati_h2_controller(&gp).unwrap();
        assert_relative_eq!(design.x[(0, 0)], 1.0, max_relative = 1e-12);
        assert_relative_eq!(design.y[(0, 0)], 1.0, max_relative = 1e-12);
        assert_relative_eq!(design.optimal_cost, 2f64.sqrt(), max_relative = 1e-12);
    }

    #[test]
    fn loop_shift_scalings_for_unit_skew_d() {
        let d = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, -1.0, 0.0]);
        let sys = StateSpace::new(
            DMatrix::from_row_slice(2, 2, &[0.0, -1.0, 1.0, 0.0]),
            DMatrix::identity(2, 2),
            DMatrix::identity(2, 2),
            d,
        )
        .unwrap();
        let shift = loop_shift(&build_generalized_plant(&sys)).unwrap();
        let r2 = DMatrix::identity(2, 2) * 2f64.sqrt();
        assert_relative_eq!(shift.s.clone(), r2.clone(), epsilon = 1e-14);
        assert_relative_eq!(shift.r.clone(), r2, epsilon = 1e-14);
        let twice = loop_shift(&shift.plant).unwrap();
        assert_relative_eq!(twice.plant.b_u, shift.plant.b_u, epsilon = 1e-14);
        assert_relative_eq!(twice.plant.d_yw, shift.plant.d_yw, epsilon = 1e-14);
    }

    #[test]
    fn ill_posed_loop_is_rejected() {
        let d = DMatrix::from_element(1, 1, 1.0);
        let sys = StateSpace::new(DMatrix::zeros(1, 1), d.clone(), d.clone(), DMatrix::zeros(1, 1)).unwrap();
        let mut gp = build_generalized_plant(&sys);
        gp.d_yu = d.clone();
        let k = Controller::new(StateSpace::static_gain(d).unwrap(), ControllerKind::Custom);
        assert!(matches!(close_loop(&gp, &k), Err(Error::IllPosedLoop(_))));
    }

    #[test]
    fn feasibility_threshold_for_unit_swing() {
        let gp = build_generalized_plant(unit_swing().sys());
        let above = hinf_feasibility(&gp, 2f64.sqrt() * 1.001).unwrap();
        assert!(above.feasible);
        let below = hinf_feasibility(&gp, 2f64.sqrt() * 0.999).unwrap();
        assert!(!below.feasible);
        let g = 2.0f64;
        let at2 = hinf_feasibility(&gp, g).unwrap();
        assert_relative_eq!(at2.x.unwrap()[(0, 0)], g / (g * g - 1.0).sqrt(), max_relative = 1e-10);
    }
}
