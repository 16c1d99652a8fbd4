//! Linearized, lossless swing-equation model of a power network.
//!
//! Generator buses obey `M_k th_k'' = p_N,k + u_k + w_u,k`, the network
//! couples bus angles through the weighted Laplacian
//! `[[K_a, K_b], [K_b^T, K_c]]` (generators first, internal buses second)
//! and the measurement is the frequency `y_k = th_k' + w_y,k`. After Kron
//! reduction `K_red = K_a - K_b K_c^-1 K_b^T = L L^T` and with state
//! `x = (th', L^T th)` the model is
//!
//! ```text
//! x' = [[0, -M^-1 L], [L^T, 0]] x + [M^-1; 0] (u + w_u),   y = [I 0] x.
//! ```

use std::collections::{BTreeMap, BTreeSet, HashMap};

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lossless::LosslessSystem;
use crate::numlin::dense::{fro, symmetrize};
use crate::numlin::StateSpace;
use crate::scalar::{lit, to_f64, tol_floor, Real};

/// Tolerance of the factorization and certificate checks done while building
/// a model.
pub const DEFAULT_SWING_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BusKind {
    Conventional,
    Hydro,
    WindSolar,
    Load,
}

impl BusKind {
    pub fn is_generator(self) -> bool {
        self != BusKind::Load
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Tier {
    Transmission,
    Subtransmission,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Bus {
    pub id: usize,
    pub kind: BusKind,
    /// Injection; positive for generation, negative for consumption.
    pub power: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub inertia: Option<f64>,
    pub position: [f64; 2],
    pub cluster: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Line {
    pub i: usize,
    pub j: usize,
    pub susceptance: f64,
    /// Equilibrium angle difference across the line, radians.
    #[serde(default)]
    pub load_angle: f64,
    pub tier: Tier,
}

impl Line {
    /// Laplacian weight `b cos(delta)`.
    pub fn weight(&self) -> f64 {
        self.susceptance * self.load_angle.cos()
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct PowerNetwork {
    pub buses: Vec<Bus>,
    pub lines: Vec<Line>,
}

impl PowerNetwork {
    /// Generator bus ids in ascending order.
    pub fn generator_ids(&self) -> Vec<usize> {
        let mut ids: Vec<usize> = self.buses.iter().filter(|b| b.kind.is_generator()).map(|b| b.id).collect();
        ids.sort_unstable();
        ids
    }

    /// Load (internal) bus ids in ascending order.
    pub fn internal_ids(&self) -> Vec<usize> {
        let mut ids: Vec<usize> = self.buses.iter().filter(|b| !b.kind.is_generator()).map(|b| b.id).collect();
        ids.sort_unstable();
        ids
    }

    pub fn bus(&self, id: usize) -> Option<&Bus> {
        self.buses.iter().find(|b| b.id == id)
    }

    /// Inertias of the generator buses in [`Self::generator_ids`] order.
    pub fn inertias(&self) -> Result<Vec<f64>> {
        let by_id: HashMap<usize, &Bus> = self.buses.iter().map(|b| (b.id, b)).collect();
        self.generator_ids()
            .into_iter()
            .map(|id| match by_id[&id].inertia {
                Some(m) if m > 0.0 && m.is_finite() => Ok(m),
                Some(m) => Err(Error::NonpositiveInertia(m)),
                None => Err(Error::NonpositiveInertia(0.0)),
            })
            .collect()
    }

    /// Checks ids, endpoints, the load-angle bound, positive weights and
    /// connectivity.
    pub fn validate(&self) -> Result<()> {
        let mut seen = BTreeSet::new();
        for b in &self.buses {
            if !seen.insert(b.id) {
                return Err(Error::InvalidConfig(format!("duplicate bus id {}", b.id)));
            }
            if !b.power.is_finite() || !b.position.iter().all(|x| x.is_finite()) {
                return Err(Error::NonFinite("bus data"));
            }
            if !b.kind.is_generator() && b.inertia.is_some() {
                return Err(Error::InvalidConfig(format!("load bus {} carries an inertia", b.id)));
            }
        }
        for l in &self.lines {
            for end in [l.i, l.j] {
                if !seen.contains(&end) {
                    return Err(Error::UnknownBus(end));
                }
            }
            if l.i == l.j {
                return Err(Error::InvalidConfig(format!("line {}-{} is a self loop", l.i, l.j)));
            }
            if !l.load_angle.is_finite() || l.load_angle.abs() >= std::f64::consts::FRAC_PI_2 {
                return Err(Error::LoadAngleOutOfRange { i: l.i, j: l.j, angle: l.load_angle });
            }
            let w = l.weight();
            if !(w > 0.0 && w.is_finite()) {
                return Err(Error::NonpositiveWeight { i: l.i, j: l.j, weight: w });
            }
        }
        let ids: Vec<usize> = seen.into_iter().collect();
        if !connected(&ids, self.lines.iter().map(|l| (l.i, l.j))) {
            return Err(Error::Disconnected(format!("{} buses, {} lines", self.buses.len(), self.lines.len())));
        }
        Ok(())
    }
}

fn connected(ids: &[usize], edges: impl Iterator<Item = (usize, usize)>) -> bool {
    if ids.is_empty() {
        return false;
    }
    let pos: HashMap<usize, usize> = ids.iter().enumerate().map(|(k, &id)| (id, k)).collect();
    let mut parent: Vec<usize> = (0..ids.len()).collect();
    fn find(p: &mut [usize], mut x: usize) -> usize {
        while p[x] != x {
            p[x] = p[p[x]];
            x = p[x];
        }
        x
    }
    let mut components = ids.len();
    for (i, j) in edges {
        let (a, b) = (find(&mut parent, pos[&i]), find(&mut parent, pos[&j]));
        if a != b {
            parent[a] = b;
            components -= 1;
        }
    }
    components == 1
}

/// Blocks of the network Laplacian in generator-first order.
#[derive(Debug, Clone, PartialEq)]
pub struct Laplacian<T: Real> {
    pub k_a: DMatrix<T>,
    pub k_b: DMatrix<T>,
    pub k_c: DMatrix<T>,
    pub generator_ids: Vec<usize>,
    pub internal_ids: Vec<usize>,
}

/// Weighted Laplacian with edge weights `b_ij cos(delta_ij)`, partitioned as
/// generators (by id) then internal buses (by id).
pub fn build_laplacian<T: Real>(net: &PowerNetwork) -> Result<Laplacian<T>> {
    net.validate()?;
    let generator_ids = net.generator_ids();
    if generator_ids.is_empty() {
        return Err(Error::InvalidConfig("network has no generator bus".into()));
    }
    let internal_ids = net.internal_ids();
    let n = generator_ids.len();
    let total = n + internal_ids.len();
    let index: HashMap<usize, usize> =
        generator_ids.iter().chain(internal_ids.iter()).enumerate().map(|(k, &id)| (id, k)).collect();
    let mut k = DMatrix::<T>::zeros(total, total);
    for l in &net.lines {
        let (a, b) = (index[&l.i], index[&l.j]);
        let w: T = lit(l.weight());
        k[(a, a)] += w;
        k[(b, b)] += w;
        k[(a, b)] -= w;
        k[(b, a)] -= w;
    }
    let m = total - n;
    Ok(Laplacian {
        k_a: k.view((0, 0), (n, n)).clone_owned(),
        k_b: k.view((0, n), (n, m)).clone_owned(),
        k_c: k.view((n, n), (m, m)).clone_owned(),
        generator_ids,
        internal_ids,
    })
}

/// `K_red = K_a - K_b K_c^-1 K_b^T` via a Cholesky factorization of `K_c`.
pub fn kron_reduce<T: Real>(k_a: &DMatrix<T>, k_b: &DMatrix<T>, k_c: &DMatrix<T>) -> Result<DMatrix<T>> {
    if k_c.nrows() == 0 {
        return Ok(k_a.clone());
    }
    let chol = k_c.clone().cholesky().ok_or(Error::SingularInternalBlock)?;
    let x = chol.solve(&k_b.transpose());
    Ok(symmetrize(&(k_a - k_b * x)))
}

/// `L = V_+ Lambda_+^{1/2}` from the eigendecomposition of `K_red`, dropping
/// the zero eigenpair. Columns are ordered by decreasing eigenvalue and each
/// is signed so that its largest-magnitude entry is positive.
pub fn factor_reduced<T: Real>(k_red: &DMatrix<T>, tol: f64) -> Result<DMatrix<T>> {
    let n = k_red.nrows();
    if !k_red.is_square() {
        return Err(Error::DimensionMismatch("K_red must be square".into()));
    }
    if n <= 1 {
        return Ok(DMatrix::zeros(n, 0));
    }
    let tol_t: T = tol_floor(tol);
    let scale = fro(k_red);
    let ones = DVector::<T>::from_element(n, T::one());
    let row_sums = (k_red * &ones).norm();
    if row_sums > tol_t * scale * lit::<T>(n as f64).sqrt() {
        return Err(Error::NullspaceMismatch(to_f64(row_sums)));
    }
    let eig = symmetrize(k_red).symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        eig.eigenvalues[b].partial_cmp(&eig.eigenvalues[a]).unwrap_or(std::cmp::Ordering::Equal)
    });
    let lam_max = eig.eigenvalues[order[0]];
    let kept = &order[..n - 1];
    let rank = kept.iter().filter(|&&k| eig.eigenvalues[k] > tol_t * lam_max).count();
    if rank < n - 1 {
        return Err(Error::RankDeficient { rank, expected: n - 1 });
    }
    let null = eig.eigenvectors.column(order[n - 1]);
    let align = null.dot(&ones).abs() / lit::<T>(n as f64).sqrt();
    if T::one() - align > tol_t.sqrt() {
        return Err(Error::NullspaceMismatch(to_f64(T::one() - align)));
    }

    let mut l = DMatrix::<T>::zeros(n, n - 1);
    for (col, &k) in kept.iter().enumerate() {
        let v = eig.eigenvectors.column(k);
        let mut pivot = 0;
        for r in 1..n {
            if v[r].abs() > v[pivot].abs() * (T::one() + lit(1e-12)) {
                pivot = r;
            }
        }
        let sign = if v[pivot] < T::zero() { -T::one() } else { T::one() };
        let s = eig.eigenvalues[k].sqrt() * sign;
        for r in 0..n {
            l[(r, col)] = v[r] * s;
        }
    }
    let err = fro(&(&l * l.transpose() - k_red));
    if err > tol_t * scale {
        return Err(Error::IllConditioned(format!("L L^T reconstruction error {:.3e}", to_f64(err))));
    }
    Ok(l)
}

/// Swing-equation model with its certified realization.
#[derive(Debug, Clone, PartialEq)]
pub struct SwingModel<T: Real> {
    pub m: DVector<T>,
    pub l: DMatrix<T>,
    pub k_red: DMatrix<T>,
    pub generator_ids: Vec<usize>,
    plant: LosslessSystem<T>,
}

impl<T: Real> SwingModel<T> {
    /// Builds the model of `net` end to end.
    pub fn from_network(net: &PowerNetwork) -> Result<Self> {
        let lap = build_laplacian::<T>(net)?;
        let m: Vec<T> = net.inertias()?.into_iter().map(lit).collect();
        let k_red = kron_reduce(&lap.k_a, &lap.k_b, &lap.k_c)?;
        let l = factor_reduced(&k_red, DEFAULT_SWING_TOL)?;
        let mut model = build_statespace(&m, &l)?;
        model.k_red = k_red;
        model.generator_ids = lap.generator_ids;
        Ok(model)
    }

    pub fn sys(&self) -> &StateSpace<T> {
        self.plant.sys()
    }

    /// The realization together with its certificate `diag(M, I)`.
    pub fn plant(&self) -> &LosslessSystem<T> {
        &self.plant
    }

    pub fn n(&self) -> usize {
        self.m.len()
    }
}

/// Assembles the state-space model from inertias `m` and factor `l`
/// (`n x (n - 1)`) and attaches the certificate `diag(M, I)`.
pub fn build_statespace<T: Real>(m: &[T], l: &DMatrix<T>) -> Result<SwingModel<T>> {
    let n = m.len();
    if n == 0 {
        return Err(Error::InvalidConfig("swing model needs at least one generator".into()));
    }
    if l.shape() != (n, n - 1) {
        return Err(Error::DimensionMismatch(format!("L must be {n}x{}, got {:?}", n - 1, l.shape())));
    }
    if let Some(&bad) = m.iter().find(|&&x| !(x > T::zero())) {
        return Err(Error::NonpositiveInertia(to_f64(bad)));
    }
    let ns = 2 * n - 1;
    let m_inv = DMatrix::from_diagonal(&DVector::from_iterator(n, m.iter().map(|&x| T::one() / x)));
    let mut a = DMatrix::<T>::zeros(ns, ns);
    a.view_mut((0, n), (n, n - 1)).copy_from(&(-(&m_inv * l)));
    a.view_mut((n, 0), (n - 1, n)).copy_from(&l.transpose());
    let mut b = DMatrix::<T>::zeros(ns, n);
    b.view_mut((0, 0), (n, n)).copy_from(&m_inv);
    let mut c = DMatrix::<T>::zeros(n, ns);
    c.view_mut((0, 0), (n, n)).fill_with_identity();
    let sys = StateSpace::strictly_proper(a, b, c)?;

    let mut p = DMatrix::<T>::identity(ns, ns);
    for (k, &mk) in m.iter().enumerate() {
        p[(k, k)] = mk;
    }
    let plant = LosslessSystem::with_certificate(sys, p, DEFAULT_SWING_TOL)
        .map_err(|e| Error::IllConditioned(format!("swing certificate failed to verify: {e}")))?;
    Ok(SwingModel {
        m: DVector::from_column_slice(m),
        l: l.clone(),
        k_red: l * l.transpose(),
        generator_ids: (0..n).collect(),
        plant,
    })
}

/// `sqrt(2 sum(1 / M_k))`.
pub fn h2_limit_swing<T: Real>(m: &[T]) -> Result<T> {
    Ok(harmonic_report(m)?.gamma_h2)
}

/// Harmonic-mean decomposition of the H2 limit of a swing model.
#[derive(Debug, Clone, PartialEq)]
pub struct HarmonicReport<T> {
    pub gamma_h2: T,
    /// `gamma_h2^2 / n`, equal to `2 / harmonic_mean`.
    pub gamma_sq_over_n: T,
    pub harmonic_mean: T,
    /// `2 / M_k`; these add up to `gamma_h2^2`.
    pub contributions: Vec<T>,
}

pub fn harmonic_report<T: Real>(m: &[T]) -> Result<HarmonicReport<T>> {
    if m.is_empty() {
        return Err(Error::InvalidConfig("no inertias given".into()));
    }
    if let Some(&bad) = m.iter().find(|&&x| !(x > T::zero()) || !x.is_finite()) {
        return Err(Error::NonpositiveInertia(to_f64(bad)));
    }
    let two: T = lit(2.0);
    let contributions: Vec<T> = m.iter().map(|&x| two / x).collect();
    let inv_sum = m.iter().fold(T::zero(), |acc, &x| acc + T::one() / x);
    let n: T = lit(m.len() as f64);
    let harmonic_mean = n / inv_sum;
    let gamma_sq = two * inv_sum;
    Ok(HarmonicReport {
        gamma_h2: gamma_sq.sqrt(),
        gamma_sq_over_n: gamma_sq / n,
        harmonic_mean,
        contributions,
    })
}

/// Aggregates every cluster into one bus.
///
/// The lumped bus takes the cluster id as its id, the summed inertia and
/// power, and the centroid position. It is a generator of the kind holding
/// most of the cluster's inertia, or a load bus when the cluster has no
/// generator. Only transmission-tier lines between different clusters are
/// kept.
pub fn lump(net: &PowerNetwork) -> Result<PowerNetwork> {
    let mut clusters: BTreeMap<usize, Vec<&Bus>> = BTreeMap::new();
    for b in &net.buses {
        clusters.entry(b.cluster).or_default().push(b);
    }
    let cluster_of: HashMap<usize, usize> = net.buses.iter().map(|b| (b.id, b.cluster)).collect();
    let mut buses = Vec::with_capacity(clusters.len());
    for (&cid, members) in &clusters {
        let power = members.iter().map(|b| b.power).sum();
        let k = members.len() as f64;
        let position = [
            members.iter().map(|b| b.position[0]).sum::<f64>() / k,
            members.iter().map(|b| b.position[1]).sum::<f64>() / k,
        ];
        let mut by_kind: BTreeMap<BusKind, f64> = BTreeMap::new();
        for b in members.iter().filter(|b| b.kind.is_generator()) {
            let m = b.inertia.ok_or(Error::NonpositiveInertia(0.0))?;
            *by_kind.entry(b.kind).or_default() += m;
        }
        let (kind, inertia) = if by_kind.is_empty() {
            (BusKind::Load, None)
        } else {
            let total: f64 = by_kind.values().sum();
            let kind = by_kind
                .iter()
                .fold((BusKind::Load, f64::NEG_INFINITY), |best, (&k, &m)| if m > best.1 { (k, m) } else { best })
                .0;
            (kind, Some(total))
        };
        buses.push(Bus { id: cid, kind, power, inertia, position, cluster: cid });
    }
    let lines: Vec<Line> = net
        .lines
        .iter()
        .filter(|l| l.tier == Tier::Transmission)
        .filter_map(|l| {
            let (ci, cj) = (*cluster_of.get(&l.i)?, *cluster_of.get(&l.j)?);
            (ci != cj).then(|| Line { i: ci, j: cj, susceptance: l.susceptance, load_angle: l.load_angle, tier: Tier::Transmission })
        })
        .collect();
    let lumped = PowerNetwork { buses, lines };
    let ids: Vec<usize> = clusters.keys().copied().collect();
    if !connected(&ids, lumped.lines.iter().map(|l| (l.i, l.j))) {
        return Err(Error::Disconnected("lumped transmission network".into()));
    }
    Ok(lumped)
}
