//! Per-bus closed-loop gain matrices, ensemble averages, the Jensen gap and
//! lumped-versus-full comparisons.
//!
//! For a swing plant with `n` generator buses the closed loop maps
//! `w = (w_u, w_y)` to `z = (y, u)`. The sub-block for monitored bus `i` and
//! disturbed bus `k` uses inputs `(k, n + k)` and outputs `(i, n + i)`.

use nalgebra::{Complex, DMatrix};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lossless::LosslessSystem;
use crate::netgen::{generate_network, EnsembleConfig};
use crate::numlin::dense::{sigma_max_complex, symmetrize};
use crate::numlin::norms::{hinf_norm_with, HinfOptions};
use crate::numlin::{check_hurwitz, eigenvalues, LyapunovSolver, StateSpace};
use crate::swing::{harmonic_report, lump, PowerNetwork, SwingModel};
use crate::synth::{build_generalized_plant, close_loop, static_hinf_controller, structured_h2_controller, Controller};

/// Number of log-spaced frequencies in the shared H-infinity pre-pass.
pub const GRID_POINTS: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Metric {
    H2,
    Hinf,
}

/// Table of sub-block norms: row `i` is the monitored bus, column `k` the
/// disturbed bus.
#[derive(Debug, Clone, PartialEq)]
pub struct GainMatrix {
    pub values: DMatrix<f64>,
    pub metric: Metric,
    pub log_transformed: bool,
    pub bus_ids: Vec<usize>,
    /// Start index of every cluster along the axes, plus the final length.
    pub cluster_boundaries: Vec<usize>,
}

impl GainMatrix {
    pub fn n(&self) -> usize {
        self.values.nrows()
    }

    /// Entrywise natural log, for display.
    pub fn ln(&self) -> GainMatrix {
        GainMatrix { values: self.values.map(f64::ln), log_transformed: true, ..self.clone() }
    }

    /// Collapses buses into clusters given by `cluster_boundaries`: the H2
    /// entry is the root-sum-square of the block (the H2 norm of the
    /// cluster-to-cluster map), the H-infinity entry the block maximum.
    pub fn aggregate(&self) -> GainMatrix {
        let b = &self.cluster_boundaries;
        let k = b.len().saturating_sub(1);
        let mut out = DMatrix::zeros(k, k);
        for r in 0..k {
            for c in 0..k {
                let block = self.values.view((b[r], b[c]), (b[r + 1] - b[r], b[c + 1] - b[c]));
                out[(r, c)] = match self.metric {
                    Metric::H2 => block.iter().map(|v| v * v).sum::<f64>().sqrt(),
                    Metric::Hinf => block.iter().copied().fold(0.0, f64::max),
                };
            }
        }
        GainMatrix {
            values: out,
            metric: self.metric,
            log_transformed: false,
            bus_ids: (0..k).collect(),
            cluster_boundaries: (0..=k).collect(),
        }
    }
}

fn sub_indices(n: usize, bus: usize) -> [usize; 2] {
    [bus, n + bus]
}

/// Gains of every `(i, k)` sub-block of the closed loop of `plant` with `k`.
///
/// `plant` is the open-loop system with `m = p = n` (one input and output per
/// bus). H2 gains need zero feedthrough in every sub-block.
pub fn subblock_gains(plant: &StateSpace<f64>, k: &Controller<f64>, metric: Metric) -> Result<GainMatrix> {
    let n = plant.m();
    if plant.p() != n {
        return Err(Error::DimensionMismatch("sub-block gains need one input and one output per bus".into()));
    }
    let cl = close_loop(&build_generalized_plant(plant), k)?;
    let values = match metric {
        Metric::H2 => h2_gains(&cl, n)?,
        Metric::Hinf => hinf_gains(&cl, n)?,
    };
    Ok(GainMatrix { values, metric, log_transformed: false, bus_ids: (0..n).collect(), cluster_boundaries: vec![0, n] })
}

/// One Lyapunov solve per disturbed bus in the Schur basis of the closed
/// loop; all monitored buses are read off the same Gramian.
fn h2_gains(cl: &StateSpace<f64>, n: usize) -> Result<DMatrix<f64>> {
    let d = cl.d();
    for i in 0..n {
        for k in 0..n {
            let rows = sub_indices(n, i);
            let cols = sub_indices(n, k);
            let dmax = rows.iter().flat_map(|&r| cols.iter().map(move |&c| d[(r, c)].abs())).fold(0.0, f64::max);
            if dmax > 0.0 {
                return Err(Error::NonzeroFeedthrough(dmax));
            }
        }
    }
    let solver = LyapunovSolver::new(cl.a())?;
    let u = solver.schur().u();
    let ub = u.transpose() * cl.b();
    let cu = cl.c() * u;
    let columns: Vec<Result<Vec<f64>>> = (0..n)
        .into_par_iter()
        .map(|k| {
            let bk = ub.select_columns(&sub_indices(n, k));
            let y = symmetrize(&solver.solve_schur_basis(&(&bk * bk.transpose()))?);
            let full = &cu * y * cu.transpose();
            Ok((0..n).map(|i| (full[(i, i)] + full[(n + i, n + i)]).max(0.0).sqrt()).collect())
        })
        .collect();
    let mut out = DMatrix::zeros(n, n);
    for (k, col) in columns.into_iter().enumerate() {
        for (i, v) in col?.into_iter().enumerate() {
            out[(i, k)] = v;
        }
    }
    Ok(out)
}

/// Sampling frequencies of the pre-pass: zero, the modal frequencies and a
/// logarithmic grid spanning the spectrum.
fn grid(a: &DMatrix<f64>) -> Result<Vec<f64>> {
    let ev = eigenvalues(a)?;
    let mags: Vec<f64> = ev.iter().map(|z| z.norm()).filter(|&m| m > 0.0).collect();
    let lo = mags.iter().copied().fold(f64::INFINITY, f64::min).min(1.0) * 0.1;
    let hi = mags.iter().copied().fold(0.0, f64::max).max(1.0) * 10.0;
    let mut w = vec![0.0];
    for j in 0..GRID_POINTS {
        let t = j as f64 / (GRID_POINTS - 1) as f64;
        w.push((lo.ln() + t * (hi.ln() - lo.ln())).exp());
    }
    w.extend(ev.iter().filter(|z| z.im > 0.0).map(|z| z.im));
    w.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    w.dedup();
    Ok(w)
}

/// Frequency response through the Hessenberg form `A = Q H Q^T`, so that
/// each evaluation costs one `O(n^2)` Hessenberg solve per input column.
struct ResponseEvaluator {
    h: DMatrix<f64>,
    qb: DMatrix<f64>,
    cq: DMatrix<f64>,
    d: DMatrix<f64>,
}

impl ResponseEvaluator {
    fn new(sys: &StateSpace<f64>) -> Self {
        let hess = sys.a().clone().hessenberg();
        let q = hess.q();
        Self { h: hess.h(), qb: q.transpose() * sys.b(), cq: sys.c() * &q, d: sys.d().clone() }
    }

    /// `(jw I - H)^-1 Q^T B[:, cols]` by elimination with adjacent-row pivoting.
    fn solve(&self, w: f64, cols: &[usize]) -> Result<DMatrix<Complex<f64>>> {
        let n = self.h.nrows();
        let mut m = self.h.map(|x| Complex::new(-x, 0.0));
        for i in 0..n {
            m[(i, i)] += Complex::new(0.0, w);
        }
        let mut x = DMatrix::from_fn(n, cols.len(), |r, c| Complex::new(self.qb[(r, cols[c])], 0.0));
        for c in 0..n.saturating_sub(1) {
            if m[(c + 1, c)].norm_sqr() > m[(c, c)].norm_sqr() {
                m.swap_rows(c, c + 1);
                x.swap_rows(c, c + 1);
            }
            let pivot = m[(c, c)];
            if pivot.norm_sqr() == 0.0 {
                continue;
            }
            let f = m[(c + 1, c)] / pivot;
            if f.norm_sqr() == 0.0 {
                continue;
            }
            for j in c..n {
                let v = m[(c, j)];
                m[(c + 1, j)] -= f * v;
            }
            for j in 0..x.ncols() {
                let v = x[(c, j)];
                x[(c + 1, j)] -= f * v;
            }
        }
        for r in (0..n).rev() {
            let pivot = m[(r, r)];
            if pivot.norm_sqr() == 0.0 {
                return Err(Error::IllConditioned("singular pencil in frequency sweep".into()));
            }
            for j in 0..x.ncols() {
                let mut acc = x[(r, j)];
                for t in r + 1..n {
                    acc -= m[(r, t)] * x[(t, j)];
                }
                x[(r, j)] = acc / pivot;
            }
        }
        Ok(x)
    }

    /// Rows `rows` of `G(jw)` restricted to input columns `cols`.
    fn response(&self, w: f64, rows: &[usize], cols: &[usize]) -> Result<DMatrix<Complex<f64>>> {
        let x = self.solve(w, cols)?;
        Ok(DMatrix::from_fn(rows.len(), cols.len(), |r, c| {
            let mut acc = Complex::new(self.d[(rows[r], cols[c])], 0.0);
            for t in 0..x.nrows() {
                acc += x[(t, c)] * self.cq[(rows[r], t)];
            }
            acc
        }))
    }
}

const GOLDEN_STEPS: usize = 30;

/// Golden-section refinement of a sampled peak of `f` on `[lo, hi]`, in
/// `ln w` when `lo > 0`. Returns the best sample seen.
fn refine_peak(f: impl Fn(f64) -> Result<f64>, lo: f64, hi: f64, start: (f64, f64)) -> Result<(f64, f64)> {
    let log = lo > 0.0;
    let (to_w, mut a, mut b) = if log {
        (f64::exp as fn(f64) -> f64, lo.ln(), hi.ln())
    } else {
        ((|u| u) as fn(f64) -> f64, lo, hi)
    };
    let mut best = start;
    let r = 0.5 * (5f64.sqrt() - 1.0);
    let eval = |u: f64, best: &mut (f64, f64)| -> Result<f64> {
        let w = to_w(u);
        let v = f(w)?;
        if v > best.0 {
            *best = (v, w);
        }
        Ok(v)
    };
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let mut fc = eval(c, &mut best)?;
    let mut fd = eval(d, &mut best)?;
    for _ in 0..GOLDEN_STEPS {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = eval(c, &mut best)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = eval(d, &mut best)?;
        }
    }
    Ok(best)
}

fn hinf_gains(cl: &StateSpace<f64>, n: usize) -> Result<DMatrix<f64>> {
    check_hurwitz(cl.a())?;
    let freqs = grid(cl.a())?;
    let eval = ResponseEvaluator::new(cl);
    let all: Vec<usize> = (0..cl.m()).collect();
    let outs: Vec<usize> = (0..cl.p()).collect();

    // Sampled sigma_max of every sub-block at every grid frequency.
    let samples: Vec<Result<DMatrix<f64>>> = freqs
        .par_iter()
        .map(|&w| {
            let g = eval.response(w, &outs, &all)?;
            let mut s = DMatrix::zeros(n, n);
            for i in 0..n {
                for k in 0..n {
                    let rows = sub_indices(n, i);
                    let cols = sub_indices(n, k);
                    let block = DMatrix::from_fn(2, 2, |r, c| g[(rows[r], cols[c])]);
                    s[(i, k)] = sigma_max_complex(&block);
                }
            }
            Ok(s)
        })
        .collect();
    let mut peak = DMatrix::<f64>::zeros(n, n);
    let mut at = DMatrix::<usize>::zeros(n, n);
    for (j, s) in samples.into_iter().enumerate() {
        let s = s?;
        for idx in 0..n * n {
            if s[idx] > peak[idx] {
                peak[idx] = s[idx];
                at[idx] = j;
            }
        }
    }

    let entries: Vec<Result<f64>> = (0..n * n)
        .into_par_iter()
        .map(|idx| {
            let (i, k) = (idx % n, idx / n);
            let (rows, cols) = (sub_indices(n, i), sub_indices(n, k));
            let j = at[idx];
            let lo = freqs[j.saturating_sub(1)];
            let hi = freqs[(j + 1).min(freqs.len() - 1)];
            let sigma = |w: f64| Ok(sigma_max_complex(&eval.response(w, &rows, &cols)?));
            let (best, _) =
                if hi > lo { refine_peak(sigma, lo, hi, (peak[idx], freqs[j]))? } else { (peak[idx], freqs[j]) };
            let sub = cl.select(&cols, &rows)?;
            let opts = HinfOptions {
                tol: crate::numlin::norms::DEFAULT_HINF_TOL,
                lower_bound: Some(best),
                frequencies: Vec::new(),
                assume_stable: true,
            };
            let r = hinf_norm_with(&sub, &opts)?;
            Ok(r.value)
        })
        .collect();
    let mut out = DMatrix::zeros(n, n);
    for (idx, v) in entries.into_iter().enumerate() {
        out[idx] = v?;
    }
    Ok(out)
}

/// Optimal controller paired with each metric: the structured dynamic
/// controller for H2, the static gain `-sqrt(2) I` for H-infinity.
pub fn paired_controller(plant: &LosslessSystem<f64>, metric: Metric) -> Result<Controller<f64>> {
    match metric {
        Metric::H2 => structured_h2_controller(plant),
        Metric::Hinf => static_hinf_controller(plant),
    }
}

/// Cluster boundaries along the generator ordering of `net`.
pub fn generator_cluster_boundaries(net: &PowerNetwork, generator_ids: &[usize]) -> Vec<usize> {
    let mut out = vec![0];
    for w in 1..generator_ids.len() {
        let (a, b) = (net.bus(generator_ids[w - 1]), net.bus(generator_ids[w]));
        if a.map(|x| x.cluster) != b.map(|x| x.cluster) {
            out.push(w);
        }
    }
    out.push(generator_ids.len());
    out
}

/// Gains of a network's swing model under the controller paired with `metric`.
pub fn network_gains(net: &PowerNetwork, metric: Metric) -> Result<GainMatrix> {
    let model = SwingModel::<f64>::from_network(net)?;
    let k = paired_controller(model.plant(), metric)?;
    let mut g = subblock_gains(model.sys(), &k, metric)?;
    g.cluster_boundaries = generator_cluster_boundaries(net, &model.generator_ids);
    g.bus_ids = model.generator_ids.clone();
    Ok(g)
}

/// Entrywise mean of gain matrices over an ensemble.
#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleAverage {
    pub mean: GainMatrix,
    /// Seeds whose networks entered the mean, in order.
    pub seeds: Vec<u64>,
    /// Seeds skipped because generation or analysis failed.
    pub failed_seeds: Vec<u64>,
}

/// Averages `n_runs` networks generated from consecutive seeds starting at
/// `cfg.seed`. A seed that fails is skipped and the next one is tried.
pub fn ensemble_average(cfg: &EnsembleConfig, n_runs: usize, metric: Metric) -> Result<EnsembleAverage> {
    if cfg.fixed_cluster_sizes.is_none() {
        return Err(Error::InvalidConfig("ensemble averages need fixed cluster sizes".into()));
    }
    if n_runs == 0 {
        return Err(Error::InvalidConfig("n_runs must be positive".into()));
    }
    let mut seeds = Vec::new();
    let mut failed = Vec::new();
    let mut sum: Option<GainMatrix> = None;
    let mut next = cfg.seed;
    while seeds.len() < n_runs {
        if failed.len() > 10 * n_runs {
            return Err(Error::InvalidConfig("too many failing seeds".into()));
        }
        let batch: Vec<u64> = (0..(n_runs - seeds.len()) as u64).map(|j| next + j).collect();
        next += batch.len() as u64;
        let results: Vec<Result<GainMatrix>> = batch
            .par_iter()
            .map(|&seed| {
                let net = generate_network(&EnsembleConfig { seed, ..cfg.clone() })?;
                network_gains(&net, metric)
            })
            .collect();
        for (seed, r) in batch.into_iter().zip(results) {
            match r {
                Ok(g) => {
                    seeds.push(seed);
                    match sum.as_mut() {
                        None => sum = Some(g),
                        Some(s) => {
                            if s.values.shape() != g.values.shape() {
                                return Err(Error::DimensionMismatch("ensemble members differ in size".into()));
                            }
                            s.values += g.values;
                        }
                    }
                }
                Err(e) if e.class() == crate::error::ErrorClass::Input => return Err(e),
                Err(_) => failed.push(seed),
            }
        }
    }
    let mut mean = sum.expect("at least one run");
    mean.values /= seeds.len() as f64;
    mean.bus_ids = (0..mean.n()).collect();
    Ok(EnsembleAverage { mean, seeds, failed_seeds: failed })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JensenReport {
    /// `sum(1 / M_k)`
    pub lhs: f64,
    /// `n^2 / M_tot`, the value for uniform inertia
    pub rhs: f64,
    pub gap: f64,
    /// `gap M_tot / n^2`
    pub heterogeneity_index: f64,
}

pub fn jensen_report(m: &[f64]) -> Result<JensenReport> {
    harmonic_report(m)?;
    let n = m.len() as f64;
    let total: f64 = m.iter().sum();
    let lhs: f64 = m.iter().map(|x| 1.0 / x).sum();
    let rhs = n * n / total;
    let gap = (lhs - rhs).max(0.0);
    Ok(JensenReport { lhs, rhs, gap, heterogeneity_index: gap * total / (n * n) })
}

#[derive(Debug, Clone, PartialEq)]
pub struct LumpedComparison {
    /// Full-model gains aggregated per generator cluster.
    pub full_gains: GainMatrix,
    pub lumped_gains: GainMatrix,
    pub limit_full: f64,
    pub limit_lumped: f64,
}

pub fn compare_lumped(full: &PowerNetwork, metric: Metric) -> Result<LumpedComparison> {
    let lumped = lump(full)?;
    let full_gains = network_gains(full, metric)?.aggregate();
    let lumped_gains = network_gains(&lumped, metric)?;
    Ok(LumpedComparison {
        full_gains,
        lumped_gains,
        limit_full: harmonic_report(&full.inertias()?)?.gamma_h2,
        limit_lumped: harmonic_report(&lumped.inertias()?)?.gamma_h2,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::swing::build_statespace;

    #[test]
    fn single_bus_h2_entry() {
        let model = build_statespace(&[1.0], &DMatrix::zeros(1, 0)).unwrap();
        let k = paired_controller(model.plant(), Metric::H2).unwrap();
        let g = subblock_gains(model.sys(), &k, Metric::H2).unwrap();
        assert!((g.values[(0, 0)] - 2f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn static_controller_has_no_h2_gains() {
        let model = build_statespace(&[1.0], &DMatrix::zeros(1, 0)).unwrap();
        let k = paired_controller(model.plant(), Metric::Hinf).unwrap();
        assert!(matches!(subblock_gains(model.sys(), &k, Metric::H2), Err(Error::NonzeroFeedthrough(_))));
        let g = subblock_gains(model.sys(), &k, Metric::Hinf).unwrap();
        assert!((g.values[(0, 0)] - 2f64.sqrt()).abs() < 1e-5);
    }

    #[test]
    fn jensen_examples() {
        assert_eq!(jensen_report(&[1.0, 1.0, 1.0]).unwrap().gap, 0.0);
        let r = jensen_report(&[6.0, 3.0]).unwrap();
        assert!((r.lhs - 0.5).abs() < 1e-15 && (r.rhs - 4.0 / 9.0).abs() < 1e-15);
    }
}
