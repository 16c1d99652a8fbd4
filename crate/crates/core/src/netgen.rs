//! Seeded generator of clustered swing-equation test networks.
//!
//! Cluster centers are drawn on a 100 x 100 map; each cluster's buses are
//! scattered normally around its center, connected by a Euclidean minimum
//! spanning tree (sub-transmission), and the most central bus of every
//! cluster (eigenvector centrality on the tree) joins a complete graph of
//! transmission lines. Susceptances are sized with a DC power flow.
//!
//! Random streams: stream 0 of `ChaCha8Rng::seed_from_u64(seed)` draws the
//! cluster sizes and centers; cluster `c` draws its bus positions and powers
//! from stream `c + 1`, so changing one cluster leaves the others intact.

use nalgebra::{DMatrix, DVector};
use petgraph::algo::min_spanning_tree;
use petgraph::data::Element;
use petgraph::graph::UnGraph;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::swing::{Bus, BusKind, Line, PowerNetwork, Tier};

const MAP_SIZE: f64 = 100.0;
const CLUSTER_SPREAD: f64 = 5.0;
const MIN_POWER: f64 = 0.1;
const TARGET_ANGLE: f64 = std::f64::consts::PI / 6.0;
const ANGLE_CAP: f64 = std::f64::consts::PI / 4.0;
const TRANSMISSION_MARGIN: f64 = 2.0;
const MAX_SIZING_ITER: usize = 20;
const SIZING_OVERSHOOT: f64 = 1.1;
const MAX_SIZE_DRAWS: usize = 10_000;
const CENTRALITY_TOL: f64 = 1e-10;
const CENTRALITY_MAX_ITER: usize = 200_000;

/// Inertia per unit of rated power for each generator kind.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InertiaConstants {
    pub conventional: f64,
    pub hydro: f64,
    pub wind_solar: f64,
}

impl Default for InertiaConstants {
    fn default() -> Self {
        Self { conventional: 6.0, hydro: 3.0, wind_solar: 0.006 }
    }
}

impl InertiaConstants {
    pub fn get(&self, kind: BusKind) -> Option<f64> {
        match kind {
            BusKind::Conventional => Some(self.conventional),
            BusKind::Hydro => Some(self.hydro),
            BusKind::WindSolar => Some(self.wind_solar),
            BusKind::Load => None,
        }
    }
}

/// Role of each of the ten clusters in the reference ensemble.
pub const DEFAULT_ROLES: [BusKind; 10] = [
    BusKind::WindSolar,
    BusKind::WindSolar,
    BusKind::Conventional,
    BusKind::Hydro,
    BusKind::Hydro,
    BusKind::Load,
    BusKind::Load,
    BusKind::Load,
    BusKind::Load,
    BusKind::Load,
];

/// Cluster sizes used for ensemble averages: 52 generator buses split
/// 8/20/4/8/12 and 48 load buses.
pub const DEFAULT_FIXED_SIZES: [usize; 10] = [8, 20, 4, 8, 12, 10, 10, 10, 9, 9];

/// Roles for `k` clusters: the reference pattern, continued with loads.
pub fn default_roles(k: usize) -> Vec<BusKind> {
    (0..k).map(|c| DEFAULT_ROLES.get(c).copied().unwrap_or(BusKind::Load)).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EnsembleConfig {
    pub n_clusters: usize,
    pub total_buses: usize,
    pub cluster_roles: Vec<BusKind>,
    pub inertia_constants: InertiaConstants,
    pub seed: u64,
    pub fixed_cluster_sizes: Option<Vec<usize>>,
}

impl Default for EnsembleConfig {
    fn default() -> Self {
        Self {
            n_clusters: 10,
            total_buses: 100,
            cluster_roles: DEFAULT_ROLES.to_vec(),
            inertia_constants: InertiaConstants::default(),
            seed: 0,
            fixed_cluster_sizes: None,
        }
    }
}

impl EnsembleConfig {
    /// `k` clusters and `buses` buses with the default role pattern.
    pub fn with_size(k: usize, buses: usize) -> Self {
        Self { n_clusters: k, total_buses: buses, cluster_roles: default_roles(k), ..Self::default() }
    }

    /// The configuration of the fixed-size ensemble.
    pub fn fixed_sizes() -> Self {
        Self { fixed_cluster_sizes: Some(DEFAULT_FIXED_SIZES.to_vec()), ..Self::default() }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        if self.n_clusters == 0 {
            return bad("at least one cluster is required".into());
        }
        if self.cluster_roles.len() != self.n_clusters {
            return bad(format!("{} roles for {} clusters", self.cluster_roles.len(), self.n_clusters));
        }
        if !self.cluster_roles.iter().any(|r| r.is_generator()) {
            return bad("no generator cluster".into());
        }
        let c = &self.inertia_constants;
        if ![c.conventional, c.hydro, c.wind_solar].iter().all(|&x| x > 0.0 && x.is_finite()) {
            return bad("inertia constants must be positive".into());
        }
        match &self.fixed_cluster_sizes {
            Some(sizes) => {
                if sizes.len() != self.n_clusters || sizes.iter().sum::<usize>() != self.total_buses {
                    return bad("fixed cluster sizes must match n_clusters and total_buses".into());
                }
                if sizes.iter().any(|&s| s == 0) {
                    return bad("empty cluster".into());
                }
            }
            None => {
                if self.total_buses < 2 * self.n_clusters {
                    return bad("need at least two buses per cluster".into());
                }
            }
        }
        Ok(())
    }
}

/// Diagnostics of one generation run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenerationReport {
    pub cluster_sizes: Vec<usize>,
    /// Size draws rejected because some cluster got fewer than two buses.
    pub rejected_size_draws: usize,
    pub sizing_iterations: usize,
    /// Largest nominal angle difference across any line, radians.
    pub max_angle: f64,
    /// Largest angle difference under any single transmission-line outage.
    pub max_outage_angle: f64,
    /// Bus id of each cluster's transmission node.
    pub centers: Vec<usize>,
}

fn stream(seed: u64, s: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(s);
    rng
}

pub fn generate_network(cfg: &EnsembleConfig) -> Result<PowerNetwork> {
    generate_network_with_report(cfg).map(|(net, _)| net)
}

pub fn generate_network_with_report(cfg: &EnsembleConfig) -> Result<(PowerNetwork, GenerationReport)> {
    cfg.validate()?;
    let k = cfg.n_clusters;
    let mut global = stream(cfg.seed, 0);

    let mut rejected = 0;
    let sizes = match &cfg.fixed_cluster_sizes {
        Some(s) => s.clone(),
        None => loop {
            let mut sizes = vec![0usize; k];
            for _ in 0..cfg.total_buses {
                sizes[global.random_range(0..k)] += 1;
            }
            if sizes.iter().all(|&s| s >= 2) {
                break sizes;
            }
            rejected += 1;
            if rejected >= MAX_SIZE_DRAWS {
                return Err(Error::InvalidConfig("could not draw cluster sizes with two buses each".into()));
            }
        },
    };
    let centers: Vec<[f64; 2]> = (0..k)
        .map(|_| [global.random::<f64>() * MAP_SIZE, global.random::<f64>() * MAP_SIZE])
        .collect();

    let spread = Normal::new(0.0, CLUSTER_SPREAD).expect("valid spread");
    let unit = Normal::new(0.0, 1.0).expect("valid normal");
    let mut buses = Vec::with_capacity(cfg.total_buses);
    let mut lines = Vec::new();
    let mut hubs = Vec::with_capacity(k);
    for c in 0..k {
        let mut rng = stream(cfg.seed, c as u64 + 1);
        let role = cfg.cluster_roles[c];
        let sign = if role.is_generator() { 1.0 } else { -1.0 };
        let first = buses.len();
        for _ in 0..sizes[c] {
            let pos = [centers[c][0] + spread.sample(&mut rng), centers[c][1] + spread.sample(&mut rng)];
            let d = ((pos[0] - centers[c][0]).powi(2) + (pos[1] - centers[c][1]).powi(2)).sqrt();
            let magnitude = MIN_POWER + Distribution::<f64>::sample(&unit, &mut rng).abs() * (-d / CLUSTER_SPREAD).exp();
            buses.push(Bus { id: buses.len(), kind: role, power: sign * magnitude, inertia: None, position: pos, cluster: c });
        }
        let members = &buses[first..];
        let tree = euclidean_mst(members);
        let mut adj = DMatrix::<f64>::zeros(members.len(), members.len());
        for &(a, b) in &tree {
            adj[(a, b)] = 1.0;
            adj[(b, a)] = 1.0;
            lines.push(Line { i: first + a, j: first + b, susceptance: 1.0, load_angle: 0.0, tier: Tier::Subtransmission });
        }
        hubs.push(first + most_central(&eigenvector_centrality(&adj)?));
    }
    for a in 0..k {
        for b in a + 1..k {
            lines.push(Line { i: hubs[a], j: hubs[b], susceptance: 1.0, load_angle: 0.0, tier: Tier::Transmission });
        }
    }

    // Loads absorb exactly what the generators produce.
    let generation: f64 = buses.iter().filter(|b| b.power > 0.0).map(|b| b.power).sum();
    let demand: f64 = -buses.iter().filter(|b| b.power < 0.0).map(|b| b.power).sum::<f64>();
    if demand > 0.0 {
        let s = generation / demand;
        for b in buses.iter_mut().filter(|b| b.power < 0.0) {
            b.power *= s;
        }
    }

    let net = assign_inertia(&PowerNetwork { buses, lines }, &cfg.inertia_constants)?;
    let (net, sizing) = size_susceptances(net)?;
    let report = GenerationReport {
        cluster_sizes: sizes,
        rejected_size_draws: rejected,
        sizing_iterations: sizing.iterations,
        max_angle: sizing.max_angle,
        max_outage_angle: sizing.max_outage_angle,
        centers: hubs,
    };
    Ok((net, report))
}

/// Edges (local indices) of the Euclidean minimum spanning tree.
fn euclidean_mst(buses: &[Bus]) -> Vec<(usize, usize)> {
    let mut g = UnGraph::<(), f64>::with_capacity(buses.len(), buses.len() * buses.len() / 2);
    let nodes: Vec<_> = (0..buses.len()).map(|_| g.add_node(())).collect();
    for a in 0..buses.len() {
        for b in a + 1..buses.len() {
            let (p, q) = (buses[a].position, buses[b].position);
            g.add_edge(nodes[a], nodes[b], ((p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2)).sqrt());
        }
    }
    let mut edges: Vec<(usize, usize)> = min_spanning_tree(&g)
        .filter_map(|e| match e {
            Element::Edge { source, target, .. } => Some((source.min(target), source.max(target))),
            Element::Node { .. } => None,
        })
        .collect();
    edges.sort_unstable();
    edges
}

/// `M_k = constant(kind) |p_k|` on every generator bus.
pub fn assign_inertia(net: &PowerNetwork, constants: &InertiaConstants) -> Result<PowerNetwork> {
    let mut out = net.clone();
    for b in out.buses.iter_mut() {
        if let Some(c) = constants.get(b.kind) {
            if !(b.power.is_finite() && b.power != 0.0) {
                return Err(Error::MissingRatedPower(b.id));
            }
            b.inertia = Some(c * b.power.abs());
        }
    }
    Ok(out)
}

/// Dominant eigenvector of a connected graph's adjacency matrix, nonnegative
/// with unit 2-norm.
///
/// Power iteration runs on `A + I`, which has the same dominant eigenvector
/// but no oscillation on bipartite graphs (trees).
pub fn eigenvector_centrality(adjacency: &DMatrix<f64>) -> Result<DVector<f64>> {
    let k = adjacency.nrows();
    if k == 0 || !adjacency.is_square() {
        return Err(Error::NotConnected);
    }
    let ids: Vec<usize> = (0..k).collect();
    let edges = (0..k).flat_map(|i| (0..k).map(move |j| (i, j))).filter(|&(i, j)| i < j && adjacency[(i, j)] != 0.0);
    if !graph_connected(&ids, edges) {
        return Err(Error::NotConnected);
    }
    let shifted = adjacency + DMatrix::identity(k, k);
    let mut v = DVector::from_element(k, 1.0 / (k as f64).sqrt());
    for _ in 0..CENTRALITY_MAX_ITER {
        let mut next = &shifted * &v;
        next /= next.norm();
        let change = (&next - &v).amax();
        v = next;
        if change <= CENTRALITY_TOL {
            return Ok(v);
        }
    }
    Err(Error::NoConvergence(CENTRALITY_MAX_ITER))
}

/// Index of the largest score; near-ties go to the lowest index.
pub fn most_central(scores: &DVector<f64>) -> usize {
    let best = scores.max();
    scores.iter().position(|&s| s >= best - 1e3 * CENTRALITY_TOL).unwrap_or(0)
}

fn graph_connected(ids: &[usize], edges: impl Iterator<Item = (usize, usize)>) -> bool {
    let mut parent: Vec<usize> = (0..ids.len()).collect();
    fn find(p: &mut [usize], mut x: usize) -> usize {
        while p[x] != x {
            p[x] = p[p[x]];
            x = p[x];
        }
        x
    }
    let mut comps = ids.len();
    for (a, b) in edges {
        let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
        if ra != rb {
            parent[ra] = rb;
            comps -= 1;
        }
    }
    comps == 1
}

/// DC power flow `P = B theta` with bus 0 as angle reference. `None` when the
/// (remaining) network is disconnected.
pub fn dc_power_flow(n: usize, lines: &[(usize, usize, f64)], p: &[f64]) -> Option<Vec<f64>> {
    if n == 1 {
        return Some(vec![0.0]);
    }
    let mut lap = DMatrix::<f64>::zeros(n, n);
    for &(i, j, b) in lines {
        lap[(i, i)] += b;
        lap[(j, j)] += b;
        lap[(i, j)] -= b;
        lap[(j, i)] -= b;
    }
    let reduced = lap.view((1, 1), (n - 1, n - 1)).clone_owned();
    let rhs = DVector::from_iterator(n - 1, p[1..].iter().copied());
    let theta = reduced.cholesky()?.solve(&rhs);
    let mut out = vec![0.0];
    out.extend(theta.iter());
    Some(out)
}

struct Sizing {
    iterations: usize,
    max_angle: f64,
    max_outage_angle: f64,
}

/// Scales susceptances until every nominal angle is below 30 degrees (15 on
/// transmission lines, leaving room for re-dispatch) and checks that all
/// angles stay below 45 degrees nominally and after any single
/// transmission-line outage that keeps the network connected.
fn size_susceptances(mut net: PowerNetwork) -> Result<(PowerNetwork, Sizing)> {
    let n = net.buses.len();
    let p: Vec<f64> = net.buses.iter().map(|b| b.power).collect();
    let as_triples = |lines: &[Line]| lines.iter().map(|l| (l.i, l.j, l.susceptance)).collect::<Vec<_>>();
    let max_angle = |lines: &[(usize, usize, f64)]| -> Option<f64> {
        let th = dc_power_flow(n, lines, &p)?;
        Some(lines.iter().map(|&(i, j, _)| (th[i] - th[j]).abs()).fold(0.0, f64::max))
    };

    for iteration in 1..=MAX_SIZING_ITER {
        let triples = as_triples(&net.lines);
        let theta = dc_power_flow(n, &triples, &p).ok_or_else(|| Error::Disconnected("generated network".into()))?;
        let mut changed = false;
        for l in net.lines.iter_mut() {
            let margin = if l.tier == Tier::Transmission { TRANSMISSION_MARGIN } else { 1.0 };
            let need = (theta[l.i] - theta[l.j]).abs() * margin / TARGET_ANGLE;
            if need > 1.0 {
                l.susceptance *= need * SIZING_OVERSHOOT;
                changed = true;
            }
        }
        if changed {
            continue;
        }
        let nominal = max_angle(&triples).unwrap_or(f64::INFINITY);
        let mut worst_outage: f64 = 0.0;
        for (k, l) in net.lines.iter().enumerate() {
            if l.tier != Tier::Transmission {
                continue;
            }
            let rest: Vec<_> = triples.iter().enumerate().filter(|&(q, _)| q != k).map(|(_, &t)| t).collect();
            let ids: Vec<usize> = (0..n).collect();
            if !graph_connected(&ids, rest.iter().map(|&(i, j, _)| (i, j))) {
                continue;
            }
            worst_outage = worst_outage.max(max_angle(&rest).unwrap_or(f64::INFINITY));
        }
        if nominal < ANGLE_CAP && worst_outage < ANGLE_CAP {
            for l in net.lines.iter_mut() {
                l.load_angle = theta[l.i] - theta[l.j];
            }
            return Ok((net, Sizing { iterations: iteration, max_angle: nominal, max_outage_angle: worst_outage }));
        }
        for l in net.lines.iter_mut().filter(|l| l.tier == Tier::Transmission) {
            l.susceptance *= 1.5;
        }
    }
    Err(Error::InfeasibleSizing(MAX_SIZING_ITER))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn adjacency(k: usize, edges: &[(usize, usize)]) -> DMatrix<f64> {
        let mut a = DMatrix::zeros(k, k);
        for &(i, j) in edges {
            a[(i, j)] = 1.0;
            a[(j, i)] = 1.0;
        }
        a
    }

    #[test]
    fn centrality_of_star_and_path() {
        let star = eigenvector_centrality(&adjacency(4, &[(0, 1), (0, 2), (0, 3)])).unwrap();
        assert!(star[0] > star[1] + 1e-6);
        assert_eq!(most_central(&star), 0);
        let path = eigenvector_centrality(&adjacency(3, &[(0, 1), (1, 2)])).unwrap();
        assert_eq!(most_central(&path), 1);
        let pair = eigenvector_centrality(&adjacency(2, &[(0, 1)])).unwrap();
        assert!((pair[0] - pair[1]).abs() < 1e-12);
        assert_eq!(most_central(&pair), 0);
        assert!(matches!(eigenvector_centrality(&adjacency(3, &[(0, 1)])), Err(Error::NotConnected)));
    }

    #[test]
    fn inertia_assignment() {
        let bus = |kind, power| Bus { id: 0, kind, power, inertia: None, position: [0.0, 0.0], cluster: 0 };
        let c = InertiaConstants::default();
        for (kind, m) in [(BusKind::Conventional, 12.0), (BusKind::Hydro, 6.0), (BusKind::WindSolar, 0.012)] {
            let net = PowerNetwork { buses: vec![bus(kind, 2.0)], lines: vec![] };
            let got = assign_inertia(&net, &c).unwrap().buses[0].inertia.unwrap();
            assert!((got - m).abs() < 1e-15);
        }
        let net = PowerNetwork { buses: vec![bus(BusKind::Hydro, 0.0)], lines: vec![] };
        assert!(matches!(assign_inertia(&net, &c), Err(Error::MissingRatedPower(0))));
    }

    #[test]
    fn small_network_is_valid() {
        let (net, report) = generate_network_with_report(&EnsembleConfig { seed: 3, ..EnsembleConfig::with_size(3, 12) }).unwrap();
        assert_eq!(net.buses.len(), 12);
        assert_eq!(net.lines.iter().filter(|l| l.tier == Tier::Subtransmission).count(), 12 - 3);
        assert_eq!(net.lines.iter().filter(|l| l.tier == Tier::Transmission).count(), 3);
        assert!(report.max_angle < ANGLE_CAP);
        net.validate().unwrap();
    }
}
