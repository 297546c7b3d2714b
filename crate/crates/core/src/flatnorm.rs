//! Flat norm, filling volume, mass minimization and homology of simplicial chains.
//!
//! When every k-cell has at most two coherently oriented cofaces, the weighted
//! L1 problem `min sum w|T - dA| + sum v|A|` is the dual of a maximum-weight
//! circulation on the dual graph and is solved by a primal-dual flow method.
//! Otherwise it goes through the dense simplex.

use std::cmp::Ordering;
use std::collections::{BTreeSet, BinaryHeap, VecDeque};
use std::sync::Arc;

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::bld_maps::{BldMap, Window};
use crate::currents::{SimplicialComplex, SimplicialCurrent};
use crate::error::{Error, Result};
use crate::lp::{rational_rank, solve_lp, LpProblem};
use crate::transport::lift_complex;

/// A union of cells, listed per dimension.
#[derive(Clone, Debug, PartialEq)]
pub struct CellRegion {
    cells: Vec<BTreeSet<usize>>,
}

impl CellRegion {
    pub fn all(k: &SimplicialComplex) -> Self {
        CellRegion {
            cells: (0..=k.top_dim()).map(|d| k.all_cells(d)).collect(),
        }
    }

    /// Cells whose barycenter lies in the closed ball.
    pub fn ball(k: &SimplicialComplex, center: &[f64], radius: f64) -> Self {
        let space = k.space().clone();
        let c = space.canonical_coords(center);
        CellRegion {
            cells: (0..=k.top_dim())
                .map(|d| k.cells_where(d, |b| space.dist(b, &c) <= radius))
                .collect(),
        }
    }

    pub fn from_cells(cells: Vec<BTreeSet<usize>>) -> Self {
        CellRegion { cells }
    }

    pub fn contains(&self, dim: usize, cell: usize) -> bool {
        self.cells.get(dim).is_some_and(|s| s.contains(&cell))
    }

    pub fn cells(&self, dim: usize) -> Option<&BTreeSet<usize>> {
        self.cells.get(dim)
    }
}

/// Optimal flat-norm decomposition `T = (T - dA) + dA`.
#[derive(Clone, Debug)]
pub struct FlatDecomposition {
    pub value: f64,
    pub witness: SimplicialCurrent,
    pub residual: SimplicialCurrent,
    /// Value of the dual certificate.
    pub dual_value: f64,
}

/// Outcome of a filling problem; `value` is infinite when nothing fills.
#[derive(Clone, Debug)]
pub struct Filling {
    pub value: f64,
    pub chain: Option<SimplicialCurrent>,
}

impl Filling {
    pub fn is_feasible(&self) -> bool {
        self.value.is_finite()
    }
}

/// Mass-minimal representative of a homology class.
#[derive(Clone, Debug)]
pub struct MassMinimizer {
    pub current: SimplicialCurrent,
    pub mass: f64,
    pub flat_norm: f64,
}

fn weights(k: &SimplicialComplex, dim: usize, region: Option<&CellRegion>) -> Vec<f64> {
    k.volumes(dim)
        .iter()
        .enumerate()
        .map(|(i, v)| if region.is_none_or(|r| r.contains(dim, i)) { *v } else { 0.0 })
        .collect()
}

fn dense_values(t: &SimplicialCurrent) -> Vec<f64> {
    let mut v = vec![0.0; t.complex().num_cells(t.dim())];
    for (i, a) in t.terms() {
        v[i] = *a;
    }
    v
}

fn boundary_values(k: &SimplicialComplex, dim: usize, a: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; k.num_cells(dim)];
    for (s, &c) in a.iter().enumerate() {
        if c != 0.0 {
            for &(f, sign) in k.faces(dim + 1, s) {
                out[f] += sign as f64 * c;
            }
        }
    }
    out
}

fn weighted_l1(k: &SimplicialComplex, dim: usize, t: &[f64], w: &[f64], v: &[f64], a: &[f64]) -> f64 {
    let da = boundary_values(k, dim, a);
    let r: f64 = t.iter().zip(&da).zip(w).map(|((t, d), w)| w * (t - d).abs()).sum();
    r + a.iter().zip(v).map(|(a, v)| v * a.abs()).sum::<f64>()
}

/// Solves `min sum w|t - dA| + sum v|A|`; `hard` turns the residual into an equality.
/// Returns the optimal A and the dual value, or None when a hard problem is infeasible.
fn solve_l1(
    k: &SimplicialComplex,
    dim: usize,
    t: &[f64],
    w: &[f64],
    v: &[f64],
    hard: bool,
) -> Result<Option<(Vec<f64>, f64)>> {
    if let Some(orient) = coherent_orientation(k, dim) {
        let w_eff: Vec<f64> = if hard {
            let big = 2.0 * v.iter().sum::<f64>() + 1.0;
            vec![big; w.len()]
        } else {
            w.to_vec()
        };
        let (a, dual) = flow_l1(k, dim, t, &w_eff, v, &orient)?;
        if hard {
            let da = boundary_values(k, dim, &a);
            let scale = 1.0 + t.iter().map(|x| x.abs()).fold(0.0, f64::max);
            if t.iter().zip(&da).any(|(t, d)| (t - d).abs() > 1e-7 * scale) {
                return Ok(None);
            }
            let value = a.iter().zip(v).map(|(a, v)| v * a.abs()).sum();
            return Ok(Some((a, value)));
        }
        return Ok(Some((a, dual)));
    }
    dense_l1(k, dim, t, w, v, hard)
}

fn dense_l1(
    k: &SimplicialComplex,
    dim: usize,
    t: &[f64],
    w: &[f64],
    v: &[f64],
    hard: bool,
) -> Result<Option<(Vec<f64>, f64)>> {
    let n0 = k.num_cells(dim);
    let n1 = k.num_cells(dim + 1);
    // variables: A+ , A- , then R+ , R- unless hard
    let mut objective: Vec<f64> = v.iter().chain(v.iter()).copied().collect();
    if !hard {
        objective.extend(w.iter().chain(w.iter()));
    }
    let mut p = LpProblem::new(objective);
    let mut rows: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n0];
    for s in 0..n1 {
        for &(f, sign) in k.faces(dim + 1, s) {
            rows[f].push((s, sign as f64));
            rows[f].push((n1 + s, -(sign as f64)));
        }
    }
    for (f, mut row) in rows.into_iter().enumerate() {
        if !hard {
            row.push((2 * n1 + f, 1.0));
            row.push((2 * n1 + n0 + f, -1.0));
        }
        p.add_row(row, t[f]);
    }
    match solve_lp(&p) {
        Ok(sol) => {
            let a = (0..n1).map(|s| sol.x[s] - sol.x[n1 + s]).collect();
            Ok(Some((a, sol.exact_value.unwrap_or(sol.value))))
        }
        Err(Error::Infeasible) if hard => Ok(None),
        Err(e) => Err(e),
    }
}

/// Orientation signs on (dim+1)-cells making every shared dim-cell cancel,
/// or None if some dim-cell has three cofaces or no such signs exist.
fn coherent_orientation(k: &SimplicialComplex, dim: usize) -> Option<Vec<i8>> {
    let n1 = k.num_cells(dim + 1);
    if (0..k.num_cells(dim)).any(|f| k.cofaces(dim, f).len() > 2) {
        return None;
    }
    let mut orient = vec![0i8; n1];
    for start in 0..n1 {
        if orient[start] != 0 {
            continue;
        }
        orient[start] = 1;
        let mut queue = VecDeque::from([start]);
        while let Some(s) = queue.pop_front() {
            for &(f, sign) in k.faces(dim + 1, s) {
                for &(other, osign) in k.cofaces(dim, f) {
                    if other == s {
                        continue;
                    }
                    let want = -orient[s] * sign * osign;
                    if orient[other] == 0 {
                        orient[other] = want;
                        queue.push_back(other);
                    } else if orient[other] != want {
                        return None;
                    }
                }
            }
        }
    }
    Some(orient)
}

fn flow_l1(k: &SimplicialComplex, dim: usize, t: &[f64], w: &[f64], v: &[f64], orient: &[i8]) -> Result<(Vec<f64>, f64)> {
    let n1 = k.num_cells(dim + 1);
    let root = n1;
    let mut net = Network::new(n1 + 1);
    let mut constant = 0.0;
    for f in 0..k.num_cells(dim) {
        let cof = k.cofaces(dim, f);
        if w[f] <= 0.0 {
            continue;
        }
        match cof.len() {
            0 => constant += w[f] * t[f].abs(),
            1 => {
                let (s, sign) = cof[0];
                let ts = (orient[s] * sign) as f64 * t[f];
                net.add_edge(s, root, w[f], ts);
            }
            _ => {
                let (a, sa) = cof[0];
                let (b, _) = cof[1];
                let ts = (orient[a] * sa) as f64 * t[f];
                net.add_edge(a, b, w[f], ts);
            }
        }
    }
    for (s, &vs) in v.iter().enumerate() {
        if vs > 0.0 {
            net.add_edge(s, root, vs, 0.0);
        }
    }
    net.solve()?;
    let dual = constant + net.weighted_flow();
    let a = (0..n1).map(|s| orient[s] as f64 * (net.pot[s] - net.pot[root])).collect();
    Ok((a, dual))
}

#[derive(PartialEq)]
struct HeapItem(f64, usize);

impl Eq for HeapItem {}

impl PartialOrd for HeapItem {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for HeapItem {
    fn cmp(&self, other: &Self) -> Ordering {
        other.0.total_cmp(&self.0).then(other.1.cmp(&self.1))
    }
}

/// Undirected edges carrying flow in `[-w, w]` with gain `t` per unit from tail to head.
struct Network {
    to: Vec<usize>,
    res: Vec<f64>,
    cost: Vec<f64>,
    gain: Vec<f64>,
    adj: Vec<Vec<usize>>,
    excess: Vec<f64>,
    pot: Vec<f64>,
}

impl Network {
    fn new(n: usize) -> Self {
        Network {
            to: Vec::new(),
            res: Vec::new(),
            cost: Vec::new(),
            gain: Vec::new(),
            adj: vec![Vec::new(); n],
            excess: vec![0.0; n],
            pot: vec![0.0; n],
        }
    }

    fn add_edge(&mut self, a: usize, b: usize, w: f64, t: f64) {
        let e = self.to.len();
        self.to.extend([b, a]);
        self.cost.extend([-t, t]);
        self.gain.push(t);
        // start on the profitable side so all residual costs are nonnegative
        let f = if t > 0.0 {
            w
        } else if t < 0.0 {
            -w
        } else {
            0.0
        };
        self.res.extend([w - f, w + f]);
        self.excess[a] -= f;
        self.excess[b] += f;
        self.adj[a].push(e);
        self.adj[b].push(e + 1);
    }

    fn tail(&self, arc: usize) -> usize {
        self.to[arc ^ 1]
    }

    fn weighted_flow(&self) -> f64 {
        self.gain
            .iter()
            .enumerate()
            .map(|(e, t)| t * 0.5 * (self.res[2 * e + 1] - self.res[2 * e]))
            .sum()
    }

    fn reduced(&self, arc: usize) -> f64 {
        self.cost[arc] + self.pot[self.tail(arc)] - self.pot[self.to[arc]]
    }

    fn solve(&mut self) -> Result<()> {
        let n = self.adj.len();
        let max_cap = self.res.iter().fold(0.0f64, |m, r| m.max(*r));
        let cap_eps = 1e-12 * max_cap.max(1e-300);
        let ex_eps = 1e-10 * max_cap.max(1e-300);
        let max_cost = self.cost.iter().fold(0.0f64, |m, c| m.max(c.abs()));
        let cost_eps = 1e-10 * (1.0 + max_cost);
        loop {
            let sources: Vec<usize> = (0..n).filter(|&u| self.excess[u] > ex_eps).collect();
            if sources.is_empty() {
                return Ok(());
            }
            let mut dist = vec![f64::INFINITY; n];
            let mut heap = BinaryHeap::new();
            for &s in &sources {
                dist[s] = 0.0;
                heap.push(HeapItem(0.0, s));
            }
            let mut reach = f64::INFINITY;
            while let Some(HeapItem(d, u)) = heap.pop() {
                if d > dist[u] {
                    continue;
                }
                if self.excess[u] < -ex_eps {
                    reach = d;
                    break;
                }
                for &arc in &self.adj[u] {
                    if self.res[arc] <= cap_eps {
                        continue;
                    }
                    let v = self.to[arc];
                    let nd = d + self.reduced(arc).max(0.0);
                    if nd < dist[v] {
                        dist[v] = nd;
                        heap.push(HeapItem(nd, v));
                    }
                }
            }
            if !reach.is_finite() {
                let left: f64 = sources.iter().map(|&s| self.excess[s]).sum();
                if left <= 1e-9 * (1.0 + max_cap) {
                    return Ok(());
                }
                return Err(Error::Solver(format!("flow left excess {left:e} unrouted")));
            }
            for u in 0..n {
                self.pot[u] += dist[u].min(reach);
            }
            // blocking flows on the admissible subgraph
            loop {
                let mut level = vec![usize::MAX; n];
                let mut queue = VecDeque::new();
                for &s in &sources {
                    if self.excess[s] > ex_eps {
                        level[s] = 0;
                        queue.push_back(s);
                    }
                }
                let mut found = false;
                while let Some(u) = queue.pop_front() {
                    if self.excess[u] < -ex_eps {
                        found = true;
                        continue;
                    }
                    for &arc in &self.adj[u] {
                        let v = self.to[arc];
                        if level[v] == usize::MAX && self.res[arc] > cap_eps && self.reduced(arc) <= cost_eps {
                            level[v] = level[u] + 1;
                            queue.push_back(v);
                        }
                    }
                }
                if !found {
                    break;
                }
                let mut next = vec![0usize; n];
                for &s in &sources {
                    self.augment_from(s, &mut level, &mut next, cap_eps, ex_eps, cost_eps);
                }
            }
        }
    }

    fn augment_from(&mut self, s: usize, level: &mut [usize], next: &mut [usize], cap_eps: f64, ex_eps: f64, cost_eps: f64) {
        let mut path: Vec<usize> = Vec::new();
        while self.excess[s] > ex_eps && level[s] != usize::MAX {
            let u = path.last().map_or(s, |&a| self.to[a]);
            if u != s && self.excess[u] < -ex_eps {
                let mut delta = self.excess[s].min(-self.excess[u]);
                for &a in &path {
                    delta = delta.min(self.res[a]);
                }
                for &a in &path {
                    self.res[a] -= delta;
                    self.res[a ^ 1] += delta;
                }
                self.excess[s] -= delta;
                self.excess[u] += delta;
                path.clear();
                continue;
            }
            let mut advanced = false;
            while next[u] < self.adj[u].len() {
                let arc = self.adj[u][next[u]];
                let v = self.to[arc];
                if level[v] != usize::MAX
                    && level[v] == level[u] + 1
                    && self.res[arc] > cap_eps
                    && self.reduced(arc) <= cost_eps
                {
                    path.push(arc);
                    advanced = true;
                    break;
                }
                next[u] += 1;
            }
            if !advanced {
                level[u] = usize::MAX;
                path.pop();
            }
        }
    }
}

/// Flat norm `min ||T - dA||(E) + ||A||(E)` over all (k+1)-chains A; costs count only on `region`.
pub fn flat_norm(t: &SimplicialCurrent, region: Option<&CellRegion>) -> Result<FlatDecomposition> {
    let k = t.complex();
    let dim = t.dim();
    if dim + 1 > k.top_dim() || k.num_cells(dim + 1) == 0 {
        return Err(Error::Precondition(format!("complex has no cells of dimension {}", dim + 1)));
    }
    let tv = dense_values(t);
    let w = weights(k, dim, region);
    let v = weights(k, dim + 1, region);
    let (a, dual) = solve_l1(k, dim, &tv, &w, &v, false)?.expect("soft problem is feasible");
    let value = weighted_l1(k, dim, &tv, &w, &v, &a);
    let scale = 1.0 + t.mass(None);
    if (value - dual).abs() > 1e-6 * scale {
        return Err(Error::Solver(format!("duality gap {} in flat norm", (value - dual).abs())));
    }
    let witness = SimplicialCurrent::from_terms(k, dim + 1, a.iter().copied().enumerate())?;
    let residual = t.minus(&witness.boundary()?)?;
    Ok(FlatDecomposition {
        value,
        witness,
        residual,
        dual_value: dual,
    })
}

/// Least mass of a (k+1)-chain with boundary `s`.
pub fn filling_volume(s: &SimplicialCurrent) -> Result<Filling> {
    let k = s.complex();
    let dim = s.dim();
    if dim >= k.top_dim() || k.num_cells(dim + 1) == 0 {
        return Err(Error::Precondition("filling needs cells one dimension up".into()));
    }
    let tv = dense_values(s);
    let w = vec![0.0; tv.len()];
    let v = weights(k, dim + 1, None);
    match solve_l1(k, dim, &tv, &w, &v, true)? {
        Some((a, _)) => {
            let chain = SimplicialCurrent::from_terms(k, dim + 1, a.iter().copied().enumerate())?;
            Ok(Filling {
                value: chain.mass(None),
                chain: Some(chain),
            })
        }
        None => Ok(Filling {
            value: f64::INFINITY,
            chain: None,
        }),
    }
}

/// The least-mass cycle `T - dB` homologous to `T`.
pub fn mass_minimize_in_class(t: &SimplicialCurrent) -> Result<MassMinimizer> {
    if !t.is_cycle() {
        return Err(Error::NotACycle);
    }
    let k = t.complex();
    let dim = t.dim();
    if dim + 1 > k.top_dim() {
        return Ok(MassMinimizer {
            current: t.clone(),
            mass: t.mass(None),
            flat_norm: t.mass(None),
        });
    }
    let tv = dense_values(t);
    let w = weights(k, dim, None);
    let v = vec![0.0; k.num_cells(dim + 1)];
    let (a, _) = solve_l1(k, dim, &tv, &w, &v, false)?.expect("soft problem is feasible");
    let b = SimplicialCurrent::from_terms(k, dim + 1, a.iter().copied().enumerate())?;
    let raw = t.minus(&b.boundary()?)?;
    let current = SimplicialCurrent::from_terms(k, dim, raw.terms().filter(|(_, a)| a.abs() > 1e-9).map(|(i, a)| (i, *a)))?;
    let mass = current.mass(None);
    let flat = flat_norm(&current, None)?.value;
    if (flat - mass).abs() > 1e-6 * (1.0 + mass) {
        return Err(Error::Solver(format!("minimizer has flat norm {flat} but mass {mass}")));
    }
    Ok(MassMinimizer {
        current,
        mass,
        flat_norm: flat,
    })
}

fn boundary_rows(k: &SimplicialComplex, dim: usize) -> Vec<Vec<(usize, i64)>> {
    (0..k.num_cells(dim))
        .map(|i| k.faces(dim, i).iter().map(|&(f, s)| (f, s as i64)).collect())
        .collect()
}

/// Betti number over the rationals.
pub fn homology_rank(k: &SimplicialComplex, dim: usize) -> usize {
    if dim > k.top_dim() {
        return 0;
    }
    let rank_here = if dim == 0 { 0 } else { rational_rank(&boundary_rows(k, dim)) };
    let rank_up = if dim < k.top_dim() { rational_rank(&boundary_rows(k, dim + 1)) } else { 0 };
    k.num_cells(dim) - rank_here - rank_up
}

/// Empirical isoperimetric constant `max FillVol(dA) / M(dA)` over sampled chains A.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FillingEstimate {
    pub constant: f64,
    pub samples: usize,
    pub ratios: Vec<f64>,
}

/// Samples alternate between boundaries of single cells and of metric balls of cells.
pub fn filling_constant_estimate(k: &Arc<SimplicialComplex>, dim: usize, samples: usize, seed: u64) -> Result<FillingEstimate> {
    if dim + 1 > k.top_dim() {
        return Err(Error::Precondition("sampling needs cells one dimension up".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let up = dim + 1;
    let cells: Vec<usize> = (0..k.num_cells(up)).collect();
    let bary: Vec<Vec<f64>> = cells.iter().map(|&i| k.space().canonical_coords(&k.barycenter(up, i))).collect();
    let reach = match k.space().diameter() {
        Ok(d) => d,
        Err(_) => {
            let mut d: f64 = 0.0;
            for b in &bary {
                d = d.max(k.space().dist(b, &bary[0]));
            }
            2.0 * d
        }
    };
    let mut ratios = Vec::with_capacity(samples);
    for s in 0..samples {
        let chosen: Vec<usize> = if s % 2 == 0 {
            vec![*cells.choose(&mut rng).unwrap()]
        } else {
            let c = &bary[rng.random_range(0..cells.len())];
            let r = rng.random::<f64>() * 0.5 * reach;
            cells.iter().copied().filter(|&i| k.space().dist(&bary[i], c) <= r).collect()
        };
        let a = SimplicialCurrent::from_terms(k, up, chosen.into_iter().map(|i| (i, 1.0)))?;
        let t = a.boundary()?;
        let m = t.mass(None);
        if m <= 1e-12 {
            continue;
        }
        let fill = filling_volume(&t)?;
        ratios.push(fill.value / m);
    }
    let constant = ratios.iter().copied().fold(0.0, f64::max);
    Ok(FillingEstimate {
        constant,
        samples: ratios.len(),
        ratios,
    })
}

/// One row of the separation experiment.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeparationRow {
    pub radius: f64,
    pub mass_1: f64,
    pub mass_2: f64,
    pub separation: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeparationReport {
    pub rows: Vec<SeparationRow>,
    /// Least-squares slope of log mass against log R (both cycles pooled).
    pub mass_exponent: f64,
    pub separation_exponent: f64,
}

/// Slope of the least-squares line through `(ln x, ln y)`.
pub fn log_log_slope(x: &[f64], y: &[f64]) -> f64 {
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let cov: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let var: f64 = lx.iter().map(|a| (a - mx).powi(2)).sum();
    cov / var
}

/// Pulls two cycles back through a torus cover and measures their masses and
/// flat-norm separation inside growing balls.
pub fn separation_experiment(
    f: &BldMap,
    t1: &SimplicialCurrent,
    t2: &SimplicialCurrent,
    radii: &[f64],
) -> Result<SeparationReport> {
    if !matches!(f, BldMap::TorusCover(_)) {
        return Err(Error::Unsupported("separation experiment runs on torus covers".into()));
    }
    if !Arc::ptr_eq(t1.complex(), t2.complex()) && t1.complex().id() != t2.complex().id() {
        return Err(Error::UnregisteredComplex);
    }
    let n = f.dimension();
    let origin = vec![0.0; n];
    let mut rows = Vec::with_capacity(radii.len());
    for &r in radii {
        let lift = lift_complex(f, t1.complex(), &Window::ball(&origin, r + 1.0))?;
        let region = CellRegion::ball(lift.source(), &origin, r);
        let p1 = lift.pull_back(t1)?;
        let p2 = lift.pull_back(t2)?;
        let diff = p1.minus(&p2)?;
        let sep = flat_norm(&diff, Some(&region))?;
        rows.push(SeparationRow {
            radius: r,
            mass_1: p1.mass(region.cells(t1.dim())),
            mass_2: p2.mass(region.cells(t2.dim())),
            separation: sep.value,
        });
    }
    let (mut xs, mut ms) = (Vec::new(), Vec::new());
    for row in &rows {
        xs.extend([row.radius, row.radius]);
        ms.extend([row.mass_1, row.mass_2]);
    }
    let rs: Vec<f64> = rows.iter().map(|r| r.radius).collect();
    let seps: Vec<f64> = rows.iter().map(|r| r.separation).collect();
    let separation_exponent = if seps.iter().all(|s| *s > 0.0) && rs.len() > 1 {
        log_log_slope(&rs, &seps)
    } else {
        f64::NAN
    };
    Ok(SeparationReport {
        mass_exponent: if rs.len() > 1 { log_log_slope(&xs, &ms) } else { f64::NAN },
        separation_exponent,
        rows,
    })
}
