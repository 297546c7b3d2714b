//! Simplicial complexes embedded in catalog spaces and the polyhedral currents
//! (weighted chains) they carry.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use nalgebra::DMatrix;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{usage, Error, Result};
use crate::spaces::{dist2, Space};

static NEXT_COMPLEX_ID: AtomicU64 = AtomicU64::new(1);

const LIFT_TOL: f64 = 1e-9;

/// Scalar ring for chain coefficients.
pub trait Coefficient: Clone + PartialEq + fmt::Debug + Send + Sync + 'static {
    fn zero() -> Self;
    fn from_i64(v: i64) -> Self;
    fn is_zero(&self) -> bool;
    fn plus(&self, other: &Self) -> Self;
    fn times(&self, other: &Self) -> Self;
    fn negated(&self) -> Self;
    fn to_f64(&self) -> f64;
}

impl Coefficient for f64 {
    fn zero() -> Self {
        0.0
    }
    fn from_i64(v: i64) -> Self {
        v as f64
    }
    fn is_zero(&self) -> bool {
        *self == 0.0
    }
    fn plus(&self, other: &Self) -> Self {
        self + other
    }
    fn times(&self, other: &Self) -> Self {
        self * other
    }
    fn negated(&self) -> Self {
        -self
    }
    fn to_f64(&self) -> f64 {
        *self
    }
}

impl Coefficient for BigRational {
    fn zero() -> Self {
        Zero::zero()
    }
    fn from_i64(v: i64) -> Self {
        BigRational::from_integer(BigInt::from(v))
    }
    fn is_zero(&self) -> bool {
        Zero::is_zero(self)
    }
    fn plus(&self, other: &Self) -> Self {
        self + other
    }
    fn times(&self, other: &Self) -> Self {
        self * other
    }
    fn negated(&self) -> Self {
        -self
    }
    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }
}

/// An oriented simplicial complex in a catalog space.
///
/// Every vertex is a 0-cell with the same index. Cells of quotient spaces carry
/// an isometric lift to `R^n`, on which volumes, frames and barycenters are computed.
#[derive(Debug)]
pub struct SimplicialComplex {
    id: u64,
    space: Space,
    vertices: Vec<Vec<f64>>,
    cells: Vec<Vec<Vec<usize>>>,
    lookup: Vec<HashMap<Vec<usize>, usize>>,
    lifts: Vec<Vec<Vec<Vec<f64>>>>,
    volumes: Vec<Vec<f64>>,
    faces: Vec<Vec<Vec<(usize, i8)>>>,
    cofaces: Vec<Vec<Vec<(usize, i8)>>>,
}

impl PartialEq for SimplicialComplex {
    fn eq(&self, other: &Self) -> bool {
        self.id == other.id
    }
}

impl SimplicialComplex {
    /// Builds a complex from vertices and oriented cells of any positive dimension.
    ///
    /// Faces missing from `cells` are added with increasing vertex order;
    /// repeated explicit cells are rejected.
    pub fn new(space: Space, vertices: Vec<Vec<f64>>, cells: Vec<Vec<usize>>) -> Result<Arc<Self>> {
        let n = space.dimension();
        let nv = vertices.len();
        if vertices.iter().any(|v| v.len() != n) {
            return Err(Error::InvalidComplex("vertex with wrong dimension".into()));
        }
        let vertices: Vec<Vec<f64>> = vertices.iter().map(|v| space.canonical_coords(v)).collect();
        let top = cells.iter().map(|c| c.len().saturating_sub(1)).max().unwrap_or(0);
        if top > n {
            return Err(Error::InvalidComplex(format!("cell of dimension {top} in a {n}-dimensional space")));
        }
        let mut by_dim: Vec<Vec<Vec<usize>>> = vec![Vec::new(); top + 1];
        let mut lookup: Vec<HashMap<Vec<usize>, usize>> = vec![HashMap::new(); top + 1];
        for v in 0..nv {
            by_dim[0].push(vec![v]);
            lookup[0].insert(vec![v], v);
        }
        for cell in cells {
            if cell.is_empty() {
                return Err(Error::InvalidComplex("empty cell".into()));
            }
            if cell.iter().any(|&v| v >= nv) {
                return Err(Error::InvalidComplex(format!("cell {cell:?} references a missing vertex")));
            }
            let k = cell.len() - 1;
            if k == 0 {
                continue;
            }
            let key = sorted(&cell);
            if key.windows(2).any(|w| w[0] == w[1]) {
                return Err(Error::InvalidComplex(format!("cell {cell:?} repeats a vertex")));
            }
            if lookup[k].contains_key(&key) {
                return Err(Error::InvalidComplex(format!("duplicate cell {cell:?}")));
            }
            lookup[k].insert(key, by_dim[k].len());
            by_dim[k].push(cell);
        }
        // face closure
        for k in (2..=top).rev() {
            let mut added = Vec::new();
            for cell in &by_dim[k] {
                for j in 0..=k {
                    let face = drop_index(cell, j);
                    let key = sorted(&face);
                    if !lookup[k - 1].contains_key(&key) {
                        lookup[k - 1].insert(key.clone(), by_dim[k - 1].len() + added.len());
                        added.push(key);
                    }
                }
            }
            by_dim[k - 1].extend(added);
        }

        let mut complex = SimplicialComplex {
            id: NEXT_COMPLEX_ID.fetch_add(1, Ordering::Relaxed),
            space,
            vertices,
            cells: by_dim,
            lookup,
            lifts: Vec::new(),
            volumes: Vec::new(),
            faces: Vec::new(),
            cofaces: Vec::new(),
        };
        complex.compute_geometry()?;
        complex.compute_incidence();
        Ok(Arc::new(complex))
    }

    fn compute_geometry(&mut self) -> Result<()> {
        let limit = 0.25 * self.space.injectivity_scale();
        let top = self.cells.len() - 1;
        let mut lifts: Vec<Vec<Vec<Vec<f64>>>> = vec![Vec::new(); top + 1];
        let mut volumes: Vec<Vec<f64>> = vec![Vec::new(); top + 1];
        // faces inherit the lift of their first coface, which fixes the geodesic
        // when two lifts are equally short
        for k in (0..=top).rev() {
            let mut first_coface: HashMap<Vec<usize>, (usize, usize)> = HashMap::new();
            if k < top {
                for (c, cell) in self.cells[k + 1].iter().enumerate() {
                    for j in 0..=k + 1 {
                        first_coface.entry(sorted(&drop_index(cell, j))).or_insert((c, j));
                    }
                }
            }
            let mut lk = Vec::with_capacity(self.cells[k].len());
            let mut vk = Vec::with_capacity(self.cells[k].len());
            for (i, cell) in self.cells[k].iter().enumerate() {
                let pts: Vec<&[f64]> = cell.iter().map(|&v| self.vertices[v].as_slice()).collect();
                let mut diam: f64 = 0.0;
                for a in 0..pts.len() {
                    for b in a + 1..pts.len() {
                        diam = diam.max(self.space.dist(pts[a], pts[b]));
                    }
                }
                if diam >= limit {
                    return Err(Error::InvalidComplex(format!(
                        "cell {i} of dimension {k} has diameter {diam}, needs < {limit}"
                    )));
                }
                let lift = match first_coface.get(&sorted(cell)) {
                    Some(&(c, _)) => {
                        let parent = &self.cells[k + 1][c];
                        let parent_lift: &Vec<Vec<f64>> = &lifts[k + 1][c];
                        let restricted: Vec<Vec<f64>> = cell
                            .iter()
                            .map(|v| parent_lift[parent.iter().position(|w| w == v).unwrap()].clone())
                            .collect();
                        anchor(&self.space, restricted, pts[0])
                    }
                    None => lift_points(&self.space, &pts).ok_or_else(|| {
                        Error::InvalidComplex(format!("cell {i} of dimension {k} has no isometric lift"))
                    })?,
                };
                let vol = if k == 0 { 1.0 } else { simplex_volume(&lift) };
                if !(vol > 1e-14) {
                    return Err(Error::InvalidComplex(format!("cell {i} of dimension {k} is degenerate")));
                }
                lk.push(lift);
                vk.push(vol);
            }
            lifts[k] = lk;
            volumes[k] = vk;
        }
        self.lifts = lifts;
        self.volumes = volumes;
        Ok(())
    }

    fn compute_incidence(&mut self) {
        let top = self.top_dim();
        let mut faces = vec![Vec::new(); top + 1];
        let mut cofaces: Vec<Vec<Vec<(usize, i8)>>> =
            (0..=top).map(|k| vec![Vec::new(); self.cells[k].len()]).collect();
        for k in 1..=top {
            let mut fk = Vec::with_capacity(self.cells[k].len());
            for (i, cell) in self.cells[k].iter().enumerate() {
                let mut list = Vec::with_capacity(k + 1);
                for j in 0..=k {
                    let face = drop_index(cell, j);
                    let idx = self.lookup[k - 1][&sorted(&face)];
                    let stored = &self.cells[k - 1][idx];
                    let sign = if j % 2 == 0 { 1 } else { -1 } * relative_parity(&face, stored);
                    list.push((idx, sign));
                    cofaces[k - 1][idx].push((i, sign));
                }
                fk.push(list);
            }
            faces[k] = fk;
        }
        self.faces = faces;
        self.cofaces = cofaces;
    }

    pub fn id(&self) -> u64 {
        self.id
    }

    pub fn space(&self) -> &Space {
        &self.space
    }

    pub fn top_dim(&self) -> usize {
        self.cells.len() - 1
    }

    pub fn vertices(&self) -> &[Vec<f64>] {
        &self.vertices
    }

    pub fn num_cells(&self, k: usize) -> usize {
        self.cells.get(k).map_or(0, Vec::len)
    }

    pub fn cells(&self, k: usize) -> &[Vec<usize>] {
        self.cells.get(k).map_or(&[], Vec::as_slice)
    }

    pub fn cell(&self, k: usize, i: usize) -> &[usize] {
        &self.cells[k][i]
    }

    /// Index of the cell with the given vertex set and the orientation of
    /// `tuple` relative to the stored cell.
    pub fn find_cell(&self, tuple: &[usize]) -> Option<(usize, i8)> {
        let k = tuple.len().checked_sub(1)?;
        let idx = *self.lookup.get(k)?.get(&sorted(tuple))?;
        Some((idx, relative_parity(tuple, &self.cells[k][idx])))
    }

    /// Isometric lift of the cell's vertices to `R^n`.
    pub fn lift(&self, k: usize, i: usize) -> &[Vec<f64>] {
        &self.lifts[k][i]
    }

    pub fn volume(&self, k: usize, i: usize) -> f64 {
        self.volumes[k][i]
    }

    pub fn volumes(&self, k: usize) -> &[f64] {
        self.volumes.get(k).map_or(&[], Vec::as_slice)
    }

    pub fn barycenter(&self, k: usize, i: usize) -> Vec<f64> {
        barycenter(&self.lifts[k][i])
    }

    /// Signed faces of a `k`-cell, `k >= 1`.
    pub fn faces(&self, k: usize, i: usize) -> &[(usize, i8)] {
        &self.faces[k][i]
    }

    /// Signed `(k+1)`-cofaces of a `k`-cell.
    pub fn cofaces(&self, k: usize, i: usize) -> &[(usize, i8)] {
        self.cofaces.get(k).and_then(|c| c.get(i)).map_or(&[], Vec::as_slice)
    }

    /// Largest cell diameter in dimension `k`, measured on the lifts.
    pub fn max_cell_diameter(&self, k: usize) -> f64 {
        self.lifts
            .get(k)
            .map(|cells| {
                cells
                    .iter()
                    .map(|pts| {
                        let mut d: f64 = 0.0;
                        for a in 0..pts.len() {
                            for b in a + 1..pts.len() {
                                d = d.max(dist2(&pts[a], &pts[b]).sqrt());
                            }
                        }
                        d
                    })
                    .fold(0.0, f64::max)
            })
            .unwrap_or(0.0)
    }

    /// Cells of dimension `k` selected by a predicate on the lifted barycenter.
    pub fn cells_where(&self, k: usize, pred: impl Fn(&[f64]) -> bool) -> BTreeSet<usize> {
        (0..self.num_cells(k)).filter(|&i| pred(&self.barycenter(k, i))).collect()
    }

    pub fn all_cells(&self, k: usize) -> BTreeSet<usize> {
        (0..self.num_cells(k)).collect()
    }

    /// Interchange form of the complex.
    pub fn to_file(&self) -> ComplexFile {
        ComplexFile {
            space: self.space.clone(),
            vertices: self.vertices.clone(),
            cells: self.cells.iter().skip(1).cloned().collect(),
            volumes: Some(self.volumes.iter().skip(1).cloned().collect()),
        }
    }

    /// Rebuilds a complex from its interchange form, checking any stored volumes.
    pub fn from_file(file: ComplexFile) -> Result<Arc<Self>> {
        let cells: Vec<Vec<usize>> = file.cells.iter().flatten().cloned().collect();
        let complex = SimplicialComplex::new(file.space, file.vertices, cells)?;
        if let Some(volumes) = file.volumes {
            for (k, vols) in volumes.iter().enumerate() {
                for (i, v) in vols.iter().enumerate() {
                    let actual = complex.volumes.get(k + 1).and_then(|c| c.get(i)).copied();
                    match actual {
                        Some(a) if (a - v).abs() <= 1e-9 * (1.0 + a) => {}
                        _ => {
                            return Err(Error::InvalidComplex(format!(
                                "stored volume of cell {i} in dimension {} does not match",
                                k + 1
                            )))
                        }
                    }
                }
            }
        }
        Ok(complex)
    }
}

/// Structured-text interchange form of a complex.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComplexFile {
    pub space: Space,
    pub vertices: Vec<Vec<f64>>,
    /// `cells[k - 1]` lists the oriented `k`-cells.
    pub cells: Vec<Vec<Vec<usize>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub volumes: Option<Vec<Vec<f64>>>,
}

/// Interchange form of a current: dimension and `(cell, coefficient)` pairs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurrentFile {
    pub dimension: usize,
    pub terms: Vec<(usize, f64)>,
}

/// A `k`-dimensional polyhedral current: finitely many weighted oriented cells.
#[derive(Clone, Debug)]
pub struct SimplicialCurrent<C: Coefficient = f64> {
    complex: Arc<SimplicialComplex>,
    dim: usize,
    coeffs: BTreeMap<usize, C>,
}

impl<C: Coefficient> PartialEq for SimplicialCurrent<C> {
    fn eq(&self, other: &Self) -> bool {
        self.complex.id == other.complex.id && self.dim == other.dim && self.coeffs == other.coeffs
    }
}

pub type RationalCurrent = SimplicialCurrent<BigRational>;

impl<C: Coefficient> SimplicialCurrent<C> {
    pub fn zero(complex: &Arc<SimplicialComplex>, dim: usize) -> Result<Self> {
        if dim > complex.top_dim() {
            return Err(usage(format!(
                "complex has no cells of dimension {dim} (top dimension {})",
                complex.top_dim()
            )));
        }
        Ok(SimplicialCurrent {
            complex: complex.clone(),
            dim,
            coeffs: BTreeMap::new(),
        })
    }

    /// Sums the given terms; repeated cells accumulate.
    pub fn from_terms(
        complex: &Arc<SimplicialComplex>,
        dim: usize,
        terms: impl IntoIterator<Item = (usize, C)>,
    ) -> Result<Self> {
        let mut t = Self::zero(complex, dim)?;
        for (cell, c) in terms {
            if cell >= complex.num_cells(dim) {
                return Err(usage(format!("no {dim}-cell with index {cell}")));
            }
            t.add_term(cell, &c);
        }
        Ok(t)
    }

    /// The current carried by one cell.
    pub fn cell(complex: &Arc<SimplicialComplex>, dim: usize, cell: usize, coeff: C) -> Result<Self> {
        Self::from_terms(complex, dim, [(cell, coeff)])
    }

    pub(crate) fn add_term(&mut self, cell: usize, c: &C) {
        let entry = self.coeffs.entry(cell).or_insert_with(C::zero);
        *entry = entry.plus(c);
        if entry.is_zero() {
            self.coeffs.remove(&cell);
        }
    }

    pub fn complex(&self) -> &Arc<SimplicialComplex> {
        &self.complex
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn coefficient(&self, cell: usize) -> C {
        self.coeffs.get(&cell).cloned().unwrap_or_else(C::zero)
    }

    pub fn terms(&self) -> impl Iterator<Item = (usize, &C)> {
        self.coeffs.iter().map(|(k, v)| (*k, v))
    }

    pub fn support(&self) -> BTreeSet<usize> {
        self.coeffs.keys().copied().collect()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    fn check_compatible(&self, other: &Self) -> Result<()> {
        if self.complex.id != other.complex.id {
            return Err(usage("currents live on different complexes"));
        }
        if self.dim != other.dim {
            return Err(usage(format!("dimension mismatch: {} vs {}", self.dim, other.dim)));
        }
        Ok(())
    }

    pub fn plus(&self, other: &Self) -> Result<Self> {
        self.check_compatible(other)?;
        let mut out = self.clone();
        for (cell, c) in &other.coeffs {
            out.add_term(*cell, c);
        }
        Ok(out)
    }

    pub fn minus(&self, other: &Self) -> Result<Self> {
        self.plus(&other.negated())
    }

    pub fn scaled(&self, s: &C) -> Self {
        let mut out = Self {
            complex: self.complex.clone(),
            dim: self.dim,
            coeffs: BTreeMap::new(),
        };
        for (cell, c) in &self.coeffs {
            out.add_term(*cell, &c.times(s));
        }
        out
    }

    pub fn negated(&self) -> Self {
        self.scaled(&C::from_i64(-1))
    }

    pub fn boundary(&self) -> Result<Self> {
        if self.dim == 0 {
            return Err(usage("boundary of a 0-current"));
        }
        let mut out = Self::zero(&self.complex, self.dim - 1)?;
        for (cell, c) in &self.coeffs {
            for &(face, sign) in self.complex.faces(self.dim, *cell) {
                out.add_term(face, &c.times(&C::from_i64(sign as i64)));
            }
        }
        Ok(out)
    }

    pub fn is_cycle(&self) -> bool {
        self.dim == 0 || self.boundary().map(|b| b.is_zero()).unwrap_or(false)
    }

    /// `sum |a_s| vol(s)` over `region` (all cells if `None`).
    pub fn mass(&self, region: Option<&BTreeSet<usize>>) -> f64 {
        let vols = self.complex.volumes(self.dim);
        self.coeffs
            .iter()
            .filter(|(cell, _)| region.is_none_or(|r| r.contains(cell)))
            .map(|(cell, c)| c.to_f64().abs() * vols[*cell])
            .sum()
    }

    /// Normal mass `M(T) + M(dT)`.
    pub fn normal_mass(&self) -> f64 {
        let b = if self.dim == 0 { 0.0 } else { self.boundary().map(|b| b.mass(None)).unwrap_or(0.0) };
        self.mass(None) + b
    }

    /// Restriction to a set of cells.
    pub fn restrict_cells(&self, cells: &BTreeSet<usize>) -> Self {
        Self {
            complex: self.complex.clone(),
            dim: self.dim,
            coeffs: self
                .coeffs
                .iter()
                .filter(|(k, _)| cells.contains(k))
                .map(|(k, v)| (*k, v.clone()))
                .collect(),
        }
    }

    pub fn to_f64(&self) -> SimplicialCurrent<f64> {
        let mut out = SimplicialCurrent::<f64> {
            complex: self.complex.clone(),
            dim: self.dim,
            coeffs: BTreeMap::new(),
        };
        for (cell, c) in &self.coeffs {
            out.add_term(*cell, &c.to_f64());
        }
        out
    }

    pub fn to_file(&self) -> CurrentFile {
        CurrentFile {
            dimension: self.dim,
            terms: self.coeffs.iter().map(|(k, v)| (*k, v.to_f64())).collect(),
        }
    }
}

impl SimplicialCurrent<f64> {
    /// Restriction by a scalar function sampled at lifted barycenters.
    pub fn restrict_fn(&self, eta: impl Fn(&[f64]) -> f64) -> Self {
        let mut out = Self {
            complex: self.complex.clone(),
            dim: self.dim,
            coeffs: BTreeMap::new(),
        };
        for (cell, c) in &self.coeffs {
            out.add_term(*cell, &(c * eta(&self.complex.barycenter(self.dim, *cell))));
        }
        out
    }

    /// Exact binary-rational copy.
    pub fn to_rational(&self) -> RationalCurrent {
        let mut out = RationalCurrent {
            complex: self.complex.clone(),
            dim: self.dim,
            coeffs: BTreeMap::new(),
        };
        for (cell, c) in &self.coeffs {
            let r = BigRational::from_float(*c).expect("finite coefficient");
            out.add_term(*cell, &r);
        }
        out
    }

    pub fn from_file(complex: &Arc<SimplicialComplex>, file: &CurrentFile) -> Result<Self> {
        Self::from_terms(complex, file.dimension, file.terms.iter().copied())
    }

    /// Largest absolute coefficient difference.
    pub fn max_abs_diff(&self, other: &Self) -> Result<f64> {
        Ok(self
            .minus(other)?
            .coeffs
            .values()
            .fold(0.0, |m, v| m.max(v.abs())))
    }
}

impl RationalCurrent {
    pub fn abs_mass_f64(&self) -> f64 {
        let vols = self.complex.volumes(self.dim);
        self.coeffs
            .iter()
            .map(|(cell, c)| ToPrimitive::to_f64(&Signed::abs(c)).unwrap_or(f64::NAN) * vols[*cell])
            .sum()
    }
}

pub(crate) fn sorted(t: &[usize]) -> Vec<usize> {
    let mut s = t.to_vec();
    s.sort_unstable();
    s
}

fn drop_index(t: &[usize], j: usize) -> Vec<usize> {
    t.iter()
        .enumerate()
        .filter(|(i, _)| *i != j)
        .map(|(_, v)| *v)
        .collect()
}

/// Sign of the permutation taking `b` to `a` (same vertex set).
pub(crate) fn relative_parity(a: &[usize], b: &[usize]) -> i8 {
    let pos: HashMap<usize, usize> = b.iter().enumerate().map(|(i, v)| (*v, i)).collect();
    let mut perm: Vec<usize> = a.iter().map(|v| pos[v]).collect();
    let mut sign = 1;
    for i in 0..perm.len() {
        while perm[i] != i {
            let j = perm[i];
            perm.swap(i, j);
            sign = -sign;
        }
    }
    sign
}

pub(crate) fn barycenter(pts: &[Vec<f64>]) -> Vec<f64> {
    let n = pts[0].len();
    let mut b = vec![0.0; n];
    for p in pts {
        for (bi, pi) in b.iter_mut().zip(p) {
            *bi += pi;
        }
    }
    let m = pts.len() as f64;
    b.iter_mut().for_each(|v| *v /= m);
    b
}

/// `k`-volume of the simplex spanned by `pts` (Gram determinant of edges over `k!`).
pub(crate) fn simplex_volume(pts: &[Vec<f64>]) -> f64 {
    let k = pts.len() - 1;
    if k == 0 {
        return 1.0;
    }
    let edges: Vec<Vec<f64>> = pts[1..]
        .iter()
        .map(|p| p.iter().zip(&pts[0]).map(|(a, b)| a - b).collect())
        .collect();
    let gram = DMatrix::from_fn(k, k, |i, j| edges[i].iter().zip(&edges[j]).map(|(a, b)| a * b).sum::<f64>());
    let det = gram.determinant().max(0.0);
    let fact: f64 = (1..=k).map(|v| v as f64).product();
    det.sqrt() / fact
}

/// Lifts a small cell of a flat quotient to `R^n` so that all pairwise
/// Euclidean distances equal the quotient distances.
/// Moves a lifted cell by a deck transformation so its first point is `target`.
fn anchor(space: &Space, pts: Vec<Vec<f64>>, target: &[f64]) -> Vec<Vec<f64>> {
    let signs: &[f64] = match space {
        Space::Euclidean(_) => return pts,
        Space::FlatTorus(_) => &[1.0],
        Space::Pillowcase(_) => &[1.0, -1.0],
    };
    let l = space.lattice().expect("lattice");
    for &e in signs {
        let shift: Vec<f64> = target.iter().zip(&pts[0]).map(|(t, p)| t - e * p).collect();
        let c = l.to_lattice(&shift);
        if c.iter().all(|v| (v - v.round()).abs() < 1e-9) {
            let shift = l.to_cartesian(&c.iter().map(|v| v.round()).collect::<Vec<_>>());
            return pts
                .iter()
                .map(|p| p.iter().zip(&shift).map(|(x, s)| e * x + s).collect())
                .collect();
        }
    }
    pts
}

fn lift_points(space: &Space, pts: &[&[f64]]) -> Option<Vec<Vec<f64>>> {
    let mut lifted: Vec<Vec<f64>> = vec![pts[0].to_vec()];
    if extend_lift(space, pts, &mut lifted) {
        Some(lifted)
    } else {
        None
    }
}

fn extend_lift(space: &Space, pts: &[&[f64]], lifted: &mut Vec<Vec<f64>>) -> bool {
    let j = lifted.len();
    if j == pts.len() {
        return true;
    }
    let p = pts[j];
    let candidates: Vec<Vec<f64>> = match space {
        Space::Euclidean(_) => vec![p.to_vec()],
        Space::FlatTorus(l) => vec![l.nearest_translate(p, &lifted[0])],
        Space::Pillowcase(l) => {
            let neg: Vec<f64> = p.iter().map(|v| -v).collect();
            vec![l.nearest_translate(p, &lifted[0]), l.nearest_translate(&neg, &lifted[0])]
        }
    };
    for c in candidates {
        let fits = lifted
            .iter()
            .zip(pts)
            .all(|(l, q)| (dist2(&c, l).sqrt() - space.dist(q, p)).abs() <= LIFT_TOL);
        if fits {
            lifted.push(c);
            if extend_lift(space, pts, lifted) {
                return true;
            }
            lifted.pop();
        }
    }
    false
}
