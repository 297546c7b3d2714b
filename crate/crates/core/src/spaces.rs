//! Catalog of flat geodesic spaces: Euclidean space, flat tori `R^n / L` and the
//! pillowcase `T^2 / {x ~ -x}`.
//!
//! Points of quotient spaces are stored in Cartesian coordinates of a canonical
//! representative. For a torus the representative has lattice coordinates in
//! `[0, 1)^n`; for the pillowcase it is the lexicographically smaller (in lattice
//! coordinates) of the torus representatives of `x` and `-x`.

use std::collections::hash_map::DefaultHasher;
use std::fmt;
use std::hash::{Hash, Hasher};

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{usage, Error, Result};

/// Default grid resolution used when the pillowcase diameter is sampled.
pub const PILLOWCASE_DIAMETER_RESOLUTION: f64 = 1.0 / 512.0;

/// A full-rank lattice in `R^n`, given by basis vectors stored as rows.
#[derive(Clone, Debug, PartialEq)]
pub struct Lattice {
    basis: Vec<Vec<f64>>,
    // inverse of the row-basis matrix: lattice coords c = x * inverse
    inverse: Vec<Vec<f64>>,
    shortest: f64,
    covolume: f64,
}

impl Lattice {
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self> {
        let n = rows.len();
        if n == 0 || rows.iter().any(|r| r.len() != n) {
            return Err(usage("lattice basis must be a non-empty square matrix"));
        }
        let m = DMatrix::from_fn(n, n, |i, j| rows[i][j]);
        let det = m.determinant();
        if !det.is_finite() || det.abs() < 1e-12 {
            return Err(usage("lattice basis is singular"));
        }
        let inv = m.try_inverse().ok_or_else(|| usage("lattice basis is singular"))?;
        let inverse = (0..n).map(|i| (0..n).map(|j| inv[(i, j)]).collect()).collect();
        let mut lattice = Lattice {
            basis: rows,
            inverse,
            shortest: f64::INFINITY,
            covolume: det.abs(),
        };
        let radius = if n <= 3 { 2 } else { 1 };
        let mut shortest = f64::INFINITY;
        for k in integer_cube(n, radius) {
            if k.iter().all(|&c| c == 0) {
                continue;
            }
            shortest = shortest.min(norm(&lattice.offset(&k)));
        }
        lattice.shortest = shortest;
        Ok(lattice)
    }

    pub fn unit(n: usize) -> Self {
        let rows = (0..n)
            .map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
            .collect();
        Lattice::new(rows).expect("identity basis is regular")
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[Vec<f64>] {
        &self.basis
    }

    pub fn covolume(&self) -> f64 {
        self.covolume
    }

    /// Length of the shortest non-zero lattice vector.
    pub fn shortest_vector(&self) -> f64 {
        self.shortest
    }

    pub fn to_cartesian(&self, c: &[f64]) -> Vec<f64> {
        let n = self.dim();
        (0..n)
            .map(|j| (0..n).map(|i| c[i] * self.basis[i][j]).sum())
            .collect()
    }

    pub fn to_lattice(&self, x: &[f64]) -> Vec<f64> {
        let n = self.dim();
        (0..n)
            .map(|j| (0..n).map(|i| x[i] * self.inverse[i][j]).sum())
            .collect()
    }

    /// Cartesian vector of the integer combination `k` of basis rows.
    pub fn offset(&self, k: &[i64]) -> Vec<f64> {
        let c: Vec<f64> = k.iter().map(|&v| v as f64).collect();
        self.to_cartesian(&c)
    }

    /// Representative of `x` with lattice coordinates in `[0, 1)^n`.
    pub fn reduce(&self, x: &[f64]) -> Vec<f64> {
        let c: Vec<f64> = self.to_lattice(x).into_iter().map(frac).collect();
        self.to_cartesian(&c)
    }

    /// Lattice translate of `x` closest to `anchor`.
    pub fn nearest_translate(&self, x: &[f64], anchor: &[f64]) -> Vec<f64> {
        let diff: Vec<f64> = anchor.iter().zip(x).map(|(a, b)| a - b).collect();
        let c = self.to_lattice(&diff);
        let base: Vec<i64> = c.iter().map(|v| v.round() as i64).collect();
        let mut best = (f64::INFINITY, Vec::new());
        for k in integer_cube(self.dim(), 1) {
            let kk: Vec<i64> = base.iter().zip(&k).map(|(a, b)| a + b).collect();
            let y: Vec<f64> = x.iter().zip(self.offset(&kk)).map(|(a, b)| a + b).collect();
            let d = dist2(&y, anchor);
            if d < best.0 {
                best = (d, y);
            }
        }
        best.1
    }

    /// Every `k` with `|base + B k - center| <= radius` (closed, with a relative slack of 1e-12).
    pub fn offsets_near(&self, base: &[f64], center: &[f64], radius: f64) -> Vec<Vec<i64>> {
        let n = self.dim();
        let rel: Vec<f64> = center.iter().zip(base).map(|(c, v)| c - v).collect();
        let c = self.to_lattice(&rel);
        let mut lo = Vec::with_capacity(n);
        let mut hi = Vec::with_capacity(n);
        for i in 0..n {
            // |delta c_i| <= radius * |column i of the inverse basis|
            let col: f64 = (0..n)
                .map(|j| {
                    let mut unit = vec![0.0; n];
                    unit[j] = 1.0;
                    self.to_lattice(&unit)[i].powi(2)
                })
                .sum::<f64>()
                .sqrt();
            let spread = radius * col;
            lo.push((c[i] - spread).floor() as i64 - 1);
            hi.push((c[i] + spread).ceil() as i64 + 1);
        }
        let r2 = radius * radius * (1.0 + 4e-12) + 1e-12;
        integer_box(lo, hi)
            .filter(|k| {
                let p: Vec<f64> = base.iter().zip(self.offset(k)).map(|(a, b)| a + b).collect();
                dist2(&p, center) <= r2
            })
            .collect()
    }

    /// Length of the shortest representative of the class of `v`.
    pub fn quotient_norm(&self, v: &[f64]) -> f64 {
        let c = self.to_lattice(v);
        let reduced: Vec<f64> = c.iter().map(|x| x - x.round()).collect();
        let mut best = f64::INFINITY;
        for k in integer_cube(self.dim(), 1) {
            let shifted: Vec<f64> = reduced.iter().zip(&k).map(|(a, &b)| a + b as f64).collect();
            best = best.min(norm(&self.to_cartesian(&shifted)));
        }
        best
    }

    /// Covering radius of the lattice, i.e. the largest distance from a Voronoi
    /// vertex to the origin.
    pub fn covering_radius(&self) -> f64 {
        let n = self.dim();
        let radius = if n <= 2 { 2 } else { 1 };
        let relevant: Vec<Vec<f64>> = integer_cube(n, radius)
            .filter(|k| k.iter().any(|&c| c != 0))
            .map(|k| self.offset(&k))
            .collect();
        let mut best: f64 = 0.0;
        for combo in combinations(relevant.len(), n) {
            let m = DMatrix::from_fn(n, n, |i, j| relevant[combo[i]][j]);
            let rhs = DVector::from_fn(n, |i, _| 0.5 * dot(&relevant[combo[i]], &relevant[combo[i]]));
            let Some(sol) = m.lu().solve(&rhs) else {
                continue;
            };
            let x: Vec<f64> = sol.iter().copied().collect();
            if x.iter().any(|v| !v.is_finite()) {
                continue;
            }
            let inside = relevant
                .iter()
                .all(|v| dot(&x, v) <= 0.5 * dot(v, v) + 1e-10 * (1.0 + dot(v, v)));
            if inside {
                best = best.max(norm(&x));
            }
        }
        best
    }
}

/// A geodesic space from the catalog.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SpaceDescriptor", into = "SpaceDescriptor")]
pub enum Space {
    Euclidean(usize),
    FlatTorus(Lattice),
    Pillowcase(Lattice),
}

/// Structured-text form of a [`Space`].
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SpaceDescriptor {
    pub variant: String,
    pub dimension: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lattice: Option<Vec<Vec<f64>>>,
}

impl TryFrom<SpaceDescriptor> for Space {
    type Error = Error;

    fn try_from(d: SpaceDescriptor) -> Result<Self> {
        let lattice = || -> Result<Lattice> {
            let rows = d
                .lattice
                .clone()
                .unwrap_or_else(|| Lattice::unit(d.dimension).basis().to_vec());
            let lattice = Lattice::new(rows)?;
            if lattice.dim() != d.dimension {
                return Err(usage("lattice rows do not match the dimension"));
            }
            Ok(lattice)
        };
        match d.variant.as_str() {
            "euclidean" => Space::euclidean(d.dimension),
            "flat_torus" => Ok(Space::FlatTorus(lattice()?)),
            "pillowcase" => Space::pillowcase(lattice()?),
            other => Err(usage(format!("unknown space variant `{other}`"))),
        }
    }
}

impl From<Space> for SpaceDescriptor {
    fn from(s: Space) -> Self {
        let dimension = s.dimension();
        let (variant, lattice) = match s {
            Space::Euclidean(_) => ("euclidean", None),
            Space::FlatTorus(l) => ("flat_torus", Some(l.basis)),
            Space::Pillowcase(l) => ("pillowcase", Some(l.basis)),
        };
        SpaceDescriptor {
            variant: variant.to_string(),
            dimension,
            lattice,
        }
    }
}

impl fmt::Display for Space {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Space::Euclidean(n) => write!(f, "R^{n}"),
            Space::FlatTorus(l) => write!(f, "T^{}{:?}", l.dim(), l.basis),
            Space::Pillowcase(l) => write!(f, "P{:?}", l.basis),
        }
    }
}

/// A point of a catalog space, stored as its canonical representative.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpacePoint {
    space: u64,
    coords: Vec<f64>,
}

impl SpacePoint {
    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn into_coords(self) -> Vec<f64> {
        self.coords
    }

    pub fn belongs_to(&self, space: &Space) -> bool {
        self.space == space.fingerprint()
    }
}

impl Space {
    pub fn euclidean(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(usage("dimension must be positive"));
        }
        Ok(Space::Euclidean(n))
    }

    pub fn unit_torus(n: usize) -> Self {
        Space::FlatTorus(Lattice::unit(n))
    }

    pub fn pillowcase(lattice: Lattice) -> Result<Self> {
        if lattice.dim() != 2 {
            return Err(usage("the pillowcase is two-dimensional"));
        }
        Ok(Space::Pillowcase(lattice))
    }

    pub fn unit_pillowcase() -> Self {
        Space::Pillowcase(Lattice::unit(2))
    }

    pub fn dimension(&self) -> usize {
        match self {
            Space::Euclidean(n) => *n,
            Space::FlatTorus(l) | Space::Pillowcase(l) => l.dim(),
        }
    }

    pub fn lattice(&self) -> Option<&Lattice> {
        match self {
            Space::Euclidean(_) => None,
            Space::FlatTorus(l) | Space::Pillowcase(l) => Some(l),
        }
    }

    pub fn is_compact(&self) -> bool {
        !matches!(self, Space::Euclidean(_))
    }

    /// Hash of the descriptor, used to tag points with the space they belong to.
    pub fn fingerprint(&self) -> u64 {
        let mut h = DefaultHasher::new();
        match self {
            Space::Euclidean(n) => (0u8, *n).hash(&mut h),
            Space::FlatTorus(l) | Space::Pillowcase(l) => {
                let tag = if matches!(self, Space::FlatTorus(_)) { 1u8 } else { 2u8 };
                tag.hash(&mut h);
                for row in &l.basis {
                    for v in row {
                        v.to_bits().hash(&mut h);
                    }
                }
            }
        }
        h.finish()
    }

    /// Largest radius below which small cells and balls lift uniquely; infinite
    /// for Euclidean space.
    pub fn injectivity_scale(&self) -> f64 {
        self.lattice().map_or(f64::INFINITY, Lattice::shortest_vector)
    }

    /// Canonical representative coordinates of raw coordinates.
    pub fn canonical_coords(&self, raw: &[f64]) -> Vec<f64> {
        match self {
            Space::Euclidean(_) => raw.to_vec(),
            Space::FlatTorus(l) => l.reduce(raw),
            Space::Pillowcase(l) => {
                let a = l.reduce(raw);
                let neg: Vec<f64> = raw.iter().map(|v| -v).collect();
                let b = l.reduce(&neg);
                let la = l.to_lattice(&a);
                let lb = l.to_lattice(&b);
                if lex_less(&lb, &la) {
                    b
                } else {
                    a
                }
            }
        }
    }

    pub fn canonicalize(&self, raw: &[f64]) -> Result<SpacePoint> {
        if raw.len() != self.dimension() {
            return Err(usage(format!(
                "expected {} coordinates, got {}",
                self.dimension(),
                raw.len()
            )));
        }
        Ok(SpacePoint {
            space: self.fingerprint(),
            coords: self.canonical_coords(raw),
        })
    }

    /// Distance between raw coordinate vectors (any representatives).
    pub fn dist(&self, a: &[f64], b: &[f64]) -> f64 {
        match self {
            Space::Euclidean(_) => dist2(a, b).sqrt(),
            Space::FlatTorus(l) => {
                let d: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
                l.quotient_norm(&d)
            }
            Space::Pillowcase(l) => {
                let d: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
                let s: Vec<f64> = a.iter().zip(b).map(|(x, y)| x + y).collect();
                l.quotient_norm(&d).min(l.quotient_norm(&s))
            }
        }
    }

    pub fn distance(&self, p: &SpacePoint, q: &SpacePoint) -> Result<f64> {
        self.check(p)?;
        self.check(q)?;
        Ok(self.dist(&p.coords, &q.coords))
    }

    fn check(&self, p: &SpacePoint) -> Result<()> {
        if p.belongs_to(self) {
            Ok(())
        } else {
            Err(Error::SpaceMismatch {
                expected: self.to_string(),
                got: format!("point {:?}", p.coords),
            })
        }
    }

    /// Diameter of a compact catalog space.
    pub fn diameter(&self) -> Result<f64> {
        match self {
            Space::Euclidean(_) => Err(Error::Unbounded("Euclidean space has no finite diameter".into())),
            Space::FlatTorus(l) => Ok(l.covering_radius()),
            Space::Pillowcase(_) => self.pillowcase_diameter(PILLOWCASE_DIAMETER_RESOLUTION),
        }
    }

    /// Grid estimate of the pillowcase diameter at lattice-coordinate spacing `h`.
    ///
    /// Writing `d_P(x, y) = min(|x - y|_T, |x + y|_T)` and substituting
    /// `u = x - y`, `v = x + y` shows the diameter is the eccentricity of the
    /// cone point at the origin, so only single points are sampled.
    pub fn pillowcase_diameter(&self, h: f64) -> Result<f64> {
        let Space::Pillowcase(l) = self else {
            return Err(usage("pillowcase_diameter called on a non-pillowcase space"));
        };
        if !(h > 0.0 && h <= 0.5) {
            return Err(usage("grid resolution must lie in (0, 1/2]"));
        }
        let steps = (1.0 / h).round() as usize;
        let origin = [0.0, 0.0];
        let mut best: f64 = 0.0;
        for i in 0..steps {
            for j in 0..=steps / 2 {
                let x = l.to_cartesian(&[i as f64 * h, j as f64 * h]);
                best = best.max(self.dist(&origin, &x));
            }
        }
        Ok(best)
    }

    /// Hausdorff n-measure of a compact catalog space.
    pub fn volume(&self) -> Result<f64> {
        match self {
            Space::Euclidean(_) => Err(Error::Unbounded("Euclidean space has infinite volume".into())),
            Space::FlatTorus(l) => Ok(l.covolume()),
            Space::Pillowcase(l) => Ok(0.5 * l.covolume()),
        }
    }

    pub fn path_length(&self, polyline: &[SpacePoint]) -> Result<f64> {
        if polyline.len() < 2 {
            return Err(usage("a polyline needs at least two points"));
        }
        let limit = 0.5 * self.injectivity_scale();
        let mut total = 0.0;
        for w in polyline.windows(2) {
            let d = self.distance(&w[0], &w[1])?;
            if d >= limit {
                return Err(usage(format!(
                    "consecutive points {d} apart; segments must be shorter than {limit}"
                )));
            }
            total += d;
        }
        Ok(total)
    }

    /// Cone points of the pillowcase (images of the half-lattice points).
    pub fn cone_points(&self) -> Vec<Vec<f64>> {
        match self {
            Space::Pillowcase(l) => [[0.0, 0.0], [0.5, 0.0], [0.0, 0.5], [0.5, 0.5]]
                .iter()
                .map(|c| self.canonical_coords(&l.to_cartesian(c)))
                .collect(),
            _ => Vec::new(),
        }
    }
}

pub(crate) fn frac(x: f64) -> f64 {
    let f = x - x.floor();
    if f >= 1.0 {
        0.0
    } else {
        f
    }
}

fn lex_less(a: &[f64], b: &[f64]) -> bool {
    for (x, y) in a.iter().zip(b) {
        if x < y {
            return true;
        }
        if x > y {
            return false;
        }
    }
    false
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub(crate) fn dist2(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// All integer vectors in `[-r, r]^n`.
pub(crate) fn integer_cube(n: usize, r: i64) -> impl Iterator<Item = Vec<i64>> {
    integer_box(vec![-r; n], vec![r; n])
}

/// All integer vectors `k` with `lo <= k <= hi` componentwise, in lexicographic order.
pub(crate) fn integer_box(lo: Vec<i64>, hi: Vec<i64>) -> impl Iterator<Item = Vec<i64>> {
    let empty = lo.iter().zip(&hi).any(|(a, b)| a > b);
    let mut current = if empty { None } else { Some(lo.clone()) };
    std::iter::from_fn(move || {
        let out = current.clone()?;
        let mut next = out.clone();
        let mut i = next.len();
        loop {
            if i == 0 {
                current = None;
                break;
            }
            i -= 1;
            if next[i] < hi[i] {
                next[i] += 1;
                for j in i + 1..next.len() {
                    next[j] = lo[j];
                }
                current = Some(next);
                break;
            }
        }
        Some(out)
    })
}

fn combinations(n: usize, k: usize) -> impl Iterator<Item = Vec<usize>> {
    let mut current: Option<Vec<usize>> = if k <= n { Some((0..k).collect()) } else { None };
    std::iter::from_fn(move || {
        let out = current.clone()?;
        let mut next = out.clone();
        let mut i = k;
        loop {
            if i == 0 {
                current = None;
                break;
            }
            i -= 1;
            if next[i] < n - k + i {
                next[i] += 1;
                for j in i + 1..k {
                    next[j] = next[j - 1] + 1;
                }
                current = Some(next);
                break;
            }
        }
        Some(out)
    })
}
