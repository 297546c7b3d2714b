//! Explicit maps of bounded length distortion with exact fibers and local indices.
//!
//! Every map in the catalog distorts path length by at most a factor `L` in
//! both directions. Fibers are enumerated in closed form (lattice translates,
//! quotient orbits, roots of the winding map), so completeness of a fiber
//! inside a bounded window is exact rather than numerical.

use std::f64::consts::TAU;
use std::fmt;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::assignment::hungarian;
use crate::error::{usage, Error, Result};
use crate::spaces::{dist2, norm, Lattice, Space, SpacePoint};

/// Points closer than this to the origin are the branch point of a winding map.
pub const WINDING_BRANCH_TOL: f64 = 1e-12;

/// Tolerance radius to the branch locus of the pillowcase quotient.
pub const BRANCH_TOL: f64 = 1e-9;

const WINDOW_SLACK: f64 = 1e-12;

/// An invertible affine self-map `x -> A x + b` of `R^n`.
#[derive(Clone, Debug, PartialEq)]
pub struct AffineMap {
    matrix: Vec<Vec<f64>>,
    offset: Vec<f64>,
    inverse: Vec<Vec<f64>>,
    det: f64,
    bld_constant: f64,
}

impl AffineMap {
    pub fn new(matrix: Vec<Vec<f64>>, offset: Vec<f64>) -> Result<Self> {
        let n = matrix.len();
        if n == 0 || matrix.iter().any(|r| r.len() != n) || offset.len() != n {
            return Err(usage("affine map needs a square matrix and matching offset"));
        }
        let m = DMatrix::from_fn(n, n, |i, j| matrix[i][j]);
        let det = m.determinant();
        if det.abs() < 1e-12 {
            return Err(usage("affine map matrix is singular"));
        }
        let inv = m.clone().try_inverse().ok_or_else(|| usage("affine map matrix is singular"))?;
        let sv = m.singular_values();
        let smax = sv.max();
        let smin = sv.min();
        Ok(AffineMap {
            inverse: (0..n).map(|i| (0..n).map(|j| inv[(i, j)]).collect()).collect(),
            matrix,
            offset,
            det,
            bld_constant: smax.max(1.0 / smin),
        })
    }

    pub fn dim(&self) -> usize {
        self.offset.len()
    }

    pub fn matrix(&self) -> &[Vec<f64>] {
        &self.matrix
    }

    pub fn offset(&self) -> &[f64] {
        &self.offset
    }

    pub fn determinant(&self) -> f64 {
        self.det
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        self.matrix
            .iter()
            .zip(&self.offset)
            .map(|(row, b)| row.iter().zip(x).map(|(a, v)| a * v).sum::<f64>() + b)
            .collect()
    }

    pub fn apply_inverse(&self, y: &[f64]) -> Vec<f64> {
        let shifted: Vec<f64> = y.iter().zip(&self.offset).map(|(a, b)| a - b).collect();
        self.inverse
            .iter()
            .map(|row| row.iter().zip(&shifted).map(|(a, v)| a * v).sum())
            .collect()
    }
}

/// A catalog BLD map.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MapDescriptor", into = "MapDescriptor")]
pub enum BldMap {
    /// Universal covering `R^n -> R^n / L`.
    TorusCover(Lattice),
    /// Quotient `T^2 -> T^2 / {x ~ -x}` onto the pillowcase.
    PillowQuot(Lattice),
    /// Planar winding map `(r, t) -> (r, d t)` in polar coordinates.
    Winding(u32),
    Affine(AffineMap),
    /// Composition, applied left to right.
    Compose(Vec<BldMap>),
}

/// A point of a fiber together with the local index there.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FiberEntry {
    /// Canonical coordinates in the source space.
    pub point: Vec<f64>,
    pub index: u32,
}

/// Region of the source space in which fibers are enumerated.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Window {
    Ball { center: Vec<f64>, radius: f64 },
    Box { lo: Vec<f64>, hi: Vec<f64> },
    Whole,
}

impl Window {
    pub fn ball(center: &[f64], radius: f64) -> Self {
        Window::Ball {
            center: center.to_vec(),
            radius,
        }
    }

    pub fn is_bounded(&self) -> bool {
        !matches!(self, Window::Whole)
    }

    /// Closed-set membership, measured with the metric of `space`.
    pub fn contains(&self, space: &Space, x: &[f64]) -> bool {
        match self {
            Window::Whole => true,
            Window::Ball { center, radius } => {
                space.dist(center, x) <= radius * (1.0 + WINDOW_SLACK) + WINDOW_SLACK
            }
            Window::Box { lo, hi } => x
                .iter()
                .zip(lo.iter().zip(hi))
                .all(|(v, (a, b))| *v >= a - WINDOW_SLACK && *v <= b + WINDOW_SLACK),
        }
    }

    /// Smallest ball containing the window, if bounded.
    pub fn bounding_ball(&self) -> Option<(Vec<f64>, f64)> {
        match self {
            Window::Whole => None,
            Window::Ball { center, radius } => Some((center.clone(), *radius)),
            Window::Box { lo, hi } => {
                let center: Vec<f64> = lo.iter().zip(hi).map(|(a, b)| 0.5 * (a + b)).collect();
                let radius = 0.5 * dist2(lo, hi).sqrt();
                Some((center, radius))
            }
        }
    }

    /// The window enlarged by `margin` in every direction.
    pub fn inflate(&self, margin: f64) -> Window {
        match self {
            Window::Whole => Window::Whole,
            Window::Ball { center, radius } => Window::Ball {
                center: center.clone(),
                radius: radius + margin,
            },
            Window::Box { lo, hi } => Window::Box {
                lo: lo.iter().map(|v| v - margin).collect(),
                hi: hi.iter().map(|v| v + margin).collect(),
            },
        }
    }
}

/// A matched pair of a fiber bijection.
#[derive(Clone, Debug, PartialEq)]
pub struct FiberPair {
    pub from: Vec<f64>,
    pub to: Vec<f64>,
    pub distance: f64,
}

impl BldMap {
    pub fn torus_cover(lattice: Lattice) -> Self {
        BldMap::TorusCover(lattice)
    }

    pub fn pillow_quot(lattice: Lattice) -> Result<Self> {
        if lattice.dim() != 2 {
            return Err(usage("the pillowcase quotient is two-dimensional"));
        }
        Ok(BldMap::PillowQuot(lattice))
    }

    pub fn winding(d: u32) -> Result<Self> {
        if d == 0 {
            return Err(usage("winding degree must be at least 1"));
        }
        Ok(BldMap::Winding(d))
    }

    pub fn affine(matrix: Vec<Vec<f64>>, offset: Vec<f64>) -> Result<Self> {
        Ok(BldMap::Affine(AffineMap::new(matrix, offset)?))
    }

    /// Composition `maps[n-1] o ... o maps[0]`; nested compositions are flattened.
    pub fn compose(maps: Vec<BldMap>) -> Result<Self> {
        let mut flat = Vec::new();
        for m in maps {
            match m {
                BldMap::Compose(inner) => flat.extend(inner),
                other => flat.push(other),
            }
        }
        if flat.is_empty() {
            return Err(usage("empty composition"));
        }
        for w in flat.windows(2) {
            if w[0].target_space() != w[1].source_space() {
                return Err(Error::SpaceMismatch {
                    expected: w[1].source_space().to_string(),
                    got: w[0].target_space().to_string(),
                });
            }
        }
        if flat.len() == 1 {
            return Ok(flat.pop().unwrap());
        }
        Ok(BldMap::Compose(flat))
    }

    pub fn name(&self) -> String {
        match self {
            BldMap::TorusCover(_) => "torus_cover".into(),
            BldMap::PillowQuot(_) => "pillow_quot".into(),
            BldMap::Winding(d) => format!("winding{d}"),
            BldMap::Affine(_) => "affine".into(),
            BldMap::Compose(maps) => {
                let parts: Vec<String> = maps.iter().map(BldMap::name).collect();
                format!("compose({})", parts.join(","))
            }
        }
    }

    pub fn source_space(&self) -> Space {
        match self {
            BldMap::TorusCover(l) => Space::Euclidean(l.dim()),
            BldMap::PillowQuot(l) => Space::FlatTorus(l.clone()),
            BldMap::Winding(_) => Space::Euclidean(2),
            BldMap::Affine(a) => Space::Euclidean(a.dim()),
            BldMap::Compose(maps) => maps[0].source_space(),
        }
    }

    pub fn target_space(&self) -> Space {
        match self {
            BldMap::TorusCover(l) => Space::FlatTorus(l.clone()),
            BldMap::PillowQuot(l) => Space::Pillowcase(l.clone()),
            BldMap::Winding(_) => Space::Euclidean(2),
            BldMap::Affine(a) => Space::Euclidean(a.dim()),
            BldMap::Compose(maps) => maps[maps.len() - 1].target_space(),
        }
    }

    pub fn dimension(&self) -> usize {
        self.source_space().dimension()
    }

    /// The BLD constant `L`.
    pub fn bld_constant(&self) -> f64 {
        match self {
            BldMap::TorusCover(_) | BldMap::PillowQuot(_) => 1.0,
            BldMap::Winding(d) => *d as f64,
            BldMap::Affine(a) => a.bld_constant,
            BldMap::Compose(maps) => maps.iter().map(BldMap::bld_constant).product(),
        }
    }

    pub fn is_proper(&self) -> bool {
        match self {
            BldMap::TorusCover(_) => false,
            BldMap::Compose(maps) => maps.iter().all(BldMap::is_proper),
            _ => true,
        }
    }

    /// Global degree of a proper map.
    pub fn degree(&self) -> Result<i64> {
        match self {
            BldMap::TorusCover(_) => Err(Error::UndefinedDegree(self.name())),
            BldMap::PillowQuot(_) => Ok(2),
            BldMap::Winding(d) => Ok(*d as i64),
            BldMap::Affine(a) => Ok(if a.det > 0.0 { 1 } else { -1 }),
            BldMap::Compose(maps) => {
                let mut deg = 1;
                for m in maps {
                    deg *= m.degree().map_err(|_| Error::UndefinedDegree(self.name()))?;
                }
                Ok(deg)
            }
        }
    }

    /// Image of raw source coordinates, as canonical target coordinates.
    pub fn eval_coords(&self, x: &[f64]) -> Vec<f64> {
        match self {
            BldMap::TorusCover(l) => l.reduce(x),
            BldMap::PillowQuot(l) => Space::Pillowcase(l.clone()).canonical_coords(x),
            BldMap::Winding(d) => winding_eval(*d, x),
            BldMap::Affine(a) => a.apply(x),
            BldMap::Compose(maps) => {
                let mut y = x.to_vec();
                for m in maps {
                    y = m.eval_coords(&y);
                }
                y
            }
        }
    }

    pub fn eval(&self, x: &SpacePoint) -> Result<SpacePoint> {
        let source = self.source_space();
        if !x.belongs_to(&source) {
            return Err(Error::SpaceMismatch {
                expected: source.to_string(),
                got: format!("point {:?}", x.coords()),
            });
        }
        self.target_space().canonicalize(&self.eval_coords(x.coords()))
    }

    /// Local index `i_f(x)` at raw source coordinates.
    pub fn index_at(&self, x: &[f64]) -> u32 {
        match self {
            BldMap::TorusCover(_) | BldMap::Affine(_) => 1,
            BldMap::PillowQuot(l) => {
                if is_half_lattice(l, x) {
                    2
                } else {
                    1
                }
            }
            BldMap::Winding(d) => {
                if norm(x) < WINDING_BRANCH_TOL {
                    *d
                } else {
                    1
                }
            }
            BldMap::Compose(maps) => {
                let mut y = x.to_vec();
                let mut index = 1;
                for m in maps {
                    index *= m.index_at(&y);
                    y = m.eval_coords(&y);
                }
                index
            }
        }
    }

    pub fn local_index(&self, x: &SpacePoint) -> Result<u32> {
        let source = self.source_space();
        if !x.belongs_to(&source) {
            return Err(Error::SpaceMismatch {
                expected: source.to_string(),
                got: format!("point {:?}", x.coords()),
            });
        }
        Ok(self.index_at(x.coords()))
    }

    pub fn is_branch_point(&self, x: &[f64]) -> bool {
        self.index_at(x) > 1
    }

    /// Metric Jacobian where the catalog knows it in closed form (off the branch set).
    pub fn jacobian_closed_form(&self, x: &[f64]) -> Option<f64> {
        match self {
            BldMap::TorusCover(_) | BldMap::PillowQuot(_) => Some(1.0),
            BldMap::Winding(d) => (norm(x) >= WINDING_BRANCH_TOL).then_some(*d as f64),
            BldMap::Affine(a) => Some(a.det.abs()),
            BldMap::Compose(maps) => {
                let mut y = x.to_vec();
                let mut j = 1.0;
                for m in maps {
                    j *= m.jacobian_closed_form(&y)?;
                    y = m.eval_coords(&y);
                }
                Some(j)
            }
        }
    }

    /// Every `x` in `window` with `f(x) = y`, each with its local index.
    pub fn fiber(&self, y: &[f64], window: &Window) -> Result<Vec<FiberEntry>> {
        let source = self.source_space();
        let target = self.target_space();
        if y.len() != target.dimension() {
            return Err(usage("target point has the wrong dimension"));
        }
        let y = target.canonical_coords(y);
        let entries = match self {
            BldMap::TorusCover(l) => {
                let (center, radius) = window.bounding_ball().ok_or_else(|| {
                    Error::Unbounded("fiber of a non-proper map needs a bounded window".into())
                })?;
                lattice_points_near(l, &y, &center, radius)
                    .into_iter()
                    .map(|point| FiberEntry { point, index: 1 })
                    .collect()
            }
            BldMap::PillowQuot(l) => {
                let a = l.reduce(&y);
                let neg: Vec<f64> = y.iter().map(|v| -v).collect();
                let b = l.reduce(&neg);
                if source.dist(&a, &b) < 2.0 * BRANCH_TOL {
                    vec![FiberEntry { point: a, index: 2 }]
                } else {
                    vec![FiberEntry { point: a, index: 1 }, FiberEntry { point: b, index: 1 }]
                }
            }
            BldMap::Winding(d) => winding_roots(*d, &y),
            BldMap::Affine(a) => vec![FiberEntry {
                point: a.apply_inverse(&y),
                index: 1,
            }],
            BldMap::Compose(maps) => return compose_fiber(maps, &y, window),
        };
        Ok(entries
            .into_iter()
            .filter(|e| window.contains(&source, &e.point))
            .collect())
    }

    /// Points of `f^{-1}(target)` in the normal neighborhood `U(x, r)` over a
    /// ball `B(f(x), r)` that contains `target`, for `r` below [`Self::spread_limit`].
    pub fn local_fiber(&self, x: &[f64], target: &[f64]) -> Vec<FiberEntry> {
        match self {
            BldMap::TorusCover(l) => {
                let t = l.reduce(target);
                vec![FiberEntry {
                    point: l.nearest_translate(&t, x),
                    index: 1,
                }]
            }
            BldMap::PillowQuot(l) => {
                let all = self.fiber(target, &Window::Whole).unwrap_or_default();
                if is_half_lattice(l, x) {
                    all
                } else {
                    let torus = Space::FlatTorus(l.clone());
                    let nearest = all
                        .into_iter()
                        .min_by(|a, b| torus.dist(&a.point, x).total_cmp(&torus.dist(&b.point, x)));
                    nearest.into_iter().collect()
                }
            }
            BldMap::Winding(d) => {
                let all = winding_roots(*d, target);
                if norm(x) < WINDING_BRANCH_TOL {
                    all
                } else {
                    let theta = x[1].atan2(x[0]);
                    let nearest = all.into_iter().min_by(|a, b| {
                        angle_gap(a.point[1].atan2(a.point[0]), theta)
                            .total_cmp(&angle_gap(b.point[1].atan2(b.point[0]), theta))
                    });
                    nearest.into_iter().collect()
                }
            }
            BldMap::Affine(a) => vec![FiberEntry {
                point: a.apply_inverse(target),
                index: 1,
            }],
            BldMap::Compose(maps) => compose_local_fiber(maps, x, target),
        }
    }

    /// Radius `r` below which `U(x, r)` is a normal neighborhood on which
    /// [`Self::local_fiber`] is exact.
    pub fn spread_limit(&self, x: &[f64]) -> f64 {
        match self {
            BldMap::TorusCover(l) => 0.25 * l.shortest_vector(),
            BldMap::PillowQuot(l) => {
                let quarter = 0.25 * l.shortest_vector();
                if is_half_lattice(l, x) {
                    quarter
                } else {
                    let p = Space::Pillowcase(l.clone());
                    let y = p.canonical_coords(x);
                    let to_cone = p
                        .cone_points()
                        .iter()
                        .map(|c| p.dist(c, &y))
                        .fold(f64::INFINITY, f64::min);
                    quarter.min(to_cone)
                }
            }
            BldMap::Winding(_) => {
                let r = norm(x);
                if r < WINDING_BRANCH_TOL {
                    f64::INFINITY
                } else {
                    0.5 * r
                }
            }
            BldMap::Affine(_) => f64::INFINITY,
            BldMap::Compose(maps) => {
                let (last, prefix) = maps.split_last().unwrap();
                let prefix = prefix_map(prefix);
                let mid = prefix.eval_coords(x);
                last.spread_limit(&mid)
                    .min(prefix.spread_limit(x) / last.bld_constant())
            }
        }
    }

    /// Distance from `y` to the image of the branch set, where known in closed form.
    pub fn branch_image_distance(&self, y: &[f64]) -> f64 {
        match self {
            BldMap::TorusCover(_) | BldMap::Affine(_) => f64::INFINITY,
            BldMap::PillowQuot(l) => {
                let p = Space::Pillowcase(l.clone());
                p.cone_points()
                    .iter()
                    .map(|c| p.dist(c, y))
                    .fold(f64::INFINITY, f64::min)
            }
            BldMap::Winding(d) => {
                if *d == 1 {
                    f64::INFINITY
                } else {
                    norm(y)
                }
            }
            BldMap::Compose(maps) => {
                // branch image of g o f is g(B_f) union B_g; bound it through the last stage
                let (last, prefix) = maps.split_last().unwrap();
                let prefix = prefix_map(prefix);
                let mut best = last.branch_image_distance(y);
                if let Ok(mids) = last.fiber(y, &Window::Whole) {
                    for m in mids {
                        best = best.min(prefix.branch_image_distance(&m.point) / last.bld_constant());
                    }
                }
                best
            }
        }
    }

    /// True if `y` is at least [`BRANCH_TOL`] away from the branch image and no
    /// fiber entry inside `window` has index above one.
    pub fn is_regular_value(&self, y: &[f64], window: &Window) -> Result<bool> {
        if self.branch_image_distance(y) < BRANCH_TOL {
            return Ok(false);
        }
        Ok(self.fiber(y, window)?.iter().all(|e| e.index == 1))
    }

    /// Index-weighted push-forward `f_# g (y) = sum_{x in f^{-1}(y)} i_f(x) g(x)`
    /// of a function supported in `support`.
    pub fn push_function(&self, g: impl Fn(&[f64]) -> f64, support: &Window, y: &[f64]) -> Result<f64> {
        if !support.is_bounded() && !self.is_proper() && !self.source_space().is_compact() {
            return Err(Error::Unbounded("push-forward needs a bounded support window".into()));
        }
        Ok(self
            .fiber(y, support)?
            .iter()
            .map(|e| e.index as f64 * g(&e.point))
            .sum())
    }

    /// Pairs the fibers over two regular values by minimum-cost assignment and
    /// verifies `d(p, q) / L <= d(x, psi(x)) <= L d(p, q)` for every pair.
    pub fn fiber_bijection(&self, p: &[f64], q: &[f64], window: &Window) -> Result<Vec<FiberPair>> {
        let source = self.source_space();
        let target = self.target_space();
        let fp = self.fiber(p, window)?;
        let fq = self.fiber(q, window)?;
        if fp.iter().chain(&fq).any(|e| e.index != 1) {
            return Err(Error::Precondition("fiber bijection needs regular values".into()));
        }
        if fp.len() != fq.len() {
            return Err(Error::CardinalityMismatch {
                left: fp.len(),
                right: fq.len(),
            });
        }
        let cost: Vec<Vec<f64>> = fp
            .iter()
            .map(|a| fq.iter().map(|b| source.dist(&a.point, &b.point)).collect())
            .collect();
        let (perm, _) = hungarian(&cost);
        let d = target.dist(p, q);
        let l = self.bld_constant();
        let (lower, upper) = (d / l, l * d);
        let tol = 1e-9 * (1.0 + d);
        let mut pairs = Vec::with_capacity(fp.len());
        for (i, &j) in perm.iter().enumerate() {
            let pair = cost[i][j];
            if pair < lower - tol || pair > upper + tol {
                return Err(Error::BoundViolation { pair, lower, upper });
            }
            pairs.push(FiberPair {
                from: fp[i].point.clone(),
                to: fq[j].point.clone(),
                distance: pair,
            });
        }
        Ok(pairs)
    }
}

impl fmt::Display for BldMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

fn prefix_map(prefix: &[BldMap]) -> BldMap {
    if prefix.len() == 1 {
        prefix[0].clone()
    } else {
        BldMap::Compose(prefix.to_vec())
    }
}

fn compose_fiber(maps: &[BldMap], y: &[f64], window: &Window) -> Result<Vec<FiberEntry>> {
    let (last, prefix) = maps.split_last().unwrap();
    let prefix = prefix_map(prefix);
    let mid_window = match window.bounding_ball() {
        Some((center, radius)) => Window::Ball {
            center: prefix.eval_coords(&center),
            radius: prefix.bld_constant() * radius,
        },
        None => Window::Whole,
    };
    let mut out = Vec::new();
    for mid in last.fiber(y, &mid_window)? {
        for e in prefix.fiber(&mid.point, window)? {
            out.push(FiberEntry {
                point: e.point,
                index: e.index * mid.index,
            });
        }
    }
    Ok(out)
}

fn compose_local_fiber(maps: &[BldMap], x: &[f64], target: &[f64]) -> Vec<FiberEntry> {
    let (last, prefix) = maps.split_last().unwrap();
    let prefix = prefix_map(prefix);
    let mid = prefix.eval_coords(x);
    let mut out = Vec::new();
    for m in last.local_fiber(&mid, target) {
        for e in prefix.local_fiber(x, &m.point) {
            out.push(FiberEntry {
                point: e.point,
                index: e.index * m.index,
            });
        }
    }
    out
}

fn winding_eval(d: u32, x: &[f64]) -> Vec<f64> {
    let r = norm(x);
    if r == 0.0 {
        return vec![0.0, 0.0];
    }
    let theta = x[1].atan2(x[0]) * d as f64;
    vec![r * theta.cos(), r * theta.sin()]
}

fn winding_roots(d: u32, y: &[f64]) -> Vec<FiberEntry> {
    let r = norm(y);
    if r < WINDING_BRANCH_TOL {
        return vec![FiberEntry {
            point: vec![0.0, 0.0],
            index: d,
        }];
    }
    let phi = y[1].atan2(y[0]);
    (0..d)
        .map(|k| {
            let t = (phi + TAU * k as f64) / d as f64;
            FiberEntry {
                point: vec![r * t.cos(), r * t.sin()],
                index: 1,
            }
        })
        .collect()
}

fn angle_gap(a: f64, b: f64) -> f64 {
    let g = (a - b).rem_euclid(TAU);
    g.min(TAU - g)
}

fn is_half_lattice(l: &Lattice, x: &[f64]) -> bool {
    let doubled: Vec<f64> = x.iter().map(|v| 2.0 * v).collect();
    l.quotient_norm(&doubled) < 2.0 * BRANCH_TOL
}

/// All translates `y + B k` within distance `radius` of `center`.
fn lattice_points_near(l: &Lattice, y: &[f64], center: &[f64], radius: f64) -> Vec<Vec<f64>> {
    l.offsets_near(y, center, radius)
        .into_iter()
        .map(|k| y.iter().zip(l.offset(&k)).map(|(a, b)| a + b).collect())
        .collect()
}

/// Structured-text form of a [`BldMap`].
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "variant", content = "params", rename_all = "snake_case")]
pub enum MapDescriptor {
    TorusCover { lattice: Vec<Vec<f64>> },
    PillowQuot { lattice: Vec<Vec<f64>> },
    Winding { degree: u32 },
    Affine { matrix: Vec<Vec<f64>>, offset: Vec<f64> },
    Compose { maps: Vec<MapDescriptor> },
}

impl TryFrom<MapDescriptor> for BldMap {
    type Error = Error;

    fn try_from(d: MapDescriptor) -> Result<Self> {
        match d {
            MapDescriptor::TorusCover { lattice } => Ok(BldMap::TorusCover(Lattice::new(lattice)?)),
            MapDescriptor::PillowQuot { lattice } => BldMap::pillow_quot(Lattice::new(lattice)?),
            MapDescriptor::Winding { degree } => BldMap::winding(degree),
            MapDescriptor::Affine { matrix, offset } => BldMap::affine(matrix, offset),
            MapDescriptor::Compose { maps } => BldMap::compose(
                maps.into_iter().map(BldMap::try_from).collect::<Result<Vec<_>>>()?,
            ),
        }
    }
}

impl From<BldMap> for MapDescriptor {
    fn from(m: BldMap) -> Self {
        match m {
            BldMap::TorusCover(l) => MapDescriptor::TorusCover {
                lattice: l.basis().to_vec(),
            },
            BldMap::PillowQuot(l) => MapDescriptor::PillowQuot {
                lattice: l.basis().to_vec(),
            },
            BldMap::Winding(degree) => MapDescriptor::Winding { degree },
            BldMap::Affine(a) => MapDescriptor::Affine {
                matrix: a.matrix,
                offset: a.offset,
            },
            BldMap::Compose(maps) => MapDescriptor::Compose {
                maps: maps.into_iter().map(MapDescriptor::from).collect(),
            },
        }
    }
}
