//! Unordered Q-tuples, the assignment metric and the branched-fiber map.

use std::cmp::Ordering;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::assignment::hungarian;
use crate::bld_maps::{BldMap, Window};
use crate::error::{Error, Result};
use crate::spaces::{dist2, Space};

/// A multiset of `Q` points in `R^n`, kept in lexicographic order.
#[derive(Clone, Debug, PartialEq)]
pub struct AQPoint {
    points: Vec<Vec<f64>>,
}

/// Serialized form: distinct points with multiplicities.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeightedPoint {
    pub coords: Vec<f64>,
    pub multiplicity: u32,
}

fn lex(a: &[f64], b: &[f64]) -> Ordering {
    a.iter()
        .zip(b)
        .map(|(x, y)| x.total_cmp(y))
        .find(|o| o.is_ne())
        .unwrap_or(Ordering::Equal)
}

impl AQPoint {
    pub fn new(mut points: Vec<Vec<f64>>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::Usage("a Q-tuple needs at least one point".into()));
        }
        let n = points[0].len();
        if points.iter().any(|p| p.len() != n) {
            return Err(Error::Usage("points of a Q-tuple must share a dimension".into()));
        }
        points.sort_by(|a, b| lex(a, b));
        Ok(AQPoint { points })
    }

    pub fn from_weighted(entries: &[WeightedPoint]) -> Result<Self> {
        let points = entries
            .iter()
            .flat_map(|e| std::iter::repeat_n(e.coords.clone(), e.multiplicity as usize))
            .collect();
        Self::new(points)
    }

    pub fn q(&self) -> usize {
        self.points.len()
    }

    pub fn dim(&self) -> usize {
        self.points[0].len()
    }

    pub fn points(&self) -> &[Vec<f64>] {
        &self.points
    }

    pub fn to_weighted(&self) -> Vec<WeightedPoint> {
        let mut out: Vec<WeightedPoint> = Vec::new();
        for p in &self.points {
            match out.last_mut() {
                Some(last) if last.coords == *p => last.multiplicity += 1,
                _ => out.push(WeightedPoint {
                    coords: p.clone(),
                    multiplicity: 1,
                }),
            }
        }
        out
    }
}

impl Serialize for AQPoint {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_weighted().serialize(s)
    }
}

impl<'de> Deserialize<'de> for AQPoint {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let entries = Vec::<WeightedPoint>::deserialize(d)?;
        AQPoint::from_weighted(&entries).map_err(serde::de::Error::custom)
    }
}

fn squared_costs(a: &AQPoint, b: &AQPoint) -> Vec<Vec<f64>> {
    a.points.iter().map(|p| b.points.iter().map(|q| dist2(p, q)).collect()).collect()
}

fn check_compatible(a: &AQPoint, b: &AQPoint) -> Result<()> {
    if a.q() != b.q() {
        return Err(Error::CardinalityMismatch {
            left: a.q(),
            right: b.q(),
        });
    }
    if a.dim() != b.dim() {
        return Err(Error::Usage("Q-tuples live in different dimensions".into()));
    }
    Ok(())
}

/// `d_Q(a, b) = min_sigma (sum |a_i - b_sigma(i)|^2)^(1/2)`.
pub fn d_q(a: &AQPoint, b: &AQPoint) -> Result<f64> {
    check_compatible(a, b)?;
    let costs = squared_costs(a, b);
    let (assignment, _) = hungarian(&costs);
    Ok(canonical_sum((0..a.q()).map(|i| costs[i][assignment[i]])).sqrt())
}

/// Sum in ascending order, so the value does not depend on which side is listed first.
fn canonical_sum(terms: impl Iterator<Item = f64>) -> f64 {
    let mut v: Vec<f64> = terms.collect();
    v.sort_by(f64::total_cmp);
    v.iter().sum::<f64>().max(0.0)
}

/// Same metric by trying every permutation.
pub fn d_q_brute_force(a: &AQPoint, b: &AQPoint) -> Result<f64> {
    check_compatible(a, b)?;
    let cost = squared_costs(a, b);
    let q = a.q();
    let mut perm: Vec<usize> = (0..q).collect();
    let mut best = f64::INFINITY;
    // Heap's algorithm
    let mut c = vec![0usize; q];
    best = best.min(canonical_sum((0..q).map(|i| cost[i][perm[i]])));
    let mut i = 0;
    while i < q {
        if c[i] < i {
            if i % 2 == 0 {
                perm.swap(0, i);
            } else {
                perm.swap(c[i], i);
            }
            best = best.min(canonical_sum((0..q).map(|i| cost[i][perm[i]])));
            c[i] += 1;
            i = 0;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
    Ok(best.sqrt())
}

/// Source points in `U(y, r)` over `p`, each repeated by its local index,
/// in coordinates near `y`.
pub fn g_f(f: &BldMap, y: &[f64], r: f64, p: &[f64]) -> Result<AQPoint> {
    let normal = f.spread_limit(y);
    if !(r > 0.0 && r <= normal) {
        return Err(Error::Precondition(format!("radius {r} exceeds the normal radius {normal}")));
    }
    let target = f.target_space();
    let fy = f.eval_coords(y);
    let d = target.dist(p, &fy);
    if d >= r {
        return Err(Error::Precondition(format!("p is at distance {d} from f(y), outside B_r")));
    }
    let q = f.index_at(y) as usize;
    let reach = f.bld_constant() * d + 1e-9;
    let fiber = f.fiber(p, &Window::ball(y, reach))?;
    let source = f.source_space();
    let mut points = Vec::with_capacity(q);
    for e in fiber {
        let near = match &source {
            Space::Euclidean(_) => e.point.clone(),
            Space::FlatTorus(l) | Space::Pillowcase(l) => l.nearest_translate(&e.point, y),
        };
        if source.dist(&near, y) <= reach {
            points.extend(std::iter::repeat_n(near, e.index as usize));
        }
    }
    if points.len() != q {
        return Err(Error::CardinalityMismatch {
            left: points.len(),
            right: q,
        });
    }
    AQPoint::new(points)
}

/// Outcome of sampling the bilipschitz bounds of `g_f`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BilipReport {
    pub q: usize,
    pub l: f64,
    pub pairs: usize,
    pub min_ratio: f64,
    pub max_ratio: f64,
    pub lower_bound: f64,
    pub upper_bound: f64,
    pub pass: bool,
    /// First pair violating a bound.
    pub witness: Option<(Vec<f64>, Vec<f64>)>,
}

fn sample_in_ball(rng: &mut ChaCha8Rng, center: &[f64], r: f64) -> Vec<f64> {
    loop {
        let v: Vec<f64> = center.iter().map(|_| rng.random_range(-r..r)).collect();
        let len2: f64 = v.iter().map(|x| x * x).sum();
        if len2 < r * r && len2 > 1e-12 * r * r {
            return center.iter().zip(&v).map(|(c, x)| c + x).collect();
        }
    }
}

/// Checks `sqrt(Q) d(p,q) / L <= d_Q(g_f(p), g_f(q)) <= L sqrt(Q) d(p,q)` on random pairs.
pub fn bilip_check(f: &BldMap, y: &[f64], r: f64, pairs: usize, seed: u64) -> Result<BilipReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let fy = f.eval_coords(y);
    let target = f.target_space();
    let l = f.bld_constant();
    let q = f.index_at(y) as usize;
    let sq = (q as f64).sqrt();
    let (lower_bound, upper_bound) = (sq / l, l * sq);
    let mut report = BilipReport {
        q,
        l,
        pairs: 0,
        min_ratio: f64::INFINITY,
        max_ratio: 0.0,
        lower_bound,
        upper_bound,
        pass: true,
        witness: None,
    };
    while report.pairs < pairs {
        let a = sample_in_ball(&mut rng, &fy, r);
        let b = sample_in_ball(&mut rng, &fy, r);
        let d = target.dist(&a, &b);
        if d < 1e-9 {
            continue;
        }
        let dq = d_q(&g_f(f, y, r, &a)?, &g_f(f, y, r, &b)?)?;
        let ratio = dq / d;
        report.pairs += 1;
        report.min_ratio = report.min_ratio.min(ratio);
        report.max_ratio = report.max_ratio.max(ratio);
        let ok = dq >= lower_bound * d - 1e-9 && dq <= upper_bound * d + 1e-9;
        if !ok && report.witness.is_none() {
            report.pass = false;
            report.witness = Some((a, b));
        }
    }
    Ok(report)
}
