//! Metric differentials, Jacobians, the co-area formula and equidistribution of fibers.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::bld_maps::{BldMap, Window};
use crate::error::{Error, Result};
use crate::forms::LipFactor;
use crate::spaces::{norm, Space};

/// Finite-difference steps, halved twice for Richardson extrapolation.
pub const STEPS: [f64; 3] = [1e-3, 5e-4, 2.5e-4];

fn quotient(f: &BldMap, target: &Space, x: &[f64], fx: &[f64], v: &[f64], h: f64) -> f64 {
    let moved: Vec<f64> = x.iter().zip(v).map(|(a, b)| a + h * b).collect();
    target.dist(&f.eval_coords(&moved), fx) / h
}

/// `md_x f(v)` for each direction (normalized first), by extrapolated difference quotients.
pub fn metric_differential(f: &BldMap, x: &[f64], directions: &[Vec<f64>]) -> Result<Vec<f64>> {
    if x.len() != f.dimension() {
        return Err(Error::Usage(format!("point has dimension {}, map has {}", x.len(), f.dimension())));
    }
    if f.is_branch_point(x) {
        return Err(Error::Precondition(format!("{x:?} is a branch point")));
    }
    let target = f.target_space();
    let fx = f.eval_coords(x);
    directions
        .iter()
        .map(|v| {
            let len = norm(v);
            if len == 0.0 {
                return Err(Error::Usage("zero direction".into()));
            }
            let u: Vec<f64> = v.iter().map(|c| c / len).collect();
            let q: Vec<f64> = STEPS.iter().map(|&h| quotient(f, &target, x, &fx, &u, h)).collect();
            let r1 = 2.0 * q[1] - q[0];
            let r2 = 2.0 * q[2] - q[1];
            let tol = 10.0 * (1.0 + q[2].abs()) * STEPS[0] * STEPS[0];
            if (r2 - r1).abs() > tol {
                return Err(Error::NonConvergent { direction: u });
            }
            Ok((4.0 * r2 - r1) / 3.0)
        })
        .collect()
}

/// `(avg_{|v|=1} md_x f(v)^{-n})^{-1}` by the trapezoid rule with `order` nodes on the circle.
pub fn metric_jacobian(f: &BldMap, x: &[f64], order: usize) -> Result<f64> {
    let n = f.dimension();
    let directions: Vec<Vec<f64>> = match n {
        1 => vec![vec![1.0], vec![-1.0]],
        2 => (0..order)
            .map(|j| {
                let t = 2.0 * PI * j as f64 / order as f64;
                vec![t.cos(), t.sin()]
            })
            .collect(),
        _ => return Err(Error::Unsupported("metric Jacobian quadrature is implemented for n <= 2".into())),
    };
    let md = metric_differential(f, x, &directions)?;
    let mean = md.iter().map(|m| m.powi(-(n as i32))).sum::<f64>() / md.len() as f64;
    Ok(1.0 / mean)
}

/// Volume of the unit ball in dimension `n`.
pub fn unit_ball_volume(n: usize) -> f64 {
    match n {
        0 => 1.0,
        1 => 2.0,
        _ => unit_ball_volume(n - 2) * 2.0 * PI / n as f64,
    }
}

/// `A_f(R) = (1/|X|) int_{B(R)} Jf` for a map from Euclidean space onto a compact space.
pub fn a_f(f: &BldMap, r: f64) -> Result<f64> {
    let target = f.target_space();
    if !target.is_compact() {
        return Err(Error::Unbounded(format!("{} has a non-compact target", f.name())));
    }
    if !matches!(f.source_space(), Space::Euclidean(_)) {
        return Err(Error::Usage("A_f needs a Euclidean source".into()));
    }
    if r <= 0.0 {
        return Err(Error::Usage("radius must be positive".into()));
    }
    let n = f.dimension();
    // every catalog map has an a.e. constant Jacobian
    let generic: Vec<f64> = (0..n).map(|i| 0.3141 + 0.1717 * i as f64).collect();
    let j = f
        .jacobian_closed_form(&generic)
        .ok_or_else(|| Error::Unsupported("no closed-form Jacobian".into()))?;
    Ok(j * unit_ball_volume(n) * r.powi(n as i32) / target.volume()?)
}

/// One equidistribution comparison.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EquidistReport {
    pub map: String,
    pub p: Vec<f64>,
    pub radius: f64,
    pub count: u64,
    pub a_f: f64,
    pub ratio: f64,
    pub bound: f64,
    pub pass: bool,
}

/// `2^n n L^(2n+1)`.
pub fn proof_constant(n: usize, l: f64) -> f64 {
    2f64.powi(n as i32) * n as f64 * l.powi(2 * n as i32 + 1)
}

/// Compares the index-weighted count of `f^{-1}(p)` in `B(0, R)` with `A_f(R)`.
pub fn equidist_check(f: &BldMap, p: &[f64], r: f64) -> Result<EquidistReport> {
    let n = f.dimension();
    let l = f.bld_constant();
    let d = f.target_space().diameter()?;
    if r < l * d {
        return Err(Error::Precondition(format!("R = {r} is below L D = {}", l * d)));
    }
    let origin = vec![0.0; n];
    let count: u64 = f.fiber(p, &Window::ball(&origin, r))?.iter().map(|e| e.index as u64).sum();
    let af = a_f(f, r)?;
    let ratio = count as f64 / af;
    let bound = proof_constant(n, l) * d / r;
    Ok(EquidistReport {
        map: f.name(),
        p: p.to_vec(),
        radius: r,
        count,
        a_f: af,
        ratio,
        bound,
        pass: (ratio - 1.0).abs() <= bound,
    })
}

/// Both sides of the co-area formula.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoareaReport {
    pub lhs: f64,
    pub rhs: f64,
    pub rel_error: f64,
}

/// Midpoints of a grid of spacing about `h` on the box `[lo, hi]`, with the cell volume.
fn grid(lo: &[f64], hi: &[f64], h: f64) -> (Vec<Vec<f64>>, f64) {
    let counts: Vec<usize> = lo.iter().zip(hi).map(|(a, b)| ((b - a) / h).ceil().max(1.0) as usize).collect();
    let steps: Vec<f64> = lo.iter().zip(hi).zip(&counts).map(|((a, b), m)| (b - a) / *m as f64).collect();
    let total: usize = counts.iter().product();
    let mut points = Vec::with_capacity(total);
    let mut idx = vec![0usize; lo.len()];
    for _ in 0..total {
        points.push(idx.iter().enumerate().map(|(i, &k)| lo[i] + (k as f64 + 0.5) * steps[i]).collect());
        for (i, k) in idx.iter_mut().enumerate() {
            *k += 1;
            if *k < counts[i] {
                break;
            }
            *k = 0;
        }
    }
    (points, steps.iter().product())
}

/// `int_X g Jf` against `int_Y sum_{x in f^{-1}(y)} g(x)`, both by midpoint grids of spacing `h`.
pub fn coarea_check(f: &BldMap, g: &LipFactor, h: f64) -> Result<CoareaReport> {
    let support = g.support().ok_or_else(|| Error::Usage("g needs a bounded support".into()))?;
    let (c, r) = support.bounding_ball().expect("bounded support");
    let n = f.dimension();
    let lo: Vec<f64> = c.iter().map(|v| v - r).collect();
    let hi: Vec<f64> = c.iter().map(|v| v + r).collect();
    let (points, cell) = grid(&lo, &hi, h);
    let mut lhs = 0.0;
    let mut img_lo = vec![f64::INFINITY; n];
    let mut img_hi = vec![f64::NEG_INFINITY; n];
    for x in &points {
        let gx = g.eval(x);
        if gx == 0.0 {
            continue;
        }
        if let Some(j) = f.jacobian_closed_form(x) {
            lhs += gx * j * cell;
        }
        for (i, y) in f.eval_coords(x).iter().enumerate() {
            img_lo[i] = img_lo[i].min(*y);
            img_hi[i] = img_hi[i].max(*y);
        }
    }
    if lhs == 0.0 && img_lo[0].is_infinite() {
        return Ok(CoareaReport {
            lhs: 0.0,
            rhs: 0.0,
            rel_error: 0.0,
        });
    }
    let target = f.target_space();
    let (tpoints, tcell) = match &target {
        Space::Euclidean(_) => {
            let pad = f.bld_constant() * h;
            let lo: Vec<f64> = img_lo.iter().map(|v| v - pad).collect();
            let hi: Vec<f64> = img_hi.iter().map(|v| v + pad).collect();
            grid(&lo, &hi, h)
        }
        Space::FlatTorus(l) | Space::Pillowcase(l) => {
            let mut hi = vec![1.0; n];
            if matches!(target, Space::Pillowcase(_)) {
                hi[n - 1] = 0.5;
            }
            let m = (1.0 / h).round().max(1.0);
            let (pts, cell) = grid(&vec![0.0; n], &hi, 1.0 / m);
            (pts.iter().map(|p| l.to_cartesian(p)).collect(), cell * l.covolume())
        }
    };
    let mut rhs = 0.0;
    for y in &tpoints {
        rhs += f.push_function(|x| g.eval(x), &support, y)? * tcell;
    }
    let rel_error = if lhs == 0.0 { rhs.abs() } else { (lhs - rhs).abs() / lhs.abs() };
    Ok(CoareaReport { lhs, rhs, rel_error })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spaces::Lattice;

    fn unit_cover() -> BldMap {
        BldMap::torus_cover(Lattice::unit(2))
    }

    fn pillow_composition() -> BldMap {
        BldMap::compose(vec![unit_cover(), BldMap::pillow_quot(Lattice::unit(2)).unwrap()]).unwrap()
    }

    #[test]
    fn differential_examples() {
        let md = metric_differential(&unit_cover(), &[0.3, 0.9], &[vec![1.0, 2.0], vec![-1.0, 0.0]]).unwrap();
        assert!(md.iter().all(|m| (m - 1.0).abs() < 1e-6));
        let w = BldMap::winding(3).unwrap();
        let md = metric_differential(&w, &[1.0, 0.0], &[vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        assert!((md[0] - 3.0).abs() < 1e-4, "{}", md[0]);
        assert!((md[1] - 1.0).abs() < 1e-4);
        assert!(matches!(metric_differential(&w, &[0.0, 0.0], &[vec![1.0, 0.0]]), Err(Error::Precondition(_))));
    }

    #[test]
    fn jacobian_examples() {
        assert!((metric_jacobian(&unit_cover(), &[0.2, 0.4], 64).unwrap() - 1.0).abs() < 1e-6);
        let a = BldMap::affine(vec![vec![2.0, 0.0], vec![0.0, 3.0]], vec![0.0, 0.0]).unwrap();
        // oracle: fine midpoint rule of (1/2pi) int dt / (4cos^2 + 9sin^2)
        let m = 200_000;
        let avg: f64 = (0..m)
            .map(|j| {
                let t = 2.0 * PI * (j as f64 + 0.5) / m as f64;
                1.0 / (4.0 * t.cos().powi(2) + 9.0 * t.sin().powi(2))
            })
            .sum::<f64>()
            / m as f64;
        let j = metric_jacobian(&a, &[0.1, 0.1], 256).unwrap();
        assert!((j - 1.0 / avg).abs() < 1e-4);
        assert!((j - 6.0).abs() < 1e-4);
        let w = BldMap::winding(3).unwrap();
        assert!((metric_jacobian(&w, &[0.0, 1.0], 256).unwrap() - 3.0).abs() < 1e-3);
    }

    #[test]
    fn a_f_examples() {
        assert!((a_f(&unit_cover(), 10.0).unwrap() - 100.0 * PI).abs() < 1e-9);
        assert!((a_f(&pillow_composition(), 10.0).unwrap() - 200.0 * PI).abs() < 1e-9);
        let mut last = 0.0;
        for k in 1..50 {
            let v = a_f(&unit_cover(), 0.02 * k as f64).unwrap();
            assert!(v > last);
            last = v;
        }
        assert!(a_f(&unit_cover(), 1e-9).unwrap() < 1e-15);
        assert!(matches!(a_f(&BldMap::winding(2).unwrap(), 1.0), Err(Error::Unbounded(_))));
    }

    #[test]
    fn gauss_counts() {
        let f = unit_cover();
        let r = equidist_check(&f, &[0.0, 0.0], 10.0).unwrap();
        assert_eq!(r.count, 317);
        assert!((r.ratio - 1.0090).abs() < 1e-4);
        assert!((r.bound - 8.0 * 0.5f64.sqrt() / 10.0).abs() < 1e-12);
        assert!(r.pass);
        let r = equidist_check(&f, &[0.0, 0.0], 5.0).unwrap();
        assert_eq!(r.count, 81);
        assert!((r.ratio - 1.0313).abs() < 1e-4);
        assert!(r.pass);
        assert!(matches!(equidist_check(&f, &[0.0, 0.0], 0.5), Err(Error::Precondition(_))));
    }

    #[test]
    fn pillow_composition_counts() {
        let f = pillow_composition();
        let r = equidist_check(&f, &[0.31, 0.12], 20.0).unwrap();
        assert!(r.pass, "{r:?}");
        // independent count of x = +-p + k in the closed disk
        let mut count = 0;
        for a in -21i32..=21 {
            for b in -21i32..=21 {
                for s in [1.0, -1.0] {
                    let x = [s * 0.31 + a as f64, s * 0.12 + b as f64];
                    if x[0].hypot(x[1]) <= 20.0 {
                        count += 1;
                    }
                }
            }
        }
        assert_eq!(r.count, count);
        // a cone point counts each preimage with index 2
        let r = equidist_check(&f, &[0.5, 0.0], 20.0).unwrap();
        assert_eq!(r.count % 2, 0);
        assert!(r.pass);
    }

    #[test]
    fn coarea_examples() {
        let w = BldMap::winding(3).unwrap();
        let e = Space::Euclidean(2);
        let g = LipFactor::ring_bump(&e, &[0.0, 0.0], 1.0, 0.5);
        let c = coarea_check(&w, &g, 1.0 / 64.0).unwrap();
        // int g = 2 pi int_{0.5}^{1.5} cos^2(pi (r - 1)) r dr = pi
        assert!((c.lhs - 3.0 * PI).abs() < 1e-3);
        assert!(c.rel_error < 0.01);

        let f = unit_cover();
        let g = LipFactor::tent(&e, &[0.4, 0.6], 0.2);
        let c = coarea_check(&f, &g, 1.0 / 128.0).unwrap();
        assert!(c.rel_error < 0.005, "{c:?}");

        let zero = LipFactor::product(vec![LipFactor::constant(0.0), LipFactor::tent(&e, &[0.0, 0.0], 1.0)]);
        let c = coarea_check(&f, &zero, 0.1).unwrap();
        assert_eq!((c.lhs, c.rhs, c.rel_error), (0.0, 0.0, 0.0));
    }
}
