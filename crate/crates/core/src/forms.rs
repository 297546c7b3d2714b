//! Tensor representatives `sum pi_0 (x) ... (x) pi_k` of polylipschitz forms.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::bld_maps::{BldMap, Window};
use crate::currents::{Coefficient, SimplicialCurrent};
use crate::error::{Error, Result};
use crate::spaces::{dot, norm, Space, SpacePoint};

/// A bounded-or-affine Lipschitz function from the factor catalog.
///
/// Factors act on raw coordinates; on quotient spaces the metric-based
/// variants are periodic and the affine ones are meant for lifted cells.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LipFactor {
    Constant { value: f64 },
    /// `<gradient, x> + offset`
    Affine { gradient: Vec<f64>, offset: f64 },
    /// `max(0, 1 - d(x, center) / radius)`
    Tent { space: Space, center: Vec<f64>, radius: f64 },
    DistanceTo { space: Space, point: Vec<f64> },
    /// `cos^2(pi (d(x, center) - radius) / (2 width))` on the annulus `|d - radius| < width`
    RingBump { space: Space, center: Vec<f64>, radius: f64, width: f64 },
    /// `clamp(x[axis], lo, hi)`
    ClippedCoordinate { axis: usize, lo: f64, hi: f64 },
    Product { factors: Vec<LipFactor> },
    Sum { factors: Vec<LipFactor> },
    /// `inner o map`
    Composed { map: BldMap, inner: Box<LipFactor> },
}

fn mul_bound(a: f64, b: f64) -> f64 {
    if a == 0.0 || b == 0.0 {
        0.0
    } else {
        a * b
    }
}

impl LipFactor {
    pub fn constant(value: f64) -> Self {
        LipFactor::Constant { value }
    }

    pub fn one() -> Self {
        Self::constant(1.0)
    }

    pub fn affine(gradient: Vec<f64>, offset: f64) -> Self {
        LipFactor::Affine { gradient, offset }
    }

    /// The coordinate function `x -> x[axis]` in dimension `n`.
    pub fn coordinate(n: usize, axis: usize) -> Self {
        let mut g = vec![0.0; n];
        g[axis] = 1.0;
        Self::affine(g, 0.0)
    }

    pub fn tent(space: &Space, center: &[f64], radius: f64) -> Self {
        LipFactor::Tent {
            space: space.clone(),
            center: center.to_vec(),
            radius,
        }
    }

    pub fn ring_bump(space: &Space, center: &[f64], radius: f64, width: f64) -> Self {
        LipFactor::RingBump {
            space: space.clone(),
            center: center.to_vec(),
            radius,
            width,
        }
    }

    pub fn distance_to(space: &Space, point: &[f64]) -> Self {
        LipFactor::DistanceTo {
            space: space.clone(),
            point: point.to_vec(),
        }
    }

    pub fn product(factors: Vec<LipFactor>) -> Self {
        LipFactor::Product { factors }
    }

    pub fn sum(factors: Vec<LipFactor>) -> Self {
        LipFactor::Sum { factors }
    }

    pub fn composed(map: &BldMap, inner: LipFactor) -> Self {
        LipFactor::Composed {
            map: map.clone(),
            inner: Box::new(inner),
        }
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        match self {
            LipFactor::Constant { value } => *value,
            LipFactor::Affine { gradient, offset } => dot(gradient, x) + offset,
            LipFactor::Tent { space, center, radius } => (1.0 - space.dist(center, x) / radius).max(0.0),
            LipFactor::DistanceTo { space, point } => space.dist(point, x),
            LipFactor::RingBump { space, center, radius, width } => {
                let s = (space.dist(center, x) - radius) / width;
                if s.abs() < 1.0 {
                    (0.5 * std::f64::consts::PI * s).cos().powi(2)
                } else {
                    0.0
                }
            }
            LipFactor::ClippedCoordinate { axis, lo, hi } => x[*axis].clamp(*lo, *hi),
            LipFactor::Product { factors } => factors.iter().map(|f| f.eval(x)).product(),
            LipFactor::Sum { factors } => factors.iter().map(|f| f.eval(x)).sum(),
            LipFactor::Composed { map, inner } => inner.eval(&map.eval_coords(x)),
        }
    }

    /// Upper bound for the Lipschitz constant.
    pub fn lip_bound(&self) -> f64 {
        match self {
            LipFactor::Constant { .. } => 0.0,
            LipFactor::Affine { gradient, .. } => norm(gradient),
            LipFactor::Tent { radius, .. } => 1.0 / radius,
            LipFactor::RingBump { width, .. } => 0.5 * std::f64::consts::PI / width,
            LipFactor::DistanceTo { .. } | LipFactor::ClippedCoordinate { .. } => 1.0,
            LipFactor::Product { factors } => (0..factors.len())
                .map(|i| {
                    factors
                        .iter()
                        .enumerate()
                        .fold(1.0, |acc, (j, f)| mul_bound(acc, if i == j { f.lip_bound() } else { f.sup_bound() }))
                })
                .sum(),
            LipFactor::Sum { factors } => factors.iter().map(LipFactor::lip_bound).sum(),
            LipFactor::Composed { map, inner } => map.bld_constant() * inner.lip_bound(),
        }
    }

    /// Upper bound for `sup |f|` (infinite when unbounded).
    pub fn sup_bound(&self) -> f64 {
        match self {
            LipFactor::Constant { value } => value.abs(),
            LipFactor::Affine { gradient, offset } => {
                if norm(gradient) == 0.0 {
                    offset.abs()
                } else {
                    f64::INFINITY
                }
            }
            LipFactor::Tent { .. } | LipFactor::RingBump { .. } => 1.0,
            LipFactor::DistanceTo { space, .. } => space.diameter().unwrap_or(f64::INFINITY),
            LipFactor::ClippedCoordinate { lo, hi, .. } => lo.abs().max(hi.abs()),
            LipFactor::Product { factors } => factors.iter().fold(1.0, |acc, f| mul_bound(acc, f.sup_bound())),
            LipFactor::Sum { factors } => factors.iter().map(LipFactor::sup_bound).sum(),
            LipFactor::Composed { inner, .. } => inner.sup_bound(),
        }
    }

    /// True if the factor is affine in raw coordinates.
    pub fn is_affine(&self) -> bool {
        match self {
            LipFactor::Constant { .. } | LipFactor::Affine { .. } => true,
            LipFactor::Sum { factors } => factors.iter().all(LipFactor::is_affine),
            LipFactor::Product { factors } => {
                factors.iter().all(LipFactor::is_affine)
                    && factors.iter().filter(|f| !matches!(f, LipFactor::Constant { .. })).count() <= 1
            }
            LipFactor::Composed { map, inner } => matches!(map, BldMap::Affine(_)) && inner.is_affine(),
            _ => false,
        }
    }

    /// A window outside of which the factor vanishes, if known.
    pub fn support(&self) -> Option<Window> {
        match self {
            LipFactor::Tent { center, radius, .. } => Some(Window::ball(center, *radius)),
            LipFactor::RingBump { center, radius, width, .. } => Some(Window::ball(center, radius + width)),
            LipFactor::Product { factors } => factors
                .iter()
                .filter_map(LipFactor::support)
                .min_by(|a, b| {
                    let ra = a.bounding_ball().map_or(f64::INFINITY, |b| b.1);
                    let rb = b.bounding_ball().map_or(f64::INFINITY, |b| b.1);
                    ra.total_cmp(&rb)
                }),
            _ => None,
        }
    }
}

/// One tensor term `coeff * f_0 (x) ... (x) f_k`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Term {
    pub coeff: f64,
    pub factors: Vec<LipFactor>,
}

/// A degree-`k` form: finite sum of `(k+1)`-fold tensor terms on one space.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TensorForm {
    pub degree: usize,
    pub space: Space,
    pub terms: Vec<Term>,
}

impl TensorForm {
    pub fn zero(space: &Space, degree: usize) -> Self {
        TensorForm {
            degree,
            space: space.clone(),
            terms: Vec::new(),
        }
    }

    /// The single term `f_0 (x) ... (x) f_k`.
    pub fn simple(space: &Space, factors: Vec<LipFactor>) -> Result<Self> {
        if factors.is_empty() {
            return Err(Error::Usage("a tensor term needs at least one factor".into()));
        }
        Ok(TensorForm {
            degree: factors.len() - 1,
            space: space.clone(),
            terms: vec![Term { coeff: 1.0, factors }],
        })
    }

    pub fn constant(space: &Space, c: f64) -> Self {
        TensorForm {
            degree: 0,
            space: space.clone(),
            terms: vec![Term {
                coeff: 1.0,
                factors: vec![LipFactor::constant(c)],
            }],
        }
    }

    pub fn add_term(&mut self, coeff: f64, factors: Vec<LipFactor>) -> Result<()> {
        if factors.len() != self.degree + 1 {
            return Err(Error::Arity {
                expected: self.degree + 1,
                got: factors.len(),
            });
        }
        self.terms.push(Term { coeff, factors });
        Ok(())
    }

    fn check_same(&self, other: &TensorForm) -> Result<()> {
        if self.space != other.space {
            return Err(Error::SpaceMismatch {
                expected: self.space.to_string(),
                got: other.space.to_string(),
            });
        }
        Ok(())
    }

    pub fn plus(&self, other: &TensorForm) -> Result<Self> {
        self.check_same(other)?;
        if self.degree != other.degree {
            return Err(Error::Usage(format!("degree mismatch: {} vs {}", self.degree, other.degree)));
        }
        let mut out = self.clone();
        out.terms.extend(other.terms.iter().cloned());
        Ok(out)
    }

    pub fn scaled(&self, s: f64) -> Self {
        let mut out = self.clone();
        out.terms.iter_mut().for_each(|t| t.coeff *= s);
        out
    }

    /// `sum_terms coeff prod_j f_j(x_j)`.
    pub fn eval(&self, tuple: &[Vec<f64>]) -> Result<f64> {
        if tuple.len() != self.degree + 1 {
            return Err(Error::Arity {
                expected: self.degree + 1,
                got: tuple.len(),
            });
        }
        Ok(self
            .terms
            .iter()
            .map(|t| t.coeff * t.factors.iter().zip(tuple).map(|(f, x)| f.eval(x)).product::<f64>())
            .sum())
    }

    pub fn eval_points(&self, tuple: &[SpacePoint]) -> Result<f64> {
        if let Some(p) = tuple.iter().find(|p| !p.belongs_to(&self.space)) {
            return Err(Error::SpaceMismatch {
                expected: self.space.to_string(),
                got: format!("point {:?}", p.coords()),
            });
        }
        let raw: Vec<Vec<f64>> = tuple.iter().map(|p| p.coords().to_vec()).collect();
        self.eval(&raw)
    }

    /// Alexander-Spanier coboundary: `sum_j (-1)^j w(x_0, .., x_j omitted, .., x_{k+1})`,
    /// realized by inserting the constant factor 1 at position `j`.
    pub fn exterior_derivative(&self) -> Self {
        let mut out = TensorForm::zero(&self.space, self.degree + 1);
        for t in &self.terms {
            for j in 0..=self.degree + 1 {
                let mut factors = t.factors.clone();
                factors.insert(j, LipFactor::one());
                let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
                out.terms.push(Term {
                    coeff: sign * t.coeff,
                    factors,
                });
            }
        }
        out
    }

    /// `(a cup b)(x_0..x_{k+m}) = a(x_0..x_k) b(x_0, x_{k+1}..x_{k+m})`.
    pub fn cup(&self, other: &TensorForm) -> Result<Self> {
        self.check_same(other)?;
        let mut out = TensorForm::zero(&self.space, self.degree + other.degree);
        for a in &self.terms {
            for b in &other.terms {
                let mut factors = Vec::with_capacity(self.degree + other.degree + 1);
                factors.push(LipFactor::product(vec![a.factors[0].clone(), b.factors[0].clone()]));
                factors.extend(a.factors[1..].iter().cloned());
                factors.extend(b.factors[1..].iter().cloned());
                out.terms.push(Term {
                    coeff: a.coeff * b.coeff,
                    factors,
                });
            }
        }
        Ok(out)
    }

    /// `f^# w`: every factor precomposed with `f`.
    pub fn pull_back(&self, f: &BldMap) -> Result<Self> {
        let target = f.target_space();
        if self.space != target {
            return Err(Error::SpaceMismatch {
                expected: target.to_string(),
                got: self.space.to_string(),
            });
        }
        Ok(TensorForm {
            degree: self.degree,
            space: f.source_space(),
            terms: self
                .terms
                .iter()
                .map(|t| Term {
                    coeff: t.coeff,
                    factors: t.factors.iter().map(|g| LipFactor::composed(f, g.clone())).collect(),
                })
                .collect(),
        })
    }

    /// True if all factors after the first are affine.
    pub fn has_affine_tail(&self) -> bool {
        self.terms.iter().all(|t| t.factors[1..].iter().all(LipFactor::is_affine))
    }
}

/// Pointwise push-forward `f_# w (y_0..y_k)` for a tuple inside the spread
/// ball of radius `r = max d(center, y_j)` around `center`:
///
/// `sum_{x in f^{-1}(center)} i_f(x)^{-k} sum_terms coeff prod_j sum_{z in U(x,r), f(z) = y_j} i_f(z) f_j(z)`.
///
/// `support` must contain the support of every first factor.
pub fn push_forward_form_at(
    f: &BldMap,
    form: &TensorForm,
    support: &Window,
    center: &[f64],
    tuple: &[Vec<f64>],
) -> Result<f64> {
    let source = f.source_space();
    if form.space != source {
        return Err(Error::SpaceMismatch {
            expected: source.to_string(),
            got: form.space.to_string(),
        });
    }
    if tuple.len() != form.degree + 1 {
        return Err(Error::Arity {
            expected: form.degree + 1,
            got: tuple.len(),
        });
    }
    let target = f.target_space();
    let r = tuple.iter().map(|y| target.dist(center, y)).fold(0.0, f64::max);
    let l = f.bld_constant();
    let window = support.inflate(l * r + 1e-9);
    let mut total = 0.0;
    for x in f.fiber(center, &window)? {
        let limit = f.spread_limit(&x.point);
        if !(r < limit) {
            return Err(Error::InvalidSpread(format!(
                "radius {r} not below the normal-neighborhood limit {limit} at {:?}",
                x.point
            )));
        }
        let locals: Vec<_> = tuple.iter().map(|y| f.local_fiber(&x.point, y)).collect();
        let weight = (x.index as f64).powi(-(form.degree as i32));
        for t in &form.terms {
            let mut prod = t.coeff;
            for (factor, local) in t.factors.iter().zip(&locals) {
                prod *= local.iter().map(|z| z.index as f64 * factor.eval(&z.point)).sum::<f64>();
                if prod == 0.0 {
                    break;
                }
            }
            total += weight * prod;
        }
    }
    Ok(total)
}

/// `d(f_# w)` at a `(k+2)`-tuple, every face evaluated with the same center.
pub fn push_forward_derivative_at(
    f: &BldMap,
    form: &TensorForm,
    support: &Window,
    center: &[f64],
    tuple: &[Vec<f64>],
) -> Result<f64> {
    if tuple.len() != form.degree + 2 {
        return Err(Error::Arity {
            expected: form.degree + 2,
            got: tuple.len(),
        });
    }
    let mut total = 0.0;
    for j in 0..tuple.len() {
        let face: Vec<Vec<f64>> = tuple
            .iter()
            .enumerate()
            .filter(|(i, _)| *i != j)
            .map(|(_, y)| y.clone())
            .collect();
        let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
        total += sign * push_forward_form_at(f, form, support, center, &face)?;
    }
    Ok(total)
}

impl<C: Coefficient> SimplicialCurrent<C> {
    /// Action of the current on a tensor form of matching degree.
    ///
    /// Per cell: `a * det(V) / k! * f_0(barycenter)` with
    /// `V_ij = f_i(v_j) - f_i(v_0)` on the lifted vertices, which is exact when
    /// `f_1..f_k` are affine on the cell and `f_0` is affine.
    pub fn evaluate(&self, form: &TensorForm) -> Result<f64> {
        self.evaluate_translated(form, None)
    }

    /// Action with every lifted cell shifted by `offset` before the factors are applied.
    pub fn evaluate_translated(&self, form: &TensorForm, offset: Option<&[f64]>) -> Result<f64> {
        let k = self.dim();
        if form.degree != k {
            return Err(Error::Usage(format!("form of degree {} on a {k}-current", form.degree)));
        }
        if form.space.dimension() != self.complex().space().dimension() {
            return Err(Error::SpaceMismatch {
                expected: self.complex().space().to_string(),
                got: form.space.to_string(),
            });
        }
        if !form.has_affine_tail() {
            return Err(Error::Unsupported("non-affine factor after the first".into()));
        }
        let fact: f64 = (1..=k).map(|v| v as f64).product();
        let mut total = 0.0;
        for (cell, a) in self.terms() {
            let pts: Vec<Vec<f64>> = self
                .complex()
                .lift(k, cell)
                .iter()
                .map(|p| match offset {
                    Some(o) => p.iter().zip(o).map(|(x, d)| x + d).collect(),
                    None => p.clone(),
                })
                .collect();
            let bary = crate::currents::barycenter(&pts);
            let mut cell_value = 0.0;
            for t in &form.terms {
                let det = if k == 0 {
                    1.0
                } else {
                    let v = DMatrix::from_fn(k, k, |i, j| {
                        t.factors[i + 1].eval(&pts[j + 1]) - t.factors[i + 1].eval(&pts[0])
                    });
                    v.determinant()
                };
                let base = if k == 0 { t.factors[0].eval(&pts[0]) } else { t.factors[0].eval(&bary) };
                cell_value += t.coeff * det / fact * base;
            }
            total += a.to_f64() * cell_value;
        }
        Ok(total)
    }

    /// `prod Lip(f_j) * sum |a| vol |f_0(barycenter)|` for a single-term form.
    pub fn mass_bound(&self, form: &TensorForm) -> f64 {
        let k = self.dim();
        form.terms
            .iter()
            .map(|t| {
                let lip: f64 = t.factors[1..].iter().map(LipFactor::lip_bound).product();
                let integral: f64 = self
                    .terms()
                    .map(|(cell, a)| {
                        let c = self.complex();
                        a.to_f64().abs() * c.volume(k, cell) * t.factors[0].eval(&c.barycenter(k, cell)).abs()
                    })
                    .sum();
                t.coeff.abs() * lip * integral
            })
            .sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::currents::SimplicialComplex;
    use crate::spaces::Lattice;
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::TAU;

    fn e2() -> Space {
        Space::Euclidean(2)
    }

    fn x() -> LipFactor {
        LipFactor::coordinate(2, 0)
    }

    fn y() -> LipFactor {
        LipFactor::coordinate(2, 1)
    }

    fn random_tuple(rng: &mut ChaCha8Rng, len: usize) -> Vec<Vec<f64>> {
        (0..len)
            .map(|_| vec![rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0)])
            .collect()
    }

    #[test]
    fn eval_examples() {
        let w = TensorForm::simple(&e2(), vec![LipFactor::one(), x()]).unwrap();
        assert_eq!(w.eval(&[vec![0.0, 0.0], vec![3.0, 0.0]]).unwrap(), 3.0);
        let v = TensorForm::simple(&e2(), vec![x(), y()]).unwrap();
        assert_eq!(v.eval(&[vec![2.0, 0.0], vec![0.0, 5.0]]).unwrap(), 10.0);
        let s = v.plus(&w).unwrap();
        let t = [vec![1.0, 2.0], vec![3.0, 4.0]];
        assert_eq!(s.eval(&t).unwrap(), v.eval(&t).unwrap() + w.eval(&t).unwrap());
        assert!(matches!(v.eval(&t[..1]), Err(Error::Arity { .. })));
    }

    #[test]
    fn derivative_properties() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let c = TensorForm::constant(&e2(), 4.0).exterior_derivative();
        assert_eq!(c.eval(&random_tuple(&mut rng, 2)).unwrap(), 0.0);

        let w = TensorForm::simple(&e2(), vec![LipFactor::one(), x()]).unwrap();
        let dw = w.exterior_derivative();
        let t = random_tuple(&mut rng, 3);
        let direct = w.eval(&[t[1].clone(), t[2].clone()]).unwrap() - w.eval(&[t[0].clone(), t[2].clone()]).unwrap()
            + w.eval(&[t[0].clone(), t[1].clone()]).unwrap();
        assert_abs_diff_eq!(dw.eval(&t).unwrap(), direct, epsilon = 1e-12);

        let v = TensorForm::simple(
            &e2(),
            vec![LipFactor::tent(&e2(), &[0.0, 0.0], 1.5), x(), LipFactor::distance_to(&e2(), &[1.0, 1.0])],
        )
        .unwrap();
        let ddv = v.exterior_derivative().exterior_derivative();
        for _ in 0..100 {
            assert_abs_diff_eq!(ddv.eval(&random_tuple(&mut rng, 5)).unwrap(), 0.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn cup_product_properties() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let a = TensorForm::simple(&e2(), vec![LipFactor::tent(&e2(), &[0.2, 0.1], 2.0), x()]).unwrap();
        let a2 = TensorForm::simple(&e2(), vec![y(), LipFactor::distance_to(&e2(), &[0.0, 1.0])]).unwrap();
        let b = TensorForm::simple(&e2(), vec![LipFactor::affine(vec![1.0, 1.0], 0.5), y(), x()]).unwrap();
        let c = TensorForm::simple(&e2(), vec![x(), LipFactor::tent(&e2(), &[0.0, 0.0], 3.0)]).unwrap();
        for _ in 0..50 {
            let t = random_tuple(&mut rng, 4);
            let direct = a.eval(&t[..2]).unwrap() * b.eval(&[t[0].clone(), t[2].clone(), t[3].clone()]).unwrap();
            assert_abs_diff_eq!(a.cup(&b).unwrap().eval(&t).unwrap(), direct, epsilon = 1e-12);

            let one = TensorForm::constant(&e2(), 1.0);
            assert_abs_diff_eq!(a.cup(&one).unwrap().eval(&t[..2]).unwrap(), a.eval(&t[..2]).unwrap(), epsilon = 1e-12);

            let lhs = a.plus(&a2).unwrap().cup(&b).unwrap().eval(&t).unwrap();
            let rhs = a.cup(&b).unwrap().eval(&t).unwrap() + a2.cup(&b).unwrap().eval(&t).unwrap();
            assert_abs_diff_eq!(lhs, rhs, epsilon = 1e-10);

            let t5 = random_tuple(&mut rng, 5);
            let left = a.cup(&c).unwrap().cup(&b).unwrap().eval(&t5).unwrap();
            let right = a.cup(&c.cup(&b).unwrap()).unwrap().eval(&t5).unwrap();
            assert_abs_diff_eq!(left, right, epsilon = 1e-9);
        }
        let torus = TensorForm::constant(&Space::unit_torus(2), 1.0);
        assert!(matches!(a.cup(&torus), Err(Error::SpaceMismatch { .. })));
    }

    #[test]
    fn pull_back_examples() {
        let cover = BldMap::torus_cover(Lattice::unit(2));
        let torus = Space::unit_torus(2);
        let c = TensorForm::constant(&torus, 2.0).pull_back(&cover).unwrap();
        assert_eq!(c.eval(&[vec![5.3, -1.0]]).unwrap(), 2.0);

        let d = LipFactor::distance_to(&torus, &[0.5, 0.5]);
        let pulled = LipFactor::composed(&cover, d.clone());
        assert_eq!(pulled.lip_bound(), d.lip_bound());
        assert_abs_diff_eq!(pulled.eval(&[3.5, -2.5]), 0.0, epsilon = 1e-12);

        let w2 = BldMap::winding(2).unwrap();
        let a = LipFactor::affine(vec![3.0, 4.0], 1.0);
        assert_abs_diff_eq!(LipFactor::composed(&w2, a).lip_bound(), 10.0, epsilon = 1e-12);
    }

    #[test]
    fn lipschitz_bounds_hold_on_samples() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let torus = Space::unit_torus(2);
        let w3 = BldMap::winding(3).unwrap();
        let factors = vec![
            LipFactor::affine(vec![1.0, -2.0], 0.3),
            LipFactor::tent(&e2(), &[0.5, 0.0], 0.7),
            LipFactor::tent(&torus, &[0.1, 0.9], 0.2),
            LipFactor::distance_to(&torus, &[0.3, 0.3]),
            LipFactor::ClippedCoordinate { axis: 1, lo: -0.5, hi: 0.5 },
            LipFactor::product(vec![LipFactor::tent(&e2(), &[0.0, 0.0], 1.0), LipFactor::ClippedCoordinate { axis: 0, lo: -1.0, hi: 1.0 }]),
            LipFactor::sum(vec![x(), LipFactor::distance_to(&e2(), &[1.0, 0.0])]),
            LipFactor::composed(&w3, LipFactor::tent(&e2(), &[0.5, 0.5], 1.0)),
        ];
        for f in &factors {
            let lip = f.lip_bound();
            let sup = f.sup_bound();
            for _ in 0..1000 {
                let a = [rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0)];
                let b = [a[0] + rng.random_range(-0.3..0.3), a[1] + rng.random_range(-0.3..0.3)];
                let d = crate::spaces::dist2(&a, &b).sqrt();
                assert!((f.eval(&a) - f.eval(&b)).abs() <= lip * d * (1.0 + 1e-9) + 1e-15, "{f:?}");
                assert!(f.eval(&a).abs() <= sup + 1e-12);
            }
        }
    }

    fn unit_square() -> std::sync::Arc<SimplicialComplex> {
        SimplicialComplex::new(
            e2(),
            vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![1.0, 1.0], vec![0.0, 1.0]],
            vec![vec![0, 1, 2], vec![0, 2, 3]],
        )
        .unwrap()
    }

    #[test]
    fn evaluate_examples() {
        let seg = SimplicialComplex::new(e2(), vec![vec![0.0, 0.0], vec![1.0, 0.0]], vec![vec![0, 1]]).unwrap();
        let t = SimplicialCurrent::cell(&seg, 1, 0, 1.0).unwrap();
        let w = TensorForm::simple(&e2(), vec![LipFactor::one(), x()]).unwrap();
        assert_abs_diff_eq!(t.evaluate(&w).unwrap(), 1.0, epsilon = 1e-15);
        let flat = TensorForm::simple(&e2(), vec![x(), LipFactor::constant(2.0)]).unwrap();
        assert_eq!(t.evaluate(&flat).unwrap(), 0.0);

        let sq = unit_square();
        let t = SimplicialCurrent::from_terms(&sq, 2, [(0, 1.0), (1, 1.0)]).unwrap();
        let area = TensorForm::simple(&e2(), vec![LipFactor::one(), x(), y()]).unwrap();
        assert_abs_diff_eq!(t.evaluate(&area).unwrap(), 1.0, epsilon = 1e-15);

        let bad = TensorForm::simple(&e2(), vec![LipFactor::one(), LipFactor::tent(&e2(), &[0.0, 0.0], 1.0), y()]).unwrap();
        assert!(matches!(t.evaluate(&bad), Err(Error::Unsupported(_))));
    }

    #[test]
    fn orientation_flips_sign() {
        let v = vec![vec![0.0, 0.0], vec![1.0, 0.2], vec![0.3, 1.0]];
        let k1 = SimplicialComplex::new(e2(), v.clone(), vec![vec![0, 1, 2]]).unwrap();
        let k2 = SimplicialComplex::new(e2(), v, vec![vec![1, 0, 2]]).unwrap();
        let w = TensorForm::simple(&e2(), vec![LipFactor::affine(vec![0.5, 1.0], 2.0), x(), LipFactor::affine(vec![1.0, 3.0], 0.0)]).unwrap();
        let a = SimplicialCurrent::cell(&k1, 2, 0, 1.0).unwrap().evaluate(&w).unwrap();
        let b = SimplicialCurrent::cell(&k2, 2, 0, 1.0).unwrap().evaluate(&w).unwrap();
        assert!(a.abs() > 1e-3);
        assert_abs_diff_eq!(a, -b, epsilon = 1e-12);
    }

    #[test]
    fn mass_bound_holds_for_random_affine_forms() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let mesh = crate::mesh::torus_mesh(&Lattice::unit(2), 6).unwrap();
        let k = &mesh.complex;
        for _ in 0..200 {
            let dim = rng.random_range(1..=2);
            let terms: Vec<(usize, f64)> = (0..8)
                .map(|_| (rng.random_range(0..k.num_cells(dim)), rng.random_range(-2.0..2.0)))
                .collect();
            let t = SimplicialCurrent::from_terms(k, dim, terms).unwrap();
            let mut factors = Vec::new();
            for _ in 0..=dim {
                factors.push(LipFactor::affine(
                    vec![rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0)],
                    rng.random_range(-1.0..1.0),
                ));
            }
            let w = TensorForm::simple(k.space(), factors).unwrap();
            assert!(t.evaluate(&w).unwrap().abs() <= t.mass_bound(&w) + 1e-9);
        }
    }

    fn catalog() -> Vec<(BldMap, Vec<Vec<f64>>, Window)> {
        let cover = BldMap::torus_cover(Lattice::unit(2));
        let pillow = BldMap::pillow_quot(Lattice::unit(2)).unwrap();
        let w2 = BldMap::winding(2).unwrap();
        let w3 = BldMap::winding(3).unwrap();
        let aff = BldMap::affine(vec![vec![1.5, 0.5], vec![0.0, 1.0]], vec![0.2, -0.1]).unwrap();
        let comp = BldMap::compose(vec![cover.clone(), pillow.clone()]).unwrap();
        let ww = BldMap::compose(vec![w2.clone(), w3.clone()]).unwrap();
        let ball = Window::ball(&[0.3, 0.2], 1.5);
        vec![
            (cover, vec![vec![0.3, 0.4], vec![0.05, 0.95]], ball.clone()),
            (pillow, vec![vec![0.2, 0.3], vec![0.5, 0.0], vec![0.0, 0.0]], Window::Whole),
            (w2, vec![vec![0.0, 0.0], vec![0.7, -0.4]], Window::Whole),
            (w3, vec![vec![0.0, 0.0], vec![-0.5, 0.5]], Window::Whole),
            (aff, vec![vec![0.4, 0.1]], Window::Whole),
            (comp, vec![vec![0.2, 0.3], vec![0.5, 0.5]], ball),
            (ww, vec![vec![0.0, 0.0], vec![0.6, 0.2]], Window::Whole),
        ]
    }

    fn sample_tuple(rng: &mut ChaCha8Rng, target: &Space, center: &[f64], r: f64, len: usize) -> Vec<Vec<f64>> {
        (0..len)
            .map(|_| {
                let a = rng.random_range(0.0..TAU);
                let s = r * rng.random::<f64>();
                target.canonical_coords(&[center[0] + s * a.cos(), center[1] + s * a.sin()])
            })
            .collect()
    }

    fn spread_radius(f: &BldMap, center: &[f64], window: &Window) -> f64 {
        let probe = window.inflate(1.0);
        f.fiber(center, &probe)
            .unwrap()
            .iter()
            .map(|x| f.spread_limit(&x.point))
            .fold(0.1f64, f64::min)
            * 0.5
    }

    #[test]
    fn push_forward_commutes_with_d_and_cup() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for (f, centers, window) in catalog() {
            let source = f.source_space();
            let target = f.target_space();
            let alpha = TensorForm::simple(
                &source,
                vec![LipFactor::tent(&source, &[0.3, 0.2], 1.5), LipFactor::coordinate(2, 0)],
            )
            .unwrap();
            let beta = TensorForm::simple(
                &target,
                vec![LipFactor::distance_to(&target, &[0.1, 0.2]), LipFactor::coordinate(2, 1)],
            )
            .unwrap();
            let d_alpha = alpha.exterior_derivative();
            let mixed = alpha.cup(&beta.pull_back(&f).unwrap()).unwrap();
            for c in &centers {
                let r = spread_radius(&f, c, &window);
                for _ in 0..15 {
                    let t3 = sample_tuple(&mut rng, &target, c, r, 3);
                    let lhs = push_forward_form_at(&f, &d_alpha, &window, c, &t3).unwrap();
                    let rhs = push_forward_derivative_at(&f, &alpha, &window, c, &t3).unwrap();
                    assert_abs_diff_eq!(lhs, rhs, epsilon = 1e-9);

                    let lhs = push_forward_form_at(&f, &mixed, &window, c, &t3).unwrap();
                    let pa = push_forward_form_at(&f, &alpha, &window, c, &t3[..2]).unwrap();
                    let rhs = pa * beta.eval(&[t3[0].clone(), t3[2].clone()]).unwrap();
                    assert_abs_diff_eq!(lhs, rhs, epsilon = 1e-9);
                }
            }
        }
    }

    #[test]
    fn push_forward_examples() {
        let cover = BldMap::torus_cover(Lattice::unit(2));
        let e = e2();
        let bump = LipFactor::tent(&e, &[0.5, 0.5], 0.3);
        let w = TensorForm::simple(&e, vec![bump.clone(), x()]).unwrap();
        let support = Window::ball(&[0.5, 0.5], 0.3);
        let y0 = vec![0.45, 0.5];
        let y1 = vec![0.5, 0.55];
        let v = push_forward_form_at(&cover, &w, &support, &y0, &[y0.clone(), y1.clone()]).unwrap();
        assert_abs_diff_eq!(v, bump.eval(&y0) * 0.5, epsilon = 1e-12);

        let zero = TensorForm::zero(&e, 1);
        assert_eq!(push_forward_form_at(&cover, &zero, &support, &y0, &[y0.clone(), y1.clone()]).unwrap(), 0.0);

        let pillow = BldMap::pillow_quot(Lattice::unit(2)).unwrap();
        let torus = Space::unit_torus(2);
        let g = LipFactor::affine(vec![1.0, 2.0], 0.5);
        let w = TensorForm::simple(&torus, vec![LipFactor::one(), g.clone()]).unwrap();
        let p = vec![0.2, 0.3];
        let q = vec![0.22, 0.31];
        let v = push_forward_form_at(&pillow, &w, &Window::Whole, &p, &[p.clone(), q.clone()]).unwrap();
        let sheets = pillow.fiber(&p, &Window::Whole).unwrap();
        let direct: f64 = sheets
            .iter()
            .map(|s| g.eval(&pillow.local_fiber(&s.point, &q)[0].point))
            .sum();
        assert_abs_diff_eq!(v, direct, epsilon = 1e-12);

        // tuples outside a normal neighborhood are rejected
        let far = vec![0.6, 0.3];
        assert!(matches!(
            push_forward_form_at(&pillow, &w, &Window::Whole, &p, &[p.clone(), far]),
            Err(Error::InvalidSpread(_))
        ));
    }

    #[test]
    fn push_forward_support() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let w3 = BldMap::winding(3).unwrap();
        let e = e2();
        let w = TensorForm::simple(&e, vec![LipFactor::tent(&e, &[1.0, 0.0], 0.3), y()]).unwrap();
        let support = Window::ball(&[1.0, 0.0], 0.3);
        // f(spt) is within the annulus 0.7 <= |y| <= 1.3
        for _ in 0..50 {
            let c = vec![rng.random_range(-0.4..0.4), rng.random_range(-0.4..0.4)];
            let t = sample_tuple(&mut rng, &e, &c, 0.05, 2);
            assert_eq!(push_forward_form_at(&w3, &w, &support, &c, &t).unwrap(), 0.0);
        }
    }
}
