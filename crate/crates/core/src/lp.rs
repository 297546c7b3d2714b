//! Dense two-phase simplex over `f64` and exact rationals.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Problems with at most this many variables are re-solved exactly.
pub const EXACT_LIMIT: usize = 200;

/// Scalars the simplex can pivot with.
pub trait Field: Clone + std::fmt::Debug {
    fn zero() -> Self;
    fn one() -> Self;
    fn from_f64(v: f64) -> Self;
    fn to_f64(&self) -> f64;
    fn add(&self, o: &Self) -> Self;
    fn sub(&self, o: &Self) -> Self;
    fn mul(&self, o: &Self) -> Self;
    fn div(&self, o: &Self) -> Self;
    fn is_zero(&self) -> bool;
    fn is_positive(&self) -> bool;
    fn is_negative(&self) -> bool;
    fn less(&self, o: &Self) -> bool;
    /// Exact fields cannot cycle under Bland's rule alone.
    const EXACT: bool;
}

const EPS: f64 = 1e-11;

impl Field for f64 {
    fn zero() -> Self {
        0.0
    }
    fn one() -> Self {
        1.0
    }
    fn from_f64(v: f64) -> Self {
        v
    }
    fn to_f64(&self) -> f64 {
        *self
    }
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn sub(&self, o: &Self) -> Self {
        self - o
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
    fn div(&self, o: &Self) -> Self {
        self / o
    }
    fn is_zero(&self) -> bool {
        self.abs() <= EPS
    }
    fn is_positive(&self) -> bool {
        *self > EPS
    }
    fn is_negative(&self) -> bool {
        *self < -EPS
    }
    fn less(&self, o: &Self) -> bool {
        self < o
    }
    const EXACT: bool = false;
}

impl Field for BigRational {
    fn zero() -> Self {
        Zero::zero()
    }
    fn one() -> Self {
        One::one()
    }
    fn from_f64(v: f64) -> Self {
        BigRational::from_float(v).expect("finite value")
    }
    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn sub(&self, o: &Self) -> Self {
        self - o
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
    fn div(&self, o: &Self) -> Self {
        self / o
    }
    fn is_zero(&self) -> bool {
        Zero::is_zero(self)
    }
    fn is_positive(&self) -> bool {
        Signed::is_positive(self)
    }
    fn is_negative(&self) -> bool {
        Signed::is_negative(self)
    }
    fn less(&self, o: &Self) -> bool {
        self < o
    }
    const EXACT: bool = true;
}

/// `min c.x` subject to sparse equality rows and per-variable bounds.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LpProblem {
    pub objective: Vec<f64>,
    /// Each row is a list of `(variable, coefficient)`.
    pub rows: Vec<Vec<(usize, f64)>>,
    pub rhs: Vec<f64>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub tolerance: f64,
}

impl LpProblem {
    /// Nonnegative variables, no rows.
    pub fn new(objective: Vec<f64>) -> Self {
        let n = objective.len();
        LpProblem {
            objective,
            rows: Vec::new(),
            rhs: Vec::new(),
            lower: vec![0.0; n],
            upper: vec![f64::INFINITY; n],
            tolerance: 1e-9,
        }
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn add_row(&mut self, row: Vec<(usize, f64)>, rhs: f64) {
        self.rows.push(row);
        self.rhs.push(rhs);
    }

    pub fn set_bounds(&mut self, var: usize, lower: f64, upper: f64) {
        self.lower[var] = lower;
        self.upper[var] = upper;
    }

    fn validate(&self) -> Result<()> {
        let n = self.num_vars();
        if self.lower.len() != n || self.upper.len() != n || self.rows.len() != self.rhs.len() {
            return Err(Error::Usage("inconsistent LP dimensions".into()));
        }
        if self.rows.iter().flatten().any(|(j, _)| *j >= n) {
            return Err(Error::Usage("LP row references a missing variable".into()));
        }
        if (0..n).any(|j| self.lower[j] > self.upper[j] || self.lower[j] == f64::INFINITY || self.upper[j] == f64::NEG_INFINITY) {
            return Err(Error::Infeasible);
        }
        Ok(())
    }
}

/// Optimal point with its certificate quality.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LpSolution {
    pub x: Vec<f64>,
    pub value: f64,
    /// Largest primal, dual or complementarity residual.
    pub kkt_residual: f64,
    /// Optimal value from the exact re-solve, when one was run.
    pub exact_value: Option<f64>,
}

/// How an original variable sits in the nonnegative standard form.
#[derive(Clone, Copy, Debug)]
enum Var {
    Shifted { col: usize, lower: f64 },
    Flipped { col: usize, upper: f64 },
    Free { pos: usize, neg: usize },
}

struct Standard {
    vars: Vec<Var>,
    cols: usize,
    cost: Vec<f64>,
    rows: Vec<Vec<(usize, f64)>>,
    rhs: Vec<f64>,
    offset: f64,
}

fn standardize(p: &LpProblem) -> Standard {
    let mut cols = 0;
    let mut vars = Vec::with_capacity(p.num_vars());
    let mut cost = Vec::new();
    let mut offset = 0.0;
    let mut bound_rows = Vec::new();
    for j in 0..p.num_vars() {
        let (l, u, c) = (p.lower[j], p.upper[j], p.objective[j]);
        if l.is_finite() {
            vars.push(Var::Shifted { col: cols, lower: l });
            cost.push(c);
            offset += c * l;
            if u.is_finite() {
                bound_rows.push((cols, u - l));
            }
            cols += 1;
        } else if u.is_finite() {
            vars.push(Var::Flipped { col: cols, upper: u });
            cost.push(-c);
            offset += c * u;
            cols += 1;
        } else {
            vars.push(Var::Free { pos: cols, neg: cols + 1 });
            cost.extend([c, -c]);
            cols += 2;
        }
    }
    let mut rows = Vec::new();
    let mut rhs = Vec::new();
    for (row, &b) in p.rows.iter().zip(&p.rhs) {
        let mut r = Vec::new();
        let mut b = b;
        for &(j, a) in row {
            match vars[j] {
                Var::Shifted { col, lower } => {
                    r.push((col, a));
                    b -= a * lower;
                }
                Var::Flipped { col, upper } => {
                    r.push((col, -a));
                    b -= a * upper;
                }
                Var::Free { pos, neg } => {
                    r.push((pos, a));
                    r.push((neg, -a));
                }
            }
        }
        rows.push(r);
        rhs.push(b);
    }
    for (col, width) in bound_rows {
        let slack = cols;
        cols += 1;
        cost.push(0.0);
        rows.push(vec![(col, 1.0), (slack, 1.0)]);
        rhs.push(width);
    }
    Standard {
        vars,
        cols,
        cost,
        rows,
        rhs,
        offset,
    }
}

struct Tableau<F: Field> {
    rows: Vec<Vec<F>>,
    cost: Vec<F>,
    basis: Vec<usize>,
    width: usize,
}

impl<F: Field> Tableau<F> {
    fn pivot(&mut self, r: usize, c: usize) {
        let p = self.rows[r][c].clone();
        for v in self.rows[r].iter_mut() {
            *v = v.div(&p);
        }
        let pivot_row = self.rows[r].clone();
        let nz: Vec<usize> = (0..=self.width).filter(|&j| !pivot_row[j].is_zero()).collect();
        for (i, row) in self.rows.iter_mut().enumerate() {
            if i == r || row[c].is_zero() {
                continue;
            }
            let f = row[c].clone();
            for &j in &nz {
                row[j] = row[j].sub(&f.mul(&pivot_row[j]));
            }
            row[c] = F::zero();
        }
        if !self.cost[c].is_zero() {
            let f = self.cost[c].clone();
            for &j in &nz {
                self.cost[j] = self.cost[j].sub(&f.mul(&pivot_row[j]));
            }
            self.cost[c] = F::zero();
        }
        self.basis[r] = c;
    }

    /// Runs to optimality over columns `allowed`; Err on unboundedness.
    fn optimize(&mut self, allowed: usize) -> Result<()> {
        let mut degenerate = 0usize;
        let max_iter = 50 * (self.rows.len() + self.width) + 1000;
        for _ in 0..max_iter {
            let bland = F::EXACT || degenerate > 50;
            let mut enter = None;
            for j in 0..allowed {
                if self.cost[j].is_negative() {
                    match enter {
                        None => enter = Some(j),
                        Some(e) if !bland && self.cost[j].less(&self.cost[e]) => enter = Some(j),
                        _ => {}
                    }
                    if bland {
                        break;
                    }
                }
            }
            let Some(c) = enter else {
                return Ok(());
            };
            let mut leave: Option<(usize, F)> = None;
            for (i, row) in self.rows.iter().enumerate() {
                if !row[c].is_positive() {
                    continue;
                }
                let ratio = row[self.width].div(&row[c]);
                let better = match &leave {
                    None => true,
                    Some((li, lr)) => {
                        ratio.less(lr) || (!lr.less(&ratio) && self.basis[i] < self.basis[*li])
                    }
                };
                if better {
                    leave = Some((i, ratio));
                }
            }
            let Some((r, ratio)) = leave else {
                return Err(Error::UnboundedLp);
            };
            if ratio.is_zero() {
                degenerate += 1;
            } else {
                degenerate = 0;
            }
            self.pivot(r, c);
        }
        Err(Error::Solver("simplex iteration limit".into()))
    }
}

struct StandardSolution<F> {
    x: Vec<F>,
    duals: Vec<F>,
    value: F,
}

/// Two-phase simplex on `min c.x, Ax = b, x >= 0`.
fn simplex<F: Field>(std: &Standard) -> Result<StandardSolution<F>> {
    let m = std.rows.len();
    let n = std.cols;
    let width = n + m;
    let mut rows = vec![vec![F::zero(); width + 1]; m];
    let mut flips = vec![false; m];
    for (i, (row, &b)) in std.rows.iter().zip(&std.rhs).enumerate() {
        let flip = b < 0.0;
        flips[i] = flip;
        let s = if flip { -1.0 } else { 1.0 };
        for &(j, a) in row {
            rows[i][j] = rows[i][j].add(&F::from_f64(s * a));
        }
        rows[i][n + i] = F::one();
        rows[i][width] = F::from_f64(s * b);
    }
    // phase one: minimize the sum of artificials
    let mut cost = vec![F::zero(); width + 1];
    for row in &rows {
        for j in 0..n {
            cost[j] = cost[j].sub(&row[j]);
        }
        cost[width] = cost[width].sub(&row[width]);
    }
    let mut t = Tableau {
        rows,
        cost,
        basis: (n..n + m).collect(),
        width,
    };
    t.optimize(n)?;
    let infeasibility = t.cost[width].to_f64().abs();
    let scale = 1.0 + std.rhs.iter().map(|b| b.abs()).fold(0.0, f64::max);
    if (F::EXACT && !t.cost[width].is_zero()) || (!F::EXACT && infeasibility > 1e-9 * scale) {
        return Err(Error::Infeasible);
    }
    // drive remaining artificials out of the basis where possible
    for r in 0..m {
        if t.basis[r] >= n {
            if let Some(c) = (0..n).find(|&j| !t.rows[r][j].is_zero()) {
                t.pivot(r, c);
            }
        }
    }
    // phase two
    let mut cost = vec![F::zero(); width + 1];
    for j in 0..n {
        cost[j] = F::from_f64(std.cost[j]);
    }
    for r in 0..m {
        let b = t.basis[r];
        if b < n && !cost[b].is_zero() {
            let f = cost[b].clone();
            for j in 0..=width {
                cost[j] = cost[j].sub(&f.mul(&t.rows[r][j]));
            }
        }
    }
    t.cost = cost;
    t.optimize(n)?;
    let mut x = vec![F::zero(); n];
    for (r, &b) in t.basis.iter().enumerate() {
        if b < n {
            x[b] = t.rows[r][width].clone();
        }
    }
    // reduced cost of artificial i is -y_i (in the sign-flipped row)
    let duals = (0..m)
        .map(|i| {
            let y = F::zero().sub(&t.cost[n + i]);
            if flips[i] {
                F::zero().sub(&y)
            } else {
                y
            }
        })
        .collect();
    let value = F::zero().sub(&t.cost[width]);
    Ok(StandardSolution { x, duals, value })
}

fn recover<F: Field>(p: &LpProblem, std: &Standard, xs: &[F]) -> Vec<f64> {
    std.vars
        .iter()
        .map(|v| match *v {
            Var::Shifted { col, lower } => lower + xs[col].to_f64(),
            Var::Flipped { col, upper } => upper - xs[col].to_f64(),
            Var::Free { pos, neg } => xs[pos].to_f64() - xs[neg].to_f64(),
        })
        .take(p.num_vars())
        .collect()
}

fn kkt_residual(std: &Standard, x: &[f64], y: &[f64]) -> f64 {
    let mut worst: f64 = 0.0;
    let mut reduced = std.cost.clone();
    for (i, row) in std.rows.iter().enumerate() {
        let ax: f64 = row.iter().map(|&(j, a)| a * x[j]).sum();
        worst = worst.max((ax - std.rhs[i]).abs());
        for &(j, a) in row {
            reduced[j] -= a * y[i];
        }
    }
    for j in 0..std.cols {
        worst = worst.max(-x[j]).max(-reduced[j]).max((reduced[j] * x[j]).abs());
    }
    worst
}

/// Solves the problem in floating point; small problems are re-solved exactly
/// and must agree within the tolerance.
pub fn solve_lp(p: &LpProblem) -> Result<LpSolution> {
    p.validate()?;
    let std = standardize(p);
    let sol = simplex::<f64>(&std)?;
    let x = recover(p, &std, &sol.x);
    let value = sol.value + std.offset;
    let kkt = kkt_residual(&std, &sol.x, &sol.duals);
    let scale = 1.0 + value.abs();
    if kkt > p.tolerance * scale {
        return Err(Error::Solver(format!("KKT residual {kkt:e} above tolerance")));
    }
    let exact_value = if p.num_vars() <= EXACT_LIMIT {
        let (_, v) = solve_lp_exact(p)?;
        let v = ToPrimitive::to_f64(&v).unwrap_or(f64::NAN);
        if (v - value).abs() > p.tolerance * scale {
            return Err(Error::Solver(format!("float value {value} disagrees with exact value {v}")));
        }
        Some(v)
    } else {
        None
    };
    Ok(LpSolution {
        x,
        value,
        kkt_residual: kkt,
        exact_value,
    })
}

/// Exact rational solve; inputs are converted from their binary values exactly.
pub fn solve_lp_exact(p: &LpProblem) -> Result<(Vec<BigRational>, BigRational)> {
    p.validate()?;
    let std = standardize(p);
    let sol = simplex::<BigRational>(&std)?;
    let q = |v: f64| BigRational::from_float(v).expect("finite bound");
    let x = std
        .vars
        .iter()
        .map(|v| match *v {
            Var::Shifted { col, lower } => q(lower) + &sol.x[col],
            Var::Flipped { col, upper } => q(upper) - &sol.x[col],
            Var::Free { pos, neg } => &sol.x[pos] - &sol.x[neg],
        })
        .collect();
    Ok((x, sol.value + q(std.offset)))
}

/// Rank of a sparse matrix over the rationals by exact elimination.
pub fn rational_rank(rows: &[Vec<(usize, i64)>]) -> usize {
    let mut pending: Vec<Vec<(usize, BigRational)>> = rows
        .iter()
        .map(|r| {
            let mut r: Vec<(usize, BigRational)> = r
                .iter()
                .filter(|(_, v)| *v != 0)
                .map(|&(j, v)| (j, BigRational::from_integer(BigInt::from(v))))
                .collect();
            r.sort_by_key(|e| e.0);
            r
        })
        .filter(|r| !r.is_empty())
        .collect();
    let mut rank = 0;
    while !pending.is_empty() {
        // pivot on the sparsest row, eliminating its leading column elsewhere
        let (best, _) = pending.iter().enumerate().min_by_key(|(_, r)| r.len()).unwrap();
        let pivot = pending.swap_remove(best);
        rank += 1;
        let (col, pv) = pivot[0].clone();
        for row in pending.iter_mut() {
            let Some(pos) = row.iter().position(|e| e.0 == col) else {
                continue;
            };
            let f = &row[pos].1 / &pv;
            *row = axpy(row, &pivot, &f);
        }
        pending.retain(|r| !r.is_empty());
    }
    rank
}

/// `row - f * pivot` for sorted sparse rows.
fn axpy(row: &[(usize, BigRational)], pivot: &[(usize, BigRational)], f: &BigRational) -> Vec<(usize, BigRational)> {
    let mut out = Vec::with_capacity(row.len() + pivot.len());
    let (mut a, mut b) = (0, 0);
    while a < row.len() || b < pivot.len() {
        let ca = row.get(a).map(|e| e.0).unwrap_or(usize::MAX);
        let cb = pivot.get(b).map(|e| e.0).unwrap_or(usize::MAX);
        if ca < cb {
            out.push(row[a].clone());
            a += 1;
        } else if cb < ca {
            out.push((cb, -(f * &pivot[b].1)));
            b += 1;
        } else {
            let v = &row[a].1 - f * &pivot[b].1;
            if !Zero::is_zero(&v) {
                out.push((ca, v));
            }
            a += 1;
            b += 1;
        }
    }
    out
}
