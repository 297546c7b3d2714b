//! Push-forward and pull-back of polyhedral currents along catalog maps.
//!
//! A [`Lift`] triangulates the source so that every cell maps isometrically
//! onto a cell of the target complex. The pull-back gives each lifted cell the
//! coefficient of its image cell, weighted by the local index on branch vertices.

use std::collections::{BTreeSet, HashMap};
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::bld_maps::{BldMap, Window};
use crate::currents::{sorted, Coefficient, SimplicialComplex, SimplicialCurrent};
use crate::error::{Error, Result};
use crate::forms::TensorForm;
use crate::spaces::{dist2, Lattice, Space};

/// Where a source cell goes: its image cell, the sheet it lies on, and its weight.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SheetEntry {
    pub target_cell: usize,
    /// Lattice offset for covers, `[+1]` / `[-1]` for the pillowcase quotient,
    /// concatenated along compositions.
    pub sheet: Vec<i64>,
    /// Number of sheets meeting in this cell (the local index on branch vertices).
    pub weight: u32,
}

/// A lifted complex together with its sheet map.
#[derive(Clone, Debug)]
pub struct Lift {
    map: BldMap,
    source: Arc<SimplicialComplex>,
    target: Arc<SimplicialComplex>,
    sheets: Vec<Vec<SheetEntry>>,
    lifts_of: Vec<Vec<Vec<usize>>>,
    interior: Vec<BTreeSet<usize>>,
}

/// Serializable sheet map: one row per source cell.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SheetRow {
    pub dim: usize,
    pub source_cell: usize,
    pub target_cell: usize,
    pub sheet: Vec<i64>,
    pub weight: u32,
}

struct Pending {
    y_cell: usize,
    sheet: Vec<i64>,
    coords: Vec<Vec<f64>>,
}

/// Lifts `target` through `f` into the source space, keeping lifted cells that
/// meet `window` (all sheets for proper maps).
pub fn lift_complex(f: &BldMap, target: &Arc<SimplicialComplex>, window: &Window) -> Result<Lift> {
    if *target.space() != f.target_space() {
        return Err(Error::SpaceMismatch {
            expected: f.target_space().to_string(),
            got: target.space().to_string(),
        });
    }
    match f {
        BldMap::Winding(_) => Err(Error::Unsupported(
            "winding maps lift straight cells to curved ones".into(),
        )),
        BldMap::TorusCover(l) => lift_cover(f, l, target, window),
        BldMap::PillowQuot(l) => lift_pillow(f, l, target),
        BldMap::Affine(a) => {
            let top = target.top_dim();
            let pending = (0..=top)
                .map(|k| {
                    (0..target.num_cells(k))
                        .map(|i| Pending {
                            y_cell: i,
                            sheet: Vec::new(),
                            coords: target.lift(k, i).iter().map(|p| a.apply_inverse(p)).collect(),
                        })
                        .collect()
                })
                .collect();
            assemble(f, target, f.source_space(), pending, |_| true)
        }
        BldMap::Compose(maps) => {
            let (last, prefix) = maps.split_last().unwrap();
            let prefix = if prefix.len() == 1 {
                prefix[0].clone()
            } else {
                BldMap::Compose(prefix.to_vec())
            };
            let mid_window = match window.bounding_ball() {
                Some((c, r)) => Window::Ball {
                    center: prefix.eval_coords(&c),
                    radius: prefix.bld_constant() * r,
                },
                None => Window::Whole,
            };
            let outer = lift_complex(last, target, &mid_window)?;
            let inner = lift_complex(&prefix, &outer.source, window)?;
            Ok(chain_lifts(f, inner, outer))
        }
    }
}

fn lift_cover(f: &BldMap, l: &Lattice, target: &Arc<SimplicialComplex>, window: &Window) -> Result<Lift> {
    let (center, radius) = window
        .bounding_ball()
        .ok_or_else(|| Error::Unbounded("lifting through a cover needs a bounded window".into()))?;
    let euclid = f.source_space();
    let shifted = |k: usize, i: usize, off: &[i64]| -> Vec<Vec<f64>> {
        let o = l.offset(off);
        target
            .lift(k, i)
            .iter()
            .map(|p| p.iter().zip(&o).map(|(a, b)| a + b).collect())
            .collect()
    };
    let top = target.top_dim();
    let mut included: Vec<BTreeSet<(usize, Vec<i64>)>> = vec![BTreeSet::new(); top + 1];
    for k in (0..=top).rev() {
        for i in 0..target.num_cells(k) {
            for p in target.lift(k, i) {
                for off in l.offsets_near(p, &center, radius) {
                    let q: Vec<f64> = p.iter().zip(l.offset(&off)).map(|(a, b)| a + b).collect();
                    if window.contains(&euclid, &q) {
                        included[k].insert((i, off));
                    }
                }
            }
        }
        if k == 0 {
            break;
        }
        let closure: Vec<(usize, Vec<i64>)> = included[k]
            .iter()
            .flat_map(|(i, off)| {
                let cell = target.cell(k, *i);
                let lifted = target.lift(k, *i);
                target.faces(k, *i).iter().map(move |&(face, _)| {
                    let first = target.cell(k - 1, face)[0];
                    let pos = cell.iter().position(|&v| v == first).expect("face vertex");
                    let diff: Vec<f64> = lifted[pos]
                        .iter()
                        .zip(&target.lift(k - 1, face)[0])
                        .map(|(a, b)| a - b)
                        .collect();
                    let shift: Vec<i64> = l.to_lattice(&diff).iter().map(|v| v.round() as i64).collect();
                    let total: Vec<i64> = off.iter().zip(&shift).map(|(a, b)| a + b).collect();
                    (face, total)
                })
            })
            .collect();
        included[k - 1].extend(closure);
    }
    let pending: Vec<Vec<Pending>> = included
        .iter()
        .enumerate()
        .map(|(k, set)| {
            set.iter()
                .map(|(i, off)| Pending {
                    y_cell: *i,
                    sheet: off.clone(),
                    coords: shifted(k, *i, off),
                })
                .collect()
        })
        .collect();
    let w = window.clone();
    assemble(f, target, euclid.clone(), pending, move |coords| {
        coords.iter().any(|p| w.contains(&euclid, p))
    })
}

fn lift_pillow(f: &BldMap, l: &Lattice, target: &Arc<SimplicialComplex>) -> Result<Lift> {
    let half = Lattice::new(l.basis().iter().map(|r| r.iter().map(|v| 0.5 * v).collect()).collect())?;
    let top = target.top_dim();
    let mut pending = Vec::with_capacity(top + 1);
    for k in 0..=top {
        let mut pk = Vec::with_capacity(2 * target.num_cells(k));
        for i in 0..target.num_cells(k) {
            let lifted = target.lift(k, i);
            if k >= 1 && branch_point_inside(&half, lifted) {
                return Err(Error::SubdivisionRequired { dim: k, cell: i });
            }
            for s in [1i64, -1] {
                pk.push(Pending {
                    y_cell: i,
                    sheet: vec![s],
                    coords: lifted.iter().map(|p| p.iter().map(|v| s as f64 * v).collect()).collect(),
                });
            }
        }
        pending.push(pk);
    }
    assemble(f, target, f.source_space(), pending, |_| true)
}

/// True if a half-lattice point lies in the closed simplex but is not a vertex.
fn branch_point_inside(half: &Lattice, pts: &[Vec<f64>]) -> bool {
    let n = pts[0].len();
    let k = pts.len() - 1;
    let bary = crate::currents::barycenter(pts);
    let radius = pts.iter().map(|p| dist2(p, &bary).sqrt()).fold(0.0, f64::max);
    let origin = vec![0.0; n];
    let edges = DMatrix::from_fn(n, k, |r, c| pts[c + 1][r] - pts[0][r]);
    let gram = edges.transpose() * &edges;
    let Some(gram_inv) = gram.try_inverse() else {
        return false;
    };
    for off in half.offsets_near(&origin, &bary, radius) {
        let h = half.offset(&off);
        if pts.iter().any(|p| dist2(p, &h) < 1e-18) {
            continue;
        }
        let rhs = DVector::from_iterator(n, h.iter().zip(&pts[0]).map(|(a, b)| a - b));
        let t = &gram_inv * (edges.transpose() * &rhs);
        let residual = (&edges * &t - &rhs).norm();
        if residual < 1e-9 && t.iter().all(|v| *v >= -1e-9) && t.sum() <= 1.0 + 1e-9 {
            return true;
        }
    }
    false
}

fn vertex_key(space: &Space, x: &[f64]) -> Vec<i64> {
    const SCALE: f64 = 1e8;
    match space {
        Space::Euclidean(_) => x.iter().map(|v| (v * SCALE).round() as i64).collect(),
        Space::FlatTorus(l) => torus_key(l, x),
        Space::Pillowcase(l) => {
            let neg: Vec<f64> = x.iter().map(|v| -v).collect();
            torus_key(l, x).min(torus_key(l, &neg))
        }
    }
}

fn torus_key(l: &Lattice, x: &[f64]) -> Vec<i64> {
    const SCALE: i64 = 100_000_000;
    l.to_lattice(x)
        .iter()
        .map(|c| ((c * SCALE as f64).round() as i64).rem_euclid(SCALE))
        .collect()
}

fn assemble(
    f: &BldMap,
    target: &Arc<SimplicialComplex>,
    space: Space,
    pending: Vec<Vec<Pending>>,
    interior: impl Fn(&[Vec<f64>]) -> bool,
) -> Result<Lift> {
    let top = pending.len() - 1;
    let mut keys: HashMap<Vec<i64>, usize> = HashMap::new();
    let mut vertices: Vec<Vec<f64>> = Vec::new();
    let mut sheets: Vec<Vec<SheetEntry>> = vec![Vec::new(); top + 1];
    let mut inner: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); top + 1];
    for p in &pending[0] {
        let key = vertex_key(&space, &p.coords[0]);
        match keys.get(&key) {
            Some(&idx) => {
                if sheets[0][idx].target_cell != p.y_cell {
                    return Err(Error::InvalidComplex("distinct vertices lift to the same point".into()));
                }
                sheets[0][idx].weight += 1;
            }
            None => {
                keys.insert(key, vertices.len());
                if interior(&p.coords) {
                    inner[0].insert(vertices.len());
                }
                vertices.push(p.coords[0].clone());
                sheets[0].push(SheetEntry {
                    target_cell: p.y_cell,
                    sheet: p.sheet.clone(),
                    weight: 1,
                });
            }
        }
    }
    let mut cells = Vec::new();
    for k in 1..=top {
        let mut seen: HashMap<Vec<usize>, usize> = HashMap::new();
        for p in &pending[k] {
            let tuple: Vec<usize> = p
                .coords
                .iter()
                .map(|x| keys.get(&vertex_key(&space, x)).copied())
                .collect::<Option<Vec<usize>>>()
                .ok_or_else(|| Error::InvalidComplex("lifted cell has a vertex outside the lift".into()))?;
            if seen.insert(sorted(&tuple), sheets[k].len()).is_some() {
                return Err(Error::SubdivisionRequired { dim: k, cell: p.y_cell });
            }
            if interior(&p.coords) {
                inner[k].insert(sheets[k].len());
            }
            sheets[k].push(SheetEntry {
                target_cell: p.y_cell,
                sheet: p.sheet.clone(),
                weight: 1,
            });
            cells.push(tuple);
        }
    }
    let source = SimplicialComplex::new(space, vertices, cells)?;
    for (k, s) in sheets.iter().enumerate() {
        if source.num_cells(k) != s.len() {
            return Err(Error::InvalidComplex("lifted complex is not closed under faces".into()));
        }
    }
    Ok(Lift::from_parts(f.clone(), source, target.clone(), sheets, inner))
}

fn chain_lifts(f: &BldMap, inner: Lift, outer: Lift) -> Lift {
    let sheets: Vec<Vec<SheetEntry>> = inner
        .sheets
        .iter()
        .enumerate()
        .map(|(k, list)| {
            list.iter()
                .map(|e| {
                    let o = &outer.sheets[k][e.target_cell];
                    let mut sheet = e.sheet.clone();
                    sheet.extend(&o.sheet);
                    SheetEntry {
                        target_cell: o.target_cell,
                        sheet,
                        weight: e.weight * o.weight,
                    }
                })
                .collect()
        })
        .collect();
    let interior: Vec<BTreeSet<usize>> = inner
        .interior
        .iter()
        .enumerate()
        .map(|(k, set)| {
            set.iter()
                .copied()
                .filter(|&x| outer.interior[k].contains(&inner.sheets[k][x].target_cell))
                .collect()
        })
        .collect();
    Lift::from_parts(f.clone(), inner.source, outer.target, sheets, interior)
}

impl Lift {
    fn from_parts(
        map: BldMap,
        source: Arc<SimplicialComplex>,
        target: Arc<SimplicialComplex>,
        sheets: Vec<Vec<SheetEntry>>,
        interior: Vec<BTreeSet<usize>>,
    ) -> Self {
        let lifts_of = sheets
            .iter()
            .enumerate()
            .map(|(k, list)| {
                let mut by_target = vec![Vec::new(); target.num_cells(k)];
                for (x, e) in list.iter().enumerate() {
                    by_target[e.target_cell].push(x);
                }
                by_target
            })
            .collect();
        Lift {
            map,
            source,
            target,
            sheets,
            lifts_of,
            interior,
        }
    }

    pub fn map(&self) -> &BldMap {
        &self.map
    }

    /// The lifted complex `K_X`.
    pub fn source(&self) -> &Arc<SimplicialComplex> {
        &self.source
    }

    /// The complex `K_Y` that was lifted.
    pub fn target(&self) -> &Arc<SimplicialComplex> {
        &self.target
    }

    pub fn sheet(&self, k: usize, x_cell: usize) -> &SheetEntry {
        &self.sheets[k][x_cell]
    }

    /// Lifted cells over a target cell.
    pub fn lifts_of(&self, k: usize, y_cell: usize) -> &[usize] {
        &self.lifts_of[k][y_cell]
    }

    /// Lifted cells meeting the window; on these all cofaces are lifted too.
    pub fn interior_cells(&self, k: usize) -> &BTreeSet<usize> {
        &self.interior[k]
    }

    pub fn sheet_table(&self) -> Vec<SheetRow> {
        self.sheets
            .iter()
            .enumerate()
            .flat_map(|(k, list)| {
                list.iter().enumerate().map(move |(x, e)| SheetRow {
                    dim: k,
                    source_cell: x,
                    target_cell: e.target_cell,
                    sheet: e.sheet.clone(),
                    weight: e.weight,
                })
            })
            .collect()
    }

    /// `f_* T`: each target cell collects the coefficients of its lifts.
    pub fn push_forward<C: Coefficient>(&self, t: &SimplicialCurrent<C>) -> Result<SimplicialCurrent<C>> {
        if t.complex().id() != self.source.id() {
            return Err(Error::UnregisteredComplex);
        }
        let k = t.dim();
        SimplicialCurrent::from_terms(
            &self.target,
            k,
            t.terms().map(|(x, a)| (self.sheets[k][x].target_cell, a.clone())),
        )
    }

    /// `f^* T`: every lift of a cell receives its coefficient times the sheet weight.
    pub fn pull_back<C: Coefficient>(&self, t: &SimplicialCurrent<C>) -> Result<SimplicialCurrent<C>> {
        if t.complex().id() != self.target.id() {
            return Err(Error::UnregisteredComplex);
        }
        let k = t.dim();
        let mut terms = Vec::new();
        for (y, a) in t.terms() {
            for &x in &self.lifts_of[k][y] {
                let w = C::from_i64(self.sheets[k][x].weight as i64);
                terms.push((x, a.times(&w)));
            }
        }
        SimplicialCurrent::from_terms(&self.source, k, terms)
    }

    /// `f^* ||T|| (E)`: the target mass of each cell counted once per weighted lift in `region`.
    pub fn pulled_mass_measure<C: Coefficient>(&self, t: &SimplicialCurrent<C>, region: &BTreeSet<usize>) -> Result<f64> {
        if t.complex().id() != self.target.id() {
            return Err(Error::UnregisteredComplex);
        }
        let k = t.dim();
        let vols = self.target.volumes(k);
        Ok(t.terms()
            .map(|(y, a)| {
                let sheets: u32 = self.lifts_of[k][y]
                    .iter()
                    .filter(|x| region.contains(x))
                    .map(|&x| self.sheets[k][x].weight)
                    .sum();
                a.to_f64().abs() * vols[y] * sheets as f64
            })
            .sum())
    }

    /// `f_#chi_E` on target cells: the weighted number of lifts inside `region`.
    pub fn pushed_indicator(&self, k: usize, region: &BTreeSet<usize>) -> Vec<i64> {
        let mut counts = vec![0i64; self.target.num_cells(k)];
        for &x in region {
            let e = &self.sheets[k][x];
            counts[e.target_cell] += e.weight as i64;
        }
        counts
    }
}

/// Convenience: lift and pull back in one step.
pub fn pull_back_current<C: Coefficient>(
    f: &BldMap,
    t: &SimplicialCurrent<C>,
    window: &Window,
) -> Result<(Lift, SimplicialCurrent<C>)> {
    let lift = lift_complex(f, t.complex(), window)?;
    let pulled = lift.pull_back(t)?;
    Ok((lift, pulled))
}

/// Both sides of the duality between pull-back and push-forward of forms.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DualityReport {
    pub lhs: f64,
    pub rhs: f64,
    pub abs_diff: f64,
    /// Lattice translates that contributed to the right-hand side.
    pub translates: usize,
}

/// Compares `f^*T(w)` with `sum_k T(w o (x -> x + B k))` for the torus cover,
/// where the first factors of `w` vanish outside `support`.
pub fn duality_check(
    f: &BldMap,
    t: &SimplicialCurrent,
    form: &TensorForm,
    support: &Window,
) -> Result<DualityReport> {
    let BldMap::TorusCover(l) = f else {
        return Err(Error::Unsupported("duality check is implemented for torus covers".into()));
    };
    let (center, radius) = support
        .bounding_ball()
        .ok_or_else(|| Error::Unbounded("duality check needs a bounded support".into()))?;
    let k = t.complex();
    let margin = (0..=k.top_dim()).map(|d| k.max_cell_diameter(d)).fold(0.0, f64::max);
    let window = support.inflate(margin + 1e-9);
    let (_, pulled) = pull_back_current(f, t, &window)?;
    let lhs = pulled.evaluate(form)?;

    let n = l.dim();
    let mid = l.to_cartesian(&vec![0.5; n]);
    let half_diag: f64 = 0.5 * l.basis().iter().map(|r| crate::spaces::norm(r)).sum::<f64>();
    let mut rhs = 0.0;
    let mut translates = 0;
    for off in l.offsets_near(&mid, &center, radius + half_diag + margin + 1e-9) {
        let shift = l.offset(&off);
        let v = t.evaluate_translated(form, Some(&shift))?;
        if v != 0.0 {
            translates += 1;
        }
        rhs += v;
    }
    Ok(DualityReport {
        lhs,
        rhs,
        abs_diff: (lhs - rhs).abs(),
        translates,
    })
}
