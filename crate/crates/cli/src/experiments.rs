//! The named experiments and their report rows.

use std::path::Path;

use bldlab::equidist::{coarea_check, equidist_check};
use bldlab::flatnorm::{filling_constant_estimate, flat_norm, homology_rank, separation_experiment, CellRegion};
use bldlab::forms::{LipFactor, TensorForm};
use bldlab::qvalued::bilip_check;
use bldlab::transport::{duality_check, lift_complex};
use bldlab::{BldMap, Space, Window};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::config::{Config, CurrentSpec};
use crate::report::{format_point, Cell, Record};
use crate::CliError;

pub const NAMES: [&str; 9] = [
    "equidist",
    "coarea",
    "flatnorm",
    "pullback",
    "duality",
    "separation",
    "homology",
    "qvalued",
    "filling",
];

fn need<T: Clone>(v: &Option<T>, what: &str) -> Result<T, CliError> {
    v.clone().ok_or_else(|| CliError::Missing(format!("[experiment] {what}")))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EquidistRow {
    pub map: String,
    pub p: Vec<f64>,
    #[serde(rename = "R")]
    pub radius: f64,
    pub count: u64,
    #[serde(rename = "A_f")]
    pub a_f: f64,
    pub ratio: f64,
    pub bound: f64,
    pub pass: bool,
}

impl Record for EquidistRow {
    fn columns() -> &'static [&'static str] {
        &["map", "p", "R", "count", "A_f", "ratio", "bound", "pass"]
    }

    fn cells(&self) -> Vec<Cell> {
        vec![
            Cell::Text(self.map.clone()),
            Cell::Text(format_point(&self.p)),
            Cell::Num(self.radius),
            Cell::Int(self.count as i64),
            Cell::Num(self.a_f),
            Cell::Num(self.ratio),
            Cell::Num(self.bound),
            Cell::Bool(self.pass),
        ]
    }
}

pub fn equidist(cfg: &Config) -> Result<Vec<EquidistRow>, CliError> {
    let f = cfg.map()?;
    let points = match (&cfg.experiment.points, cfg.experiment.grid) {
        (Some(p), _) => p.clone(),
        (None, Some(g)) => (0..g)
            .flat_map(|i| (0..g).map(move |j| vec![i as f64 / g as f64, j as f64 / g as f64]))
            .collect(),
        (None, None) => vec![vec![0.0; f.dimension()]],
    };
    let radii = need(&cfg.experiment.radii, "radii")?;
    let mut rows = Vec::new();
    for p in &points {
        for &r in &radii {
            let rep = equidist_check(f, p, r)?;
            rows.push(EquidistRow {
                map: rep.map,
                p: rep.p,
                radius: rep.radius,
                count: rep.count,
                a_f: rep.a_f,
                ratio: rep.ratio,
                bound: rep.bound,
                pass: rep.pass,
            });
        }
    }
    Ok(rows)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoareaRow {
    pub map: String,
    pub h: f64,
    pub lhs: f64,
    pub rhs: f64,
    pub rel_error: f64,
}

impl Record for CoareaRow {
    fn columns() -> &'static [&'static str] {
        &["map", "h", "lhs", "rhs", "rel_error"]
    }

    fn cells(&self) -> Vec<Cell> {
        vec![
            Cell::Text(self.map.clone()),
            Cell::Num(self.h),
            Cell::Num(self.lhs),
            Cell::Num(self.rhs),
            Cell::Num(self.rel_error),
        ]
    }
}

pub fn coarea(cfg: &Config) -> Result<Vec<CoareaRow>, CliError> {
    let f = cfg.map()?;
    let ring = need(&cfg.experiment.ring, "ring")?;
    let g = LipFactor::ring_bump(&f.source_space(), &ring.center, ring.radius, ring.width);
    let mut rows = Vec::new();
    for h in need(&cfg.experiment.steps, "steps")? {
        let rep = coarea_check(f, &g, h)?;
        rows.push(CoareaRow {
            map: f.name(),
            h,
            lhs: rep.lhs,
            rhs: rep.rhs,
            rel_error: rep.rel_error,
        });
    }
    Ok(rows)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FlatNormRow {
    pub dim: usize,
    pub mass: f64,
    pub flat_norm: f64,
    pub dual_value: f64,
    pub witness_mass: f64,
    pub residual_mass: f64,
}

impl Record for FlatNormRow {
    fn columns() -> &'static [&'static str] {
        &["dim", "mass", "flat_norm", "dual_value", "witness_mass", "residual_mass"]
    }

    fn cells(&self) -> Vec<Cell> {
        vec![
            Cell::Int(self.dim as i64),
            Cell::Num(self.mass),
            Cell::Num(self.flat_norm),
            Cell::Num(self.dual_value),
            Cell::Num(self.witness_mass),
            Cell::Num(self.residual_mass),
        ]
    }
}

pub fn flatnorm(cfg: &Config, base: &Path) -> Result<Vec<FlatNormRow>, CliError> {
    let built = cfg.build_complex(base)?;
    let t = built.current(&need(&cfg.experiment.current, "current")?, base)?;
    let region = cfg
        .experiment
        .region
        .as_ref()
        .map(|b| CellRegion::ball(built.complex(), &b.center, b.radius));
    let d = flat_norm(&t, region.as_ref())?;
    let cells = region.as_ref().and_then(|r| r.cells(t.dim()));
    Ok(vec![FlatNormRow {
        dim: t.dim(),
        mass: t.mass(cells),
        flat_norm: d.value,
        dual_value: d.dual_value,
        witness_mass: d.witness.mass(None),
        residual_mass: d.residual.mass(None),
    }])
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PullbackRow {
    pub map: String,
    pub dim: usize,
    pub target_mass: f64,
    pub source_cells: usize,
    pub pulled_terms: usize,
    pub pulled_mass: f64,
    /// `d f^* T = f^* d T` on cells whose cofaces are all lifted.
    pub boundary_commutes: bool,
}

impl Record for PullbackRow {
    fn columns() -> &'static [&'static str] {
        &["map", "dim", "target_mass", "source_cells", "pulled_terms", "pulled_mass", "boundary_commutes"]
    }

    fn cells(&self) -> Vec<Cell> {
        vec![
            Cell::Text(self.map.clone()),
            Cell::Int(self.dim as i64),
            Cell::Num(self.target_mass),
            Cell::Int(self.source_cells as i64),
            Cell::Int(self.pulled_terms as i64),
            Cell::Num(self.pulled_mass),
            Cell::Bool(self.boundary_commutes),
        ]
    }
}

fn window_of(cfg: &Config) -> Window {
    match &cfg.experiment.window {
        Some(b) => Window::ball(&b.center, b.radius),
        None => Window::Whole,
    }
}

pub fn pullback(cfg: &Config, base: &Path) -> Result<Vec<PullbackRow>, CliError> {
    let f = cfg.map()?;
    let built = cfg.build_complex(base)?;
    let t = built.current(&need(&cfg.experiment.current, "current")?, base)?;
    let lift = lift_complex(f, built.complex(), &window_of(cfg))?;
    let pulled = lift.pull_back(&t)?;
    let boundary_commutes = if t.dim() == 0 {
        true
    } else {
        let inner = lift.interior_cells(t.dim() - 1);
        pulled.boundary()?.restrict_cells(inner) == lift.pull_back(&t.boundary()?)?.restrict_cells(inner)
    };
    Ok(vec![PullbackRow {
        map: f.name(),
        dim: t.dim(),
        target_mass: t.mass(None),
        source_cells: lift.source().num_cells(t.dim()),
        pulled_terms: pulled.terms().count(),
        pulled_mass: pulled.mass(None),
        boundary_commutes,
    }])
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DualityRow {
    pub sample: usize,
    pub center: Vec<f64>,
    pub lhs: f64,
    pub rhs: f64,
    pub abs_diff: f64,
    pub translates: usize,
}

impl Record for DualityRow {
    fn columns() -> &'static [&'static str] {
        &["sample", "center", "lhs", "rhs", "abs_diff", "translates"]
    }

    fn cells(&self) -> Vec<Cell> {
        vec![
            Cell::Int(self.sample as i64),
            Cell::Text(format_point(&self.center)),
            Cell::Num(self.lhs),
            Cell::Num(self.rhs),
            Cell::Num(self.abs_diff),
            Cell::Int(self.translates as i64),
        ]
    }
}

/// Random affine tensor forms cut off by a tent, paired against the configured current.
pub fn duality(cfg: &Config, base: &Path, seed: u64) -> Result<Vec<DualityRow>, CliError> {
    let f = cfg.map()?;
    let built = cfg.build_complex(base)?;
    let t = built.current(&need(&cfg.experiment.current, "current")?, base)?;
    let radius = cfg.experiment.radius.unwrap_or(0.8);
    let samples = cfg.experiment.pairs.unwrap_or(10);
    let n = f.dimension();
    let e = Space::Euclidean(n);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rows = Vec::with_capacity(samples);
    for sample in 0..samples {
        let center: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        let mut factors = vec![LipFactor::tent(&e, &center, radius)];
        for _ in 0..t.dim() {
            factors.push(LipFactor::affine((0..n).map(|_| rng.random_range(-2.0..2.0)).collect(), rng.random_range(-1.0..1.0)));
        }
        let w = TensorForm::simple(&e, factors)?;
        let r = duality_check(f, &t, &w, &Window::ball(&center, radius))?;
        rows.push(DualityRow {
            sample,
            center,
            lhs: r.lhs,
            rhs: r.rhs,
            abs_diff: r.abs_diff,
            translates: r.translates,
        });
    }
    Ok(rows)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeparationRow {
    #[serde(rename = "R")]
    pub radius: f64,
    pub mass_1: f64,
    pub mass_2: f64,
    pub separation: f64,
    pub mass_fit: f64,
    pub separation_fit: f64,
}

impl Record for SeparationRow {
    fn columns() -> &'static [&'static str] {
        &["R", "mass_1", "mass_2", "separation", "mass_fit", "separation_fit"]
    }

    fn cells(&self) -> Vec<Cell> {
        vec![
            Cell::Num(self.radius),
            Cell::Num(self.mass_1),
            Cell::Num(self.mass_2),
            Cell::Num(self.separation),
            Cell::Num(self.mass_fit),
            Cell::Num(self.separation_fit),
        ]
    }
}

pub fn separation(cfg: &Config, base: &Path) -> Result<Vec<SeparationRow>, CliError> {
    let f = cfg.map()?;
    let built = cfg.build_complex(base)?;
    let t1 = built.current(&cfg.experiment.current.clone().unwrap_or(CurrentSpec::Horizontal { row: 0 }), base)?;
    let t2 = built.current(&cfg.experiment.second.clone().unwrap_or(CurrentSpec::Vertical { col: 0 }), base)?;
    let rep = separation_experiment(f, &t1, &t2, &need(&cfg.experiment.radii, "radii")?)?;
    Ok(rep
        .rows
        .iter()
        .map(|r| SeparationRow {
            radius: r.radius,
            mass_1: r.mass_1,
            mass_2: r.mass_2,
            separation: r.separation,
            mass_fit: rep.mass_exponent,
            separation_fit: rep.separation_exponent,
        })
        .collect())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Betti {
    pub b0: usize,
    pub b1: usize,
    pub b2: usize,
}

impl Record for Betti {
    const SINGLE: bool = true;

    fn columns() -> &'static [&'static str] {
        &["b0", "b1", "b2"]
    }

    fn cells(&self) -> Vec<Cell> {
        vec![Cell::Int(self.b0 as i64), Cell::Int(self.b1 as i64), Cell::Int(self.b2 as i64)]
    }
}

pub fn homology(cfg: &Config, base: &Path) -> Result<Vec<Betti>, CliError> {
    let built = cfg.build_complex(base)?;
    let k = built.complex();
    if k.top_dim() > 2 {
        return Err(CliError::Usage("homology reports cover complexes of dimension at most two".into()));
    }
    let b = |d: usize| if d <= k.top_dim() { homology_rank(k, d) } else { 0 };
    Ok(vec![Betti {
        b0: b(0),
        b1: b(1),
        b2: b(2),
    }])
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BilipRow {
    pub map: String,
    pub y: Vec<f64>,
    pub r: f64,
    pub q: usize,
    pub l: f64,
    pub pairs: usize,
    pub min_ratio: f64,
    pub max_ratio: f64,
    pub lower_bound: f64,
    pub upper_bound: f64,
    pub pass: bool,
}

impl Record for BilipRow {
    fn columns() -> &'static [&'static str] {
        &["map", "y", "r", "Q", "L", "pairs", "min_ratio", "max_ratio", "lower_bound", "upper_bound", "pass"]
    }

    fn cells(&self) -> Vec<Cell> {
        vec![
            Cell::Text(self.map.clone()),
            Cell::Text(format_point(&self.y)),
            Cell::Num(self.r),
            Cell::Int(self.q as i64),
            Cell::Num(self.l),
            Cell::Int(self.pairs as i64),
            Cell::Num(self.min_ratio),
            Cell::Num(self.max_ratio),
            Cell::Num(self.lower_bound),
            Cell::Num(self.upper_bound),
            Cell::Bool(self.pass),
        ]
    }
}

pub fn qvalued(cfg: &Config, seed: u64) -> Result<Vec<BilipRow>, CliError> {
    let f = cfg.map()?;
    let y = cfg.experiment.point.clone().unwrap_or_else(|| vec![0.0; f.dimension()]);
    let r = match cfg.experiment.radius {
        Some(r) => r,
        None => f.spread_limit(&y).min(1.0),
    };
    let pairs = cfg.experiment.pairs.unwrap_or(500);
    let rep = bilip_check(f, &y, r, pairs, seed)?;
    Ok(vec![BilipRow {
        map: f.name(),
        y,
        r,
        q: rep.q,
        l: rep.l,
        pairs: rep.pairs,
        min_ratio: rep.min_ratio,
        max_ratio: rep.max_ratio,
        lower_bound: rep.lower_bound,
        upper_bound: rep.upper_bound,
        pass: rep.pass,
    }])
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FillingRow {
    pub samples: usize,
    pub constant: f64,
    pub min_ratio: f64,
    pub max_ratio: f64,
}

impl Record for FillingRow {
    fn columns() -> &'static [&'static str] {
        &["samples", "constant", "min_ratio", "max_ratio"]
    }

    fn cells(&self) -> Vec<Cell> {
        vec![
            Cell::Int(self.samples as i64),
            Cell::Num(self.constant),
            Cell::Num(self.min_ratio),
            Cell::Num(self.max_ratio),
        ]
    }
}

pub fn filling(cfg: &Config, base: &Path, seed: u64) -> Result<Vec<FillingRow>, CliError> {
    let built = cfg.build_complex(base)?;
    let dim = cfg.experiment.dimension.unwrap_or(1);
    let mut rows = Vec::new();
    for samples in cfg.experiment.samples.clone().unwrap_or_else(|| vec![50]) {
        let est = filling_constant_estimate(built.complex(), dim, samples, seed)?;
        rows.push(FillingRow {
            samples,
            constant: est.constant,
            min_ratio: est.ratios.iter().copied().fold(f64::INFINITY, f64::min),
            max_ratio: est.ratios.iter().copied().fold(0.0, f64::max),
        });
    }
    Ok(rows)
}

/// Map name helper for manifests.
pub fn describe_map(cfg: &Config) -> Option<String> {
    cfg.map.as_ref().map(BldMap::name)
}
