//! Experiment configuration: `[space]`, `[map]`, `[complex]`, `[experiment]`.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use bldlab::currents::ComplexFile;
use bldlab::mesh::{disk_mesh, pillowcase_mesh, torus_mesh};
use bldlab::{BldMap, Lattice, SimplicialComplex, SimplicialCurrent, Space};
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub space: Option<Space>,
    pub map: Option<BldMap>,
    pub complex: Option<ComplexSpec>,
    pub experiment: ExperimentSpec,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ComplexSpec {
    TorusMesh { n: usize },
    PillowcaseMesh { n: usize },
    DiskMesh { radius: f64, h: f64 },
    /// JSON complex file, relative to the config.
    File { path: PathBuf },
}

/// A 1-cycle or chain on the configured complex.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum CurrentSpec {
    Horizontal { row: i64 },
    Vertical { col: i64 },
    /// Closed grid path of vertex positions on a torus mesh.
    Path { points: Vec<[i64; 2]> },
    /// Ring `index` of a disk mesh.
    Ring { index: usize },
    /// All top cells with coefficient one.
    Fundamental,
    /// JSON current file, relative to the config.
    File { path: PathBuf },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BallSpec {
    pub center: Vec<f64>,
    pub radius: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RingSpec {
    pub center: Vec<f64>,
    pub radius: f64,
    pub width: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    pub seed: Option<u64>,
    /// Explicit base points.
    pub points: Option<Vec<Vec<f64>>>,
    /// `g x g` grid of base points in the unit square.
    pub grid: Option<usize>,
    pub radii: Option<Vec<f64>>,
    pub steps: Option<Vec<f64>>,
    pub ring: Option<RingSpec>,
    pub current: Option<CurrentSpec>,
    pub second: Option<CurrentSpec>,
    pub region: Option<BallSpec>,
    pub window: Option<BallSpec>,
    pub point: Option<Vec<f64>>,
    pub radius: Option<f64>,
    pub pairs: Option<usize>,
    pub samples: Option<Vec<usize>>,
    pub dimension: Option<usize>,
}

impl Config {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(path.to_path_buf(), e))?;
        toml::from_str(&text).map_err(|e| CliError::Config(path.to_path_buf(), e.to_string()))
    }

    pub fn map(&self) -> Result<&BldMap, CliError> {
        self.map.as_ref().ok_or_else(|| CliError::Missing("[map]".into()))
    }

    /// Lattice of `[space]`, the unit lattice if absent.
    pub fn lattice(&self) -> Result<Lattice, CliError> {
        match &self.space {
            Some(Space::FlatTorus(l)) | Some(Space::Pillowcase(l)) => Ok(l.clone()),
            Some(Space::Euclidean(n)) => Ok(Lattice::unit(*n)),
            None => Ok(Lattice::unit(2)),
        }
    }

    pub fn build_complex(&self, base: &Path) -> Result<Built, CliError> {
        let spec = self.complex.as_ref().ok_or_else(|| CliError::Missing("[complex]".into()))?;
        let lattice = self.lattice()?;
        let built = match spec {
            ComplexSpec::TorusMesh { n } => {
                let m = torus_mesh(&lattice, *n)?;
                Built::Torus(m)
            }
            ComplexSpec::PillowcaseMesh { n } => Built::Pillow(pillowcase_mesh(&lattice, *n)?),
            ComplexSpec::DiskMesh { radius, h } => Built::Disk(disk_mesh(*radius, *h)?),
            ComplexSpec::File { path } => {
                let p = base.join(path);
                let text = std::fs::read_to_string(&p).map_err(|e| CliError::Io(p.clone(), e))?;
                let file: ComplexFile = serde_json::from_str(&text).map_err(|e| CliError::Config(p.clone(), e.to_string()))?;
                Built::Plain(SimplicialComplex::from_file(file)?)
            }
        };
        if let Some(space) = &self.space {
            if built.complex().space() != space {
                return Err(CliError::Usage(format!(
                    "complex lives in {} but [space] is {}",
                    built.complex().space(),
                    space
                )));
            }
        }
        Ok(built)
    }

    pub fn seed(&self) -> Result<u64, CliError> {
        self.experiment
            .seed
            .ok_or_else(|| CliError::Missing("[experiment] seed".into()))
    }
}

/// A complex together with the mesh helpers used to name cycles on it.
pub enum Built {
    Torus(bldlab::mesh::TorusMesh),
    Pillow(bldlab::mesh::PillowMesh),
    Disk(bldlab::mesh::DiskMesh),
    Plain(Arc<SimplicialComplex>),
}

impl Built {
    pub fn complex(&self) -> &Arc<SimplicialComplex> {
        match self {
            Built::Torus(m) => &m.complex,
            Built::Pillow(m) => &m.complex,
            Built::Disk(m) => &m.complex,
            Built::Plain(k) => k,
        }
    }

    pub fn current(&self, spec: &CurrentSpec, base: &Path) -> Result<SimplicialCurrent, CliError> {
        let wrong = |what: &str| CliError::Usage(format!("{what} needs a matching mesh kind"));
        Ok(match (spec, self) {
            (CurrentSpec::Horizontal { row }, Built::Torus(m)) => m.horizontal_cycle(*row),
            (CurrentSpec::Vertical { col }, Built::Torus(m)) => m.vertical_cycle(*col),
            (CurrentSpec::Path { points }, Built::Torus(m)) => {
                let path: Vec<(i64, i64)> = points.iter().map(|p| (p[0], p[1])).collect();
                m.path_chain(&path)?
            }
            (CurrentSpec::Ring { index }, Built::Disk(m)) => m.ring_cycle(*index)?,
            (CurrentSpec::Fundamental, b) => {
                let k = b.complex();
                let top = k.top_dim();
                SimplicialCurrent::from_terms(k, top, (0..k.num_cells(top)).map(|i| (i, 1.0)))?
            }
            (CurrentSpec::File { path }, b) => {
                let p = base.join(path);
                let text = std::fs::read_to_string(&p).map_err(|e| CliError::Io(p.clone(), e))?;
                let file = serde_json::from_str(&text).map_err(|e| CliError::Config(p.clone(), e.to_string()))?;
                SimplicialCurrent::from_file(b.complex(), &file)?
            }
            (CurrentSpec::Horizontal { .. }, _) => return Err(wrong("horizontal")),
            (CurrentSpec::Vertical { .. }, _) => return Err(wrong("vertical")),
            (CurrentSpec::Path { .. }, _) => return Err(wrong("path")),
            (CurrentSpec::Ring { .. }, _) => return Err(wrong("ring")),
        })
    }
}
