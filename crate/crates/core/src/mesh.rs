//! Standard triangulations: flat tori, the pillowcase and planar disks.

use std::collections::HashMap;
use std::f64::consts::TAU;
use std::sync::Arc;

use crate::currents::{SimplicialComplex, SimplicialCurrent};
use crate::error::{usage, Error, Result};
use crate::spaces::{Lattice, Space};

/// `N x N` grid triangulation of a flat 2-torus (each square cut along its diagonal).
#[derive(Clone, Debug)]
pub struct TorusMesh {
    pub complex: Arc<SimplicialComplex>,
    pub n: usize,
}

pub fn torus_mesh(lattice: &Lattice, n: usize) -> Result<TorusMesh> {
    if lattice.dim() != 2 {
        return Err(usage("torus meshes are two-dimensional"));
    }
    let idx = |i: usize, j: usize| (i % n) + n * (j % n);
    let mut vertices = Vec::with_capacity(n * n);
    for j in 0..n {
        for i in 0..n {
            vertices.push(lattice.to_cartesian(&[i as f64 / n as f64, j as f64 / n as f64]));
        }
    }
    let mut cells = Vec::new();
    for j in 0..n {
        for i in 0..n {
            cells.push(vec![idx(i, j), idx(i + 1, j)]);
            cells.push(vec![idx(i, j), idx(i, j + 1)]);
            cells.push(vec![idx(i, j), idx(i + 1, j + 1)]);
        }
    }
    for j in 0..n {
        for i in 0..n {
            cells.push(vec![idx(i, j), idx(i + 1, j), idx(i + 1, j + 1)]);
            cells.push(vec![idx(i, j), idx(i + 1, j + 1), idx(i, j + 1)]);
        }
    }
    let complex = SimplicialComplex::new(Space::FlatTorus(lattice.clone()), vertices, cells)?;
    Ok(TorusMesh { complex, n })
}

impl TorusMesh {
    pub fn vertex(&self, i: i64, j: i64) -> usize {
        let n = self.n as i64;
        (i.rem_euclid(n) + n * j.rem_euclid(n)) as usize
    }

    /// 1-chain along a closed grid path; consecutive points must share an edge.
    pub fn path_chain(&self, path: &[(i64, i64)]) -> Result<SimplicialCurrent> {
        path_chain(&self.complex, path.windows(2).map(|w| (self.vertex(w[0].0, w[0].1), self.vertex(w[1].0, w[1].1))))
    }

    /// The closed geodesic along grid row `row`, oriented along the first basis vector.
    pub fn horizontal_cycle(&self, row: i64) -> SimplicialCurrent {
        let path: Vec<(i64, i64)> = (0..=self.n as i64).map(|i| (i, row)).collect();
        self.path_chain(&path).expect("grid row")
    }

    pub fn vertical_cycle(&self, col: i64) -> SimplicialCurrent {
        let path: Vec<(i64, i64)> = (0..=self.n as i64).map(|j| (col, j)).collect();
        self.path_chain(&path).expect("grid column")
    }

    /// All triangles with coefficient one.
    pub fn fundamental_cycle(&self) -> SimplicialCurrent {
        let k = &self.complex;
        SimplicialCurrent::from_terms(k, 2, (0..k.num_cells(2)).map(|i| (i, 1.0))).expect("triangles")
    }
}

fn path_chain(
    complex: &Arc<SimplicialComplex>,
    steps: impl Iterator<Item = (usize, usize)>,
) -> Result<SimplicialCurrent> {
    let mut terms = Vec::new();
    for (a, b) in steps {
        let (cell, sign) = complex
            .find_cell(&[a, b])
            .ok_or_else(|| usage(format!("no edge between vertices {a} and {b}")))?;
        terms.push((cell, sign as f64));
    }
    SimplicialCurrent::from_terms(complex, 1, terms)
}

/// Pillowcase triangulation from the fundamental domain `[0,1] x [0,1/2]`
/// in lattice coordinates; the four cone points are vertices.
/// Every angle at a cone point is a quarter of its cone angle.
#[derive(Clone, Debug)]
pub struct PillowMesh {
    pub complex: Arc<SimplicialComplex>,
    pub n: usize,
    grid: Vec<Vec<usize>>,
}

pub fn pillowcase_mesh(lattice: &Lattice, n: usize) -> Result<PillowMesh> {
    if lattice.dim() != 2 || n < 2 || n % 2 != 0 {
        return Err(usage("pillowcase meshes need a 2-dimensional lattice and an even resolution"));
    }
    let space = Space::Pillowcase(lattice.clone());
    let rows = n / 2;
    let mut vertices: Vec<Vec<f64>> = Vec::new();
    let mut keys: HashMap<(i64, i64), usize> = HashMap::new();
    let mut grid = vec![vec![0usize; rows + 1]; n + 1];
    for (i, column) in grid.iter_mut().enumerate() {
        for (j, slot) in column.iter_mut().enumerate() {
            let raw = lattice.to_cartesian(&[i as f64 / n as f64, j as f64 / n as f64]);
            let canon = space.canonical_coords(&raw);
            let c = lattice.to_lattice(&canon);
            let key = (
                (c[0] * 2.0 * n as f64).round() as i64 % (2 * n as i64),
                (c[1] * 2.0 * n as f64).round() as i64 % (2 * n as i64),
            );
            *slot = *keys.entry(key).or_insert_with(|| {
                vertices.push(canon);
                vertices.len() - 1
            });
        }
    }
    let cone = |i: usize, j: usize| (j == 0 || j == rows) && i % (n / 2) == 0;
    let mut cells = Vec::new();
    for j in 0..rows {
        for i in 0..n {
            let (a, b, c, d) = (grid[i][j], grid[i + 1][j], grid[i + 1][j + 1], grid[i][j + 1]);
            if cone(i + 1, j) || cone(i, j + 1) {
                cells.push(vec![a, b, d]);
                cells.push(vec![b, c, d]);
            } else {
                cells.push(vec![a, b, c]);
                cells.push(vec![a, c, d]);
            }
        }
    }
    let complex = SimplicialComplex::new(space, vertices, cells)?;
    Ok(PillowMesh { complex, n, grid })
}

impl PillowMesh {
    /// Vertex at grid position `(i, j)` of the fundamental domain.
    pub fn vertex(&self, i: usize, j: usize) -> usize {
        self.grid[i][j]
    }

    pub fn fundamental_cycle(&self) -> SimplicialCurrent {
        let k = &self.complex;
        SimplicialCurrent::from_terms(k, 2, (0..k.num_cells(2)).map(|i| (i, 1.0))).expect("triangles")
    }

    /// 1-chain along a closed path of fundamental-domain grid positions.
    pub fn path_chain(&self, path: &[(usize, usize)]) -> Result<SimplicialCurrent> {
        path_chain(&self.complex, path.windows(2).map(|w| (self.vertex(w[0].0, w[0].1), self.vertex(w[1].0, w[1].1))))
    }
}

/// Planar disk triangulated by concentric rings of spacing `h`.
#[derive(Clone, Debug)]
pub struct DiskMesh {
    pub complex: Arc<SimplicialComplex>,
    pub h: f64,
    /// Vertex indices of each ring in counterclockwise order; ring 0 is the center.
    pub rings: Vec<Vec<usize>>,
}

pub fn disk_mesh(radius: f64, h: f64) -> Result<DiskMesh> {
    if !(radius > 0.0 && h > 0.0 && h < radius) {
        return Err(usage("disk mesh needs 0 < h < radius"));
    }
    let m = (radius / h).round() as usize;
    let mut vertices = vec![vec![0.0, 0.0]];
    let mut rings = vec![vec![0usize]];
    for ring in 1..=m {
        let r = ring as f64 * h;
        let count = ((TAU * r / h).round() as usize).max(6);
        let start = vertices.len();
        for i in 0..count {
            let t = TAU * i as f64 / count as f64;
            vertices.push(vec![r * t.cos(), r * t.sin()]);
        }
        rings.push((start..start + count).collect());
    }
    let angle = |v: &Vec<f64>| v[1].atan2(v[0]).rem_euclid(TAU);
    let mut cells = Vec::new();
    let mut push = |a: usize, b: usize, c: usize, vertices: &[Vec<f64>]| {
        let (p, q, s) = (&vertices[a], &vertices[b], &vertices[c]);
        let area = (q[0] - p[0]) * (s[1] - p[1]) - (q[1] - p[1]) * (s[0] - p[0]);
        if area > 0.0 {
            cells.push(vec![a, b, c]);
        } else {
            cells.push(vec![a, c, b]);
        }
    };
    for i in 0..rings[1].len() {
        let next = (i + 1) % rings[1].len();
        push(0, rings[1][i], rings[1][next], &vertices);
    }
    for ring in 1..m {
        let inner = &rings[ring];
        let outer = &rings[ring + 1];
        let (ni, no) = (inner.len(), outer.len());
        let (mut a, mut b) = (0usize, 0usize);
        while a < ni || b < no {
            let ta = if a < ni {
                let t = angle(&vertices[inner[(a + 1) % ni]]);
                if a + 1 == ni { TAU } else { t }
            } else {
                f64::INFINITY
            };
            let tb = if b < no {
                let t = angle(&vertices[outer[(b + 1) % no]]);
                if b + 1 == no { TAU } else { t }
            } else {
                f64::INFINITY
            };
            if ta <= tb {
                push(inner[a % ni], inner[(a + 1) % ni], outer[b % no], &vertices);
                a += 1;
            } else {
                push(inner[a % ni], outer[(b + 1) % no], outer[b % no], &vertices);
                b += 1;
            }
        }
    }
    let complex = SimplicialComplex::new(Space::Euclidean(2), vertices, cells)?;
    Ok(DiskMesh { complex, h, rings })
}

impl DiskMesh {
    /// Counterclockwise polygon along ring `m` as a 1-cycle.
    pub fn ring_cycle(&self, m: usize) -> Result<SimplicialCurrent> {
        let ring = self
            .rings
            .get(m)
            .filter(|r| r.len() > 1)
            .ok_or_else(|| Error::Usage(format!("no ring {m}")))?;
        path_chain(&self.complex, (0..ring.len()).map(|i| (ring[i], ring[(i + 1) % ring.len()])))
    }

    pub fn ring_radius(&self, m: usize) -> f64 {
        m as f64 * self.h
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn torus_mesh_counts() {
        let m = torus_mesh(&Lattice::unit(2), 6).unwrap();
        assert_eq!(m.complex.num_cells(0), 36);
        assert_eq!(m.complex.num_cells(1), 108);
        assert_eq!(m.complex.num_cells(2), 72);
        assert!(m.horizontal_cycle(0).is_cycle());
        assert!((m.vertical_cycle(3).mass(None) - 1.0).abs() < 1e-12);
        assert!(torus_mesh(&Lattice::unit(2), 5).is_err());
    }

    #[test]
    fn pillow_mesh_is_a_sphere() {
        let m = pillowcase_mesh(&Lattice::unit(2), 8).unwrap();
        let k = &m.complex;
        let euler = k.num_cells(0) as i64 - k.num_cells(1) as i64 + k.num_cells(2) as i64;
        assert_eq!(euler, 2);
        let t = m.fundamental_cycle();
        assert!(t.boundary().unwrap().is_zero());
        assert!((t.mass(None) - 0.5).abs() < 1e-12);
        for cone in k.space().cone_points() {
            assert!(k.vertices().iter().any(|v| k.space().dist(v, &cone) < 1e-12));
        }
    }

    #[test]
    fn disk_mesh_area_and_circle() {
        let d = disk_mesh(1.5, 0.05).unwrap();
        let area: f64 = d.complex.volumes(2).iter().sum();
        assert!((area - std::f64::consts::PI * 2.25).abs() < 0.01);
        let c = d.ring_cycle(20).unwrap();
        assert!(c.is_cycle());
        assert!((c.mass(None) - TAU).abs() < 1e-2);
        // every interior edge has two cofaces
        let k = &d.complex;
        let boundary_edges = (0..k.num_cells(1)).filter(|&e| k.cofaces(1, e).len() == 1).count();
        assert_eq!(boundary_edges, d.rings.last().unwrap().len());
    }
}
