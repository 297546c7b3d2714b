//! Browser demo: lattice counts, winding fibers and flat-norm fillings.

use bldlab::equidist::equidist_check;
use bldlab::flatnorm::flat_norm;
use bldlab::mesh::disk_mesh;
use bldlab::{BldMap, Lattice, Window};
use serde::{Deserialize, Serialize};
use wasm_bindgen::prelude::*;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CountRow {
    pub radius: f64,
    pub count: u64,
    pub a_f: f64,
    pub ratio: f64,
    pub bound: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Counts {
    pub rows: Vec<CountRow>,
    /// Preimages in the largest ball, for plotting.
    pub points: Vec<[f64; 2]>,
}

/// Fiber counts of the unit torus cover over `p` in balls of radius `1..=r_max`.
pub fn lattice_counts(px: f64, py: f64, r_max: u32) -> Result<Counts, String> {
    if r_max == 0 || r_max > 60 {
        return Err("radius must be between 1 and 60".into());
    }
    let f = BldMap::torus_cover(Lattice::unit(2));
    let p = [px, py];
    let mut rows = Vec::new();
    for r in 1..=r_max {
        let rep = equidist_check(&f, &p, r as f64).map_err(|e| e.to_string())?;
        rows.push(CountRow {
            radius: rep.radius,
            count: rep.count,
            a_f: rep.a_f,
            ratio: rep.ratio,
            bound: rep.bound,
        });
    }
    let r = r_max as f64;
    let points = f
        .fiber(&p, &Window::ball(&[0.0, 0.0], r))
        .map_err(|e| e.to_string())?
        .into_iter()
        .map(|e| [e.point[0], e.point[1]])
        .collect();
    Ok(Counts { rows, points })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Preimage {
    pub x: f64,
    pub y: f64,
    pub index: u32,
}

/// Fiber of the degree-`d` winding map over `(x, y)`.
pub fn winding_fiber(degree: u32, x: f64, y: f64) -> Result<Vec<Preimage>, String> {
    let f = BldMap::winding(degree).map_err(|e| e.to_string())?;
    let fiber = f.fiber(&[x, y], &Window::Whole).map_err(|e| e.to_string())?;
    Ok(fiber
        .into_iter()
        .map(|e| Preimage {
            x: e.point[0],
            y: e.point[1],
            index: e.index,
        })
        .collect())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Filling {
    pub radius: f64,
    pub mass: f64,
    pub flat_norm: f64,
    /// Triangles carrying the witness, with their coefficients.
    pub triangles: Vec<([[f64; 2]; 3], f64)>,
    /// Edges of the residual chain.
    pub residual: Vec<([[f64; 2]; 2], f64)>,
}

/// Flat norm of ring `ring` on a disk mesh of spacing `h`, with its decomposition.
pub fn circle_flat_norm(ring: usize, h: f64) -> Result<Filling, String> {
    if !(0.02..=0.5).contains(&h) {
        return Err("spacing must be between 0.02 and 0.5".into());
    }
    let d = disk_mesh(1.5, h).map_err(|e| e.to_string())?;
    let t = d.ring_cycle(ring).map_err(|e| e.to_string())?;
    let dec = flat_norm(&t, None).map_err(|e| e.to_string())?;
    let k = &d.complex;
    let pt = |v: &Vec<f64>| [v[0], v[1]];
    let triangles = dec
        .witness
        .terms()
        .filter(|(_, a)| a.abs() > 1e-9)
        .map(|(i, a)| {
            let l = k.lift(2, i);
            ([pt(&l[0]), pt(&l[1]), pt(&l[2])], *a)
        })
        .collect();
    let residual = dec
        .residual
        .terms()
        .filter(|(_, a)| a.abs() > 1e-9)
        .map(|(i, a)| {
            let l = k.lift(1, i);
            ([pt(&l[0]), pt(&l[1])], *a)
        })
        .collect();
    Ok(Filling {
        radius: d.ring_radius(ring),
        mass: t.mass(None),
        flat_norm: dec.value,
        triangles,
        residual,
    })
}

fn to_js<T: Serialize>(r: Result<T, String>) -> Result<String, JsValue> {
    r.and_then(|v| serde_json::to_string(&v).map_err(|e| e.to_string()))
        .map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen(js_name = latticeCounts)]
pub fn lattice_counts_js(px: f64, py: f64, r_max: u32) -> Result<String, JsValue> {
    to_js(lattice_counts(px, py, r_max))
}

#[wasm_bindgen(js_name = windingFiber)]
pub fn winding_fiber_js(degree: u32, x: f64, y: f64) -> Result<String, JsValue> {
    to_js(winding_fiber(degree, x, y))
}

#[wasm_bindgen(js_name = circleFlatNorm)]
pub fn circle_flat_norm_js(ring: usize, h: f64) -> Result<String, JsValue> {
    to_js(circle_flat_norm(ring, h))
}
