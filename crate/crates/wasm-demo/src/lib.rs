//! Browser bindings: draw zones, probe a point, compare a ray against the
//! integer lattice. Results are returned as JSON strings.

use std::cell::RefCell;

use brillouin_core::arrangement::Arrangement;
use brillouin_core::geom::{rat_string, to_f64, BigRat, QPoint};
use brillouin_core::lattice::{integer_window, perturb, GeneratorSet, PerturbationConfig};
use brillouin_core::metrics::{ray_profile, zone_reports};
use serde::Serialize;
use wasm_bindgen::prelude::*;

const SCALE: i64 = 10_000;

type Key = (i64, i64, u64);

thread_local! {
    static CACHE: RefCell<Option<(Key, Arrangement)>> = const { RefCell::new(None) };
}

fn generators(m: i64, q: i64, seed: u64) -> Result<GeneratorSet, JsError> {
    let g = if q == 0 {
        integer_window(m)?
    } else {
        perturb(&PerturbationConfig { m, p: SCALE, q, seed })?
    };
    Ok(g)
}

fn with_arrangement<T>(m: i64, q: i64, seed: u64, f: impl FnOnce(&Arrangement) -> T) -> Result<T, JsError> {
    CACHE.with(|c| {
        let mut c = c.borrow_mut();
        if c.as_ref().map(|(k, _)| *k) != Some((m, q, seed)) {
            let arr = Arrangement::build_default(&generators(m, q, seed)?)?;
            *c = Some(((m, q, seed), arr));
        }
        Ok(f(&c.as_ref().expect("just built").1))
    })
}

#[derive(Serialize)]
struct FaceOut {
    depth: usize,
    polygon: Vec<[f64; 2]>,
}

#[derive(Serialize)]
struct ZoneOut {
    k: usize,
    area: String,
    area_float: f64,
    perimeter: f64,
    distortion: f64,
    chambers: usize,
    reliable: bool,
}

#[derive(Serialize)]
struct ZonesOut {
    reliable_kmax: u64,
    faces: Vec<FaceOut>,
    zones: Vec<ZoneOut>,
}

/// Faces of depth below `kmax` with their polygons, plus one summary row
/// per zone.
#[wasm_bindgen]
pub fn zones(m: i32, q: i32, seed: u32, kmax: usize) -> Result<String, JsError> {
    with_arrangement(m.into(), q.into(), seed.into(), |arr| {
        let faces = arr
            .faces()
            .iter()
            .filter(|f| f.depth < kmax && !f.on_clip_boundary)
            .map(|f| FaceOut {
                depth: f.depth,
                polygon: f.polygon.vertices().iter().map(QPoint::to_f64).collect(),
            })
            .collect();
        let zones = zone_reports(arr, kmax)?
            .into_iter()
            .map(|z| ZoneOut {
                k: z.k,
                area: rat_string(&z.area),
                area_float: to_f64(&z.area),
                perimeter: z.outer_perimeter,
                distortion: z.distortion,
                chambers: z.n_chambers,
                reliable: z.reliable,
            })
            .collect();
        let out = ZonesOut {
            reliable_kmax: arr.reliability().kmax,
            faces,
            zones,
        };
        Ok(serde_json::to_string(&out)?)
    })?
}

#[derive(Serialize)]
struct ProbeOut {
    x: String,
    y: String,
    depth: usize,
    zone: usize,
    on_boundary: bool,
}

/// Depth of the point `(x, y)`, read exactly from its binary value.
#[wasm_bindgen]
pub fn probe(m: i32, q: i32, seed: u32, x: f64, y: f64) -> Result<String, JsError> {
    let g = generators(m.into(), q.into(), seed.into())?;
    let (Some(bx), Some(by)) = (BigRat::from_float(x), BigRat::from_float(y)) else {
        return Err(JsError::new("coordinates must be finite"));
    };
    let pt = QPoint::new(bx, by);
    let depth = g.depth_of_point(&pt);
    let out = ProbeOut {
        x: rat_string(&pt.x),
        y: rat_string(&pt.y),
        depth,
        zone: depth + 1,
        on_boundary: g.on_some_bisector(&pt),
    };
    Ok(serde_json::to_string(&out)?)
}

#[derive(Serialize)]
struct RayOut {
    u: [i64; 2],
    k: usize,
    alpha: String,
    beta: String,
    alpha_distance: f64,
    beta_distance: f64,
    gap_distance: f64,
}

/// The `k`-th outer crossing along the integer direction `u` for the
/// integer lattice (`alpha`) and the chosen set (`beta`).
#[wasm_bindgen]
pub fn ray(m: i32, q: i32, seed: u32, ux: i32, uy: i32, k: usize) -> Result<String, JsError> {
    let u = [ux.into(), uy.into()];
    let a = ray_profile(&integer_window(m.into())?, u)?;
    let b = ray_profile(&generators(m.into(), q.into(), seed.into())?, u)?;
    let (Some(alpha), Some(beta)) = (a.alpha(k), b.alpha(k)) else {
        return Err(JsError::new("k exceeds the number of crossings"));
    };
    let norm = a.norm_u();
    let out = RayOut {
        u,
        k,
        alpha_distance: to_f64(&alpha) * norm,
        beta_distance: to_f64(&beta) * norm,
        gap_distance: (to_f64(&alpha) - to_f64(&beta)).abs() * norm,
        alpha: rat_string(&alpha),
        beta: rat_string(&beta),
    };
    Ok(serde_json::to_string(&out)?)
}
