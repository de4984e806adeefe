//! CSV and JSON writers. Floats use 17 significant digits and exact values
//! are written as `"num/den"`, so every field round-trips.

use std::io::{self, Write};

use serde::Serialize;

use crate::arrangement::{Arrangement, Stats};
use crate::geom::{rat_string, to_f64, BigRat};
use crate::lattice::GeneratorSet;
use crate::metrics::{StabilityGap, ZoneReport};

pub const ZONES_HEADER: &str = "k,r,R,W,area_num,area_den,area_float,cum_area_over_k,perimeter,distortion,n_chambers,max_chamber_area,max_chamber_diameter,reliable";

pub const RAYS_HEADER: &str = "u_x,u_y,k,alpha,beta,gap,alpha_dist,beta_dist,gap_dist";

/// Formats a float with 17 significant digits.
pub fn float_field(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn write_zones_csv<W: Write>(mut w: W, reports: &[ZoneReport]) -> io::Result<()> {
    writeln!(w, "{ZONES_HEADER}")?;
    for z in reports {
        writeln!(
            w,
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            z.k,
            float_field(z.r),
            float_field(z.big_r),
            float_field(z.w),
            z.area.numer(),
            z.area.denom(),
            float_field(to_f64(&z.area)),
            rat_string(&z.cum_area_over_k),
            float_field(z.outer_perimeter),
            float_field(z.distortion),
            z.n_chambers,
            rat_string(&z.max_chamber_area),
            float_field(z.max_chamber_diameter),
            z.reliable,
        )?;
    }
    Ok(())
}

/// One row per direction. `alpha`, `beta` and `gap` are exact parameters
/// along `u`; the `_dist` columns are the matching Euclidean distances.
pub fn write_rays_csv<W: Write>(mut w: W, gap: &StabilityGap) -> io::Result<()> {
    writeln!(w, "{RAYS_HEADER}")?;
    for d in &gap.per_direction {
        let norm = ((d.u[0] * d.u[0] + d.u[1] * d.u[1]) as f64).sqrt();
        writeln!(
            w,
            "{},{},{},{},{},{},{},{},{}",
            d.u[0],
            d.u[1],
            gap.k,
            rat_string(&d.alpha),
            rat_string(&d.beta),
            rat_string(&d.gap),
            float_field(to_f64(&d.alpha) * norm),
            float_field(to_f64(&d.beta) * norm),
            float_field(d.gap_distance),
        )?;
    }
    Ok(())
}

#[derive(Serialize)]
struct FaceJson {
    depth: usize,
    on_clip_boundary: bool,
    area: String,
    vertices: Vec<usize>,
}

#[derive(Serialize)]
struct ReliabilityJson {
    m: i64,
    tau: String,
    kmax: u64,
}

#[derive(Serialize)]
struct ArrangementJson<'a> {
    generators: &'a GeneratorSet,
    clip_half_width: String,
    reliability: ReliabilityJson,
    stats: Stats,
    vertices: Vec<[String; 2]>,
    faces: Vec<FaceJson>,
}

fn rat_pair(x: &BigRat, y: &BigRat) -> [String; 2] {
    [rat_string(x), rat_string(y)]
}

/// Serializes generators, vertices (exact strings), faces (vertex ids in
/// counterclockwise order) and summary stats.
pub fn arrangement_json(arr: &Arrangement) -> serde_json::Value {
    let rel = arr.reliability();
    let doc = ArrangementJson {
        generators: arr.generators(),
        clip_half_width: rat_string(arr.clip_half_width()),
        reliability: ReliabilityJson {
            m: rel.m,
            tau: rat_string(&rel.tau),
            kmax: rel.kmax,
        },
        stats: arr.stats(),
        vertices: arr.vertices().iter().map(|v| rat_pair(&v.x, &v.y)).collect(),
        faces: arr
            .faces()
            .iter()
            .map(|f| FaceJson {
                depth: f.depth,
                on_clip_boundary: f.on_clip_boundary,
                area: rat_string(&f.area),
                vertices: f.boundary.clone(),
            })
            .collect(),
    };
    serde_json::to_value(doc).expect("plain data serializes")
}

pub fn write_json<W: Write, T: Serialize>(w: W, value: &T) -> io::Result<()> {
    let mut w = w;
    serde_json::to_writer_pretty(&mut w, value)?;
    writeln!(w)
}
