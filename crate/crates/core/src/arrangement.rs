//! Exact arrangement of Bragg lines inside an axis-aligned clip box.
//!
//! Construction computes every pairwise intersection, interns vertices by
//! exact coordinates (concurrent lines collapse to one vertex), cuts each
//! line into edges in order along it, and walks a half-edge structure to get
//! the faces. Each face is labelled with its depth: the number of generators
//! strictly closer than the origin to an interior point.

use std::cmp::Ordering;
use std::collections::HashMap;

use num_bigint::BigInt;
use num_traits::{Signed, Zero};

use crate::error::{Error, Result};
use crate::geom::{
    homogeneous, line_intersect_scaled, orient, rat, sqrt_f64, sum_spatial, BigRat, BisectorLine, ConvexPolygon,
    HomPoint, QPoint,
};
use crate::lattice::{GeneratorSet, ReliabilityBound};

#[cfg(feature = "parallel")]
use rayon::prelude::*;

#[derive(Clone, Debug)]
pub struct Face {
    pub polygon: ConvexPolygon,
    pub depth: usize,
    pub interior_witness: QPoint,
    pub on_clip_boundary: bool,
    /// Vertex ids counterclockwise, including vertices where the boundary
    /// runs straight through.
    pub boundary: Vec<usize>,
    pub area: BigRat,
}

/// An edge between two vertices. `line` is `None` on the clip box.
/// `left` is the face to the left of `ends[0] -> ends[1]`; `None` is outside
/// the box.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Edge {
    pub ends: [usize; 2],
    pub line: Option<usize>,
    pub left: Option<usize>,
    pub right: Option<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct Stats {
    pub n_lines: usize,
    pub n_lines_in_clip: usize,
    pub n_vertices: usize,
    pub n_edges: usize,
    pub n_faces: usize,
    pub max_multiplicity: usize,
}

/// Faces of one zone, with whether the finite window is known to get it
/// right.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Zone {
    pub k: usize,
    pub faces: Vec<usize>,
    pub reliable: bool,
}

#[derive(Clone, Debug)]
pub struct Arrangement {
    generators: GeneratorSet,
    lines: Vec<BisectorLine>,
    clip: BigRat,
    vertices: Vec<QPoint>,
    vertex_lines: Vec<Vec<u32>>,
    edges: Vec<Edge>,
    faces: Vec<Face>,
    reliability: ReliabilityBound,
    index: FaceIndex,
}

/// Clip half-width that keeps every reliable zone away from the box: the
/// outer-distance bound for the largest reliable `k` (with magnitude
/// `sqrt2 * q/p`) plus one, rounded up to a multiple of 1/4.
pub fn default_clip_half_width(g: &GeneratorSet) -> BigRat {
    clip_half_width_for(g, g.reliability().kmax as usize)
}

/// The same margin around zone `kmax` for any `kmax`.
pub fn clip_half_width_for(g: &GeneratorSet, kmax: usize) -> BigRat {
    let tau = g.q as f64 / g.scale as f64;
    let bound = (kmax as f64 / std::f64::consts::PI).sqrt()
        + std::f64::consts::SQRT_2 / 2.0
        + std::f64::consts::SQRT_2 * tau
        + 1.0;
    BigRat::new(((bound * 4.0).ceil() as i64).max(4).into(), 4.into())
}

struct HalfEdge {
    origin: usize,
    carrier: usize,
    dir: [i64; 2],
}

fn angle_cmp(a: [i64; 2], b: [i64; 2]) -> Ordering {
    let half = |d: [i64; 2]| if d[1] > 0 || (d[1] == 0 && d[0] > 0) { 0 } else { 1 };
    half(a).cmp(&half(b)).then_with(|| {
        let cross = a[0] as i128 * b[1] as i128 - a[1] as i128 * b[0] as i128;
        0.cmp(&cross)
    })
}

/// Where a line meets the closed box, as two distinct points, unless it
/// misses, touches a corner, or runs along a side.
fn clip_line(line: &BisectorLine, p: i64, h: &BigRat) -> Option<[QPoint; 2]> {
    let two_p = BigRat::from_integer(num_bigint::BigInt::from(2 * p));
    let a = BigRat::from_integer(line.a1().clone()) * &two_p;
    let b = BigRat::from_integer(line.a2().clone()) * &two_p;
    let c = BigRat::from_integer(line.c().clone());
    let neg_h = -h.clone();
    let mut pts: Vec<QPoint> = Vec::with_capacity(4);
    let mut push = |pt: QPoint| {
        if !pts.contains(&pt) {
            pts.push(pt);
        }
    };
    if !b.is_zero() {
        for xv in [&neg_h, h] {
            let y = (&c - &a * xv) / &b;
            if y.abs() <= *h {
                push(QPoint::new(xv.clone(), y));
            }
        }
    }
    if !a.is_zero() {
        for yv in [&neg_h, h] {
            let x = (&c - &b * yv) / &a;
            if x.abs() <= *h {
                push(QPoint::new(x, yv.clone()));
            }
        }
    }
    if pts.len() != 2 {
        return None;
    }
    let same_side = (pts[0].x == pts[1].x && pts[0].x.abs() == *h) || (pts[0].y == pts[1].y && pts[0].y.abs() == *h);
    if same_side {
        return None;
    }
    Some([pts[0].clone(), pts[1].clone()])
}

#[derive(Default)]
struct Interner {
    ids: HashMap<QPoint, usize>,
    points: Vec<QPoint>,
    lines: Vec<Vec<u32>>,
}

impl Interner {
    fn intern(&mut self, pt: QPoint) -> usize {
        if let Some(&id) = self.ids.get(&pt) {
            return id;
        }
        let id = self.points.len();
        self.ids.insert(pt.clone(), id);
        self.points.push(pt);
        self.lines.push(Vec::new());
        id
    }

    fn note_line(&mut self, v: usize, line: usize) {
        let l = line as u32;
        if !self.lines[v].contains(&l) {
            self.lines[v].push(l);
        }
    }
}

fn count_closer(g: &GeneratorSet, x: &QPoint) -> usize {
    let h = HomPoint::new(x);
    g.points.iter().filter(|&&a| h.generator_closer(a, g.scale)).count()
}

impl Arrangement {
    pub fn build(g: &GeneratorSet, clip_half_width: &BigRat) -> Result<Self> {
        if g.is_empty() {
            return Err(Error::EmptyGenerators);
        }
        if !clip_half_width.is_positive() {
            return Err(Error::InvalidClip);
        }
        let h = clip_half_width;
        let neg_h = -h.clone();
        let p = g.scale;
        let lines = g.lines();
        let n = lines.len();

        let clipped: Vec<Option<[QPoint; 2]>> = lines.iter().map(|l| clip_line(l, p, h)).collect();
        let kept: Vec<usize> = (0..n).filter(|&i| clipped[i].is_some()).collect();

        let mut interner = Interner::default();
        let corners = [
            QPoint::new(neg_h.clone(), neg_h.clone()),
            QPoint::new(h.clone(), neg_h.clone()),
            QPoint::new(h.clone(), h.clone()),
            QPoint::new(neg_h.clone(), h.clone()),
        ];
        for c in &corners {
            interner.intern(c.clone());
        }

        let mut on_line: Vec<Vec<usize>> = vec![Vec::new(); n];
        for &i in &kept {
            for pt in clipped[i].clone().unwrap() {
                let v = interner.intern(pt);
                interner.note_line(v, i);
                on_line[i].push(v);
            }
        }

        let inside = |pt: &QPoint| pt.x.abs() <= *h && pt.y.abs() <= *h;
        let pair_hits = |a: usize| -> Vec<(usize, usize, QPoint)> {
            kept.iter()
                .filter(|&&b| b > a)
                .filter_map(|&b| {
                    let pt = line_intersect_scaled(&lines[a], &lines[b], p)?;
                    inside(&pt).then_some((a, b, pt))
                })
                .collect()
        };
        #[cfg(feature = "parallel")]
        let hits: Vec<Vec<(usize, usize, QPoint)>> = kept.par_iter().map(|&a| pair_hits(a)).collect();
        #[cfg(not(feature = "parallel"))]
        let hits: Vec<Vec<(usize, usize, QPoint)>> = kept.iter().map(|&a| pair_hits(a)).collect();
        for (a, b, pt) in hits.into_iter().flatten() {
            let v = interner.intern(pt);
            interner.note_line(v, a);
            interner.note_line(v, b);
            on_line[a].push(v);
            on_line[b].push(v);
        }

        let verts = &interner.points;
        // carriers: lines 0..n, box sides n..n+4 (bottom, right, top, left)
        let mut half_edges: Vec<HalfEdge> = Vec::new();
        let mut edge_carrier: Vec<Option<usize>> = Vec::new();
        let mut push_chain = |ids: Vec<usize>, carrier: usize, dir: [i64; 2], line: Option<usize>| {
            for w in ids.windows(2) {
                half_edges.push(HalfEdge {
                    origin: w[0],
                    carrier,
                    dir,
                });
                half_edges.push(HalfEdge {
                    origin: w[1],
                    carrier,
                    dir: [-dir[0], -dir[1]],
                });
                edge_carrier.push(line);
            }
        };
        for &i in &kept {
            let d = lines[i].direction();
            let mut ids = std::mem::take(&mut on_line[i]);
            ids.sort_unstable();
            ids.dedup();
            // position along the line as an unreduced fraction
            let mut keyed: Vec<(BigInt, BigInt, usize)> = ids
                .into_iter()
                .map(|v| {
                    let [x, y, den] = homogeneous(&verts[v]);
                    (x * &d[0] + y * &d[1], den, v)
                })
                .collect();
            keyed.sort_by(|a, b| (&a.0 * &b.1).cmp(&(&b.0 * &a.1)));
            let dir = [
                i64::try_from(d[0].clone()).expect("generator fits i64"),
                i64::try_from(d[1].clone()).expect("generator fits i64"),
            ];
            push_chain(keyed.into_iter().map(|(_, _, v)| v).collect(), i, dir, Some(i));
        }
        let sides: [(usize, Box<dyn Fn(&QPoint) -> bool>, bool, [i64; 2]); 4] = [
            (n, Box::new(|q: &QPoint| q.y == neg_h), true, [1, 0]),
            (n + 1, Box::new(|q: &QPoint| q.x == *h), false, [0, 1]),
            (n + 2, Box::new(|q: &QPoint| q.y == *h), true, [1, 0]),
            (n + 3, Box::new(|q: &QPoint| q.x == neg_h), false, [0, 1]),
        ];
        for (carrier, on_side, by_x, dir) in sides.iter() {
            let mut ids: Vec<usize> = (0..verts.len()).filter(|&v| on_side(&verts[v])).collect();
            ids.sort_by(|&a, &b| {
                if *by_x {
                    verts[a].x.cmp(&verts[b].x)
                } else {
                    verts[a].y.cmp(&verts[b].y)
                }
            });
            push_chain(ids, *carrier, *dir, None);
        }

        // angular order of outgoing half-edges around each vertex
        let mut outgoing: Vec<Vec<usize>> = vec![Vec::new(); verts.len()];
        for (e, he) in half_edges.iter().enumerate() {
            outgoing[he.origin].push(e);
        }
        let mut pos_in_ring = vec![0usize; half_edges.len()];
        for ring in outgoing.iter_mut() {
            ring.sort_by(|&a, &b| angle_cmp(half_edges[a].dir, half_edges[b].dir));
            for (k, &e) in ring.iter().enumerate() {
                pos_in_ring[e] = k;
            }
        }
        let next = |e: usize| -> usize {
            let twin = e ^ 1;
            let v = half_edges[twin].origin;
            let ring = &outgoing[v];
            ring[(pos_in_ring[twin] + ring.len() - 1) % ring.len()]
        };

        let mut face_of: Vec<Option<usize>> = vec![None; half_edges.len()];
        let mut visited = vec![false; half_edges.len()];
        let mut raw_faces: Vec<(Vec<usize>, Vec<usize>, bool)> = Vec::new();
        for start in 0..half_edges.len() {
            if visited[start] {
                continue;
            }
            let mut cycle = Vec::new();
            let mut e = start;
            while !visited[e] {
                visited[e] = true;
                cycle.push(e);
                e = next(e);
            }
            let boundary: Vec<usize> = cycle.iter().map(|&e| half_edges[e].origin).collect();
            // corners of the polygon are where the carrier changes
            let corners: Vec<usize> = (0..cycle.len())
                .filter(|&i| {
                    let prev = cycle[(i + cycle.len() - 1) % cycle.len()];
                    half_edges[prev].carrier != half_edges[cycle[i]].carrier
                })
                .map(|i| half_edges[cycle[i]].origin)
                .collect();
            // bounded faces turn left; the outer cycle around the box turns right
            if corners.len() < 3
                || orient(&verts[corners[0]], &verts[corners[1]], &verts[corners[2]]) != Ordering::Greater
            {
                continue;
            }
            let face_id = raw_faces.len();
            for &e in &cycle {
                face_of[e] = Some(face_id);
            }
            let on_clip = cycle.iter().any(|&e| half_edges[e].carrier >= n);
            raw_faces.push((boundary, corners, on_clip));
        }

        let label = |(boundary, corners, on_clip): (Vec<usize>, Vec<usize>, bool)| -> Face {
            let polygon = ConvexPolygon::from_trusted(corners.iter().map(|&v| verts[v].clone()).collect());
            let interior_witness = polygon.centroid();
            let depth = count_closer(g, &interior_witness);
            let area = polygon.area();
            Face {
                polygon,
                depth,
                interior_witness,
                on_clip_boundary: on_clip,
                boundary,
                area,
            }
        };
        #[cfg(feature = "parallel")]
        let faces: Vec<Face> = raw_faces.into_par_iter().map(label).collect();
        #[cfg(not(feature = "parallel"))]
        let faces: Vec<Face> = raw_faces.into_iter().map(label).collect();

        let edges: Vec<Edge> = edge_carrier
            .iter()
            .enumerate()
            .map(|(k, &line)| Edge {
                ends: [half_edges[2 * k].origin, half_edges[2 * k + 1].origin],
                line,
                left: face_of[2 * k],
                right: face_of[2 * k + 1],
            })
            .collect();

        let index = FaceIndex::new(&faces, h);
        let Interner {
            points,
            lines: vertex_lines,
            ..
        } = interner;
        Ok(Self {
            reliability: g.reliability(),
            generators: g.clone(),
            lines,
            clip: h.clone(),
            vertices: points,
            vertex_lines,
            edges,
            faces,
            index,
        })
    }

    /// Builds with [`default_clip_half_width`].
    pub fn build_default(g: &GeneratorSet) -> Result<Self> {
        Self::build(g, &default_clip_half_width(g))
    }

    pub fn generators(&self) -> &GeneratorSet {
        &self.generators
    }

    pub fn lines(&self) -> &[BisectorLine] {
        &self.lines
    }

    pub fn clip_half_width(&self) -> &BigRat {
        &self.clip
    }

    pub fn clip_area(&self) -> BigRat {
        rat(4) * &self.clip * &self.clip
    }

    pub fn vertices(&self) -> &[QPoint] {
        &self.vertices
    }

    /// Ids of the lines through each vertex.
    pub fn vertex_lines(&self) -> &[Vec<u32>] {
        &self.vertex_lines
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn faces(&self) -> &[Face] {
        &self.faces
    }

    /// Mutable faces, for fault-injection tests of the verifier.
    pub fn faces_mut(&mut self) -> &mut [Face] {
        &mut self.faces
    }

    pub fn reliability(&self) -> &ReliabilityBound {
        &self.reliability
    }

    pub fn stats(&self) -> Stats {
        Stats {
            n_lines: self.lines.len(),
            n_lines_in_clip: self
                .edges
                .iter()
                .filter_map(|e| e.line)
                .collect::<std::collections::HashSet<_>>()
                .len(),
            n_vertices: self.vertices.len(),
            n_edges: self.edges.len(),
            n_faces: self.faces.len(),
            max_multiplicity: self.vertex_lines.iter().map(Vec::len).max().unwrap_or(0),
        }
    }

    /// Chambers of the `k`-th zone: faces of depth `k - 1` away from the clip
    /// box. `reliable` is false past the window's cut-off or when any face of
    /// depth below `k` touches the box.
    pub fn zone(&self, k: usize) -> Result<Zone> {
        if k == 0 {
            return Err(Error::InvalidK);
        }
        let faces: Vec<usize> = (0..self.faces.len())
            .filter(|&f| self.faces[f].depth == k - 1 && !self.faces[f].on_clip_boundary)
            .collect();
        let clipped = self.faces.iter().any(|f| f.depth < k && f.on_clip_boundary);
        let reliable = (k as u64) <= self.reliability.kmax && !clipped;
        Ok(Zone { k, faces, reliable })
    }

    /// Faces whose closed polygon contains `x`.
    pub fn locate(&self, x: &QPoint) -> Vec<usize> {
        self.index
            .candidates(x)
            .iter()
            .copied()
            .filter(|&f| self.faces[f].polygon.locate(x) != Ordering::Less)
            .collect()
    }

    /// Depth at `x` read from the stored face labels: the smallest label
    /// among faces containing `x`, which is the strict count on boundaries
    /// as well.
    pub fn depth_at(&self, x: &QPoint) -> Option<usize> {
        self.locate(x).into_iter().map(|f| self.faces[f].depth).min()
    }

    /// Exact total area of the given faces.
    pub fn area_of(&self, faces: impl IntoIterator<Item = usize>) -> BigRat {
        sum_spatial(
            faces
                .into_iter()
                .map(|f| (self.faces[f].interior_witness.to_f64(), self.faces[f].area.clone()))
                .collect(),
        )
    }

    /// Exact sum of all face areas; equals [`Arrangement::clip_area`] for a
    /// correct subdivision.
    pub fn total_face_area(&self) -> BigRat {
        self.area_of(0..self.faces.len())
    }

    /// Exact area of the union of faces with depth below `k`, by the
    /// shoelace formula over the union's boundary edges. Faces on the clip
    /// box are included.
    pub fn union_area_below(&self, k: usize) -> BigRat {
        let inside = |f: Option<usize>| f.is_some_and(|f| self.faces[f].depth < k);
        let terms = self
            .edges
            .iter()
            .filter_map(|e| {
                let (l, r) = (inside(e.left), inside(e.right));
                if l == r {
                    return None;
                }
                let (a, b) = (&self.vertices[e.ends[0]], &self.vertices[e.ends[1]]);
                let cross = &a.x * &b.y - &b.x * &a.y;
                let term = if l { cross } else { -cross };
                let mid = a.add(b).to_f64();
                Some(([mid[0] / 2.0, mid[1] / 2.0], term))
            })
            .collect();
        sum_spatial(terms) / rat(2)
    }

    /// Squared length of an edge.
    pub fn edge_len_sq(&self, e: &Edge) -> BigRat {
        self.vertices[e.ends[0]].dist_sq(&self.vertices[e.ends[1]])
    }

    pub fn edge_len(&self, e: &Edge) -> f64 {
        sqrt_f64(&self.edge_len_sq(e))
    }
}

/// Number of generators strictly closer to `x` than the origin.
pub fn depth_of_point(g: &GeneratorSet, x: &QPoint) -> usize {
    count_closer(g, x)
}

/// Uniform grid over the clip box listing faces whose bounding box meets
/// each cell.
#[derive(Clone, Debug)]
struct FaceIndex {
    h: f64,
    cells: usize,
    buckets: Vec<Vec<usize>>,
}

impl FaceIndex {
    fn new(faces: &[Face], h: &BigRat) -> Self {
        let h = crate::geom::to_f64(h);
        let cells = ((faces.len() as f64).sqrt().ceil() as usize).clamp(1, 512);
        let mut buckets = vec![Vec::new(); cells * cells];
        let idx = Self {
            h,
            cells,
            buckets: Vec::new(),
        };
        let margin = 1e-9 * h.max(1.0);
        for (f, face) in faces.iter().enumerate() {
            let bb = face.polygon.bbox_f64();
            let (x0, y0) = (idx.cell(bb[0] - margin), idx.cell(bb[1] - margin));
            let (x1, y1) = (idx.cell(bb[2] + margin), idx.cell(bb[3] + margin));
            for cy in y0..=y1 {
                for cx in x0..=x1 {
                    buckets[cy * cells + cx].push(f);
                }
            }
        }
        Self { buckets, ..idx }
    }

    fn cell(&self, v: f64) -> usize {
        let t = ((v + self.h) / (2.0 * self.h) * self.cells as f64).floor();
        (t.max(0.0) as usize).min(self.cells - 1)
    }

    fn candidates(&self, x: &QPoint) -> &[usize] {
        let [px, py] = x.to_f64();
        if px.abs() > self.h * (1.0 + 1e-9) || py.abs() > self.h * (1.0 + 1e-9) {
            return &[];
        }
        &self.buckets[self.cell(py) * self.cells + self.cell(px)]
    }
}
