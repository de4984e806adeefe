//! Invariant suite over a built arrangement.
//!
//! Every check reports the range of `k` it covered and, on failure, the
//! first offending `k` or face together with the exact values involved.

use std::collections::{BTreeSet, HashMap};

use num_bigint::BigInt;
use num_traits::{Signed, Zero};
use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::arrangement::{depth_of_point, Arrangement};
use crate::error::{Error, Result};
use crate::geom::{rat, rat_string, BigRat, ConvexPolygon, QPoint};
use crate::lattice::{adversarial_perturbation, integer_window, pi_bounds, reliable_k, GeneratorSet, DEFAULT_SCALE};
use crate::metrics::{lattice_bounds, perturbed_bounds, ray_profile, ring_directions, zone_reports, ZoneReport};

#[cfg(feature = "parallel")]
use rayon::prelude::*;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Check {
    pub name: String,
    /// Inclusive range of `k` the check covered, if it is per-zone.
    pub k_range: Option<[usize; 2]>,
    pub passed: bool,
    pub witness: Option<String>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct VerifyReport {
    pub checks: Vec<Check>,
}

impl VerifyReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed)
    }

    pub fn get(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    fn push(&mut self, name: &str, k_range: Option<[usize; 2]>, failure: Option<String>) {
        self.checks.push(Check {
            name: name.to_string(),
            k_range,
            passed: failure.is_none(),
            witness: failure,
        });
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VerifyOptions {
    /// Largest zone to check; rows past the reliable bound are skipped by
    /// the bound checks.
    pub kmax: usize,
    /// Random interior samples per face for the depth check.
    pub samples_per_face: usize,
    pub seed: u64,
    /// Zone and strength for the adversarial chamber construction, run on
    /// unperturbed input only.
    pub adversarial: Option<(usize, BigRat)>,
}

impl VerifyOptions {
    /// Reliable `k`, three samples per face, and the adversarial chamber at
    /// `k = 5`, `tau = 2/5`.
    pub fn for_arrangement(arr: &Arrangement) -> Self {
        Self {
            kmax: arr.reliability().kmax as usize,
            samples_per_face: 3,
            seed: 0,
            adversarial: Some((5, BigRat::new(2.into(), 5.into()))),
        }
    }
}

/// A chamber produced by the adversarial perturbation around `x`.
#[derive(Clone, Debug)]
pub struct AdversarialChamber {
    pub k: usize,
    pub tau: BigRat,
    pub x: QPoint,
    pub generators: GeneratorSet,
    /// Depth of `x` in the perturbed set.
    pub depth: usize,
    /// Whether every Bragg line of the perturbed set stays at distance at
    /// least `tau / 2` from `x`.
    pub clearance: bool,
    pub polygon: ConvexPolygon,
    pub diameter_sq: BigRat,
    pub area: BigRat,
}

impl AdversarialChamber {
    /// `diameter >= tau` and `area >= pi tau^2 / 4`, both exact (pi bounded
    /// from above).
    pub fn meets_bounds(&self) -> bool {
        let (_, pi_hi) = pi_bounds();
        let t2 = &self.tau * &self.tau;
        self.depth + 1 == self.k && self.clearance && self.diameter_sq >= t2 && self.area >= pi_hi * t2 / rat(4)
    }
}

/// Whether every bisector of `g` keeps distance at least `tau / 2` from
/// `x`: `(|x - b|^2 - |x|^2)^2 >= tau^2 |b|^2` for each generator `b`.
pub fn bisector_clearance(g: &GeneratorSet, x: &QPoint, tau: &BigRat) -> bool {
    let x2 = x.norm_sq();
    let t2 = tau * tau;
    (0..g.len()).all(|i| {
        let b = g.point(i);
        let s = x.dist_sq(&b) - &x2;
        &s * &s >= &t2 * b.norm_sq()
    })
}

/// Perturbs the window of half-width `m` at scale `p` so that a `k`-th zone
/// chamber grows to contain `B(x, tau / 2)`, with `x` the witness of a
/// `k`-th zone chamber of the integer lattice, then measures that chamber.
pub fn adversarial_chamber(m: i64, p: i64, k: usize, tau: &BigRat) -> Result<AdversarialChamber> {
    if k == 0 {
        return Err(Error::InvalidK);
    }
    // zone k of Z^2 only needs a small window to be exact
    let small = integer_window(m.min(4))?;
    let probe = Arrangement::build_default(&small)?;
    let mut candidates = probe.zone(k)?.faces;
    candidates.sort_by(|&a, &b| probe.faces()[b].area.cmp(&probe.faces()[a].area).then(a.cmp(&b)));
    let mut last_err = Error::InvalidK;
    for f in candidates {
        let x = probe.faces()[f].interior_witness.clone();
        let g = match adversarial_perturbation(k, tau, &x, m, p) {
            Ok(g) => g,
            Err(e) => {
                last_err = e;
                continue;
            }
        };
        let depth = depth_of_point(&g, &x);
        let clearance = bisector_clearance(&g, &x, tau);
        let reach = x.x.abs().max(x.y.abs()).ceil() + rat(1);
        let arr = Arrangement::build(&g, &reach)?;
        let Some(face) = arr.locate(&x).into_iter().min_by_key(|&f| arr.faces()[f].depth) else {
            continue;
        };
        let face = &arr.faces()[face];
        return Ok(AdversarialChamber {
            k,
            tau: tau.clone(),
            diameter_sq: face.polygon.diameter_sq(),
            area: face.area.clone(),
            polygon: face.polygon.clone(),
            x,
            generators: g,
            depth,
            clearance,
        });
    }
    Err(last_err)
}

fn fmt_pt(x: &QPoint) -> String {
    format!("({}, {})", rat_string(&x.x), rat_string(&x.y))
}

fn first_failure<T>(items: impl Iterator<Item = T>, f: impl Fn(T) -> Option<String>) -> Option<String> {
    items.filter_map(f).next()
}

/// Runs every check that applies to `arr`. Integer-lattice checks run only
/// when the generators are unperturbed.
pub fn verify(arr: &Arrangement, opts: &VerifyOptions) -> VerifyReport {
    let mut rep = VerifyReport::default();
    let g = arr.generators();
    let unperturbed = g.magnitude().sq.is_zero();
    let kmax = opts.kmax;
    let range = (kmax >= 1).then_some([1, kmax]);

    let total = arr.total_face_area();
    let clip = arr.clip_area();
    rep.push(
        "area_partition",
        None,
        (total != clip).then(|| {
            format!(
                "sum of face areas {} != box area {}",
                rat_string(&total),
                rat_string(&clip)
            )
        }),
    );

    rep.push("depth_consistency", range, depth_consistency(arr, opts));
    rep.push("crossing_rule", None, crossing_rule(arr));
    let origin = arr.depth_at(&QPoint::origin());
    rep.push(
        "origin_face",
        None,
        (origin != Some(0)).then(|| format!("origin has depth {origin:?}")),
    );

    let reports = match zone_reports(arr, kmax) {
        Ok(r) => r,
        Err(e) => {
            rep.push("zone_reports", range, Some(e.to_string()));
            return rep;
        }
    };
    let reliable: Vec<&ZoneReport> = reports.iter().filter(|z| z.reliable).collect();

    if unperturbed {
        rep.push(
            "unit_areas",
            range,
            first_failure(reliable.iter(), |z| {
                (z.area != rat(1)).then(|| format!("k={}: area {}", z.k, rat_string(&z.area)))
            }),
        );
    }

    let mut cum = BigRat::zero();
    let mut cum_fail = None;
    for z in &reports {
        cum += &z.area;
        if cum_fail.is_none() && z.reliable && cum != &z.cum_area_over_k * rat(z.k as i64) {
            cum_fail = Some(format!(
                "k={}: sum of zone areas {} != union area {}",
                z.k,
                rat_string(&cum),
                rat_string(&(&z.cum_area_over_k * rat(z.k as i64)))
            ));
        }
    }
    rep.push("cumulative_area", range, cum_fail);

    if unperturbed {
        rep.push(
            "width_bounds_integer",
            range,
            first_failure(reliable.iter(), |z| integer_bounds(z)),
        );
        rep.push(
            "chamber_bound",
            range,
            first_failure(reliable.iter().filter(|z| z.k >= 2), |z| {
                (z.n_chambers > 6 * z.k - 6).then(|| format!("k={}: {} chambers > {}", z.k, z.n_chambers, 6 * z.k - 6))
            }),
        );
    }
    let tau = g.magnitude().value;
    rep.push(
        "width_bounds_perturbed",
        range,
        first_failure(reliable.iter(), |z| perturbed_violation(z, tau)),
    );

    rep.push(
        "zone_connectivity",
        range,
        first_failure(reliable.iter(), |z| zone_connected(arr, z.k)),
    );
    rep.push("ray_zone_consistency", range, ray_zone(arr, &reliable));
    rep.push(
        "distortion",
        range,
        first_failure(reliable.iter(), |z| {
            (z.distortion <= 1.0).then(|| format!("k={}: distortion {}", z.k, z.distortion))
        }),
    );

    if unperturbed {
        rep.push(
            "symmetry",
            range,
            first_failure(reliable.iter(), |z| symmetric(arr, z.k)),
        );
    }

    let reference: Vec<u64> = [0, 200, 1000, 5000]
        .iter()
        .map(|&q| reliable_k(9, q, 10_000).kmax)
        .collect();
    rep.push(
        "reliability_reference",
        None,
        (reference != [57, 56, 52, 34]).then(|| format!("reliable_k(9, tau) = {reference:?}")),
    );

    if let (true, Some((k, tau))) = (unperturbed, &opts.adversarial) {
        let k = *k;
        let failure = match adversarial_chamber(g.m, DEFAULT_SCALE, k, tau) {
            Ok(c) if c.meets_bounds() => None,
            Ok(c) => Some(format!(
                "x={}: depth {}, clearance {}, diameter^2 {}, area {}",
                fmt_pt(&c.x),
                c.depth,
                c.clearance,
                rat_string(&c.diameter_sq),
                rat_string(&c.area)
            )),
            Err(e) => Some(e.to_string()),
        };
        rep.push("adversarial_chamber", Some([k, k]), failure);
    }
    rep
}

fn depth_consistency(arr: &Arrangement, opts: &VerifyOptions) -> Option<String> {
    let g = arr.generators();
    let faces: Vec<usize> = (0..arr.faces().len())
        .filter(|&f| arr.faces()[f].depth < opts.kmax.max(1))
        .collect();
    let check = |&f: &usize| -> Option<String> {
        let face = &arr.faces()[f];
        let mut rng = ChaCha8Rng::seed_from_u64(opts.seed.wrapping_add(f as u64));
        let vs = face.polygon.vertices();
        let mut pts = vec![face.interior_witness.clone()];
        for _ in 0..opts.samples_per_face {
            let i = (rng.next_u64() % vs.len() as u64) as usize;
            let (a, b) = (&vs[i], &vs[(i + 1) % vs.len()]);
            let wa = rng.next_u64() % 1000 + 1;
            let wb = rng.next_u64() % 1000 + 1;
            let wc = rng.next_u64() % 1000 + 1;
            let s = BigRat::from_integer(BigInt::from(wa + wb + wc));
            let pt = face
                .interior_witness
                .scale(&rat(wa as i64))
                .add(&a.scale(&rat(wb as i64)))
                .add(&b.scale(&rat(wc as i64)))
                .scale(&(BigRat::from_integer(1.into()) / s));
            pts.push(pt);
        }
        pts.into_iter().find_map(|x| {
            let d = depth_of_point(g, &x);
            (d != face.depth).then(|| format!("face {f} labelled {} but {} has depth {d}", face.depth, fmt_pt(&x)))
        })
    };
    #[cfg(feature = "parallel")]
    let mut bad: Vec<(usize, String)> = faces.par_iter().filter_map(|f| check(f).map(|w| (*f, w))).collect();
    #[cfg(not(feature = "parallel"))]
    let mut bad: Vec<(usize, String)> = faces.iter().filter_map(|f| check(f).map(|w| (*f, w))).collect();
    bad.sort();
    bad.into_iter().next().map(|(_, w)| w)
}

fn crossing_rule(arr: &Arrangement) -> Option<String> {
    arr.edges().iter().enumerate().find_map(|(i, e)| {
        let (Some(l), Some(r), Some(_)) = (e.left, e.right, e.line) else {
            return None;
        };
        let (a, b) = (arr.faces()[l].depth, arr.faces()[r].depth);
        (a.abs_diff(b) != 1).then(|| format!("edge {i}: depths {a} and {b} across one line"))
    })
}

fn strict(lo: f64, v: f64, hi: f64) -> bool {
    lo < v && v < hi
}

fn integer_bounds(z: &ZoneReport) -> Option<String> {
    let b = lattice_bounds(2, z.k);
    // at k = 1 the r upper and W lower bounds degenerate (r_1 = 1/2 > 0)
    let r_hi = if z.k == 1 { f64::INFINITY } else { b.r_upper };
    let w_lo = if z.k == 1 { f64::NEG_INFINITY } else { b.w_lower };
    if !strict(b.r_lower, z.r, r_hi) {
        return Some(format!(
            "k={}: r={} (r^2={}) not in ({}, {})",
            z.k,
            z.r,
            rat_string(&z.r_sq),
            b.r_lower,
            r_hi
        ));
    }
    if !strict(b.big_r_lower, z.big_r, b.big_r_upper) {
        return Some(format!(
            "k={}: R={} (R^2={}) not in ({}, {})",
            z.k,
            z.big_r,
            rat_string(&z.big_r_sq),
            b.big_r_lower,
            b.big_r_upper
        ));
    }
    (!strict(w_lo, z.w, b.w_upper)).then(|| format!("k={}: W={} not in ({}, {})", z.k, z.w, w_lo, b.w_upper))
}

fn perturbed_violation(z: &ZoneReport, tau: f64) -> Option<String> {
    let b = perturbed_bounds(2, z.k, tau);
    if z.r <= b.r_lower {
        return Some(format!(
            "k={}: r={} (r^2={}) <= {}",
            z.k,
            z.r,
            rat_string(&z.r_sq),
            b.r_lower
        ));
    }
    if z.big_r >= b.big_r_upper {
        return Some(format!(
            "k={}: R={} (R^2={}) >= {}",
            z.k,
            z.big_r,
            rat_string(&z.big_r_sq),
            b.big_r_upper
        ));
    }
    if z.r > z.big_r {
        return Some(format!("k={}: r={} > R={}", z.k, z.r, z.big_r));
    }
    (z.w >= b.w_upper).then(|| format!("k={}: W={} >= {}", z.k, z.w, b.w_upper))
}

fn zone_connected(arr: &Arrangement, k: usize) -> Option<String> {
    let faces = arr.zone(k).ok()?.faces;
    let mut parent: Vec<usize> = (0..faces.len()).collect();
    fn find(p: &mut [usize], i: usize) -> usize {
        let mut i = i;
        while p[i] != i {
            p[i] = p[p[i]];
            i = p[i];
        }
        i
    }
    let mut owner: HashMap<usize, usize> = HashMap::new();
    for (i, &f) in faces.iter().enumerate() {
        for &v in &arr.faces()[f].boundary {
            if let Some(&j) = owner.get(&v) {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                parent[a] = b;
            } else {
                owner.insert(v, i);
            }
        }
    }
    let roots: BTreeSet<usize> = (0..faces.len()).map(|i| find(&mut parent, i)).collect();
    (roots.len() > 1).then(|| format!("k={}: {} components", k, roots.len()))
}

fn ray_zone(arr: &Arrangement, reliable: &[&ZoneReport]) -> Option<String> {
    let ks: BTreeSet<usize> = reliable.iter().map(|z| z.k).collect();
    for u in ring_directions(16) {
        let prof = ray_profile(arr.generators(), u).ok()?;
        let uq = QPoint::from_ints(u[0], u[1]);
        for &k in &ks {
            if !ks.contains(&(k + 1)) {
                continue;
            }
            let (Some(a), Some(b)) = (prof.alpha(k), prof.alpha(k + 1)) else {
                continue;
            };
            if a >= b {
                continue;
            }
            let x = uq.scale(&((a + b) / rat(2)));
            let depth = arr.depth_at(&x);
            if depth != Some(k) {
                return Some(format!(
                    "u=({}, {}), k={k}: point {} has depth {depth:?}",
                    u[0],
                    u[1],
                    fmt_pt(&x)
                ));
            }
        }
    }
    None
}

fn canonical(poly: &ConvexPolygon, map: impl Fn(&QPoint) -> QPoint) -> Vec<QPoint> {
    let mut v: Vec<QPoint> = poly.vertices().iter().map(map).collect();
    v.sort();
    v
}

fn symmetric(arr: &Arrangement, k: usize) -> Option<String> {
    let faces = arr.zone(k).ok()?.faces;
    let polys: Vec<&ConvexPolygon> = faces.iter().map(|&f| &arr.faces()[f].polygon).collect();
    let base: BTreeSet<Vec<QPoint>> = polys.iter().map(|p| canonical(p, |q| q.clone())).collect();
    let diag: BTreeSet<Vec<QPoint>> = polys
        .iter()
        .map(|p| canonical(p, |q| QPoint::new(q.y.clone(), q.x.clone())))
        .collect();
    let flip: BTreeSet<Vec<QPoint>> = polys
        .iter()
        .map(|p| canonical(p, |q| QPoint::new(-q.x.clone(), q.y.clone())))
        .collect();
    (base != diag || base != flip).then(|| format!("k={k}: chambers not invariant under the square's symmetries"))
}
