//! Per-zone measurements and the counting helpers built on them.
//!
//! Exact rationals are kept wherever a value is a sum of polygon areas or a
//! squared distance; anything that needs a square root is reported as `f64`
//! taken from the exact square, one root per edge or per distance.

use std::cmp::Ordering;
use std::collections::BTreeSet;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use crate::arrangement::Arrangement;
use crate::error::{Error, Result};
use crate::geom::{rat, sqrt_f64, to_f64, BigRat, HomPoint, QPoint};
use crate::lattice::GeneratorSet;

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Measurements of the `k`-th zone of the origin.
#[derive(Clone, Debug, PartialEq)]
pub struct ZoneReport {
    pub k: usize,
    /// Smallest squared distance from the origin to the zone.
    pub r_sq: BigRat,
    pub r: f64,
    /// Largest squared distance from the origin to the zone.
    pub big_r_sq: BigRat,
    pub big_r: f64,
    /// Width `R - r`.
    pub w: f64,
    pub area: BigRat,
    /// Area of the union of the first `k` zones divided by `k`.
    pub cum_area_over_k: BigRat,
    /// Length of the outer boundary of the union of the first `k` zones.
    pub outer_perimeter: f64,
    /// Outer perimeter over the circumference of the disk of equal area.
    pub distortion: f64,
    pub n_chambers: usize,
    pub max_chamber_area: BigRat,
    pub max_chamber_diameter: f64,
    pub reliable: bool,
}

/// Measures zone `k`. Fails when `k == 0` or the zone has no chamber inside
/// the clip box.
pub fn zone_report(arr: &Arrangement, k: usize) -> Result<ZoneReport> {
    let zone = arr.zone(k)?;
    if zone.faces.is_empty() {
        return Err(Error::InvalidK);
    }
    let faces = arr.faces();
    let mut r_sq: Option<BigRat> = None;
    let mut big_r_sq: Option<BigRat> = None;
    let mut max_area = BigRat::zero();
    let mut max_diam_sq = BigRat::zero();
    for &f in &zone.faces {
        let face = &faces[f];
        let (lo, hi) = face.polygon.origin_dist_range();
        if r_sq.as_ref().is_none_or(|r| lo < *r) {
            r_sq = Some(lo);
        }
        if big_r_sq.as_ref().is_none_or(|r| hi > *r) {
            big_r_sq = Some(hi);
        }
        if face.area > max_area {
            max_area = face.area.clone();
        }
        let d = face.polygon.diameter_sq();
        if d > max_diam_sq {
            max_diam_sq = d;
        }
    }
    let r_sq = r_sq.expect("zone is non-empty");
    let big_r_sq = big_r_sq.expect("zone is non-empty");

    let area = arr.area_of(zone.faces.iter().copied());
    let cum_area = arr.union_area_below(k);

    let mut perimeter = 0.0;
    for e in arr.edges() {
        if let (Some(l), Some(rt)) = (e.left, e.right) {
            let (a, b) = (faces[l].depth, faces[rt].depth);
            if a.min(b) < k && a.max(b) >= k {
                perimeter += arr.edge_len(e);
            }
        }
    }

    let r = sqrt_f64(&r_sq);
    let big_r = sqrt_f64(&big_r_sq);
    let distortion = perimeter / (2.0 * (std::f64::consts::PI * to_f64(&cum_area)).sqrt());
    Ok(ZoneReport {
        k,
        r,
        big_r,
        w: big_r - r,
        r_sq,
        big_r_sq,
        area,
        cum_area_over_k: cum_area / rat(k as i64),
        outer_perimeter: perimeter,
        distortion,
        n_chambers: zone.faces.len(),
        max_chamber_area: max_area,
        max_chamber_diameter: sqrt_f64(&max_diam_sq),
        reliable: zone.reliable,
    })
}

/// Reports for `k = 1..=kmax`, in order.
pub fn zone_reports(arr: &Arrangement, kmax: usize) -> Result<Vec<ZoneReport>> {
    #[cfg(feature = "parallel")]
    let it = (1..=kmax).into_par_iter();
    #[cfg(not(feature = "parallel"))]
    let it = 1..=kmax;
    it.map(|k| zone_report(arr, k)).collect()
}

/// Volume of the unit ball in `R^d`.
pub fn unit_ball_volume(d: u32) -> f64 {
    match d {
        0 => 1.0,
        1 => 2.0,
        _ => unit_ball_volume(d - 2) * 2.0 * std::f64::consts::PI / d as f64,
    }
}

/// Brackets on `r_k`, `R_k` and `W_k`. Missing lower bounds are `-inf`,
/// missing upper bounds `+inf`.
///
/// All values are plain `f64` evaluations of the closed forms, so each one
/// carries a few ulps of rounding error.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize)]
pub struct BoundSet {
    pub d: u32,
    pub k: usize,
    pub tau: f64,
    pub r_lower: f64,
    pub r_upper: f64,
    pub big_r_lower: f64,
    pub big_r_upper: f64,
    pub w_lower: f64,
    pub w_upper: f64,
}

fn rho(d: u32, k: usize) -> f64 {
    (k as f64 / unit_ball_volume(d)).powf(1.0 / d as f64)
}

/// Distance and width brackets for the integer lattice.
pub fn lattice_bounds(d: u32, k: usize) -> BoundSet {
    let half_diag = (d as f64).sqrt() / 2.0;
    let (rk, rk1) = (rho(d, k), rho(d, k.saturating_sub(1)));
    BoundSet {
        d,
        k,
        tau: 0.0,
        r_lower: rk - half_diag,
        r_upper: rk1,
        big_r_lower: rk,
        big_r_upper: rk + half_diag,
        w_lower: rk - rk1,
        w_upper: (d as f64).sqrt(),
    }
}

/// Outer brackets for a perturbation of magnitude `tau`.
pub fn perturbed_bounds(d: u32, k: usize, tau: f64) -> BoundSet {
    let half_diag = (d as f64).sqrt() / 2.0;
    let rk = rho(d, k);
    BoundSet {
        d,
        k,
        tau,
        r_lower: rk - half_diag - tau,
        r_upper: f64::INFINITY,
        big_r_lower: f64::NEG_INFINITY,
        big_r_upper: rk + half_diag + tau,
        w_lower: f64::NEG_INFINITY,
        w_upper: (d as f64).sqrt() + 2.0 * tau,
    }
}

/// Closed-form diameter bound for chambers of the `k`-th zone.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize)]
pub struct DiameterBound {
    pub value: f64,
    /// Smallest `k` for which the bound is proved.
    pub threshold: f64,
    pub valid: bool,
}

pub fn chamber_diameter_bound(d: u32, k: usize) -> DiameterBound {
    let df = d as f64;
    let c = 18.0 * df * df.sqrt();
    let nu = unit_ball_volume(d);
    let exponent = (-1.0 + 1.0 / 2f64.powi(d as i32 - 1)) / df;
    let value = c * nu.powf(1.0 / df) * (k as f64).powf(exponent);
    let threshold = nu * c.powi(d as i32);
    DiameterBound {
        value,
        threshold,
        valid: k as f64 >= threshold,
    }
}

/// The `k`-th smallest entry (1-based), ties counted with multiplicity.
pub fn kth_smallest<T: Ord + Clone>(values: &[T], k: usize) -> Option<T> {
    if k == 0 || k > values.len() {
        return None;
    }
    let mut v = values.to_vec();
    let (_, x, _) = v.select_nth_unstable(k - 1);
    Some(x.clone())
}

/// Crossings of the ray `t * u`, `t > 0`, with the Bragg lines.
///
/// Crossings are stored as the parameter `t` along the unnormalized integer
/// direction `u`, so two profiles along the same `u` compare exactly. The
/// distance from the origin is `t * |u|`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RayProfile {
    pub u: [i64; 2],
    pub crossings: Vec<BigRat>,
}

impl RayProfile {
    /// Parameter of the `k`-th crossing, where the ray leaves the union of
    /// the first `k` zones.
    pub fn alpha(&self, k: usize) -> Option<BigRat> {
        kth_smallest(&self.crossings, k)
    }

    /// Exact squared distance of the `k`-th crossing from the origin.
    pub fn dist_sq(&self, k: usize) -> Option<BigRat> {
        let t = self.alpha(k)?;
        Some(&t * &t * rat(self.u[0] * self.u[0] + self.u[1] * self.u[1]))
    }

    pub fn distance(&self, k: usize) -> Option<f64> {
        self.dist_sq(k).map(|d| sqrt_f64(&d))
    }

    pub fn norm_u(&self) -> f64 {
        ((self.u[0] * self.u[0] + self.u[1] * self.u[1]) as f64).sqrt()
    }
}

pub fn ray_profile(g: &GeneratorSet, u: [i64; 2]) -> Result<RayProfile> {
    if u == [0, 0] {
        return Err(Error::ZeroDirection);
    }
    let p = BigInt::from(g.scale);
    let mut crossings: Vec<BigRat> = g
        .points
        .iter()
        .filter_map(|b| {
            let dot = BigInt::from(u[0]) * b[0] + BigInt::from(u[1]) * b[1];
            if !dot.is_positive() {
                return None;
            }
            let nsq = BigInt::from(b[0]) * b[0] + BigInt::from(b[1]) * b[1];
            Some(BigRat::new(nsq, BigInt::from(2) * &p * dot))
        })
        .collect();
    crossings.sort();
    Ok(RayProfile { u, crossings })
}

/// `n` integer directions taken from the square ring `max(|x|, |y|) = h`
/// with `h = ceil(n / 8)`, counterclockwise from `(h, 0)`. When `n` is not
/// `8h` an evenly spread subset is kept.
pub fn ring_directions(n: usize) -> Vec<[i64; 2]> {
    if n == 0 {
        return Vec::new();
    }
    let h = n.div_ceil(8) as i64;
    let mut ring = Vec::with_capacity(8 * h as usize);
    for y in 0..h {
        ring.push([h, y]);
    }
    for x in (-h + 1..=h).rev() {
        ring.push([x, h]);
    }
    for y in (-h + 1..=h).rev() {
        ring.push([-h, y]);
    }
    for x in -h..h {
        ring.push([x, -h]);
    }
    for y in -h..0 {
        ring.push([h, y]);
    }
    let total = ring.len();
    (0..n).map(|i| ring[i * total / n]).collect()
}

/// Gap between reference and perturbed crossings along one direction.
#[derive(Clone, Debug, PartialEq)]
pub struct DirectionGap {
    pub u: [i64; 2],
    pub alpha: BigRat,
    pub beta: BigRat,
    /// `|beta - alpha|` in the parameter along `u`.
    pub gap: BigRat,
    /// The same gap as a Euclidean distance.
    pub gap_distance: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct StabilityGap {
    pub k: usize,
    pub per_direction: Vec<DirectionGap>,
    pub max_gap: f64,
}

/// Compares the `k`-th outer crossing of two generator sets along each
/// direction.
pub fn stability_gap(
    reference: &GeneratorSet,
    perturbed: &GeneratorSet,
    k: usize,
    dirs: &[[i64; 2]],
) -> Result<StabilityGap> {
    if k == 0 {
        return Err(Error::InvalidK);
    }
    let mut per_direction = Vec::with_capacity(dirs.len());
    let mut max_gap = 0.0f64;
    for &u in dirs {
        let a = ray_profile(reference, u)?;
        let b = ray_profile(perturbed, u)?;
        let (Some(alpha), Some(beta)) = (a.alpha(k), b.alpha(k)) else {
            return Err(Error::InvalidK);
        };
        let gap = (&beta - &alpha).abs();
        let gap_distance = to_f64(&gap) * a.norm_u();
        max_gap = max_gap.max(gap_distance);
        per_direction.push(DirectionGap {
            u,
            alpha,
            beta,
            gap,
            gap_distance,
        });
    }
    Ok(StabilityGap {
        k,
        per_direction,
        max_gap,
    })
}

fn rational_sqrt(v: &BigRat) -> Option<BigRat> {
    if v.is_negative() {
        return None;
    }
    let (n, d) = (v.numer(), v.denom());
    let (sn, sd) = (n.sqrt(), d.sqrt());
    (&sn * &sn == *n && &sd * &sd == *d).then(|| BigRat::new(sn, sd))
}

/// Number of integer points on the circle of squared radius `rsq` about
/// `center`.
pub fn circle_lattice_count(center: &QPoint, rsq: &BigRat) -> Result<u64> {
    if !rsq.is_positive() {
        return Err(Error::InvalidRadius);
    }
    let r = sqrt_f64(rsq);
    let cx = to_f64(&center.x);
    let lo = (cx - r).floor() as i64 - 1;
    let hi = (cx + r).ceil() as i64 + 1;
    let mut count = 0;
    for x in lo..=hi {
        let dx = rat(x) - &center.x;
        let s = rsq - &dx * &dx;
        let Some(root) = rational_sqrt(&s) else { continue };
        let ys: BTreeSet<BigRat> = [&center.y + &root, &center.y - &root].into_iter().collect();
        count += ys.iter().filter(|y| y.is_integer()).count() as u64;
    }
    Ok(count)
}

/// Indices of the generators that are `k`-near to the origin: those lying
/// inside some ball through the origin whose interior holds at most `k - 1`
/// generators.
pub fn knear_points(arr: &Arrangement, k: usize) -> Vec<usize> {
    let g = arr.generators();
    let mut near = BTreeSet::new();
    for face in arr.faces() {
        if face.depth == 0 || face.depth >= k {
            continue;
        }
        let w = HomPoint::new(&face.interior_witness);
        for (i, &a) in g.points.iter().enumerate() {
            if w.generator_closer(a, g.scale) {
                near.insert(i);
            }
        }
    }
    near.into_iter().collect()
}

pub fn knear_count(arr: &Arrangement, k: usize) -> usize {
    knear_points(arr, k).len()
}

/// Inversion in the unit circle.
pub fn invert(x: &QPoint) -> Result<QPoint> {
    if x.is_origin() {
        return Err(Error::InvertOrigin);
    }
    Ok(x.scale(&(BigRat::one() / x.norm_sq())))
}

fn upper_half(v: &QPoint) -> bool {
    v.y.is_positive() || (v.y.is_zero() && v.x.is_positive())
}

fn cross(a: &QPoint, b: &QPoint) -> BigRat {
    &a.x * &b.y - &a.y * &b.x
}

fn cmp_angle(a: &QPoint, b: &QPoint) -> Ordering {
    upper_half(b).cmp(&upper_half(a)).then_with(|| rat(0).cmp(&cross(a, b)))
}

/// Number of distinct `j`-element subsets of `points` cut off by an open
/// half-plane. Duplicate points are merged.
pub fn ksets_count(points: &[QPoint], j: usize) -> u64 {
    let pts: Vec<QPoint> = points.iter().cloned().collect::<BTreeSet<_>>().into_iter().collect();
    let n = pts.len();
    if j > n {
        return 0;
    }
    if j == 0 || j == n {
        return 1;
    }
    let mut crit = Vec::with_capacity(n * (n - 1));
    for a in 0..n {
        for b in 0..n {
            if a != b {
                let d = pts[b].sub(&pts[a]);
                crit.push(QPoint::new(-d.y.clone(), d.x.clone()));
            }
        }
    }
    crit.sort_by(cmp_angle);
    crit.dedup_by(|a, b| cmp_angle(a, b) == Ordering::Equal);

    let mut sets = BTreeSet::new();
    for i in 0..crit.len() {
        let c1 = &crit[i];
        let c2 = &crit[(i + 1) % crit.len()];
        let v = if cross(c1, c2).is_positive() {
            c1.add(c2)
        } else {
            QPoint::new(-c1.y.clone(), c1.x.clone())
        };
        let mut order: Vec<(BigRat, usize)> = pts.iter().enumerate().map(|(i, p)| (p.dot(&v), i)).collect();
        order.sort();
        let mut top: Vec<usize> = order[n - j..].iter().map(|&(_, i)| i).collect();
        top.sort_unstable();
        sets.insert(top);
    }
    sets.len() as u64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::ratio;
    use crate::lattice::integer_window;

    fn z2(m: i64) -> Arrangement {
        Arrangement::build_default(&integer_window(m).unwrap()).unwrap()
    }

    #[test]
    fn first_two_zones_of_z2() {
        let arr = z2(3);
        let z1 = zone_report(&arr, 1).unwrap();
        assert_eq!(z1.r_sq, ratio(1, 4));
        assert_eq!(z1.big_r_sq, ratio(1, 2));
        assert_eq!(z1.area, rat(1));
        assert_eq!(z1.n_chambers, 1);
        assert!((z1.outer_perimeter - 4.0).abs() < 1e-12);
        let z2 = zone_report(&arr, 2).unwrap();
        assert_eq!(z2.r_sq, ratio(1, 4));
        assert_eq!(z2.big_r_sq, rat(1));
        assert_eq!(z2.area, rat(1));
        assert_eq!(z2.n_chambers, 4);
        assert_eq!(z2.max_chamber_area, ratio(1, 4));
        assert_eq!(z2.cum_area_over_k, rat(1));
        assert!(z2.distortion > 1.0);
        assert!(zone_report(&arr, 0).is_err());
    }

    #[test]
    fn bound_plugins() {
        let b = lattice_bounds(2, 1);
        let expect = (1.0 / std::f64::consts::PI).sqrt() + 2f64.sqrt() / 2.0;
        assert!((b.big_r_upper - expect).abs() < 1e-12);
        assert!((lattice_bounds(2, 2).r_upper - 0.5642).abs() < 1e-4);
        assert_eq!(lattice_bounds(3, 7).w_upper, 3f64.sqrt());
        let a = lattice_bounds(2, 10);
        let c = perturbed_bounds(2, 10, 0.0);
        assert_eq!(a.r_lower, c.r_lower);
        assert_eq!(a.big_r_upper, c.big_r_upper);
        assert_eq!(a.w_upper, c.w_upper);
        let t = perturbed_bounds(2, 34, 2f64.sqrt() / 2.0);
        assert!((t.big_r_upper - 4.704).abs() < 1e-3);
        assert!((t.w_upper - 2.0 * 2f64.sqrt()).abs() < 1e-12);
        assert!((unit_ball_volume(3) - 4.0 / 3.0 * std::f64::consts::PI).abs() < 1e-12);
    }

    #[test]
    fn diameter_bound() {
        let b = chamber_diameter_bound(2, 16);
        let c = 36.0 * 2f64.sqrt() * std::f64::consts::PI.sqrt();
        assert!((b.value - c / 2.0).abs() < 1e-9);
        assert!((b.threshold - 8143.0).abs() < 1.0);
        assert!(!b.valid);
        assert!(chamber_diameter_bound(2, 9000).valid);
        let b3 = chamber_diameter_bound(3, 16);
        let nu3 = unit_ball_volume(3);
        let c3 = 54.0 * 3f64.sqrt() * nu3.cbrt();
        assert!((b3.value - c3 / 2.0).abs() < 1e-9);
    }

    #[test]
    fn rays_of_z2() {
        let g = integer_window(9).unwrap();
        let p = ray_profile(&g, [1, 0]).unwrap();
        let head: Vec<BigRat> = p.crossings[..5].to_vec();
        assert_eq!(head, vec![ratio(1, 2), rat(1), rat(1), rat(1), ratio(5, 4)]);
        let d = ray_profile(&g, [1, 1]).unwrap();
        assert_eq!(d.dist_sq(1).unwrap(), ratio(1, 2));
        for u in ring_directions(64) {
            assert!(ray_profile(&g, u).unwrap().alpha(1).unwrap() * rat(1) > rat(0));
            assert!(ray_profile(&g, u).unwrap().distance(1).unwrap() >= 0.5 - 1e-15);
        }
        assert!(ray_profile(&g, [0, 0]).is_err());
    }

    #[test]
    fn ring_enumeration() {
        let d = ring_directions(64);
        assert_eq!(d.len(), 64);
        assert_eq!(d[0], [8, 0]);
        assert_eq!(d.iter().collect::<BTreeSet<_>>().len(), 64);
        assert!(d.iter().all(|u| u[0].abs().max(u[1].abs()) == 8));
        assert_eq!(
            ring_directions(8),
            vec![[1, 0], [1, 1], [0, 1], [-1, 1], [-1, 0], [-1, -1], [0, -1], [1, -1]]
        );
        assert_eq!(ring_directions(4), vec![[1, 0], [0, 1], [-1, 0], [0, -1]]);
    }

    #[test]
    fn gap_is_zero_for_identity() {
        let g = integer_window(5).unwrap();
        let s = stability_gap(&g, &g, 6, &ring_directions(16)).unwrap();
        assert_eq!(s.max_gap, 0.0);
        assert!(s.per_direction.iter().all(|d| d.gap.is_zero()));
    }

    #[test]
    fn circle_counts() {
        assert_eq!(circle_lattice_count(&QPoint::origin(), &rat(25)).unwrap(), 12);
        let c = QPoint::new(ratio(1, 2), rat(0));
        assert_eq!(circle_lattice_count(&c, &ratio(1, 4)).unwrap(), 2);
        assert_eq!(circle_lattice_count(&QPoint::origin(), &rat(2)).unwrap(), 4);
        assert_eq!(circle_lattice_count(&QPoint::origin(), &rat(3)).unwrap(), 0);
        assert!(circle_lattice_count(&QPoint::origin(), &rat(0)).is_err());
    }

    #[test]
    fn knear_small_k() {
        let arr = z2(5);
        assert_eq!(knear_count(&arr, 1), 0);
        assert_eq!(knear_count(&arr, 2), 4);
        let mut prev = 0;
        for k in 1..=8 {
            let c = knear_count(&arr, k);
            assert!(c >= prev);
            prev = c;
        }
    }

    #[test]
    fn inversion() {
        assert_eq!(invert(&QPoint::from_ints(1, 0)).unwrap(), QPoint::from_ints(1, 0));
        assert_eq!(
            invert(&QPoint::from_ints(2, 0)).unwrap(),
            QPoint::new(ratio(1, 2), rat(0))
        );
        let x = QPoint::new(ratio(3, 7), ratio(-5, 11));
        assert_eq!(invert(&invert(&x).unwrap()).unwrap(), x);
        assert_eq!(invert(&QPoint::origin()), Err(Error::InvertOrigin));
    }

    #[test]
    fn ksets_small() {
        let tri = [
            QPoint::from_ints(0, 0),
            QPoint::from_ints(1, 0),
            QPoint::from_ints(0, 1),
        ];
        assert_eq!(ksets_count(&tri, 1), 3);
        assert_eq!(ksets_count(&tri, 0), 1);
        assert_eq!(ksets_count(&tri, 3), 1);
        assert_eq!(ksets_count(&tri, 4), 0);
        let sq = [
            QPoint::from_ints(0, 0),
            QPoint::from_ints(1, 0),
            QPoint::from_ints(1, 1),
            QPoint::from_ints(0, 1),
        ];
        assert_eq!(ksets_count(&sq, 2), 4);
        // Collinear points: only prefixes and suffixes.
        let line: Vec<QPoint> = (0..5).map(|i| QPoint::from_ints(i, 0)).collect();
        assert_eq!(ksets_count(&line, 2), 2);
    }

    #[test]
    fn kth_smallest_ties() {
        let v = [5, 1, 3, 1, 2];
        assert_eq!(kth_smallest(&v, 1), Some(1));
        assert_eq!(kth_smallest(&v, 2), Some(1));
        assert_eq!(kth_smallest(&v, 3), Some(2));
        assert_eq!(kth_smallest(&v, 6), None);
        assert_eq!(kth_smallest(&v, 0), None);
    }
}
