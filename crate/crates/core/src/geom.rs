//! Exact rational geometry: points, Bragg lines, convex polygons.
//!
//! Every predicate here works on squared distances over [`BigRat`]; square
//! roots only appear in the `*_f64` reporting helpers.

use std::cmp::Ordering;
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Arbitrary-precision rational, always kept in lowest terms with a positive
/// denominator.
pub type BigRat = BigRational;

/// Integer as a rational.
pub fn rat(n: i64) -> BigRat {
    BigRat::from_integer(BigInt::from(n))
}

/// `num/den` as a rational. Panics on a zero denominator.
pub fn ratio(num: i64, den: i64) -> BigRat {
    BigRat::new(BigInt::from(num), BigInt::from(den))
}

/// Round-to-nearest double of an exact rational.
pub fn to_f64(v: &BigRat) -> f64 {
    v.to_f64().unwrap_or(f64::NAN)
}

/// Square root of a nonnegative rational, in double precision.
pub fn sqrt_f64(v: &BigRat) -> f64 {
    to_f64(v).sqrt()
}

fn morton(x: f64, y: f64, bbox: [f64; 4]) -> u64 {
    let q = |v: f64, lo: f64, hi: f64| {
        let t = if hi > lo { (v - lo) / (hi - lo) } else { 0.0 };
        (t * 65535.0).clamp(0.0, 65535.0) as u64
    };
    let (a, b) = (q(x, bbox[0], bbox[2]), q(y, bbox[1], bbox[3]));
    (0..16).fold(0, |z, i| z | ((a >> i & 1) << (2 * i)) | ((b >> i & 1) << (2 * i + 1)))
}

fn tree_sum(v: &[BigRat]) -> BigRat {
    match v.len() {
        0 => BigRat::zero(),
        1 => v[0].clone(),
        n => tree_sum(&v[..n / 2]) + tree_sum(&v[n / 2..]),
    }
}

/// Exact sum of values attached to positions in the plane.
///
/// Values are added pairwise in Z-order of their positions, so partial sums
/// cover compact regions and their denominators stay small when the values
/// are areas of adjacent pieces.
pub fn sum_spatial(mut items: Vec<([f64; 2], BigRat)>) -> BigRat {
    let mut bbox = [f64::INFINITY, f64::INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY];
    for (p, _) in &items {
        bbox = [
            bbox[0].min(p[0]),
            bbox[1].min(p[1]),
            bbox[2].max(p[0]),
            bbox[3].max(p[1]),
        ];
    }
    items.sort_by_cached_key(|(p, _)| morton(p[0], p[1], bbox));
    let values: Vec<BigRat> = items.into_iter().map(|(_, v)| v).collect();
    tree_sum(&values)
}

/// `"num/den"`, the export format for exact values.
pub fn rat_string(v: &BigRat) -> String {
    format!("{}/{}", v.numer(), v.denom())
}

/// Parses `"num/den"` or a plain integer.
pub fn parse_rat(s: &str) -> Option<BigRat> {
    match s.split_once('/') {
        Some((n, d)) => {
            let n: BigInt = n.trim().parse().ok()?;
            let d: BigInt = d.trim().parse().ok()?;
            if d.is_zero() {
                None
            } else {
                Some(BigRat::new(n, d))
            }
        }
        None => s.trim().parse::<BigInt>().ok().map(BigRat::from_integer),
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct QPoint {
    pub x: BigRat,
    pub y: BigRat,
}

impl QPoint {
    pub fn new(x: BigRat, y: BigRat) -> Self {
        Self { x, y }
    }

    pub fn origin() -> Self {
        Self::new(BigRat::zero(), BigRat::zero())
    }

    pub fn from_ints(x: i64, y: i64) -> Self {
        Self::new(rat(x), rat(y))
    }

    /// The true position of an integer point stored at scale `p`.
    pub fn from_scaled(pt: [i64; 2], scale: i64) -> Self {
        Self::new(ratio(pt[0], scale), ratio(pt[1], scale))
    }

    pub fn is_origin(&self) -> bool {
        self.x.is_zero() && self.y.is_zero()
    }

    pub fn norm_sq(&self) -> BigRat {
        &self.x * &self.x + &self.y * &self.y
    }

    pub fn dist_sq(&self, other: &QPoint) -> BigRat {
        let dx = &self.x - &other.x;
        let dy = &self.y - &other.y;
        &dx * &dx + &dy * &dy
    }

    pub fn dot(&self, other: &QPoint) -> BigRat {
        &self.x * &other.x + &self.y * &other.y
    }

    pub fn sub(&self, other: &QPoint) -> QPoint {
        QPoint::new(&self.x - &other.x, &self.y - &other.y)
    }

    pub fn add(&self, other: &QPoint) -> QPoint {
        QPoint::new(&self.x + &other.x, &self.y + &other.y)
    }

    pub fn scale(&self, s: &BigRat) -> QPoint {
        QPoint::new(&self.x * s, &self.y * s)
    }

    pub fn to_f64(&self) -> [f64; 2] {
        [to_f64(&self.x), to_f64(&self.y)]
    }
}

impl fmt::Display for QPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.x, self.y)
    }
}

/// Orientation of `c` relative to the directed line `a -> b`: `Greater` for a
/// left turn.
pub fn orient(a: &QPoint, b: &QPoint, c: &QPoint) -> Ordering {
    let [xa, ya, da] = homogeneous(a);
    let [xb, yb, db] = homogeneous(b);
    let [xc, yc, dc] = homogeneous(c);
    // the 3x3 determinant is the cross product scaled by da * db * dc > 0
    let det = &xa * (&yb * &dc - &yc * &db) - &ya * (&xb * &dc - &xc * &db) + &da * (&xb * &yc - &xc * &yb);
    det.sign_ord()
}

/// `[X, Y, D]` with `x = X/D`, `y = Y/D` and `D > 0`, without a gcd.
pub fn homogeneous(p: &QPoint) -> [BigInt; 3] {
    let (dx, dy) = (p.x.denom(), p.y.denom());
    if dx == dy {
        [p.x.numer().clone(), p.y.numer().clone(), dx.clone()]
    } else {
        [p.x.numer() * dy, p.y.numer() * dx, dx * dy]
    }
}

trait SignOrd {
    fn sign_ord(&self) -> Ordering;
}

impl SignOrd for BigInt {
    fn sign_ord(&self) -> Ordering {
        match self.sign() {
            num_bigint::Sign::Minus => Ordering::Less,
            num_bigint::Sign::NoSign => Ordering::Equal,
            num_bigint::Sign::Plus => Ordering::Greater,
        }
    }
}

/// Sign of `|x - p|^2 - |x - q|^2`.
pub fn cmp_sq_dist(x: &QPoint, p: &QPoint, q: &QPoint) -> Ordering {
    x.dist_sq(p).cmp(&x.dist_sq(q))
}

/// The Bragg line `2 a1 x + 2 a2 y = a1^2 + a2^2` between the origin and the
/// integer point `(a1, a2)`.
///
/// Coordinates are in the generator's own integer units; for a generator set
/// at scale `p` the line in true coordinates is `2p<a, x> = c`, which
/// [`BisectorLine::side_at_scale`] evaluates.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct BisectorLine {
    a1: BigInt,
    a2: BigInt,
    c: BigInt,
}

pub fn bisector_of(a: [i64; 2]) -> Result<BisectorLine> {
    if a == [0, 0] {
        return Err(Error::OriginGenerator);
    }
    let a1 = BigInt::from(a[0]);
    let a2 = BigInt::from(a[1]);
    let c = &a1 * &a1 + &a2 * &a2;
    Ok(BisectorLine { a1, a2, c })
}

impl BisectorLine {
    pub fn a1(&self) -> &BigInt {
        &self.a1
    }

    pub fn a2(&self) -> &BigInt {
        &self.a2
    }

    pub fn c(&self) -> &BigInt {
        &self.c
    }

    /// Sign of `2<a, x> - c`; `Greater` means `x` is strictly closer to the
    /// generator than to the origin.
    pub fn side(&self, x: &QPoint) -> Ordering {
        self.side_at_scale(x, 1)
    }

    /// Like [`side`](Self::side), with `x` in true coordinates and the
    /// generator stored at scale `p`.
    pub fn side_at_scale(&self, x: &QPoint, p: i64) -> Ordering {
        let two_p = BigInt::from(2 * p);
        let lhs = (&x.x * BigRat::from_integer(&self.a1 * &two_p)) + (&x.y * BigRat::from_integer(&self.a2 * &two_p));
        lhs.cmp(&BigRat::from_integer(self.c.clone()))
    }

    pub fn contains(&self, x: &QPoint) -> bool {
        self.side(x) == Ordering::Equal
    }

    /// A direction vector along the line, `(-a2, a1)`.
    pub fn direction(&self) -> [BigInt; 2] {
        [-self.a2.clone(), self.a1.clone()]
    }
}

/// Intersection of two Bragg lines by Cramer's rule, in the lines' own units.
/// `None` when the lines are parallel.
pub fn line_intersect(l1: &BisectorLine, l2: &BisectorLine) -> Option<QPoint> {
    line_intersect_scaled(l1, l2, 1)
}

/// Intersection of two Bragg lines of generators stored at scale `p`, in
/// true coordinates.
pub fn line_intersect_scaled(l1: &BisectorLine, l2: &BisectorLine, p: i64) -> Option<QPoint> {
    let det = BigInt::from(2) * p * (&l1.a1 * &l2.a2 - &l2.a1 * &l1.a2);
    if det.is_zero() {
        return None;
    }
    let dx = &l1.c * &l2.a2 - &l2.c * &l1.a2;
    let dy = &l1.a1 * &l2.c - &l2.a1 * &l1.c;
    Some(QPoint::new(BigRat::new(dx, det.clone()), BigRat::new(dy, det)))
}

/// A point in homogeneous integer coordinates `(x/d, y/d)`, `d > 0`.
///
/// Counting which generators are strictly closer than the origin is the hot
/// loop of zone labelling; this form avoids a gcd per comparison.
///
/// Each comparison is first evaluated in `f64` with a rigorous error bound
/// and falls back to exact integers only when the sign is in doubt.
#[derive(Clone, Debug)]
pub struct HomPoint {
    x: BigInt,
    y: BigInt,
    d: BigInt,
    approx: [f64; 2],
}

impl HomPoint {
    pub fn new(p: &QPoint) -> Self {
        let d = p.x.denom().lcm(p.y.denom());
        let x = p.x.numer() * (&d / p.x.denom());
        let y = p.y.numer() * (&d / p.y.denom());
        Self {
            x,
            y,
            d,
            approx: p.to_f64(),
        }
    }

    fn filtered_side(&self, a: [i64; 2], p: i64) -> Option<Ordering> {
        let [fx, fy] = self.approx;
        if !(fx.is_finite() && fy.is_finite()) {
            return None;
        }
        let (a0, a1, tp) = (a[0] as f64, a[1] as f64, 2.0 * p as f64);
        let c = a0 * a0 + a1 * a1;
        let s = tp * (a0 * fx + a1 * fy) - c;
        let mag = tp * (a0.abs() * fx.abs() + a1.abs() * fy.abs()) + c;
        let err = mag * 64.0 * f64::EPSILON + f64::MIN_POSITIVE;
        if s > err {
            Some(Ordering::Greater)
        } else if s < -err {
            Some(Ordering::Less)
        } else {
            None
        }
    }

    /// Whether the generator `a` (at scale `p`) is strictly closer to this
    /// point than the origin: `2p<a, x> > |a|^2`.
    pub fn generator_closer(&self, a: [i64; 2], p: i64) -> bool {
        self.generator_side(a, p) == Ordering::Greater
    }

    pub fn generator_side(&self, a: [i64; 2], p: i64) -> Ordering {
        if let Some(o) = self.filtered_side(a, p) {
            return o;
        }
        self.exact_side(a, p)
    }

    fn exact_side(&self, a: [i64; 2], p: i64) -> Ordering {
        let lhs = (&self.x * a[0] + &self.y * a[1]) * (2 * p);
        let c = (a[0] as i128) * (a[0] as i128) + (a[1] as i128) * (a[1] as i128);
        lhs.cmp(&(&self.d * c))
    }
}

/// A strictly convex polygon with counterclockwise vertices.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConvexPolygon {
    vertices: Vec<QPoint>,
}

impl ConvexPolygon {
    /// Drops repeated and collinear vertices, then checks strict convexity
    /// and counterclockwise orientation.
    pub fn new(vertices: Vec<QPoint>) -> Result<Self> {
        let mut vs: Vec<QPoint> = Vec::with_capacity(vertices.len());
        for v in vertices {
            if vs.last() != Some(&v) {
                vs.push(v);
            }
        }
        while vs.len() > 1 && vs.first() == vs.last() {
            vs.pop();
        }
        // collinear removal until stable
        loop {
            let n = vs.len();
            if n < 3 {
                return Err(Error::DegeneratePolygon(n));
            }
            let drop = (0..n).find(|&i| orient(&vs[(i + n - 1) % n], &vs[i], &vs[(i + 1) % n]) == Ordering::Equal);
            match drop {
                Some(i) => {
                    vs.remove(i);
                }
                None => break,
            }
        }
        let n = vs.len();
        for i in 0..n {
            if orient(&vs[i], &vs[(i + 1) % n], &vs[(i + 2) % n]) != Ordering::Greater {
                return Err(Error::NotConvex);
            }
        }
        Ok(Self { vertices: vs })
    }

    pub(crate) fn from_trusted(vertices: Vec<QPoint>) -> Self {
        Self { vertices }
    }

    pub fn vertices(&self) -> &[QPoint] {
        &self.vertices
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn edges(&self) -> impl Iterator<Item = (&QPoint, &QPoint)> {
        let n = self.vertices.len();
        (0..n).map(move |i| (&self.vertices[i], &self.vertices[(i + 1) % n]))
    }

    /// Exact shoelace area.
    pub fn area(&self) -> BigRat {
        // one common denominator, one reduction at the end
        let h: Vec<[BigInt; 3]> = self.vertices.iter().map(homogeneous).collect();
        let den: BigInt = h.iter().map(|v| &v[2]).product();
        let n = h.len();
        let mut num = BigInt::zero();
        for i in 0..n {
            let (a, b) = (&h[i], &h[(i + 1) % n]);
            let rest = &den / (&a[2] * &b[2]);
            num += (&a[0] * &b[1] - &b[0] * &a[1]) * rest;
        }
        BigRat::new(num, den * 2)
    }

    /// Largest squared distance between two vertices.
    pub fn diameter_sq(&self) -> BigRat {
        let mut best = BigRat::zero();
        for (i, a) in self.vertices.iter().enumerate() {
            for b in &self.vertices[i + 1..] {
                let d = a.dist_sq(b);
                if d > best {
                    best = d;
                }
            }
        }
        best
    }

    /// Squared distances from the origin to the nearest and farthest points
    /// of the polygon boundary.
    ///
    /// The minimum looks at vertices and at perpendicular feet that fall
    /// strictly inside an edge; the maximum is always a vertex.
    pub fn origin_dist_range(&self) -> (BigRat, BigRat) {
        let mut lo: Option<BigRat> = None;
        let mut hi = BigRat::zero();
        for v in &self.vertices {
            let d = v.norm_sq();
            if lo.as_ref().is_none_or(|l| &d < l) {
                lo = Some(d.clone());
            }
            if d > hi {
                hi = d;
            }
        }
        let mut lo = lo.unwrap_or_else(BigRat::zero);
        for (a, b) in self.edges() {
            let ab = b.sub(a);
            let len_sq = ab.norm_sq();
            let t = -a.dot(&ab) / &len_sq;
            if t > BigRat::zero() && t < BigRat::one() {
                let foot = a.add(&ab.scale(&t));
                let d = foot.norm_sq();
                if d < lo {
                    lo = d;
                }
            }
        }
        (lo, hi)
    }

    /// Vertex average; strictly interior for a strictly convex polygon.
    pub fn centroid(&self) -> QPoint {
        let h: Vec<[BigInt; 3]> = self.vertices.iter().map(homogeneous).collect();
        let den: BigInt = h.iter().map(|v| &v[2]).product();
        let (mut sx, mut sy) = (BigInt::zero(), BigInt::zero());
        for v in &h {
            let rest = &den / &v[2];
            sx += &v[0] * &rest;
            sy += &v[1] * rest;
        }
        let den = den * h.len();
        QPoint::new(BigRat::new(sx, den.clone()), BigRat::new(sy, den))
    }

    /// `Greater` inside, `Equal` on the boundary, `Less` outside.
    pub fn locate(&self, x: &QPoint) -> Ordering {
        let mut on_edge = false;
        for (a, b) in self.edges() {
            match orient(a, b, x) {
                Ordering::Less => return Ordering::Less,
                Ordering::Equal => on_edge = true,
                Ordering::Greater => {}
            }
        }
        if on_edge {
            Ordering::Equal
        } else {
            Ordering::Greater
        }
    }

    /// Exact squared distance from `x` to the closed polygon (zero inside).
    pub fn dist_sq_to(&self, x: &QPoint) -> BigRat {
        if self.locate(x) != Ordering::Less {
            return BigRat::zero();
        }
        let mut best: Option<BigRat> = None;
        for (a, b) in self.edges() {
            let ab = b.sub(a);
            let t = x.sub(a).dot(&ab) / ab.norm_sq();
            let d = if t <= BigRat::zero() {
                x.dist_sq(a)
            } else if t >= BigRat::one() {
                x.dist_sq(b)
            } else {
                x.dist_sq(&a.add(&ab.scale(&t)))
            };
            if best.as_ref().is_none_or(|bd| &d < bd) {
                best = Some(d);
            }
        }
        best.unwrap_or_else(BigRat::zero)
    }

    /// Sum of edge lengths in double precision.
    pub fn perimeter_f64(&self) -> f64 {
        self.edges().map(|(a, b)| sqrt_f64(&a.dist_sq(b))).sum()
    }

    pub fn bbox_f64(&self) -> [f64; 4] {
        let mut bb = [f64::INFINITY, f64::INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY];
        for v in &self.vertices {
            let [x, y] = v.to_f64();
            bb[0] = bb[0].min(x);
            bb[1] = bb[1].min(y);
            bb[2] = bb[2].max(x);
            bb[3] = bb[3].max(y);
        }
        bb
    }
}

/// The polygon's vertices reflected through the line `y = x`, re-oriented.
pub fn mirror_diagonal(p: &ConvexPolygon) -> ConvexPolygon {
    let mut vs: Vec<QPoint> = p
        .vertices()
        .iter()
        .map(|v| QPoint::new(v.y.clone(), v.x.clone()))
        .collect();
    vs.reverse();
    ConvexPolygon::from_trusted(vs)
}
