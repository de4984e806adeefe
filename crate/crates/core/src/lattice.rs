//! Generator sets: integer lattice windows, their random perturbations, the
//! reliability cut-off for finite windows, and the adversarial perturbation
//! that inflates one chamber.
//!
//! Points are stored as integers at a common scale `p`, so the true position
//! of `[x, y]` is `(x/p, y/p)`. The `i`-th stored point is always the image of
//! the `i`-th point of [`window_points`].

use std::cmp::Ordering;
use std::collections::HashSet;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::{bisector_of, rat, ratio, to_f64, BigRat, BisectorLine, HomPoint, QPoint};

/// Default integer scale for perturbed sets.
pub const DEFAULT_SCALE: i64 = 10_000;

/// Origin-anchored generators at a common integer scale.
///
/// Serialized as `{scale, m, q, seed, points: [[x, y], ...]}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GeneratorSet {
    pub scale: i64,
    pub m: i64,
    /// Largest per-coordinate displacement, in scaled units.
    pub q: i64,
    pub seed: u64,
    pub points: Vec<[i64; 2]>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PerturbationConfig {
    pub m: i64,
    pub p: i64,
    pub q: i64,
    pub seed: u64,
}

impl PerturbationConfig {
    pub fn new(m: i64, q: i64, seed: u64) -> Self {
        Self {
            m,
            p: DEFAULT_SCALE,
            q,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.m < 1 {
            return Err(Error::InvalidWindow(self.m));
        }
        if self.p < 1 {
            return Err(Error::InvalidScale(self.p));
        }
        // q = p/2 is the "strong" setting; collisions are redrawn in `perturb`
        if self.q < 0 || 2 * self.q > self.p {
            return Err(Error::InvalidStrength { q: self.q, p: self.p });
        }
        Ok(())
    }

    /// Strength in lattice units, `q/p`.
    pub fn tau(&self) -> BigRat {
        ratio(self.q, self.p)
    }
}

/// Nonzero points of `[-m, m]^2`, `x` outer and `y` inner, both ascending.
pub fn window_points(m: i64) -> Vec<[i64; 2]> {
    let mut pts = Vec::with_capacity(((2 * m + 1) * (2 * m + 1) - 1).max(0) as usize);
    for x in -m..=m {
        for y in -m..=m {
            if x != 0 || y != 0 {
                pts.push([x, y]);
            }
        }
    }
    pts
}

pub fn integer_window(m: i64) -> Result<GeneratorSet> {
    if m < 1 {
        return Err(Error::InvalidWindow(m));
    }
    Ok(GeneratorSet {
        scale: 1,
        m,
        q: 0,
        seed: 0,
        points: window_points(m),
    })
}

/// Uniform integer in `[-q, q]` by rejection on 64-bit words, so the stream
/// is reproducible from the ChaCha8 keystream alone.
fn uniform_offset(rng: &mut ChaCha8Rng, q: i64) -> i64 {
    let span = (2 * q + 1) as u64;
    let zone = u64::MAX - (u64::MAX % span);
    loop {
        let r = rng.next_u64();
        if r < zone {
            return (r % span) as i64 - q;
        }
    }
}

/// Random perturbation of the window at scale `p`.
///
/// The generator is ChaCha8 seeded with `seed` through `seed_from_u64`. Each
/// window point in [`window_points`] order draws `dx` then `dy`. At `q = p/2`
/// two images can coincide; the later point then draws again.
pub fn perturb(cfg: &PerturbationConfig) -> Result<GeneratorSet> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut seen: HashSet<[i64; 2]> = HashSet::new();
    let mut points = Vec::new();
    for a in window_points(cfg.m) {
        let base = [a[0] * cfg.p, a[1] * cfg.p];
        let img = loop {
            let dx = uniform_offset(&mut rng, cfg.q);
            let dy = uniform_offset(&mut rng, cfg.q);
            let img = [base[0] + dx, base[1] + dy];
            if img != [0, 0] && !seen.contains(&img) {
                break img;
            }
        };
        seen.insert(img);
        points.push(img);
    }
    Ok(GeneratorSet {
        scale: cfg.p,
        m: cfg.m,
        q: cfg.q,
        seed: cfg.seed,
        points,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct Magnitude {
    /// Largest squared displacement in lattice units.
    pub sq: BigRat,
    pub value: f64,
}

impl GeneratorSet {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn point(&self, i: usize) -> QPoint {
        QPoint::from_scaled(self.points[i], self.scale)
    }

    pub fn lines(&self) -> Vec<BisectorLine> {
        self.points
            .iter()
            .map(|&a| bisector_of(a).expect("generator sets exclude the origin"))
            .collect()
    }

    pub fn validate(&self) -> Result<()> {
        if self.scale < 1 {
            return Err(Error::InvalidScale(self.scale));
        }
        let bound = self.scale * self.m + self.q;
        let mut seen = HashSet::new();
        for &pt in &self.points {
            if pt == [0, 0] {
                return Err(Error::OriginGenerator);
            }
            if !seen.insert(pt) {
                return Err(Error::Collision(pt));
            }
            if pt[0].abs() > bound || pt[1].abs() > bound {
                return Err(Error::InvalidStrength {
                    q: self.q,
                    p: self.scale,
                });
            }
        }
        Ok(())
    }

    /// Largest displacement from the lattice position, in lattice units.
    pub fn magnitude(&self) -> Magnitude {
        let p = self.scale;
        let mut best: i128 = 0;
        for (img, a) in self.points.iter().zip(window_points(self.m)) {
            let dx = (img[0] - a[0] * p) as i128;
            let dy = (img[1] - a[1] * p) as i128;
            best = best.max(dx * dx + dy * dy);
        }
        let sq = BigRat::new(BigInt::from(best), BigInt::from(p as i128 * p as i128));
        let value = to_f64(&sq).sqrt();
        Magnitude { sq, value }
    }

    /// Number of generators strictly closer to `x` than the origin.
    pub fn depth_of_point(&self, x: &QPoint) -> usize {
        let h = HomPoint::new(x);
        self.points
            .iter()
            .filter(|&&a| h.generator_closer(a, self.scale))
            .count()
    }

    /// Whether `x` is equidistant from the origin and some generator.
    pub fn on_some_bisector(&self, x: &QPoint) -> bool {
        let h = HomPoint::new(x);
        self.points
            .iter()
            .any(|&a| h.generator_side(a, self.scale) == Ordering::Equal)
    }

    /// Reliability cut-off for this set's window and strength.
    pub fn reliability(&self) -> ReliabilityBound {
        reliable_k(self.m, self.q, self.scale)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ReliabilityBound {
    pub m: i64,
    /// Strength `q/p` in lattice units.
    pub tau: BigRat,
    /// Largest `k` whose zone in the finite window provably matches the
    /// infinite set.
    pub kmax: u64,
}

const PI_DIGITS: &str = "314159265358979323846264338327950288419";
const DIGITS: u32 = 38;

/// `(lo, hi)` rational bounds on pi, 38 decimals (about 128 bits).
pub fn pi_bounds() -> (BigRat, BigRat) {
    let scale = BigInt::from(10).pow(DIGITS);
    let lo: BigInt = PI_DIGITS.parse().expect("constant");
    let hi = &lo + 1;
    (BigRat::new(lo, scale.clone()), BigRat::new(hi, scale))
}

/// `(lo, hi)` rational bounds on sqrt(2) from an integer square root.
pub fn sqrt2_bounds() -> (BigRat, BigRat) {
    let scale = BigInt::from(10).pow(DIGITS);
    let s = (BigInt::from(2) * &scale * &scale).sqrt();
    let hi = &s + 1;
    (BigRat::new(s, scale.clone()), BigRat::new(hi, scale))
}

/// Largest `k < (pi/4) [m + 1 - sqrt2 - (2 sqrt2 + 1) tau]^2` with `tau = q/p`.
///
/// The bracket and pi are bounded from below with rational enclosures, so the
/// answer can only err low.
pub fn reliable_k(m: i64, q: i64, p: i64) -> ReliabilityBound {
    let tau = ratio(q, p);
    let (pi_lo, _) = pi_bounds();
    let (_, s2_hi) = sqrt2_bounds();
    let bracket = rat(m + 1) - &s2_hi - (rat(2) * &s2_hi + BigRat::one()) * &tau;
    let kmax = if bracket <= BigRat::zero() {
        0
    } else {
        let bound = pi_lo / rat(4) * &bracket * &bracket;
        let fl = bound.floor();
        let k = if fl == bound { fl - BigRat::one() } else { fl };
        k.to_integer().try_into().unwrap_or(0u64)
    };
    ReliabilityBound { m, tau, kmax }
}

/// Compares `sqrt(s)` with `sqrt(r2) + t` exactly (`s, r2 >= 0`).
pub fn cmp_sqrt_plus(s: &BigRat, r2: &BigRat, t: &BigRat) -> Ordering {
    // rhs negative: sqrt(s) >= 0 > rhs
    if t.is_negative() && t * t > *r2 {
        return Ordering::Greater;
    }
    // sqrt(s) vs sqrt(r2) + t, both sides nonnegative: square
    // s - r2 - t^2 vs 2 t sqrt(r2)
    let lhs = s - r2 - t * t;
    let rhs_sign = if t.is_zero() || r2.is_zero() {
        Ordering::Equal
    } else if t.is_positive() {
        Ordering::Greater
    } else {
        Ordering::Less
    };
    let lhs_sign = lhs.cmp(&BigRat::zero());
    if lhs_sign != rhs_sign {
        return lhs_sign.cmp(&rhs_sign);
    }
    if lhs_sign == Ordering::Equal {
        return Ordering::Equal;
    }
    let l2 = &lhs * &lhs;
    let r2v = rat(4) * t * t * r2;
    if lhs_sign == Ordering::Greater {
        l2.cmp(&r2v)
    } else {
        r2v.cmp(&l2)
    }
}

/// Perturbation that keeps every generator at distance at least `tau` from
/// the circle through the origin centred at `x`, which leaves a chamber of
/// the `k`-th zone containing the disk of radius `tau/2` around `x`.
///
/// Generators within `tau` of the circle move radially away from it to
/// distance `tau` (outside points outward, inside points towards `x`), then
/// snap to the nearest grid point at scale `p` that still clears the shell.
/// Snapping can add up to a couple of grid units to a displacement.
pub fn adversarial_perturbation(k: usize, tau: &BigRat, x: &QPoint, m: i64, p: i64) -> Result<GeneratorSet> {
    if k == 0 {
        return Err(Error::InvalidK);
    }
    if tau.is_negative() || *tau >= ratio(1, 2) {
        return Err(Error::InvalidTau(tau.to_string()));
    }
    if p < 1 {
        return Err(Error::InvalidScale(p));
    }
    let window = integer_window(m)?;
    if window.on_some_bisector(x) {
        return Err(Error::OnBisector(x.to_string()));
    }
    let depth = window.depth_of_point(x);
    if depth != k - 1 {
        return Err(Error::WrongZone {
            point: x.to_string(),
            depth,
            expected: k - 1,
        });
    }
    let identity: Vec<[i64; 2]> = window.points.iter().map(|a| [a[0] * p, a[1] * p]).collect();
    if k == 1 || tau.is_zero() {
        return Ok(GeneratorSet {
            scale: p,
            m,
            q: 0,
            seed: 0,
            points: identity,
        });
    }

    let r2 = x.norm_sq();
    let neg_tau = -tau.clone();
    let xf = x.to_f64();
    let rf = to_f64(&r2).sqrt();
    let tf = to_f64(tau);
    let mut points = Vec::with_capacity(identity.len());
    let mut max_off = 0i64;
    for (a, &base) in window.points.iter().zip(&identity) {
        let ap = QPoint::from_ints(a[0], a[1]);
        let s = x.dist_sq(&ap);
        let inside = s < r2;
        let in_shell = if inside {
            cmp_sqrt_plus(&s, &r2, &neg_tau) == Ordering::Greater
        } else {
            cmp_sqrt_plus(&s, &r2, tau) == Ordering::Less
        };
        if !in_shell {
            points.push(base);
            continue;
        }
        // ideal radial target in scaled units
        let af = [a[0] as f64, a[1] as f64];
        let dist = to_f64(&s).sqrt();
        let delta = (dist - rf).abs();
        let shift = tf - delta;
        let dir = [(xf[0] - af[0]) / dist, (xf[1] - af[1]) / dist];
        let sign = if inside { 1.0 } else { -1.0 };
        let target = [
            (af[0] + sign * shift * dir[0]) * p as f64,
            (af[1] + sign * shift * dir[1]) * p as f64,
        ];
        let clears = |g: [i64; 2]| {
            let gs = x.dist_sq(&QPoint::from_scaled(g, p));
            if inside {
                cmp_sqrt_plus(&gs, &r2, &neg_tau) != Ordering::Greater
            } else {
                cmp_sqrt_plus(&gs, &r2, tau) != Ordering::Less
            }
        };
        let mut chosen = None;
        for radius in 1..=8i64 {
            let cx = target[0].round() as i64;
            let cy = target[1].round() as i64;
            let mut best: Option<(i128, [i64; 2])> = None;
            for gx in cx - radius..=cx + radius {
                for gy in cy - radius..=cy + radius {
                    let g = [gx, gy];
                    if !clears(g) {
                        continue;
                    }
                    let dx = (gx - base[0]) as i128;
                    let dy = (gy - base[1]) as i128;
                    let d = dx * dx + dy * dy;
                    if best.is_none_or(|(bd, bg)| (d, g) < (bd, bg)) {
                        best = Some((d, g));
                    }
                }
            }
            if let Some((_, g)) = best {
                chosen = Some(g);
                break;
            }
        }
        let g = chosen.ok_or(Error::SnapFailed(*a))?;
        max_off = max_off.max((g[0] - base[0]).abs()).max((g[1] - base[1]).abs());
        points.push(g);
    }
    let mut seen = HashSet::new();
    for &pt in &points {
        if pt == [0, 0] || !seen.insert(pt) {
            return Err(Error::Collision(pt));
        }
    }
    Ok(GeneratorSet {
        scale: p,
        m,
        q: max_off,
        seed: 0,
        points,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn window_sizes() {
        assert_eq!(integer_window(1).unwrap().len(), 8);
        assert_eq!(integer_window(2).unwrap().len(), 24);
        assert_eq!(integer_window(9).unwrap().len(), 360);
        assert!(integer_window(0).is_err());
    }

    #[test]
    fn zero_strength_is_identity() {
        let g = perturb(&PerturbationConfig::new(3, 0, 11)).unwrap();
        for (img, a) in g.points.iter().zip(window_points(3)) {
            assert_eq!(*img, [a[0] * DEFAULT_SCALE, a[1] * DEFAULT_SCALE]);
        }
        assert_eq!(g.magnitude().sq, rat(0));
    }

    #[test]
    fn strong_perturbation_stays_in_box() {
        let cfg = PerturbationConfig::new(9, 5000, 3);
        let g = perturb(&cfg).unwrap();
        g.validate().unwrap();
        for (img, a) in g.points.iter().zip(window_points(9)) {
            assert!((img[0] - a[0] * cfg.p).abs() <= 5000);
            assert!((img[1] - a[1] * cfg.p).abs() <= 5000);
        }
        assert!(g.magnitude().value <= 2f64.sqrt() * 0.5);
    }

    #[test]
    fn perturbation_is_deterministic() {
        let cfg = PerturbationConfig::new(4, 1000, 42);
        assert_eq!(perturb(&cfg).unwrap(), perturb(&cfg).unwrap());
        let other = PerturbationConfig { seed: 43, ..cfg };
        assert_ne!(perturb(&cfg).unwrap(), perturb(&other).unwrap());
    }

    #[test]
    fn rejects_excessive_strength() {
        let cfg = PerturbationConfig {
            m: 2,
            p: 10,
            q: 6,
            seed: 0,
        };
        assert!(matches!(perturb(&cfg), Err(Error::InvalidStrength { .. })));
    }

    #[test]
    fn half_scale_strength_stays_injective() {
        // p = 2, q = 1 makes collisions frequent
        for seed in 0..20 {
            let g = perturb(&PerturbationConfig { m: 3, p: 2, q: 1, seed }).unwrap();
            g.validate().unwrap();
        }
    }

    #[test]
    fn corner_displacement_magnitude() {
        let mut g = integer_window(2).unwrap();
        g.scale = 100;
        for pt in g.points.iter_mut() {
            pt[0] *= 100;
            pt[1] *= 100;
        }
        g.q = 7;
        g.points[5][0] += 7;
        g.points[5][1] += 7;
        let mag = g.magnitude();
        assert_eq!(mag.sq, ratio(98, 10_000));
        assert!((mag.value - 2f64.sqrt() * 0.07).abs() < 1e-15);
    }

    #[test]
    fn reliability_reference_values() {
        assert_eq!(reliable_k(9, 0, 1).kmax, 57);
        assert_eq!(reliable_k(9, 200, 10_000).kmax, 56);
        assert_eq!(reliable_k(9, 1000, 10_000).kmax, 52);
        assert_eq!(reliable_k(9, 5000, 10_000).kmax, 34);
        assert_eq!(reliable_k(1, 0, 1).kmax, 0);
    }

    #[test]
    fn constant_enclosures_are_tight() {
        let (lo, hi) = pi_bounds();
        assert!(to_f64(&lo) <= std::f64::consts::PI && std::f64::consts::PI <= to_f64(&hi));
        let (lo, hi) = sqrt2_bounds();
        assert!(&lo * &lo < rat(2) && &hi * &hi > rat(2));
    }

    #[test]
    fn sqrt_plus_comparisons() {
        // sqrt(4) vs sqrt(1) + 1
        assert_eq!(cmp_sqrt_plus(&rat(4), &rat(1), &rat(1)), Ordering::Equal);
        assert_eq!(cmp_sqrt_plus(&rat(5), &rat(1), &rat(1)), Ordering::Greater);
        assert_eq!(cmp_sqrt_plus(&rat(3), &rat(1), &rat(1)), Ordering::Less);
        // sqrt(1/4) vs sqrt(1) - 1/2
        assert_eq!(cmp_sqrt_plus(&ratio(1, 4), &rat(1), &ratio(-1, 2)), Ordering::Equal);
        assert_eq!(cmp_sqrt_plus(&ratio(1, 5), &rat(1), &ratio(-1, 2)), Ordering::Less);
        assert_eq!(cmp_sqrt_plus(&rat(0), &rat(1), &rat(-2)), Ordering::Greater);
        assert_eq!(cmp_sqrt_plus(&rat(2), &rat(2), &rat(0)), Ordering::Equal);
    }

    #[test]
    fn adversarial_single_point_example() {
        // x = (3/5, 0) sits in zone 2; only (1,0) lies within 2/5 of the circle
        let x = QPoint::new(ratio(3, 5), rat(0));
        let g = adversarial_perturbation(2, &ratio(2, 5), &x, 3, DEFAULT_SCALE).unwrap();
        let idx = window_points(3).iter().position(|&a| a == [1, 0]).unwrap();
        assert_eq!(g.points[idx], [8000, 0]);
        for (i, (img, a)) in g.points.iter().zip(window_points(3)).enumerate() {
            if i != idx {
                assert_eq!(*img, [a[0] * DEFAULT_SCALE, a[1] * DEFAULT_SCALE]);
            }
        }
    }

    #[test]
    fn adversarial_identity_for_zero_tau() {
        let x = QPoint::new(ratio(3, 5), rat(0));
        let g = adversarial_perturbation(2, &rat(0), &x, 3, 100).unwrap();
        assert_eq!(g.magnitude().sq, rat(0));
    }

    #[test]
    fn adversarial_rejects_bad_input() {
        let on_line = QPoint::new(ratio(1, 2), rat(0));
        assert!(matches!(
            adversarial_perturbation(2, &ratio(1, 5), &on_line, 3, 100),
            Err(Error::OnBisector(_))
        ));
        let x = QPoint::new(ratio(3, 5), rat(0));
        assert!(matches!(
            adversarial_perturbation(2, &ratio(1, 2), &x, 3, 100),
            Err(Error::InvalidTau(_))
        ));
        assert!(matches!(
            adversarial_perturbation(3, &ratio(1, 5), &x, 3, 100),
            Err(Error::WrongZone { .. })
        ));
    }
}
