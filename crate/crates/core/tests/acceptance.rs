//! Acceptance gate: one PASS/FAIL line per criterion, nonzero exit if any
//! criterion fails.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::sync::OnceLock;
use std::time::Instant;

use brillouin_core::arrangement::Arrangement;
use brillouin_core::geom::{rat, rat_string, ratio, QPoint};
use brillouin_core::lattice::{integer_window, perturb, reliable_k, GeneratorSet, PerturbationConfig, DEFAULT_SCALE};
use brillouin_core::metrics::{
    chamber_diameter_bound, circle_lattice_count, invert, knear_count, knear_points, ksets_count, perturbed_bounds,
    ray_profile, ring_directions, stability_gap, zone_reports, ZoneReport,
};
use brillouin_core::verify::adversarial_chamber;
use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

const M: i64 = 9;
const PERTURBED_SEED: u64 = 1;

struct Run {
    arr: Arrangement,
    reports: Vec<ZoneReport>,
    secs: f64,
}

fn run(g: GeneratorSet) -> Run {
    let t = Instant::now();
    let arr = Arrangement::build_default(&g).expect("build");
    let secs = t.elapsed().as_secs_f64();
    let kmax = arr.reliability().kmax as usize;
    let reports = zone_reports(&arr, kmax).expect("reports");
    Run { arr, reports, secs }
}

fn z2() -> &'static Run {
    static CELL: OnceLock<Run> = OnceLock::new();
    CELL.get_or_init(|| run(integer_window(M).unwrap()))
}

fn perturbed(q: i64) -> &'static Run {
    static CELLS: [OnceLock<Run>; 3] = [OnceLock::new(), OnceLock::new(), OnceLock::new()];
    let i = match q {
        200 => 0,
        1000 => 1,
        5000 => 2,
        _ => unreachable!(),
    };
    CELLS[i].get_or_init(|| run(perturb(&PerturbationConfig::new(M, q, PERTURBED_SEED)).unwrap()))
}

type Outcome = Result<String, String>;

fn ensure(ok: bool, msg: impl Into<String>) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn unit_areas() -> Outcome {
    let r = z2();
    ensure(
        r.reports.len() == 57,
        format!("expected 57 zones, got {}", r.reports.len()),
    )?;
    for z in &r.reports {
        ensure(z.reliable, format!("k={} flagged unreliable", z.k))?;
        ensure(z.area == rat(1), format!("k={}: area {}", z.k, rat_string(&z.area)))?;
    }
    Ok(format!("k=1..57 area = 1 exactly; m=9 build {:.1}s", r.secs))
}

fn integer_brackets() -> Outcome {
    let r = z2();
    let pi = std::f64::consts::PI;
    let half = 2f64.sqrt() / 2.0;
    let z1 = &r.reports[0];
    ensure(
        z1.r_sq == ratio(1, 4) && z1.big_r_sq == ratio(1, 2),
        "anchors r_1 = 1/2, R_1 = sqrt2/2",
    )?;
    let mut failures = Vec::new();
    for z in &r.reports {
        let k = z.k as f64;
        let (rho, rho1) = ((k / pi).sqrt(), ((k - 1.0) / pi).sqrt());
        if !(rho - half < z.r && z.r < rho1) {
            failures.push(format!("k={}: r={} vs ({}, {})", z.k, z.r, rho - half, rho1));
        }
        if !(rho < z.big_r && z.big_r < rho + half) {
            failures.push(format!("k={}: R={} vs ({}, {})", z.k, z.big_r, rho, rho + half));
        }
        if !(z.w < 2f64.sqrt()) {
            failures.push(format!("k={}: W={}", z.k, z.w));
        }
    }
    if failures.is_empty() {
        Ok("all brackets strict for k=1..57".into())
    } else {
        Err(format!("{} violation(s); first: {}", failures.len(), failures[0]))
    }
}

fn perturbed_brackets() -> Outcome {
    let mut out = Vec::new();
    for (q, expect) in [(200, 56), (1000, 52), (5000, 34)] {
        let r = perturbed(q);
        let tau = r.arr.generators().magnitude().value;
        let reliable: Vec<&ZoneReport> = r.reports.iter().filter(|z| z.reliable).collect();
        ensure(
            reliable.len() == expect,
            format!("q={q}: {} reliable zones, expected {expect}", reliable.len()),
        )?;
        for z in reliable {
            let b = perturbed_bounds(2, z.k, tau);
            ensure(
                b.r_lower < z.r && z.r <= z.big_r && z.big_r < b.big_r_upper && z.w < b.w_upper,
                format!("q={q}, k={}: r={}, R={}, W={}, bounds {:?}", z.k, z.r, z.big_r, z.w, b),
            )?;
        }
        out.push(format!("q={q}: tau={tau:.4}, k<={expect}"));
    }
    Ok(out.join("; "))
}

fn reliability_values() -> Outcome {
    let got: Vec<u64> = [0, 200, 1000, 5000]
        .iter()
        .map(|&q| reliable_k(M, q, DEFAULT_SCALE).kmax)
        .collect();
    ensure(got == [57, 56, 52, 34], format!("got {got:?}"))?;
    Ok(format!("{got:?}"))
}

fn chamber_bound() -> Outcome {
    let r = z2();
    ensure(
        r.reports[0].n_chambers == 1,
        format!("n(1)={}", r.reports[0].n_chambers),
    )?;
    ensure(
        r.reports[1].n_chambers == 4,
        format!("n(2)={}", r.reports[1].n_chambers),
    )?;
    let mut worst = (0usize, 0.0f64);
    for z in &r.reports[1..] {
        ensure(
            z.n_chambers <= 6 * z.k - 6,
            format!("k={}: {} chambers", z.k, z.n_chambers),
        )?;
        let ratio = z.n_chambers as f64 / (6 * z.k - 6) as f64;
        if ratio > worst.1 {
            worst = (z.k, ratio);
        }
    }
    Ok(format!(
        "n(1)=1, n(2)=4, tightest k={} at {:.2} of 6k-6",
        worst.0, worst.1
    ))
}

fn depth_oracle() -> Outcome {
    let r = z2();
    let g = r.arr.generators();
    let radius_sq = rat(57) / rat(3); // inside sqrt(57/pi)
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut tested = 0;
    let mut boundary = 0;
    while tested < 1000 {
        // every other point on a coarse grid, which often lands on Bragg lines
        let den = if tested % 2 == 0 { 1_000_000i64 } else { 24 };
        let span = 5 * den;
        let x = (rng.next_u64() % (2 * span as u64 + 1)) as i64 - span;
        let y = (rng.next_u64() % (2 * span as u64 + 1)) as i64 - span;
        let p = QPoint::new(ratio(x, den), ratio(y, den));
        if p.norm_sq() >= radius_sq {
            continue;
        }
        tested += 1;
        if g.on_some_bisector(&p) {
            boundary += 1;
        }
        let fast = r.arr.depth_at(&p);
        let slow = g.depth_of_point(&p);
        ensure(
            fast == Some(slow),
            format!("{p}: lookup {fast:?} vs brute force {slow}"),
        )?;
    }
    Ok(format!("1000 points, 0 mismatches ({boundary} on a line)"))
}

fn area_partition() -> Outcome {
    let mut builds: Vec<(&str, &Arrangement)> = vec![("q=0", &z2().arr)];
    for (name, q) in [("q=200", 200), ("q=1000", 1000), ("q=5000", 5000)] {
        builds.push((name, &perturbed(q).arr));
    }
    for (name, arr) in &builds {
        let total = arr.total_face_area();
        ensure(
            total == arr.clip_area(),
            format!("{name}: {} != {}", rat_string(&total), rat_string(&arr.clip_area())),
        )?;
    }
    let extra = Arrangement::build_default(&perturb(&PerturbationConfig::new(3, 5000, 9)).unwrap()).unwrap();
    ensure(extra.total_face_area() == extra.clip_area(), "m=3 strong build")?;
    Ok(format!("{} builds exact", builds.len() + 1))
}

fn stability() -> Outcome {
    let reference = integer_window(M).unwrap();
    let dirs = ring_directions(64);
    let k = 6;
    let identity = perturb(&PerturbationConfig::new(M, 0, 0)).unwrap();
    let zero = stability_gap(&reference, &identity, k, &dirs).map_err(|e| e.to_string())?;
    ensure(
        zero.per_direction.iter().all(|d| d.gap == rat(0)),
        "q=0 gap is not exactly 0",
    )?;
    let mut wins = 0;
    let mut pairs = Vec::new();
    for seed in 1..=5u64 {
        let small = perturb(&PerturbationConfig::new(M, 200, seed)).unwrap();
        let big = perturb(&PerturbationConfig::new(M, 5000, seed)).unwrap();
        let a = stability_gap(&reference, &small, k, &dirs)
            .map_err(|e| e.to_string())?
            .max_gap;
        let b = stability_gap(&reference, &big, k, &dirs)
            .map_err(|e| e.to_string())?
            .max_gap;
        if a < b {
            wins += 1;
        }
        pairs.push(format!("{a:.4}<{b:.4}"));
    }
    ensure(wins >= 4, format!("only {wins}/5 pairs: {}", pairs.join(", ")))?;
    Ok(format!("{wins}/5 pairs [{}], q=0 gap 0", pairs.join(", ")))
}

fn adversarial() -> Outcome {
    let tau = ratio(2, 5);
    let c = adversarial_chamber(M, DEFAULT_SCALE, 5, &tau).map_err(|e| e.to_string())?;
    let diam = brillouin_core::geom::sqrt_f64(&c.diameter_sq);
    let area = brillouin_core::geom::to_f64(&c.area);
    ensure(c.depth == 4, format!("x has depth {}", c.depth))?;
    ensure(c.clearance, "some Bragg line is closer than 0.2 to x")?;
    ensure(c.meets_bounds(), format!("diameter {diam}, area {area}"))?;
    Ok(format!(
        "x={}, diameter {diam:.4} >= 0.4, area {area:.4} >= {:.4}",
        c.x,
        std::f64::consts::PI * 0.04
    ))
}

fn diameter_bound() -> Outcome {
    let c = 36.0 * 2f64.sqrt() * std::f64::consts::PI.sqrt();
    for k in [1usize, 2, 16, 50, 57, 10_000] {
        let b = chamber_diameter_bound(2, k);
        let expect = c * (k as f64).powf(-0.25);
        ensure(
            (b.value - expect).abs() <= 1e-12 * expect,
            format!("k={k}: {} vs {expect}", b.value),
        )?;
        ensure(b.valid == (k >= 8143), format!("k={k}: valid flag {}", b.valid))?;
    }
    let t = chamber_diameter_bound(2, 1).threshold;
    ensure((t - 8143.0).abs() < 1.0, format!("threshold {t}"))?;
    let r = z2();
    let (d2, d50) = (r.reports[1].max_chamber_diameter, r.reports[49].max_chamber_diameter);
    ensure(d50 < d2, format!("diameter k=50 {d50} vs k=2 {d2}"))?;
    Ok(format!("threshold {t:.1}; max diameter k=2 {d2:.4}, k=50 {d50:.4}"))
}

fn counting() -> Outcome {
    let c = circle_lattice_count(&QPoint::origin(), &rat(25)).map_err(|e| e.to_string())?;
    ensure(c == 12, format!("circle count {c}"))?;
    let arr = &z2().arr;
    let kn = knear_count(arr, 2);
    ensure(kn == 4, format!("knear(2)={kn}"))?;
    let prof = ray_profile(arr.generators(), [1, 0]).map_err(|e| e.to_string())?;
    let head = prof.crossings[..5].to_vec();
    ensure(
        head == vec![ratio(1, 2), rat(1), rat(1), rat(1), ratio(5, 4)],
        "ray head differs",
    )?;
    let mut pairs = Vec::new();
    for k in 2..=10 {
        let chambers = arr.zone(k).unwrap().faces.len();
        let inv: Vec<QPoint> = knear_points(arr, k)
            .into_iter()
            .map(|i| invert(&arr.generators().point(i)).unwrap())
            .collect();
        let sets = ksets_count(&inv, k - 1);
        ensure(
            chambers as u64 <= sets,
            format!("k={k}: {chambers} chambers > {sets} sets"),
        )?;
        pairs.push(format!("{chambers}<={sets}"));
    }
    Ok(format!(
        "circle 12, knear(2) 4, ray 1/2,1,1,1,5/4, k-sets [{}]",
        pairs.join(" ")
    ))
}

fn distortion() -> Outcome {
    let mut out = Vec::new();
    let mut bad = Vec::new();
    for (name, run) in [("q=0", z2()), ("q=5000", perturbed(5000))] {
        let mut lo = f64::INFINITY;
        let mut hi = 0.0f64;
        for z in run.reports.iter().filter(|z| z.reliable && z.k >= 2) {
            if !(1.0 < z.distortion && z.distortion < 1.5) {
                bad.push(format!("{name} k={}: {:.4}", z.k, z.distortion));
            }
            lo = lo.min(z.distortion);
            hi = hi.max(z.distortion);
        }
        out.push(format!("{name} in [{lo:.4}, {hi:.4}]"));
    }
    ensure(
        bad.is_empty(),
        format!("{}; outside (1, 1.5): {}", out.join("; "), bad.join(", ")),
    )?;
    Ok(out.join("; "))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 12] = [
        ("exact unit areas", unit_areas),
        ("integer lattice brackets", integer_brackets),
        ("perturbed lattice brackets", perturbed_brackets),
        ("reliability cut-off values", reliability_values),
        ("chamber count bound", chamber_bound),
        ("depth oracle equivalence", depth_oracle),
        ("area partition", area_partition),
        ("ray stability experiment", stability),
        ("adversarial chamber", adversarial),
        ("diameter bound evaluator", diameter_bound),
        ("counting primitives", counting),
        ("distortion range", distortion),
    ];
    let mut failed = 0;
    for (name, f) in criteria {
        let t = Instant::now();
        let outcome = match catch_unwind(AssertUnwindSafe(f)) {
            Ok(o) => o,
            Err(_) => Err("panicked".into()),
        };
        let secs = t.elapsed().as_secs_f64();
        match outcome {
            Ok(msg) => println!("PASS {name}: {msg} [{secs:.1}s]"),
            Err(msg) => {
                failed += 1;
                println!("FAIL {name}: {msg} [{secs:.1}s]");
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
