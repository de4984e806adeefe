use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use brillouin_core::arrangement::{clip_half_width_for, Arrangement};
use brillouin_core::export::{arrangement_json, write_json, write_rays_csv, write_zones_csv};
use brillouin_core::geom::{parse_rat, BigRat};
use brillouin_core::lattice::{integer_window, perturb, GeneratorSet, PerturbationConfig};
use brillouin_core::metrics::{ring_directions, stability_gap, zone_reports};
use brillouin_core::verify::{verify, VerifyOptions};
use clap::{Args, Parser, Subcommand};

/// Brillouin zones of the planar integer lattice and its perturbations,
/// computed exactly.
#[derive(Parser)]
#[command(name = "brillouin", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// Window half-width: generators are the nonzero points of [-m, m]^2.
    #[arg(long, default_value_t = 9)]
    m: i64,
    /// Integer scale of perturbed coordinates.
    #[arg(long, default_value_t = 10_000)]
    p: i64,
    /// Perturbation strength in units of 1/p (0 for the unperturbed lattice).
    #[arg(long, default_value_t = 0)]
    q: i64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output directory.
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

#[derive(Subcommand)]
enum Command {
    /// Build the arrangement and write arrangement.json.
    Build {
        #[command(flatten)]
        common: Common,
        /// Also print summary statistics as JSON.
        #[arg(long)]
        stats: bool,
    },
    /// Write one row per zone to zones.csv.
    Metrics {
        #[command(flatten)]
        common: Common,
        /// Largest zone (default: the reliable bound).
        #[arg(long)]
        kmax: Option<usize>,
        /// Allow kmax past the reliable bound; those rows are flagged.
        #[arg(long = "unsafe")]
        allow_unsafe: bool,
    },
    /// Run the invariant suite and write verify.json. Exits nonzero on any
    /// failure.
    Verify {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        kmax: Option<usize>,
        #[arg(long = "unsafe")]
        allow_unsafe: bool,
        /// Zone of the adversarial chamber check.
        #[arg(long, default_value_t = 5)]
        k: usize,
        /// Strength of the adversarial chamber check, as a decimal or num/den.
        #[arg(long, default_value = "0.4")]
        tau: String,
    },
    /// Compare outer crossings against the integer lattice along integer
    /// directions and write rays.csv.
    Rays {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 6)]
        k: usize,
        #[arg(long, default_value_t = 64)]
        directions: usize,
        #[arg(long = "unsafe")]
        allow_unsafe: bool,
    },
}

fn generators(c: &Common) -> Result<GeneratorSet> {
    if c.q == 0 {
        return Ok(integer_window(c.m)?);
    }
    let cfg = PerturbationConfig {
        m: c.m,
        p: c.p,
        q: c.q,
        seed: c.seed,
    };
    Ok(perturb(&cfg)?)
}

fn check_kmax(g: &GeneratorSet, kmax: Option<usize>, allow_unsafe: bool) -> Result<usize> {
    let reliable = g.reliability().kmax as usize;
    let kmax = kmax.unwrap_or(reliable);
    if kmax > reliable && !allow_unsafe {
        bail!("kmax {kmax} exceeds the reliable bound {reliable}; pass --unsafe to compute it anyway");
    }
    Ok(kmax)
}

fn build(g: &GeneratorSet, kmax: usize) -> Result<Arrangement> {
    let reliable = g.reliability().kmax as usize;
    Ok(Arrangement::build(g, &clip_half_width_for(g, kmax.max(reliable)))?)
}

fn create(dir: &Path, name: &str) -> Result<BufWriter<File>> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let path = dir.join(name);
    let f = File::create(&path).with_context(|| format!("creating {}", path.display()))?;
    Ok(BufWriter::new(f))
}

/// Decimal (`0.4`) or `num/den` to an exact rational.
fn parse_exact(s: &str) -> Result<BigRat> {
    if let Some(v) = parse_rat(s) {
        return Ok(v);
    }
    let (int, frac) = s.split_once('.').with_context(|| format!("not a number: {s}"))?;
    let digits = format!("{int}{frac}");
    let Some(num) = parse_rat(&digits) else {
        bail!("not a number: {s}");
    };
    let den = parse_rat(&format!("1{}", "0".repeat(frac.len()))).expect("power of ten");
    Ok(num / den)
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Build { common, stats } => {
            let g = generators(&common)?;
            let arr = build(&g, 0)?;
            let mut w = create(&common.out, "arrangement.json")?;
            write_json(&mut w, &arrangement_json(&arr))?;
            w.flush()?;
            if stats {
                write_json(io::stdout().lock(), &arr.stats())?;
            }
        }
        Command::Metrics {
            common,
            kmax,
            allow_unsafe,
        } => {
            let g = generators(&common)?;
            let kmax = check_kmax(&g, kmax, allow_unsafe)?;
            let reports = if kmax == 0 {
                Vec::new()
            } else {
                zone_reports(&build(&g, kmax)?, kmax)?
            };
            let mut w = create(&common.out, "zones.csv")?;
            write_zones_csv(&mut w, &reports)?;
            w.flush()?;
        }
        Command::Verify {
            common,
            kmax,
            allow_unsafe,
            k,
            tau,
        } => {
            let g = generators(&common)?;
            let kmax = check_kmax(&g, kmax, allow_unsafe)?;
            let arr = build(&g, kmax)?;
            let mut opts = VerifyOptions::for_arrangement(&arr);
            opts.kmax = kmax;
            opts.seed = common.seed;
            opts.adversarial = Some((k, parse_exact(&tau)?));
            let report = verify(&arr, &opts);
            let mut w = create(&common.out, "verify.json")?;
            write_json(&mut w, &report)?;
            w.flush()?;
            for c in &report.checks {
                let status = if c.passed { "PASS" } else { "FAIL" };
                match &c.witness {
                    Some(wit) => println!("{status} {}: {wit}", c.name),
                    None => println!("{status} {}", c.name),
                }
            }
            if !report.all_passed() {
                return Ok(ExitCode::FAILURE);
            }
        }
        Command::Rays {
            common,
            k,
            directions,
            allow_unsafe,
        } => {
            let g = generators(&common)?;
            check_kmax(&g, Some(k), allow_unsafe)?;
            let reference = integer_window(common.m)?;
            let gap = stability_gap(&reference, &g, k, &ring_directions(directions))?;
            let mut w = create(&common.out, "rays.csv")?;
            write_rays_csv(&mut w, &gap)?;
            w.flush()?;
            println!(
                "max gap {:.6e} over {} directions at k={k}",
                gap.max_gap,
                gap.per_direction.len()
            );
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
