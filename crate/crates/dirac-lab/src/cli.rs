//! Command-line front end.
//!
//! Five subcommands cover the workflow end to end:
//!
//! * `resonances` — locate every zero of `a` in a rectangle of the lower
//!   half-plane and write `resonances.json`;
//! * `verify` — run the full battery of identities and bounds against a
//!   freshly computed zero list and write `reports.json`, exiting nonzero
//!   if any guaranteed check fails;
//! * `scatter` — tabulate `a`, `b` and the unitarity defect on a real
//!   grid into `scatter.csv`;
//! * `counting` — tabulate `N(r)`, `N(r)/r` and the counting bound into
//!   `counting.csv`;
//! * `potential-info` — print the measured constants of a potential.
//!
//! Exit codes: `0` success, `2` bad input (flags, files, specs), `3`
//! evaluation out of the supported range, `4` a numerical stage could not
//! certify its result, `5` a guaranteed bound or identity failed.
//!
//! All artifacts are written atomically (temp file + rename) and are
//! byte-for-byte deterministic for fixed inputs, independent of thread
//! count.  `DIRAC_LAB_THREADS` caps the rayon pool.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::Error;
use crate::estimates::{
    carleson_sweep, counting_bound_report, envelope_report, jensen_check, sum_bound_report,
    BoundReport,
};
use crate::jost::jost_ab;
use crate::potential::{parse_builtin_spec, Potential};
use crate::rootfinder::{counting_function, find_resonances, Rectangle, Resonance, RootConfig};
use crate::Result;

#[derive(Parser)]
#[command(
    name = "dirac-lab",
    version,
    about = "Resonances of one-dimensional massless Dirac operators with \
             compactly supported piecewise-constant potentials"
)]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct PotentialArgs {
    /// Potential file: JSON cell list or CSV with one h,re,im row per cell
    #[arg(long, value_name = "FILE")]
    potential: Option<PathBuf>,

    /// Builtin spec, e.g. "square:A=1,gamma=1" or "random_cells:n=6,seed=7"
    #[arg(long, value_name = "SPEC", conflicts_with = "potential")]
    builtin: Option<String>,
}

#[derive(Args)]
struct SearchArgs {
    /// Search rectangle "re_min,re_max,im_min,im_max" in the lower half-plane
    #[arg(long, value_name = "A,B,C,D", allow_hyphen_values = true)]
    region: Option<String>,

    /// Newton convergence radius, relative to max(1, |lambda|)
    #[arg(long, default_value_t = 1e-12)]
    newton_tol: f64,

    /// Envelope-normalised residual accepted at a refined zero
    #[arg(long, default_value_t = 1e-9)]
    residual_tol: f64,

    /// Depth cap: search no deeper than Im = -max_depth / gamma
    #[arg(long, default_value_t = 40.0)]
    max_depth: f64,

    /// Boundary jitter attempts before giving up on a stuck contour
    #[arg(long, default_value_t = 8)]
    jitter_tries: usize,

    /// Search below the depth cap (evaluation stays exact; slower)
    #[arg(long, default_value_t = false)]
    allow_deep: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Locate all resonances in a region; writes resonances.json
    Resonances {
        #[command(flatten)]
        pot: PotentialArgs,
        #[command(flatten)]
        search: SearchArgs,
        /// Output directory
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// Check every identity and bound on computed data; writes reports.json
    Verify {
        #[command(flatten)]
        pot: PotentialArgs,
        #[command(flatten)]
        search: SearchArgs,
        #[arg(long, default_value = ".")]
        out: PathBuf,
        /// Exponents for the resonance-sum bound
        #[arg(long, value_delimiter = ',', default_values_t = vec![1.1, 1.5, 2.0, 3.0])]
        p: Vec<f64>,
        /// Largest Jensen / counting radius
        #[arg(long, default_value_t = 20.0)]
        rmax: f64,
        /// Seed for the randomised part of the envelope grid
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Drop the smallest-modulus resonance before checking (fault injection)
        #[arg(long, hide = true, default_value_t = false)]
        drop_one_resonance: bool,
    },
    /// Sample a, b and the unitarity defect on a real grid; writes scatter.csv
    Scatter {
        #[command(flatten)]
        pot: PotentialArgs,
        #[arg(long, default_value = ".")]
        out: PathBuf,
        /// Left end of the real sampling window
        #[arg(long, default_value_t = -10.0, allow_negative_numbers = true)]
        lambda_min: f64,
        /// Right end of the real sampling window
        #[arg(long, default_value_t = 10.0, allow_negative_numbers = true)]
        lambda_max: f64,
        /// Number of sample points
        #[arg(long, default_value_t = 401)]
        points: usize,
    },
    /// Tabulate the counting function against its bound; writes counting.csv
    Counting {
        #[command(flatten)]
        pot: PotentialArgs,
        #[command(flatten)]
        search: SearchArgs,
        #[arg(long, default_value = ".")]
        out: PathBuf,
        /// Largest radius tabulated
        #[arg(long, default_value_t = 50.0)]
        rmax: f64,
        /// Number of radii in the table
        #[arg(long, default_value_t = 100)]
        points: usize,
    },
    /// Print the measured constants of a potential as JSON
    PotentialInfo {
        #[command(flatten)]
        pot: PotentialArgs,
    },
}

/// Error paired with the pipeline stage that produced it.
struct Staged {
    stage: &'static str,
    err: Error,
}

trait WithStage<T> {
    fn stage(self, stage: &'static str) -> std::result::Result<T, Staged>;
}

impl<T> WithStage<T> for Result<T> {
    fn stage(self, stage: &'static str) -> std::result::Result<T, Staged> {
        self.map_err(|err| Staged { stage, err })
    }
}

fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Parse(_)
        | Error::InvalidPotential(_)
        | Error::Io(_)
        | Error::DivergentIntegral { .. } => 2,
        Error::EvaluationOutOfRange { .. } | Error::TruncationFailure { .. } => 3,
        Error::BoundaryZero(_) | Error::Inconclusive(_) | Error::ResidualTooLarge { .. } => 4,
    }
}

/// Parse arguments, dispatch, and map failures to documented exit codes.
pub fn run() -> i32 {
    let cli = Cli::parse();
    init_thread_pool();
    match dispatch(cli.command) {
        Ok(code) => code,
        Err(staged) => {
            eprintln!("dirac-lab: {}: {}", staged.stage, staged.err);
            exit_code(&staged.err)
        }
    }
}

fn init_thread_pool() {
    if let Ok(text) = std::env::var("DIRAC_LAB_THREADS") {
        if let Ok(n) = text.trim().parse::<usize>() {
            if n >= 1 {
                // ignore "already initialised": results do not depend on pool size
                let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
            }
        }
    }
}

fn dispatch(command: Command) -> std::result::Result<i32, Staged> {
    match command {
        Command::Resonances { pot, search, out } => cmd_resonances(&pot, &search, &out),
        Command::Verify { pot, search, out, p, rmax, seed, drop_one_resonance } => {
            cmd_verify(&pot, &search, &out, &p, rmax, seed, drop_one_resonance)
        }
        Command::Scatter { pot, out, lambda_min, lambda_max, points } => {
            cmd_scatter(&pot, &out, lambda_min, lambda_max, points)
        }
        Command::Counting { pot, search, out, rmax, points } => {
            cmd_counting(&pot, &search, &out, rmax, points)
        }
        Command::PotentialInfo { pot } => cmd_potential_info(&pot),
    }
}

fn load_potential(args: &PotentialArgs) -> Result<Potential> {
    match (&args.potential, &args.builtin) {
        (Some(path), None) => {
            let text = std::fs::read_to_string(path)?;
            if text.trim_start().starts_with('{') {
                Potential::from_json(&text)
            } else {
                Potential::from_csv(&text)
            }
        }
        (None, Some(spec)) => parse_builtin_spec(spec),
        _ => Err(Error::Parse(
            "exactly one of --potential and --builtin must be given".into(),
        )),
    }
}

fn parse_region(text: &str) -> Result<Rectangle> {
    let parts: Vec<&str> = text.split(',').map(str::trim).collect();
    if parts.len() != 4 {
        return Err(Error::Parse(format!(
            "--region wants \"re_min,re_max,im_min,im_max\", got \"{text}\""
        )));
    }
    let mut vals = [0.0f64; 4];
    for (slot, part) in vals.iter_mut().zip(&parts) {
        *slot = part
            .parse()
            .map_err(|_| Error::Parse(format!("--region: \"{part}\" is not a number")))?;
    }
    Rectangle::new(vals[0], vals[1], vals[2], vals[3])
}

fn search_region(search: &SearchArgs) -> Result<Rectangle> {
    match &search.region {
        Some(text) => parse_region(text),
        None => Rectangle::new(-50.0, 50.0, -20.0, -1e-12),
    }
}

fn root_config(search: &SearchArgs) -> RootConfig {
    RootConfig {
        newton_tol: search.newton_tol,
        residual_tol: search.residual_tol,
        max_depth: search.max_depth,
        jitter_tries: search.jitter_tries,
        allow_deep: search.allow_deep,
        ..RootConfig::default()
    }
}

/// Write via a sibling temp file and rename, so readers never observe a
/// partially written artifact.
fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            std::fs::create_dir_all(dir)?;
        }
    }
    let tmp = path.with_extension("tmp");
    std::fs::write(&tmp, contents)?;
    std::fs::rename(&tmp, path)?;
    Ok(())
}

#[derive(Serialize)]
struct ResonanceRow {
    re: f64,
    im: f64,
    multiplicity: usize,
    residual: f64,
    refinement_radius: f64,
}

fn resonance_rows(resonances: &[Resonance]) -> Vec<ResonanceRow> {
    resonances
        .iter()
        .map(|z| ResonanceRow {
            re: z.location.re,
            im: z.location.im,
            multiplicity: z.multiplicity,
            residual: z.residual,
            refinement_radius: z.refinement_radius,
        })
        .collect()
}

fn cmd_resonances(
    pot: &PotentialArgs,
    search: &SearchArgs,
    out: &Path,
) -> std::result::Result<i32, Staged> {
    let potential = load_potential(pot).stage("loading potential")?;
    let region = search_region(search).stage("parsing search region")?;
    let cfg = root_config(search);
    let resonances =
        find_resonances(&potential, region, &cfg).stage("locating resonances")?;
    let json = serde_json::to_string_pretty(&resonance_rows(&resonances))
        .expect("resonance rows serialise");
    let path = out.join("resonances.json");
    write_atomic(&path, &(json + "\n")).stage("writing output")?;
    println!(
        "{} resonances in [{}, {}] x [{}, {}] -> {}",
        resonances.len(),
        region.re_min,
        region.re_max,
        region.im_min,
        region.im_max,
        path.display()
    );
    Ok(0)
}

/// Deterministic evaluation grid for the envelope check: the real line,
/// a coarse lattice over the search region, and a seeded random cloud.
fn verification_grid(region: Rectangle, seed: u64) -> Vec<Complex64> {
    let mut grid = Vec::new();
    for k in 0..=200 {
        let re = region.re_min + k as f64 * region.width() / 200.0;
        grid.push(Complex64::new(re, 0.0));
    }
    for i in 0..=20 {
        for j in 0..=10 {
            grid.push(Complex64::new(
                region.re_min + i as f64 * region.width() / 20.0,
                region.im_min + j as f64 * region.height() / 10.0,
            ));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..200 {
        grid.push(Complex64::new(
            rng.gen_range(region.re_min..=region.re_max),
            rng.gen_range(region.im_min..=region.im_max),
        ));
    }
    grid
}

#[allow(clippy::too_many_arguments)]
fn cmd_verify(
    pot: &PotentialArgs,
    search: &SearchArgs,
    out: &Path,
    p_values: &[f64],
    rmax: f64,
    seed: u64,
    drop_one: bool,
) -> std::result::Result<i32, Staged> {
    let potential = load_potential(pot).stage("loading potential")?;
    let region = search_region(search).stage("parsing search region")?;
    if !rmax.is_finite() || rmax <= 0.0 {
        return Err(Error::Parse(format!("--rmax must be positive, got {rmax}")))
            .stage("parsing arguments");
    }
    let cfg = root_config(search);
    let mut resonances =
        find_resonances(&potential, region, &cfg).stage("locating resonances")?;
    if drop_one && !resonances.is_empty() {
        let removed = resonances.remove(0);
        println!(
            "fault injection: dropped resonance at {:+.6} {:+.6}i",
            removed.location.re, removed.location.im
        );
    }

    // radii kept inside the searched rectangle so the zero list is complete
    let r_geom = rmax.min(region.re_max).min(-region.re_min);
    let radii = [0.25 * r_geom, 0.5 * r_geom, r_geom];

    let mut reports: Vec<BoundReport> = Vec::new();
    let grid = verification_grid(region, seed);
    reports.push(envelope_report(&potential, &grid).stage("checking the envelope")?);
    for &r in &radii {
        reports.push(
            jensen_check(&potential, &resonances, r).stage("checking the Jensen identity")?,
        );
    }
    for &r in &radii {
        reports.push(counting_bound_report(&potential, &resonances, r));
    }
    for &p in p_values {
        reports.push(
            sum_bound_report(p, &potential, &resonances).stage("checking the sum bound")?,
        );
    }
    let t_span = 0.9 * r_geom;
    let t_grid: Vec<f64> = (-4..=4).map(|k| t_span * k as f64 / 4.0).collect();
    let r_grid: Vec<f64> = [0.9, 2.0, 5.0]
        .into_iter()
        .filter(|&r| r <= (0.5 * r_geom).max(0.9))
        .collect();
    let (_, carleson) = carleson_sweep(&potential, &resonances, &t_grid, &r_grid);
    reports.push(carleson);

    for rep in &reports {
        println!(
            "{} {} lhs={:.6e} rhs={:.6e} margin={:+.3e}",
            if rep.pass { "PASS" } else { "FAIL" },
            rep.name,
            rep.lhs,
            rep.rhs,
            rep.margin
        );
    }
    let json = serde_json::to_string_pretty(&reports).expect("reports serialise");
    let path = out.join("reports.json");
    write_atomic(&path, &(json + "\n")).stage("writing output")?;
    println!("{} reports -> {}", reports.len(), path.display());

    let failed: Vec<&str> = reports
        .iter()
        .filter(|r| !r.pass)
        .map(|r| r.name.as_str())
        .collect();
    if failed.is_empty() {
        Ok(0)
    } else {
        eprintln!("dirac-lab: verification failed: {}", failed.join(", "));
        Ok(5)
    }
}

fn cmd_scatter(
    pot: &PotentialArgs,
    out: &Path,
    lambda_min: f64,
    lambda_max: f64,
    points: usize,
) -> std::result::Result<i32, Staged> {
    let potential = load_potential(pot).stage("loading potential")?;
    if points < 2
        || !lambda_min.is_finite()
        || !lambda_max.is_finite()
        || lambda_max <= lambda_min
    {
        return Err(Error::Parse(format!(
            "scatter wants lambda_min < lambda_max and points >= 2, \
             got [{lambda_min}, {lambda_max}] with {points} points"
        )))
        .stage("parsing arguments");
    }
    let mut csv = String::from("lambda,re_a,im_a,re_b,im_b,unitarity_defect\n");
    let step = (lambda_max - lambda_min) / (points - 1) as f64;
    for k in 0..points {
        let lambda = lambda_min + k as f64 * step;
        let jv = jost_ab(&potential, Complex64::new(lambda, 0.0))
            .stage("evaluating the Jost function")?;
        let a = jv.value();
        let b = jv.value_b().expect("b is tracked on the real line");
        let defect = (a.norm_sqr() - b.norm_sqr() - 1.0).abs();
        csv.push_str(&format!(
            "{},{},{},{},{},{}\n",
            lambda, a.re, a.im, b.re, b.im, defect
        ));
    }
    let path = out.join("scatter.csv");
    write_atomic(&path, &csv).stage("writing output")?;
    println!("{points} samples -> {}", path.display());
    Ok(0)
}

fn cmd_counting(
    pot: &PotentialArgs,
    search: &SearchArgs,
    out: &Path,
    rmax: f64,
    points: usize,
) -> std::result::Result<i32, Staged> {
    let potential = load_potential(pot).stage("loading potential")?;
    if !rmax.is_finite() || rmax <= 0.0 || points == 0 {
        return Err(Error::Parse(format!(
            "counting wants rmax > 0 and points >= 1, got rmax = {rmax}, points = {points}"
        )))
        .stage("parsing arguments");
    }
    let gamma = potential.gamma_tight();
    let a_norm = potential.l1_norm();
    let resonances = if gamma == 0.0 {
        Vec::new()
    } else {
        let region = match &search.region {
            Some(text) => parse_region(text).stage("parsing search region")?,
            None => {
                // wide enough for every radius; deep enough for the zeros a
                // compactly supported potential can place at |lambda| <= rmax
                let half = 1.02 * rmax + 1.0;
                let depth = (3.0 + (1.0 + 2.0 * rmax).ln()).max(8.0).min(search.max_depth);
                Rectangle::new(-half, half, -depth / gamma, -1e-12)
                    .stage("building search region")?
            }
        };
        let cfg = root_config(search);
        find_resonances(&potential, region, &cfg).stage("locating resonances")?
    };
    let mut csv = String::from("r,count,count_over_r,bound\n");
    for k in 1..=points {
        let r = rmax * k as f64 / points as f64;
        let n = counting_function(&resonances, r);
        let bound = (4.0 * r * gamma / std::f64::consts::PI + a_norm) / std::f64::consts::LN_2;
        csv.push_str(&format!("{},{},{},{}\n", r, n, n as f64 / r, bound));
    }
    let path = out.join("counting.csv");
    write_atomic(&path, &csv).stage("writing output")?;
    println!("{points} radii up to {rmax} -> {}", path.display());
    Ok(0)
}

fn cmd_potential_info(pot: &PotentialArgs) -> std::result::Result<i32, Staged> {
    let potential = load_potential(pot).stage("loading potential")?;
    #[derive(Serialize)]
    struct Info {
        cells: usize,
        gamma: f64,
        gamma_tight: f64,
        l1_norm: f64,
        max_abs: f64,
    }
    let info = Info {
        cells: potential.cells().len(),
        gamma: potential.gamma(),
        gamma_tight: potential.gamma_tight(),
        l1_norm: potential.l1_norm(),
        max_abs: potential.max_abs(),
    };
    println!(
        "{}",
        serde_json::to_string_pretty(&info).expect("potential info serialises")
    );
    Ok(0)
}
