//! Resonance location: all zeros of `a(lambda)` in a rectangle of the
//! lower half-plane, with multiplicities.
//!
//! The counting primitive is the argument principle.  The winding number
//! of `a` around a rectangle is computed by *phase continuation*: walk the
//! boundary with steps short enough that the phase moves less than a
//! quarter turn per step — step length is controlled by the local
//! logarithmic derivative `|a'/a|` and verified a posteriori — and sum the
//! increments.  The result is rounded to an integer and rejected unless it
//! is within 0.25 of one, so quadrature error can never silently corrupt a
//! count.
//!
//! `find_resonances` quadrisects the search rectangle until every leaf
//! holds at most one zero (then polished by Newton with the exact `a'`) or
//! is smaller than the cluster radius (then reported as one resonance of
//! multiplicity equal to the leaf's count).  Interior split lines that
//! happen to pass near a zero are nudged by deterministic jitter, so the
//! partition always accounts for every zero exactly once; the invariant
//! `sum of multiplicities = winding of the whole rectangle` is checked at
//! the end.
//!
//! All moduli are compared after dividing out the envelope
//! `e^{gamma (|Im lambda| - Im lambda)}`, which makes thresholds mean the
//! same thing at every depth.

use num_complex::Complex64;

use crate::error::Error;
use crate::jost::{envelope_log, jost_a_prime, jost_ab};
use crate::potential::Potential;
use crate::special::ln_cosh;
use crate::Result;

/// Axis-aligned search window in the complex plane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rectangle {
    pub re_min: f64,
    pub re_max: f64,
    pub im_min: f64,
    pub im_max: f64,
}

impl Rectangle {
    pub fn new(re_min: f64, re_max: f64, im_min: f64, im_max: f64) -> Result<Rectangle> {
        let fine = re_min.is_finite() && re_max.is_finite() && im_min.is_finite() && im_max.is_finite();
        if !fine || re_min >= re_max || im_min >= im_max {
            return Err(Error::Parse(format!(
                "invalid rectangle [{re_min}, {re_max}] x [{im_min}, {im_max}]"
            )));
        }
        Ok(Rectangle { re_min, re_max, im_min, im_max })
    }

    pub fn width(&self) -> f64 {
        self.re_max - self.re_min
    }

    pub fn height(&self) -> f64 {
        self.im_max - self.im_min
    }

    pub fn diameter(&self) -> f64 {
        self.width().hypot(self.height())
    }

    pub fn center(&self) -> Complex64 {
        Complex64::new(0.5 * (self.re_min + self.re_max), 0.5 * (self.im_min + self.im_max))
    }

    pub fn contains(&self, z: Complex64) -> bool {
        self.re_min <= z.re && z.re <= self.re_max && self.im_min <= z.im && z.im <= self.im_max
    }

    fn expand(&self, delta: f64) -> Rectangle {
        Rectangle {
            re_min: self.re_min - delta,
            re_max: self.re_max + delta,
            im_min: self.im_min - delta,
            im_max: self.im_max + delta,
        }
    }
}

/// A located zero of `a` in the lower half-plane.
#[derive(Debug, Clone, Copy)]
pub struct Resonance {
    /// The zero; `Im < 0` always.
    pub location: Complex64,
    /// Multiplicity (> 1 either for a genuinely multiple zero or for a
    /// cluster tighter than the cluster radius).
    pub multiplicity: usize,
    /// Envelope-normalised `|a|` at the reported location.
    pub residual: f64,
    /// Radius within which the true zero(s) lie: the final Newton step for
    /// polished zeros, half the leaf diameter for clusters.
    pub refinement_radius: f64,
}

/// Result of a winding-number computation.
#[derive(Debug, Clone, Copy)]
pub struct WindingCount {
    /// The rectangle actually used — possibly expanded by boundary jitter.
    pub rectangle: Rectangle,
    /// Number of zeros inside, counted with multiplicity.
    pub count: usize,
    /// Smallest envelope-normalised `|a|` seen on the boundary.
    pub boundary_min_modulus: f64,
}

/// Tunables for the search.  `Default` gives the documented values.
#[derive(Debug, Clone, Copy)]
pub struct RootConfig {
    /// Newton stops when the step drops below this (relative to `|lambda|`).
    pub newton_tol: f64,
    /// Largest acceptable envelope-normalised `|a|` at a reported zero.
    pub residual_tol: f64,
    /// Leaves smaller than `factor * max(1, |lambda|)` become clusters.
    pub cluster_radius_factor: f64,
    /// Depth guard: reject searches below `Im lambda = -max_depth / gamma`
    /// unless `allow_deep` is set.
    pub max_depth: f64,
    /// Boundary/split-line jitter attempts before giving up.
    pub jitter_tries: usize,
    /// Lift the depth guard.
    pub allow_deep: bool,
}

impl Default for RootConfig {
    fn default() -> RootConfig {
        RootConfig {
            newton_tol: 1e-12,
            residual_tol: 1e-9,
            cluster_radius_factor: 1e-8,
            max_depth: 40.0,
            jitter_tries: 8,
            allow_deep: false,
        }
    }
}

/// Largest accepted per-step phase increment (safely under pi/2).
const MAX_PHASE_STEP: f64 = 1.3;

/// Boundary samples with normalised `ln|a|` below `ln(1e-11) + ln cosh ||q||_1`
/// count as "zero on the boundary".
const BOUNDARY_FLOOR_LOG: f64 = -25.328_436_022_934_504; // ln(1e-11)

/// Evaluation context: the potential plus the envelope normalisation.
struct Eval<'a> {
    pot: &'a Potential,
    gamma_t: f64,
    ln_cosh_q: f64,
}

/// One boundary/Newton sample: phase mantissa, log-derivative, and the
/// envelope-normalised log-modulus.
struct Sample {
    /// Mantissa of `a` (phase carrier; magnitude scale-free between samples).
    mant: Complex64,
    /// `a'/a`, which is scale-free.
    log_deriv: Complex64,
    /// `ln |a| - gamma (|eps| - eps)`.
    norm_log_abs: f64,
}

impl<'a> Eval<'a> {
    fn new(pot: &'a Potential) -> Eval<'a> {
        Eval {
            pot,
            gamma_t: pot.gamma_tight(),
            ln_cosh_q: ln_cosh(pot.l1_norm()),
        }
    }

    fn floor_log(&self) -> f64 {
        BOUNDARY_FLOOR_LOG + self.ln_cosh_q
    }

    fn sample(&self, lambda: Complex64) -> Result<Sample> {
        let jv = jost_a_prime(self.pot, lambda)?;
        let a = jv.a;
        let ap = jv.a_prime.expect("jost_a_prime always carries a derivative");
        if a.norm() == 0.0 {
            return Err(Error::BoundaryZero(format!(
                "a(lambda) vanished exactly at {lambda}"
            )));
        }
        Ok(Sample {
            mant: a,
            log_deriv: ap / a,
            norm_log_abs: jv.log_abs_a() - envelope_log(self.gamma_t, lambda),
        })
    }

    /// Envelope-normalised `|a(lambda)|`.
    fn norm_modulus(&self, lambda: Complex64) -> Result<f64> {
        let jv = jost_ab(self.pot, lambda)?;
        Ok((jv.log_abs_a() - envelope_log(self.gamma_t, lambda)).exp())
    }
}

/// Phase change along one straight edge, by derivative-controlled stepping.
/// Returns (accumulated phase, min normalised modulus, sample count).
fn walk_edge(eval: &Eval, z0: Complex64, z1: Complex64) -> Result<(f64, f64, usize)> {
    let dir = z1 - z0;
    let len = dir.norm();
    let unit = dir / len;
    let mut t = 0.0f64;
    let mut cur = eval.sample(z0)?;
    let mut min_log = cur.norm_log_abs;
    let mut samples = 1usize;
    let mut phase = 0.0f64;
    let floor = eval.floor_log();
    if cur.norm_log_abs < floor {
        return Err(Error::BoundaryZero(format!(
            "|a| below boundary floor at {z0}"
        )));
    }
    while t < len {
        let rate = cur.log_deriv.norm().max(1e-3);
        let mut step = (0.45 / rate).min(len - t).min(len * 0.25 + 1e-300);
        loop {
            let z = z0 + unit * (t + step);
            let next = eval.sample(z)?;
            samples += 1;
            let dphi = (next.mant / cur.mant).arg();
            let dlog = next.norm_log_abs - cur.norm_log_abs;
            if next.norm_log_abs < floor {
                return Err(Error::BoundaryZero(format!(
                    "|a| below boundary floor at {z}"
                )));
            }
            if dphi.abs() <= MAX_PHASE_STEP && dlog.abs() <= 1.6 {
                phase += dphi;
                min_log = min_log.min(next.norm_log_abs);
                cur = next;
                t += step;
                break;
            }
            step *= 0.5;
            if step < 1e-13 * len.max(1.0) {
                return Err(Error::BoundaryZero(format!(
                    "phase step would not settle near {z} — zero on or next to the boundary"
                )));
            }
        }
    }
    Ok((phase, min_log.exp(), samples))
}

/// Winding number around `rect` with *no* jitter; fails if the boundary
/// passes too close to a zero.
fn wind_pure(eval: &Eval, rect: &Rectangle) -> Result<(usize, f64, usize)> {
    let c0 = Complex64::new(rect.re_min, rect.im_min);
    let c1 = Complex64::new(rect.re_max, rect.im_min);
    let c2 = Complex64::new(rect.re_max, rect.im_max);
    let c3 = Complex64::new(rect.re_min, rect.im_max);
    let mut phase = 0.0;
    let mut min_mod = f64::INFINITY;
    let mut samples = 0usize;
    for (a, b) in [(c0, c1), (c1, c2), (c2, c3), (c3, c0)] {
        let (p, m, s) = walk_edge(eval, a, b)?;
        phase += p;
        min_mod = min_mod.min(m);
        samples += s;
    }
    let turns = phase / std::f64::consts::TAU;
    let n = turns.round();
    if (turns - n).abs() > 0.25 {
        return Err(Error::BoundaryZero(format!(
            "phase accounting around [{}, {}] x [{}, {}] gave {turns:.4} turns — not an integer",
            rect.re_min, rect.re_max, rect.im_min, rect.im_max
        )));
    }
    if n < 0.0 {
        return Err(Error::Inconclusive(format!(
            "negative winding {n} around a rectangle — a is analytic, so this is a numerical failure"
        )));
    }
    Ok((n as usize, min_mod, samples))
}

/// Winding number of `a` around `rect`, expanding the rectangle by
/// deterministic `1e-6 * diameter` increments (up to `jitter_tries` times)
/// when a zero sits on or next to the boundary.
pub fn wind(pot: &Potential, rect: Rectangle) -> Result<WindingCount> {
    wind_with_tries(pot, rect, RootConfig::default().jitter_tries)
}

fn wind_with_tries(pot: &Potential, rect: Rectangle, tries: usize) -> Result<WindingCount> {
    let eval = Eval::new(pot);
    let mut last_err = None;
    for k in 0..=tries {
        let used = rect.expand(k as f64 * 1e-6 * rect.diameter());
        match wind_pure(&eval, &used) {
            Ok((count, min_mod, _)) => {
                return Ok(WindingCount {
                    rectangle: used,
                    count,
                    boundary_min_modulus: min_mod,
                })
            }
            Err(e @ Error::BoundaryZero(_)) => last_err = Some(e),
            Err(e) => return Err(e),
        }
    }
    Err(last_err.unwrap_or_else(|| Error::BoundaryZero("winding failed".into())))
}

/// Newton refinement from `start`, confined to (a margin around) `rect`.
/// Returns the polished zero and the final step size, or `None` so the
/// caller falls back to further bisection.
fn newton(eval: &Eval, start: Complex64, rect: &Rectangle, cfg: &RootConfig) -> Option<(Complex64, f64)> {
    let roam = rect.expand(rect.diameter());
    let mut z = start;
    for _ in 0..50 {
        let s = eval.sample(z).ok()?;
        if !s.log_deriv.is_finite() || s.log_deriv.norm() == 0.0 {
            return None;
        }
        let step = s.log_deriv.inv(); // a / a'
        let z1 = z - step;
        if !roam.contains(z1) {
            return None;
        }
        if step.norm() <= cfg.newton_tol * z1.norm().max(1.0) {
            if rect.contains(z1) {
                return Some((z1, step.norm().max(f64::EPSILON * z1.norm())));
            }
            return None;
        }
        z = z1;
    }
    None
}

fn split4(rect: &Rectangle, try_index: usize) -> [Rectangle; 4] {
    // deterministic jitter schedule for the split lines: 0, +1, -1, +2, ...
    let units = [0.0, 1.0, -1.0, 2.0, -2.0, 3.0, -3.0, 4.0, -4.0];
    let off = units[try_index % units.len()] * 1e-6 * rect.diameter();
    let xm = 0.5 * (rect.re_min + rect.re_max) + off;
    let ym = 0.5 * (rect.im_min + rect.im_max) + off * 0.618_034; // different stride per axis
    [
        Rectangle { re_min: rect.re_min, re_max: xm, im_min: rect.im_min, im_max: ym },
        Rectangle { re_min: xm, re_max: rect.re_max, im_min: rect.im_min, im_max: ym },
        Rectangle { re_min: rect.re_min, re_max: xm, im_min: ym, im_max: rect.im_max },
        Rectangle { re_min: xm, re_max: rect.re_max, im_min: ym, im_max: rect.im_max },
    ]
}

type Candidate = (Complex64, usize, f64); // location, multiplicity, radius

fn solve(
    eval: &Eval,
    rect: Rectangle,
    count: usize,
    cfg: &RootConfig,
    depth: usize,
) -> Result<Vec<Candidate>> {
    if count == 0 {
        return Ok(Vec::new());
    }
    if depth > 200 {
        return Err(Error::Inconclusive(
            "quadrisection exceeded 200 levels without isolating a zero".into(),
        ));
    }
    let cluster_radius = cfg.cluster_radius_factor * rect.center().norm().max(1.0);
    if rect.diameter() < cluster_radius {
        return Ok(vec![(rect.center(), count, 0.5 * rect.diameter())]);
    }
    if count == 1 {
        if let Some((z, radius)) = newton(eval, rect.center(), &rect, cfg) {
            return Ok(vec![(z, 1, radius)]);
        }
        // Newton refused — fall through to winding-guided bisection
    }
    let mut last_err = None;
    'tries: for k in 0..=cfg.jitter_tries {
        let children = split4(&rect, k);
        let mut counts = [0usize; 4];
        for (i, child) in children.iter().enumerate() {
            match wind_pure(eval, child) {
                Ok((c, _, _)) => counts[i] = c,
                Err(e @ Error::BoundaryZero(_)) => {
                    last_err = Some(e);
                    continue 'tries;
                }
                Err(e) => return Err(e),
            }
        }
        if counts.iter().sum::<usize>() != count {
            // a zero straddles a split line closely enough to fool the
            // boundary walk; nudge the lines and try again
            last_err = Some(Error::BoundaryZero(format!(
                "children of [{}, {}] x [{}, {}] miscount: {counts:?} vs {count}",
                rect.re_min, rect.re_max, rect.im_min, rect.im_max
            )));
            continue 'tries;
        }
        let ((r0, r1), (r2, r3)) = rayon::join(
            || {
                rayon::join(
                    || solve(eval, children[0], counts[0], cfg, depth + 1),
                    || solve(eval, children[1], counts[1], cfg, depth + 1),
                )
            },
            || {
                rayon::join(
                    || solve(eval, children[2], counts[2], cfg, depth + 1),
                    || solve(eval, children[3], counts[3], cfg, depth + 1),
                )
            },
        );
        let mut out = Vec::with_capacity(count);
        for r in [r0, r1, r2, r3] {
            out.extend(r?);
        }
        return Ok(out);
    }
    Err(last_err.unwrap_or_else(|| Error::BoundaryZero("subdivision failed".into())))
}

/// Find every zero of `a` in `rect` (which must lie in `Im lambda <= 0`),
/// with multiplicities, sorted by `(|lambda|, Re, Im)`.
///
/// A rectangle touching the real axis is nudged to `Im = -1e-12`; `|a| >= 1`
/// on the real line guarantees no zeros are lost in the gap.
pub fn find_resonances(pot: &Potential, rect: Rectangle, cfg: &RootConfig) -> Result<Vec<Resonance>> {
    if rect.im_max > 0.0 {
        return Err(Error::Parse(format!(
            "resonance search rectangle must lie in the lower half-plane (im_max = {})",
            rect.im_max
        )));
    }
    let rect = Rectangle {
        im_max: rect.im_max.min(-1e-12),
        ..rect
    };
    if rect.im_min >= rect.im_max {
        return Err(Error::Parse(
            "rectangle collapses after shifting im_max off the real axis".into(),
        ));
    }
    let gamma_t = pot.gamma_tight();
    if gamma_t == 0.0 {
        return Ok(Vec::new()); // a is identically 1
    }
    let reachable = cfg.max_depth / gamma_t;
    if -rect.im_min > reachable && !cfg.allow_deep {
        return Err(Error::EvaluationOutOfRange {
            detail: format!(
                "search depth {} exceeds the validated |Im lambda| <= {reachable:.3} for this support; pass allow_deep to override",
                -rect.im_min
            ),
            max_abs_im: reachable,
        });
    }

    let eval = Eval::new(pot);
    let top = wind_with_tries(pot, rect, cfg.jitter_tries)?;
    let raw = solve(&eval, top.rectangle, top.count, cfg, 0)?;

    // merge candidates closer than the cluster radius (zeros that were split
    // across leaf boundaries resolve to the same point after polishing)
    let mut merged: Vec<Candidate> = Vec::with_capacity(raw.len());
    let mut sorted = raw;
    sorted.sort_by(|a, b| (a.0.re, a.0.im).partial_cmp(&(b.0.re, b.0.im)).expect("finite"));
    for cand in sorted {
        let cr = cfg.cluster_radius_factor * cand.0.norm().max(1.0);
        if let Some(prev) = merged.last_mut() {
            if (prev.0 - cand.0).norm() <= cr {
                prev.1 += cand.1;
                prev.2 = prev.2.max((prev.0 - cand.0).norm() + cand.2);
                continue;
            }
        }
        merged.push(cand);
    }
    let total: usize = merged.iter().map(|c| c.1).sum();
    if total != top.count {
        return Err(Error::Inconclusive(format!(
            "accounting mismatch: winding reports {} zeros, subdivision produced {total}",
            top.count
        )));
    }

    let mut resonances = Vec::with_capacity(merged.len());
    for (loc, mult, radius) in merged {
        if loc.im >= 0.0 {
            return Err(Error::Inconclusive(format!(
                "zero polished to {loc}, outside the open lower half-plane"
            )));
        }
        let residual = eval.norm_modulus(loc)?;
        if residual > cfg.residual_tol {
            return Err(Error::ResidualTooLarge {
                location: loc,
                residual,
                tol: cfg.residual_tol,
            });
        }
        resonances.push(Resonance {
            location: loc,
            multiplicity: mult,
            residual,
            refinement_radius: radius,
        });
    }
    resonances.sort_by(|a, b| {
        (a.location.norm(), a.location.re, a.location.im)
            .partial_cmp(&(b.location.norm(), b.location.re, b.location.im))
            .expect("finite")
    });
    Ok(resonances)
}

/// `N(r)`: multiplicity-weighted number of listed resonances with
/// `|lambda| <= r`.  The caller is responsible for the list being complete
/// on that disk.
pub fn counting_function(resonances: &[Resonance], r: f64) -> usize {
    resonances
        .iter()
        .filter(|z| z.location.norm() <= r)
        .map(|z| z.multiplicity)
        .sum()
}
