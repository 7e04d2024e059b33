//! Jost function evaluation for piecewise-constant Dirac potentials.
//!
//! On each cell the coefficient `q` is constant, so the Zakharov–Shabat
//! system `f' = i M f` with
//!
//! ```text
//!         | lambda    -q     |
//!   M =   |                  |
//!         | conj(q)  -lambda |
//! ```
//!
//! has the exact propagator `exp(i M h)`.  Because `M^2 = omega^2 I` with
//! `omega^2 = lambda^2 - |q|^2`, the exponential collapses to
//!
//! ```text
//!   T = cos(omega h) I + i (sin(omega h) / omega) M,
//! ```
//!
//! which involves only *even* functions of `omega` — both are entire in
//! `omega^2`, so no square-root branch ever enters and `T` is entire in
//! `lambda`.  The Jost solution normalised to `(e^{i lambda x}, 0)` on the
//! right of the support then yields
//!
//! ```text
//!   a(lambda) = U22 e^{i lambda gamma},      b(lambda) = U12 e^{-i lambda gamma},
//! ```
//!
//! where `U = T_N ... T_1` is the transfer matrix across the support.
//! `a` is entire; its zeros in the open lower half-plane are the
//! resonances.  Deep in the lower half-plane `|a|` grows like
//! `e^{2 gamma |Im lambda|}`, so the product is accumulated with a scalar
//! rescaling: every value is reported as a mantissa together with
//! `log_scale`, the natural log of the factored-out magnitude.

pub mod series;

pub use series::{jost_a_series, SeriesResult};

use num_complex::Complex64;

use crate::error::Error;
use crate::potential::Potential;
use crate::Result;

/// Rescale the running product once its largest entry exceeds `e^50`.
const RESCALE_LOG: f64 = 50.0;

/// Use the even power series for `cos(omega h)` and `sin(omega h)/omega`
/// when `|omega h| < 1e-2`, i.e. `|omega^2 h^2| < 1e-4`.
const SERIES_Z_CUTOFF: f64 = 1e-4;

/// A single evaluation of `lambda^2` overflows beyond this.
const MAX_ABS_LAMBDA: f64 = 1e150;

/// Complex 2x2 matrix with named entries, used for propagators, transfer
/// matrices and the scattering matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mat2 {
    pub m11: Complex64,
    pub m12: Complex64,
    pub m21: Complex64,
    pub m22: Complex64,
}

impl Mat2 {
    pub const IDENTITY: Mat2 = Mat2 {
        m11: Complex64::new(1.0, 0.0),
        m12: Complex64::new(0.0, 0.0),
        m21: Complex64::new(0.0, 0.0),
        m22: Complex64::new(1.0, 0.0),
    };

    pub const ZERO: Mat2 = Mat2 {
        m11: Complex64::new(0.0, 0.0),
        m12: Complex64::new(0.0, 0.0),
        m21: Complex64::new(0.0, 0.0),
        m22: Complex64::new(0.0, 0.0),
    };

    /// Matrix product `self * rhs`.
    pub fn mul(&self, rhs: &Mat2) -> Mat2 {
        Mat2 {
            m11: self.m11 * rhs.m11 + self.m12 * rhs.m21,
            m12: self.m11 * rhs.m12 + self.m12 * rhs.m22,
            m21: self.m21 * rhs.m11 + self.m22 * rhs.m21,
            m22: self.m21 * rhs.m12 + self.m22 * rhs.m22,
        }
    }

    /// Sum `self + rhs`.
    pub fn add(&self, rhs: &Mat2) -> Mat2 {
        Mat2 {
            m11: self.m11 + rhs.m11,
            m12: self.m12 + rhs.m12,
            m21: self.m21 + rhs.m21,
            m22: self.m22 + rhs.m22,
        }
    }

    /// Scalar rescaling `self * s`.
    pub fn scale(&self, s: f64) -> Mat2 {
        Mat2 {
            m11: self.m11 * s,
            m12: self.m12 * s,
            m21: self.m21 * s,
            m22: self.m22 * s,
        }
    }

    pub fn det(&self) -> Complex64 {
        self.m11 * self.m22 - self.m12 * self.m21
    }

    /// Largest entry modulus (used to decide when to rescale).
    pub fn max_abs(&self) -> f64 {
        self.m11
            .norm()
            .max(self.m12.norm())
            .max(self.m21.norm())
            .max(self.m22.norm())
    }
}

/// Scaled value of the Jost function at one point.
///
/// The true values are `a * e^{log_scale}` and, when present,
/// `b * e^{log_scale}` and `a_prime * e^{log_scale}`.  The mantissas stay
/// of moderate size even deep in the lower half-plane, where the true
/// modulus grows like `e^{2 gamma |Im lambda|}`.
#[derive(Debug, Clone, Copy)]
pub struct JostValue {
    /// Mantissa of `a(lambda)`.
    pub a: Complex64,
    /// Mantissa of `b(lambda)`; only meaningful on the real line, `None`
    /// off it.
    pub b: Option<Complex64>,
    /// Mantissa of `a'(lambda)` when a derivative was requested.
    pub a_prime: Option<Complex64>,
    /// Natural log of the magnitude factored out of all mantissas.
    pub log_scale: f64,
}

impl JostValue {
    /// Materialise `a(lambda)`.  Finite only while `log_scale` is moderate;
    /// prefer [`JostValue::log_abs_a`] for magnitude comparisons.
    pub fn value(&self) -> Complex64 {
        self.a * self.log_scale.exp()
    }

    /// Materialise `b(lambda)` (real-line evaluations only).
    pub fn value_b(&self) -> Option<Complex64> {
        self.b.map(|b| b * self.log_scale.exp())
    }

    /// Materialise `a'(lambda)`.
    pub fn value_prime(&self) -> Option<Complex64> {
        self.a_prime.map(|p| p * self.log_scale.exp())
    }

    /// `ln |a(lambda)|`, exact in the scaled representation.
    pub fn log_abs_a(&self) -> f64 {
        self.a.norm().ln() + self.log_scale
    }

    /// Newton ratio `a / a'`, which is scale-free.
    pub fn newton_ratio(&self) -> Option<Complex64> {
        self.a_prime.map(|p| self.a / p)
    }
}

/// `cos(omega h)` and `sin(omega h)/omega` as functions of
/// `w = omega^2 = lambda^2 - |q|^2`.
///
/// Both are entire in `w`; near `w = 0` the closed forms are replaced by
/// their power series to avoid `0/0`.
fn trig_pair(w: Complex64, h: f64) -> (Complex64, Complex64) {
    let z = w * (h * h);
    if z.norm() < SERIES_Z_CUTOFF {
        // cos: 1 - z/2 + z^2/24 - z^3/720
        // sin(omega h)/omega = h (1 - z/6 + z^2/120 - z^3/5040)
        let c = Complex64::new(1.0, 0.0) - z / 2.0 + z * z / 24.0 - z * z * z / 720.0;
        let s = (Complex64::new(1.0, 0.0) - z / 6.0 + z * z / 120.0 - z * z * z / 5040.0) * h;
        (c, s)
    } else {
        let omega = w.sqrt();
        let oh = omega * h;
        (oh.cos(), oh.sin() / omega)
    }
}

/// Derivative `d/dw [ sin(omega h)/omega ]`, needed for the
/// `lambda`-derivative of the propagator.
fn trig_s_prime(w: Complex64, h: f64, c: Complex64, s: Complex64) -> Complex64 {
    let z = w * (h * h);
    if z.norm() < SERIES_Z_CUTOFF {
        // series of (h c - s) / (2 w):
        // -h^3/6 + w h^5/60 - w^2 h^7/1680 + w^3 h^9/90720
        let h3 = h * h * h;
        let h5 = h3 * h * h;
        let h7 = h5 * h * h;
        let h9 = h7 * h * h;
        Complex64::new(-h3 / 6.0, 0.0) + w * (h5 / 60.0) - w * w * (h7 / 1680.0)
            + w * w * w * (h9 / 90720.0)
    } else {
        (c * h - s) / (2.0 * w)
    }
}

/// Exact propagator `exp(i M h)` across one cell of width `h` with
/// constant coefficient `q`.
pub fn cell_propagator(q: Complex64, h: f64, lambda: Complex64) -> Mat2 {
    let w = lambda * lambda - q.norm_sqr();
    let (c, s) = trig_pair(w, h);
    let is = Complex64::i() * s;
    Mat2 {
        m11: c + is * lambda,
        m12: -is * q,
        m21: is * q.conj(),
        m22: c - is * lambda,
    }
}

/// Propagator together with its `lambda`-derivative.
///
/// With `T = c I + i s M`, `dw/dlambda = 2 lambda` and
/// `dM/dlambda = diag(1, -1)`:
///
/// ```text
///   T' = c' I + i s' M + i s diag(1, -1),
///   c' = -h lambda s,   s' = 2 lambda ds/dw.
/// ```
fn cell_propagator_with_prime(q: Complex64, h: f64, lambda: Complex64) -> (Mat2, Mat2) {
    let w = lambda * lambda - q.norm_sqr();
    let (c, s) = trig_pair(w, h);
    let is = Complex64::i() * s;
    let t = Mat2 {
        m11: c + is * lambda,
        m12: -is * q,
        m21: is * q.conj(),
        m22: c - is * lambda,
    };
    let dc = -lambda * s * h;
    let ds = 2.0 * lambda * trig_s_prime(w, h, c, s);
    let ids = Complex64::i() * ds;
    let tp = Mat2 {
        m11: dc + is + ids * lambda,
        m12: -ids * q,
        m21: ids * q.conj(),
        m22: dc - is - ids * lambda,
    };
    (t, tp)
}

fn check_lambda(lambda: Complex64) -> Result<()> {
    if !lambda.re.is_finite() || !lambda.im.is_finite() || lambda.norm() > MAX_ABS_LAMBDA {
        return Err(Error::EvaluationOutOfRange {
            detail: format!("cannot evaluate at lambda = {lambda}"),
            max_abs_im: MAX_ABS_LAMBDA,
        });
    }
    Ok(())
}

/// Number of equal subcells a cell is propagated through.  Splitting a
/// constant cell changes nothing mathematically (`T(h) = T(h/2)^2`) but
/// keeps the growth of any *single* factor below `e^50`, so the running
/// rescaling can always absorb it and the product never overflows.
fn split_count(q: Complex64, h: f64, lambda: Complex64) -> usize {
    let growth = (lambda.norm() + q.norm()) * h;
    (growth / 40.0).ceil().max(1.0) as usize
}

/// Transfer matrix `U = T_N ... T_1` across the support, with the factored
/// magnitude returned as `log_scale`.
fn transfer(pot: &Potential, lambda: Complex64) -> Result<(Mat2, f64)> {
    check_lambda(lambda)?;
    let mut u = Mat2::IDENTITY;
    let mut log_scale = 0.0;
    let rescale_at = RESCALE_LOG.exp();
    for cell in pot.cells() {
        let n = split_count(cell.value, cell.width, lambda);
        let t = cell_propagator(cell.value, cell.width / n as f64, lambda);
        for _ in 0..n {
            u = t.mul(&u);
            let m = u.max_abs();
            if m > rescale_at {
                u = u.scale(1.0 / m);
                log_scale += m.ln();
            }
        }
    }
    Ok((u, log_scale))
}

/// Transfer matrix and its `lambda`-derivative, accumulated by the product
/// rule `U' <- T' U + T U'` and rescaled by a common factor so that the
/// ratio `a'/a` is preserved exactly.
fn transfer_with_prime(pot: &Potential, lambda: Complex64) -> Result<(Mat2, Mat2, f64)> {
    check_lambda(lambda)?;
    let mut u = Mat2::IDENTITY;
    let mut up = Mat2::ZERO;
    let mut log_scale = 0.0;
    let rescale_at = RESCALE_LOG.exp();
    for cell in pot.cells() {
        let n = split_count(cell.value, cell.width, lambda);
        let (t, tp) = cell_propagator_with_prime(cell.value, cell.width / n as f64, lambda);
        for _ in 0..n {
            up = tp.mul(&u).add(&t.mul(&up));
            u = t.mul(&u);
            let m = u.max_abs();
            if m > rescale_at {
                let inv = 1.0 / m;
                u = u.scale(inv);
                up = up.scale(inv);
                log_scale += m.ln();
            }
        }
    }
    Ok((u, up, log_scale))
}

/// Evaluate the Jost function `a(lambda)` anywhere in the plane, and
/// `b(lambda)` as well when `lambda` is real.
///
/// The plane-wave factor `e^{i lambda gamma}` is folded into the scaled
/// representation: its phase multiplies the mantissa, its magnitude goes
/// into `log_scale`.
pub fn jost_ab(pot: &Potential, lambda: Complex64) -> Result<JostValue> {
    let (u, ls) = transfer(pot, lambda)?;
    let gamma = pot.gamma();
    let phase = Complex64::from_polar(1.0, lambda.re * gamma);
    if lambda.im == 0.0 {
        Ok(JostValue {
            a: u.m22 * phase,
            b: Some(u.m12 * phase.conj()),
            a_prime: None,
            log_scale: ls,
        })
    } else {
        Ok(JostValue {
            a: u.m22 * phase,
            b: None,
            a_prime: None,
            log_scale: ls - lambda.im * gamma,
        })
    }
}

/// Evaluate `a(lambda)` together with its derivative `a'(lambda)`, both in
/// the same scaled representation (shared `log_scale`).
///
/// From `a = U22 e^{i lambda gamma}`:
/// `a' = (U22' + i gamma U22) e^{i lambda gamma}`.
pub fn jost_a_prime(pot: &Potential, lambda: Complex64) -> Result<JostValue> {
    let (u, up, ls) = transfer_with_prime(pot, lambda)?;
    let gamma = pot.gamma();
    let phase = Complex64::from_polar(1.0, lambda.re * gamma);
    let a = u.m22 * phase;
    let ap = (up.m22 + Complex64::i() * gamma * u.m22) * phase;
    Ok(JostValue {
        a,
        b: None,
        a_prime: Some(ap),
        log_scale: ls - lambda.im * gamma,
    })
}

/// Scattering matrix at a real energy:
///
/// ```text
///   S = (1/a) |  1        -conj(b) |
///             |  b         1       |
/// ```
///
/// `|a| >= 1` on the real line, so the entries are always finite.
pub fn smatrix(pot: &Potential, lambda: f64) -> Result<Mat2> {
    let jv = jost_ab(pot, Complex64::new(lambda, 0.0))?;
    let a = jv.value();
    let b = jv.value_b().expect("b is always computed on the real line");
    Ok(Mat2 {
        m11: a.inv(),
        m12: -b.conj() / a,
        m21: b / a,
        m22: a.inv(),
    })
}

/// Log of the envelope `e^{gamma (|Im lambda| - Im lambda)}` that bounds
/// `|a|` over the plane (tight support width).  Used to normalise residuals
/// and boundary moduli so tolerances mean the same thing at every depth.
pub fn envelope_log(gamma_tight: f64, lambda: Complex64) -> f64 {
    gamma_tight * (lambda.im.abs() - lambda.im)
}
