//! Piecewise-constant complex potentials supported in `[0, gamma]`.
//!
//! The piecewise-constant representation is canonical here: it admits exact
//! cell propagators, and any integrable compactly supported potential can be
//! approximated in `L^1`, which controls the Jost function uniformly on
//! bounded sets. A [`Potential`] is immutable after construction and all
//! operations on it are pure, so values can be shared freely across threads.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::Result;

/// One constant piece of the potential: `q(x) = value` on an interval of
/// length `width`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cell {
    pub width: f64,
    pub value: Complex64,
}

impl Cell {
    pub fn new(width: f64, value: Complex64) -> Self {
        Cell { width, value }
    }
}

/// A complex-valued potential, constant on each cell, supported in
/// `[0, gamma]` with `gamma` the sum of cell widths.
#[derive(Debug, Clone, PartialEq)]
pub struct Potential {
    cells: Vec<Cell>,
    gamma: f64,
}

impl Potential {
    /// Builds a potential from ordered cells. Widths must be positive and
    /// values finite.
    pub fn from_cells(cells: Vec<Cell>) -> Result<Self> {
        for (k, c) in cells.iter().enumerate() {
            if !c.width.is_finite() || c.width <= 0.0 {
                return Err(Error::InvalidPotential(format!(
                    "cell {k} has nonpositive or non-finite width {}",
                    c.width
                )));
            }
            if !c.value.re.is_finite() || !c.value.im.is_finite() {
                return Err(Error::InvalidPotential(format!(
                    "cell {k} has non-finite value"
                )));
            }
        }
        let gamma = cells.iter().map(|c| c.width).sum();
        Ok(Potential { cells, gamma })
    }

    /// Builds a piecewise-constant potential from point samples of `q` on
    /// `[0, gamma]`. Cell boundaries are the midpoints between consecutive
    /// abscissae (the first cell starts at 0, the last ends at `gamma`), and
    /// each sample value is held constant on its cell. This midpoint rule is
    /// fixed so that files regenerated from the same samples stay identical.
    pub fn from_samples(samples: &[(f64, Complex64)], gamma: f64) -> Result<Self> {
        if !gamma.is_finite() || gamma <= 0.0 {
            return Err(Error::InvalidPotential(format!(
                "support length must be positive, got {gamma}"
            )));
        }
        if samples.is_empty() {
            return Err(Error::InvalidPotential(
                "no samples provided".to_string(),
            ));
        }
        for w in samples.windows(2) {
            if w[1].0.is_nan() || w[1].0 <= w[0].0 {
                return Err(Error::InvalidPotential(format!(
                    "sample abscissae must be strictly increasing: {} then {}",
                    w[0].0, w[1].0
                )));
            }
        }
        let first = samples[0].0;
        let last = samples[samples.len() - 1].0;
        if first < 0.0 || last > gamma {
            return Err(Error::InvalidPotential(format!(
                "sample abscissae [{first}, {last}] outside [0, {gamma}]"
            )));
        }
        let n = samples.len();
        let mut cells = Vec::with_capacity(n);
        let mut left = 0.0;
        for i in 0..n {
            let right = if i + 1 < n {
                0.5 * (samples[i].0 + samples[i + 1].0)
            } else {
                gamma
            };
            cells.push(Cell::new(right - left, samples[i].1));
            left = right;
        }
        Potential::from_cells(cells)
    }

    /// The zero potential (empty support, `gamma = 0`).
    pub fn zero() -> Self {
        Potential {
            cells: Vec::new(),
            gamma: 0.0,
        }
    }

    /// Named builtin potentials; see the CLI documentation for the spec
    /// grammar. `random_cells` is deterministic in its seed.
    pub fn builtin(name: &str, params: &BuiltinParams) -> Result<Self> {
        match name {
            "square" => {
                let a = params.require("A")?;
                let gamma = params.require("gamma")?;
                Potential::from_cells(vec![Cell::new(gamma, Complex64::new(a, 0.0))])
            }
            "complex_step" => {
                let re = params.require("re")?;
                let im = params.require("im")?;
                let gamma = params.require("gamma")?;
                Potential::from_cells(vec![Cell::new(gamma, Complex64::new(re, im))])
            }
            "two_bump" => {
                let a = params.require("A")?;
                let w = params.require("w")?;
                let gap = params.require("gap")?;
                Potential::from_cells(vec![
                    Cell::new(w, Complex64::new(a, 0.0)),
                    Cell::new(gap, Complex64::new(0.0, 0.0)),
                    Cell::new(w, Complex64::new(a, 0.0)),
                ])
            }
            "random_cells" => {
                let n = params.require("n")? as usize;
                let seed = params.require("seed")? as u64;
                let max_a = params.require("maxA")?;
                let gamma = params.get("gamma").unwrap_or(1.0);
                if n == 0 {
                    return Err(Error::InvalidPotential(
                        "random_cells needs n >= 1".to_string(),
                    ));
                }
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let raw: Vec<f64> = (0..n).map(|_| rng.gen_range(0.5..1.5)).collect();
                let total: f64 = raw.iter().sum();
                let mut cells = Vec::with_capacity(n);
                for w in raw {
                    let r = max_a * rng.gen_range(0.0..1.0f64);
                    let phi = rng.gen_range(0.0..std::f64::consts::TAU);
                    cells.push(Cell::new(
                        gamma * w / total,
                        Complex64::from_polar(r, phi),
                    ));
                }
                Potential::from_cells(cells)
            }
            other => Err(Error::InvalidPotential(format!(
                "unknown builtin potential '{other}'"
            ))),
        }
    }

    pub fn cells(&self) -> &[Cell] {
        &self.cells
    }

    /// Support length `gamma = sum of widths` (includes zero-valued cells).
    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    /// Diameter of the tight support: leading and trailing zero-valued cells
    /// are trimmed, since `a` does not depend on them. This is the `gamma`
    /// that enters every bound.
    pub fn gamma_tight(&self) -> f64 {
        let first = self.cells.iter().position(|c| c.value != Complex64::ZERO);
        let last = self.cells.iter().rposition(|c| c.value != Complex64::ZERO);
        match (first, last) {
            (Some(i), Some(j)) => self.cells[i..=j].iter().map(|c| c.width).sum(),
            _ => 0.0,
        }
    }

    /// `L^1` norm of `q`: sum of `|q_k| * h_k`.
    pub fn l1_norm(&self) -> f64 {
        self.cells.iter().map(|c| c.value.norm() * c.width).sum()
    }

    /// Largest `|q_k|`, used by range guards.
    pub fn max_abs(&self) -> f64 {
        self.cells.iter().map(|c| c.value.norm()).fold(0.0, f64::max)
    }

    /// The potential with every cell value conjugated.
    pub fn conjugated(&self) -> Self {
        Potential {
            cells: self
                .cells
                .iter()
                .map(|c| Cell::new(c.width, c.value.conj()))
                .collect(),
            gamma: self.gamma,
        }
    }

    /// Parses the JSON file format `{"cells":[{"h":..,"re":..,"im":..},..]}`.
    pub fn from_json(text: &str) -> Result<Self> {
        let file: PotentialFile =
            serde_json::from_str(text).map_err(|e| Error::Parse(format!("potential JSON: {e}")))?;
        Potential::from_cells(
            file.cells
                .iter()
                .map(|c| Cell::new(c.h, Complex64::new(c.re, c.im)))
                .collect(),
        )
    }

    /// Parses the CSV alternative: one `h,re,im` row per cell. Blank lines,
    /// `#` comments, and an optional header row are skipped.
    pub fn from_csv(text: &str) -> Result<Self> {
        let mut cells = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            if lineno == 0 && line.split(',').next().is_some_and(|f| f.trim().parse::<f64>().is_err()) {
                continue;
            }
            let fields: Vec<&str> = line.split(',').map(str::trim).collect();
            if fields.len() != 3 {
                return Err(Error::Parse(format!(
                    "potential CSV line {}: expected 3 fields, got {}",
                    lineno + 1,
                    fields.len()
                )));
            }
            let parse = |s: &str| -> Result<f64> {
                s.parse::<f64>()
                    .map_err(|_| Error::Parse(format!("potential CSV line {}: bad number '{s}'", lineno + 1)))
            };
            cells.push(Cell::new(
                parse(fields[0])?,
                Complex64::new(parse(fields[1])?, parse(fields[2])?),
            ));
        }
        Potential::from_cells(cells)
    }

    /// Serializes to the JSON file format.
    pub fn to_json(&self) -> String {
        let file = PotentialFile {
            cells: self
                .cells
                .iter()
                .map(|c| CellFile {
                    h: c.width,
                    re: c.value.re,
                    im: c.value.im,
                })
                .collect(),
        };
        serde_json::to_string_pretty(&file).expect("potential serialization cannot fail")
    }
}

/// Key-value parameters for [`Potential::builtin`].
#[derive(Debug, Default, Clone)]
pub struct BuiltinParams {
    entries: Vec<(String, f64)>,
}

impl BuiltinParams {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn set(&mut self, key: &str, value: f64) {
        self.entries.push((key.to_string(), value));
    }

    pub fn get(&self, key: &str) -> Option<f64> {
        self.entries
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| *v)
    }

    fn require(&self, key: &str) -> Result<f64> {
        self.get(key)
            .ok_or_else(|| Error::InvalidPotential(format!("missing builtin parameter '{key}'")))
    }
}

/// Parses the builtin mini-grammar `name:key=val,key=val`.
pub fn parse_builtin_spec(spec: &str) -> Result<Potential> {
    let (name, rest) = match spec.split_once(':') {
        Some((n, r)) => (n, r),
        None => (spec, ""),
    };
    let mut params = BuiltinParams::new();
    if !rest.is_empty() {
        for pair in rest.split(',') {
            let (k, v) = pair
                .split_once('=')
                .ok_or_else(|| Error::Parse(format!("builtin spec: expected key=val, got '{pair}'")))?;
            let value: f64 = v
                .trim()
                .parse()
                .map_err(|_| Error::Parse(format!("builtin spec: bad number '{v}'")))?;
            params.set(k.trim(), value);
        }
    }
    Potential::builtin(name.trim(), &params)
}

#[derive(Serialize, Deserialize)]
struct PotentialFile {
    cells: Vec<CellFile>,
}

#[derive(Serialize, Deserialize)]
struct CellFile {
    h: f64,
    re: f64,
    im: f64,
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn from_cells_empty_is_zero_potential() {
        let p = Potential::from_cells(vec![]).unwrap();
        assert_eq!(p.gamma(), 0.0);
        assert_eq!(p.l1_norm(), 0.0);
        assert_eq!(p.gamma_tight(), 0.0);
    }

    #[test]
    fn from_cells_sums_widths() {
        let p = Potential::from_cells(vec![Cell::new(1.0, c(1.0, 0.0))]).unwrap();
        assert_eq!(p.gamma(), 1.0);
        let p = Potential::from_cells(vec![
            Cell::new(0.5, c(1.0, 1.0)),
            Cell::new(0.5, c(-2.0, 0.0)),
        ])
        .unwrap();
        assert_eq!(p.gamma(), 1.0);
    }

    #[test]
    fn from_cells_rejects_nonpositive_width() {
        assert!(Potential::from_cells(vec![Cell::new(0.0, c(1.0, 0.0))]).is_err());
        assert!(Potential::from_cells(vec![Cell::new(-1.0, c(1.0, 0.0))]).is_err());
        assert!(Potential::from_cells(vec![Cell::new(f64::NAN, c(1.0, 0.0))]).is_err());
    }

    #[test]
    fn l1_norm_hand_quadrature() {
        // 0.5*|3+4i| + 2*|-1| = 0.5*5 + 2 = 4.5
        let p = Potential::from_cells(vec![
            Cell::new(0.5, c(3.0, 4.0)),
            Cell::new(2.0, c(-1.0, 0.0)),
        ])
        .unwrap();
        assert!((p.l1_norm() - 4.5).abs() <= 4.5 * 8.0 * f64::EPSILON);
        assert_eq!(Potential::zero().l1_norm(), 0.0);
        let unit = Potential::from_cells(vec![Cell::new(1.0, c(1.0, 0.0))]).unwrap();
        assert_eq!(unit.l1_norm(), 1.0);
    }

    #[test]
    fn from_samples_single_sample_spans_support() {
        let p = Potential::from_samples(&[(0.3, c(2.0, -1.0))], 1.5).unwrap();
        assert_eq!(p.cells().len(), 1);
        assert_eq!(p.cells()[0].width, 1.5);
        assert_eq!(p.cells()[0].value, c(2.0, -1.0));
    }

    #[test]
    fn from_samples_midpoint_quadrature_matches_l1() {
        let samples = [(0.1, c(1.0, 0.0)), (0.5, c(0.0, -2.0)), (0.9, c(3.0, 4.0))];
        let gamma = 1.2;
        let p = Potential::from_samples(&samples, gamma).unwrap();
        // Independent midpoint-rule quadrature of |q|.
        let b = [0.0, 0.3, 0.7, gamma];
        let expected: f64 = (0..3)
            .map(|i| samples[i].1.norm() * (b[i + 1] - b[i]))
            .sum();
        assert!((p.l1_norm() - expected).abs() < 1e-14);
        assert_eq!(p.cells().len(), 3);
    }

    #[test]
    fn from_samples_rejects_bad_abscissae() {
        assert!(Potential::from_samples(&[(0.5, c(1.0, 0.0)), (0.5, c(1.0, 0.0))], 1.0).is_err());
        assert!(Potential::from_samples(&[(0.9, c(1.0, 0.0)), (0.1, c(1.0, 0.0))], 1.0).is_err());
        assert!(Potential::from_samples(&[(-0.1, c(1.0, 0.0))], 1.0).is_err());
        assert!(Potential::from_samples(&[(1.1, c(1.0, 0.0))], 1.0).is_err());
    }

    #[test]
    fn builtin_square_and_two_bump() {
        let p = parse_builtin_spec("square:A=1,gamma=1").unwrap();
        assert_eq!(p.cells().len(), 1);
        assert_eq!(p.cells()[0].value, c(1.0, 0.0));
        assert_eq!(p.gamma(), 1.0);

        let p = parse_builtin_spec("two_bump:A=1,w=0.25,gap=0.5").unwrap();
        assert_eq!(p.cells().len(), 3);
        assert_eq!(p.cells()[1].value, c(0.0, 0.0));
        assert_eq!(p.gamma(), 1.0);
        assert_eq!(p.gamma_tight(), 1.0);
    }

    #[test]
    fn builtin_random_cells_is_seed_deterministic() {
        let a = parse_builtin_spec("random_cells:n=8,seed=7,maxA=2").unwrap();
        let b = parse_builtin_spec("random_cells:n=8,seed=7,maxA=2").unwrap();
        assert_eq!(a, b);
        let c = parse_builtin_spec("random_cells:n=8,seed=8,maxA=2").unwrap();
        assert_ne!(a, c);
        assert!((a.gamma() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn builtin_unknown_or_missing_params() {
        assert!(parse_builtin_spec("gauss:A=1").is_err());
        assert!(parse_builtin_spec("square:A=1").is_err());
        assert!(parse_builtin_spec("square:A=1,gamma=oops").is_err());
    }

    #[test]
    fn tight_support_trims_zero_cells() {
        let p = Potential::from_cells(vec![
            Cell::new(0.5, c(0.0, 0.0)),
            Cell::new(1.0, c(1.0, 0.0)),
            Cell::new(0.25, c(0.0, 0.0)),
        ])
        .unwrap();
        assert_eq!(p.gamma(), 1.75);
        assert_eq!(p.gamma_tight(), 1.0);
    }

    #[test]
    fn json_roundtrip_and_csv_parse() {
        let p = Potential::from_cells(vec![
            Cell::new(0.5, c(1.0, 1.0)),
            Cell::new(0.5, c(-2.0, 0.0)),
        ])
        .unwrap();
        let back = Potential::from_json(&p.to_json()).unwrap();
        assert_eq!(p, back);

        let q = Potential::from_csv("0.5, 1.0, 1.0\n# comment\n0.5, -2.0, 0.0\n").unwrap();
        assert_eq!(p, q);
        assert!(Potential::from_csv("0.5, 1.0\n").is_err());
        assert!(Potential::from_json("{\"cells\": oops}").is_err());
    }

    proptest::proptest! {
        // serialisation uses shortest-roundtrip floats, so the cycle is exact
        #[test]
        fn json_round_trip_is_bit_exact(
            raw in proptest::collection::vec(
                (0.01f64..2.0, -3.0f64..3.0, -3.0f64..3.0),
                1..6,
            )
        ) {
            let cells: Vec<Cell> = raw
                .iter()
                .map(|&(w, re, im)| Cell::new(w, c(re, im)))
                .collect();
            let pot = Potential::from_cells(cells).unwrap();
            let back = Potential::from_json(&pot.to_json()).unwrap();
            proptest::prop_assert_eq!(pot, back);
        }
    }
}
