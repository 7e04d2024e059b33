//! Acceptance suite: one test per criterion, each printing a single
//! `criterion N: PASS` line with the measured figure of merit.
//!
//! The criteria pit independent implementations against each other
//! (transfer matrices vs. the perturbation series, analytic derivatives
//! vs. finite differences, zero lists vs. contour integrals) and check
//! the theory's quantitative laws on computed data.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use dirac_lab::estimates::{
    carleson_sweep, counting_bound_report, envelope_report, jensen_check, sum_bound_report, y_p,
};
use dirac_lab::{
    counting_function, find_resonances, jost_a_prime, jost_a_series, jost_ab, Cell, Potential,
    Rectangle, RootConfig,
};

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Deterministic random potential: up to 8 cells, support length in
/// [0.3, 2], L1 norm capped at 2.
fn random_potential(seed: u64) -> Potential {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.gen_range(1..=8usize);
    let widths: Vec<f64> = (0..n).map(|_| rng.gen_range(0.05..0.4)).collect();
    let total: f64 = widths.iter().sum();
    let gamma = rng.gen_range(0.3..2.0);
    let mut cells: Vec<Cell> = widths
        .iter()
        .map(|&w| {
            let r = rng.gen_range(0.0..1.8);
            let phi = rng.gen_range(0.0..std::f64::consts::TAU);
            Cell::new(gamma * w / total, Complex64::from_polar(r, phi))
        })
        .collect();
    let l1: f64 = cells.iter().map(|cl| cl.width * cl.value.norm()).sum();
    if l1 > 2.0 {
        let shrink = 1.9 / l1;
        for cell in &mut cells {
            cell.value *= shrink;
        }
    }
    Potential::from_cells(cells).expect("random potential is valid")
}

/// 21 x 11 lattice over [-20, 20] x [-5, 5].
fn plane_grid() -> Vec<Complex64> {
    let mut grid = Vec::with_capacity(21 * 11);
    for i in 0..21 {
        for j in 0..11 {
            grid.push(c(-20.0 + 2.0 * i as f64, -5.0 + j as f64));
        }
    }
    grid
}

fn square(a: f64, gamma: f64) -> Potential {
    Potential::from_cells(vec![Cell::new(gamma, c(a, 0.0))]).unwrap()
}

fn square_zero_list(gamma: f64, half_width: f64, depth: f64) -> Vec<dirac_lab::Resonance> {
    let pot = square(1.0, gamma);
    let region = Rectangle::new(-half_width, half_width, -depth, -1e-12).unwrap();
    find_resonances(&pot, region, &RootConfig::default()).unwrap()
}

#[test]
fn criterion_01_transfer_and_series_evaluators_agree() {
    let grid = plane_grid();
    let mut worst: f64 = 0.0;
    let mut evals = 0usize;
    for seed in 0..50u64 {
        let pot = random_potential(seed);
        for &lambda in &grid {
            let jv = jost_ab(&pot, lambda).unwrap();
            let a_t = jv.value();
            let tol = 1e-10 * a_t.norm().max(1.0);
            let sr = jost_a_series(&pot, lambda, tol).unwrap();
            let diff = (a_t - sr.a).norm();
            let allowed = sr.remainder_bound + 1e-11 * a_t.norm();
            assert!(
                diff <= allowed,
                "criterion 1: FAIL at seed {seed}, lambda {lambda}: \
                 |diff| = {diff:.3e} > remainder {:.3e} + 1e-11|a|",
                sr.remainder_bound
            );
            worst = worst.max(diff / a_t.norm().max(1e-300));
            evals += 1;
        }
    }
    println!(
        "criterion 1: PASS — transfer vs series on {evals} evaluations \
         (50 potentials x 231 grid points), worst relative gap {worst:.2e}"
    );
}

#[test]
fn criterion_02_real_line_unitarity_and_modulus_floor() {
    let potentials = [
        square(1.0, 1.0),
        Potential::from_cells(vec![Cell::new(1.5, c(0.6, 0.5))]).unwrap(),
        random_potential(812),
    ];
    let mut worst_defect: f64 = 0.0;
    let mut min_modulus = f64::INFINITY;
    for pot in &potentials {
        for k in 0..1000 {
            let lambda = -40.0 + 80.0 * k as f64 / 999.0;
            let jv = jost_ab(pot, c(lambda, 0.0)).unwrap();
            let a = jv.value();
            let b = jv.value_b().expect("b tracked on the real line");
            let defect = (a.norm_sqr() - b.norm_sqr() - 1.0).abs();
            worst_defect = worst_defect.max(defect);
            min_modulus = min_modulus.min(a.norm());
            assert!(defect <= 1e-10, "criterion 2: FAIL |a|^2-|b|^2-1 = {defect:.3e} at {lambda}");
            assert!(
                a.norm() >= 1.0 - 1e-10,
                "criterion 2: FAIL |a| = {} < 1 at {lambda}",
                a.norm()
            );
        }
    }
    println!(
        "criterion 2: PASS — 3000 real evaluations, worst unitarity defect \
         {worst_defect:.2e}, min |a| = {min_modulus:.12}"
    );
}

#[test]
fn criterion_03_envelope_bound_and_origin_value() {
    // grid check on random potentials (real line included)
    let mut grid = plane_grid();
    for k in 0..=100 {
        grid.push(c(-20.0 + 0.4 * k as f64, 0.0));
    }
    for seed in [3, 47, 901] {
        let pot = random_potential(seed);
        let rep = envelope_report(&pot, &grid).unwrap();
        assert!(
            rep.pass,
            "criterion 3: FAIL envelope for seed {seed}: lhs {} rhs {}",
            rep.lhs, rep.rhs
        );
    }
    // exact origin value for the square barrier: a(0) = cosh(A gamma)
    let mut worst: f64 = 0.0;
    for (a, gamma) in [(1.0, 1.0), (1.7, 0.6), (0.4, 2.0)] {
        let pot = square(a, gamma);
        let a0 = jost_ab(&pot, c(0.0, 0.0)).unwrap().value();
        let expect = (a * gamma).cosh();
        let err = (a0 - expect).norm() / expect;
        assert!(
            err <= 1e-10,
            "criterion 3: FAIL a(0) = {a0} vs cosh({a}*{gamma}) = {expect}"
        );
        worst = worst.max(err);
    }
    println!(
        "criterion 3: PASS — envelope holds on 332-point grids for 3 random \
         potentials; square-barrier a(0) matches cosh(A gamma) to {worst:.2e}"
    );
}

#[test]
fn criterion_04_jensen_identity_on_the_square_barrier() {
    let pot = square(1.0, 1.0);
    let zeros = square_zero_list(1.0, 25.0, 5.0);
    let mut worst: f64 = 0.0;
    for r in [5.0, 10.0, 20.0] {
        let rep = jensen_check(&pot, &zeros, r).unwrap();
        let rel = (rep.lhs - rep.rhs).abs() / rep.rhs.abs().max(1.0);
        assert!(
            rep.pass && rel <= 1e-6,
            "criterion 4: FAIL jensen at r = {r}: lhs {} rhs {} rel {rel:.3e}",
            rep.lhs,
            rep.rhs
        );
        worst = worst.max(rel);
    }
    println!(
        "criterion 4: PASS — Jensen identity at r = 5, 10, 20 with worst \
         relative residual {worst:.2e}"
    );
}

#[test]
fn criterion_05_counting_asymptotics_scale_with_gamma() {
    let mut slopes = Vec::new();
    for gamma in [1.0, 2.0] {
        let zeros = square_zero_list(gamma, 211.0, 10.0 / gamma);
        let n200 = counting_function(&zeros, 200.0);
        let slope = n200 as f64 / 200.0;
        let expect = 2.0 * gamma / std::f64::consts::PI;
        let rel = (slope / expect - 1.0).abs();
        assert!(
            rel <= 0.1,
            "criterion 5: FAIL gamma = {gamma}: N(200)/200 = {slope:.4} vs 2 gamma/pi = {expect:.4}"
        );
        slopes.push(slope);
    }
    let ratio = slopes[1] / slopes[0];
    assert!(
        (ratio - 2.0).abs() <= 0.2,
        "criterion 5: FAIL doubling gamma scaled the slope by {ratio:.3}, want 2"
    );
    println!(
        "criterion 5: PASS — N(200)/200 = {:.4} (gamma 1) and {:.4} (gamma 2), \
         slope ratio {ratio:.3}",
        slopes[0], slopes[1]
    );
}

#[test]
fn criterion_06_counting_bound_holds_at_every_radius() {
    for gamma in [1.0, 2.0] {
        let pot = square(1.0, gamma);
        let zeros = square_zero_list(gamma, 211.0, 10.0 / gamma);
        for k in 1..=20 {
            let r = 10.0 * k as f64;
            let rep = counting_bound_report(&pot, &zeros, r);
            assert!(
                rep.pass,
                "criterion 6: FAIL gamma {gamma}, r {r}: N = {} > bound {}",
                rep.lhs, rep.rhs
            );
        }
    }
    println!(
        "criterion 6: PASS — N(r) <= (4 r gamma / pi + ||q||_1)/log 2 at \
         r = 10..200 for gamma = 1 and 2"
    );
}

#[test]
fn criterion_07_carleson_measure_on_shifted_zeros() {
    let pot = square(1.0, 1.0);
    let zeros = square_zero_list(1.0, 211.0, 10.0);
    let t_grid: Vec<f64> = (-8..=8).map(|k| 5.0 * k as f64).collect();
    let r_grid = [0.5, 0.9, 1.0, 2.0, 5.0, 10.0];
    let (probes, report) = carleson_sweep(&pot, &zeros, &t_grid, &r_grid);
    assert!(report.pass, "criterion 7: FAIL worst mass/bound ratio {}", report.lhs);
    let small: usize = probes.iter().filter(|p| p.r <= 1.0).map(|p| p.mass).sum();
    assert_eq!(small, 0, "criterion 7: FAIL shifted zeros inside an r <= 1 disk");
    let seen: usize = probes.iter().map(|p| p.mass).sum();
    assert!(seen > 0, "criterion 7: probes saw no zeros at all");
    println!(
        "criterion 7: PASS — {} disk probes, worst mass/bound ratio {:.3}, \
         all r <= 1 disks empty",
        probes.len(),
        report.lhs
    );
}

#[test]
fn criterion_08_resonance_sum_bound_and_y_p() {
    // closed form against reference values and asymptotics
    assert!(
        (y_p(2.0).unwrap() - std::f64::consts::PI).abs() <= 1e-12,
        "criterion 8: FAIL Y_2 != pi"
    );
    let near_one = y_p(1.01).unwrap() * 0.01;
    assert!((near_one - 2.0).abs() <= 0.1, "criterion 8: FAIL (p-1) Y_p -> 2, got {near_one}");
    let large = y_p(400.0).unwrap() * (400.0 / (2.0 * std::f64::consts::PI)).sqrt();
    assert!((large - 1.0).abs() <= 0.01, "criterion 8: FAIL large-p asymptotic, got {large}");

    let pot = square(1.0, 1.0);
    let zeros = square_zero_list(1.0, 211.0, 10.0);
    let mut margins = Vec::new();
    for p in [1.1, 1.5, 2.0, 3.0] {
        let rep = sum_bound_report(p, &pot, &zeros).unwrap();
        assert!(
            rep.pass,
            "criterion 8: FAIL sum bound at p = {p}: lhs {} rhs {}",
            rep.lhs, rep.rhs
        );
        margins.push(rep.lhs / rep.rhs);
    }
    println!(
        "criterion 8: PASS — Y_p checks out and the sum bound holds at \
         p = 1.1, 1.5, 2, 3 (largest lhs/rhs = {:.3e})",
        margins.iter().cloned().fold(0.0, f64::max)
    );
}

#[test]
fn criterion_09_analytic_derivative_matches_finite_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(1405);
    let mut worst: f64 = 0.0;
    for k in 0..100 {
        let pot = random_potential(5000 + k);
        let lambda = c(rng.gen_range(-20.0..20.0), rng.gen_range(-5.0..5.0));
        let jv = jost_a_prime(&pot, lambda).unwrap();
        let a = jv.value();
        let ap = jv.value_prime().expect("derivative requested");
        let h = 1e-5 * lambda.norm().max(1.0);
        let fd = (jost_ab(&pot, lambda + h).unwrap().value()
            - jost_ab(&pot, lambda - h).unwrap().value())
            / (2.0 * h);
        let err = (fd - ap).norm() / ap.norm().max(a.norm());
        assert!(
            err <= 1e-6,
            "criterion 9: FAIL at pair {k}: analytic {ap} vs central difference {fd}"
        );
        worst = worst.max(err);
    }
    println!(
        "criterion 9: PASS — a' agrees with central differences on 100 random \
         (potential, lambda) pairs, worst relative error {worst:.2e}"
    );
}

#[test]
fn criterion_10_cli_outputs_are_deterministic() {
    use std::process::Command;
    let bin = env!("CARGO_BIN_EXE_dirac-lab");
    let spec = "random_cells:n=7,seed=23,maxA=1.4";
    let dirs: Vec<tempfile::TempDir> = (0..2).map(|_| tempfile::TempDir::new().unwrap()).collect();
    for (i, dir) in dirs.iter().enumerate() {
        let out = dir.path().to_str().unwrap();
        let threads = if i == 0 { "1" } else { "4" };
        let st = Command::new(bin)
            .args(["verify", "--builtin", spec, "--out", out])
            .env("DIRAC_LAB_THREADS", threads)
            .status()
            .unwrap();
        assert!(st.success(), "criterion 10: verify run {i} failed");
        let st = Command::new(bin)
            .args(["resonances", "--builtin", spec, "--out", out])
            .env("DIRAC_LAB_THREADS", threads)
            .status()
            .unwrap();
        assert!(st.success(), "criterion 10: resonances run {i} failed");
    }
    for name in ["reports.json", "resonances.json"] {
        let a = std::fs::read(dirs[0].path().join(name)).unwrap();
        let b = std::fs::read(dirs[1].path().join(name)).unwrap();
        assert_eq!(a, b, "criterion 10: FAIL {name} differs between runs");
    }
    println!(
        "criterion 10: PASS — verify and resonances artifacts are byte-identical \
         across repeated runs with different thread counts"
    );
}

#[test]
fn criterion_11_dropping_a_zero_breaks_the_jensen_identity() {
    // library level
    let pot = square(1.0, 1.0);
    let zeros = square_zero_list(1.0, 25.0, 5.0);
    let intact = jensen_check(&pot, &zeros, 10.0).unwrap();
    assert!(intact.pass, "criterion 11: baseline jensen must pass");
    let mut truncated = zeros.clone();
    truncated.remove(0);
    let broken = jensen_check(&pot, &truncated, 10.0).unwrap();
    assert!(
        !broken.pass && (broken.lhs - broken.rhs).abs() > 1e-3,
        "criterion 11: FAIL jensen did not notice a missing zero (residual {})",
        (broken.lhs - broken.rhs).abs()
    );

    // CLI level
    use std::process::Command;
    let dir = tempfile::TempDir::new().unwrap();
    let st = Command::new(env!("CARGO_BIN_EXE_dirac-lab"))
        .args([
            "verify",
            "--builtin",
            "square:A=1,gamma=1",
            "--drop-one-resonance",
            "--out",
            dir.path().to_str().unwrap(),
        ])
        .status()
        .unwrap();
    assert_eq!(
        st.code(),
        Some(5),
        "criterion 11: FAIL fault-injected verify must exit 5"
    );
    println!(
        "criterion 11: PASS — removing one zero shifts the Jensen residual to \
         {:.3} and fault-injected verify exits 5",
        (broken.lhs - broken.rhs).abs()
    );
}
