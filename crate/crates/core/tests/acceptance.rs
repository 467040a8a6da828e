//! Acceptance criteria, one test per criterion. Each prints a single
//! `criterion N: PASS|FAIL ...` line before asserting.

use std::f64::consts::PI;
use std::time::Instant;

use nalgebra::Matrix2;
use protective_core::epigauss::{
    disturbance_check, ensemble_statistics, overlap, overlap_monte_carlo, EnsembleConfig, Horizon,
};
use protective_core::hamgauss::{
    completion_map, ode_oracle, periodic_map, pointer_reading_distribution, OscillatorConfig,
    PointerPrep, RegimeCase,
};
use protective_core::numerics::GaussKronrod;
use protective_core::qcore::{c64, CMatrix, DensityOperator, Observable, OrthonormalBasis};
use protective_core::seeding::master_rng;
use protective_core::tomography::{
    basis_fidelities, evolution_operator, fixed_point_basis, identify_state, linear_inversion,
    random_dephasing, recover_hamiltonian, simulate_statistics, MeasurementSet, PreparationSet,
    Shots,
};
use protective_core::toybit::{
    expectation_table, prepare, run_ensemble, success_probability, summarize, Axis, Sign,
    ToyRunConfig,
};
use protective_core::zeno::{
    f_exact, f_gauss, grid_oracle, outcome_pdf, GridSpec, PovmDensity, ZenoConfig,
};

fn verdict(id: u32, pass: bool, detail: &str) {
    println!(
        "criterion {id}: {} {detail}",
        if pass { "PASS" } else { "FAIL" }
    );
}

fn qubit_config(steps: usize, r: f64, sigma: f64) -> ZenoConfig {
    // Basis element 0 of the rotated basis has r = cos²a against Z.
    let basis = OrthonormalBasis::qubit_rotated(r.sqrt().acos());
    ZenoConfig::new(steps, 1.0, sigma, basis, Observable::pauli_z()).unwrap()
}

fn basis_state_density(config: &ZenoConfig, j: usize) -> DensityOperator {
    DensityOperator::pure(config.basis().get(j))
}

#[test]
fn criterion_01_povm_completeness() {
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    for steps in [1, 2, 4, 8, 16, 32] {
        let config = qubit_config(steps, 0.7, 0.1);
        let povm = PovmDensity::new(&config).unwrap();
        // Entrywise quadrature of E_Q over a wider window than the one used
        // to build the abort element.
        let quad = GaussKronrod::with_tolerance(1e-12).initial_intervals(64);
        let mut integral = CMatrix::zeros(2, 2);
        for a in 0..2 {
            for b in 0..2 {
                let re = quad
                    .integrate(|q| povm.element(q)[(a, b)].re, -4.0, 4.0)
                    .unwrap()
                    .value;
                let im = quad
                    .integrate(|q| povm.element(q)[(a, b)].im, -4.0, 4.0)
                    .unwrap()
                    .value;
                integral[(a, b)] = c64(re, im);
            }
        }
        let residual = (integral + povm.abort_element() - CMatrix::identity(2, 2)).norm();
        worst = worst.max(residual);
    }
    let secs = start.elapsed().as_secs_f64();
    let pass = worst < 1e-6 && secs < 10.0;
    verdict(
        1,
        pass,
        &format!("max ||∫E_Q + E_abort - I||_F = {worst:.3e} (< 1e-6), {secs:.2} s (< 10 s)"),
    );
    assert!(pass);
}

#[test]
fn criterion_02_grid_oracle_equivalence() {
    let start = Instant::now();
    let grid = GridSpec::default();
    let mut worst: f64 = 0.0;
    for steps in [1, 2, 4, 8, 16] {
        for r in [0.3, 0.5, 0.9] {
            let config = qubit_config(steps, r, 0.1);
            let rho = basis_state_density(&config, 0);
            let oracle = grid_oracle(&config, &rho, grid).unwrap();
            let povm = PovmDensity::new(&config).unwrap();
            let mut tv = (oracle.abort_probability - povm.abort_probability(&rho).unwrap()).abs();
            for (q, p) in oracle.grid.iter().zip(&oracle.cell_probabilities) {
                tv += (p - outcome_pdf(&config, &rho, *q).unwrap() * oracle.spacing).abs();
            }
            worst = worst.max(0.5 * tv);
        }
    }
    let secs = start.elapsed().as_secs_f64();
    let pass = worst < 1e-3 && secs < 60.0;
    verdict(
        2,
        pass,
        &format!("max TV(grid oracle, analytic pdf) = {worst:.3e} (< 1e-3), {secs:.2} s (< 60 s)"),
    );
    assert!(pass);
}

#[test]
fn criterion_03_pointer_profile_curves() {
    let sigma = 0.1;
    let grid: Vec<f64> = (0..=4000).map(|k| -2.0 + k as f64 * 1e-3).collect();
    let mut emitted = 0;
    let mut lines = Vec::new();
    let mut pass = true;
    for r in [0.5, 0.7, 0.9] {
        let sup = |n: usize| {
            grid.iter()
                .map(|&q| (f_exact(n, r, sigma, q) - f_gauss(n, r, sigma, q)).abs())
                .fold(0.0, f64::max)
        };
        for n in [1, 3, 5, 7, 9, 11] {
            emitted += grid
                .iter()
                .filter(|&&q| f_exact(n, r, sigma, q).is_finite())
                .count();
        }
        let (e1, e11) = (sup(1), sup(11));
        pass &= e11 < e1;
        lines.push(format!(
            "r={r}: sup|f-f_gauss| N=1 {e1:.3e}, N=11 {e11:.3e}"
        ));
    }
    pass &= emitted == 18 * grid.len();
    verdict(
        3,
        pass,
        &format!("{emitted} curve points; {}", lines.join("; ")),
    );
    assert!(pass);
}

#[test]
fn criterion_04_pointer_shift_and_abort() {
    let steps = 10_000;
    let sigma = 0.1;
    let mut worst_mean: f64 = 0.0;
    let mut worst_abort: f64 = 0.0;
    for k in 1..=9 {
        let r = k as f64 / 10.0;
        let config = qubit_config(steps, r, sigma);
        let rho = basis_state_density(&config, 0);
        let povm = PovmDensity::new(&config).unwrap();
        let moments = povm.outcome_moments(&rho).unwrap();
        worst_mean = worst_mean.max((moments.mean - (2.0 * r - 1.0)).abs());
        worst_abort = worst_abort.max(povm.abort_probability(&rho).unwrap());
    }
    let mean_ok = worst_mean < 1e-3;
    let abort_ok = worst_abort < 1e-3;
    verdict(
        4,
        mean_ok && abort_ok,
        &format!(
            "max |mean - (2r-1)| = {worst_mean:.3e} (< 1e-3: {}), max abort = {worst_abort:.3e} (< 1e-3: {})",
            if mean_ok { "ok" } else { "no" },
            if abort_ok { "ok" } else { "no" }
        ),
    );
    assert!(mean_ok && abort_ok);
}

#[test]
fn criterion_05_heisenberg_vs_ode() {
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    for g in [0.05, 1.0 / (2.0 * PI), 5.0] {
        let c_theta = 0.37;
        let step = 1e-3 * 1f64.min(1.0 / g);
        let exact = completion_map(g, c_theta).unwrap();
        let oracle = ode_oracle(1.0 / g, g, c_theta, step).unwrap();
        worst = worst.max(exact.max_difference(&oracle));
    }
    let secs = start.elapsed().as_secs_f64();
    let pass = worst < 1e-8 && secs < 5.0;
    verdict(
        5,
        pass,
        &format!("max coefficient error = {worst:.3e} (< 1e-8), {secs:.2} s (< 5 s)"),
    );
    assert!(pass);
}

#[test]
fn criterion_06_semiprotected_exactness() {
    let osc = OscillatorConfig::new(0.8, -0.3, 1.1, 1.0).unwrap();
    let c_theta = osc.c_theta();
    let mut pass = true;
    let mut worst_var: f64 = 0.0;
    for n in 1..=10u32 {
        let g = 1.0 / (2.0 * PI * n as f64);
        let map = periodic_map(n, g, c_theta);
        pass &= map.system_block() == Matrix2::identity();
        pass &= map.shift[0] == 0.0 && map.shift[1] == 0.0;
        pass &= map.linear[(0, 3)] == 0.0 && map.linear[(1, 3)] == 0.0;
        let regime = RegimeCase::Semiprotected(n);
        let limit = regime.limit_map(g, c_theta).unwrap();
        pass &= limit.system_block() == Matrix2::identity();
        let prep = PointerPrep::sharp_in_q_minus_gp(g, 1e-4).unwrap();
        let reading = pointer_reading_distribution(&osc, regime, &prep).unwrap();
        pass &= reading.mean == c_theta;
        worst_var = worst_var.max((reading.variance / 1e-4 - 1.0).abs());
    }
    pass &= worst_var < 1e-9;
    verdict(
        6,
        pass,
        &format!("identity system block and zero shift for n=1..10; max relative reading-variance error {worst_var:.3e}"),
    );
    assert!(pass);
}

#[test]
fn criterion_07_tomography_round_trip() {
    let start = Instant::now();
    let mut rng = master_rng(2024);
    let mut worst_channel: f64 = 0.0;
    let mut worst_fidelity: f64 = 1.0;
    let mut identified = true;
    for trial in 0..50 {
        let d = 2 + trial % 2;
        let (truth, channel) = random_dephasing(d, &mut rng);
        let preps = PreparationSet::standard(d).unwrap();
        let meas = MeasurementSet::standard(d).unwrap();
        let table = simulate_statistics(&channel, &preps, &meas, Shots::Exact, &mut rng).unwrap();
        let estimate = linear_inversion(&table, &preps, &meas).unwrap();
        worst_channel =
            worst_channel.max((estimate.channel.superoperator() - channel.superoperator()).norm());
        let recovered = fixed_point_basis(&estimate.channel).unwrap();
        worst_fidelity = basis_fidelities(&truth, &recovered)
            .into_iter()
            .fold(worst_fidelity, f64::min);
        if trial < 4 {
            let j = trial % d;
            let target = recovered.get(j).clone();
            identified &=
                (0..10_000).all(|_| identify_state(&recovered, &target, &mut rng).unwrap() == j);
        }
    }
    let mut worst_h: f64 = 0.0;
    for trial in 0..50 {
        let d = 2 + trial % 3;
        let t = 0.5;
        let bound = 0.95 * PI / t;
        let u = protective_core::qcore::random_unitary(d, &mut rng);
        let energies: Vec<f64> = (0..d)
            .map(|_| bound * (2.0 * rand::Rng::random::<f64>(&mut rng) - 1.0))
            .collect();
        let diag = CMatrix::from_fn(d, d, |i, j| {
            if i == j {
                c64(energies[i], 0.0)
            } else {
                c64(0.0, 0.0)
            }
        });
        let h = &u * diag * u.adjoint();
        let est = recover_hamiltonian(&[(t, evolution_operator(&h, t).unwrap())], bound).unwrap();
        worst_h = worst_h.max((est.hamiltonian - h).norm());
    }
    let secs = start.elapsed().as_secs_f64();
    let pass = worst_channel < 1e-10
        && worst_fidelity > 1.0 - 1e-8
        && identified
        && worst_h < 1e-8
        && secs < 30.0;
    verdict(
        7,
        pass,
        &format!(
            "channel err {worst_channel:.3e} (< 1e-10), min fidelity 1-{:.3e}, identify {}, H err {worst_h:.3e} (< 1e-8), {secs:.2} s (< 30 s)",
            1.0 - worst_fidelity,
            if identified { "always correct" } else { "WRONG" }
        ),
    );
    assert!(pass);
}

#[test]
fn criterion_08_toy_bit_statistics() {
    let start = Instant::now();
    let table_ok = expectation_table().iter().all(|row| {
        row.state.expectation(Axis::X) == row.x && row.state.expectation(Axis::Y) == row.y
    }) && [
        (0usize, 1.0, 0.0),
        (1, -1.0, 0.0),
        (2, 0.0, 1.0),
        (3, 0.0, -1.0),
    ]
    .iter()
    .all(|&(i, x, y)| expectation_table()[i].x == x && expectation_table()[i].y == y);

    let steps = 10_000;
    let runs = 1_000;
    let cfg = ToyRunConfig::new(steps, 1.0, Axis::X, Axis::Y).unwrap();
    let clt = summarize(&run_ensemble(&cfg, &prepare(Axis::X, Sign::Plus), runs, 808).unwrap());
    let mean_ok = clt.mean_final_q.abs() < 3.0 / ((steps * runs) as f64).sqrt();
    let var_ok = (clt.var_final_q * steps as f64 - 1.0).abs() < 0.1;

    let mut success_ok = true;
    let mut success_lines = Vec::new();
    for n in [10usize, 50] {
        let g = 1.0;
        let r = g / (2.0 * (n as f64).powi(3));
        let cfg = ToyRunConfig::new(n, g, Axis::X, Axis::Y)
            .unwrap()
            .with_backaction(r)
            .unwrap();
        let runs = 10_000;
        let s = summarize(
            &run_ensemble(&cfg, &prepare(Axis::X, Sign::Plus), runs, 909 + n as u64).unwrap(),
        );
        let p = success_probability(n, g, r).unwrap();
        // Floor of one count keeps the band meaningful when p is within 1/runs of 1.
        let se = (p * (1.0 - p) / runs as f64).sqrt().max(1.0 / runs as f64);
        success_ok &= (s.success_frequency - p).abs() <= 3.0 * se;
        success_lines.push(format!(
            "N={n}: freq {:.5} vs p_succ {p:.5}",
            s.success_frequency
        ));
    }
    let secs = start.elapsed().as_secs_f64();
    let pass = table_ok && mean_ok && var_ok && success_ok && secs < 60.0;
    verdict(
        8,
        pass,
        &format!(
            "table {}, mean {:.3e}, N·var {:.4}, {}, {secs:.2} s (< 60 s)",
            if table_ok { "exact" } else { "MISMATCH" },
            clt.mean_final_q,
            clt.var_final_q * steps as f64,
            success_lines.join(", ")
        ),
    );
    assert!(pass);
}

#[test]
fn criterion_09_gaussian_epistemic_agreement() {
    let c = |g: f64| OscillatorConfig::new(0.5, 0.25, 0.4, g).unwrap();
    let mut rng = master_rng(99);
    let sharp = PointerPrep::minimum_uncertainty(0.0, 0.0, 0.01).unwrap();
    let g_semi = 1.0 / (2.0 * PI);
    let cases = [
        (
            "protected",
            c(1e-3),
            sharp,
            Horizon::Completion,
            RegimeCase::Protected,
        ),
        (
            "semiprotected",
            c(g_semi),
            PointerPrep::sharp_in_q_minus_gp(g_semi, 1e-4).unwrap(),
            Horizon::Periods(1),
            RegimeCase::Semiprotected(1),
        ),
        (
            "von-neumann",
            c(1e4),
            sharp,
            Horizon::Completion,
            RegimeCase::VonNeumann,
        ),
    ];
    let mut pass = true;
    let mut lines = Vec::new();
    for (name, osc, pointer, horizon, regime) in cases {
        let config = EnsembleConfig {
            oscillator: osc,
            pointer,
            runs: 10_000,
            horizon,
        };
        let stats = ensemble_statistics(&config, &mut rng).unwrap();
        let limit = pointer_reading_distribution(&osc, regime, &pointer).unwrap();
        let ok = stats.agrees_with(&stats.predicted, 3.0) && stats.agrees_with(&limit, 3.0);
        pass &= ok;
        lines.push(format!(
            "{name}: mean {:.4} vs {:.4}, var {:.4e} vs {:.4e}",
            stats.mean_final_q, stats.predicted.mean, stats.var_final_q, stats.predicted.variance
        ));
    }
    let mc = overlap_monte_carlo((0.0, 0.0), (1.0, 0.0), 100_000, &mut rng);
    let exact = overlap((0.0, 0.0), (1.0, 0.0));
    let overlap_ok =
        (mc / (-0.25f64).exp() - 1.0).abs() < 0.02 && (exact - (-0.25f64).exp()).abs() < 1e-15;
    pass &= overlap_ok;
    verdict(
        9,
        pass,
        &format!(
            "{}; overlap MC {mc:.4} vs exp(-1/4) {:.4}",
            lines.join("; "),
            (-0.25f64).exp()
        ),
    );
    assert!(pass);
}

#[test]
fn criterion_10_disturbance_with_unchanged_distribution() {
    let osc = OscillatorConfig::new(0.5, -0.7, 0.9, 0.01).unwrap();
    let pointer = PointerPrep::minimum_uncertainty(0.0, 0.0, 0.01).unwrap();
    let report = disturbance_check(&osc, &pointer, 10_000, &mut master_rng(10)).unwrap();
    let pass = report.ks_q_p_value > 0.01
        && report.ks_p_p_value > 0.01
        && report.disturbed_fraction > 0.99;
    verdict(
        10,
        pass,
        &format!(
            "disturbed fraction {:.4}, KS p-values q' {:.3}, p' {:.3} at t = 2π·{}",
            report.disturbed_fraction, report.ks_q_p_value, report.ks_p_p_value, report.periods
        ),
    );
    assert!(pass);
}
