//! Consistency between modules that model the same physics independently.

use protective_core::epigauss::{evolve, evolve_with_map, sample_system, PhasePoint};
use protective_core::hamgauss::{ode_oracle, OscillatorConfig};
use protective_core::qcore::{
    c64, dephasing_channel, CMatrix, DensityOperator, Observable, OrthonormalBasis,
};
use protective_core::seeding::master_rng;
use protective_core::stats::mean_variance;
use protective_core::tomography::{
    displaced_oscillator_hamiltonian, evolution_operator, fixed_point_basis, ground_state,
    linear_inversion, recover_hamiltonian, simulate_statistics, MeasurementSet, PreparationSet,
    Shots,
};
use protective_core::toybit::{prepare, run_ensemble, summarize, Axis, Sign, ToyRunConfig};
use protective_core::zeno::{PovmDensity, ZenoConfig};

fn quadratures(dim: usize) -> (CMatrix, CMatrix) {
    let mut q = CMatrix::zeros(dim, dim);
    let mut p = CMatrix::zeros(dim, dim);
    for n in 0..dim - 1 {
        let a = ((n + 1) as f64 / 2.0).sqrt();
        q[(n, n + 1)] = c64(a, 0.0);
        q[(n + 1, n)] = c64(a, 0.0);
        p[(n, n + 1)] = c64(0.0, -a);
        p[(n + 1, n)] = c64(0.0, a);
    }
    (q, p)
}

#[test]
fn tomography_recovers_the_zeno_protection_basis() {
    let basis = OrthonormalBasis::qubit_rotated(0.6);
    let channel = dephasing_channel(&basis);
    let preps = PreparationSet::standard(2).unwrap();
    let meas = MeasurementSet::standard(2).unwrap();
    let table =
        simulate_statistics(&channel, &preps, &meas, Shots::Exact, &mut master_rng(1)).unwrap();
    let estimate = linear_inversion(&table, &preps, &meas).unwrap();
    let recovered = fixed_point_basis(&estimate.channel).unwrap();

    let original = ZenoConfig::new(5, 1.0, 0.1, basis.clone(), Observable::pauli_z()).unwrap();
    let mut rebuilt_overlaps =
        ZenoConfig::new(5, 1.0, 0.1, recovered.clone(), Observable::pauli_z())
            .unwrap()
            .overlaps()
            .0;
    let mut overlaps = original.overlaps().0;
    overlaps.sort_by(f64::total_cmp);
    rebuilt_overlaps.sort_by(f64::total_cmp);
    for (a, b) in overlaps.iter().zip(&rebuilt_overlaps) {
        assert!((a - b).abs() < 1e-10);
    }

    // Both POVMs assign the same reading density to every state.
    let rho = DensityOperator::pure(basis.get(0));
    let a = PovmDensity::new(&original).unwrap();
    let b =
        PovmDensity::new(&ZenoConfig::new(5, 1.0, 0.1, recovered, Observable::pauli_z()).unwrap())
            .unwrap();
    for q in [-0.8, -0.2, 0.0, 0.35, 0.9] {
        let (x, y) = (
            a.outcome_pdf(&rho, q).unwrap(),
            b.outcome_pdf(&rho, q).unwrap(),
        );
        assert!((x - y).abs() < 1e-9 * (1.0 + x.abs()), "Q={q}: {x} vs {y}");
    }
}

#[test]
fn oscillator_ground_state_matches_epistemic_distribution() {
    let (c_q, c_p) = (0.6, -0.4);
    let dim = 40;
    let h = displaced_oscillator_hamiltonian(dim, c_q, c_p);
    let ground = ground_state(&h).unwrap();
    let (q, p) = quadratures(dim);
    let v = ground.amplitudes();
    let expect = |m: &CMatrix| (v.adjoint() * m * v)[(0, 0)].re;
    let (mq, mp) = (expect(&q), expect(&p));
    let vq = expect(&(&q * &q)) - mq * mq;
    let vp = expect(&(&p * &p)) - mp * mp;

    let mut rng = master_rng(3);
    let draws: Vec<(f64, f64)> = (0..200_000)
        .map(|_| sample_system(c_q, c_p, &mut rng))
        .collect();
    let (sq, svq) = mean_variance(&draws.iter().map(|d| d.0).collect::<Vec<_>>());
    let (sp, svp) = mean_variance(&draws.iter().map(|d| d.1).collect::<Vec<_>>());

    assert!(
        (mq - c_q).abs() < 1e-10 && (mp - c_p).abs() < 1e-10,
        "{mq} {mp}"
    );
    assert!(
        (vq - 0.5).abs() < 1e-10 && (vp - 0.5).abs() < 1e-10,
        "{vq} {vp}"
    );
    let se = (0.5f64 / 200_000.0).sqrt();
    assert!((sq - mq).abs() < 4.0 * se && (sp - mp).abs() < 4.0 * se);
    assert!((svq - vq).abs() < 0.01 && (svp - vp).abs() < 0.01);
}

#[test]
fn protected_hamiltonian_is_recoverable_from_its_evolution() {
    let h = displaced_oscillator_hamiltonian(6, 0.3, 0.2);
    let t = 0.3;
    let bound = 10.0;
    let est = recover_hamiltonian(&[(t, evolution_operator(&h, t).unwrap())], bound).unwrap();
    assert!((&est.hamiltonian - &h).norm() < 1e-8);
    let fidelity = ground_state(&est.hamiltonian)
        .unwrap()
        .inner(&ground_state(&h).unwrap())
        .norm_sqr();
    assert!((fidelity - 1.0).abs() < 1e-12);
}

#[test]
fn phase_space_flow_agrees_with_ode_in_original_frame() {
    let osc = OscillatorConfig::new(0.5, -0.3, 0.8, 0.25).unwrap();
    let start = PhasePoint::new(0.2, -0.7, 0.05, 0.4).unwrap();
    let t = 2.7;
    let ode = ode_oracle(t, osc.g, osc.c_theta(), 1e-3).unwrap();
    let a = evolve(&start, t, &osc);
    let b = evolve_with_map(&start, &ode, &osc);
    for (x, y) in [
        (a.q_sys, b.q_sys),
        (a.p_sys, b.p_sys),
        (a.pointer_q, b.pointer_q),
        (a.pointer_p, b.pointer_p),
    ] {
        assert!((x - y).abs() < 1e-9, "{x} vs {y}");
    }
}

#[test]
fn toy_protection_of_the_measured_axis_reads_its_sign() {
    for (sign, expected) in [(Sign::Plus, 1.0), (Sign::Minus, -1.0)] {
        let cfg = ToyRunConfig::new(25, 1.0, Axis::X, Axis::X).unwrap();
        let s = summarize(&run_ensemble(&cfg, &prepare(Axis::X, sign), 200, 17).unwrap());
        assert_eq!(s.mean_final_q, expected);
        assert_eq!(s.var_final_q, 0.0);
        assert_eq!(s.successes, 200);
    }
}
