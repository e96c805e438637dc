mod common;

use std::f64::consts::PI;

use common::*;
use proptest::prelude::*;
use qlabel::ansatz::{build_qcnn, full_circuit, EncodingSpec};
use qlabel::readout::Readout;
use qlabel::sim::{NoiseSpec, StateVector};
use qlabel::tomography::{readout_bloch, reconstruct_density, BlochVector, ReadoutMode};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn exact_readout_matches_reduced_density() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for _ in 0..300 {
        let n = rng.random_range(1..=4);
        let (circuit, params) = {
            let len = rng.random_range(1..20);
            random_circuit(&mut rng, n, len)
        };
        let q = rng.random_range(0..n);
        let b = readout_bloch(&circuit, &params, &StateVector::zero(n), q, &ReadoutMode::Exact).unwrap();
        let psi = dense_unitary(&circuit, &params).column(0).into_owned();
        let want = bloch_of(&reduce(&(&psi * psi.adjoint()), q));
        for (g, w) in b.to_array().iter().zip(want) {
            assert!((g - w).abs() < 1e-10);
        }
    }
}

#[test]
fn noisy_readout_runs_noisy_measurement_units() {
    // Under noise every basis change is itself followed by depolarization, so
    // the x and y components shrink by extra factors of (1 - p1) relative to
    // the state just before measurement.
    let noise = NoiseSpec::new(0.02, 0.05, 0.03).unwrap();
    let mode = ReadoutMode::Noisy {
        noise,
        shots: None,
        seed: 0,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(22);
    for _ in 0..30 {
        let n = rng.random_range(1..=3);
        let (circuit, params) = random_circuit(&mut rng, n, 8);
        let q = rng.random_range(0..n);
        let got = readout_bloch(&circuit, &params, &StateVector::zero(n), q, &mode).unwrap();

        let mut rho = CMat::zeros(1 << n, 1 << n);
        rho[(0, 0)] = c(1.0, 0.0);
        for g in circuit.ops() {
            for (u, qubits) in primitives(g, &params, n) {
                rho = &u * rho * u.adjoint();
                let p = if qubits.len() == 1 {
                    noise.p_depol_1q
                } else {
                    noise.p_depol_2q
                };
                rho = depolarize(&rho, &qubits, p, n);
            }
        }
        let [x, y, z] = bloch_of(&reduce(&rho, q));
        let flip = 1.0 - 2.0 * noise.p_meas_flip;
        let shrink = 1.0 - noise.p_depol_1q;
        let want = [x * shrink * flip, y * shrink * shrink * flip, z * flip];
        for (g, w) in got.to_array().iter().zip(want) {
            assert!((g - w).abs() < 1e-12, "{got} vs {want:?}");
        }
    }
}

#[test]
fn batched_readout_equals_full_circuit_readout() {
    let ansatz = build_qcnn(4).unwrap();
    let enc = EncodingSpec::default();
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    let params: Vec<f64> = (0..ansatz.n_params())
        .map(|_| rng.random_range(0.0..2.0 * PI))
        .collect();
    let rows: Vec<Vec<f64>> = (0..20).map(|_| (0..4).map(|_| rng.random::<f64>()).collect()).collect();
    let readout = Readout::new(&ansatz, &enc, ReadoutMode::Exact);
    let batch = readout.bloch_batch(&params, &readout.prepare(&rows).unwrap()).unwrap();
    for (row, b) in rows.iter().zip(batch) {
        let circuit = full_circuit(row, &enc, &ansatz).unwrap();
        let direct = readout_bloch(&circuit, &params, &StateVector::zero(4), 0, &ReadoutMode::Exact).unwrap();
        assert_eq!(b, direct);
    }
}

#[test]
fn ansatz_parameter_counts_and_no_dead_parameters() {
    let counts: Vec<usize> = [2, 4, 8].iter().map(|&n| build_qcnn(n).unwrap().n_params()).collect();
    assert_eq!(counts, vec![7, 33, 85]);

    let ansatz = build_qcnn(4).unwrap();
    let enc = EncodingSpec::default();
    let readout = Readout::new(&ansatz, &enc, ReadoutMode::Exact);
    let mut rng = ChaCha8Rng::seed_from_u64(24);
    let rows: Vec<Vec<f64>> = (0..6).map(|_| (0..4).map(|_| rng.random::<f64>()).collect()).collect();
    let inputs = readout.prepare(&rows).unwrap();
    let params: Vec<f64> = (0..ansatz.n_params())
        .map(|_| rng.random_range(0.0..2.0 * PI))
        .collect();
    let base = readout.bloch_batch(&params, &inputs).unwrap();
    for k in 0..params.len() {
        let mut p = params.clone();
        p[k] += 0.3;
        let moved = readout.bloch_batch(&p, &inputs).unwrap();
        let change: f64 = base
            .iter()
            .zip(&moved)
            .map(|(a, b)| {
                a.to_array()
                    .iter()
                    .zip(b.to_array())
                    .map(|(x, y)| (x - y).abs())
                    .sum::<f64>()
            })
            .sum();
        assert!(change > 1e-6, "parameter {k} has no effect on the readout");
    }
}

#[test]
fn readout_covers_all_three_axes() {
    // Over random parameters and inputs each Bloch component takes both signs
    // and a nonzero spread, so labels can use the whole sphere.
    let ansatz = build_qcnn(4).unwrap();
    let enc = EncodingSpec::default();
    let readout = Readout::new(&ansatz, &enc, ReadoutMode::Exact);
    let mut rng = ChaCha8Rng::seed_from_u64(25);
    let mut samples = Vec::new();
    for _ in 0..200 {
        let params: Vec<f64> = (0..ansatz.n_params())
            .map(|_| rng.random_range(0.0..2.0 * PI))
            .collect();
        let row: Vec<f64> = (0..4).map(|_| rng.random::<f64>()).collect();
        samples.push(
            readout
                .bloch(&params, &readout.prepare_one(&row, 0).unwrap())
                .unwrap()
                .to_array(),
        );
    }
    for axis in 0..3 {
        let v: Vec<f64> = samples.iter().map(|s| s[axis]).collect();
        let mean = v.iter().sum::<f64>() / v.len() as f64;
        let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / v.len() as f64;
        assert!(var > 0.02, "axis {axis} variance {var}");
        assert!(v.iter().any(|&x| x > 0.2) && v.iter().any(|&x| x < -0.2));
    }
}

proptest! {
    #[test]
    fn reconstruction_reproduces_expectations(theta in 0.0..PI, phi in 0.0..2.0 * PI, len in 0.0..=1.0f64) {
        let b = BlochVector::new(len * theta.sin() * phi.cos(), len * theta.sin() * phi.sin(), len * theta.cos());
        let rho = reconstruct_density(b);
        let m = CMat::from_fn(2, 2, |r, k| rho.entry(r, k));
        let back = bloch_of(&m);
        for (x, y) in back.iter().zip(b.to_array()) {
            prop_assert!((x - y).abs() < 1e-14);
        }
        prop_assert!((m.trace() - c(1.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn readout_norm_at_most_one(seed in any::<u64>(), n in 1usize..=4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (circuit, params) = random_circuit(&mut rng, n, 12);
        let q = rng.random_range(0..n);
        let b = readout_bloch(&circuit, &params, &StateVector::zero(n), q, &ReadoutMode::Exact).unwrap();
        prop_assert!(b.norm() <= 1.0 + 1e-12);
    }
}
