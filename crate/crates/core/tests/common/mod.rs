#![allow(dead_code)]

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;
use qlabel::sim::{Angle, Circuit, Gate};
use rand::Rng;

pub type CMat = DMatrix<Complex64>;

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn mat2(m: [[Complex64; 2]; 2]) -> CMat {
    CMat::from_fn(2, 2, |r, k| m[r][k])
}

pub fn pauli(axis: usize) -> CMat {
    match axis {
        0 => mat2([[c(1., 0.), c(0., 0.)], [c(0., 0.), c(1., 0.)]]),
        1 => mat2([[c(0., 0.), c(1., 0.)], [c(1., 0.), c(0., 0.)]]),
        2 => mat2([[c(0., 0.), c(0., -1.)], [c(0., 1.), c(0., 0.)]]),
        _ => mat2([[c(1., 0.), c(0., 0.)], [c(0., 0.), c(-1., 0.)]]),
    }
}

/// `exp(-i θ P / 2) = cos(θ/2) I − i sin(θ/2) P`.
pub fn rotation(axis: usize, theta: f64) -> CMat {
    let (s, co) = (theta / 2.0).sin_cos();
    pauli(0) * c(co, 0.0) - pauli(axis) * c(0.0, s)
}

fn h() -> CMat {
    let k = std::f64::consts::FRAC_1_SQRT_2;
    mat2([[c(k, 0.), c(k, 0.)], [c(k, 0.), c(-k, 0.)]])
}

fn s_gate(sign: f64) -> CMat {
    mat2([[c(1., 0.), c(0., 0.)], [c(0., 0.), c(0., sign)]])
}

fn kron(a: &CMat, b: &CMat) -> CMat {
    a.kronecker(b)
}

/// `m` on qubit `q` of `n`; qubit 0 is the rightmost tensor factor.
pub fn embed(m: &CMat, q: usize, n: usize) -> CMat {
    let id = pauli(0);
    let mut out = CMat::identity(1, 1);
    for k in (0..n).rev() {
        out = kron(&out, if k == q { m } else { &id });
    }
    out
}

fn projector(bit: usize) -> CMat {
    let mut p = CMat::zeros(2, 2);
    p[(bit, bit)] = c(1.0, 0.0);
    p
}

/// `|0⟩⟨0|_c ⊗ I + |1⟩⟨1|_c ⊗ m_t`.
pub fn controlled(m: &CMat, control: usize, target: usize, n: usize) -> CMat {
    let p0 = embed(&projector(0), control, n);
    let p1 = embed(&projector(1), control, n);
    p0 + p1 * embed(m, target, n)
}

fn angle(a: Angle, params: &[f64]) -> f64 {
    match a {
        Angle::Param(i) => params[i],
        Angle::Fixed(t) => t,
    }
}

/// Dense unitaries of the primitives a gate is made of, in application order,
/// each tagged with the qubits it touches.
pub fn primitives(g: &Gate, params: &[f64], n: usize) -> Vec<(CMat, Vec<usize>)> {
    let one = |m: CMat, q: usize| (embed(&m, q, n), vec![q]);
    match *g {
        Gate::X(q) => vec![one(pauli(1), q)],
        Gate::Y(q) => vec![one(pauli(2), q)],
        Gate::Z(q) => vec![one(pauli(3), q)],
        Gate::H(q) => vec![one(h(), q)],
        Gate::S(q) => vec![one(s_gate(1.0), q)],
        Gate::Sdg(q) => vec![one(s_gate(-1.0), q)],
        Gate::Rx(q, a) => vec![one(rotation(1, angle(a, params)), q)],
        Gate::Ry(q, a) => vec![one(rotation(2, angle(a, params)), q)],
        Gate::Rz(q, a) => vec![one(rotation(3, angle(a, params)), q)],
        Gate::Cnot { control, target } => vec![(controlled(&pauli(1), control, target, n), vec![control, target])],
        Gate::Crz {
            control,
            target,
            angle: a,
        } => vec![(
            controlled(&rotation(3, angle(a, params)), control, target, n),
            vec![control, target],
        )],
        Gate::Block {
            control,
            target,
            angles,
        } => vec![
            one(rotation(2, angle(angles[0], params)), control),
            one(rotation(2, angle(angles[1], params)), target),
            (controlled(&pauli(1), control, target, n), vec![control, target]),
            one(rotation(2, angle(angles[2], params)), target),
        ],
    }
}

/// Product of the dense gate unitaries.
pub fn dense_unitary(circuit: &Circuit, params: &[f64]) -> CMat {
    let n = circuit.n_qubits();
    let mut u = CMat::identity(1 << n, 1 << n);
    for g in circuit.ops() {
        for (m, _) in primitives(g, params, n) {
            u = m * u;
        }
    }
    u
}

/// Random circuit over every gate kind with parameters in `[0, 2π)`.
pub fn random_circuit<R: Rng>(rng: &mut R, n: usize, len: usize) -> (Circuit, Vec<f64>) {
    let mut circuit = Circuit::new(n);
    for _ in 0..len {
        let q = rng.random_range(0..n);
        let kind = if n == 1 {
            rng.random_range(0..9)
        } else {
            rng.random_range(0..12)
        };
        let other = |rng: &mut R| {
            let mut t = rng.random_range(0..n - 1);
            if t >= q {
                t += 1;
            }
            t
        };
        let gate = match kind {
            0 => Gate::X(q),
            1 => Gate::Y(q),
            2 => Gate::Z(q),
            3 => Gate::H(q),
            4 => Gate::S(q),
            5 => Gate::Sdg(q),
            6 => Gate::Rx(q, circuit.param()),
            7 => Gate::Ry(q, circuit.param()),
            8 => Gate::Rz(q, circuit.param()),
            9 => Gate::Cnot {
                control: q,
                target: other(rng),
            },
            10 => {
                let target = other(rng);
                Gate::Crz {
                    control: q,
                    target,
                    angle: circuit.param(),
                }
            }
            _ => {
                let target = other(rng);
                let angles = [circuit.param(), circuit.param(), circuit.param()];
                Gate::Block {
                    control: q,
                    target,
                    angles,
                }
            }
        };
        circuit.push(gate).unwrap();
    }
    let params = (0..circuit.n_params())
        .map(|_| rng.random_range(0.0..2.0 * PI))
        .collect();
    (circuit, params)
}

pub fn ket(amps: &[Complex64]) -> CMat {
    CMat::from_column_slice(amps.len(), 1, amps)
}

/// Reduced 2×2 density matrix of qubit `q` from a full density matrix.
pub fn reduce(rho: &CMat, q: usize) -> CMat {
    let mut out = CMat::zeros(2, 2);
    let dim = rho.nrows();
    for a in 0..2 {
        for b in 0..2 {
            let mut sum = c(0.0, 0.0);
            for rest in (0..dim).filter(|i| i & (1 << q) == 0) {
                sum += rho[(rest | (a << q), rest | (b << q))];
            }
            out[(a, b)] = sum;
        }
    }
    out
}

/// `(Tr σx ρ, Tr σy ρ, Tr σz ρ)`.
pub fn bloch_of(rho1: &CMat) -> [f64; 3] {
    [1, 2, 3].map(|a| (pauli(a) * rho1).trace().re)
}

/// All `4^k` Pauli strings on the listed qubits.
pub fn pauli_strings(qubits: &[usize], n: usize) -> Vec<CMat> {
    let mut out = vec![CMat::identity(1 << n, 1 << n)];
    for &q in qubits {
        out = out
            .into_iter()
            .flat_map(|m| (0..4).map(move |a| embed(&pauli(a), q, n) * &m))
            .collect();
    }
    out
}

/// Depolarizing channel as the Pauli twirl `(1−p)ρ + p · avg_P PρP`.
pub fn depolarize(rho: &CMat, qubits: &[usize], p: f64, n: usize) -> CMat {
    let strings = pauli_strings(qubits, n);
    let k = strings.len() as f64;
    let mut twirl = CMat::zeros(rho.nrows(), rho.ncols());
    for s in &strings {
        twirl += s * rho * s.adjoint();
    }
    rho * c(1.0 - p, 0.0) + twirl * c(p / k, 0.0)
}
