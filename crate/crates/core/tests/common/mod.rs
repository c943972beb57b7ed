//! Shared generators for the integration tests. Everything is seeded, so
//! failures reproduce exactly.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use qswap_core::{Circuit, Dimension, GateId, Instruction, StateLabel, StateVector};

/// A random normalized state on the full `d^n`-dimensional space.
pub fn random_state(dim: Dimension, n_wires: usize, seed: u64) -> StateVector {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let total = dim.get().pow(n_wires as u32);
    let mut amps: Vec<Complex64> = (0..total)
        .map(|_| Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5))
        .collect();
    let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    for a in &mut amps {
        *a /= norm;
    }
    StateVector::from_amplitudes(dim, n_wires, amps).unwrap()
}

const ONE_WIRE_QUBIT: &[GateId] = &[
    GateId::X,
    GateId::Xd,
    GateId::Z,
    GateId::Zd,
    GateId::F,
    GateId::Fd,
    GateId::H,
];
const ONE_WIRE: &[GateId] = &[GateId::X, GateId::Xd, GateId::Z, GateId::Zd, GateId::F, GateId::Fd];
const TWO_WIRE: &[GateId] = &[GateId::Cx, GateId::Cxd, GateId::Cz, GateId::Czd];
const ROOTS: &[GateId] = &[GateId::X, GateId::Xd, GateId::Z, GateId::Zd];

/// A structurally valid random circuit: d in 2..=4, up to 3 wires, up to
/// 8 instructions, at most 3 measurements, classical controls only on
/// registers already written. Labels are sprinkled on some wires.
pub fn random_circuit_with(rng: &mut ChaCha8Rng, allow_measurements: bool) -> Circuit {
    let d = rng.gen_range(2..=4usize);
    let dim = Dimension::new(d).unwrap();
    let n = rng.gen_range(1..=3usize);
    let mut c = Circuit::new(dim, n).unwrap();
    let len = rng.gen_range(0..=8usize);
    let mut written: Vec<String> = Vec::new();
    for _ in 0..len {
        let roll = rng.gen_range(0..10u32);
        if allow_measurements && roll >= 8 && written.len() < 3 {
            let reg = format!("r{}", written.len());
            c.push(Instruction::measure(rng.gen_range(0..n), &reg)).unwrap();
            written.push(reg);
        } else if allow_measurements && roll >= 6 && !written.is_empty() {
            let reg = written[rng.gen_range(0..written.len())].clone();
            let root = ROOTS[rng.gen_range(0..ROOTS.len())];
            c.push(Instruction::controlled(&reg, root, rng.gen_range(0..n)))
                .unwrap();
        } else if n >= 2 && rng.gen_bool(0.4) {
            let gate = TWO_WIRE[rng.gen_range(0..TWO_WIRE.len())];
            let a = rng.gen_range(0..n);
            let mut b = rng.gen_range(0..n - 1);
            if b >= a {
                b += 1;
            }
            c.push(Instruction::gate(gate, &[a, b])).unwrap();
        } else {
            let pool = if d == 2 { ONE_WIRE_QUBIT } else { ONE_WIRE };
            let gate = pool[rng.gen_range(0..pool.len())];
            c.push(Instruction::gate(gate, &[rng.gen_range(0..n)])).unwrap();
        }
    }
    for wire in 0..n {
        if rng.gen_bool(0.3) {
            c.set_input(wire, random_label(rng, d)).unwrap();
        }
        if rng.gen_bool(0.3) {
            c.set_output(wire, random_label(rng, d)).unwrap();
        }
    }
    c
}

fn random_label(rng: &mut ChaCha8Rng, d: usize) -> StateLabel {
    match rng.gen_range(0..3u32) {
        0 => StateLabel::Basis(rng.gen_range(0..d)),
        1 => StateLabel::Chi,
        _ => StateLabel::Psi,
    }
}
