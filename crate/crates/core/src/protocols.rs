//! Named circuit builders and end-to-end teleportation execution.
//!
//! All three-wire circuits use the same wire roles: wire 0 is the source
//! (Alice's data wire, input ψ), wire 1 is the ancilla (Alice's second
//! wire), wire 2 is the destination (Bob's wire). Measurement registers are
//! named `a_m` (ancilla outcome) and `a_t` (source outcome).

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::gates::GateId;
use crate::sim::{run_circuit, ForcedOutcomes, OutcomeRecord, OutcomeSource, SeededSampler};
use crate::state::{state_overlap, StateVector};
use crate::types::{Circuit, Dimension, Instruction, StateLabel};

/// Register receiving the ancilla-wire measurement outcome.
pub const REG_ANCILLA: &str = "a_m";
/// Register receiving the source-wire measurement outcome.
pub const REG_SOURCE: &str = "a_t";

fn gate_list(dim: Dimension, n_wires: usize, gates: &[(GateId, &[usize])]) -> Result<Circuit> {
    let mut c = Circuit::new(dim, n_wires)?;
    for (gate, wires) in gates {
        c.push(Instruction::gate(*gate, wires))?;
    }
    Ok(c)
}

/// Full swap of two wires: |x,y⟩ → |y,x⟩ for all d² basis states.
///
/// At d = 2 the classic three-coupling ladder suffices. For d > 2 no
/// product of couplings from the controlled-shift family alone can swap:
/// each coupling acts on the digit pair as an integer matrix of
/// determinant +1 (mod d), while the swap has determinant −1, and
/// −1 ≢ +1 (mod d) once d > 2. The three couplings below give
/// |x,y⟩ → |−y mod d, x⟩; two Fourier gates on wire 0 then apply the
/// digit-negation map z → −z mod d, completing the swap. The builder's
/// output is certified against the full basis permutation in tests.
pub fn build_swap(dim: Dimension) -> Result<Circuit> {
    let d = dim.get();
    if d == 2 {
        gate_list(
            dim,
            2,
            &[
                (GateId::Cx, &[0, 1]),
                (GateId::Cx, &[1, 0]),
                (GateId::Cx, &[0, 1]),
            ],
        )
    } else {
        gate_list(
            dim,
            2,
            &[
                (GateId::Cx, &[0, 1]),
                (GateId::Cxd, &[1, 0]),
                (GateId::Cx, &[0, 1]),
                (GateId::F, &[0]),
                (GateId::F, &[0]),
            ],
        )
    }
}

/// State transfer |x⟩|0⟩ → |0⟩|x⟩: the swap with its first coupling
/// removed, valid when the destination wire starts in |0⟩.
pub fn build_half_swap(dim: Dimension) -> Result<Circuit> {
    let d = dim.get();
    let gates: &[(GateId, &[usize])] = if d == 2 {
        &[(GateId::Cx, &[0, 1]), (GateId::Cx, &[1, 0])]
    } else {
        &[(GateId::Cx, &[0, 1]), (GateId::Cxd, &[1, 0])]
    };
    let mut c = gate_list(dim, 2, gates)?;
    c.set_input(0, StateLabel::Psi)?;
    c.set_input(1, StateLabel::Basis(0))?;
    c.set_output(0, StateLabel::Basis(0))?;
    c.set_output(1, StateLabel::Psi)?;
    Ok(c)
}

/// Maximal-entanglement preparation on two wires starting from |0,0⟩,
/// together with the state it produces: (1/√d) Σ_z |z,z⟩.
pub fn build_epr(dim: Dimension) -> Result<(Circuit, StateVector)> {
    let d = dim.get();
    let first = if d == 2 { GateId::H } else { GateId::F };
    let mut c = gate_list(dim, 2, &[(first, &[0]), (GateId::Cx, &[0, 1])])?;
    c.set_input(0, StateLabel::Basis(0))?;
    c.set_input(1, StateLabel::Basis(0))?;
    let amp = Complex64::new(1.0 / (d as f64).sqrt(), 0.0);
    let mut amps = vec![Complex64::ZERO; d * d];
    for z in 0..d {
        amps[z * d + z] = amp;
    }
    let expected = StateVector::from_amplitudes(dim, 2, amps)?;
    Ok((c, expected))
}

/// The measurement-free teleportation circuit: on input ψ⊗|0⟩⊗|0⟩ it
/// produces χ⊗χ⊗ψ, moving the source state to the destination wire and
/// leaving both of Alice's wires in the uniform superposition χ.
pub fn build_bbc(dim: Dimension) -> Result<Circuit> {
    let d = dim.get();
    let gates: &[(GateId, &[usize])] = if d == 2 {
        &[
            (GateId::H, &[1]),
            (GateId::Cx, &[1, 2]),
            (GateId::Cx, &[0, 1]),
            (GateId::H, &[0]),
            (GateId::Cx, &[1, 2]),
            (GateId::Cz, &[0, 2]),
        ]
    } else {
        &[
            (GateId::F, &[1]),
            (GateId::Cx, &[1, 2]),
            (GateId::Cxd, &[0, 1]),
            (GateId::Fd, &[0]),
            (GateId::Cxd, &[1, 2]),
            (GateId::Czd, &[0, 2]),
        ]
    };
    let mut c = gate_list(dim, 3, gates)?;
    c.set_input(0, StateLabel::Psi)?;
    c.set_input(1, StateLabel::Basis(0))?;
    c.set_input(2, StateLabel::Basis(0))?;
    c.set_output(0, StateLabel::Chi)?;
    c.set_output(1, StateLabel::Chi)?;
    c.set_output(2, StateLabel::Psi)?;
    Ok(c)
}

/// The teleportation protocol: entangle ancilla and destination, rotate
/// Alice's side, measure both of Alice's wires, then repair Bob's wire
/// with outcome-controlled shift and phase corrections.
pub fn build_teleport(dim: Dimension) -> Result<Circuit> {
    let d = dim.get();
    let (rot1, coupling, rot2, shift, phase) = if d == 2 {
        (GateId::H, GateId::Cx, GateId::H, GateId::X, GateId::Z)
    } else {
        (GateId::F, GateId::Cxd, GateId::Fd, GateId::Xd, GateId::Zd)
    };
    let mut c = Circuit::new(dim, 3)?;
    c.push(Instruction::gate(rot1, &[1]))?;
    c.push(Instruction::gate(GateId::Cx, &[1, 2]))?;
    c.push(Instruction::gate(coupling, &[0, 1]))?;
    c.push(Instruction::gate(rot2, &[0]))?;
    c.push(Instruction::measure(1, REG_ANCILLA))?;
    c.push(Instruction::measure(0, REG_SOURCE))?;
    c.push(Instruction::controlled(REG_ANCILLA, shift, 2))?;
    c.push(Instruction::controlled(REG_SOURCE, phase, 2))?;
    c.set_input(0, StateLabel::Psi)?;
    c.set_input(1, StateLabel::Basis(0))?;
    c.set_input(2, StateLabel::Basis(0))?;
    c.set_output(2, StateLabel::Psi)?;
    Ok(c)
}

/// One teleportation run: the branch taken, Bob's final state, and its
/// fidelity against the input.
#[derive(Debug, Clone)]
pub struct TeleportOutcome {
    pub input: StateVector,
    pub record: OutcomeRecord,
    pub bob_state: StateVector,
    pub fidelity: f64,
}

fn run_teleport(
    dim: Dimension,
    psi: &StateVector,
    source: &mut dyn OutcomeSource,
) -> Result<TeleportOutcome> {
    if psi.dim() != dim || psi.n_wires() != 1 {
        return Err(Error::ShapeMismatch(format!(
            "teleport input must be one wire at d = {}, got {} wire(s) at d = {}",
            dim.get(),
            psi.n_wires(),
            psi.d()
        )));
    }
    let d = dim.get();
    let circuit = build_teleport(dim)?;
    let zero = StateVector::basis(dim, 1, 0)?;
    let input = psi.tensor(&zero)?.tensor(&zero)?;
    let (final_state, record) = run_circuit(&circuit, &input, source)?;
    let a_t = record.value_of(REG_SOURCE).ok_or_else(|| {
        Error::RegisterUnset(REG_SOURCE.to_string())
    })?;
    let a_m = record.value_of(REG_ANCILLA).ok_or_else(|| {
        Error::RegisterUnset(REG_ANCILLA.to_string())
    })?;
    // Wires 0 and 1 are in |a_t⟩|a_m⟩ after the measurements, so Bob's
    // state reads off the remaining axis.
    let base = (a_t * d + a_m) * d;
    let bob_amps: Vec<Complex64> = (0..d)
        .map(|k| final_state.amplitude(base + k))
        .collect();
    let bob_state = StateVector::from_amplitudes(dim, 1, bob_amps)?;
    let fidelity = state_overlap(psi, &bob_state)?.norm_sqr();
    Ok(TeleportOutcome {
        input: psi.clone(),
        record,
        bob_state,
        fidelity,
    })
}

/// Runs one teleportation trial with sampled measurement outcomes.
pub fn teleport_trial(dim: Dimension, psi: &StateVector, seed: u64) -> Result<TeleportOutcome> {
    run_teleport(dim, psi, &mut SeededSampler::new(seed))
}

/// Forces every one of the d² outcome branches in turn.
///
/// Branches are ordered by (ancilla outcome, source outcome); each
/// record carries the branch probabilities actually encountered.
pub fn enumerate_teleport_branches(
    dim: Dimension,
    psi: &StateVector,
) -> Result<Vec<TeleportOutcome>> {
    let d = dim.get();
    let mut out = Vec::with_capacity(d * d);
    for a_m in 0..d {
        for a_t in 0..d {
            let mut source = ForcedOutcomes::new(&[a_m, a_t]);
            out.push(run_teleport(dim, psi, &mut source)?);
        }
    }
    Ok(out)
}

/// Deviation of the measurement-free teleport's source wires from χ⊗χ:
/// 1 − |⟨χ⊗χ⊗ψ| result⟩|² for the circuit run on ψ⊗|0,0⟩.
pub fn source_obliteration_deviation(dim: Dimension, psi: &StateVector) -> Result<f64> {
    if psi.dim() != dim || psi.n_wires() != 1 {
        return Err(Error::ShapeMismatch(
            "obliteration check expects a one-wire source state".to_string(),
        ));
    }
    let circuit = build_bbc(dim)?;
    let zero = StateVector::basis(dim, 1, 0)?;
    let input = psi.tensor(&zero)?.tensor(&zero)?;
    let (out, _) = run_circuit(&circuit, &input, &mut SeededSampler::new(0))?;
    let chi = StateVector::chi(dim);
    let expected = chi.tensor(&chi)?.tensor(psi)?;
    Ok(1.0 - state_overlap(&expected, &out)?.norm_sqr())
}
