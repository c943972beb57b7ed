//! Equivalence checkers. Each rewrite rule names one of these as the
//! checker that certifies its applications.

use num_complex::Complex64;
use serde::Serialize;

use crate::basis;
use crate::error::{Error, Result};
use crate::matrix::DenseUnitary;
use crate::sim::{apply_instruction, circuit_unitary, kraus_map, Registers};
use crate::state::StateVector;
use crate::types::Circuit;

/// Verdict of one equivalence check.
#[derive(Debug, Clone, Serialize)]
pub struct EquivReport {
    pub passed: bool,
    pub max_deviation: f64,
    pub note: String,
}

impl EquivReport {
    fn numeric(max_deviation: f64, tolerance: f64, note: String) -> Self {
        Self {
            passed: max_deviation <= tolerance,
            max_deviation,
            note,
        }
    }
}

/// Runs a measurement-free circuit on one input state.
pub(crate) fn evolve(circuit: &Circuit, input: &StateVector) -> Result<StateVector> {
    let registers = Registers::new();
    let mut state = input.clone();
    for instr in circuit.instructions() {
        state = apply_instruction(&state, instr, &registers)?;
    }
    Ok(state)
}

fn check_same_shape(c1: &Circuit, c2: &Circuit) -> Result<()> {
    if c1.dim() != c2.dim() || c1.n_wires() != c2.n_wires() {
        return Err(Error::ShapeMismatch(format!(
            "comparing {} wire(s) at d = {} with {} wire(s) at d = {}",
            c1.n_wires(),
            c1.d(),
            c2.n_wires(),
            c2.d()
        )));
    }
    Ok(())
}

/// Phase of the first largest-magnitude entry in row-major order.
fn leading_phase(u: &DenseUnitary) -> Complex64 {
    let mut best = Complex64::ZERO;
    let mut best_mag = -1.0;
    for r in 0..u.dim() {
        for c in 0..u.dim() {
            let entry = u.get(r, c);
            if entry.norm() > best_mag {
                best_mag = entry.norm();
                best = entry;
            }
        }
    }
    best / best.norm()
}

/// Compares the dense unitaries of two measurement-free circuits
/// entrywise. With `up_to_global_phase` each matrix is first divided by
/// the phase of its own leading entry; the default is exact comparison,
/// since every identity this crate certifies holds with no phase slack.
pub fn check_unitary_equiv(
    c1: &Circuit,
    c2: &Circuit,
    up_to_global_phase: bool,
    tolerance: f64,
) -> Result<EquivReport> {
    check_same_shape(c1, c2)?;
    let u1 = circuit_unitary(c1)?;
    let u2 = circuit_unitary(c2)?;
    let (dev, note) = if up_to_global_phase {
        let p1 = leading_phase(&u1);
        let p2 = leading_phase(&u2);
        let mut dev: f64 = 0.0;
        for r in 0..u1.dim() {
            for c in 0..u1.dim() {
                dev = dev.max((u1.get(r, c) / p1 - u2.get(r, c) / p2).norm());
            }
        }
        (dev, "entrywise unitary comparison up to global phase")
    } else {
        (u1.max_abs_diff(&u2)?, "exact entrywise unitary comparison")
    };
    Ok(EquivReport::numeric(dev, tolerance, note.to_string()))
}

/// Enumerates every product input obtained by fixing the listed wires to
/// the given one-wire states and sweeping all remaining wires over the
/// computational basis.
pub(crate) fn input_sweep(
    circuit: &Circuit,
    fixed: &[(usize, StateVector)],
) -> Result<Vec<StateVector>> {
    let d = circuit.d();
    let n = circuit.n_wires();
    let mut seen = vec![false; n];
    for (wire, state) in fixed {
        if *wire >= n {
            return Err(Error::WireOutOfRange {
                wire: *wire,
                n_wires: n,
            });
        }
        if seen[*wire] {
            return Err(Error::DuplicateWires);
        }
        seen[*wire] = true;
        if state.dim() != circuit.dim() || state.n_wires() != 1 {
            return Err(Error::ShapeMismatch(format!(
                "fixed state on wire {wire} must be one wire at d = {d}"
            )));
        }
    }
    let swept: Vec<usize> = (0..n).filter(|w| !seen[*w]).collect();
    let count = basis::total_dim(d, swept.len());
    let mut inputs = Vec::with_capacity(count);
    for assignment in 0..count {
        let digits = basis::decompose(assignment, d, swept.len());
        let mut acc: Option<StateVector> = None;
        for wire in 0..n {
            let part = match fixed.iter().find(|(w, _)| *w == wire) {
                Some((_, state)) => state.clone(),
                None => {
                    let pos = swept.iter().position(|w| *w == wire).unwrap();
                    StateVector::basis(circuit.dim(), 1, digits[pos])?
                }
            };
            acc = Some(match acc {
                None => part,
                Some(prev) => prev.tensor(&part)?,
            });
        }
        inputs.push(acc.unwrap());
    }
    Ok(inputs)
}

/// Compares two measurement-free circuits on the subspace reached by
/// fixing some wires to given states and sweeping the rest over the
/// basis. Output vectors are compared entrywise, exactly (no phase
/// allowance).
pub fn check_equiv_on_inputs(
    c1: &Circuit,
    c2: &Circuit,
    constraints: &[(usize, StateVector)],
    tolerance: f64,
) -> Result<EquivReport> {
    check_same_shape(c1, c2)?;
    if !c1.is_measurement_free() || !c2.is_measurement_free() {
        return Err(Error::MeasurementPresent);
    }
    let inputs = input_sweep(c1, constraints)?;
    let mut dev: f64 = 0.0;
    for input in &inputs {
        let out1 = evolve(c1, input)?;
        let out2 = evolve(c2, input)?;
        dev = dev.max(out1.max_abs_diff(&out2)?);
    }
    let note = format!(
        "{} fixed wire(s), {} swept input(s)",
        constraints.len(),
        inputs.len()
    );
    Ok(EquivReport::numeric(dev, tolerance, note))
}

/// Compares the Kraus maps of two circuits outcome by outcome.
///
/// Outcome keys are aligned by sorted register name, so measurement
/// order differences do not block comparison; mismatched register sets
/// are reported as a structural failure, not a numeric one.
pub fn check_channel_equiv(c1: &Circuit, c2: &Circuit, tolerance: f64) -> Result<EquivReport> {
    check_same_shape(c1, c2)?;
    let k1 = kraus_map(c1)?;
    let k2 = kraus_map(c2)?;
    if let Some(problem) = k1.shape_mismatch(&k2) {
        return Ok(EquivReport {
            passed: false,
            max_deviation: f64::INFINITY,
            note: format!("structural mismatch: {problem}"),
        });
    }
    let dev = k1.max_abs_diff(&k2)?;
    let note = format!(
        "compared {} outcome operator(s) exactly",
        k1.operators().len()
    );
    Ok(EquivReport::numeric(dev, tolerance, note))
}
