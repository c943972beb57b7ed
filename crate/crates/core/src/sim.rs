//! Circuit execution: state evolution, projective measurement with an
//! injectable outcome source, full-circuit unitaries, and Kraus maps.

use std::collections::BTreeMap;

use ndarray::{Array1, Array2};
use num_complex::Complex64;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::basis;
use crate::error::{Error, Result};
use crate::matrix::{adjoint_of, max_entry_diff, DenseUnitary};
use crate::state::StateVector;
use crate::types::{Circuit, Dimension, Instruction};

/// Branch probabilities below this are refused when an outcome is forced;
/// they indicate the caller asked for a branch that carries no amplitude.
pub const PROB_FLOOR: f64 = 1e-12;

/// Values measured so far, keyed by register name. Single assignment.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Registers(BTreeMap<String, usize>);

impl Registers {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get(&self, name: &str) -> Option<usize> {
        self.0.get(name).copied()
    }

    pub fn set(&mut self, name: &str, value: usize) -> Result<()> {
        if self.0.contains_key(name) {
            return Err(Error::RegisterReuse(name.to_string()));
        }
        self.0.insert(name.to_string(), value);
        Ok(())
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, usize)> {
        self.0.iter().map(|(k, v)| (k.as_str(), *v))
    }
}

/// Supplies measurement outcomes given the branch distribution.
///
/// Implementations may sample (simulation) or dictate (branch enumeration).
pub trait OutcomeSource {
    fn choose(&mut self, probabilities: &[f64]) -> Result<usize>;
}

/// Samples outcomes from a ChaCha8 stream seeded with a 64-bit value;
/// identical seeds replay identical runs on every platform.
pub struct SeededSampler {
    rng: ChaCha8Rng,
}

impl SeededSampler {
    pub fn new(seed: u64) -> Self {
        Self {
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }
}

impl OutcomeSource for SeededSampler {
    fn choose(&mut self, probabilities: &[f64]) -> Result<usize> {
        let u: f64 = self.rng.gen();
        let mut acc = 0.0;
        for (i, p) in probabilities.iter().enumerate() {
            acc += p;
            if u < acc {
                return Ok(i);
            }
        }
        // Rounding pushed the cumulative sum fractionally below 1.
        Ok(probabilities
            .iter()
            .rposition(|&p| p > 0.0)
            .unwrap_or(probabilities.len() - 1))
    }
}

/// Replays a fixed outcome sequence; used to walk a chosen branch.
pub struct ForcedOutcomes {
    values: Vec<usize>,
    cursor: usize,
}

impl ForcedOutcomes {
    pub fn new(values: &[usize]) -> Self {
        Self {
            values: values.to_vec(),
            cursor: 0,
        }
    }
}

impl OutcomeSource for ForcedOutcomes {
    fn choose(&mut self, probabilities: &[f64]) -> Result<usize> {
        let Some(&value) = self.values.get(self.cursor) else {
            return Err(Error::OutcomeExhausted);
        };
        self.cursor += 1;
        if value >= probabilities.len() {
            return Err(Error::OutcomeOutOfRange {
                outcome: value,
                d: probabilities.len(),
            });
        }
        Ok(value)
    }
}

/// One measurement event in a run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OutcomeEntry {
    pub register: String,
    pub value: usize,
    pub probability: f64,
}

/// The measurement events of a run, in execution order.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct OutcomeRecord {
    pub entries: Vec<OutcomeEntry>,
}

impl OutcomeRecord {
    /// Product of branch probabilities: the probability of this exact path.
    pub fn path_probability(&self) -> f64 {
        self.entries.iter().map(|e| e.probability).product()
    }

    pub fn value_of(&self, register: &str) -> Option<usize> {
        self.entries
            .iter()
            .find(|e| e.register == register)
            .map(|e| e.value)
    }
}

/// Applies a small unitary to the listed wires of a dense amplitude slice.
fn apply_gate_in_place(
    amps: &mut [Complex64],
    u: &DenseUnitary,
    wires: &[usize],
    d: usize,
    n_wires: usize,
) {
    let k = wires.len();
    let dim_small = basis::total_dim(d, k);
    debug_assert_eq!(u.dim(), dim_small);
    let strides: Vec<usize> = wires.iter().map(|&w| basis::stride(d, n_wires, w)).collect();
    // offsets[s]: composite-index offset of the gate sub-state s.
    let mut offsets = vec![0usize; dim_small];
    for (s, slot) in offsets.iter_mut().enumerate() {
        let mut rem = s;
        for &stride in strides.iter().rev() {
            *slot += (rem % d) * stride;
            rem /= d;
        }
    }
    let mut scratch = vec![Complex64::ZERO; dim_small];
    for idx in 0..amps.len() {
        if strides.iter().any(|&s| (idx / s) % d != 0) {
            continue; // not a base point of a gate-aligned group
        }
        for (s, &off) in offsets.iter().enumerate() {
            scratch[s] = amps[idx + off];
        }
        for (r, &off) in offsets.iter().enumerate() {
            let mut acc = Complex64::ZERO;
            for (s, &v) in scratch.iter().enumerate() {
                acc += u.get(r, s) * v;
            }
            amps[idx + off] = acc;
        }
    }
}

fn check_state_shape(circuit: &Circuit, state: &StateVector) -> Result<()> {
    if state.dim() != circuit.dim() || state.n_wires() != circuit.n_wires() {
        return Err(Error::ShapeMismatch(format!(
            "state of {} wire(s) at d = {} fed to a {}-wire circuit at d = {}",
            state.n_wires(),
            state.d(),
            circuit.n_wires(),
            circuit.d()
        )));
    }
    Ok(())
}

fn instruction_unitary(
    instr: &Instruction,
    d: usize,
    registers: &Registers,
) -> Result<Option<(DenseUnitary, Vec<usize>)>> {
    match instr {
        Instruction::Gate { gate, wires } => {
            Ok(Some((gate.matrix(d)?, wires.clone())))
        }
        Instruction::Controlled {
            register,
            gate,
            wire,
        } => {
            let Some(value) = registers.get(register) else {
                return Err(Error::RegisterUnset(register.clone()));
            };
            Ok(Some((gate.matrix(d)?.pow(value), vec![*wire])))
        }
        Instruction::Measure { .. } => Ok(None),
    }
}

/// Applies one `Gate` or `Controlled` instruction to a state.
///
/// `Measure` is not handled here; it needs an outcome source and goes
/// through [`measure_wire`].
pub fn apply_instruction(
    state: &StateVector,
    instr: &Instruction,
    registers: &Registers,
) -> Result<StateVector> {
    let d = state.d();
    let Some((u, wires)) = instruction_unitary(instr, d, registers)? else {
        return Err(Error::MeasurementPresent);
    };
    for &w in &wires {
        if w >= state.n_wires() {
            return Err(Error::WireOutOfRange {
                wire: w,
                n_wires: state.n_wires(),
            });
        }
    }
    let mut amps = state.amplitudes().to_vec();
    apply_gate_in_place(&mut amps, &u, &wires, d, state.n_wires());
    Ok(StateVector::from_raw(
        state.dim(),
        state.n_wires(),
        Array1::from_vec(amps),
    ))
}

/// Result of measuring one wire.
#[derive(Debug, Clone)]
pub struct Measurement {
    pub outcome: usize,
    pub probability: f64,
    pub state: StateVector,
}

/// Projectively measures `wire` in the computational basis.
///
/// The outcome is drawn from `source` against the Born probabilities; the
/// returned state is renormalized. Forcing a branch whose probability is
/// below [`PROB_FLOOR`] is an error.
pub fn measure_wire(
    state: &StateVector,
    wire: usize,
    source: &mut dyn OutcomeSource,
) -> Result<Measurement> {
    let d = state.d();
    let n = state.n_wires();
    if wire >= n {
        return Err(Error::WireOutOfRange { wire, n_wires: n });
    }
    let mut probs = Vec::with_capacity(d);
    for v in 0..d {
        probs.push(state.digit_mass(wire, v)?);
    }
    let outcome = source.choose(&probs)?;
    let p = probs[outcome];
    if p < PROB_FLOOR {
        return Err(Error::ProbabilityUnderflow(p));
    }
    let scale = 1.0 / p.sqrt();
    let amps: Array1<Complex64> = Array1::from_iter(state.amplitudes().iter().enumerate().map(
        |(idx, &a)| {
            if basis::digit_of(idx, d, n, wire) == outcome {
                a * scale
            } else {
                Complex64::ZERO
            }
        },
    ));
    Ok(Measurement {
        outcome,
        probability: p,
        state: StateVector::from_raw(state.dim(), n, amps),
    })
}

/// Runs a circuit on `input`, drawing measurement outcomes from `source`.
pub fn run_circuit(
    circuit: &Circuit,
    input: &StateVector,
    source: &mut dyn OutcomeSource,
) -> Result<(StateVector, OutcomeRecord)> {
    check_state_shape(circuit, input)?;
    let mut state = input.clone();
    let mut registers = Registers::new();
    let mut record = OutcomeRecord::default();
    for instr in circuit.instructions() {
        match instr {
            Instruction::Measure { wire, register } => {
                let m = measure_wire(&state, *wire, source)?;
                registers.set(register, m.outcome)?;
                record.entries.push(OutcomeEntry {
                    register: register.clone(),
                    value: m.outcome,
                    probability: m.probability,
                });
                state = m.state;
            }
            _ => {
                state = apply_instruction(&state, instr, &registers)?;
            }
        }
    }
    Ok((state, record))
}

/// Dense unitary of a measurement-free circuit: the ordered product of its
/// embedded gates (later instructions multiply on the left).
pub fn circuit_unitary(circuit: &Circuit) -> Result<DenseUnitary> {
    if !circuit.is_measurement_free() {
        return Err(Error::MeasurementPresent);
    }
    let d = circuit.d();
    let n = circuit.n_wires();
    let total = circuit.total_dim();
    let mut columns = Array2::<Complex64>::eye(total);
    for instr in circuit.instructions() {
        if let Instruction::Gate { gate, wires } = instr {
            let u = gate.matrix(d)?;
            apply_gate_to_columns(&mut columns, &u, wires, d, n);
        }
    }
    Ok(DenseUnitary::from_unitary_unchecked(columns))
}

/// Applies an embedded gate to every column of `m` in place.
fn apply_gate_to_columns(
    m: &mut Array2<Complex64>,
    u: &DenseUnitary,
    wires: &[usize],
    d: usize,
    n_wires: usize,
) {
    let rows = m.nrows();
    let mut scratch = vec![Complex64::ZERO; rows];
    for col in 0..m.ncols() {
        for r in 0..rows {
            scratch[r] = m[(r, col)];
        }
        apply_gate_in_place(&mut scratch, u, wires, d, n_wires);
        for r in 0..rows {
            m[(r, col)] = scratch[r];
        }
    }
}

/// The channel of a circuit with measurements: one (generally non-unitary)
/// operator per joint outcome string.
///
/// Keys list register values in lexicographic register-name order, so maps
/// from circuits that measure in different orders stay comparable. The
/// operators are unnormalized: `||K ψ||^2` is the branch probability, and
/// `sum K^t K = I` holds by construction.
#[derive(Debug, Clone)]
pub struct KrausMap {
    dim: Dimension,
    n_wires: usize,
    registers: Vec<String>,
    operators: BTreeMap<Vec<usize>, Array2<Complex64>>,
}

impl KrausMap {
    pub fn dim(&self) -> Dimension {
        self.dim
    }

    pub fn n_wires(&self) -> usize {
        self.n_wires
    }

    /// Register names in key order (lexicographic).
    pub fn registers(&self) -> &[String] {
        &self.registers
    }

    pub fn operators(&self) -> &BTreeMap<Vec<usize>, Array2<Complex64>> {
        &self.operators
    }

    pub fn operator(&self, key: &[usize]) -> Option<&Array2<Complex64>> {
        self.operators.get(key)
    }

    /// Max deviation of `sum K^t K` from the identity.
    pub fn completeness_deviation(&self) -> f64 {
        let total = basis::total_dim(self.dim.get(), self.n_wires);
        let mut sum = Array2::<Complex64>::zeros((total, total));
        for k in self.operators.values() {
            sum += &adjoint_of(k).dot(k);
        }
        max_entry_diff(&sum, &Array2::eye(total))
    }

    /// Probability of the branch `key` on the given input.
    pub fn branch_probability(&self, key: &[usize], input: &StateVector) -> Result<f64> {
        let k = self.operators.get(key).ok_or_else(|| {
            Error::ShapeMismatch(format!("no Kraus operator for outcome key {key:?}"))
        })?;
        if input.len() != k.ncols() {
            return Err(Error::ShapeMismatch(format!(
                "input of length {} against operators of size {}",
                input.len(),
                k.ncols()
            )));
        }
        let image = k.dot(input.amplitudes());
        Ok(image.iter().map(|a| a.norm_sqr()).sum())
    }

    /// Structural comparability check; `None` means comparable.
    pub fn shape_mismatch(&self, other: &KrausMap) -> Option<String> {
        if self.dim != other.dim || self.n_wires != other.n_wires {
            return Some(format!(
                "{} wire(s) at d = {} vs {} wire(s) at d = {}",
                self.n_wires,
                self.dim.get(),
                other.n_wires,
                other.dim.get()
            ));
        }
        if self.registers != other.registers {
            return Some(format!(
                "register sets differ: {:?} vs {:?}",
                self.registers, other.registers
            ));
        }
        None
    }

    /// Largest entrywise difference across all outcome operators.
    pub fn max_abs_diff(&self, other: &KrausMap) -> Result<f64> {
        if let Some(problem) = self.shape_mismatch(other) {
            return Err(Error::ShapeMismatch(problem));
        }
        let mut dev: f64 = 0.0;
        for (key, a) in &self.operators {
            // Same register set implies the same full key set.
            let b = &other.operators[key];
            dev = dev.max(max_entry_diff(a, b));
        }
        Ok(dev)
    }
}

/// Builds the Kraus map of a circuit by walking its instructions, splitting
/// the operator once per measurement.
pub fn kraus_map(circuit: &Circuit) -> Result<KrausMap> {
    let d = circuit.d();
    let n = circuit.n_wires();
    let total = circuit.total_dim();
    let mut branches: Vec<(BTreeMap<String, usize>, Array2<Complex64>)> =
        vec![(BTreeMap::new(), Array2::eye(total))];
    for instr in circuit.instructions() {
        match instr {
            Instruction::Gate { gate, wires } => {
                let u = gate.matrix(d)?;
                for (_, m) in branches.iter_mut() {
                    apply_gate_to_columns(m, &u, wires, d, n);
                }
            }
            Instruction::Controlled {
                register,
                gate,
                wire,
            } => {
                let base = gate.matrix(d)?;
                for (asg, m) in branches.iter_mut() {
                    let Some(&value) = asg.get(register) else {
                        return Err(Error::RegisterUnset(register.clone()));
                    };
                    apply_gate_to_columns(m, &base.pow(value), &[*wire], d, n);
                }
            }
            Instruction::Measure { wire, register } => {
                let mut next = Vec::with_capacity(branches.len() * d);
                for (asg, m) in branches.into_iter() {
                    for value in 0..d {
                        let mut asg_v = asg.clone();
                        if asg_v.insert(register.clone(), value).is_some() {
                            return Err(Error::RegisterReuse(register.clone()));
                        }
                        let mut projected = m.clone();
                        for row in 0..total {
                            if basis::digit_of(row, d, n, *wire) != value {
                                projected.row_mut(row).fill(Complex64::ZERO);
                            }
                        }
                        next.push((asg_v, projected));
                    }
                }
                branches = next;
            }
        }
    }
    let mut registers: Vec<String> = circuit.registers();
    registers.sort();
    let mut operators = BTreeMap::new();
    for (asg, m) in branches {
        let key: Vec<usize> = registers.iter().map(|r| asg[r]).collect();
        operators.insert(key, m);
    }
    Ok(KrausMap {
        dim: circuit.dim(),
        n_wires: n,
        registers,
        operators,
    })
}
