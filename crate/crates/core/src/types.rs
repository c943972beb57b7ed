//! Circuit-level types: wire dimension, instructions, declared boundary
//! labels, and the circuit container with its structural invariants.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::basis;
use crate::error::{Error, Result};
use crate::gates::GateId;
use crate::matrix::{check_cap, check_wires};
use crate::state::StateVector;

/// A validated wire dimension, `d >= 2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Dimension(usize);

impl Dimension {
    pub fn new(d: usize) -> Result<Self> {
        if d < 2 {
            return Err(Error::InvalidDimension(d));
        }
        Ok(Self(d))
    }

    pub fn get(self) -> usize {
        self.0
    }
}

impl fmt::Display for Dimension {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Symbolic state attached to a wire at a circuit boundary.
///
/// `Psi` stands for an arbitrary (unknown) one-wire state; `Chi` is the
/// uniform superposition `F|0>`; `Basis(k)` is a computational basis state.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StateLabel {
    Basis(usize),
    Chi,
    Psi,
}

impl StateLabel {
    /// Concrete one-wire state for the label, or `None` for `Psi`.
    pub fn state(self, dim: Dimension) -> Result<Option<StateVector>> {
        match self {
            StateLabel::Basis(k) => {
                if k >= dim.get() {
                    return Err(Error::LabelOutOfRange {
                        label: k,
                        d: dim.get(),
                    });
                }
                Ok(Some(StateVector::basis(dim, 1, k)?))
            }
            StateLabel::Chi => Ok(Some(StateVector::chi(dim))),
            StateLabel::Psi => Ok(None),
        }
    }

    pub fn parse(s: &str) -> Option<StateLabel> {
        match s {
            "chi" => Some(StateLabel::Chi),
            "psi" => Some(StateLabel::Psi),
            _ => s.parse::<usize>().ok().map(StateLabel::Basis),
        }
    }
}

impl fmt::Display for StateLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StateLabel::Basis(k) => write!(f, "{k}"),
            StateLabel::Chi => f.write_str("chi"),
            StateLabel::Psi => f.write_str("psi"),
        }
    }
}

/// One step of a circuit.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Instruction {
    /// A unitary gate; for two-wire gates the control is listed first.
    Gate { gate: GateId, wires: Vec<usize> },
    /// Projective measurement of one wire in the computational basis,
    /// writing the outcome digit into a named classical register.
    Measure { wire: usize, register: String },
    /// `gate` raised to the measured value of `register`, applied to `wire`.
    Controlled {
        register: String,
        gate: GateId,
        wire: usize,
    },
}

impl Instruction {
    pub fn gate(gate: GateId, wires: &[usize]) -> Self {
        Instruction::Gate {
            gate,
            wires: wires.to_vec(),
        }
    }

    pub fn measure(wire: usize, register: &str) -> Self {
        Instruction::Measure {
            wire,
            register: register.to_string(),
        }
    }

    pub fn controlled(register: &str, gate: GateId, wire: usize) -> Self {
        Instruction::Controlled {
            register: register.to_string(),
            gate,
            wire,
        }
    }

    pub fn wires(&self) -> &[usize] {
        match self {
            Instruction::Gate { wires, .. } => wires,
            Instruction::Measure { wire, .. } => std::slice::from_ref(wire),
            Instruction::Controlled { wire, .. } => std::slice::from_ref(wire),
        }
    }

    pub fn touches_wire(&self, wire: usize) -> bool {
        self.wires().contains(&wire)
    }

    /// Register written (for `Measure`) or read (for `Controlled`).
    pub fn register(&self) -> Option<&str> {
        match self {
            Instruction::Gate { .. } => None,
            Instruction::Measure { register, .. } => Some(register),
            Instruction::Controlled { register, .. } => Some(register),
        }
    }

    /// True when the two instructions share no wire and no register, so
    /// that exchanging them cannot change any semantics.
    pub fn footprint_disjoint(&self, other: &Instruction) -> bool {
        let wires_clash = self.wires().iter().any(|w| other.touches_wire(*w));
        let regs_clash = match (self.register(), other.register()) {
            (Some(a), Some(b)) => a == b,
            _ => false,
        };
        !wires_clash && !regs_clash
    }
}

impl fmt::Display for Instruction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Instruction::Gate { gate, wires } => {
                write!(f, "gate {gate}")?;
                for w in wires {
                    write!(f, " {w}")?;
                }
                Ok(())
            }
            Instruction::Measure { wire, register } => {
                write!(f, "measure {wire} -> {register}")
            }
            Instruction::Controlled {
                register,
                gate,
                wire,
            } => write!(f, "cgate {gate}^{register} {wire}"),
        }
    }
}

pub(crate) fn valid_register_name(name: &str) -> bool {
    let mut chars = name.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() || c == '_' => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

/// An ordered list of instructions on `n_wires` wires of dimension `d`,
/// with optional declared input/output labels per wire.
///
/// Structural invariants, enforced on every mutation:
/// * all wire indices are in range and distinct within an instruction;
/// * each register is written by exactly one `Measure`;
/// * a `Controlled` instruction only reads a register some earlier
///   `Measure` has written;
/// * `d^n_wires` stays within [`crate::MAX_TOTAL_DIM`].
#[derive(Debug, Clone, PartialEq)]
pub struct Circuit {
    dim: Dimension,
    n_wires: usize,
    instructions: Vec<Instruction>,
    inputs: BTreeMap<usize, StateLabel>,
    outputs: BTreeMap<usize, StateLabel>,
}

impl Circuit {
    pub fn new(dim: Dimension, n_wires: usize) -> Result<Self> {
        if n_wires == 0 {
            return Err(Error::ShapeMismatch(
                "a circuit needs at least one wire".into(),
            ));
        }
        check_cap(basis::total_dim(dim.get(), n_wires))?;
        Ok(Self {
            dim,
            n_wires,
            instructions: Vec::new(),
            inputs: BTreeMap::new(),
            outputs: BTreeMap::new(),
        })
    }

    /// Builds and validates a circuit in one call.
    pub fn from_instructions(
        dim: Dimension,
        n_wires: usize,
        instructions: Vec<Instruction>,
    ) -> Result<Self> {
        let mut c = Self::new(dim, n_wires)?;
        for instr in instructions {
            c.push(instr)?;
        }
        Ok(c)
    }

    /// Rebuilds a circuit from parts, re-running all structural checks.
    /// This is the only way rewrite rules materialize their results.
    pub fn from_parts(
        dim: Dimension,
        n_wires: usize,
        instructions: Vec<Instruction>,
        inputs: BTreeMap<usize, StateLabel>,
        outputs: BTreeMap<usize, StateLabel>,
    ) -> Result<Self> {
        let mut c = Self::from_instructions(dim, n_wires, instructions)?;
        for (wire, label) in inputs {
            c.set_input(wire, label)?;
        }
        for (wire, label) in outputs {
            c.set_output(wire, label)?;
        }
        Ok(c)
    }

    fn validate(&self, instr: &Instruction) -> Result<()> {
        check_wires(instr.wires(), self.n_wires)?;
        match instr {
            Instruction::Gate { gate, wires } => {
                if wires.len() != gate.arity() {
                    return Err(Error::WrongArity {
                        gate: gate.mnemonic(),
                        expected: gate.arity(),
                        got: wires.len(),
                    });
                }
                if *gate == GateId::H && self.dim.get() != 2 {
                    return Err(Error::UnsupportedDimension("H", self.dim.get()));
                }
            }
            Instruction::Measure { register, .. } => {
                if !valid_register_name(register) {
                    return Err(Error::InvalidRegisterName(register.clone()));
                }
                if self.writes_register(register) {
                    return Err(Error::RegisterReuse(register.clone()));
                }
            }
            Instruction::Controlled { register, gate, .. } => {
                if gate.arity() != 1 {
                    return Err(Error::WrongArity {
                        gate: gate.mnemonic(),
                        expected: 1,
                        got: 2,
                    });
                }
                if *gate == GateId::H && self.dim.get() != 2 {
                    return Err(Error::UnsupportedDimension("H", self.dim.get()));
                }
                if !self.writes_register(register) {
                    return Err(Error::RegisterUnset(register.clone()));
                }
            }
        }
        Ok(())
    }

    pub fn push(&mut self, instr: Instruction) -> Result<()> {
        self.validate(&instr)?;
        self.instructions.push(instr);
        Ok(())
    }

    pub fn dim(&self) -> Dimension {
        self.dim
    }

    pub fn d(&self) -> usize {
        self.dim.get()
    }

    pub fn n_wires(&self) -> usize {
        self.n_wires
    }

    /// Full state-space dimension `d^n_wires`.
    pub fn total_dim(&self) -> usize {
        basis::total_dim(self.d(), self.n_wires)
    }

    pub fn instructions(&self) -> &[Instruction] {
        &self.instructions
    }

    pub fn is_measurement_free(&self) -> bool {
        self.instructions
            .iter()
            .all(|i| matches!(i, Instruction::Gate { .. }))
    }

    pub fn writes_register(&self, name: &str) -> bool {
        self.instructions
            .iter()
            .any(|i| matches!(i, Instruction::Measure { register, .. } if register == name))
    }

    /// Register names in the order their measurements appear.
    pub fn registers(&self) -> Vec<String> {
        self.instructions
            .iter()
            .filter_map(|i| match i {
                Instruction::Measure { register, .. } => Some(register.clone()),
                _ => None,
            })
            .collect()
    }

    pub fn set_input(&mut self, wire: usize, label: StateLabel) -> Result<()> {
        self.check_label(wire, label)?;
        self.inputs.insert(wire, label);
        Ok(())
    }

    pub fn set_output(&mut self, wire: usize, label: StateLabel) -> Result<()> {
        self.check_label(wire, label)?;
        self.outputs.insert(wire, label);
        Ok(())
    }

    pub fn clear_input(&mut self, wire: usize) {
        self.inputs.remove(&wire);
    }

    pub fn clear_output(&mut self, wire: usize) {
        self.outputs.remove(&wire);
    }

    fn check_label(&self, wire: usize, label: StateLabel) -> Result<()> {
        if wire >= self.n_wires {
            return Err(Error::WireOutOfRange {
                wire,
                n_wires: self.n_wires,
            });
        }
        if let StateLabel::Basis(k) = label {
            if k >= self.d() {
                return Err(Error::LabelOutOfRange {
                    label: k,
                    d: self.d(),
                });
            }
        }
        Ok(())
    }

    pub fn input(&self, wire: usize) -> Option<StateLabel> {
        self.inputs.get(&wire).copied()
    }

    pub fn output(&self, wire: usize) -> Option<StateLabel> {
        self.outputs.get(&wire).copied()
    }

    pub fn inputs(&self) -> &BTreeMap<usize, StateLabel> {
        &self.inputs
    }

    pub fn outputs(&self) -> &BTreeMap<usize, StateLabel> {
        &self.outputs
    }

    /// Concatenation: `self`'s instructions followed by `other`'s.
    /// Boundary labels are taken from `self`'s inputs and `other`'s outputs.
    pub fn concat(&self, other: &Circuit) -> Result<Circuit> {
        if self.dim != other.dim || self.n_wires != other.n_wires {
            return Err(Error::ShapeMismatch(format!(
                "concatenating {} wire(s) at d = {} with {} wire(s) at d = {}",
                self.n_wires,
                self.d(),
                other.n_wires,
                other.d()
            )));
        }
        let written: BTreeSet<String> = self.registers().into_iter().collect();
        for reg in other.registers() {
            if written.contains(&reg) {
                return Err(Error::RegisterReuse(reg));
            }
        }
        let mut instructions = self.instructions.clone();
        instructions.extend(other.instructions.iter().cloned());
        Circuit::from_parts(
            self.dim,
            self.n_wires,
            instructions,
            self.inputs.clone(),
            other.outputs.clone(),
        )
    }
}
