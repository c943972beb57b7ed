//! Certified circuit rewriting.
//!
//! Each rule transforms a circuit at an explicitly addressed site and
//! carries a validity kind naming the checker that certifies the
//! transformation. [`apply_rule`] performs the rewrite (enforcing the
//! rule's side conditions); [`certify_application`] runs the matching
//! checker on a before/after pair. Rules never pattern-search: callers
//! know their sites.

pub mod check;
pub mod derive;

pub use check::{check_channel_equiv, check_equiv_on_inputs, check_unitary_equiv, EquivReport};
pub use derive::{run_derivation, DerivationReport, Pipeline, StepRecord};

use std::fmt;

use num_complex::Complex64;

use crate::basis;
use crate::error::{Error, Result};
use crate::gates::GateId;
use crate::state::StateVector;
use crate::types::{Circuit, Instruction, StateLabel};

/// The rule catalog.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RuleId {
    /// Route a coupling through an ancilla wire as four gates.
    Expand,
    /// Rewrite a coupling as a phase coupling conjugated by rotations.
    Conj,
    /// Remove a coupling whose target carries the shift-invariant input χ.
    Drop,
    /// Delete a trailing one-wire gate into the wire's declared output.
    Absorb,
    /// Swap two adjacent instructions with disjoint footprints.
    Commute,
    /// Append measurements on wires whose declared outputs are fixed states.
    AddMeas,
    /// Move a measurement before a gate controlled by its wire, making the
    /// gate classically controlled.
    Defer,
}

impl RuleId {
    pub fn validity_kind(self) -> ValidityKind {
        match self {
            RuleId::Expand | RuleId::Conj | RuleId::Commute => ValidityKind::UnconditionalUnitary,
            RuleId::Drop => ValidityKind::InputConditional,
            RuleId::Absorb => ValidityKind::OutputExtension,
            RuleId::AddMeas | RuleId::Defer => ValidityKind::Channel,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            RuleId::Expand => "R-EXPAND",
            RuleId::Conj => "R-CONJ",
            RuleId::Drop => "R-DROP",
            RuleId::Absorb => "R-ABSORB",
            RuleId::Commute => "R-COMMUTE",
            RuleId::AddMeas => "R-ADDMEAS",
            RuleId::Defer => "R-DEFER",
        }
    }
}

impl fmt::Display for RuleId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// How a rule's output relates to its input, and therefore which checker
/// certifies it.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ValidityKind {
    /// Same unitary on the full space: certified by [`check_unitary_equiv`]
    /// (or the channel checker when measurements are present).
    UnconditionalUnitary,
    /// Same action on a constrained input subspace: certified by
    /// [`check_equiv_on_inputs`].
    InputConditional,
    /// Same circuit up to a trailing gate recorded in an output label:
    /// certified by [`check_channel_equiv`] against the re-extended form.
    OutputExtension,
    /// Same Kraus map outcome by outcome: certified by
    /// [`check_channel_equiv`].
    Channel,
}

/// Which mnemonic family replacement gates come from. The qubit family
/// (H and self-inverse couplings) is only valid at d = 2; the qudit
/// family works at every d.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GateFlavor {
    Qubit,
    Qudit,
}

impl fmt::Display for GateFlavor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            GateFlavor::Qubit => "qubit",
            GateFlavor::Qudit => "qudit",
        })
    }
}

/// A rule application site. Instruction indices refer to the circuit the
/// rule is applied to.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Site {
    Expand {
        index: usize,
        ancilla: usize,
        flavor: GateFlavor,
    },
    Conj {
        index: usize,
        flavor: GateFlavor,
    },
    Drop {
        index: usize,
    },
    Absorb {
        index: usize,
    },
    Commute {
        index: usize,
    },
    AddMeas {
        measures: Vec<(usize, String)>,
    },
    Defer {
        gate_index: usize,
        measure_index: usize,
    },
}

impl Site {
    pub fn rule_id(&self) -> RuleId {
        match self {
            Site::Expand { .. } => RuleId::Expand,
            Site::Conj { .. } => RuleId::Conj,
            Site::Drop { .. } => RuleId::Drop,
            Site::Absorb { .. } => RuleId::Absorb,
            Site::Commute { .. } => RuleId::Commute,
            Site::AddMeas { .. } => RuleId::AddMeas,
            Site::Defer { .. } => RuleId::Defer,
        }
    }
}

impl fmt::Display for Site {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Site::Expand {
                index,
                ancilla,
                flavor,
            } => write!(f, "R-EXPAND at {index} via ancilla {ancilla} ({flavor})"),
            Site::Conj { index, flavor } => write!(f, "R-CONJ at {index} ({flavor})"),
            Site::Drop { index } => write!(f, "R-DROP at {index}"),
            Site::Absorb { index } => write!(f, "R-ABSORB at {index}"),
            Site::Commute { index } => write!(f, "R-COMMUTE at {index}"),
            Site::AddMeas { measures } => {
                write!(f, "R-ADDMEAS [")?;
                for (i, (wire, reg)) in measures.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{wire} -> {reg}")?;
                }
                write!(f, "]")
            }
            Site::Defer {
                gate_index,
                measure_index,
            } => write!(f, "R-DEFER gate {gate_index} to measurement {measure_index}"),
        }
    }
}

fn mismatch(rule: RuleId, site: &Site, reason: impl Into<String>) -> Error {
    Error::RuleMismatch {
        rule: rule.name(),
        site: site.to_string(),
        reason: reason.into(),
    }
}

fn instruction_at<'c>(c: &'c Circuit, index: usize) -> Result<&'c Instruction> {
    c.instructions()
        .get(index)
        .ok_or(Error::IndexOutOfRange {
            index,
            len: c.instructions().len(),
        })
}

fn coupling_at<'c>(c: &'c Circuit, index: usize, site: &Site) -> Result<(GateId, &'c [usize])> {
    match instruction_at(c, index)? {
        Instruction::Gate { gate, wires } if matches!(gate, GateId::Cx | GateId::Cxd) => {
            Ok((*gate, wires))
        }
        other => Err(mismatch(
            site.rule_id(),
            site,
            format!("expected a controlled shift at index {index}, found '{other}'"),
        )),
    }
}

fn splice(c: &Circuit, index: usize, replacement: Vec<Instruction>) -> Result<Circuit> {
    let mut instructions = Vec::with_capacity(c.instructions().len() + replacement.len());
    instructions.extend_from_slice(&c.instructions()[..index]);
    instructions.extend(replacement);
    instructions.extend_from_slice(&c.instructions()[index + 1..]);
    Circuit::from_parts(
        c.dim(),
        c.n_wires(),
        instructions,
        c.inputs().clone(),
        c.outputs().clone(),
    )
}

/// Probability that measuring `wire` of `state` finds the one-wire state
/// `mode`: the squared norm of ⟨mode|_wire state⟩.
fn mode_mass(state: &StateVector, wire: usize, mode: &StateVector) -> f64 {
    let d = state.d();
    let n = state.n_wires();
    let stride = basis::stride(d, n, wire);
    let mut total = 0.0;
    for idx in 0..state.len() {
        if (idx / stride) % d != 0 {
            continue;
        }
        let mut amp = Complex64::ZERO;
        for y in 0..d {
            amp += mode.amplitude(y).conj() * state.amplitude(idx + y * stride);
        }
        total += amp.norm_sqr();
    }
    total
}

/// Worst-case deviation from 1 of the probability that each listed wire's
/// declared output state would be found by an ideal mode measurement,
/// over the basis sweep of all non-fixed declared inputs.
fn declared_output_purity_deviation(c: &Circuit, wires: &[usize]) -> Result<f64> {
    let mut targets = Vec::with_capacity(wires.len());
    for &w in wires {
        let label = c
            .output(w)
            .ok_or_else(|| Error::SideCondition(format!("wire {w} has no declared output")))?;
        let state = label.state(c.dim())?.ok_or_else(|| {
            Error::SideCondition(format!(
                "wire {w}'s declared output is not a fixed state"
            ))
        })?;
        targets.push((w, state));
    }
    let mut fixed = Vec::new();
    for (wire, label) in c.inputs() {
        if let Some(state) = label.state(c.dim())? {
            fixed.push((*wire, state));
        }
    }
    let inputs = check::input_sweep(c, &fixed)?;
    let mut dev: f64 = 0.0;
    for input in &inputs {
        let out = check::evolve(c, input)?;
        for (w, mode) in &targets {
            dev = dev.max((1.0 - mode_mass(&out, *w, mode)).abs());
        }
    }
    Ok(dev)
}

fn match_fixed_label(v: &[Complex64], dim: crate::types::Dimension, tolerance: f64) -> Option<StateLabel> {
    let d = dim.get();
    let mut candidates: Vec<StateLabel> = (0..d).map(StateLabel::Basis).collect();
    candidates.push(StateLabel::Chi);
    for label in candidates {
        let state = label.state(dim).ok()??;
        let dev = v
            .iter()
            .zip(state.amplitudes().iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        if dev <= tolerance {
            return Some(label);
        }
    }
    None
}

/// Applies one rewrite rule at the given site.
///
/// Side conditions that involve numeric comparison (R-ABSORB's output
/// vocabulary match, R-ADDMEAS's output purity) use `tolerance`; the
/// structural matchers ignore it.
pub fn apply_rule(c: &Circuit, site: &Site, tolerance: f64) -> Result<Circuit> {
    let d = c.d();
    match site {
        Site::Expand {
            index,
            ancilla,
            flavor,
        } => {
            let (gate, wires) = coupling_at(c, *index, site)?;
            if *flavor == GateFlavor::Qubit && d != 2 {
                return Err(mismatch(RuleId::Expand, site, "qubit family requires d = 2"));
            }
            let (a, b) = (wires[0], wires[1]);
            let w = *ancilla;
            if w >= c.n_wires() || w == a || w == b {
                return Err(mismatch(
                    RuleId::Expand,
                    site,
                    format!("ancilla {w} must be a distinct wire of the circuit"),
                ));
            }
            // Both expansions cancel the ancilla's digit for every ancilla
            // state: the target picks up ±(control) while the ancilla
            // returns to where it started.
            let qudit_gates: [(GateId, [usize; 2]); 4] = match gate {
                GateId::Cx => [
                    (GateId::Cx, [a, w]),
                    (GateId::Cx, [w, b]),
                    (GateId::Cxd, [a, w]),
                    (GateId::Cxd, [w, b]),
                ],
                _ => [
                    (GateId::Cx, [a, w]),
                    (GateId::Cxd, [w, b]),
                    (GateId::Cxd, [a, w]),
                    (GateId::Cx, [w, b]),
                ],
            };
            let replacement = qudit_gates
                .iter()
                .map(|(g, ws)| {
                    let g = if *flavor == GateFlavor::Qubit { GateId::Cx } else { *g };
                    Instruction::gate(g, ws)
                })
                .collect();
            splice(c, *index, replacement)
        }
        Site::Conj { index, flavor } => {
            let (gate, wires) = coupling_at(c, *index, site)?;
            if *flavor == GateFlavor::Qubit && d != 2 {
                return Err(mismatch(RuleId::Conj, site, "qubit family requires d = 2"));
            }
            let (ctrl, tgt) = (wires[0], wires[1]);
            // The phase coupling acts identically from either wire, so the
            // replacement roots it at the former target.
            let phase_gate = match gate {
                GateId::Cx => GateId::Cz,
                _ => GateId::Czd,
            };
            let replacement = match flavor {
                GateFlavor::Qubit => vec![
                    Instruction::gate(GateId::H, &[tgt]),
                    Instruction::gate(GateId::Cz, &[tgt, ctrl]),
                    Instruction::gate(GateId::H, &[tgt]),
                ],
                GateFlavor::Qudit => vec![
                    Instruction::gate(GateId::Fd, &[tgt]),
                    Instruction::gate(phase_gate, &[tgt, ctrl]),
                    Instruction::gate(GateId::F, &[tgt]),
                ],
            };
            splice(c, *index, replacement)
        }
        Site::Drop { index } => {
            let (_, wires) = coupling_at(c, *index, site)?;
            let tgt = wires[1];
            if c.input(tgt) != Some(StateLabel::Chi) {
                return Err(Error::SideCondition(format!(
                    "wire {tgt} must carry the declared input chi for its coupling to act as the identity"
                )));
            }
            if c.instructions()[..*index]
                .iter()
                .any(|i| i.touches_wire(tgt))
            {
                return Err(Error::SideCondition(format!(
                    "an instruction before index {index} already acts on wire {tgt}"
                )));
            }
            splice(c, *index, Vec::new())
        }
        Site::Absorb { index } => {
            let (gate, wire) = match instruction_at(c, *index)? {
                Instruction::Gate { gate, wires } if wires.len() == 1 => (*gate, wires[0]),
                other => {
                    return Err(mismatch(
                        RuleId::Absorb,
                        site,
                        format!("expected a one-wire gate, found '{other}'"),
                    ))
                }
            };
            if c.instructions()[index + 1..]
                .iter()
                .any(|i| i.touches_wire(wire))
            {
                return Err(Error::SideCondition(format!(
                    "wire {wire} is used again after index {index}"
                )));
            }
            let output = c.output(wire).ok_or_else(|| {
                Error::SideCondition(format!("wire {wire} has no declared output to absorb into"))
            })?;
            let target = output.state(c.dim())?.ok_or_else(|| {
                Error::SideCondition(format!(
                    "wire {wire}'s declared output is not a fixed state"
                ))
            })?;
            // The wire's state before this gate is G† applied to the
            // declared output; matching is exact, with no phase freedom.
            let rewound = gate
                .matrix(d)?
                .adjoint()
                .as_array()
                .dot(target.amplitudes());
            let new_label = match_fixed_label(rewound.as_slice().unwrap(), c.dim(), tolerance)
                .ok_or_else(|| {
                    Error::SideCondition(format!(
                        "absorbing {} into wire {wire}'s output does not yield a recognized fixed state",
                        gate.mnemonic()
                    ))
                })?;
            let mut result = splice(c, *index, Vec::new())?;
            result.set_output(wire, new_label)?;
            Ok(result)
        }
        Site::Commute { index } => {
            let first = instruction_at(c, *index)?.clone();
            let second = instruction_at(c, index + 1)?.clone();
            if !first.footprint_disjoint(&second) {
                return Err(mismatch(
                    RuleId::Commute,
                    site,
                    format!("instructions {index} and {} share a wire or register", index + 1),
                ));
            }
            let mut instructions = c.instructions().to_vec();
            instructions.swap(*index, index + 1);
            Circuit::from_parts(
                c.dim(),
                c.n_wires(),
                instructions,
                c.inputs().clone(),
                c.outputs().clone(),
            )
        }
        Site::AddMeas { measures } => {
            if measures.is_empty() {
                return Err(mismatch(RuleId::AddMeas, site, "no measurements given"));
            }
            if !c.is_measurement_free() {
                return Err(mismatch(
                    RuleId::AddMeas,
                    site,
                    "output purity is only verified for measurement-free circuits",
                ));
            }
            let wires: Vec<usize> = measures.iter().map(|(w, _)| *w).collect();
            let dev = declared_output_purity_deviation(c, &wires)?;
            if dev > tolerance {
                return Err(Error::SideCondition(format!(
                    "a measured wire's declared output is not pure: deviation {dev:.3e}"
                )));
            }
            let mut result = c.clone();
            for (wire, register) in measures {
                result.push(Instruction::measure(*wire, register))?;
                // After measurement the wire's end state depends on the
                // outcome, so the fixed output label no longer applies.
                result.clear_output(*wire);
            }
            Ok(result)
        }
        Site::Defer {
            gate_index,
            measure_index,
        } => {
            if gate_index >= measure_index {
                return Err(mismatch(
                    RuleId::Defer,
                    site,
                    "the gate must precede the measurement",
                ));
            }
            let (gate, wires) = match instruction_at(c, *gate_index)? {
                Instruction::Gate { gate, wires }
                    if matches!(gate, GateId::Cx | GateId::Cxd | GateId::Cz | GateId::Czd) =>
                {
                    (*gate, wires.clone())
                }
                other => {
                    return Err(mismatch(
                        RuleId::Defer,
                        site,
                        format!("expected a two-wire coupling, found '{other}'"),
                    ))
                }
            };
            let (measured, register) = match instruction_at(c, *measure_index)? {
                Instruction::Measure { wire, register } => (*wire, register.clone()),
                other => {
                    return Err(mismatch(
                        RuleId::Defer,
                        site,
                        format!("expected a measurement, found '{other}'"),
                    ))
                }
            };
            // Shift couplings are controlled from their first wire only;
            // phase couplings act symmetrically, so either wire may be
            // read as the control.
            let target = if matches!(gate, GateId::Cx | GateId::Cxd) {
                if wires[0] != measured {
                    return Err(mismatch(
                        RuleId::Defer,
                        site,
                        format!("wire {measured} is not the control of '{}'", gate.mnemonic()),
                    ));
                }
                wires[1]
            } else if wires[0] == measured {
                wires[1]
            } else if wires[1] == measured {
                wires[0]
            } else {
                return Err(mismatch(
                    RuleId::Defer,
                    site,
                    format!("'{}' does not act on measured wire {measured}", gate.mnemonic()),
                ));
            };
            // Exact per-outcome equality needs everything in between to
            // avoid both of the coupling's wires: an intervening gate on
            // the target would be reordered against the deferred action.
            let gate_instr = c.instructions()[*gate_index].clone();
            for (offset, between) in c.instructions()[gate_index + 1..*measure_index]
                .iter()
                .enumerate()
            {
                if !between.footprint_disjoint(&gate_instr) {
                    return Err(Error::SideCondition(format!(
                        "instruction {} acts on the deferred coupling's wires",
                        gate_index + 1 + offset
                    )));
                }
            }
            let root = gate
                .controlled_root()
                .expect("every deferrable coupling has a one-wire root");
            let mut instructions = c.instructions().to_vec();
            instructions.remove(*gate_index);
            // The measurement slid down by one; insert right after it.
            instructions.insert(
                *measure_index,
                Instruction::controlled(&register, root, target),
            );
            Circuit::from_parts(
                c.dim(),
                c.n_wires(),
                instructions,
                c.inputs().clone(),
                c.outputs().clone(),
            )
        }
    }
}

/// Certifies an application of `site` that turned `before` into `after`,
/// using the checker designated by the rule's validity kind.
pub fn certify_application(
    before: &Circuit,
    after: &Circuit,
    site: &Site,
    tolerance: f64,
) -> Result<EquivReport> {
    match site.rule_id().validity_kind() {
        ValidityKind::UnconditionalUnitary => {
            if before.is_measurement_free() && after.is_measurement_free() {
                check_unitary_equiv(before, after, false, tolerance)
            } else {
                check_channel_equiv(before, after, tolerance)
            }
        }
        ValidityKind::InputConditional => {
            let Site::Drop { index } = site else {
                unreachable!("input-conditional rules are drops");
            };
            let (_, wires) = coupling_at(before, *index, site)?;
            let tgt = wires[1];
            let state = before
                .input(tgt)
                .and_then(|label| label.state(before.dim()).transpose())
                .transpose()?
                .ok_or_else(|| {
                    Error::SideCondition(format!("wire {tgt} carries no fixed declared input"))
                })?;
            check_equiv_on_inputs(before, after, &[(tgt, state)], tolerance)
        }
        ValidityKind::OutputExtension => {
            let Site::Absorb { index } = site else {
                unreachable!("output-extension rules are absorptions");
            };
            let absorbed = instruction_at(before, *index)?.clone();
            let (gate, wire) = match &absorbed {
                Instruction::Gate { gate, wires } if wires.len() == 1 => (*gate, wires[0]),
                other => {
                    return Err(mismatch(
                        RuleId::Absorb,
                        site,
                        format!("expected a one-wire gate, found '{other}'"),
                    ))
                }
            };
            let mut extended = Circuit::from_instructions(
                after.dim(),
                after.n_wires(),
                after.instructions().to_vec(),
            )?;
            extended.push(absorbed)?;
            let channel = check_channel_equiv(before, &extended, tolerance)?;
            // The label rewrite must satisfy |new output⟩ = G†|old output⟩.
            let label_dev = match (before.output(wire), after.output(wire)) {
                (Some(old), Some(new)) => {
                    let old_state = old.state(before.dim())?.ok_or_else(|| {
                        Error::SideCondition("absorbed output is not a fixed state".to_string())
                    })?;
                    let new_state = new.state(after.dim())?.ok_or_else(|| {
                        Error::SideCondition("rewritten output is not a fixed state".to_string())
                    })?;
                    let rewound = gate
                        .matrix(before.d())?
                        .adjoint()
                        .as_array()
                        .dot(old_state.amplitudes());
                    rewound
                        .iter()
                        .zip(new_state.amplitudes().iter())
                        .map(|(a, b)| (a - b).norm())
                        .fold(0.0, f64::max)
                }
                _ => f64::INFINITY,
            };
            let max_deviation = channel.max_deviation.max(label_dev);
            Ok(EquivReport {
                passed: max_deviation <= tolerance,
                max_deviation,
                note: format!("{}; output label rewind deviation {label_dev:.3e}", channel.note),
            })
        }
        ValidityKind::Channel => match site {
            Site::AddMeas { measures } => {
                let mut extended = before.clone();
                for (wire, register) in measures {
                    extended.push(Instruction::measure(*wire, register))?;
                }
                let channel = check_channel_equiv(&extended, after, tolerance)?;
                let wires: Vec<usize> = measures.iter().map(|(w, _)| *w).collect();
                let purity_dev = declared_output_purity_deviation(before, &wires)?;
                let max_deviation = channel.max_deviation.max(purity_dev);
                Ok(EquivReport {
                    passed: max_deviation <= tolerance,
                    max_deviation,
                    note: format!(
                        "{}; measured-wire output purity deviation {purity_dev:.3e}",
                        channel.note
                    ),
                })
            }
            _ => check_channel_equiv(before, after, tolerance),
        },
    }
}
