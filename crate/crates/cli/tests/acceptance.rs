//! The acceptance gate: nine numbered criteria, each run in order, timed,
//! and reported as one pass/fail line. Criteria with runtime budgets fail
//! on overrun. The test panics at the end if any criterion failed, so a
//! green run means the whole contract holds.

use std::time::{Duration, Instant};

use qswap_core::protocols::{
    build_bbc, build_epr, build_half_swap, build_swap, build_teleport,
    enumerate_teleport_branches, source_obliteration_deviation,
};
use qswap_core::rewrite::{
    apply_rule, certify_application, check_equiv_on_inputs, check_unitary_equiv, run_derivation,
    GateFlavor, Pipeline, Site,
};
use qswap_core::sim::{
    apply_instruction, circuit_unitary, kraus_map, run_circuit, Registers, SeededSampler,
};
use qswap_core::state::StateVector;
use qswap_core::textfmt::parse_circuit;
use qswap_core::gates::GateId;
use qswap_core::types::{Circuit, Dimension, Instruction, StateLabel};
use qswap_core::DEFAULT_TOLERANCE;

const TOL: f64 = DEFAULT_TOLERANCE;
const FIDELITY_SLACK: f64 = 1e-9;
const PROBABILITY_SLACK: f64 = 1e-10;

fn dim(d: usize) -> Dimension {
    Dimension::new(d).unwrap()
}

fn evolve(circuit: &Circuit, input: &StateVector) -> StateVector {
    let (out, record) = run_circuit(circuit, input, &mut SeededSampler::new(0)).unwrap();
    assert!(record.entries.is_empty(), "evolve expects no measurements");
    out
}

/// Entangled two-wire probe state, deterministic in `seed`.
fn probe_state(d: usize, seed: u64) -> StateVector {
    let a = StateVector::haar_seeded(dim(d), seed);
    let b = StateVector::haar_seeded(dim(d), seed ^ 0x9e37_79b9_7f4a_7c15);
    let product = a.tensor(&b).unwrap();
    let couple = Instruction::gate(GateId::Cx, &[0, 1]);
    apply_instruction(&product, &couple, &Registers::new()).unwrap()
}

/// Criterion 1: the swap circuit acts as the |x,y> -> |y,x> permutation,
/// checked entrywise against an index-arithmetic oracle and by evolving
/// every basis state, for d in {2,3,5,7}.
fn criterion_swap_permutation() -> Result<String, String> {
    let mut worst: f64 = 0.0;
    for d in [2usize, 3, 5, 7] {
        let circuit = build_swap(dim(d)).map_err(|e| e.to_string())?;
        let u = circuit_unitary(&circuit).map_err(|e| e.to_string())?;
        for x in 0..d {
            for y in 0..d {
                let col = x * d + y;
                let row = y * d + x;
                for r in 0..d * d {
                    let expect = if r == row { 1.0 } else { 0.0 };
                    let dev = (u.get(r, col) - expect).norm();
                    worst = worst.max(dev);
                    if dev > TOL {
                        return Err(format!(
                            "d={d}: entry ({r},{col}) off the permutation by {dev:.3e}"
                        ));
                    }
                }
                let input = StateVector::basis(dim(d), 2, col).unwrap();
                let want = StateVector::basis(dim(d), 2, row).unwrap();
                let dev = evolve(&circuit, &input).max_abs_diff(&want).unwrap();
                worst = worst.max(dev);
                if dev > TOL {
                    return Err(format!("d={d}: |{x},{y}> evolves off target by {dev:.3e}"));
                }
            }
        }
    }
    Ok(format!("d in {{2,3,5,7}}, max deviation {worst:.3e}"))
}

/// Criterion 2: replacing a coupling by its four-gate route through a
/// fresh ancilla is unitarily exact on three wires, d in {2,3,5,7}.
fn criterion_ancilla_expansion() -> Result<String, String> {
    let mut worst: f64 = 0.0;
    let mut cases = 0usize;
    for d in [2usize, 3, 5, 7] {
        let mut flavors = vec![GateFlavor::Qudit];
        if d == 2 {
            flavors.push(GateFlavor::Qubit);
        }
        for flavor in flavors {
            for gate in [GateId::Cx, GateId::Cxd] {
                if flavor == GateFlavor::Qubit && gate == GateId::Cxd {
                    continue;
                }
                let mut before = Circuit::new(dim(d), 3).unwrap();
                before.push(Instruction::gate(gate, &[0, 2])).unwrap();
                let site = Site::Expand {
                    index: 0,
                    ancilla: 1,
                    flavor,
                };
                let after = apply_rule(&before, &site, TOL).map_err(|e| e.to_string())?;
                if after.instructions().len() != 4 {
                    return Err(format!(
                        "d={d} {gate}: expected a four-gate route, got {}",
                        after.instructions().len()
                    ));
                }
                let report =
                    check_unitary_equiv(&before, &after, false, TOL).map_err(|e| e.to_string())?;
                worst = worst.max(report.max_deviation);
                if !report.passed {
                    return Err(format!(
                        "d={d} {gate} ({flavor}): deviation {:.3e}",
                        report.max_deviation
                    ));
                }
                cases += 1;
            }
        }
    }
    Ok(format!("{cases} expansions, max deviation {worst:.3e}"))
}

/// Criterion 3: conjugating a coupling into a phase coupling between
/// Fourier rotations is entrywise exact, and the phase coupling ignores
/// which wire is called the control, for d in {2,3,5,7}.
fn criterion_conjugation_and_symmetry() -> Result<String, String> {
    let mut worst: f64 = 0.0;
    for d in [2usize, 3, 5, 7] {
        for gate in [GateId::Cx, GateId::Cxd] {
            for wires in [[0usize, 1], [1, 0]] {
                let mut before = Circuit::new(dim(d), 2).unwrap();
                before.push(Instruction::gate(gate, &wires)).unwrap();
                let site = Site::Conj {
                    index: 0,
                    flavor: GateFlavor::Qudit,
                };
                let after = apply_rule(&before, &site, TOL).map_err(|e| e.to_string())?;
                let report =
                    check_unitary_equiv(&before, &after, false, TOL).map_err(|e| e.to_string())?;
                worst = worst.max(report.max_deviation);
                if !report.passed {
                    return Err(format!(
                        "d={d} {gate} {wires:?}: deviation {:.3e}",
                        report.max_deviation
                    ));
                }
            }
        }
        // The d = 2 route through H instead of F.
        if d == 2 {
            let mut before = Circuit::new(dim(2), 2).unwrap();
            before.push(Instruction::gate(GateId::Cx, &[0, 1])).unwrap();
            let site = Site::Conj {
                index: 0,
                flavor: GateFlavor::Qubit,
            };
            let after = apply_rule(&before, &site, TOL).map_err(|e| e.to_string())?;
            let report =
                check_unitary_equiv(&before, &after, false, TOL).map_err(|e| e.to_string())?;
            worst = worst.max(report.max_deviation);
            if !report.passed {
                return Err(format!("qubit route: deviation {:.3e}", report.max_deviation));
            }
        }
        for gate in [GateId::Cz, GateId::Czd] {
            let mut a = Circuit::new(dim(d), 2).unwrap();
            a.push(Instruction::gate(gate, &[0, 1])).unwrap();
            let mut b = Circuit::new(dim(d), 2).unwrap();
            b.push(Instruction::gate(gate, &[1, 0])).unwrap();
            let report = check_unitary_equiv(&a, &b, false, TOL).map_err(|e| e.to_string())?;
            worst = worst.max(report.max_deviation);
            if !report.passed {
                return Err(format!(
                    "d={d} {gate} wire symmetry: deviation {:.3e}",
                    report.max_deviation
                ));
            }
        }
    }
    Ok(format!("d in {{2,3,5,7}}, max deviation {worst:.3e}"))
}

/// Criterion 4: the uniform state absorbs every shift power, and a
/// coupling targeting it drops away, certified on swept inputs.
fn criterion_shift_invariance_and_drop() -> Result<String, String> {
    let mut worst: f64 = 0.0;
    let registers = Registers::new();
    for d in [2usize, 3, 5, 7] {
        // chi built as F|0> through the simulator, then shifted d-1 times.
        let zero = StateVector::basis(dim(d), 1, 0).unwrap();
        let rotate = Instruction::gate(GateId::F, &[0]);
        let chi = apply_instruction(&zero, &rotate, &registers).unwrap();
        let shift = Instruction::gate(GateId::X, &[0]);
        let mut current = chi.clone();
        for k in 1..d {
            current = apply_instruction(&current, &shift, &registers).unwrap();
            let dev = current.max_abs_diff(&chi).unwrap();
            worst = worst.max(dev);
            if dev > TOL {
                return Err(format!("d={d}: X^{k} moves the uniform state by {dev:.3e}"));
            }
        }

        let mut before = Circuit::new(dim(d), 2).unwrap();
        before.push(Instruction::gate(GateId::Cx, &[0, 1])).unwrap();
        before.set_input(1, StateLabel::Chi).unwrap();
        let site = Site::Drop { index: 0 };
        let after = apply_rule(&before, &site, TOL).map_err(|e| e.to_string())?;
        if !after.instructions().is_empty() {
            return Err(format!("d={d}: drop left instructions behind"));
        }
        let report =
            certify_application(&before, &after, &site, TOL).map_err(|e| e.to_string())?;
        worst = worst.max(report.max_deviation);
        if !report.passed {
            return Err(format!("d={d}: drop certificate failed: {}", report.note));
        }
        let direct = check_equiv_on_inputs(&before, &after, &[(1, StateVector::chi(dim(d)))], TOL)
            .map_err(|e| e.to_string())?;
        worst = worst.max(direct.max_deviation);
        if !direct.passed {
            return Err(format!(
                "d={d}: swept-input equivalence failed at {:.3e}",
                direct.max_deviation
            ));
        }
    }
    Ok(format!("d in {{2,3,5,7}}, max deviation {worst:.3e}"))
}

/// Criterion 5: measuring then conditioning equals coupling then
/// measuring, outcome by outcome, including branch probabilities on 20
/// random inputs, for all four couplings at d in {2,3}.
fn criterion_deferred_measurement() -> Result<String, String> {
    let mut worst: f64 = 0.0;
    for d in [2usize, 3] {
        for gate in [GateId::Cx, GateId::Cz, GateId::Cxd, GateId::Czd] {
            let mut before = Circuit::new(dim(d), 2).unwrap();
            before.push(Instruction::gate(gate, &[0, 1])).unwrap();
            before.push(Instruction::measure(0, "r")).unwrap();
            let site = Site::Defer {
                gate_index: 0,
                measure_index: 1,
            };
            let after = apply_rule(&before, &site, TOL).map_err(|e| e.to_string())?;
            let kb = kraus_map(&before).map_err(|e| e.to_string())?;
            let ka = kraus_map(&after).map_err(|e| e.to_string())?;
            let dev = kb.max_abs_diff(&ka).map_err(|e| e.to_string())?;
            worst = worst.max(dev);
            if dev > TOL {
                return Err(format!("d={d} {gate}: Kraus operators differ by {dev:.3e}"));
            }
            for trial in 0..20u64 {
                let input = probe_state(d, trial * 31 + u64::from(d as u32));
                for k in 0..d {
                    let pb = kb.branch_probability(&[k], &input).map_err(|e| e.to_string())?;
                    let pa = ka.branch_probability(&[k], &input).map_err(|e| e.to_string())?;
                    let mass = input.digit_mass(0, k).map_err(|e| e.to_string())?;
                    let dev = (pb - pa).abs().max((pb - mass).abs());
                    worst = worst.max(dev);
                    if dev > TOL {
                        return Err(format!(
                            "d={d} {gate} outcome {k}: branch probability off by {dev:.3e}"
                        ));
                    }
                }
            }
        }
    }
    Ok(format!("8 couplings, 20 inputs each, max deviation {worst:.3e}"))
}

/// Criterion 6: both derivation pipelines replay end to end with every
/// step certified and the result channel-equivalent to the built
/// teleport circuit.
fn criterion_derivation_replay() -> Result<String, String> {
    let mut worst: f64 = 0.0;
    let cases = [
        (Pipeline::Qubit, 2usize),
        (Pipeline::Qudit, 2),
        (Pipeline::Qudit, 3),
        (Pipeline::Qudit, 5),
    ];
    for (pipeline, d) in cases {
        let report = run_derivation(pipeline, dim(d), TOL).map_err(|e| e.to_string())?;
        for step in &report.steps {
            worst = worst.max(step.max_deviation);
            if !step.passed {
                return Err(format!(
                    "{pipeline} d={d} step {} ({}): {:.3e}",
                    step.step, step.title, step.max_deviation
                ));
            }
        }
        worst = worst.max(report.final_deviation);
        if !report.passed {
            return Err(format!("{pipeline} d={d}: final comparison failed"));
        }
    }
    Ok(format!("4 pipelines, max deviation {worst:.3e}"))
}

/// Criterion 7: teleportation moves 100 Haar-random states per d in
/// {2,3,5} with per-branch fidelity 1, uniform branch probabilities,
/// and the source wires left in the uniform product state.
fn criterion_teleportation_end_to_end() -> Result<String, String> {
    let mut worst_fidelity_gap: f64 = 0.0;
    let mut worst_probability_gap: f64 = 0.0;
    for d in [2usize, 3, 5] {
        let uniform = 1.0 / (d * d) as f64;
        for trial in 0..100u64 {
            let psi = StateVector::haar_seeded(dim(d), trial * 7 + u64::from(d as u32));
            let branches = enumerate_teleport_branches(dim(d), &psi).map_err(|e| e.to_string())?;
            if branches.len() != d * d {
                return Err(format!("d={d}: expected {} branches", d * d));
            }
            for outcome in &branches {
                let gap = 1.0 - outcome.fidelity;
                worst_fidelity_gap = worst_fidelity_gap.max(gap);
                if gap > FIDELITY_SLACK {
                    return Err(format!(
                        "d={d} trial {trial}: branch fidelity dropped to {:.12}",
                        outcome.fidelity
                    ));
                }
                let p = outcome.record.path_probability();
                let gap = (p - uniform).abs();
                worst_probability_gap = worst_probability_gap.max(gap);
                if gap > PROBABILITY_SLACK {
                    return Err(format!(
                        "d={d} trial {trial}: branch probability {p:.12e} not 1/d^2"
                    ));
                }
            }
            let obliteration =
                source_obliteration_deviation(dim(d), &psi).map_err(|e| e.to_string())?;
            worst_fidelity_gap = worst_fidelity_gap.max(obliteration);
            if obliteration > FIDELITY_SLACK {
                return Err(format!(
                    "d={d} trial {trial}: source wires stray from the uniform product by {obliteration:.3e}"
                ));
            }
        }
    }
    Ok(format!(
        "300 states, fidelity gap <= {worst_fidelity_gap:.3e}, probability gap <= {worst_probability_gap:.3e}"
    ))
}

/// Criterion 8: every builder circuit and every pipeline-step circuit
/// yields a complete Kraus map.
fn criterion_kraus_completeness() -> Result<String, String> {
    let mut worst: f64 = 0.0;
    let mut circuits = 0usize;
    let mut check = |c: &Circuit, what: &str| -> Result<(), String> {
        let dev = kraus_map(c).map_err(|e| e.to_string())?.completeness_deviation();
        worst = worst.max(dev);
        circuits += 1;
        if dev > TOL {
            return Err(format!("{what}: completeness off by {dev:.3e}"));
        }
        Ok(())
    };
    for d in [2usize, 3, 5, 7] {
        check(&build_swap(dim(d)).unwrap(), &format!("swap d={d}"))?;
        check(&build_half_swap(dim(d)).unwrap(), &format!("half swap d={d}"))?;
        check(&build_epr(dim(d)).unwrap().0, &format!("entangler d={d}"))?;
        check(&build_bbc(dim(d)).unwrap(), &format!("measurement-free teleport d={d}"))?;
        check(&build_teleport(dim(d)).unwrap(), &format!("teleport d={d}"))?;
    }
    let cases = [
        (Pipeline::Qubit, 2usize),
        (Pipeline::Qudit, 2),
        (Pipeline::Qudit, 3),
        (Pipeline::Qudit, 5),
    ];
    for (pipeline, d) in cases {
        let report = run_derivation(pipeline, dim(d), TOL).map_err(|e| e.to_string())?;
        for step in &report.steps {
            let circuit = parse_circuit(&step.circuit_after)
                .map_err(|e| format!("{pipeline} d={d} step {}: {e}", step.step))?;
            check(
                &circuit,
                &format!("{pipeline} d={d} step {}", step.step),
            )?;
        }
    }
    Ok(format!("{circuits} circuits, max deviation {worst:.3e}"))
}

/// Criterion 9: the corpus round-trips through the text format, and
/// seeded machine reports are byte-identical across invocations.
fn criterion_round_trip_determinism() -> Result<String, String> {
    use qswap_core::textfmt::serialize;
    let dir = std::path::PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/corpus");
    let mut files: Vec<_> = std::fs::read_dir(&dir)
        .map_err(|e| e.to_string())?
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|x| x == "qc"))
        .collect();
    files.sort();
    if files.len() != 20 {
        return Err(format!("corpus holds {} files, expected 20", files.len()));
    }
    for path in &files {
        let name = path.file_name().unwrap().to_string_lossy().into_owned();
        let text = std::fs::read_to_string(path).map_err(|e| format!("{name}: {e}"))?;
        let circuit = parse_circuit(&text).map_err(|e| format!("{name}: {e}"))?;
        let rendered = serialize(&circuit);
        let reparsed = parse_circuit(&rendered).map_err(|e| format!("{name}: {e}"))?;
        if reparsed != circuit || serialize(&reparsed) != rendered {
            return Err(format!("{name}: round-trip is not a fixpoint"));
        }
    }

    let args = [
        "teleport", "--d", "3", "--state", "haar", "--trials", "5", "--seed", "41", "--json",
    ];
    let run = || {
        std::process::Command::new(env!("CARGO_BIN_EXE_qswap"))
            .args(args)
            .output()
            .expect("binary runs")
    };
    let first = run();
    let second = run();
    if !first.status.success() {
        return Err("seeded teleport invocation failed".to_string());
    }
    if first.stdout != second.stdout {
        return Err("repeated seeded invocation produced different bytes".to_string());
    }
    Ok("20 files round-trip; seeded reports byte-identical".to_string())
}

#[test]
fn acceptance() {
    type Criterion = (&'static str, fn() -> Result<String, String>, Option<Duration>);
    let criteria: [Criterion; 9] = [
        ("swap permutation", criterion_swap_permutation, Some(Duration::from_secs(1))),
        ("ancilla expansion", criterion_ancilla_expansion, Some(Duration::from_secs(1))),
        ("conjugation and symmetry", criterion_conjugation_and_symmetry, None),
        ("shift invariance and drop", criterion_shift_invariance_and_drop, None),
        ("deferred measurement", criterion_deferred_measurement, None),
        ("derivation replay", criterion_derivation_replay, Some(Duration::from_secs(10))),
        ("teleportation end to end", criterion_teleportation_end_to_end, Some(Duration::from_secs(30))),
        ("kraus completeness", criterion_kraus_completeness, None),
        ("round-trip determinism", criterion_round_trip_determinism, None),
    ];

    let mut all_passed = true;
    for (number, (name, run, budget)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let result = run();
        let elapsed = start.elapsed();
        let overrun = budget.is_some_and(|b| elapsed > b);
        let (verdict, detail) = match &result {
            Ok(detail) if !overrun => ("PASS", detail.clone()),
            Ok(detail) => (
                "FAIL",
                format!("{detail}; budget {:?} overrun", budget.unwrap()),
            ),
            Err(reason) => ("FAIL", reason.clone()),
        };
        println!(
            "criterion {} ({name}): {verdict} ({elapsed:.2?}) {detail}",
            number + 1
        );
        if verdict == "FAIL" {
            all_passed = false;
        }
    }
    assert!(all_passed, "at least one acceptance criterion failed");
}
