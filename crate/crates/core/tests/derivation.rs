//! Black-box tests of the derivation pipelines and the rewrite rules'
//! soundness guarantees.

mod common;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use qswap_core::protocols::{build_bbc, build_teleport};
use qswap_core::rewrite::{
    apply_rule, certify_application, check_unitary_equiv, run_derivation, Pipeline, Site,
};
use qswap_core::sim::kraus_map;
use qswap_core::{Circuit, Dimension, GateId, Instruction, DEFAULT_TOLERANCE};

const TOL: f64 = DEFAULT_TOLERANCE;

fn dim(d: usize) -> Dimension {
    Dimension::new(d).unwrap()
}

#[test]
fn full_derivations_pass_and_land_on_the_builder() {
    let cases = [
        (Pipeline::Qubit, 2usize, true),
        (Pipeline::Qudit, 2, false),
        (Pipeline::Qudit, 3, true),
        (Pipeline::Qudit, 5, true),
    ];
    for (pipeline, d, structural) in cases {
        let report = run_derivation(pipeline, dim(d), TOL).unwrap();
        assert!(report.passed, "{pipeline} at d = {d}:\n{}", report.to_text());
        assert_eq!(report.steps.len(), 7);
        for step in &report.steps {
            assert!(
                step.passed && step.max_deviation <= TOL,
                "{pipeline} d = {d} step {}: deviation {}",
                step.step,
                step.max_deviation
            );
        }
        assert_eq!(
            report.final_structural_match, structural,
            "{pipeline} at d = {d}"
        );
        assert!(report.final_deviation <= TOL);
    }
}

#[test]
fn measured_bbc_rewrites_to_the_built_teleport() {
    // The endgame of the pipeline, replayed from the builder's
    // measurement-free circuit: measuring both source wires and
    // deferring the two crossing couplings lands exactly on the built
    // teleport circuit, labels included.
    for d in [2usize, 3, 5] {
        let mut c = build_bbc(dim(d)).unwrap();
        for site in [
            Site::AddMeas {
                measures: vec![(1, "a_m".to_string()), (0, "a_t".to_string())],
            },
            Site::Defer {
                gate_index: 5,
                measure_index: 7,
            },
            Site::Defer {
                gate_index: 4,
                measure_index: 5,
            },
            Site::Commute { index: 5 },
        ] {
            let next = apply_rule(&c, &site, TOL).unwrap();
            let report = certify_application(&c, &next, &site, TOL).unwrap();
            assert!(
                report.passed,
                "d = {d}, {site}: deviation {} ({})",
                report.max_deviation, report.note
            );
            c = next;
        }
        assert_eq!(c, build_teleport(dim(d)).unwrap(), "d = {d}");
    }
}

#[test]
fn deferral_preserves_branch_probabilities_on_random_inputs() {
    // Deferring a coupling past its control measurement must leave every
    // outcome's probability untouched; on the two-wire circuit those
    // probabilities are exactly the input's digit masses on the measured
    // wire.
    for d in [2usize, 3] {
        for gate in [GateId::Cx, GateId::Cz, GateId::Cxd, GateId::Czd] {
            let mut before = Circuit::new(dim(d), 2).unwrap();
            before.push(Instruction::gate(gate, &[0, 1])).unwrap();
            before.push(Instruction::measure(0, "r")).unwrap();
            let site = Site::Defer {
                gate_index: 0,
                measure_index: 1,
            };
            let after = apply_rule(&before, &site, TOL).unwrap();
            let kraus_before = kraus_map(&before).unwrap();
            let kraus_after = kraus_map(&after).unwrap();
            for seed in 0..20u64 {
                let input = common::random_state(dim(d), 2, 1000 + seed);
                for k in 0..d {
                    let p_before = kraus_before.branch_probability(&[k], &input).unwrap();
                    let p_after = kraus_after.branch_probability(&[k], &input).unwrap();
                    let mass = input.digit_mass(0, k).unwrap();
                    assert!(
                        (p_before - p_after).abs() <= 1e-12,
                        "d = {d} {gate:?} outcome {k}: {p_before} vs {p_after}"
                    );
                    assert!(
                        (p_before - mass).abs() <= 1e-12,
                        "d = {d} {gate:?} outcome {k}: probability {p_before} vs digit mass {mass}"
                    );
                }
            }
        }
    }
}

#[test]
fn random_commute_and_defer_sites_are_sound() {
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let mut commutes = 0usize;
    let mut defers = 0usize;
    let mut rejections = 0usize;
    for _ in 0..500 {
        let circuit = common::random_circuit_with(&mut rng, true);
        let instructions = circuit.instructions();
        // Every adjacent pair is either commutable and certified, or
        // rejected by the matcher.
        for i in 0..instructions.len().saturating_sub(1) {
            let site = Site::Commute { index: i };
            match apply_rule(&circuit, &site, TOL) {
                Ok(after) => {
                    let report = certify_application(&circuit, &after, &site, TOL).unwrap();
                    assert!(
                        report.passed,
                        "commute at {i} of {}: deviation {}",
                        qswap_core::textfmt::serialize(&circuit),
                        report.max_deviation
                    );
                    commutes += 1;
                }
                Err(_) => rejections += 1,
            }
        }
        // Every (coupling, later measurement) pair the matcher accepts
        // must certify outcome by outcome.
        for g in 0..instructions.len() {
            for m in g + 1..instructions.len() {
                if !matches!(instructions[m], Instruction::Measure { .. }) {
                    continue;
                }
                let site = Site::Defer {
                    gate_index: g,
                    measure_index: m,
                };
                if let Ok(after) = apply_rule(&circuit, &site, TOL) {
                    let report = certify_application(&circuit, &after, &site, TOL).unwrap();
                    assert!(
                        report.passed,
                        "defer {g}->{m} of {}: deviation {}",
                        qswap_core::textfmt::serialize(&circuit),
                        report.max_deviation
                    );
                    defers += 1;
                }
            }
        }
    }
    // The generator must actually exercise the rules (the seeded run
    // yields 336 commutations and 41 deferrals).
    assert!(commutes >= 100, "only {commutes} commutations found");
    assert!(defers >= 20, "only {defers} deferrals found");
    assert!(rejections >= 100, "only {rejections} rejections seen");
}

#[test]
fn unitary_equivalence_behaves_like_a_metric() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut triples = 0usize;
    while triples < 20 {
        let a = common::random_circuit_with(&mut rng, false);
        let mut b = common::random_circuit_with(&mut rng, false);
        let mut c = common::random_circuit_with(&mut rng, false);
        // Redraw until shapes agree; the checker requires matching shapes.
        if b.dim() != a.dim() || b.n_wires() != a.n_wires() {
            b = a.clone();
        }
        if c.dim() != a.dim() || c.n_wires() != a.n_wires() {
            c = a.clone();
        }
        let ab = check_unitary_equiv(&a, &b, false, TOL).unwrap().max_deviation;
        let ba = check_unitary_equiv(&b, &a, false, TOL).unwrap().max_deviation;
        let bc = check_unitary_equiv(&b, &c, false, TOL).unwrap().max_deviation;
        let ac = check_unitary_equiv(&a, &c, false, TOL).unwrap().max_deviation;
        let aa = check_unitary_equiv(&a, &a, false, TOL).unwrap().max_deviation;
        assert_eq!(aa, 0.0);
        assert_eq!(ab, ba);
        // Entrywise max deviation obeys the triangle inequality up to
        // floating-point slack.
        assert!(ac <= ab + bc + 1e-12, "{ac} > {ab} + {bc}");
        triples += 1;
    }
}
