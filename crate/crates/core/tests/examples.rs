use std::f64::consts::{FRAC_1_SQRT_2, PI};

use grover_optics::analysis::{
    abstract_grover_simulate, coherence_factor, entanglement_witness, grover_success_closed_form, ifm_simulate,
    iteration_choices, path_sum_probability, IfmPort,
};
use grover_optics::circuit::{
    build_grover_compiled, build_grover_generic, build_grover_uncompiled, default_iterations, detector_probabilities,
    simulate,
};
use grover_optics::compiler::{compile, count_elements, unitary_equiv};
use grover_optics::elements::{apply_element, bs_matrix, hwp_matrix, rotator_matrix, LcState, PockelsState};
use grover_optics::format::{parse_circuit, write_circuit};
use grover_optics::oracle::{
    common_birefringence_invariance_check, electro_optic_oracle_net, ideal_oracle_unitary, oracle_marked_element,
    OracleSetting,
};
use grover_optics::state::{fidelity_up_to_global_phase, partial_trace, uniform_superposition};
use grover_optics::{
    BitString, Circuit, Element, ModeId, ModeSet, ModeSpace, PathSet, Pol, PolSel, PureState, Registry, Subsystem, C64,
};
use nalgebra::{DMatrix, DVector};

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

fn state(amps: &[C64]) -> PureState {
    let space = ModeSpace::new(amps.len() / 2).unwrap();
    PureState::new(space, DVector::from_column_slice(amps)).unwrap()
}

fn close(a: C64, b: C64) -> bool {
    (a - b).norm() < 1e-12
}

fn ideal(value: usize, n: usize) -> OracleSetting {
    OracleSetting::Ideal(BitString::new(value, n).unwrap())
}

fn marked_state() -> PureState {
    state(&[c(0.5, 0.0), c(-0.5, 0.0), c(0.5, 0.0), c(0.5, 0.0)])
}

fn probabilities(circ: &Circuit) -> Vec<f64> {
    detector_probabilities(circ, &circ.default_input())
        .unwrap()
        .iter()
        .map(|o| o.probability)
        .collect()
}

#[test]
fn uniform_superposition_amplitudes() {
    for (n, amp) in [(1, FRAC_1_SQRT_2), (2, 0.5), (3, 1.0 / (2.0 * 2f64.sqrt()))] {
        let s = uniform_superposition(n).unwrap();
        assert_eq!(s.amplitudes().len(), 1 << n);
        assert!(s.amplitudes().iter().all(|&a| close(a, c(amp, 0.0))));
    }
    assert!(uniform_superposition(0).is_err());
}

#[test]
fn partial_trace_examples() {
    let rho = partial_trace(&marked_state(), Subsystem::Spatial).unwrap();
    let half = DMatrix::from_diagonal_element(2, 2, c(0.5, 0.0));
    assert!(rho.max_deviation(&half) < 1e-12);

    let a_h = PureState::basis(ModeSpace::new(2).unwrap(), ModeId::new(0, Pol::H)).unwrap();
    let rho = partial_trace(&a_h, Subsystem::Polarization).unwrap();
    let proj = DMatrix::from_row_slice(2, 2, &[c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)]);
    assert!(rho.max_deviation(&proj) < 1e-12);

    let rho = partial_trace(&uniform_superposition(2).unwrap(), Subsystem::Polarization).unwrap();
    let plus = DMatrix::from_element(2, 2, c(0.5, 0.0));
    assert!(rho.max_deviation(&plus) < 1e-12);
}

#[test]
fn fidelity_examples() {
    let s = uniform_superposition(2).unwrap();
    assert!((fidelity_up_to_global_phase(&s, &s).unwrap() - 1.0).abs() < 1e-12);
    let rotated = PureState::new(s.space(), s.amplitudes() * C64::from_polar(1.0, 1.234)).unwrap();
    assert!((fidelity_up_to_global_phase(&s, &rotated).unwrap() - 1.0).abs() < 1e-12);
    let space = ModeSpace::new(2).unwrap();
    let a_h = PureState::basis(space, ModeId::new(0, Pol::H)).unwrap();
    let a_v = PureState::basis(space, ModeId::new(0, Pol::V)).unwrap();
    assert!(fidelity_up_to_global_phase(&a_h, &a_v).unwrap().abs() < 1e-12);
    assert!(fidelity_up_to_global_phase(&a_h, &uniform_superposition(3).unwrap()).is_err());
}

#[test]
fn state_json_round_trip() {
    let s = marked_state();
    let json = serde_json::to_string(&s.to_json(None)).unwrap();
    let back = PureState::from_json(&serde_json::from_str(&json).unwrap()).unwrap();
    assert_eq!(back, s);
}

#[test]
fn element_matrix_examples() {
    let r = FRAC_1_SQRT_2;
    let wh = hwp_matrix(22.5);
    for (got, want) in wh.iter().zip([r, r, r, -r]) {
        assert!(close(*got, c(want, 0.0)));
    }
    let swap = hwp_matrix(45.0);
    assert_eq!(swap[(0, 1)], c(1.0, 0.0));
    assert_eq!(swap[(0, 0)], c(0.0, 0.0));
    let pi_v = hwp_matrix(0.0);
    assert_eq!(pi_v[(1, 1)], c(-1.0, 0.0));

    let bs = bs_matrix();
    assert!(close(bs[(0, 0)], c(r, 0.0)) && close(bs[(1, 0)], c(0.0, r)));
    // −π/2 on b before and after the splitter gives the WH transform.
    let shift = nalgebra::Matrix2::new(c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, -1.0));
    let net = shift * bs * shift;
    for (got, want) in net.iter().zip([r, r, r, -r]) {
        assert!(close(*got, c(want, 0.0)));
    }

    let rot = rotator_matrix();
    assert_eq!(rot[(1, 0)], c(1.0, 0.0));
    assert_eq!(rot[(0, 1)], c(-1.0, 0.0));
    assert!(close((rot * rot)[(0, 0)], c(-1.0, 0.0)));
}

#[test]
fn apply_element_examples() {
    let space = ModeSpace::new(2).unwrap();
    let a_h = PureState::basis(space, ModeId::new(0, Pol::H)).unwrap();
    let out = apply_element(&a_h, &Element::hwp(22.5, PathSet::one(0))).unwrap();
    let r = FRAC_1_SQRT_2;
    assert!(close(out.amplitudes()[0], c(r, 0.0)) && close(out.amplitudes()[1], c(r, 0.0)));
    assert!(close(out.amplitudes()[2], c(0.0, 0.0)) && close(out.amplitudes()[3], c(0.0, 0.0)));

    let s = state(&[c(r, 0.0), c(0.0, 0.0), c(r, 0.0), c(0.0, 0.0)]);
    let out = apply_element(&s, &Element::phase(PI, ModeSet::path(1))).unwrap();
    assert!(close(out.amplitudes()[2], c(-r, 0.0)));

    let b_v = PureState::basis(space, ModeId::new(1, Pol::V)).unwrap();
    let out = apply_element(&b_v, &Element::hwp(22.5, PathSet::one(0))).unwrap();
    assert_eq!(out, b_v);

    assert!(apply_element(&a_h, &Element::hwp(0.0, PathSet::one(5))).is_err());
}

#[test]
fn circuit_text_round_trip() {
    let text = "CIRCUIT name=demo n=2 paths=a,b\n\
                HWP theta=22.5 path=a\n\
                BS paths=a,b\n\
                PHASE phi=-1.5707963 modes=b:*\n\
                ROT path=b\n\
                PC state=on path=*\n\
                LC state=hwp0 path=*\n\
                PBS paths=a,b\n";
    let circ = parse_circuit(text).unwrap();
    assert_eq!(circ.len(), 7);
    assert_eq!(count_elements(&circ), 6);
    let again = parse_circuit(&write_circuit(&circ)).unwrap();
    assert_eq!(again.elements(), circ.elements());
}

#[test]
fn uncompiled_search_examples() {
    let circ = build_grover_uncompiled(2, &ideal(1, 2)).unwrap();
    let oracle_end = circ.elements().iter().rposition(|e| e.is_oracle()).unwrap();
    let prefix = circ.with_elements(circ.elements()[..=oracle_end].to_vec()).unwrap();
    let after = simulate(&prefix, &circ.default_input()).unwrap();
    assert!((fidelity_up_to_global_phase(&after, &marked_state()).unwrap() - 1.0).abs() < 1e-9);

    for m in 0..4 {
        let p = probabilities(&build_grover_uncompiled(2, &ideal(m, 2)).unwrap());
        for (i, x) in p.iter().enumerate() {
            assert!((x - if i == m { 1.0 } else { 0.0 }).abs() < 1e-9);
        }
    }
    assert!(build_grover_uncompiled(3, &ideal(0, 3)).is_err());
}

#[test]
fn compiled_search_examples() {
    for (m, setting) in OracleSetting::electro_optic_settings().iter().enumerate() {
        let compiled = build_grover_compiled(2, setting).unwrap();
        let uncompiled = build_grover_uncompiled(2, setting).unwrap();
        assert!((probabilities(&compiled)[m] - 1.0).abs() < 1e-9);
        assert!(unitary_equiv(&compiled, &uncompiled, 1e-9).unwrap().0);
        assert!(count_elements(&compiled) <= 12);
    }
    let out = detector_probabilities(&build_grover_compiled(2, &ideal(2, 2)).unwrap(), &marked_state()).unwrap();
    assert_eq!(out.len(), 4);
}

#[test]
fn generic_builder_examples() {
    for m in 0..8 {
        let p = probabilities(&build_grover_generic(3, &ideal(m, 3), 1).unwrap());
        for (i, x) in p.iter().enumerate() {
            assert!((x - if i == m { 25.0 / 32.0 } else { 1.0 / 32.0 }).abs() < 1e-9);
        }
    }
    let p = probabilities(&build_grover_generic(2, &ideal(3, 2), 1).unwrap());
    assert!((p[3] - 1.0).abs() < 1e-9);
    assert!(build_grover_generic(11, &ideal(0, 11), 1).is_err());
    assert_eq!(default_iterations(2), 1);
}

#[test]
fn empty_circuit_and_direct_readout() {
    let reg = Registry::for_qubits(2).unwrap();
    let empty = Circuit::new("empty", Some(2), reg.clone(), vec![]).unwrap();
    let s = uniform_superposition(2).unwrap();
    assert_eq!(simulate(&empty, &s).unwrap(), s);
    assert!(detector_probabilities(&empty, &s).is_err());
    assert_eq!(count_elements(&empty), 0);

    let readout = Circuit::new("readout", Some(2), reg, vec![Element::pbs(PathSet::All)]).unwrap();
    let p = detector_probabilities(&readout, &s).unwrap();
    assert!(p.iter().all(|o| (o.probability - 0.25).abs() < 1e-12));
}

#[test]
fn compile_examples() {
    let reg = Registry::for_qubits(2).unwrap();
    let chain = |thetas: &[f64]| {
        let els = thetas.iter().map(|&t| Element::hwp(t, PathSet::one(0))).collect();
        Circuit::new("chain", Some(2), reg.clone(), els).unwrap()
    };

    let (out, report) = compile(&chain(&[22.5, 0.0, 22.5])).unwrap();
    assert_eq!(out.elements(), &[Element::hwp(45.0, PathSet::one(0))]);
    assert!(report.equivalence_verified);

    let (out, _) = compile(&chain(&[22.5, 22.5])).unwrap();
    assert!(out.is_empty());

    for m in 0..4 {
        let (out, report) = compile(&build_grover_uncompiled(2, &ideal(m, 2)).unwrap()).unwrap();
        assert!(report.output_count <= 12 && report.output_count == count_elements(&out));
        assert!(report.max_unitary_deviation < 1e-9);
    }
}

#[test]
fn unitary_equiv_examples() {
    let circ = build_grover_compiled(2, &ideal(0, 2)).unwrap();
    assert_eq!(unitary_equiv(&circ, &circ, 1e-9).unwrap(), (true, 0.0));
    let mut shifted = circ.clone();
    shifted.push(Element::phase(PI, ModeSet::all())).unwrap();
    assert!(unitary_equiv(&circ, &shifted, 1e-9).unwrap().0);
    let other = build_grover_compiled(2, &ideal(1, 2)).unwrap();
    assert!(!unitary_equiv(&circ, &other, 1e-9).unwrap().0);
}

#[test]
fn oracle_examples() {
    let u = ideal_oracle_unitary(&BitString::new(0, 2).unwrap(), 2).unwrap();
    assert_eq!(u[(0, 0)], c(-1.0, 0.0));
    assert!((&u * &u - DMatrix::identity(4, 4)).iter().all(|z| z.norm() < 1e-12));

    let net = electro_optic_oracle_net(PockelsState::Off, LcState::Hwp0);
    // Columns are input modes aH, aV, bH, bV.
    let want = [(0, 0, 1.0), (1, 1, -1.0), (3, 2, -1.0), (2, 3, -1.0)];
    for (row, col, v) in want {
        assert!(close(net[(row, col)], c(v, 0.0)));
    }

    let net = electro_optic_oracle_net(PockelsState::On, LcState::Glass);
    for (row, col, v) in [(0, 0, 1.0), (1, 1, -1.0), (3, 2, 1.0), (2, 3, 1.0)] {
        assert!(close(net[(row, col)], c(v, 0.0)));
    }

    let marks: Vec<usize> = OracleSetting::electro_optic_settings()
        .iter()
        .map(|s| s.marked().unwrap().value())
        .collect();
    assert_eq!(marks, vec![0, 1, 2, 3]);
    assert_eq!(oracle_marked_element(PockelsState::Off, LcState::Hwp0).unwrap().value(), 0);

    for phi in [0.0, PI / 7.0, PI / 3.0, PI / 2.0, PI, 1.5 * PI] {
        assert!(common_birefringence_invariance_check(phi).unwrap());
    }
}

#[test]
fn path_sum_examples() {
    let a_h = ModeId::new(0, Pol::H);
    let circ = build_grover_compiled(2, &ideal(0, 2)).unwrap();
    assert!((path_sum_probability(&circ, a_h, ModeId::new(0, Pol::H)).unwrap() - 1.0).abs() < 1e-12);
    let circ = build_grover_compiled(2, &ideal(1, 2)).unwrap();
    assert!(path_sum_probability(&circ, a_h, ModeId::new(0, Pol::H)).unwrap().abs() < 1e-12);
    assert!((path_sum_probability(&circ, a_h, ModeId::new(0, Pol::V)).unwrap() - 1.0).abs() < 1e-12);
}

#[test]
fn abstract_grover_examples() {
    assert!((grover_success_closed_form(4, 1).unwrap() - 1.0).abs() < 1e-12);
    assert!((grover_success_closed_form(8, 1).unwrap() - 25.0 / 32.0).abs() < 1e-12);
    assert!((grover_success_closed_form(4, 0).unwrap() - 0.25).abs() < 1e-12);

    let a = abstract_grover_simulate(4, 1, 1).unwrap();
    assert!((a[1].abs() - 1.0).abs() < 1e-12);
    for n_db in [4usize, 16, 64, 256, 1024] {
        let k = iteration_choices(n_db).round;
        let a = abstract_grover_simulate(n_db, n_db / 3, k).unwrap();
        assert!(a[n_db / 3].powi(2) > 0.5);
    }
}

#[test]
fn ifm_examples() {
    let expected = [(0.0, 0.0), (0.5, 0.25), (0.25, 0.25), (0.25, 0.25)];
    for (m, (fires, fires_h)) in expected.into_iter().enumerate() {
        let r = ifm_simulate(&BitString::new(m, 2).unwrap()).unwrap();
        assert!((r.total() - 1.0).abs() < 1e-9);
        assert!((r.dark_port_fires() - fires).abs() < 1e-9);
        assert!((r.probability(IfmPort::Port2, Some(Pol::H)) - fires_h).abs() < 1e-9);
    }
}

#[test]
fn decoherence_factor_examples() {
    assert_eq!(coherence_factor(0.0, 1.0).unwrap(), 1.0);
    assert!(coherence_factor(50.0, 1.0).unwrap() < 1e-300);
    assert!(coherence_factor(0.5, 1.0).unwrap() > coherence_factor(0.6, 1.0).unwrap());
    assert!(coherence_factor(1.0, 0.0).is_err());
    assert!(coherence_factor(1.0, -1.0).is_err());
}

#[test]
fn entanglement_witness_examples() {
    assert!((entanglement_witness(&marked_state()).unwrap() - 1.0).abs() < 1e-12);
    assert!(entanglement_witness(&uniform_superposition(2).unwrap()).unwrap().abs() < 1e-12);
    let a_h = PureState::basis(ModeSpace::new(2).unwrap(), ModeId::new(0, Pol::H)).unwrap();
    assert!(entanglement_witness(&a_h).unwrap().abs() < 1e-12);
}

#[test]
fn phase_on_one_polarization() {
    let s = uniform_superposition(2).unwrap();
    let e = Element::phase(PI, ModeSet { paths: PathSet::All, pol: PolSel::V });
    let out = apply_element(&s, &e).unwrap();
    assert!(close(out.amplitudes()[1], c(-0.5, 0.0)) && close(out.amplitudes()[3], c(-0.5, 0.0)));
    assert!(close(out.amplitudes()[0], c(0.5, 0.0)));
}
