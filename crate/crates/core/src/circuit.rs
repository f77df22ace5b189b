//! Circuit IR, Grover builders and the state-vector simulator.

use std::f64::consts::PI;

use nalgebra::DMatrix;

use crate::elements::{Element, ElementKind, ModeSet, PathSet};
use crate::error::{invalid, Error, Result};
use crate::oracle::OracleSetting;
use crate::state::{default_path_label, ModeId, ModeSpace, Pol, PureState};
use crate::C64;

/// Declared spatial paths. Detector ports follow from the paths: each path's
/// readout PBS feeds a transmitted (H) and a reflected (V) detector, and
/// detector `k` (1-based) reads mode index `k - 1`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Registry {
    paths: Vec<String>,
}

impl Registry {
    pub fn new(paths: Vec<String>) -> Result<Self> {
        if paths.is_empty() {
            return invalid("registry needs at least one path");
        }
        for (i, p) in paths.iter().enumerate() {
            if p.is_empty() || p == "*" || p.contains([',', ':', ' ', '=']) {
                return invalid(format!("invalid path label `{p}`"));
            }
            if paths[..i].contains(p) {
                return invalid(format!("duplicate path label `{p}`"));
            }
        }
        Ok(Registry { paths })
    }

    /// Registry of an `n`-qubit circuit with default labels.
    pub fn for_qubits(n: usize) -> Result<Self> {
        let space = ModeSpace::for_qubits(n)?;
        Ok(Registry::with_default_labels(space.paths()))
    }

    pub fn with_default_labels(paths: usize) -> Self {
        Registry {
            paths: (0..paths).map(|p| default_path_label(p, paths)).collect(),
        }
    }

    pub fn labels(&self) -> &[String] {
        &self.paths
    }

    pub fn paths(&self) -> usize {
        self.paths.len()
    }

    pub fn space(&self) -> ModeSpace {
        ModeSpace::new(self.paths.len()).expect("non-empty registry")
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.paths.iter().position(|p| p == label)
    }

    pub fn label(&self, path: usize) -> &str {
        &self.paths[path]
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Circuit {
    name: String,
    qubits: Option<usize>,
    registry: Registry,
    elements: Vec<Element>,
}

impl Circuit {
    pub fn new(
        name: impl Into<String>,
        qubits: Option<usize>,
        registry: Registry,
        elements: Vec<Element>,
    ) -> Result<Self> {
        if let Some(n) = qubits {
            let expected = ModeSpace::for_qubits(n)?.paths();
            if expected != registry.paths() {
                return invalid(format!(
                    "{n} qubits need {expected} paths, registry declares {}",
                    registry.paths()
                ));
            }
        }
        for (i, e) in elements.iter().enumerate() {
            e.validate(registry.paths())
                .map_err(|err| Error::InvalidArgument(format!("element {i}: {err}")))?;
        }
        Ok(Circuit {
            name: name.into(),
            qubits,
            registry,
            elements,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn qubits(&self) -> Option<usize> {
        self.qubits
    }

    pub fn registry(&self) -> &Registry {
        &self.registry
    }

    pub fn space(&self) -> ModeSpace {
        self.registry.space()
    }

    pub fn elements(&self) -> &[Element] {
        &self.elements
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    /// Same registry and metadata, different element list.
    pub fn with_elements(&self, elements: Vec<Element>) -> Result<Self> {
        Circuit::new(self.name.clone(), self.qubits, self.registry.clone(), elements)
    }

    pub fn push(&mut self, e: Element) -> Result<()> {
        e.validate(self.registry.paths())?;
        self.elements.push(e);
        Ok(())
    }

    /// Dense unitary of the whole circuit.
    pub fn unitary(&self) -> DMatrix<C64> {
        let dim = self.space().dim();
        let mut m = DMatrix::identity(dim, dim);
        for e in &self.elements {
            e.act(&mut m);
        }
        m
    }

    /// Photon entering path `a` with horizontal polarization.
    pub fn default_input(&self) -> PureState {
        PureState::basis(self.space(), ModeId::new(0, Pol::H)).expect("path 0 exists")
    }

    /// True when the circuit ends in PBS readout covering every path.
    pub fn has_readout(&self) -> bool {
        let total = self.registry.paths();
        let mut covered = vec![false; total];
        for e in self.elements.iter().rev() {
            match &e.kind {
                ElementKind::Pbs { paths } => paths.resolve(total).into_iter().for_each(|p| covered[p] = true),
                _ => break,
            }
        }
        covered.iter().all(|&c| c)
    }
}

/// Left fold of the element actions over the input state.
pub fn simulate(c: &Circuit, input: &PureState) -> Result<PureState> {
    if input.space().dim() != c.space().dim() {
        return invalid(format!(
            "input has {} modes, circuit has {}",
            input.space().dim(),
            c.space().dim()
        ));
    }
    let mut out = input.clone();
    for e in c.elements() {
        e.act(out.amplitudes_mut());
    }
    Ok(out)
}

/// Probability of one detector click.
#[derive(Clone, Debug, PartialEq)]
pub struct DetectorOutcome {
    /// 1-based detector number; detector `k` reads bit string `k - 1`.
    pub detector: usize,
    /// Label of the path whose PBS feeds this detector.
    pub port: String,
    pub pol: Pol,
    pub probability: f64,
}

/// Readout distribution of a circuit that ends in a PBS layer.
pub fn detector_probabilities(c: &Circuit, input: &PureState) -> Result<Vec<DetectorOutcome>> {
    if !c.has_readout() {
        return Err(Error::InvalidState(format!(
            "circuit `{}` does not end in a PBS readout layer",
            c.name()
        )));
    }
    let out = simulate(c, input)?;
    Ok(out
        .amplitudes()
        .iter()
        .enumerate()
        .map(|(i, a)| {
            let mode = ModeId::from_index(i);
            DetectorOutcome {
                detector: i + 1,
                port: c.registry().label(mode.path).to_string(),
                pol: mode.pol,
                probability: a.norm_sqr(),
            }
        })
        .collect())
}

/// Default Grover iteration count, `round(π√N / 8)` with `N = 2^n`, at least 1.
pub fn default_iterations(n: usize) -> usize {
    let n_db = (1usize << n) as f64;
    ((PI * n_db.sqrt() / 8.0).round() as usize).max(1)
}

fn spatial_mask(n: usize, bit: usize) -> usize {
    // bit 1 is the most significant spatial bit (first beamsplitter)
    1 << (n - 1 - bit)
}

/// Walsh-Hadamard on every qubit: HWP@22.5 in every path, then one BS layer
/// per spatial bit with −π/2 shifters on the reflected arm before and after.
fn walsh_hadamard_stage(n: usize, out: &mut Vec<Element>) {
    let paths = 1usize << (n - 1);
    out.extend((0..paths).map(|p| Element::hwp(22.5, PathSet::one(p))));
    for bit in 1..n {
        let mask = spatial_mask(n, bit);
        let pairs: Vec<(usize, usize)> = (0..paths).filter(|p| p & mask == 0).map(|p| (p, p | mask)).collect();
        out.extend(pairs.iter().map(|&(_, b)| Element::phase(-PI / 2.0, ModeSet::path(b))));
        out.extend(pairs.iter().map(|&(a, b)| Element::bs(a, b)));
        out.extend(pairs.iter().map(|&(_, b)| Element::phase(-PI / 2.0, ModeSet::path(b))));
    }
}

/// Initial Walsh-Hadamard for a photon entering path `a` with H
/// polarization: one HWP@22.5 in the input path, then a cascaded
/// beamsplitter tree with a −π/2 shifter in each reflected output.
fn preparation_stage(n: usize, out: &mut Vec<Element>) {
    out.push(Element::hwp(22.5, PathSet::one(0)));
    let mut lit = vec![0usize];
    for bit in 1..n {
        let mask = spatial_mask(n, bit);
        let pairs: Vec<(usize, usize)> = lit.iter().map(|&p| (p, p | mask)).collect();
        out.extend(pairs.iter().map(|&(a, b)| Element::bs(a, b)));
        out.extend(pairs.iter().map(|&(_, b)| Element::phase(-PI / 2.0, ModeSet::path(b))));
        lit.extend(pairs.iter().map(|&(_, b)| b));
        lit.sort_unstable();
    }
}

/// π phase on every element except `|0…0⟩`: a π_V plate (HWP@0) in path `a`
/// and π glass in every other path.
fn conditional_phase_stage(n: usize, out: &mut Vec<Element>) {
    let paths = 1usize << (n - 1);
    out.push(Element::hwp(0.0, PathSet::one(0)));
    out.extend((1..paths).map(|p| Element::phase(PI, ModeSet::path(p))));
}

fn readout(out: &mut Vec<Element>) {
    out.push(Element::pbs(PathSet::All));
}

/// Grover search on `n` qubits (`2^(n-1)` paths plus polarization) with `k`
/// iterations of oracle and inversion about the mean.
pub fn build_grover_generic(n: usize, oracle: &OracleSetting, iterations: usize) -> Result<Circuit> {
    if !(2..=10).contains(&n) {
        return invalid(format!("qubit count {n} outside 2..=10"));
    }
    if iterations < 1 {
        return invalid("at least one Grover iteration is required");
    }
    let oracle_elements = oracle.elements(n)?;
    let mut els = Vec::new();
    preparation_stage(n, &mut els);
    for _ in 0..iterations {
        els.extend(oracle_elements.iter().cloned());
        walsh_hadamard_stage(n, &mut els);
        conditional_phase_stage(n, &mut els);
        walsh_hadamard_stage(n, &mut els);
    }
    readout(&mut els);
    Circuit::new(format!("grover{n}"), Some(n), Registry::for_qubits(n)?, els)
}

/// One-to-one optical coding of two-qubit Grover search: every Walsh-Hadamard,
/// the oracle and the conditional phase realised by separate elements.
pub fn build_grover_uncompiled(n: usize, oracle: &OracleSetting) -> Result<Circuit> {
    if n != 2 {
        return invalid(format!("the one-to-one layout is defined for n = 2, got {n}"));
    }
    Ok(build_grover_generic(2, oracle, 1)?.with_name("grover2-uncompiled"))
}

/// Consolidated two-qubit Grover circuit: HWP@22.5, first BS stage, oracle,
/// second BS, a single HWP@45 in path `a` in place of HWP·π_V·HWP, third BS
/// and the remaining −π/2 shifter. The path-`b` waveplate pair and the phase
/// shifters between the second and third BS cancel.
pub fn build_grover_compiled(n: usize, oracle: &OracleSetting) -> Result<Circuit> {
    if n != 2 {
        return invalid(format!("the consolidated layout is defined for n = 2, got {n}"));
    }
    compiled_grover2(oracle.elements(2)?)
}

pub(crate) fn compiled_grover2(oracle_elements: Vec<Element>) -> Result<Circuit> {
    let (a, b) = (0, 1);
    let shift = || Element::phase(-PI / 2.0, ModeSet::path(b));
    let mut els = vec![Element::hwp(22.5, PathSet::one(a)), Element::bs(a, b), shift()];
    els.extend(oracle_elements);
    els.extend([
        shift(),
        Element::bs(a, b),
        Element::hwp(45.0, PathSet::one(a)),
        Element::bs(a, b),
        shift(),
    ]);
    readout(&mut els);
    Circuit::new("grover2-compiled", Some(2), Registry::for_qubits(2)?, els)
}

/// Index just after the HWP@45 of a consolidated two-qubit circuit, where
/// the photon sits at the retro-reflection of the second interferometer.
pub fn retro_reflection_position(c: &Circuit) -> Option<usize> {
    c.elements()
        .iter()
        .rposition(|e| {
            !e.is_oracle()
                && matches!(e.kind, ElementKind::Hwp { theta_deg, .. } if (theta_deg - 45.0).abs() < 1e-9)
        })
        .map(|i| i + 1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::state::{fidelity_up_to_global_phase, BitString, PureState};
    use nalgebra::DVector;

    fn ideal(bits: &str) -> OracleSetting {
        OracleSetting::Ideal(bits.parse().unwrap())
    }

    fn probs(c: &Circuit) -> Vec<f64> {
        detector_probabilities(c, &c.default_input())
            .unwrap()
            .iter()
            .map(|o| o.probability)
            .collect()
    }

    #[test]
    fn post_oracle_state_for_marked_01() {
        let c = build_grover_uncompiled(2, &ideal("01")).unwrap();
        let cut = c.elements().iter().rposition(|e| e.is_oracle()).unwrap() + 1;
        let prefix = c.with_elements(c.elements()[..cut].to_vec()).unwrap();
        let out = simulate(&prefix, &c.default_input()).unwrap();
        let expected = DVector::from_column_slice(&[
            C64::new(0.5, 0.),
            C64::new(-0.5, 0.),
            C64::new(0.5, 0.),
            C64::new(0.5, 0.),
        ]);
        assert!((out.amplitudes() - expected).norm() < 1e-12);
    }

    #[test]
    fn single_query_finds_every_marked_element() {
        for m in BitString::all(2).unwrap() {
            let setting = OracleSetting::Ideal(m);
            for c in [
                build_grover_uncompiled(2, &setting).unwrap(),
                build_grover_compiled(2, &setting).unwrap(),
            ] {
                let p = probs(&c);
                for (i, pi) in p.iter().enumerate() {
                    let want = if i == m.value() { 1.0 } else { 0.0 };
                    assert!((pi - want).abs() < 1e-9, "{} marked {m}: {p:?}", c.name());
                }
            }
        }
    }

    #[test]
    fn three_qubit_distribution() {
        for m in BitString::all(3).unwrap() {
            let c = build_grover_generic(3, &OracleSetting::Ideal(m), 1).unwrap();
            let p = probs(&c);
            for (i, pi) in p.iter().enumerate() {
                let want = if i == m.value() { 25.0 / 32.0 } else { 1.0 / 32.0 };
                assert!((pi - want).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn global_phase_does_not_change_probabilities() {
        let c = build_grover_generic(3, &ideal("110"), 1).unwrap();
        let base = probs(&c);
        let mut els = c.elements().to_vec();
        els.insert(els.len() - 1, Element::phase(1.7, ModeSet::all()));
        let shifted = c.with_elements(els).unwrap();
        for (a, b) in base.iter().zip(probs(&shifted)) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn empty_circuit_is_identity_and_readout_is_required() {
        let reg = Registry::for_qubits(2).unwrap();
        let empty = Circuit::new("empty", Some(2), reg.clone(), vec![]).unwrap();
        let input = PureState::basis(empty.space(), ModeId::new(1, Pol::V)).unwrap();
        assert_eq!(simulate(&empty, &input).unwrap(), input);
        assert!(matches!(detector_probabilities(&empty, &input), Err(Error::InvalidState(_))));

        let direct = Circuit::new("direct", Some(2), reg, vec![Element::pbs(PathSet::All)]).unwrap();
        let uniform = crate::state::uniform_superposition(2).unwrap();
        for o in detector_probabilities(&direct, &uniform).unwrap() {
            assert!((o.probability - 0.25).abs() < 1e-15);
        }
    }

    #[test]
    fn single_hwp_circuit() {
        let reg = Registry::for_qubits(2).unwrap();
        let c = Circuit::new("wh", Some(2), reg, vec![Element::hwp(22.5, PathSet::one(0))]).unwrap();
        let out = simulate(&c, &c.default_input()).unwrap();
        let want = PureState::normalized(
            c.space(),
            DVector::from_column_slice(&[C64::new(1., 0.), C64::new(1., 0.), C64::new(0., 0.), C64::new(0., 0.)]),
        )
        .unwrap();
        assert!((fidelity_up_to_global_phase(&out, &want).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn dimension_and_range_errors() {
        let c = build_grover_compiled(2, &ideal("00")).unwrap();
        let wrong = crate::state::uniform_superposition(3).unwrap();
        assert!(simulate(&c, &wrong).is_err());
        assert!(build_grover_uncompiled(3, &ideal("000")).is_err());
        assert!(build_grover_generic(11, &ideal("00000000000"), 1).is_err());
        assert!(build_grover_generic(1, &ideal("0"), 1).is_err());
        assert!(build_grover_generic(3, &ideal("000"), 0).is_err());
        assert!(build_grover_generic(3, &ideal("00"), 1).is_err());
    }

    #[test]
    fn default_iteration_counts() {
        assert_eq!(default_iterations(2), 1);
        assert_eq!(default_iterations(3), 1);
        assert_eq!(default_iterations(4), 2);
        assert_eq!(default_iterations(10), 13);
    }

    #[test]
    fn detector_numbering_follows_bit_strings() {
        let c = build_grover_compiled(2, &ideal("10")).unwrap();
        let out = detector_probabilities(&c, &c.default_input()).unwrap();
        let labels: Vec<(usize, &str, Pol)> = out.iter().map(|o| (o.detector, o.port.as_str(), o.pol)).collect();
        assert_eq!(labels, [(1, "a", Pol::H), (2, "a", Pol::V), (3, "b", Pol::H), (4, "b", Pol::V)]);
        assert!((out[2].probability - 1.0).abs() < 1e-9);
    }
}
