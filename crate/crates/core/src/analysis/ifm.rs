//! Interaction-free readout: the whole two-qubit search circuit, without its
//! PBS readout, sits in one arm of an outer Mach-Zehnder interferometer.
//!
//! The outer interferometer joins path `a` of the search circuit with an
//! empty arm `e`. Its output on `a` is port 1 and on `e` port 2; the search
//! circuit's own path `b` leaves by a third port. The empty arm carries a
//! phase chosen so that port 2 is dark when the oracle marks `00`.

use std::fmt;

use crate::circuit::{compiled_grover2, simulate, Circuit, Registry};
use crate::elements::{Element, ElementKind, ModeSet, PathSet};
use crate::error::Result;
use crate::oracle::OracleSetting;
use crate::state::{BitString, ModeId, Pol};

pub(crate) const PATH_A: usize = 0;
pub(crate) const PATH_E: usize = 2;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum IfmPort {
    /// Outer interferometer output on the search circuit's path `a`.
    Port1,
    /// Outer interferometer output on the empty arm, dark for `00`.
    Port2,
    /// The search circuit's path `b`, which bypasses the outer beamsplitter.
    Other,
}

impl IfmPort {
    pub(crate) fn of_path(p: usize) -> IfmPort {
        match p {
            PATH_A => IfmPort::Port1,
            PATH_E => IfmPort::Port2,
            _ => IfmPort::Other,
        }
    }
}

impl fmt::Display for IfmPort {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            IfmPort::Port1 => "port1",
            IfmPort::Port2 => "port2",
            IfmPort::Other => "other",
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct IfmOutcome {
    pub port: IfmPort,
    pub pol: Pol,
    pub probability: f64,
    /// For port 2 clicks: `Some(false)` for H, which only the empty arm can
    /// deliver, and `Some(true)` for V, which only the search circuit can.
    pub computer_ran: Option<bool>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct IfmResult {
    pub marked: BitString,
    pub outcomes: Vec<IfmOutcome>,
}

impl IfmResult {
    pub fn probability(&self, port: IfmPort, pol: Option<Pol>) -> f64 {
        self.outcomes
            .iter()
            .filter(|o| o.port == port && pol.is_none_or(|p| p == o.pol))
            .map(|o| o.probability)
            .sum()
    }

    /// Probability that the previously dark port fires.
    pub fn dark_port_fires(&self) -> f64 {
        self.probability(IfmPort::Port2, None)
    }

    /// Port 2 click certifying that the photon never entered the search
    /// circuit.
    pub fn counterfactual(&self) -> f64 {
        self.probability(IfmPort::Port2, Some(Pol::H))
    }

    pub fn total(&self) -> f64 {
        self.outcomes.iter().map(|o| o.probability).sum()
    }
}

/// The marks-`00` setting of the same oracle family, used to tune the arm.
fn reference_setting(setting: &OracleSetting) -> Result<OracleSetting> {
    Ok(match setting {
        OracleSetting::Ideal(_) => OracleSetting::Ideal(BitString::new(0, 2)?),
        OracleSetting::ElectroOptic { .. } => OracleSetting::electro_optic_settings()[0],
    })
}

/// Outer-interferometer circuit on paths `a, b, e` for an oracle setting.
pub fn ifm_circuit(setting: &OracleSetting) -> Result<Circuit> {
    let search = |s: &OracleSetting| -> Result<Vec<Element>> {
        Ok(compiled_grover2(s.elements(2)?)?
            .elements()
            .iter()
            .filter(|e| !matches!(e.kind, ElementKind::Pbs { .. }))
            .cloned()
            .collect())
    };
    // phase on the empty arm that cancels the search output at port 2
    let reference = search(&reference_setting(setting)?)?;
    let grover = Circuit::new("reference", Some(2), Registry::for_qubits(2)?, reference)?;
    let c = simulate(&grover, &grover.default_input())?.amplitude(ModeId::new(0, Pol::H));
    let phi = (-c).arg();

    let mut els = vec![Element::bs(PATH_A, PATH_E)];
    els.extend(search(setting)?);
    els.push(Element::phase(phi, ModeSet::path(PATH_E)));
    els.push(Element::bs(PATH_A, PATH_E));
    els.push(Element::pbs(PathSet::All));
    let reg = Registry::new(["a", "b", "e"].map(String::from).to_vec())?;
    Circuit::new(format!("ifm-{setting}"), None, reg, els)
}

pub(crate) fn outcomes_from_probabilities(probs: &[f64]) -> Vec<IfmOutcome> {
    probs
        .iter()
        .enumerate()
        .map(|(i, &probability)| {
            let mode = ModeId::from_index(i);
            let port = IfmPort::of_path(mode.path);
            IfmOutcome {
                port,
                pol: mode.pol,
                probability,
                computer_ran: (port == IfmPort::Port2).then_some(mode.pol == Pol::V),
            }
        })
        .collect()
}

/// Joint outcome probabilities for a single H photon entering path `a`.
pub fn ifm_simulate(marked: &BitString) -> Result<IfmResult> {
    let c = ifm_circuit(&OracleSetting::Ideal(*marked))?;
    let out = simulate(&c, &c.default_input())?;
    Ok(IfmResult {
        marked: *marked,
        outcomes: outcomes_from_probabilities(&out.probabilities()),
    })
}
