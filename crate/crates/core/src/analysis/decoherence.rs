//! Adjustable decoherence from a path-length imbalance in the outer
//! interferometer.
//!
//! Light with a Gaussian spectrum and coherence length `L_c` keeps a
//! fraction `γ = exp(−ΔL² / (2 L_c²))` of the coherence between two arms
//! whose lengths differ by `ΔL`.

use nalgebra::DMatrix;

use super::ifm::{ifm_circuit, outcomes_from_probabilities, IfmOutcome, IfmPort, PATH_E};
use crate::error::{invalid, Result};
use crate::oracle::OracleSetting;
use crate::state::{BitString, DensityMatrix, ModeId, StateRef};
use crate::C64;

/// Fraction of inter-arm coherence left for imbalance `delta_l`.
pub fn coherence_factor(delta_l: f64, l_c: f64) -> Result<f64> {
    if !(l_c.is_finite() && l_c > 0.0) {
        return invalid(format!("coherence length must be positive, got {l_c}"));
    }
    if !(delta_l.is_finite() && delta_l >= 0.0) {
        return invalid(format!("path imbalance must be non-negative, got {delta_l}"));
    }
    Ok((-(delta_l * delta_l) / (2.0 * l_c * l_c)).exp())
}

fn damp(rho: &DMatrix<C64>, arm: &[usize], gamma: f64) -> DMatrix<C64> {
    let in_arm = |i: usize| arm.contains(&ModeId::from_index(i).path);
    DMatrix::from_fn(rho.nrows(), rho.ncols(), |i, j| {
        if in_arm(i) != in_arm(j) {
            rho[(i, j)] * gamma
        } else {
            rho[(i, j)]
        }
    })
}

/// Density matrix with the coherences between the modes on `arm` and all
/// other modes scaled by `γ(ΔL, L_c)`; populations are untouched.
pub fn decohere<'a>(state: impl Into<StateRef<'a>>, arm: &[usize], delta_l: f64, l_c: f64) -> Result<DensityMatrix> {
    let gamma = coherence_factor(delta_l, l_c)?;
    let rho = match state.into() {
        StateRef::Pure(s) => s.to_density().matrix().clone(),
        StateRef::Mixed(r) => r.matrix().clone(),
    };
    DensityMatrix::new(damp(&rho, arm, gamma))
}

#[derive(Clone, Debug, PartialEq)]
pub struct DecoheredIfm {
    pub gamma: f64,
    pub outcomes: Vec<IfmOutcome>,
    /// `|P(port 1) − P(port 2)| / (P(port 1) + P(port 2))`.
    pub visibility: f64,
}

impl DecoheredIfm {
    pub fn probability(&self, port: IfmPort) -> f64 {
        self.outcomes.iter().filter(|o| o.port == port).map(|o| o.probability).sum()
    }
}

/// Interaction-free readout with the empty arm detuned by `delta_l`.
pub fn ifm_with_decoherence(marked: &BitString, delta_l: f64, l_c: f64) -> Result<DecoheredIfm> {
    let c = ifm_circuit(&OracleSetting::Ideal(*marked))?;
    let els = c.elements();
    // the last two elements are the output beamsplitter and the readout
    let split = els.len() - 2;
    let inner = c.with_elements(els[..split].to_vec())?;
    let outer = c.with_elements(els[split..].to_vec())?;
    let psi = crate::circuit::simulate(&inner, &c.default_input())?;
    let rho = decohere(&psi, &[PATH_E], delta_l, l_c)?;
    let u = outer.unitary();
    let out = DensityMatrix::new(&u * rho.matrix() * u.adjoint())?;
    let outcomes = outcomes_from_probabilities(&out.populations());
    let gamma = coherence_factor(delta_l, l_c)?;
    let p1: f64 = outcomes.iter().filter(|o| o.port == IfmPort::Port1).map(|o| o.probability).sum();
    let p2: f64 = outcomes.iter().filter(|o| o.port == IfmPort::Port2).map(|o| o.probability).sum();
    let visibility = if p1 + p2 > 0.0 { (p1 - p2).abs() / (p1 + p2) } else { 0.0 };
    Ok(DecoheredIfm { gamma, outcomes, visibility })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DecoherencePoint {
    /// `ΔL / L_c`.
    pub ratio: f64,
    pub gamma: f64,
    pub visibility: f64,
}

/// Visibility of the outer interferometer at each `ΔL / L_c`.
pub fn decohere_sweep(marked: &BitString, ratios: &[f64]) -> Result<Vec<DecoherencePoint>> {
    ratios
        .iter()
        .map(|&ratio| {
            let r = ifm_with_decoherence(marked, ratio, 1.0)?;
            Ok(DecoherencePoint { ratio, gamma: r.gamma, visibility: r.visibility })
        })
        .collect()
}
