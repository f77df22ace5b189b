//! Simulation and compilation of linear-optical quantum circuits in which a
//! single photon carries several qubits: one in its polarization and the rest
//! in which spatial path it occupies.
//!
//! The crate is organised bottom-up:
//!
//! * [`state`] - mode space, pure and mixed states, partial traces.
//! * [`elements`] - optical components (waveplates, beamsplitters, phase
//!   shifters, polarizing beamsplitters, rotators, Pockels cells and liquid
//!   crystal retarders) and their unitaries.
//! * [`circuit`] - the circuit IR, Grover search builders and the simulator.
//! * [`format`] - the line-oriented circuit file format.
//! * [`compiler`] - the peephole optimizer with equivalence certification.
//! * [`oracle`] - ideal and electro-optic oracles and the phase-noise model.
//! * [`analysis`] - path-sum evaluation, abstract Grover iteration,
//!   interaction-free measurement, decoherence and entanglement diagnostics.

pub mod analysis;
pub mod circuit;
pub mod compiler;
pub mod elements;
pub mod error;
pub mod format;
pub mod oracle;
pub mod state;

pub use circuit::{Circuit, DetectorOutcome, Registry};
pub use elements::{Element, ElementKind, ModeSet, PathSet, PolSel, Role};
pub use error::{Error, Result};
pub use state::{BitString, DensityMatrix, ModeId, ModeSpace, Pol, PureState, Subsystem};

/// Complex scalar used throughout.
pub type C64 = num_complex::Complex64;

/// Tolerance for algebraic identities (single elements, rule instances).
pub const ALGEBRAIC_TOL: f64 = 1e-12;

/// Tolerance for end-to-end circuit comparisons.
pub const CIRCUIT_TOL: f64 = 1e-9;

/// Largest of `values`; a NaN makes the result infinite so that tolerance
/// checks fail instead of silently passing.
pub(crate) fn max_or_inf(values: impl IntoIterator<Item = f64>) -> f64 {
    values
        .into_iter()
        .fold(0.0, |acc, d| if d.is_nan() { f64::INFINITY } else { acc.max(d) })
}
