//! Independent checks of the optical simulation and the studies built on it:
//! trajectory sums, the abstract Grover iteration, interaction-free
//! measurement, decoherence and an entanglement measure.

pub mod decoherence;
pub mod grover;
pub mod ifm;
pub mod pathsum;

pub use decoherence::{coherence_factor, decohere, decohere_sweep, ifm_with_decoherence, DecoherencePoint, DecoheredIfm};
pub use grover::{abstract_grover_simulate, grover_success_closed_form, iteration_choices, IterationChoices};
pub use ifm::{ifm_circuit, ifm_simulate, IfmOutcome, IfmPort, IfmResult};
pub use pathsum::{oracle_mode_coefficients, path_contributions, path_sum_probability, PathContribution};

use crate::error::{invalid, Result};
use crate::state::{partial_trace, PureState, Subsystem};

/// Linear entropy `2(1 − Tr ρ²)` of the polarization reduction of a
/// two-qubit state: 0 for product states, 1 for maximally entangled ones.
/// Both reductions of a pure state have the same purity.
pub fn entanglement_witness(state: &PureState) -> Result<f64> {
    if state.space().paths() != 2 {
        return invalid(format!(
            "entanglement witness needs a two-path state, got {} paths",
            state.space().paths()
        ));
    }
    let rho = partial_trace(state, Subsystem::Polarization)?;
    Ok(2.0 * (1.0 - rho.purity()))
}
