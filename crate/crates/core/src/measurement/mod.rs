//! Measurement statistics: B-homodyne and mirror-position correlations, the
//! conditional optical state after a position readout, and the interference
//! visibility with its negativity bound.

mod correlations;
mod phase;
mod projection;
mod visibility;

pub use correlations::{
    closed_form_result, correlation_closed_form, correlations, homodyne_overlap, homodyne_sign_probability,
    joint_probabilities_exact, position_std, CorrelationMethod, CorrelationResult, MethodChoice, EXACT_BETA_LIMIT,
};
pub use phase::{phase_moments, GaussianPointer, PhaseMoments, PhaseNoise, Pointer, Route, MAX_FFT};
pub use projection::{project_position, readout_for_phase_std, residual_phase_std, OpticalBranch, PositionOutcome};
pub use visibility::{
    interference_from_moments, negativity_lower_bound, visibility_expansion, visibility_pipeline,
    visibility_with_route, InterferenceResult,
};
