use serde::{Deserialize, Serialize};

use super::phase::{phase_moments, PhaseMoments, PhaseNoise, Pointer, Route};
use super::projection::residual_phase_std;
use crate::protocol::PhysParams;
use crate::{Error, Result};

/// Interference statistics after readout, feedback and `D(−β)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InterferenceResult {
    /// `2|<01|ρ_AB|10>|`
    pub visibility: f64,
    /// fringe contrast `2|<01|ρ|10>| / (p01 + p10)` of the phase-averaged state
    pub fringe_visibility: f64,
    /// fringe contrast with the phase tracked shot by shot, averaged over φ
    pub phase_tracked_visibility: f64,
    /// detection probabilities normalized in the ≤1-photon-per-mode block
    pub p00: f64,
    pub p01: f64,
    pub p10: f64,
    pub p11: f64,
    /// weight of the ≤1-photon-per-mode block
    pub subspace_probability: f64,
    pub negativity_lb: f64,
    /// residual per-photon phase from the readout, rad
    pub phase_std: f64,
    /// estimated absolute error of the phase averages
    pub uncertainty: f64,
}

/// `½(√((p00−p11)² + (V(p01+p10))²) − (p00+p11))`, floored at zero.
pub fn negativity_lower_bound(p00: f64, p01: f64, p10: f64, p11: f64, visibility: f64) -> f64 {
    let a = p00 - p11;
    let b = visibility * (p01 + p10);
    (0.5 * ((a * a + b * b).sqrt() - (p00 + p11))).max(0.0)
}

/// Visibility pipeline for the device, with optional extra phase noise
/// (for example a decoherence pointer).
pub fn visibility_pipeline(params: &PhysParams, extra: Option<&dyn Pointer>) -> Result<InterferenceResult> {
    let route = if extra.is_some() && params.beta <= 2000.0 {
        Route::XSpace
    } else {
        Route::PhiSpace
    };
    visibility_with_route(params, extra, route)
}

pub fn visibility_with_route(
    params: &PhysParams,
    extra: Option<&dyn Pointer>,
    route: Route,
) -> Result<InterferenceResult> {
    params.validate()?;
    let phase_std = residual_phase_std(params);
    let noise = PhaseNoise {
        readout_std: phase_std,
        pointer: extra,
    };
    let m = phase_moments(params.beta, &noise, route)?;
    interference_from_moments(&m, phase_std)
}

/// Assemble detection statistics from phase averages.
pub fn interference_from_moments(m: &PhaseMoments, phase_std: f64) -> Result<InterferenceResult> {
    // unnormalized block entries
    let p00 = 0.5 * m.ue;
    let p11 = p00;
    let p10 = 0.5 * m.we;
    let p01 = 0.5 * m.e;
    let block = p00 + p11 + p10 + p01;
    let coh = m.coherence.norm();
    if coh > 1.0 + 1e-9 || m.tracked_deficit < -1e-9 {
        return Err(Error::Consistency(format!(
            "visibility {coh} outside [0, 1] (tracked deficit {})",
            m.tracked_deficit
        )));
    }
    if block <= 0.0 {
        return Err(Error::Consistency("empty single-photon block".into()));
    }
    let fringe = (coh / (p01 + p10)).min(1.0);
    // the bound on the unnormalized block is the block weight times the
    // bound on the normalized one
    let nlb = negativity_lower_bound(p00, p01, p10, p11, fringe);
    Ok(InterferenceResult {
        visibility: coh.min(1.0),
        fringe_visibility: fringe,
        phase_tracked_visibility: 1.0 - m.tracked_deficit.max(0.0),
        p00: p00 / block,
        p01: p01 / block,
        p10: p10 / block,
        p11: p11 / block,
        subspace_probability: block,
        negativity_lb: nlb,
        phase_std,
        uncertainty: m.uncertainty,
    })
}

/// `1 − (3/2)(δφ β)⁴`, the small-imprecision expansion.
pub fn visibility_expansion(params: &PhysParams) -> f64 {
    1.0 - 1.5 * (residual_phase_std(params) * params.beta).powi(4)
}
