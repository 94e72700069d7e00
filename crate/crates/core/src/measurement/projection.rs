use std::f64::consts::{FRAC_1_SQRT_2, PI};

use serde::{Deserialize, Serialize};

use crate::protocol::{half_periods, HybridState, PhysParams};
use crate::qcore::fock::displacement_matrix;
use crate::qcore::Sign;
use crate::{Error, Result, C64};

/// Optical term `amp · |k>_A |b>_B` left after the mirror readout.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OpticalBranch {
    pub k: usize,
    pub qubit: Sign,
    pub amp: C64,
}

/// Result of reading the mirror position at a multiple of half a period.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PositionOutcome {
    /// readout value, m
    pub y: f64,
    /// probability density of `y`, 1/m
    pub density: f64,
    /// posterior mean of the true mirror position, m
    pub estimate: f64,
    /// per-photon standard deviation of the phase left after feedback, rad
    pub phase_std: f64,
    pub n_half_periods: u64,
    /// optical state with branch phases `e^{i Im(α_k) x̂/x0}` at the
    /// estimated position `x̂`
    pub branches: Vec<OpticalBranch>,
}

/// Posterior shrinkage `x0²/(x0² + dx²)` of a readout on the ground-state
/// mirror.
fn shrinkage(params: &PhysParams) -> f64 {
    let x0 = params.x0();
    x0 * x0 / (x0 * x0 + params.dx * params.dx)
}

/// Residual phase per photon after feedback on the posterior mean:
/// `g0τ·(dx/x0)/√(1 + (dx/x0)²)`.
pub fn residual_phase_std(params: &PhysParams) -> f64 {
    let r = params.dx / params.x0();
    params.coupling() * r / (1.0 + r * r).sqrt()
}

/// Readout imprecision `dx` that leaves a residual phase `phase_std`.
pub fn readout_for_phase_std(params: &PhysParams, phase_std: f64) -> Result<f64> {
    let q = phase_std / params.coupling();
    if !(0.0..1.0).contains(&q) {
        return Err(crate::invalid(
            "phase_std",
            format!("must lie in [0, g0*tau) = [0, {}), got {phase_std}", params.coupling()),
        ));
    }
    Ok(params.x0() * q / (1.0 - q * q).sqrt())
}

/// Project the mirror on readout value `y` at `t = n·π/ωm`.
pub fn project_position(state: &HybridState, y: f64, params: &PhysParams) -> Result<PositionOutcome> {
    let n = half_periods(state.time, state.omega_m).ok_or(Error::NotHalfPeriod { time: state.time })?;
    if !y.is_finite() {
        return Err(crate::invalid("y", "must be finite"));
    }
    let x0 = params.x0();
    let var = x0 * x0 + params.dx * params.dx;
    let density = (-0.5 * y * y / var).exp() / (2.0 * PI * var).sqrt();
    let estimate = shrinkage(params) * y;
    let branches = state
        .branches
        .iter()
        .map(|b| OpticalBranch {
            k: b.k,
            qubit: b.qubit,
            amp: b.amp * C64::from_polar(1.0, b.mech.alpha().im * estimate / x0),
        })
        .collect();
    Ok(PositionOutcome {
        y,
        density,
        estimate,
        phase_std: residual_phase_std(params),
        n_half_periods: n,
        branches,
    })
}

impl PositionOutcome {
    /// Remove the phases `e^{i Im(α_k) x̂/x0}` with the feedback loop, apply
    /// `D(−β)` to A and return amplitudes on `|m>_A |n>_B` for
    /// `m < a_dim`, `n ∈ {0, 1}`, indexed `2m + n`.
    pub fn feedback_and_undisplace(&self, state: &HybridState, x0: f64, a_dim: usize) -> Vec<C64> {
        let kmax = self.branches.iter().map(|b| b.k).max().unwrap_or(0);
        // A-amplitudes per B Fock component
        let mut a_vec = vec![[C64::new(0.0, 0.0); 2]; kmax + 1];
        for (ob, hb) in self.branches.iter().zip(&state.branches) {
            let undo = C64::from_polar(1.0, -hb.mech.alpha().im * self.estimate / x0);
            let amp = ob.amp * undo;
            // |±> = (|0> ± |1>)/√2
            a_vec[ob.k][0] += amp * FRAC_1_SQRT_2;
            a_vec[ob.k][1] += amp * FRAC_1_SQRT_2 * ob.qubit.value();
        }
        let dim = (kmax + 1).max(a_dim);
        let d = displacement_matrix(C64::new(-state.beta, 0.0), dim);
        let mut out = vec![C64::new(0.0, 0.0); 2 * a_dim];
        for m in 0..a_dim {
            for (k, comps) in a_vec.iter().enumerate() {
                for (nb, c) in comps.iter().enumerate() {
                    out[2 * m + nb] += d[(m, k)] * c;
                }
            }
        }
        out
    }
}
