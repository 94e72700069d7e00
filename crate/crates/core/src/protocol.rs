//! Device parameters, the displaced single-photon input state and the
//! impulsive optomechanical kick.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::constants::HBAR;
use crate::qcore::{coherent_overlap, displaced_amplitudes, CoherentLabel, DensityMatrix, Sign};
use crate::{Error, Result, C64};

/// Relative tolerance used when checking that a time sits on a quarter or
/// half mechanical period.
pub const PERIOD_TOL: f64 = 1e-9;

/// Optical cavity from which `g0` can be derived.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Cavity {
    /// optical angular frequency, rad/s
    pub omega_c: f64,
    /// cavity length, m
    pub length: f64,
}

/// Device and protocol scalars, SI units throughout.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhysParams {
    /// single-photon coupling, rad/s
    pub g0: f64,
    /// mechanical angular frequency, rad/s
    pub omega_m: f64,
    /// pulse duration, s
    pub tau: f64,
    pub beta: f64,
    /// cavity decay rate, rad/s
    pub kappa: f64,
    /// effective mass, kg
    pub mass: f64,
    pub q_m: f64,
    /// bath temperature, K
    pub temperature: f64,
    pub n_th: f64,
    /// position readout imprecision (standard deviation), m
    pub dx: f64,
    /// photons in the readout pulse
    pub n_p: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cavity: Option<Cavity>,
}

impl PhysParams {
    pub fn x0(&self) -> f64 {
        self.x0_with(HBAR)
    }

    pub fn p0(&self) -> f64 {
        self.p0_with(HBAR)
    }

    pub fn x0_with(&self, hbar: f64) -> f64 {
        (hbar / (2.0 * self.mass * self.omega_m)).sqrt()
    }

    pub fn p0_with(&self, hbar: f64) -> f64 {
        (hbar * self.mass * self.omega_m / 2.0).sqrt()
    }

    /// Kick strength `g0·τ`.
    pub fn coupling(&self) -> f64 {
        self.g0 * self.tau
    }

    /// `g0·τ·β`, the macroscopicity parameter.
    pub fn g_tau_beta(&self) -> f64 {
        self.g0 * self.tau * self.beta
    }

    pub fn period(&self) -> f64 {
        2.0 * PI / self.omega_m
    }

    /// `(ωc/L)·x0` when a cavity is attached.
    pub fn cavity_coupling(&self) -> Option<f64> {
        self.cavity.map(|c| c.omega_c / c.length * self.x0())
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("omega_m", self.omega_m),
            ("tau", self.tau),
            ("kappa", self.kappa),
            ("mass", self.mass),
            ("q_m", self.q_m),
            ("temperature", self.temperature),
            ("n_p", self.n_p),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(crate::invalid(name, format!("must be finite and > 0, got {v}")));
            }
        }
        for (name, v) in [("g0", self.g0), ("beta", self.beta), ("n_th", self.n_th), ("dx", self.dx)] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(crate::invalid(name, format!("must be finite and >= 0, got {v}")));
            }
        }
        if let Some(c) = self.cavity {
            if !(c.omega_c > 0.0 && c.length > 0.0 && c.omega_c.is_finite() && c.length.is_finite()) {
                return Err(crate::invalid("cavity", "omega_c and length must be > 0"));
            }
        }
        Ok(())
    }

    /// Soft warnings that do not invalidate a run.
    pub fn warnings(&self) -> Vec<String> {
        let mut w = Vec::new();
        if self.omega_m * self.tau > 0.1 {
            w.push(format!(
                "omega_m*tau = {:.3} is not deep in the pulsed regime",
                self.omega_m * self.tau
            ));
        }
        w
    }

    /// The proposed device: 20 kHz, 60 ng mirror, `g0/ωm = 5e-3`, 60 ns
    /// pulses, `β = 4e4`, `κ = 2π·2 MHz`, 800 mK bath with `Q_m = 1e6`.
    pub fn reference_device() -> Self {
        let omega_m = 2.0 * PI * 20e3;
        PhysParams {
            g0: 5e-3 * omega_m,
            omega_m,
            tau: 60e-9,
            beta: 4e4,
            kappa: 2.0 * PI * 2e6,
            mass: 60e-12,
            q_m: 1e6,
            temperature: 0.8,
            n_th: 0.0,
            dx: 0.0,
            n_p: 3.9e9,
            cavity: None,
        }
    }

    /// Same device with `g0` set so that `g0·τ·β` equals `value`.
    pub fn with_g_tau_beta(self, value: f64) -> Self {
        PhysParams {
            g0: value / (self.tau * self.beta),
            ..self
        }
    }
}

/// One term `amp · |k>_A |b>_B |mech>_M` of the hybrid state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Branch {
    pub k: usize,
    /// `|±>` label of mode B
    pub qubit: Sign,
    pub amp: C64,
    pub mech: CoherentLabel,
}

/// Optical photon number, B qubit and mirror, with the mirror kept as
/// coherent labels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HybridState {
    pub branches: Vec<Branch>,
    /// time since the kick, s
    pub time: f64,
    /// `g0·τ` used for the kick
    pub coupling: f64,
    pub omega_m: f64,
    pub beta: f64,
}

/// The kick label `α(t) = −i·g0τ·e^{−iωm t}` for a single photon.
pub fn kick_label(coupling: f64, omega_m: f64, t: f64) -> CoherentLabel {
    CoherentLabel(C64::new(0.0, -coupling) * C64::from_polar(1.0, -omega_m * t))
}

/// `(D(β)|+>_A|−>_B − D(β)|−>_A|+>_B)/√2` expanded over photon numbers, with
/// the mirror in its ground state.
pub fn prepare_input(params: &PhysParams, kmax: usize) -> Result<HybridState> {
    let plus = displaced_amplitudes(params.beta, Sign::Plus, kmax)?;
    let minus = displaced_amplitudes(params.beta, Sign::Minus, kmax)?;
    let mut branches = Vec::with_capacity(2 * (kmax + 1));
    for k in 0..=kmax {
        branches.push(Branch {
            k,
            qubit: Sign::Minus,
            amp: C64::new(plus[k] * FRAC_1_SQRT_2, 0.0),
            mech: CoherentLabel::VACUUM,
        });
        branches.push(Branch {
            k,
            qubit: Sign::Plus,
            amp: C64::new(-minus[k] * FRAC_1_SQRT_2, 0.0),
            mech: CoherentLabel::VACUUM,
        });
    }
    Ok(HybridState {
        branches,
        time: 0.0,
        coupling: params.coupling(),
        omega_m: params.omega_m,
        beta: params.beta,
    })
}

/// Apply the kick (at `t = 0`) and free mechanical rotation up to time `t`.
pub fn evolve(state: &HybridState, t: f64) -> Result<HybridState> {
    if !(t.is_finite() && t >= 0.0) {
        return Err(crate::invalid("t", format!("must be finite and >= 0, got {t}")));
    }
    let alpha = kick_label(state.coupling, state.omega_m, t);
    let branches = state
        .branches
        .iter()
        .map(|b| Branch {
            mech: alpha.scaled(b.k as f64),
            ..*b
        })
        .collect();
    Ok(HybridState {
        branches,
        time: t,
        ..state.clone()
    })
}

impl HybridState {
    /// `<self|other>` including mirror overlaps.
    pub fn inner_product(&self, other: &HybridState) -> C64 {
        let mut acc = C64::new(0.0, 0.0);
        for a in &self.branches {
            for b in &other.branches {
                if a.k == b.k && a.qubit == b.qubit {
                    acc += a.amp.conj() * b.amp * coherent_overlap(a.mech, b.mech);
                }
            }
        }
        acc
    }

    pub fn norm_sqr(&self) -> f64 {
        self.inner_product(self).re
    }

    /// Branches whose optical part belongs to `D(β)|family>_A` (B carries the
    /// opposite sign).
    pub fn family(&self, family: Sign) -> HybridState {
        HybridState {
            branches: self.branches.iter().filter(|b| b.qubit == family.flip()).copied().collect(),
            ..self.clone()
        }
    }

    /// Overlap of the two optical families with the B label stripped, each
    /// normalized to one.
    pub fn family_overlap(&self) -> C64 {
        let p = self.family(Sign::Plus);
        let m = self.family(Sign::Minus);
        let mut acc = C64::new(0.0, 0.0);
        for a in &p.branches {
            for b in m.branches.iter().filter(|b| b.k == a.k) {
                acc += a.amp.conj() * b.amp * coherent_overlap(a.mech, b.mech);
            }
        }
        acc * 2.0
    }

    /// Mean photon number in A.
    pub fn photon_mean(&self) -> f64 {
        self.branches.iter().map(|b| b.k as f64 * b.amp.norm_sqr()).sum()
    }

    pub fn kmax(&self) -> usize {
        self.branches.iter().map(|b| b.k).max().unwrap_or(0)
    }

    /// `ρ_AB` after tracing the mirror, on `A ⊗ B` with A truncated to
    /// `kdim` photon numbers and B in the `{|+>, |−>}` basis. The result is
    /// renormalized over the kept block.
    pub fn reduced_optical(&self, kdim: usize) -> Result<DensityMatrix> {
        let idx = |b: &Branch| b.k * 2 + usize::from(b.qubit == Sign::Minus);
        let dim = 2 * kdim;
        let mut rho = DMatrix::<C64>::zeros(dim, dim);
        for a in self.branches.iter().filter(|b| b.k < kdim) {
            for b in self.branches.iter().filter(|b| b.k < kdim) {
                rho[(idx(a), idx(b))] += a.amp * b.amp.conj() * coherent_overlap(b.mech, a.mech);
            }
        }
        let tr = rho.trace().re;
        if tr <= 0.0 {
            return Err(Error::InvalidState("empty optical block".into()));
        }
        DensityMatrix::new(rho / C64::new(tr, 0.0))
    }
}

/// Photon-number mixture of mirror states for one optical family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MechMarginal {
    pub weights: Vec<(usize, f64)>,
    pub labels: Vec<CoherentLabel>,
    /// m
    pub mean_position: f64,
    /// m²
    pub variance: f64,
}

/// `ρ_M^(±)` at a quarter period: weights `|a^(±)(k)|²`, labels `−g0τk`.
pub fn mech_marginals(state: &HybridState, params: &PhysParams) -> Result<(MechMarginal, MechMarginal)> {
    if !at_quarter_period(state.time, state.omega_m) {
        return Err(Error::NotQuarterPeriod { time: state.time });
    }
    let x0 = params.x0();
    let build = |family: Sign| {
        let fam = state.family(family);
        let total: f64 = fam.branches.iter().map(|b| b.amp.norm_sqr()).sum();
        let weights: Vec<(usize, f64)> = fam.branches.iter().map(|b| (b.k, b.amp.norm_sqr() / total)).collect();
        let labels: Vec<CoherentLabel> = fam.branches.iter().map(|b| b.mech).collect();
        let mean: f64 = weights
            .iter()
            .zip(&labels)
            .map(|((_, w), l)| w * l.position_mean(x0))
            .sum();
        let spread: f64 = weights
            .iter()
            .zip(&labels)
            .map(|((_, w), l)| w * (l.position_mean(x0) - mean).powi(2))
            .sum();
        MechMarginal {
            weights,
            labels,
            mean_position: mean,
            variance: x0 * x0 + spread,
        }
    };
    Ok((build(Sign::Plus), build(Sign::Minus)))
}

/// `−g0τ·x0·(1+2β²)`, the mirror mean position a quarter period after the kick.
pub fn ensemble_mean_position(params: &PhysParams) -> f64 {
    -params.coupling() * params.x0() * (1.0 + 2.0 * params.beta * params.beta)
}

fn phase_multiple(time: f64, omega_m: f64, unit: f64) -> (f64, f64) {
    let r = omega_m * time / unit;
    (r, r.round())
}

/// `ωm·t ≡ π/2 (mod 2π)`.
pub fn at_quarter_period(time: f64, omega_m: f64) -> bool {
    let (r, _) = phase_multiple(time - PI / (2.0 * omega_m), omega_m, 2.0 * PI);
    (r - r.round()).abs() <= PERIOD_TOL * r.abs().max(1.0)
}

/// Number of half periods in `time`, if it is an integer multiple.
pub fn half_periods(time: f64, omega_m: f64) -> Option<u64> {
    let (r, n) = phase_multiple(time, omega_m, PI);
    ((r - n).abs() <= PERIOD_TOL * r.abs().max(1.0) && n >= 0.0).then_some(n as u64)
}
