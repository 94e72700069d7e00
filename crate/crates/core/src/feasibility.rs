//! Device-design arithmetic: derived scales, error budgets, constraint flags
//! and decoherence testability.

use std::collections::BTreeMap;
use std::f64::consts::LN_2;

use serde::{Deserialize, Serialize};

use crate::constants::{Constants, BOLTZMANN, HBAR, SPEED_OF_LIGHT};
use crate::decoherence::{deficit_at_time, rate, DecoherenceModel, ModelKind, CLOSED_FORM_LIMIT};
use crate::measurement::{correlation_closed_form, residual_phase_std};
use crate::protocol::PhysParams;
use crate::{Error, Result};

/// Photons per second that can be homodyned at 10 mW before saturation,
/// so that `N_p ≤ SATURATION_RATE/κ`.
pub const SATURATION_RATE: f64 = 5e16;

/// `κ = πc/(2LF)`, half-width convention.
pub fn kappa_from_finesse(length: f64, finesse: f64) -> f64 {
    std::f64::consts::PI * SPEED_OF_LIGHT / (2.0 * length * finesse)
}

/// `g0 = (ωc/L)·√(ħ/(2Mωm))`.
pub fn coupling_from_cavity(omega_c: f64, length: f64, mass: f64, omega_m: f64) -> f64 {
    omega_c / length * (HBAR / (2.0 * mass * omega_m)).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FeasibilityOptions {
    /// margin used for "≫" and "≪" constraints
    pub threshold_factor: f64,
    /// tie `τ = ln2/κ` to the readout pulse
    pub single_local_oscillator: bool,
    /// half periods used in the EID temperature condition
    pub n_half_periods: u32,
}

impl Default for FeasibilityOptions {
    fn default() -> Self {
        FeasibilityOptions {
            threshold_factor: 10.0,
            single_local_oscillator: false,
            n_half_periods: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstraintFlag {
    pub name: String,
    pub passed: bool,
    pub value: f64,
    pub threshold: f64,
    pub requirement: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeasibilityReport {
    /// coupling actually used, rad/s
    pub g0: f64,
    /// pulse duration actually used, s
    pub tau: f64,
    pub x0: f64,
    pub p0: f64,
    pub g0_over_omega_m: f64,
    /// `4 g0τβ`
    pub macroscopicity: f64,
    pub correlation_target: f64,
    /// nonlinear-response deficit `(g0τβ)⁶ ωm²/(g0β)²`
    pub epsilon_nl: f64,
    /// readout-imprecision deficit `(3/2)(δφ β)⁴`
    pub epsilon_bar: f64,
    /// physical readout standard deviation over `x0`
    pub dx_over_x0: f64,
    pub n_eff: f64,
    pub np_max: f64,
    /// EID temperature ceiling for the configured number of half periods, K
    pub eid_condition_t_max: f64,
    /// `1/γ(2 g0τβ x0)` per model, s
    pub timescales: BTreeMap<String, f64>,
    pub constraint_flags: Vec<ConstraintFlag>,
}

impl FeasibilityReport {
    pub fn all_passed(&self) -> bool {
        self.constraint_flags.iter().all(|f| f.passed)
    }
}

/// Fill in `g0` from the cavity and `τ` from `κ` where requested.
pub fn resolve(params: &PhysParams, options: &FeasibilityOptions) -> Result<PhysParams> {
    let mut p = *params;
    if options.single_local_oscillator {
        p.tau = LN_2 / p.kappa;
    }
    if let Some(c) = p.cavity {
        let derived = coupling_from_cavity(c.omega_c, c.length, p.mass, p.omega_m);
        if p.g0 == 0.0 {
            p.g0 = derived;
        } else if (p.g0 / derived - 1.0).abs() > 0.01 {
            return Err(Error::Inconsistent(format!(
                "g0 = {} disagrees with the cavity value {derived}",
                p.g0
            )));
        }
    }
    p.validate()?;
    Ok(p)
}

/// Readout precision `δx/x0 = √2 κ/(√5 g0 √N_p)` of a pulse of duration
/// `ln2/κ`; the `√2` converts the dimensionless quadrature spread to meters
/// in units of `x0`.
pub fn readout_precision(params: &PhysParams) -> f64 {
    2f64.sqrt() * params.kappa / (5f64.sqrt() * params.g0 * params.n_p.sqrt())
}

/// `½(√(1 + κ⁴/(g0⁴N_p²)) − 1)` after two cooling pulses.
pub fn effective_occupation(params: &PhysParams) -> f64 {
    let r = params.kappa.powi(2) / (params.g0.powi(2) * params.n_p);
    0.5 * ((1.0 + r * r).sqrt() - 1.0)
}

pub fn derive(params: &PhysParams, options: &FeasibilityOptions) -> Result<FeasibilityReport> {
    if !(options.threshold_factor.is_finite() && options.threshold_factor >= 1.0) {
        return Err(crate::invalid("threshold_factor", "must be >= 1"));
    }
    if options.n_half_periods == 0 {
        return Err(crate::invalid("n_half_periods", "must be >= 1"));
    }
    let p = resolve(params, options)?;
    let f = options.threshold_factor;
    let gtb = p.g_tau_beta();
    let gb = p.g0 * p.beta;
    let epsilon_nl = if gb > 0.0 {
        gtb.powi(6) * p.omega_m.powi(2) / (gb * gb)
    } else {
        0.0
    };
    let dx_over_x0 = if p.g0 > 0.0 { readout_precision(&p) } else { f64::INFINITY };
    let at_readout = PhysParams {
        dx: dx_over_x0 * p.x0(),
        ..p
    };
    let epsilon_bar = if p.g0 > 0.0 {
        1.5 * (residual_phase_std(&at_readout) * p.beta).powi(4)
    } else {
        0.0
    };
    let n_eff = if p.g0 > 0.0 { effective_occupation(&p) } else { f64::INFINITY };
    let np_max = SATURATION_RATE / p.kappa;
    let n = options.n_half_periods as f64;
    let eid_t_max = HBAR * p.omega_m * p.q_m / BOLTZMANN / (2.0 * p.coupling().powi(2) * p.beta.powi(2)) / (2.0 * std::f64::consts::PI * n);

    let mut timescales = BTreeMap::new();
    for m in [DecoherenceModel::eid_for(&p), DecoherenceModel::qg(), DecoherenceModel::gic()] {
        timescales.insert(m.name().to_string(), 1.0 / rate(&m, &p));
    }

    let flag = |name: &str, passed: bool, value: f64, threshold: f64, requirement: &str| ConstraintFlag {
        name: name.into(),
        passed,
        value,
        threshold,
        requirement: requirement.into(),
    };
    let macro_ = 4.0 * gtb;
    let linear = gb / p.omega_m;
    let readout = p.g0 * p.n_p.sqrt() / p.kappa;
    let flags = vec![
        flag("macroscopicity", macro_ >= 1.0, macro_, 1.0, "4 g0 tau beta >= 1"),
        flag("linearity", linear >= f, linear, f, "g0 beta / omega_m >> 1"),
        flag("readout", readout > 1.0, readout, 1.0, "g0 sqrt(Np) / kappa > 1"),
        flag("cooling", n_eff <= 1.0 / f, n_eff, 1.0 / f, "n_eff << 1"),
        flag("photon_budget", p.n_p <= np_max, p.n_p, np_max, "Np <= 5e16 / kappa"),
    ];

    Ok(FeasibilityReport {
        g0: p.g0,
        tau: p.tau,
        x0: p.x0(),
        p0: p.p0(),
        g0_over_omega_m: p.g0 / p.omega_m,
        macroscopicity: macro_,
        correlation_target: correlation_closed_form(&p),
        epsilon_nl,
        epsilon_bar,
        dx_over_x0,
        n_eff,
        np_max,
        eid_condition_t_max: eid_t_max,
        timescales,
        constraint_flags: flags,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelAssessment {
    pub model: String,
    /// `γ(2 g0τβ x0)`, 1/s
    pub rate: f64,
    pub timescale: f64,
    /// closed-form `1 − V` at the probe time
    pub deficit: f64,
    pub deficit_valid: bool,
    /// unconventional and faster than environmental decoherence
    pub testable: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestabilityReport {
    pub probe_time: f64,
    pub eid_rate: f64,
    /// fastest model first
    pub models: Vec<ModelAssessment>,
}

/// Rank `models` by localization rate. The environmental reference is the
/// first EID entry, or EID at the bath of `params` when none is given.
pub fn testability(params: &PhysParams, models: &[DecoherenceModel], probe_time: f64) -> Result<TestabilityReport> {
    if !(probe_time.is_finite() && probe_time > 0.0) {
        return Err(crate::invalid("probe_time", format!("must be > 0, got {probe_time}")));
    }
    params.validate()?;
    let reference = models
        .iter()
        .find(|m| matches!(m.kind, ModelKind::Eid { .. }))
        .copied()
        .unwrap_or_else(|| DecoherenceModel {
            constants: models.first().map_or_else(Constants::default, |m| m.constants),
            ..DecoherenceModel::eid_for(params)
        });
    let eid_rate = rate(&reference, params);
    let mut out = Vec::with_capacity(models.len());
    for m in models {
        let r = rate(m, params);
        let deficit = deficit_at_time(m, params, probe_time)?;
        out.push(ModelAssessment {
            model: m.name().to_string(),
            rate: r,
            timescale: 1.0 / r,
            deficit,
            deficit_valid: deficit < CLOSED_FORM_LIMIT,
            testable: !matches!(m.kind, ModelKind::Eid { .. }) && r > eid_rate,
        });
    }
    out.sort_by(|a, b| b.rate.total_cmp(&a.rate));
    Ok(TestabilityReport {
        probe_time,
        eid_rate,
        models: out,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::protocol::Cavity;
    use std::f64::consts::PI;

    fn device() -> PhysParams {
        let omega_m = 2.0 * PI * 20e3;
        PhysParams {
            g0: 0.0,
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
            cavity: Some(Cavity {
                omega_c: 2.0 * PI * SPEED_OF_LIGHT / 1550e-9,
                length: 0.5e-2,
            }),
        }
    }

    #[test]
    fn device_echo() {
        let r = derive(&device(), &FeasibilityOptions::default()).unwrap();
        assert!((r.g0_over_omega_m / 5e-3 - 1.0).abs() < 0.05, "{}", r.g0_over_omega_m);
        assert!((r.macroscopicity / 6.0 - 1.0).abs() < 0.05, "{}", r.macroscopicity);
        assert!((r.epsilon_bar / 1e-2 - 1.0).abs() < 0.5, "{}", r.epsilon_bar);
        assert!((r.np_max / 4e9 - 1.0).abs() < 0.2);
        assert!((r.x0 * r.p0 / (HBAR / 2.0) - 1.0).abs() < 1e-14);
        assert!(r.all_passed(), "{:?}", r.constraint_flags);
    }

    #[test]
    fn printed_epsilon_bar_scaling() {
        // with Np at the budget and τ = ln2/κ the deficit is ≈ 2e-35 κ²β⁴
        let mut p = device();
        p.n_p = SATURATION_RATE / p.kappa;
        let opts = FeasibilityOptions {
            single_local_oscillator: true,
            ..Default::default()
        };
        let r = derive(&p, &opts).unwrap();
        let printed = 2e-35 * p.kappa.powi(2) * p.beta.powi(4);
        assert!((r.epsilon_bar / printed - 1.0).abs() < 0.3, "{} vs {printed}", r.epsilon_bar);
        assert!((r.tau - LN_2 / p.kappa).abs() < 1e-20);
    }

    #[test]
    fn finesse_reproduces_decay_rate() {
        let k = kappa_from_finesse(0.5e-2, 8000.0);
        assert!((k / (2.0 * PI * 2e6) - 1.0).abs() < 0.2);
        assert!((LN_2 / k / 60e-9 - 1.0).abs() < 0.2);
    }

    #[test]
    fn cooling_operating_points() {
        let mut p = device();
        p.g0 = 600.0;
        p.cavity = None;
        p.n_p = (p.kappa / p.g0).powi(2);
        assert!((effective_occupation(&p) - (2f64.sqrt() - 1.0) / 2.0).abs() < 1e-12);
        p.n_p *= 100.0;
        assert!((effective_occupation(&p) - 2.5e-5).abs() < 1e-7);
    }

    #[test]
    fn zero_displacement() {
        let p = PhysParams { beta: 0.0, ..device() };
        let r = derive(&p, &FeasibilityOptions::default()).unwrap();
        assert_eq!(r.epsilon_nl, 0.0);
        assert_eq!(r.epsilon_bar, 0.0);
        let m = r.constraint_flags.iter().find(|f| f.name == "macroscopicity").unwrap();
        assert!(!m.passed);
    }

    #[test]
    fn over_specified_coupling() {
        let mut p = device();
        let derived = resolve(&p, &FeasibilityOptions::default()).unwrap().g0;
        p.g0 = derived * 1.005;
        assert!(resolve(&p, &FeasibilityOptions::default()).is_ok());
        p.g0 = derived * 1.05;
        assert!(matches!(resolve(&p, &FeasibilityOptions::default()), Err(Error::Inconsistent(_))));
    }

    #[test]
    fn coupling_scaling() {
        let g = |l: f64, m: f64| coupling_from_cavity(1.2e15, l, m, 1.2e5);
        assert!((g(0.01, 1e-10) / g(0.02, 1e-10) - 2.0).abs() < 1e-12);
        assert!((g(0.01, 1e-10) / g(0.01, 4e-10) - 2.0).abs() < 1e-12);
        assert!(g(0.01, 1e-10) > 0.0);
    }

    #[test]
    fn nonlinearity_falls_with_stronger_coupling() {
        let base = resolve(&device(), &FeasibilityOptions::default()).unwrap();
        let mut prev = f64::INFINITY;
        for k in 1..8 {
            // raise g0β/ωm at fixed g0τβ by shortening the pulse
            let s = 2f64.powi(k);
            let p = PhysParams {
                g0: base.g0 * s,
                tau: base.tau / s,
                cavity: None,
                ..base
            };
            let e = derive(&p, &FeasibilityOptions::default()).unwrap().epsilon_nl;
            assert!(e < prev);
            prev = e;
        }
    }

    fn at_bath(t: f64, q: f64) -> PhysParams {
        let p = resolve(&device(), &FeasibilityOptions::default()).unwrap();
        PhysParams {
            temperature: t,
            q_m: q,
            ..p
        }
    }

    #[test]
    fn testability_examples() {
        let models = |p: &PhysParams| [DecoherenceModel::eid_for(p), DecoherenceModel::qg(), DecoherenceModel::gic()];
        let is_testable = |p: &PhysParams, name: &str| {
            let r = testability(p, &models(p), 100e-6).unwrap();
            r.models.iter().find(|m| m.model == name).unwrap().testable
        };
        let cold = at_bath(0.02, 1.5e7);
        assert!(is_testable(&cold, "qg"));
        let warm = at_bath(0.3, 1e7);
        assert!(is_testable(&warm, "gic"));
        let hot = at_bath(0.8, 1e6);
        assert!(!is_testable(&hot, "qg"));
        let r = testability(&hot, &models(&hot), 100e-6).unwrap();
        assert_eq!(r.models[0].model, "eid");
    }

    #[test]
    fn report_round_trips() {
        let r = derive(&device(), &FeasibilityOptions::default()).unwrap();
        let s = serde_json::to_string(&r).unwrap();
        assert_eq!(serde_json::from_str::<FeasibilityReport>(&s).unwrap(), r);
    }
}
