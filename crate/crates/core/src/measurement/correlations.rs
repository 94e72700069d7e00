use std::f64::consts::{PI, SQRT_2};
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::protocol::{ensemble_mean_position, evolve, prepare_input, at_quarter_period, HybridState, PhysParams};
use crate::qcore::fock::{oscillator_first, oscillator_ground};
use crate::qcore::{default_kmax, Interval, Quadrature, Sign};
use crate::{Error, Result};

/// Largest β handled by the exact photon-number sum in `Auto` mode.
pub const EXACT_BETA_LIMIT: f64 = 300.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CorrelationMethod {
    Exact,
    ClosedForm,
}

/// Method request: `Auto` picks the exact sum up to [`EXACT_BETA_LIMIT`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MethodChoice {
    #[default]
    Auto,
    Exact,
    ClosedForm,
}

/// Joint sign statistics of the B homodyne (first index) and the mirror
/// position relative to its ensemble mean (second index).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CorrelationResult {
    pub p_pp: f64,
    pub p_pm: f64,
    pub p_mp: f64,
    pub p_mm: f64,
    pub correlation: f64,
    pub method: CorrelationMethod,
}

impl CorrelationResult {
    fn from_probs(p: [[f64; 2]; 2], method: CorrelationMethod) -> Result<Self> {
        let [[p_pp, p_pm], [p_mp, p_mm]] = p;
        let total = p_pp + p_pm + p_mp + p_mm;
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::Consistency(format!("joint probabilities sum to {total}")));
        }
        Ok(CorrelationResult {
            p_pp,
            p_pm,
            p_mp,
            p_mm,
            correlation: p_pp + p_mm - p_pm - p_mp,
            method,
        })
    }

    /// `P(b, e)` with `b` the B sign and `e` the mirror sign.
    pub fn prob(&self, b: Sign, e: Sign) -> f64 {
        match (b, e) {
            (Sign::Plus, Sign::Plus) => self.p_pp,
            (Sign::Plus, Sign::Minus) => self.p_pm,
            (Sign::Minus, Sign::Plus) => self.p_mp,
            (Sign::Minus, Sign::Minus) => self.p_mm,
        }
    }
}

/// `∫_0^∞ φ0(X) φ1(X) dX`, the off-diagonal of the positive-sign homodyne
/// element restricted to `{|0>, |1>}`.
pub fn homodyne_overlap() -> f64 {
    static C: OnceLock<f64> = OnceLock::new();
    *C.get_or_init(|| {
        Quadrature::default()
            .integrate(|x| oscillator_ground(x) * oscillator_first(x), Interval::LowerBounded(0.0))
            .expect("smooth integrand")
    })
}

/// `<b|Π_s|b>` for the sign-`s` homodyne element and `b ∈ {|+>, |−>}`.
pub fn homodyne_sign_probability(b: Sign, s: Sign) -> f64 {
    0.5 + s.value() * b.value() * homodyne_overlap()
}

fn normal_upper(z: f64) -> f64 {
    0.5 * libm::erfc(z / SQRT_2)
}

/// Mirror position spread seen by the readout: zero-point and thermal
/// fluctuations plus Gaussian readout noise of standard deviation `dx`.
pub fn position_std(params: &PhysParams) -> f64 {
    let x0 = params.x0();
    (x0 * x0 * (1.0 + 2.0 * params.n_th) + params.dx * params.dx).sqrt()
}

/// Exact photon-number sum over the branches of `state` (quarter period).
pub fn joint_probabilities_exact(state: &HybridState, params: &PhysParams) -> Result<CorrelationResult> {
    if !at_quarter_period(state.time, state.omega_m) {
        return Err(Error::NotQuarterPeriod { time: state.time });
    }
    let x0 = params.x0();
    let sigma = position_std(params);
    let threshold = ensemble_mean_position(params);
    let mut p = [[0.0; 2]; 2];
    let mut total = 0.0;
    for br in &state.branches {
        let w = br.amp.norm_sqr();
        total += w;
        let mu = br.mech.position_mean(x0);
        let e_plus = if sigma > 0.0 {
            normal_upper((threshold - mu) / sigma)
        } else if mu >= threshold {
            1.0
        } else {
            0.0
        };
        for (i, s) in [Sign::Plus, Sign::Minus].into_iter().enumerate() {
            let pb = w * homodyne_sign_probability(br.qubit, s);
            p[i][0] += pb * e_plus;
            p[i][1] += pb * (1.0 - e_plus);
        }
    }
    // kmax truncation leaves at most 1e-8 of the norm out
    for row in p.iter_mut() {
        for v in row.iter_mut() {
            *v /= total;
        }
    }
    CorrelationResult::from_probs(p, CorrelationMethod::Exact)
}

/// `(2/π)·g0τβ / √(n_th + 1 + (g0τβ)² + dx²/(4x0²))`, valid for `β ≫ 1`.
pub fn correlation_closed_form(params: &PhysParams) -> f64 {
    let g = params.g_tau_beta();
    let x0 = params.x0();
    2.0 / PI * g / (params.n_th + 1.0 + g * g + params.dx * params.dx / (4.0 * x0 * x0)).sqrt()
}

/// Closed-form correlation spread symmetrically over the four outcomes.
pub fn closed_form_result(params: &PhysParams) -> Result<CorrelationResult> {
    let c = correlation_closed_form(params);
    let same = 0.25 + c / 4.0;
    let diff = 0.25 - c / 4.0;
    CorrelationResult::from_probs([[same, diff], [diff, same]], CorrelationMethod::ClosedForm)
}

/// Prepare, kick, evolve a quarter period and evaluate the correlations.
pub fn correlations(params: &PhysParams, choice: MethodChoice) -> Result<CorrelationResult> {
    params.validate()?;
    let exact = match choice {
        MethodChoice::Exact => true,
        MethodChoice::ClosedForm => false,
        MethodChoice::Auto => params.beta <= EXACT_BETA_LIMIT,
    };
    if !exact {
        return closed_form_result(params);
    }
    let state = prepare_input(params, default_kmax(params.beta))?;
    let state = evolve(&state, PI / (2.0 * params.omega_m))?;
    joint_probabilities_exact(&state, params)
}
