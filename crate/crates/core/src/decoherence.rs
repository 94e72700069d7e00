//! Localization kernels and their effect on the interference visibility.
//!
//! A decoherence model enters through its localization rate `γ(Δx)`: spatial
//! coherences of the mirror decay as `exp(−γ(x−y) t)`. Between the kick and
//! the position readout the mirror performs a weak measurement of the photon
//! number of A, with pointer
//!
//! `ξ(X) = exp(−t ⟨γ(2 g0τ x0 X sin θ)⟩_θ)`,
//!
//! and the optical state sees the phase-noise channel whose characteristic
//! function is `ξ`.

use std::f64::consts::{FRAC_PI_2, PI};

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::constants::{Constants, NUCLEAR_RADIUS, TANTALUM_Z};
use crate::measurement::{phase_moments, PhaseNoise, Pointer, Route};
use crate::protocol::PhysParams;
use crate::qcore::fock::displacement_matrix;
use crate::qcore::{Interval, Quadrature};
use crate::{Error, Result, C64};

/// Closed-form deficits above this value are flagged invalid.
pub const CLOSED_FORM_LIMIT: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ModelKind {
    /// Environmentally induced decoherence from a thermal bath.
    Eid {
        /// bath temperature, K
        temperature: f64,
        q_m: f64,
    },
    /// Quantum-gravity induced collapse.
    Qg,
    /// Gravitationally induced collapse for nuclei modelled as uniform spheres.
    Gic {
        /// nuclear radius, m
        radius: f64,
        /// nucleus mass, kg
        nucleus_mass: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DecoherenceModel {
    pub kind: ModelKind,
    #[serde(default)]
    pub constants: Constants,
}

impl DecoherenceModel {
    pub fn eid(temperature: f64, q_m: f64) -> Self {
        Self::with_defaults(ModelKind::Eid { temperature, q_m })
    }

    /// EID at the bath temperature and quality factor of `params`.
    pub fn eid_for(params: &PhysParams) -> Self {
        Self::eid(params.temperature, params.q_m)
    }

    pub fn qg() -> Self {
        Self::with_defaults(ModelKind::Qg)
    }

    /// GIC for tantalum nuclei of radius 1 fm.
    pub fn gic() -> Self {
        let c = Constants::default();
        Self::with_defaults(ModelKind::Gic {
            radius: NUCLEAR_RADIUS,
            nucleus_mass: TANTALUM_Z * c.nucleon_mass,
        })
    }

    fn with_defaults(kind: ModelKind) -> Self {
        DecoherenceModel {
            kind,
            constants: Constants::default(),
        }
    }

    pub fn name(&self) -> &'static str {
        match self.kind {
            ModelKind::Eid { .. } => "eid",
            ModelKind::Qg => "qg",
            ModelKind::Gic { .. } => "gic",
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.constants.validate()?;
        let positive = |name: &'static str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(crate::invalid(name, format!("must be positive, got {v}")))
            }
        };
        match self.kind {
            ModelKind::Eid { temperature, q_m } => {
                if !(temperature.is_finite() && temperature >= 0.0) {
                    return Err(crate::invalid("temperature", format!("must be >= 0, got {temperature}")));
                }
                positive("q_m", q_m)
            }
            ModelKind::Qg => Ok(()),
            ModelKind::Gic { radius, nucleus_mass } => {
                positive("radius", radius)?;
                positive("nucleus_mass", nucleus_mass)
            }
        }
    }

    fn kernel(&self, params: &PhysParams) -> Kernel {
        let c = &self.constants;
        let m = params.mass;
        match self.kind {
            ModelKind::Eid { temperature, q_m } => Kernel::Quadratic {
                k: m * c.k_b * temperature * params.omega_m / (c.hbar * c.hbar * q_m),
            },
            ModelKind::Qg => Kernel::Quadratic {
                k: c.light_speed.powi(4) * m * m * c.nucleon_mass.powi(4) / (c.hbar.powi(3) * c.planck_mass().powi(3)),
            },
            ModelKind::Gic { radius, nucleus_mass } => Kernel::Gic {
                amp: 8.0 * PI * c.gravitational * m * nucleus_mass / c.hbar,
                a: radius,
            },
        }
    }
}

/// `γ(Δx) = k Δx²` or the uniform-sphere gravitational kernel.
#[derive(Debug, Clone, Copy, PartialEq)]
enum Kernel {
    Quadratic { k: f64 },
    Gic { amp: f64, a: f64 },
}

impl Kernel {
    fn rate(&self, dx: f64) -> f64 {
        let d = dx.abs();
        match *self {
            Kernel::Quadratic { k } => k * d * d,
            Kernel::Gic { amp, a } => amp * gic_shape(d, a),
        }
    }

    /// `(1/π)∫_0^π γ(l sin θ) dθ` in closed form.
    fn theta_average(&self, l: f64) -> f64 {
        let l = l.abs();
        match *self {
            Kernel::Quadratic { k } => 0.5 * k * l * l,
            Kernel::Gic { amp, a } => amp * gic_theta_average(l, a),
        }
    }

    /// `γ''(0)/2`
    fn curvature(&self) -> f64 {
        match *self {
            Kernel::Quadratic { k } => k,
            Kernel::Gic { amp, a } => amp * 0.5 / a.powi(3),
        }
    }

    fn limit(&self) -> f64 {
        match *self {
            Kernel::Quadratic { .. } => f64::INFINITY,
            Kernel::Gic { amp, a } => amp * 1.2 / a,
        }
    }
}

fn gic_shape(d: f64, a: f64) -> f64 {
    if d > 2.0 * a {
        1.2 / a - 1.0 / d
    } else {
        // the printed inner branch with its constant terms cancelled
        let r = d / a;
        r * r * (0.5 - r * (3.0 / 16.0 - r * r / 160.0)) / a
    }
}

#[cfg(test)]
fn gic_shape_printed(d: f64, a: f64) -> f64 {
    if d > 2.0 * a {
        1.2 / a - 1.0 / d
    } else {
        1.2 / a - (12.0 * a * a - 5.0 * d * d) / (10.0 * a.powi(3)) + (d.powi(5) - 30.0 * a * a * d.powi(3)) / (160.0 * a.powi(6))
    }
}

/// `∫_0^θ sin²` accurate for small `θ`.
fn sin2_integral(theta: f64) -> f64 {
    if theta < 0.1 {
        let t2 = theta * theta;
        theta * t2 * (1.0 / 3.0 - t2 * (1.0 / 15.0 - t2 * (2.0 / 315.0 - t2 / 2835.0)))
    } else {
        0.5 * theta - 0.25 * (2.0 * theta).sin()
    }
}

fn gic_theta_average(l: f64, a: f64) -> f64 {
    // inner branch as d²/(2a³) − 3d³/(16a⁴) + d⁵/(160a⁶)
    let (c2, c3, c5) = (0.5 / a.powi(3), -3.0 / (16.0 * a.powi(4)), 1.0 / (160.0 * a.powi(6)));
    if l <= 2.0 * a {
        // (2/π)∫_0^{π/2} sin^k: 1/2, 4/(3π), 16/(15π)
        return c2 * l * l * 0.5 + c3 * l.powi(3) * 4.0 / (3.0 * PI) + c5 * l.powi(5) * 16.0 / (15.0 * PI);
    }
    let s = 2.0 * a / l;
    let theta_c = s.asin();
    let c = (1.0 - s * s).sqrt();
    let h = s * s / (1.0 + c);
    let i2 = sin2_integral(theta_c);
    let i3 = h * h * (2.0 + c) / 3.0;
    let i5 = h.powi(3) * (c * c + 3.0 * c + 8.0 / 3.0) / 5.0;
    let inner = c2 * l * l * i2 + c3 * l.powi(3) * i3 + c5 * l.powi(5) * i5;
    let log_term = if theta_c > 0.0 { (0.5 * theta_c).tan().ln() / l } else { 0.0 };
    let outer = 1.2 / a * (FRAC_PI_2 - theta_c) + log_term;
    2.0 / PI * (inner + outer)
}

/// Localization rate `γ(Δx)`, 1/s.
pub fn gamma(model: &DecoherenceModel, delta_x: f64, params: &PhysParams) -> f64 {
    model.kernel(params).rate(delta_x)
}

/// `2 g0τ x0`, the mirror displacement per unit of pointer argument.
fn pointer_scale(model: &DecoherenceModel, params: &PhysParams) -> f64 {
    2.0 * params.coupling() * params.x0_with(model.constants.hbar)
}

/// Pointer `ξ(X)` accumulated over `n` half mechanical periods.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointerDistribution {
    kernel: Kernel,
    scale: f64,
    /// evolution time `nπ/ωm`, s
    pub evolution_time: f64,
    pub n_half_periods: u32,
    /// `ξ''(0)` from the quadratic part of the kernel
    pub second_derivative_at_zero: f64,
}

impl PointerDistribution {
    /// Exponent `t⟨γ⟩_θ` by quadrature over θ.
    pub fn exponent_quadrature(&self, x: f64) -> Result<f64> {
        let l = self.scale * x.abs();
        if l == 0.0 {
            return Ok(0.0);
        }
        let kernel = self.kernel;
        let f = |th: f64| kernel.rate(l * th.sin());
        let half = match kernel {
            Kernel::Gic { a, .. } if l > 2.0 * a => {
                Quadrature::default().integrate_breaks(f, &[0.0, (2.0 * a / l).asin(), FRAC_PI_2])?
            }
            _ => Quadrature::default().integrate(f, Interval::Finite(0.0, FRAC_PI_2))?,
        };
        Ok(self.evolution_time * 2.0 / PI * half)
    }

    /// `ξ(X)` by quadrature over θ.
    pub fn xi_quadrature(&self, x: f64) -> Result<f64> {
        Ok((-self.exponent_quadrature(x)?).exp())
    }

    /// `t⟨γ⟩_θ` in closed form.
    pub fn exponent(&self, x: f64) -> f64 {
        self.evolution_time * self.kernel.theta_average(self.scale * x)
    }
}

impl Pointer for PointerDistribution {
    fn xi(&self, x: f64) -> f64 {
        (-self.exponent(x)).exp()
    }

    fn gaussian_variance(&self) -> Option<f64> {
        match self.kernel {
            Kernel::Quadratic { .. } => Some(-self.second_derivative_at_zero),
            Kernel::Gic { .. } => None,
        }
    }

    fn floor(&self) -> f64 {
        (-self.evolution_time * self.kernel.limit()).exp()
    }
}

pub fn pointer_distribution(model: &DecoherenceModel, params: &PhysParams, n_half_periods: u32) -> Result<PointerDistribution> {
    if n_half_periods == 0 {
        return Err(crate::invalid("n_half_periods", "must be >= 1"));
    }
    model.validate()?;
    params.validate()?;
    let kernel = model.kernel(params);
    let scale = pointer_scale(model, params);
    let t = n_half_periods as f64 * PI / params.omega_m;
    let curvature = kernel.curvature();
    // ⟨sin²θ⟩ = ½ and ξ = exp(−t·curv·scale²X²/2)
    let second = -t * curvature * scale * scale;
    Ok(PointerDistribution {
        kernel,
        scale,
        evolution_time: t,
        n_half_periods,
        second_derivative_at_zero: second,
    })
}

/// Visibility after the phase-noise channel, as an interval when the Fourier
/// evaluation is not accurate to rounding level.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChannelVisibility {
    pub visibility: f64,
    pub lower: f64,
    pub upper: f64,
    pub route: Route,
}

/// `V = |∫dφ ξ̃(φ) e^{2β²(cos φ−1)}(e^{iφ} + (1−e^{iφ})²β²)|`.
pub fn apply_phase_noise(pointer: &dyn Pointer, beta: f64, route: Route) -> Result<ChannelVisibility> {
    let noise = PhaseNoise {
        readout_std: 0.0,
        pointer: Some(pointer),
    };
    let m = phase_moments(beta, &noise, route)?;
    let v = m.coherence.norm();
    Ok(ChannelVisibility {
        visibility: v,
        lower: (v - m.uncertainty).max(0.0),
        upper: (v + m.uncertainty).min(1.0),
        route,
    })
}

/// `ρ_AB` after the channel and `D(−β)` on a truncated A space.
#[derive(Debug, Clone, PartialEq)]
pub struct DegradedState {
    /// unnormalized, indexed `2m + n` for `|m>_A |n>_B`
    pub rho: DMatrix<C64>,
    /// trace kept by the truncation
    pub retained: f64,
}

impl DegradedState {
    /// `2|<01|ρ|10>|`
    pub fn visibility(&self) -> f64 {
        2.0 * self.rho[(1, 2)].norm()
    }

    /// `<mn|ρ|mn>`
    pub fn probability(&self, m: usize, n: usize) -> f64 {
        self.rho[(2 * m + n, 2 * m + n)].re
    }
}

/// Apply the channel to `D_A(β)(|10> − |01>)/√2` by its Hadamard action
/// `ρ_{kk'} → ξ(k−k') ρ_{kk'}` and undo the displacement.
pub fn degraded_state(pointer: &dyn Pointer, beta: f64, a_dim: usize) -> Result<DegradedState> {
    if a_dim < 2 {
        return Err(crate::invalid("a_dim", "must be >= 2"));
    }
    if !(beta.is_finite() && beta >= 0.0) {
        return Err(crate::invalid("beta", format!("must be finite and >= 0, got {beta}")));
    }
    let work = a_dim + (beta * beta + 12.0 * beta + 40.0).ceil() as usize;
    let d = displacement_matrix(C64::new(beta, 0.0), work);
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let mut psi = DMatrix::<C64>::zeros(work, 2);
    for k in 0..work {
        psi[(k, 0)] = d[(k, 1)] * s;
        psi[(k, 1)] = -d[(k, 0)] * s;
    }
    let captured: f64 = psi.iter().map(|z| z.norm_sqr()).sum();
    if (captured - 1.0).abs() > 1e-12 {
        return Err(Error::Truncation {
            kmax: work - 1,
            achieved_norm: captured,
            required: 1.0 - 1e-12,
        });
    }
    let xi: Vec<f64> = (0..work).map(|j| pointer.xi(j as f64)).collect();
    let undo = displacement_matrix(C64::new(-beta, 0.0), work);
    // blocks per B index: ρ_bb' = U (ξ ∘ ψ_b ψ_b'^†) U^†
    let mut rho = DMatrix::<C64>::zeros(2 * a_dim, 2 * a_dim);
    for b in 0..2 {
        for bp in 0..2 {
            let mut block = DMatrix::<C64>::from_fn(work, work, |k, kp| {
                psi[(k, b)] * psi[(kp, bp)].conj() * xi[k.abs_diff(kp)]
            });
            block = &undo * block * undo.adjoint();
            for m in 0..a_dim {
                for mp in 0..a_dim {
                    rho[(2 * m + b, 2 * mp + bp)] = block[(m, mp)];
                }
            }
        }
    }
    let retained = rho.trace().re;
    Ok(DegradedState { rho, retained })
}

/// Closed-form visibility deficit in the narrow-noise regime.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecayEstimate {
    pub n_half_periods: u32,
    /// `1 − V = (½ + 2β²)(−ξ''(0))`
    pub deficit: f64,
    /// false when the deficit exceeds [`CLOSED_FORM_LIMIT`]
    pub valid: bool,
}

pub fn visibility_decay(model: &DecoherenceModel, params: &PhysParams, n_half_periods: u32) -> Result<DecayEstimate> {
    let p = pointer_distribution(model, params, n_half_periods)?;
    let deficit = deficit_at_time(model, params, p.evolution_time)?;
    Ok(DecayEstimate {
        n_half_periods,
        deficit,
        valid: deficit < CLOSED_FORM_LIMIT,
    })
}

/// Closed-form `1 − V` after an arbitrary delay `t`, s.
pub fn deficit_at_time(model: &DecoherenceModel, params: &PhysParams, t: f64) -> Result<f64> {
    if !(t.is_finite() && t >= 0.0) {
        return Err(crate::invalid("t", format!("must be finite and >= 0, got {t}")));
    }
    model.validate()?;
    let curvature = model.kernel(params).curvature();
    let scale = pointer_scale(model, params);
    let b2 = params.beta * params.beta;
    Ok((0.5 + 2.0 * b2) * t * curvature * scale * scale)
}

/// `γ(2 g0τβ x0)`, 1/s.
pub fn rate(model: &DecoherenceModel, params: &PhysParams) -> f64 {
    let dx = pointer_scale(model, params) * params.beta;
    gamma(model, dx, params)
}

/// `1/γ(2 g0τβ x0)`, s.
pub fn timescale(model: &DecoherenceModel, params: &PhysParams) -> f64 {
    1.0 / rate(model, params)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measurement::GaussianPointer;
    use crate::protocol::tests_support::device_like;
    use proptest::prelude::*;

    fn models() -> [DecoherenceModel; 3] {
        [DecoherenceModel::eid(0.8, 1e6), DecoherenceModel::qg(), DecoherenceModel::gic()]
    }

    #[test]
    fn gic_branches_meet() {
        let a = 1.3e-15;
        let lo = gic_shape_printed(2.0 * a * (1.0 - 1e-12), a);
        let hi = gic_shape_printed(2.0 * a * (1.0 + 1e-12), a);
        for r in [0.3, 0.9, 1.5, 2.0, 2.5] {
            assert!((gic_shape(r * a, a) - gic_shape_printed(r * a, a)).abs() < 1e-14 / a);
        }
        assert!((lo - 0.7 / a).abs() < 1e-9 / a && (hi - 0.7 / a).abs() < 1e-9 / a);
        assert_eq!(gic_shape(0.0, a), 0.0);
    }

    #[test]
    fn zero_separation_zero_rate() {
        let p = device_like(1.5, 4e4);
        for m in models() {
            assert_eq!(gamma(&m, 0.0, &p), 0.0);
        }
    }

    #[test]
    fn gic_theta_average_matches_quadrature() {
        let p = device_like(1.5, 4e4);
        let ptr = pointer_distribution(&DecoherenceModel::gic(), &p, 1).unwrap();
        let a = NUCLEAR_RADIUS;
        for l_over_a in [1e-3, 0.5, 1.9, 2.0, 2.1, 5.0, 30.0, 1e3, 1e6] {
            let x = l_over_a * a / ptr.scale;
            let q = ptr.exponent_quadrature(x).unwrap();
            let c = ptr.exponent(x);
            assert!((q / c - 1.0).abs() < 1e-10, "L/a={l_over_a}: {q} vs {c}");
        }
    }

    #[test]
    fn quadratic_kernels_curvature_by_differences() {
        let p = device_like(1.5, 4e4);
        for m in [DecoherenceModel::eid(0.8, 1e6), DecoherenceModel::qg()] {
            let ptr = pointer_distribution(&m, &p, 3).unwrap();
            let h = 1e-4;
            let second = -2.0 * ptr.exponent_quadrature(h).unwrap() / (h * h);
            assert!((second / ptr.second_derivative_at_zero - 1.0).abs() < 1e-6);
        }
        let eid = pointer_distribution(&DecoherenceModel::eid(0.8, 1e6), &p, 2).unwrap();
        let c = Constants::default();
        let g2x02 = (p.coupling() * p.x0()).powi(2);
        let expect = 2.0 * 2.0 * PI * g2x02 * p.mass * c.k_b * 0.8 / (c.hbar * c.hbar * 1e6) * 2.0;
        assert!((-eid.second_derivative_at_zero / expect - 1.0).abs() < 1e-12);
    }

    #[test]
    fn gic_small_x_expansion() {
        let p = device_like(1.5, 4e4);
        let ptr = pointer_distribution(&DecoherenceModel::gic(), &p, 1).unwrap();
        for frac in [1e-4, 1e-3, 0.01, 0.1] {
            let x = frac * NUCLEAR_RADIUS / ptr.scale;
            let q = ptr.exponent_quadrature(x).unwrap();
            let quad = -0.5 * ptr.second_derivative_at_zero * x * x;
            assert!((q / quad - 1.0).abs() < frac, "{frac}: {q} vs {quad}");
        }
    }

    #[test]
    fn no_decoherence_keeps_visibility() {
        let p = device_like(1.5, 4.0);
        let m = DecoherenceModel::eid(0.0, 1e6);
        let ptr = pointer_distribution(&m, &p, 1).unwrap();
        assert_eq!(ptr.xi(10.0), 1.0);
        for route in [Route::XSpace, Route::PhiSpace] {
            let v = apply_phase_noise(&ptr, 4.0, route).unwrap();
            assert!((v.visibility - 1.0).abs() < 1e-12);
        }
        assert_eq!(visibility_decay(&m, &p, 5).unwrap().deficit, 0.0);
    }

    #[test]
    fn narrow_noise_expansion() {
        for beta in [1.0, 3.0, 10.0] {
            let sd: f64 = 1e-3 / beta;
            let v = apply_phase_noise(&GaussianPointer { std: sd }, beta, Route::PhiSpace).unwrap();
            let expansion = 1.0 - (0.5 + 2.0 * beta * beta) * sd * sd;
            assert!(((1.0 - v.visibility) / (1.0 - expansion) - 1.0).abs() < 1e-2, "beta={beta}");
        }
    }

    #[test]
    fn degraded_state_matches_channel_integral() {
        let ptr = GaussianPointer { std: 0.2 };
        let rho = degraded_state(&ptr, 2.0, 40).unwrap();
        let v = apply_phase_noise(&ptr, 2.0, Route::PhiSpace).unwrap();
        assert!((rho.visibility() - v.visibility).abs() < 1e-6, "{} vs {}", rho.visibility(), v.visibility);
        let expansion = 1.0 - 8.5 * 0.04;
        assert!((v.visibility - expansion).abs() > 0.05);
        assert!(rho.retained > 1.0 - 1e-9);
    }

    #[test]
    fn decay_linear_in_n_and_consistent_with_channel() {
        let p = PhysParams {
            temperature: 0.02,
            q_m: 1.5e7,
            ..device_like(0.4, 300.0)
        };
        for m in [DecoherenceModel::eid_for(&p), DecoherenceModel::qg()] {
            let d1 = visibility_decay(&m, &p, 1).unwrap();
            let d2 = visibility_decay(&m, &p, 2).unwrap();
            assert!((d2.deficit / d1.deficit - 2.0).abs() < 1e-12);
            assert!(d1.deficit < 0.005 && d1.valid, "{} {d1:?}", m.name());
            let ptr = pointer_distribution(&m, &p, 1).unwrap();
            let v = apply_phase_noise(&ptr, p.beta, Route::PhiSpace).unwrap();
            assert!(((1.0 - v.visibility) / d1.deficit - 1.0).abs() < 0.01);
        }
    }

    #[test]
    fn eid_deficit_matches_printed_form() {
        let p = device_like(1.5, 50.0);
        let d = visibility_decay(&DecoherenceModel::eid(0.3, 1e7), &p, 4).unwrap();
        let c = Constants::default();
        let expect = 4.0 * (1.0 + 4.0 * 2500.0) * 2.0 * PI * (p.coupling() * p.x0()).powi(2) * p.mass * c.k_b * 0.3
            / (c.hbar * c.hbar * 1e7);
        assert!((d.deficit / expect - 1.0).abs() < 1e-12);
    }

    #[test]
    fn routes_agree_on_narrow_gic() {
        let p = device_like(0.02, 50.0);
        let ptr = pointer_distribution(&DecoherenceModel::gic(), &p, 1).unwrap();
        let x = apply_phase_noise(&ptr, 50.0, Route::XSpace).unwrap();
        let f = apply_phase_noise(&ptr, 50.0, Route::PhiSpace).unwrap();
        assert!((x.visibility - f.visibility).abs() < 1e-6, "{x:?} {f:?}");
    }

    #[test]
    fn mass_scaling() {
        let p = device_like(1.5, 4e4);
        let heavy = PhysParams { mass: 3.0 * p.mass, ..p };
        let dx = 1e-14;
        let r = |m: &DecoherenceModel| gamma(m, dx, &heavy) / gamma(m, dx, &p);
        assert!((r(&DecoherenceModel::eid(0.8, 1e6)) - 3.0).abs() < 1e-12);
        assert!((r(&DecoherenceModel::qg()) - 9.0).abs() < 1e-12);
        assert!((r(&DecoherenceModel::gic()) - 3.0).abs() < 1e-12);
    }

    #[test]
    fn device_timescales() {
        let p = device_like(1.5, 4e4);
        let within = |t: f64, target: f64, f: f64| t > target / f && t < target * f;
        let gic = timescale(&DecoherenceModel::gic(), &p);
        assert!(within(gic, 10e-6, 1.3), "{gic}");
        let qg = timescale(&DecoherenceModel::qg(), &p);
        assert!(within(qg, 415e-6, 3.0), "{qg}");
        for (t, q, target) in [(0.8, 1e6, 1e-6), (0.02, 1.5e7, 630e-6), (0.3, 1e7, 30e-6)] {
            let e = timescale(&DecoherenceModel::eid(t, q), &p);
            assert!(within(e, target, 3.0), "T={t}: {e}");
        }
    }

    #[test]
    fn model_serde_round_trip() {
        for m in models() {
            let s = serde_json::to_string(&m).unwrap();
            assert_eq!(serde_json::from_str::<DecoherenceModel>(&s).unwrap(), m);
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]
        #[test]
        fn pointer_even_normalized_monotone(which in 0usize..3, g in 0.1..3.0f64, n in 1u32..6) {
            let p = device_like(g, 4e4);
            let ptr = pointer_distribution(&models()[which], &p, n).unwrap();
            prop_assert_eq!(ptr.xi(0.0), 1.0);
            let mut prev = 1.0;
            for i in 1..200 {
                let x = 1.1f64.powi(i) * 1e-3;
                let v = ptr.xi(x);
                prop_assert_eq!(v, ptr.xi(-x));
                prop_assert!(v <= prev + 1e-15 && v >= ptr.floor() - 1e-15);
                prev = v;
            }
        }
    }
}
