//! Averages of interference observables over a random phase on mode A.
//!
//! After feedback and `D(−β)`, a phase `φ` on A turns the singlet into
//! amplitudes that depend on `u = 2β²(1 − cos φ)` only (plus `e^{iφ}`). The
//! detection statistics are therefore expectations of periodic functions of
//! `φ` under the phase distribution `ξ̃(φ)`, whose characteristic function is
//! the pointer `ξ(X)`. Two independent evaluations are offered:
//!
//! * X-space: `E[f] = Σ_m f_m ξ(m)` with the Fourier coefficients `f_m` of
//!   `f` taken from an FFT.
//! * φ-space: `E[f] = ∫ ξ̃(φ) f(φ) dφ`, with `ξ̃` analytic for Gaussian
//!   pointers and otherwise obtained by a cosine transform of `ξ`.

use std::f64::consts::PI;

use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::qcore::quadrature::Scalar;
use crate::qcore::Quadrature;
use crate::{Error, Result, C64};

/// Characteristic function `ξ(X) = E[e^{iφX}]` of a phase-noise distribution.
///
/// Implementations must be even with `ξ(0) = 1` and nonincreasing in `|X|`.
pub trait Pointer: Send + Sync {
    fn xi(&self, x: f64) -> f64;

    /// `v` when `ξ(X) = exp(−v X²/2)` exactly.
    fn gaussian_variance(&self) -> Option<f64> {
        None
    }

    /// `lim ξ(X)` for `|X| → ∞`, the weight of a phase-free component.
    fn floor(&self) -> f64 {
        0.0
    }
}

/// Gaussian phase noise of standard deviation `std`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianPointer {
    pub std: f64,
}

impl Pointer for GaussianPointer {
    fn xi(&self, x: f64) -> f64 {
        (-0.5 * (self.std * x).powi(2)).exp()
    }

    fn gaussian_variance(&self) -> Option<f64> {
        Some(self.std * self.std)
    }
}

/// Readout phase noise of standard deviation `readout_std` combined with an
/// optional extra pointer (their characteristic functions multiply).
#[derive(Clone, Copy)]
pub struct PhaseNoise<'a> {
    pub readout_std: f64,
    pub pointer: Option<&'a dyn Pointer>,
}

impl<'a> PhaseNoise<'a> {
    pub fn readout(std: f64) -> Self {
        PhaseNoise {
            readout_std: std,
            pointer: None,
        }
    }

    pub fn xi(&self, x: f64) -> f64 {
        let g = (-0.5 * (self.readout_std * x).powi(2)).exp();
        match self.pointer {
            Some(p) => g * p.xi(x),
            None => g,
        }
    }

    /// Total variance when everything is Gaussian.
    fn gaussian_variance(&self) -> Option<f64> {
        let r = self.readout_std * self.readout_std;
        match self.pointer {
            None => Some(r),
            Some(p) => p.gaussian_variance().map(|v| v + r),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Route {
    XSpace,
    PhiSpace,
}

/// Phase averages of the post-undisplacement amplitudes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseMoments {
    /// `E[e^{−u}]`
    pub e: f64,
    /// `E[u e^{−u}]`
    pub ue: f64,
    /// `E[(1−u)² e^{−u}]`
    pub we: f64,
    /// `E[e^{iφ} (1−u) e^{−u}]`
    pub coherence: C64,
    /// `E[u² / (1 + (1−u)²)]`, the mean fringe-visibility deficit at fixed φ
    pub tracked_deficit: f64,
    /// estimated absolute error of the entries above
    pub uncertainty: f64,
}

fn u_of(beta: f64, phi: f64) -> f64 {
    let s = (0.5 * phi).sin();
    4.0 * beta * beta * s * s
}

const N_FUNCS: usize = 6;

/// `[e^{−u}, u e^{−u}, (1−u)² e^{−u}, Re, Im of e^{iφ}(1−u)e^{−u}, deficit]`
fn integrands(beta: f64, phi: f64) -> [f64; N_FUNCS] {
    let u = u_of(beta, phi);
    let e = (-u).exp();
    let w = 1.0 - u;
    let c = C64::from_polar(w * e, phi);
    [e, u * e, w * w * e, c.re, c.im, u * u / (1.0 + w * w)]
}

fn assemble(v: [f64; N_FUNCS], uncertainty: f64) -> PhaseMoments {
    PhaseMoments {
        e: v[0],
        ue: v[1],
        we: v[2],
        coherence: C64::new(v[3], v[4]),
        tracked_deficit: v[5],
        uncertainty,
    }
}

pub fn phase_moments(beta: f64, noise: &PhaseNoise<'_>, route: Route) -> Result<PhaseMoments> {
    if !(beta.is_finite() && beta >= 0.0) {
        return Err(crate::invalid("beta", format!("must be finite and >= 0, got {beta}")));
    }
    if !(noise.readout_std.is_finite() && noise.readout_std >= 0.0) {
        return Err(crate::invalid("readout_std", "must be finite and >= 0"));
    }
    match route {
        Route::XSpace => x_space(beta, noise),
        Route::PhiSpace => phi_space(beta, noise),
    }
}

/// Largest FFT used by the X-space route.
pub const MAX_FFT: usize = 1 << 24;

fn x_space(beta: f64, noise: &PhaseNoise<'_>) -> Result<PhaseMoments> {
    // the deficit is a rational function of cos φ with poles ~1/β off the
    // real axis; 200β nodes resolve its coefficients to rounding level
    let want = (200.0 * beta + 256.0).ceil() as usize;
    let n = want.next_power_of_two();
    if n > MAX_FFT {
        return Err(crate::invalid("beta", format!("X-space route needs {n} samples (max {MAX_FFT})")));
    }
    let mut planner = FftPlanner::<f64>::new();
    let fft = planner.plan_fft_forward(n);
    let mut bufs: Vec<Vec<C64>> = vec![vec![C64::new(0.0, 0.0); n]; N_FUNCS];
    for j in 0..n {
        let phi = 2.0 * PI * j as f64 / n as f64;
        for (b, v) in bufs.iter_mut().zip(integrands(beta, phi)) {
            b[j] = C64::new(v, 0.0);
        }
    }
    for b in bufs.iter_mut() {
        fft.process(b);
    }
    // ξ is even and real, so E[f] = Σ_m Re(f_m + f_{−m})/2 ξ(m) over m ≥ 0
    let mut acc = [0.0; N_FUNCS];
    let mut tail = 0.0f64;
    let half = n / 2;
    for m in 0..=half {
        let xi = noise.xi(m as f64);
        if xi < 1e-18 {
            break;
        }
        for (f, b) in acc.iter_mut().zip(&bufs) {
            let c = if m == 0 || m == half {
                b[m].re
            } else {
                b[m].re + b[n - m].re
            };
            *f += c / n as f64 * xi;
        }
        if m == half {
            tail = bufs.iter().map(|b| b[m].norm() / n as f64).fold(0.0, f64::max) * xi;
        }
    }
    Ok(assemble(acc, tail + 1e-15))
}

fn phi_space(beta: f64, noise: &PhaseNoise<'_>) -> Result<PhaseMoments> {
    if let Some(var) = noise.gaussian_variance() {
        let (v, err) = gaussian_average(beta, var.sqrt())?;
        return Ok(assemble(v.0, err));
    }
    let pointer = noise.pointer.expect("non-Gaussian noise always has a pointer");
    let floor = pointer.floor();
    let sd = noise.readout_std;
    // phase-free component, smeared by the readout noise
    let (base, base_err) = gaussian_average(beta, sd)?;
    let mut out = base * floor;
    // the integrands carry no Fourier weight beyond `band`, so ξ may be
    // tapered there without changing any average
    let band = 100.0 * beta + 128.0;
    let taper = 0.5 * band;
    let window = move |x: f64| {
        let over = (x.abs() - band).max(0.0) / taper;
        (-0.5 * over * over).exp()
    };
    let cont = |x: f64| (-0.5 * (sd * x).powi(2)).exp() * (pointer.xi(x) - floor) * window(x);
    let c0 = cont(0.0);
    if c0 <= 1e-15 {
        return Ok(assemble(out.0, base_err));
    }
    let x_half = bisect_level(&cont, 0.5 * c0);
    let x_cut = bisect_level(&cont, 1e-12);
    let inner = Quadrature::default().tolerances(1e-11, 1e-15);
    // ξ̃(φ) = (1/π) ∫_0^{Xc} ξ(X) cos(φX) dX, panels spanning ~4 oscillations
    let xi_tilde = |phi: f64| -> f64 {
        let panels = ((phi.abs() * x_cut / (8.0 * PI)).ceil() as usize).clamp(1, 4000);
        let pts: Vec<f64> = (0..=panels).map(|i| x_cut * i as f64 / panels as f64).collect();
        inner
            .integrate_breaks(|x: f64| cont(x) * (phi * x).cos(), &pts)
            .unwrap_or(f64::NAN)
            / PI
    };
    let phi_max = 60.0 / x_half;
    let width = (4.0 / x_half).min(1.0 / (beta + 1.0)).max(phi_max / 5000.0);
    let panels = (phi_max / width).ceil() as usize;
    let outer = Quadrature::default().tolerances(1e-10, 1e-14);
    let pts: Vec<f64> = (0..=panels).map(|i| phi_max * i as f64 / panels as f64).collect();
    let (val, mut err) = outer.integrate_breaks_with_error(
        |phi: f64| (Vals(integrands(beta, phi)) + Vals(integrands(beta, -phi))) * xi_tilde(phi),
        &pts,
    )?;
    out = out + val;
    // tail beyond φmax for both signs, |f| ≤ 2
    err += base_err + 4.0 * xi_tilde(phi_max).abs() * phi_max;
    if !err.is_finite() {
        return Err(Error::Quadrature {
            residual: f64::NAN,
            intervals: panels,
        });
    }
    Ok(assemble(out.0, err))
}

/// First `X > 0` where the decreasing function `f` drops to `level`.
fn bisect_level(f: &impl Fn(f64) -> f64, level: f64) -> f64 {
    let mut hi = 1e-6;
    while f(hi) > level && hi < 1e12 {
        hi *= 2.0;
    }
    let mut lo = 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid) > level {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-14 * hi {
            break;
        }
    }
    hi
}

/// `E[f(φ)]` for `φ ~ N(0, sd²)`, each integrand symmetrized.
fn gaussian_average(beta: f64, sd: f64) -> Result<(Vals, f64)> {
    if sd == 0.0 {
        return Ok((Vals(integrands(beta, 0.0)), 0.0));
    }
    let reach = 12.0 * sd;
    let width = sd.min(1.0 / (beta + 1.0)).max(reach / 20000.0);
    let panels = (reach / width).ceil() as usize;
    let pts: Vec<f64> = (0..=panels).map(|i| reach * i as f64 / panels as f64).collect();
    let norm = 1.0 / ((2.0 * PI).sqrt() * sd);
    Quadrature::default().tolerances(1e-12, 1e-17).integrate_breaks_with_error(
        |phi: f64| {
            let g = norm * (-0.5 * (phi / sd).powi(2)).exp();
            (Vals(integrands(beta, phi)) + Vals(integrands(beta, -phi))) * g
        },
        &pts,
    )
}

/// The six integrands carried through one quadrature pass.
#[derive(Debug, Clone, Copy)]
struct Vals([f64; N_FUNCS]);

impl std::ops::Add for Vals {
    type Output = Vals;
    fn add(mut self, o: Vals) -> Vals {
        self.0.iter_mut().zip(o.0).for_each(|(a, b)| *a += b);
        self
    }
}

impl std::ops::Sub for Vals {
    type Output = Vals;
    fn sub(mut self, o: Vals) -> Vals {
        self.0.iter_mut().zip(o.0).for_each(|(a, b)| *a -= b);
        self
    }
}

impl std::ops::Mul<f64> for Vals {
    type Output = Vals;
    fn mul(mut self, k: f64) -> Vals {
        self.0.iter_mut().for_each(|a| *a *= k);
        self
    }
}

impl Scalar for Vals {
    fn zero() -> Self {
        Vals([0.0; N_FUNCS])
    }
    fn magnitude(self) -> f64 {
        self.0.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}
