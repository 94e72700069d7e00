//! Brute-force reference simulation on a truncated Fock space.
//!
//! Every mode is a dense vector: A and the mirror are truncated at the same
//! cutoff, B is a qubit in its photon-number basis. Displacements are matrix
//! exponentials of the truncated generators, position statistics use
//! Hermite-function wavefunctions on a composite Gauss-Legendre grid. None of
//! the closed forms of the main engine are used, so agreement between the two
//! is a meaningful check.

use std::f64::consts::{FRAC_1_SQRT_2, PI, SQRT_2};

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::measurement::{
    correlations, negativity_lower_bound, visibility_pipeline, CorrelationMethod, CorrelationResult, MethodChoice,
};
use crate::protocol::{evolve, prepare_input, HybridState, PhysParams};
use crate::qcore::fock::coherent_coefficients;
use crate::qcore::{default_kmax, GaussLegendre};
use crate::{Error, Result, C64};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OracleConfig {
    /// Fock levels kept for A and for the mirror
    pub fock_cutoff: usize,
}

impl OracleConfig {
    pub const MIN_CUTOFF: usize = 16;

    pub fn new(fock_cutoff: usize) -> Result<Self> {
        if fock_cutoff < Self::MIN_CUTOFF {
            return Err(crate::invalid(
                "fock_cutoff",
                format!("must be >= {}, got {fock_cutoff}", Self::MIN_CUTOFF),
            ));
        }
        Ok(OracleConfig { fock_cutoff })
    }
}

impl Default for OracleConfig {
    fn default() -> Self {
        OracleConfig { fock_cutoff: 60 }
    }
}

/// Dense `A ⊗ B ⊗ M` amplitudes, index `(2k + b)·N + m`.
#[derive(Debug, Clone, PartialEq)]
pub struct FockState {
    pub cutoff: usize,
    pub amps: Vec<C64>,
}

impl FockState {
    fn zeros(cutoff: usize) -> Self {
        FockState {
            cutoff,
            amps: vec![C64::new(0.0, 0.0); 2 * cutoff * cutoff],
        }
    }

    fn idx(&self, k: usize, b: usize, m: usize) -> usize {
        (2 * k + b) * self.cutoff + m
    }

    /// Mirror vector of the `(k, b)` component.
    fn mirror(&self, k: usize, b: usize) -> &[C64] {
        let s = self.idx(k, b, 0);
        &self.amps[s..s + self.cutoff]
    }

    pub fn inner(&self, other: &FockState) -> C64 {
        self.amps.iter().zip(&other.amps).map(|(a, b)| a.conj() * b).sum()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    /// `2<⟨−|_B ψ | ⟨+|_B ψ>`.
    pub fn family_overlap(&self) -> C64 {
        let n = self.cutoff;
        let mut acc = C64::new(0.0, 0.0);
        for k in 0..n {
            for m in 0..n {
                let z = self.amps[self.idx(k, 0, m)];
                let o = self.amps[self.idx(k, 1, m)];
                let minus = (z - o) * FRAC_1_SQRT_2;
                let plus = (z + o) * FRAC_1_SQRT_2;
                acc += minus.conj() * plus;
            }
        }
        acc * 2.0
    }
}

fn lowering(n: usize) -> DMatrix<C64> {
    DMatrix::from_fn(n, n, |i, j| {
        if j == i + 1 {
            C64::new((j as f64).sqrt(), 0.0)
        } else {
            C64::new(0.0, 0.0)
        }
    })
}

/// `exp(α a† − α* a)` on the truncated space.
fn displacement_expm(alpha: C64, n: usize) -> DMatrix<C64> {
    let a = lowering(n);
    let g = a.adjoint() * alpha - &a * alpha.conj();
    g.exp()
}

/// Kicked mirror vectors `D(−i g0τ k) e^{−iωm t b†b} |m0>` for every `k`,
/// using `D(−i g0τ k) = D(−i g0τ)^k`.
fn kicked_mirror(coupling: f64, phase: f64, n: usize, m0: usize) -> Vec<Vec<C64>> {
    let step = displacement_expm(C64::new(0.0, -coupling), n);
    let mut v = DVector::<C64>::from_fn(n, |m, _| C64::new(if m == m0 { 1.0 } else { 0.0 }, 0.0));
    (0..n)
        .map(|_| {
            let out = (0..n).map(|m| v[m] * C64::from_polar(1.0, -phase * m as f64)).collect();
            v = &step * &v;
            out
        })
        .collect()
}

/// State after the kick and a free evolution `t`, mirror starting in `|m0>`.
fn state_from(params: &PhysParams, t: f64, cfg: &OracleConfig, m0: usize) -> FockState {
    let n = cfg.fock_cutoff;
    let da = displacement_expm(C64::new(params.beta, 0.0), n);
    let mirror = kicked_mirror(params.coupling(), params.omega_m * t, n, m0);
    let mut s = FockState::zeros(n);
    let r = FRAC_1_SQRT_2;
    for k in 0..n {
        // D(β)(|1>|0> − |0>|1>)/√2
        let a = [da[(k, 1)] * r, -da[(k, 0)] * r];
        for (b, ab) in a.iter().enumerate() {
            for m in 0..n {
                let i = s.idx(k, b, m);
                s.amps[i] = ab * mirror[k][m];
            }
        }
    }
    s
}

/// Pure state for a ground-state mirror.
pub fn oracle_state(params: &PhysParams, t: f64, cfg: &OracleConfig) -> Result<FockState> {
    params.validate()?;
    OracleConfig::new(cfg.fock_cutoff)?;
    Ok(state_from(params, t, cfg, 0))
}

/// Project an engine state onto the truncated Fock space.
pub fn engine_in_fock(state: &HybridState, cutoff: usize) -> FockState {
    let mut s = FockState::zeros(cutoff);
    for br in state.branches.iter().filter(|b| b.k < cutoff) {
        let coh = coherent_coefficients(br.mech.alpha(), cutoff);
        let bvec = [FRAC_1_SQRT_2, FRAC_1_SQRT_2 * br.qubit.value()];
        for (b, bv) in bvec.iter().enumerate() {
            for (m, c) in coh.iter().enumerate() {
                let i = s.idx(br.k, b, m);
                s.amps[i] += br.amp * *bv * c;
            }
        }
    }
    s
}

/// `φ_0..φ_{n−1}` at `x` for the quadrature `X = (b + b†)/√2`.
fn hermite_functions(x: f64, n: usize) -> Vec<f64> {
    let mut out = vec![0.0; n];
    out[0] = PI.powf(-0.25) * (-0.5 * x * x).exp();
    if n > 1 {
        out[1] = SQRT_2 * x * out[0];
    }
    for j in 1..n.saturating_sub(1) {
        let jf = j as f64;
        out[j + 1] = (2.0 / (jf + 1.0)).sqrt() * x * out[j] - (jf / (jf + 1.0)).sqrt() * out[j - 1];
    }
    out
}

/// Composite Gauss-Legendre nodes on `[a, b]` with panels no wider than `width`.
fn grid(a: f64, b: f64, width: f64) -> Vec<(f64, f64)> {
    let rule = GaussLegendre::new(20).expect("20 >= minimum");
    let panels = ((b - a) / width).ceil().max(1.0) as usize;
    let h = (b - a) / panels as f64;
    let mut out = Vec::with_capacity(panels * rule.len());
    for p in 0..panels {
        let mid = a + (p as f64 + 0.5) * h;
        for (x, w) in rule.nodes().iter().zip(rule.weights()) {
            out.push((mid + 0.5 * h * x, 0.5 * h * w));
        }
    }
    out
}

/// Extent of the truncated Hermite functions.
fn reach(cutoff: usize) -> f64 {
    (2.0 * cutoff as f64 + 1.0).sqrt() + 6.0
}

fn normal_cdf(z: f64) -> f64 {
    0.5 * libm::erfc(-z / SQRT_2)
}

/// `P(s, E)` at a quarter period by position integration of the mirror
/// wavefunctions; thermal mirrors as mixtures of Fock states.
pub fn oracle_correlations(params: &PhysParams, cfg: &OracleConfig) -> Result<CorrelationResult> {
    params.validate()?;
    let n = OracleConfig::new(cfg.fock_cutoff)?.fock_cutoff;
    let t = PI / (2.0 * params.omega_m);
    // thermal weights of the initial mirror
    let mut initial = Vec::new();
    let mut kept = 0.0;
    let q = params.n_th / (1.0 + params.n_th);
    for m0 in 0..n {
        let w = (1.0 - q) * q.powi(m0 as i32);
        initial.push((m0, w));
        kept += w;
        if 1.0 - kept < 1e-13 {
            break;
        }
    }
    if 1.0 - kept > 1e-9 {
        return Err(Error::Truncation {
            kmax: n - 1,
            achieved_norm: kept,
            required: 1.0 - 1e-9,
        });
    }
    let states: Vec<(FockState, f64)> = initial
        .iter()
        .map(|&(m0, w)| (state_from(params, t, cfg, m0), w))
        .collect();

    let r = reach(n);
    let c = grid(0.0, r, 0.25)
        .iter()
        .map(|&(x, w)| {
            let h = hermite_functions(x, 2);
            w * h[0] * h[1]
        })
        .sum::<f64>();
    // B block of the mirror-position density at `x`, summed over k and the mixture
    let density = |x: f64| -> [f64; 3] {
        let h = hermite_functions(x, n);
        let mut d = [0.0; 3];
        for (s, pw) in &states {
            for k in 0..n {
                let psi: [C64; 2] = [0, 1].map(|b| s.mirror(k, b).iter().zip(&h).map(|(a, hv)| a * hv).sum());
                d[0] += pw * psi[0].norm_sqr();
                d[1] += pw * psi[1].norm_sqr();
                d[2] += pw * (psi[0].conj() * psi[1]).re;
            }
        }
        d
    };
    let mut total = 0.0;
    let mut first = 0.0;
    for (x, w) in grid(-r, r, 0.25) {
        let d = density(x);
        total += w * (d[0] + d[1]);
        first += w * x * (d[0] + d[1]);
    }
    let mean = first / total;
    let sigma = params.dx / (SQRT_2 * params.x0());
    let mut nodes = grid(-r, mean, 0.25);
    nodes.extend(grid(mean, r, 0.25));
    let mut p = [[0.0; 2]; 2];
    for (x, w) in nodes {
        let d = density(x);
        let e_plus = if sigma > 0.0 {
            normal_cdf((x - mean) / sigma)
        } else if x >= mean {
            1.0
        } else {
            0.0
        };
        for (si, s) in [1.0, -1.0].into_iter().enumerate() {
            // tr(Π_s ρ_B(x)) with Π_s = ½ + s c σx
            let pb = 0.5 * (d[0] + d[1]) + 2.0 * s * c * d[2];
            p[si][0] += w * pb * e_plus;
            p[si][1] += w * pb * (1.0 - e_plus);
        }
    }
    let norm = p.iter().flatten().sum::<f64>();
    let [[p_pp, p_pm], [p_mp, p_mm]] = p.map(|row| row.map(|v| v / norm));
    Ok(CorrelationResult {
        p_pp,
        p_pm,
        p_mp,
        p_mm,
        correlation: p_pp + p_mm - p_pm - p_mp,
        method: CorrelationMethod::Exact,
    })
}

/// Detection statistics after position readout, feedback and `D(−β)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OracleInterference {
    pub visibility: f64,
    pub p00: f64,
    pub p01: f64,
    pub p10: f64,
    pub p11: f64,
    pub subspace_probability: f64,
    pub negativity_lb: f64,
}

/// Read the mirror at `t = nπ/ωm` with Gaussian imprecision `dx`, remove
/// the phase `e^{i Im(α_k) x̂/x0}` on the posterior mean `x̂`, apply `D(−β)`
/// and integrate over outcomes.
pub fn oracle_interference(params: &PhysParams, cfg: &OracleConfig, n_half_periods: u32) -> Result<OracleInterference> {
    params.validate()?;
    if n_half_periods == 0 {
        return Err(crate::invalid("n_half_periods", "must be >= 1"));
    }
    let n = OracleConfig::new(cfg.fock_cutoff)?.fock_cutoff;
    let t = n_half_periods as f64 * PI / params.omega_m;
    let state = state_from(params, t, cfg, 0);
    let undo = displacement_expm(C64::new(-params.beta, 0.0), n);
    let sign = if n_half_periods % 2 == 1 { 1.0 } else { -1.0 };
    let g = params.coupling();
    let x0 = params.x0();
    let lambda = x0 * x0 / (x0 * x0 + params.dx * params.dx);
    let sigma = params.dx / (SQRT_2 * x0);
    let kmax = n as f64;
    let r = reach(n);
    let xs = grid(-r, r, (10.0 / (SQRT_2 * g * kmax + 1.0)).min(0.5));
    let ts = if sigma > 0.0 {
        grid(-9.0, 9.0, (10.0 / (sigma * lambda * SQRT_2 * g * kmax + 1.0)).min(0.5))
    } else {
        vec![(0.0, 1.0)]
    };
    let mut rho = [[C64::new(0.0, 0.0); 4]; 4];
    let mut psi = vec![[C64::new(0.0, 0.0); 2]; n];
    for &(x, wx) in &xs {
        let h = hermite_functions(x, n);
        for (k, p) in psi.iter_mut().enumerate() {
            for (b, v) in p.iter_mut().enumerate() {
                *v = state.mirror(k, b).iter().zip(&h).map(|(a, hv)| a * hv).sum();
            }
        }
        for &(tn, wt) in &ts {
            let weight = if sigma > 0.0 {
                wx * wt * (-0.5 * tn * tn).exp() / (2.0 * PI).sqrt()
            } else {
                wx
            };
            let est = lambda * (x + sigma * tn);
            let z = C64::from_polar(1.0, -sign * SQRT_2 * g * est);
            let mut phi = [C64::new(0.0, 0.0); 4];
            let mut zk = C64::new(1.0, 0.0);
            for (k, p) in psi.iter().enumerate() {
                for m in 0..2 {
                    let dz = undo[(m, k)] * zk;
                    phi[2 * m] += dz * p[0];
                    phi[2 * m + 1] += dz * p[1];
                }
                zk *= z;
            }
            for i in 0..4 {
                for j in 0..4 {
                    rho[i][j] += phi[i] * phi[j].conj() * weight;
                }
            }
        }
    }
    let p = [rho[0][0].re, rho[1][1].re, rho[2][2].re, rho[3][3].re];
    let block: f64 = p.iter().sum();
    let coherence = 2.0 * rho[1][2].norm();
    let fringe = (coherence / (p[1] + p[2])).min(1.0);
    Ok(OracleInterference {
        visibility: coherence,
        p00: p[0] / block,
        p01: p[1] / block,
        p10: p[2] / block,
        p11: p[3] / block,
        subspace_probability: block,
        negativity_lb: negativity_lower_bound(p[0], p[1], p[2], p[3], fringe),
    })
}

/// Largest deviations between the engine and the oracle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub beta: f64,
    pub coupling: f64,
    pub fock_cutoff: usize,
    /// `|<engine|oracle> − 1|` at a quarter and a half period
    pub state_overlap: f64,
    pub family_overlap: f64,
    pub correlations: f64,
    pub visibility: f64,
    pub probabilities: f64,
    pub negativity: f64,
}

impl ValidationReport {
    pub fn max_deviation(&self) -> f64 {
        [
            self.state_overlap,
            self.family_overlap,
            self.correlations,
            self.visibility,
            self.probabilities,
            self.negativity,
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }
}

pub fn validate(params: &PhysParams, cfg: &OracleConfig) -> Result<ValidationReport> {
    params.validate()?;
    let n = OracleConfig::new(cfg.fock_cutoff)?.fock_cutoff;
    let input = prepare_input(params, default_kmax(params.beta))?;
    let mut state_overlap = 0.0f64;
    let mut family_overlap = 0.0f64;
    for t in [PI / (2.0 * params.omega_m), PI / params.omega_m] {
        let engine = evolve(&input, t)?;
        let oracle = state_from(params, t, cfg, 0);
        let projected = engine_in_fock(&engine, n);
        state_overlap = state_overlap.max((projected.inner(&oracle) - 1.0).norm());
        family_overlap = family_overlap.max((engine.family_overlap() - oracle.family_overlap()).norm());
    }
    let ce = correlations(params, MethodChoice::Exact)?;
    let co = oracle_correlations(params, cfg)?;
    let correlations = [
        (ce.p_pp, co.p_pp),
        (ce.p_pm, co.p_pm),
        (ce.p_mp, co.p_mp),
        (ce.p_mm, co.p_mm),
    ]
    .iter()
    .map(|(a, b)| (a - b).abs())
    .fold(0.0, f64::max);
    let ie = visibility_pipeline(params, None)?;
    let io = oracle_interference(params, cfg, 1)?;
    let probabilities = [
        (ie.p00, io.p00),
        (ie.p01, io.p01),
        (ie.p10, io.p10),
        (ie.p11, io.p11),
        (ie.subspace_probability, io.subspace_probability),
    ]
    .iter()
    .map(|(a, b)| (a - b).abs())
    .fold(0.0, f64::max);
    Ok(ValidationReport {
        beta: params.beta,
        coupling: params.coupling(),
        fock_cutoff: n,
        state_overlap,
        family_overlap,
        correlations,
        visibility: (ie.visibility - io.visibility).abs(),
        probabilities,
        negativity: (ie.negativity_lb - io.negativity_lb).abs(),
    })
}

/// Monte-Carlo estimate of `P(s, E)`: `shots` sign pairs drawn from the
/// oracle joint distribution.
pub fn sample_correlations(params: &PhysParams, cfg: &OracleConfig, shots: usize, seed: u64) -> Result<CorrelationResult> {
    use rand::{Rng, SeedableRng};
    let exact = oracle_correlations(params, cfg)?;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let cum = [exact.p_pp, exact.p_pp + exact.p_pm, exact.p_pp + exact.p_pm + exact.p_mp];
    let mut counts = [0usize; 4];
    for _ in 0..shots {
        let u: f64 = rng.gen();
        let i = cum.iter().position(|&c| u < c).unwrap_or(3);
        counts[i] += 1;
    }
    let f = |i: usize| counts[i] as f64 / shots as f64;
    Ok(CorrelationResult {
        p_pp: f(0),
        p_pm: f(1),
        p_mp: f(2),
        p_mm: f(3),
        correlation: f(0) + f(3) - f(1) - f(2),
        method: CorrelationMethod::Exact,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::protocol::tests_support::device_like;

    fn small(g_tau: f64, beta: f64, dx: f64) -> PhysParams {
        let mut p = device_like(g_tau * beta, beta);
        p.dx = dx * p.x0();
        p
    }

    #[test]
    fn expm_displacement_matches_recurrence() {
        let a = C64::new(0.7, -0.4);
        let e = displacement_expm(a, 60);
        let r = crate::qcore::fock::displacement_matrix(a, 60);
        for i in 0..20 {
            for j in 0..4 {
                assert!((e[(i, j)] - r[(i, j)]).norm() < 1e-12, "{i},{j}");
            }
        }
    }

    #[test]
    fn hermite_functions_orthonormal() {
        let xs = grid(-reach(30), reach(30), 0.25);
        let mut g = [[0.0; 30]; 30];
        for (x, w) in xs {
            let h = hermite_functions(x, 30);
            for i in 0..30 {
                for j in 0..30 {
                    g[i][j] += w * h[i] * h[j];
                }
            }
        }
        for (i, row) in g.iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((v - want).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn engine_and_oracle_agree_at_small_beta() {
        let r = validate(&small(0.2, 1.5, 0.7), &OracleConfig::default()).unwrap();
        assert!(r.max_deviation() < 1e-6, "{r:?}");
    }

    #[test]
    fn rejects_small_cutoff() {
        assert!(OracleConfig::new(8).is_err());
    }

    #[test]
    fn sampled_correlations_converge() {
        let p = small(0.3, 1.0, 0.5);
        let cfg = OracleConfig::new(30).unwrap();
        let exact = oracle_correlations(&p, &cfg).unwrap();
        let s = sample_correlations(&p, &cfg, 200_000, 3).unwrap();
        assert!((s.correlation - exact.correlation).abs() < 0.01);
        assert_eq!(s, sample_correlations(&p, &cfg, 200_000, 3).unwrap());
    }
}
