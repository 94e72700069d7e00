//! Entanglement witness between the optical modes and the mirror.
//!
//! Any state separable across AB|M has B|AM negativity at most `o_BM`, a
//! function of the joint statistics of the B homodyne sign and the mirror
//! position sign. Since the B|AM negativity bounds the A|B one, a measured
//! A|B negativity above `o_BM` certifies optomechanical entanglement.

use serde::{Deserialize, Serialize};

use crate::measurement::{correlations, visibility_pipeline, CorrelationResult, InterferenceResult, MethodChoice};
use crate::protocol::PhysParams;
use crate::Result;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Entangled,
    Inconclusive,
}

/// `√(P₊E₊ P₋E₊) + √(P₊E₋ P₋E₋)`.
pub fn o_bm(c: &CorrelationResult) -> f64 {
    (c.p_pp * c.p_mp).sqrt() + (c.p_pm * c.p_mm).sqrt()
}

/// `1/(2√(1 + (g0τβ)²/2))`, the bound for a continuous position record and
/// an adapted B measurement. Valid for `β ≫ 1`; informational only.
pub fn refined_bound(params: &PhysParams) -> f64 {
    let g = params.g_tau_beta();
    0.5 / (1.0 + 0.5 * g * g).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WitnessReport {
    pub negativity_lb: f64,
    pub o_bm: f64,
    pub refined_bound: f64,
    pub verdict: Verdict,
    pub correlations: CorrelationResult,
    pub interference: InterferenceResult,
}

/// Entangled iff `negativity_lb > o_bm` strictly.
pub fn verdict(correlations: CorrelationResult, interference: InterferenceResult, params: &PhysParams) -> WitnessReport {
    let bound = o_bm(&correlations);
    let nlb = interference.negativity_lb;
    WitnessReport {
        negativity_lb: nlb,
        o_bm: bound,
        refined_bound: refined_bound(params),
        verdict: if nlb > bound {
            Verdict::Entangled
        } else {
            Verdict::Inconclusive
        },
        correlations,
        interference,
    }
}

/// Correlations and visibility for `params`, then the verdict.
pub fn evaluate(params: &PhysParams, method: MethodChoice) -> Result<WitnessReport> {
    let c = correlations(params, method)?;
    let i = visibility_pipeline(params, None)?;
    Ok(verdict(c, i, params))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measurement::{homodyne_overlap, negativity_lower_bound, CorrelationMethod};
    use crate::protocol::tests_support::device_like;
    use crate::C64;
    use nalgebra::{DMatrix, DVector};
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use rand_distr::StandardNormal;

    fn result(p: [f64; 4]) -> CorrelationResult {
        CorrelationResult {
            p_pp: p[0],
            p_pm: p[1],
            p_mp: p[2],
            p_mm: p[3],
            correlation: p[0] + p[3] - p[1] - p[2],
            method: CorrelationMethod::Exact,
        }
    }

    #[test]
    fn uncorrelated_gives_half() {
        assert!((o_bm(&result([0.25; 4])) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn refined_bound_values() {
        let p = device_like(1.5, 4e4);
        assert!((refined_bound(&p) - 0.5 / 2.125f64.sqrt()).abs() < 1e-12);
        assert!((refined_bound(&device_like(0.0, 4e4)) - 0.5).abs() < 1e-15);
        assert!(refined_bound(&device_like(1e6, 4e4)) < 1e-6);
    }

    #[test]
    fn asymptote() {
        let r = evaluate(&device_like(1e3, 4e4), MethodChoice::Auto).unwrap();
        let c = 2.0 / std::f64::consts::PI;
        assert!((r.o_bm - 0.5 * (1.0 - c * c).sqrt()).abs() < 1e-5);
    }

    #[test]
    fn device_point_is_entangled() {
        let r = evaluate(&device_like(1.5, 4e4), MethodChoice::Auto).unwrap();
        assert!((r.o_bm - 0.43).abs() < 0.03, "{r:?}");
        assert_eq!(r.verdict, Verdict::Entangled);
    }

    #[test]
    fn no_interaction_is_inconclusive() {
        let p = PhysParams {
            g0: 0.0,
            ..device_like(1.0, 3.0)
        };
        let r = evaluate(&p, MethodChoice::Exact).unwrap();
        assert!((r.negativity_lb - 0.5).abs() < 1e-12);
        assert!((r.o_bm - 0.5).abs() < 1e-12);
        assert_eq!(r.verdict, Verdict::Inconclusive);
    }

    #[test]
    fn label_swap_symmetry() {
        let c = result([0.4, 0.1, 0.2, 0.3]);
        let swapped = result([c.p_mm, c.p_mp, c.p_pm, c.p_pp]);
        assert!((o_bm(&c) - o_bm(&swapped)).abs() < 1e-15);
    }

    fn random_qubit_pair(rng: &mut ChaCha8Rng) -> DMatrix<C64> {
        let rank = rng.gen_range(1..=4);
        let mut rho = DMatrix::<C64>::zeros(4, 4);
        for _ in 0..rank {
            let v = DVector::<C64>::from_fn(4, |_, _| C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)));
            rho += &v * v.adjoint() * C64::new(rng.gen::<f64>(), 0.0);
        }
        let tr = rho.trace();
        rho / tr
    }

    #[test]
    fn separable_states_never_violate_bound() {
        // AB in {|0>,|1>}², index 2a + b; mirror reduced to P(E₊)
        let c = homodyne_overlap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..2000 {
            let terms = rng.gen_range(1..=4);
            let weights: Vec<f64> = (0..terms).map(|_| rng.gen::<f64>()).collect();
            let wsum: f64 = weights.iter().sum();
            let mut rho = DMatrix::<C64>::zeros(4, 4);
            let mut p = [0.0; 4];
            for w in weights {
                let q = w / wsum;
                let r = random_qubit_pair(&mut rng);
                // 2 Re <0|ρ_B|1>
                let x = 2.0 * (r[(0, 1)] + r[(2, 3)]).re;
                let e_plus = rng.gen::<f64>();
                let pb = [0.5 + c * x, 0.5 - c * x];
                p[0] += q * pb[0] * e_plus;
                p[1] += q * pb[0] * (1.0 - e_plus);
                p[2] += q * pb[1] * e_plus;
                p[3] += q * pb[1] * (1.0 - e_plus);
                rho += r * C64::new(q, 0.0);
            }
            let (p00, p01, p10, p11) = (rho[(0, 0)].re, rho[(1, 1)].re, rho[(2, 2)].re, rho[(3, 3)].re);
            let v = 2.0 * rho[(1, 2)].norm() / (p01 + p10);
            let nlb = negativity_lower_bound(p00, p01, p10, p11, v);
            assert!(nlb <= o_bm(&result(p)) + 1e-12, "{nlb} > {}", o_bm(&result(p)));
        }
    }

    #[test]
    fn report_round_trips() {
        let r = evaluate(&device_like(1.5, 20.0), MethodChoice::Exact).unwrap();
        let s = serde_json::to_string(&r).unwrap();
        assert_eq!(serde_json::from_str::<WitnessReport>(&s).unwrap(), r);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]
        #[test]
        fn thermal_noise_raises_bound(g in 0.3..3.0f64, n1 in 0.0..4.0f64, n2 in 0.0..4.0f64) {
            let (lo, hi) = (n1.min(n2), n1.max(n2));
            for method in [MethodChoice::Exact, MethodChoice::ClosedForm] {
                let o = |n_th: f64| o_bm(&correlations(&PhysParams { n_th, ..device_like(g, 30.0) }, method).unwrap());
                prop_assert!(o(hi) >= o(lo) - 1e-12);
                prop_assert!(o(hi) <= 0.5 + 1e-12);
            }
        }
    }
}
