use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Required normalization of a truncated amplitude list.
pub const NORM_TOLERANCE: f64 = 1e-8;

/// Label of the qubit states `|±> = (|0> ± |1>)/√2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn value(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }

    pub fn flip(self) -> Sign {
        match self {
            Sign::Plus => Sign::Minus,
            Sign::Minus => Sign::Plus,
        }
    }
}

/// Truncation `ceil(β² + 10·√(β²+1))`, a ten-sigma bound on the photon-number
/// tail of `D(β)|±>`.
pub fn default_kmax(beta: f64) -> usize {
    let b2 = beta * beta;
    (b2 + 10.0 * (b2 + 1.0).sqrt()).ceil() as usize
}

/// Photon-number amplitudes of `D(β)|±>` for `k = 0..=kmax`:
///
/// `a(k) = e^{-β²/2} β^k / √(2 k!) · (1 ± (k/β − β))`
///
/// evaluated in log space so that β up to a few hundred stays finite.
pub fn displaced_amplitudes(beta: f64, sign: Sign, kmax: usize) -> Result<Vec<f64>> {
    if !beta.is_finite() || beta < 0.0 {
        return Err(crate::invalid("beta", format!("must be finite and >= 0, got {beta}")));
    }
    let s = sign.value();
    let amps: Vec<f64> = if beta == 0.0 {
        // D(0) = 1: the amplitudes of |±> itself.
        (0..=kmax)
            .map(|k| match k {
                0 => std::f64::consts::FRAC_1_SQRT_2,
                1 => s * std::f64::consts::FRAC_1_SQRT_2,
                _ => 0.0,
            })
            .collect()
    } else {
        let ln_beta = beta.ln();
        (0..=kmax)
            .map(|k| {
                let kf = k as f64;
                let ln_poisson = -beta * beta + 2.0 * kf * ln_beta - libm::lgamma(kf + 1.0);
                (0.5 * ln_poisson).exp() * std::f64::consts::FRAC_1_SQRT_2 * (1.0 + s * (kf / beta - beta))
            })
            .collect()
    };
    let norm: f64 = amps.iter().map(|a| a * a).sum();
    if norm < 1.0 - NORM_TOLERANCE {
        return Err(Error::Truncation {
            kmax,
            achieved_norm: norm,
            required: 1.0 - NORM_TOLERANCE,
        });
    }
    Ok(amps)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::FRAC_1_SQRT_2;

    fn moments(a: &[f64]) -> (f64, f64, f64) {
        let n: f64 = a.iter().map(|x| x * x).sum();
        let m1: f64 = a.iter().enumerate().map(|(k, x)| k as f64 * x * x).sum();
        let m2: f64 = a.iter().enumerate().map(|(k, x)| (k * k) as f64 * x * x).sum();
        (n, m1, m2 - m1 * m1)
    }

    #[test]
    fn beta_zero_is_plus_state() {
        let a = displaced_amplitudes(0.0, Sign::Plus, 2).unwrap();
        assert_eq!(a, vec![FRAC_1_SQRT_2, FRAC_1_SQRT_2, 0.0]);
        let a = displaced_amplitudes(0.0, Sign::Minus, 3).unwrap();
        assert_eq!(a, vec![FRAC_1_SQRT_2, -FRAC_1_SQRT_2, 0.0, 0.0]);
    }

    #[test]
    fn beta_two_normalized_orthogonal_and_mean() {
        let kmax = default_kmax(2.0);
        let p = displaced_amplitudes(2.0, Sign::Plus, kmax).unwrap();
        let m = displaced_amplitudes(2.0, Sign::Minus, kmax).unwrap();
        let (n, mean, _) = moments(&p);
        assert_abs_diff_eq!(n, 1.0, epsilon = 1e-10);
        assert_abs_diff_eq!(mean, 6.5, epsilon = 1e-9);
        let cross: f64 = p.iter().zip(&m).map(|(x, y)| x * y).sum();
        assert_abs_diff_eq!(cross, 0.0, epsilon = 1e-10);
        let (_, mean_m, _) = moments(&m);
        assert_abs_diff_eq!(mean_m, 2.5, epsilon = 1e-9);
    }

    #[test]
    fn families_normalized_orthogonal_with_quarter_variance() {
        for beta in [0.5, 1.0, 2.0, 5.0, 10.0] {
            let kmax = default_kmax(beta);
            let p = displaced_amplitudes(beta, Sign::Plus, kmax).unwrap();
            let m = displaced_amplitudes(beta, Sign::Minus, kmax).unwrap();
            let cross: f64 = p.iter().zip(&m).map(|(x, y)| x * y).sum();
            assert!(cross.abs() < 1e-9, "beta={beta}: overlap {cross}");
            for (a, s) in [(&p, 1.0), (&m, -1.0)] {
                let (n, mean, var) = moments(a);
                assert!((n - 1.0).abs() < 1e-9);
                assert!((mean - (beta * beta + s * beta + 0.5)).abs() < 1e-8 * (1.0 + beta * beta));
                assert!((var - (beta * beta + 0.25)).abs() < 1e-8 * (1.0 + beta * beta), "var {var}");
            }
        }
    }

    #[test]
    fn large_beta_stays_finite() {
        let beta = 200.0;
        let a = displaced_amplitudes(beta, Sign::Minus, default_kmax(beta)).unwrap();
        assert!(a.iter().all(|x| x.is_finite()));
        let (n, mean, _) = moments(&a);
        assert_abs_diff_eq!(n, 1.0, epsilon = 1e-9);
        assert_abs_diff_eq!(mean, beta * beta - beta + 0.5, epsilon = 1e-5);
    }

    #[test]
    fn short_truncation_is_rejected() {
        match displaced_amplitudes(3.0, Sign::Plus, 5) {
            Err(Error::Truncation { kmax, achieved_norm, .. }) => {
                assert_eq!(kmax, 5);
                assert!(achieved_norm < 1.0);
            }
            other => panic!("expected truncation error, got {other:?}"),
        }
        assert!(displaced_amplitudes(-1.0, Sign::Plus, 10).is_err());
    }
}
