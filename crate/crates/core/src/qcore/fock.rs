//! Truncated Fock-space helpers for small optical modes.

use nalgebra::DMatrix;

use crate::C64;

/// Fock coefficients `e^{-|α|²/2} α^n / √n!` of a coherent state, `n < dim`.
pub fn coherent_coefficients(alpha: C64, dim: usize) -> Vec<C64> {
    let mut out = Vec::with_capacity(dim);
    if dim == 0 {
        return out;
    }
    let mut c = C64::new((-0.5 * alpha.norm_sqr()).exp(), 0.0);
    out.push(c);
    for n in 1..dim {
        c = c * alpha / (n as f64).sqrt();
        out.push(c);
    }
    out
}

/// Matrix elements `<m|D(α)|n>` for `m, n < dim`.
///
/// Columns follow from `D(α)|n> = (a† − α*) D(α)|n−1> / √n`, which only
/// lowers indices through `a†`, so every element inside the block is exact
/// (no truncation artefact at the edge).
pub fn displacement_matrix(alpha: C64, dim: usize) -> DMatrix<C64> {
    let mut d = DMatrix::<C64>::zeros(dim, dim);
    if dim == 0 {
        return d;
    }
    for (m, c) in coherent_coefficients(alpha, dim).into_iter().enumerate() {
        d[(m, 0)] = c;
    }
    let ac = alpha.conj();
    for n in 1..dim {
        let inv = 1.0 / (n as f64).sqrt();
        for m in 0..dim {
            let raised = if m > 0 { d[(m - 1, n - 1)] * (m as f64).sqrt() } else { C64::new(0.0, 0.0) };
            d[(m, n)] = (raised - ac * d[(m, n - 1)]) * inv;
        }
    }
    d
}

/// Ground and first excited oscillator wavefunctions in the dimensionless
/// quadrature `X = (b + b†)/√2`.
pub fn oscillator_ground(x: f64) -> f64 {
    std::f64::consts::PI.powf(-0.25) * (-0.5 * x * x).exp()
}

pub fn oscillator_first(x: f64) -> f64 {
    std::f64::consts::SQRT_2 * x * oscillator_ground(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn displacement_is_unitary_on_low_block() {
        let d = displacement_matrix(C64::new(0.8, -0.3), 60);
        let id = d.adjoint() * &d;
        for r in 0..10 {
            for c in 0..10 {
                let expect = if r == c { 1.0 } else { 0.0 };
                assert!((id[(r, c)] - C64::new(expect, 0.0)).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn closed_form_low_elements() {
        // <1|D(α)|0> = α e^{-|α|²/2},  <1|D(α)|1> = (1 − |α|²) e^{-|α|²/2}
        let a = C64::new(-1.7, 0.4);
        let d = displacement_matrix(a, 8);
        let g = (-0.5 * a.norm_sqr()).exp();
        assert!((d[(1, 0)] - a * g).norm() < 1e-14);
        assert!((d[(1, 1)] - C64::new((1.0 - a.norm_sqr()) * g, 0.0)).norm() < 1e-14);
        assert!((d[(0, 1)] + a.conj() * g).norm() < 1e-14);
    }

    #[test]
    fn wavefunctions_are_normalized() {
        let q = crate::qcore::Quadrature::default();
        let n0 = q
            .integrate(|x| oscillator_ground(x).powi(2), crate::qcore::Interval::Whole)
            .unwrap();
        let n1 = q
            .integrate(|x| oscillator_first(x).powi(2), crate::qcore::Interval::Whole)
            .unwrap();
        assert!((n0 - 1.0).abs() < 1e-12 && (n1 - 1.0).abs() < 1e-12);
    }
}
