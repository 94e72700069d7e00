use serde::{Deserialize, Serialize};

use crate::C64;

/// Complex amplitude of a mechanical coherent state.
///
/// Position and momentum readouts follow `x_m = x0 (m + m†)` and
/// `p_m = i p0 (m − m†)`, so `|α>` has mean position `2 x0 Re α` and mean
/// momentum `−2 p0 Im α`. With the kick label `−i g0 τ k` the momentum right
/// after the pulse is `+2 g0 τ k p0` and the mirror then swings to negative
/// positions.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct CoherentLabel(pub C64);

impl CoherentLabel {
    pub const VACUUM: CoherentLabel = CoherentLabel(C64::new(0.0, 0.0));

    pub fn new(re: f64, im: f64) -> Self {
        CoherentLabel(C64::new(re, im))
    }

    pub fn alpha(self) -> C64 {
        self.0
    }

    pub fn position_mean(self, x0: f64) -> f64 {
        2.0 * x0 * self.0.re
    }

    pub fn momentum_mean(self, p0: f64) -> f64 {
        -2.0 * p0 * self.0.im
    }

    pub fn scaled(self, k: f64) -> Self {
        CoherentLabel(self.0 * k)
    }
}

/// `<a|b> = exp(−|a|²/2 − |b|²/2 + a* b)`.
pub fn coherent_overlap(a: CoherentLabel, b: CoherentLabel) -> C64 {
    let (a, b) = (a.0, b.0);
    (-0.5 * a.norm_sqr() - 0.5 * b.norm_sqr() + a.conj() * b).exp()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    /// Fock-sum overlap, independent of the closed form.
    fn fock_overlap(a: C64, b: C64, cutoff: usize) -> C64 {
        let mut ca = C64::new((-0.5 * a.norm_sqr()).exp(), 0.0);
        let mut cb = C64::new((-0.5 * b.norm_sqr()).exp(), 0.0);
        let mut sum = ca.conj() * cb;
        for n in 1..=cutoff {
            let s = (n as f64).sqrt();
            ca = ca * a / s;
            cb = cb * b / s;
            sum += ca.conj() * cb;
        }
        sum
    }

    #[test]
    fn self_and_vacuum_overlap() {
        let a = CoherentLabel::new(0.7, -1.3);
        assert_abs_diff_eq!(coherent_overlap(a, a).re, 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(coherent_overlap(a, a).im, 0.0, epsilon = 1e-15);
        let v = coherent_overlap(CoherentLabel::VACUUM, a);
        assert_abs_diff_eq!(v.re, (-0.5 * a.0.norm_sqr()).exp(), epsilon = 1e-15);
    }

    #[test]
    fn opposite_unit_labels() {
        let v = coherent_overlap(CoherentLabel::new(1.0, 0.0), CoherentLabel::new(-1.0, 0.0));
        assert_abs_diff_eq!(v.re, (-2.0f64).exp(), epsilon = 1e-15);
        let f = fock_overlap(C64::new(1.0, 0.0), C64::new(-1.0, 0.0), 40);
        assert_abs_diff_eq!(f.re, 0.135_335_283_236_612_7, epsilon = 1e-14);
    }

    #[test]
    fn matches_fock_sum_for_moderate_labels() {
        let labels = [
            C64::new(0.0, 0.0),
            C64::new(1.2, -0.4),
            C64::new(-2.1, 1.9),
            C64::new(0.3, 2.95),
            C64::new(-3.0, 0.0),
        ];
        for &a in &labels {
            for &b in &labels {
                let exact = coherent_overlap(CoherentLabel(a), CoherentLabel(b));
                let sum = fock_overlap(a, b, 60);
                assert!((exact - sum).norm() < 1e-10, "{a} {b}: {exact} vs {sum}");
            }
        }
    }

    #[test]
    fn position_and_momentum_means() {
        let l = CoherentLabel::new(-0.5, 0.25);
        assert_abs_diff_eq!(l.position_mean(2.0), -2.0);
        assert_abs_diff_eq!(l.momentum_mean(3.0), -1.5);
    }
}
