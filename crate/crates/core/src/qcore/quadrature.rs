//! Globally adaptive Gauss-Legendre quadrature.
//!
//! Each panel is integrated with an `n`-point rule and a `2n+1`-point rule;
//! their difference is the panel error estimate and the panel with the
//! largest estimate is bisected until the total estimate meets the tolerance.
//! Half-infinite and infinite ranges are mapped onto `[0, 1)` with
//! `x = a + t/(1−t)`.

use std::ops::{Add, Mul, Sub};
use std::sync::{Arc, OnceLock};

use crate::{Error, Result, C64};

/// Integration range.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Interval {
    Finite(f64, f64),
    /// `[a, ∞)`
    LowerBounded(f64),
    /// `(−∞, b]`
    UpperBounded(f64),
    Whole,
}

/// Nodes and weights of an `n`-point Gauss-Legendre rule on `[-1, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussLegendre {
    pub const MIN_POINTS: usize = 16;

    pub fn new(n: usize) -> Result<Self> {
        if n < Self::MIN_POINTS {
            return Err(crate::invalid("npoints", format!("need at least {} points, got {n}", Self::MIN_POINTS)));
        }
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let nf = n as f64;
        for i in 0..(n + 1) / 2 {
            // Tricomi initial guess, then Newton on P_n
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre(n, x);
                dp = d;
                let step = p / d;
                x -= step;
                if step.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre(n, x);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        Ok(GaussLegendre { nodes, weights })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    fn apply<T: Scalar>(&self, f: &impl Fn(f64) -> T, a: f64, b: f64) -> (T, f64) {
        let (mid, half) = (0.5 * (a + b), 0.5 * (b - a));
        let mut acc = T::zero();
        let mut abs = 0.0;
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            let v = f(mid + half * x);
            abs += w * v.magnitude();
            acc = acc + v * *w;
        }
        (acc * half, abs * half.abs())
    }
}

fn legendre(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

fn cached(n: usize) -> Arc<GaussLegendre> {
    static LOW: OnceLock<Arc<GaussLegendre>> = OnceLock::new();
    static HIGH: OnceLock<Arc<GaussLegendre>> = OnceLock::new();
    let build = || Arc::new(GaussLegendre::new(n).expect("built-in rule order"));
    match n {
        16 => LOW.get_or_init(build).clone(),
        33 => HIGH.get_or_init(build).clone(),
        _ => build(),
    }
}

/// Values that can be integrated: real or complex.
pub trait Scalar: Copy + Add<Output = Self> + Sub<Output = Self> + Mul<f64, Output = Self> {
    fn zero() -> Self;
    fn magnitude(self) -> f64;
}

impl Scalar for f64 {
    fn zero() -> Self {
        0.0
    }
    fn magnitude(self) -> f64 {
        self.abs()
    }
}

impl Scalar for C64 {
    fn zero() -> Self {
        C64::new(0.0, 0.0)
    }
    fn magnitude(self) -> f64 {
        self.norm()
    }
}

/// Adaptive integrator settings.
#[derive(Debug, Clone)]
pub struct Quadrature {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_intervals: usize,
    low: Arc<GaussLegendre>,
    high: Arc<GaussLegendre>,
}

impl Default for Quadrature {
    fn default() -> Self {
        Quadrature {
            rel_tol: 1e-11,
            abs_tol: 1e-15,
            max_intervals: 4000,
            low: cached(16),
            high: cached(33),
        }
    }
}

struct Panel<T> {
    a: f64,
    b: f64,
    value: T,
    err: f64,
}

impl Quadrature {
    /// Integrator whose base rule has `npoints` nodes (error estimate from
    /// the `2·npoints+1` rule).
    pub fn with_points(npoints: usize) -> Result<Self> {
        let low = if npoints == 16 { cached(16) } else { Arc::new(GaussLegendre::new(npoints)?) };
        let high = if npoints == 16 { cached(33) } else { Arc::new(GaussLegendre::new(2 * npoints + 1)?) };
        Ok(Quadrature {
            low,
            high,
            ..Quadrature::default()
        })
    }

    pub fn tolerances(mut self, rel_tol: f64, abs_tol: f64) -> Self {
        self.rel_tol = rel_tol;
        self.abs_tol = abs_tol;
        self
    }

    pub fn integrate(&self, f: impl Fn(f64) -> f64, interval: Interval) -> Result<f64> {
        self.integrate_with_error(f, interval).map(|(v, _)| v)
    }

    pub fn integrate_complex(&self, f: impl Fn(f64) -> C64, interval: Interval) -> Result<C64> {
        self.integrate_with_error(f, interval).map(|(v, _)| v)
    }

    /// Integral over `[points[0], points[last]]`, with the interior points
    /// used as initial panel boundaries (kinks, discontinuities).
    pub fn integrate_breaks<T: Scalar>(&self, f: impl Fn(f64) -> T, points: &[f64]) -> Result<T> {
        self.integrate_breaks_with_error(f, points).map(|(v, _)| v)
    }

    pub fn integrate_breaks_with_error<T: Scalar>(&self, f: impl Fn(f64) -> T, points: &[f64]) -> Result<(T, f64)> {
        if points.len() < 2 || points.iter().any(|p| !p.is_finite()) {
            return Err(crate::invalid("points", "need at least two finite break points"));
        }
        let panels: Vec<(f64, f64)> = points.windows(2).map(|w| (w[0], w[1])).collect();
        self.run(&f, &panels)
    }

    /// Integral and its estimated absolute error.
    pub fn integrate_with_error<T: Scalar>(&self, f: impl Fn(f64) -> T, interval: Interval) -> Result<(T, f64)> {
        match interval {
            Interval::Finite(a, b) => {
                if !(a.is_finite() && b.is_finite()) {
                    return Err(crate::invalid("interval", "finite interval needs finite ends"));
                }
                self.run(&f, &[(a, b)])
            }
            Interval::LowerBounded(a) => {
                let g = |t: f64| {
                    let s = 1.0 - t;
                    f(a + t / s) * (1.0 / (s * s))
                };
                self.run(&g, &[(0.0, 1.0)])
            }
            Interval::UpperBounded(b) => {
                let g = |t: f64| {
                    let s = 1.0 - t;
                    f(b - t / s) * (1.0 / (s * s))
                };
                self.run(&g, &[(0.0, 1.0)])
            }
            Interval::Whole => {
                let g = |t: f64| {
                    // t in (-1, 1), x = t/(1−t²)
                    let s = 1.0 - t * t;
                    f(t / s) * ((1.0 + t * t) / (s * s))
                };
                self.run(&g, &[(-1.0, 0.0), (0.0, 1.0)])
            }
        }
    }

    fn panel<T: Scalar>(&self, f: &impl Fn(f64) -> T, a: f64, b: f64) -> (Panel<T>, f64) {
        let (lo, _) = self.low.apply(f, a, b);
        let (hi, abs) = self.high.apply(f, a, b);
        let err = (hi - lo).magnitude();
        (Panel { a, b, value: hi, err }, abs)
    }

    fn run<T: Scalar>(&self, f: &impl Fn(f64) -> T, initial: &[(f64, f64)]) -> Result<(T, f64)> {
        let mut panels = Vec::new();
        let mut abs_total = 0.0;
        for &(a, b) in initial {
            let (p, abs) = self.panel(f, a, b);
            abs_total += abs;
            panels.push(p);
        }
        loop {
            let value = panels.iter().fold(T::zero(), |acc, p| acc + p.value);
            let err: f64 = panels.iter().map(|p| p.err).sum();
            // rounding floor: cannot resolve below a few ulps of ∫|f|
            let floor = 64.0 * f64::EPSILON * abs_total;
            let tol = self.abs_tol.max(self.rel_tol * value.magnitude()).max(floor);
            if !err.is_finite() || !value.magnitude().is_finite() {
                return Err(Error::Quadrature {
                    residual: f64::NAN,
                    intervals: panels.len(),
                });
            }
            if err <= tol {
                return Ok((value, err));
            }
            if panels.len() >= self.max_intervals {
                return Err(Error::Quadrature {
                    residual: err,
                    intervals: panels.len(),
                });
            }
            let worst = panels
                .iter()
                .enumerate()
                .max_by(|x, y| x.1.err.total_cmp(&y.1.err))
                .map(|(i, _)| i)
                .expect("non-empty");
            let p = panels.swap_remove(worst);
            let mid = 0.5 * (p.a + p.b);
            if mid <= p.a || mid >= p.b {
                return Err(Error::Quadrature {
                    residual: err,
                    intervals: panels.len() + 1,
                });
            }
            let (l, la) = self.panel(f, p.a, mid);
            let (r, ra) = self.panel(f, mid, p.b);
            abs_total += la + ra;
            panels.push(l);
            panels.push(r);
        }
    }
}

/// Adaptive integral of `f` over `interval` with an `npoints`-node base rule.
pub fn gauss_quadrature<T: Scalar>(f: impl Fn(f64) -> T, interval: Interval, npoints: usize) -> Result<T> {
    Quadrature::with_points(npoints)?
        .integrate_with_error(f, interval)
        .map(|(v, _)| v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qcore::fock::{oscillator_first, oscillator_ground};
    use std::f64::consts::PI;

    #[test]
    fn rule_integrates_polynomials_exactly() {
        let r = GaussLegendre::new(16).unwrap();
        let w: f64 = r.weights().iter().sum();
        assert!((w - 2.0).abs() < 1e-14);
        // degree 30 is the highest exact order for 16 points
        let s: f64 = r.nodes().iter().zip(r.weights()).map(|(x, w)| w * x.powi(30)).sum();
        assert!((s - 2.0 / 31.0).abs() < 1e-14);
        assert!(GaussLegendre::new(8).is_err());
    }

    #[test]
    fn gaussian_over_the_line() {
        let v = gauss_quadrature(|x: f64| (-x * x).exp(), Interval::Whole, 16).unwrap();
        assert!((v - PI.sqrt()).abs() < 1e-9 * PI.sqrt());
        let shifted = gauss_quadrature(|x: f64| (-(x - 3.0).powi(2)).exp(), Interval::Whole, 16).unwrap();
        assert!((shifted - PI.sqrt()).abs() < 1e-9 * PI.sqrt());
    }

    #[test]
    fn half_line_oscillator_overlap() {
        let v = gauss_quadrature(|x| oscillator_ground(x) * oscillator_first(x), Interval::LowerBounded(0.0), 16).unwrap();
        assert!((v - 1.0 / (2.0 * PI).sqrt()).abs() < 1e-12);
        assert!((v - 0.398_94).abs() < 1e-5);
    }

    #[test]
    fn theta_average_of_sin_squared() {
        let v = gauss_quadrature(|t: f64| t.sin().powi(2) / PI, Interval::Finite(0.0, PI), 16).unwrap();
        assert!((v - 0.5).abs() < 1e-14);
    }

    #[test]
    fn complex_and_breaks() {
        let q = Quadrature::default();
        let v = q
            .integrate_complex(|x| C64::from_polar((-x * x / 2.0).exp(), 3.0 * x), Interval::Whole)
            .unwrap();
        let exact = (2.0 * PI).sqrt() * (-4.5f64).exp();
        assert!((v.re - exact).abs() < 1e-12 && v.im.abs() < 1e-12);
        let k = q.integrate_breaks(|x: f64| x.abs(), &[-1.0, 0.0, 2.0]).unwrap();
        assert!((k - 2.5).abs() < 1e-14);
        let up = q.integrate(|x: f64| x.exp(), Interval::UpperBounded(0.0)).unwrap();
        assert!((up - 1.0).abs() < 1e-11);
    }

    #[test]
    fn non_convergence_reports_residual() {
        let q = Quadrature {
            max_intervals: 8,
            ..Quadrature::default()
        };
        match q.integrate(|x: f64| (1.0 / x).sin(), Interval::Finite(1e-6, 1.0)) {
            Err(Error::Quadrature { residual, intervals }) => {
                assert!(residual > 0.0);
                assert_eq!(intervals, 8);
            }
            other => panic!("expected failure, got {other:?}"),
        }
    }
}
