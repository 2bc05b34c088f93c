//! Gauss-Legendre quadrature on finite intervals.
//!
//! Improper integrals over the real line are truncated to a finite window by
//! the caller (the channel model uses +/- 8 combined standard deviations,
//! leaving tail mass around 1e-15). Composite panels keep the rule accurate
//! for integrands that are much narrower than the window.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A fixed quadrature rule on the interval `[lo, hi]`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Quadrature {
    nodes: Vec<f64>,
    weights: Vec<f64>,
    lo: f64,
    hi: f64,
}

impl Quadrature {
    /// Single-panel Gauss-Legendre rule of the given order on `[lo, hi]`.
    pub fn gauss_legendre(order: usize, lo: f64, hi: f64) -> Result<Self> {
        Self::composite_gauss_legendre(order, 1, lo, hi)
    }

    /// Gauss-Legendre rule of the given order applied on `panels` equal
    /// subintervals of `[lo, hi]`.
    pub fn composite_gauss_legendre(order: usize, panels: usize, lo: f64, hi: f64) -> Result<Self> {
        if order == 0 || panels == 0 {
            return Err(Error::InvalidParameter(
                "quadrature order and panel count must be positive".into(),
            ));
        }
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(Error::InvalidParameter(format!(
                "quadrature domain [{lo}, {hi}] must be a finite interval"
            )));
        }
        let (xs, ws) = legendre_rule(order);
        let mut nodes = Vec::with_capacity(order * panels);
        let mut weights = Vec::with_capacity(order * panels);
        let width = (hi - lo) / panels as f64;
        for p in 0..panels {
            let a = lo + width * p as f64;
            let mid = a + 0.5 * width;
            let half = 0.5 * width;
            for (&x, &w) in xs.iter().zip(&ws) {
                nodes.push(mid + half * x);
                weights.push(half * w);
            }
        }
        Ok(Self {
            nodes,
            weights,
            lo,
            hi,
        })
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn lo(&self) -> f64 {
        self.lo
    }

    pub fn hi(&self) -> f64 {
        self.hi
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}

/// Integrates `f` over the rule's domain.
pub fn integrate_1d(mut f: impl FnMut(f64) -> f64, quad: &Quadrature) -> Result<f64> {
    let mut acc = 0.0;
    for (&x, &w) in quad.nodes.iter().zip(&quad.weights) {
        let v = f(x);
        if !v.is_finite() {
            return Err(Error::NonFiniteIntegrand { x });
        }
        acc += w * v;
    }
    Ok(acc)
}

/// Integrates `f(x, y)` over the tensor product of two rules.
pub fn integrate_2d(
    mut f: impl FnMut(f64, f64) -> f64,
    quad_x: &Quadrature,
    quad_y: &Quadrature,
) -> Result<f64> {
    let mut acc = 0.0;
    for (&x, &wx) in quad_x.nodes.iter().zip(&quad_x.weights) {
        let mut inner = 0.0;
        for (&y, &wy) in quad_y.nodes.iter().zip(&quad_y.weights) {
            let v = f(x, y);
            if !v.is_finite() {
                return Err(Error::NonFiniteIntegrand { x });
            }
            inner += wy * v;
        }
        acc += wx * inner;
    }
    Ok(acc)
}

/// Nodes and weights of the order-`n` Gauss-Legendre rule on [-1, 1],
/// computed by Newton iteration on the Legendre recurrence.
fn legendre_rule(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        // Chebyshev-based initial guess, then Newton.
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_eval(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-15 {
                let (_, d2) = legendre_eval(n, x);
                dp = d2;
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    (nodes, weights)
}

/// Value and derivative of the Legendre polynomial P_n at `x`.
fn legendre_eval(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stats::normal_pdf;

    #[test]
    fn weights_sum_to_interval_length() {
        for &(order, panels, lo, hi) in &[
            (8usize, 1usize, -1.0, 1.0),
            (24, 32, -8.0, 8.0),
            (5, 3, 0.0, 2.5),
        ] {
            let q = Quadrature::composite_gauss_legendre(order, panels, lo, hi).unwrap();
            let total: f64 = q.weights().iter().sum();
            assert!(
                (total - (hi - lo)).abs() < 1e-10,
                "order {order} panels {panels}"
            );
        }
    }

    #[test]
    fn standard_normal_normalizes() {
        let q = Quadrature::composite_gauss_legendre(24, 32, -8.0, 8.0).unwrap();
        let v = integrate_1d(|x| normal_pdf(x, 0.0, 1.0), &q).unwrap();
        assert!((v - 1.0).abs() < 1e-10, "got {v}");
    }

    #[test]
    fn second_moment_matches_variance() {
        // X ~ N(0, 2): E[X^2] = 4.
        let q = Quadrature::composite_gauss_legendre(24, 32, -16.0, 16.0).unwrap();
        let v = integrate_1d(|x| x * x * normal_pdf(x, 0.0, 2.0), &q).unwrap();
        assert!((v - 4.0).abs() < 1e-8, "got {v}");
    }

    #[test]
    fn polynomials_integrate_exactly() {
        // Order n is exact through degree 2n - 1.
        let q = Quadrature::gauss_legendre(6, 0.0, 1.0).unwrap();
        let v = integrate_1d(|x| x.powi(11), &q).unwrap();
        assert!((v - 1.0 / 12.0).abs() < 1e-14);
    }

    #[test]
    fn non_finite_integrand_is_reported() {
        let q = Quadrature::gauss_legendre(8, -1.0, 1.0).unwrap();
        let err = integrate_1d(|x| 1.0 / x.abs().min(0.0), &q).unwrap_err();
        assert!(matches!(err, Error::NonFiniteIntegrand { .. }));
    }

    #[test]
    fn rejects_bad_domains() {
        assert!(Quadrature::gauss_legendre(8, 1.0, 1.0).is_err());
        assert!(Quadrature::gauss_legendre(8, f64::NEG_INFINITY, 0.0).is_err());
        assert!(Quadrature::gauss_legendre(0, 0.0, 1.0).is_err());
    }
}
