//! Gauss-Legendre quadrature mapped onto the half line.
//!
//! The rule on `[-1, 1]` is carried to `[0, ∞)` by
//! `ω = s (1 + t) / (1 − t)`, `dω = 2 s / (1 − t)² dt`, which places half of
//! the nodes below `ω = s`.

use std::num::NonZeroUsize;

use gauss_quad::legendre::GaussLegendre;

use crate::error::{Error, Result};

pub const DEFAULT_NODES: usize = 60;

/// Nodes and Jacobian-folded weights on `[0, ∞)`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    omega_scale: f64,
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl QuadratureRule {
    pub fn new(n: usize, omega_scale: f64) -> Result<Self> {
        let degree = NonZeroUsize::new(n).ok_or_else(|| Error::InvalidQuadrature("node count must be positive".into()))?;
        if !(omega_scale.is_finite() && omega_scale > 0.0) {
            return Err(Error::InvalidQuadrature(format!("omega scale must be positive, got {omega_scale}")));
        }
        let rule = GaussLegendre::new(degree);
        let (nodes, weights) = rule
            .as_node_weight_pairs()
            .iter()
            .map(|&(t, w)| {
                let omega = omega_scale * (1.0 + t) / (1.0 - t);
                let jac = 2.0 * omega_scale / ((1.0 - t) * (1.0 - t));
                (omega, w * jac)
            })
            .unzip();
        Ok(Self { omega_scale, nodes, weights })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn omega_scale(&self) -> f64 {
        self.omega_scale
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Same mapping with twice the nodes.
    pub fn doubled(&self) -> Self {
        Self::new(2 * self.len(), self.omega_scale).expect("valid rule stays valid")
    }

    pub fn integrate(&self, mut f: impl FnMut(f64) -> f64) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(&x, &w)| w * f(x)).sum()
    }
}

/// The default 60-node rule with the given frequency scale.
pub fn default_quadrature(omega_scale: f64) -> Result<QuadratureRule> {
    QuadratureRule::new(DEFAULT_NODES, omega_scale)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn lorentzian_integral() {
        let q = default_quadrature(1.0).unwrap();
        let v = q.integrate(|w| 1.0 / (1.0 + w * w));
        assert!((v - PI / 2.0).abs() < 1e-10);
    }

    #[test]
    fn casimir_polder_identity() {
        let (a, b) = (0.05, 0.06);
        for scale in [0.05, 0.02, 0.1] {
            let q = default_quadrature(scale).unwrap();
            let v = q.integrate(|w| 2.0 * a / (a * a + w * w) * 2.0 * b / (b * b + w * w));
            let exact = 2.0 * PI / (a + b);
            assert!((v - exact).abs() < 1e-9 * exact, "scale {scale}: {v} vs {exact}");
        }
    }

    #[test]
    fn zero_nodes_is_an_error() {
        assert!(QuadratureRule::new(0, 1.0).is_err());
        assert!(QuadratureRule::new(10, 0.0).is_err());
        assert!(QuadratureRule::new(10, f64::NAN).is_err());
    }

    #[test]
    fn nodes_are_positive_and_doubling_works() {
        let q = default_quadrature(0.3).unwrap();
        assert_eq!(q.len(), 60);
        assert!(q.nodes().iter().all(|&w| w > 0.0 && w.is_finite()));
        assert!(q.weights().iter().all(|&w| w > 0.0));
        assert_eq!(q.doubled().len(), 120);
    }
}
