use alloc::format;
use alloc::vec::Vec;

use crate::Error;

/// Quadrature rule `∫₀¹ f ≈ Σ bᵢ f(cᵢ)` of order `s`.
#[derive(Debug, Clone, PartialEq)]
pub struct Quadrature {
    nodes: Vec<f64>,
    weights: Vec<f64>,
    order: usize,
}

impl Quadrature {
    pub fn new(nodes: Vec<f64>, weights: Vec<f64>, order: usize) -> Result<Self, Error> {
        if nodes.is_empty() || nodes.len() != weights.len() {
            return Err(Error::InvalidArgument(format!(
                "quadrature needs matching nonempty nodes and weights, got {} and {}",
                nodes.len(),
                weights.len()
            )));
        }
        if nodes.iter().any(|c| !(0.0..=1.0).contains(c)) || nodes.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidArgument(format!(
                "quadrature nodes must be ascending in [0, 1], got {nodes:?}"
            )));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > 1e-14 {
            return Err(Error::InvalidArgument(format!(
                "quadrature weights must sum to 1, got {total}"
            )));
        }
        if order == 0 {
            return Err(Error::InvalidArgument("quadrature order must be positive".into()));
        }
        Ok(Self {
            nodes,
            weights,
            order,
        })
    }

    /// `f(0)`, order 1.
    pub fn left_rectangle() -> Self {
        Self::new(alloc::vec![0.0], alloc::vec![1.0], 1).unwrap()
    }

    pub fn midpoint() -> Self {
        Self::new(alloc::vec![0.5], alloc::vec![1.0], 2).unwrap()
    }

    pub fn trapezoid() -> Self {
        Self::new(alloc::vec![0.0, 1.0], alloc::vec![0.5, 0.5], 2).unwrap()
    }

    /// Nodes `(0, ½, 1)`, weights `(1/6, 2/3, 1/6)`, order 4.
    pub fn simpson() -> Self {
        Self::new(
            alloc::vec![0.0, 0.5, 1.0],
            alloc::vec![1.0 / 6.0, 2.0 / 3.0, 1.0 / 6.0],
            4,
        )
        .unwrap()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn order(&self) -> usize {
        self.order
    }
}
