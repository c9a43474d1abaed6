use alloc::vec::Vec;
use core::f64::consts::PI;
#[allow(unused_imports)] // redundant when std is linked
use num_traits::Float;

use crate::{Error, Result};

/// Fixed-order Gauss-Legendre rule on [-1, 1].
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussLegendre {
    pub fn new(order: usize) -> Self {
        assert!(order >= 1, "Gauss-Legendre order must be positive");
        let mut nodes = Vec::with_capacity(order);
        let mut weights = Vec::with_capacity(order);
        let n = order as f64;
        for i in 0..order {
            let mut x = (PI * (i as f64 + 0.75) / (n + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(order, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre_with_derivative(order, x);
            if d != 0.0 {
                dp = d;
            }
            nodes.push(x);
            weights.push(2.0 / ((1.0 - x * x) * dp * dp));
        }
        Self { nodes, weights }
    }

    pub fn order(&self) -> usize {
        self.nodes.len()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Composite rule over `panels` equal panels on [a, b], for a vector-valued
    /// integrand. Returns the integral and the integral of the absolute value.
    pub fn composite<const N: usize, F>(&self, a: f64, b: f64, panels: usize, f: &mut F) -> ([f64; N], [f64; N])
    where
        F: FnMut(f64) -> [f64; N],
    {
        let mut sum = [0.0; N];
        let mut abs_sum = [0.0; N];
        let width = (b - a) / panels as f64;
        for p in 0..panels {
            let lo = a + width * p as f64;
            let mid = lo + 0.5 * width;
            let half = 0.5 * width;
            for (x, w) in self.nodes.iter().zip(&self.weights) {
                let v = f(mid + half * x);
                for k in 0..N {
                    sum[k] += w * half * v[k];
                    abs_sum[k] += w * half * v[k].abs();
                }
            }
        }
        (sum, abs_sum)
    }
}

fn legendre_with_derivative(order: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=order {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let n = order as f64;
    let d = n * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Result of an adaptive integration.
#[derive(Debug, Clone, Copy)]
pub struct Integral<const N: usize> {
    pub value: [f64; N],
    pub abs_value: [f64; N],
    pub nodes: usize,
}

const PANEL_ORDER: usize = 20;

/// Composite 20-point Gauss-Legendre with panel doubling until successive
/// estimates agree to `rel_tol` relative to `max(|I|, ∫|f|)` in every
/// component. Fails rather than returning an unconverged value.
pub fn integrate_adaptive<const N: usize, F>(mut f: F, a: f64, b: f64, rel_tol: f64, max_nodes: usize) -> Result<Integral<N>>
where
    F: FnMut(f64) -> [f64; N],
{
    let rule = GaussLegendre::new(PANEL_ORDER);
    let mut panels = 1;
    let (mut prev, _) = rule.composite(a, b, panels, &mut f);
    let mut worst = f64::INFINITY;
    while PANEL_ORDER * panels * 2 <= max_nodes {
        panels *= 2;
        let (value, abs_value) = rule.composite(a, b, panels, &mut f);
        worst = 0.0;
        let mut converged = true;
        for k in 0..N {
            let scale = value[k].abs().max(abs_value[k]);
            let diff = (value[k] - prev[k]).abs();
            if diff > rel_tol * scale {
                converged = false;
            }
            if scale > 0.0 {
                worst = worst.max(diff / scale);
            }
        }
        if converged {
            return Ok(Integral { value, abs_value, nodes: PANEL_ORDER * panels });
        }
        prev = value;
    }
    Err(Error::Quadrature { tolerance: rel_tol, nodes: PANEL_ORDER * panels, estimate: worst })
}
