//! Levenberg-Marquardt nonlinear least squares with parameter covariance.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use nalgebra::{DMatrix, DVector};
#[allow(unused_imports)] // redundant when std is linked
use num_traits::Float;

use crate::{Error, Result};

#[derive(Debug, Clone, Copy)]
pub struct LmOptions {
    pub max_iterations: usize,
    /// Relative step tolerance on the scaled parameters.
    pub x_tol: f64,
    /// Relative tolerance on χ² reduction.
    pub f_tol: f64,
    /// Tolerance on the scaled gradient.
    pub g_tol: f64,
}

impl Default for LmOptions {
    fn default() -> Self {
        Self { max_iterations: 500, x_tol: 1e-15, f_tol: 1e-16, g_tol: 1e-20 }
    }
}

#[derive(Debug, Clone)]
pub struct LmFit {
    pub params: Vec<f64>,
    /// `(JᵀJ)⁻¹` of the weighted residuals at the solution.
    pub covariance: DMatrix<f64>,
    pub chi2: f64,
    pub dof: usize,
    pub iterations: usize,
}

impl LmFit {
    /// Covariance rescaled by the reduced χ², for data without known errors.
    pub fn scaled_covariance(&self) -> DMatrix<f64> {
        let s = if self.dof > 0 { self.chi2 / self.dof as f64 } else { 0.0 };
        &self.covariance * s
    }

    pub fn sigma(&self, i: usize) -> f64 {
        self.covariance[(i, i)].max(0.0).sqrt()
    }
}

/// Minimize `Σ r_i(p)²` where `residuals(p, r)` fills the weighted residual
/// vector of length `m`. `scales` gives a typical magnitude per parameter and
/// is used to condition the problem and size finite-difference steps.
pub fn levenberg_marquardt<F>(mut residuals: F, m: usize, p0: &[f64], scales: &[f64], opts: &LmOptions) -> Result<LmFit>
where
    F: FnMut(&[f64], &mut [f64]) -> Result<()>,
{
    let n = p0.len();
    if scales.len() != n {
        return Err(Error::FitFailure(format!("{} scales for {} parameters", scales.len(), n)));
    }
    if m < n {
        return Err(Error::FitFailure(format!("{m} residuals cannot determine {n} parameters")));
    }
    if scales.iter().any(|s| !(s.is_finite() && *s > 0.0)) {
        return Err(Error::FitFailure("parameter scales must be positive".into()));
    }
    let mut eval = |q: &[f64], r: &mut [f64]| -> Result<f64> {
        let p: Vec<f64> = q.iter().zip(scales).map(|(q, s)| q * s).collect();
        residuals(&p, r)?;
        let mut chi2 = 0.0;
        for v in r.iter() {
            if !v.is_finite() {
                return Err(Error::FitFailure("non-finite residual".into()));
            }
            chi2 += v * v;
        }
        Ok(chi2)
    };

    let mut q: Vec<f64> = p0.iter().zip(scales).map(|(p, s)| p / s).collect();
    let mut r = vec![0.0; m];
    let mut chi2 = eval(&q, &mut r)?;
    let mut jac = jacobian(&mut eval, &q, m)?;
    let mut lambda = -1.0;
    let mut nu = 2.0;
    let mut iterations = 0;

    while iterations < opts.max_iterations {
        iterations += 1;
        let jt = jac.transpose();
        let jtj = &jt * &jac;
        let grad = &jt * DVector::from_column_slice(&r);
        if grad.amax() <= opts.g_tol || chi2 == 0.0 {
            break;
        }
        let diag: Vec<f64> = (0..n).map(|i| jtj[(i, i)].max(1e-300)).collect();
        if lambda < 0.0 {
            lambda = 1e-3 * diag.iter().cloned().fold(0.0, f64::max);
        }
        let mut a = jtj.clone();
        for i in 0..n {
            a[(i, i)] += lambda * diag[i];
        }
        let step = match a.cholesky() {
            Some(ch) => ch.solve(&(-&grad)),
            None => {
                lambda *= nu;
                nu *= 2.0;
                continue;
            }
        };
        let q_new: Vec<f64> = q.iter().zip(step.iter()).map(|(a, b)| a + b).collect();
        let mut r_new = vec![0.0; m];
        let chi2_new = match eval(&q_new, &mut r_new) {
            Ok(c) => c,
            Err(_) => f64::INFINITY,
        };
        let predicted: f64 = (0..n).map(|i| step[i] * (lambda * diag[i] * step[i] - grad[i])).sum();
        let step_norm = step.norm();
        let q_norm: f64 = q.iter().map(|v| v * v).sum::<f64>().sqrt();
        if chi2_new < chi2 {
            let rho = if predicted > 0.0 { (chi2 - chi2_new) / predicted } else { 1.0 };
            lambda *= (1.0f64 / 3.0).max(1.0 - (2.0 * rho - 1.0).powi(3));
            nu = 2.0;
            let reduction = (chi2 - chi2_new) / chi2;
            q = q_new;
            r = r_new;
            chi2 = chi2_new;
            jac = jacobian(&mut eval, &q, m)?;
            if step_norm <= opts.x_tol * (q_norm + opts.x_tol) || reduction <= opts.f_tol {
                break;
            }
        } else {
            if step_norm <= opts.x_tol * (q_norm + opts.x_tol) {
                break;
            }
            lambda *= nu;
            nu *= 2.0;
            if !lambda.is_finite() || lambda > 1e300 {
                break;
            }
        }
    }

    let cov_q = normal_inverse(&(jac.transpose() * &jac))?;
    let mut covariance = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            covariance[(i, j)] = cov_q[(i, j)] * scales[i] * scales[j];
        }
    }
    if covariance.iter().any(|v| !v.is_finite()) {
        return Err(Error::FitFailure("non-finite covariance".into()));
    }
    Ok(LmFit {
        params: q.iter().zip(scales).map(|(q, s)| q * s).collect(),
        covariance,
        chi2,
        dof: m - n,
        iterations,
    })
}

// Inverse of JᵀJ via its correlation form, refusing near-singular systems.
fn normal_inverse(jtj: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let n = jtj.nrows();
    let d: Vec<f64> = (0..n).map(|i| jtj[(i, i)]).collect();
    if d.iter().any(|v| !(*v > 0.0)) {
        return Err(Error::FitFailure("a parameter has no influence on the residuals".into()));
    }
    let corr = DMatrix::from_fn(n, n, |i, j| jtj[(i, j)] / (d[i] * d[j]).sqrt());
    let eig = nalgebra::SymmetricEigen::new(corr.clone());
    let min = eig.eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min);
    if !(min > 1e-13) {
        return Err(Error::FitFailure(format!(
            "singular normal matrix (min correlation eigenvalue {min:e}): parameters are not identifiable from the data"
        )));
    }
    let inv = corr.try_inverse().ok_or(Error::FitFailure("singular normal matrix".into()))?;
    Ok(DMatrix::from_fn(n, n, |i, j| inv[(i, j)] / (d[i] * d[j]).sqrt()))
}

fn jacobian<F>(eval: &mut F, q: &[f64], m: usize) -> Result<DMatrix<f64>>
where
    F: FnMut(&[f64], &mut [f64]) -> Result<f64>,
{
    let n = q.len();
    let mut jac = DMatrix::zeros(m, n);
    let mut plus = vec![0.0; m];
    let mut minus = vec![0.0; m];
    let mut probe = q.to_vec();
    for j in 0..n {
        let h = 6e-6 * q[j].abs().max(1.0);
        probe[j] = q[j] + h;
        eval(&probe, &mut plus)?;
        probe[j] = q[j] - h;
        eval(&probe, &mut minus)?;
        probe[j] = q[j];
        for i in 0..m {
            jac[(i, j)] = (plus[i] - minus[i]) / (2.0 * h);
        }
    }
    Ok(jac)
}
