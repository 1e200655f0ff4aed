//! L2-regularized logistic regression fitted by gradient descent with
//! Barzilai-Borwein trial steps and Armijo backtracking.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogRegOptions {
    /// Coefficient of `||w||^2 / 2`; the bias is not penalized.
    pub l2: f64,
    pub max_iter: usize,
    /// Stop when the gradient norm falls below this.
    pub tol: f64,
}

impl Default for LogRegOptions {
    fn default() -> Self {
        Self {
            l2: 1e-4,
            max_iter: 5000,
            tol: 1e-7,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LogReg {
    pub weights: Vec<f64>,
    pub bias: f64,
    /// Final value of the regularized mean loss.
    pub loss: f64,
    pub iterations: usize,
    pub converged: bool,
}

impl LogReg {
    pub fn decision(&self, x: &[f64]) -> f64 {
        self.bias + x.iter().zip(&self.weights).map(|(a, b)| a * b).sum::<f64>()
    }

    /// Decision values for a row-major matrix.
    pub fn decisions(&self, features: &[f64]) -> Vec<f64> {
        features.chunks(self.weights.len().max(1)).map(|x| self.decision(x)).collect()
    }

    pub fn probability(&self, x: &[f64]) -> f64 {
        1.0 / (1.0 + (-self.decision(x)).exp())
    }
}

/// Regularized mean logistic loss of parameters `theta = [w.., b]`.
pub fn logistic_objective(features: &[f64], labels: &[bool], l2: f64, theta: &[f64]) -> f64 {
    let d = theta.len() - 1;
    let n = labels.len();
    let mut total = 0.0;
    for (x, &y) in features.chunks(d.max(1)).zip(labels) {
        let z = theta[d] + x.iter().zip(theta).map(|(a, b)| a * b).sum::<f64>();
        // log(1 + exp(-y' z)) with y' = +-1
        let m = if y { -z } else { z };
        total += if m > 0.0 { m + (-m).exp().ln_1p() } else { m.exp().ln_1p() };
    }
    let reg: f64 = theta[..d].iter().map(|w| w * w).sum();
    total / n as f64 + 0.5 * l2 * reg
}

fn objective_and_gradient(features: &[f64], labels: &[bool], l2: f64, theta: &[f64], grad: &mut [f64]) -> f64 {
    let d = theta.len() - 1;
    let n = labels.len() as f64;
    grad.iter_mut().for_each(|g| *g = 0.0);
    let mut total = 0.0;
    for (x, &y) in features.chunks(d.max(1)).zip(labels) {
        let z = theta[d] + x.iter().zip(theta).map(|(a, b)| a * b).sum::<f64>();
        let m = if y { -z } else { z };
        total += if m > 0.0 { m + (-m).exp().ln_1p() } else { m.exp().ln_1p() };
        let p = 1.0 / (1.0 + (-z).exp());
        let r = p - if y { 1.0 } else { 0.0 };
        for (g, a) in grad.iter_mut().zip(x) {
            *g += r * a;
        }
        grad[d] += r;
    }
    let mut reg = 0.0;
    for j in 0..d {
        grad[j] = grad[j] / n + l2 * theta[j];
        reg += theta[j] * theta[j];
    }
    grad[d] /= n;
    total / n + 0.5 * l2 * reg
}

/// Fits weights and bias on a row-major `labels.len() x d` matrix.
pub fn fit_logreg(features: &[f64], labels: &[bool], options: &LogRegOptions) -> Result<LogReg> {
    let n = labels.len();
    if n == 0 || !features.len().is_multiple_of(n) {
        return Err(Error::LengthMismatch(format!(
            "{} feature values for {} labels",
            features.len(),
            n
        )));
    }
    let positives = labels.iter().filter(|&&y| y).count();
    if positives == 0 || positives == n {
        return Err(Error::SingleClass);
    }
    if features.iter().any(|x| !x.is_finite()) {
        return Err(Error::NonFiniteScore);
    }
    let d = features.len() / n;
    let mut theta = vec![0.0; d + 1];
    let mut grad = vec![0.0; d + 1];
    let mut loss = objective_and_gradient(features, labels, options.l2, &theta, &mut grad);
    let mut step = 1.0;
    let mut trial = vec![0.0; d + 1];
    let mut trial_grad = vec![0.0; d + 1];
    let mut iterations = 0;
    let mut converged = false;
    while iterations < options.max_iter {
        let gnorm2: f64 = grad.iter().map(|g| g * g).sum();
        if gnorm2.sqrt() < options.tol {
            converged = true;
            break;
        }
        iterations += 1;
        let mut t = step;
        let mut accepted = false;
        for _ in 0..60 {
            for j in 0..=d {
                trial[j] = theta[j] - t * grad[j];
            }
            let trial_loss = objective_and_gradient(features, labels, options.l2, &trial, &mut trial_grad);
            if trial_loss <= loss - 1e-4 * t * gnorm2 {
                // BB1 step for the next iteration: <s,s> / <s,y>
                let (mut ss, mut sy) = (0.0, 0.0);
                for j in 0..=d {
                    let s = trial[j] - theta[j];
                    let y = trial_grad[j] - grad[j];
                    ss += s * s;
                    sy += s * y;
                }
                step = if sy > 0.0 { (ss / sy).clamp(1e-10, 1e10) } else { t * 2.0 };
                std::mem::swap(&mut theta, &mut trial);
                std::mem::swap(&mut grad, &mut trial_grad);
                loss = trial_loss;
                accepted = true;
                break;
            }
            t *= 0.5;
        }
        if !accepted {
            // no decrease representable at this precision
            converged = true;
            break;
        }
    }
    let bias = theta[d];
    theta.truncate(d);
    Ok(LogReg {
        weights: theta,
        bias,
        loss,
        iterations,
        converged,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn separable_one_dimensional() {
        let model = fit_logreg(&[-1.0, 1.0], &[false, true], &LogRegOptions::default()).unwrap();
        assert!(model.weights[0] > 0.0);
        assert!(model.decision(&[-1.0]) < 0.0 && model.decision(&[1.0]) > 0.0);
    }

    #[test]
    fn single_class_is_an_error() {
        assert!(matches!(
            fit_logreg(&[1.0, 2.0], &[true, true], &LogRegOptions::default()),
            Err(Error::SingleClass)
        ));
    }

    #[test]
    fn balanced_constant_feature_gives_zero_bias() {
        let model = fit_logreg(&[1.0, 1.0, 1.0, 1.0], &[true, false, true, false], &LogRegOptions::default()).unwrap();
        assert!(model.bias.abs() < 1e-6);
        assert!(model.converged);
    }
}
