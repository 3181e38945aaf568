//! Trainable parameters, the Adam optimizer, and the finite-difference
//! gradient checker.

use rand::Rng;

use crate::error::{Error, Result};
use crate::tensor::Tensor;

/// A named tensor with a gradient buffer.
#[derive(Debug, Clone)]
pub struct Parameter {
    pub name: String,
    pub value: Tensor,
    pub grad: Tensor,
    /// Whether L2 regularization applies to this parameter.
    pub decay: bool,
}

impl Parameter {
    pub fn new(name: impl Into<String>, value: Tensor) -> Self {
        let grad = Tensor::zeros(value.shape());
        Self {
            name: name.into(),
            value,
            grad,
            decay: true,
        }
    }

    pub fn without_decay(name: impl Into<String>, value: Tensor) -> Self {
        let mut p = Self::new(name, value);
        p.decay = false;
        p
    }

    pub fn zero_grad(&mut self) {
        self.grad.data_mut().fill(0.0);
    }
}

/// First/second moment estimates for a parameter list, plus the shared
/// step counter and hyperparameters.
#[derive(Debug, Clone)]
pub struct AdamState {
    pub t: u64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    m: Vec<Tensor>,
    v: Vec<Tensor>,
}

impl AdamState {
    pub fn new(params: &[Parameter]) -> Self {
        Self {
            t: 0,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            m: params.iter().map(|p| Tensor::zeros(p.value.shape())).collect(),
            v: params.iter().map(|p| Tensor::zeros(p.value.shape())).collect(),
        }
    }
}

/// One Adam update with bias correction. L2 is applied first as gradient
/// augmentation `g ← g + l2·θ` on decaying parameters; `t` increments once
/// per call.
pub fn adam_step(
    params: &mut [Parameter],
    state: &mut AdamState,
    lr: f64,
    l2: f64,
) -> Result<()> {
    if params.len() != state.m.len() {
        return Err(Error::Config(format!(
            "optimizer tracks {} parameters, got {}",
            state.m.len(),
            params.len()
        )));
    }
    for p in params.iter() {
        if !p.grad.is_finite() {
            return Err(Error::Numeric(format!(
                "non-finite gradient for parameter {}",
                p.name
            )));
        }
    }
    state.t += 1;
    let t = state.t as i32;
    let bc1 = 1.0 - state.beta1.powi(t);
    let bc2 = 1.0 - state.beta2.powi(t);
    for (i, p) in params.iter_mut().enumerate() {
        let decay = if p.decay { l2 } else { 0.0 };
        let m = state.m[i].data_mut();
        let v = state.v[i].data_mut();
        let theta = p.value.data_mut();
        for j in 0..theta.len() {
            let g = p.grad.data()[j] + decay * theta[j];
            m[j] = state.beta1 * m[j] + (1.0 - state.beta1) * g;
            v[j] = state.beta2 * v[j] + (1.0 - state.beta2) * g * g;
            let m_hat = m[j] / bc1;
            let v_hat = v[j] / bc2;
            theta[j] -= lr * m_hat / (v_hat.sqrt() + state.epsilon);
        }
    }
    Ok(())
}

/// Compares the analytic gradients already stored in `params[*].grad`
/// against central finite differences of `loss_fn`, returning the maximum
/// relative error `|a−n| / max(1e-8, |a|+|n|)`.
///
/// `loss_fn` must be deterministic (dropout disabled); it is called with
/// perturbed copies of the parameter values and must not consult the
/// gradient buffers.
pub fn grad_check<F>(mut loss_fn: F, params: &mut [Parameter], eps: f64) -> f64
where
    F: FnMut(&[Parameter]) -> f64,
{
    let analytic: Vec<Vec<f64>> = params.iter().map(|p| p.grad.data().to_vec()).collect();
    let mut max_rel = 0.0_f64;
    for i in 0..params.len() {
        for j in 0..analytic[i].len() {
            let original = params[i].value.data()[j];
            params[i].value.data_mut()[j] = original + eps;
            let plus = loss_fn(params);
            params[i].value.data_mut()[j] = original - eps;
            let minus = loss_fn(params);
            params[i].value.data_mut()[j] = original;
            let numeric = (plus - minus) / (2.0 * eps);
            let a = analytic[i][j];
            let rel = (a - numeric).abs() / (a.abs() + numeric.abs()).max(1e-8);
            max_rel = max_rel.max(rel);
        }
    }
    max_rel
}

/// Uniform(−s, s) with s = sqrt(6/(fan_in+fan_out)).
pub fn xavier_uniform<R: Rng>(rows: usize, cols: usize, rng: &mut R) -> Tensor {
    let s = (6.0 / (rows + cols) as f64).sqrt();
    uniform(&[rows, cols], s, rng)
}

/// Uniform(−scale, scale) over an arbitrary shape.
pub fn uniform<R: Rng>(shape: &[usize], scale: f64, rng: &mut R) -> Tensor {
    let n: usize = shape.iter().product();
    let data = (0..n)
        .map(|_| rng.random_range(-scale..scale))
        .collect();
    Tensor::new(shape.to_vec(), data).expect("shape/product consistent by construction")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scalar_param(theta: f64, grad: f64) -> Parameter {
        let mut p = Parameter::new("theta", Tensor::scalar(theta));
        p.grad = Tensor::scalar(grad);
        p
    }

    #[test]
    fn first_adam_step_is_minus_lr() {
        // m̂ = 1, v̂ = 1 after one step with g = 1, so Δ = lr/(1+ε).
        let mut params = vec![scalar_param(0.0, 1.0)];
        let mut state = AdamState::new(&params);
        adam_step(&mut params, &mut state, 0.001, 0.0).unwrap();
        let theta = params[0].value.item();
        assert!((theta + 0.001).abs() < 1e-9, "theta = {theta}");
        assert_eq!(state.t, 1);
    }

    #[test]
    fn zero_grad_zero_l2_leaves_parameter_unchanged() {
        let mut params = vec![scalar_param(0.7, 0.0)];
        let mut state = AdamState::new(&params);
        adam_step(&mut params, &mut state, 0.01, 0.0).unwrap();
        assert_eq!(params[0].value.item(), 0.7);
    }

    #[test]
    fn l2_pulls_positive_weight_down() {
        let mut params = vec![scalar_param(1.0, 0.0)];
        let mut state = AdamState::new(&params);
        adam_step(&mut params, &mut state, 0.01, 0.01).unwrap();
        assert!(params[0].value.item() < 1.0);
    }

    #[test]
    fn decay_flag_disables_l2() {
        let mut p = Parameter::without_decay("t", Tensor::scalar(1.0));
        p.grad = Tensor::scalar(0.0);
        let mut params = vec![p];
        let mut state = AdamState::new(&params);
        adam_step(&mut params, &mut state, 0.01, 0.01).unwrap();
        assert_eq!(params[0].value.item(), 1.0);
    }

    #[test]
    fn non_finite_gradient_names_parameter() {
        let mut params = vec![scalar_param(0.0, f64::NAN)];
        let mut state = AdamState::new(&params);
        let err = adam_step(&mut params, &mut state, 0.01, 0.0)
            .unwrap_err()
            .to_string();
        assert!(err.contains("theta"), "{err}");
    }

    #[test]
    fn adam_is_deterministic() {
        let run = || {
            let mut params = vec![scalar_param(0.3, -0.2)];
            let mut state = AdamState::new(&params);
            for _ in 0..5 {
                adam_step(&mut params, &mut state, 0.01, 0.001).unwrap();
            }
            params[0].value.item()
        };
        assert_eq!(run(), run());
    }

    #[test]
    fn grad_check_quadratic_loss() {
        // loss = Σ θ², analytic gradient 2θ: exact match expected.
        let mut p = Parameter::new("q", Tensor::vector(vec![0.5, -1.5, 2.0]));
        p.grad = Tensor::vector(vec![1.0, -3.0, 4.0]);
        let mut params = vec![p];
        let err = grad_check(
            |ps| ps[0].value.data().iter().map(|x| x * x).sum(),
            &mut params,
            1e-5,
        );
        assert!(err < 1e-8, "max rel err {err}");
    }

    #[test]
    fn grad_check_constant_loss_is_zero_error() {
        let mut params = vec![Parameter::new("c", Tensor::vector(vec![1.0, 2.0]))];
        let err = grad_check(|_| 42.0, &mut params, 1e-5);
        assert_eq!(err, 0.0);
    }
}
