//! Optimizers and regression losses for circuit parameters.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

fn check_lengths(params: &[f64], grads: &[f64]) -> Result<()> {
    if params.len() != grads.len() {
        return Err(Error::usage(format!("{} parameters but {} gradient entries", params.len(), grads.len())));
    }
    Ok(())
}

fn check_lr(lr: f64) -> Result<()> {
    if !(lr.is_finite() && lr >= 0.0) {
        return Err(Error::usage(format!("learning rate must be finite and non-negative, got {lr}")));
    }
    Ok(())
}

/// `params − lr · grads`.
pub fn sgd_step(params: &[f64], grads: &[f64], lr: f64) -> Result<Vec<f64>> {
    check_lengths(params, grads)?;
    check_lr(lr)?;
    Ok(params.iter().zip(grads).map(|(p, g)| p - lr * g).collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdamConfig {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        Self { lr: 0.01, beta1: 0.9, beta2: 0.999, eps: 1e-8 }
    }
}

/// Moment estimates carried between Adam steps.
#[derive(Debug, Clone, PartialEq)]
pub struct AdamState {
    pub m: Vec<f64>,
    pub v: Vec<f64>,
    pub t: u64,
}

impl AdamState {
    pub fn new(len: usize) -> Self {
        Self { m: vec![0.0; len], v: vec![0.0; len], t: 0 }
    }
}

/// One bias-corrected Adam update. Returns the new parameters and state.
pub fn adam_step(
    params: &[f64],
    grads: &[f64],
    state: &AdamState,
    config: &AdamConfig,
) -> Result<(Vec<f64>, AdamState)> {
    check_lengths(params, grads)?;
    check_lr(config.lr)?;
    if state.m.len() != params.len() || state.v.len() != params.len() {
        return Err(Error::usage(format!("Adam state sized for {} parameters, got {}", state.m.len(), params.len())));
    }
    let t = state.t + 1;
    let bc1 = 1.0 - config.beta1.powi(t as i32);
    let bc2 = 1.0 - config.beta2.powi(t as i32);
    let mut next = AdamState { m: Vec::with_capacity(params.len()), v: Vec::with_capacity(params.len()), t };
    let mut out = Vec::with_capacity(params.len());
    for i in 0..params.len() {
        let g = grads[i];
        let m = config.beta1 * state.m[i] + (1.0 - config.beta1) * g;
        let v = config.beta2 * state.v[i] + (1.0 - config.beta2) * g * g;
        let m_hat = m / bc1;
        let v_hat = v / bc2;
        out.push(params[i] - config.lr * m_hat / (v_hat.sqrt() + config.eps));
        next.m.push(m);
        next.v.push(v);
    }
    Ok((out, next))
}

/// A stateful optimizer owned by a training loop.
#[derive(Debug, Clone, PartialEq)]
pub enum Optimizer {
    Sgd { lr: f64 },
    Adam { config: AdamConfig, state: AdamState },
}

impl Optimizer {
    pub fn sgd(lr: f64) -> Self {
        Optimizer::Sgd { lr }
    }

    pub fn adam(config: AdamConfig, num_params: usize) -> Self {
        Optimizer::Adam { config, state: AdamState::new(num_params) }
    }

    pub fn from_spec(spec: &OptimizerSpec, num_params: usize) -> Self {
        match *spec {
            OptimizerSpec::Sgd { lr } => Optimizer::sgd(lr),
            OptimizerSpec::Adam { lr } => Optimizer::adam(AdamConfig { lr, ..AdamConfig::default() }, num_params),
        }
    }

    /// Updates `params` in place.
    pub fn step(&mut self, params: &mut [f64], grads: &[f64]) -> Result<()> {
        let next = match self {
            Optimizer::Sgd { lr } => sgd_step(params, grads, *lr)?,
            Optimizer::Adam { config, state } => {
                let (next, new_state) = adam_step(params, grads, state, config)?;
                *state = new_state;
                next
            }
        };
        params.copy_from_slice(&next);
        Ok(())
    }
}

/// Serializable optimizer choice.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum OptimizerSpec {
    Sgd { lr: f64 },
    Adam { lr: f64 },
}

impl Default for OptimizerSpec {
    fn default() -> Self {
        OptimizerSpec::Adam { lr: 0.01 }
    }
}

impl OptimizerSpec {
    pub fn lr(&self) -> f64 {
        match *self {
            OptimizerSpec::Sgd { lr } | OptimizerSpec::Adam { lr } => lr,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum LossKind {
    #[default]
    Mse,
    Mae,
    Huber {
        delta: f64,
    },
}

impl LossKind {
    pub fn validate(&self) -> Result<()> {
        match *self {
            LossKind::Huber { delta } if !(delta > 0.0 && delta.is_finite()) => {
                Err(Error::usage(format!("Huber delta must be positive, got {delta}")))
            }
            _ => Ok(()),
        }
    }
}

/// Mean loss over the batch and its gradient with respect to `pred`.
pub fn loss_and_grad(kind: LossKind, pred: &[f64], target: &[f64]) -> Result<(f64, Vec<f64>)> {
    kind.validate()?;
    if pred.is_empty() {
        return Err(Error::usage("loss of an empty batch"));
    }
    if pred.len() != target.len() {
        return Err(Error::usage(format!("{} predictions but {} targets", pred.len(), target.len())));
    }
    let n = pred.len() as f64;
    let mut total = 0.0;
    let mut grad = Vec::with_capacity(pred.len());
    for (p, t) in pred.iter().zip(target) {
        let r = p - t;
        let (value, slope) = match kind {
            LossKind::Mse => (r * r, 2.0 * r),
            // signum(0.0) is 1.0, so ties are handled explicitly
            LossKind::Mae => (r.abs(), if r == 0.0 { 0.0 } else { r.signum() }),
            LossKind::Huber { delta } => {
                if r.abs() <= delta {
                    (0.5 * r * r, r)
                } else {
                    (delta * (r.abs() - 0.5 * delta), delta * r.signum())
                }
            }
        };
        total += value;
        grad.push(slope / n);
    }
    Ok((total / n, grad))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn sgd_examples() {
        assert_eq!(sgd_step(&[1.0, 2.0], &[0.0, 0.0], 0.3).unwrap(), vec![1.0, 2.0]);
        assert_eq!(sgd_step(&[1.0], &[2.0], 0.5).unwrap(), vec![0.0]);
        assert!(matches!(sgd_step(&[1.0], &[1.0, 2.0], 0.1), Err(Error::Usage(_))));
    }

    #[test]
    fn sgd_descends_quadratic() {
        // L(p) = Σ (p - c)^2
        let c = [0.3, -1.0, 2.0];
        let loss = |p: &[f64]| p.iter().zip(&c).map(|(a, b)| (a - b) * (a - b)).sum::<f64>();
        let p = [1.0, 1.0, 1.0];
        let g: Vec<f64> = p.iter().zip(&c).map(|(a, b)| 2.0 * (a - b)).collect();
        let next = sgd_step(&p, &g, 0.01).unwrap();
        assert!(loss(&next) < loss(&p));
    }

    #[test]
    fn adam_first_step_is_lr_sign() {
        let cfg = AdamConfig::default();
        let params = [0.5, -0.5, 2.0];
        let grads = [3.0, -0.02, 1e-3];
        let (next, state) = adam_step(&params, &grads, &AdamState::new(3), &cfg).unwrap();
        assert_eq!(state.t, 1);
        for i in 0..3 {
            let step = params[i] - next[i];
            let expected = cfg.lr * grads[i].signum();
            assert!(((step - expected) / expected).abs() < 1e-5, "{step} vs {expected}");
        }
    }

    #[test]
    fn adam_zero_grads_keep_params() {
        let cfg = AdamConfig::default();
        let mut params = vec![0.1, 0.2];
        let mut state = AdamState::new(2);
        for _ in 0..50 {
            let (p, s) = adam_step(&params, &[0.0, 0.0], &state, &cfg).unwrap();
            params = p;
            state = s;
        }
        assert_eq!(params, vec![0.1, 0.2]);
        assert_eq!(state.t, 50);
    }

    #[test]
    fn adam_is_pure() {
        let cfg = AdamConfig::default();
        let state = AdamState { m: vec![0.1, -0.2], v: vec![0.01, 0.02], t: 4 };
        let a = adam_step(&[1.0, 2.0], &[0.3, 0.4], &state, &cfg).unwrap();
        let b = adam_step(&[1.0, 2.0], &[0.3, 0.4], &state, &cfg).unwrap();
        assert_eq!(a, b);
        assert!(adam_step(&[1.0], &[0.3], &state, &cfg).is_err());
    }

    #[test]
    fn loss_examples() {
        let (v, g) = loss_and_grad(LossKind::Mse, &[1.0, 2.0], &[1.0, 0.0]).unwrap();
        assert_eq!(v, 2.0);
        assert_eq!(g, vec![0.0, 2.0]);
        for kind in [LossKind::Mse, LossKind::Mae, LossKind::Huber { delta: 1.0 }] {
            let (v, g) = loss_and_grad(kind, &[0.3, -0.4], &[0.3, -0.4]).unwrap();
            assert_eq!(v, 0.0);
            assert_eq!(g, vec![0.0, 0.0]);
        }
        let (v, _) = loss_and_grad(LossKind::Huber { delta: 1.0 }, &[0.5], &[0.0]).unwrap();
        assert_eq!(v, 0.125);
        let (v, g) = loss_and_grad(LossKind::Huber { delta: 1.0 }, &[3.0], &[0.0]).unwrap();
        assert_eq!(v, 2.5);
        assert_eq!(g, vec![1.0]);
        let (v, g) = loss_and_grad(LossKind::Mae, &[1.0, -1.0], &[0.0, 0.0]).unwrap();
        assert_eq!(v, 1.0);
        assert_eq!(g, vec![0.5, -0.5]);
    }

    #[test]
    fn loss_errors() {
        assert!(matches!(loss_and_grad(LossKind::Mse, &[], &[]), Err(Error::Usage(_))));
        assert!(matches!(loss_and_grad(LossKind::Mse, &[1.0], &[]), Err(Error::Usage(_))));
        assert!(loss_and_grad(LossKind::Huber { delta: 0.0 }, &[1.0], &[1.0]).is_err());
    }

    #[test]
    fn optimizer_wrapper_matches_free_functions() {
        let mut opt = Optimizer::adam(AdamConfig::default(), 2);
        let mut p = vec![1.0, -1.0];
        opt.step(&mut p, &[0.5, 0.5]).unwrap();
        let (expected, _) = adam_step(&[1.0, -1.0], &[0.5, 0.5], &AdamState::new(2), &AdamConfig::default()).unwrap();
        assert_eq!(p, expected);
    }

    fn kinds() -> impl Strategy<Value = LossKind> {
        prop_oneof![Just(LossKind::Mse), Just(LossKind::Mae), (0.1f64..3.0).prop_map(|delta| LossKind::Huber { delta }),]
    }

    proptest! {
        #[test]
        fn gradient_matches_central_difference(
            kind in kinds(),
            pred in prop::collection::vec(-3.0f64..3.0, 1..6),
            seed_targets in prop::collection::vec(-3.0f64..3.0, 6),
        ) {
            let target = &seed_targets[..pred.len()];
            let delta = match kind { LossKind::Huber { delta } => delta, _ => f64::INFINITY };
            // stay away from the kinks at r = 0 and |r| = delta
            let h = 1e-6;
            let clear = pred.iter().zip(target).all(|(p, t)| {
                let r: f64 = p - t;
                r.abs() > 1e-3 && (r.abs() - delta).abs() > 1e-3
            });
            prop_assume!(clear);
            let (_, grad) = loss_and_grad(kind, &pred, target).unwrap();
            for i in 0..pred.len() {
                let mut up = pred.clone();
                up[i] += h;
                let mut down = pred.clone();
                down[i] -= h;
                let fd = (loss_and_grad(kind, &up, target).unwrap().0 - loss_and_grad(kind, &down, target).unwrap().0) / (2.0 * h);
                prop_assert!((fd - grad[i]).abs() < 1e-6, "{} vs {}", fd, grad[i]);
            }
        }

        #[test]
        fn losses_nonnegative_and_zero_iff_equal(
            kind in kinds(),
            pred in prop::collection::vec(-3.0f64..3.0, 1..6),
            offset in prop::collection::vec(-1.0f64..1.0, 6),
        ) {
            let target: Vec<f64> = pred.iter().zip(&offset).map(|(p, o)| p + o).collect();
            let (v, _) = loss_and_grad(kind, &pred, &target).unwrap();
            prop_assert!(v >= 0.0);
            let equal = pred.iter().zip(&target).all(|(a, b)| a == b);
            prop_assert_eq!(v == 0.0, equal);
        }
    }
}
