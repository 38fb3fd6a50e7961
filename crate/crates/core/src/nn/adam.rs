use super::mlp::{Gradients, MlpModel};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdamParams {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl Default for AdamParams {
    fn default() -> Self {
        AdamParams {
            learning_rate: 1e-3,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
        }
    }
}

/// One Adam update of `params` in place. `t` is the 1-based step count.
pub fn adam_update(
    params: &mut [f64],
    grads: &[f64],
    m: &mut [f64],
    v: &mut [f64],
    t: u64,
    hp: &AdamParams,
) {
    assert!(t >= 1, "Adam step count starts at 1");
    assert!(params.len() == grads.len() && m.len() == params.len() && v.len() == params.len());
    let c1 = 1.0 - hp.beta1.powf(t as f64);
    let c2 = 1.0 - hp.beta2.powf(t as f64);
    for i in 0..params.len() {
        let g = grads[i];
        m[i] = hp.beta1 * m[i] + (1.0 - hp.beta1) * g;
        v[i] = hp.beta2 * v[i] + (1.0 - hp.beta2) * g * g;
        let m_hat = m[i] / c1;
        let v_hat = v[i] / c2;
        params[i] -= hp.learning_rate * m_hat / (v_hat.sqrt() + hp.epsilon);
    }
}

/// First and second moment estimates for every parameter of a model.
#[derive(Debug, Clone)]
pub struct AdamState {
    t: u64,
    moments: Vec<LayerMoments>,
}

#[derive(Debug, Clone)]
struct LayerMoments {
    mw: Vec<f64>,
    vw: Vec<f64>,
    mb: Vec<f64>,
    vb: Vec<f64>,
}

impl AdamState {
    pub fn new(model: &MlpModel) -> Self {
        let moments = model
            .layers()
            .iter()
            .map(|l| {
                let nw = l.weights.as_slice().len();
                LayerMoments {
                    mw: vec![0.0; nw],
                    vw: vec![0.0; nw],
                    mb: vec![0.0; l.bias.len()],
                    vb: vec![0.0; l.bias.len()],
                }
            })
            .collect();
        AdamState { t: 0, moments }
    }

    pub fn steps_taken(&self) -> u64 {
        self.t
    }

    /// Advances the step counter and updates every weight and bias.
    pub fn step(&mut self, model: &mut MlpModel, grads: &Gradients, hp: &AdamParams) {
        self.t += 1;
        let t = self.t;
        for ((layer, g), mo) in model
            .layers_mut()
            .iter_mut()
            .zip(&grads.layers)
            .zip(&mut self.moments)
        {
            adam_update(
                layer.weights.as_mut_slice(),
                g.weights.as_slice(),
                &mut mo.mw,
                &mut mo.vw,
                t,
                hp,
            );
            adam_update(&mut layer.bias, &g.bias, &mut mo.mb, &mut mo.vb, t, hp);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_gradient_is_a_no_op() {
        let mut p = vec![0.3, -1.2, 4.0];
        let before = p.clone();
        let (mut m, mut v) = (vec![0.0; 3], vec![0.0; 3]);
        adam_update(&mut p, &[0.0; 3], &mut m, &mut v, 1, &AdamParams::default());
        assert_eq!(p, before);
    }

    #[test]
    fn first_step_hand_value() {
        // m_hat = 1, v_hat = 1, so the step is lr / (1 + eps).
        let mut p = vec![0.0];
        let (mut m, mut v) = (vec![0.0], vec![0.0]);
        adam_update(&mut p, &[1.0], &mut m, &mut v, 1, &AdamParams::default());
        let expected = -1e-3 / (1.0 + 1e-8);
        assert!((p[0] - expected).abs() < 1e-15);
        assert!((p[0] + 0.001).abs() < 1e-10);
    }

    #[test]
    fn first_step_moves_against_gradient_sign() {
        let g = [2.5, -0.001, 1e-4, -30.0];
        let mut p = vec![0.0; 4];
        let (mut m, mut v) = (vec![0.0; 4], vec![0.0; 4]);
        adam_update(&mut p, &g, &mut m, &mut v, 1, &AdamParams::default());
        for (pi, gi) in p.iter().zip(g) {
            assert_eq!(pi.signum(), -gi.signum());
        }
    }
}
