use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::SimRng;

/// Slope of the leaky rectifier for negative inputs.
pub const LEAKY_SLOPE: f64 = 0.01;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Activation {
    Tanh,
    LeakyRelu,
    Identity,
}

impl Activation {
    fn apply(self, x: f64) -> f64 {
        match self {
            Activation::Tanh => x.tanh(),
            Activation::LeakyRelu => {
                if x > 0.0 {
                    x
                } else {
                    LEAKY_SLOPE * x
                }
            }
            Activation::Identity => x,
        }
    }

    /// Derivative expressed through the pre-activation `x` and output `y`.
    fn derivative(self, x: f64, y: f64) -> f64 {
        match self {
            Activation::Tanh => 1.0 - y * y,
            Activation::LeakyRelu => {
                if x > 0.0 {
                    1.0
                } else {
                    LEAKY_SLOPE
                }
            }
            Activation::Identity => 1.0,
        }
    }
}

/// Fully connected layer, weights stored row-major as `[out][in]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Dense {
    pub inputs: usize,
    pub outputs: usize,
    pub weights: Vec<f64>,
    pub bias: Vec<f64>,
}

impl Dense {
    fn new(inputs: usize, outputs: usize, rng: &mut SimRng) -> Self {
        let bound = (6.0 / (inputs + outputs) as f64).sqrt();
        Dense {
            inputs,
            outputs,
            weights: (0..inputs * outputs).map(|_| rng.random_range(-bound..bound)).collect(),
            bias: vec![0.0; outputs],
        }
    }

    fn forward(&self, x: &[f64]) -> Vec<f64> {
        (0..self.outputs)
            .map(|o| {
                let row = &self.weights[o * self.inputs..(o + 1) * self.inputs];
                self.bias[o] + row.iter().zip(x).map(|(w, v)| w * v).sum::<f64>()
            })
            .collect()
    }

    fn param_count(&self) -> usize {
        self.weights.len() + self.bias.len()
    }

    /// Accumulates `scale * dL/dparams` into `grad` given the upstream
    /// gradient `dy` and the layer input `x`; returns `dL/dx`.
    fn backward(&self, x: &[f64], dy: &[f64], grad: &mut [f64]) -> Vec<f64> {
        let (gw, gb) = grad.split_at_mut(self.weights.len());
        let mut dx = vec![0.0; self.inputs];
        for o in 0..self.outputs {
            let d = dy[o];
            if d == 0.0 {
                continue;
            }
            gb[o] += d;
            let row = o * self.inputs;
            for i in 0..self.inputs {
                gw[row + i] += d * x[i];
                dx[i] += d * self.weights[row + i];
            }
        }
        dx
    }

    fn params_into(&self, out: &mut Vec<f64>) {
        out.extend_from_slice(&self.weights);
        out.extend_from_slice(&self.bias);
    }

    fn set_params(&mut self, p: &[f64]) {
        let (w, b) = p.split_at(self.weights.len());
        self.weights.copy_from_slice(w);
        self.bias.copy_from_slice(b);
    }
}

/// Combines a state value and an advantage vector into action values,
/// subtracting the mean advantage.
pub fn dueling_combine(value: f64, advantage: &[f64]) -> Vec<f64> {
    let mean = advantage.iter().sum::<f64>() / advantage.len() as f64;
    advantage.iter().map(|a| value + a - mean).collect()
}

/// Layer outputs kept for back-propagation.
struct Trace {
    /// Input to each hidden layer, then the input to the heads.
    inputs: Vec<Vec<f64>>,
    pre: Vec<Vec<f64>>,
    value: f64,
    advantage: Vec<f64>,
}

/// Feed-forward trunk with separate value and advantage heads. With no
/// hidden layers the heads read the input directly.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DuelingNet {
    pub activation: Activation,
    pub hidden: Vec<Dense>,
    pub value: Dense,
    pub advantage: Dense,
}

impl DuelingNet {
    pub fn new(
        inputs: usize,
        hidden: &[usize],
        actions: usize,
        activation: Activation,
        rng: &mut SimRng,
    ) -> Result<Self> {
        if inputs == 0 || actions == 0 || hidden.contains(&0) {
            return Err(Error::Dimension(format!(
                "network {inputs} -> {hidden:?} -> {actions} has an empty layer"
            )));
        }
        let mut layers = Vec::new();
        let mut width = inputs;
        for &h in hidden {
            layers.push(Dense::new(width, h, rng));
            width = h;
        }
        Ok(DuelingNet {
            activation,
            hidden: layers,
            value: Dense::new(width, 1, rng),
            advantage: Dense::new(width, actions, rng),
        })
    }

    pub fn inputs(&self) -> usize {
        self.hidden.first().unwrap_or(&self.value).inputs
    }

    pub fn actions(&self) -> usize {
        self.advantage.outputs
    }

    fn check(&self, state: &[f64]) -> Result<()> {
        if state.len() != self.inputs() {
            return Err(Error::Argument(format!(
                "state has {} features, network expects {}",
                state.len(),
                self.inputs()
            )));
        }
        Ok(())
    }

    fn trace(&self, state: &[f64]) -> Trace {
        let mut inputs = vec![state.to_vec()];
        let mut pre = Vec::new();
        for layer in &self.hidden {
            let z = layer.forward(inputs.last().unwrap());
            inputs.push(z.iter().map(|&v| self.activation.apply(v)).collect());
            pre.push(z);
        }
        let h = inputs.last().unwrap();
        let value = self.value.forward(h)[0];
        let advantage = self.advantage.forward(h);
        Trace {
            inputs,
            pre,
            value,
            advantage,
        }
    }

    /// State value and advantage vector.
    pub fn heads(&self, state: &[f64]) -> Result<(f64, Vec<f64>)> {
        self.check(state)?;
        let t = self.trace(state);
        Ok((t.value, t.advantage))
    }

    pub fn q_values(&self, state: &[f64]) -> Result<Vec<f64>> {
        let (v, a) = self.heads(state)?;
        Ok(dueling_combine(v, &a))
    }

    pub fn param_count(&self) -> usize {
        self.hidden.iter().map(Dense::param_count).sum::<usize>()
            + self.value.param_count()
            + self.advantage.param_count()
    }

    /// Parameters flattened layer by layer: hidden layers, value head,
    /// advantage head; weights before biases.
    pub fn params(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.param_count());
        for l in &self.hidden {
            l.params_into(&mut out);
        }
        self.value.params_into(&mut out);
        self.advantage.params_into(&mut out);
        out
    }

    pub fn set_params(&mut self, params: &[f64]) -> Result<()> {
        if params.len() != self.param_count() {
            return Err(Error::Dimension(format!(
                "{} parameters given, network has {}",
                params.len(),
                self.param_count()
            )));
        }
        let mut rest = params;
        for l in self.hidden.iter_mut().chain([&mut self.value, &mut self.advantage]) {
            let (mine, tail) = rest.split_at(l.param_count());
            l.set_params(mine);
            rest = tail;
        }
        Ok(())
    }

    /// Adds `scale * dQ(state, action)/dparams` to `grad`, a buffer in
    /// [`params`](Self::params) layout. Returns `Q(state, action)`.
    pub fn accumulate_gradient(&self, state: &[f64], action: usize, scale: f64, grad: &mut [f64]) -> Result<f64> {
        self.check(state)?;
        if action >= self.actions() {
            return Err(Error::Argument(format!("action {action} out of {}", self.actions())));
        }
        if grad.len() != self.param_count() {
            return Err(Error::Dimension("gradient buffer size".into()));
        }
        let t = self.trace(state);
        let n = self.actions() as f64;
        let q = dueling_combine(t.value, &t.advantage)[action];

        let head_offset: usize = self.hidden.iter().map(Dense::param_count).sum();
        let (trunk_grad, heads_grad) = grad.split_at_mut(head_offset);
        let (value_grad, adv_grad) = heads_grad.split_at_mut(self.value.param_count());
        let h = t.inputs.last().unwrap();
        let mut dh = self.value.backward(h, &[scale], value_grad);
        let dadv: Vec<f64> = (0..self.actions())
            .map(|j| scale * (f64::from(j == action) - 1.0 / n))
            .collect();
        let dh_adv = self.advantage.backward(h, &dadv, adv_grad);
        for (a, b) in dh.iter_mut().zip(dh_adv) {
            *a += b;
        }

        let mut offsets = Vec::with_capacity(self.hidden.len());
        let mut acc = 0;
        for l in &self.hidden {
            offsets.push(acc);
            acc += l.param_count();
        }
        for (k, layer) in self.hidden.iter().enumerate().rev() {
            let dz: Vec<f64> = dh
                .iter()
                .zip(&t.pre[k])
                .zip(&t.inputs[k + 1])
                .map(|((d, &x), &y)| d * self.activation.derivative(x, y))
                .collect();
            let slice = &mut trunk_grad[offsets[k]..offsets[k] + layer.param_count()];
            dh = layer.backward(&t.inputs[k], &dz, slice);
        }
        Ok(q)
    }
}
