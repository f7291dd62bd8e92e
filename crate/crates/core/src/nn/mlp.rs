use super::layout::{ParamLayout, ParamVector};
use crate::error::{check_finite, check_len, Result};

/// Scratch buffers for forward and backward passes, reused across samples.
#[derive(Debug, Clone, Default)]
pub struct Workspace {
    // activations[0] is the input; activations[l + 1] is the output of layer l
    activations: Vec<Vec<f64>>,
    delta: Vec<f64>,
    delta_prev: Vec<f64>,
}

impl Workspace {
    pub fn new(layout: &ParamLayout) -> Self {
        let mut activations = vec![vec![0.0; layout.input_dim()]];
        activations.extend(layout.layers().iter().map(|l| vec![0.0; l.fan_out]));
        Self {
            activations,
            delta: Vec::new(),
            delta_prev: Vec::new(),
        }
    }

    pub fn output(&self) -> &[f64] {
        self.activations.last().map(Vec::as_slice).unwrap_or(&[])
    }
}

/// Unchecked forward pass; tanh on hidden layers, identity on the output.
pub(crate) fn forward_into<'w>(
    params: &[f64],
    layout: &ParamLayout,
    obs: &[f64],
    ws: &'w mut Workspace,
) -> &'w [f64] {
    if ws.activations.len() != layout.layers().len() + 1 {
        *ws = Workspace::new(layout);
    }
    ws.activations[0].clear();
    ws.activations[0].extend_from_slice(obs);
    let last = layout.layers().len() - 1;
    for (li, l) in layout.layers().iter().enumerate() {
        let (inputs, outputs) = ws.activations.split_at_mut(li + 1);
        let x = &inputs[li];
        let y = &mut outputs[0];
        y.resize(l.fan_out, 0.0);
        let w = &params[l.weights..l.biases];
        let b = &params[l.biases..l.biases + l.fan_out];
        for (o, out) in y.iter_mut().enumerate() {
            let row = &w[o * l.fan_in..(o + 1) * l.fan_in];
            let mut acc = b[o];
            for (wi, xi) in row.iter().zip(x) {
                acc += wi * xi;
            }
            *out = if li == last { acc } else { acc.tanh() };
        }
    }
    ws.output()
}

/// Unchecked backward pass for one sample. Adds d<out_grad, f(obs)>/dθ into
/// `grad`. The forward pass for the same sample must already be in `ws`.
pub(crate) fn accumulate_gradient(
    params: &[f64],
    layout: &ParamLayout,
    out_grad: &[f64],
    grad: &mut [f64],
    ws: &mut Workspace,
) {
    let Workspace {
        activations,
        delta,
        delta_prev,
    } = ws;
    delta.clear();
    delta.extend_from_slice(&out_grad[..layout.output_dim()]);
    for (li, l) in layout.layers().iter().enumerate().rev() {
        let x = &activations[li];
        let w = &params[l.weights..l.biases];
        for (o, &d) in delta.iter().enumerate() {
            if d == 0.0 {
                continue;
            }
            let g_row = &mut grad[l.weights + o * l.fan_in..l.weights + (o + 1) * l.fan_in];
            for (gi, xi) in g_row.iter_mut().zip(x) {
                *gi += d * xi;
            }
            grad[l.biases + o] += d;
        }
        if li == 0 {
            break;
        }
        // x is tanh output of the previous layer
        delta_prev.clear();
        delta_prev.resize(l.fan_in, 0.0);
        for (o, &d) in delta.iter().enumerate() {
            if d == 0.0 {
                continue;
            }
            let row = &w[o * l.fan_in..(o + 1) * l.fan_in];
            for (dp, wi) in delta_prev.iter_mut().zip(row) {
                *dp += wi * d;
            }
        }
        for (dp, xi) in delta_prev.iter_mut().zip(x) {
            *dp *= 1.0 - xi * xi;
        }
        std::mem::swap(delta, delta_prev);
    }
    if let Some(range) = layout.logstd_range() {
        if out_grad.len() == 2 * layout.output_dim() {
            for (g, og) in grad[range].iter_mut().zip(&out_grad[layout.output_dim()..]) {
                *g += og;
            }
        }
    }
}

/// Network output (action mean or value) for a single observation.
pub fn mlp_forward(params: &ParamVector, layout: &ParamLayout, obs: &[f64]) -> Result<Vec<f64>> {
    check_len("parameter vector", layout.num_params(), params.len())?;
    check_len("observation", layout.input_dim(), obs.len())?;
    check_finite("observation", obs)?;
    let mut ws = Workspace::new(layout);
    Ok(forward_into(params.as_slice(), layout, obs, &mut ws).to_vec())
}

/// Gradient of Σ_n <out_grads[n], f(obs[n])> with respect to θ.
///
/// Each output-gradient row has `output_dim` entries, or `2 * output_dim`
/// when the layout carries log-std slots; the second half is then added to
/// the log-std gradient directly.
pub fn backprop(
    params: &ParamVector,
    layout: &ParamLayout,
    obs: &[Vec<f64>],
    out_grads: &[Vec<f64>],
) -> Result<Vec<f64>> {
    check_len("parameter vector", layout.num_params(), params.len())?;
    check_len("output-gradient batch", obs.len(), out_grads.len())?;
    let mut grad = vec![0.0; layout.num_params()];
    let mut ws = Workspace::new(layout);
    for (x, g) in obs.iter().zip(out_grads) {
        check_len("observation", layout.input_dim(), x.len())?;
        let with_logstd = layout.includes_logstd() && g.len() == 2 * layout.output_dim();
        if !with_logstd {
            check_len("output gradient", layout.output_dim(), g.len())?;
        }
        forward_into(params.as_slice(), layout, x, &mut ws);
        accumulate_gradient(params.as_slice(), layout, g, &mut grad, &mut ws);
    }
    Ok(grad)
}
