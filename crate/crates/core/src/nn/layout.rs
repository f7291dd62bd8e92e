use std::ops::Range;

use rand::Rng;

use crate::error::{check_finite, Error, Result};

/// Shape of a fully connected network and the flat ordering of its
/// parameters.
///
/// Layers are stored in order. Each layer is a row-major `out x in` weight
/// block followed by `out` biases. When `includes_logstd` is set, one
/// state-independent log standard deviation per output follows the last
/// layer.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParamLayout {
    input_dim: usize,
    hidden: Vec<usize>,
    output_dim: usize,
    includes_logstd: bool,
    // (weight offset, bias offset, fan_in, fan_out) per layer
    layers: Vec<LayerSlice>,
    total: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) struct LayerSlice {
    pub weights: usize,
    pub biases: usize,
    pub fan_in: usize,
    pub fan_out: usize,
}

/// Where a flat parameter index lives in the network.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ParamSlot {
    Weight {
        layer: usize,
        row: usize,
        col: usize,
    },
    Bias {
        layer: usize,
        row: usize,
    },
    LogStd {
        dim: usize,
    },
}

impl ParamLayout {
    pub fn new(
        input_dim: usize,
        hidden: &[usize],
        output_dim: usize,
        includes_logstd: bool,
    ) -> Result<Self> {
        if input_dim == 0 || output_dim == 0 || hidden.contains(&0) {
            return Err(Error::invalid("layer widths must be positive"));
        }
        let mut layers = Vec::with_capacity(hidden.len() + 1);
        let mut offset = 0;
        let mut fan_in = input_dim;
        for &fan_out in hidden.iter().chain(std::iter::once(&output_dim)) {
            layers.push(LayerSlice {
                weights: offset,
                biases: offset + fan_in * fan_out,
                fan_in,
                fan_out,
            });
            offset += fan_in * fan_out + fan_out;
            fan_in = fan_out;
        }
        if includes_logstd {
            offset += output_dim;
        }
        Ok(Self {
            input_dim,
            hidden: hidden.to_vec(),
            output_dim,
            includes_logstd,
            layers,
            total: offset,
        })
    }

    /// Policy layout: tanh MLP for the action mean plus log-std slots.
    pub fn policy(input_dim: usize, hidden: &[usize], action_dim: usize) -> Result<Self> {
        Self::new(input_dim, hidden, action_dim, true)
    }

    /// Scalar value-function layout.
    pub fn value(input_dim: usize, hidden: &[usize]) -> Result<Self> {
        Self::new(input_dim, hidden, 1, false)
    }

    pub fn input_dim(&self) -> usize {
        self.input_dim
    }

    pub fn hidden(&self) -> &[usize] {
        &self.hidden
    }

    pub fn output_dim(&self) -> usize {
        self.output_dim
    }

    pub fn includes_logstd(&self) -> bool {
        self.includes_logstd
    }

    /// |θ|
    pub fn num_params(&self) -> usize {
        self.total
    }

    pub(crate) fn layers(&self) -> &[LayerSlice] {
        &self.layers
    }

    pub fn logstd_range(&self) -> Option<Range<usize>> {
        self.includes_logstd
            .then(|| self.total - self.output_dim..self.total)
    }

    pub fn locate(&self, index: usize) -> Option<ParamSlot> {
        if index >= self.total {
            return None;
        }
        if let Some(range) = self.logstd_range() {
            if range.contains(&index) {
                return Some(ParamSlot::LogStd {
                    dim: index - range.start,
                });
            }
        }
        self.layers.iter().enumerate().find_map(|(layer, l)| {
            if index >= l.weights && index < l.biases {
                let k = index - l.weights;
                Some(ParamSlot::Weight {
                    layer,
                    row: k / l.fan_in,
                    col: k % l.fan_in,
                })
            } else if index >= l.biases && index < l.biases + l.fan_out {
                Some(ParamSlot::Bias {
                    layer,
                    row: index - l.biases,
                })
            } else {
                None
            }
        })
    }

    /// Weights and biases uniform in ±1/sqrt(fan_in) per layer, log-std 0.
    pub fn init_params<R: Rng + ?Sized>(&self, rng: &mut R) -> ParamVector {
        let mut values = vec![0.0; self.total];
        for l in &self.layers {
            let bound = 1.0 / (l.fan_in as f64).sqrt();
            for v in &mut values[l.weights..l.biases + l.fan_out] {
                *v = rng.random_range(-bound..=bound);
            }
        }
        ParamVector(values)
    }

    pub fn zeros(&self) -> ParamVector {
        ParamVector(vec![0.0; self.total])
    }
}

/// Flat parameter storage θ for one network.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamVector(Vec<f64>);

impl ParamVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        check_finite("parameter vector", &values)?;
        Ok(Self(values))
    }

    pub fn for_layout(layout: &ParamLayout, values: Vec<f64>) -> Result<Self> {
        crate::error::check_len("parameter vector", layout.num_params(), values.len())?;
        Self::new(values)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub(crate) fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    /// True when both vectors have identical bit patterns.
    pub fn bitwise_eq(&self, other: &ParamVector) -> bool {
        self.0.len() == other.0.len()
            && self
                .0
                .iter()
                .zip(&other.0)
                .all(|(a, b)| a.to_bits() == b.to_bits())
    }
}

impl AsRef<[f64]> for ParamVector {
    fn as_ref(&self) -> &[f64] {
        &self.0
    }
}
