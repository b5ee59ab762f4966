//! MLP and GRU primitives, plain (untaped) evaluation, and initialization.
//!
//! Weight matrices are stored out-by-in, matching the `W·x + b` orientation.

use super::{dot, Tensor};
use crate::error::{Error, Result};
use rand::Rng;

/// Fully connected network: `in -> hidden... -> out`, ReLU on hidden layers,
/// identity on the output layer.
#[derive(Debug, Clone, PartialEq)]
pub struct MlpParams {
    /// `(weight [out, in], bias [out])` per layer.
    pub layers: Vec<(Tensor, Tensor)>,
}

impl MlpParams {
    /// Layer sizes `in -> .. -> out`.
    pub fn dims(&self) -> Vec<usize> {
        let mut d: Vec<usize> = self.layers.iter().map(|(w, _)| w.cols()).collect();
        if let Some((w, _)) = self.layers.last() {
            d.push(w.rows());
        }
        d
    }

    pub fn validate(&self) -> Result<()> {
        if self.layers.is_empty() {
            return Err(Error::Config("mlp has no layers".into()));
        }
        for (i, (w, b)) in self.layers.iter().enumerate() {
            if b.len() != w.rows() {
                return Err(Error::Config(format!(
                    "mlp layer {i}: bias len {} vs weight rows {}",
                    b.len(),
                    w.rows()
                )));
            }
            if i > 0 && w.cols() != self.layers[i - 1].0.rows() {
                return Err(Error::Config(format!(
                    "mlp layer {i}: input dim {} vs previous output {}",
                    w.cols(),
                    self.layers[i - 1].0.rows()
                )));
            }
        }
        Ok(())
    }
}

/// Evaluate the MLP on a rank-1 input.
pub fn mlp_forward(params: &MlpParams, input: &Tensor) -> Result<Tensor> {
    params.validate()?;
    if input.len() != params.layers[0].0.cols() {
        return Err(Error::Config(format!(
            "mlp input dim {} vs first layer {}",
            input.len(),
            params.layers[0].0.cols()
        )));
    }
    let last = params.layers.len() - 1;
    let mut x = input.data().to_vec();
    for (i, (w, b)) in params.layers.iter().enumerate() {
        let mut y = vec![0.0; w.rows()];
        for (o, yo) in y.iter_mut().enumerate() {
            *yo = dot(w.row(o), &x) + b.data()[o];
            if i < last && *yo < 0.0 {
                *yo = 0.0;
            }
        }
        x = y;
    }
    Ok(Tensor::vector(&x))
}

/// Three-gate GRU (update, reset, tanh candidate).
///
/// `g' = z .* g + (1 - z) .* tanh(Wh x + Uh (r .* g) + bh)`, so a saturated
/// update gate carries the previous state through unchanged.
#[derive(Debug, Clone, PartialEq)]
pub struct GruParams {
    pub wz: Tensor,
    pub uz: Tensor,
    pub bz: Tensor,
    pub wr: Tensor,
    pub ur: Tensor,
    pub br: Tensor,
    pub wh: Tensor,
    pub uh: Tensor,
    pub bh: Tensor,
}

impl GruParams {
    pub fn input_dim(&self) -> usize {
        self.wz.cols()
    }

    pub fn hidden_dim(&self) -> usize {
        self.wz.rows()
    }

    pub fn validate(&self) -> Result<()> {
        let (h, x) = (self.hidden_dim(), self.input_dim());
        let gates = [
            ("wz", &self.wz, [h, x]),
            ("uz", &self.uz, [h, h]),
            ("wr", &self.wr, [h, x]),
            ("ur", &self.ur, [h, h]),
            ("wh", &self.wh, [h, x]),
            ("uh", &self.uh, [h, h]),
        ];
        for (name, t, want) in gates {
            if t.shape() != want {
                return Err(Error::Config(format!(
                    "gru {name}: shape {:?} vs {:?}",
                    t.shape(),
                    want
                )));
            }
        }
        for (name, b) in [("bz", &self.bz), ("br", &self.br), ("bh", &self.bh)] {
            if b.len() != h {
                return Err(Error::Config(format!("gru {name}: len {} vs {h}", b.len())));
            }
        }
        Ok(())
    }
}

fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// One GRU step on rank-1 tensors.
pub fn gru_step(params: &GruParams, h_prev: &Tensor, x: &Tensor) -> Result<Tensor> {
    params.validate()?;
    let h = params.hidden_dim();
    if h_prev.len() != h || x.len() != params.input_dim() {
        return Err(Error::Config(format!(
            "gru step dims: hidden {} vs {}, input {} vs {}",
            h_prev.len(),
            h,
            x.len(),
            params.input_dim()
        )));
    }
    let hp = h_prev.data();
    let xd = x.data();
    let mut out = vec![0.0; h];
    let mut reset = vec![0.0; h];
    for i in 0..h {
        reset[i] =
            sigmoid(dot(params.wr.row(i), xd) + dot(params.ur.row(i), hp) + params.br.data()[i]);
    }
    let gated: Vec<f64> = reset.iter().zip(hp).map(|(r, g)| r * g).collect();
    for i in 0..h {
        let z =
            sigmoid(dot(params.wz.row(i), xd) + dot(params.uz.row(i), hp) + params.bz.data()[i]);
        let cand =
            (dot(params.wh.row(i), xd) + dot(params.uh.row(i), &gated) + params.bh.data()[i])
                .tanh();
        out[i] = z * hp[i] + (1.0 - z) * cand;
    }
    Ok(Tensor::vector(&out))
}

/// Softmax of a rank-1 tensor, max-subtracted for overflow safety.
pub fn softmax(logits: &Tensor) -> Tensor {
    let mut out = logits.data().to_vec();
    softmax_in_place(&mut out);
    Tensor::vector(&out)
}

pub fn softmax_in_place(x: &mut [f64]) {
    let m = x.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mut sum = 0.0;
    for v in x.iter_mut() {
        *v = (*v - m).exp();
        sum += *v;
    }
    for v in x.iter_mut() {
        *v /= sum;
    }
}

fn uniform_fan_in(rng: &mut impl Rng, rows: usize, cols: usize) -> Tensor {
    let bound = 1.0 / (cols as f64).sqrt();
    let data: Vec<f64> = (0..rows * cols)
        .map(|_| rng.gen_range(-bound..bound))
        .collect();
    Tensor::new(vec![rows, cols], data).unwrap()
}

fn uniform_bias(rng: &mut impl Rng, len: usize, fan_in: usize) -> Tensor {
    let bound = 1.0 / (fan_in as f64).sqrt();
    Tensor::vector(
        &(0..len)
            .map(|_| rng.gen_range(-bound..bound))
            .collect::<Vec<_>>(),
    )
}

/// Uniform `[-1/sqrt(fan_in), 1/sqrt(fan_in)]` init for a `dims[0] -> .. ->
/// dims.last()` MLP, biases included.
pub fn init_mlp(dims: &[usize], rng: &mut impl Rng) -> MlpParams {
    assert!(dims.len() >= 2);
    let layers = dims
        .windows(2)
        .map(|w| {
            (
                uniform_fan_in(rng, w[1], w[0]),
                uniform_bias(rng, w[1], w[0]),
            )
        })
        .collect();
    MlpParams { layers }
}

/// Same init scheme for a GRU with the given input and hidden sizes.
pub fn init_gru(input: usize, hidden: usize, rng: &mut impl Rng) -> GruParams {
    GruParams {
        wz: uniform_fan_in(rng, hidden, input),
        uz: uniform_fan_in(rng, hidden, hidden),
        bz: uniform_bias(rng, hidden, input),
        wr: uniform_fan_in(rng, hidden, input),
        ur: uniform_fan_in(rng, hidden, hidden),
        br: uniform_bias(rng, hidden, input),
        wh: uniform_fan_in(rng, hidden, input),
        uh: uniform_fan_in(rng, hidden, hidden),
        bh: uniform_bias(rng, hidden, input),
    }
}
