//! Forward and backward passes for the fully connected ReLU network family.
//!
//! Parameters are stored flat, layer by layer: for each affine map the weight
//! matrix in row-major order, then its bias vector. Hidden layers use ReLU;
//! the final map is linear with a single output.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// Flat parameter count for the given widths.
pub fn param_count(layers: &[usize]) -> usize {
    layers.windows(2).map(|w| w[1] * (w[0] + 1)).sum()
}

/// Per-sample forward state reused across evaluations to avoid reallocation.
#[derive(Debug, Clone, Default)]
pub struct Workspace {
    /// Activations entering each affine map; `acts[0]` is the input.
    pub acts: Vec<Vec<f64>>,
    /// Pre-activation values leaving each affine map.
    pub preacts: Vec<Vec<f64>>,
    /// Backpropagated gradient with respect to each pre-activation.
    deltas: Vec<Vec<f64>>,
}

impl Workspace {
    pub fn new(layers: &[usize]) -> Self {
        let acts = layers[..layers.len() - 1].iter().map(|&w| vec![0.0; w]).collect();
        let preacts = layers[1..].iter().map(|&w| vec![0.0; w]).collect();
        let deltas = layers[1..].iter().map(|&w| vec![0.0; w]).collect();
        Self { acts, preacts, deltas }
    }

    /// Smallest `|preact|` over hidden layers from the last forward pass.
    ///
    /// Finite-difference checks reject points where this is tiny because the
    /// ReLU kink makes one-sided derivatives disagree there.
    pub fn min_hidden_preact_magnitude(&self) -> f64 {
        let hidden = self.preacts.len().saturating_sub(1);
        self.preacts[..hidden]
            .iter()
            .flat_map(|layer| layer.iter())
            .fold(f64::INFINITY, |acc, z| acc.min(z.abs()))
    }
}

/// Compute the scalar output at `x`, recording activations in `ws`.
pub fn forward(layers: &[usize], params: &[f64], x: &[f64], ws: &mut Workspace) -> f64 {
    debug_assert_eq!(params.len(), param_count(layers));
    debug_assert_eq!(x.len(), layers[0]);
    let num_maps = layers.len() - 1;
    ws.acts[0].copy_from_slice(x);
    let mut offset = 0;
    for l in 0..num_maps {
        let (fan_in, fan_out) = (layers[l], layers[l + 1]);
        let weights = &params[offset..offset + fan_out * fan_in];
        let biases = &params[offset + fan_out * fan_in..offset + fan_out * (fan_in + 1)];
        offset += fan_out * (fan_in + 1);
        // Borrow the input activation separately from the output slot.
        let (input_part, rest) = ws.acts.split_at_mut(l + 1);
        let input = &input_part[l];
        for j in 0..fan_out {
            let row = &weights[j * fan_in..(j + 1) * fan_in];
            let z: f64 =
                row.iter().zip(input.iter()).map(|(w, a)| w * a).sum::<f64>() + biases[j];
            ws.preacts[l][j] = z;
            if l + 1 < num_maps {
                rest[0][j] = z.max(0.0);
            }
        }
    }
    ws.preacts[num_maps - 1][0]
}

/// Accumulate `g_out * d output / d params` into `grad`, using the
/// activations stored by the preceding [`forward`] call.
pub fn accumulate_gradient(
    layers: &[usize],
    params: &[f64],
    g_out: f64,
    ws: &mut Workspace,
    grad: &mut [f64],
) {
    debug_assert_eq!(grad.len(), param_count(layers));
    let num_maps = layers.len() - 1;
    ws.deltas[num_maps - 1][0] = g_out;
    // Offsets of each layer's parameter block.
    let mut offsets = Vec::with_capacity(num_maps);
    let mut offset = 0;
    for l in 0..num_maps {
        offsets.push(offset);
        offset += layers[l + 1] * (layers[l] + 1);
    }
    for l in (0..num_maps).rev() {
        let (fan_in, fan_out) = (layers[l], layers[l + 1]);
        let base = offsets[l];
        let (delta_part, delta_rest) = ws.deltas.split_at_mut(l);
        let delta = &delta_rest[0];
        for j in 0..fan_out {
            let d = delta[j];
            let grad_row = &mut grad[base + j * fan_in..base + (j + 1) * fan_in];
            for (g, a) in grad_row.iter_mut().zip(ws.acts[l].iter()) {
                *g += d * a;
            }
            grad[base + fan_out * fan_in + j] += d;
        }
        if l > 0 {
            let weights = &params[base..base + fan_out * fan_in];
            let prev = &mut delta_part[l - 1];
            for i in 0..fan_in {
                // ReLU passes gradient only where the preactivation was
                // positive; the derivative at exactly zero is taken as zero.
                let open = ws.preacts[l - 1][i] > 0.0;
                prev[i] = if open {
                    (0..fan_out).map(|j| weights[j * fan_in + i] * delta[j]).sum()
                } else {
                    0.0
                };
            }
        }
    }
}

/// Uniform initialization in `(-1/sqrt(fan_in), 1/sqrt(fan_in))` per layer,
/// weights then biases, in storage order.
pub fn init_params(layers: &[usize], rng: &mut ChaCha8Rng) -> Vec<f64> {
    let mut params = Vec::with_capacity(param_count(layers));
    for w in layers.windows(2) {
        let (fan_in, fan_out) = (w[0], w[1]);
        let bound = 1.0 / (fan_in as f64).sqrt();
        for _ in 0..fan_out * (fan_in + 1) {
            params.push(rng.random_range(-bound..bound));
        }
    }
    params
}
