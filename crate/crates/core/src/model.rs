//! Scoring functions `f: R^d -> (0, 1)` with hand-written reverse mode.

use crate::error::{PaucError, Result};
use crate::scalar::Scalar;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::path::Path;

pub const DEFAULT_HIDDEN: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    /// `logistic(w·x + c)`
    Linear,
    /// `logistic(W2·tanh(W1·x + c1) + c2)`
    Mlp1,
}

impl std::str::FromStr for ModelKind {
    type Err = PaucError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "linear" => Ok(ModelKind::Linear),
            "mlp1" => Ok(ModelKind::Mlp1),
            other => Err(PaucError::InvalidArgument(format!("unknown model kind '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Layout {
    pub dim: usize,
    /// Hidden width; ignored by `Linear`.
    pub hidden: usize,
}

impl Layout {
    pub fn n_weights(&self, kind: ModelKind) -> usize {
        match kind {
            ModelKind::Linear => self.dim + 1,
            ModelKind::Mlp1 => self.hidden * self.dim + 2 * self.hidden + 1,
        }
    }
}

/// Model kind, shape and flat weight vector.
///
/// Linear weights are `[w_0..w_{d-1}, c]`. Mlp1 weights are `W1` (row-major,
/// `hidden x d`), then `c1`, `W2`, `c2`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct ModelParams<T: Scalar> {
    pub kind: ModelKind,
    pub layout: Layout,
    pub weights: Vec<T>,
}

/// Largest logit magnitude whose logistic is still strictly inside (0, 1)
/// in `T`. Logits beyond it are saturated.
fn logit_limit<T: Scalar>() -> T {
    -T::epsilon().ln() - T::one()
}

impl<T: Scalar> ModelParams<T> {
    pub fn from_weights(kind: ModelKind, layout: Layout, weights: Vec<T>) -> Result<Self> {
        let want = layout.n_weights(kind);
        if layout.dim == 0 || (kind == ModelKind::Mlp1 && layout.hidden == 0) {
            return Err(PaucError::InvalidArgument("model dimensions must be >= 1".into()));
        }
        if weights.len() != want {
            return Err(PaucError::Shape(format!("expected {want} weights, got {}", weights.len())));
        }
        Ok(Self { kind, layout, weights })
    }

    /// Weights uniform in `±1/sqrt(fan_in)`, biases zero.
    pub fn init(kind: ModelKind, dim: usize, hidden: usize, seed: u64) -> Result<Self> {
        let layout = Layout { dim, hidden: if kind == ModelKind::Linear { 0 } else { hidden } };
        if dim == 0 || (kind == ModelKind::Mlp1 && hidden == 0) {
            return Err(PaucError::InvalidArgument("model dimensions must be >= 1".into()));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut uniform = |fan_in: usize, count: usize| -> Vec<T> {
            let r = 1.0 / (fan_in as f64).sqrt();
            (0..count).map(|_| T::of(rng.random_range(-r..r))).collect()
        };
        let weights = match kind {
            ModelKind::Linear => {
                let mut w = uniform(dim, dim);
                w.push(T::zero());
                w
            }
            ModelKind::Mlp1 => {
                let mut w = uniform(dim, hidden * dim);
                w.extend(std::iter::repeat_n(T::zero(), hidden));
                w.extend(uniform(hidden, hidden));
                w.push(T::zero());
                w
            }
        };
        Ok(Self { kind, layout, weights })
    }

    pub fn n_weights(&self) -> usize {
        self.weights.len()
    }

    fn check_batch(&self, x: &[T]) -> Result<usize> {
        let d = self.layout.dim;
        if !x.len().is_multiple_of(d) {
            return Err(PaucError::Shape(format!(
                "feature buffer of length {} is not a multiple of dimension {d}",
                x.len()
            )));
        }
        Ok(x.len() / d)
    }

    fn logit(&self, row: &[T], hidden: &mut [T]) -> T {
        let d = self.layout.dim;
        match self.kind {
            ModelKind::Linear => {
                let (w, c) = self.weights.split_at(d);
                row.iter().zip(w).fold(c[0], |acc, (&x, &wi)| acc + x * wi)
            }
            ModelKind::Mlp1 => {
                let h = self.layout.hidden;
                let (w1, rest) = self.weights.split_at(h * d);
                let (c1, rest) = rest.split_at(h);
                let (w2, c2) = rest.split_at(h);
                let mut out = c2[0];
                for k in 0..h {
                    let pre = w1[k * d..(k + 1) * d]
                        .iter()
                        .zip(row)
                        .fold(c1[k], |acc, (&w, &x)| acc + w * x);
                    hidden[k] = pre.tanh();
                    out = out + w2[k] * hidden[k];
                }
                out
            }
        }
    }

    /// Scores for a row-major batch whose width is the model dimension.
    pub fn forward(&self, x: &[T]) -> Result<Vec<T>> {
        let n = self.check_batch(x)?;
        let d = self.layout.dim;
        let lim = logit_limit::<T>();
        let mut hidden = vec![T::zero(); self.layout.hidden];
        Ok((0..n)
            .map(|i| {
                let z = self.logit(&x[i * d..(i + 1) * d], &mut hidden);
                crate::scalar::logistic(crate::scalar::clamp(z, -lim, lim))
            })
            .collect())
    }

    /// Gradient of `Σ_i L_i` with respect to the weights, given
    /// `dL/dscore_i` for every row of the batch.
    pub fn backward(&self, x: &[T], d_score: &[T]) -> Result<Vec<T>> {
        let n = self.check_batch(x)?;
        if d_score.len() != n {
            return Err(PaucError::Shape(format!(
                "{} upstream gradients for a batch of {n}",
                d_score.len()
            )));
        }
        let d = self.layout.dim;
        let h = self.layout.hidden;
        let lim = logit_limit::<T>();
        let mut grad = vec![T::zero(); self.weights.len()];
        let mut hidden = vec![T::zero(); h];
        for (i, &upstream) in d_score.iter().enumerate() {
            let row = &x[i * d..(i + 1) * d];
            let z = self.logit(row, &mut hidden);
            if z.abs() > lim {
                continue;
            }
            let s = crate::scalar::logistic(z);
            let g = upstream * s * (T::one() - s);
            match self.kind {
                ModelKind::Linear => {
                    for (gw, &xj) in grad[..d].iter_mut().zip(row) {
                        *gw = *gw + g * xj;
                    }
                    grad[d] = grad[d] + g;
                }
                ModelKind::Mlp1 => {
                    let w2 = &self.weights[h * d + h..h * d + 2 * h];
                    let last = grad.len() - 1;
                    grad[last] = grad[last] + g;
                    for k in 0..h {
                        grad[h * d + h + k] = grad[h * d + h + k] + g * hidden[k];
                        let pre = g * w2[k] * (T::one() - hidden[k] * hidden[k]);
                        grad[h * d + k] = grad[h * d + k] + pre;
                        for (gw, &xj) in grad[k * d..(k + 1) * d].iter_mut().zip(row) {
                            *gw = *gw + pre * xj;
                        }
                    }
                }
            }
        }
        Ok(grad)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let m: Self = serde_json::from_str(s)?;
        Self::from_weights(m.kind, m.layout, m.weights)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_json()?)?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }
}
