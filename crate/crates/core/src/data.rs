//! Labeled datasets, synthetic imbalanced data, CSV ingestion and seeded
//! mini-batch iteration.

use crate::error::{PaucError, Result};
use crate::scalar::Scalar;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use std::path::Path;

/// Binary-labeled feature matrix stored row-major.
///
/// The positive/negative partitions and the class prior are fixed at
/// construction; batches never recompute the prior.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleSet<T> {
    features: Vec<T>,
    dim: usize,
    labels: Vec<u8>,
    pos_idx: Vec<usize>,
    neg_idx: Vec<usize>,
    prior_p: T,
}

impl<T: Scalar> SampleSet<T> {
    pub fn new(features: Vec<T>, dim: usize, labels: Vec<u8>) -> Result<Self> {
        if dim == 0 {
            return Err(PaucError::InvalidArgument("feature dimension must be >= 1".into()));
        }
        if labels.is_empty() {
            return Err(PaucError::EmptyData("empty dataset".into()));
        }
        if features.len() != labels.len() * dim {
            return Err(PaucError::Shape(format!(
                "{} feature values for {} rows of dimension {}",
                features.len(),
                labels.len(),
                dim
            )));
        }
        let mut pos_idx = Vec::new();
        let mut neg_idx = Vec::new();
        for (i, &y) in labels.iter().enumerate() {
            match y {
                1 => pos_idx.push(i),
                0 => neg_idx.push(i),
                other => {
                    return Err(PaucError::InvalidArgument(format!(
                        "label {other} at index {i} is not binary"
                    )))
                }
            }
        }
        if pos_idx.is_empty() {
            return Err(PaucError::EmptyData("no positive instances".into()));
        }
        if neg_idx.is_empty() {
            return Err(PaucError::EmptyData("no negative instances".into()));
        }
        let prior_p = T::of_usize(pos_idx.len()) / T::of_usize(labels.len());
        Ok(Self { features, dim, labels, pos_idx, neg_idx, prior_p })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn features(&self) -> &[T] {
        &self.features
    }

    pub fn labels(&self) -> &[u8] {
        &self.labels
    }

    pub fn pos_idx(&self) -> &[usize] {
        &self.pos_idx
    }

    pub fn neg_idx(&self) -> &[usize] {
        &self.neg_idx
    }

    pub fn n_pos(&self) -> usize {
        self.pos_idx.len()
    }

    pub fn n_neg(&self) -> usize {
        self.neg_idx.len()
    }

    /// Empirical `P[y = 1]`, exactly `n_pos / n`.
    pub fn prior_p(&self) -> T {
        self.prior_p
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.features[i * self.dim..(i + 1) * self.dim]
    }

    /// Copies the rows at `idx` into a contiguous row-major buffer.
    pub fn gather_rows(&self, idx: &[usize]) -> Vec<T> {
        let mut out = Vec::with_capacity(idx.len() * self.dim);
        for &i in idx {
            out.extend_from_slice(self.row(i));
        }
        out
    }

    pub fn gather_labels(&self, idx: &[usize]) -> Vec<u8> {
        idx.iter().map(|&i| self.labels[i]).collect()
    }

    /// Rescales every column to `[0, 1]`; constant columns map to 0.
    pub fn min_max_scaled(&self) -> Self {
        let n = self.len();
        let mut lo = vec![T::infinity(); self.dim];
        let mut hi = vec![T::neg_infinity(); self.dim];
        for i in 0..n {
            for (j, &x) in self.row(i).iter().enumerate() {
                lo[j] = lo[j].min(x);
                hi[j] = hi[j].max(x);
            }
        }
        let mut features = self.features.clone();
        for i in 0..n {
            for j in 0..self.dim {
                let span = hi[j] - lo[j];
                let x = &mut features[i * self.dim + j];
                *x = if span > T::zero() { (*x - lo[j]) / span } else { T::zero() };
            }
        }
        Self { features, ..self.clone() }
    }

    pub fn cast<U: Scalar>(&self) -> SampleSet<U> {
        SampleSet {
            features: self.features.iter().map(|&x| U::of(x.as_f64())).collect(),
            dim: self.dim,
            labels: self.labels.clone(),
            pos_idx: self.pos_idx.clone(),
            neg_idx: self.neg_idx.clone(),
            prior_p: U::of_usize(self.pos_idx.len()) / U::of_usize(self.labels.len()),
        }
    }
}

/// Two isotropic unit-variance Gaussians centred at `±separation·1/√d`.
///
/// Positives occupy rows `0..n_pos`, negatives the rest. Samples are drawn in
/// `f64` from a ChaCha stream seeded with `seed`, so the output is
/// bit-identical across calls and platforms.
pub fn generate_synthetic<T: Scalar>(
    n_pos: usize,
    n_neg: usize,
    dim: usize,
    separation: f64,
    seed: u64,
) -> Result<SampleSet<T>> {
    if n_pos == 0 || n_neg == 0 {
        return Err(PaucError::InvalidArgument("class counts must be >= 1".into()));
    }
    if dim == 0 {
        return Err(PaucError::InvalidArgument("dimension must be >= 1".into()));
    }
    if !(separation >= 0.0) || !separation.is_finite() {
        return Err(PaucError::InvalidArgument("separation must be finite and >= 0".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let shift = separation / (dim as f64).sqrt();
    let n = n_pos + n_neg;
    let mut features = Vec::with_capacity(n * dim);
    let mut labels = Vec::with_capacity(n);
    for i in 0..n {
        let (centre, y) = if i < n_pos { (shift, 1u8) } else { (-shift, 0u8) };
        for _ in 0..dim {
            let z: f64 = rng.sample(StandardNormal);
            features.push(T::of(centre + z));
        }
        labels.push(y);
    }
    SampleSet::new(features, dim, labels)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LabelColumn {
    Index(usize),
    Name(String),
}

impl std::str::FromStr for LabelColumn {
    type Err = std::convert::Infallible;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        Ok(match s.parse::<usize>() {
            Ok(i) => LabelColumn::Index(i),
            Err(_) => LabelColumn::Name(s.to_string()),
        })
    }
}

/// Reads a comma-separated file with an optional single header row.
///
/// The first record is treated as a header when any of its fields fails to
/// parse as a number. Row numbers in errors are 1-based file lines.
pub fn load_csv(path: impl AsRef<Path>, label_column: &LabelColumn) -> Result<SampleSet<f64>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_path(path.as_ref())?;
    let mut records = reader.records();

    let first = match records.next() {
        Some(r) => r?,
        None => return Err(PaucError::EmptyData("empty dataset".into())),
    };
    let is_header = first.iter().any(|f| !f.is_empty() && f.parse::<f64>().is_err());
    let width = first.len();
    let label_idx = match label_column {
        LabelColumn::Index(i) => *i,
        LabelColumn::Name(name) => {
            if !is_header {
                return Err(PaucError::InvalidArgument(format!(
                    "label column '{name}' requested but the file has no header"
                )));
            }
            first.iter().position(|h| h == name).ok_or_else(|| {
                PaucError::InvalidArgument(format!("no column named '{name}'"))
            })?
        }
    };
    if label_idx >= width {
        return Err(PaucError::InvalidArgument(format!(
            "label column {label_idx} out of range for {width} columns"
        )));
    }
    if width < 2 {
        return Err(PaucError::InvalidArgument("need at least one feature column".into()));
    }

    let mut features = Vec::new();
    let mut labels = Vec::new();
    let mut parse_row = |record: &csv::StringRecord, row: usize| -> Result<()> {
        if record.len() != width {
            return Err(PaucError::Format {
                row,
                msg: format!("expected {width} fields, found {}", record.len()),
            });
        }
        for (j, field) in record.iter().enumerate() {
            if field.is_empty() {
                return Err(PaucError::Format { row, msg: format!("missing value in column {j}") });
            }
            let value: f64 = field.parse().map_err(|_| PaucError::Format {
                row,
                msg: format!("cannot parse '{field}' as a number in column {j}"),
            })?;
            if j == label_idx {
                let y = if value == 1.0 {
                    1u8
                } else if value == 0.0 {
                    0u8
                } else {
                    return Err(PaucError::Format { row, msg: format!("non-binary label '{field}'") });
                };
                labels.push(y);
            } else {
                features.push(value);
            }
        }
        Ok(())
    };

    if !is_header {
        parse_row(&first, 1)?;
    }
    for (offset, record) in records.enumerate() {
        let record = record?;
        parse_row(&record, offset + 2)?;
    }
    if labels.is_empty() {
        return Err(PaucError::EmptyData("empty dataset".into()));
    }
    SampleSet::new(features, width - 1, labels)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BatchSpec {
    pub batch_size: usize,
    pub shuffle_seed: u64,
    pub stratified: bool,
}

impl BatchSpec {
    pub fn new(batch_size: usize, shuffle_seed: u64) -> Self {
        Self { batch_size, shuffle_seed, stratified: false }
    }

    pub fn stratified(mut self, on: bool) -> Self {
        self.stratified = on;
        self
    }

    pub fn batches_per_epoch(&self, n: usize) -> usize {
        n.div_ceil(self.batch_size.max(1))
    }
}

fn epoch_rng(seed: u64, epoch: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(epoch);
    rng
}

/// Partitions one epoch into consecutive index slices; the last may be short.
///
/// Unstratified: a seeded permutation of `0..n` cut into chunks.
/// Stratified: each class is permuted separately and spread over the batches
/// so that every batch holds at least one positive and one negative whenever
/// the class counts allow it. A pure function of `(seed, epoch)`.
pub fn iter_batches<T: Scalar>(set: &SampleSet<T>, spec: &BatchSpec, epoch: u64) -> Result<Vec<Vec<usize>>> {
    let n = set.len();
    if spec.batch_size == 0 || spec.batch_size > n {
        return Err(PaucError::InvalidArgument(format!(
            "batch size {} must be in 1..={n}",
            spec.batch_size
        )));
    }
    let mut rng = epoch_rng(spec.shuffle_seed, epoch);
    let nb = spec.batches_per_epoch(n);
    let sizes: Vec<usize> =
        (0..nb).map(|j| if j + 1 < nb { spec.batch_size } else { n - spec.batch_size * (nb - 1) }).collect();

    if !spec.stratified {
        let mut order: Vec<usize> = (0..n).collect();
        order.shuffle(&mut rng);
        let mut out = Vec::with_capacity(nb);
        let mut start = 0;
        for s in sizes {
            out.push(order[start..start + s].to_vec());
            start += s;
        }
        return Ok(out);
    }

    let mut pos = set.pos_idx().to_vec();
    let mut neg = set.neg_idx().to_vec();
    pos.shuffle(&mut rng);
    neg.shuffle(&mut rng);
    let mut slots: Vec<usize> = (0..nb).collect();
    slots.shuffle(&mut rng);
    let pos_counts = stratified_counts(&sizes, &slots, pos.len(), neg.len());

    let mut out = Vec::with_capacity(nb);
    let (mut pi, mut ni) = (0, 0);
    for (&s, &c) in sizes.iter().zip(&pos_counts) {
        let mut batch = Vec::with_capacity(s);
        batch.extend_from_slice(&pos[pi..pi + c]);
        batch.extend_from_slice(&neg[ni..ni + (s - c)]);
        pi += c;
        ni += s - c;
        batch.shuffle(&mut rng);
        out.push(batch);
    }
    Ok(out)
}

/// Number of positives assigned to each batch.
///
/// One positive (negative) is reserved per batch while the class has enough
/// members, in the batch order given by `slots`; the remainder is spread
/// proportionally to the leftover capacity by cumulative flooring, which
/// never exceeds any batch's capacity.
fn stratified_counts(sizes: &[usize], slots: &[usize], n_pos: usize, n_neg: usize) -> Vec<usize> {
    let nb = sizes.len();
    let mut base_pos = vec![0usize; nb];
    let mut base_neg = vec![0usize; nb];
    for (rank, &j) in slots.iter().enumerate() {
        base_pos[j] = usize::from(rank < n_pos);
        base_neg[j] = usize::from(rank < n_neg && sizes[j] > base_pos[j]);
    }
    let capacity: Vec<usize> = (0..nb).map(|j| sizes[j] - base_pos[j] - base_neg[j]).collect();
    let total_cap: usize = capacity.iter().sum();
    let rest_pos = n_pos - base_pos.iter().sum::<usize>();

    let mut counts = base_pos;
    if total_cap > 0 {
        let mut cum = 0usize;
        let mut prev = 0usize;
        for (j, &c) in capacity.iter().enumerate() {
            cum += c;
            let upto = (rest_pos as u128 * cum as u128 / total_cap as u128) as usize;
            counts[j] += upto - prev;
            prev = upto;
        }
    }
    counts
}
