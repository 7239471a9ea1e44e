//! Per-call cost of the instance-wise loss against the pairwise risk.
//!
//! Only the loss evaluation is timed; scores are generated up front.

use crate::error::Result;
use crate::loss::{batch_objective_and_grad, AuxState, HyperParams};
use crate::metrics::pairwise_sq_risk_opauc;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::hint::black_box;
use std::io::Write;
use std::time::{Duration, Instant};

pub const DEFAULT_BATCH_SIZES: [usize; 6] = [64, 128, 256, 512, 1024, 2048];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub batch_size: usize,
    /// Mean milliseconds per `batch_objective_and_grad` call.
    pub instance_ms: f64,
    /// Mean milliseconds per pairwise risk call.
    pub pairwise_ms: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchOptions {
    pub batch_sizes: Vec<usize>,
    /// Minimum wall time spent per measurement round.
    pub min_time: Duration,
    /// Rounds per measurement; the fastest round is reported.
    pub rounds: usize,
    pub seed: u64,
}

impl Default for BenchOptions {
    fn default() -> Self {
        Self { batch_sizes: DEFAULT_BATCH_SIZES.to_vec(), min_time: Duration::from_millis(20), rounds: 5, seed: 0 }
    }
}

fn time_per_call<F: FnMut()>(mut f: F, opts: &BenchOptions) -> f64 {
    let mut best = f64::INFINITY;
    for _ in 0..opts.rounds.max(1) {
        let start = Instant::now();
        let mut calls = 0u64;
        while calls < 3 || start.elapsed() < opts.min_time {
            f();
            calls += 1;
        }
        best = best.min(start.elapsed().as_secs_f64() * 1e3 / calls as f64);
    }
    best
}

/// A batch of size `n` holds `⌊n/2⌋` positives and the rest negatives, with
/// at least one of each so the pairwise risk is defined for every size.
pub fn bench_batch(n: usize, rng: &mut ChaCha8Rng) -> (Vec<f64>, Vec<u8>) {
    let n_pos = (n / 2).max(1);
    let n_neg = n.saturating_sub(n_pos).max(1);
    let scores = (0..n_pos + n_neg).map(|_| rng.random::<f64>()).collect();
    let labels = (0..n_pos + n_neg).map(|i| u8::from(i < n_pos)).collect();
    (scores, labels)
}

pub fn run_bench(hp: &HyperParams<f64>, opts: &BenchOptions) -> Result<Vec<BenchRow>> {
    hp.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let aux = AuxState::default();
    let mut rows = Vec::with_capacity(opts.batch_sizes.len());
    for &n in &opts.batch_sizes {
        let (scores, labels) = bench_batch(n, &mut rng);
        let split = labels.iter().filter(|&&y| y == 1).count();
        let (pos, neg) = scores.split_at(split);
        // surface errors once before timing
        batch_objective_and_grad(&scores, &labels, &aux, hp)?;
        pairwise_sq_risk_opauc(pos, neg, hp.beta)?;
        let instance_ms = time_per_call(
            || {
                black_box(batch_objective_and_grad(black_box(&scores), &labels, &aux, hp).ok());
            },
            opts,
        );
        let pairwise_ms = time_per_call(
            || {
                black_box(pairwise_sq_risk_opauc(black_box(pos), neg, hp.beta).ok());
            },
            opts,
        );
        rows.push(BenchRow { batch_size: n, instance_ms, pairwise_ms });
    }
    Ok(rows)
}

pub fn write_bench_csv<W: Write>(out: W, rows: &[BenchRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

/// `t(last) / t(first)` for both columns.
pub fn growth_ratios(rows: &[BenchRow]) -> Option<(f64, f64)> {
    let (first, last) = (rows.first()?, rows.last()?);
    Some((last.instance_ms / first.instance_ms, last.pairwise_ms / first.pairwise_ms))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::loss::Task;

    fn quick(sizes: Vec<usize>) -> BenchOptions {
        BenchOptions { batch_sizes: sizes, min_time: Duration::from_micros(200), rounds: 1, seed: 0 }
    }

    #[test]
    fn batch_of_one_runs() {
        let hp = HyperParams::with_defaults(Task::Opauc, 1.0, 1.0, 0.5).unwrap();
        let rows = run_bench(&hp, &quick(vec![1, 2, 3])).unwrap();
        assert_eq!(rows.len(), 3);
        assert!(rows.iter().all(|r| r.instance_ms > 0.0 && r.pairwise_ms > 0.0));
    }

    #[test]
    fn batch_composition() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let (s, y) = bench_batch(64, &mut rng);
        assert_eq!(s.len(), 64);
        assert_eq!(y.iter().filter(|&&l| l == 1).count(), 32);
        let (s, y) = bench_batch(1, &mut rng);
        assert_eq!((s.len(), y), (2, vec![1, 0]));
    }

    #[test]
    fn csv_layout() {
        let rows = [BenchRow { batch_size: 64, instance_ms: 0.5, pairwise_ms: 1.5 }];
        let mut buf = Vec::new();
        write_bench_csv(&mut buf, &rows).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "batch_size,instance_ms,pairwise_ms\n64,0.5,1.5\n");
        assert_eq!(growth_ratios(&rows), Some((1.0, 1.0)));
    }
}
