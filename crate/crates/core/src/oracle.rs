//! Brute-force oracles that certify the instance-wise reformulation on small
//! inputs.
//!
//! Closed forms and the nested solver use plain sort-and-sum arithmetic and
//! never call into [`crate::loss`]; only the property checks at the bottom
//! exercise the production loss, model and metrics against these oracles.

use crate::error::{PaucError, Result};
use crate::loss::{self, AuxState, HyperParams, Task};
use crate::metrics::{pairwise_sq_risk_opauc, pairwise_sq_risk_tpauc};
use crate::model::{ModelKind, ModelParams};
use crate::scalar::floor_count;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

fn sorted_desc(values: &[f64]) -> Vec<f64> {
    let mut v = values.to_vec();
    v.sort_by(|a, b| b.total_cmp(a));
    v
}

fn plain_mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

fn check_k(n: usize, k: usize) -> Result<()> {
    if k == 0 || k > n {
        return Err(PaucError::InvalidArgument(format!("k = {k} outside 1..={n}")));
    }
    Ok(())
}

/// Mean of the `k` largest values.
pub fn avg_topk(values: &[f64], k: usize) -> Result<f64> {
    check_k(values.len(), k)?;
    Ok(plain_mean(&sorted_desc(values)[..k]))
}

/// `min_s { s + (1/k) Σ [x_i - s]₊ }` evaluated at every value and at the
/// k-th largest. Returns the minimum and the minimizing shift; the k-th
/// largest value wins ties.
pub fn atk_via_min_s(values: &[f64], k: usize) -> Result<(f64, f64)> {
    check_k(values.len(), k)?;
    let kth = sorted_desc(values)[k - 1];
    let eval = |s: f64| s + values.iter().map(|&x| (x - s).max(0.0)).sum::<f64>() / k as f64;
    let mut best = (eval(kth), kth);
    for &s in values {
        let v = eval(s);
        if v < best.0 {
            best = (v, s);
        }
    }
    Ok(best)
}

/// Minimizers and optimal value of the minimax problem for fixed scores.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClosedFormOptima {
    pub a_star: f64,
    pub b_star: f64,
    pub gamma_star: f64,
    pub value: f64,
}

fn closed_form(pos_set: &[f64], neg_set: &[f64]) -> ClosedFormOptima {
    let a = plain_mean(pos_set);
    let b = plain_mean(neg_set);
    let var_a = pos_set.iter().map(|f| (f - a) * (f - a)).sum::<f64>() / pos_set.len() as f64;
    let var_b = neg_set.iter().map(|f| (f - b) * (f - b)).sum::<f64>() / neg_set.len() as f64;
    let delta = b - a;
    ClosedFormOptima { a_star: a, b_star: b, gamma_star: delta, value: var_a + var_b + delta * delta + 2.0 * delta }
}

fn region_size(n: usize, frac: f64, name: &str) -> Result<usize> {
    let k = floor_count(n, frac);
    if k == 0 {
        return Err(PaucError::InvalidRegion(format!("empty top-{name} set")));
    }
    Ok(k)
}

fn nonempty(pos: &[f64], neg: &[f64]) -> Result<()> {
    if pos.is_empty() || neg.is_empty() {
        return Err(PaucError::EmptyData("both classes need at least one score".into()));
    }
    Ok(())
}

/// `a*` = mean positive score, `b*` = mean of the top-⌊βn₋⌋ negatives.
pub fn closed_form_opauc(pos: &[f64], neg: &[f64], beta: f64) -> Result<ClosedFormOptima> {
    nonempty(pos, neg)?;
    let k = region_size(neg.len(), beta, "beta")?;
    Ok(closed_form(pos, &sorted_desc(neg)[..k]))
}

/// Like [`closed_form_opauc`] with `a*` over the bottom-⌊αn₊⌋ positives.
pub fn closed_form_tpauc(pos: &[f64], neg: &[f64], alpha: f64, beta: f64) -> Result<ClosedFormOptima> {
    nonempty(pos, neg)?;
    let kb = region_size(neg.len(), beta, "beta")?;
    let ka = region_size(pos.len(), alpha, "alpha")?;
    let mut asc = pos.to_vec();
    asc.sort_by(|a, b| a.total_cmp(b));
    Ok(closed_form(&asc[..ka], &sorted_desc(neg)[..kb]))
}

/// Hard-threshold instance objective: negatives contribute only when their
/// score reaches the threshold `t`.
pub fn f_op_instance(score: f64, y: u8, aux: &AuxState<f64>, t: f64, hp: &HyperParams<f64>) -> f64 {
    let p = hp.prior_p;
    let g = aux.gamma;
    if y == 1 {
        ((score - aux.a).powi(2) - 2.0 * (1.0 + g) * score) / p - g * g
    } else {
        let hit = if score >= t { 1.0 } else { 0.0 };
        ((score - aux.b).powi(2) + 2.0 * (1.0 + g) * score) * hit / ((1.0 - p) * hp.beta) - g * g
    }
}

/// Tolerances of the nested golden-section solver.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NestedOptions {
    /// Final bracket width for every scalar search.
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for NestedOptions {
    fn default() -> Self {
        Self { tol: 1e-8, max_iter: 200 }
    }
}

const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// Golden-section maximization on `[lo, hi]`; the bracket ends and any
/// `extra` points inside it (known kinks) are also evaluated.
fn golden_max<F: FnMut(f64) -> Result<f64>>(
    mut f: F,
    lo: f64,
    hi: f64,
    extra: &[f64],
    opt: &NestedOptions,
) -> Result<(f64, f64)> {
    if !(opt.tol > 0.0) || !(hi >= lo) {
        return Err(PaucError::NonConvergence(format!(
            "golden-section search on [{lo}, {hi}] with width {} cannot proceed",
            opt.tol
        )));
    }
    let (mut a, mut b) = (lo, hi);
    let mut x1 = b - INV_PHI * (b - a);
    let mut x2 = a + INV_PHI * (b - a);
    let mut f1 = f(x1)?;
    let mut f2 = f(x2)?;
    let mut iters = 0;
    while b - a > opt.tol {
        if iters == opt.max_iter {
            return Err(PaucError::NonConvergence(format!(
                "golden-section search did not reach width {} in {} iterations",
                opt.tol, opt.max_iter
            )));
        }
        iters += 1;
        if f1 < f2 {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + INV_PHI * (b - a);
            f2 = f(x2)?;
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - INV_PHI * (b - a);
            f1 = f(x1)?;
        }
    }
    let mut best = if f1 >= f2 { (x1, f1) } else { (x2, f2) };
    for &x in [lo, hi].iter().chain(extra) {
        if (lo..=hi).contains(&x) {
            let v = f(x)?;
            if v > best.1 {
                best = (x, v);
            }
        }
    }
    Ok(best)
}

fn golden_min<F: FnMut(f64) -> Result<f64>>(
    mut f: F,
    lo: f64,
    hi: f64,
    extra: &[f64],
    opt: &NestedOptions,
) -> Result<(f64, f64)> {
    let (x, v) = golden_max(|x| f(x).map(|v| -v), lo, hi, extra, opt)?;
    Ok((x, -v))
}

/// Exact `min_{s∈[lo,hi]} s + (1/k) Σ [h_i - s]₊`: the function is convex
/// and piecewise linear, so its minimum sits at a breakpoint or a box end.
fn min_over_shift(h: &[f64], k: usize, lo: f64, hi: f64) -> f64 {
    let sorted = sorted_desc(h);
    let mut prefix = Vec::with_capacity(sorted.len() + 1);
    prefix.push(0.0);
    for &x in &sorted {
        prefix.push(prefix.last().unwrap() + x);
    }
    let eval = |s: f64| {
        let j = sorted.partition_point(|&x| x > s);
        s + (prefix[j] - j as f64 * s) / k as f64
    };
    sorted
        .iter()
        .map(|&x| x.clamp(lo, hi))
        .chain([lo, hi])
        .map(eval)
        .fold(f64::INFINITY, f64::min)
}

struct Instance<'a> {
    pos: &'a [f64],
    neg: &'a [f64],
    k_pos: usize,
    k_neg: usize,
}

impl Instance<'_> {
    /// Positive part of the OPAUC objective averaged over the positives.
    fn op_pos(&self, a: f64, gamma: f64) -> f64 {
        plain_mean(&self.pos.iter().map(|f| (f - a).powi(2) - 2.0 * (1.0 + gamma) * f).collect::<Vec<_>>())
    }

    fn tp_pos(&self, a: f64, gamma: f64) -> f64 {
        let loss: Vec<f64> = self.pos.iter().map(|f| (f - a).powi(2) - 2.0 * (1.0 + gamma) * f).collect();
        min_over_shift(&loss, self.k_pos, loss::S_BOX.0, loss::S_BOX.1)
    }

    fn neg_part(&self, b: f64, gamma: f64) -> f64 {
        let h: Vec<f64> = self.neg.iter().map(|f| (f - b).powi(2) + 2.0 * (1.0 + gamma) * f).collect();
        min_over_shift(&h, self.k_neg, loss::S_PRIME_BOX.0, loss::S_PRIME_BOX.1)
    }
}

/// Directly solves `min_{a,b} max_γ min_{s,s'}` of the hard-hinge objective
/// for fixed scores, with `γ ∈ [b-1, 1]` (OPAUC) or `[max(-a, b-1), 1]`
/// (TPAUC). The region fractions are snapped to `k/n`, the values the
/// empirical estimators actually use.
pub fn nested_minimax_solve(pos: &[f64], neg: &[f64], hp: &HyperParams<f64>) -> Result<f64> {
    nested_minimax_solve_with(pos, neg, hp, &NestedOptions::default())
}

fn instance<'a>(pos: &'a [f64], neg: &'a [f64], hp: &HyperParams<f64>) -> Result<Instance<'a>> {
    nonempty(pos, neg)?;
    let k_neg = region_size(neg.len(), hp.beta, "beta")?;
    let k_pos = match hp.task {
        Task::Opauc => pos.len(),
        Task::Tpauc => region_size(pos.len(), hp.alpha, "alpha")?,
    };
    Ok(Instance { pos, neg, k_pos, k_neg })
}

pub fn nested_minimax_solve_with(
    pos: &[f64],
    neg: &[f64],
    hp: &HyperParams<f64>,
    opt: &NestedOptions,
) -> Result<f64> {
    let inst = instance(pos, neg, hp)?;
    match hp.task {
        Task::Opauc => {
            // `a` only enters the positive term, which does not depend on γ
            // beyond a linear shift, so it is minimized on its own.
            let (_, a_part) = golden_min(|a| Ok(inst.op_pos(a, 0.0)), 0.0, 1.0, &[], opt)?;
            let m_pos = plain_mean(pos);
            let (_, rest) = golden_min(
                |b| {
                    let (_, v) = golden_max(
                        |g| Ok(-2.0 * g * m_pos - g * g + inst.neg_part(b, g)),
                        b - 1.0,
                        1.0,
                        &[],
                        opt,
                    )?;
                    Ok(v)
                },
                0.0,
                1.0,
                &[],
                opt,
            )?;
            Ok(a_part + rest)
        }
        Task::Tpauc => {
            let (_, v) = golden_min(
                |a| {
                    let (_, v) = golden_min(
                        |b| {
                            let lo = (-a).max(b - 1.0);
                            let (_, v) = golden_max(
                                |g| Ok(inst.tp_pos(a, g) - g * g + inst.neg_part(b, g)),
                                lo,
                                1.0,
                                &[],
                                opt,
                            )?;
                            Ok(v)
                        },
                        0.0,
                        1.0,
                        &[],
                        opt,
                    )?;
                    Ok(v)
                },
                0.0,
                1.0,
                &[],
                opt,
            )?;
            Ok(v)
        }
    }
}

/// Multipliers tried by [`lagrangian_sweep_solve`].
pub const MULTIPLIER_GRID: [f64; 8] = [0.0, 1e-3, 1e-2, 0.1, 1.0, 10.0, 100.0, 1e9];

/// Solves the decoupled problem: `γ ∈ [-1, 1]` with the penalties
/// `-θ_b(b-1-γ)` and, for TPAUC, `-θ_a(-a-γ)`, minimizing over a grid of
/// multipliers (`θ_a = θ_b = θ`).
pub fn lagrangian_sweep_solve(pos: &[f64], neg: &[f64], hp: &HyperParams<f64>, thetas: &[f64]) -> Result<f64> {
    let inst = instance(pos, neg, hp)?;
    let opt = NestedOptions::default();
    let mut best = f64::INFINITY;
    for &theta in thetas {
        let value = match hp.task {
            Task::Opauc => {
                let (_, a_part) = golden_min(|a| Ok(inst.op_pos(a, 0.0)), 0.0, 1.0, &[], &opt)?;
                let m_pos = plain_mean(pos);
                let (_, rest) = golden_min(
                    |b| {
                        let (_, v) = golden_max(
                            |g| Ok(-2.0 * g * m_pos - g * g + inst.neg_part(b, g) - theta * (b - 1.0 - g)),
                            -1.0,
                            1.0,
                            &[b - 1.0],
                            &opt,
                        )?;
                        Ok(v)
                    },
                    0.0,
                    1.0,
                    &[],
                    &opt,
                )?;
                a_part + rest
            }
            Task::Tpauc => {
                golden_min(
                    |a| {
                        let (_, v) = golden_min(
                            |b| {
                                let (_, v) = golden_max(
                                    |g| {
                                        Ok(inst.tp_pos(a, g) - g * g + inst.neg_part(b, g)
                                            - theta * (b - 1.0 - g)
                                            - theta * (-a - g))
                                    },
                                    -1.0,
                                    1.0,
                                    &[b - 1.0, -a],
                                    &opt,
                                )?;
                                Ok(v)
                            },
                            0.0,
                            1.0,
                            &[],
                            &opt,
                        )?;
                        Ok(v)
                    },
                    0.0,
                    1.0,
                    &[],
                    &opt,
                )?
                .1
            }
        };
        best = best.min(value);
    }
    Ok(best)
}

fn softplus_gap(x: f64, kappa: f64) -> f64 {
    let smooth = if x > 0.0 { x + (-kappa * x).exp().ln_1p() / kappa } else { (kappa * x).exp().ln_1p() / kappa };
    (smooth - x.max(0.0)).abs()
}

/// `sup_{x∈[-5,5]} |log(1+exp(κx))/κ - [x]₊|` over a dense grid plus `x = 0`.
pub fn softplus_bias_sup(kappa: f64) -> f64 {
    const STEPS: usize = 200_000;
    (0..=STEPS)
        .map(|i| -5.0 + 10.0 * i as f64 / STEPS as f64)
        .chain([0.0])
        .map(|x| softplus_gap(x, kappa))
        .fold(0.0, f64::max)
}

/// Range of the negative-branch hinge argument `(f-b)² + 2(1+γ)f - s'` over
/// a grid of the feasible box with `γ ≥ b-1`.
pub fn negative_inner_range(steps: usize) -> (f64, f64) {
    let grid = |i: usize| i as f64 / (steps - 1) as f64;
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for i in 0..steps {
        let f = grid(i);
        for j in 0..steps {
            let b = grid(j);
            for l in 0..steps {
                let g = (b - 1.0) + (2.0 - b) * grid(l);
                let h = (f - b).powi(2) + 2.0 * (1.0 + g) * f;
                lo = lo.min(h - loss::S_PRIME_BOX.1);
                hi = hi.max(h - loss::S_PRIME_BOX.0);
            }
        }
    }
    (lo, hi)
}

/// Result of one randomized or exhaustive property check.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CheckOutcome {
    pub instances: usize,
    pub max_error: f64,
}

impl CheckOutcome {
    fn new() -> Self {
        Self { instances: 0, max_error: 0.0 }
    }

    fn record(&mut self, err: f64) {
        self.instances += 1;
        if err.is_nan() || err > self.max_error {
            self.max_error = if err.is_nan() { f64::INFINITY } else { err };
        }
    }
}

/// Scores in `[0, 1]`; roughly a third are rounded to one decimal so ties
/// are common.
fn random_scores(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n)
        .map(|_| {
            let x: f64 = rng.random();
            if rng.random_bool(0.3) {
                (x * 10.0).round() / 10.0
            } else {
                x
            }
        })
        .collect()
}

fn count_for(rng: &mut ChaCha8Rng, frac: f64, max: usize) -> usize {
    let min = (1.0 / frac).ceil() as usize;
    rng.random_range(min.max(1)..=max)
}

pub fn check_lemma1(seed: u64, vectors: usize) -> Result<CheckOutcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = CheckOutcome::new();
    for _ in 0..vectors {
        let n = rng.random_range(1..=50);
        let x: Vec<f64> = random_scores(&mut rng, n).into_iter().map(|v| 4.0 * v - 2.0).collect();
        let mut err: f64 = 0.0;
        for k in 1..=n {
            err = err.max((avg_topk(&x, k)? - atk_via_min_s(&x, k)?.0).abs());
        }
        out.record(err);
    }
    Ok(out)
}

pub const OPAUC_BETAS: [f64; 5] = [0.1, 0.3, 1.0 / 3.0, 0.5, 1.0];
pub const TPAUC_FRACTIONS: [f64; 3] = [0.3, 0.5, 1.0];

pub fn check_opauc_equivalence(seed: u64, instances: usize) -> Result<CheckOutcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = CheckOutcome::new();
    for _ in 0..instances {
        let beta = OPAUC_BETAS[rng.random_range(0..OPAUC_BETAS.len())];
        let n_pos = rng.random_range(1..=200);
        let n_neg = count_for(&mut rng, beta, 200);
        let pos = random_scores(&mut rng, n_pos);
        let neg = random_scores(&mut rng, n_neg);
        let cf = closed_form_opauc(&pos, &neg, beta)?;
        out.record((cf.value + 1.0 - pairwise_sq_risk_opauc(&pos, &neg, beta)?).abs());
    }
    Ok(out)
}

pub fn check_tpauc_equivalence(seed: u64, instances: usize) -> Result<CheckOutcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = CheckOutcome::new();
    for _ in 0..instances {
        let alpha = TPAUC_FRACTIONS[rng.random_range(0..3)];
        let beta = TPAUC_FRACTIONS[rng.random_range(0..3)];
        let n_pos = count_for(&mut rng, alpha, 200);
        let n_neg = count_for(&mut rng, beta, 200);
        let pos = random_scores(&mut rng, n_pos);
        let neg = random_scores(&mut rng, n_neg);
        let cf = closed_form_tpauc(&pos, &neg, alpha, beta)?;
        out.record((cf.value + 1.0 - pairwise_sq_risk_tpauc(&pos, &neg, alpha, beta)?).abs());
    }
    Ok(out)
}

fn small_instance(rng: &mut ChaCha8Rng, task: Task) -> (Vec<f64>, Vec<f64>, HyperParams<f64>) {
    let beta = OPAUC_BETAS[rng.random_range(0..OPAUC_BETAS.len())];
    let alpha = match task {
        Task::Opauc => 1.0,
        Task::Tpauc => TPAUC_FRACTIONS[rng.random_range(0..3)],
    };
    let n_pos = count_for(rng, alpha, 25);
    let n_neg = count_for(rng, beta, 25);
    let pos = random_scores(rng, n_pos);
    let neg = random_scores(rng, n_neg);
    let p = n_pos as f64 / (n_pos + n_neg) as f64;
    let hp = HyperParams::with_defaults(task, alpha, beta, p).expect("valid region");
    (pos, neg, hp)
}

fn reference_value(pos: &[f64], neg: &[f64], hp: &HyperParams<f64>) -> Result<f64> {
    Ok(match hp.task {
        Task::Opauc => closed_form_opauc(pos, neg, hp.beta)?.value,
        Task::Tpauc => closed_form_tpauc(pos, neg, hp.alpha, hp.beta)?.value,
    })
}

/// Nested solver against the closed form on OPAUC instances with `n ≤ 50`.
pub fn check_nested_solver(seed: u64, instances: usize, task: Task) -> Result<CheckOutcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = CheckOutcome::new();
    for _ in 0..instances {
        let (pos, neg, hp) = small_instance(&mut rng, task);
        out.record((nested_minimax_solve(&pos, &neg, &hp)? - reference_value(&pos, &neg, &hp)?).abs());
    }
    Ok(out)
}

pub fn check_lagrangian_sweep(seed: u64, instances: usize, task: Task) -> Result<CheckOutcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = CheckOutcome::new();
    for _ in 0..instances {
        let (pos, neg, hp) = small_instance(&mut rng, task);
        let swept = lagrangian_sweep_solve(&pos, &neg, &hp, &MULTIPLIER_GRID)?;
        out.record((swept - reference_value(&pos, &neg, &hp)?).abs());
    }
    Ok(out)
}

pub const BIAS_KAPPAS: [f64; 5] = [2.0, 4.0, 8.0, 16.0, 32.0];

pub fn check_softplus_bias() -> CheckOutcome {
    let mut out = CheckOutcome::new();
    for k in BIAS_KAPPAS {
        out.record((softplus_bias_sup(k) - std::f64::consts::LN_2 / k).abs());
    }
    out
}

pub fn check_bias_ratio() -> CheckOutcome {
    let mut out = CheckOutcome::new();
    for k in BIAS_KAPPAS {
        out.record((softplus_bias_sup(2.0 * k) / softplus_bias_sup(k) - 0.5).abs());
    }
    out
}

/// Fourth-order central difference.
fn central_diff<F: Fn(f64) -> f64>(f: F, x: f64, h: f64) -> f64 {
    (8.0 * (f(x + h) - f(x - h)) - (f(x + 2.0 * h) - f(x - 2.0 * h))) / (12.0 * h)
}

fn rel_err(analytic: f64, numeric: f64) -> f64 {
    (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(1e-3)
}

const FD_STEP: f64 = 1e-4;

fn random_hyper(rng: &mut ChaCha8Rng, task: Task) -> HyperParams<f64> {
    let kappa = rng.random_range(0.5..8.0);
    let omega = loss::default_omega(kappa) + rng.random_range(0.0..2.0);
    let alpha = rng.random_range(0.1..1.0);
    let beta = rng.random_range(0.1..1.0);
    let p = rng.random_range(0.05..0.95);
    HyperParams::new(task, alpha, beta, kappa, omega, p).expect("random hyperparameters are valid")
}

fn random_aux(rng: &mut ChaCha8Rng, margin: f64) -> AuxState<f64> {
    let mut u = |lo: f64, hi: f64| rng.random_range(lo + margin..hi - margin);
    AuxState {
        a: u(0.0, 1.0),
        b: u(0.0, 1.0),
        gamma: u(-1.0, 1.0),
        s: u(-4.0, 1.0),
        s_prime: u(0.0, 5.0),
        theta_a: u(0.0, 3.0),
        theta_b: u(0.0, 3.0),
    }
}

fn random_batch(rng: &mut ChaCha8Rng, max: usize) -> (Vec<f64>, Vec<u8>) {
    let n = rng.random_range(1..=max);
    let scores = (0..n).map(|_| rng.random_range(0.01..0.99)).collect();
    let labels = (0..n).map(|_| u8::from(rng.random_bool(0.4))).collect();
    (scores, labels)
}

type AuxField = fn(&mut AuxState<f64>) -> &mut f64;

/// Every analytic partial of the batch objective against central finite
/// differences; `configs` random configurations per task. The error is
/// relative with a `1e-3` floor on the denominator.
pub fn check_loss_gradients(seed: u64, configs: usize) -> Result<CheckOutcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = CheckOutcome::new();
    for i in 0..configs {
        let task = if i % 2 == 0 { Task::Opauc } else { Task::Tpauc };
        let hp = random_hyper(&mut rng, task);
        let aux = random_aux(&mut rng, 3.0 * FD_STEP);
        let (scores, labels) = random_batch(&mut rng, 40);
        let (_, g) = loss::batch_objective_and_grad(&scores, &labels, &aux, &hp)?;
        let obj = |aux: &AuxState<f64>, scores: &[f64]| {
            loss::batch_objective(scores, &labels, aux, &hp).expect("non-empty batch")
        };
        let coords: [(f64, AuxField); 7] = [
            (g.d_a, |a| &mut a.a),
            (g.d_b, |a| &mut a.b),
            (g.d_gamma, |a| &mut a.gamma),
            (g.d_s, |a| &mut a.s),
            (g.d_s_prime, |a| &mut a.s_prime),
            (g.d_theta_a, |a| &mut a.theta_a),
            (g.d_theta_b, |a| &mut a.theta_b),
        ];
        let mut err: f64 = 0.0;
        for (analytic, field) in coords {
            let fd = central_diff(
                |x| {
                    let mut probe = aux;
                    *field(&mut probe) = x;
                    obj(&probe, &scores)
                },
                *field(&mut aux.clone()),
                FD_STEP,
            );
            err = err.max(rel_err(analytic, fd));
        }
        for (j, &analytic) in g.d_score.iter().enumerate() {
            let fd = central_diff(
                |x| {
                    let mut probe = scores.clone();
                    probe[j] = x;
                    obj(&aux, &probe)
                },
                scores[j],
                FD_STEP,
            );
            err = err.max(rel_err(analytic, fd));
        }
        out.record(err);
    }
    Ok(out)
}

/// Model backward pass against finite differences of `Σ c_i·score_i` for
/// random upstream weights `c`; alternates linear and one-hidden-layer
/// models.
pub fn check_model_gradients(seed: u64, configs: usize) -> Result<CheckOutcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = CheckOutcome::new();
    for i in 0..configs {
        let kind = if i % 2 == 0 { ModelKind::Linear } else { ModelKind::Mlp1 };
        let dim = rng.random_range(1..=6);
        let hidden = rng.random_range(1..=8);
        let model = ModelParams::<f64>::init(kind, dim, hidden, rng.random())?;
        let n = rng.random_range(1..=10);
        let x: Vec<f64> = (0..n * dim).map(|_| rng.random_range(-2.0..2.0)).collect();
        let c: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        let grad = model.backward(&x, &c)?;
        let mut err: f64 = 0.0;
        for (j, &analytic) in grad.iter().enumerate() {
            let fd = central_diff(
                |w| {
                    let mut probe = model.clone();
                    probe.weights[j] = w;
                    let s = probe.forward(&x).expect("shape checked");
                    s.iter().zip(&c).map(|(s, c)| s * c).sum()
                },
                model.weights[j],
                FD_STEP,
            );
            err = err.max(rel_err(analytic, fd));
        }
        out.record(err);
    }
    Ok(out)
}

/// Sign conditions on the score derivative of the positive and negative
/// branch, on a `steps³` grid of `(score, b or a, γ)` over the feasible
/// region. Both the direct derivative and the score gradient reported by
/// the loss are checked. `max_error` is the number of violations; an
/// evaluation counts as a violation when it has the wrong sign by more
/// than `1e-12`, the rounding noise of the grid arithmetic.
pub fn check_monotonicity(steps: usize) -> Result<CheckOutcome> {
    const NOISE: f64 = 1e-12;
    let grid = |i: usize| i as f64 / (steps - 1) as f64;
    let hp = HyperParams::with_defaults(Task::Opauc, 1.0, 0.3, 0.2)?;
    let mut violations = 0usize;
    let mut instances = 0usize;
    for i in 0..steps {
        let f = grid(i);
        for j in 0..steps {
            let c = grid(j);
            for l in 0..steps {
                // negative branch: γ ∈ [b-1, 1] with b = c
                let g_neg = (c - 1.0) + (2.0 - c) * grid(l);
                let direct = 2.0 * (f - c) + 2.0 * (1.0 + g_neg);
                let aux = AuxState { b: c, gamma: g_neg, ..AuxState::default() };
                let (_, gr) = loss::batch_objective_and_grad(&[f], &[0], &aux, &hp)?;
                violations += usize::from(direct < -NOISE) + usize::from(gr.d_score[0] < -NOISE);

                // positive branch: γ ∈ [-a, 1] with a = c
                let g_pos = -c + (1.0 + c) * grid(l);
                let direct = 2.0 * (f - c) - 2.0 * (1.0 + g_pos);
                let aux = AuxState { a: c, gamma: g_pos, ..AuxState::default() };
                let (_, gr) = loss::batch_objective_and_grad(&[f], &[1], &aux, &hp)?;
                violations += usize::from(direct > NOISE) + usize::from(gr.d_score[0] > NOISE);
                instances += 2;
            }
        }
    }
    Ok(CheckOutcome { instances, max_error: violations as f64 })
}

/// Second differences of the batch objective in `γ` at random probes with
/// `κ ≤ 2+2ω`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConcavityProbe {
    pub probes: usize,
    /// Largest `Δ²_γ + 2(1+ω)`; the literal bound asks for `≤ 0`.
    pub max_excess: f64,
    /// Largest excess over the curvature the smoothing terms can add.
    pub max_excess_over_smoothing: f64,
    /// Largest raw second difference.
    pub max_second_difference: f64,
}

pub fn probe_gamma_concavity(seed: u64, probes: usize) -> Result<ConcavityProbe> {
    const H: f64 = 1e-3;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut res = ConcavityProbe {
        probes,
        max_excess: f64::NEG_INFINITY,
        max_excess_over_smoothing: f64::NEG_INFINITY,
        max_second_difference: f64::NEG_INFINITY,
    };
    for i in 0..probes {
        let task = if i % 2 == 0 { Task::Opauc } else { Task::Tpauc };
        let hp = random_hyper(&mut rng, task);
        let aux = random_aux(&mut rng, 2.0 * H);
        let (scores, labels) = random_batch(&mut rng, 64);
        let at = |g: f64| {
            let probe = AuxState { gamma: g, ..aux };
            loss::batch_objective(&scores, &labels, &probe, &hp).expect("non-empty batch")
        };
        let d2 = (at(aux.gamma + H) - 2.0 * at(aux.gamma) + at(aux.gamma - H)) / (H * H);
        let base = -2.0 * (1.0 + hp.omega);
        // each smoothed hinge is linear in γ with slope ±2f, and r'' ≤ κ/4
        let smoothing: f64 = scores
            .iter()
            .zip(&labels)
            .map(|(&f, &y)| {
                let w = if y == 1 {
                    if task == Task::Tpauc {
                        1.0 / (hp.alpha * hp.prior_p)
                    } else {
                        0.0
                    }
                } else {
                    1.0 / (hp.beta * (1.0 - hp.prior_p))
                };
                hp.kappa / 4.0 * 4.0 * f * f * w
            })
            .sum::<f64>()
            / scores.len() as f64;
        res.max_excess = res.max_excess.max(d2 - base);
        res.max_excess_over_smoothing = res.max_excess_over_smoothing.max(d2 - base - smoothing);
        res.max_second_difference = res.max_second_difference.max(d2);
    }
    Ok(res)
}

/// One line of the verification report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteEntry {
    pub name: String,
    pub instances: usize,
    pub max_error: f64,
    pub tolerance: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub seed: u64,
    pub entries: Vec<SuiteEntry>,
    pub all_pass: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteOptions {
    pub seed: u64,
    /// Run only the entries with these names; empty runs everything.
    pub only: Vec<String>,
    /// Multiplies every tolerance; must be positive.
    pub tol_scale: f64,
}

impl Default for SuiteOptions {
    fn default() -> Self {
        Self { seed: 0, only: Vec::new(), tol_scale: 1.0 }
    }
}

type SuiteCheck = fn(u64) -> Result<CheckOutcome>;

/// Names, tolerances and drivers of every suite entry.
pub const SUITE: [(&str, f64, SuiteCheck); 13] = [
    ("lemma1", 1e-12, |s| check_lemma1(s, 1000)),
    ("opauc_equivalence", 1e-10, |s| check_opauc_equivalence(s, 500)),
    ("tpauc_equivalence", 1e-10, |s| check_tpauc_equivalence(s, 500)),
    ("nested_minimax", 1e-6, |s| check_nested_solver(s, 50, Task::Opauc)),
    ("nested_minimax_tpauc", 1e-6, |s| check_nested_solver(s, 5, Task::Tpauc)),
    ("lagrangian_sweep", 1e-5, |s| check_lagrangian_sweep(s, 50, Task::Opauc)),
    ("softplus_bias", 1e-9, |_| Ok(check_softplus_bias())),
    ("softplus_bias_ratio", 1e-6, |_| Ok(check_bias_ratio())),
    ("negative_inner_range", 0.0, |_| {
        let (lo, hi) = negative_inner_range(60);
        Ok(CheckOutcome { instances: 60 * 60 * 60, max_error: (-5.0 - lo).max(hi - 5.0).max(0.0) })
    }),
    ("loss_gradients", 1e-5, |s| check_loss_gradients(s, 100)),
    ("model_gradients", 1e-5, |s| check_model_gradients(s, 100)),
    ("monotonicity", 0.0, |_| check_monotonicity(50)),
    ("gamma_curvature_bound", 1e-6, |s| {
        let p = probe_gamma_concavity(s, 1000)?;
        Ok(CheckOutcome { instances: p.probes, max_error: p.max_excess_over_smoothing.max(0.0) })
    }),
];

pub fn suite_names() -> Vec<&'static str> {
    SUITE.iter().map(|(n, _, _)| *n).collect()
}

pub fn run_suite(opts: &SuiteOptions) -> Result<SuiteReport> {
    if !(opts.tol_scale > 0.0) || !opts.tol_scale.is_finite() {
        return Err(PaucError::InvalidArgument(format!(
            "tolerance scale must be a positive number, got {}",
            opts.tol_scale
        )));
    }
    for name in &opts.only {
        if !SUITE.iter().any(|(n, _, _)| n == name) {
            return Err(PaucError::InvalidArgument(format!(
                "unknown check `{name}`; expected one of {}",
                suite_names().join(", ")
            )));
        }
    }
    let mut entries = Vec::new();
    for (name, tol, check) in SUITE {
        if !opts.only.is_empty() && !opts.only.iter().any(|n| n == name) {
            continue;
        }
        let outcome = check(opts.seed)?;
        let tolerance = tol * opts.tol_scale;
        entries.push(SuiteEntry {
            name: name.to_string(),
            instances: outcome.instances,
            max_error: outcome.max_error,
            tolerance,
            pass: outcome.max_error <= tolerance,
        });
    }
    let all_pass = entries.iter().all(|e| e.pass);
    Ok(SuiteReport { seed: opts.seed, entries, all_pass })
}
