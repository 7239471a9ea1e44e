//! Accelerated stochastic gradient descent ascent.
//!
//! The outer variable `τ = (θ, a, b, s, s', θ_a, θ_b)` is stored as one flat
//! vector: model weights first, then the six auxiliary scalars. Both `τ` and
//! `γ` move by a convex combination of the current point and a projected
//! gradient step, and the search directions `v`, `w` are momentum-corrected
//! estimates evaluated at the new and the old point on the same mini-batch.

use crate::data::{iter_batches, BatchSpec, SampleSet};
use crate::error::{PaucError, Result};
use crate::loss::{self, AuxState, HyperParams, Task};
use crate::metrics::{bottom_k, empirical_opauc, empirical_tpauc, split_by_label, top_k};
use crate::model::ModelParams;
use crate::scalar::{clamp, floor_count, mean, Scalar};
use serde::{Deserialize, Serialize};
use std::io::Write;
use std::time::Instant;

/// Number of auxiliary coordinates appended to the model weights in `τ`.
pub const AUX_DIM: usize = 6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct LearnParams<T: Scalar> {
    pub k: T,
    pub m: T,
    pub c1: T,
    pub c2: T,
    /// Step size for `τ`.
    pub nu: T,
    /// Step size for `γ`.
    pub lambda: T,
    pub total_steps: usize,
}

impl<T: Scalar> LearnParams<T> {
    /// `k = 2, m = 100, c1 = c2 = 0.5, ν = λ = 0.05`.
    pub fn defaults(total_steps: usize) -> Self {
        Self {
            k: T::of(2.0),
            m: T::of(100.0),
            c1: T::of(0.5),
            c2: T::of(0.5),
            nu: T::of(0.05),
            lambda: T::of(0.05),
            total_steps,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.k > T::zero()) {
            return Err(PaucError::Config("k must be > 0".into()));
        }
        if !(self.m >= T::one()) {
            return Err(PaucError::Config("m must be >= 1".into()));
        }
        if !(self.nu > T::zero()) || !(self.lambda > T::zero()) {
            return Err(PaucError::Config("step sizes nu and lambda must be > 0".into()));
        }
        if !(self.c1 >= T::zero()) || !(self.c2 >= T::zero()) {
            return Err(PaucError::Config("c1 and c2 must be >= 0".into()));
        }
        let eta0 = lr_schedule(0, self.k, self.m);
        if eta0 > T::one() {
            return Err(PaucError::Config(format!(
                "learning rate eta_0 = {eta0} > 1; need m >= k^3"
            )));
        }
        Ok(())
    }
}

/// `η_t = k / (m + t)^{1/3}`.
pub fn lr_schedule<T: Scalar>(t: usize, k: T, m: T) -> T {
    k / (m + T::of_usize(t)).cbrt()
}

/// Box projection of `τ`: model weights untouched, `a, b ∈ [0,1]`,
/// `s ∈ [-4,1]`, `s' ∈ [0,5]`, multipliers in `[0, M]`.
pub fn project_tau<T: Scalar>(tau: &[T], multiplier_bound: T) -> Vec<T> {
    let mut out = tau.to_vec();
    project_tau_in_place(&mut out, multiplier_bound);
    out
}

fn project_tau_in_place<T: Scalar>(tau: &mut [T], multiplier_bound: T) {
    let n = tau.len();
    debug_assert!(n >= AUX_DIM);
    let boxes = [
        loss::A_BOX,
        loss::B_BOX,
        loss::S_BOX,
        loss::S_PRIME_BOX,
        (0.0, multiplier_bound.as_f64()),
        (0.0, multiplier_bound.as_f64()),
    ];
    for (x, (lo, hi)) in tau[n - AUX_DIM..].iter_mut().zip(boxes) {
        *x = clamp(*x, T::of(lo), T::of(hi));
    }
}

pub fn project_gamma<T: Scalar>(gamma: T) -> T {
    clamp(gamma, T::of(loss::GAMMA_BOX.0), T::of(loss::GAMMA_BOX.1))
}

/// Iterate of the solver: `τ`, `γ` and their gradient estimates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct OptimState<T: Scalar> {
    pub tau: Vec<T>,
    pub gamma: T,
    pub v: Vec<T>,
    pub w: T,
    pub t: usize,
    template: ModelParams<T>,
}

impl<T: Scalar> OptimState<T> {
    /// Starts from `model` and `aux` with zero gradient estimates.
    pub fn new(model: &ModelParams<T>, aux: &AuxState<T>) -> Self {
        let mut tau = model.weights.clone();
        tau.extend([aux.a, aux.b, aux.s, aux.s_prime, aux.theta_a, aux.theta_b]);
        let v = vec![T::zero(); tau.len()];
        Self { tau, gamma: aux.gamma, v, w: T::zero(), t: 0, template: model.clone() }
    }

    pub fn model(&self) -> ModelParams<T> {
        model_of(&self.template, &self.tau)
    }

    pub fn aux(&self) -> AuxState<T> {
        aux_of(&self.tau, self.gamma)
    }

    pub fn is_feasible(&self, multiplier_bound: T) -> bool {
        project_tau(&self.tau, multiplier_bound) == self.tau && project_gamma(self.gamma) == self.gamma
    }
}

fn model_of<T: Scalar>(template: &ModelParams<T>, tau: &[T]) -> ModelParams<T> {
    ModelParams { weights: tau[..tau.len() - AUX_DIM].to_vec(), ..template.clone() }
}

fn aux_of<T: Scalar>(tau: &[T], gamma: T) -> AuxState<T> {
    let x = &tau[tau.len() - AUX_DIM..];
    AuxState { a: x[0], b: x[1], gamma, s: x[2], s_prime: x[3], theta_a: x[4], theta_b: x[5] }
}

/// Objective and full gradient `(∇_τ, ∂_γ)` of the batch objective at
/// `(τ, γ)`.
pub fn tau_gradient<T: Scalar>(
    template: &ModelParams<T>,
    tau: &[T],
    gamma: T,
    x: &[T],
    y: &[u8],
    hp: &HyperParams<T>,
) -> Result<(T, Vec<T>, T)> {
    let model = model_of(template, tau);
    let aux = aux_of(tau, gamma);
    let scores = model.forward(x)?;
    let (obj, g) = loss::batch_objective_and_grad(&scores, y, &aux, hp)?;
    let mut grad = model.backward(x, &g.d_score)?;
    grad.extend([g.d_a, g.d_b, g.d_s, g.d_s_prime, g.d_theta_a, g.d_theta_b]);
    Ok((obj, grad, g.d_gamma))
}

/// Diagnostics of one solver step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepInfo<T> {
    pub eta: T,
    pub rho: T,
    pub xi: T,
    /// Batch objective at the new point.
    pub objective: T,
    /// True when `c·η²` exceeded 1 and was clamped.
    pub clamped: bool,
}

/// One iteration on the batch `(x, y)`; `state` is left untouched.
pub fn step<T: Scalar>(
    state: &OptimState<T>,
    x: &[T],
    y: &[u8],
    lp: &LearnParams<T>,
    hp: &HyperParams<T>,
) -> Result<(OptimState<T>, StepInfo<T>)> {
    let eta = lr_schedule(state.t, lp.k, lp.m);

    let mut target: Vec<T> = state.tau.iter().zip(&state.v).map(|(&t, &v)| t - lp.nu * v).collect();
    project_tau_in_place(&mut target, hp.multiplier_bound);
    let mut tau_next: Vec<T> = state.tau.iter().zip(&target).map(|(&t, &p)| t + eta * (p - t)).collect();
    // rounding can push the combination one ulp outside the box
    project_tau_in_place(&mut tau_next, hp.multiplier_bound);
    let gamma_next = project_gamma(state.gamma + eta * (project_gamma(state.gamma + lp.lambda * state.w) - state.gamma));

    let raw_rho = lp.c1 * eta * eta;
    let raw_xi = lp.c2 * eta * eta;
    let clamped = raw_rho > T::one() || raw_xi > T::one();
    if clamped {
        log::warn!(
            "step {}: momentum weights rho = {raw_rho}, xi = {raw_xi} exceed 1; clamping",
            state.t
        );
    }
    let rho = raw_rho.min(T::one());
    let xi = raw_xi.min(T::one());

    let (objective, g_new, w_new) = tau_gradient(&state.template, &tau_next, gamma_next, x, y, hp)?;
    let (_, g_old, w_old) = tau_gradient(&state.template, &state.tau, state.gamma, x, y, hp)?;

    let v: Vec<T> = g_new
        .iter()
        .zip(&state.v)
        .zip(&g_old)
        .map(|((&gn, &v), &go)| gn + (T::one() - rho) * (v - go))
        .collect();
    let w = w_new + (T::one() - xi) * (state.w - w_old);

    let next = OptimState {
        tau: tau_next,
        gamma: gamma_next,
        v,
        w,
        t: state.t + 1,
        template: state.template.clone(),
    };
    Ok((next, StepInfo { eta, rho, xi, objective, clamped }))
}

/// `‖(τ - P(τ - ν v)) / ν‖₂`.
pub fn gradient_mapping_norm<T: Scalar>(state: &OptimState<T>, lp: &LearnParams<T>, multiplier_bound: T) -> T {
    let mut moved: Vec<T> = state.tau.iter().zip(&state.v).map(|(&t, &v)| t - lp.nu * v).collect();
    project_tau_in_place(&mut moved, multiplier_bound);
    state
        .tau
        .iter()
        .zip(&moved)
        .map(|(&t, &p)| {
            let d = (t - p) / lp.nu;
            d * d
        })
        .fold(T::zero(), |acc, x| acc + x)
        .sqrt()
}

/// Closed-form warm start of the auxiliaries from the current scores:
/// `a` is the mean positive score (bottom-α positives for TPAUC), `b` the mean
/// of the top-β negatives, `γ = clamp(b - a)`, `s = 0`, `s' = 2.5`, zero
/// multipliers.
pub fn init_aux<T: Scalar>(set: &SampleSet<T>, model: &ModelParams<T>, hp: &HyperParams<T>) -> Result<AuxState<T>> {
    let scores = model.forward(set.features())?;
    let (pos, neg) = split_by_label(&scores, set.labels());
    let kb = floor_count(neg.len(), hp.beta.as_f64()).max(1);
    let a = match hp.task {
        Task::Opauc => mean(&pos),
        Task::Tpauc => mean(&bottom_k(&pos, floor_count(pos.len(), hp.alpha.as_f64()).max(1))),
    };
    let b = mean(&top_k(&neg, kb));
    Ok(AuxState { a, b, gamma: project_gamma(b - a), ..AuxState::default() })
}

/// One row of the training trace, written once per epoch.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub step: usize,
    pub epoch: usize,
    pub eta: f64,
    /// Objective over the whole training set at the end of the epoch.
    pub objective: f64,
    pub opauc: f64,
    pub tpauc: f64,
    /// Mean gradient-mapping norm over the epoch's steps.
    pub grad_map_norm: f64,
    pub a: f64,
    pub b: f64,
    pub gamma: f64,
    pub s: f64,
    pub s_prime: f64,
    pub theta_a: f64,
    pub theta_b: f64,
    pub ms_per_step: f64,
    #[serde(skip)]
    pub heldout_opauc: Option<f64>,
    #[serde(skip)]
    pub heldout_tpauc: Option<f64>,
}

pub const TRACE_COLUMNS: [&str; 15] = [
    "step",
    "epoch",
    "eta",
    "objective",
    "opauc",
    "tpauc",
    "grad_map_norm",
    "a",
    "b",
    "gamma",
    "s",
    "s_prime",
    "theta_a",
    "theta_b",
    "ms_per_step",
];

pub fn write_trace_csv<W: Write>(out: W, trace: &[TraceRecord]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(TRACE_COLUMNS)?;
    for r in trace {
        w.write_record([
            r.step.to_string(),
            r.epoch.to_string(),
            r.eta.to_string(),
            r.objective.to_string(),
            r.opauc.to_string(),
            r.tpauc.to_string(),
            r.grad_map_norm.to_string(),
            r.a.to_string(),
            r.b.to_string(),
            r.gamma.to_string(),
            r.s.to_string(),
            r.s_prime.to_string(),
            r.theta_a.to_string(),
            r.theta_b.to_string(),
            format!("{:.6}", r.ms_per_step),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub struct TrainOptions<'a, T> {
    pub batch: BatchSpec,
    /// Epochs of plain cross-entropy SGD on the model before the minimax
    /// phase.
    pub warmup_epochs: usize,
    pub heldout: Option<&'a SampleSet<T>>,
}

#[derive(Debug, Clone)]
pub struct TrainOutput<T: Scalar> {
    pub model: ModelParams<T>,
    pub state: OptimState<T>,
    pub trace: Vec<TraceRecord>,
    /// Gradient-mapping norm after every step.
    pub step_grad_map_norms: Vec<f64>,
}

fn partial_aucs<T: Scalar>(set: &SampleSet<T>, model: &ModelParams<T>, hp: &HyperParams<T>) -> Result<(f64, f64)> {
    let scores = model.forward(set.features())?;
    let (pos, neg) = split_by_label(&scores, set.labels());
    let beta = hp.beta.as_f64();
    let op = empirical_opauc(&pos, &neg, beta).map(|v| v.as_f64()).unwrap_or(f64::NAN);
    let tp = empirical_tpauc(&pos, &neg, hp.alpha.as_f64(), beta).map(|v| v.as_f64()).unwrap_or(f64::NAN);
    Ok((op, tp))
}

fn cross_entropy_warmup<T: Scalar>(
    set: &SampleSet<T>,
    model: &mut ModelParams<T>,
    spec: &BatchSpec,
    epochs: usize,
    lr: T,
) -> Result<()> {
    let tiny = T::of(1e-12);
    for epoch in 0..epochs {
        for idx in iter_batches(set, spec, epoch as u64)? {
            let x = set.gather_rows(&idx);
            let y = set.gather_labels(&idx);
            let scores = model.forward(&x)?;
            let inv_b = T::one() / T::of_usize(idx.len());
            let d: Vec<T> = scores
                .iter()
                .zip(&y)
                .map(|(&s, &yi)| {
                    let g = if yi == 1 { -T::one() / s.max(tiny) } else { T::one() / (T::one() - s).max(tiny) };
                    g * inv_b
                })
                .collect();
            let grad = model.backward(&x, &d)?;
            for (w, g) in model.weights.iter_mut().zip(grad) {
                *w = *w - lr * g;
            }
        }
    }
    Ok(())
}

/// Runs `lp.total_steps` solver steps over seeded epochs of `set` and returns
/// the final model together with a per-epoch trace.
pub fn train<T: Scalar>(
    set: &SampleSet<T>,
    model: &ModelParams<T>,
    hp: &HyperParams<T>,
    lp: &LearnParams<T>,
    opts: &TrainOptions<'_, T>,
) -> Result<TrainOutput<T>> {
    hp.validate()?;
    lp.validate()?;
    if model.layout.dim != set.dim() {
        return Err(PaucError::Shape(format!(
            "model dimension {} does not match data dimension {}",
            model.layout.dim,
            set.dim()
        )));
    }
    let mut model = model.clone();
    if opts.warmup_epochs > 0 {
        cross_entropy_warmup(set, &mut model, &opts.batch, opts.warmup_epochs, lp.nu)?;
    }
    let aux = init_aux(set, &model, hp)?;
    let mut state = OptimState::new(&model, &aux);
    let mut trace = Vec::new();
    let mut norms = Vec::with_capacity(lp.total_steps);
    let mut clamp_warned = false;

    let mut epoch = 0usize;
    while state.t < lp.total_steps {
        let batches = iter_batches(set, &opts.batch, (opts.warmup_epochs + epoch) as u64)?;
        let started = Instant::now();
        let first_step = state.t;
        let mut eta = T::zero();
        for idx in batches {
            if state.t >= lp.total_steps {
                break;
            }
            let x = set.gather_rows(&idx);
            let y = set.gather_labels(&idx);
            let (next, info) = step(&state, &x, &y, lp, hp)?;
            if info.clamped && !clamp_warned {
                log::warn!("momentum weights clamped to 1 from step {}", state.t);
                clamp_warned = true;
            }
            debug_assert!(next.is_feasible(hp.multiplier_bound));
            state = next;
            eta = info.eta;
            norms.push(gradient_mapping_norm(&state, lp, hp.multiplier_bound).as_f64());
        }
        let steps = state.t - first_step;
        let ms_per_step = started.elapsed().as_secs_f64() * 1e3 / steps.max(1) as f64;

        let current = state.model();
        let aux = state.aux();
        let scores = current.forward(set.features())?;
        let objective = loss::batch_objective(&scores, set.labels(), &aux, hp)?.as_f64();
        let (opauc, tpauc) = partial_aucs(set, &current, hp)?;
        let heldout = match opts.heldout {
            Some(h) => Some(partial_aucs(h, &current, hp)?),
            None => None,
        };
        trace.push(TraceRecord {
            step: state.t,
            epoch,
            eta: eta.as_f64(),
            objective,
            opauc,
            tpauc,
            grad_map_norm: norms[first_step..].iter().sum::<f64>() / steps.max(1) as f64,
            a: aux.a.as_f64(),
            b: aux.b.as_f64(),
            gamma: aux.gamma.as_f64(),
            s: aux.s.as_f64(),
            s_prime: aux.s_prime.as_f64(),
            theta_a: aux.theta_a.as_f64(),
            theta_b: aux.theta_b.as_f64(),
            ms_per_step,
            heldout_opauc: heldout.map(|h| h.0),
            heldout_tpauc: heldout.map(|h| h.1),
        });
        epoch += 1;
    }

    Ok(TrainOutput { model: state.model(), state, trace, step_grad_map_norms: norms })
}

/// Problem constants that the step-size conditions of the convergence
/// guarantee depend on but the algorithm never sees.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateConstants {
    /// Gradient Lipschitz constant `L_G`.
    pub lipschitz: f64,
    /// Strong-concavity modulus `μ` in `γ`.
    pub mu: f64,
    pub tau: f64,
    /// Mini-batch size `b`.
    pub batch: f64,
}

/// Lists every violated step-size condition of the convergence rate
/// guarantee. An empty list means all conditions hold.
pub fn check_rate_conditions(lp: &LearnParams<f64>, c: &RateConstants) -> Vec<String> {
    let mut bad = Vec::new();
    let k3 = lp.k.powi(3);
    let c1_min = 2.0 / (3.0 * k3) + 9.0 * c.tau * c.tau / 4.0;
    if lp.c1 < c1_min {
        bad.push(format!("c1 = {} < 2/(3k^3) + 9tau^2/4 = {c1_min}", lp.c1));
    }
    let c2_min = 2.0 / (3.0 * k3) + 75.0 * c.lipschitz * c.lipschitz / 2.0;
    if lp.c2 < c2_min {
        bad.push(format!("c2 = {} < 2/(3k^3) + 75L^2/2 = {c2_min}", lp.c2));
    }
    let m_min = 2f64.max(k3).max((lp.c1 * lp.k).powi(3)).max((lp.c2 * lp.k).powi(3));
    if lp.m < m_min {
        bad.push(format!("m = {} < max(2, k^3, (c1 k)^3, (c2 k)^3) = {m_min}", lp.m));
    }
    let lambda_max = (1.0 / (6.0 * c.lipschitz)).min(27.0 * c.batch * c.mu / 16.0);
    if lp.lambda > lambda_max {
        bad.push(format!("lambda = {} > min(1/(6L), 27 b mu/16) = {lambda_max}", lp.lambda));
    }
    let ratio = c.lipschitz / c.mu;
    let nu_a = lp.lambda * c.tau / (2.0 * c.lipschitz)
        * (2.0 * c.batch / (8.0 * lp.lambda * lp.lambda + 75.0 * ratio * ratio * c.batch)).sqrt();
    let nu_b = lp.m.cbrt() / (2.0 * (c.lipschitz + c.lipschitz * ratio) * lp.k);
    let nu_max = nu_a.min(nu_b);
    if lp.nu > nu_max {
        bad.push(format!("nu = {} > {nu_max}", lp.nu));
    }
    bad
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::generate_synthetic;
    use crate::model::ModelKind;
    use approx::assert_abs_diff_eq;

    fn setup(task: Task) -> (SampleSet<f64>, ModelParams<f64>, HyperParams<f64>) {
        let set = generate_synthetic::<f64>(20, 80, 3, 1.5, 4).unwrap();
        let model = ModelParams::init(ModelKind::Linear, 3, 0, 1).unwrap();
        let hp = HyperParams::with_defaults(task, 0.5, 0.3, set.prior_p()).unwrap();
        (set, model, hp)
    }

    #[test]
    fn schedule_values() {
        assert_abs_diff_eq!(lr_schedule(0, 1.0, 8.0), 0.5, epsilon = 1e-15);
        assert_eq!(lr_schedule(0, 1.0, 1.0), 1.0);
        let etas: Vec<f64> = (0..1000).map(|t| lr_schedule(t, 2.0, 100.0)).collect();
        assert!(etas.windows(2).all(|w| w[1] < w[0]));
        assert!(lr_schedule(10_000_000, 2.0, 100.0) < 0.01);
    }

    #[test]
    fn learn_params_reject_large_first_rate() {
        let mut lp = LearnParams::<f64>::defaults(10);
        lp.k = 5.0;
        assert!(matches!(lp.validate(), Err(PaucError::Config(_))));
        lp.m = 125.0;
        assert!(lp.validate().is_ok());
    }

    #[test]
    fn tau_projection() {
        let tau = vec![1e6, -1e6, 1.3, 0.5, 0.0, 2.0, 3e9, -1.0];
        let p = project_tau(&tau, 1e9);
        assert_eq!(p, vec![1e6, -1e6, 1.0, 0.5, 0.0, 2.0, 1e9, 0.0]);
        let feasible = vec![0.3, 0.2, 0.7, -1.0, 4.0, 5.0, 0.0];
        assert_eq!(project_tau(&feasible, 1e9), feasible);
        assert_eq!(project_tau(&[0.0, 0.0, 0.0, -4.5, 0.0, 0.0, 0.0], 1e9)[3], -4.0);
    }

    #[test]
    fn gamma_projection() {
        assert_eq!(project_gamma(-1.5), -1.0);
        assert_eq!(project_gamma(0.2), 0.2);
        assert_eq!(project_gamma(1.0), 1.0);
    }

    #[test]
    fn zero_estimates_are_a_fixed_point() {
        let (set, model, hp) = setup(Task::Opauc);
        let aux = init_aux(&set, &model, &hp).unwrap();
        let state = OptimState::new(&model, &aux);
        let lp = LearnParams::defaults(1);
        let x = set.gather_rows(&[0, 1, 50, 60]);
        let (next, _) = step(&state, &x, &[1, 1, 0, 0], &lp, &hp).unwrap();
        assert_eq!(next.tau, state.tau);
        assert_eq!(next.gamma, state.gamma);
    }

    #[test]
    fn full_momentum_reset_gives_fresh_gradient() {
        let (set, model, hp) = setup(Task::Tpauc);
        let aux = init_aux(&set, &model, &hp).unwrap();
        let mut state = OptimState::new(&model, &aux);
        state.v.iter_mut().enumerate().for_each(|(i, v)| *v = 0.1 * (i as f64 - 2.0));
        state.w = 0.3;
        let mut lp = LearnParams::defaults(1);
        lp.c1 = 1e6;
        lp.c2 = 1e6;
        let idx = [0, 3, 40, 41, 70];
        let x = set.gather_rows(&idx);
        let y = set.gather_labels(&idx);
        let (next, info) = step(&state, &x, &y, &lp, &hp).unwrap();
        assert!(info.clamped);
        assert_eq!((info.rho, info.xi), (1.0, 1.0));
        let (_, g, gw) = tau_gradient(&model, &next.tau, next.gamma, &x, &y, &hp).unwrap();
        assert_eq!(next.v, g);
        assert_eq!(next.w, gw);
    }

    #[test]
    fn grad_map_norm_cases() {
        let (_, model, _) = setup(Task::Opauc);
        let lp = LearnParams::defaults(1);
        let mut state = OptimState::new(&model, &AuxState::default());
        assert_eq!(gradient_mapping_norm(&state, &lp, 1e9), 0.0);

        // interior point, small step: projection inactive
        state.v = vec![0.3, -0.2, 0.1, 0.5, -0.4, 0.2, 0.1, 0.3, 0.0, 0.0];
        state.tau[8] = 1.0;
        state.tau[9] = 1.0;
        let norm = gradient_mapping_norm(&state, &lp, 1e9);
        let direct = state.v.iter().map(|v| v * v).sum::<f64>().sqrt();
        assert_abs_diff_eq!(norm, direct, epsilon = 1e-12);

        // a at its upper bound, descent direction pushes it above 1
        let mut s2 = OptimState::new(&model, &AuxState { a: 1.0, ..Default::default() });
        let a_slot = s2.tau.len() - AUX_DIM;
        s2.v[a_slot] = -3.0;
        assert_eq!(gradient_mapping_norm(&s2, &lp, 1e9), 0.0);
    }

    #[test]
    fn train_with_zero_steps_returns_initial_model() {
        let (set, model, hp) = setup(Task::Opauc);
        let opts = TrainOptions { batch: BatchSpec::new(16, 0), warmup_epochs: 0, heldout: None };
        let out = train(&set, &model, &hp, &LearnParams::defaults(0), &opts).unwrap();
        assert_eq!(out.model, model);
        assert!(out.trace.is_empty());
    }

    #[test]
    fn training_keeps_feasibility_and_is_deterministic() {
        for task in [Task::Opauc, Task::Tpauc] {
            let (set, model, hp) = setup(task);
            let opts = TrainOptions { batch: BatchSpec::new(16, 3), warmup_epochs: 1, heldout: Some(&set) };
            let lp = LearnParams::defaults(60);
            let a = train(&set, &model, &hp, &lp, &opts).unwrap();
            let b = train(&set, &model, &hp, &lp, &opts).unwrap();
            assert!(a.state.is_feasible(hp.multiplier_bound));
            assert_eq!(a.model, b.model);
            assert_eq!(a.step_grad_map_norms, b.step_grad_map_norms);
            assert_eq!(a.trace.len(), 9);
            assert_eq!(a.trace.last().unwrap().step, 60);
            assert!(a.trace.iter().all(|r| r.heldout_opauc.is_some()));
        }
    }

    #[test]
    fn schedule_sequences_nonincreasing() {
        let lp = LearnParams::<f64>::defaults(0);
        let mut prev = (f64::INFINITY, f64::INFINITY, f64::INFINITY);
        for t in 0..500 {
            let eta = lr_schedule(t, lp.k, lp.m);
            let cur = (eta, (lp.c1 * eta * eta).min(1.0), (lp.c2 * eta * eta).min(1.0));
            assert!(cur.0 <= prev.0 && cur.1 <= prev.1 && cur.2 <= prev.2);
            prev = cur;
        }
    }

    #[test]
    fn rate_condition_validator() {
        let lp = LearnParams::<f64>::defaults(0);
        let c = RateConstants { lipschitz: 1.0, mu: 1.0, tau: 1.0, batch: 1.0 };
        let bad = check_rate_conditions(&lp, &c);
        assert!(bad.iter().any(|m| m.starts_with("c1")));
        assert!(bad.iter().any(|m| m.starts_with("c2")));
        let ok = LearnParams { k: 1.0, m: 1e6, c1: 3.0, c2: 40.0, nu: 1e-4, lambda: 0.1, total_steps: 0 };
        assert!(check_rate_conditions(&ok, &c).is_empty(), "{:?}", check_rate_conditions(&ok, &c));
    }

    #[test]
    fn trace_csv_header() {
        let mut buf = Vec::new();
        write_trace_csv(&mut buf, &[]).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap().trim(),
            "step,epoch,eta,objective,opauc,tpauc,grad_map_norm,a,b,gamma,s,s_prime,theta_a,theta_b,ms_per_step"
        );
    }
}
