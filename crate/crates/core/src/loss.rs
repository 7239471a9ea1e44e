//! Instance-wise minimax objectives for one-way and two-way partial AUC.
//!
//! With the squared surrogate the pairwise PAUC risk decomposes into a
//! per-instance function of the score and a handful of auxiliary scalars:
//!
//! * `a`, `b`: class score centres, boxed to `[0, 1]`;
//! * `gamma`: the dual variable, maximized over `[-1, 1]`;
//! * `s`, `s_prime`: average-top-k shifts selecting the bottom positives and
//!   top negatives (`[-4, 1]` and `[0, 5]`);
//! * `theta_a`, `theta_b`: multipliers replacing the coupled constraint
//!   `gamma >= max(-a, b - 1)`, boxed to `[0, M]`.
//!
//! The hinge `[x]+` of the exact reformulation is replaced by the softplus
//! `r_κ(x) = log(1 + exp(κx)) / κ`, and an extra `-ω·γ²` keeps the problem
//! strongly concave in `gamma` for `κ <= 2 + 2ω`.

use crate::error::{PaucError, Result};
use crate::scalar::{clamp, logistic, Scalar};
use serde::{Deserialize, Serialize};

pub const A_BOX: (f64, f64) = (0.0, 1.0);
pub const B_BOX: (f64, f64) = (0.0, 1.0);
pub const GAMMA_BOX: (f64, f64) = (-1.0, 1.0);
pub const S_BOX: (f64, f64) = (-4.0, 1.0);
pub const S_PRIME_BOX: (f64, f64) = (0.0, 5.0);
pub const DEFAULT_MULTIPLIER_BOUND: f64 = 1e9;
pub const DEFAULT_KAPPA: f64 = 5.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Task {
    Opauc,
    Tpauc,
}

impl std::str::FromStr for Task {
    type Err = PaucError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "opauc" => Ok(Task::Opauc),
            "tpauc" => Ok(Task::Tpauc),
            other => Err(PaucError::InvalidArgument(format!("unknown task '{other}'"))),
        }
    }
}

/// Loss-side hyperparameters.
///
/// Fields are public so analysis code can probe regimes the validated
/// constructor rejects (e.g. `κ → ∞` with `ω = 0`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct HyperParams<T: Scalar> {
    pub task: Task,
    pub alpha: T,
    pub beta: T,
    pub kappa: T,
    pub omega: T,
    pub prior_p: T,
    /// Upper bound `M` of both multiplier boxes.
    pub multiplier_bound: T,
}

/// Smallest `ω >= 0` satisfying `κ <= 2 + 2ω`.
pub fn default_omega(kappa: f64) -> f64 {
    (kappa / 2.0 - 1.0).max(0.0)
}

impl<T: Scalar> HyperParams<T> {
    pub fn new(task: Task, alpha: T, beta: T, kappa: T, omega: T, prior_p: T) -> Result<Self> {
        let hp = Self {
            task,
            alpha,
            beta,
            kappa,
            omega,
            prior_p,
            multiplier_bound: T::of(DEFAULT_MULTIPLIER_BOUND),
        };
        hp.validate()?;
        Ok(hp)
    }

    /// Defaults `κ = 5`, `ω = κ/2 - 1`.
    pub fn with_defaults(task: Task, alpha: T, beta: T, prior_p: T) -> Result<Self> {
        Self::new(task, alpha, beta, T::of(DEFAULT_KAPPA), T::of(default_omega(DEFAULT_KAPPA)), prior_p)
    }

    pub fn validate(&self) -> Result<()> {
        let in_unit = |x: T| x > T::zero() && x <= T::one();
        if !in_unit(self.beta) {
            return Err(PaucError::InvalidRegion(format!("beta = {} outside (0, 1]", self.beta)));
        }
        if self.task == Task::Tpauc && !in_unit(self.alpha) {
            return Err(PaucError::InvalidRegion(format!("alpha = {} outside (0, 1]", self.alpha)));
        }
        if !(self.prior_p > T::zero() && self.prior_p < T::one()) {
            return Err(PaucError::Config(format!("class prior {} outside (0, 1)", self.prior_p)));
        }
        if !(self.kappa > T::zero()) {
            return Err(PaucError::Config("kappa must be > 0".into()));
        }
        if !(self.omega >= T::zero()) {
            return Err(PaucError::Config("omega must be >= 0".into()));
        }
        if self.kappa > T::two() + T::two() * self.omega {
            return Err(PaucError::Config("strong concavity violated: kappa > 2+2*omega".into()));
        }
        if !(self.multiplier_bound > T::zero()) {
            return Err(PaucError::Config("multiplier bound must be > 0".into()));
        }
        Ok(())
    }
}

/// Auxiliary minimax variables.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct AuxState<T: Scalar> {
    pub a: T,
    pub b: T,
    pub gamma: T,
    pub s: T,
    pub s_prime: T,
    pub theta_a: T,
    pub theta_b: T,
}

impl<T: Scalar> Default for AuxState<T> {
    fn default() -> Self {
        Self {
            a: T::of(0.5),
            b: T::of(0.5),
            gamma: T::zero(),
            s: T::zero(),
            s_prime: T::of(2.5),
            theta_a: T::zero(),
            theta_b: T::zero(),
        }
    }
}

fn boxed<T: Scalar>(x: T, (lo, hi): (f64, f64)) -> T {
    clamp(x, T::of(lo), T::of(hi))
}

impl<T: Scalar> AuxState<T> {
    /// Coordinate-wise projection onto every box, `gamma` included.
    pub fn projected(&self, multiplier_bound: T) -> Self {
        Self {
            a: boxed(self.a, A_BOX),
            b: boxed(self.b, B_BOX),
            gamma: boxed(self.gamma, GAMMA_BOX),
            s: boxed(self.s, S_BOX),
            s_prime: boxed(self.s_prime, S_PRIME_BOX),
            theta_a: clamp(self.theta_a, T::zero(), multiplier_bound),
            theta_b: clamp(self.theta_b, T::zero(), multiplier_bound),
        }
    }

    pub fn is_feasible(&self, multiplier_bound: T) -> bool {
        self.projected(multiplier_bound) == *self
    }
}

/// Per-batch partial derivatives of the batch-mean objective.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct GradBundle<T: Scalar> {
    /// `∂objective/∂score_i` (already carries the `1/B` of the mean).
    pub d_score: Vec<T>,
    pub d_a: T,
    pub d_b: T,
    pub d_gamma: T,
    pub d_s: T,
    pub d_s_prime: T,
    pub d_theta_a: T,
    pub d_theta_b: T,
}

/// `log(1 + exp(κx)) / κ`, evaluated as `max(x, 0) + log1p(exp(-κ|x|)) / κ`.
#[inline]
pub fn softplus_r<T: Scalar>(x: T, kappa: T) -> T {
    x.max(T::zero()) + (-(kappa * x.abs())).exp().ln_1p() / kappa
}

/// `d r_κ / dx = logistic(κx)`.
#[inline]
pub fn softplus_r_prime<T: Scalar>(x: T, kappa: T) -> T {
    logistic(kappa * x)
}

#[inline]
fn hinge<T: Scalar>(x: T) -> T {
    x.max(T::zero())
}

/// `(f - a)² - 2(1 + γ)f`
#[inline]
fn pos_core<T: Scalar>(score: T, a: T, gamma: T) -> T {
    let d = score - a;
    d * d - T::two() * (T::one() + gamma) * score
}

/// `(f - b)² + 2(1 + γ)f`
#[inline]
fn neg_core<T: Scalar>(score: T, b: T, gamma: T) -> T {
    let d = score - b;
    d * d + T::two() * (T::one() + gamma) * score
}

fn label_weights<T: Scalar>(y: u8, hp: &HyperParams<T>) -> (T, T) {
    if y == 1 {
        (T::one() / hp.prior_p, T::zero())
    } else {
        (T::zero(), T::one() / (T::one() - hp.prior_p))
    }
}

/// Exact one-way objective with the hinge, per instance.
pub fn g_op_instance<T: Scalar>(score: T, y: u8, aux: &AuxState<T>, hp: &HyperParams<T>) -> T {
    let (wp, wn) = label_weights(y, hp);
    let neg = if wn > T::zero() {
        (hp.beta * aux.s_prime + hinge(neg_core(score, aux.b, aux.gamma) - aux.s_prime)) * wn / hp.beta
    } else {
        T::zero()
    };
    pos_core(score, aux.a, aux.gamma) * wp - aux.gamma * aux.gamma + neg
}

/// Softplus-smoothed, ω-regularized one-way objective, per instance.
pub fn g_op_kappa_omega_instance<T: Scalar>(score: T, y: u8, aux: &AuxState<T>, hp: &HyperParams<T>) -> T {
    op_instance_part(score, y, aux, hp) - (T::one() + hp.omega) * aux.gamma * aux.gamma
}

/// Softplus-smoothed, ω-regularized two-way objective, per instance.
pub fn g_tp_kappa_omega_instance<T: Scalar>(score: T, y: u8, aux: &AuxState<T>, hp: &HyperParams<T>) -> T {
    tp_instance_part(score, y, aux, hp) - (T::one() + hp.omega) * aux.gamma * aux.gamma
}

fn neg_part<T: Scalar>(score: T, aux: &AuxState<T>, hp: &HyperParams<T>, wn: T) -> T {
    if wn == T::zero() {
        return T::zero();
    }
    (hp.beta * aux.s_prime + softplus_r(neg_core(score, aux.b, aux.gamma) - aux.s_prime, hp.kappa)) * wn / hp.beta
}

fn op_instance_part<T: Scalar>(score: T, y: u8, aux: &AuxState<T>, hp: &HyperParams<T>) -> T {
    let (wp, wn) = label_weights(y, hp);
    pos_core(score, aux.a, aux.gamma) * wp + neg_part(score, aux, hp, wn)
}

fn tp_instance_part<T: Scalar>(score: T, y: u8, aux: &AuxState<T>, hp: &HyperParams<T>) -> T {
    let (wp, wn) = label_weights(y, hp);
    let pos = if wp > T::zero() {
        (hp.alpha * aux.s + softplus_r(pos_core(score, aux.a, aux.gamma) - aux.s, hp.kappa)) * wp / hp.alpha
    } else {
        T::zero()
    };
    pos + neg_part(score, aux, hp, wn)
}

/// Penalty `-θ_b(b - 1 - γ)`, plus `-θ_a(-a - γ)` for the two-way task.
pub fn lagrangian_terms<T: Scalar>(aux: &AuxState<T>, task: Task) -> T {
    let op = -aux.theta_b * (aux.b - T::one() - aux.gamma);
    match task {
        Task::Opauc => op,
        Task::Tpauc => op - aux.theta_a * (-aux.a - aux.gamma),
    }
}

fn check_batch<T: Scalar>(scores: &[T], labels: &[u8]) -> Result<()> {
    if scores.is_empty() {
        return Err(PaucError::EmptyBatch);
    }
    if scores.len() != labels.len() {
        return Err(PaucError::Shape(format!("{} scores for {} labels", scores.len(), labels.len())));
    }
    Ok(())
}

/// Batch mean of the task objective plus the multiplier penalty.
pub fn batch_objective<T: Scalar>(scores: &[T], labels: &[u8], aux: &AuxState<T>, hp: &HyperParams<T>) -> Result<T> {
    check_batch(scores, labels)?;
    let part = match hp.task {
        Task::Opauc => op_instance_part::<T>,
        Task::Tpauc => tp_instance_part::<T>,
    };
    let sum = scores
        .iter()
        .zip(labels)
        .fold(T::zero(), |acc, (&f, &y)| acc + part(f, y, aux, hp));
    Ok(sum * (T::one() / T::of_usize(scores.len())) - (T::one() + hp.omega) * aux.gamma * aux.gamma
        + lagrangian_terms(aux, hp.task))
}

/// Batch objective together with every analytic partial.
///
/// Instance terms are reduced in index order, so the result is
/// bit-reproducible for a given batch ordering.
pub fn batch_objective_and_grad<T: Scalar>(
    scores: &[T],
    labels: &[u8],
    aux: &AuxState<T>,
    hp: &HyperParams<T>,
) -> Result<(T, GradBundle<T>)> {
    check_batch(scores, labels)?;
    let inv_b = T::one() / T::of_usize(scores.len());
    let two = T::two();
    let one_plus_gamma = T::one() + aux.gamma;

    let mut obj = T::zero();
    let mut g = GradBundle {
        d_score: Vec::with_capacity(scores.len()),
        d_a: T::zero(),
        d_b: T::zero(),
        d_gamma: T::zero(),
        d_s: T::zero(),
        d_s_prime: T::zero(),
        d_theta_a: T::zero(),
        d_theta_b: T::zero(),
    };

    for (&f, &y) in scores.iter().zip(labels) {
        let (wp, wn) = label_weights(y, hp);
        let mut d_f = T::zero();
        if wp > T::zero() {
            let core = pos_core(f, aux.a, aux.gamma);
            let d_core_f = two * (f - aux.a) - two * one_plus_gamma;
            let d_core_a = -two * (f - aux.a);
            let d_core_gamma = -two * f;
            match hp.task {
                Task::Opauc => {
                    obj = obj + core * wp;
                    d_f = d_f + d_core_f * wp;
                    g.d_a = g.d_a + d_core_a * wp;
                    g.d_gamma = g.d_gamma + d_core_gamma * wp;
                }
                Task::Tpauc => {
                    let u = core - aux.s;
                    let scale = wp / hp.alpha;
                    let r1 = softplus_r_prime(u, hp.kappa);
                    obj = obj + (hp.alpha * aux.s + softplus_r(u, hp.kappa)) * scale;
                    d_f = d_f + r1 * d_core_f * scale;
                    g.d_a = g.d_a + r1 * d_core_a * scale;
                    g.d_gamma = g.d_gamma + r1 * d_core_gamma * scale;
                    g.d_s = g.d_s + (hp.alpha - r1) * scale;
                }
            }
        }
        if wn > T::zero() {
            let u = neg_core(f, aux.b, aux.gamma) - aux.s_prime;
            let scale = wn / hp.beta;
            let r1 = softplus_r_prime(u, hp.kappa);
            obj = obj + (hp.beta * aux.s_prime + softplus_r(u, hp.kappa)) * scale;
            d_f = d_f + r1 * (two * (f - aux.b) + two * one_plus_gamma) * scale;
            g.d_b = g.d_b + r1 * (-two * (f - aux.b)) * scale;
            g.d_gamma = g.d_gamma + r1 * two * f * scale;
            g.d_s_prime = g.d_s_prime + (hp.beta - r1) * scale;
        }
        g.d_score.push(d_f * inv_b);
    }

    obj = obj * inv_b - (T::one() + hp.omega) * aux.gamma * aux.gamma + lagrangian_terms(aux, hp.task);
    g.d_a = g.d_a * inv_b;
    g.d_b = g.d_b * inv_b - aux.theta_b;
    g.d_gamma = g.d_gamma * inv_b - two * (T::one() + hp.omega) * aux.gamma + aux.theta_b;
    g.d_s = g.d_s * inv_b;
    g.d_s_prime = g.d_s_prime * inv_b;
    g.d_theta_b = -(aux.b - T::one() - aux.gamma);
    if hp.task == Task::Tpauc {
        g.d_a = g.d_a + aux.theta_a;
        g.d_gamma = g.d_gamma + aux.theta_a;
        g.d_theta_a = aux.a + aux.gamma;
    }
    Ok((obj, g))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn hp(task: Task, p: f64) -> HyperParams<f64> {
        HyperParams::new(task, 0.5, 0.3, 4.0, 1.0, p).unwrap()
    }

    #[test]
    fn softplus_values() {
        assert_abs_diff_eq!(softplus_r(0.0, 4.0), std::f64::consts::LN_2 / 4.0, epsilon = 1e-16);
        assert!((softplus_r(10.0_f64, 5.0) - 10.0).abs() < 1e-21);
        assert!(softplus_r(-10.0, 5.0) < 1e-21);
        assert!(softplus_r(-1e6_f64, 5.0).is_finite());
        assert!(softplus_r(1e6_f64, 5.0).is_finite());
        assert_eq!(softplus_r_prime(0.0, 3.0), 0.5);
        assert_eq!(softplus_r_prime(1e4, 3.0), 1.0);
    }

    #[test]
    fn softplus_prime_matches_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let h = 1e-5;
        for _ in 0..200 {
            let x: f64 = rng.random_range(-5.0..5.0);
            let k: f64 = rng.random_range(0.5..8.0);
            let fd = (softplus_r(x + h, k) - softplus_r(x - h, k)) / (2.0 * h);
            assert!((fd - softplus_r_prime(x, k)).abs() <= 1e-6);
        }
    }

    #[test]
    fn softplus_dominates_hinge_within_ln2_over_kappa() {
        for i in -2000..=2000 {
            let x = i as f64 * 5e-3;
            for k in [0.5, 2.0, 5.0, 40.0] {
                let gap = softplus_r(x, k) - x.max(0.0);
                assert!(gap >= 0.0 && gap <= std::f64::consts::LN_2 / k + 1e-15);
            }
        }
    }

    #[test]
    fn hyperparams_enforce_concavity() {
        let err = HyperParams::<f64>::new(Task::Opauc, 1.0, 0.3, 10.0, 0.0, 0.1).unwrap_err();
        assert_eq!(err.to_string(), "configuration error: strong concavity violated: kappa > 2+2*omega");
        assert!(HyperParams::<f64>::new(Task::Opauc, 1.0, 0.3, 4.0, 1.0, 0.1).is_ok());
        assert!(HyperParams::<f64>::new(Task::Tpauc, 0.0, 0.3, 4.0, 1.0, 0.1).is_err());
        let d = HyperParams::<f64>::with_defaults(Task::Opauc, 1.0, 0.3, 0.1).unwrap();
        assert_eq!((d.kappa, d.omega), (5.0, 1.5));
    }

    #[test]
    fn g_op_negative_branch_with_inactive_hinge() {
        let h = hp(Task::Opauc, 0.25);
        let aux = AuxState { b: 0.5, gamma: -0.2, s_prime: 5.0, ..Default::default() };
        let v = g_op_instance(0.3, 0, &aux, &h);
        assert_abs_diff_eq!(v, 5.0 / 0.75 - 0.04, epsilon = 1e-12);
    }

    #[test]
    fn g_op_positive_branch() {
        let mut h = hp(Task::Opauc, 0.5);
        h.beta = 1.0;
        let aux = AuxState { a: 0.5, gamma: 0.0, ..Default::default() };
        assert_abs_diff_eq!(g_op_instance(0.5, 1, &aux, &h), -2.0, epsilon = 1e-15);
        // κ-smoothed variant shares the positive branch up to the ω term
        let v = g_op_kappa_omega_instance(0.5, 1, &aux, &h);
        assert_abs_diff_eq!(v, -2.0, epsilon = 1e-15);
    }

    #[test]
    fn smoothing_gap_is_bounded() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let mut h = hp(Task::Opauc, 0.2);
        h.kappa = 1e4;
        h.omega = 0.7;
        for _ in 0..500 {
            let aux = AuxState {
                a: rng.random(),
                b: rng.random(),
                gamma: rng.random_range(-1.0..1.0),
                s_prime: rng.random_range(0.0..5.0),
                ..Default::default()
            };
            let f: f64 = rng.random();
            let y = u8::from(rng.random_bool(0.3));
            let smooth = g_op_kappa_omega_instance(f, y, &aux, &h);
            let exact = g_op_instance(f, y, &aux, &h);
            let gap = smooth - exact + h.omega * aux.gamma * aux.gamma;
            let bound = std::f64::consts::LN_2 / h.kappa / (h.beta * (1.0 - h.prior_p));
            assert!(gap >= -1e-12 && gap <= bound + 1e-12);
        }
    }

    #[test]
    fn omega_zero_is_pure_smoothing() {
        let mut h = hp(Task::Opauc, 0.2);
        h.omega = 0.0;
        h.kappa = 2.0;
        let aux = AuxState { b: 0.5, gamma: 0.4, s_prime: 2.5, ..Default::default() };
        let f = 0.7;
        let u = (f - 0.5) * (f - 0.5) + 2.0 * 1.4 * f - 2.5;
        let smoothed = (h.beta * 2.5 + (1.0 + (2.0_f64 * u).exp()).ln() / 2.0) / (h.beta * 0.8) - 0.16;
        assert_abs_diff_eq!(g_op_kappa_omega_instance(f, 0, &aux, &h), smoothed, epsilon = 1e-12);
    }

    #[test]
    fn g_tp_positive_substitution() {
        let h = HyperParams::new(Task::Tpauc, 0.5, 0.3, 4.0, 1.0, 0.2).unwrap();
        let aux = AuxState { a: 0.6, gamma: -1.0, s: 1.0, ..Default::default() };
        let v = g_tp_kappa_omega_instance(0.6, 1, &aux, &h);
        let expect = (0.5 + softplus_r(-1.0, 4.0)) / (0.5 * 0.2) - 2.0;
        assert_abs_diff_eq!(v, expect, epsilon = 1e-12);
    }

    #[test]
    fn lagrangian_examples() {
        let aux = AuxState { theta_a: 0.0, theta_b: 0.0, ..Default::default() };
        assert_eq!(lagrangian_terms(&aux, Task::Tpauc), 0.0);
        let aux = AuxState { b: 1.0, gamma: 0.0, theta_b: 2.0, ..Default::default() };
        assert_eq!(lagrangian_terms(&aux, Task::Opauc), 0.0);
        let aux = AuxState { a: 0.3, gamma: -0.5, theta_a: 1.0, theta_b: 0.0, ..Default::default() };
        assert_abs_diff_eq!(lagrangian_terms(&aux, Task::Tpauc), -0.2, epsilon = 1e-15);
    }

    #[test]
    fn batch_objective_matches_instance_mean() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for task in [Task::Opauc, Task::Tpauc] {
            let h = hp(task, 0.3);
            let scores: Vec<f64> = (0..40).map(|_| rng.random()).collect();
            let labels: Vec<u8> = (0..40).map(|i| u8::from(i % 3 == 0)).collect();
            let aux = AuxState { a: 0.7, b: 0.2, gamma: 0.1, s: -0.5, s_prime: 1.0, theta_a: 0.3, theta_b: 0.4 };
            let inst = match task {
                Task::Opauc => g_op_kappa_omega_instance::<f64>,
                Task::Tpauc => g_tp_kappa_omega_instance::<f64>,
            };
            let mean = scores.iter().zip(&labels).map(|(&f, &y)| inst(f, y, &aux, &h)).sum::<f64>() / 40.0;
            let (obj, _) = batch_objective_and_grad(&scores, &labels, &aux, &h).unwrap();
            assert_abs_diff_eq!(obj, mean + lagrangian_terms(&aux, task), epsilon = 1e-12);
            assert_eq!(obj, batch_objective(&scores, &labels, &aux, &h).unwrap());
        }
    }

    #[test]
    fn empty_batch_is_an_error() {
        let h = hp(Task::Opauc, 0.3);
        assert!(matches!(
            batch_objective_and_grad::<f64>(&[], &[], &AuxState::default(), &h),
            Err(PaucError::EmptyBatch)
        ));
    }

    #[test]
    fn opauc_leaves_tpauc_only_partials_at_zero() {
        let h = hp(Task::Opauc, 0.3);
        let aux = AuxState { theta_a: 5.0, ..Default::default() };
        let (_, g) = batch_objective_and_grad(&[0.2, 0.9], &[0, 1], &aux, &h).unwrap();
        assert_eq!(g.d_s, 0.0);
        assert_eq!(g.d_theta_a, 0.0);
    }

    #[test]
    fn positives_only_batch_has_lagrangian_only_negative_partials() {
        let h = hp(Task::Opauc, 0.3);
        let aux = AuxState { b: 0.4, gamma: 0.1, theta_b: 0.7, ..Default::default() };
        let (_, g) = batch_objective_and_grad(&[0.2, 0.9], &[1, 1], &aux, &h).unwrap();
        assert_eq!(g.d_b, -0.7);
        assert_eq!(g.d_s_prime, 0.0);
    }

    #[test]
    fn permutation_invariance() {
        let h = hp(Task::Tpauc, 0.3);
        let scores = [0.1, 0.5, 0.9, 0.3, 0.7];
        let labels = [1, 0, 0, 1, 0];
        let aux = AuxState::default();
        let (o1, _) = batch_objective_and_grad(&scores, &labels, &aux, &h).unwrap();
        let (o2, _) = batch_objective_and_grad(&[0.7, 0.3, 0.9, 0.5, 0.1], &[0, 1, 0, 0, 1], &aux, &h).unwrap();
        assert_abs_diff_eq!(o1, o2, epsilon = 1e-14);
    }

    #[test]
    fn projection_boxes() {
        let aux = AuxState { a: 1.3, b: -0.2, gamma: -1.5, s: -9.0, s_prime: 7.0, theta_a: -1.0, theta_b: 2e9 };
        let p = aux.projected(1e9);
        assert_eq!(p, AuxState { a: 1.0, b: 0.0, gamma: -1.0, s: -4.0, s_prime: 5.0, theta_a: 0.0, theta_b: 1e9 });
        assert!(p.is_feasible(1e9));
        assert!(!aux.is_feasible(1e9));
    }
}
