//! Exact empirical AUC, one-way and two-way partial AUC, and the pairwise
//! squared-surrogate risks they are optimized through.
//!
//! Ties `f(x) = f(x')` count as correctly ranked (the 0-1 loss fires only on
//! a strictly negative margin). Quantile sets are selected by rank: a stable
//! sort with original-index tiebreak picks exactly `⌊n·frac⌋` elements, so
//! duplicated scores never change the size of the selected set.

use crate::error::{PaucError, Result};
use crate::scalar::{floor_count, Scalar};
use serde::{Deserialize, Serialize};
use std::cmp::Ordering;

/// `1` when `t < 0`, else `0`.
#[inline]
pub fn zero_one_loss<T: Scalar>(t: T) -> T {
    if t < T::zero() {
        T::one()
    } else {
        T::zero()
    }
}

/// ROC restriction: FPR ≤ β and, for the two-way variant, TPR ≥ α.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RocRegion {
    pub alpha: Option<f64>,
    pub beta: f64,
}

impl RocRegion {
    pub fn one_way(beta: f64) -> Self {
        Self { alpha: None, beta }
    }

    pub fn two_way(alpha: f64, beta: f64) -> Self {
        Self { alpha: Some(alpha), beta }
    }

    /// `n₋^β = ⌊n₋·β⌋`, rejected when zero.
    pub fn top_count(&self, n_neg: usize) -> Result<usize> {
        region_count(n_neg, self.beta, "beta")
    }

    /// `n₊^α = ⌊n₊·α⌋`, rejected when zero. `None` for a one-way region.
    pub fn bottom_count(&self, n_pos: usize) -> Result<Option<usize>> {
        self.alpha.map(|a| region_count(n_pos, a, "alpha")).transpose()
    }
}

fn region_count(n: usize, frac: f64, name: &str) -> Result<usize> {
    if !(frac > 0.0 && frac <= 1.0) {
        return Err(PaucError::InvalidRegion(format!("{name} = {frac} outside (0, 1]")));
    }
    match floor_count(n, frac) {
        0 => Err(PaucError::InvalidRegion(format!(
            "empty top-{name} set: floor({n} * {frac}) = 0"
        ))),
        k => Ok(k.min(n)),
    }
}

/// Indices of `values` ordered by descending value, ties by ascending index.
pub fn rank_desc<T: Scalar>(values: &[T]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&i, &j| {
        values[j].partial_cmp(&values[i]).unwrap_or(Ordering::Equal).then(i.cmp(&j))
    });
    idx
}

/// Indices of `values` ordered by ascending value, ties by ascending index.
pub fn rank_asc<T: Scalar>(values: &[T]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&i, &j| {
        values[i].partial_cmp(&values[j]).unwrap_or(Ordering::Equal).then(i.cmp(&j))
    });
    idx
}

/// The `k` largest values, in descending rank order.
pub fn top_k<T: Scalar>(values: &[T], k: usize) -> Vec<T> {
    rank_desc(values).into_iter().take(k).map(|i| values[i]).collect()
}

/// The `k` smallest values, in ascending rank order.
pub fn bottom_k<T: Scalar>(values: &[T], k: usize) -> Vec<T> {
    rank_asc(values).into_iter().take(k).map(|i| values[i]).collect()
}

/// The `⌊n₋β⌋`-th largest negative score.
pub fn eta_beta<T: Scalar>(neg_scores: &[T], beta: f64) -> Result<T> {
    let k = region_count(neg_scores.len(), beta, "beta")?;
    Ok(values_at_rank(neg_scores, &rank_desc(neg_scores), k))
}

/// The `⌊n₊α⌋`-th smallest positive score.
pub fn eta_alpha<T: Scalar>(pos_scores: &[T], alpha: f64) -> Result<T> {
    let k = region_count(pos_scores.len(), alpha, "alpha")?;
    Ok(values_at_rank(pos_scores, &rank_asc(pos_scores), k))
}

fn values_at_rank<T: Scalar>(values: &[T], order: &[usize], k: usize) -> T {
    values[order[k - 1]]
}

/// Number of `(pos, neg)` pairs with `pos < neg`, counted by sorting.
fn count_violations<T: Scalar>(pos: &[T], neg: &[T]) -> usize {
    let mut sorted: Vec<T> = neg.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap_or(Ordering::Equal));
    pos.iter()
        .map(|&p| sorted.len() - sorted.partition_point(|&x| x <= p))
        .sum()
}

fn check_nonempty<T>(pos: &[T], neg: &[T]) -> Result<()> {
    if pos.is_empty() || neg.is_empty() {
        return Err(PaucError::InvalidArgument("both classes need at least one score".into()));
    }
    Ok(())
}

fn auc_from_violations<T: Scalar>(violations: usize, pairs: usize) -> T {
    T::one() - T::of_usize(violations) / T::of_usize(pairs)
}

/// Full AUC in `O((n₊ + n₋) log n₋)`.
pub fn empirical_auc<T: Scalar>(pos: &[T], neg: &[T]) -> Result<T> {
    check_nonempty(pos, neg)?;
    Ok(auc_from_violations(count_violations(pos, neg), pos.len() * neg.len()))
}

/// Full AUC by enumerating every pair.
pub fn empirical_auc_brute<T: Scalar>(pos: &[T], neg: &[T]) -> Result<T> {
    check_nonempty(pos, neg)?;
    let mut loss = T::zero();
    for &p in pos {
        for &q in neg {
            loss = loss + zero_one_loss(p - q);
        }
    }
    Ok(T::one() - loss / T::of_usize(pos.len() * neg.len()))
}

/// One-way partial AUC over the top-`⌊n₋β⌋` negatives.
pub fn empirical_opauc<T: Scalar>(pos: &[T], neg: &[T], beta: f64) -> Result<T> {
    check_nonempty(pos, neg)?;
    let k = region_count(neg.len(), beta, "beta")?;
    let top = top_k(neg, k);
    Ok(auc_from_violations(count_violations(pos, &top), pos.len() * k))
}

/// Two-way partial AUC: bottom-`⌊n₊α⌋` positives against top-`⌊n₋β⌋`
/// negatives.
pub fn empirical_tpauc<T: Scalar>(pos: &[T], neg: &[T], alpha: f64, beta: f64) -> Result<T> {
    check_nonempty(pos, neg)?;
    let kp = region_count(pos.len(), alpha, "alpha")?;
    let kn = region_count(neg.len(), beta, "beta")?;
    let bottom = bottom_k(pos, kp);
    let top = top_k(neg, kn);
    Ok(auc_from_violations(count_violations(&bottom, &top), kp * kn))
}

/// The multiset of the `k` largest (`largest = true`) or smallest values,
/// in no particular order. Tied values are interchangeable in any sum, so a
/// linear-time selection gives the same result as the rank-ordered set.
fn select_k<T: Scalar>(values: &[T], k: usize, largest: bool) -> Vec<T> {
    let mut v = values.to_vec();
    if k < v.len() {
        let cmp = |a: &T, b: &T| {
            let o = a.partial_cmp(b).unwrap_or(Ordering::Equal);
            if largest {
                o.reverse()
            } else {
                o
            }
        };
        v.select_nth_unstable_by(k, cmp);
        v.truncate(k);
    }
    v
}

fn sq_pair_mean<T: Scalar>(pos: &[T], neg: &[T]) -> T {
    let mut acc = T::zero();
    for &p in pos {
        for &q in neg {
            let r = T::one() - (p - q);
            acc = acc + r * r;
        }
    }
    acc / T::of_usize(pos.len() * neg.len())
}

/// Mean of `(1 - (f(x_i) - f(x'_[j])))²` over all positives and the
/// top-`⌊n₋β⌋` negatives. Deliberately `O(n₊·n₋^β)`.
pub fn pairwise_sq_risk_opauc<T: Scalar>(pos: &[T], neg: &[T], beta: f64) -> Result<T> {
    check_nonempty(pos, neg)?;
    let k = region_count(neg.len(), beta, "beta")?;
    Ok(sq_pair_mean(pos, &select_k(neg, k, true)))
}

/// Two-way analogue of [`pairwise_sq_risk_opauc`] over the bottom-`⌊n₊α⌋`
/// positives.
pub fn pairwise_sq_risk_tpauc<T: Scalar>(pos: &[T], neg: &[T], alpha: f64, beta: f64) -> Result<T> {
    check_nonempty(pos, neg)?;
    let kp = region_count(pos.len(), alpha, "alpha")?;
    let kn = region_count(neg.len(), beta, "beta")?;
    Ok(sq_pair_mean(&select_k(pos, kp, false), &select_k(neg, kn, true)))
}

/// All three metrics for one score vector, as serialized by `eval`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PaucReport {
    pub auc: f64,
    pub opauc: f64,
    pub tpauc: f64,
    pub region: RegionReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegionReport {
    pub alpha: f64,
    pub beta: f64,
    /// `⌊n₊α⌋ / n₊`
    pub effective_alpha: f64,
    /// `⌊n₋β⌋ / n₋`
    pub effective_beta: f64,
}

pub fn pauc_report<T: Scalar>(pos: &[T], neg: &[T], alpha: f64, beta: f64) -> Result<PaucReport> {
    let kp = region_count(pos.len(), alpha, "alpha")?;
    let kn = region_count(neg.len(), beta, "beta")?;
    Ok(PaucReport {
        auc: empirical_auc(pos, neg)?.as_f64(),
        opauc: empirical_opauc(pos, neg, beta)?.as_f64(),
        tpauc: empirical_tpauc(pos, neg, alpha, beta)?.as_f64(),
        region: RegionReport {
            alpha,
            beta,
            effective_alpha: kp as f64 / pos.len() as f64,
            effective_beta: kn as f64 / neg.len() as f64,
        },
    })
}

/// Splits scores by label into `(positives, negatives)`.
pub fn split_by_label<T: Scalar>(scores: &[T], labels: &[u8]) -> (Vec<T>, Vec<T>) {
    let mut pos = Vec::new();
    let mut neg = Vec::new();
    for (&s, &y) in scores.iter().zip(labels) {
        if y == 1 {
            pos.push(s);
        } else {
            neg.push(s);
        }
    }
    (pos, neg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    const POS: [f64; 2] = [0.9, 0.4];
    const NEG: [f64; 3] = [0.8, 0.3, 0.1];

    #[test]
    fn zero_one_convention() {
        assert_eq!(zero_one_loss(-0.3), 1.0);
        assert_eq!(zero_one_loss(0.0), 0.0);
        assert_eq!(zero_one_loss(0.7), 0.0);
    }

    #[test]
    fn quantile_thresholds() {
        assert_eq!(eta_beta(&NEG, 2.0 / 3.0).unwrap(), 0.3);
        assert_eq!(eta_beta(&[0.5, 0.5, 0.5], 1.0 / 3.0).unwrap(), 0.5);
        assert_eq!(top_k(&[0.5, 0.5, 0.5], floor_count(3, 1.0 / 3.0)).len(), 1);
        assert_eq!(eta_beta(&[0.9], 1.0).unwrap(), 0.9);
        assert_eq!(eta_alpha(&POS, 0.5).unwrap(), 0.4);
        assert_eq!(eta_alpha(&[0.1, 0.2, 0.3], 1.0).unwrap(), 0.3);
        assert!(matches!(eta_alpha(&[0.7], 0.5), Err(PaucError::InvalidRegion(_))));
        assert!(matches!(eta_beta(&[0.7, 0.1], 0.0), Err(PaucError::InvalidRegion(_))));
    }

    #[test]
    fn rank_selection_breaks_ties_by_index() {
        assert_eq!(rank_desc(&[0.2, 0.5, 0.5, 0.1]), vec![1, 2, 0, 3]);
        assert_eq!(rank_asc(&[0.2, 0.5, 0.5, 0.1]), vec![3, 0, 1, 2]);
    }

    #[test]
    fn auc_examples() {
        assert_abs_diff_eq!(empirical_auc(&POS, &NEG).unwrap(), 5.0 / 6.0, epsilon = 1e-15);
        assert_abs_diff_eq!(empirical_auc_brute(&POS, &NEG).unwrap(), 5.0 / 6.0, epsilon = 1e-15);
        assert_eq!(empirical_auc(&[0.9, 0.95], &NEG).unwrap(), 1.0);
        assert_eq!(empirical_auc(&[0.5], &[0.5]).unwrap(), 1.0);
        assert!(empirical_auc::<f64>(&[], &NEG).is_err());
    }

    #[test]
    fn opauc_examples() {
        assert_abs_diff_eq!(empirical_opauc(&POS, &NEG, 2.0 / 3.0).unwrap(), 0.75, epsilon = 1e-15);
        assert_eq!(empirical_opauc(&POS, &NEG, 1.0).unwrap(), empirical_auc(&POS, &NEG).unwrap());
        assert_eq!(empirical_opauc(&[0.95, 0.99], &NEG, 0.4).unwrap(), 1.0);
        assert!(empirical_opauc(&POS, &NEG, 0.2).is_err());
    }

    #[test]
    fn tpauc_examples() {
        assert_abs_diff_eq!(empirical_tpauc(&POS, &NEG, 0.5, 2.0 / 3.0).unwrap(), 0.5, epsilon = 1e-15);
        assert_eq!(empirical_tpauc(&POS, &NEG, 1.0, 1.0).unwrap(), empirical_auc(&POS, &NEG).unwrap());
        assert_eq!(empirical_tpauc(&[0.1, 0.9], &[0.5, 0.6], 0.5, 1.0).unwrap(), 0.0);
    }

    #[test]
    fn pairwise_risk_examples() {
        assert_abs_diff_eq!(pairwise_sq_risk_opauc(&POS, &NEG, 2.0 / 3.0).unwrap(), 0.935, epsilon = 1e-12);
        assert_eq!(pairwise_sq_risk_opauc(&[1.0], &[0.0], 1.0).unwrap(), 0.0);
        assert_eq!(pairwise_sq_risk_opauc(&[0.3, 0.3], &[0.3], 1.0).unwrap(), 1.0);
        assert_abs_diff_eq!(pairwise_sq_risk_tpauc(&POS, &NEG, 0.5, 2.0 / 3.0).unwrap(), 1.385, epsilon = 1e-12);
        assert_eq!(
            pairwise_sq_risk_tpauc(&POS, &NEG, 1.0, 1.0).unwrap(),
            pairwise_sq_risk_opauc(&POS, &NEG, 1.0).unwrap()
        );
        assert_eq!(pairwise_sq_risk_tpauc(&[1.0, 1.0], &[0.0], 0.5, 1.0).unwrap(), 0.0);
    }

    #[test]
    fn metrics_generic_over_f32() {
        let pos = [0.9f32, 0.4];
        let neg = [0.8f32, 0.3, 0.1];
        assert!((empirical_opauc(&pos, &neg, 2.0 / 3.0).unwrap() - 0.75).abs() < 1e-6);
    }

    #[test]
    fn report_effective_region() {
        let r = pauc_report(&POS, &NEG, 0.5, 0.5).unwrap();
        assert_eq!(r.region.effective_beta, 1.0 / 3.0);
        assert_eq!(r.region.effective_alpha, 0.5);
        let full = pauc_report(&POS, &NEG, 1.0, 1.0).unwrap();
        assert_eq!(full.auc, full.tpauc);
    }

    fn scores(max_len: usize) -> impl Strategy<Value = Vec<f64>> {
        // coarse grid so ties are common
        proptest::collection::vec((0u32..40).prop_map(|v| v as f64 / 40.0), 1..max_len)
    }

    proptest! {
        #[test]
        fn fast_auc_equals_brute(pos in scores(250), neg in scores(250)) {
            prop_assert_eq!(empirical_auc(&pos, &neg).unwrap(), empirical_auc_brute(&pos, &neg).unwrap());
        }

        #[test]
        fn partial_aucs_are_rank_statistics(pos in scores(60), neg in scores(60), beta in 0.05f64..1.0, alpha in 0.05f64..1.0) {
            let warp = |v: &Vec<f64>| v.iter().map(|x| (3.0 * x).exp() - 7.0).collect::<Vec<_>>();
            if let Ok(o) = empirical_opauc(&pos, &neg, beta) {
                prop_assert_eq!(o, empirical_opauc(&warp(&pos), &warp(&neg), beta).unwrap());
            }
            if let Ok(t) = empirical_tpauc(&pos, &neg, alpha, beta) {
                prop_assert_eq!(t, empirical_tpauc(&warp(&pos), &warp(&neg), alpha, beta).unwrap());
            }
        }

        #[test]
        fn top_sets_nest(neg in scores(80), b1 in 0.01f64..1.0, b2 in 0.01f64..1.0) {
            let (lo, hi) = if b1 <= b2 { (b1, b2) } else { (b2, b1) };
            let k_lo = floor_count(neg.len(), lo);
            let k_hi = floor_count(neg.len(), hi);
            let small = rank_desc(&neg)[..k_lo].to_vec();
            let large = rank_desc(&neg)[..k_hi].to_vec();
            prop_assert_eq!(&large[..k_lo], &small[..]);
        }
    }
}
