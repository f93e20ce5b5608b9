//! Numerical evaluators for the window-vs-batch improvement gap and for
//! upper bounds on the windowed competitive ratio.
//!
//! `delta_gap` lower-bounds how much the window-upgrade policy gains over
//! the optimal aligned-batch rule. `clean_upper_bound` is a closed-form
//! ceiling parameterized only by `(k, l, α_l)`; `tight_upper_bound`
//! sharpens it using an explicit near-extremal distribution. `bound_sweep`
//! assembles per-k report rows, optimizing the choice of `l`.

use serde::Serialize;
use thiserror::Error;

use crate::dist::FiniteDist;
use crate::dp::StoppingTable;
use crate::search::{AlphaTable, Provenance};
use crate::sum::CompensatedSum;

#[derive(Debug, Error)]
pub enum BoundsError {
    #[error("l must satisfy 2 <= l <= k, got l={l}, k={k}")]
    BadL { l: usize, k: usize },
    #[error("delta must be nonnegative, got {0}")]
    BadDelta(f64),
    #[error("alpha_l * delta = {0} >= 1; the correction term diverges")]
    DeltaTooLarge(f64),
    #[error("no alpha estimate available for k={0}")]
    MissingAlpha(usize),
    #[error("distribution error: {0}")]
    Dist(#[from] crate::dist::DistError),
}

/// Expected improvement of the window-upgrade policy over the optimal
/// aligned-batch rule, for a game of `k` batches whose batch maxima are
/// distributed as `batch_max`.
///
/// Sums, over each batch `i < k` reached with probability `Π_{j<i}(1-q_j)`,
/// one quarter of the expected exceedance spread: both this and the next
/// batch max land strictly above the step-i threshold (probability `q_i²`),
/// they share a window and arrive in improving order (factor ¼), and the
/// improvement is the gap between the two. The conditional spread is
/// computed by exact enumeration over ordered support pairs, so every term
/// is nonnegative.
pub fn delta_gap(batch_max: &FiniteDist, k: usize) -> f64 {
    assert!(k >= 2, "delta_gap needs at least 2 batches");
    let table = StoppingTable::build(batch_max, k);
    let support = batch_max.support();
    let probs = batch_max.probs();

    let mut total = CompensatedSum::new();
    let mut reach = 1.0;
    for i in 1..k {
        let threshold = table.threshold(i);
        let q = batch_max.survival(threshold);
        if q > 0.0 {
            // E[(B - A)⁺ · 1{A, B > threshold}] over ordered pairs, times ½
            // for the shared-window chance; (B - A)⁺ already halves the
            // two orderings.
            let start = support.partition_point(|&v| v <= threshold);
            let mut spread = CompensatedSum::new();
            for hi in start..support.len() {
                for lo in start..hi {
                    spread.add(2.0 * probs[hi] * probs[lo] * (support[hi] - support[lo]));
                }
            }
            total.add(0.25 * spread.value() * reach);
        }
        reach *= 1.0 - q;
    }
    total.value()
}

/// Closed-form upper bound `α_l + ((l-1)/(l-1.35))·(1 - (0.35/(l-1))^(l/k))`
/// on the windowed ratio at window fraction `1/k`.
pub fn clean_upper_bound(k: usize, l: usize, alpha_l: f64) -> Result<f64, BoundsError> {
    if l < 2 || l > k {
        return Err(BoundsError::BadL { l, k });
    }
    let lf = l as f64;
    let kf = k as f64;
    let tail = (0.35 / (lf - 1.0)).powf(lf / kf);
    Ok(alpha_l + (lf - 1.0) / (lf - 1.35) * (1.0 - tail))
}

/// Sharper upper bound evaluated on an explicit per-sample distribution
/// `d_prime` whose aggregate over a `1/k` window fraction matches the
/// aggregate of an `l`-sample hard distribution over a `1/l` fraction
/// (equivalently: the hard distribution is `d_prime.cdf_power(l/k)`).
///
/// The failure term sums, per batch stage `j` of the l-stage game, the
/// expected payout when some late sample strictly exceeds the stage
/// threshold `V_{j-2}` (taken as 0 for `j <= 2`, so the boundary events
/// degenerate to "some late sample is nonzero"), discounted by the
/// probability that no later stage fails, with per-stage no-failure factors
/// `P(X <= V_{f-1})`.
pub fn tight_upper_bound(
    d_prime: &FiniteDist,
    l: usize,
    k: usize,
    alpha_l: f64,
    delta: f64,
) -> Result<f64, BoundsError> {
    if l < 2 || l > k {
        return Err(BoundsError::BadL { l, k });
    }
    if delta < 0.0 {
        return Err(BoundsError::BadDelta(delta));
    }
    if alpha_l * delta >= 1.0 {
        return Err(BoundsError::DeltaTooLarge(alpha_l * delta));
    }

    let hard = d_prime.cdf_power(l as f64 / k as f64)?;
    let table = StoppingTable::build(&hard, l);
    let e_l = table.prophet();

    // Stage thresholds V_{j-2} for j = 1..=l, with V_{-1} = V_0 = 0.
    let stage_threshold =
        |j: usize| -> f64 { if j <= 2 { 0.0 } else { table.gambler_value(j - 2) } };

    // Suffix products of the no-failure factors P(X' <= V_{f-1}).
    let mut suffix = vec![1.0; l + 1];
    for f in (2..=l).rev() {
        suffix[f - 1] = suffix[f] * d_prime.cdf(table.gambler_value(f - 1));
    }

    let support = d_prime.support();
    let cum = d_prime.cumulative();
    let mut double_sum = CompensatedSum::new();
    for j in 1..=l {
        let s_theta = d_prime.cdf(stage_threshold(j));
        if s_theta >= 1.0 {
            continue;
        }
        // Σ v_i (s_i^{k-1}(s_i - sθ) - s_{i-1}^{k-1}(s_{i-1} - sθ))⁺-chain:
        // the CDF increments of max{k-1 free draws, one draw above sθ}.
        let mut prev_g = 0.0;
        let mut inner = CompensatedSum::new();
        for (&v, &s) in support.iter().zip(cum) {
            if s <= s_theta {
                continue;
            }
            let g = s.powi(k as i32 - 1) * (s - s_theta);
            inner.add(v * (g - prev_g));
            prev_g = g;
        }
        double_sum.add(inner.value() * suffix[j]);
    }

    let delta_term = delta * alpha_l * alpha_l / (1.0 - delta * alpha_l);
    Ok(alpha_l + delta_term + double_sum.value() / e_l)
}

/// One row of a bound table.
#[derive(Debug, Clone, Serialize)]
pub struct BoundReport {
    pub k: usize,
    /// Stage count chosen for the upper bound.
    pub l: usize,
    pub alpha_l: f64,
    pub alpha_l_provenance: Provenance,
    /// Lower bound: the α_k estimate.
    pub lower: f64,
    pub lower_provenance: Provenance,
    /// Guaranteed window-over-batch gap for the k-batch game on the k-witness.
    pub delta_gap: Option<f64>,
    pub clean_bound: f64,
    pub tight_bound: Option<f64>,
    /// Best available upper bound: min of clean and tight at the chosen l.
    pub upper: f64,
}

/// Builds one [`BoundReport`] per `k`, choosing the `l` that minimizes the
/// tight bound where a witness distribution is available and the clean
/// bound otherwise. `delta` is the closeness parameter of the tight bound.
pub fn bound_sweep(
    k_list: &[usize],
    alphas: &AlphaTable,
    delta: f64,
) -> Result<Vec<BoundReport>, BoundsError> {
    let mut rows = Vec::with_capacity(k_list.len());
    for &k in k_list {
        let lower_entry = alphas.get(k).ok_or(BoundsError::MissingAlpha(k))?;

        let mut best: Option<BoundReport> = None;
        for entry in alphas.entries() {
            let l = entry.k;
            if l < 2 || l > k {
                continue;
            }
            let clean = clean_upper_bound(k, l, entry.alpha)?;
            let tight = match &entry.witness {
                Some(witness) => {
                    let d_prime = witness.cdf_power(k as f64 / l as f64)?;
                    Some(tight_upper_bound(&d_prime, l, k, entry.alpha, delta)?)
                }
                None => None,
            };
            let upper = tight.map_or(clean, |t| t.min(clean));
            if best.as_ref().is_none_or(|b| upper < b.upper) {
                best = Some(BoundReport {
                    k,
                    l,
                    alpha_l: entry.alpha,
                    alpha_l_provenance: entry.provenance,
                    lower: lower_entry.alpha,
                    lower_provenance: lower_entry.provenance,
                    delta_gap: None,
                    clean_bound: clean,
                    tight_bound: tight,
                    upper,
                });
            }
        }
        let mut row = best.ok_or(BoundsError::MissingAlpha(k))?;
        if k >= 2 {
            row.delta_gap = lower_entry.witness.as_ref().map(|w| delta_gap(w, k));
        }
        rows.push(row);
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dist(pairs: &[(f64, f64)]) -> FiniteDist {
        FiniteDist::from_pairs(pairs).unwrap()
    }

    #[test]
    fn delta_zero_for_degenerate_exceedance() {
        // Constant distribution: the two exceedances always tie.
        let c = FiniteDist::point_mass(2.0).unwrap();
        assert_eq!(delta_gap(&c, 4), 0.0);

        // Only one support point above every threshold.
        let d = dist(&[(0.0, 0.25), (1.0, 0.75)]);
        assert_eq!(delta_gap(&d, 2), 0.0);

        // Every threshold is at least the mean 2.46, so the exceedance set
        // is the single atom at 10 for all stages.
        let d = dist(&[(0.0, 0.25), (1.0, 0.56), (10.0, 0.19)]);
        assert_eq!(delta_gap(&d, 2), 0.0);
    }

    #[test]
    fn delta_positive_case_by_hand() {
        // Mean 2.9 < 3, so both 3 and 10 exceed the stage-1 threshold:
        // q₁ = 0.5, E[(B-A)⁺·1] over the pair = 2·0.3·0.2·7 = 0.84,
        // Δ = ¼·0.84 = 0.21.
        let d = dist(&[(0.0, 0.5), (3.0, 0.3), (10.0, 0.2)]);
        let delta = delta_gap(&d, 2);
        assert!((delta - 0.21).abs() < 1e-15, "delta={delta}");
    }

    #[test]
    fn delta_nonnegative_on_random_inputs() {
        let mut state = 0x1234_5678_u64;
        let mut next = move || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            (state >> 11) as f64 / (1u64 << 53) as f64
        };
        for _ in 0..200 {
            let m = 2 + (next() * 4.0) as usize;
            let mut value = 0.0;
            let mut support = Vec::with_capacity(m);
            let mut weights = Vec::with_capacity(m);
            for _ in 0..m {
                support.push(value);
                weights.push(0.05 + next());
                value += 0.1 + next() * 3.0;
            }
            let d = FiniteDist::from_weights(support, weights).unwrap();
            for k in [2, 3, 7] {
                assert!(delta_gap(&d, k) >= 0.0);
            }
        }
    }

    #[test]
    fn clean_bound_examples() {
        // (1 - √0.35) / 0.65 by direct arithmetic.
        let b = clean_upper_bound(4, 2, 0.0).unwrap();
        assert!((b - (1.0 - 0.35f64.sqrt()) / 0.65).abs() < 1e-15, "b={b}");
        assert!((b - 0.628295).abs() < 1e-6, "b={b}");

        let b = clean_upper_bound(10_000, 100, 0.7479).unwrap();
        assert!((b - 0.8030).abs() < 5e-4, "b={b}");

        // Strictly decreasing in k at fixed l.
        let b1 = clean_upper_bound(100, 100, 0.75).unwrap();
        let b2 = clean_upper_bound(1_000, 100, 0.75).unwrap();
        let b3 = clean_upper_bound(10_000, 100, 0.75).unwrap();
        assert!(b1 > b2 && b2 > b3);

        assert!(clean_upper_bound(10, 1, 0.75).is_err());
        assert!(clean_upper_bound(10, 11, 0.75).is_err());
    }

    #[test]
    fn tight_bound_degenerate_point_mass() {
        // For a positive point mass the two boundary stages ("some late
        // sample is nonzero") fire with certainty and each contributes the
        // full prophet mass, so the failure term is exactly 2.
        let c = FiniteDist::point_mass(3.0).unwrap();
        let alpha = 0.75;
        let delta = 1e-4;
        let b = tight_upper_bound(&c, 4, 16, alpha, delta).unwrap();
        let delta_term = delta * alpha * alpha / (1.0 - delta * alpha);
        assert!((b - (alpha + delta_term + 2.0)).abs() < 1e-12, "b={b}");
    }

    #[test]
    fn tight_bound_delta_zero_drops_correction() {
        let d = dist(&[(0.0, 0.6), (1.0, 0.3), (5.0, 0.1)]);
        let with = tight_upper_bound(&d, 3, 9, 0.75, 1e-3).unwrap();
        let without = tight_upper_bound(&d, 3, 9, 0.75, 0.0).unwrap();
        let delta_term = 1e-3 * 0.75 * 0.75 / (1.0 - 1e-3 * 0.75);
        assert!((with - without - delta_term).abs() < 1e-15);
    }

    #[test]
    fn tight_bound_validations() {
        let c = FiniteDist::point_mass(1.0).unwrap();
        assert!(matches!(
            tight_upper_bound(&c, 2, 4, 0.9, 2.0),
            Err(BoundsError::DeltaTooLarge(_))
        ));
        assert!(tight_upper_bound(&c, 1, 4, 0.9, 0.0).is_err());
        assert!(tight_upper_bound(&c, 5, 4, 0.9, 0.0).is_err());
        assert!(tight_upper_bound(&c, 2, 4, 0.9, -0.1).is_err());
    }
}
