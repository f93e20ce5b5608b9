//! Exact gambler/prophet values by backward induction.
//!
//! For a distribution `X` and horizon `n`, the gambler's optimal value
//! satisfies `V_n = E[max{X, V_{n-1}}]` with `V_1 = E[X]`, and the optimal
//! rule accepts the i-th sample iff it strictly exceeds the continuation
//! value `V_{n-i}`. The prophet's value at horizon `k` is the mean of the
//! k-fold max distribution. Everything here is double precision with
//! compensated summation and no internal tolerances, so tables are
//! bit-stable and usable as regression oracles.

use thiserror::Error;

use crate::dist::FiniteDist;
use crate::sum::CompensatedSum;

#[derive(Debug, Error)]
pub enum DpError {
    #[error("prophet value zero: distribution has no positive mass above zero")]
    ZeroProphetValue,
    #[error("batch size {batch} does not divide horizon {horizon}")]
    BatchMismatch { batch: usize, horizon: usize },
}

/// Gambler values, prophet values, and acceptance thresholds for one
/// distribution at one horizon.
///
/// `gambler_values[k-1] = V_k`, `prophet_values[k-1] = E_k`, and
/// `thresholds[i-1] = V_{n-i}` is what the i-th sample must strictly exceed
/// to be accepted (`thresholds[n-1] = 0`).
#[derive(Debug, Clone)]
pub struct StoppingTable {
    dist: FiniteDist,
    gambler_values: Vec<f64>,
    prophet_values: Vec<f64>,
}

impl StoppingTable {
    /// Backward induction over `n >= 1` samples of `dist`.
    pub fn build(dist: &FiniteDist, n: usize) -> Self {
        assert!(n >= 1, "horizon must be at least 1");
        let mut gambler_values = Vec::with_capacity(n);
        let mut value = dist.mean();
        gambler_values.push(value);
        for _ in 1..n {
            value = expected_max_against(dist, value);
            gambler_values.push(value);
        }

        let support = dist.support();
        let cum = dist.cumulative();
        let mut prophet_values = Vec::with_capacity(n);
        for k in 1..=n {
            let mut acc = CompensatedSum::new();
            let mut prev = 0.0;
            for (&v, &c) in support.iter().zip(cum) {
                let ck = if c == 1.0 { 1.0 } else { c.powi(k as i32) };
                acc.add(v * (ck - prev));
                prev = ck;
            }
            prophet_values.push(acc.value());
        }

        Self {
            dist: dist.clone(),
            gambler_values,
            prophet_values,
        }
    }

    pub fn dist(&self) -> &FiniteDist {
        &self.dist
    }

    pub fn horizon(&self) -> usize {
        self.gambler_values.len()
    }

    /// `V_k` for `1 <= k <= n`.
    pub fn gambler_value(&self, k: usize) -> f64 {
        self.gambler_values[k - 1]
    }

    /// `E_k` for `1 <= k <= n`.
    pub fn prophet_value(&self, k: usize) -> f64 {
        self.prophet_values[k - 1]
    }

    pub fn gambler_values(&self) -> &[f64] {
        &self.gambler_values
    }

    pub fn prophet_values(&self) -> &[f64] {
        &self.prophet_values
    }

    /// The value the i-th sample (1-based) must strictly exceed: `V_{n-i}`,
    /// with `V_0 = 0`.
    pub fn threshold(&self, i: usize) -> f64 {
        let n = self.horizon();
        debug_assert!(1 <= i && i <= n);
        if i == n {
            0.0
        } else {
            self.gambler_values[n - i - 1]
        }
    }

    pub fn thresholds(&self) -> Vec<f64> {
        (1..=self.horizon()).map(|i| self.threshold(i)).collect()
    }

    /// Final gambler value `V_n`.
    pub fn value(&self) -> f64 {
        *self.gambler_values.last().unwrap()
    }

    /// Final prophet value `E_n`.
    pub fn prophet(&self) -> f64 {
        *self.prophet_values.last().unwrap()
    }
}

/// `E[max{X, t}] = t·P(X ≤ t) + Σ_{v > t} v·p_v`.
fn expected_max_against(dist: &FiniteDist, t: f64) -> f64 {
    let support = dist.support();
    let probs = dist.probs();
    let start = support.partition_point(|&v| v <= t);
    let below = if start == 0 {
        0.0
    } else {
        dist.cumulative()[start - 1]
    };
    let mut acc = CompensatedSum::new();
    acc.add(t * below);
    for (&v, &p) in support[start..].iter().zip(&probs[start..]) {
        acc.add(v * p);
    }
    acc.value()
}

/// `V_n / E_n`; errors when the prophet value is zero.
pub fn competitive_ratio(dist: &FiniteDist, n: usize) -> Result<f64, DpError> {
    let table = StoppingTable::build(dist, n);
    let prophet = table.prophet();
    if prophet <= 0.0 {
        return Err(DpError::ZeroProphetValue);
    }
    Ok(table.value() / prophet)
}

/// Optimal value of the batched game: `n` samples of `per_sample` revealed
/// `b` at a time, i.e. the gambler value at horizon `n/b` of the batch-max
/// distribution.
pub fn batch_value(per_sample: &FiniteDist, n: usize, b: usize) -> Result<f64, DpError> {
    if b == 0 || n % b != 0 {
        return Err(DpError::BatchMismatch {
            batch: b,
            horizon: n,
        });
    }
    let batch_max = per_sample.max_power(b);
    Ok(StoppingTable::build(&batch_max, n / b).value())
}

/// Per-step acceptance probabilities `q_i = P(X > V_{n-i})` for the
/// threshold rule on `horizon` samples of `dist` (strict exceedance;
/// `q_horizon = P(X > 0)`).
pub fn acceptance_probs(dist: &FiniteDist, horizon: usize) -> Vec<f64> {
    let table = StoppingTable::build(dist, horizon);
    (1..=horizon)
        .map(|i| dist.survival(table.threshold(i)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dist(pairs: &[(f64, f64)]) -> FiniteDist {
        FiniteDist::from_pairs(pairs).unwrap()
    }

    fn coin() -> FiniteDist {
        dist(&[(0.0, 0.5), (1.0, 0.5)])
    }

    fn three_point() -> FiniteDist {
        dist(&[(0.0, 0.5), (1.0, 0.4), (10.0, 0.1)])
    }

    #[test]
    fn coin_table_by_hand() {
        let t = StoppingTable::build(&coin(), 3);
        assert_eq!(t.gambler_values(), &[0.5, 0.75, 0.875]);
        assert_eq!(t.prophet_values(), &[0.5, 0.75, 0.875]);
        assert_eq!(t.thresholds(), vec![0.75, 0.5, 0.0]);
    }

    #[test]
    fn constant_dist_is_flat() {
        let c = FiniteDist::point_mass(2.5).unwrap();
        let t = StoppingTable::build(&c, 7);
        for k in 1..=7 {
            assert_eq!(t.gambler_value(k), 2.5);
            assert_eq!(t.prophet_value(k), 2.5);
        }
    }

    #[test]
    fn three_point_two_steps() {
        let t = StoppingTable::build(&three_point(), 2);
        assert!((t.gambler_value(2) - 2.26).abs() < 1e-12);
        assert!((t.prophet_value(2) - 2.46).abs() < 1e-12);
    }

    #[test]
    fn values_monotone_and_ordered() {
        let t = StoppingTable::build(&three_point(), 12);
        for k in 2..=12 {
            assert!(t.gambler_value(k) >= t.gambler_value(k - 1));
            assert!(t.prophet_value(k) >= t.prophet_value(k - 1));
        }
        for k in 1..=12 {
            assert!(t.gambler_value(k) <= t.prophet_value(k) + 1e-15);
        }
    }

    #[test]
    fn ratio_examples() {
        assert_eq!(competitive_ratio(&coin(), 3).unwrap(), 1.0);
        assert_eq!(competitive_ratio(&three_point(), 1).unwrap(), 1.0);
        let r = competitive_ratio(&three_point(), 2).unwrap();
        assert!((r - 2.26 / 2.46).abs() < 1e-15);
        assert!((r - 0.9186991869918699).abs() < 1e-12);
    }

    #[test]
    fn ratio_rejects_zero_distribution() {
        let zero = FiniteDist::point_mass(0.0).unwrap();
        assert!(matches!(
            competitive_ratio(&zero, 3),
            Err(DpError::ZeroProphetValue)
        ));
    }

    #[test]
    fn batch_value_examples() {
        let v = batch_value(&coin(), 4, 2).unwrap();
        assert!((v - 0.9375).abs() < 1e-15);

        // Single batch = prophet; batch size one = standard game.
        let d = three_point();
        let t = StoppingTable::build(&d, 6);
        assert!((batch_value(&d, 6, 6).unwrap() - t.prophet_value(6)).abs() < 1e-12);
        assert!((batch_value(&d, 6, 1).unwrap() - t.gambler_value(6)).abs() < 1e-12);

        assert!(batch_value(&d, 6, 4).is_err());
    }

    #[test]
    fn acceptance_prob_examples() {
        let q = acceptance_probs(&dist(&[(0.0, 0.25), (1.0, 0.75)]), 2);
        assert_eq!(q, vec![0.75, 0.75]);

        let q = acceptance_probs(&FiniteDist::point_mass(1.0).unwrap(), 2);
        assert_eq!(q, vec![0.0, 1.0]);

        // Thresholds decrease with i, so q_i never decreases.
        let q = acceptance_probs(&three_point().max_power(3), 9);
        for w in q.windows(2) {
            assert!(w[1] >= w[0]);
        }
    }

    #[test]
    fn ratio_scale_invariant() {
        let d = three_point();
        for n in [2, 5, 9] {
            let base = competitive_ratio(&d, n).unwrap();
            for c in [0.125, 3.0, 1e4] {
                let scaled = competitive_ratio(&d.scale(c).unwrap(), n).unwrap();
                assert!((scaled - base).abs() < 1e-12, "n={n} c={c}");
            }
        }
    }
}
