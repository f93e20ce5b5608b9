//! Finite discrete distributions and the transforms the rest of the crate
//! is built on.
//!
//! [`FiniteDist`] is the universal carrier: a strictly increasing list of
//! nonnegative support values with strictly positive masses summing to one.
//! Construction runs a hygiene pass (merge near-coincident points, drop
//! negligible mass, renormalize) so that downstream CDF powers and roots can
//! be composed without invariants decaying.
//!
//! All transforms are pure and return freshly validated distributions; a
//! `FiniteDist` is immutable after construction and safe to share across
//! threads.

use std::fmt;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::sum::{compensated_dot, compensated_sum, CompensatedSum};

/// Support points closer than this are merged into one atom.
pub const MERGE_EPS: f64 = 1e-12;
/// Atoms with less mass than this are dropped and the rest renormalized.
pub const DROP_EPS: f64 = 1e-15;
/// Tolerance on Σ probs accepted by the JSON loader.
pub const LOAD_SUM_TOL: f64 = 1e-9;
/// Tolerance on Σ probs accepted by [`FiniteDist::new`].
const NEW_SUM_TOL: f64 = 1e-6;

#[derive(Debug, Error)]
pub enum DistError {
    #[error("support and probs have different lengths ({support} vs {probs})")]
    LengthMismatch { support: usize, probs: usize },
    #[error("distribution has no support")]
    Empty,
    #[error("support value at index {index} is not a finite nonnegative number: {value}")]
    BadValue { index: usize, value: f64 },
    #[error("probability at index {index} is not finite and nonnegative: {prob}")]
    BadProb { index: usize, prob: f64 },
    #[error("support is not ascending at index {index}: {prev} then {next}")]
    UnsortedSupport { index: usize, prev: f64, next: f64 },
    #[error("probabilities sum to {sum}, outside the accepted tolerance {tol}")]
    BadSum { sum: f64, tol: f64 },
    #[error("all mass fell below the drop threshold")]
    AllMassDropped,
    #[error("invalid argument: {0}")]
    BadArgument(String),
    #[error("failed to read distribution file: {0}")]
    Io(#[from] std::io::Error),
    #[error("failed to parse distribution file: {0}")]
    Parse(#[from] serde_json::Error),
}

/// A discrete distribution with finite nonnegative support.
#[derive(Debug, Clone, PartialEq)]
pub struct FiniteDist {
    support: Vec<f64>,
    probs: Vec<f64>,
    /// Cumulative probabilities; `cum[last] == 1.0` exactly.
    cum: Vec<f64>,
}

impl fmt::Display for FiniteDist {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, (v, p)) in self.support.iter().zip(&self.probs).enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{v}:{p}")?;
        }
        write!(f, "}}")
    }
}

/// On-disk JSON shape for a distribution.
#[derive(Serialize, Deserialize)]
struct DistFile {
    support: Vec<f64>,
    probs: Vec<f64>,
}

/// A distribution loaded from disk together with the total mass the hygiene
/// pass had to move (normalization slack + merged + dropped mass).
#[derive(Debug, Clone)]
pub struct LoadedDist {
    pub dist: FiniteDist,
    pub adjustment: f64,
}

impl FiniteDist {
    /// Builds a distribution from an ascending support and matching masses.
    ///
    /// Runs the hygiene pass: points within [`MERGE_EPS`] are merged (mass-
    /// weighted), atoms below [`DROP_EPS`] are dropped, and the result is
    /// renormalized. The input sum must already be within `1e-6` of one;
    /// use [`FiniteDist::from_weights`] for unnormalized weights.
    pub fn new(support: Vec<f64>, probs: Vec<f64>) -> Result<Self, DistError> {
        let sum = validate_raw(&support, &probs)?;
        if (sum - 1.0).abs() > NEW_SUM_TOL {
            return Err(DistError::BadSum {
                sum,
                tol: NEW_SUM_TOL,
            });
        }
        Ok(Self::build_hygienic(support, probs).0)
    }

    /// Builds a distribution from arbitrary positive weights, normalizing.
    pub fn from_weights(support: Vec<f64>, weights: Vec<f64>) -> Result<Self, DistError> {
        validate_raw(&support, &weights)?;
        Ok(Self::build_hygienic(support, weights).0)
    }

    /// Convenience constructor from unsorted `(value, mass)` pairs.
    pub fn from_pairs(pairs: &[(f64, f64)]) -> Result<Self, DistError> {
        let mut sorted: Vec<(f64, f64)> = pairs.to_vec();
        sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
        let (support, probs) = sorted.into_iter().unzip();
        Self::new(support, probs)
    }

    /// A distribution putting all mass on one value.
    pub fn point_mass(value: f64) -> Result<Self, DistError> {
        Self::new(vec![value], vec![1.0])
    }

    /// Hygiene pass shared by every constructor. Returns the distribution
    /// and the total mass it had to move or drop.
    fn build_hygienic(support: Vec<f64>, probs: Vec<f64>) -> (Self, f64) {
        let raw_sum = compensated_sum(probs.iter().copied());
        let mut adjustment = (raw_sum - 1.0).abs();

        // Merge near-coincident support points, mass-weighted.
        let mut merged: Vec<(f64, f64)> = Vec::with_capacity(support.len());
        for (&v, &p) in support.iter().zip(&probs) {
            if p == 0.0 {
                continue;
            }
            match merged.last_mut() {
                Some((mv, mp)) if v - *mv <= MERGE_EPS => {
                    adjustment += p.min(*mp);
                    let total = *mp + p;
                    *mv = (*mv * *mp + v * p) / total;
                    *mp = total;
                }
                _ => merged.push((v, p)),
            }
        }

        // Normalize, then drop negligible atoms and renormalize.
        let scale = 1.0 / compensated_sum(merged.iter().map(|&(_, p)| p));
        let mut kept: Vec<(f64, f64)> = Vec::with_capacity(merged.len());
        for (v, p) in merged {
            let p = p * scale;
            if p < DROP_EPS {
                adjustment += p;
            } else {
                kept.push((v, p));
            }
        }
        assert!(!kept.is_empty(), "all mass dropped by hygiene pass");

        let rescale = 1.0 / compensated_sum(kept.iter().map(|&(_, p)| p));
        let support: Vec<f64> = kept.iter().map(|&(v, _)| v).collect();
        let probs: Vec<f64> = kept.iter().map(|&(_, p)| p * rescale).collect();

        let mut cum = Vec::with_capacity(probs.len());
        let mut acc = CompensatedSum::new();
        for &p in &probs {
            acc.add(p);
            cum.push(acc.value().min(1.0));
        }
        *cum.last_mut().unwrap() = 1.0;

        (
            Self {
                support,
                probs,
                cum,
            },
            adjustment,
        )
    }

    pub fn support(&self) -> &[f64] {
        &self.support
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    /// Cumulative probabilities aligned with `support`.
    pub fn cumulative(&self) -> &[f64] {
        &self.cum
    }

    pub fn len(&self) -> usize {
        self.support.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn min_value(&self) -> f64 {
        self.support[0]
    }

    pub fn max_value(&self) -> f64 {
        *self.support.last().unwrap()
    }

    /// Σ vᵢ·pᵢ with compensated summation.
    pub fn mean(&self) -> f64 {
        compensated_dot(&self.support, &self.probs)
    }

    /// P(X ≤ x).
    pub fn cdf(&self, x: f64) -> f64 {
        let idx = self.support.partition_point(|&v| v <= x);
        if idx == 0 {
            0.0
        } else {
            self.cum[idx - 1]
        }
    }

    /// P(X > x).
    pub fn survival(&self, x: f64) -> f64 {
        1.0 - self.cdf(x)
    }

    /// The smallest support value `v` with `P(X > v) ≤ q`.
    ///
    /// `q = 1` returns the smallest support value, `q = 0` the largest.
    pub fn quantile_upper(&self, q: f64) -> f64 {
        assert!((0.0..=1.0).contains(&q), "q must lie in [0, 1], got {q}");
        let idx = self.cum.partition_point(|&c| 1.0 - c > q);
        // idx < len because 1 - cum[last] = 0 <= q always.
        self.support[idx]
    }

    /// Inverse-CDF sample for a uniform draw `u ∈ [0, 1)`.
    #[inline]
    pub fn sample_at(&self, u: f64) -> f64 {
        self.support[self.cum.partition_point(|&c| c <= u)]
    }

    /// Distribution of `max{X₁, …, X_k}` for i.i.d. draws from `self`.
    ///
    /// Implemented as CDF exponentiation `Sᵢ ↦ Sᵢᵏ`.
    pub fn max_power(&self, k: usize) -> Self {
        assert!(k >= 1, "max_power requires k >= 1");
        if k == 1 {
            return self.clone();
        }
        self.cdf_power_unchecked(|s| powi_checked(s, k))
    }

    /// The unique distribution whose `max_power(k)` equals `self`.
    ///
    /// Implemented as the CDF k-th root `Sᵢ ↦ Sᵢ^(1/k)`.
    pub fn kth_root(&self, k: usize) -> Self {
        assert!(k >= 1, "kth_root requires k >= 1");
        if k == 1 {
            return self.clone();
        }
        let inv = 1.0 / k as f64;
        self.cdf_power_unchecked(|s| s.powf(inv))
    }

    /// Distribution with CDF `Sᵢ ↦ Sᵢᵗ` for a real exponent `t > 0`.
    ///
    /// Generalizes [`FiniteDist::max_power`] / [`FiniteDist::kth_root`] to
    /// fractional aggregation levels.
    pub fn cdf_power(&self, t: f64) -> Result<Self, DistError> {
        if !(t.is_finite() && t > 0.0) {
            return Err(DistError::BadArgument(format!(
                "cdf_power exponent must be finite and positive, got {t}"
            )));
        }
        Ok(self.cdf_power_unchecked(|s| s.powf(t)))
    }

    fn cdf_power_unchecked(&self, f: impl Fn(f64) -> f64) -> Self {
        let mut support = Vec::with_capacity(self.len());
        let mut probs = Vec::with_capacity(self.len());
        let mut prev = 0.0;
        for (&v, &c) in self.support.iter().zip(&self.cum) {
            let pc = if c == 1.0 { 1.0 } else { f(c) };
            support.push(v);
            probs.push(pc - prev);
            prev = pc;
        }
        Self::build_hygienic(support, probs).0
    }

    /// Mean-preserving spread of the mass inside `[a, b]` onto the endpoints.
    ///
    /// Mass at `y ∈ [a, b]` moves to `a` with weight `(b−y)/(b−a)` and to
    /// `b` with weight `(y−a)/(b−a)`; mass outside the interval is
    /// untouched. Requires `0 ≤ a < b`.
    pub fn dilate(&self, a: f64, b: f64) -> Result<Self, DistError> {
        if !(a.is_finite() && b.is_finite() && 0.0 <= a && a < b) {
            return Err(DistError::BadArgument(format!(
                "dilate requires 0 <= a < b, got a={a}, b={b}"
            )));
        }
        let width = b - a;
        let mut mass_a = 0.0;
        let mut mass_b = 0.0;
        let mut pairs: Vec<(f64, f64)> = Vec::with_capacity(self.len() + 2);
        for (&v, &p) in self.support.iter().zip(&self.probs) {
            if v < a || v > b {
                pairs.push((v, p));
            } else {
                mass_a += p * ((b - v) / width);
                mass_b += p * ((v - a) / width);
            }
        }
        if mass_a > 0.0 {
            pairs.push((a, mass_a));
        }
        if mass_b > 0.0 {
            pairs.push((b, mass_b));
        }
        pairs.sort_by(|x, y| x.0.total_cmp(&y.0));
        let (support, probs) = pairs.into_iter().unzip();
        Ok(Self::build_hygienic(support, probs).0)
    }

    /// With probability `p` a draw from `self`, otherwise 0.
    pub fn zero_pad(&self, p: f64) -> Result<Self, DistError> {
        if !(p > 0.0 && p <= 1.0) {
            return Err(DistError::BadArgument(format!(
                "zero_pad requires 0 < p <= 1, got {p}"
            )));
        }
        if p == 1.0 {
            return Ok(self.clone());
        }
        let mut support = Vec::with_capacity(self.len() + 1);
        let mut probs = Vec::with_capacity(self.len() + 1);
        let mut zero_mass = 1.0 - p;
        let mut iter = self.support.iter().zip(&self.probs);
        if self.support[0] == 0.0 {
            zero_mass += p * self.probs[0];
            iter.next();
        }
        support.push(0.0);
        probs.push(zero_mass);
        for (&v, &q) in iter {
            support.push(v);
            probs.push(p * q);
        }
        Ok(Self::build_hygienic(support, probs).0)
    }

    /// Every support value multiplied by `c > 0`.
    pub fn scale(&self, c: f64) -> Result<Self, DistError> {
        if !(c.is_finite() && c > 0.0) {
            return Err(DistError::BadArgument(format!(
                "scale requires c > 0, got {c}"
            )));
        }
        let support = self.support.iter().map(|&v| v * c).collect();
        Ok(Self::build_hygienic(support, self.probs.clone()).0)
    }

    /// Rescaled copy with mean exactly one.
    pub fn normalized_to_unit_mean(&self) -> Result<Self, DistError> {
        let m = self.mean();
        if m <= 0.0 {
            return Err(DistError::BadArgument(
                "cannot normalize a zero-mean distribution".into(),
            ));
        }
        self.scale(1.0 / m)
    }

    /// Parses the JSON distribution format and reports the hygiene
    /// adjustment the loader applied.
    pub fn load_json(text: &str) -> Result<LoadedDist, DistError> {
        let raw: DistFile = serde_json::from_str(text)?;
        let sum = validate_raw(&raw.support, &raw.probs)?;
        if (sum - 1.0).abs() > LOAD_SUM_TOL {
            return Err(DistError::BadSum {
                sum,
                tol: LOAD_SUM_TOL,
            });
        }
        let (dist, adjustment) = Self::build_hygienic(raw.support, raw.probs);
        Ok(LoadedDist { dist, adjustment })
    }

    pub fn load_json_file(path: &Path) -> Result<LoadedDist, DistError> {
        Self::load_json(&fs::read_to_string(path)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&DistFile {
            support: self.support.clone(),
            probs: self.probs.clone(),
        })
        .expect("distribution serialization cannot fail")
    }

    /// Largest pointwise difference against `other`, taken over the union
    /// of both supports (missing atoms count as zero mass).
    pub fn pointwise_distance(&self, other: &Self) -> f64 {
        let mut worst: f64 = 0.0;
        let mut j = 0;
        for (&v, &p) in self.support.iter().zip(&self.probs) {
            while j < other.len() && other.support[j] < v - MERGE_EPS {
                worst = worst.max(other.probs[j]);
                j += 1;
            }
            if j < other.len() && (other.support[j] - v).abs() <= MERGE_EPS {
                worst = worst.max((other.probs[j] - p).abs());
                j += 1;
            } else {
                worst = worst.max(p);
            }
        }
        for &p in &other.probs[j..] {
            worst = worst.max(p);
        }
        worst
    }
}

fn validate_raw(support: &[f64], probs: &[f64]) -> Result<f64, DistError> {
    if support.len() != probs.len() {
        return Err(DistError::LengthMismatch {
            support: support.len(),
            probs: probs.len(),
        });
    }
    if support.is_empty() {
        return Err(DistError::Empty);
    }
    for (index, &value) in support.iter().enumerate() {
        if !value.is_finite() || value < 0.0 {
            return Err(DistError::BadValue { index, value });
        }
        if index > 0 && value < support[index - 1] {
            return Err(DistError::UnsortedSupport {
                index,
                prev: support[index - 1],
                next: value,
            });
        }
    }
    let mut sum = CompensatedSum::new();
    let mut any_positive = false;
    for (index, &prob) in probs.iter().enumerate() {
        if !prob.is_finite() || prob < 0.0 {
            return Err(DistError::BadProb { index, prob });
        }
        any_positive |= prob > 0.0;
        sum.add(prob);
    }
    if !any_positive {
        return Err(DistError::AllMassDropped);
    }
    Ok(sum.value())
}

/// `s^k` by binary exponentiation; stays in [0, 1] for s in [0, 1].
fn powi_checked(s: f64, k: usize) -> f64 {
    debug_assert!(k <= i32::MAX as usize);
    s.powi(k as i32)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dist(pairs: &[(f64, f64)]) -> FiniteDist {
        FiniteDist::from_pairs(pairs).unwrap()
    }

    fn three_point() -> FiniteDist {
        dist(&[(0.0, 0.5), (1.0, 0.4), (10.0, 0.1)])
    }

    #[test]
    fn mean_examples() {
        assert_eq!(dist(&[(0.0, 0.5), (1.0, 0.5)]).mean(), 0.5);
        assert_eq!(dist(&[(1.0, 1.0)]).mean(), 1.0);
        assert!((three_point().mean() - 1.4).abs() < 1e-15);
    }

    #[test]
    fn cdf_and_quantile_examples() {
        let d = dist(&[(0.0, 0.25), (1.0, 0.75)]);
        assert_eq!(d.cdf(0.0), 0.25);
        assert_eq!(d.cdf(-0.5), 0.0);
        assert_eq!(d.cdf(2.0), 1.0);
        assert_eq!(d.quantile_upper(0.75), 0.0);

        let t = three_point();
        assert_eq!(t.quantile_upper(0.05), 10.0);
        assert_eq!(t.quantile_upper(1.0), 0.0);
        assert_eq!(t.quantile_upper(0.0), 10.0);
    }

    #[test]
    fn max_power_examples() {
        let d = dist(&[(0.0, 0.5), (1.0, 0.5)]).max_power(2);
        assert_eq!(d.support(), &[0.0, 1.0]);
        assert!((d.probs()[0] - 0.25).abs() < 1e-15);
        assert!((d.probs()[1] - 0.75).abs() < 1e-15);

        let t = three_point();
        assert_eq!(t.max_power(1), t);

        let t2 = t.max_power(2);
        assert!((t2.probs()[0] - 0.25).abs() < 1e-15);
        assert!((t2.probs()[1] - 0.56).abs() < 1e-15);
        assert!((t2.probs()[2] - 0.19).abs() < 1e-15);
    }

    #[test]
    fn kth_root_examples() {
        let d = dist(&[(0.0, 0.25), (1.0, 0.75)]).kth_root(2);
        assert!((d.probs()[0] - 0.5).abs() < 1e-15);
        assert!((d.probs()[1] - 0.5).abs() < 1e-15);

        let t = three_point();
        assert_eq!(t.kth_root(1), t);
        let rt = t.max_power(5).kth_root(5);
        assert!(rt.pointwise_distance(&t) < 1e-12);
    }

    /// Top-down construction peeling the largest atom first: choose
    /// p'_max so (1 − p'_max)^k = 1 − p_max, recurse on the rest.
    fn kth_root_recursive(d: &FiniteDist, k: usize) -> Vec<(f64, f64)> {
        let m = d.len();
        let v_max = d.support()[m - 1];
        let p_max = d.probs()[m - 1];
        if m == 1 {
            return vec![(v_max, 1.0)];
        }
        let p_root = 1.0 - (1.0 - p_max).powf(1.0 / k as f64);
        let rest_scale = 1.0 / (1.0 - p_max);
        let rest = FiniteDist::from_weights(
            d.support()[..m - 1].to_vec(),
            d.probs()[..m - 1].iter().map(|p| p * rest_scale).collect(),
        )
        .unwrap();
        let mut out: Vec<(f64, f64)> = kth_root_recursive(&rest, k)
            .into_iter()
            .map(|(v, p)| (v, p * (1.0 - p_root)))
            .collect();
        out.push((v_max, p_root));
        out
    }

    #[test]
    fn kth_root_matches_recursive_construction() {
        let cases = [
            three_point(),
            dist(&[(0.2, 0.3), (1.0, 0.3), (2.5, 0.2), (7.0, 0.2)]),
            dist(&[(0.0, 0.6), (4.0, 0.4)]),
        ];
        for d in cases {
            for k in [2usize, 3, 7] {
                let closed = d.kth_root(k);
                let recursive = FiniteDist::from_pairs(&kth_root_recursive(&d, k)).unwrap();
                assert!(
                    closed.pointwise_distance(&recursive) < 1e-12,
                    "k={k} mismatch for {d}"
                );
            }
        }
    }

    #[test]
    fn dilate_examples() {
        let d = dist(&[(0.25, 0.5), (0.75, 0.5)]).dilate(0.0, 1.0).unwrap();
        assert_eq!(d.support(), &[0.0, 1.0]);
        assert!((d.probs()[0] - 0.5).abs() < 1e-15);
        assert!((d.probs()[1] - 0.5).abs() < 1e-15);

        // No mass inside [a, b]: untouched.
        let t = three_point();
        let same = t.dilate(2.0, 9.0).unwrap();
        assert!(same.pointwise_distance(&t) < 1e-15);

        // Mean preservation.
        let spread = t.dilate(0.5, 4.0).unwrap();
        assert!((spread.mean() - t.mean()).abs() < 1e-12);
    }

    #[test]
    fn dilate_rejects_bad_interval() {
        assert!(three_point().dilate(1.0, 1.0).is_err());
        assert!(three_point().dilate(-1.0, 1.0).is_err());
    }

    #[test]
    fn zero_pad_examples() {
        let d = FiniteDist::point_mass(1.0).unwrap().zero_pad(0.3).unwrap();
        assert_eq!(d.support(), &[0.0, 1.0]);
        assert!((d.probs()[0] - 0.7).abs() < 1e-15);
        assert!((d.probs()[1] - 0.3).abs() < 1e-15);

        let t = three_point();
        assert_eq!(t.zero_pad(1.0).unwrap(), t);
        let padded = t.zero_pad(0.25).unwrap();
        assert!((padded.mean() - 0.25 * t.mean()).abs() < 1e-12);
        // Existing zero atom merges: 0.75 + 0.25·0.5.
        assert!((padded.probs()[0] - 0.875).abs() < 1e-15);
    }

    #[test]
    fn scale_examples() {
        let d = dist(&[(0.0, 0.5), (2.0, 0.5)]).scale(0.5).unwrap();
        assert_eq!(d.support(), &[0.0, 1.0]);

        let t = three_point();
        let unit = t.normalized_to_unit_mean().unwrap();
        assert!((unit.mean() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn hygiene_merges_and_drops() {
        let d = FiniteDist::new(vec![1.0, 1.0 + 5e-13, 2.0], vec![0.3, 0.3, 0.4]).unwrap();
        assert_eq!(d.len(), 2);
        assert!((d.probs()[0] - 0.6).abs() < 1e-12);

        let d = FiniteDist::from_weights(vec![0.0, 1.0], vec![1e-17, 1.0]).unwrap();
        assert_eq!(d.len(), 1);
        assert_eq!(d.support(), &[1.0]);
    }

    #[test]
    fn constructor_rejections() {
        assert!(FiniteDist::new(vec![1.0, 0.5], vec![0.5, 0.5]).is_err());
        assert!(FiniteDist::new(vec![-1.0, 0.5], vec![0.5, 0.5]).is_err());
        assert!(FiniteDist::new(vec![0.0], vec![f64::NAN]).is_err());
        assert!(FiniteDist::new(vec![0.0, 1.0], vec![0.5, 0.6]).is_err());
        assert!(FiniteDist::new(vec![f64::INFINITY], vec![1.0]).is_err());
        assert!(FiniteDist::new(vec![], vec![]).is_err());
    }

    #[test]
    fn loader_reports_adjustment_and_enforces_sum() {
        let loaded =
            FiniteDist::load_json(r#"{"support": [0.0, 1.0], "probs": [0.5, 0.4999999999]}"#)
                .unwrap();
        assert!(loaded.adjustment > 0.0);
        assert!(loaded.adjustment < 1e-9);
        assert_eq!(loaded.dist.cumulative().last(), Some(&1.0));

        let err = FiniteDist::load_json(r#"{"support": [0.0, 1.0], "probs": [0.5, 0.49]}"#);
        assert!(err.is_err());
    }

    #[test]
    fn sampling_hits_every_atom() {
        let t = three_point();
        assert_eq!(t.sample_at(0.0), 0.0);
        assert_eq!(t.sample_at(0.49), 0.0);
        assert_eq!(t.sample_at(0.5), 1.0);
        assert_eq!(t.sample_at(0.89999), 1.0);
        assert_eq!(t.sample_at(0.9), 10.0);
        assert_eq!(t.sample_at(0.999999), 10.0);
    }

    #[test]
    fn cdf_power_fractional_exponent() {
        let t = three_point();
        let half = t.cdf_power(0.5).unwrap();
        let back = half.max_power(2);
        assert!(back.pointwise_distance(&t) < 1e-12);
    }
}
