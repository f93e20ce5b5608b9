//! Seeded sequential-game simulator.
//!
//! A game reveals `n` i.i.d. samples under one of three presentations:
//! one at a time (standard), `b` at a time with whole batches discarded on
//! rejection (batched), or through a sliding window of the `w` most recent
//! samples (windowed). A [`Policy`] decides, per revealed view, whether to
//! accept one of the currently visible samples; accepting ends the game
//! with that sample as payoff, and a game that never accepts scores zero.
//!
//! Reproducibility contract: the sample stream of a trajectory is fully
//! determined by its seed (see [`sample_path`]), per-trajectory seeds are
//! derived from the root seed by counter hashing, and Monte Carlo merges
//! use pairwise summation over trajectory order — so estimates are
//! identical for any worker count, including the sequential-only build.

mod experiments;
mod policy;

pub use experiments::{noniid_demo, padding_experiment, NonIidReport, PaddingReport};
pub use policy::{
    batch_from_window, batch_policy, threshold_policy, uniform_offset_wrapper, window_upgrade,
    window_upgrade_soft, BatchFromWindowPolicy, BatchPolicy, EventSink, Policy, PolicyEvent,
    PolicyRun, ThresholdPolicy, TrajectoryCtx, UniformOffsetPolicy, WindowUpgradePolicy,
};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::dist::FiniteDist;
use crate::exec;
use crate::sum::pairwise_sum;

#[derive(Debug, Error)]
pub enum EngineError {
    #[error("invalid game setting: {0}")]
    InvalidSetting(String),
    #[error("policy accepted index {index}, but visible indices are {first}..={last}")]
    PolicyContract {
        index: usize,
        first: usize,
        last: usize,
    },
    #[error("input too short for offset wrapper: n={n}, b={b} leaves m={m}")]
    InputTooShort { n: usize, b: usize, m: isize },
    #[error("window {w} covers the whole input of {n} samples; the gambler sees everything and the ratio is 1")]
    WindowCoversAll { w: usize, n: usize },
    #[error("invalid parameter: {0}")]
    BadParam(String),
}

/// How samples are presented to the policy.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    /// One sample at a time; only the newest is visible.
    Standard,
    /// `size` samples at a time; rejecting discards the whole batch.
    Batched { size: usize },
    /// Sliding window of the `size` most recent samples.
    Windowed { size: usize },
}

/// Presentation mode plus total sample count.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GameSetting {
    mode: Mode,
    n: usize,
}

impl GameSetting {
    pub fn standard(n: usize) -> Result<Self, EngineError> {
        if n == 0 {
            return Err(EngineError::InvalidSetting("n must be at least 1".into()));
        }
        Ok(Self {
            mode: Mode::Standard,
            n,
        })
    }

    pub fn batched(n: usize, b: usize) -> Result<Self, EngineError> {
        if n == 0 || b == 0 || n % b != 0 {
            return Err(EngineError::InvalidSetting(format!(
                "batched mode requires b | n, got n={n}, b={b}"
            )));
        }
        Ok(Self {
            mode: Mode::Batched { size: b },
            n,
        })
    }

    pub fn windowed(n: usize, w: usize) -> Result<Self, EngineError> {
        if n == 0 || w == 0 || w > n {
            return Err(EngineError::InvalidSetting(format!(
                "windowed mode requires 1 <= w <= n, got n={n}, w={w}"
            )));
        }
        Ok(Self {
            mode: Mode::Windowed { size: w },
            n,
        })
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn n(&self) -> usize {
        self.n
    }
}

/// What a policy can see when asked to decide: a contiguous run of visible
/// samples, the number of samples revealed so far, and the horizon.
///
/// Visible absolute indices are `first_index ..= consumed` (1-based), and
/// `values[i]` belongs to absolute index `first_index + i`.
#[derive(Debug, Clone, Copy)]
pub struct ViewState<'a> {
    pub values: &'a [f64],
    pub first_index: usize,
    pub consumed: usize,
    pub n: usize,
}

impl ViewState<'_> {
    pub fn newest_index(&self) -> usize {
        self.consumed
    }

    pub fn newest_value(&self) -> f64 {
        *self.values.last().unwrap()
    }

    pub fn oldest_index(&self) -> usize {
        self.first_index
    }

    pub fn contains(&self, index: usize) -> bool {
        (self.first_index..=self.consumed).contains(&index)
    }

    pub fn value(&self, index: usize) -> f64 {
        debug_assert!(self.contains(index));
        self.values[index - self.first_index]
    }

    /// Largest visible value with its absolute index; ties go to the most
    /// recent occurrence (the one with the longest remaining lifetime).
    pub fn max_entry(&self) -> (usize, f64) {
        let mut best = (self.first_index, self.values[0]);
        for (off, &v) in self.values.iter().enumerate() {
            if v >= best.1 {
                best = (self.first_index + off, v);
            }
        }
        best
    }
}

/// Result of one game: accepted value (0 if nothing accepted) and the
/// accepted absolute index, if any.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Outcome {
    pub value: f64,
    pub index: Option<usize>,
}

/// A Monte Carlo mean with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct McEstimate {
    pub mean: f64,
    pub stderr: f64,
    pub trials: usize,
    pub seed: u64,
}

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;
const POLICY_SALT: u64 = 0xA5A5_5A5A_0F0F_F0F0;

pub(crate) fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(GOLDEN);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Counter-based per-trajectory seed: `hash(root_seed, trajectory_index)`.
pub fn trajectory_seed(root_seed: u64, index: u64) -> u64 {
    splitmix64(root_seed ^ GOLDEN.wrapping_mul(index.wrapping_add(1)))
}

fn policy_seed_for(seed: u64) -> u64 {
    splitmix64(seed ^ POLICY_SALT)
}

/// The exact sample stream `play` reveals for this seed.
pub fn sample_path(dist: &FiniteDist, n: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| dist.sample_at(rng.random())).collect()
}

/// Plays one seeded game. See the module docs for the presentation rules.
pub fn play(
    setting: &GameSetting,
    policy: &dyn Policy,
    dist: &FiniteDist,
    seed: u64,
) -> Result<Outcome, EngineError> {
    let mut sink = EventSink::disabled();
    play_with_sink(setting, policy, dist, seed, &mut sink)
}

/// Like [`play`], additionally returning the policy's decision trace.
pub fn play_traced(
    setting: &GameSetting,
    policy: &dyn Policy,
    dist: &FiniteDist,
    seed: u64,
) -> Result<(Outcome, Vec<PolicyEvent>), EngineError> {
    let mut sink = EventSink::enabled();
    let outcome = play_with_sink(setting, policy, dist, seed, &mut sink)?;
    Ok((outcome, sink.take()))
}

fn play_with_sink(
    setting: &GameSetting,
    policy: &dyn Policy,
    dist: &FiniteDist,
    seed: u64,
    sink: &mut EventSink,
) -> Result<Outcome, EngineError> {
    let n = setting.n();
    let ctx = TrajectoryCtx {
        n,
        policy_seed: policy_seed_for(seed),
    };
    let mut run = policy.start(&ctx);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut samples: Vec<f64> = Vec::with_capacity(n.min(1 << 20));

    let window = match setting.mode() {
        Mode::Standard => 1,
        Mode::Windowed { size } => size,
        Mode::Batched { size } => {
            let batches = n / size;
            for j in 1..=batches {
                for _ in 0..size {
                    samples.push(dist.sample_at(rng.random()));
                }
                let consumed = j * size;
                let first_index = consumed - size + 1;
                let view = ViewState {
                    values: &samples[first_index - 1..consumed],
                    first_index,
                    consumed,
                    n,
                };
                if let Some(index) = run.decide(&view, sink) {
                    return finish(&view, index, &samples);
                }
            }
            return Ok(Outcome {
                value: 0.0,
                index: None,
            });
        }
    };

    for i in 1..=n {
        samples.push(dist.sample_at(rng.random()));
        let first_index = i.saturating_sub(window - 1).max(1);
        let view = ViewState {
            values: &samples[first_index - 1..i],
            first_index,
            consumed: i,
            n,
        };
        if let Some(index) = run.decide(&view, sink) {
            return finish(&view, index, &samples);
        }
    }
    Ok(Outcome {
        value: 0.0,
        index: None,
    })
}

fn finish(view: &ViewState<'_>, index: usize, samples: &[f64]) -> Result<Outcome, EngineError> {
    if !view.contains(index) {
        return Err(EngineError::PolicyContract {
            index,
            first: view.first_index,
            last: view.consumed,
        });
    }
    Ok(Outcome {
        value: samples[index - 1],
        index: Some(index),
    })
}

/// Seeded Monte Carlo estimate of a policy's expected payoff.
///
/// Deterministic for fixed `(seed, trials)` regardless of worker count.
pub fn monte_carlo(
    setting: &GameSetting,
    policy: &dyn Policy,
    dist: &FiniteDist,
    trials: usize,
    seed: u64,
) -> Result<McEstimate, EngineError> {
    assert!(trials >= 2, "monte_carlo requires at least 2 trials");
    let payoffs = exec::try_map(trials, |t| {
        play(setting, policy, dist, trajectory_seed(seed, t as u64)).map(|o| o.value)
    })?;
    Ok(estimate(&payoffs, seed))
}

/// Single-threaded variant of [`monte_carlo`]; the parallel path must
/// reproduce its output bit for bit.
pub fn monte_carlo_sequential(
    setting: &GameSetting,
    policy: &dyn Policy,
    dist: &FiniteDist,
    trials: usize,
    seed: u64,
) -> Result<McEstimate, EngineError> {
    assert!(trials >= 2, "monte_carlo requires at least 2 trials");
    let payoffs = exec::seq_try_map(trials, |t| {
        play(setting, policy, dist, trajectory_seed(seed, t as u64)).map(|o| o.value)
    })?;
    Ok(estimate(&payoffs, seed))
}

pub(crate) fn estimate(payoffs: &[f64], seed: u64) -> McEstimate {
    let trials = payoffs.len();
    let mean = pairwise_sum(payoffs) / trials as f64;
    let lo = payoffs.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = payoffs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let stderr = if lo == hi {
        // Identical payoffs have zero sample variance by definition; the
        // two-pass formula would report rounding noise instead.
        0.0
    } else {
        let deviations: Vec<f64> = payoffs.iter().map(|&x| (x - mean) * (x - mean)).collect();
        let var = pairwise_sum(&deviations) / (trials - 1) as f64;
        (var / trials as f64).sqrt()
    };
    McEstimate {
        mean,
        stderr,
        trials,
        seed,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dp::StoppingTable;

    fn coin() -> FiniteDist {
        FiniteDist::from_pairs(&[(0.0, 0.5), (1.0, 0.5)]).unwrap()
    }

    #[test]
    fn setting_validation() {
        assert!(GameSetting::standard(0).is_err());
        assert!(GameSetting::batched(10, 3).is_err());
        assert!(GameSetting::windowed(10, 0).is_err());
        assert!(GameSetting::windowed(10, 11).is_err());
        assert!(GameSetting::windowed(10, 10).is_ok());
    }

    #[test]
    fn constant_dist_accepted_at_last_step() {
        let c = FiniteDist::point_mass(2.0).unwrap();
        let policy = threshold_policy(StoppingTable::build(&c, 5));
        let setting = GameSetting::standard(5).unwrap();
        for seed in 0..20 {
            let out = play(&setting, &policy, &c, seed).unwrap();
            assert_eq!(out.value, 2.0);
            assert_eq!(out.index, Some(5));
        }
    }

    #[test]
    fn full_window_recovers_prophet() {
        let d = coin();
        let n = 12;
        let setting = GameSetting::windowed(n, n).unwrap();
        let policy = window_upgrade(&d, n, 1).unwrap();
        for seed in 0..50 {
            let out = play(&setting, &policy, &d, seed).unwrap();
            let best = sample_path(&d, n, seed)
                .into_iter()
                .fold(0.0f64, f64::max);
            assert_eq!(out.value, best);
        }
    }

    #[test]
    fn policy_contract_violation_is_an_error() {
        struct Rogue;
        struct RogueRun;
        impl Policy for Rogue {
            fn start<'a>(&'a self, _ctx: &TrajectoryCtx) -> Box<dyn PolicyRun + 'a> {
                Box::new(RogueRun)
            }
        }
        impl PolicyRun for RogueRun {
            fn decide(&mut self, view: &ViewState<'_>, _events: &mut EventSink) -> Option<usize> {
                Some(view.consumed + 7)
            }
        }
        let d = coin();
        let setting = GameSetting::standard(4).unwrap();
        let err = play(&setting, &Rogue, &d, 1).unwrap_err();
        assert!(matches!(err, EngineError::PolicyContract { .. }));
    }

    #[test]
    fn monte_carlo_is_deterministic() {
        let d = coin();
        let setting = GameSetting::standard(3).unwrap();
        let policy = threshold_policy(StoppingTable::build(&d, 3));
        let a = monte_carlo(&setting, &policy, &d, 4000, 99).unwrap();
        let b = monte_carlo(&setting, &policy, &d, 4000, 99).unwrap();
        assert_eq!(a.mean.to_bits(), b.mean.to_bits());
        assert_eq!(a.stderr.to_bits(), b.stderr.to_bits());

        let c = monte_carlo_sequential(&setting, &policy, &d, 4000, 99).unwrap();
        assert_eq!(a.mean.to_bits(), c.mean.to_bits());
        assert_eq!(a.stderr.to_bits(), c.stderr.to_bits());
    }

    #[test]
    fn constant_payoffs_have_zero_stderr() {
        let c = FiniteDist::point_mass(3.0).unwrap();
        let setting = GameSetting::standard(4).unwrap();
        let policy = threshold_policy(StoppingTable::build(&c, 4));
        let est = monte_carlo(&setting, &policy, &c, 1000, 5).unwrap();
        assert_eq!(est.mean, 3.0);
        assert_eq!(est.stderr, 0.0);
    }

    #[test]
    fn threshold_mc_matches_dp_value() {
        let d = coin();
        let setting = GameSetting::standard(3).unwrap();
        let policy = threshold_policy(StoppingTable::build(&d, 3));
        let est = monte_carlo(&setting, &policy, &d, 100_000, 7).unwrap();
        assert!(
            (est.mean - 0.875).abs() <= 3.0 * est.stderr,
            "mean={} stderr={}",
            est.mean,
            est.stderr
        );
    }
}
