//! Closed-form and Monte Carlo experiments built on the simulator.

use serde::Serialize;

use crate::dist::FiniteDist;
use crate::dp::competitive_ratio;
use crate::engine::{
    estimate, trajectory_seed, EngineError, EventSink, Policy, TrajectoryCtx,
    ViewState,
};
use crate::exec;

/// Exact evaluation of the adversarial non-i.i.d. sequence: the first
/// sample is 1, the middle samples are 0, and the last takes `1/eps` with
/// probability `eps`. No window of size `w < n` ever shows the first and
/// last sample together.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct NonIidReport {
    pub eps: f64,
    pub n: usize,
    pub w: usize,
    pub gambler: f64,
    pub prophet: f64,
    pub ratio: f64,
}

/// Best windowed-rule value vs. prophet value for the counterexample
/// sequence; exact arithmetic, no simulation.
pub fn noniid_demo(eps: f64, n: usize, w: usize) -> Result<NonIidReport, EngineError> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(EngineError::BadParam(format!(
            "eps must lie in (0, 1), got {eps}"
        )));
    }
    if w < 2 {
        return Err(EngineError::BadParam(format!(
            "window must be at least 2, got {w}"
        )));
    }
    if w >= n {
        return Err(EngineError::WindowCoversAll { w, n });
    }
    // Accepting the opening sample pays 1; waiting for the tail pays
    // eps·(1/eps). The gambler picks the better, the prophet takes the
    // realized maximum.
    let tail_value = 1.0 / eps;
    let wait_payoff = eps * tail_value;
    let gambler = 1.0_f64.max(wait_payoff);
    let prophet = eps * tail_value + (1.0 - eps);
    Ok(NonIidReport {
        eps,
        n,
        w,
        gambler,
        prophet,
        ratio: gambler / prophet,
    })
}

/// Outcome of running the windowed game on a zero-padded distribution.
#[derive(Debug, Clone, Serialize)]
pub struct PaddingReport {
    pub n: usize,
    pub window: usize,
    pub pad_prob: f64,
    pub trials: usize,
    pub seed: u64,
    /// Monte Carlo mean payoff of the windowed policy on the padded input.
    pub windowed_mean: f64,
    pub windowed_stderr: f64,
    /// Exact prophet value of the padded n-sample game.
    pub prophet: f64,
    pub windowed_ratio: f64,
    /// Horizon `round(n·p)` of the unpadded reference game.
    pub standard_horizon: usize,
    /// Exact competitive ratio of the unpadded game at that horizon.
    pub standard_ratio: f64,
    /// Fraction of trajectories with two nonzero samples in one window.
    pub collision_freq: f64,
    pub collision_stderr: f64,
    /// Union bound `n·k·p²` on the collision probability.
    pub collision_bound: f64,
    /// Set when `n·k·p² >= 1`, where the union bound says nothing.
    pub regime_violation: bool,
}

/// Runs the windowed game on `zero_pad(dist, p)` and compares it against
/// the standard game on `dist` at horizon `round(n·p)`.
pub fn padding_experiment(
    dist: &FiniteDist,
    n: usize,
    window: usize,
    p: f64,
    policy: &dyn Policy,
    trials: usize,
    seed: u64,
) -> Result<PaddingReport, EngineError> {
    if window == 0 || window > n {
        return Err(EngineError::BadParam(format!(
            "window must lie in 1..=n, got {window} for n={n}"
        )));
    }
    if !(p > 0.0 && p < 1.0) {
        return Err(EngineError::BadParam(format!(
            "pad probability must lie in (0, 1), got {p}"
        )));
    }
    assert!(trials >= 2, "padding_experiment requires at least 2 trials");

    let padded = dist
        .zero_pad(p)
        .map_err(|e| EngineError::BadParam(e.to_string()))?;

    let results = exec::try_map(trials, |t| {
        run_padded_trajectory(
            &padded,
            n,
            window,
            policy,
            trajectory_seed(seed, t as u64),
        )
    })?;
    let payoffs: Vec<f64> = results.iter().map(|r| r.0).collect();
    let collisions = results.iter().filter(|r| r.1).count();

    let mc = estimate(&payoffs, seed);
    let prophet = padded.max_power(n).mean();
    let collision_freq = collisions as f64 / trials as f64;
    let collision_stderr = (collision_freq * (1.0 - collision_freq) / trials as f64).sqrt();
    let collision_bound = n as f64 * window as f64 * p * p;

    let standard_horizon = ((n as f64 * p).round() as usize).max(1);
    let standard_ratio =
        competitive_ratio(dist, standard_horizon).map_err(|e| EngineError::BadParam(e.to_string()))?;

    Ok(PaddingReport {
        n,
        window,
        pad_prob: p,
        trials,
        seed,
        windowed_mean: mc.mean,
        windowed_stderr: mc.stderr,
        prophet,
        windowed_ratio: mc.mean / prophet,
        standard_horizon,
        standard_ratio,
        collision_freq,
        collision_stderr,
        collision_bound,
        regime_violation: collision_bound >= 1.0,
    })
}

/// One windowed trajectory with collision tracking. The collision scan
/// covers the whole input even after the policy stops, since it is a
/// property of the sample sequence, not of the stopping time.
fn run_padded_trajectory(
    padded: &FiniteDist,
    n: usize,
    window: usize,
    policy: &dyn Policy,
    seed: u64,
) -> Result<(f64, bool), EngineError> {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let ctx = TrajectoryCtx {
        n,
        policy_seed: super::policy_seed_for(seed),
    };
    let mut run = policy.start(&ctx);
    let mut sink = EventSink::disabled();
    let mut samples: Vec<f64> = Vec::with_capacity(n);

    let mut payoff = 0.0;
    let mut accepted = false;
    let mut last_nonzero: Option<usize> = None;
    let mut collided = false;

    for i in 1..=n {
        let v = padded.sample_at(rng.random());
        samples.push(v);
        if v > 0.0 {
            if let Some(prev) = last_nonzero {
                collided |= i - prev <= window - 1;
            }
            last_nonzero = Some(i);
        }
        if !accepted {
            let first_index = i.saturating_sub(window - 1).max(1);
            let view = ViewState {
                values: &samples[first_index - 1..i],
                first_index,
                consumed: i,
                n,
            };
            if let Some(index) = run.decide(&view, &mut sink) {
                if !view.contains(index) {
                    return Err(EngineError::PolicyContract {
                        index,
                        first: view.first_index,
                        last: view.consumed,
                    });
                }
                payoff = samples[index - 1];
                accepted = true;
            }
        }
    }
    Ok((payoff, collided))
}
