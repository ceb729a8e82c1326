//! Monte Carlo estimators for the rare-event probability
//! `P(Z̄_n(√n·A) ≥ p)` and the diagnostic checks built on top of them.
//!
//! Three estimation methods share one result type:
//!
//! * [`naive_estimate`] — hit counting over independent replicas; the
//!   reference everything else is validated against, useless once the target
//!   probability drops below ~1/replicas.
//! * [`is_schroder_estimate`] — importance sampling for supercritical laws
//!   with `p₁ > 0`: a single surviving lineage is steered ballistically by an
//!   exponential step tilt for the first `t_n` generations, after which the
//!   population grows freely.  Guided by a [`SpineSchedule`].
//! * [`is_bottcher_estimate`] — importance sampling for laws with minimum
//!   offspring `b ≥ 2`: minimal `b`-ary branching with one windowed spine,
//!   then a `d`-ary burst whose edges are confined to a bounded window.
//!   Guided by a [`BottcherSchedule`].
//!
//! Both importance samplers mix their forced choices with the unconstrained
//! law (mixture weights `delta_offspring`, `delta_window`), so the proposal
//! dominates the target and the weighted estimator is unbiased — forcing
//! alone would estimate the probability of the event *intersected with* the
//! forced tree shape, which is strictly smaller.
//!
//! Determinism: replica `r` always draws from [`replica_rng`]`(seed, r)`, and
//! replica outcomes are reduced in replica order, so results are
//! bit-identical across thread counts and runs.

mod checks;
mod fit;
mod naive;
mod schedule;
mod spine;

pub use checks::{
    concentration_check, iid_sum_tail_check, ConcentrationResult, ConcentrationRow, IidTailMethod,
    IidTailResult,
};
pub use fit::{fit_rate, FitResult};
pub use naive::naive_estimate;
pub use schedule::{schedule_bottcher, schedule_schroder, BottcherSchedule, SpineSchedule};
pub use spine::{
    bottcher_conditional_success, bottcher_event_closed_form, bottcher_spine_event_rate,
    is_bottcher_estimate, is_schroder_estimate,
};

use crate::error::{Error, Result};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Which estimator produced a result.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Naive,
    IsSchroder,
    IsBottcher,
}

impl Method {
    /// Stable lowercase token used in CSV output and CLI flags.
    pub fn as_str(&self) -> &'static str {
        match self {
            Method::Naive => "naive",
            Method::IsSchroder => "is_schroder",
            Method::IsBottcher => "is_bottcher",
        }
    }
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One estimate of `P(Z̄_n(√n·A) ≥ p)` with its uncertainty bookkeeping.
#[derive(Debug, Clone)]
pub struct EstimationResult {
    /// Horizon the event was evaluated at.
    pub n: u32,
    /// Mean of the per-replica terms (weight × indicator).  Unbiased for the
    /// target probability; importance-sampled values may exceed 1 by noise
    /// and are reported as computed, never clamped.
    pub estimate: f64,
    /// Standard error of the mean over completed replicas.
    pub std_error: f64,
    /// `ln(estimate)`; `-inf` when every term was zero.
    pub log_estimate: f64,
    /// Replicas requested (including any that breached the population cap).
    pub replicas: u64,
    pub method: Method,
    /// `(Σw)²/Σw²` over the per-replica terms — the equivalent number of
    /// equally-weighted hits.  Zero when no replica hit, at most the number
    /// of completed replicas.
    pub effective_sample_size: f64,
    pub seed: u64,
    /// Replicas whose simulation breached the population cap.  They are
    /// excluded from the mean and reported here, never dropped silently.
    pub cap_exceeded: u64,
    /// When no replica hit the event: a 95% confidence upper bound on the
    /// target probability (the rule of three, scaled by the mean importance
    /// weight for the weighted estimators — a heuristic, since the weight
    /// distribution on the unseen event is unknown).  `None` when at least
    /// one replica hit.
    pub upper_bound_95: Option<f64>,
}

/// Outcome of one replica before aggregation.
pub(crate) struct ReplicaOutcome {
    /// Importance weight × event indicator (0/1 term for the naive method).
    pub term: f64,
    /// The weight alone, used for the zero-hit upper bound.
    pub raw_weight: f64,
    /// The simulation breached the population cap before the horizon.
    pub capped: bool,
}

/// Runs `replicas` independent replica closures in parallel, preserving
/// replica order in the output so downstream reductions are deterministic.
pub(crate) fn run_replicas<F>(replicas: u64, body: F) -> Vec<ReplicaOutcome>
where
    F: Fn(u64) -> ReplicaOutcome + Sync + Send,
{
    (0..replicas).into_par_iter().map(body).collect()
}

/// Sequential (replica-ordered) reduction of replica outcomes into an
/// [`EstimationResult`]: Welford mean/variance over completed replicas, the
/// effective sample size, and the zero-hit upper bound.
pub(crate) fn summarize(
    n: u32,
    method: Method,
    seed: u64,
    outcomes: &[ReplicaOutcome],
) -> Result<EstimationResult> {
    let replicas = outcomes.len() as u64;
    let mut completed = 0u64;
    let mut capped = 0u64;
    let mut mean = 0.0f64;
    let mut m2 = 0.0f64;
    let mut sum = 0.0f64;
    let mut sum_sq = 0.0f64;
    let mut weight_sum = 0.0f64;
    for out in outcomes {
        if out.capped {
            capped += 1;
            continue;
        }
        completed += 1;
        let delta = out.term - mean;
        mean += delta / completed as f64;
        m2 += delta * (out.term - mean);
        sum += out.term;
        sum_sq += out.term * out.term;
        weight_sum += out.raw_weight;
    }
    if completed == 0 {
        return Err(Error::NoConverge(format!(
            "all {replicas} replicas breached the population cap before generation {n}"
        )));
    }
    let variance = if completed > 1 {
        m2 / (completed - 1) as f64
    } else {
        0.0
    };
    let std_error = (variance / completed as f64).sqrt();
    let effective_sample_size = if sum_sq > 0.0 { sum * sum / sum_sq } else { 0.0 };
    let upper_bound_95 = if sum == 0.0 {
        Some(3.0 * weight_sum / (completed as f64 * completed as f64))
    } else {
        None
    };
    Ok(EstimationResult {
        n,
        estimate: mean,
        std_error,
        log_estimate: mean.ln(),
        replicas,
        method,
        effective_sample_size,
        seed,
        cap_exceeded: capped,
        upper_bound_95,
    })
}

pub(crate) fn validate_event(p: f64, replicas: u64, n: u32) -> Result<()> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidParameter {
            name: "p",
            reason: format!("occupation fraction must lie in [0, 1], got {p}"),
        });
    }
    if replicas == 0 {
        return Err(Error::InvalidParameter {
            name: "replicas",
            reason: "need at least one replica".into(),
        });
    }
    if n == 0 {
        return Err(Error::InvalidParameter {
            name: "n",
            reason: "need at least one generation".into(),
        });
    }
    Ok(())
}

/// Slack applied to the occupation-fraction comparison so that exact-arithmetic
/// hits are not lost to float rounding in the empirical ratio.
pub(crate) const EVENT_SLACK: f64 = 1e-12;
