//! Direct hit-counting estimator.

use super::{run_replicas, summarize, validate_event, EstimationResult, Method, ReplicaOutcome, EVENT_SLACK};
use crate::engine::{advance, empirical_measure, replica_rng, BrwConfig, Population};
use crate::error::Result;
use crate::gaussian::TargetSet;

/// Estimates `P(Z̄_n(√n·A) ≥ p)` as the fraction of independent replicas on
/// which the event occurs.
///
/// Each replica simulates the full branching random walk to generation `n`
/// (lattice histogram storage for lattice steps, per-particle lists
/// otherwise) and scores 1 if the empirical occupation fraction of `√n·A`
/// reaches `p`.  The standard error is the usual binomial one.  Replicas that
/// breach `cfg.population_cap` are excluded from the mean and counted in
/// `cap_exceeded`.
///
/// Sharing one `seed` across calls with different `p` couples the replicas:
/// the same population trajectories are evaluated against each threshold, so
/// the estimates are pointwise monotone in `p`.
pub fn naive_estimate(
    cfg: &BrwConfig,
    n: u32,
    set: &TargetSet,
    p: f64,
    replicas: u64,
    seed: u64,
) -> Result<EstimationResult> {
    validate_event(p, replicas, n)?;
    let lattice = cfg.step.is_lattice();
    let scale = (n as f64).sqrt();
    let outcomes = run_replicas(replicas, |r| {
        let mut rng = replica_rng(seed, r);
        let mut pop = if lattice { Population::lattice_root() } else { Population::list_root() };
        for _ in 0..n {
            match advance(&pop, cfg, &mut rng) {
                Ok(next) => pop = next,
                Err(_) => return ReplicaOutcome { term: 0.0, raw_weight: 0.0, capped: true },
            }
        }
        let hit = empirical_measure(&pop, set, scale) >= p - EVENT_SLACK;
        ReplicaOutcome { term: if hit { 1.0 } else { 0.0 }, raw_weight: 1.0, capped: false }
    });
    summarize(n, Method::Naive, seed, &outcomes)
}
