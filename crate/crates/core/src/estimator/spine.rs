//! The two change-of-measure estimators and their diagnostics.
//!
//! Both follow the same pattern: a short *forced phase* steers the population
//! into the rare configuration that dominates the event, the *free phase*
//! lets the branching walk run unconstrained to the horizon, and each replica
//! is scored with the likelihood ratio of its forced choices times the event
//! indicator.  Because every forced draw is mixed with the unconstrained law
//! (`delta_offspring`, `delta_window` — see [`SpineSchedule`] and
//! [`BottcherSchedule`]), the proposal dominates the target and the weighted
//! mean is unbiased for the full event probability.  Setting the mixtures to
//! zero instead samples the forced configuration exactly; the weight then
//! collapses to the closed-form probability of the forced event, and the
//! estimator targets the probability of the event *jointly with* the forced
//! configuration — the lower-bound construction itself.

use super::schedule::{BottcherSchedule, SpineSchedule};
use super::{
    run_replicas, summarize, validate_event, EstimationResult, Method, ReplicaOutcome, EVENT_SLACK,
};
use crate::engine::{advance, replica_rng, BrwConfig, Population, StorageMode};
use crate::error::{Error, Result};
use crate::gaussian::TargetSet;
use crate::rates::{OffspringDistribution, StepDistribution};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// Expected terminal population above which off-lattice free phases switch
/// from per-particle lists to binned aggregation.
const LIST_TOTAL_LIMIT: f64 = 1e6;
/// Bin width for aggregated off-lattice free phases.
const FREE_BIN_WIDTH: f64 = 0.1;

/// Importance-sampling estimator of `P(Z̄_n(√n·A) ≥ p)` for offspring laws
/// with `p₁ > 0`.
///
/// For `t_n` generations one distinguished lineage is kept alive (offspring
/// count forced to 1, mixed with the true law) and pushed by exponentially
/// tilted steps with mean drift `schedule.a` in the witness direction; its
/// siblings and their descendants evolve freely alongside.  After `t_n` the
/// merged population runs free to generation `n`.  The per-replica term is
/// the likelihood ratio of the spine's draws times the event indicator.
///
/// Requires a step law with an exact tilted sampler (two-point, Gaussian,
/// bounded uniform, or exponential tails); others are rejected rather than
/// sampled approximately, which would bias the weights.
pub fn is_schroder_estimate(
    cfg: &BrwConfig,
    n: u32,
    set: &TargetSet,
    p: f64,
    schedule: &SpineSchedule,
    replicas: u64,
    seed: u64,
) -> Result<EstimationResult> {
    validate_event(p, replicas, n)?;
    let p1 = cfg.offspring.p1();
    if p1 <= 0.0 {
        return Err(Error::Hypothesis(
            "the single-lineage estimator needs offspring mass at 1 (p₁ > 0)".into(),
        ));
    }
    if schedule.t_n < 1 || schedule.t_n >= n {
        return Err(Error::InvalidParameter {
            name: "t_n",
            reason: format!("forced length {} outside [1, n) at n = {n}", schedule.t_n),
        });
    }
    let delta = schedule.delta_offspring;
    if !(delta > 0.0 && delta <= 1.0) {
        return Err(Error::InvalidParameter {
            name: "delta_offspring",
            reason: format!(
                "the offspring mixture must lie in (0, 1] for an unbiased single-lineage \
                 estimator, got {delta}"
            ),
        });
    }
    let theta = schedule.tilt;
    let lam = cfg.step.log_mgf(theta);
    if !lam.is_finite() || !theta.is_finite() {
        return Err(Error::InvalidParameter {
            name: "tilt",
            reason: format!("Λ({theta}) is not finite; the tilt lies outside the moment domain"),
        });
    }
    // Surface missing tilted samplers before the parallel phase.
    cfg.step.sample_tilted(&mut replica_rng(seed, u64::MAX), theta)?;

    let sign = schedule.sign;
    let t_n = schedule.t_n;
    let ratio_one = p1 / (1.0 - delta + delta * p1);
    let ratio_else = 1.0 / delta;
    let scale = (n as f64).sqrt();
    let m = cfg.offspring.mean();
    let lattice = cfg.step.is_lattice();

    let outcomes = run_replicas(replicas, |r| {
        let mut rng = replica_rng(seed, r);
        let mut weight = 1.0f64;
        let mut spine_pos = 0.0f64;
        let mut free: Vec<f64> = Vec::new();
        for g in 1..=t_n {
            // The free side-population advances one generation first: its
            // particles and the spine's children live at generation g.
            if !free.is_empty() {
                let pop = Population::from_list(std::mem::take(&mut free), g - 1)
                    .expect("forced-phase positions are finite and non-empty");
                match advance(&pop, cfg, &mut rng) {
                    Ok(next) => free = list_positions(next),
                    Err(_) => {
                        return ReplicaOutcome { term: 0.0, raw_weight: 0.0, capped: true }
                    }
                }
            }
            let u: f64 = rng.gen();
            let k = if u < 1.0 - delta { 1 } else { cfg.offspring.sample_one(&mut rng) };
            weight *= if k == 1 { ratio_one } else { ratio_else };
            let y = cfg
                .step
                .sample_tilted(&mut rng, theta)
                .expect("tilted sampler probed before the parallel phase");
            weight *= (lam - theta * y).exp();
            let parent = spine_pos;
            spine_pos = parent + sign * y;
            for _ in 1..k {
                free.push(parent + cfg.step.sample(&mut rng));
            }
        }
        free.push(spine_pos);
        let pop = free_phase_population(lattice, m, n - t_n, free, t_n);
        match run_free_phase(pop, cfg, n, &mut rng) {
            Some(hit_mass) => {
                let hit = hit_fraction(&hit_mass, set, scale) >= p - EVENT_SLACK;
                let term = if hit { weight } else { 0.0 };
                ReplicaOutcome { term, raw_weight: weight, capped: false }
            }
            None => ReplicaOutcome { term: 0.0, raw_weight: 0.0, capped: true },
        }
    });
    summarize(n, Method::IsSchroder, seed, &outcomes)
}

/// Node roles during the forced phase of the branching-burst estimator.
#[derive(Clone, Copy, PartialEq)]
enum Role {
    /// On the windowed spine: first child continues the spine, the rest
    /// branch minimally and freely.
    Spine,
    /// In the terminal burst: `d` children forced, every edge windowed.
    Fat,
    /// Off-spine filler: minimal branching, free steps.
    Bulk,
}

/// Validated, precomputed guidance shared by the burst-estimator entry
/// points.
struct BurstPrep {
    ell: u32,
    /// Per-spine-level `(lo, hi, probability)`.
    spine: Vec<(f64, f64, f64)>,
    fat_lo: f64,
    fat_hi: f64,
    fat_prob: f64,
}

fn prep_burst(cfg: &BrwConfig, schedule: &BottcherSchedule) -> Result<BurstPrep> {
    let b = cfg.offspring.b_min();
    if b < 2 {
        return Err(Error::Hypothesis(format!(
            "the branching-burst estimator needs minimal offspring ≥ 2, got b = {b}"
        )));
    }
    if cfg.offspring.pmf(schedule.d) <= 0.0 {
        return Err(Error::InvalidParameter {
            name: "d",
            reason: format!("burst arity {} carries no offspring mass", schedule.d),
        });
    }
    if schedule.t_n < 1 {
        return Err(Error::InvalidParameter {
            name: "t_n",
            reason: "the forced phase needs at least one generation".into(),
        });
    }
    if schedule.s_n < 1 || schedule.s_n > schedule.t_n {
        return Err(Error::InvalidParameter {
            name: "s_n",
            reason: format!(
                "burst depth {} must lie in [1, t_n = {}]",
                schedule.s_n, schedule.t_n
            ),
        });
    }
    for (name, delta) in
        [("delta_offspring", schedule.delta_offspring), ("delta_window", schedule.delta_window)]
    {
        if !(0.0..=1.0).contains(&delta) {
            return Err(Error::InvalidParameter {
                name,
                reason: format!("mixture weights must lie in [0, 1], got {delta}"),
            });
        }
    }
    let ell = schedule.t_n - schedule.s_n;
    let mut spine = Vec::with_capacity(ell as usize);
    for g in 0..ell {
        let (lo, hi) = match &schedule.level_windows {
            Some(v) => *v.get(g as usize).ok_or_else(|| Error::InvalidParameter {
                name: "level_windows",
                reason: format!("need {} per-level windows, got {}", ell, v.len()),
            })?,
            None => schedule.spine_window,
        };
        let prob = cfg.step.prob_closed_window(lo, hi);
        if !(prob > 0.0) {
            return Err(Error::InvalidParameter {
                name: "spine_window",
                reason: format!("window [{lo}, {hi}] at level {g} carries no step mass"),
            });
        }
        spine.push((lo, hi, prob));
    }
    let m_bound = schedule.subtree_bound;
    if !(m_bound >= 0.0) {
        return Err(Error::InvalidParameter {
            name: "subtree_bound",
            reason: format!("burst window half-width must be ≥ 0, got {m_bound}"),
        });
    }
    let fat_prob = cfg.step.prob_closed_window(-m_bound, m_bound);
    if !(fat_prob > 0.0) {
        return Err(Error::InvalidParameter {
            name: "subtree_bound",
            reason: format!("burst window [−{m_bound}, {m_bound}] carries no step mass"),
        });
    }
    // Forced-tree width at t_n: (b^ℓ − 1)·b^{s_n} + d^{s_n}.
    let bf = b as f64;
    let df = schedule.d as f64;
    let forced_leaves =
        (bf.powi(ell as i32) - 1.0) * bf.powi(schedule.s_n as i32) + df.powi(schedule.s_n as i32);
    if !(forced_leaves <= cfg.population_cap) {
        return Err(Error::CapExceeded { generation: schedule.t_n, cap: cfg.population_cap });
    }
    Ok(BurstPrep { ell, spine, fat_lo: -m_bound, fat_hi: m_bound, fat_prob })
}

/// Outcome of one forced phase.
struct ForcedPhase {
    weight: f64,
    positions: Vec<f64>,
    /// Every offspring draw matched its forced count and every windowed edge
    /// landed in its window.
    matched: bool,
}

/// Runs the forced phase with the given mixtures.  With `track_match` the
/// replica is abandoned as soon as the forced configuration is missed (used
/// by the acceptance-rate probe, where only `matched` is consumed).
fn run_forced_phase(
    rng: &mut ChaCha8Rng,
    cfg: &BrwConfig,
    schedule: &BottcherSchedule,
    prep: &BurstPrep,
    track_match: bool,
) -> ForcedPhase {
    let b = cfg.offspring.b_min();
    let delta = schedule.delta_offspring;
    let delta_w = schedule.delta_window;
    let root_role = if prep.ell > 0 { Role::Spine } else { Role::Fat };
    let mut frontier: Vec<(f64, Role)> = vec![(0.0, root_role)];
    let mut weight = 1.0f64;
    let mut matched = true;
    for g in 0..schedule.t_n {
        let mut next = Vec::with_capacity(frontier.len() * b as usize);
        for &(pos, role) in &frontier {
            let forced = match role {
                Role::Fat => schedule.d,
                Role::Spine | Role::Bulk => b,
            };
            let k = if delta == 0.0 {
                forced
            } else {
                let u: f64 = rng.gen();
                if u < 1.0 - delta { forced } else { cfg.offspring.sample_one(rng) }
            };
            let p_forced = cfg.offspring.pmf(forced);
            weight *= if k == forced {
                p_forced / (1.0 - delta + delta * p_forced)
            } else {
                matched = false;
                1.0 / delta
            };
            if track_match && !matched {
                return ForcedPhase { weight, positions: Vec::new(), matched };
            }
            for j in 0..k {
                let (window, child_role) = match role {
                    Role::Spine if j == 0 => {
                        let (lo, hi, pw) = prep.spine[g as usize];
                        let role =
                            if g + 1 < prep.ell { Role::Spine } else { Role::Fat };
                        (Some((lo, hi, pw)), role)
                    }
                    Role::Spine => (None, Role::Bulk),
                    Role::Fat => (Some((prep.fat_lo, prep.fat_hi, prep.fat_prob)), Role::Fat),
                    Role::Bulk => (None, Role::Bulk),
                };
                let x = match window {
                    Some((lo, hi, pw)) => {
                        let windowed = delta_w == 0.0 || rng.gen::<f64>() < 1.0 - delta_w;
                        let x = if windowed {
                            // The clamp guards the exact-conditional mode
                            // against inverse-CDF rounding a hair past an
                            // endpoint, which would zero the mixture density.
                            cfg.step
                                .sample_window(rng, lo, hi)
                                .expect("window mass validated before sampling")
                                .clamp(lo, hi)
                        } else {
                            cfg.step.sample(rng)
                        };
                        let inside = lo <= x && x <= hi;
                        if !inside {
                            matched = false;
                            if track_match {
                                return ForcedPhase { weight, positions: Vec::new(), matched };
                            }
                        }
                        let density_ratio = if inside { (1.0 - delta_w) / pw + delta_w } else { delta_w };
                        weight /= density_ratio;
                        x
                    }
                    None => cfg.step.sample(rng),
                };
                next.push((pos + x, child_role));
            }
        }
        frontier = next;
    }
    ForcedPhase { weight, positions: frontier.into_iter().map(|(x, _)| x).collect(), matched }
}

/// Importance-sampling estimator of `P(Z̄_n(√n·A) ≥ p)` for offspring laws
/// with minimal offspring `b ≥ 2`, guided by a [`BottcherSchedule`].
///
/// The forced phase grows a minimal `b`-ary tree whose distinguished spine
/// edges are windowed toward the displacement target for `t_n − s_n`
/// generations; the spine endpoint then bursts into a `d`-ary subtree of
/// depth `s_n` with every edge confined to `[−M, M]`, planting `d^{s_n}`
/// leaves near the target.  The free phase runs the merged population to
/// generation `n`.  With positive mixture weights the weighted mean is
/// unbiased for the event probability; with both mixtures zero it estimates
/// the probability of the event jointly with the forced configuration.
pub fn is_bottcher_estimate(
    cfg: &BrwConfig,
    n: u32,
    set: &TargetSet,
    p: f64,
    schedule: &BottcherSchedule,
    replicas: u64,
    seed: u64,
) -> Result<EstimationResult> {
    validate_event(p, replicas, n)?;
    if schedule.t_n >= n {
        return Err(Error::InvalidParameter {
            name: "t_n",
            reason: format!("forced length {} outside [1, n) at n = {n}", schedule.t_n),
        });
    }
    let prep = prep_burst(cfg, schedule)?;
    let scale = (n as f64).sqrt();
    let m = cfg.offspring.mean();
    let lattice = cfg.step.is_lattice();
    let free_gens = n - schedule.t_n;
    let outcomes = run_replicas(replicas, |r| {
        let mut rng = replica_rng(seed, r);
        let phase = run_forced_phase(&mut rng, cfg, schedule, &prep, false);
        let pop =
            free_phase_population(lattice, m, free_gens, phase.positions, schedule.t_n);
        match run_free_phase(pop, cfg, n, &mut rng) {
            Some(hit_mass) => {
                let hit = hit_fraction(&hit_mass, set, scale) >= p - EVENT_SLACK;
                let term = if hit { phase.weight } else { 0.0 };
                ReplicaOutcome { term, raw_weight: phase.weight, capped: false }
            }
            None => ReplicaOutcome { term: 0.0, raw_weight: 0.0, capped: true },
        }
    });
    summarize(n, Method::IsBottcher, seed, &outcomes)
}

/// Monte Carlo probability that the *unconstrained* branching walk realizes
/// the forced configuration of `schedule` through generation `t_n`: every
/// node of the minimal tree draws exactly its forced offspring count and
/// every spine/burst edge lands in its window.
///
/// Sampling runs under the plain law (both mixtures treated as 1), so the
/// estimate is the direct acceptance rate — the Monte Carlo counterpart of
/// [`bottcher_event_closed_form`].
pub fn bottcher_spine_event_rate(
    cfg: &BrwConfig,
    schedule: &BottcherSchedule,
    replicas: u64,
    seed: u64,
) -> Result<EstimationResult> {
    if replicas == 0 {
        return Err(Error::InvalidParameter {
            name: "replicas",
            reason: "need at least one replica".into(),
        });
    }
    let prep = prep_burst(cfg, schedule)?;
    let mut plain = schedule.clone();
    plain.delta_offspring = 1.0;
    plain.delta_window = 1.0;
    let outcomes = run_replicas(replicas, |r| {
        let mut rng = replica_rng(seed, r);
        let phase = run_forced_phase(&mut rng, cfg, &plain, &prep, true);
        ReplicaOutcome {
            term: if phase.matched { 1.0 } else { 0.0 },
            raw_weight: 1.0,
            capped: false,
        }
    });
    summarize(schedule.t_n, Method::IsBottcher, seed, &outcomes)
}

/// Exact probability that the unconstrained branching walk realizes the
/// forced configuration of `schedule`: the product of forced offspring
/// probabilities over the minimal tree and the window masses over the
/// spine and burst edges.
pub fn bottcher_event_closed_form(
    offspring: &OffspringDistribution,
    step: &StepDistribution,
    schedule: &BottcherSchedule,
) -> Result<f64> {
    let cfg = BrwConfig::new(offspring.clone(), step.clone(), f64::INFINITY, 0)?;
    let prep = prep_burst(&cfg, schedule)?;
    let b = offspring.b_min() as f64;
    let d = schedule.d as f64;
    let ell = prep.ell;
    // Burst parents per depth j: d^j for j = 0..s_n−1.
    let mut n_fat = 0.0f64;
    for j in 0..schedule.s_n {
        n_fat += d.powi(j as i32);
    }
    // All parents: depth g holds b^g nodes for g ≤ ℓ, then
    // (b^ℓ − 1)·b^{g−ℓ} + d^{g−ℓ} above.
    let mut n_all = 0.0f64;
    for g in 0..schedule.t_n {
        n_all += if g <= ell {
            b.powi(g as i32)
        } else {
            let j = (g - ell) as i32;
            (b.powi(ell as i32) - 1.0) * b.powi(j) + d.powi(j)
        };
    }
    let n_min = n_all - n_fat;
    let mut log_pi = n_min * offspring.pmf(offspring.b_min()).ln()
        + n_fat * offspring.pmf(schedule.d).ln()
        + d * n_fat * prep.fat_prob.ln();
    for &(_, _, pw) in &prep.spine {
        log_pi += pw.ln();
    }
    Ok(log_pi.exp())
}

/// Estimates `P(event | forced configuration)` by sampling the forced
/// configuration exactly (both mixtures zero) and averaging the bare event
/// indicator over the free phase.  Multiplying by
/// [`bottcher_event_closed_form`] recovers the joint probability — the
/// lower-bound construction's contribution to the event.
pub fn bottcher_conditional_success(
    cfg: &BrwConfig,
    n: u32,
    set: &TargetSet,
    p: f64,
    schedule: &BottcherSchedule,
    replicas: u64,
    seed: u64,
) -> Result<EstimationResult> {
    validate_event(p, replicas, n)?;
    if schedule.t_n >= n {
        return Err(Error::InvalidParameter {
            name: "t_n",
            reason: format!("forced length {} outside [1, n) at n = {n}", schedule.t_n),
        });
    }
    let mut exact = schedule.clone();
    exact.delta_offspring = 0.0;
    exact.delta_window = 0.0;
    let prep = prep_burst(cfg, &exact)?;
    let scale = (n as f64).sqrt();
    let m = cfg.offspring.mean();
    let lattice = cfg.step.is_lattice();
    let free_gens = n - exact.t_n;
    let outcomes = run_replicas(replicas, |r| {
        let mut rng = replica_rng(seed, r);
        let phase = run_forced_phase(&mut rng, cfg, &exact, &prep, false);
        let pop = free_phase_population(lattice, m, free_gens, phase.positions, exact.t_n);
        match run_free_phase(pop, cfg, n, &mut rng) {
            Some(hit_mass) => {
                let hit = hit_fraction(&hit_mass, set, scale) >= p - EVENT_SLACK;
                ReplicaOutcome { term: if hit { 1.0 } else { 0.0 }, raw_weight: 1.0, capped: false }
            }
            None => ReplicaOutcome { term: 0.0, raw_weight: 0.0, capped: true },
        }
    });
    summarize(n, Method::IsBottcher, seed, &outcomes)
}

/// Extracts the particle positions of a list population.
fn list_positions(pop: Population) -> Vec<f64> {
    match pop.storage {
        StorageMode::List { positions } => positions,
        // Lattice delegation inside `advance` always returns a list for list
        // inputs; other arms are unreachable here.
        other => {
            let mut out = Vec::new();
            let tmp = Population { generation: pop.generation, storage: other };
            tmp.for_each_site(|x, c| {
                for _ in 0..c as u64 {
                    out.push(x);
                }
            });
            out
        }
    }
}

/// Chooses storage for the free phase and seeds it with the forced-phase
/// particles: lattice histograms for lattice steps, per-particle lists while
/// the expected terminal population stays small, binned aggregation beyond.
fn free_phase_population(
    lattice: bool,
    mean_offspring: f64,
    free_gens: u32,
    positions: Vec<f64>,
    generation: u32,
) -> Population {
    if lattice {
        let lo = positions.iter().fold(0i64, |a, &x| a.min(x.round() as i64));
        let hi = positions.iter().fold(0i64, |a, &x| a.max(x.round() as i64));
        let mut counts = vec![0.0f64; (hi - lo + 1) as usize];
        for &x in &positions {
            counts[(x.round() as i64 - lo) as usize] += 1.0;
        }
        return Population::from_lattice(lo, counts, generation)
            .expect("forced-phase counts are finite and non-negative");
    }
    let expected = positions.len() as f64 * mean_offspring.powi(free_gens as i32);
    if expected <= LIST_TOTAL_LIMIT {
        return Population::from_list(positions, generation)
            .expect("forced-phase positions are finite and non-empty");
    }
    let lo = positions.iter().fold(0i64, |a, &x| a.min((x / FREE_BIN_WIDTH).round() as i64));
    let hi = positions.iter().fold(0i64, |a, &x| a.max((x / FREE_BIN_WIDTH).round() as i64));
    let mut counts = vec![0.0f64; (hi - lo + 1) as usize];
    for &x in &positions {
        counts[((x / FREE_BIN_WIDTH).round() as i64 - lo) as usize] += 1.0;
    }
    Population::from_binned(FREE_BIN_WIDTH, lo, counts, 0.0, 0.0, generation)
        .expect("forced-phase bins are finite and non-negative")
}

/// Advances `pop` to generation `n` and reports its terminal sites; `None`
/// if the population cap is breached along the way.
fn run_free_phase(
    mut pop: Population,
    cfg: &BrwConfig,
    n: u32,
    rng: &mut ChaCha8Rng,
) -> Option<Vec<(f64, f64)>> {
    while pop.generation < n {
        match advance(&pop, cfg, rng) {
            Ok(next) => pop = next,
            Err(_) => return None,
        }
    }
    Some(pop.sites())
}

/// Occupation fraction of `scale·A` among the recorded sites.
fn hit_fraction(sites: &[(f64, f64)], set: &TargetSet, scale: f64) -> f64 {
    let mut inside = 0.0f64;
    let mut total = 0.0f64;
    for &(x, c) in sites {
        total += c;
        if set.contains(x / scale) {
            inside += c;
        }
    }
    if total > 0.0 { (inside / total).clamp(0.0, 1.0) } else { 0.0 }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::exact_event_prob;
    use crate::estimator::schedule::schedule_schroder;

    fn half_half() -> OffspringDistribution {
        OffspringDistribution::finite(&[(1, 0.5), (2, 0.5)]).unwrap()
    }

    fn two_three() -> OffspringDistribution {
        OffspringDistribution::finite(&[(2, 0.5), (3, 0.5)]).unwrap()
    }

    fn left_half() -> TargetSet {
        TargetSet::parse("(-inf,0]").unwrap()
    }

    fn rad_cfg(off: OffspringDistribution) -> BrwConfig {
        BrwConfig::new(off, StepDistribution::rademacher(), 1e8, 0).unwrap()
    }

    fn spine_schedule(t_n: u32) -> SpineSchedule {
        SpineSchedule {
            t_n,
            window: (-2.0, -1.0),
            tilt: 0.549_306_144_334_054_8,
            sign: -1.0,
            a: 0.5,
            eps: 0.07,
            eta: 0.03,
            delta_offspring: 0.05,
        }
    }

    fn burst_schedule(t_n: u32, s_n: u32, d: u32) -> BottcherSchedule {
        BottcherSchedule {
            t_n,
            s_n,
            d,
            spine_window: (-1.0, -1.0),
            subtree_bound: 1.0,
            level_windows: None,
            x0: -0.9,
            eta: 0.03,
            n0: 0,
            delta_offspring: 0.05,
            delta_window: 0.05,
        }
    }

    #[test]
    fn single_lineage_estimator_matches_exact_probability() {
        let cfg = rad_cfg(half_half());
        let set = left_half();
        let exact = exact_event_prob(&cfg.offspring, &cfg.step, 3, &set, 0.75).unwrap();
        let r =
            is_schroder_estimate(&cfg, 3, &set, 0.75, &spine_schedule(1), 40_000, 21).unwrap();
        assert_eq!(r.method, Method::IsSchroder);
        assert!(
            (r.estimate - exact).abs() < 4.0 * r.std_error,
            "estimate {} ± {} vs exact {exact}",
            r.estimate,
            r.std_error
        );
        assert!(r.effective_sample_size > 0.0 && r.effective_sample_size <= 40_000.0);
    }

    #[test]
    fn single_lineage_weights_average_to_one_on_the_sure_event() {
        // p = 0 makes the indicator constant, so the weighted mean must
        // estimate 1: the change of measure is properly normalized.
        let cfg = rad_cfg(half_half());
        let set = left_half();
        let r = is_schroder_estimate(&cfg, 6, &set, 0.0, &spine_schedule(3), 30_000, 9).unwrap();
        assert!(
            (r.estimate - 1.0).abs() < 4.0 * r.std_error,
            "normalization {} ± {}",
            r.estimate,
            r.std_error
        );
    }

    #[test]
    fn single_lineage_estimator_is_deterministic() {
        let cfg = rad_cfg(half_half());
        let set = left_half();
        let a = is_schroder_estimate(&cfg, 4, &set, 0.5, &spine_schedule(2), 2_000, 3).unwrap();
        let b = is_schroder_estimate(&cfg, 4, &set, 0.5, &spine_schedule(2), 2_000, 3).unwrap();
        assert_eq!(a.estimate, b.estimate);
        assert_eq!(a.std_error, b.std_error);
        assert_eq!(a.effective_sample_size, b.effective_sample_size);
    }

    #[test]
    fn single_lineage_estimator_rejects_unusable_inputs() {
        let set = left_half();
        // No mass at one offspring: the lineage cannot be kept alive.
        let cfg = rad_cfg(two_three());
        assert!(matches!(
            is_schroder_estimate(&cfg, 4, &set, 0.5, &spine_schedule(2), 100, 0),
            Err(Error::Hypothesis(_))
        ));
        let cfg = rad_cfg(half_half());
        // Forced phase at least as long as the horizon.
        assert!(is_schroder_estimate(&cfg, 2, &set, 0.5, &spine_schedule(2), 100, 0).is_err());
        // Pure forcing would bias the estimate toward the single-lineage event.
        let mut s = spine_schedule(1);
        s.delta_offspring = 0.0;
        assert!(is_schroder_estimate(&cfg, 3, &set, 0.5, &s, 100, 0).is_err());
        // No exact tilted sampler for this tail family.
        let heavy = BrwConfig::new(
            half_half(),
            StepDistribution::weibull(1.0, 0.5).unwrap(),
            1e8,
            0,
        )
        .unwrap();
        assert!(is_schroder_estimate(&heavy, 3, &set, 0.5, &spine_schedule(1), 100, 0).is_err());
    }

    #[test]
    fn scheduled_estimator_reaches_deep_events_the_naive_one_cannot() {
        // A strong deviation at n = 16: every naive replica in reach misses,
        // while the guided estimator still resolves the probability.
        let cfg = rad_cfg(half_half());
        let set = left_half();
        let schedule =
            schedule_schroder(&cfg.step, &set, 0.9, 16, 0.5, Some(0.1), Some(0.05)).unwrap();
        let r = is_schroder_estimate(&cfg, 16, &set, 0.9, &schedule, 20_000, 17).unwrap();
        assert!(r.estimate > 0.0);
        assert!(r.estimate < 0.05, "deep event should be rare, got {}", r.estimate);
        assert!(r.effective_sample_size > 1.0);
    }

    #[test]
    fn burst_closed_form_multiplies_counts_and_window_masses() {
        // t_n = 2, s_n = 1, d = 3 over a (2,3)-offspring walk with ±1 steps:
        // three minimal parents minus one burst parent leaves p₂², one burst
        // parent gives p₃, the single spine edge is pinned to −1 (mass ½),
        // and the burst window [−1, 1] has full mass.
        let s = burst_schedule(2, 1, 3);
        let pi = bottcher_event_closed_form(
            &two_three(),
            &StepDistribution::rademacher(),
            &s,
        )
        .unwrap();
        assert!((pi - 0.0625).abs() < 1e-15, "π = {pi}");
    }

    #[test]
    fn burst_acceptance_rate_matches_the_closed_form() {
        let cfg = rad_cfg(two_three());
        let s = burst_schedule(2, 1, 3);
        let pi =
            bottcher_event_closed_form(&cfg.offspring, &cfg.step, &s).unwrap();
        let r = bottcher_spine_event_rate(&cfg, &s, 8_000, 5).unwrap();
        assert!(
            (r.estimate - pi).abs() < 4.0 * r.std_error,
            "acceptance {} ± {} vs π = {pi}",
            r.estimate,
            r.std_error
        );
    }

    #[test]
    fn burst_estimator_matches_exact_probability() {
        let cfg = rad_cfg(two_three());
        let set = left_half();
        let exact = exact_event_prob(&cfg.offspring, &cfg.step, 2, &set, 0.75).unwrap();
        let s = burst_schedule(1, 1, 3);
        let r = is_bottcher_estimate(&cfg, 2, &set, 0.75, &s, 40_000, 31).unwrap();
        assert_eq!(r.method, Method::IsBottcher);
        assert!(
            (r.estimate - exact).abs() < 4.0 * r.std_error,
            "estimate {} ± {} vs exact {exact}",
            r.estimate,
            r.std_error
        );
    }

    #[test]
    fn burst_weights_average_to_one_on_the_sure_event() {
        let cfg = rad_cfg(two_three());
        let set = left_half();
        let s = burst_schedule(2, 1, 3);
        let r = is_bottcher_estimate(&cfg, 5, &set, 0.0, &s, 20_000, 13).unwrap();
        assert!(
            (r.estimate - 1.0).abs() < 4.0 * r.std_error,
            "normalization {} ± {}",
            r.estimate,
            r.std_error
        );
    }

    #[test]
    fn burst_conditional_success_is_a_bare_rate() {
        let cfg = rad_cfg(two_three());
        let set = left_half();
        let s = burst_schedule(2, 1, 3);
        let r = bottcher_conditional_success(&cfg, 6, &set, 0.5, &s, 4_000, 3).unwrap();
        assert!((0.0..=1.0).contains(&r.estimate));
        // Forcing the population leftward must help compared to no forcing:
        // the conditional rate dominates the plain probability.
        let plain = super::super::naive_estimate(&cfg, 6, &set, 0.5, 4_000, 3).unwrap();
        assert!(
            r.estimate > plain.estimate,
            "conditional {} should beat plain {}",
            r.estimate,
            plain.estimate
        );
    }

    #[test]
    fn burst_estimator_rejects_unusable_inputs() {
        let set = left_half();
        // Offspring with mass at 1: minimal branching is not guaranteed.
        let cfg = rad_cfg(half_half());
        assert!(matches!(
            is_bottcher_estimate(&cfg, 4, &set, 0.5, &burst_schedule(2, 1, 2), 100, 0),
            Err(Error::Hypothesis(_))
        ));
        let cfg = rad_cfg(two_three());
        // Burst arity without offspring mass.
        assert!(is_bottcher_estimate(&cfg, 4, &set, 0.5, &burst_schedule(2, 1, 5), 100, 0).is_err());
        // Burst deeper than the forced phase.
        assert!(is_bottcher_estimate(&cfg, 8, &set, 0.5, &burst_schedule(2, 3, 3), 100, 0).is_err());
        // Forced tree wider than the population cap.
        let tiny = BrwConfig::new(two_three(), StepDistribution::rademacher(), 8.0, 0).unwrap();
        assert!(matches!(
            is_bottcher_estimate(&tiny, 8, &set, 0.5, &burst_schedule(5, 2, 3), 100, 0),
            Err(Error::CapExceeded { .. })
        ));
    }

    #[test]
    fn burst_estimator_handles_off_lattice_steps() {
        // Heavy-tailed steps, list-mode free phase: the normalization on the
        // sure event verifies the off-lattice wiring end to end.  Moderate
        // mixture weights keep the importance ratios near 1; with tiny
        // mixtures the rare out-of-window draws carry ratio 1/δ_w per edge
        // and the weight distribution is too heavy-tailed for the mean to
        // stabilize at this replica count.
        let step = StepDistribution::weibull(1.0, 0.5).unwrap();
        let cfg = BrwConfig::new(two_three(), step, f64::INFINITY, 0).unwrap();
        let set = left_half();
        let mut s = burst_schedule(2, 1, 3);
        s.spine_window = (-3.0, -0.2);
        s.subtree_bound = cfg.step.half_mass_radius();
        s.delta_offspring = 0.5;
        s.delta_window = 0.5;
        let r = is_bottcher_estimate(&cfg, 5, &set, 0.0, &s, 8_000, 7).unwrap();
        assert!(
            (r.estimate - 1.0).abs() < 4.0 * r.std_error,
            "normalization {} ± {}",
            r.estimate,
            r.std_error
        );
        assert!(r.effective_sample_size > 500.0, "ess {}", r.effective_sample_size);
    }

    #[test]
    fn free_phase_storage_follows_size_and_lattice_structure() {
        let positions = vec![-1.0, -1.0, 2.0, 0.0];
        // Lattice steps: histogram seeded with the particle counts.
        let pop = free_phase_population(true, 2.5, 10, positions.clone(), 3);
        assert_eq!(pop.generation, 3);
        assert_eq!(pop.total(), 4.0);
        match &pop.storage {
            StorageMode::LatticeHistogram { offset, counts } => {
                assert_eq!(*offset, -1);
                assert_eq!(counts.as_slice(), &[2.0, 1.0, 0.0, 1.0]);
            }
            _ => panic!("expected a lattice histogram"),
        }
        // Small expected totals: per-particle list.
        let pop = free_phase_population(false, 2.5, 10, positions.clone(), 3);
        assert!(matches!(pop.storage, StorageMode::List { .. }));
        assert_eq!(pop.total(), 4.0);
        // Large expected totals: binned aggregation preserving the mass.
        let pop = free_phase_population(false, 2.5, 40, positions, 3);
        match &pop.storage {
            StorageMode::Binned { width, .. } => assert_eq!(*width, FREE_BIN_WIDTH),
            _ => panic!("expected binned storage"),
        }
        assert_eq!(pop.total(), 4.0);
    }
}


