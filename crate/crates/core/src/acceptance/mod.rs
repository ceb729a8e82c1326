//! Pinned go/no-go battery for the whole crate: eleven checks covering the
//! analytic layer (closed forms, duality, fixed points), the exact engine
//! (deep i.i.d. tails, enumerable event probabilities), and the statistical
//! layer (estimator unbiasedness, decay-rate trends, forced-burst geometry).
//!
//! Every expected value here is an independently derived oracle — a closed
//! form, an exact enumeration, or a quantity the analytic layer computes by a
//! second route — and every tolerance is pinned in this file.  Nothing is
//! calibrated against the code under test at run time.
//!
//! The doubly-exponential decay regimes (bounded steps at extreme fractions,
//! and the stretched-exponential upper branch) decay too fast for any sampler
//! to resolve at reachable horizons; their constants are covered analytically
//! through the duality and closed-form checks below and are reported as
//! empirically unverifiable by the command-line tools rather than tested
//! here.
//!
//! Two checks probe asymptotic statements at small depth on purpose and are
//! expected to fail until the horizon is far beyond desk scale; their
//! diagnostics spell out the finite-size obstruction (see
//! [`mean-measure-clt-shadow`](run_one) and `population-size-envelope`).
//! They are kept red rather than loosened: a tolerance wide enough to absorb
//! the finite-size gap would no longer test the limit statement.
//!
//! Fault injection exists so a harness can prove the battery can fail:
//! [`run_one`]`(id, true)` scales that criterion's pinned reference by 1.5
//! and must flip a passing analytic check to failing.

use std::time::{Duration, Instant};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::engine::{
    advance, empirical_measure, exact_event_prob, population_law_exact, BrwConfig, Population,
};
use crate::error::Result;
use crate::estimator::{
    bottcher_conditional_success, bottcher_event_closed_form, bottcher_spine_event_rate,
    concentration_check, fit_rate, is_bottcher_estimate, is_schroder_estimate, BottcherSchedule,
    EstimationResult, SpineSchedule,
};
use crate::gaussian::{convolve_n, i_rate, j_rate, TargetSet};
use crate::rates::legendre::bar_lambda_parts;
use crate::rates::{
    bar_lambda, cramer_rate, default_alpha_iter, iterate_fixed_point, schroder_exponent,
    OffspringDistribution, Speed, StepDistribution,
};

/// Multiplier applied to a criterion's pinned reference under fault
/// injection.
const FAULT_SCALE: f64 = 1.5;

/// Number of criteria in the battery.
pub const CRITERIA: u8 = 11;

/// Outcome of one criterion.
#[derive(Debug, Clone)]
pub struct CriterionResult {
    /// 1-based criterion id.
    pub id: u8,
    /// Stable kebab-case name.
    pub name: &'static str,
    pub pass: bool,
    /// Measured quantities, pinned references, and tolerances.
    pub details: String,
    pub runtime: Duration,
}

impl CriterionResult {
    /// One-line report: id, name, verdict, runtime, details.
    pub fn line(&self) -> String {
        format!(
            "criterion {:02} {:<28} {} ({:6.2}s)  {}",
            self.id,
            self.name,
            if self.pass { "PASS" } else { "FAIL" },
            self.runtime.as_secs_f64(),
            self.details
        )
    }
}

/// Runs the full battery in order.  `fault` injects a fault into that one
/// criterion (see module docs).
pub fn run_all(fault: Option<u8>) -> Vec<CriterionResult> {
    (1..=CRITERIA).map(|id| run_one(id, fault == Some(id))).collect()
}

/// Runs a single criterion by id (1 through [`CRITERIA`]); unknown ids fail
/// with a diagnostic rather than panic.  `fault` scales the criterion's
/// pinned reference by 1.5 to demonstrate the check can fail.
pub fn run_one(id: u8, fault: bool) -> CriterionResult {
    let scale = if fault { FAULT_SCALE } else { 1.0 };
    let start = Instant::now();
    let (name, outcome) = match id {
        1 => ("tilt-constant-duality", c01_tilt_duality(scale)),
        2 => ("rademacher-tilt-closed-form", c02_rademacher_closed_form(scale)),
        3 => ("fixed-point-iteration", c03_fixed_point(scale)),
        4 => ("gaussian-rate-oracles", c04_gaussian_oracles(scale)),
        5 => ("mean-measure-clt-shadow", c05_clt_shadow(scale)),
        6 => ("exact-tail-vs-cramer", c06_exact_tail(scale)),
        7 => ("estimator-unbiasedness", c07_unbiasedness(scale)),
        8 => ("schroder-sqrt-n-trend", c08_schroder_trend(scale)),
        9 => ("population-size-envelope", c09_size_envelope(scale)),
        10 => ("occupation-concentration", c10_concentration(scale)),
        11 => ("forced-burst-geometry", c11_burst_geometry(scale)),
        _ => ("unknown-criterion", Ok((false, format!("no criterion with id {id}")))),
    };
    let (pass, details) = match outcome {
        Ok(pair) => pair,
        Err(e) => (false, format!("errored: {e}")),
    };
    CriterionResult { id, name, pass, details, runtime: start.elapsed() }
}

/// The four step laws the analytic checks sweep: the two closed-form
/// anchors plus bounded laws with distinct supports.
fn sweep_steps() -> Result<Vec<(&'static str, StepDistribution)>> {
    Ok(vec![
        ("rademacher", StepDistribution::rademacher()),
        ("gaussian", StepDistribution::gaussian()),
        ("uniform(1)", StepDistribution::bounded_uniform(1.0)?),
        ("uniform(2.5)", StepDistribution::bounded_uniform(2.5)?),
    ])
}

/// Criterion 1: the tilt constant's two defining routes — the variational
/// formula over tilt parameters and the inverse of the log-MGF at the
/// branching cost — agree to 1e-7 across 20 (step, p1) pairs.
fn c01_tilt_duality(scale: f64) -> Result<(bool, String)> {
    const TOL: f64 = 1e-7;
    let steps = sweep_steps()?;
    let p1s = [0.1, 0.3, 0.5, 0.7, 0.9];
    let mut worst = 0.0f64;
    let mut worst_at = String::new();
    let mut pairs = 0u32;
    for (label, step) in &steps {
        for &p1 in &p1s {
            let (variational, inverse) = bar_lambda_parts(step, p1)?;
            let gap = (variational - inverse * scale).abs();
            if gap > worst {
                worst = gap;
                worst_at = format!("{label}, p1={p1}");
            }
            pairs += 1;
        }
    }
    Ok((
        worst <= TOL,
        format!("max |variational − inverse| = {worst:.2e} over {pairs} pairs (tol {TOL:.0e}, worst at {worst_at})"),
    ))
}

/// Criterion 2: for two-point steps the tilt constant has the closed form
/// `ln(1 + sqrt(1 − p1^2)) − ln p1`; match to 1e-8 across p1 = 0.1 … 0.9.
fn c02_rademacher_closed_form(scale: f64) -> Result<(bool, String)> {
    const TOL: f64 = 1e-8;
    let step = StepDistribution::rademacher();
    let mut worst = 0.0f64;
    let mut worst_p1 = 0.0;
    for i in 1..=9u32 {
        let p1 = f64::from(i) / 10.0;
        let computed = bar_lambda(&step, p1)?;
        let closed = ((1.0 + (1.0 - p1 * p1).sqrt()).ln() - p1.ln()) * scale;
        let gap = (computed - closed).abs();
        if gap > worst {
            worst = gap;
            worst_p1 = p1;
        }
    }
    Ok((
        worst <= TOL,
        format!("max |computed − closed form| = {worst:.2e} over 9 points (tol {TOL:.0e}, worst at p1={worst_p1})"),
    ))
}

/// Criterion 3: the damped fixed-point iteration converges monotonically
/// from below to the tilt constant — within 1e-6 in at most 10^4 steps —
/// on 20 admissible (step, p1) configurations.
fn c03_fixed_point(scale: f64) -> Result<(bool, String)> {
    const TOL: f64 = 1e-6;
    const MAX_ITER: usize = 10_000;
    let steps = sweep_steps()?;
    let p1s = [0.15, 0.35, 0.55, 0.75, 0.9];
    let mut worst_gap = 0.0f64;
    let mut max_iters = 0usize;
    let mut monotone = true;
    for (_, step) in &steps {
        for &p1 in &p1s {
            let target = bar_lambda(step, p1)? * scale;
            let alpha = default_alpha_iter(step, p1)?;
            let trace = iterate_fixed_point(step, p1, alpha, target.abs() / 1e3, 5e-7, MAX_ITER)?;
            monotone &= trace.trace.windows(2).all(|w| w[1] >= w[0] - 1e-12);
            worst_gap = worst_gap.max((trace.limit - target).abs());
            max_iters = max_iters.max(trace.iterations);
        }
    }
    Ok((
        monotone && worst_gap <= TOL && max_iters <= MAX_ITER,
        format!(
            "max |limit − tilt constant| = {worst_gap:.2e} (tol {TOL:.0e}), max iterations {max_iters} (cap {MAX_ITER}), monotone: {monotone}"
        ),
    ))
}

/// Criterion 4: the Gaussian shift and sacrifice rates hit their closed
/// forms.  `I((−∞,0], 3/4)` is the 0.75-quantile of the standard normal;
/// `I([0,1], 0.9)` is infinite (no shift of a unit window reaches mass 0.9);
/// `J([0,1], 0.9) = 1 − (1/2 / z_{0.95})^2` — the widest scaled window
/// `[0,1]/s` with mass ≥ 0.9 is the centered one, giving
/// `s = 1/(2 z_{0.95})` and sacrificed fraction `1 − s^2`; `J((−∞,0], 0.9)`
/// is 0 because shifting a half-line reaches any mass free of charge.
fn c04_gaussian_oracles(scale: f64) -> Result<(bool, String)> {
    const TOL: f64 = 1e-6;
    // Φ^{-1}(0.75), to full precision.
    const SHIFT_ORACLE: f64 = 0.674_489_750_196_081_7;
    // 1 − (0.5/Φ^{-1}(0.95))^2 with Φ^{-1}(0.95) = 1.644853626951472.
    const SACRIFICE_ORACLE: f64 = 0.907_597_122_632_951_3;
    let half = TargetSet::parse("(-inf,0]")?;
    let unit = TargetSet::parse("[0,1]")?;

    let shift = i_rate(&half, 0.75)?.value;
    let shift_gap = (shift - SHIFT_ORACLE * scale).abs();

    let unreachable = i_rate(&unit, 0.9)?.value;

    let sacrifice = j_rate(&unit, 0.9)?.value;
    let sacrifice_gap = (sacrifice - SACRIFICE_ORACLE * scale).abs();

    let free = j_rate(&half, 0.9)?.value;

    let pass = shift_gap <= TOL
        && unreachable.is_infinite()
        && sacrifice_gap <= TOL
        && free.abs() <= 1e-12;
    Ok((
        pass,
        format!(
            "shift gap {shift_gap:.2e}, window rate = {unreachable}, sacrifice gap {sacrifice_gap:.2e} (tol {TOL:.0e}), half-line sacrifice = {free:.1e}"
        ),
    ))
}

/// Criterion 5: the mean of the empirical occupation fraction of
/// `sqrt(n)·(−∞, 0]` should shadow the central limit theorem's 1/2.  Probed
/// at depth 24 with 2000 replicas and a 3-standard-error band.
///
/// Expected to fail at this depth: the mean fraction equals the single-walk
/// probability P(S_n ≤ 0) exactly, and on the two-point lattice at even
/// depth that probability carries the full atom at the origin —
/// `1/2 + binom(n, n/2)/2^(n+1)` ≈ 0.5806 at n = 24, about 0.33/sqrt(n)
/// above the limit and far outside any honest error band at this replica
/// count.  The atom decays like `1/sqrt(2 pi n)`, so no reachable depth
/// rescues the closed half-line; the check is kept faithful to the limit
/// statement rather than recentred.
fn c05_clt_shadow(scale: f64) -> Result<(bool, String)> {
    const N: u32 = 24;
    const REPLICAS: usize = 2000;
    let offspring = OffspringDistribution::finite(&[(1, 0.5), (2, 0.5)])?;
    let step = StepDistribution::rademacher();
    let cfg = BrwConfig::new(offspring, step.clone(), f64::INFINITY, 0xC5)?;
    let set = TargetSet::parse("(-inf,0]")?;
    let scale_n = f64::from(N).sqrt();

    let mut rng = ChaCha8Rng::seed_from_u64(0xC5);
    let mut sum = 0.0f64;
    let mut sumsq = 0.0f64;
    for _ in 0..REPLICAS {
        let mut pop = Population::lattice_root();
        for _ in 0..N {
            pop = advance(&pop, &cfg, &mut rng)?;
        }
        let frac = empirical_measure(&pop, &set, scale_n);
        sum += frac;
        sumsq += frac * frac;
    }
    let mean = sum / REPLICAS as f64;
    let var = (sumsq - sum * sum / REPLICAS as f64) / (REPLICAS as f64 - 1.0);
    let se = (var / REPLICAS as f64).sqrt();

    // Exact mean for the diagnostic: P(S_24 ≤ 0) from the 24-fold
    // convolution of the two-point step.
    let pmf = convolve_n(&step, N)?;
    let exact: f64 = pmf.iter().filter(|&&(x, _)| x <= 0).map(|&(_, p)| p).sum();

    let target = 0.5 * scale;
    let gap = (mean - target).abs();
    Ok((
        gap <= 3.0 * se,
        format!(
            "sample mean {mean:.4} ± {se:.4} vs limit {target}: gap = {:.1} SE (band 3 SE); exact mean P(S_{N} ≤ 0) = {exact:.4} — the origin atom keeps even-depth closed half-lines {:.4} above 1/2",
            gap / se,
            exact - 0.5
        ),
    ))
}

/// Criterion 6: at depth 2000 the exact i.i.d. two-point tail
/// `P(S_n ≤ −0.3 n)` matches the Cramér rate: `−ln P / n` within 10%
/// (relative) of the analytic rate at slope 0.3.
fn c06_exact_tail(scale: f64) -> Result<(bool, String)> {
    const N: u32 = 2000;
    const SLOPE: f64 = 0.3;
    const REL_TOL: f64 = 0.10;
    let step = StepDistribution::rademacher();
    let pmf = convolve_n(&step, N)?;
    let threshold = -(SLOPE * f64::from(N));
    let mass: f64 =
        pmf.iter().filter(|&&(x, _)| (x as f64) <= threshold).map(|&(_, p)| p).sum();
    let empirical_rate = -mass.ln() / f64::from(N);
    let analytic = cramer_rate(&step, SLOPE)? * scale;
    let rel = (empirical_rate - analytic).abs() / analytic;
    Ok((
        rel <= REL_TOL,
        format!(
            "−ln P(S_{N} ≤ −{:.0})/{N} = {empirical_rate:.6} vs rate {analytic:.6}: relative gap {:.1}% (tol {:.0}%)",
            -threshold,
            rel * 100.0,
            REL_TOL * 100.0
        ),
    ))
}

/// Spine guidance for the unbiasedness configs: tilt at the two-point tilt
/// constant for p1 = 1/2, balanced offspring mixture so importance weights
/// stay bounded near 1.
fn small_spine_schedule(t_n: u32) -> SpineSchedule {
    SpineSchedule {
        t_n,
        window: (-1.1, -0.9),
        tilt: 2.0f64.acosh(),
        sign: -1.0,
        a: 3.0f64.sqrt() / 2.0,
        eps: 0.1,
        eta: 0.05,
        delta_offspring: 0.5,
    }
}

/// Burst guidance for the unbiasedness configs: depth-1 triple burst, spine
/// edges (when present) windowed onto the downward step atom.
fn small_burst_schedule(t_n: u32) -> BottcherSchedule {
    BottcherSchedule {
        t_n,
        s_n: 1,
        d: 3,
        spine_window: (-1.5, -0.5),
        subtree_bound: 1.0,
        level_windows: None,
        x0: -0.9,
        eta: 0.03,
        n0: 0,
        delta_offspring: 0.5,
        delta_window: 0.5,
    }
}

/// Criterion 7: both importance-sampling estimators are unbiased — on six
/// exactly enumerable configurations (depths 2–4), every one of five seeded
/// runs with 10^5 replicas lands within 4 standard errors of the exact event
/// probability.
fn c07_unbiasedness(scale: f64) -> Result<(bool, String)> {
    const REPLICAS: u64 = 100_000;
    const SEEDS: u64 = 5;
    let set = TargetSet::parse("(-inf,0]")?;
    let step = StepDistribution::rademacher();

    let mut worst_z = 0.0f64;
    let mut worst_at = String::new();
    let mut runs = 0u32;
    let mut check = |label: String, exact: f64, r: &EstimationResult| {
        let z = (r.estimate - exact * scale).abs() / r.std_error.max(1e-12);
        if z > worst_z {
            worst_z = z;
            worst_at = label;
        }
        runs += 1;
    };

    // Lockstep-spine estimator on single-lineage-capable offspring.
    let offspring = OffspringDistribution::finite(&[(1, 0.5), (2, 0.5)])?;
    let cfg = BrwConfig::new(offspring.clone(), step.clone(), f64::INFINITY, 0)?;
    for &(n, p, t_n) in &[(2u32, 1.0f64, 1u32), (3, 0.75, 1), (4, 0.5, 2)] {
        let exact = exact_event_prob(&offspring, &step, n, &set, p)?;
        let sched = small_spine_schedule(t_n);
        for seed in 0..SEEDS {
            let r = is_schroder_estimate(&cfg, n, &set, p, &sched, REPLICAS, seed)?;
            check(format!("spine n={n} p={p} seed={seed}"), exact, &r);
        }
    }

    // Forced-burst estimator on minimal-offspring-2 laws.
    let offspring = OffspringDistribution::finite(&[(2, 0.5), (3, 0.5)])?;
    let cfg = BrwConfig::new(offspring.clone(), step.clone(), f64::INFINITY, 0)?;
    for &(n, p, t_n) in &[(2u32, 1.0f64, 1u32), (2, 0.75, 1), (3, 0.5, 2)] {
        let exact = exact_event_prob(&offspring, &step, n, &set, p)?;
        let sched = small_burst_schedule(t_n);
        for seed in 0..SEEDS {
            let r = is_bottcher_estimate(&cfg, n, &set, p, &sched, REPLICAS, seed)?;
            check(format!("burst n={n} p={p} seed={seed}"), exact, &r);
        }
    }

    Ok((
        worst_z <= 4.0,
        format!("max |estimate − exact| = {worst_z:.2} SE over {runs} runs (band 4 SE, worst at {worst_at})"),
    ))
}

/// Criterion 8: the single-lineage decay prediction is visible in
/// simulation.  For balanced {1, 2} offspring with two-point steps on the
/// closed left half-line at fraction 3/4, the predicted constant is the
/// tilt constant times the shift rate; importance-sampled estimates over
/// depths 16–144 fitted against sqrt(n) must recover it within 30% with
/// r² ≥ 0.98.
fn c08_schroder_trend(scale: f64) -> Result<(bool, String)> {
    const P: f64 = 0.75;
    const REPLICAS: u64 = 20_000;
    const DEPTHS: [u32; 5] = [16, 36, 64, 100, 144];
    const REL_TOL: f64 = 0.30;
    const R2_MIN: f64 = 0.98;
    let offspring = OffspringDistribution::finite(&[(1, 0.5), (2, 0.5)])?;
    let step = StepDistribution::rademacher();
    let set = TargetSet::parse("(-inf,0]")?;
    // Populations reach 1.5^144 ≈ 1.6e25; the count-based engine advances
    // them exactly in distribution, so the cap is lifted entirely.
    let cfg = BrwConfig::new(offspring, step.clone(), f64::INFINITY, 0)?;

    let predicted = bar_lambda(&step, 0.5)? * i_rate(&set, P)?.value * scale;

    let mut results = Vec::with_capacity(DEPTHS.len());
    let mut min_ess = f64::INFINITY;
    for &n in &DEPTHS {
        let mut sched =
            crate::estimator::schedule_schroder(&step, &set, P, n, 3.0f64.sqrt() / 2.0, None, None)?;
        // The default rare-offspring mixture keeps forced lineages cheap but
        // lets single weights reach 1/delta per generation; over ~10 forced
        // generations that tail wrecks the variance.  A balanced mixture
        // keeps every per-edge weight within a factor ~2 of one.
        sched.delta_offspring = 0.5;
        let r = is_schroder_estimate(&cfg, n, &set, P, &sched, REPLICAS, 0xC800 + u64::from(n))?;
        min_ess = min_ess.min(r.effective_sample_size);
        results.push(r);
    }
    let fit = fit_rate(&results, &Speed::Poly { num_exp: 0.5, log_exp: 0.0 })?;
    let rel = (fit.slope - predicted).abs() / predicted;
    Ok((
        rel <= REL_TOL && fit.r_squared >= R2_MIN,
        format!(
            "fitted decay {:.4} vs predicted {predicted:.4}: gap {:.1}% (tol {:.0}%), r² = {:.4} (min {R2_MIN}), min ESS {min_ess:.0}",
            fit.slope,
            rel * 100.0,
            REL_TOL * 100.0,
            fit.r_squared
        ),
    ))
}

/// Criterion 9: the lower-tail population-size envelope
/// `P(|Z_n| = k) ≤ C · min(1/k, k^{χ−1} p1^n)` with the constant frozen
/// from depth 1.
///
/// Expected to fail as stated: the depth-1 ratios are exactly 1, so the
/// frozen constant is 1, but the exact size law crosses the envelope from
/// depth 3 on (ratio 1.07 at depth 3, rising to ≈ 1.30 by depth 12 around
/// the lower-tail crossover k ≈ p1^{−n/χ}).  The envelope itself is sound —
/// a constant near 1.4 covers every depth checked — but no calibration at
/// depth 1 can dominate later depths, and inflating the constant here would
/// test nothing.  Kept faithful, with the worst offender reported.
fn c09_size_envelope(scale: f64) -> Result<(bool, String)> {
    const MAX_DEPTH: u32 = 12;
    let offspring = OffspringDistribution::finite(&[(1, 0.5), (2, 0.5)])?;
    let chi = schroder_exponent(&offspring)?;
    let p1 = 0.5f64;
    let envelope = |k: usize, n: u32| -> f64 {
        let kf = k as f64;
        (1.0 / kf).min(kf.powf(chi - 1.0) * p1.powi(n as i32))
    };

    // Freeze the constant at depth 1.
    let law1 = population_law_exact(&offspring, 1)?;
    let mut constant = 0.0f64;
    for k in 1..=law1.max_size() {
        let p = law1.prob(k);
        if p > 0.0 {
            constant = constant.max(p / envelope(k, 1));
        }
    }
    constant *= scale;

    let mut worst_ratio = 0.0f64;
    let mut worst_at = (0u32, 0usize);
    for n in 1..=MAX_DEPTH {
        let law = population_law_exact(&offspring, n)?;
        for k in 1..=law.max_size() {
            let p = law.prob(k);
            if p > 0.0 {
                let ratio = p / envelope(k, n);
                if ratio > worst_ratio {
                    worst_ratio = ratio;
                    worst_at = (n, k);
                }
            }
        }
    }
    Ok((
        worst_ratio <= constant * (1.0 + 1e-12),
        format!(
            "max P(|Z_n|=k)/envelope = {worst_ratio:.4} at depth {} size {} vs depth-1 constant {constant:.4}; the envelope needs headroom ≈ {:.2} that no depth-1 calibration provides",
            worst_at.0,
            worst_at.1,
            worst_ratio / (constant / scale)
        ),
    ))
}

/// Criterion 10: starting from larger configurations, the occupation
/// fraction concentrates — the fitted slope of `ln P(deviation)` against
/// the starting size is negative, and steeper for a wider deviation band.
fn c10_concentration(scale: f64) -> Result<(bool, String)> {
    const SIZES: [u32; 4] = [8, 16, 32, 64];
    const N: u32 = 16;
    const REPLICAS: u64 = 20_000;
    let offspring = OffspringDistribution::finite(&[(1, 0.5), (2, 0.5)])?;
    let step = StepDistribution::rademacher();
    let cfg = BrwConfig::new(offspring, step, f64::INFINITY, 0)?;
    let set = TargetSet::parse("(-inf,0]")?;
    let tight = concentration_check(&cfg, &SIZES, &set, 0.1, N, REPLICAS, 0xC10)?;
    let wide = concentration_check(&cfg, &SIZES, &set, 0.2, N, REPLICAS, 0xC10)?;
    let tight_slope = tight.slope * scale;
    Ok((
        tight_slope < 0.0 && wide.slope < tight_slope,
        format!(
            "slope at band 0.1: {tight_slope:.4} ({} sizes), at band 0.2: {:.4} ({} sizes); require both negative and the wide band steeper",
            tight.used, wide.slope, wide.used
        ),
    ))
}

/// Criterion 11: the forced-burst construction has the geometry it claims.
/// (a) The probability that an unweighted replica realizes the forced
/// configuration matches the closed-form product of offspring and window
/// probabilities within 4 standard errors.  (b) Conditioned on the forced
/// configuration, the event probability increases along the depth grid —
/// deeper bursts plant a larger minimal-tree fraction near the target.
fn c11_burst_geometry(scale: f64) -> Result<(bool, String)> {
    // (a) Two-point steps, a depth-1 triple burst after one spine edge
    // pinned to the downward atom: the forced tree has three minimal-law
    // parents (two forced to 2, one forced to 3) and one windowed spine
    // edge of probability 1/2; burst edges always land in [−1, 1].
    const PI_ORACLE: f64 = 0.0625;
    let offspring = OffspringDistribution::finite(&[(2, 0.5), (3, 0.5)])?;
    let step = StepDistribution::rademacher();
    let cfg = BrwConfig::new(offspring.clone(), step.clone(), f64::INFINITY, 0)?;
    let mut sched = small_burst_schedule(2);
    sched.spine_window = (-1.0, -1.0);
    let closed = bottcher_event_closed_form(&offspring, &step, &sched)?;
    let closed_gap = (closed - PI_ORACLE * scale).abs();
    let mc = bottcher_spine_event_rate(&cfg, &sched, 20_000, 0xB11A)?;
    let z = (mc.estimate - closed).abs() / mc.std_error.max(1e-12);

    // (b) Heavy-tailed steps where one long spine jump carries the whole
    // displacement: the windows scale with the target, the burst deepens
    // with the horizon, and conditional success must rise along the grid.
    let heavy = StepDistribution::weibull(1.0, 0.5)?;
    let cfg = BrwConfig::new(offspring, heavy, f64::INFINITY, 0)?;
    let set = TargetSet::parse("(-inf,0]")?;
    const P: f64 = 0.6;
    const REPLICAS: u64 = 2000;
    let mut success = Vec::new();
    for (i, &n) in [16u32, 36, 64].iter().enumerate() {
        let s_n = i as u32 + 1;
        let root = f64::from(n).sqrt();
        let sched = BottcherSchedule {
            t_n: s_n + 1,
            s_n,
            d: 3,
            spine_window: (-1.1 * 0.9 * root, -0.9 * 0.9 * root),
            subtree_bound: 1.0,
            level_windows: None,
            x0: -0.9,
            eta: 0.1,
            n0: 0,
            delta_offspring: 0.5,
            delta_window: 0.5,
        };
        let r = bottcher_conditional_success(&cfg, n, &set, P, &sched, REPLICAS, 0xB000 + u64::from(n))?;
        success.push((n, r.estimate * if i == 0 { scale } else { 1.0 }, r.std_error));
    }
    let rising = success.windows(2).all(|w| w[1].1 > w[0].1);

    Ok((
        closed_gap <= 1e-12 && z <= 4.0 && rising,
        format!(
            "closed form {closed:.6} vs oracle gap {closed_gap:.1e}, acceptance z = {z:.2} (band 4 SE); conditional success {} — rising: {rising}",
            success
                .iter()
                .map(|(n, s, se)| format!("n={n}: {s:.3}±{se:.3}"))
                .collect::<Vec<_>>()
                .join(", ")
        ),
    ))
}
