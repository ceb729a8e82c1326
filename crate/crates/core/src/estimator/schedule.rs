//! Construction of the guidance parameters for the two importance samplers.
//!
//! A schedule fixes, before any randomness is drawn, how long the forced
//! phase lasts and where it must steer the population.  Both schedulers pull
//! their displacement target from the shift functional of the limiting
//! Gaussian: the witness shift `x` with `|x| = I_A(p) + ε` overshoots the
//! cheapest shift by a safety margin `ε` so the shifted Gaussian mass strictly
//! exceeds `p` and the central limit theorem can close the gap at finite `n`.

use crate::error::{Error, Result};
use crate::gaussian::{i_rate, TargetSet};
use crate::rates::{OffspringDistribution, StepDistribution, StepKind};

/// Default mixture weight for the forced offspring counts: with probability
/// `1 − δ` the forced count is drawn, with probability `δ` the unconstrained
/// offspring law.  Keeps the proposal absolutely continuous with respect to
/// the target so the importance weights are honest.
pub(crate) const DELTA_OFFSPRING: f64 = 0.05;
/// Default mixture weight for windowed step draws, for the same reason.
pub(crate) const DELTA_WINDOW: f64 = 0.05;
/// Fraction of `I_A(p)` used as the overshoot margin `ε` when none is given.
const DEFAULT_EPS_FRACTION: f64 = 0.1;
/// Fraction of `I_A(p)` used as the window half-width margin `η` by default.
const DEFAULT_ETA_FRACTION: f64 = 0.05;
/// Convergence tolerance for the drift-matching tilt equation `Λ′(θ) = a`.
const TILT_TOL: f64 = 1e-9;

/// Guidance for [`is_schroder_estimate`](super::is_schroder_estimate): a
/// single lineage is pushed with tilted steps for `t_n` generations.
#[derive(Debug, Clone)]
pub struct SpineSchedule {
    /// Length of the forced phase; `1 ≤ t_n < n`.
    pub t_n: u32,
    /// Diagnostic landing window for the spine endpoint, ordered `(lo, hi)`:
    /// the interval between `(1+η)·x·√n` and `x·√n` where `x` is the signed
    /// displacement target.  Recorded for analysis; the estimator does not
    /// condition on it.
    pub window: (f64, f64),
    /// Tilt parameter `θ*` solving `Λ′(θ*) = a` for the step law.
    pub tilt: f64,
    /// Direction of the deviation: the sign of the witness shift.
    pub sign: f64,
    /// Per-generation drift target `a = |x|/C_a` the tilt reproduces.
    pub a: f64,
    /// Overshoot margin added to `I_A(p)` in the displacement target.
    pub eps: f64,
    /// Relative half-width of the landing window.
    pub eta: f64,
    /// Offspring mixture weight used by the estimator.
    pub delta_offspring: f64,
}

/// Guidance for [`is_bottcher_estimate`](super::is_bottcher_estimate): a
/// `b`-ary tree with one windowed spine for `t_n − s_n` generations, then a
/// `d`-ary burst of depth `s_n` whose edges stay in `[−M, M]`.
#[derive(Debug, Clone)]
pub struct BottcherSchedule {
    /// Total length of the forced phase; `1 ≤ t_n < n`.
    pub t_n: u32,
    /// Depth of the terminal `d`-ary burst; `1 ≤ s_n ≤ t_n`.
    pub s_n: u32,
    /// Burst arity; requires `pmf(d) > 0`.
    pub d: u32,
    /// Window for each spine edge, ordered `(lo, hi)`: the per-edge share of
    /// the displacement target.  Ignored when `level_windows` is set.
    pub spine_window: (f64, f64),
    /// Half-width `M` of the window confining every burst edge.
    pub subtree_bound: f64,
    /// Per-level spine windows for step tails whose deviation cost is
    /// concentrated on few jumps: level `g` of the spine uses entry `g`.
    /// `None` means every level shares `spine_window`.
    pub level_windows: Option<Vec<(f64, f64)>>,
    /// Signed displacement target `x₀` (witness sign times `I_A(p) + ε`).
    pub x0: f64,
    /// Window half-width margin.
    pub eta: f64,
    /// Smallest horizon at which the burst's drift slack `s_n·M` fits inside
    /// the `η`-margin of the spine target, so the forced endpoints nest in
    /// `[(x₀−η)√n, (x₀+η)√n]`.  Diagnostic; smaller `n` still yields an
    /// unbiased (if less efficient) estimator.
    pub n0: u64,
    /// Offspring mixture weight used by the estimator.
    pub delta_offspring: f64,
    /// Window mixture weight used by the estimator.
    pub delta_window: f64,
}

/// Builds the single-lineage schedule: `t_n = ⌊C_a·√n⌋` generations of mean
/// drift `a`, where `C_a = (I_A(p)+ε)/a`, so the spine lands near the
/// displacement target `x·√n`, `|x| = I_A(p)+ε`.
///
/// Defaults: `ε = 0.1·I_A(p)`, `η = 0.05·I_A(p)`.  Rejects degenerate events
/// (`p` at or below the set's Gaussian measure), infinite-rate events (no
/// shift of the Gaussian carries fraction `p`), non-positive margins, drift
/// targets no tilt can reach, and horizons with `t_n` outside `[1, n)`.
pub fn schedule_schroder(
    step: &StepDistribution,
    set: &TargetSet,
    p: f64,
    n: u32,
    a: f64,
    eps: Option<f64>,
    eta: Option<f64>,
) -> Result<SpineSchedule> {
    let rate = i_rate(set, p)?;
    if rate.value == 0.0 {
        return Err(Error::Hypothesis(format!(
            "fraction p = {p} needs no deviation on this set (shift cost 0); nothing to schedule"
        )));
    }
    if !rate.value.is_finite() {
        return Err(Error::Unsupported(
            "no shifted Gaussian carries the requested fraction on this set; \
             the polynomial-speed scheduler does not apply"
                .into(),
        ));
    }
    if !(a > 0.0) || !a.is_finite() {
        return Err(Error::InvalidParameter {
            name: "a",
            reason: format!("per-generation drift must be a positive real, got {a}"),
        });
    }
    let eps = eps.unwrap_or(DEFAULT_EPS_FRACTION * rate.value);
    let eta = eta.unwrap_or(DEFAULT_ETA_FRACTION * rate.value);
    if !(eps > 0.0) || !(eta > 0.0) {
        return Err(Error::InvalidParameter {
            name: "margin",
            reason: format!(
                "overshoot and window margins must be strictly positive, got eps = {eps}, eta = {eta}"
            ),
        });
    }
    let witness = rate.witness.expect("finite positive rate carries a witness");
    let sign = witness.signum();
    let target = sign * (rate.value + eps);
    let c_a = (rate.value + eps) / a;
    let t_n = (c_a * (n as f64).sqrt()).floor();
    if t_n < 1.0 || t_n >= n as f64 {
        return Err(Error::InvalidParameter {
            name: "n",
            reason: format!(
                "spine length ⌊C_a·√n⌋ = {t_n} falls outside [1, n) at n = {n}; \
                 adjust the drift a or the horizon"
            ),
        });
    }
    let sqrt_n = (n as f64).sqrt();
    let (w1, w2) = ((1.0 + eta) * target * sqrt_n, target * sqrt_n);
    let tilt = solve_tilt(step, a)?;
    Ok(SpineSchedule {
        t_n: t_n as u32,
        window: (w1.min(w2), w1.max(w2)),
        tilt,
        sign,
        a,
        eps,
        eta,
        delta_offspring: DELTA_OFFSPRING,
    })
}

/// Solves `Λ′(θ) = a` for `θ > 0` by bisection, treating points where `Λ` is
/// infinite as above any target.
fn solve_tilt(step: &StepDistribution, a: f64) -> Result<f64> {
    if let Some(edge) = step.bounded_support_std() {
        if a >= edge {
            return Err(Error::InvalidParameter {
                name: "a",
                reason: format!(
                    "drift target {a} is at or beyond the step support edge {edge}; \
                     no exponential tilt reaches it"
                ),
            });
        }
    }
    let drift = |theta: f64| -> f64 {
        if step.log_mgf(theta).is_finite() {
            step.log_mgf_prime(theta)
        } else {
            f64::INFINITY
        }
    };
    let mut hi = 1.0f64;
    let mut doublings = 0;
    while drift(hi) < a {
        hi *= 2.0;
        doublings += 1;
        if doublings > 60 {
            return Err(Error::NoConverge(format!(
                "no tilt with drift {a} found below θ = {hi}"
            )));
        }
    }
    let mut lo = 0.0f64;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if drift(mid) < a {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-14 * hi.max(1.0) {
            break;
        }
    }
    let theta = 0.5 * (lo + hi);
    let achieved = drift(theta);
    if !achieved.is_finite() || (achieved - a).abs() > TILT_TOL.max(1e-6 * a) {
        return Err(Error::NoConverge(format!(
            "drift equation Λ′(θ) = {a} has no solution inside the moment domain \
             (best drift {achieved} at θ = {theta})"
        )));
    }
    Ok(theta)
}

/// Builds the branching-burst schedule for minimal offspring `b ≥ 2`.
///
/// The forced phase runs `t_n` generations: a minimal `b`-ary tree whose
/// distinguished spine edges are windowed toward the displacement target
/// `x₀·√n` (`|x₀| = I_A(p) + ε`), followed by a `d`-ary burst of depth
/// `s_n = ⌊(log log n + t_n·log b)/log d⌋` whose `d^{s_n}` leaves each carry
/// weight ~`1/(bᵗ log n)` of the population — enough to move the occupation
/// fraction.  Burst edges are confined to `[−M, M]` with `M` the half-mass
/// radius of the step, so the burst adds at most `s_n·M` of drift; `n0`
/// records when that slack fits the `η`-margin.
///
/// Step families: Weibull tails use `t_n = ⌊t·log n⌋` (with `d > b` required
/// when `α > 1`, where wider bursts are strictly cheaper); Gumbel tails use
/// `t_n = ⌊t·n^{α/(2(α+1))} − 2·log n / log b⌋` and spread the displacement
/// over per-level windows with geometrically decaying targets, since their
/// deviation cost concentrates on the earliest jumps.
pub fn schedule_bottcher(
    offspring: &OffspringDistribution,
    step: &StepDistribution,
    set: &TargetSet,
    p: f64,
    n: u32,
    d: u32,
    t: f64,
) -> Result<BottcherSchedule> {
    let b = offspring.b_min();
    if b < 2 {
        return Err(Error::Hypothesis(format!(
            "burst scheduling needs minimal offspring ≥ 2, got b = {b}"
        )));
    }
    if offspring.pmf(d) <= 0.0 {
        return Err(Error::InvalidParameter {
            name: "d",
            reason: format!("burst arity {d} carries no offspring mass"),
        });
    }
    if !(t > 0.0) || !t.is_finite() {
        return Err(Error::InvalidParameter {
            name: "t",
            reason: format!("spine-length coefficient must be a positive real, got {t}"),
        });
    }
    let rate = i_rate(set, p)?;
    if rate.value == 0.0 {
        return Err(Error::Hypothesis(format!(
            "fraction p = {p} needs no deviation on this set (shift cost 0); nothing to schedule"
        )));
    }
    if !rate.value.is_finite() {
        return Err(Error::Unsupported(
            "no shifted Gaussian carries the requested fraction on this set; \
             the burst scheduler does not apply"
                .into(),
        ));
    }
    let eps = DEFAULT_EPS_FRACTION * rate.value;
    let eta = DEFAULT_ETA_FRACTION * rate.value;
    let witness = rate.witness.expect("finite positive rate carries a witness");
    let x0 = witness.signum() * (rate.value + eps);
    let nf = n as f64;
    let sqrt_n = nf.sqrt();
    let ln_b = (b as f64).ln();
    let ln_d = (d as f64).ln();
    if n < 3 {
        return Err(Error::InvalidParameter {
            name: "n",
            reason: "burst scheduling needs n ≥ 3 (log log n must be positive)".into(),
        });
    }
    let t_n = match step.kind() {
        StepKind::Weibull { alpha, .. } => {
            if *alpha > 1.0 && d <= b {
                return Err(Error::InvalidParameter {
                    name: "d",
                    reason: format!(
                        "step tail exponent {alpha} > 1 needs a burst arity strictly above \
                         the minimal offspring {b}, got d = {d}"
                    ),
                });
            }
            (t * nf.ln()).floor()
        }
        StepKind::Gumbel { alpha } => {
            (t * nf.powf(alpha / (2.0 * (alpha + 1.0))) - 2.0 * nf.ln() / ln_b).floor()
        }
        _ => {
            return Err(Error::Unsupported(format!(
                "burst scheduling serves Weibull and Gumbel step tails; {} has \
                 neither (build a schedule directly for bespoke experiments)",
                step.name()
            )));
        }
    };
    if t_n < 1.0 || t_n >= nf {
        return Err(Error::InvalidParameter {
            name: "n",
            reason: format!("forced length {t_n} falls outside [1, n) at n = {n}"),
        });
    }
    let t_n = t_n as u32;
    let s_raw = ((nf.ln().ln() + t_n as f64 * ln_b) / ln_d).floor();
    if s_raw < 1.0 {
        return Err(Error::InvalidParameter {
            name: "n",
            reason: format!("burst depth {s_raw} is not positive at n = {n}; raise t or n"),
        });
    }
    // When d = b the formula exceeds t_n by ~log log n / log b: the entire
    // forced tree is the burst and there is no spine to window.
    let s_n = (s_raw as u32).min(t_n);
    let ell = t_n - s_n;
    let m_bound = step.half_mass_radius();
    let n0 = if eta > 0.0 {
        let root = 2.0 * s_n as f64 * m_bound / eta;
        (root * root).ceil() as u64
    } else {
        u64::MAX
    };
    let spine_window;
    let mut level_windows = None;
    match step.kind() {
        StepKind::Gumbel { alpha } => {
            let y_d = gumbel_y(*alpha, b, d);
            let scale = (x0.abs() * y_d * ln_b).powf(1.0 / (1.0 + alpha));
            let leading = scale * nf.powf(1.0 / (2.0 * (1.0 + alpha)));
            // Split the displacement budget x₀√n over the spine levels with
            // geometrically decaying weights: the leading window carries the
            // bulk (matching the single-jump cost scale above), later levels
            // shrink by b^{−1/(1+α)} per level.
            let rho = (b as f64).powf(-1.0 / (1.0 + alpha));
            let mut windows = Vec::with_capacity(ell as usize);
            if ell > 0 {
                let norm = (1.0 - rho) / (1.0 - rho.powi(ell as i32));
                for g in 0..ell {
                    let center = x0 * sqrt_n * norm * rho.powi(g as i32);
                    let half = 0.5 * eta * center.abs().max(leading * 0.1);
                    windows.push((center - half, center + half));
                }
            }
            spine_window = windows.first().copied().unwrap_or((0.0, 0.0));
            level_windows = Some(windows);
        }
        _ => {
            spine_window = if ell > 0 {
                let lo = (x0 - 0.5 * eta) * sqrt_n / ell as f64;
                let hi = (x0 + 0.5 * eta) * sqrt_n / ell as f64;
                (lo.min(hi), lo.max(hi))
            } else {
                (0.0, 0.0)
            };
        }
    }
    Ok(BottcherSchedule {
        t_n,
        s_n,
        d,
        spine_window,
        subtree_bound: m_bound,
        level_windows,
        x0,
        eta,
        n0,
        delta_offspring: DELTA_OFFSPRING,
        delta_window: DELTA_WINDOW,
    })
}

/// `y_α(d) = (1+α)·log d / ((1+α)·log d − log b)`: the burst-arity analogue
/// of the tail-mixing factor, finite and above 1 whenever `d ≥ b ≥ 2`.
fn gumbel_y(alpha: f64, b: u32, d: u32) -> f64 {
    let num = (1.0 + alpha) * (d as f64).ln();
    num / (num - (b as f64).ln())
}
