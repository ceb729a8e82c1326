//! The Legendre-transform layer over the step log-MGF: Cramér rate function,
//! inverse log-MGF, the tilt constant obtained from it, and the monotone
//! fixed-point iteration that recovers that constant without inverting anything.
//!
//! All quantities are extended-real: `f64::INFINITY` propagates through
//! suprema/infima, and NaN is treated as a bug (inputs are validated up front).

use crate::error::{Error, Result};
use crate::rates::step::{StepDistribution, StepKind};

/// Log moment generating function `Λ(t)` of the standardized step, as a free
/// function (convenience wrapper over [`StepDistribution::log_mgf`]).
pub fn log_mgf(step: &StepDistribution, t: f64) -> f64 {
    step.log_mgf(t)
}

/// Iteration diagnostics returned by [`iterate_fixed_point`].
#[derive(Debug, Clone)]
pub struct FixedPointTrace {
    /// Final iterate; guaranteed within `tol` of the true limit.
    pub limit: f64,
    /// Every iterate `L_0, L_1, …`, including the final one. Nondecreasing.
    pub trace: Vec<f64>,
    /// Number of update steps taken.
    pub iterations: usize,
    /// Rigorous bound on `limit`'s distance to the true fixed point, from the
    /// convexity inequality `Λ(L*) − Λ(L_k) ≥ Λ'(L_k)(L* − L_k)`.
    pub error_bound: f64,
}

const BRACKET_CAP: f64 = 1e8;
const GOLDEN_ITERS: u32 = 200;

fn require_cramer(step: &StepDistribution) -> Result<()> {
    if step.has_cramer() {
        Ok(())
    } else {
        Err(Error::Unsupported(format!(
            "step '{}' has no finite exponential moments; its log-MGF is degenerate",
            step.name()
        )))
    }
}

fn validate_p1(p1: f64) -> Result<f64> {
    if !(p1 > 0.0 && p1 < 1.0) {
        return Err(Error::InvalidParameter {
            name: "p1",
            reason: format!("must lie strictly inside (0, 1), got {p1}"),
        });
    }
    Ok(-p1.ln())
}

/// Golden-section minimum of a quasi-convex function on `[lo, hi]`.
/// Extended-real values are fine: `+INFINITY` at an endpoint steers the
/// search toward the finite interior.
fn golden_min<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64) -> (f64, f64) {
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let mut x1 = hi - INV_PHI * (hi - lo);
    let mut x2 = lo + INV_PHI * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    for _ in 0..GOLDEN_ITERS {
        if hi - lo < 1e-13 * hi.abs().max(1.0) {
            break;
        }
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - INV_PHI * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + INV_PHI * (hi - lo);
            f2 = f(x2);
        }
    }
    let xm = 0.5 * (lo + hi);
    let fm = f(xm);
    if f1 <= f2 && f1 <= fm {
        (x1, f1)
    } else if f2 <= fm {
        (x2, f2)
    } else {
        (xm, fm)
    }
}

/// Doubles `hi` until `f` stops decreasing across the doubling (or the cap is
/// hit), so that `[lo, 2·hi]` brackets the minimum of a quasi-convex `f`.
fn expand_bracket<F: Fn(f64) -> f64>(f: F, start: f64) -> f64 {
    let mut hi = start;
    let mut f_hi = f(hi);
    while hi < BRACKET_CAP {
        let f_next = f(2.0 * hi);
        if f_next < f_hi {
            hi *= 2.0;
            f_hi = f_next;
        } else {
            break;
        }
    }
    2.0 * hi
}

/// Generalized inverse `inf { t ≥ 0 : Λ(t) ≥ s }` of the nondecreasing map
/// `t ↦ Λ(t)` on the positive half-line. Values `Λ(t) = +∞` count as `≥ s`,
/// so a log-MGF that blows up at a finite domain edge is inverted correctly.
pub fn lambda_inverse(step: &StepDistribution, s: f64) -> Result<f64> {
    require_cramer(step)?;
    if !(s >= 0.0) {
        return Err(Error::InvalidParameter {
            name: "s",
            reason: format!("must be a nonnegative real, got {s}"),
        });
    }
    if s == 0.0 {
        return Ok(0.0);
    }
    let mut lo = 0.0_f64;
    let mut hi = 1.0_f64;
    while step.log_mgf(hi) < s {
        lo = hi;
        hi *= 2.0;
        if hi > BRACKET_CAP {
            // The level `s` is never reached on the whole domain; the inverse
            // is the supremum of that domain. No supported Cramér step has a
            // bounded log-MGF, so this is unreachable in practice.
            return Ok(f64::INFINITY);
        }
    }
    for _ in 0..200 {
        if hi - lo <= 1e-13 * hi.max(1.0) {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if step.log_mgf(mid) >= s {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Cramér rate function `γ(a) = sup_{t ≥ 0} { a t − Λ(t) }` of the
/// standardized step, extended to negative `a` by symmetry (`γ(−a) = γ(a)`).
///
/// For bounded-support steps, `γ(a) = +∞` beyond the essential supremum and
/// equals `−log P(X = ess sup X)` exactly at it (`+∞` when there is no atom).
pub fn cramer_rate(step: &StepDistribution, a: f64) -> Result<f64> {
    require_cramer(step)?;
    if a.is_nan() {
        return Err(Error::InvalidParameter {
            name: "a",
            reason: "must not be NaN".to_string(),
        });
    }
    let a = a.abs();
    if a == 0.0 {
        return Ok(0.0);
    }
    if let Some(edge) = step.bounded_support_std() {
        if a > edge + 1e-12 {
            return Ok(f64::INFINITY);
        }
        if (a - edge).abs() <= 1e-12 {
            return Ok(match step.kind() {
                // Atom of mass 1/2 at each support endpoint.
                StepKind::Rademacher => std::f64::consts::LN_2,
                // Continuous law: no mass exactly at the endpoint.
                _ => f64::INFINITY,
            });
        }
    }
    let objective = |t: f64| a * t - step.log_mgf(t);
    let hi = expand_bracket(|t| -objective(t), 1.0);
    let (_, neg_max) = golden_min(|t| -objective(t), 0.0, hi);
    Ok((-neg_max).max(0.0))
}

/// Both evaluations of the tilt constant for Schröder-regime decay: the
/// variational form `inf_{a>0} (log(1/p1) + γ(a)) / a` and the inverse form
/// `Λ⁻¹(log(1/p1))`. Exposed for the duality check in the acceptance suite.
pub(crate) fn bar_lambda_parts(step: &StepDistribution, p1: f64) -> Result<(f64, f64)> {
    require_cramer(step)?;
    let c = validate_p1(p1)?;
    let inverse = lambda_inverse(step, c)?;
    let ratio = |a: f64| {
        if a <= 0.0 {
            return f64::INFINITY;
        }
        match cramer_rate(step, a) {
            Ok(g) => (c + g) / a,
            Err(_) => f64::NAN,
        }
    };
    let hi = expand_bracket(&ratio, 1.0);
    let (_, variational) = golden_min(&ratio, 1e-9, hi);
    Ok((variational, inverse))
}

/// Tilt constant `B̄(p1) = Λ⁻¹(log(1/p1))` governing the exponential decay
/// speed in the Schröder regime with a finite Gaussian shift rate.
///
/// Computes the variational characterization `inf_{a>0} (log(1/p1) + γ(a))/a`
/// as well, verifies the two agree to `1e-7`, and returns the inverse form.
pub fn bar_lambda(step: &StepDistribution, p1: f64) -> Result<f64> {
    let (variational, inverse) = bar_lambda_parts(step, p1)?;
    if (variational - inverse).abs() > 1e-7 {
        return Err(Error::NoConverge(format!(
            "tilt-constant duality residual {:.3e} exceeds 1e-7 (variational {variational}, inverse {inverse})",
            (variational - inverse).abs()
        )));
    }
    Ok(inverse)
}

/// One step of the monotone fixed-point map
/// `F(L) = alpha_iter · inf_{u} { log(1/p1) + γ(u) − u L } + L`,
/// whose unique fixed point on `(0, B̄(p1)]` is `B̄(p1)`.
///
/// The infimum is evaluated variationally and also through the Legendre
/// identity `inf_u { γ(u) − u L } = −Λ(L)`, i.e. the closed dual form
/// `alpha_iter · (log(1/p1) − Λ(L)) + L`; the two must agree to `1e-8`.
pub fn f_map(step: &StepDistribution, p1: f64, alpha_iter: f64, l: f64) -> Result<f64> {
    require_cramer(step)?;
    let c = validate_p1(p1)?;
    if !(alpha_iter > 0.0 && alpha_iter.is_finite()) {
        return Err(Error::InvalidParameter {
            name: "alpha_iter",
            reason: format!("must be a positive real, got {alpha_iter}"),
        });
    }
    let limit = bar_lambda(step, p1)?;
    if !(l > 0.0) || l > limit + 1e-12 {
        return Err(Error::InvalidParameter {
            name: "l",
            reason: format!("must lie in (0, {limit:.12}] (the fixed-point limit), got {l}"),
        });
    }
    // γ is even, so for l > 0 the inner infimum over all real u is attained
    // at some u ≥ 0.
    let inner = |u: f64| match cramer_rate(step, u) {
        Ok(g) => g - u * l,
        Err(_) => f64::NAN,
    };
    let hi = expand_bracket(&inner, 1.0);
    let (_, inf_val) = golden_min(&inner, 0.0, hi);
    let variational = alpha_iter * (c + inf_val) + l;
    let dual = alpha_iter * (c - step.log_mgf(l)) + l;
    if (variational - dual).abs() > 1e-8 {
        return Err(Error::NoConverge(format!(
            "fixed-point map duality residual {:.3e} exceeds 1e-8 (variational {variational}, dual {dual})",
            (variational - dual).abs()
        )));
    }
    Ok(dual)
}

/// Admissible default damping for [`iterate_fixed_point`]: half the largest
/// step size allowed by the convergence condition `alpha_iter · Λ'(B̄) ≤ 1`.
pub fn default_alpha_iter(step: &StepDistribution, p1: f64) -> Result<f64> {
    let limit = bar_lambda(step, p1)?;
    let slope = step.log_mgf_prime(limit);
    if !(slope > 0.0 && slope.is_finite()) {
        return Err(Error::NoConverge(format!(
            "log-MGF derivative {slope} at the fixed point is not a positive real"
        )));
    }
    Ok(0.5 / slope)
}

/// Runs the damped fixed-point iteration `L_{k+1} = F(L_k)` from `l0` until a
/// rigorous error bound certifies `|L_k − B̄(p1)| ≤ tol`.
///
/// Preconditions: `l0 ∈ (0, B̄(p1)]` and the admissibility condition
/// `alpha_iter · Λ'(B̄(p1)) ≤ 1`, which makes the iterates nondecreasing. A
/// decreasing step is reported as an error rather than silently accepted. The
/// update uses the closed dual form of the map (the variational form is
/// asserted equal inside [`f_map`], which shares every ingredient).
///
/// Stopping rule: by convexity of `Λ`, with `L* = B̄(p1)`,
/// `L* − L_k ≤ (L_{k+1} − L_k) / (alpha_iter · Λ'(L_k))`,
/// so the iteration stops as soon as that right-hand side drops below `tol`.
pub fn iterate_fixed_point(
    step: &StepDistribution,
    p1: f64,
    alpha_iter: f64,
    l0: f64,
    tol: f64,
    max_iter: usize,
) -> Result<FixedPointTrace> {
    require_cramer(step)?;
    let c = validate_p1(p1)?;
    if !(tol > 0.0) {
        return Err(Error::InvalidParameter {
            name: "tol",
            reason: format!("must be positive, got {tol}"),
        });
    }
    let limit = bar_lambda(step, p1)?;
    if !(l0 > 0.0) || l0 > limit + 1e-12 {
        return Err(Error::InvalidParameter {
            name: "l0",
            reason: format!("must lie in (0, {limit:.12}] (the fixed-point limit), got {l0}"),
        });
    }
    let slope_at_limit = step.log_mgf_prime(limit);
    if alpha_iter * slope_at_limit > 1.0 + 1e-9 {
        return Err(Error::InvalidParameter {
            name: "alpha_iter",
            reason: format!(
                "inadmissible damping: alpha_iter * Lambda'(limit) = {:.6} exceeds 1",
                alpha_iter * slope_at_limit
            ),
        });
    }
    let mut trace = vec![l0];
    let mut l = l0;
    for k in 0..max_iter {
        let next = alpha_iter * (c - step.log_mgf(l)) + l;
        if next < l - 1e-12 {
            return Err(Error::NoConverge(format!(
                "fixed-point iterate decreased at step {k} ({l} -> {next}); alpha_iter is inadmissible"
            )));
        }
        let slope = step.log_mgf_prime(l).max(1e-300);
        let error_bound = (next - l).max(0.0) / (alpha_iter * slope);
        trace.push(next);
        l = next;
        if error_bound <= tol {
            return Ok(FixedPointTrace {
                limit: l,
                iterations: k + 1,
                error_bound,
                trace,
            });
        }
    }
    Err(Error::NoConverge(format!(
        "fixed-point iteration did not certify tolerance {tol} within {max_iter} steps (last iterate {l})"
    )))
}
