//! Gaussian measures of target sets and the two deviation functionals.
//!
//! For a target set `A` and a level `p` above its Gaussian measure, the
//! finite-rate functional is
//!
//! ```text
//!   I_A(p) = inf{ |x| : ν(A − x) ≥ p },
//! ```
//!
//! the minimal shift of the standard Gaussian that loads mass `p` on `A`
//! (infinite when no shift does), and the variance-reduction functional is
//!
//! ```text
//!   J_A(p) = inf{ y ∈ [0,1) : sup_x ν((A − x)/√(1−y)) ≥ p },
//! ```
//!
//! the minimal fraction of variance that must be given up, after an optimal
//! re-centering, to load mass `p` on `A`. Exactly one of `I_A(p) ∈ (0,∞)` or
//! `I_A(p) = ∞, J_A(p) ∈ (0,1)` is active for `p ∈ (ν(A), 1)`.
//!
//! `x ↦ ν(A−x)` is smooth, so both functionals are computed by a coarse scan
//! (step 0.01 over the window `[−(max|endpoint|+8), max|endpoint|+8]`, outside
//! which the function is within 1e-14 of its limits) with golden-section
//! refinement of the scan optima, and bisection for feasibility boundaries.
//! `J` uses an outer bisection on `y`, valid because the inner sup is
//! nondecreasing in `y` (add independent Gaussian noise to couple scales).

use super::normal::phi_interval;
use super::set::TargetSet;
use crate::error::{Error, Result};

/// ν(A): the standard Gaussian measure of the set.
pub fn gaussian_measure(set: &TargetSet) -> f64 {
    measure_shift_scale(set, 0.0, 1.0)
}

/// ν(aA + b) for `a > 0`: the Gaussian measure of the affinely mapped set.
pub fn measure_affine(set: &TargetSet, a: f64, b: f64) -> Result<f64> {
    if !(a > 0.0) || !a.is_finite() {
        return Err(Error::InvalidParameter {
            name: "a",
            reason: format!("affine scale must be a positive finite real, got {a}"),
        });
    }
    // N ∈ aA+b  ⟺  (N−b)/a ∈ A, i.e. (1/a)·N + (−b/a) ∈ A.
    Ok(measure_shift_scale(set, -b / a, 1.0 / a))
}

/// `P(s·N + x ∈ A)` for a standard normal `N` and `s > 0`; equals
/// `ν((A − x)/s)`. The workhorse behind every Gaussian evaluation here.
pub fn measure_shift_scale(set: &TargetSet, x: f64, s: f64) -> f64 {
    debug_assert!(s > 0.0);
    let mut total = 0.0;
    for iv in set.intervals() {
        let lo = if iv.lo == f64::NEG_INFINITY { f64::NEG_INFINITY } else { (iv.lo - x) / s };
        let hi = if iv.hi == f64::INFINITY { f64::INFINITY } else { (iv.hi - x) / s };
        total += phi_interval(lo, hi);
    }
    total.clamp(0.0, 1.0)
}

/// Result of the finite-rate functional: the rate (possibly `+∞`) and, when
/// finite, a feasible witness shift with `|witness| = value`.
#[derive(Debug, Clone, Copy)]
pub struct IRateResult {
    pub value: f64,
    pub witness: Option<f64>,
}

/// Result of the variance-reduction functional along with the optimal
/// re-centering `witness_x` and the variance fraction `witness_y = value`.
#[derive(Debug, Clone, Copy)]
pub struct JRateResult {
    pub value: f64,
    pub witness_x: f64,
    pub witness_y: f64,
}

/// Both functionals for one `(A, p)` pair.
#[derive(Debug, Clone, Copy)]
pub struct GaussianRates {
    pub i_rate: f64,
    pub j_rate: f64,
    pub witness_x: f64,
    pub witness_y: f64,
}

const SCAN_STEP: f64 = 0.01;
const SCAN_MARGIN: f64 = 8.0;
const BISECT_TOL: f64 = 1e-11;
const GOLDEN_TOL: f64 = 1e-12;
/// The inner sup is treated as missing `p` when it falls below `p − SUP_SLACK`.
const SUP_SLACK: f64 = 1e-12;

fn validate_p(set: &TargetSet, p: f64, allow_ge_nu: bool) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::InvalidParameter {
            name: "p",
            reason: format!("level must lie in (0,1), got {p}"),
        });
    }
    let nu = gaussian_measure(set);
    if !allow_ge_nu && p <= nu {
        return Err(Error::InvalidParameter {
            name: "p",
            reason: format!("level {p} is not above the set's Gaussian measure {nu}"),
        });
    }
    Ok(nu)
}

fn scan_window(set: &TargetSet) -> f64 {
    set.max_abs_endpoint().unwrap_or(0.0) + SCAN_MARGIN
}

/// Golden-section maximization of `f` on `[a, b]`.
fn golden_max(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> (f64, f64) {
    const INV_PHI: f64 = 0.618_033_988_749_894_8;
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    while b - a > GOLDEN_TOL {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
    }
    let mid = 0.5 * (a + b);
    (mid, f(mid))
}

/// Scans `g` over `[-w, w]` (about `steps` points), then golden-refines every
/// local maximum of the scan. Returns the refined global max and argmax.
fn scan_and_refine_max(g: &impl Fn(f64) -> f64, w: f64, steps: usize) -> (f64, f64) {
    let n = steps.max(8);
    let h = 2.0 * w / n as f64;
    let values: Vec<f64> = (0..=n).map(|i| g(-w + i as f64 * h)).collect();
    let mut best_x = -w;
    let mut best_v = values[0];
    for i in 0..=n {
        let left = if i == 0 { f64::NEG_INFINITY } else { values[i - 1] };
        let right = if i == n { f64::NEG_INFINITY } else { values[i + 1] };
        if values[i] >= left && values[i] >= right {
            let x = -w + i as f64 * h;
            let (xr, vr) = golden_max(g, (x - h).max(-w), (x + h).min(w));
            if vr > best_v {
                best_v = vr;
                best_x = xr;
            } else if values[i] > best_v {
                best_v = values[i];
                best_x = x;
            }
        }
    }
    (best_x, best_v)
}

/// The finite-rate functional `I_A(p)` with its witness shift.
pub fn i_rate(set: &TargetSet, p: f64) -> Result<IRateResult> {
    let nu = validate_p(set, p, true)?;
    if nu >= p {
        // At or below the set's own measure no shift is needed; by continuity
        // the rate degenerates to 0 (excluded from the deviation theorems).
        return Ok(IRateResult { value: 0.0, witness: Some(0.0) });
    }
    let g = |x: f64| measure_shift_scale(set, x, 1.0);
    let w = scan_window(set);
    let side_steps = (w / SCAN_STEP).ceil() as usize;
    let h = w / side_steps as f64;

    // Feasibility boundary on each side of 0, located on the scan grid and
    // sharpened by bisection on the bracketing cell.
    let side = |dir: f64| -> Option<f64> {
        let mut prev = 0.0f64;
        for i in 1..=side_steps {
            let x = i as f64 * h * dir;
            if g(x) >= p {
                let (mut bad, mut good) = (prev, x);
                for _ in 0..60 {
                    let mid = 0.5 * (bad + good);
                    if g(mid) >= p {
                        good = mid;
                    } else {
                        bad = mid;
                    }
                    if (good - bad).abs() <= BISECT_TOL {
                        break;
                    }
                }
                return Some(good);
            }
            prev = x;
        }
        None
    };

    let plus = side(1.0);
    let minus = side(-1.0);
    let best = match (plus, minus) {
        (Some(a), Some(b)) => Some(if a.abs() <= b.abs() { a } else { b }),
        (Some(a), None) => Some(a),
        (None, Some(b)) => Some(b),
        (None, None) => None,
    };
    if let Some(x) = best {
        return Ok(IRateResult { value: x.abs(), witness: Some(x) });
    }

    // No grid point is feasible. Either the level exceeds the global sup
    // (rate +∞), or feasibility is a near-tangent spike the grid missed.
    let (x_star, sup) = scan_and_refine_max(&g, w, 2 * side_steps);
    if sup >= p - SUP_SLACK {
        Ok(IRateResult { value: x_star.abs(), witness: Some(x_star) })
    } else {
        Ok(IRateResult { value: f64::INFINITY, witness: None })
    }
}

/// `sup_x ν((A−x)/s)` with its argmax, for scale `s > 0`.
fn sup_over_shifts(set: &TargetSet, s: f64) -> (f64, f64) {
    let g = |x: f64| measure_shift_scale(set, x, s);
    let w = scan_window(set) + s;
    // Resolution: fine enough to see features of width ~s, capped so extreme
    // scales stay affordable; golden refinement recovers the rest.
    let steps = ((2.0 * w / (SCAN_STEP * s)).ceil() as usize).clamp(200, 4000);
    let (x, v) = scan_and_refine_max(&g, w, steps);
    (v, x)
}

/// The variance-reduction functional `J_A(p)` with its witnesses.
pub fn j_rate(set: &TargetSet, p: f64) -> Result<JRateResult> {
    let nu = validate_p(set, p, true)?;
    let (sup0, x0) = sup_over_shifts(set, 1.0);
    if nu >= p || sup0 >= p {
        let x = if nu >= p { 0.0 } else { x0 };
        return Ok(JRateResult { value: 0.0, witness_x: x, witness_y: 0.0 });
    }
    if !set.has_interior() {
        return Err(Error::Hypothesis(
            "variance-reduction rate undefined: target set has empty interior".into(),
        ));
    }
    // sup_x ν((A−x)/√(1−y)) is nondecreasing in y, 1 in the limit y→1 for a
    // set with interior, and < p at y=0 here: bisect the boundary.
    let mut lo = 0.0f64; // infeasible
    let mut hi: f64 = 1.0 - 1e-12; // feasible (checked below)
    let (sup_hi, mut wx) = sup_over_shifts(set, (1.0 - hi).sqrt());
    if sup_hi < p {
        return Err(Error::NoConverge(format!(
            "inner sup only reaches {sup_hi} even at vanishing variance; level {p} unattainable"
        )));
    }
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        let (sup, x) = sup_over_shifts(set, (1.0 - mid).sqrt());
        if sup >= p {
            hi = mid;
            wx = x;
        } else {
            lo = mid;
        }
        if hi - lo <= 1e-11 {
            break;
        }
    }
    Ok(JRateResult { value: hi, witness_x: wx, witness_y: hi })
}

/// Both functionals, packaged with their witnesses.
pub fn gaussian_rates(set: &TargetSet, p: f64) -> Result<GaussianRates> {
    let i = i_rate(set, p)?;
    if i.value.is_finite() {
        Ok(GaussianRates {
            i_rate: i.value,
            j_rate: 0.0,
            witness_x: i.witness.unwrap_or(0.0),
            witness_y: 0.0,
        })
    } else {
        let j = j_rate(set, p)?;
        Ok(GaussianRates {
            i_rate: f64::INFINITY,
            j_rate: j.value,
            witness_x: j.witness_x,
            witness_y: j.witness_y,
        })
    }
}

/// ε-interior, ε-neighbourhood, and boundary ε-neighbourhood of a set.
/// `inner`/`boundary` are `None` when the corresponding set is empty.
#[derive(Debug, Clone)]
pub struct SetCalculus {
    pub inner: Option<TargetSet>,
    pub outer: TargetSet,
    pub boundary: Option<TargetSet>,
}

/// Computes the three ε-perturbations of a target set used in sandwich
/// arguments: `A⁻_ε ⊆ A ⊆ A⁺_ε` with the boundary collar controlling the gap.
pub fn set_calculus(set: &TargetSet, eps: f64) -> Result<SetCalculus> {
    if !(eps > 0.0) || !eps.is_finite() {
        return Err(Error::InvalidParameter {
            name: "eps",
            reason: format!("radius must be a positive finite real, got {eps}"),
        });
    }
    Ok(SetCalculus {
        inner: set.erode(eps),
        outer: set.dilate(eps),
        boundary: set.boundary_dilate(eps),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    // 30-digit reference values, rounded to nearest f64.
    const PHI_NEG_1: f64 = 0.158_655_253_931_457_051_41;
    const NU_0_2: f64 = 0.477_249_868_051_820_792_8;
    const PHI_INV_3_4: f64 = 0.674_489_750_196_081_743_2;
    const J_01_09: f64 = 0.907_597_122_632_951_280_09;
    const TWO_PHI_HALF: f64 = 0.382_924_922_548_026_207_28; // ν([0,1]−1/2)

    fn set(s: &str) -> TargetSet {
        TargetSet::parse(s).unwrap()
    }

    #[test]
    fn measures_match_reference() {
        assert!((gaussian_measure(&set("(-inf,inf)")) - 1.0).abs() <= 1e-12);
        assert!((gaussian_measure(&set("(-inf,0]")) - 0.5).abs() <= 1e-12);
        let a = set("(-inf,0]");
        assert!((measure_affine(&a, 1.0, 0.0).unwrap() - 0.5).abs() <= 1e-12);
        // ν((−∞,0] − 1) = Φ(−1).
        assert!((measure_affine(&a, 1.0, -1.0).unwrap() - PHI_NEG_1).abs() <= 1e-12);
        // ν(2·[0,1]) = ν([0,2]).
        assert!((measure_affine(&set("[0,1]"), 2.0, 0.0).unwrap() - NU_0_2).abs() <= 1e-12);
        // Additivity over disjoint pieces.
        let union = set("[-2,-1]u[1,2]");
        let left = gaussian_measure(&set("[-2,-1]"));
        let right = gaussian_measure(&set("[1,2]"));
        assert!((gaussian_measure(&union) - (left + right)).abs() <= 1e-12);
        // Symmetry ν(−A) = ν(A).
        assert!((gaussian_measure(&set("[-2,-1]")) - gaussian_measure(&set("[1,2]"))).abs() <= 1e-14);
    }

    #[test]
    fn i_rate_matches_half_line_quantile() {
        // ν((−∞,0] − x) = Φ(−x) ≥ 3/4 at x = −Φ⁻¹(3/4).
        let r = i_rate(&set("(-inf,0]"), 0.75).unwrap();
        assert!((r.value - PHI_INV_3_4).abs() <= 1e-9, "got {}", r.value);
        let w = r.witness.unwrap();
        assert!((w + PHI_INV_3_4).abs() <= 1e-9, "witness {w}");
        assert!(measure_shift_scale(&set("(-inf,0]"), w, 1.0) >= 0.75 - 1e-9);
    }

    #[test]
    fn i_rate_detects_infeasible_levels() {
        // sup_x ν([0,1]−x) = 2Φ(1/2)−1 ≈ 0.3829 < 0.9.
        let r = i_rate(&set("[0,1]"), 0.9).unwrap();
        assert!(r.value.is_infinite());
        assert!(r.witness.is_none());
        // Just below the sup the rate is finite, and tiny.
        let r2 = i_rate(&set("[0,1]"), TWO_PHI_HALF - 1e-4).unwrap();
        assert!(r2.value.is_finite());
        assert!(r2.value < 0.52, "rate {}", r2.value);
    }

    #[test]
    fn j_rate_matches_centered_interval_closed_form() {
        // Optimal centering of [0,1] is x = 1/2; need 2Φ(0.5/s)−1 ≥ 0.9,
        // i.e. 1−y = (0.5/Φ⁻¹(0.95))².
        let r = j_rate(&set("[0,1]"), 0.9).unwrap();
        assert!((r.value - J_01_09).abs() <= 1e-6, "got {}", r.value);
        assert!((r.witness_x - 0.5).abs() <= 1e-3, "witness_x {}", r.witness_x);
        let s = (1.0 - r.witness_y).sqrt();
        assert!(measure_shift_scale(&set("[0,1]"), r.witness_x, s) >= 0.9 - 1e-9);
    }

    #[test]
    fn j_rate_zero_when_shifts_suffice() {
        let r = j_rate(&set("(-inf,0]"), 0.9).unwrap();
        assert_eq!(r.value, 0.0);
    }

    #[test]
    fn rates_obey_trichotomy() {
        for (s, p) in [
            ("(-inf,0]", 0.75),
            ("(-inf,0]", 0.99),
            ("[0,1]", 0.9),
            ("[0,1]", 0.5),
            ("[-1,1]u[3,4]", 0.95),
            ("[0,0.25]", 0.2),
        ] {
            let g = gaussian_rates(&set(s), p).unwrap();
            let i_active = g.i_rate.is_finite();
            let j_active = g.j_rate > 0.0;
            assert!(
                i_active != j_active || (i_active && g.i_rate >= 0.0 && g.j_rate == 0.0),
                "trichotomy violated for {s}, p={p}: {g:?}"
            );
        }
    }

    #[test]
    fn i_rate_monotone_in_p() {
        let a = set("[0,1]u[2,3]");
        let mut last = 0.0;
        for i in 1..=8 {
            let p = 0.3 + 0.01 * i as f64; // stays below the sup ≈ 0.3829+…
            let r = i_rate(&a, p).unwrap();
            if r.value.is_finite() {
                assert!(r.value + 1e-9 >= last, "not monotone at p={p}");
                last = r.value;
            }
        }
    }

    #[test]
    fn set_calculus_matches_interval_arithmetic() {
        let c = set_calculus(&set("[0,1]"), 0.2).unwrap();
        assert_eq!(c.inner.unwrap().to_string(), "[0.2,0.8]");
        assert_eq!(c.outer.to_string(), "[-0.2,1.2]");
        let c2 = set_calculus(&set("(-inf,0]"), 0.5).unwrap();
        assert_eq!(c2.inner.unwrap().to_string(), "(-inf,-0.5]");
        assert_eq!(c2.outer.to_string(), "(-inf,0.5]");
        // Boundary collar measure vanishes as ε ↓ 0.
        let mut last = f64::INFINITY;
        for &eps in &[0.4, 0.2, 0.1, 0.05, 0.01] {
            let b = set_calculus(&set("[0,1]"), eps).unwrap().boundary.unwrap();
            let m = gaussian_measure(&b);
            assert!(m < last);
            last = m;
        }
        assert!(last < 0.02);
    }
}
