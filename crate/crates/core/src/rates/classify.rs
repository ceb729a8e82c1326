//! Regime classification for the deviation event `{Z̄_n(√n A) ≥ p}` and the
//! predicted decay-rate constant for each covered regime.
//!
//! The decay speed is polynomial-in-`√n` on a log scale for Schröder-type
//! trees (some particle may have few ancestors) and doubly exponential for
//! Böttcher-type trees (every particle has at least `bⁿ − 1` ancestors), with
//! the constant determined by the step law's tail class and the Gaussian
//! shift rate of the target set.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gaussian::{gaussian_measure, i_rate, j_rate, TargetSet};
use crate::rates::legendre::bar_lambda;
use crate::rates::offspring::OffspringDistribution;
use crate::rates::step::{StepDistribution, StepKind};

/// The covered deviation regimes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Regime {
    /// `p₁ > 0`, step with finite exponential moments, finite shift rate:
    /// decay `exp(−B̄(p₁) I_A(p) √n (1+o(1)))`.
    SchroderCramerFiniteI,
    /// `p₁ > 0`, infinite shift rate: decay `exp(−log(1/p₁) J_A(p) n (1+o(1)))`.
    SchroderInfiniteI,
    /// Böttcher tree, stretched-exponential step tail with `α ≤ 1`, `B > b`:
    /// decay `exp(−λ I_A(p)^α n^{α/2} (1+o(1)))`.
    BottcherWeibullSub,
    /// Böttcher tree, stretched-exponential step tail with `α > 1`, `B > b`:
    /// the same power of `n` discounted by `(log n)^{α−1}`.
    BottcherWeibullSuper,
    /// Böttcher tree with deterministic offspring (`B = b`) and a
    /// stretched-exponential step tail: only a constant band is known.
    BottcherWeibullRegular,
    /// Böttcher tree, doubly-exponential step tail: doubly-exponential decay
    /// with inner speed `n^{α/(2(α+1))}`.
    BottcherGumbel,
    /// Böttcher tree, bounded step with essential supremum `L`:
    /// doubly-exponential decay with inner speed `√n`.
    BottcherBounded,
    /// Böttcher tree, bounded step, infinite shift rate: doubly-exponential
    /// decay with inner speed `n`.
    BottcherInfiniteI,
}

impl Regime {
    pub fn as_str(&self) -> &'static str {
        match self {
            Regime::SchroderCramerFiniteI => "SchroderCramerFiniteI",
            Regime::SchroderInfiniteI => "SchroderInfiniteI",
            Regime::BottcherWeibullSub => "BottcherWeibullSub",
            Regime::BottcherWeibullSuper => "BottcherWeibullSuper",
            Regime::BottcherWeibullRegular => "BottcherWeibullRegular",
            Regime::BottcherGumbel => "BottcherGumbel",
            Regime::BottcherBounded => "BottcherBounded",
            Regime::BottcherInfiniteI => "BottcherInfiniteI",
        }
    }
}

impl std::fmt::Display for Regime {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Symbolic speed descriptor `n^{num_exp} / (log n)^{log_exp}`.
///
/// For `Poly` the decay is `P ≈ exp(−const · speed(n))`; for `LogLog` the
/// decay is doubly exponential and `speed(n)` is the *inner* speed, i.e.
/// `log(−log P) ≈ const · … + log speed(n)`-free form
/// `−log P ≈ exp(const · speed(n))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Speed {
    Poly { num_exp: f64, log_exp: f64 },
    LogLog { num_exp: f64, log_exp: f64 },
}

impl Speed {
    /// Evaluates `n^{num_exp}/(log n)^{log_exp}` (natural log; callers use
    /// `n ≥ 2` so the denominator is safe).
    pub fn value(&self, n: f64) -> f64 {
        let (num_exp, log_exp) = match *self {
            Speed::Poly { num_exp, log_exp } | Speed::LogLog { num_exp, log_exp } => {
                (num_exp, log_exp)
            }
        };
        n.powf(num_exp) / n.ln().powf(log_exp)
    }

    /// Whether the decay this speed describes is doubly exponential.
    pub fn is_log_log(&self) -> bool {
        matches!(self, Speed::LogLog { .. })
    }
}

/// Predicted rate constant: a point value, or a `[lower, upper]` band when
/// only bounds are known (`lower = None` means "positive but unquantified").
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RateConstant {
    Point { value: f64 },
    Band { lower: Option<f64>, upper: f64 },
}

impl RateConstant {
    /// The point value, or the band's upper member.
    pub fn value(&self) -> f64 {
        match *self {
            RateConstant::Point { value } => value,
            RateConstant::Band { upper, .. } => upper,
        }
    }

    /// The point value if this is not a band.
    pub fn point(&self) -> Option<f64> {
        match *self {
            RateConstant::Point { value } => Some(value),
            RateConstant::Band { .. } => None,
        }
    }
}

/// Classification outcome: regime, speed, constant, and every intermediate
/// quantity that entered the constant, for auditability.
///
/// Intermediates are `None` when they do not enter the regime's constant (or
/// are infinite, as the shift rate is in the `…InfiniteI` regimes).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateReport {
    pub regime: Regime,
    pub speed: Speed,
    pub constant: RateConstant,
    /// True for the doubly-exponential (Böttcher bounded/Gumbel-type) regimes.
    pub log_log_scale: bool,
    /// True when the rate comes from the stated remark extending the
    /// stretched-exponential constant to trees with `p₁ > 0`, rather than
    /// from one of the fully-proved regimes.
    pub remark_based: bool,
    pub i_rate: Option<f64>,
    pub j_rate: Option<f64>,
    pub chi: Option<f64>,
    pub bar_lambda: Option<f64>,
    pub y_alpha: Option<f64>,
    pub upsilon: Option<f64>,
}

fn blank_report(regime: Regime, speed: Speed, constant: RateConstant) -> RateReport {
    RateReport {
        regime,
        speed,
        constant,
        log_log_scale: speed.is_log_log(),
        remark_based: false,
        i_rate: None,
        j_rate: None,
        chi: None,
        bar_lambda: None,
        y_alpha: None,
        upsilon: None,
    }
}

/// Classifies a model `(offspring, step, A, p)` into its deviation regime and
/// computes the predicted rate constant.
///
/// Requires a strictly supercritical offspring law and `p ∈ (ν(A), 1)`; the
/// event must be a genuine deviation, i.e. `p` strictly above the limiting
/// Gaussian mass of the target set. Configurations matched by no covered
/// regime produce an `Uncovered` error with diagnostics.
pub fn classify_and_predict(
    offspring: &OffspringDistribution,
    step: &StepDistribution,
    set: &TargetSet,
    p: f64,
) -> Result<RateReport> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::InvalidParameter {
            name: "p",
            reason: format!("must lie strictly inside (0, 1), got {p}"),
        });
    }
    let nu = gaussian_measure(set);
    if p <= nu {
        return Err(Error::Hypothesis(format!(
            "not a deviation event: the threshold p = {p} does not exceed the limiting \
             Gaussian mass {nu:.6} of the target set, so the deviation gap is not positive"
        )));
    }
    let m = offspring.mean();
    if m <= 1.0 {
        return Err(Error::Hypothesis(format!(
            "offspring mean {m} is not strictly supercritical (m > 1 required)"
        )));
    }

    let i = i_rate(set, p)?;
    let p1 = offspring.p1();

    if p1 > 0.0 {
        return classify_schroder(offspring, step, set, p, p1, i.value);
    }
    classify_bottcher(offspring, step, set, p, i.value)
}

fn classify_schroder(
    offspring: &OffspringDistribution,
    step: &StepDistribution,
    set: &TargetSet,
    p: f64,
    p1: f64,
    i: f64,
) -> Result<RateReport> {
    let chi = offspring.schroder_exponent()?;
    if i.is_finite() {
        if step.has_cramer() {
            let tilt = bar_lambda(step, p1)?;
            let mut report = blank_report(
                Regime::SchroderCramerFiniteI,
                Speed::Poly { num_exp: 0.5, log_exp: 0.0 },
                RateConstant::Point { value: tilt * i },
            );
            report.i_rate = Some(i);
            report.chi = Some(chi);
            report.bar_lambda = Some(tilt);
            return Ok(report);
        }
        // Heavy (stretched-exponential, α < 1) step on a tree that admits
        // thin lines of descent: the stretched-exponential constant still
        // governs, but only through the remark extending that regime.
        if let StepKind::Weibull { lambda, alpha } = *step.kind() {
            let mut report = blank_report(
                Regime::BottcherWeibullSub,
                Speed::Poly { num_exp: alpha / 2.0, log_exp: 0.0 },
                RateConstant::Point { value: lambda * i.powf(alpha) },
            );
            report.remark_based = true;
            report.i_rate = Some(i);
            report.chi = Some(chi);
            return Ok(report);
        }
        return Err(Error::Uncovered(format!(
            "step '{}' has no finite exponential moments and no stretched-exponential \
             tail parameters; no covered regime applies",
            step.name()
        )));
    }
    if step.has_cramer() {
        let j = j_rate(set, p)?;
        let mut report = blank_report(
            Regime::SchroderInfiniteI,
            Speed::Poly { num_exp: 1.0, log_exp: 0.0 },
            RateConstant::Point { value: -p1.ln() * j.value },
        );
        report.j_rate = Some(j.value);
        report.chi = Some(chi);
        return Ok(report);
    }
    Err(Error::Uncovered(format!(
        "infinite Gaussian shift rate for set {set} with a step ('{}') lacking finite \
         exponential moments; no covered regime applies",
        step.name()
    )))
}

fn classify_bottcher(
    offspring: &OffspringDistribution,
    step: &StepDistribution,
    set: &TargetSet,
    p: f64,
    i: f64,
) -> Result<RateReport> {
    let b = offspring.b_min();
    debug_assert!(b >= 2, "p1 = 0 with no-death support forces b >= 2");
    let log_b = (b as f64).ln();
    let b_max = offspring.b_max();

    match *step.kind() {
        StepKind::Weibull { lambda, alpha } => {
            if !i.is_finite() {
                return Err(Error::Uncovered(format!(
                    "infinite Gaussian shift rate for set {set}: the stretched-exponential \
                     regimes need a finite shift rate"
                )));
            }
            let base = lambda * i.powf(alpha);
            match b_max {
                Some(top) if top == b => {
                    // Deterministic offspring: only a band is known, and the
                    // lower member is unquantified for α > 1.
                    let lower = if alpha <= 1.0 { Some(base) } else { None };
                    let mut report = blank_report(
                        Regime::BottcherWeibullRegular,
                        Speed::Poly { num_exp: alpha / 2.0, log_exp: 0.0 },
                        RateConstant::Band { lower, upper: base * b as f64 },
                    );
                    report.i_rate = Some(i);
                    Ok(report)
                }
                _ if alpha <= 1.0 => {
                    let mut report = blank_report(
                        Regime::BottcherWeibullSub,
                        Speed::Poly { num_exp: alpha / 2.0, log_exp: 0.0 },
                        RateConstant::Point { value: base },
                    );
                    report.i_rate = Some(i);
                    Ok(report)
                }
                _ => {
                    let upsilon = match b_max {
                        Some(top) => {
                            let log_top = (top as f64).ln();
                            2.0 * log_b * log_top / (alpha * (log_top - log_b))
                        }
                        None => 2.0 * log_b / alpha,
                    };
                    let mut report = blank_report(
                        Regime::BottcherWeibullSuper,
                        Speed::Poly { num_exp: alpha / 2.0, log_exp: alpha - 1.0 },
                        RateConstant::Point { value: upsilon.powf(alpha - 1.0) * base },
                    );
                    report.i_rate = Some(i);
                    report.upsilon = Some(upsilon);
                    Ok(report)
                }
            }
        }
        StepKind::Gumbel { alpha } => {
            if !i.is_finite() {
                return Err(Error::Uncovered(format!(
                    "infinite Gaussian shift rate for set {set}: the doubly-exponential-tail \
                     regime needs a finite shift rate"
                )));
            }
            let y_alpha = match b_max {
                Some(top) => {
                    let log_top = (top as f64).ln();
                    (1.0 + alpha) * log_top / ((1.0 + alpha) * log_top - log_b)
                }
                None => 1.0,
            };
            let mut report = blank_report(
                Regime::BottcherGumbel,
                Speed::LogLog { num_exp: alpha / (2.0 * (alpha + 1.0)), log_exp: 0.0 },
                RateConstant::Point {
                    value: (y_alpha * i * log_b).powf(alpha / (alpha + 1.0)),
                },
            );
            report.i_rate = Some(i);
            report.y_alpha = Some(y_alpha);
            Ok(report)
        }
        StepKind::Rademacher | StepKind::BoundedUniform { .. } => {
            // Essential supremum of the step on its declared (raw) scale.
            let ess_sup = match *step.kind() {
                StepKind::Rademacher => 1.0,
                StepKind::BoundedUniform { l } => l,
                _ => unreachable!(),
            };
            if i.is_finite() {
                let mut report = blank_report(
                    Regime::BottcherBounded,
                    Speed::LogLog { num_exp: 0.5, log_exp: 0.0 },
                    RateConstant::Point { value: i * log_b / ess_sup },
                );
                report.i_rate = Some(i);
                return Ok(report);
            }
            let j = j_rate(set, p)?;
            let mut report = blank_report(
                Regime::BottcherInfiniteI,
                Speed::LogLog { num_exp: 1.0, log_exp: 0.0 },
                RateConstant::Point { value: j.value * log_b },
            );
            report.j_rate = Some(j.value);
            Ok(report)
        }
        StepKind::Gaussian => Err(Error::Uncovered(
            "Gaussian step on a Böttcher tree: the tail is neither stretched-exponential, \
             doubly exponential, nor bounded, so no covered regime applies"
                .to_string(),
        )),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    const I_075: f64 = 0.6744897501960817432;

    fn set_halfline() -> TargetSet {
        "(-inf,0]".parse().unwrap()
    }

    fn set_unit() -> TargetSet {
        "[0,1]".parse().unwrap()
    }

    #[test]
    fn schroder_cramer_example_constant() {
        let offspring = OffspringDistribution::parse("1:0.5,2:0.5").unwrap();
        let step = StepDistribution::rademacher();
        let report =
            classify_and_predict(&offspring, &step, &set_halfline(), 0.75).unwrap();
        assert_eq!(report.regime, Regime::SchroderCramerFiniteI);
        assert_eq!(report.speed, Speed::Poly { num_exp: 0.5, log_exp: 0.0 });
        assert!(!report.log_log_scale);
        assert!(!report.remark_based);
        assert_abs_diff_eq!(
            report.constant.point().unwrap(),
            0.88827460291557679075,
            epsilon = 1e-8
        );
        assert_abs_diff_eq!(report.i_rate.unwrap(), I_075, epsilon = 1e-9);
        assert_abs_diff_eq!(report.chi.unwrap(), 1.709511291351454777, epsilon = 1e-10);
        assert_abs_diff_eq!(
            report.bar_lambda.unwrap(),
            1.3169578969248167086,
            epsilon = 1e-8
        );
    }

    #[test]
    fn schroder_infinite_shift_rate_uses_variance_reduction() {
        let offspring = OffspringDistribution::parse("1:0.5,2:0.5").unwrap();
        let step = StepDistribution::rademacher();
        let report = classify_and_predict(&offspring, &step, &set_unit(), 0.9).unwrap();
        assert_eq!(report.regime, Regime::SchroderInfiniteI);
        assert_eq!(report.speed, Speed::Poly { num_exp: 1.0, log_exp: 0.0 });
        assert_abs_diff_eq!(
            report.constant.point().unwrap(),
            0.62909838663734910653,
            epsilon = 1e-8
        );
        assert!(report.i_rate.is_none());
        assert_abs_diff_eq!(
            report.j_rate.unwrap(),
            0.90759712263295128009,
            epsilon = 1e-8
        );
    }

    #[test]
    fn bottcher_weibull_sub_example_constant() {
        let offspring = OffspringDistribution::parse("2:0.5,3:0.5").unwrap();
        let step = StepDistribution::weibull(1.0, 0.5).unwrap();
        let report =
            classify_and_predict(&offspring, &step, &set_halfline(), 0.75).unwrap();
        assert_eq!(report.regime, Regime::BottcherWeibullSub);
        assert_eq!(report.speed, Speed::Poly { num_exp: 0.25, log_exp: 0.0 });
        assert!(!report.remark_based);
        assert_abs_diff_eq!(
            report.constant.point().unwrap(),
            0.8212732494097696734,
            epsilon = 1e-8
        );
    }

    #[test]
    fn heavy_step_with_thin_lines_is_remark_based() {
        let offspring = OffspringDistribution::parse("1:0.5,2:0.5").unwrap();
        let step = StepDistribution::weibull(1.0, 0.5).unwrap();
        let report =
            classify_and_predict(&offspring, &step, &set_halfline(), 0.75).unwrap();
        assert_eq!(report.regime, Regime::BottcherWeibullSub);
        assert!(report.remark_based);
        assert_abs_diff_eq!(
            report.constant.point().unwrap(),
            0.8212732494097696734,
            epsilon = 1e-8
        );
    }

    #[test]
    fn bottcher_weibull_super_constant_with_finite_top() {
        let offspring = OffspringDistribution::parse("2:0.5,3:0.5").unwrap();
        let step = StepDistribution::weibull(1.0, 2.0).unwrap();
        let report =
            classify_and_predict(&offspring, &step, &set_halfline(), 0.75).unwrap();
        assert_eq!(report.regime, Regime::BottcherWeibullSuper);
        assert_eq!(report.speed, Speed::Poly { num_exp: 1.0, log_exp: 1.0 });
        assert_abs_diff_eq!(
            report.upsilon.unwrap(),
            1.878090112295597406,
            epsilon = 1e-10
        );
        assert_abs_diff_eq!(
            report.constant.point().unwrap(),
            0.85441159798399580564,
            epsilon = 1e-8
        );
    }

    #[test]
    fn bottcher_weibull_super_constant_with_unbounded_offspring() {
        let offspring = OffspringDistribution::parse("geometric:2:0.5").unwrap();
        let step = StepDistribution::weibull(1.0, 2.0).unwrap();
        let report =
            classify_and_predict(&offspring, &step, &set_halfline(), 0.75).unwrap();
        assert_eq!(report.regime, Regime::BottcherWeibullSuper);
        assert_abs_diff_eq!(
            report.upsilon.unwrap(),
            0.69314718055994530942,
            epsilon = 1e-12
        );
        let i = report.i_rate.unwrap();
        assert_abs_diff_eq!(
            report.constant.point().unwrap(),
            0.69314718055994530942 * i * i,
            epsilon = 1e-10
        );
    }

    #[test]
    fn bottcher_weibull_regular_reports_a_band() {
        let offspring = OffspringDistribution::parse("2:1").unwrap();
        let step = StepDistribution::weibull(1.0, 0.5).unwrap();
        let report =
            classify_and_predict(&offspring, &step, &set_halfline(), 0.75).unwrap();
        assert_eq!(report.regime, Regime::BottcherWeibullRegular);
        match report.constant {
            RateConstant::Band { lower, upper } => {
                assert_abs_diff_eq!(lower.unwrap(), 0.8212732494097696734, epsilon = 1e-8);
                assert_abs_diff_eq!(upper, 2.0 * 0.8212732494097696734, epsilon = 1e-8);
            }
            other => panic!("expected a band, got {other:?}"),
        }

        let sharp = StepDistribution::weibull(1.0, 2.0).unwrap();
        let report = classify_and_predict(&offspring, &sharp, &set_halfline(), 0.75).unwrap();
        match report.constant {
            RateConstant::Band { lower, upper } => {
                assert!(lower.is_none());
                assert_abs_diff_eq!(upper, 2.0 * I_075 * I_075, epsilon = 1e-8);
            }
            other => panic!("expected a band, got {other:?}"),
        }
    }

    #[test]
    fn bottcher_gumbel_example_constant() {
        let offspring = OffspringDistribution::parse("2:0.5,3:0.5").unwrap();
        let step = StepDistribution::gumbel(1.0).unwrap();
        let report =
            classify_and_predict(&offspring, &step, &set_halfline(), 0.75).unwrap();
        assert_eq!(report.regime, Regime::BottcherGumbel);
        assert_eq!(report.speed, Speed::LogLog { num_exp: 0.25, log_exp: 0.0 });
        assert!(report.log_log_scale);
        assert_abs_diff_eq!(
            report.y_alpha.unwrap(),
            1.4608454206183701983,
            epsilon = 1e-10
        );
        assert_abs_diff_eq!(
            report.constant.point().unwrap(),
            0.82642327403316612611,
            epsilon = 1e-8
        );
    }

    #[test]
    fn bottcher_bounded_example_constant() {
        let offspring = OffspringDistribution::parse("2:1").unwrap();
        let step = StepDistribution::bounded_uniform(1.0).unwrap();
        let report =
            classify_and_predict(&offspring, &step, &set_halfline(), 0.75).unwrap();
        assert_eq!(report.regime, Regime::BottcherBounded);
        assert_eq!(report.speed, Speed::LogLog { num_exp: 0.5, log_exp: 0.0 });
        assert!(report.log_log_scale);
        assert_abs_diff_eq!(
            report.constant.point().unwrap(),
            0.46752066866499587922,
            epsilon = 1e-8
        );
    }

    #[test]
    fn bottcher_bounded_scales_with_declared_essential_sup() {
        let offspring = OffspringDistribution::parse("2:1").unwrap();
        let narrow = StepDistribution::bounded_uniform(0.5).unwrap();
        let wide = StepDistribution::bounded_uniform(2.0).unwrap();
        let c_narrow = classify_and_predict(&offspring, &narrow, &set_halfline(), 0.75)
            .unwrap()
            .constant
            .value();
        let c_wide = classify_and_predict(&offspring, &wide, &set_halfline(), 0.75)
            .unwrap()
            .constant
            .value();
        assert_abs_diff_eq!(c_narrow, 4.0 * c_wide, epsilon = 1e-10);
    }

    #[test]
    fn bottcher_infinite_shift_rate_uses_variance_reduction() {
        let offspring = OffspringDistribution::parse("2:1").unwrap();
        let step = StepDistribution::rademacher();
        let report = classify_and_predict(&offspring, &step, &set_unit(), 0.9).unwrap();
        assert_eq!(report.regime, Regime::BottcherInfiniteI);
        assert_eq!(report.speed, Speed::LogLog { num_exp: 1.0, log_exp: 0.0 });
        assert_abs_diff_eq!(
            report.constant.point().unwrap(),
            0.62909838663734910653,
            epsilon = 1e-8
        );
    }

    #[test]
    fn rejects_non_deviation_thresholds() {
        let offspring = OffspringDistribution::parse("1:0.5,2:0.5").unwrap();
        let step = StepDistribution::rademacher();
        // ν((−∞,0]) = 1/2: thresholds at or below it are not deviations.
        for p in [0.2, 0.5] {
            match classify_and_predict(&offspring, &step, &set_halfline(), p) {
                Err(Error::Hypothesis(_)) => {}
                other => panic!("expected hypothesis error, got {other:?}"),
            }
        }
        assert!(classify_and_predict(&offspring, &step, &set_halfline(), 1.0).is_err());
        assert!(classify_and_predict(&offspring, &step, &set_halfline(), f64::NAN).is_err());
    }

    #[test]
    fn rejects_non_supercritical_offspring() {
        let offspring = OffspringDistribution::parse("1:1").unwrap();
        let step = StepDistribution::rademacher();
        match classify_and_predict(&offspring, &step, &set_halfline(), 0.75) {
            Err(Error::Hypothesis(_)) => {}
            other => panic!("expected hypothesis error, got {other:?}"),
        }
    }

    #[test]
    fn uncovered_configurations_are_reported() {
        let bottcher = OffspringDistribution::parse("2:1").unwrap();
        let schroder = OffspringDistribution::parse("1:0.5,2:0.5").unwrap();
        let gauss = StepDistribution::gaussian();
        let heavy = StepDistribution::weibull(1.0, 0.5).unwrap();
        let gumbel = StepDistribution::gumbel(1.0).unwrap();
        let cases: [(&OffspringDistribution, &StepDistribution, TargetSet, f64); 4] = [
            (&bottcher, &gauss, set_halfline(), 0.75),
            (&schroder, &heavy, set_unit(), 0.9),
            (&bottcher, &gumbel, set_unit(), 0.9),
            (&bottcher, &heavy, set_unit(), 0.9),
        ];
        for (offspring, step, set, p) in cases {
            match classify_and_predict(offspring, step, &set, p) {
                Err(Error::Uncovered(_)) => {}
                other => panic!(
                    "expected uncovered error for ({}, {set}, {p}), got {other:?}",
                    step.name()
                ),
            }
        }
    }

    #[test]
    fn constants_are_positive_and_monotone_in_the_threshold() {
        let offspring = OffspringDistribution::parse("1:0.5,2:0.5").unwrap();
        let step = StepDistribution::rademacher();
        let mut last = 0.0;
        for p in [0.6, 0.75, 0.9] {
            let c = classify_and_predict(&offspring, &step, &set_halfline(), p)
                .unwrap()
                .constant
                .value();
            assert!(c > last);
            last = c;
        }
    }

    #[test]
    fn report_serializes_with_tagged_speed_descriptor() {
        let offspring = OffspringDistribution::parse("1:0.5,2:0.5").unwrap();
        let step = StepDistribution::rademacher();
        let report =
            classify_and_predict(&offspring, &step, &set_halfline(), 0.75).unwrap();
        let json = serde_json::to_value(&report).unwrap();
        assert_eq!(json["regime"], "SchroderCramerFiniteI");
        assert_eq!(json["speed"]["kind"], "poly");
        assert_eq!(json["speed"]["num_exp"], 0.5);
        assert_eq!(json["constant"]["kind"], "point");
        let back: RateReport = serde_json::from_value(json).unwrap();
        assert_eq!(back, report);
    }
}
