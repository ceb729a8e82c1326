//! Randomized invariants on the set algebra, the Gaussian measure layer,
//! the analytic rates, and the estimator summaries.  These are structural
//! guarantees (round trips, bounds, monotonicity), not statistical
//! assertions, so every case must hold exactly or to float tolerance.

use brwldp::{
    bar_lambda, convolve_n, cramer_rate, gaussian_measure, i_rate, naive_estimate, BrwConfig,
    OffspringDistribution, StepDistribution, TargetSet,
};
use proptest::prelude::*;

/// A bounded interval spec: center in [−3, 3], half-width in [0.05, 2].
fn interval_strategy() -> impl Strategy<Value = (f64, f64)> {
    (-3.0..3.0f64, 0.05..2.0f64).prop_map(|(c, h)| (c - h, c + h))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    /// Formatting a set and parsing it back preserves membership and
    /// measure.
    #[test]
    fn set_display_parse_round_trip((lo, hi) in interval_strategy(), shift in -4.0..4.0f64) {
        let set = TargetSet::closed(lo, hi).unwrap();
        let back = TargetSet::parse(&set.to_string()).unwrap();
        prop_assert_eq!(set.contains(shift), back.contains(shift));
        prop_assert!((gaussian_measure(&set) - gaussian_measure(&back)).abs() <= 1e-15);
    }

    /// The Gaussian measure is additive across a disjoint union and the
    /// union's parser/normalizer keeps both pieces.
    #[test]
    fn measure_adds_over_disjoint_pieces((lo, hi) in interval_strategy(), gap in 0.1..2.0f64, w in 0.05..1.5f64) {
        let left = TargetSet::closed(lo, hi).unwrap();
        let right = TargetSet::closed(hi + gap, hi + gap + w).unwrap();
        let union = TargetSet::parse(&format!("{left} U {right}")).unwrap();
        let total = gaussian_measure(&union);
        prop_assert!((total - gaussian_measure(&left) - gaussian_measure(&right)).abs() <= 1e-12);
    }

    /// Symmetric sets keep their measure under sign-flipped translation.
    #[test]
    fn symmetric_set_measure_is_even(h in 0.05..2.5f64, x in -3.0..3.0f64) {
        let set = TargetSet::closed(-h, h).unwrap();
        let plus = gaussian_measure(&set.translate(x));
        let minus = gaussian_measure(&set.translate(-x));
        prop_assert!((plus - minus).abs() <= 1e-12);
    }

    /// Dilation grows the measure, erosion shrinks it.
    #[test]
    fn dilation_monotone((lo, hi) in interval_strategy(), eps in 0.01..0.5f64) {
        let set = TargetSet::closed(lo, hi).unwrap();
        let base = gaussian_measure(&set);
        prop_assert!(gaussian_measure(&set.dilate(eps)) >= base - 1e-15);
        if let Some(inner) = set.erode(eps) {
            prop_assert!(gaussian_measure(&inner) <= base + 1e-15);
        }
    }

    /// The minimal-shift rate grows with the demanded fraction and is free
    /// exactly up to the set's own mass.
    #[test]
    fn shift_rate_monotone_in_fraction(hi in -1.0..1.0f64, p_lo in 0.55..0.7f64, bump in 0.05..0.25f64) {
        let set = TargetSet::half_line_below(hi, false).unwrap();
        let lo_rate = i_rate(&set, p_lo).unwrap().value;
        let hi_rate = i_rate(&set, p_lo + bump).unwrap().value;
        prop_assert!(hi_rate >= lo_rate - 1e-9);
        let free = i_rate(&set, gaussian_measure(&set) * 0.5).unwrap().value;
        prop_assert!(free == 0.0);
    }

    /// The i.i.d. deviation rate is nonnegative and monotone in the slope.
    #[test]
    fn cramer_rate_monotone(c in 0.05..0.8f64, bump in 0.01..0.15f64) {
        let step = StepDistribution::rademacher();
        let lo = cramer_rate(&step, c).unwrap();
        let hi = cramer_rate(&step, (c + bump).min(0.999)).unwrap();
        prop_assert!(lo >= 0.0);
        prop_assert!(hi >= lo - 1e-12);
    }

    /// The tilt constant falls as single-child lineages get cheaper.
    #[test]
    fn tilt_constant_decreasing_in_p1(p1 in 0.1..0.7f64, bump in 0.05..0.25f64) {
        let step = StepDistribution::rademacher();
        let costly = bar_lambda(&step, p1).unwrap();
        let cheap = bar_lambda(&step, p1 + bump).unwrap();
        prop_assert!(costly > cheap - 1e-12);
        prop_assert!(cheap > 0.0);
    }

    /// Exact step convolutions stay probability vectors and inherit the
    /// step law's symmetry.
    #[test]
    fn convolution_is_a_symmetric_pmf(n in 1u32..40) {
        let pmf = convolve_n(&StepDistribution::rademacher(), n).unwrap();
        let total: f64 = pmf.iter().map(|&(_, p)| p).sum();
        prop_assert!((total - 1.0).abs() <= 1e-12);
        for &(x, p) in &pmf {
            let mirrored = pmf.iter().find(|&&(y, _)| y == -x).map(|&(_, q)| q).unwrap_or(0.0);
            prop_assert!((p - mirrored).abs() <= 1e-12);
        }
    }

    /// Estimator summaries respect their structural bounds: a plain
    /// Monte Carlo estimate is a probability, its effective sample size
    /// never exceeds the replica count, and the error fields are finite.
    #[test]
    fn estimate_summary_bounds(seed in 0u64..1000, p in 0.25..1.0f64, n in 2u32..5) {
        let offspring = OffspringDistribution::finite(&[(1, 0.5), (2, 0.5)]).unwrap();
        let step = StepDistribution::rademacher();
        let cfg = BrwConfig::new(offspring, step, f64::INFINITY, 0).unwrap();
        let set = TargetSet::parse("(-inf,0]").unwrap();
        let r = naive_estimate(&cfg, n, &set, p, 200, seed).unwrap();
        prop_assert!((0.0..=1.0).contains(&r.estimate));
        prop_assert!(r.effective_sample_size <= r.replicas as f64 + 1e-9);
        prop_assert!(r.std_error >= 0.0 && r.std_error.is_finite());
        if r.estimate > 0.0 {
            prop_assert!((r.log_estimate - r.estimate.ln()).abs() <= 1e-12);
        } else {
            prop_assert!(r.log_estimate == f64::NEG_INFINITY);
            prop_assert!(r.upper_bound_95.is_some());
        }
    }
}
