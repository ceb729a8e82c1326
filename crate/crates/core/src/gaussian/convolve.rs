//! Exact lattice convolutions of the step law and uniform CLT gap bounds.
//!
//! For a lattice step (Rademacher, the one lattice kind here) the n-step walk
//! law `ν_n` is computed exactly by iterated convolution — additions of
//! nonnegative doubles only, so every pmf entry keeps ~`n·ε` relative
//! accuracy and tails are usable down to ~1e-300 (criterion-scale tails like
//! `ln ν_n((−∞,−0.3n])` at `n = 2000` are far above that).

use super::rates::measure_affine;
use super::set::TargetSet;
use crate::error::{Error, Result};
use crate::rates::{StepDistribution, StepKind};

/// Largest `n` accepted by [`convolve_n`]; the O(n²) convolution stays well
/// under a second up to this size.
pub const MAX_CONVOLVE_N: u32 = 5000;

/// Exact pmf of the `n`-step lattice walk, as sorted `(position, probability)`
/// pairs with every probability positive.
///
/// Rejects non-lattice steps: their walks have no exact finite representation
/// (use the Monte Carlo paths instead).
pub fn convolve_n(step: &StepDistribution, n: u32) -> Result<Vec<(i64, f64)>> {
    if !matches!(step.kind(), StepKind::Rademacher) {
        return Err(Error::Unsupported(format!(
            "exact convolution needs a lattice step; {} is not lattice-supported",
            step.name()
        )));
    }
    if n == 0 {
        return Err(Error::InvalidParameter {
            name: "n",
            reason: "need at least one step".into(),
        });
    }
    if n > MAX_CONVOLVE_N {
        return Err(Error::InvalidParameter {
            name: "n",
            reason: format!("n = {n} exceeds the convolution bound {MAX_CONVOLVE_N}"),
        });
    }
    // P(S_k = −k + 2j) satisfies the Pascal recursion; keep only the parity
    // class that carries mass.
    let n = n as usize;
    let mut probs = vec![1.0f64];
    for _ in 0..n {
        let mut next = vec![0.0f64; probs.len() + 1];
        for (j, &w) in probs.iter().enumerate() {
            let half = 0.5 * w;
            next[j] += half;
            next[j + 1] += half;
        }
        probs = next;
    }
    Ok(probs
        .into_iter()
        .enumerate()
        .map(|(j, w)| (-(n as i64) + 2 * j as i64, w))
        .collect())
}

/// Mass of an exact lattice pmf on the set `scale·A + shift`, honoring the
/// set's open/closed endpoint flags.
pub fn lattice_mass_on(pmf: &[(i64, f64)], set: &TargetSet, scale: f64, shift: f64) -> f64 {
    debug_assert!(scale > 0.0);
    pmf.iter()
        .filter(|(z, _)| set.contains((*z as f64 - shift) / scale))
        .map(|(_, w)| w)
        .sum()
}

/// Max over an `(a, b)` grid of `|ν_n(√n·(aA+b)) − ν(aA+b)|`: the uniform CLT
/// gap of the n-step lattice walk against the Gaussian limit, over affine
/// images of the target set. Callers assert decrease in `n`.
pub fn uniform_clt_gap(
    step: &StepDistribution,
    set: &TargetSet,
    n: u32,
    a_grid: &[f64],
    b_grid: &[f64],
) -> Result<f64> {
    if a_grid.is_empty() || b_grid.is_empty() {
        return Err(Error::InvalidParameter {
            name: "grid",
            reason: "need at least one scale and one shift".into(),
        });
    }
    for &a in a_grid {
        if !(a > 0.0) || !a.is_finite() {
            return Err(Error::InvalidParameter {
                name: "a_grid",
                reason: format!("scales must be positive finite reals, got {a}"),
            });
        }
    }
    let pmf = convolve_n(step, n)?;
    let sqrt_n = (n as f64).sqrt();
    let mut max_gap = 0.0f64;
    for &a in a_grid {
        for &b in b_grid {
            // S_n ∈ √n(aA+b) ⟺ (S_n/√n − b)/a ∈ A.
            let walk = lattice_mass_on(&pmf, set, a * sqrt_n, b * sqrt_n);
            let gauss = measure_affine(set, a, b)?;
            max_gap = max_gap.max((walk - gauss).abs());
        }
    }
    Ok(max_gap)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rates::StepDistribution;

    fn rademacher() -> StepDistribution {
        StepDistribution::rademacher()
    }

    #[test]
    fn small_convolutions_are_exact() {
        let one = convolve_n(&rademacher(), 1).unwrap();
        assert_eq!(one, vec![(-1, 0.5), (1, 0.5)]);
        let two = convolve_n(&rademacher(), 2).unwrap();
        assert_eq!(two, vec![(-2, 0.25), (0, 0.5), (2, 0.25)]);
    }

    #[test]
    fn mass_and_symmetry_hold_at_scale() {
        for &n in &[5u32, 64, 401, 2000] {
            let pmf = convolve_n(&rademacher(), n).unwrap();
            let mass: f64 = pmf.iter().map(|(_, w)| w).sum();
            assert!((mass - 1.0).abs() <= 1e-12, "mass at n={n}: {mass}");
            for &(z, w) in &pmf {
                let (_, w_neg) = pmf[pmf.iter().position(|&(z2, _)| z2 == -z).unwrap()];
                // Extreme positions underflow to exactly 0 at large n; the
                // relative comparison only makes sense for positive weights.
                if w > 0.0 {
                    assert!(((w - w_neg) / w).abs() <= 1e-9, "asymmetry at n={n}, z={z}");
                } else {
                    assert_eq!(w_neg, 0.0);
                }
            }
        }
    }

    #[test]
    fn binomial_tail_matches_reference_at_n_2000() {
        // ln P(S_2000 ≤ −600), 30-digit reference −94.6109550134626852.
        let pmf = convolve_n(&rademacher(), 2000).unwrap();
        let tail: f64 = pmf.iter().filter(|(z, _)| *z <= -600).map(|(_, w)| w).sum();
        let got = tail.ln();
        let want = -94.610_955_013_462_685_2;
        assert!(((got - want) / want).abs() <= 1e-10, "got {got}");
    }

    #[test]
    fn rejects_non_lattice_steps() {
        assert!(convolve_n(&StepDistribution::gaussian(), 4).is_err());
    }

    #[test]
    fn clt_gap_zero_for_half_line_at_n_1() {
        let set = TargetSet::parse("(-inf,0]").unwrap();
        let gap = uniform_clt_gap(&rademacher(), &set, 1, &[1.0], &[0.0]).unwrap();
        assert!(gap <= 1e-12, "gap {gap}");
    }

    #[test]
    fn clt_gap_decreases_with_n() {
        let set = TargetSet::parse("[0,1]").unwrap();
        let a_grid = [0.5, 1.0, 2.0];
        let b_grid = [-2.0, -1.0, 0.0, 1.0, 2.0];
        let g25 = uniform_clt_gap(&rademacher(), &set, 25, &a_grid, &b_grid).unwrap();
        let g400 = uniform_clt_gap(&rademacher(), &set, 400, &a_grid, &b_grid).unwrap();
        assert!(g400 < g25, "gap did not shrink: {g400} vs {g25}");
    }

    #[test]
    fn clt_gap_vanishes_for_far_shifts() {
        let set = TargetSet::parse("[0,1]").unwrap();
        let gap = uniform_clt_gap(&rademacher(), &set, 16, &[1.0], &[50.0, -50.0]).unwrap();
        assert!(gap <= 1e-12, "gap {gap}");
    }
}
