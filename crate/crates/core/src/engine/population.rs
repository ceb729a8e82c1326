//! Generation-streamed simulation of the branching population.
//!
//! Only the current generation is kept: every quantity of interest here is a
//! functional of the generation-`n` configuration alone, so memory scales
//! with the *spread* of the population, never with its history or — in the
//! aggregated storage modes — its size.
//!
//! Three storage modes cover the scale range:
//!
//! - **Lattice histogram** (two-point steps): integer positions with `f64`
//!   counts. Each occupied site spawns its children in bulk — a multinomial
//!   split of the site count over offspring numbers, then a binomial split of
//!   the children over the two directions — so one generation costs O(sites),
//!   not O(particles), and totals far beyond 2⁵³ remain usable as
//!   floating-point aggregates.
//! - **List** (off-lattice, small populations): exact per-particle sampling.
//!   On a lattice step law the list delegates to the histogram path, so the
//!   two modes consume the same random stream and agree exactly.
//! - **Binned** (off-lattice, large populations): positions are rounded to a
//!   uniform grid; huge sites distribute their children over equiprobable
//!   displacement quantile buckets instead of per-particle draws. Mass
//!   beyond a far-field radius is aggregated per side (such particles never
//!   return to the scaling window at the horizons simulated here). This mode
//!   trades exact displacement resolution for unbounded population size and
//!   is used only where per-particle simulation is impossible.
//!
//! Counts are `f64` throughout: integers are exact up to 2⁵³, and beyond that
//! the simulation is explicitly an aggregate approximation (Gaussian splits
//! for astronomically large binomials), which is the documented cost of
//! verifying asymptotics whose populations grow like `mⁿ`.

use crate::error::{Error, Result};
use crate::gaussian::TargetSet;
use crate::rates::{OffspringDistribution, OffspringKind, StepDistribution};
use rand::Rng;
use rand_distr::{Binomial, Distribution, Gamma, Geometric, Poisson, StandardNormal};

/// Default ceiling on the total particle count of one simulated generation.
///
/// The cap exists so that per-particle simulations abort distinguishably
/// instead of exhausting memory or silently truncating; callers running the
/// aggregated modes (whose cost is bounded by the bin count, not the
/// population) may raise it, up to `f64::INFINITY`.
pub const DEFAULT_POPULATION_CAP: f64 = 1e8;

/// Standardized radius beyond which binned mass is aggregated per side.
const FAR_FIELD_RANGE: f64 = 250.0;
/// Reported position of the aggregated far-field mass (sign per side). Set
/// membership of far mass is decided at this sentinel, which is correct for
/// every target set whose boundary lies inside the far-field radius.
const FAR_SENTINEL: f64 = 1e6;
/// A binned site with at most this many children samples every displacement
/// individually; larger sites switch to the bucketed approximation.
const PER_PARTICLE_LIMIT: f64 = 1024.0;
/// Number of equiprobable displacement buckets for huge binned sites. Each
/// bucket is represented by the quantile at its probability midpoint.
const STEP_BUCKETS: usize = 128;
/// Largest count handled by the exact integer binomial sampler; above this a
/// rounded, clamped Gaussian approximation is used (relative error of the
/// split is O(count^{−1/2})).
const EXACT_BINOMIAL_LIMIT: f64 = 2_147_483_648.0;
/// Largest site count for the draw-by-draw geometric offspring sum.
const EXACT_GEOMETRIC_SUM_LIMIT: f64 = 4096.0;
/// Largest site count for the exact Gamma–Poisson negative-binomial sampler;
/// above this the offspring sum uses its Gaussian approximation.
const GAMMA_POISSON_LIMIT: f64 = 1e15;
/// Allowed grid resolutions for binned storage.
const BIN_WIDTH_RANGE: (f64, f64) = (1e-3, 10.0);

/// How a generation's positions are stored.
#[derive(Debug, Clone, PartialEq)]
pub enum StorageMode {
    /// Integer lattice positions: `counts[i]` particles sit at `offset + i`.
    LatticeHistogram { offset: i64, counts: Vec<f64> },
    /// One entry per particle, sorted ascending.
    List { positions: Vec<f64> },
    /// Grid of resolution `width`: `counts[i]` particles at `(offset+i)·width`,
    /// plus per-side aggregates beyond the far-field radius.
    Binned {
        width: f64,
        offset: i64,
        counts: Vec<f64>,
        far_left: f64,
        far_right: f64,
    },
}

/// One generation of the branching random walk.
#[derive(Debug, Clone, PartialEq)]
pub struct Population {
    pub generation: u32,
    pub storage: StorageMode,
}

/// Static description of one simulated process.
#[derive(Debug, Clone)]
pub struct BrwConfig {
    pub offspring: OffspringDistribution,
    pub step: StepDistribution,
    /// Abort threshold for the total of one generation (≥ 1).
    pub population_cap: f64,
    /// Base seed; replicas derive their streams from `(seed, replica)`.
    pub seed: u64,
}

impl BrwConfig {
    pub fn new(
        offspring: OffspringDistribution,
        step: StepDistribution,
        population_cap: f64,
        seed: u64,
    ) -> Result<Self> {
        if !(population_cap >= 1.0) {
            return Err(Error::InvalidParameter {
                name: "population_cap",
                reason: format!("cap {population_cap} must be at least 1"),
            });
        }
        Ok(Self { offspring, step, population_cap, seed })
    }
}

impl Population {
    /// Single particle at the origin, lattice storage.
    pub fn lattice_root() -> Self {
        Self { generation: 0, storage: StorageMode::LatticeHistogram { offset: 0, counts: vec![1.0] } }
    }

    /// Single particle at the origin, per-particle storage.
    pub fn list_root() -> Self {
        Self { generation: 0, storage: StorageMode::List { positions: vec![0.0] } }
    }

    /// Single particle at the origin, binned storage of the given resolution.
    pub fn binned_root(width: f64) -> Result<Self> {
        check_bin_width(width)?;
        Ok(Self {
            generation: 0,
            storage: StorageMode::Binned { width, offset: 0, counts: vec![1.0], far_left: 0.0, far_right: 0.0 },
        })
    }

    /// Lattice population from explicit site counts (`counts[i]` at `offset+i`).
    pub fn from_lattice(offset: i64, counts: Vec<f64>, generation: u32) -> Result<Self> {
        validate_counts(&counts)?;
        Ok(Self { generation, storage: StorageMode::LatticeHistogram { offset, counts } })
    }

    /// Per-particle population from explicit positions (sorted internally).
    pub fn from_list(mut positions: Vec<f64>, generation: u32) -> Result<Self> {
        if positions.is_empty() || positions.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "positions",
                reason: "need a nonempty list of finite positions".into(),
            });
        }
        positions.sort_by(f64::total_cmp);
        Ok(Self { generation, storage: StorageMode::List { positions } })
    }

    /// Binned population from explicit parts.
    pub fn from_binned(
        width: f64,
        offset: i64,
        counts: Vec<f64>,
        far_left: f64,
        far_right: f64,
        generation: u32,
    ) -> Result<Self> {
        check_bin_width(width)?;
        if !(far_left >= 0.0 && far_right >= 0.0) {
            return Err(Error::InvalidParameter {
                name: "far_mass",
                reason: "far-field counts must be nonnegative".into(),
            });
        }
        if counts.iter().sum::<f64>() + far_left + far_right <= 0.0 {
            return Err(Error::InvalidParameter {
                name: "counts",
                reason: "population must be nonempty".into(),
            });
        }
        if counts.iter().any(|&c| !(c >= 0.0) || !c.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "counts",
                reason: "site counts must be finite and nonnegative".into(),
            });
        }
        Ok(Self { generation, storage: StorageMode::Binned { width, offset, counts, far_left, far_right } })
    }

    /// Total particle count `|Z_n|`.
    pub fn total(&self) -> f64 {
        match &self.storage {
            StorageMode::LatticeHistogram { counts, .. } => counts.iter().sum(),
            StorageMode::List { positions } => positions.len() as f64,
            StorageMode::Binned { counts, far_left, far_right, .. } => {
                counts.iter().sum::<f64>() + far_left + far_right
            }
        }
    }

    /// Visit every occupied site as `(position, count)`. Far-field aggregates
    /// are reported at `±1e6`.
    pub fn for_each_site<F: FnMut(f64, f64)>(&self, mut f: F) {
        match &self.storage {
            StorageMode::LatticeHistogram { offset, counts } => {
                for (i, &c) in counts.iter().enumerate() {
                    if c > 0.0 {
                        f((offset + i as i64) as f64, c);
                    }
                }
            }
            StorageMode::List { positions } => {
                for &x in positions {
                    f(x, 1.0);
                }
            }
            StorageMode::Binned { width, offset, counts, far_left, far_right } => {
                if *far_left > 0.0 {
                    f(-FAR_SENTINEL, *far_left);
                }
                for (i, &c) in counts.iter().enumerate() {
                    if c > 0.0 {
                        f((offset + i as i64) as f64 * width, c);
                    }
                }
                if *far_right > 0.0 {
                    f(FAR_SENTINEL, *far_right);
                }
            }
        }
    }

    /// Occupied sites as a vector of `(position, count)`.
    pub fn sites(&self) -> Vec<(f64, f64)> {
        let mut out = Vec::new();
        self.for_each_site(|x, c| out.push((x, c)));
        out
    }
}

fn check_bin_width(width: f64) -> Result<()> {
    if !(width >= BIN_WIDTH_RANGE.0 && width <= BIN_WIDTH_RANGE.1) {
        return Err(Error::InvalidParameter {
            name: "bin_width",
            reason: format!(
                "grid resolution {width} outside [{}, {}]",
                BIN_WIDTH_RANGE.0, BIN_WIDTH_RANGE.1
            ),
        });
    }
    Ok(())
}

fn validate_counts(counts: &[f64]) -> Result<()> {
    if counts.iter().any(|&c| !(c >= 0.0) || !c.is_finite()) {
        return Err(Error::InvalidParameter {
            name: "counts",
            reason: "site counts must be finite and nonnegative".into(),
        });
    }
    if counts.iter().sum::<f64>() <= 0.0 {
        return Err(Error::InvalidParameter {
            name: "counts",
            reason: "population must be nonempty".into(),
        });
    }
    Ok(())
}

/// `Binomial(n, p)` as an `f64` count. Exact integer sampling up to 2³¹
/// trials; above that, a rounded and clamped Gaussian approximation.
fn binomial_count<R: Rng + ?Sized>(rng: &mut R, n: f64, p: f64) -> f64 {
    if n <= 0.0 || p <= 0.0 {
        return 0.0;
    }
    if p >= 1.0 {
        return n;
    }
    if n <= EXACT_BINOMIAL_LIMIT {
        let trials = n.round() as u64;
        let b = Binomial::new(trials, p).expect("validated binomial parameters");
        return b.sample(rng) as f64;
    }
    let mean = n * p;
    let sd = (n * p * (1.0 - p)).sqrt();
    let z: f64 = StandardNormal.sample(rng);
    (mean + sd * z).round().clamp(0.0, n)
}

/// Total number of children of `site_count` parents, sampled in bulk.
///
/// Finite offspring laws use a sequential conditional-binomial split of the
/// parents over the support (an exact multinomial); the geometric family uses
/// the exact negative-binomial sum where feasible and its Gamma–Poisson or
/// Gaussian form beyond.
fn offspring_total<R: Rng + ?Sized>(
    rng: &mut R,
    offspring: &OffspringDistribution,
    site_count: f64,
) -> f64 {
    match offspring.kind() {
        OffspringKind::Finite { probs } => {
            let mut remaining = site_count;
            let mut rest = 1.0;
            let mut total = 0.0;
            for (idx, &(k, p)) in probs.iter().enumerate() {
                if remaining <= 0.0 {
                    break;
                }
                if idx + 1 == probs.len() {
                    total += k as f64 * remaining;
                    break;
                }
                let frac = (p / rest).clamp(0.0, 1.0);
                let taken = binomial_count(rng, remaining, frac);
                total += k as f64 * taken;
                remaining -= taken;
                rest = (rest - p).max(f64::MIN_POSITIVE);
            }
            total
        }
        OffspringKind::GeometricShifted { b, q } => {
            let base = *b as f64 * site_count;
            let extra = if site_count <= EXACT_GEOMETRIC_SUM_LIMIT {
                let g = Geometric::new(1.0 - q).expect("validated at construction");
                let mut sum = 0.0;
                for _ in 0..site_count.round() as u64 {
                    sum += g.sample(rng) as f64;
                }
                sum
            } else if site_count <= GAMMA_POISSON_LIMIT {
                // NegBin(c, ·) is a Poisson with Gamma(c, q/(1−q)) mean.
                let gamma = Gamma::new(site_count, q / (1.0 - q)).expect("positive parameters");
                let lambda: f64 = gamma.sample(rng);
                if lambda <= 0.0 {
                    0.0
                } else {
                    Poisson::new(lambda).expect("positive mean").sample(rng)
                }
            } else {
                let mean_g = q / (1.0 - q);
                let var_g = q / ((1.0 - q) * (1.0 - q));
                let z: f64 = StandardNormal.sample(rng);
                (site_count * mean_g + (site_count * var_g).sqrt() * z).round().max(0.0)
            };
            base + extra
        }
    }
}

/// One generation step: every particle spawns offspring, every child takes an
/// independent displacement. Returns the next generation in the same storage
/// mode; errors with the generation reached if the cap would be exceeded.
pub fn advance<R: Rng + ?Sized>(pop: &Population, cfg: &BrwConfig, rng: &mut R) -> Result<Population> {
    let next_gen = pop.generation + 1;
    match &pop.storage {
        StorageMode::LatticeHistogram { offset, counts } => {
            if !cfg.step.is_lattice() {
                return Err(Error::Unsupported(
                    "lattice-histogram storage needs the two-point step law".into(),
                ));
            }
            let (new_offset, new_counts, total) =
                advance_lattice(offset, counts, cfg, rng);
            if total > cfg.population_cap {
                return Err(Error::CapExceeded { generation: next_gen, cap: cfg.population_cap });
            }
            Ok(Population {
                generation: next_gen,
                storage: StorageMode::LatticeHistogram { offset: new_offset, counts: new_counts },
            })
        }
        StorageMode::List { positions } => {
            if cfg.step.is_lattice() {
                if let Some((offset, counts)) = list_as_lattice(positions) {
                    let (new_offset, new_counts, total) =
                        advance_lattice(&offset, &counts, cfg, rng);
                    if total > cfg.population_cap {
                        return Err(Error::CapExceeded {
                            generation: next_gen,
                            cap: cfg.population_cap,
                        });
                    }
                    let mut out = Vec::with_capacity(total.min(1e7) as usize);
                    for (i, &c) in new_counts.iter().enumerate() {
                        let x = (new_offset + i as i64) as f64;
                        for _ in 0..c.round() as u64 {
                            out.push(x);
                        }
                    }
                    return Ok(Population {
                        generation: next_gen,
                        storage: StorageMode::List { positions: out },
                    });
                }
            }
            let mut out: Vec<f64> = Vec::with_capacity(positions.len() * 2);
            for &x in positions {
                let k = cfg.offspring.sample_one(rng);
                for _ in 0..k {
                    out.push(x + cfg.step.sample(rng));
                }
                if out.len() as f64 > cfg.population_cap {
                    return Err(Error::CapExceeded { generation: next_gen, cap: cfg.population_cap });
                }
            }
            out.sort_by(f64::total_cmp);
            Ok(Population { generation: next_gen, storage: StorageMode::List { positions: out } })
        }
        StorageMode::Binned { width, offset, counts, far_left, far_right } => {
            advance_binned(*width, *offset, counts, *far_left, *far_right, cfg, rng, next_gen)
        }
    }
}

/// Lattice generation step shared by histogram storage and lattice lists.
fn advance_lattice<R: Rng + ?Sized>(
    offset: &i64,
    counts: &[f64],
    cfg: &BrwConfig,
    rng: &mut R,
) -> (i64, Vec<f64>, f64) {
    let mut new_counts = vec![0.0; counts.len() + 2];
    let mut total = 0.0;
    for (i, &c) in counts.iter().enumerate() {
        if c <= 0.0 {
            continue;
        }
        let children = offspring_total(rng, &cfg.offspring, c);
        let right = binomial_count(rng, children, 0.5);
        let left = children - right;
        new_counts[i] += left; // position (offset−1) + i
        new_counts[i + 2] += right; // position (offset−1) + i + 2
        total += children;
    }
    (offset - 1, new_counts, total)
}

/// Reinterpret integral positions as a lattice histogram.
fn list_as_lattice(positions: &[f64]) -> Option<(i64, Vec<f64>)> {
    const INT_LIMIT: f64 = 9e15;
    if positions.is_empty() {
        return None;
    }
    let mut lo = i64::MAX;
    let mut hi = i64::MIN;
    for &x in positions {
        if x.fract() != 0.0 || x.abs() > INT_LIMIT {
            return None;
        }
        let i = x as i64;
        lo = lo.min(i);
        hi = hi.max(i);
    }
    let span = (hi - lo) as usize + 1;
    if span > 100_000_000 {
        return None;
    }
    let mut counts = vec![0.0; span];
    for &x in positions {
        counts[(x as i64 - lo) as usize] += 1.0;
    }
    Some((lo, counts))
}

#[allow(clippy::too_many_arguments)]
fn advance_binned<R: Rng + ?Sized>(
    width: f64,
    offset: i64,
    counts: &[f64],
    far_left: f64,
    far_right: f64,
    cfg: &BrwConfig,
    rng: &mut R,
    next_gen: u32,
) -> Result<Population> {
    let far_bin = (FAR_FIELD_RANGE / width).floor() as i64;
    let span = (2 * far_bin + 1) as usize;
    let mut grid = vec![0.0; span];
    let mut new_far_left = 0.0;
    let mut new_far_right = 0.0;

    // Quantile representatives for the bucketed displacement split.
    let reps: Vec<f64> = (0..STEP_BUCKETS)
        .map(|j| cfg.step.quantile((j as f64 + 0.5) / STEP_BUCKETS as f64))
        .collect();

    let deposit = |grid: &mut Vec<f64>, fl: &mut f64, fr: &mut f64, x: f64, c: f64| {
        let bin = (x / width).round();
        if bin.abs() > far_bin as f64 {
            if x < 0.0 {
                *fl += c;
            } else {
                *fr += c;
            }
        } else {
            grid[(bin as i64 + far_bin) as usize] += c;
        }
    };

    for (i, &c) in counts.iter().enumerate() {
        if c <= 0.0 {
            continue;
        }
        let x = (offset + i as i64) as f64 * width;
        let children = offspring_total(rng, &cfg.offspring, c);
        if children <= 0.0 {
            continue;
        }
        if children <= PER_PARTICLE_LIMIT {
            for _ in 0..children.round() as u64 {
                let child = x + cfg.step.sample(rng);
                deposit(&mut grid, &mut new_far_left, &mut new_far_right, child, 1.0);
            }
        } else {
            // Multinomial split over equiprobable buckets.
            let mut remaining = children;
            for (j, &r) in reps.iter().enumerate() {
                if remaining <= 0.0 {
                    break;
                }
                let slots_left = (STEP_BUCKETS - j) as f64;
                let taken = if j + 1 == STEP_BUCKETS {
                    remaining
                } else {
                    binomial_count(rng, remaining, 1.0 / slots_left)
                };
                if taken > 0.0 {
                    deposit(&mut grid, &mut new_far_left, &mut new_far_right, x + r, taken);
                }
                remaining -= taken;
            }
        }
    }
    // Far-field mass reproduces in place: its children cannot re-enter the
    // scaling window across the far-field margin at simulated horizons.
    if far_left > 0.0 {
        new_far_left += offspring_total(rng, &cfg.offspring, far_left);
    }
    if far_right > 0.0 {
        new_far_right += offspring_total(rng, &cfg.offspring, far_right);
    }

    let total = grid.iter().sum::<f64>() + new_far_left + new_far_right;
    if total > cfg.population_cap {
        return Err(Error::CapExceeded { generation: next_gen, cap: cfg.population_cap });
    }
    // Trim to the occupied range.
    let first = grid.iter().position(|&c| c > 0.0);
    let (new_offset, trimmed) = match first {
        Some(lo) => {
            let hi = grid.iter().rposition(|&c| c > 0.0).unwrap();
            (lo as i64 - far_bin, grid[lo..=hi].to_vec())
        }
        None => (0, vec![0.0]),
    };
    Ok(Population {
        generation: next_gen,
        storage: StorageMode::Binned {
            width,
            offset: new_offset,
            counts: trimmed,
            far_left: new_far_left,
            far_right: new_far_right,
        },
    })
}

/// `Z_n(scale·A) / Z_n(ℝ)`: the fraction of the population inside the scaled
/// target set. `scale` must be positive (callers pass `√n`).
pub fn empirical_measure(pop: &Population, set: &TargetSet, scale: f64) -> f64 {
    assert!(scale > 0.0, "empirical measure needs a positive scale");
    let mut inside = 0.0;
    let mut total = 0.0;
    pop.for_each_site(|x, c| {
        total += c;
        if set.contains(x / scale) {
            inside += c;
        }
    });
    (inside / total).clamp(0.0, 1.0)
}

/// The additive martingale `W_n = Z_n(ℝ)/mⁿ`.
pub fn martingale_w(pop: &Population, m: f64) -> f64 {
    assert!(m > 0.0, "martingale normalization needs m > 0");
    pop.total() / m.powi(pop.generation as i32)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::rng::replica_rng;
    use crate::rates::{OffspringDistribution, StepDistribution};

    fn half_half() -> OffspringDistribution {
        OffspringDistribution::finite(&[(1, 0.5), (2, 0.5)]).unwrap()
    }

    fn two_three() -> OffspringDistribution {
        OffspringDistribution::finite(&[(2, 0.5), (3, 0.5)]).unwrap()
    }

    fn cfg(offspring: OffspringDistribution, step: StepDistribution) -> BrwConfig {
        BrwConfig::new(offspring, step, DEFAULT_POPULATION_CAP, 0).unwrap()
    }

    fn cfg_uncapped(offspring: OffspringDistribution, step: StepDistribution) -> BrwConfig {
        BrwConfig::new(offspring, step, f64::INFINITY, 0).unwrap()
    }

    #[test]
    fn roots_have_unit_mass_at_origin() {
        for pop in [
            Population::lattice_root(),
            Population::list_root(),
            Population::binned_root(0.1).unwrap(),
        ] {
            assert_eq!(pop.generation, 0);
            assert_eq!(pop.total(), 1.0);
            assert_eq!(pop.sites(), vec![(0.0, 1.0)]);
            assert_eq!(martingale_w(&pop, 1.5), 1.0);
        }
    }

    #[test]
    fn doubling_offspring_supports_only_adjacent_sites() {
        let cfg = cfg(
            OffspringDistribution::finite(&[(2, 1.0)]).unwrap(),
            StepDistribution::rademacher(),
        );
        let mut rng = replica_rng(1, 0);
        let pop = advance(&Population::lattice_root(), &cfg, &mut rng).unwrap();
        assert_eq!(pop.generation, 1);
        assert_eq!(pop.total(), 2.0);
        for (x, _) in pop.sites() {
            assert!(x == -1.0 || x == 1.0, "child at unexpected position {x}");
        }
    }

    #[test]
    fn one_step_mean_growth_and_drift_are_within_monte_carlo_bands() {
        let cfg = cfg(half_half(), StepDistribution::rademacher());
        let replicas = 10_000u64;
        let mut total_sum = 0.0;
        let mut pos_sum = 0.0;
        for r in 0..replicas {
            let mut rng = replica_rng(11, r);
            let pop = advance(&Population::lattice_root(), &cfg, &mut rng).unwrap();
            total_sum += pop.total();
            pop.for_each_site(|x, c| pos_sum += x * c);
        }
        let mean_total = total_sum / replicas as f64;
        // Offspring variance 1/4 ⇒ 3σ band 3·0.5/√R.
        let band = 3.0 * 0.5 / (replicas as f64).sqrt();
        assert!((mean_total - 1.5).abs() < band, "mean {mean_total} outside band {band}");
        // E[Σ positions] = 0 by step symmetry; var per replica ≤ E[K²] = 2.5.
        let drift_band = 3.0 * 2.5f64.sqrt() / (replicas as f64).sqrt();
        let mean_pos = pos_sum / replicas as f64;
        assert!(mean_pos.abs() < drift_band, "drift {mean_pos} outside band {drift_band}");
    }

    #[test]
    fn martingale_has_unit_mean_over_replicas() {
        let cfg = cfg(half_half(), StepDistribution::rademacher());
        let n = 6;
        let replicas = 4000u64;
        let mut sum = 0.0;
        let mut sumsq = 0.0;
        for r in 0..replicas {
            let mut rng = replica_rng(5, r);
            let mut pop = Population::lattice_root();
            for _ in 0..n {
                pop = advance(&pop, &cfg, &mut rng).unwrap();
            }
            let w = martingale_w(&pop, 1.5);
            sum += w;
            sumsq += w * w;
        }
        let mean = sum / replicas as f64;
        let var = (sumsq / replicas as f64 - mean * mean).max(0.0);
        let band = 3.0 * (var / replicas as f64).sqrt();
        assert!((mean - 1.0).abs() < band, "E[W_n] = {mean} outside ±{band}");
    }

    #[test]
    fn list_delegates_to_lattice_exactly() {
        let cfg = cfg(half_half(), StepDistribution::rademacher());
        let mut rng_hist = replica_rng(9, 4);
        let mut rng_list = replica_rng(9, 4);
        let mut hist = Population::lattice_root();
        let mut list = Population::list_root();
        for _ in 0..5 {
            hist = advance(&hist, &cfg, &mut rng_hist).unwrap();
            list = advance(&list, &cfg, &mut rng_list).unwrap();
        }
        assert_eq!(hist.total(), list.total());
        // Same multiset of positions.
        let mut expanded = Vec::new();
        hist.for_each_site(|x, c| {
            for _ in 0..c as u64 {
                expanded.push(x);
            }
        });
        match &list.storage {
            StorageMode::List { positions } => assert_eq!(&expanded, positions),
            other => panic!("expected list storage, got {other:?}"),
        }
    }

    #[test]
    fn identical_streams_give_identical_histograms() {
        let cfg = cfg(two_three(), StepDistribution::rademacher());
        let run = || {
            let mut rng = replica_rng(42, 7);
            let mut pop = Population::lattice_root();
            for _ in 0..8 {
                pop = advance(&pop, &cfg, &mut rng).unwrap();
            }
            pop
        };
        assert_eq!(run(), run());
    }

    #[test]
    fn cap_breach_reports_the_generation_reached() {
        let cfg = BrwConfig::new(
            OffspringDistribution::finite(&[(2, 1.0)]).unwrap(),
            StepDistribution::rademacher(),
            4.0,
            0,
        )
        .unwrap();
        let mut rng = replica_rng(3, 0);
        let mut pop = Population::lattice_root();
        pop = advance(&pop, &cfg, &mut rng).unwrap();
        pop = advance(&pop, &cfg, &mut rng).unwrap();
        assert_eq!(pop.total(), 4.0);
        match advance(&pop, &cfg, &mut rng) {
            Err(Error::CapExceeded { generation, cap }) => {
                assert_eq!(generation, 3);
                assert_eq!(cap, 4.0);
            }
            other => panic!("expected cap breach, got {other:?}"),
        }
    }

    #[test]
    fn cap_below_one_is_rejected() {
        let err = BrwConfig::new(
            half_half(),
            StepDistribution::rademacher(),
            0.5,
            0,
        );
        assert!(matches!(err, Err(Error::InvalidParameter { name: "population_cap", .. })));
    }

    #[test]
    fn empirical_measure_basics() {
        let everything: TargetSet = "(-inf,inf)".parse().unwrap();
        let left: TargetSet = "(-inf,0]".parse().unwrap();
        let root = Population::list_root();
        assert_eq!(empirical_measure(&root, &everything, 3.0), 1.0);
        assert_eq!(empirical_measure(&root, &left, 3.0), 1.0);

        let pop = Population::from_list(vec![-2.0, -1.0, 1.0, 4.0], 2).unwrap();
        assert_eq!(empirical_measure(&pop, &left, 1.0), 0.5);
        // Scaling moves the boundary: at scale 4, only 4.0 maps to 1.0.
        let unit: TargetSet = "[1,1]".parse().unwrap();
        assert_eq!(empirical_measure(&pop, &unit, 4.0), 0.25);
    }

    #[test]
    fn gaussian_steps_run_in_list_mode() {
        let cfg = cfg(half_half(), StepDistribution::gaussian());
        let mut rng = replica_rng(2, 0);
        let mut pop = Population::list_root();
        for _ in 0..6 {
            pop = advance(&pop, &cfg, &mut rng).unwrap();
        }
        assert_eq!(pop.generation, 6);
        assert!(pop.total() >= 1.0);
        match &pop.storage {
            StorageMode::List { positions } => {
                assert!(positions.windows(2).all(|w| w[0] <= w[1]), "list not sorted");
            }
            other => panic!("expected list storage, got {other:?}"),
        }
    }

    #[test]
    fn binned_mode_preserves_totals_for_deterministic_offspring() {
        let cfg = cfg(
            OffspringDistribution::finite(&[(2, 1.0)]).unwrap(),
            StepDistribution::gaussian(),
        );
        let mut rng = replica_rng(17, 0);
        let mut pop = Population::binned_root(0.1).unwrap();
        for g in 1..=10 {
            pop = advance(&pop, &cfg, &mut rng).unwrap();
            assert_eq!(pop.total(), (2f64).powi(g));
        }
        let everything: TargetSet = "(-inf,inf)".parse().unwrap();
        assert_eq!(empirical_measure(&pop, &everything, 1.0), 1.0);
    }

    #[test]
    fn binned_mean_position_is_centered_over_replicas() {
        let cfg = cfg(two_three(), StepDistribution::weibull(1.0, 0.5).unwrap());
        let replicas = 400u64;
        let mut mean_sum = 0.0;
        for r in 0..replicas {
            let mut rng = replica_rng(23, r);
            let mut pop = Population::binned_root(0.1).unwrap();
            for _ in 0..6 {
                pop = advance(&pop, &cfg, &mut rng).unwrap();
            }
            let mut wsum = 0.0;
            let mut csum = 0.0;
            pop.for_each_site(|x, c| {
                wsum += x * c;
                csum += c;
            });
            mean_sum += wsum / csum;
        }
        let grand = mean_sum / replicas as f64;
        // Per-replica mean position has O(1) variance; generous 5σ band.
        let band = 5.0 * 1.5 / (replicas as f64).sqrt();
        assert!(grand.abs() < band, "centered-position mean {grand} outside ±{band}");
    }

    #[test]
    fn far_field_mass_reproduces_in_place() {
        let cfg = cfg(
            OffspringDistribution::finite(&[(2, 1.0)]).unwrap(),
            StepDistribution::gaussian(),
        );
        let pop = Population::from_binned(0.1, 0, vec![1.0], 3.0, 5.0, 4).unwrap();
        let mut rng = replica_rng(1, 1);
        let next = advance(&pop, &cfg, &mut rng).unwrap();
        match &next.storage {
            StorageMode::Binned { far_left, far_right, .. } => {
                assert_eq!(*far_left, 6.0);
                assert_eq!(*far_right, 10.0);
            }
            other => panic!("expected binned storage, got {other:?}"),
        }
        assert_eq!(next.total(), 18.0);
        let left: TargetSet = "(-inf,0]".parse().unwrap();
        // Far-left mass counts into a left half-line; the two lattice children
        // of the near particle split by sign, so the measure is within [6/18, 8/18].
        let frac = empirical_measure(&next, &left, 2.0);
        assert!((6.0 / 18.0..=8.0 / 18.0).contains(&frac));
    }

    #[test]
    fn huge_site_counts_use_the_aggregate_paths() {
        // Gaussian-approximation binomial path (count > 2³¹).
        let cfg_bin = cfg_uncapped(half_half(), StepDistribution::rademacher());
        let big = 1e10;
        let pop = Population::from_lattice(0, vec![big], 20).unwrap();
        let mut rng = replica_rng(8, 0);
        let next = advance(&pop, &cfg_bin, &mut rng).unwrap();
        let rel = (next.total() - 1.5 * big).abs() / (1.5 * big);
        // sd of the total is √(0.25·1e10) = 5e4 ⇒ relative 5σ ≈ 3.3e-6.
        assert!(rel < 2e-5, "aggregate growth off by relative {rel}");

        // Gamma–Poisson negative-binomial path (4096 < count ≤ 1e15).
        let cfg_geo = cfg_uncapped(
            OffspringDistribution::geometric_shifted(2, 0.5).unwrap(),
            StepDistribution::rademacher(),
        );
        let pop = Population::from_lattice(0, vec![1e5], 3).unwrap();
        let mut rng = replica_rng(8, 1);
        let next = advance(&pop, &cfg_geo, &mut rng).unwrap();
        // m = 2 + q/(1−q) = 3; total sd = √(1e5·2) ≈ 447.
        let rel = (next.total() - 3e5).abs() / 3e5;
        assert!(rel < 5.0 * 447.0 / 3e5, "geometric aggregate growth off by relative {rel}");
    }

    #[test]
    fn geometric_offspring_mean_growth() {
        let cfg = cfg(
            OffspringDistribution::geometric_shifted(2, 0.5).unwrap(),
            StepDistribution::rademacher(),
        );
        let replicas = 10_000u64;
        let mut sum = 0.0;
        for r in 0..replicas {
            let mut rng = replica_rng(31, r);
            sum += advance(&Population::lattice_root(), &cfg, &mut rng).unwrap().total();
        }
        let mean = sum / replicas as f64;
        // Offspring variance q/(1−q)² = 2 ⇒ 3σ band 3·√2/√R.
        let band = 3.0 * 2f64.sqrt() / (replicas as f64).sqrt();
        assert!((mean - 3.0).abs() < band, "geometric mean {mean} outside ±{band}");
    }

    #[test]
    fn martingale_variance_stabilizes_in_n() {
        // Var(W_n) → σ²_off/(m²−m) for supercritical laws; successive sample
        // variances over a shared replica set should form a Cauchy-like trend:
        // |v_20 − v_15| < |v_10 − v_5| + slack.
        let cfg = cfg_uncapped(two_three(), StepDistribution::rademacher());
        let replicas = 1500u64;
        let horizon = [5u32, 10, 15, 20];
        let mut vars = Vec::new();
        for &n in &horizon {
            let mut sum = 0.0;
            let mut sumsq = 0.0;
            for r in 0..replicas {
                let mut rng = replica_rng(77, r);
                let mut pop = Population::lattice_root();
                for _ in 0..n {
                    pop = advance(&pop, &cfg, &mut rng).unwrap();
                }
                let w = martingale_w(&pop, 2.5);
                sum += w;
                sumsq += w * w;
            }
            let mean = sum / replicas as f64;
            vars.push((sumsq / replicas as f64 - mean * mean).max(0.0));
        }
        let early_gap = (vars[1] - vars[0]).abs();
        let late_gap = (vars[3] - vars[2]).abs();
        assert!(
            late_gap <= early_gap + 0.05,
            "martingale variance not settling: early {early_gap}, late {late_gap}"
        );
    }
}
