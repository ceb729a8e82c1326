//! Offspring (reproduction) laws for the underlying branching process.
//!
//! Every particle branches independently with the same law `{p_k}` on
//! `k ≥ 1` — no deaths, so the population never goes extinct and grows like
//! `m^n` with `m = Σ k·p_k` once `m > 1`. The geometry of the lower tail of
//! the population (and hence the cheapest way to suppress branching) is
//! governed by `p₁` when `p₁ > 0` and by the minimal branching number
//! `b = min supp ≥ 2` otherwise; the maximal branching number
//! `B = sup supp ≤ ∞` controls how fast the population *can* grow.
//!
//! Supercriticality (`m > 1`) is deliberately not enforced at construction:
//! degenerate laws (`p₁ = 1`) are legitimate inputs for the exact
//! small-instance engines; the regime classifier rejects them instead.

use rand::Rng;
use rand_distr::{Distribution, Geometric};

use crate::error::{Error, Result};

/// The family of an offspring law.
#[derive(Debug, Clone, PartialEq)]
pub enum OffspringKind {
    /// Explicit finite-support pmf on `k ≥ 1`.
    Finite { probs: Vec<(u32, f64)> },
    /// `K = b + G`, `G ~ Geometric(q)` on `{0,1,2,…}` with
    /// `P(G = j) = (1−q)·q^j`; unbounded support, `B = ∞`.
    GeometricShifted { b: u32, q: f64 },
}

/// An offspring law with its derived summary quantities cached.
#[derive(Debug, Clone, PartialEq)]
pub struct OffspringDistribution {
    kind: OffspringKind,
    mean: f64,
    variance: f64,
    p1: f64,
    b_min: u32,
    b_max: Option<u32>,
}

impl OffspringDistribution {
    /// Builds a finite-support law. Keys are offspring counts `k ≥ 1`,
    /// values positive probabilities summing to 1 within 1e-12 (renormalized
    /// exactly afterwards so downstream exact arithmetic sees mass 1).
    pub fn finite(probs: &[(u32, f64)]) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::InvalidParameter {
                name: "probs",
                reason: "offspring law needs at least one atom".into(),
            });
        }
        let mut sorted: Vec<(u32, f64)> = probs.to_vec();
        sorted.sort_by_key(|&(k, _)| k);
        let mut sum = 0.0;
        for i in 0..sorted.len() {
            let (k, p) = sorted[i];
            if k == 0 {
                return Err(Error::Hypothesis(
                    "offspring count 0 is excluded (no-death assumption)".into(),
                ));
            }
            if !(p > 0.0) || !p.is_finite() {
                return Err(Error::InvalidParameter {
                    name: "probs",
                    reason: format!("probability of k={k} must be positive and finite, got {p}"),
                });
            }
            if i > 0 && sorted[i - 1].0 == k {
                return Err(Error::InvalidParameter {
                    name: "probs",
                    reason: format!("duplicate offspring count k={k}"),
                });
            }
            if k > 1_000_000 {
                return Err(Error::InvalidParameter {
                    name: "probs",
                    reason: format!("offspring count k={k} unreasonably large"),
                });
            }
            sum += p;
        }
        if (sum - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidParameter {
                name: "probs",
                reason: format!("probabilities sum to {sum}, not 1"),
            });
        }
        for entry in &mut sorted {
            entry.1 /= sum;
        }
        let mean: f64 = sorted.iter().map(|&(k, p)| k as f64 * p).sum();
        let ex2: f64 = sorted.iter().map(|&(k, p)| (k as f64).powi(2) * p).sum();
        let p1 = sorted.iter().find(|&&(k, _)| k == 1).map_or(0.0, |&(_, p)| p);
        let b_min = sorted.first().unwrap().0;
        let b_max = Some(sorted.last().unwrap().0);
        Ok(OffspringDistribution {
            kind: OffspringKind::Finite { probs: sorted },
            mean,
            variance: ex2 - mean * mean,
            p1,
            b_min,
            b_max,
        })
    }

    /// Builds the shifted-geometric law `K = b + Geometric(q)`.
    pub fn geometric_shifted(b: u32, q: f64) -> Result<Self> {
        if b == 0 {
            return Err(Error::Hypothesis(
                "offspring count 0 is excluded (no-death assumption)".into(),
            ));
        }
        if !(q > 0.0 && q < 1.0) {
            return Err(Error::InvalidParameter {
                name: "q",
                reason: format!("geometric parameter must lie in (0,1), got {q}"),
            });
        }
        let g_mean = q / (1.0 - q);
        let g_var = q / ((1.0 - q) * (1.0 - q));
        Ok(OffspringDistribution {
            kind: OffspringKind::GeometricShifted { b, q },
            mean: b as f64 + g_mean,
            variance: g_var,
            p1: if b == 1 { 1.0 - q } else { 0.0 },
            b_min: b,
            b_max: None,
        })
    }

    /// Parses `"<k>:<p>,<k>:<p>,…"` (e.g. `1:0.5,2:0.5`) or
    /// `"geometric:<b>:<q>"`.
    pub fn parse(s: &str) -> Result<Self> {
        let err = |reason: String| Error::InvalidParameter { name: "offspring", reason };
        let s = s.trim();
        if let Some(rest) = s.strip_prefix("geometric:") {
            let parts: Vec<&str> = rest.split(':').collect();
            if parts.len() != 2 {
                return Err(err(format!("expected geometric:<b>:<q>, got `{s}`")));
            }
            let b: u32 =
                parts[0].parse().map_err(|_| err(format!("bad minimum count `{}`", parts[0])))?;
            let q: f64 =
                parts[1].parse().map_err(|_| err(format!("bad parameter `{}`", parts[1])))?;
            return Self::geometric_shifted(b, q);
        }
        let mut probs = Vec::new();
        for item in s.split(',') {
            let (k_s, p_s) = item
                .split_once(':')
                .ok_or_else(|| err(format!("expected <k>:<p> entries, got `{item}`")))?;
            let k: u32 = k_s.trim().parse().map_err(|_| err(format!("bad count `{k_s}`")))?;
            let p: f64 = p_s.trim().parse().map_err(|_| err(format!("bad probability `{p_s}`")))?;
            probs.push((k, p));
        }
        Self::finite(&probs)
    }

    /// Canonical name matching the parse format.
    pub fn name(&self) -> String {
        match &self.kind {
            OffspringKind::Finite { probs } => probs
                .iter()
                .map(|(k, p)| format!("{k}:{p}"))
                .collect::<Vec<_>>()
                .join(","),
            OffspringKind::GeometricShifted { b, q } => format!("geometric:{b}:{q}"),
        }
    }

    pub fn kind(&self) -> &OffspringKind {
        &self.kind
    }

    /// Mean offspring count `m`.
    pub fn mean(&self) -> f64 {
        self.mean
    }

    /// Offspring variance (finite for both kinds here).
    pub fn variance(&self) -> f64 {
        self.variance
    }

    /// `P(K = 1)`.
    pub fn p1(&self) -> f64 {
        self.p1
    }

    /// Minimal branching number `b = min supp`.
    pub fn b_min(&self) -> u32 {
        self.b_min
    }

    /// Maximal branching number `B = sup supp`; `None` means `+∞`.
    pub fn b_max(&self) -> Option<u32> {
        self.b_max
    }

    /// `P(K = k)`.
    pub fn pmf(&self, k: u32) -> f64 {
        match &self.kind {
            OffspringKind::Finite { probs } => probs
                .iter()
                .find(|&&(kk, _)| kk == k)
                .map_or(0.0, |&(_, p)| p),
            OffspringKind::GeometricShifted { b, q } => {
                if k < *b {
                    0.0
                } else {
                    (1.0 - q) * q.powi((k - b) as i32)
                }
            }
        }
    }

    /// Dense pmf over `0..=B` for the exact population-law machinery; only
    /// finite-support laws admit one.
    pub fn dense_pmf(&self) -> Result<Vec<f64>> {
        match &self.kind {
            OffspringKind::Finite { probs } => {
                let kmax = probs.last().unwrap().0 as usize;
                let mut dense = vec![0.0; kmax + 1];
                for &(k, p) in probs {
                    dense[k as usize] = p;
                }
                Ok(dense)
            }
            OffspringKind::GeometricShifted { .. } => Err(Error::Unsupported(
                "exact population law needs a finite-support offspring distribution".into(),
            )),
        }
    }

    /// One offspring count for a single parent.
    pub fn sample_one<R: Rng + ?Sized>(&self, rng: &mut R) -> u32 {
        match &self.kind {
            OffspringKind::Finite { probs } => {
                let u: f64 = rng.gen();
                let mut acc = 0.0;
                for &(k, p) in probs {
                    acc += p;
                    if u < acc {
                        return k;
                    }
                }
                probs.last().unwrap().0
            }
            OffspringKind::GeometricShifted { b, q } => {
                // rand_distr's Geometric(p) counts failures before a success:
                // P(j) = (1−p)^j p, so p = 1 − q gives P(j) = q^j (1−q).
                let g = Geometric::new(1.0 - q).expect("validated at construction");
                let j: u64 = g.sample(rng);
                b + j.min(u32::MAX as u64 - *b as u64) as u32
            }
        }
    }

    /// `ln(1/p₁)/ln m`: the polynomial-correction exponent of the population
    /// lower tail when single-child lineages exist. Needs `p₁ > 0`, `m > 1`.
    pub fn schroder_exponent(&self) -> Result<f64> {
        if self.p1 <= 0.0 {
            return Err(Error::Hypothesis(
                "lower-tail exponent needs P(K=1) > 0 (single-child lineages)".into(),
            ));
        }
        if self.mean <= 1.0 {
            return Err(Error::Hypothesis(format!(
                "mean offspring {} is not supercritical",
                self.mean
            )));
        }
        Ok((1.0 / self.p1).ln() / self.mean.ln())
    }
}

/// Free-function form of [`OffspringDistribution::schroder_exponent`].
pub fn schroder_exponent(offspring: &OffspringDistribution) -> Result<f64> {
    offspring.schroder_exponent()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    const CHI_HALF_HALF: f64 = 1.709_511_291_351_454_777; // ln 2 / ln 1.5

    #[test]
    fn finite_law_summaries() {
        let o = OffspringDistribution::parse("1:0.5,2:0.5").unwrap();
        assert_eq!(o.p1(), 0.5);
        assert_eq!(o.b_min(), 1);
        assert_eq!(o.b_max(), Some(2));
        assert!((o.mean() - 1.5).abs() < 1e-15);
        assert!((o.variance() - 0.25).abs() < 1e-15);
        let b = OffspringDistribution::parse("2:0.5,3:0.5").unwrap();
        assert_eq!(b.p1(), 0.0);
        assert_eq!(b.b_min(), 2);
        assert!((b.mean() - 2.5).abs() < 1e-15);
    }

    #[test]
    fn schroder_exponent_matches_reference() {
        let o = OffspringDistribution::parse("1:0.5,2:0.5").unwrap();
        assert!((o.schroder_exponent().unwrap() - CHI_HALF_HALF).abs() <= 1e-12);
        // Laws without single-child lineages have no such exponent.
        let b = OffspringDistribution::parse("2:1").unwrap();
        assert!(b.schroder_exponent().is_err());
    }

    #[test]
    fn degenerate_single_child_law_is_constructible_but_not_supercritical() {
        let o = OffspringDistribution::parse("1:1").unwrap();
        assert_eq!(o.mean(), 1.0);
        assert!(o.schroder_exponent().is_err());
    }

    #[test]
    fn rejects_bad_laws() {
        assert!(OffspringDistribution::parse("0:0.5,2:0.5").is_err());
        assert!(OffspringDistribution::parse("1:0.6,2:0.6").is_err());
        assert!(OffspringDistribution::parse("1:0.5").is_err());
        assert!(OffspringDistribution::parse("").is_err());
        assert!(OffspringDistribution::geometric_shifted(2, 1.0).is_err());
        assert!(OffspringDistribution::geometric_shifted(0, 0.5).is_err());
    }

    #[test]
    fn geometric_shifted_moments() {
        let o = OffspringDistribution::geometric_shifted(2, 0.25).unwrap();
        assert_eq!(o.b_min(), 2);
        assert_eq!(o.b_max(), None);
        assert!((o.mean() - (2.0 + 0.25 / 0.75)).abs() < 1e-15);
        assert!((o.variance() - 0.25 / (0.75 * 0.75)).abs() < 1e-15);
        assert_eq!(o.p1(), 0.0);
        // pmf sums.
        let total: f64 = (2..60).map(|k| o.pmf(k)).sum();
        assert!((total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn sampling_matches_pmf() {
        let laws = [
            OffspringDistribution::parse("1:0.5,2:0.5").unwrap(),
            OffspringDistribution::parse("2:0.3,3:0.2,5:0.5").unwrap(),
            OffspringDistribution::geometric_shifted(2, 0.4).unwrap(),
        ];
        for (i, law) in laws.iter().enumerate() {
            let mut rng = ChaCha8Rng::seed_from_u64(4000 + i as u64);
            let n = 100_000;
            let mut counts = std::collections::HashMap::new();
            for _ in 0..n {
                *counts.entry(law.sample_one(&mut rng)).or_insert(0usize) += 1;
            }
            for (&k, &c) in &counts {
                let want = law.pmf(k);
                let got = c as f64 / n as f64;
                let se = (want * (1.0 - want) / n as f64).sqrt().max(1e-4);
                assert!(
                    (got - want).abs() <= 4.5 * se,
                    "{}: pmf({k}) {got} vs {want}",
                    law.name()
                );
            }
            let mean: f64 = counts.iter().map(|(&k, &c)| k as f64 * c as f64).sum::<f64>() / n as f64;
            assert!((mean - law.mean()).abs() < 0.05, "{} mean", law.name());
        }
    }

    #[test]
    fn parse_round_trips() {
        for s in ["1:0.5,2:0.5", "2:0.3,3:0.2,5:0.5", "geometric:2:0.25"] {
            let o = OffspringDistribution::parse(s).unwrap();
            let back = OffspringDistribution::parse(&o.name()).unwrap();
            assert_eq!(o, back);
        }
    }
}
