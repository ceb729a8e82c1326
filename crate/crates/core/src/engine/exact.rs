//! Exact small-instance laws.
//!
//! Two deterministic oracles back the Monte-Carlo machinery:
//!
//! - [`population_law_exact`] iterates the offspring generating function to
//!   the exact distribution of the population size `|Z_n|` (finite-support
//!   offspring, enumerable state space).
//! - [`exact_event_prob`] runs a dynamic program over distributions of whole
//!   generation histograms to the exact probability of the deviation event
//!   `{Z̄_n(√n·A) ≥ p}` at tiny `n` on the two-point lattice step. It is the
//!   ground truth against which the importance-sampling estimators are
//!   checked for unbiasedness.
//!
//! Both enumerate every outcome — no sampling, no truncation — and refuse
//! (with the attempted size) when the state space would explode.

use crate::error::{Error, Result};
use crate::gaussian::TargetSet;
use crate::rates::OffspringDistribution;
use std::collections::BTreeMap;

/// Largest number of simultaneous states either oracle will hold.
const STATE_LIMIT: u64 = 1_000_000;
/// Slack when comparing the integer in-set count against `p·total`.
const COUNT_SLACK: f64 = 1e-9;

/// Exact distribution of the population size `|Z_n|`.
#[derive(Debug, Clone)]
pub struct PopulationLaw {
    probs: Vec<f64>,
}

impl PopulationLaw {
    /// `P(|Z_n| = k)`; zero outside the stored support.
    pub fn prob(&self, k: usize) -> f64 {
        self.probs.get(k).copied().unwrap_or(0.0)
    }

    /// Dense probabilities indexed by population size.
    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    /// Largest population size with positive probability.
    pub fn max_size(&self) -> usize {
        self.probs.iter().rposition(|&p| p > 0.0).unwrap_or(0)
    }

    pub fn mean(&self) -> f64 {
        self.probs.iter().enumerate().map(|(k, &p)| k as f64 * p).sum()
    }

    pub fn variance(&self) -> f64 {
        let mean = self.mean();
        let second: f64 = self.probs.iter().enumerate().map(|(k, &p)| (k as f64) * (k as f64) * p).sum();
        (second - mean * mean).max(0.0)
    }
}

/// Exact law of `|Z_n|` by iterating the branching recursion
/// `|Z_{j+1}| = Σ_{i≤K} |Z_j|⁽ⁱ⁾`: one generation multiplies the size law
/// into its `k`-fold convolutions, mixed by the offspring probabilities.
///
/// Needs a finite-support offspring law and a final support of at most 10⁶
/// sizes. The returned law is validated: total mass within 1e-12 of one and
/// mean within 1e-9 relative of `mⁿ`.
pub fn population_law_exact(offspring: &OffspringDistribution, n: u32) -> Result<PopulationLaw> {
    let pmf = offspring.dense_pmf()?;
    let kmax = pmf.len() - 1;
    // Final support is bounded by B^n.
    let states = (kmax as u128).checked_pow(n).unwrap_or(u128::MAX).saturating_add(1);
    if states > STATE_LIMIT as u128 {
        return Err(Error::StateSpace {
            states: states.min(u64::MAX as u128) as u64,
            limit: STATE_LIMIT,
        });
    }

    // q[k] = P(|Z_j| = k), starting from the single root.
    let mut q = vec![0.0, 1.0];
    for _ in 0..n {
        let mut next = vec![0.0; (q.len() - 1) * kmax + 1];
        // power = q^{*k}, built incrementally over the offspring support.
        let mut power = vec![1.0];
        for (k, &pk) in pmf.iter().enumerate().skip(1) {
            power = convolve(&power, &q);
            if pk > 0.0 {
                for (j, &w) in power.iter().enumerate() {
                    if w > 0.0 {
                        next[j] += pk * w;
                    }
                }
            }
            if k == kmax {
                break;
            }
        }
        q = next;
    }

    let law = PopulationLaw { probs: q };
    let mass: f64 = law.probs.iter().sum();
    if (mass - 1.0).abs() > 1e-12 {
        return Err(Error::NoConverge(format!(
            "size-law mass drifted to {mass} after {n} generations"
        )));
    }
    let expected = offspring.mean().powi(n as i32);
    let rel = (law.mean() - expected).abs() / expected;
    if rel > 1e-9 {
        return Err(Error::NoConverge(format!(
            "size-law mean off by relative {rel} from m^{n}"
        )));
    }
    Ok(law)
}

fn convolve(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        if x == 0.0 {
            continue;
        }
        for (j, &y) in b.iter().enumerate() {
            if y != 0.0 {
                out[i + j] += x * y;
            }
        }
    }
    out
}

/// A generation histogram: sorted `(position, count)` pairs, positive counts.
type Hist = Vec<(i32, u64)>;

/// Exact probability of the deviation event `{Z̄_n(√n·A) ≥ p}` by full
/// enumeration: the dynamic program carries the exact distribution over
/// generation histograms, expanding each occupied site through every
/// offspring-and-direction outcome of its particles.
///
/// Requirements: finite-support offspring, the two-point lattice step
/// (children move to `parent ± 1`, each with probability ½), and a state
/// space of at most 10⁶ histograms. Deterministic: no randomness anywhere.
pub fn exact_event_prob(
    offspring: &OffspringDistribution,
    step: &crate::rates::StepDistribution,
    n: u32,
    set: &TargetSet,
    p: f64,
) -> Result<f64> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidParameter {
            name: "p",
            reason: format!("target fraction {p} outside [0, 1]"),
        });
    }
    if !step.is_lattice() {
        return Err(Error::Unsupported(
            "full enumeration needs the two-point lattice step law".into(),
        ));
    }
    let pmf = offspring.dense_pmf()?;
    if p == 0.0 {
        return Ok(1.0); // the fraction is always ≥ 0
    }
    if n == 0 {
        // Single root at the origin; the event is {1_A(0) ≥ p}.
        return Ok(if set.contains(0.0) { 1.0 } else { 0.0 });
    }

    // Cheap a-priori gate: generation n occupies n+1 parity-fixed sites with
    // at most B^n particles, so the histogram count is bounded by the
    // composition number C(B^n + n + 1, n + 1). Refusing on that bound avoids
    // grinding toward the runtime limit on hopeless instances.
    let slots = n as f64 + 1.0;
    let log_max_total = n as f64 * ((pmf.len() - 1) as f64).ln();
    let log_bound = if log_max_total > 700.0 {
        f64::INFINITY
    } else {
        let t = log_max_total.exp();
        libm::lgamma(t + slots + 1.0) - libm::lgamma(slots + 1.0) - libm::lgamma(t + 1.0)
    };
    if log_bound > (STATE_LIMIT as f64).ln() {
        let states = if log_bound > 43.0 { u64::MAX } else { log_bound.exp() as u64 };
        return Err(Error::StateSpace { states, limit: STATE_LIMIT });
    }

    let mut outcome_cache: OutcomeCache = BTreeMap::new();
    let mut states: BTreeMap<Hist, f64> = BTreeMap::new();
    states.insert(vec![(0, 1)], 1.0);

    for _ in 0..n {
        let mut next: BTreeMap<Hist, f64> = BTreeMap::new();
        for (hist, prob) in &states {
            // Expand site by site, merging equal partial histograms as we go.
            let mut partials: BTreeMap<Hist, f64> = BTreeMap::new();
            partials.insert(Vec::new(), *prob);
            for &(pos, count) in hist {
                let outcomes = site_outcomes(&pmf, count, &mut outcome_cache)?;
                let mut grown: BTreeMap<Hist, f64> = BTreeMap::new();
                for (partial, pp) in &partials {
                    for &(left, right, op) in outcomes {
                        let mut h = partial.clone();
                        if left > 0 {
                            add_count(&mut h, pos - 1, left);
                        }
                        if right > 0 {
                            add_count(&mut h, pos + 1, right);
                        }
                        *grown.entry(h).or_insert(0.0) += pp * op;
                        if grown.len() as u64 > STATE_LIMIT {
                            return Err(Error::StateSpace {
                                states: grown.len() as u64,
                                limit: STATE_LIMIT,
                            });
                        }
                    }
                }
                partials = grown;
            }
            for (h, pr) in partials {
                *next.entry(h).or_insert(0.0) += pr;
            }
            if next.len() as u64 > STATE_LIMIT {
                return Err(Error::StateSpace { states: next.len() as u64, limit: STATE_LIMIT });
            }
        }
        states = next;
    }

    let scale = (n as f64).sqrt();
    let mut hit = 0.0;
    for (hist, prob) in &states {
        let total: u64 = hist.iter().map(|&(_, c)| c).sum();
        let inside: u64 = hist
            .iter()
            .filter(|&&(pos, _)| set.contains(pos as f64 / scale))
            .map(|&(_, c)| c)
            .sum();
        if inside as f64 >= p * total as f64 - COUNT_SLACK {
            hit += prob;
        }
    }
    Ok(hit.clamp(0.0, 1.0))
}

fn add_count(hist: &mut Hist, pos: i32, count: u64) {
    match hist.binary_search_by_key(&pos, |&(p, _)| p) {
        Ok(i) => hist[i].1 += count,
        Err(i) => hist.insert(i, (pos, count)),
    }
}

type OutcomeCache = BTreeMap<u64, Vec<(u64, u64, f64)>>;

/// All `(left, right, probability)` outcomes of one site holding `count`
/// particles: the total child count follows the `count`-fold convolution of
/// the offspring law, and given `s` children the rightward number is
/// `Binomial(s, ½)`. Probabilities are assembled in the log domain so that
/// large sites cannot overflow.
fn site_outcomes<'a>(
    pmf: &[f64],
    count: u64,
    cache: &'a mut OutcomeCache,
) -> Result<&'a Vec<(u64, u64, f64)>> {
    if !cache.contains_key(&count) {
        // count-fold convolution of the offspring pmf.
        let mut total_law = vec![1.0];
        for _ in 0..count {
            total_law = convolve(&total_law, pmf);
        }
        let mut outcomes = Vec::new();
        for (s, &ps) in total_law.iter().enumerate() {
            if ps <= 0.0 {
                continue;
            }
            let log_ps = ps.ln();
            let s_f = s as f64;
            for r in 0..=s {
                let log_split = libm::lgamma(s_f + 1.0)
                    - libm::lgamma(r as f64 + 1.0)
                    - libm::lgamma((s - r) as f64 + 1.0)
                    - s_f * std::f64::consts::LN_2;
                let prob = (log_ps + log_split).exp();
                if prob > 0.0 {
                    outcomes.push(((s - r) as u64, r as u64, prob));
                }
            }
        }
        if outcomes.len() as u64 > STATE_LIMIT {
            return Err(Error::StateSpace { states: outcomes.len() as u64, limit: STATE_LIMIT });
        }
        cache.insert(count, outcomes);
    }
    Ok(cache.get(&count).expect("just inserted"))
}
