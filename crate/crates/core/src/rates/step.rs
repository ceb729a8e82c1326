//! Step (displacement) distributions.
//!
//! Every step law here is symmetric and is **sampled standardized**: the
//! returned variates have mean 0 and variance exactly 1. Each kind is declared
//! through its *raw* envelope — the distribution whose tail has the textbook
//! form — and the standardization factor `σ₀ = sd(raw)` is recorded on the
//! type, so raw-scale statements are always recoverable as `σ₀ · X`:
//!
//! - `Rademacher`: ±1 with probability ½ each (σ₀ = 1). The one lattice kind.
//! - `Gaussian`: standard normal (σ₀ = 1).
//! - `BoundedUniform { l }`: uniform on `[−l, l]` (σ₀ = l/√3; standardized
//!   support `[−√3, √3]`).
//! - `Weibull { lambda, alpha }`: symmetric with `P(|X| > z) = e^{−λ z^α}`
//!   (σ₀² = Γ(1+2/α)/λ^{2/α}). `α = 1` is two-sided exponential; `α ≥ 1` has
//!   finite exponential moments near 0, `α < 1` has none.
//! - `Gumbel { alpha }`: symmetric with `P(|X| > z) = e^{−e^{z^α}}` for
//!   `z ≥ 0`; the envelope forces an atom of mass `1 − e^{−1}` at 0. All
//!   exponential moments are finite.
//!
//! The log-MGF `Λ(t) = ln E e^{tX}` (standardized scale) is closed-form where
//! possible and tanh-sinh quadrature otherwise, evaluated through
//! `E cosh(t|X|) = 1 + t ∫₀^∞ sinh(tz) P(|X| > z) dz`, which is smooth in the
//! integration variable for every shape parameter.

use rand::Rng;
use rand_distr::{Distribution, Exp1, StandardNormal};

use super::quad::tanh_sinh;
use crate::error::{Error, Result};
use crate::gaussian::normal::{erfc, phi_inv};

const SQRT_3: f64 = 1.732_050_807_568_877_3;
const QUAD_TOL: f64 = 1e-12;

/// The declared family and raw parameters of a step law.
#[derive(Debug, Clone, PartialEq)]
pub enum StepKind {
    Rademacher,
    Gaussian,
    BoundedUniform { l: f64 },
    Weibull { lambda: f64, alpha: f64 },
    Gumbel { alpha: f64 },
}

/// A standardized symmetric step law; see the module docs.
#[derive(Debug, Clone, PartialEq)]
pub struct StepDistribution {
    kind: StepKind,
    sigma0: f64,
}

impl StepDistribution {
    pub fn rademacher() -> Self {
        StepDistribution { kind: StepKind::Rademacher, sigma0: 1.0 }
    }

    pub fn gaussian() -> Self {
        StepDistribution { kind: StepKind::Gaussian, sigma0: 1.0 }
    }

    pub fn bounded_uniform(l: f64) -> Result<Self> {
        if !(l > 0.0) || !l.is_finite() {
            return Err(Error::InvalidParameter {
                name: "l",
                reason: format!("uniform half-width must be a positive finite real, got {l}"),
            });
        }
        Ok(StepDistribution { kind: StepKind::BoundedUniform { l }, sigma0: l / SQRT_3 })
    }

    pub fn weibull(lambda: f64, alpha: f64) -> Result<Self> {
        if !(lambda > 0.0) || !lambda.is_finite() {
            return Err(Error::InvalidParameter {
                name: "lambda",
                reason: format!("envelope rate must be a positive finite real, got {lambda}"),
            });
        }
        if !(alpha > 0.0) || !alpha.is_finite() {
            return Err(Error::InvalidParameter {
                name: "alpha",
                reason: format!("envelope shape must be a positive finite real, got {alpha}"),
            });
        }
        // E|X|² = Γ(1 + 2/α) / λ^{2/α}.
        let sigma0 = (libm::tgamma(1.0 + 2.0 / alpha)).sqrt() / lambda.powf(1.0 / alpha);
        Ok(StepDistribution { kind: StepKind::Weibull { lambda, alpha }, sigma0 })
    }

    pub fn gumbel(alpha: f64) -> Result<Self> {
        if !(alpha > 0.0) || !alpha.is_finite() {
            return Err(Error::InvalidParameter {
                name: "alpha",
                reason: format!("envelope shape must be a positive finite real, got {alpha}"),
            });
        }
        // E|X|² = ∫₀^∞ 2z·P(|X|>z) dz with P(|X|>z) = e^{−e^{z^α}}.
        let z_max = decay_cutoff(|z| (z.powf(alpha)).exp(), 0.0);
        let ex2 = tanh_sinh(|z| 2.0 * z * (-(z.powf(alpha)).exp()).exp(), 0.0, z_max, QUAD_TOL);
        Ok(StepDistribution { kind: StepKind::Gumbel { alpha }, sigma0: ex2.sqrt() })
    }

    /// Parses `rademacher`, `gaussian`, `uniform:<l>`, `weibull:<λ>:<α>`,
    /// `gumbel:<α>`.
    pub fn parse(s: &str) -> Result<Self> {
        let err = |reason: String| Error::InvalidParameter { name: "step", reason };
        let parts: Vec<&str> = s.trim().split(':').collect();
        let num = |p: &str| -> Result<f64> {
            p.parse::<f64>().map_err(|_| err(format!("bad numeric field `{p}` in `{s}`")))
        };
        match parts.as_slice() {
            ["rademacher"] => Ok(Self::rademacher()),
            ["gaussian"] => Ok(Self::gaussian()),
            ["uniform", l] => Self::bounded_uniform(num(l)?),
            ["weibull", lam, al] => Self::weibull(num(lam)?, num(al)?),
            ["gumbel", al] => Self::gumbel(num(al)?),
            _ => Err(err(format!(
                "unknown step `{s}` (expected rademacher | gaussian | uniform:<l> | \
                 weibull:<lambda>:<alpha> | gumbel:<alpha>)"
            ))),
        }
    }

    pub fn kind(&self) -> &StepKind {
        &self.kind
    }

    /// The raw-envelope standard deviation divided out by the samplers.
    pub fn sigma0(&self) -> f64 {
        self.sigma0
    }

    /// Canonical name, matching the textual parse format.
    pub fn name(&self) -> String {
        match &self.kind {
            StepKind::Rademacher => "rademacher".into(),
            StepKind::Gaussian => "gaussian".into(),
            StepKind::BoundedUniform { l } => format!("uniform:{l}"),
            StepKind::Weibull { lambda, alpha } => format!("weibull:{lambda}:{alpha}"),
            StepKind::Gumbel { alpha } => format!("gumbel:{alpha}"),
        }
    }

    /// Whether `E e^{tX}` is finite for some `t ≠ 0`.
    pub fn has_cramer(&self) -> bool {
        match &self.kind {
            StepKind::Weibull { alpha, .. } => *alpha >= 1.0,
            _ => true,
        }
    }

    pub fn is_lattice(&self) -> bool {
        matches!(self.kind, StepKind::Rademacher)
    }

    /// Essential sup of |X| on the standardized scale, when finite.
    pub fn bounded_support_std(&self) -> Option<f64> {
        match &self.kind {
            StepKind::Rademacher => Some(1.0),
            StepKind::BoundedUniform { .. } => Some(SQRT_3),
            _ => None,
        }
    }

    /// Raw-envelope tail `P(|X_raw| > z)` for `z ≥ 0`.
    pub fn raw_tail(&self, z: f64) -> f64 {
        debug_assert!(z >= 0.0);
        match &self.kind {
            StepKind::Rademacher => {
                if z < 1.0 {
                    1.0
                } else {
                    0.0
                }
            }
            StepKind::Gaussian => erfc(z * std::f64::consts::FRAC_1_SQRT_2),
            StepKind::BoundedUniform { l } => (1.0 - z / l).max(0.0),
            StepKind::Weibull { lambda, alpha } => (-lambda * z.powf(*alpha)).exp(),
            StepKind::Gumbel { alpha } => (-(z.powf(*alpha)).exp()).exp(),
        }
    }

    /// `ln P(|X_raw| > z)`; `−∞` beyond bounded support.
    pub fn log_raw_tail(&self, z: f64) -> f64 {
        debug_assert!(z >= 0.0);
        match &self.kind {
            StepKind::Rademacher => {
                if z < 1.0 {
                    0.0
                } else {
                    f64::NEG_INFINITY
                }
            }
            StepKind::Gaussian => erfc(z * std::f64::consts::FRAC_1_SQRT_2).ln(),
            StepKind::BoundedUniform { l } => {
                if z < *l {
                    (1.0 - z / l).ln()
                } else {
                    f64::NEG_INFINITY
                }
            }
            StepKind::Weibull { lambda, alpha } => -lambda * z.powf(*alpha),
            StepKind::Gumbel { alpha } => -(z.powf(*alpha)).exp(),
        }
    }

    /// Point mass at 0, if any (the Gumbel envelope forces one).
    pub fn atom_at_zero(&self) -> f64 {
        match &self.kind {
            StepKind::Gumbel { .. } => 1.0 - (-1.0f64).exp(),
            _ => 0.0,
        }
    }

    /// Log-MGF `Λ(t) = ln E e^{tX}` on the standardized scale. Returns `+∞`
    /// outside the finiteness domain (all `t ≠ 0` for Weibull `α < 1`,
    /// `|t| ≥ √2` for Weibull `α = 1`).
    pub fn log_mgf(&self, t: f64) -> f64 {
        let t = t.abs(); // symmetry
        if t == 0.0 {
            return 0.0;
        }
        match &self.kind {
            StepKind::Rademacher => ln_cosh(t),
            StepKind::Gaussian => 0.5 * t * t,
            StepKind::BoundedUniform { .. } => {
                // ln(sinh(√3 t)/(√3 t)) — the raw half-width cancels.
                let u = SQRT_3 * t;
                if u < 1e-4 {
                    // series: u²/6 − u⁴/180
                    u * u / 6.0 - u.powi(4) / 180.0
                } else if u > 350.0 {
                    u - std::f64::consts::LN_2 - u.ln() + (-(-2.0 * u).exp()).ln_1p()
                } else {
                    (u.sinh() / u).ln()
                }
            }
            StepKind::Weibull { alpha, .. } if *alpha == 1.0 => {
                // Standardized two-sided exponential: Λ(t) = ln(2/(2−t²)),
                // |t| < √2.
                if t * t >= 2.0 {
                    f64::INFINITY
                } else {
                    (2.0 / (2.0 - t * t)).ln()
                }
            }
            StepKind::Weibull { alpha, .. } if *alpha < 1.0 => f64::INFINITY,
            _ => self.log_mgf_quadrature(t),
        }
    }

    /// Quadrature branch: Weibull α > 1 and Gumbel.
    fn log_mgf_quadrature(&self, t_std: f64) -> f64 {
        let t = t_std / self.sigma0; // raw-scale tilt
        let log_tail = |z: f64| self.log_raw_tail(z);
        let growth: Box<dyn Fn(f64) -> f64> = match &self.kind {
            StepKind::Weibull { lambda, alpha } => {
                let (lambda, alpha) = (*lambda, *alpha);
                Box::new(move |z: f64| lambda * z.powf(alpha))
            }
            StepKind::Gumbel { alpha } => {
                let alpha = *alpha;
                Box::new(move |z: f64| (z.powf(alpha)).exp())
            }
            _ => unreachable!("closed forms handled above"),
        };
        let z_max = decay_cutoff(&*growth, t);
        // E cosh(t|X|) = 1 + t ∫ sinh(tz) T(z) dz, log-stabilized where
        // sinh overflows against an underflowing tail.
        let integral = tanh_sinh(
            |z| {
                let tz = t * z;
                let lt = log_tail(z);
                if tz > 700.0 {
                    (tz - std::f64::consts::LN_2 + lt).exp()
                } else {
                    tz.sinh() * lt.exp()
                }
            },
            0.0,
            z_max,
            QUAD_TOL,
        );
        (t * integral).ln_1p()
    }

    /// `Λ′(t)` by the pinned central difference `h = 1e-5·max(1, |t|)`.
    pub fn log_mgf_prime(&self, t: f64) -> f64 {
        let h = 1e-5 * t.abs().max(1.0);
        (self.log_mgf(t + h) - self.log_mgf(t - h)) / (2.0 * h)
    }

    /// One standardized sample.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match &self.kind {
            StepKind::Rademacher => {
                if rng.gen::<bool>() {
                    1.0
                } else {
                    -1.0
                }
            }
            StepKind::Gaussian => StandardNormal.sample(rng),
            StepKind::BoundedUniform { .. } => rng.gen_range(-SQRT_3..SQRT_3),
            StepKind::Weibull { lambda, alpha } => {
                let e: f64 = Exp1.sample(rng);
                let mag = (e / lambda).powf(1.0 / alpha);
                sign(rng) * mag / self.sigma0
            }
            StepKind::Gumbel { alpha } => {
                // |X| > 0 with prob e^{−1}; then e^{|X|^α} − 1 ~ Exp(1).
                if rng.gen::<f64>() >= (-1.0f64).exp() {
                    return 0.0;
                }
                let e: f64 = Exp1.sample(rng);
                let mag = ((1.0 + e).ln()).powf(1.0 / alpha);
                sign(rng) * mag / self.sigma0
            }
        }
    }

    /// One sample from the exponentially tilted law
    /// `dP_θ/dP(x) = e^{θx − Λ(θ)}`, standardized scale. Closed-form inverse
    /// sampling exists for Rademacher, Gaussian, BoundedUniform, and Weibull
    /// α = 1; other kinds are rejected (their tilted laws have no exact
    /// sampler, and an approximate one would silently bias the importance
    /// weights).
    pub fn sample_tilted<R: Rng + ?Sized>(&self, rng: &mut R, theta: f64) -> Result<f64> {
        match &self.kind {
            StepKind::Rademacher => {
                // P_θ(+1) = e^θ / (2 cosh θ) = sigmoid(2θ).
                let p_plus = 1.0 / (1.0 + (-2.0 * theta).exp());
                Ok(if rng.gen::<f64>() < p_plus { 1.0 } else { -1.0 })
            }
            StepKind::Gaussian => {
                let z: f64 = StandardNormal.sample(rng);
                Ok(z + theta)
            }
            StepKind::BoundedUniform { .. } => {
                // Inverse CDF of e^{θx} restricted to [−√3, √3].
                if theta == 0.0 {
                    return Ok(rng.gen_range(-SQRT_3..SQRT_3));
                }
                let u: f64 = rng.gen();
                let a = theta * SQRT_3;
                let lo = (-a.abs()).exp();
                let hi = a.abs().exp();
                let x = ((lo + u * (hi - lo)).ln()) / theta.abs();
                Ok(x * theta.signum())
            }
            StepKind::Weibull { alpha, .. } if *alpha == 1.0 => {
                // Tilted two-sided exponential with standardized rate √2:
                // piecewise Exp(√2 ∓ θ) with side masses ∝ 1/(√2 ∓ θ).
                let rate = std::f64::consts::SQRT_2;
                if theta.abs() >= rate {
                    return Err(Error::InvalidParameter {
                        name: "theta",
                        reason: format!(
                            "tilt {theta} outside the exponential-moment domain (|θ| < √2)"
                        ),
                    });
                }
                let wr = 1.0 / (rate - theta);
                let wl = 1.0 / (rate + theta);
                let e: f64 = Exp1.sample(rng);
                Ok(if rng.gen::<f64>() < wr / (wr + wl) {
                    e / (rate - theta)
                } else {
                    -e / (rate + theta)
                })
            }
            _ => Err(Error::Unsupported(format!(
                "no exact tilted sampler for step kind {}",
                self.name()
            ))),
        }
    }

    /// `P(X ∈ [lo, hi])` on the standardized scale (closed window; the only
    /// atoms are Rademacher's ±1 and Gumbel's 0, all included when covered).
    pub fn prob_closed_window(&self, lo: f64, hi: f64) -> f64 {
        debug_assert!(lo <= hi);
        if let StepKind::Rademacher = self.kind {
            let mut p = 0.0;
            if lo <= -1.0 && -1.0 <= hi {
                p += 0.5;
            }
            if lo <= 1.0 && 1.0 <= hi {
                p += 0.5;
            }
            return p;
        }
        let s = self.sigma0;
        if hi < 0.0 {
            0.5 * (self.raw_tail(-hi * s) - self.raw_tail(-lo * s)).max(0.0)
        } else if lo > 0.0 {
            0.5 * (self.raw_tail(lo * s) - self.raw_tail(hi * s)).max(0.0)
        } else {
            (1.0 - 0.5 * self.raw_tail(-lo * s) - 0.5 * self.raw_tail(hi * s)).max(0.0)
        }
    }

    /// Exact inverse-CDF sample of `X | X ∈ [lo, hi]` (standardized scale).
    pub fn sample_window<R: Rng + ?Sized>(&self, rng: &mut R, lo: f64, hi: f64) -> Result<f64> {
        if !(lo <= hi) {
            return Err(Error::InvalidParameter {
                name: "window",
                reason: format!("empty window [{lo}, {hi}]"),
            });
        }
        if let StepKind::Rademacher = self.kind {
            let mut atoms = Vec::with_capacity(2);
            if lo <= -1.0 && -1.0 <= hi {
                atoms.push(-1.0);
            }
            if lo <= 1.0 && 1.0 <= hi {
                atoms.push(1.0);
            }
            return match atoms.len() {
                0 => Err(Error::InvalidParameter {
                    name: "window",
                    reason: format!("window [{lo}, {hi}] carries no step mass"),
                }),
                1 => Ok(atoms[0]),
                _ => Ok(atoms[rng.gen_range(0..atoms.len())]),
            };
        }
        let s = self.sigma0;
        let neg_hi = hi.min(0.0);
        let pos_lo = lo.max(0.0);
        let m_neg = if lo < 0.0 {
            0.5 * (self.raw_tail(-neg_hi * s) - self.raw_tail(-lo * s)).max(0.0)
        } else {
            0.0
        };
        let m_pos = if hi > 0.0 {
            0.5 * (self.raw_tail(pos_lo * s) - self.raw_tail(hi * s)).max(0.0)
        } else {
            0.0
        };
        let m_atom = if lo <= 0.0 && 0.0 <= hi { self.atom_at_zero() } else { 0.0 };
        let total = m_neg + m_atom + m_pos;
        if !(total > 1e-300) {
            return Err(Error::InvalidParameter {
                name: "window",
                reason: format!("window [{lo}, {hi}] carries no step mass"),
            });
        }
        let mut u = rng.gen::<f64>() * total;
        if u < m_neg {
            // Interpolate on the tail scale: T(−neg_hi·s) ≥ T(−lo·s).
            let t_hi = self.raw_tail(-lo * s);
            let t_lo = self.raw_tail(-neg_hi * s);
            let v: f64 = rng.gen();
            let tau = t_hi + v * (t_lo - t_hi);
            let mag = self.raw_tail_inv(tau) / s;
            return Ok((-mag).clamp(lo, neg_hi));
        }
        u -= m_neg;
        if u < m_atom {
            return Ok(0.0);
        }
        let t_hi = self.raw_tail(hi * s);
        let t_lo = self.raw_tail(pos_lo * s);
        let v: f64 = rng.gen();
        let tau = t_hi + v * (t_lo - t_hi);
        let mag = self.raw_tail_inv(tau) / s;
        Ok(mag.clamp(pos_lo, hi))
    }

    /// Inverse of `raw_tail` on the continuous part: the `z ≥ 0` with
    /// `P(|X_raw| > z) = tau`.
    fn raw_tail_inv(&self, tau: f64) -> f64 {
        match &self.kind {
            StepKind::Rademacher => unreachable!("lattice windows sample atoms directly"),
            StepKind::Gaussian => -phi_inv(0.5 * tau),
            StepKind::BoundedUniform { l } => l * (1.0 - tau),
            StepKind::Weibull { lambda, alpha } => ((-tau.ln()) / lambda).powf(1.0 / alpha),
            StepKind::Gumbel { alpha } => {
                let tau = tau.min((-1.0f64).exp());
                ((-tau.ln()).ln().max(0.0)).powf(1.0 / alpha)
            }
        }
    }

    /// Standardized quantile function (median conventions: atoms swallow
    /// their u-interval; used by the binned large-population engine).
    pub fn quantile(&self, u: f64) -> f64 {
        debug_assert!(u > 0.0 && u < 1.0);
        match &self.kind {
            StepKind::Rademacher => {
                if u < 0.5 {
                    -1.0
                } else {
                    1.0
                }
            }
            StepKind::Gaussian => phi_inv(u),
            StepKind::BoundedUniform { .. } => SQRT_3 * (2.0 * u - 1.0),
            _ => {
                let atom = self.atom_at_zero();
                if (u - 0.5).abs() <= 0.5 * atom {
                    return 0.0;
                }
                if u < 0.5 {
                    -self.raw_tail_inv(2.0 * u) / self.sigma0
                } else {
                    self.raw_tail_inv(2.0 * (1.0 - u)) / self.sigma0
                }
            }
        }
    }

    /// Smallest `M ≥ 0` with `P(|X| ≤ M) ≥ ½`, standardized scale.
    pub fn half_mass_radius(&self) -> f64 {
        match &self.kind {
            StepKind::Rademacher => 1.0,
            StepKind::Gaussian => phi_inv(0.75),
            StepKind::BoundedUniform { .. } => 0.5 * SQRT_3,
            StepKind::Weibull { lambda, alpha } => {
                (std::f64::consts::LN_2 / lambda).powf(1.0 / alpha) / self.sigma0
            }
            // The atom already holds mass 1 − 1/e > ½.
            StepKind::Gumbel { .. } => 0.0,
        }
    }
}

fn sign<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    if rng.gen::<bool>() {
        1.0
    } else {
        -1.0
    }
}

/// `ln cosh t` without overflow.
fn ln_cosh(t: f64) -> f64 {
    let t = t.abs();
    if t > 20.0 {
        t - std::f64::consts::LN_2 + (-2.0 * t).exp().ln_1p()
    } else {
        t.cosh().ln()
    }
}

/// A `z` beyond which `e^{t·z − growth(z)}` is below ~1e-330 of any
/// contribution: iterate `growth(z) = 760 + t·z`.
fn decay_cutoff(growth: impl Fn(f64) -> f64, t: f64) -> f64 {
    let mut z = 1.0f64;
    for _ in 0..200 {
        // Invert growth by bisection on [z, big].
        let target = 760.0 + t.max(0.0) * z;
        let mut lo = 0.0;
        let mut hi = z.max(2.0);
        while growth(hi) < target && hi < 1e12 {
            hi *= 2.0;
        }
        for _ in 0..80 {
            let mid = 0.5 * (lo + hi);
            if growth(mid) < target {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        if (hi - z).abs() <= 1e-9 * z.abs().max(1.0) {
            return hi.max(2.0);
        }
        z = hi;
    }
    z.max(2.0)
}
