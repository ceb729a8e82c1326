//! Large-deviation toolkit for branching random walks (BRWs).
//!
//! A BRW grows a Galton–Watson tree (offspring law `{p_k}`, no deaths,
//! mean `m > 1`) and attaches i.i.d. symmetric unit-variance displacements to
//! every edge; `Z_n` is the generation-`n` point configuration and
//! `Z̄_n = Z_n / |Z_n|` the empirical particle distribution. For a target set
//! `A` and a level `p` above its Gaussian measure, the upper-deviation event
//!
//! ```text
//!   Z̄_n(√n · A) ≥ p
//! ```
//!
//! decays at a regime-dependent speed — `√n`, `n`, `n^{α/2}` (with or without
//! a logarithmic correction), or double-exponentially — with an explicit
//! leading constant. This crate computes those constants, simulates the
//! processes exactly and at scale, and estimates the rare-event probabilities
//! by importance sampling tuned to the optimal deviation strategies, so the
//! predicted and observed decay rates can be compared on one axis.
//!
//! Module map:
//! - [`gaussian`]: normal kernel, target-set calculus, the rate functionals
//!   `I_A(p)` and `J_A(p)`, lattice convolutions, CLT gap bounds.
//! - [`rates`]: step and offspring laws, log-MGF machinery, the tilted
//!   fixed-point equation and its iteration, regime classification.
//! - [`engine`]: exact-arithmetic small-instance laws, large-scale population
//!   simulation (lattice and binned), reproducible parallel RNG streams.
//! - [`estimator`]: naive and importance-sampling estimators with spine
//!   schedules, decay-rate fitting, concentration and i.i.d.-sum checks.
//! - [`acceptance`]: the end-to-end verification battery.

pub mod acceptance;
pub mod engine;
pub mod error;
pub mod estimator;
pub mod gaussian;
pub mod rates;

pub use error::{Error, Result};

pub use acceptance::{run_all, run_one, CriterionResult};

pub use gaussian::{
    convolve_n, gaussian_measure, i_rate, j_rate, set_calculus, uniform_clt_gap, IRateResult,
    JRateResult, SetCalculus, TargetSet,
};
pub use rates::{
    bar_lambda, classify_and_predict, cramer_rate, f_map, iterate_fixed_point, lambda_inverse,
    log_mgf, schroder_exponent, FixedPointTrace, OffspringDistribution, OffspringKind,
    RateConstant, RateReport, Regime, Speed, StepDistribution, StepKind,
};

pub use engine::{
    advance, empirical_measure, exact_event_prob, martingale_w, population_law_exact, replica_rng,
    BrwConfig, Population, PopulationLaw, StorageMode, DEFAULT_POPULATION_CAP,
};

pub use estimator::{
    bottcher_conditional_success, bottcher_event_closed_form, bottcher_spine_event_rate,
    concentration_check, fit_rate, iid_sum_tail_check, is_bottcher_estimate, is_schroder_estimate,
    naive_estimate, schedule_bottcher, schedule_schroder, BottcherSchedule, ConcentrationResult,
    ConcentrationRow, EstimationResult, FitResult, IidTailMethod, IidTailResult, Method,
    SpineSchedule,
};
