//! Model descriptors (offspring and step laws) and every analytic rate
//! quantity derived from them: log-MGF machinery, Cramér rates, the tilt
//! constant and its fixed-point iteration, and regime classification.

pub mod classify;
pub mod legendre;
pub mod offspring;
pub(crate) mod quad;
pub mod step;

pub use classify::{classify_and_predict, RateConstant, RateReport, Regime, Speed};
pub use legendre::{
    bar_lambda, cramer_rate, default_alpha_iter, f_map, iterate_fixed_point, lambda_inverse,
    log_mgf, FixedPointTrace,
};
pub use offspring::{schroder_exponent, OffspringDistribution, OffspringKind};
pub use step::{StepDistribution, StepKind};
