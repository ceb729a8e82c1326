//! Branching-process machinery: exact small-instance laws, scalable
//! generation-streamed simulation, and reproducible parallel randomness.
//!
//! The estimators and the verification battery sit on three layers here:
//!
//! - [`population`]: the [`Population`]/[`advance`] simulator with lattice,
//!   per-particle, and binned storage, plus the empirical measure and the
//!   additive martingale.
//! - [`exact`]: deterministic enumeration of the population-size law and of
//!   the deviation-event probability at tiny horizons — the ground truth for
//!   estimator unbiasedness.
//! - [`rng`]: per-replica ChaCha substreams keyed by `(seed, replica)`.

pub mod exact;
pub mod population;
pub mod rng;

pub use exact::{exact_event_prob, population_law_exact, PopulationLaw};
pub use population::{
    advance, empirical_measure, martingale_w, BrwConfig, Population, StorageMode,
    DEFAULT_POPULATION_CAP,
};
pub use rng::replica_rng;
