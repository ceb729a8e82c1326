//! Gaussian layer: normal kernel, target sets, deviation functionals, exact
//! lattice convolutions.

pub mod convolve;
pub mod normal;
pub mod rates;
pub mod set;

pub use convolve::{convolve_n, lattice_mass_on, uniform_clt_gap, MAX_CONVOLVE_N};
pub use rates::{
    gaussian_measure, gaussian_rates, i_rate, j_rate, measure_affine, measure_shift_scale,
    set_calculus, GaussianRates, IRateResult, JRateResult, SetCalculus,
};
pub use set::{Interval, TargetSet};
