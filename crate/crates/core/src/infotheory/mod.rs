//! Mutual information of square QAM over the Gaussian channel, with
//! uniform or Maxwell-Boltzmann inputs, and the rate metrics derived from it.

mod constellation;
mod hermite;
mod mi;
mod rates;

pub use constellation::{build_constellation, gray, ConstellationSpec, Pam, Shaping};
pub use hermite::gauss_hermite;
pub use mi::{
    mi_gauss_hermite, mi_gauss_hermite_2d, mi_gauss_hermite_order, mi_monte_carlo,
    optimize_zeta, shaping_gain_db, MiMethod, MiResult, ZetaOptimum, HERMITE_MAX_ORDER,
    HERMITE_START_ORDER, HERMITE_TOL,
};
pub use rates::{air_and_code_rate, RateMetrics};
