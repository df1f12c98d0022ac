//! Exact periodicity test for billiard trajectories: square-root series of
//! the spectral polynomial, the periodicity matrix and its exact rank.

mod condition;
mod rank;
mod search;
mod series;

pub use condition::{
    cayley_condition, cayley_condition_normalized, classify, hankel_indices, hankel_matrix, period_indicator,
    period_indicator_f64, spectral_polynomial, spectral_roots, Degeneracy, PeriodicityVerdict,
};
pub use rank::{rank_exact, rank_float, to_float_matrix};
pub use search::{caustic_boundary, closure_residuals, find_periodic_caustic, ClosureClass, PeriodicCaustic, SearchOptions};
pub use series::{sqrt_series, sqrt_series_f64, RationalSeries};
