//! Numerical evaluation of `var N(T)`: the key integral and its spectral dual,
//! the chaos series with truncation control, and the worked-example presets.

pub mod examples;
pub mod integrals;
pub mod parseval;
pub mod series;

pub use examples::{cancellation_check, cantor_growth, cantor_index, special_atom_scaling, CancellationCheck, CantorGrowth, SpecialAtom};
pub use integrals::{arccos_remainder, chaos_second_moment, degenerate_variance, key_integral, lower_bound_thm12, v1, vq, DEFAULT_TOL};
pub use parseval::parseval_dual;
pub use series::{chaos_generating_function, select_t0, variance_chaos, ChaosOptions, Truncation, VarianceReport};
