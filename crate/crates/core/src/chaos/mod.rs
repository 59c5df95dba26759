//! Exact Wiener chaos expansion of the zero count: coefficients, polynomials,
//! diagram counts and identity verification.

pub mod coeffs;
pub mod diagram;
pub mod poly;
pub mod polys;
pub mod verify;

pub use coeffs::{a_coeff, b_coeff, c_coeff, Rational};
pub use diagram::{diagram_count_oracle, diagram_counts, hermite_product_closed_form};
pub use poly::TrivariatePoly;
pub use polys::{chaos_polys, poly_p, poly_p_tilde, quotient_r, ChaosPolys, RTable};
pub use verify::{bound_check_prop52, explore_rq_max, verify_all, verify_recurrences, BoundReport, ExploreReport, IdentityReport, Status};
