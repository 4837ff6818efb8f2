//! Numerical verification: the refinement operator and its norm, non-central
//! chi-squared distributions, the probability bound for the refinement
//! property and Monte-Carlo checks of that property under noise.

pub mod bound;
pub mod gamma;
pub mod montecarlo;
pub mod ncx2;
pub mod operator;

pub use bound::{maximize_bound, p_ref_gap, p_ref_lower_bound, BoundOptimum, ProbBoundParams};
pub use montecarlo::{add_noise, add_noise_image, monte_carlo_refprop, NoiseModel, RefpropEvaluator, RefpropReport};
pub use ncx2::{check_cdf_monotonicity, ncx2_cdf, ncx2_sf, MonotonicityReport};
pub use operator::{
    build_a_matrix, counterexample_element, operator_norm, refinement_operator_norm, NormEstimate, RefinementOperator,
};
