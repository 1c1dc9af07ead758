//! Reference implementations for small instances: explicit flow matrices,
//! exact checkers and exhaustive cut enumeration. None of this code shares
//! a path with the implicit pipeline it is used to check.

pub mod brute;
pub mod congestion;
pub mod dense;
pub mod rst;

pub use brute::{
    brute_force_min_conductance, check_expansion_estimate, check_near_expander, near_expansion_min,
    respecting_cuts, strong_near_edge_expansion_min, strong_near_edge_expansion_min_weighted,
    weak_near_edge_expansion_min, EstimateVerdict, ExpansionEstimate, BRUTE_CAP, ESTIMATE_CAP,
};
pub use congestion::{composite_ge_load, congestion_audit, embed_flow_matrix, CongestionReport, MatchingEmbedding};
pub use dense::{
    centering_matrix, dense_flow_matrix, lazy_matrix, matching_matrix, symmetric_eigenvalues, top_singular_value, dense_w_and_potential, lazy_walk_lambda, potential_by_eigen, DenseFlowMatrix, PotentialTrace,
    DENSE_CAP,
};
pub use rst::{check_rst_conditions, check_rst_conditions_rational};
