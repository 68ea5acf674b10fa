//! Brute-force divergence, risk and bound computations over finite
//! hypothesis classes.

pub mod bound;
pub mod concentration;
pub mod divergence;
pub mod hypothesis;
pub mod lse;
pub mod risk;

pub use bound::{assemble_bound, conc_terms, verify_population_bound, BoundReport};
pub use concentration::{
    concentration_mc, discrepancy_epsilon, risk_epsilon, ConcentrationReport, DiscreteDomain,
};
pub use divergence::{
    disc_error_identity, equalize_sizes, h_divergence, multi_discrepancy, IdentityOutcome,
};
pub use hypothesis::{
    enumerate_stump_candidates, enumerate_stumps, stump_vc_dimension, FiniteHypothesisClass,
    Hypothesis, HypothesisSet, Polarity, SymDiffClass,
};
pub use lse::{lse_max, softmax_weights};
pub use risk::{empirical_risk_01, optimal_joint_risk, optimal_joint_risk_oracle, worst_source_risk};
