//! Numerical evidence for, and counterexamples to, determinability of a
//! W-class state by a set of pair marginals.

mod evidence;
mod fit;
mod map;
mod twist;

pub use evidence::{forced_zero_states, uniqueness_evidence, UniquenessEvidence};
pub use fit::{multistart_pure_fit, Cluster, FitOptions, FitOutcome, FitStart, ReducedState, FIT_CAP};
pub use map::{
    build_marginal_map, build_restricted_map, hermitian_coords, null_space, sparse_pair_marginal,
    HermitianBasis, MarginalMap, MAP_CAP, RANK_TOL,
};
pub use twist::{block_of, phase_twist, twist_coefficients};
