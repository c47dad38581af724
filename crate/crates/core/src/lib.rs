//! Sharp bounds on expectations of piecewise-affine functions over discrete ambiguity sets.

pub mod compact;
pub mod comonotone;
pub mod decision;
pub mod error;
pub mod genbound;
pub mod harness;
pub mod lattice;
pub mod oracle;
pub mod types;

pub use compact::{
    build_dual_dro, expand_rank_objective, extract_extremal, hunter_worsley, solve_boolean_higher_order, solve_dual_dro, solve_moment,
    solve_pod_bivariate, CompactSolution,
};
pub use comonotone::{choquet_expectation, comonotone_coupling, independent_coupling, orthant_prob, Orthant};
pub use decision::{AffinePieces, Polyhedron};
pub use error::{Error, Result};
pub use genbound::{
    dro_solve, feasibility_test, sharp_bound_generic, sharp_bound_supermodular_pieces, BoundResult, DroResult, DualSolution,
    GenboundOptions,
};
pub use lattice::{meet_join, minimize_submodular, verify_submodular, verify_supermodular, LatticeFunction, Minimizer};
pub use oracle::{check_membership, exponential_lp_bound, MembershipReport};
pub use sharpbound_lp::{RowSense, Sense};
pub use types::*;
