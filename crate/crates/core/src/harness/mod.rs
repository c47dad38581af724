//! Instance generators, parameter sweeps and the JSON file formats.

mod compute;
mod generators;
mod io;
mod sweep;

pub use compute::{compute, ComputeOptions, Method, VERIFY_TOL};
pub use generators::{
    gen_concordance_targets, gen_moment_instance, gen_pod_instance, orthonormal_basis, MomentInstance, PodInstance, DEFAULT_ALPHA,
    MOMENT_PIECES, MOMENT_SUPPORT,
};
pub use io::{
    joint_from_json, joint_to_json, AmbiguityDoc, AtomDoc, ConstraintDoc, CrossDoc, JointDoc, MarginalDoc, ObjectiveDoc, Problem,
    ProblemDoc, ResultDoc, SubsetTargetDoc, TailTargetDoc,
};
pub use sweep::{run_moment_sweep, run_pod_sweep, summarize, MomentSweepConfig, PodSweepConfig, SweepRow, SweepSummary};
