//! Entropic upper bounds on the number of orthogonal solutions to the quantum
//! marginal problem, together with two independent numerical oracles that
//! check them: an alternating-projection feasibility test and a deflated
//! pure-state search.
//!
//! The modules build on each other bottom-up:
//!
//! - [`qstate`]: layouts, density matrices, partial traces, entropy, purification.
//! - [`bounds`]: instances and the four entropic bounds.
//! - [`oracle`]: Dykstra feasibility and the pure-solution search.
//! - [`instances`]: random generators, named instances, the instance file format.
//! - [`cli`]: the `qmpb` command-line front-end.

pub mod bounds;
pub mod cli;
pub mod error;
pub mod instances;
pub mod oracle;
pub mod qstate;

pub use bounds::{
    chain_bound, interface_consistency_check, max_orthogonal_count, mixed_state_bound, pure_tripartite_bound,
    single_party_bound, BoundReport, EntropyTerm, Formula, InstanceKind, Marginal, QmpInstance,
};
pub use error::{Error, Result, Violation};
pub use instances::{builtin, gen_ginibre_density, instance_from_joint, load, save, Builtin};
pub use oracle::{
    dykstra_feasibility, pure_solution_search, verify_against_bound, FeasibilityResult, FeasibilityStatus,
    OracleConfig, SolutionSet,
};
pub use qstate::{
    fidelity, g_overlap, partial_trace, purify, spectral_decomposition, support_orthogonal, validate_density,
    von_neumann_entropy, DensityMatrix, PureState, Spectrum, SystemLayout,
};
