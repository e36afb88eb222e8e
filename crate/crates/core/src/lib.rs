//! Selecting maximally representative, sound norm systems from a norm net.

pub mod cli;
pub mod document;
pub mod fixtures;
pub mod generate;
pub mod ilp;
pub mod norm_net;
pub mod par;
pub mod rational;
pub mod representation;
pub mod solve;
pub mod sweep;
pub mod values;

pub use ilp::{encode_problem, export_lp, parse_lp, IlpModel, InForceMode, Problem, ProblemConfig, RepresentationChoice, Weights};
pub use norm_net::{build_norm_net, Modality, Norm, NormId, NormNet, NormSystem, RelationSet, ValidationError};
pub use rational::Rational;
pub use representation::{generalisation_power, inclusion_power, RepresentationAssignment};
pub use solve::{brute_force_oracle, solve_branch_and_bound, solve_problem, SolveOptions, SolveReport, SolveStatus};
pub use values::{value_utilities, ValueOrder};
