//! Bi-objective QUBO solving by adaptive scalarisation.
//!
//! The crate builds QUBO models of the cardinality-constrained mean-variance
//! portfolio problem ([`portfolio`]), solves scalarised combinations of the
//! two objectives with a simulated-annealing backend ([`annealer`]) under one
//! of three weight-generation strategies ([`scalarise`]), and measures the
//! resulting fronts ([`pareto`], [`metrics`]).

pub mod annealer;
pub mod error;
pub mod metrics;
pub mod pareto;
pub mod portfolio;
pub mod qubo;
pub mod scalarise;
pub mod weights;

pub use annealer::{
    ExactSolver, QuboSolver, SimulatedAnnealer, Solution, SolverParams, SolverResult,
};
pub use error::{Error, Result};
pub use metrics::{
    attainment_surface, default_reference, eaf, eaf_difference, eaf_grid, hypervolume_2d,
    AttainmentSurface, ReferencePoint,
};
pub use pareto::{
    dominates, manhattan, non_dominated_filter, Archive, ArchiveEntry, ObjectivePoint,
};
pub use portfolio::{
    build_qubos, decode, is_feasible, DecodedPortfolio, EncodingScheme, PortfolioInstance,
    PortfolioQubos,
};
pub use qubo::{BitVector, QuboBuilder, QuboMatrix};
pub use scalarise::{
    momc_penalty, next_iterative_weight, rescale, run_sbda, BiObjectiveQubo, BoundsTracker,
    GapSpace, IterationRecord, RunConfig, SbdaOutcome, Strategy, WeightChoice, WeightSolutionMap,
};
pub use weights::{random_weights, sld_weights, WeightSet};
