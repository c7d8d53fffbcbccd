//! The cloak and bender experiments, the reference solutions they are checked
//! against, and the metrics that summarize them.

pub mod bender;
pub mod cloak;
pub mod convergence;
pub mod metrics;
pub mod pullback;
pub mod report;
pub mod rod;

pub use bender::{run_bender_experiment, BenderOutcome, BenderRun, BenderScenario, BenderVariant};
pub use cloak::{
    cloak_consistency, epsilon_sweep, run_cloak_experiment, CloakOutcome, CloakRun, CloakScenario,
    CloakVariant, EpsilonPoint,
};
pub use convergence::{convergence_study, fitted_order, ConvergenceStudy};
pub use metrics::{arrival_spread, contour_straightness, exterior_mismatch};
pub use pullback::{pullback_check, pullback_run, PullbackProblem, PullbackRun};
pub use report::{ExperimentReport, Provenance, VariantMetrics};
pub use rod::{solve_rod_1d, Rod};
