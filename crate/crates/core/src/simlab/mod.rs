//! Simulation study under a misspecified linear working model.

mod experiment;
mod oracle;
mod report;
mod scenario;

pub use experiment::{run_accuracy_experiment, AccuracyReport, ExperimentConfig, ReplicationRecord};
pub use oracle::{estimate_oracle, population_thetas, OracleQuantities, DESK_N_MC, FULL_N_MC};
pub use scenario::{
    generate, generate_n, GaussianMixture, SimScenario, TruncatedExponential, DEFAULT_SIM_SEED, DESK_N, DESK_REPS,
    PRESET_DEGREES,
};
