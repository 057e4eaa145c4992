//! Censored-survival feature screening with a revised Chatterjee rank
//! correlation.
//!
//! A feature `X_k` is scored by `max(xi(X_k, S(Y)), xi(S(Y), X_k))`, where
//! `S` is the Kaplan–Meier estimate of the observed-time survival function and
//! `xi` uses `M` right nearest neighbours. Features are then ranked and the top
//! `d` kept.

pub mod error;
pub mod experiment;
pub mod io;
pub mod metrics;
pub mod rank;
pub mod screening;
pub mod seed;
pub mod simgen;
pub mod survival;

pub use error::{Error, Result};
pub use experiment::{
    run_experiment, Experiment, ExperimentReport, ExperimentSpec, ReplicationOutcome, ReportRow,
    Variant,
};
pub use metrics::{concordance, min_model_size, selection_proportions, ReplicationRecord};
pub use rank::{rank_vector, right_neighbors, xi_decompose, xi_nm, RankedColumn, XiDecomposition};
pub use screening::{
    default_model_sizes, omega_hat, screen, NeighborRule, ScreeningConfig, ScreeningResult,
    Selection,
};
pub use simgen::{generate, Covariance, GeneratedSample, SimScenario, SurvivalModel};
pub use survival::{km_survival, KmCurve, SurvivalResponse};
