//! Numerically exact learning curves for empirical risk minimizers on
//! finite-support distributions, with monotonicity analysis.
//!
//! A learning curve plots the expected risk of a fitted hypothesis against the
//! training-set size n, in expectation over training samples. On a k-point
//! distribution that expectation is a finite sum over the multinomial
//! compositions of n, so it can be computed exactly — no simulation noise —
//! which is what makes small persistent risk *increases* certifiable.
//!
//! The crate provides:
//! - domain types and the population risk functional ([`domain`]);
//! - closed-form weighted empirical risk minimizers ([`learners`]);
//! - the exact-expectation engine plus a seeded Monte Carlo oracle ([`curve`]);
//! - monotonicity scans, the two-point margin test, and the counterexample-q
//!   search ([`monotonicity`]);
//! - ready-made experiment presets ([`presets`]).

pub mod curve;
pub mod domain;
pub mod error;
pub mod learners;
mod linalg;
pub mod monotonicity;
pub mod numeric;
pub mod presets;

pub use curve::{
    composition_count, compositions, log_multinomial_weight, sample_from_composition, Composition,
    CurveMeta, CurvePoint, Engine, LearningCurve, McEstimate, NRange,
};
pub use domain::{
    loss_eval, population_risk, DataPoint, DiscreteDistribution, Hypothesis, LookupTable, LossKind,
    PsdMatrix, SpdMatrix, TableEntry, TableKind,
};
pub use error::{Error, Result};
pub use learners::{
    fit, fit_gaussian_mean, fit_gaussian_variance, fit_histogram, fit_linear_absolute,
    fit_linear_hinge, fit_linear_squared, fit_linear_squared_with_cutoff, fit_memorize,
    population_erm, LearnerSpec, WeightedSample,
};
pub use monotonicity::{
    find_counterexample_q, gaussian_mean_closed_form, local_delta, scan, two_point_margin,
    two_point_report, DeltaEntry, MonotonicityReport, QCounterexample, TwoPointInstance,
    TwoPointReport, Verdict, DEFAULT_DELTA_TOLERANCE,
};

/// Cap engine parallelism from the `MONOTONE_LAB_THREADS` environment
/// variable. No-op when the variable is unset, unparseable, or when a global
/// thread pool already exists.
pub fn init_parallelism_from_env() {
    if let Ok(value) = std::env::var("MONOTONE_LAB_THREADS") {
        if let Ok(threads) = value.trim().parse::<usize>() {
            let _ = rayon::ThreadPoolBuilder::new()
                .num_threads(threads.max(1))
                .build_global();
        }
    }
}
