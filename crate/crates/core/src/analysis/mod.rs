//! Error-propagation analysis for imperfectly characterised noise.

mod bounds;
mod delta;
pub mod ensembles;
mod mismatch;

pub use bounds::{
    first_order_report, fuchs_van_de_graaf, ideal_exp_lipschitz, layerwise_bound,
    observable_error_bound, sufficient_condition, AnalysisReport, FuchsVanDeGraaf, ObservableCheck,
    SufficientCondition,
};
pub use delta::{delta_report, DeltaReport};
pub use mismatch::{
    mismatch_experiment, mismatch_lambda_max, mismatch_overlap, MismatchOutcome, MismatchRow,
    MISMATCH_CSV_HEADER,
};
