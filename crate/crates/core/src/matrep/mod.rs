//! Matrices, channel representations, property checks and state metrics.

pub mod channel;
pub mod json;
pub mod matrix;
pub mod metrics;
pub mod properties;
pub mod state;

pub use channel::{ChannelRep, RepKind, Representation};
pub use matrix::{ComplexMatrix, ComplexVector};
pub use metrics::{fidelity, fidelity_with, trace_distance, Fidelity};
pub use properties::{check_properties, check_properties_with, PropertyVerdict};
pub use state::{DensityMatrix, FlaggedState, Observable};
