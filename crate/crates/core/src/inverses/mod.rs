//! Invertibility classification, exact inverses, Drazin and Moore-Penrose inverses.

pub mod drazin;
pub mod exact;
pub mod spectral;

pub use drazin::{
    drazin_inverse, drazin_inverse_with, DrazinBackend, DrazinOptions, DrazinOutcome,
    DrazinResiduals,
};
pub use exact::{
    classify, classify_with, exact_inverse, exact_inverse_with, moore_penrose, moore_penrose_with,
    non_cp_witness, non_cp_witness_with, penrose_residuals, pseudo_inverse, Classification,
    InvertibilityClass, NonCpWitness,
};
pub use spectral::{
    jordan_block, spectral_decompose, spectral_decompose_with, JordanBlock, SpectralDecomposition,
};
