//! Numerical toolkit for complex Bernoulli convolutions and homogeneous
//! complex self-similar measures.
//!
//! The crate is organized by task:
//!
//! * [`ifs`]: IFS specifications, parameter regions, entropy and similarity dimension.
//! * [`measure`]: cylinder points, chaos-game sampling, density rasters and IFS algebra
//!   (convolution, decimation, rotation).
//! * [`fourier`]: Fourier transform via the infinite product, decay-exponent fits and the
//!   absolute-continuity diagnostic.
//! * [`ek`]: Erdős–Kahane integer sequences, parameter reconstruction and cover enumeration.
//! * [`separation`]: cylinder separation `Delta_n`, concentration diagnostics, overlap roots
//!   and winding-number zero counts.
//! * [`algebra`]: integer polynomial roots and complex Pisot classification.

pub mod algebra;
pub mod budget;
pub mod ek;
pub mod error;
pub mod fourier;
pub mod ifs;
pub mod measure;
pub mod rng;
pub mod separation;
pub mod stats;
pub mod wide;

pub use budget::Budget;
pub use error::{Error, Result};
pub use ifs::{
    entropy, similarity_dimension, validate_ifs, Annulus, AnnulusSide, IfsDocument, IfsSpec,
    ProbabilityVector, RegionH, Validated,
};
pub use num_complex::Complex64;
