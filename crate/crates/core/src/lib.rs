//! Coarse-to-fine preprocessing for 4D radar measurement tensors.
//!
//! The pipeline condenses a dense power tensor over (range, azimuth,
//! elevation) into a sparse set of plausible target cells in three steps:
//!
//! 1. a coarse cell-averaging CFAR along the range axis of every
//!    (azimuth, elevation) column ([`cfar::ccfar_step1`]),
//! 2. an elevation-weighted projection per range slice followed by
//!    per-range top-K% azimuth selection ([`cctp::cctp_step2`]),
//! 3. a neighborhood recovery pass that re-admits cells near the
//!    preserved range/azimuth indices ([`cctp::cctp_step3`]).
//!
//! Around the pipeline: synthetic scene generation with a ground-truth
//! valid mask ([`synth`]), PRVM/RRIM evaluation over range bins
//! ([`metrics`]), binary tensor/mask file codecs ([`io`]) and a standalone
//! numeric reference of a vertical attention encoder ([`ve`]).
//!
//! Math is generic over the scalar type ([`Real`], f32 or f64). The
//! aliases below pin the 64-bit defaults; files always store 32-bit
//! payloads regardless of the in-memory width.

pub mod cctp;
pub mod cfar;
pub mod error;
pub mod io;
pub mod metrics;
pub mod scalar;
pub mod synth;
pub mod tensor;
pub mod ve;

pub use error::{Error, Result};
pub use scalar::Real;

/// Default 64-bit dense tensor.
pub type Tensor = tensor::RadarTensor<f64>;
/// Tensor at file-payload width.
pub type Tensor32 = tensor::RadarTensor<f32>;
/// Default 64-bit sparse measurement set.
pub type Sparse = tensor::SparseMeasurementSet<f64>;
/// Default 64-bit synthetic scene.
pub type Scene = synth::Scene<f64>;
/// Default 64-bit pipeline output bundle.
pub type CctpOutput = cctp::CctpOutput<f64>;
/// Default 64-bit dense feature map for the vertical encoder.
pub type FeatureMap = ve::DenseFeatureMap<f64>;
