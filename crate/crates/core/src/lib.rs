//! Second-order sigma-delta quantization with expansive loop filters.
//!
//! The crate simulates the double-loop recursion, computes certified
//! parameter sets together with their positively invariant regions, checks
//! those regions by sampling, reconstructs bandlimited signals from the
//! quantized output and sweeps stability thresholds over the expansion
//! factor.

pub mod certificate;
pub mod error;
pub mod format;
pub mod invariance;
pub mod quantizer;
pub mod region;
pub mod signal;
pub mod sweep;

pub use certificate::{StabilityCertificate, Variant};
pub use error::{Bound, Error, Result};
pub use quantizer::{ModulatorState, QuantizerKind, SchemeParams, Trajectory};
pub use region::{PlanePoint, RegionSpec};
