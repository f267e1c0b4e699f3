//! Simulation and verification of single quantum deletion error-correcting
//! codes built from a pair of bit-string sets `(A, B)`.
//!
//! - [`combinatorics`]: bit strings, deletion sets `Δ_{i,b}` and the
//!   distance/ratio conditions on a pair.
//! - [`linalg`]: dense density matrices, partial trace, projective
//!   measurement and unitary completion.
//! - [`codec`]: encoder, deletion channel, syndrome measurement, correction
//!   unitaries and decoder.
//! - [`search`]: exhaustive backtracking search for new pairs.
//! - [`codefile`]: the JSON code-file format.
//!
//! ```
//! use qdel_core::{CodePair, CodecInstance, QubitMessage};
//!
//! let code = CodecInstance::new(CodePair::four_qubit_example()).unwrap();
//! let fidelity = code.roundtrip(&QubitMessage::plus(), 2, 7).unwrap();
//! assert!((fidelity - 1.0).abs() < 1e-9);
//! ```

pub mod codec;
pub mod codefile;
pub mod combinatorics;
pub mod linalg;
pub mod search;

pub use codec::{CodecError, CodecInstance, Checks, DeletionMeasurement, MeasurementBlock, QubitMessage};
pub use codefile::{CodeFile, CodeFileError};
pub use combinatorics::{
    check_c1, check_c2, delta_set, delta_table, BitString, BitStringSet, CodeError, CodePair, DeltaTable, Verdict,
    Witness,
};
pub use linalg::{DensityMatrix, LinalgError, StateVector, C64};
pub use search::{enumerate_codes, SearchError, SearchReport, SearchSpec};
