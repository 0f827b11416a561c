//! Evolutionary design of reversible circuits that compress families of
//! quantum states.
//!
//! Circuits use only NOT, CNOT and Toffoli gates. Each of these permutes the
//! computational basis, so a circuit is simulated exactly by relabeling the
//! support of a sparse state, and a qubit is disentangled exactly when no
//! support element has it set. The [`compressor`] clears trash qubits one at a
//! time with the search in [`evolution`] and verifies the concatenated result.

pub mod circuit;
pub mod cli;
pub mod codec;
pub mod compressor;
pub mod error;
pub mod evolution;
pub mod families;
pub mod sim;
pub mod state;

pub use circuit::{Circuit, Gate, GateHistogram, GateKind};
pub use compressor::{
    compress, decode, encode, summarize, verify, CompressionPlan, CompressionResult, OrderStrategy, VerificationReport,
    DEFAULT_BACKTRACKS,
};
pub use error::{Error, Result};
pub use evolution::{ea_disentangle, ea_disentangle_guarded, random_search, EAParams, EAResult, RandomSearchParams};
pub use families::{default_target, CompressionTarget, FamilyKind, FamilySpec};
pub use sim::TrainingSet;
pub use state::{BasisState, SparseState};
