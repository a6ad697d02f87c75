//! Exact desk-scale laboratory for correlated quantum noise.
//!
//! The crate simulates small qubit registers exactly (dense density
//! matrices), represents noise as Kraus-family quantum channels, and
//! measures the quantities that distinguish independent from synchronized
//! errors: Pauli weight spectra, entropy-based information leaks and their
//! correlations, entanglement functionals (pairwise, assisted, and
//! maximum-entropy censorship), and commutation diagnostics for noise
//! against state-stabilizing unitaries.

pub mod channel;
pub mod circuit;
pub mod ee;
pub mod error;
pub mod experiments;
pub mod io;
pub mod leak;
pub mod lp;
pub mod mask;
pub mod maxent;
pub mod par;
pub mod pauli;
pub mod register;
pub mod rng;
pub mod spectrum;
pub mod state;
pub mod sync;

pub use channel::QuantumChannel;
pub use error::{Error, Result};
pub use mask::{CollapseProfile, ErrorMaskDistribution};
pub use register::{QubitLabel, QubitRegister};
pub use spectrum::WeightSpectrum;
pub use state::{DensityOperator, PureState};

/// Default cap on register size for dense state-level operations.
pub const DEFAULT_STATE_QUBIT_CAP: usize = 12;
/// Default cap on register size for superoperator-level operations.
pub const DEFAULT_SUPEROP_QUBIT_CAP: usize = 6;
