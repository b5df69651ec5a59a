//! Exact-scale simulation core plus every tester and learner for
//! structured Hamiltonians and Pauli channels: symplectic Pauli algebra,
//! MUB-based memory-less subroutines, Bell-sampling testers, two-stage
//! learners, and the Pauli-hashing pipeline, all backed by a dense
//! simulator that doubles as the verification oracle.

pub mod channel;
pub mod config;
pub mod dense;
pub mod error;
pub mod evolution;
pub mod hamiltonian;
pub mod hashing;
pub mod instances;
pub mod io;
pub mod learners;
pub mod ledger;
pub mod mub;
pub mod pauli;
pub mod report;
pub mod sampling;
pub mod spectrum;
pub mod subgroup;
pub mod testers;
pub mod verify;

pub use channel::{ChannelOracle, PauliChannel};
pub use config::Config;
pub use error::{Error, Result};
pub use evolution::{EvolutionOracle, OracleMode, UnitaryOracle};
pub use hamiltonian::{Hamiltonian, StructureDistanceReport};
pub use instances::{InstanceKind, InstanceParams};
pub use ledger::Ledger;
pub use mub::MubFamily;
pub use pauli::{pauli_product, symplectic_inner, PauliString, PhasedPauli};
pub use report::{Decision, LearnReport, LearnStrategy, Thresholds, Verdict};
pub use spectrum::UnitarySpectrum;
pub use subgroup::SymplecticSubgroup;
