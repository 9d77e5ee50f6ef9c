//! Rovibrational structure, transition moments, polarizabilities, natural
//! linewidths and mass-ratio sensitivities of diatomic molecules.
//!
//! Everything is computed in Hartree atomic units; see [`units`] for the
//! conversions applied at input and output.

pub mod angular;
pub mod config;
pub mod decay;
pub mod error;
pub mod metrology;
pub mod models;
pub mod numeric;
pub mod potential;
pub mod radial;
pub mod response;
pub mod transitions;
pub mod units;

pub use config::{load_system, parse_system};
pub use error::{Error, Result};
pub use potential::{make_morse, DipoleFunction, MoleculeSystem, PotentialCurve, SolverSettings, Symmetry, TailTerm};
