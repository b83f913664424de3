//! De Broglie-Bohm trajectories for a spin-singlet pair crossing two
//! Stern-Gerlach magnets, with local (retarded) and nonlocal (instantaneous)
//! knowledge of the partner's magnet, a switching-induced particle-loss
//! model, and CHSH estimation.

pub mod cli;
pub mod error;
pub mod experiment;
pub mod hooke;
pub mod infomodel;
pub mod integrate;
pub mod output;
pub mod physconst;
pub mod velocity;

pub use error::{Error, Result};
pub use experiment::{run_epr, ExperimentConfig, ExperimentReport};
pub use infomodel::InformationMode;
pub use physconst::{derive_coefficients, DerivedCoefficients, RawPhysicalInputs};
pub use velocity::{SettingPair, Side, TrajectoryState};
