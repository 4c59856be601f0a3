//! Data-symbol optimization for MIMO-OFDM joint radar-communication waveforms.
//!
//! The transmit grid is an `N x M` matrix of frequency-domain symbols. The
//! optimizer perturbs data symbols inside a similarity region around the
//! reference constellation so that the peak sidelobe of all cyclic auto- and
//! cross-correlations inside the cyclic-prefix window drops, while the
//! receiver can still demodulate with the ideal constellation.
//!
//! Modules, bottom up:
//!
//! * [`spectrum`]: grids, DFT helpers, cyclic correlations, PSL.
//! * [`constellation`]: PSK/QAM maps, Gray labels, sub-carrier masks.
//! * [`majorizer`] and [`eigen`]: the surrogate used by each MM step.
//! * [`projector`]: PSK wedge and QAM disc projections.
//! * [`optimizer`]: plain MM and SQUAREM loops.
//! * [`sensing`] and [`comms`]: radar and link-level evaluation.
//! * [`oracle`]: dense reference computations for small sizes.
//! * [`campaign`]: config, seeding, Monte-Carlo drivers and CSV output.

pub mod campaign;
pub mod comms;
pub mod constellation;
pub mod eigen;
mod error;
pub mod majorizer;
pub mod optimizer;
pub mod oracle;
pub mod projector;
pub mod sensing;
pub mod spectrum;

pub use error::{Error, Result};
pub use num_complex::Complex64;
