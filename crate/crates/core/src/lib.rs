//! Quantum-theoretic models of concept combination.
//!
//! * [`hilbert`]: finite-dimensional complex Hilbert-space primitives.
//! * [`classicality`]: whether membership weights admit a classical model.
//! * [`fock`]: two-sector Fock-space interference for conjunction and disjunction.
//! * [`entanglement`]: expectation values and the CHSH statistic.
//! * [`disjunction`]: the explicit many-exemplar disjunction model.
//! * [`wavefield`]: Gaussian wave functions and interference rasters.
//! * [`datasets`]: bundled data and CSV formats.

pub mod angle;
pub mod classicality;
pub mod datasets;
pub mod disjunction;
pub mod entanglement;
pub mod fock;
pub mod hilbert;
pub mod wavefield;
