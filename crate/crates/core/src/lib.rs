//! Phase-space probability flow of the Husimi representation for
//! one-dimensional polynomial Hamiltonians.

pub mod algebra;
pub mod error;
pub mod experiment;
pub mod flow;
pub mod grid;
pub mod husimi;
pub mod io;
pub mod params;
pub mod propagator;
pub mod spectral;
pub mod topology;

pub use error::{Error, Result};
pub use params::OscillatorParams;
