//! Analysis and simulation toolkit for magnetoelectric (ME) antenna arrays
//! used for VLF/LF electromagnetic communication through water.
//!
//! The crate is split by subsystem:
//!
//! * [`medium`] - propagation constants, wavelength, attenuation and field
//!   regions in a conductive medium (displacement current neglected).
//! * [`antenna`] - laminate resonance, ME coupling coefficient and a
//!   static-capacitance plus motional-RLC impedance model with series and
//!   parallel array composition.
//! * [`link_budget`] - radiation-resistance and array scaling laws, and a
//!   piecewise power-law path-loss fit over measured range sweeps.
//! * [`capacity`] - discretized Shannon-Hartley capacity over SNR spectra.
//! * [`modem`] - waveform-level BFSK modulator, AWGN channel, noncoherent
//!   tone-energy detector, closed-form and Monte Carlo BER.
//! * [`data_io`] - the CSV/config file formats and a synthetic dataset
//!   generator.

pub mod antenna;
pub mod capacity;
pub mod data_io;
mod error;
pub mod link_budget;
pub mod medium;
pub mod modem;

pub use antenna::{ArraySpec, LaminateSpec, Resonator, Wiring};
pub use capacity::SnrSpectrum;
pub use error::{Error, Result};
pub use link_budget::{LinkScaling, PathLossModel, RangeFlag, RangeSample};
pub use medium::{ConductiveMedium, FieldRegions, PropagationConstants};
pub use modem::{BerResult, BfskConfig};

/// Vacuum permeability, H/m.
pub const MU_0: f64 = 4.0e-7 * std::f64::consts::PI;

/// Vacuum permittivity, F/m.
pub const EPSILON_0: f64 = 8.854_187_812_8e-12;
