//! Block minorization-maximization (BMM) solvers for joint transmit
//! beamforming and RIS phase design.
//!
//! The crate is organised bottom-up:
//!
//! * [`numerics`] – Hermitian eigendecomposition, largest-eigenvalue bounds and
//!   the scalar multiplier search shared by every beamformer update.
//! * [`channel`] – system configuration, geometry, Rician channel generation and
//!   effective-channel composition (cascaded, general topology, MIMO D2D).
//! * [`surrogates`] – the minorizers every block update is built from.
//! * [`wsr`], [`mr`], [`sr`] – weighted sum-rate, max-min rate and MIMO sum-rate
//!   solvers.
//! * [`accel`] – SQUAREM extrapolation around any monotone BMM map.
//! * [`harness`] – config files, baselines, KKT diagnostics, Monte-Carlo driver
//!   and result emission.

pub mod accel;
pub mod channel;
pub mod design;
pub mod error;
pub mod harness;
pub mod log;
pub mod mr;
pub mod numerics;
pub mod options;
pub mod power;
pub mod sr;
pub mod surrogates;
pub mod wsr;

pub use nalgebra::Complex;

/// Complex double used throughout.
pub type C64 = Complex<f64>;
/// Dense complex matrix.
pub type CMat = nalgebra::DMatrix<C64>;
/// Dense complex column vector.
pub type CVec = nalgebra::DVector<C64>;

pub use error::{Error, Result};
