//! Bistatic radar tracking in clutter with geometry-dependent target
//! measurement uncertainty (TMU).
//!
//! The crate is organised bottom-up:
//!
//! - [`geometry`]: the transmitter/target/receiver triangle, Doppler shift and
//!   its sensitivity to bistatic range.
//! - [`tmu`]: SNR, detection probability and the measurement error covariance
//!   derived from the signal Fisher information.
//! - [`clutter`]: measurement model, measurement-origin uncertainty and
//!   measurement generation.
//! - [`bounds`]: information reduction / gain factors and the recursive
//!   posterior bounds (PCRLB, EFIM, IPCRLB).
//! - [`tracker`]: EKF prediction with a PDA update.
//! - [`control`]: myopic receiver trajectory control.
//! - [`sim`]: scenario configuration, sweeps, closed-loop experiments and CSV
//!   output.

pub mod bounds;
pub mod clutter;
pub mod control;
pub mod error;
pub mod geometry;
pub mod linalg;
pub mod rng;
pub mod sim;
pub mod tmu;
pub mod tracker;

pub use error::{Error, Result};

/// Speed of light in vacuum (m/s).
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Dimension of the target state `[px, py, vx, vy]`.
pub const STATE_DIM: usize = 4;

/// Dimension of a bistatic measurement `[d, v, theta]`.
pub const MEAS_DIM: usize = 3;

pub type Vec2 = nalgebra::Vector2<f64>;
pub type Vec3 = nalgebra::Vector3<f64>;
pub type Vec4 = nalgebra::Vector4<f64>;
pub type Mat2 = nalgebra::Matrix2<f64>;
pub type Mat3 = nalgebra::Matrix3<f64>;
pub type Mat4 = nalgebra::Matrix4<f64>;
pub type Mat3x4 = nalgebra::Matrix3x4<f64>;
