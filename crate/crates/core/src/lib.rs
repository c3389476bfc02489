//! Maximum-Tsallis-entropy inference of two-qubit states from Bell-CHSH data.
//!
//! The data are the normalized q-expectations of the CHSH observable `B` and
//! of `B²`. The crate builds the closed-form maximum-entropy state, checks it
//! against independent numerical maximizers, decides entanglement with the
//! largest-eigenvalue criterion (cross-checked by partial transposition),
//! evaluates the generalized Kullback-Leibler mutual entropy, and verifies the
//! thermodynamic Legendre structure numerically.
//!
//! ```
//! use qmaxent::inference::{infer_state, validate_constraints};
//!
//! let data = validate_constraints(2.0, std::f64::consts::SQRT_2, 6.0).unwrap();
//! let state = infer_state(&data);
//! assert!((state.lambda_max() - 0.427_050_98).abs() < 1e-8);
//! ```

#![forbid(unsafe_code)]

pub mod bell;
pub mod entangle;
pub mod error;
pub mod inference;
pub mod measures;
pub mod numfmt;
pub mod oracle;
pub mod sampling;
pub mod smallmat;
pub mod thermo;

pub use error::{Error, Result};
