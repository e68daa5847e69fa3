//! Stability analysis and feedback-network synthesis for networks of
//! identical linear time-invariant plants.
//!
//! Every node runs `x_i' = F x_i + sum_j b_ij H x_j + sum_j a_ij G x_j` with
//! `F = D + R K` and `G = R L`. The plant network `B` is given; the
//! feedback network `A` is designed. When `A` and `B` share a unitary
//! triangularizing basis the spectrum of the stacked system splits into the
//! spectra of `F + lambda_i H + mu_i G`, so stability reduces to the sign of
//! the master stability function at each mode.
//!
//! The crate is `no_std` (it needs `alloc`). File formats, the CLI and the
//! parallel drivers live in the `msfnet` crate.

#![no_std]

extern crate alloc;

pub mod design;
pub mod eigen;
mod error;
pub mod graphs;
pub mod linalg;
pub mod model;
pub mod msf;
pub mod roots;
pub mod verify;

pub use error::Error;
pub use linalg::{CMatrix, Matrix};
pub use num_complex::Complex64;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub type Result<T, E = Error> = core::result::Result<T, E>;
