//! Structure-preserving semi-discretizations of 1D port-Hamiltonian systems.
//!
//! Everything is built on a diagonal-norm summation-by-parts pair `(D1, H)` so
//! that integration by parts, and therefore every power balance, holds exactly
//! in the discrete inner product. The crate is `no_std` (with `alloc`); file
//! formats and the command line live in the `phs` companion crate.

#![cfg_attr(not(feature = "std"), no_std)]
#![forbid(unsafe_code)]

extern crate alloc;

pub mod audit;
pub mod blockop;
pub mod descriptor;
pub mod error;
pub mod integrator;
pub mod linalg;
pub mod models;
pub mod sbp;
pub mod transforms;

pub use crate::descriptor::{BoundaryMode, PhDescriptor};
pub use crate::error::{Error, Result};
pub use crate::linalg::Mat;
pub use crate::sbp::{Grid1D, SbpSet};
