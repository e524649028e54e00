//! Dispersionless layered stratified flows.
//!
//! The crate is `no_std` with `alloc`. It covers layer configurations and
//! coordinate maps ([`model`]), hydrostatic pressure ([`hydrostatics`]),
//! characteristic matrices with eigen and Haantjes analysis ([`quasilinear`]),
//! Hamiltonian functionals and Poisson operators ([`hamiltonian`]) and a
//! method-of-lines integrator with run diagnostics ([`dynamics`]).

#![no_std]

extern crate alloc;

pub mod dynamics;
pub mod error;
pub mod hamiltonian;
pub mod hydrostatics;
pub mod linalg;
pub mod model;
pub mod profiles;
pub mod quasilinear;
pub mod stencil;

pub use error::{Error, Result};
