//! Simulation and stability certification for networks of three-phase DC/AC
//! converters driven by (λ-ω) virtual oscillator control.
//!
//! The crate is `no_std` and only needs `alloc`. Everything that touches the
//! file system (scenario files, CSV, reports, the command line) lives in the
//! companion `lamvoc` crate.
//!
//! Layout conventions used throughout:
//!
//! * planar quantities are stacked per node, `[x_1ᵀ, …, x_nᵀ]ᵀ` with each
//!   `x_k ∈ ℝ²`;
//! * matrices acting on stacked vectors are built from 2×2 blocks, and the
//!   extension of a scalar matrix replaces each entry `m_ij` by `m_ij·I₂`;
//! * `J₂ = [[0, −1], [1, 0]]` and `R(γ) = [[cos γ, sin γ], [−sin γ, cos γ]]`.
#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod analysis;
pub mod controller;
pub mod dynamics;
mod error;
#[cfg(test)]
mod fixtures;
pub mod linalg;
pub mod network;
pub mod planar;

pub use error::{Result, VocError};

pub use nalgebra::{DMatrix, DVector};
