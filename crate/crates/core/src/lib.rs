//! Exact simulation and analysis of linear-optical sampling.
//!
//! Three input families are supported on an `m`-mode interferometer whose
//! first `n` modes are loaded:
//!
//! - single-photon Fock states (standard boson sampling),
//! - displaced single-photon Fock states `D(α)a†|0⟩`,
//! - single-photon-added coherent states `∝ a†D(α)|0⟩`.
//!
//! Output amplitudes are computed in closed form from matrix permanents
//! ([`exact`]), and cross-checked against an independent brute-force
//! simulator over a truncated Fock space ([`oracle`]). The remaining modules
//! cover Monte Carlo sampling, Wigner-function negativity and the
//! post-selection scaling of the photon-added case.
//!
//! # Conventions
//!
//! A unitary `U` acts on creation operators as `a_i† ↦ Σ_j U[i][j] a_j†`,
//! so row `i` of `U` is the image of input mode `i`. Under this convention
//! coherent amplitudes propagate as `β = Uᵀ α`.

// `!(x >= 0.0)` style guards deliberately reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod error;
pub mod exact;
pub mod fock;
pub mod io;
pub mod numerics;
pub mod oracle;
pub mod permanent;
pub mod sampling;
pub mod transition;
pub mod wigner;

pub use error::{Error, Result};
pub use exact::{InputFamily, InputSpec, Outcome, OutputDistribution, SectorDecomposition};
pub use fock::OccupationConfig;
pub use numerics::{ComplexMatrix, ElementaryOp, UnitaryMatrix};
pub use oracle::TruncatedState;
pub use sampling::SampleBatch;

pub use num_complex::Complex64;
