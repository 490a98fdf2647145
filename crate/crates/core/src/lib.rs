//! Fermionic-projector states of the free Dirac field on ultrastatic slabs,
//! built mode by mode, together with the diagnostics that separate Hadamard
//! from non-Hadamard states and a brute-force Fock-space oracle.

// `!(x > 0.0)` is used on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod diagnostics;
pub mod error;
pub mod fock;
pub mod fpstate;
pub mod gamma;
pub mod kernel;
pub mod quadrature;
pub mod softening;
pub mod spectrum;

pub use error::{Error, Result};
pub use fpstate::{
    build_fp_state, build_fp_state_with, ceiling_state, diagonalize_block, fp_projector_block,
    mode_block, projector_difference, reference_state, BuildOptions, FpState, ModeBlock,
    ModeVector, ProjectorBlock, StateKind,
};
pub use softening::{SlabConfig, SofteningFunction, SofteningKind};
pub use spectrum::{
    build_eigenspinor_basis, synthetic_spectrum, torus_spectrum, Eigenspinor, EigenspinorBasis,
    ModelParams, Spectrum,
};
