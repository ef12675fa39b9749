//! Exact combinatorics of nilpotent and abelian groups of integer
//! unitriangular matrices.
//!
//! * [`matrix`]: checked `i128` unitriangular matrices with exact scaled
//!   logarithms.
//! * [`lattice`]: Hermite normal forms, integer kernels, abelian lattices and
//!   their virtual (rational span) classes.
//! * [`group`]: finitely generated nilpotent groups, their centers and the
//!   map sending a chain `N₀ < … < N_k` to `⟨Z₀, …, Z_k⟩`.
//! * [`complex`]: complexes of chains of virtual classes with the rank and
//!   half-dimension assertions.
//! * [`instance`]: the TOML instance file format.

pub mod complex;
pub mod group;
pub mod instance;
pub mod lattice;
pub mod matrix;

pub use complex::{
    build_class_complex, half_dimension_report, ChainComplexModel, CollapsedChain, HalfDimensionRow, HalfDimensionVerdict,
    LatticeChain,
};
pub use group::{center_of, zeta_chain, zeta_map, NilpotentGroupData};
pub use lattice::{hnf, left_kernel, AbelianLattice, VirtualClass};
pub use matrix::UniMatrix;

#[derive(Debug, thiserror::Error, Clone, PartialEq, Eq)]
pub enum ComplexError {
    #[error("integer overflow in {0}")]
    Overflow(&'static str),
    #[error("matrix is not unitriangular: {0}")]
    NotUnitriangular(String),
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("invalid chain: {0}")]
    InvalidChain(String),
    #[error("commutation failure: {0}")]
    Commutation(String),
    #[error("word ball of radius {radius} finds a center of rank {found}, the Lie algebra center has dimension {expected}")]
    CenterIncomplete { radius: usize, found: usize, expected: usize },
    #[error("word ball exceeds {0} elements")]
    BallTooLarge(usize),
    #[error("instance: {0}")]
    Instance(String),
}

pub type Result<T> = std::result::Result<T, ComplexError>;
