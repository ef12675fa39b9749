//! Numerical laboratory for model Hadamard spaces.
//!
//! The crate is layered bottom-up:
//!
//! * [`models`]: Euclidean spaces, real hyperbolic spaces and their finite
//!   products, with geodesics, distances, angles and ideal boundaries.
//! * [`busemann`]: Busemann functions, convex combinations, isometries,
//!   displacement and the weighted displacement series.
//! * [`convex`]: sphere minimizers, horoball projections, sublevel flows and
//!   comparison validators.
//! * [`simplex`]: finite approximations of Busemann simplices, horospherical
//!   coordinates and the audits built on them.
//! * [`dynamics`]: isometry classification, orbit tracking rays and centers
//!   of mass at infinity.
//!
//! Batch operations run on rayon when the `parallel` feature is enabled
//! (the default) and fall back to plain iteration otherwise; see [`par`].

pub mod busemann;
pub mod convex;
pub mod dynamics;
mod error;
pub mod models;
pub mod par;
pub mod simplex;

pub use error::{GeometryError, Result};
