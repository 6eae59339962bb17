//! Homogeneous affine surfaces: invariants, model normal forms, Killing algebras,
//! affine gradient Ricci solitons and their Riemannian extensions.

pub mod classify;
pub mod connection;
pub mod error;
pub mod extension;
pub mod field;
pub mod format;
pub mod invariants;
pub mod json;
pub mod killing;
pub mod models;
pub mod normal;
pub mod sampling;
pub mod soliton;

pub use connection::{AffineSurface, Coeff6, Point2, SurfaceKind};
pub use error::{GeometryError, Result};
pub use field::{ScalarField, Term, VectorField};
