//! Exact symbolic kernel for the Aarhus integral of rational homology
//! spheres: spaces of Jacobi diagrams modulo AS/IHX/STU, the PBW maps,
//! formal Gaussian integration, the OGL map and Lie algebra weight systems.
//!
//! All coefficients are exact rationals over arbitrary precision integers.

pub mod diagram;
pub mod error;
pub mod gaussian;
pub mod io;
pub mod linalg;
pub mod maps;
pub mod ogl;
pub mod relations;
pub mod sum;
pub mod weights;

pub use diagram::{Diagram, DiagramBuilder, Space, Vertex};
pub use error::{Error, Result};
pub use relations::{Kernel, QuotientBasis};
pub use sum::{GradedSum, Q};
