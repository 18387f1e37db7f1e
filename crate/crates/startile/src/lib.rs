//! Starlike normal tilings of finite-dimensional normed spaces.
//!
//! Given an M-dimensional space with a normalized biorthogonal coordinate
//! basis (any `lp` norm, or a polytope norm `max_i |f_i(x)|`), this crate
//! constructs a tiling whose tiles are starlike about designated centers,
//! each containing a ball of radius `r` and contained in a ball of radius
//! `r * K`, with `K` depending only on a small planar template and not on
//! the space or its dimension. The default template gives `K = 177`; a
//! flatter variant gives `K = 117.5`.
//!
//! The construction stacks four layers:
//!
//! 1. [`planar`]: a five-region tiling of a planar strip with certified
//!    square-containment constants.
//! 2. [`semibeta`]: per quotient level, a greedily extracted system of
//!    unit vectors and functionals with small cross-pairings and a
//!    certified frame-type lower bound.
//! 3. [`quotient`] and [`cylinder`]: tiles of each quotient pulled back
//!    into cylinder tiles of the ambient space.
//! 4. [`voronoi`] and [`projection`]: each cylinder sliced by
//!    first-index Voronoi cells of a maximal separated net (starlike
//!    tiles) or by coordinate cubes under projections (convex tiles).
//!
//! [`verifier`] runs the Monte-Carlo certification suite over all of it
//! and emits reproducible, byte-stable reports; [`render`] draws colored
//! 2-plane slices.

pub mod cache;
pub mod cylinder;
pub mod error;
mod lds;
pub mod planar;
pub mod projection;
pub mod quotient;
pub mod render;
pub mod semibeta;
pub mod space;
pub mod tiling;
pub mod verifier;
pub mod voronoi;

pub use cylinder::CylinderTileId;
pub use error::{Error, Result};
pub use planar::{PlanarRegion, TemplateConstants, TemplateVariant};
pub use projection::{ProjectedTileId, ProjectionConfig};
pub use quotient::{QuotientTileId, QuotientTileKind};
pub use semibeta::{SemiBiorthogonalSystem, SphereNet};
pub use space::{NormSpec, SpaceDescriptor};
pub use tiling::Tiling;
pub use verifier::{
    compute_k_bound, run_suite, run_suite_on, build_tiling_cached, ModeSpec, TilingConfig,
    VerificationReport,
};
pub use voronoi::{CellIndex, DerivedConstants, FullTileId};
