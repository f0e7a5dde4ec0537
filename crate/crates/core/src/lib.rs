//! fraclab-core: grid discretizations of the nonlocal perimeter, its
//! Euler-Lagrange operator, the weighted-extension energy, and the
//! rescaled fractional Allen-Cahn functionals, plus exact and heuristic
//! minimizers over window masks.

pub mod arcs;
pub mod error;
pub mod euler_lagrange;
pub mod extension;
pub mod geometry;
pub mod kernel;
pub mod allen_cahn;
pub mod contour;
pub mod mincut;
pub mod numerics;
pub mod perimeter;
pub mod report;
pub mod shapes;

#[cfg(test)]
pub(crate) mod testkit;

pub use error::{FracError, Result};
pub use geometry::{Point, Window};
pub use kernel::{Constants, InteractionTable};
pub use shapes::{rasterize, Density, GridSet, LocalQuantities, Rect, ShapeKind, ShapeSpec};
