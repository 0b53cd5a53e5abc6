//! Mesh-based electrostatics: a surface-charge collocation solver that turns
//! electrode meshes into per-electrode charge bases and a [`FieldModel`]
//! backend built from them.
//!
//! Each triangle carries a uniform charge. Potentials at triangle centroids
//! are matched to the electrode voltages; far sources act as point charges,
//! near sources are integrated by recursive subdivision and the self term
//! uses the equivalent uniformly charged disc.
//!
//! [`FieldModel`]: crate::trapmodel::FieldModel

pub mod cache;
pub mod generate;
mod kernel;
mod mesh;
mod solved;
mod solver;

pub use kernel::Panel;
pub use mesh::{parse_mesh, MeshError, TriMesh, MIN_TRIANGLE_AREA};
pub use solved::{solved_field, SolvedField, ValidityRegion};
pub use solver::{
    panels, solve_unit_basis, ChargeBasis, CollocationSolver, SolveError, DEFAULT_TRIANGLE_CAP,
};
