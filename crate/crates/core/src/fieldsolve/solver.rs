use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use thiserror::Error;

use super::{kernel::Panel, MeshError, TriMesh};
use crate::constants::COULOMB;

/// Default cap on the number of triangles of a dense solve.
pub const DEFAULT_TRIANGLE_CAP: usize = 20_000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SolveError {
    #[error(transparent)]
    Mesh(#[from] MeshError),
    #[error("mesh has {count} triangles, above the cap of {cap}")]
    TooLarge { count: usize, cap: usize },
    #[error("collocation system is singular or ill-conditioned (pivot ratio estimate {estimate:.3e})")]
    IllConditioned { estimate: f64 },
    #[error("electrode {0} does not occur in the mesh")]
    InvalidElectrode(u32),
    #[error("boundary-condition residual {0:.3e} exceeds 1e-3")]
    Residual(f64),
    #[error("no charge basis for driven electrode '{0}'")]
    MissingBasis(String),
}

/// Per-triangle charges for 1 V on one electrode and 0 V on all others.
#[derive(Debug, Clone, PartialEq)]
pub struct ChargeBasis {
    pub electrode_id: u32,
    /// Charge on each triangle (C), in mesh order.
    pub charges: Vec<f64>,
    /// Relative boundary-condition residual at the collocation points.
    pub residual: f64,
}

impl ChargeBasis {
    pub fn total_charge(&self) -> f64 {
        self.charges.iter().sum()
    }
}

/// Panels of a mesh in mesh order.
pub fn panels(mesh: &TriMesh) -> Vec<Panel> {
    (0..mesh.triangles.len()).map(|t| Panel::new(mesh.corners(t))).collect()
}

/// Dense collocation system of a mesh, factorized once and reused for every
/// electrode.
pub struct CollocationSolver {
    mesh: TriMesh,
    matrix: DMatrix<f64>,
    lu: nalgebra::LU<f64, nalgebra::Dyn, nalgebra::Dyn>,
}

impl CollocationSolver {
    pub fn new(mesh: &TriMesh) -> Result<Self, SolveError> {
        Self::with_cap(mesh, DEFAULT_TRIANGLE_CAP)
    }

    pub fn with_cap(mesh: &TriMesh, cap: usize) -> Result<Self, SolveError> {
        mesh.validate()?;
        let n = mesh.triangles.len();
        if n > cap {
            return Err(SolveError::TooLarge { count: n, cap });
        }
        let panels = panels(mesh);
        // entries are potentials per unit charge in units of 1/(4 pi eps0)
        let rows: Vec<Vec<f64>> = panels
            .par_iter()
            .enumerate()
            .map(|(i, pi)| {
                panels
                    .iter()
                    .enumerate()
                    .map(|(j, pj)| if i == j { pj.self_potential() } else { pj.potential(&pi.centroid) })
                    .collect()
            })
            .collect();
        let matrix = DMatrix::from_fn(n, n, |i, j| rows[i][j]);
        let lu = matrix.clone().lu();
        let u = lu.u();
        let diag: Vec<f64> = u.diagonal().iter().map(|d| d.abs()).collect();
        let max = diag.iter().cloned().fold(0.0, f64::max);
        let min = diag.iter().cloned().fold(f64::INFINITY, f64::min);
        let estimate = if min > 0.0 { max / min } else { f64::INFINITY };
        if !(estimate < 1e13) {
            return Err(SolveError::IllConditioned { estimate });
        }
        Ok(Self { mesh: mesh.clone(), matrix, lu })
    }

    pub fn mesh(&self) -> &TriMesh {
        &self.mesh
    }

    /// Charges for 1 V on `electrode_id`, 0 V elsewhere.
    pub fn solve_unit_basis(&self, electrode_id: u32) -> Result<ChargeBasis, SolveError> {
        if !self.mesh.has_electrode(electrode_id) {
            return Err(SolveError::InvalidElectrode(electrode_id));
        }
        let rhs = DVector::from_iterator(
            self.mesh.electrode_ids.len(),
            self.mesh.electrode_ids.iter().map(|&id| if id == electrode_id { 1.0 } else { 0.0 }),
        );
        let x = self
            .lu
            .solve(&rhs)
            .ok_or(SolveError::IllConditioned { estimate: f64::INFINITY })?;
        let residual = (&self.matrix * &x - &rhs).amax() / rhs.amax();
        if !(residual < 1e-3) {
            return Err(SolveError::Residual(residual));
        }
        Ok(ChargeBasis {
            electrode_id,
            charges: x.iter().map(|v| v / COULOMB).collect(),
            residual,
        })
    }

    /// Bases for every electrode present in the mesh, ordered by id.
    pub fn solve_all(&self) -> Result<Vec<ChargeBasis>, SolveError> {
        self.mesh
            .electrode_names
            .keys()
            .filter(|id| self.mesh.has_electrode(**id))
            .map(|&id| self.solve_unit_basis(id))
            .collect()
    }
}

/// Assembles, factorizes and solves for a single electrode.
pub fn solve_unit_basis(mesh: &TriMesh, electrode_id: u32) -> Result<ChargeBasis, SolveError> {
    if !mesh.has_electrode(electrode_id) {
        return Err(SolveError::InvalidElectrode(electrode_id));
    }
    CollocationSolver::new(mesh)?.solve_unit_basis(electrode_id)
}
