//! Mesh generators for test geometries and the tapered blade trap.

use std::f64::consts::PI;

use super::TriMesh;
use crate::trapmodel::TrapGeometry;
use crate::Vec3;

/// Electrode ids used by [`blade_trap`].
pub mod ids {
    pub const RF1: u32 = 0;
    pub const RF2: u32 = 1;
    pub const DC1: u32 = 2;
    pub const DC2: u32 = 3;
    pub const C1: u32 = 4;
}

fn single(name: &str, id: u32) -> TriMesh {
    let mut m = TriMesh::default();
    m.electrode_names.insert(id, name.to_string());
    m
}

/// Adds a structured quad grid `point(i, j)` for `i <= nu`, `j <= nv`, split
/// into two triangles per cell.
fn push_grid(mesh: &mut TriMesh, nu: usize, nv: usize, id: u32, point: impl Fn(usize, usize) -> Vec3) {
    let base = mesh.vertices.len();
    for i in 0..=nu {
        for j in 0..=nv {
            mesh.vertices.push(point(i, j));
        }
    }
    let at = |i: usize, j: usize| base + i * (nv + 1) + j;
    for i in 0..nu {
        for j in 0..nv {
            mesh.triangles.push([at(i, j), at(i + 1, j), at(i + 1, j + 1)]);
            mesh.triangles.push([at(i, j), at(i + 1, j + 1), at(i, j + 1)]);
            mesh.electrode_ids.extend([id, id]);
        }
    }
}

/// Latitude/longitude sphere with `2 n_lon (n_lat - 1)` triangles.
pub fn uv_sphere(radius: f64, n_lat: usize, n_lon: usize, id: u32) -> TriMesh {
    assert!(n_lat >= 2 && n_lon >= 3);
    let mut m = single("sphere", id);
    m.vertices.push(Vec3::new(0.0, 0.0, radius));
    for i in 1..n_lat {
        let theta = PI * i as f64 / n_lat as f64;
        for j in 0..n_lon {
            let phi = 2.0 * PI * j as f64 / n_lon as f64;
            m.vertices.push(radius * Vec3::new(theta.sin() * phi.cos(), theta.sin() * phi.sin(), theta.cos()));
        }
    }
    m.vertices.push(Vec3::new(0.0, 0.0, -radius));
    let south = m.vertices.len() - 1;
    let ring = |i: usize, j: usize| 1 + (i - 1) * n_lon + (j % n_lon);
    for j in 0..n_lon {
        m.triangles.push([0, ring(1, j), ring(1, j + 1)]);
    }
    for i in 1..n_lat - 1 {
        for j in 0..n_lon {
            m.triangles.push([ring(i, j), ring(i + 1, j), ring(i + 1, j + 1)]);
            m.triangles.push([ring(i, j), ring(i + 1, j + 1), ring(i, j + 1)]);
        }
    }
    for j in 0..n_lon {
        m.triangles.push([ring(n_lat - 1, j), south, ring(n_lat - 1, j + 1)]);
    }
    m.electrode_ids = vec![id; m.triangles.len()];
    m
}

/// Two square plates of side `side` at `z = +-gap/2`, `n x n` cells each.
/// Electrode 0 (`top`) is at `+z`, electrode 1 (`bottom`) at `-z`.
pub fn parallel_plates(side: f64, gap: f64, n: usize) -> TriMesh {
    let mut m = single("top", 0);
    m.electrode_names.insert(1, "bottom".into());
    let coord = |k: usize| side * (k as f64 / n as f64 - 0.5);
    push_grid(&mut m, n, n, 0, |i, j| Vec3::new(coord(i), coord(j), 0.5 * gap));
    push_grid(&mut m, n, n, 1, |i, j| Vec3::new(coord(i), coord(j), -0.5 * gap));
    m
}

/// Resolution of the generated trap mesh.
#[derive(Debug, Clone, PartialEq)]
pub struct BladeTrapOptions {
    /// Radial extent of each blade sheet beyond its edge (m).
    pub blade_width: f64,
    pub n_axial: usize,
    pub n_width: usize,
    /// Outer radius of the annular endcaps (m).
    pub endcap_outer: f64,
    pub n_ring: usize,
    pub n_theta: usize,
    pub include_compensation: bool,
}

impl Default for BladeTrapOptions {
    fn default() -> Self {
        Self {
            blade_width: 3.0e-3,
            n_axial: 14,
            n_width: 8,
            endcap_outer: 1.2e-3,
            n_ring: 3,
            n_theta: 20,
            include_compensation: true,
        }
    }
}

/// Coarse surface mesh of the tapered trap: four zero-thickness blades whose
/// edges follow `rho(z)`, two annular endcaps and optionally four
/// compensation rods on the diagonals.
///
/// Electrode names: `rf1` (blades on +-x), `rf2` (+-y), `dc1` (+z endcap),
/// `dc2` (-z endcap), `c1`..`c4`.
pub fn blade_trap(geom: &TrapGeometry, opts: &BladeTrapOptions) -> TriMesh {
    let mut m = TriMesh::default();
    for (id, name) in [(ids::RF1, "rf1"), (ids::RF2, "rf2"), (ids::DC1, "dc1"), (ids::DC2, "dc2")] {
        m.electrode_names.insert(id, name.into());
    }
    let half = 0.5 * geom.blade_length;
    for (dir, id) in [
        (Vec3::x(), ids::RF1),
        (-Vec3::x(), ids::RF1),
        (Vec3::y(), ids::RF2),
        (-Vec3::y(), ids::RF2),
    ] {
        push_grid(&mut m, opts.n_axial, opts.n_width, id, |i, j| {
            let z = -half + geom.blade_length * i as f64 / opts.n_axial as f64;
            // cells graded towards the edge where the charge density peaks
            let s = (j as f64 / opts.n_width as f64).powi(2);
            dir * (geom.rho(z) + opts.blade_width * s) + Vec3::new(0.0, 0.0, z)
        });
    }
    let inner = 0.5 * geom.endcap_hole_diam;
    for (sign, id) in [(1.0, ids::DC1), (-1.0, ids::DC2)] {
        push_grid(&mut m, opts.n_ring, opts.n_theta, id, |i, j| {
            let r = inner + (opts.endcap_outer - inner) * i as f64 / opts.n_ring as f64;
            let phi = 2.0 * PI * j as f64 / opts.n_theta as f64;
            Vec3::new(r * phi.cos(), r * phi.sin(), sign * 0.5 * geom.endcap_gap)
        });
    }
    if opts.include_compensation {
        let center = 0.5 * geom.comp_diag_distance;
        let radius = 0.5 * geom.comp_diam;
        for k in 0..4u32 {
            let id = ids::C1 + k;
            m.electrode_names.insert(id, format!("c{}", k + 1));
            let ang = PI / 4.0 + k as f64 * PI / 2.0;
            let c = Vec3::new(center * ang.cos(), center * ang.sin(), 0.0);
            push_grid(&mut m, 4, 8, id, |i, j| {
                let z = -half + geom.blade_length * i as f64 / 4.0;
                let phi = 2.0 * PI * j as f64 / 8.0;
                c + Vec3::new(radius * phi.cos(), radius * phi.sin(), z)
            });
        }
    }
    m
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sphere_counts_and_validity() {
        let m = uv_sphere(1.0, 26, 40, 0);
        assert_eq!(m.triangles.len(), 2000);
        m.validate().unwrap();
        for v in &m.vertices {
            assert!((v.norm() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn trap_mesh_is_valid() {
        let m = blade_trap(&TrapGeometry::default(), &BladeTrapOptions::default());
        m.validate().unwrap();
        assert_eq!(m.electrode_by_name("rf2"), Some(ids::RF2));
        assert_eq!(m.electrode_by_name("c3"), Some(ids::C1 + 2));
    }
}
