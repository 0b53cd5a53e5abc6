//! The TRAPMESH ASCII triangle-mesh format.
//!
//! ```text
//! TRAPMESH 1
//! # rf1 0
//! v 1.0e-3 0 0
//! v 0 1.0e-3 0
//! v 0 0 1.0e-3
//! f 0 1 2 0
//! ```
//!
//! * The first non-empty line must be exactly `TRAPMESH 1`.
//! * `v x y z` declares a vertex in metres; vertices are numbered from 0 in
//!   order of appearance.
//! * `f i j k id` declares a triangle on electrode `id`.
//! * `# name id` binds an electrode name (`[A-Za-z_][A-Za-z0-9_]*`) to an id.
//!   Any other line starting with `#` is a comment. Blank lines are ignored.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use thiserror::Error;

use crate::Vec3;

/// Smallest triangle area accepted (m^2).
pub const MIN_TRIANGLE_AREA: f64 = 1e-18;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MeshError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("triangle {triangle} references vertex {index} but only {count} vertices exist")]
    DanglingIndex { triangle: usize, index: usize, count: usize },
    #[error("triangle {triangle} has zero area ({area:.3e} m^2)")]
    ZeroArea { triangle: usize, area: f64 },
    #[error("electrode id {0} is used but has no name binding")]
    UnnamedElectrode(u32),
    #[error("no triangles")]
    NoTriangles,
}

/// Triangle surface mesh of a set of electrodes.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct TriMesh {
    pub vertices: Vec<Vec3>,
    pub triangles: Vec<[usize; 3]>,
    pub electrode_ids: Vec<u32>,
    pub electrode_names: BTreeMap<u32, String>,
}

impl TriMesh {
    /// Checks index ranges, triangle areas and name bindings.
    pub fn validate(&self) -> Result<(), MeshError> {
        if self.triangles.is_empty() {
            return Err(MeshError::NoTriangles);
        }
        let count = self.vertices.len();
        for (t, tri) in self.triangles.iter().enumerate() {
            if let Some(&index) = tri.iter().find(|&&i| i >= count) {
                return Err(MeshError::DanglingIndex { triangle: t, index, count });
            }
            let area = self.area(t);
            if !(area > MIN_TRIANGLE_AREA) {
                return Err(MeshError::ZeroArea { triangle: t, area });
            }
        }
        for id in &self.electrode_ids {
            if !self.electrode_names.contains_key(id) {
                return Err(MeshError::UnnamedElectrode(*id));
            }
        }
        Ok(())
    }

    pub fn area(&self, t: usize) -> f64 {
        let [a, b, c] = self.corners(t);
        0.5 * (b - a).cross(&(c - a)).norm()
    }

    pub fn corners(&self, t: usize) -> [Vec3; 3] {
        self.triangles[t].map(|i| self.vertices[i])
    }

    pub fn electrode_by_name(&self, name: &str) -> Option<u32> {
        self.electrode_names.iter().find(|(_, n)| n.as_str() == name).map(|(id, _)| *id)
    }

    pub fn has_electrode(&self, id: u32) -> bool {
        self.electrode_ids.contains(&id)
    }

    /// Largest distance between any two vertices.
    pub fn diameter(&self) -> f64 {
        let (lo, hi) = self.bounding_box();
        (hi - lo).norm()
    }

    pub fn bounding_box(&self) -> (Vec3, Vec3) {
        let mut lo = Vec3::repeat(f64::INFINITY);
        let mut hi = Vec3::repeat(f64::NEG_INFINITY);
        for v in &self.vertices {
            lo = lo.inf(v);
            hi = hi.sup(v);
        }
        (lo, hi)
    }

    /// Appends another mesh, offsetting its vertex indices.
    pub fn append(&mut self, other: &TriMesh) {
        let offset = self.vertices.len();
        self.vertices.extend_from_slice(&other.vertices);
        self.triangles
            .extend(other.triangles.iter().map(|t| t.map(|i| i + offset)));
        self.electrode_ids.extend_from_slice(&other.electrode_ids);
        for (id, name) in &other.electrode_names {
            self.electrode_names.insert(*id, name.clone());
        }
    }

    /// Canonical TRAPMESH text. Floats use the shortest representation that
    /// parses back to the same value.
    pub fn serialize(&self) -> String {
        let mut out = String::from("TRAPMESH 1\n");
        for (id, name) in &self.electrode_names {
            let _ = writeln!(out, "# {name} {id}");
        }
        for v in &self.vertices {
            let _ = writeln!(out, "v {:?} {:?} {:?}", v.x, v.y, v.z);
        }
        for (t, id) in self.triangles.iter().zip(&self.electrode_ids) {
            let _ = writeln!(out, "f {} {} {} {}", t[0], t[1], t[2], id);
        }
        out
    }

    /// Reads a triangle mesh from OFF text, assigning every face to one
    /// electrode. Polygons with more than three corners are fanned.
    pub fn from_off(text: &str, electrode_id: u32, name: &str) -> Result<TriMesh, MeshError> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
            .filter(|(_, l)| !l.is_empty());
        let perr = |line: usize, message: &str| MeshError::Parse { line, message: message.into() };
        let (ln, head) = lines.next().ok_or_else(|| perr(1, "empty OFF input"))?;
        let mut counts_line = if head == "OFF" {
            lines.next().ok_or_else(|| perr(ln, "missing OFF counts"))?
        } else if let Some(rest) = head.strip_prefix("OFF") {
            (ln, rest.trim())
        } else {
            return Err(perr(ln, "missing OFF header"));
        };
        if counts_line.1.is_empty() {
            counts_line = lines.next().ok_or_else(|| perr(ln, "missing OFF counts"))?;
        }
        let counts: Vec<usize> = counts_line
            .1
            .split_whitespace()
            .map(|s| s.parse().map_err(|_| perr(counts_line.0, "bad OFF counts")))
            .collect::<Result<_, _>>()?;
        if counts.len() < 2 {
            return Err(perr(counts_line.0, "bad OFF counts"));
        }
        let mut mesh = TriMesh::default();
        mesh.electrode_names.insert(electrode_id, name.to_string());
        for _ in 0..counts[0] {
            let (ln, l) = lines.next().ok_or_else(|| perr(0, "truncated vertex list"))?;
            let c: Vec<f64> = l
                .split_whitespace()
                .take(3)
                .map(|s| s.parse().map_err(|_| perr(ln, "bad vertex coordinate")))
                .collect::<Result<_, _>>()?;
            if c.len() != 3 {
                return Err(perr(ln, "vertex needs three coordinates"));
            }
            mesh.vertices.push(Vec3::new(c[0], c[1], c[2]));
        }
        for _ in 0..counts[1] {
            let (ln, l) = lines.next().ok_or_else(|| perr(0, "truncated face list"))?;
            let idx: Vec<usize> = l
                .split_whitespace()
                .map(|s| s.parse().map_err(|_| perr(ln, "bad face index")))
                .collect::<Result<_, _>>()?;
            let n = *idx.first().ok_or_else(|| perr(ln, "empty face"))?;
            if n < 3 || idx.len() < n + 1 {
                return Err(perr(ln, "face needs at least three indices"));
            }
            for k in 1..n - 1 {
                mesh.triangles.push([idx[1], idx[k + 1], idx[k + 2]]);
                mesh.electrode_ids.push(electrode_id);
            }
        }
        mesh.validate()?;
        Ok(mesh)
    }
}

fn is_name(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

/// Parses and validates TRAPMESH text.
pub fn parse_mesh(text: &str) -> Result<TriMesh, MeshError> {
    let mut mesh = TriMesh::default();
    let mut seen_header = false;
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let l = raw.trim();
        if l.is_empty() {
            continue;
        }
        let err = |message: String| MeshError::Parse { line, message };
        if !seen_header {
            if l != "TRAPMESH 1" {
                return Err(err(format!("expected header 'TRAPMESH 1', found '{l}'")));
            }
            seen_header = true;
            continue;
        }
        let mut tok = l.split_whitespace();
        match tok.next() {
            Some("#") => {
                let rest: Vec<&str> = tok.collect();
                if rest.len() == 2 && is_name(rest[0]) {
                    if let Ok(id) = rest[1].parse::<u32>() {
                        mesh.electrode_names.insert(id, rest[0].to_string());
                    }
                }
            }
            Some(t) if t.starts_with('#') => {}
            Some("v") => {
                let c: Vec<f64> = tok
                    .map(|s| s.parse::<f64>().map_err(|_| err(format!("bad coordinate '{s}'"))))
                    .collect::<Result<_, _>>()?;
                if c.len() != 3 || c.iter().any(|x| !x.is_finite()) {
                    return Err(err("vertex needs three finite coordinates".into()));
                }
                mesh.vertices.push(Vec3::new(c[0], c[1], c[2]));
            }
            Some("f") => {
                let n: Vec<&str> = tok.collect();
                if n.len() != 4 {
                    return Err(err("face needs three vertex indices and an electrode id".into()));
                }
                let idx = |s: &str| s.parse::<usize>().map_err(|_| err(format!("bad index '{s}'")));
                mesh.triangles.push([idx(n[0])?, idx(n[1])?, idx(n[2])?]);
                mesh.electrode_ids
                    .push(n[3].parse::<u32>().map_err(|_| err(format!("bad electrode id '{}'", n[3])))?);
            }
            Some(other) => return Err(err(format!("unknown record '{other}'"))),
            None => {}
        }
    }
    if !seen_header {
        return Err(MeshError::Parse { line: 1, message: "missing 'TRAPMESH 1' header".into() });
    }
    mesh.validate()?;
    Ok(mesh)
}
