//! Binary cache of solved charge bases.
//!
//! Layout, all integers `u64` and floats `f64`, little-endian:
//!
//! | field | type |
//! |---|---|
//! | magic `b"TRAPBAS\0"` | 8 bytes |
//! | format version (= 1) | u64 |
//! | vertex count `nv` | u64 |
//! | triangle count `nt` | u64 |
//! | name count `nn` | u64 |
//! | basis count `nb` | u64 |
//! | vertices | `3 nv` f64 |
//! | triangle corner indices | `3 nt` u64 |
//! | triangle electrode ids | `nt` u64 |
//! | names: id, byte length `L`, `L` UTF-8 bytes | repeated `nn` times |
//! | bases: electrode id (u64), residual (f64), `nt` charges (f64) | repeated `nb` times |

use std::io::{self, Read, Write};

use super::{ChargeBasis, TriMesh};
use crate::Vec3;

pub const MAGIC: &[u8; 8] = b"TRAPBAS\0";
pub const VERSION: u64 = 1;

fn put_u64(w: &mut impl Write, v: u64) -> io::Result<()> {
    w.write_all(&v.to_le_bytes())
}

fn put_f64(w: &mut impl Write, v: f64) -> io::Result<()> {
    w.write_all(&v.to_le_bytes())
}

pub fn write_bases(w: &mut impl Write, mesh: &TriMesh, bases: &[ChargeBasis]) -> io::Result<()> {
    w.write_all(MAGIC)?;
    for v in [
        VERSION,
        mesh.vertices.len() as u64,
        mesh.triangles.len() as u64,
        mesh.electrode_names.len() as u64,
        bases.len() as u64,
    ] {
        put_u64(w, v)?;
    }
    for v in &mesh.vertices {
        for c in v.iter() {
            put_f64(w, *c)?;
        }
    }
    for t in &mesh.triangles {
        for i in t {
            put_u64(w, *i as u64)?;
        }
    }
    for id in &mesh.electrode_ids {
        put_u64(w, *id as u64)?;
    }
    for (id, name) in &mesh.electrode_names {
        put_u64(w, *id as u64)?;
        put_u64(w, name.len() as u64)?;
        w.write_all(name.as_bytes())?;
    }
    for b in bases {
        put_u64(w, b.electrode_id as u64)?;
        put_f64(w, b.residual)?;
        for q in &b.charges {
            put_f64(w, *q)?;
        }
    }
    Ok(())
}

struct Reader<R>(R);

impl<R: Read> Reader<R> {
    fn u64(&mut self) -> io::Result<u64> {
        let mut b = [0u8; 8];
        self.0.read_exact(&mut b)?;
        Ok(u64::from_le_bytes(b))
    }
    fn f64(&mut self) -> io::Result<f64> {
        let mut b = [0u8; 8];
        self.0.read_exact(&mut b)?;
        Ok(f64::from_le_bytes(b))
    }
    fn count(&mut self, limit: u64) -> io::Result<usize> {
        let v = self.u64()?;
        if v > limit {
            return Err(invalid(format!("count {v} exceeds limit {limit}")));
        }
        Ok(v as usize)
    }
}

fn invalid(msg: String) -> io::Error {
    io::Error::new(io::ErrorKind::InvalidData, msg)
}

pub fn read_bases(r: &mut impl Read) -> io::Result<(TriMesh, Vec<ChargeBasis>)> {
    let mut magic = [0u8; 8];
    r.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(invalid("not a basis cache file".into()));
    }
    let mut rd = Reader(r);
    let version = rd.u64()?;
    if version != VERSION {
        return Err(invalid(format!("unsupported cache version {version}")));
    }
    let limit = 1 << 32;
    let nv = rd.count(limit)?;
    let nt = rd.count(limit)?;
    let nn = rd.count(1 << 20)?;
    let nb = rd.count(1 << 20)?;
    let mut mesh = TriMesh::default();
    for _ in 0..nv {
        mesh.vertices.push(Vec3::new(rd.f64()?, rd.f64()?, rd.f64()?));
    }
    for _ in 0..nt {
        mesh.triangles.push([rd.u64()? as usize, rd.u64()? as usize, rd.u64()? as usize]);
    }
    for _ in 0..nt {
        mesh.electrode_ids.push(rd.u64()? as u32);
    }
    for _ in 0..nn {
        let id = rd.u64()? as u32;
        let len = rd.count(1 << 16)?;
        let mut bytes = vec![0u8; len];
        rd.0.read_exact(&mut bytes)?;
        let name = String::from_utf8(bytes).map_err(|e| invalid(e.to_string()))?;
        mesh.electrode_names.insert(id, name);
    }
    let mut bases = Vec::with_capacity(nb);
    for _ in 0..nb {
        let electrode_id = rd.u64()? as u32;
        let residual = rd.f64()?;
        let charges = (0..nt).map(|_| rd.f64()).collect::<io::Result<Vec<_>>>()?;
        bases.push(ChargeBasis { electrode_id, charges, residual });
    }
    mesh.validate().map_err(|e| invalid(e.to_string()))?;
    Ok((mesh, bases))
}
