//! Binary field files.
//!
//! Layout (little-endian): magic `NLC2`, version u32, component count u32,
//! nx u32, ny u32, h f64, origin 2 x f64, domain tag u32, 4 x f64 domain
//! parameters, mask codes (2 bits per node, 4 nodes per byte, low bits first,
//! row-major; 0 exterior, 1 interior, 2 band), then one row-major nx x ny plane
//! of f64 per component.

use std::io::{Read, Write};
use std::path::Path;
use std::sync::Arc;

use super::{Domain, DomainGrid, DirectorField, QField};
use crate::qtensor::{QVec, Vec3};
use crate::{Error, Result};

pub const MAGIC: &[u8; 4] = b"NLC2";
pub const VERSION: u32 = 1;

/// A decoded field file: the grid and the component planes.
#[derive(Clone, Debug)]
pub struct FieldFile {
    pub grid: Arc<DomainGrid>,
    pub components: usize,
    pub data: Vec<f64>,
}

impl FieldFile {
    pub fn from_director(n: &DirectorField) -> Self {
        Self::from_nodes(n.grid().clone(), 3, |k, c| n.get(k)[c])
    }

    pub fn from_q(q: &QField) -> Self {
        Self::from_nodes(q.grid().clone(), 5, |k, c| q.get(k).0[c])
    }

    /// Per-node 3-vectors (e.g. correction coefficients).
    pub fn from_vectors(grid: Arc<DomainGrid>, v: &[Vec3]) -> Self {
        Self::from_nodes(grid, 3, |k, c| v[k][c])
    }

    fn from_nodes(grid: Arc<DomainGrid>, components: usize, f: impl Fn(usize, usize) -> f64) -> Self {
        let total = grid.node_count();
        let mut data = vec![0.0; components * total];
        for c in 0..components {
            for k in 0..total {
                data[c * total + k] = f(k, c);
            }
        }
        FieldFile { grid, components, data }
    }

    pub fn node(&self, k: usize, c: usize) -> f64 {
        self.data[c * self.grid.node_count() + k]
    }

    pub fn to_director(&self) -> Result<DirectorField> {
        if self.components != 3 {
            return Err(Error::Format(format!("expected 3 components, found {}", self.components)));
        }
        let v = (0..self.grid.node_count()).map(|k| [self.node(k, 0), self.node(k, 1), self.node(k, 2)]).collect();
        DirectorField::new(self.grid.clone(), v)
    }

    pub fn to_q(&self) -> Result<QField> {
        if self.components != 5 {
            return Err(Error::Format(format!("expected 5 components, found {}", self.components)));
        }
        let v = (0..self.grid.node_count()).map(|k| QVec(std::array::from_fn(|c| self.node(k, c)))).collect();
        QField::new(self.grid.clone(), v)
    }

    pub fn encode(&self) -> Vec<u8> {
        let g = &self.grid;
        let mut out = Vec::with_capacity(64 + g.node_count() / 4 + 8 * self.data.len());
        out.extend_from_slice(MAGIC);
        for v in [VERSION, self.components as u32, g.nx as u32, g.ny as u32] {
            out.extend_from_slice(&v.to_le_bytes());
        }
        let origin = g.origin();
        for v in [g.h, origin[0], origin[1]] {
            out.extend_from_slice(&v.to_le_bytes());
        }
        let (tag, params) = g.domain.tag();
        out.extend_from_slice(&tag.to_le_bytes());
        for v in params {
            out.extend_from_slice(&v.to_le_bytes());
        }
        let mut mask = vec![0u8; g.node_count().div_ceil(4)];
        for (k, kind) in g.kinds().iter().enumerate() {
            mask[k / 4] |= (*kind as u8) << (2 * (k % 4));
        }
        out.extend_from_slice(&mask);
        for v in &self.data {
            out.extend_from_slice(&v.to_le_bytes());
        }
        out
    }

    pub fn decode(bytes: &[u8]) -> Result<Self> {
        let mut r = Reader { bytes, pos: 0 };
        if r.take(4)? != MAGIC {
            return Err(Error::Format("bad magic".into()));
        }
        let version = r.u32()?;
        if version != VERSION {
            return Err(Error::Format(format!("unsupported version {version}")));
        }
        let components = r.u32()? as usize;
        if components != 3 && components != 5 {
            return Err(Error::Format(format!("component count {components} is not 3 or 5")));
        }
        let (nx, ny) = (r.u32()? as usize, r.u32()? as usize);
        let h = r.f64()?;
        let origin = [r.f64()?, r.f64()?];
        let tag = r.u32()?;
        let params = [r.f64()?, r.f64()?, r.f64()?, r.f64()?];
        let domain = Domain::from_tag(tag, params)?;
        let resolution = (1.0 / h).round() as usize;
        let grid = DomainGrid::new(domain, resolution)?;
        if grid.nx != nx || grid.ny != ny || grid.h != h || grid.origin() != origin {
            return Err(Error::GridMismatch("header does not match the regenerated grid".into()));
        }
        let mask = r.take((nx * ny).div_ceil(4))?;
        for (k, kind) in grid.kinds().iter().enumerate() {
            if (mask[k / 4] >> (2 * (k % 4))) & 3 != *kind as u8 {
                return Err(Error::GridMismatch(format!("mask differs at node {k}")));
            }
        }
        let n = components * nx * ny;
        let raw = r.take(8 * n)?;
        let data = raw.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().unwrap())).collect();
        if r.pos != bytes.len() {
            return Err(Error::Format("trailing bytes".into()));
        }
        Ok(FieldFile { grid: Arc::new(grid), components, data })
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let mut f = std::fs::File::create(path)?;
        f.write_all(&self.encode())?;
        Ok(())
    }

    pub fn read(path: &Path) -> Result<Self> {
        let mut bytes = Vec::new();
        std::fs::File::open(path)?.read_to_end(&mut bytes)?;
        Self::decode(&bytes)
    }
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        if self.pos + n > self.bytes.len() {
            return Err(Error::Format("truncated file".into()));
        }
        let s = &self.bytes[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
}

/// `<stem>.meta.json` next to a field file.
pub fn sidecar_path(path: &Path) -> std::path::PathBuf {
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    path.with_file_name(format!("{stem}.meta.json"))
}
