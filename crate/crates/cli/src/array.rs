//! `ArrayFile`: a self-describing little-endian binary array.
//!
//! Layout of the 64-byte header:
//!
//! | bytes  | field                                  |
//! |--------|----------------------------------------|
//! | 0..4   | magic `SCLN`                           |
//! | 4..6   | format version (u16)                   |
//! | 6      | element kind: 0 = f64, 1 = c128        |
//! | 7      | rank (at most 6)                       |
//! | 8..56  | six u64 dimensions, unused ones zero   |
//! | 56..64 | reserved, zero                         |
//!
//! The payload follows: row-major values, complex numbers as `(re, im)`
//! pairs. Complex arrays hold `2 × Π dims` f64 values in memory.

use std::io::{Read, Write};
use std::path::Path;

use crate::error::{CliError, Result};

pub const MAGIC: [u8; 4] = *b"SCLN";
pub const VERSION: u16 = 1;
pub const HEADER_LEN: usize = 64;
pub const MAX_RANK: usize = 6;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ElementKind {
    F64,
    C128,
}

impl ElementKind {
    fn tag(self) -> u8 {
        match self {
            ElementKind::F64 => 0,
            ElementKind::C128 => 1,
        }
    }

    /// f64 values per element.
    pub fn width(self) -> usize {
        match self {
            ElementKind::F64 => 1,
            ElementKind::C128 => 2,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ElementKind::F64 => "f64",
            ElementKind::C128 => "c128",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ArrayFile {
    pub kind: ElementKind,
    pub dims: Vec<usize>,
    pub data: Vec<f64>,
}

impl ArrayFile {
    pub fn new(kind: ElementKind, dims: Vec<usize>, data: Vec<f64>) -> Result<Self> {
        if dims.is_empty() || dims.len() > MAX_RANK {
            return Err(CliError::format(format!("rank {} is outside 1..={MAX_RANK}", dims.len())));
        }
        let expected = dims.iter().product::<usize>() * kind.width();
        if data.len() != expected {
            return Err(CliError::format(format!(
                "{} values for dims {:?} of kind {}",
                data.len(),
                dims,
                kind.name()
            )));
        }
        Ok(Self { kind, dims, data })
    }

    /// Stacks equally sized rows into a `rows × len` (or `rows × len/2`
    /// complex) array.
    pub fn from_rows(kind: ElementKind, rows: &[Vec<f64>]) -> Result<Self> {
        let len = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != len) || len % kind.width() != 0 {
            return Err(CliError::format("rows have different lengths"));
        }
        Self::new(kind, vec![rows.len(), len / kind.width()], rows.concat())
    }

    /// f64 values per index of the leading dimension.
    pub fn row_len(&self) -> usize {
        self.data.len() / self.dims[0].max(1)
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks(self.row_len().max(1))
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(HEADER_LEN + 8 * self.data.len());
        out.extend_from_slice(&MAGIC);
        out.extend_from_slice(&VERSION.to_le_bytes());
        out.push(self.kind.tag());
        out.push(self.dims.len() as u8);
        for i in 0..MAX_RANK {
            out.extend_from_slice(&(self.dims.get(i).copied().unwrap_or(0) as u64).to_le_bytes());
        }
        out.extend_from_slice(&[0u8; 8]);
        for v in &self.data {
            out.extend_from_slice(&v.to_le_bytes());
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        if bytes.len() < HEADER_LEN {
            return Err(CliError::format(format!("{} bytes is shorter than the header", bytes.len())));
        }
        if bytes[0..4] != MAGIC {
            return Err(CliError::format("bad magic, not an ArrayFile"));
        }
        let version = u16::from_le_bytes([bytes[4], bytes[5]]);
        if version != VERSION {
            return Err(CliError::format(format!("unsupported ArrayFile version {version}")));
        }
        let kind = match bytes[6] {
            0 => ElementKind::F64,
            1 => ElementKind::C128,
            t => return Err(CliError::format(format!("unknown element kind {t}"))),
        };
        let rank = bytes[7] as usize;
        if rank == 0 || rank > MAX_RANK {
            return Err(CliError::format(format!("rank {rank} is outside 1..={MAX_RANK}")));
        }
        let mut dims = Vec::with_capacity(rank);
        for i in 0..MAX_RANK {
            let off = 8 + 8 * i;
            let d = u64::from_le_bytes(bytes[off..off + 8].try_into().expect("8 bytes"));
            if i < rank {
                dims.push(usize::try_from(d).map_err(|_| CliError::format("dimension overflows usize"))?);
            } else if d != 0 {
                return Err(CliError::format("nonzero dimension beyond the rank"));
            }
        }
        let count = dims
            .iter()
            .try_fold(kind.width(), |acc, &d| acc.checked_mul(d))
            .ok_or_else(|| CliError::format("payload size overflows"))?;
        let payload = &bytes[HEADER_LEN..];
        if payload.len() != 8 * count {
            return Err(CliError::format(format!("payload has {} bytes, header implies {}", payload.len(), 8 * count)));
        }
        let data = payload.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes"))).collect();
        Ok(Self { kind, dims, data })
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let mut f = std::fs::File::create(path).map_err(|e| CliError::io(path, e))?;
        f.write_all(&self.to_bytes()).map_err(|e| CliError::io(path, e))
    }

    pub fn read(path: &Path) -> Result<Self> {
        let mut bytes = Vec::new();
        std::fs::File::open(path)
            .and_then(|mut f| f.read_to_end(&mut bytes))
            .map_err(|e| CliError::io(path, e))?;
        Self::from_bytes(&bytes).map_err(|e| CliError::format(format!("{}: {}", path.display(), e.message)))
    }
}
