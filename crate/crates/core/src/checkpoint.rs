//! Binary checkpoints of the spectral state.
//!
//! Layout (little endian): magic `MKDVCKPT`, `u32` version, `u64` mode count,
//! `f64` period, `f64` time, `f64` phase, then `n` pairs of `f64` (re, im).

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::torus::{SpectralField, TorusGrid};

pub const MAGIC: &[u8; 8] = b"MKDVCKPT";
pub const VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub field: SpectralField,
    pub t: f64,
    pub phase: f64,
}

impl Checkpoint {
    pub fn to_bytes(&self) -> Vec<u8> {
        let g = self.field.grid();
        let mut out = Vec::with_capacity(44 + 16 * g.n_modes());
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&VERSION.to_le_bytes());
        out.extend_from_slice(&(g.n_modes() as u64).to_le_bytes());
        out.extend_from_slice(&g.period().to_le_bytes());
        out.extend_from_slice(&self.t.to_le_bytes());
        out.extend_from_slice(&self.phase.to_le_bytes());
        for c in self.field.coeffs() {
            out.extend_from_slice(&c.re.to_le_bytes());
            out.extend_from_slice(&c.im.to_le_bytes());
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut r = bytes;
        let mut magic = [0u8; 8];
        r.read_exact(&mut magic).map_err(|_| Error::Format("truncated checkpoint header".into()))?;
        if &magic != MAGIC {
            return Err(Error::Format("not a checkpoint file (bad magic)".into()));
        }
        let version = u32::from_le_bytes(take(&mut r)?);
        if version != VERSION {
            return Err(Error::Format(format!("unsupported checkpoint version {version}")));
        }
        let n = u64::from_le_bytes(take(&mut r)?) as usize;
        let period = f64::from_le_bytes(take(&mut r)?);
        let t = f64::from_le_bytes(take(&mut r)?);
        let phase = f64::from_le_bytes(take(&mut r)?);
        let grid = TorusGrid::new(period, n).map_err(|e| Error::Format(format!("checkpoint grid: {e}")))?;
        if r.len() != 16 * n {
            return Err(Error::Format(format!(
                "checkpoint payload has {} bytes, expected {}",
                r.len(),
                16 * n
            )));
        }
        let mut coeffs = Vec::with_capacity(n);
        for _ in 0..n {
            let re = f64::from_le_bytes(take(&mut r)?);
            let im = f64::from_le_bytes(take(&mut r)?);
            coeffs.push(Complex64::new(re, im));
        }
        let field = SpectralField::from_coeffs(grid, coeffs)?;
        Ok(Self { field, t, phase })
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let mut w = BufWriter::new(File::create(path)?);
        w.write_all(&self.to_bytes())?;
        w.flush()?;
        Ok(())
    }

    pub fn read(path: &Path) -> Result<Self> {
        let mut buf = Vec::new();
        BufReader::new(File::open(path)?).read_to_end(&mut buf)?;
        Self::from_bytes(&buf)
    }
}

fn take<const N: usize>(r: &mut &[u8]) -> Result<[u8; N]> {
    let mut b = [0u8; N];
    r.read_exact(&mut b).map_err(|_| Error::Format("truncated checkpoint".into()))?;
    Ok(b)
}
