//! Binary state snapshots.
//!
//! Layout, all little-endian: magic `QCAS`, version u32, d u32, d sizes as
//! u32, s u32, time i64, then (re, im) f64 pairs site-major with the
//! internal index fastest.

use std::io::{Read, Write};

use super::lattice::{FieldState, LatticeSpec};
use crate::cayley::CayleyPresentation;
use crate::error::{QcaError, Result};
use crate::linalg::C64;

pub const MAGIC: &[u8; 4] = b"QCAS";
pub const VERSION: u32 = 1;

pub fn write_snapshot<W: Write>(state: &FieldState, mut w: W) -> Result<()> {
    w.write_all(MAGIC)?;
    w.write_all(&VERSION.to_le_bytes())?;
    w.write_all(&(state.lattice.dimension() as u32).to_le_bytes())?;
    for &l in &state.lattice.sizes {
        w.write_all(&(l as u32).to_le_bytes())?;
    }
    w.write_all(&(state.internal_dim as u32).to_le_bytes())?;
    w.write_all(&state.time.to_le_bytes())?;
    for z in &state.amplitudes {
        w.write_all(&z.re.to_le_bytes())?;
        w.write_all(&z.im.to_le_bytes())?;
    }
    w.flush()?;
    Ok(())
}

fn read_u32<R: Read>(r: &mut R) -> Result<u32> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b)?;
    Ok(u32::from_le_bytes(b))
}

fn read_f64<R: Read>(r: &mut R) -> Result<f64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)?;
    Ok(f64::from_le_bytes(b))
}

/// Reads a snapshot. The file does not record the presentation, so the
/// caller supplies it and its dimension is checked.
pub fn read_snapshot<R: Read>(presentation: &CayleyPresentation, mut r: R) -> Result<FieldState> {
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(QcaError::Snapshot("bad magic".into()));
    }
    let version = read_u32(&mut r)?;
    if version != VERSION {
        return Err(QcaError::Snapshot(format!("unsupported version {version}")));
    }
    let d = read_u32(&mut r)? as usize;
    if d != presentation.dimension {
        return Err(QcaError::Snapshot(format!("snapshot is {d}-dimensional")));
    }
    let sizes = (0..d).map(|_| read_u32(&mut r).map(|x| x as usize)).collect::<Result<Vec<_>>>()?;
    let s = read_u32(&mut r)? as usize;
    let mut tb = [0u8; 8];
    r.read_exact(&mut tb)?;
    let time = i64::from_le_bytes(tb);
    let lattice = LatticeSpec::new(presentation.clone(), sizes)?;
    let n = lattice.sites() * s;
    let mut amplitudes = Vec::with_capacity(n);
    for _ in 0..n {
        let re = read_f64(&mut r)?;
        let im = read_f64(&mut r)?;
        amplitudes.push(C64::new(re, im));
    }
    Ok(FieldState { lattice, internal_dim: s, amplitudes, time })
}
