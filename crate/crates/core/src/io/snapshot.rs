//! `GSF1` snapshot files.
//!
//! Layout, all little-endian:
//!
//! | offset | size | field |
//! |--------|------|-------|
//! | 0  | 4 | magic `GSF1` |
//! | 4  | 4 | `nx` (u32) |
//! | 8  | 4 | `ny` (u32) |
//! | 12 | 8 | `step` (u64) |
//! | 20 | 8 | `dt` (f64) |
//! | 28 | 8·nx·ny | `u`, row-major f64 |
//! | …  | 8·nx·ny | `v`, row-major f64 |

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::grid::Field;
use crate::integrator::SimState;

pub const MAGIC: &[u8; 4] = b"GSF1";
pub const HEADER_LEN: usize = 28;

/// Exact file size for an `nx × ny` snapshot, or `None` on overflow.
pub fn snapshot_len(nx: usize, ny: usize) -> Option<usize> {
    nx.checked_mul(ny)?.checked_mul(16)?.checked_add(HEADER_LEN)
}

pub fn encode_snapshot(s: &SimState) -> Result<Vec<u8>> {
    let (nx, ny) = (s.nx(), s.ny());
    let too_big = || Error::Format(format!("grid {nx}x{ny} does not fit the snapshot header"));
    let nx32 = u32::try_from(nx).map_err(|_| too_big())?;
    let ny32 = u32::try_from(ny).map_err(|_| too_big())?;
    let len = snapshot_len(nx, ny).ok_or_else(too_big)?;

    let mut out = Vec::with_capacity(len);
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&nx32.to_le_bytes());
    out.extend_from_slice(&ny32.to_le_bytes());
    out.extend_from_slice(&s.step.to_le_bytes());
    out.extend_from_slice(&s.dt.to_le_bytes());
    for x in s.u.data().iter().chain(s.v.data()) {
        out.extend_from_slice(&x.to_le_bytes());
    }
    Ok(out)
}

pub fn decode_snapshot(bytes: &[u8]) -> Result<SimState> {
    if bytes.len() < HEADER_LEN {
        return Err(Error::Format(format!(
            "truncated header: {} bytes, need {HEADER_LEN}",
            bytes.len()
        )));
    }
    if &bytes[..4] != MAGIC {
        return Err(Error::Format(format!("bad magic {:?}", &bytes[..4])));
    }
    let nx = u32::from_le_bytes(bytes[4..8].try_into().unwrap()) as usize;
    let ny = u32::from_le_bytes(bytes[8..12].try_into().unwrap()) as usize;
    let step = u64::from_le_bytes(bytes[12..20].try_into().unwrap());
    let dt = f64::from_le_bytes(bytes[20..28].try_into().unwrap());
    if nx == 0 || ny == 0 {
        return Err(Error::Format(format!("empty grid {nx}x{ny}")));
    }
    let expected = snapshot_len(nx, ny)
        .ok_or_else(|| Error::Format(format!("grid {nx}x{ny} overflows the address space")))?;
    if bytes.len() != expected {
        return Err(Error::Format(format!(
            "expected {expected} bytes for a {nx}x{ny} snapshot, found {}",
            bytes.len()
        )));
    }
    let cells = nx * ny;
    let mut values = bytes[HEADER_LEN..]
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()));
    let u: Vec<f64> = values.by_ref().take(cells).collect();
    let v: Vec<f64> = values.collect();
    SimState::new(Field::new(nx, ny, u)?, Field::new(nx, ny, v)?, step, dt)
}

pub fn write_snapshot(s: &SimState, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let bytes = encode_snapshot(s)?;
    fs::write(path, bytes).map_err(|e| Error::io("writing snapshot", path, e))
}

pub fn read_snapshot(path: impl AsRef<Path>) -> Result<SimState> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io("reading snapshot", path, e))?;
    decode_snapshot(&bytes)
}
