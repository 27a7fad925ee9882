//! Raw grid file format.
//!
//! Header: magic `HPVX`, version u16, dims 3×u32, spacing f64, origin 3×f64,
//! all little-endian. Version 1 is followed by `ceil(n/8)` bytes of
//! occupancy (bit k of the grid is bit `k % 8` of byte `k / 8`, x fastest).
//! Version 2 carries the same header followed by `n` little-endian u32 counts
//! and is used for overlap fields.

use std::io::{Read, Write};

use super::{GridSpec, VoxelSolid};
use crate::error::{Error, Result};

pub const GRID_MAGIC: &[u8; 4] = b"HPVX";
const VERSION_OCCUPANCY: u16 = 1;
const VERSION_COUNTS: u16 = 2;

fn write_header(w: &mut impl Write, version: u16, grid: &GridSpec) -> Result<()> {
    w.write_all(GRID_MAGIC)?;
    w.write_all(&version.to_le_bytes())?;
    for d in grid.dims {
        let d = u32::try_from(d).map_err(|_| Error::Format(format!("dimension {d} exceeds u32")))?;
        w.write_all(&d.to_le_bytes())?;
    }
    w.write_all(&grid.spacing.to_le_bytes())?;
    for o in grid.origin {
        w.write_all(&o.to_le_bytes())?;
    }
    Ok(())
}

fn read_exact(r: &mut impl Read, buf: &mut [u8], what: &str) -> Result<()> {
    r.read_exact(buf).map_err(|e| match e.kind() {
        std::io::ErrorKind::UnexpectedEof => Error::Format(format!("truncated {what}")),
        _ => Error::Io(e),
    })
}

fn read_header(r: &mut impl Read) -> Result<(u16, GridSpec)> {
    let mut magic = [0u8; 4];
    read_exact(r, &mut magic, "header")?;
    if &magic != GRID_MAGIC {
        return Err(Error::Format(format!("bad magic {magic:?}")));
    }
    let mut b2 = [0u8; 2];
    read_exact(r, &mut b2, "header")?;
    let version = u16::from_le_bytes(b2);
    let mut b4 = [0u8; 4];
    let mut dims = [0usize; 3];
    for d in &mut dims {
        read_exact(r, &mut b4, "header")?;
        *d = u32::from_le_bytes(b4) as usize;
    }
    let mut b8 = [0u8; 8];
    read_exact(r, &mut b8, "header")?;
    let spacing = f64::from_le_bytes(b8);
    let mut origin = [0f64; 3];
    for o in &mut origin {
        read_exact(r, &mut b8, "header")?;
        *o = f64::from_le_bytes(b8);
    }
    let grid = GridSpec::new(dims, spacing, origin).map_err(|e| Error::Format(e.to_string()))?;
    Ok((version, grid))
}

pub fn write_solid(w: &mut impl Write, s: &VoxelSolid) -> Result<()> {
    write_header(w, VERSION_OCCUPANCY, s.grid())?;
    let nbytes = s.grid().len().div_ceil(8);
    let bytes: Vec<u8> = s.words().iter().flat_map(|w| w.to_le_bytes()).take(nbytes).collect();
    w.write_all(&bytes)?;
    Ok(())
}

pub fn read_solid(r: &mut impl Read) -> Result<VoxelSolid> {
    let (version, grid) = read_header(r)?;
    if version != VERSION_OCCUPANCY {
        return Err(Error::Format(format!("expected occupancy grid (version 1), got version {version}")));
    }
    let mut bytes = vec![0u8; grid.len().div_ceil(8)];
    read_exact(r, &mut bytes, "occupancy payload")?;
    let words = bytes
        .chunks(8)
        .map(|c| {
            let mut w = [0u8; 8];
            w[..c.len()].copy_from_slice(c);
            u64::from_le_bytes(w)
        })
        .collect();
    Ok(VoxelSolid::from_words(grid, words))
}

pub fn write_counts(w: &mut impl Write, grid: &GridSpec, counts: &[u32]) -> Result<()> {
    if counts.len() != grid.len() {
        return Err(Error::InvalidArgument(format!("{} counts for a grid of {} cells", counts.len(), grid.len())));
    }
    write_header(w, VERSION_COUNTS, grid)?;
    let bytes: Vec<u8> = counts.iter().flat_map(|c| c.to_le_bytes()).collect();
    w.write_all(&bytes)?;
    Ok(())
}

pub fn read_counts(r: &mut impl Read) -> Result<(GridSpec, Vec<u32>)> {
    let (version, grid) = read_header(r)?;
    if version != VERSION_COUNTS {
        return Err(Error::Format(format!("expected count field (version 2), got version {version}")));
    }
    let mut bytes = vec![0u8; grid.len() * 4];
    read_exact(r, &mut bytes, "count payload")?;
    let counts = bytes.chunks_exact(4).map(|c| u32::from_le_bytes([c[0], c[1], c[2], c[3]])).collect();
    Ok((grid, counts))
}
