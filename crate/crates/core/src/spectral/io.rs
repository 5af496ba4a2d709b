//! Field snapshot container and CSV export.
//!
//! Container layout (all little-endian):
//!
//! ```text
//! magic      8 bytes   b"SFPFIELD"
//! version    u32       1
//! dim        u32
//! n          u32       points per axis
//! components u32
//! length     f64       side length L
//! time       f64       snapshot time
//! samples    f64 × components × n^dim, component-major, each component row-major
//! ```

use std::io::{Read, Write};

use super::field::SpectralField;
use super::grid::Grid;
use crate::error::{Error, Result};

const MAGIC: &[u8; 8] = b"SFPFIELD";
const VERSION: u32 = 1;

pub fn write_container<W: Write>(mut w: W, field: &SpectralField, time: f64) -> Result<()> {
    let g = field.grid();
    w.write_all(MAGIC)?;
    for v in [VERSION, g.dim() as u32, g.n() as u32, field.components() as u32] {
        w.write_all(&v.to_le_bytes())?;
    }
    w.write_all(&g.length().to_le_bytes())?;
    w.write_all(&time.to_le_bytes())?;
    for c in field.all_values() {
        for v in c {
            w.write_all(&v.to_le_bytes())?;
        }
    }
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

/// Reads one snapshot; returns the field and its time stamp.
pub fn read_container<R: Read>(mut r: R) -> Result<(SpectralField, f64)> {
    let mut magic = [0u8; 8];
    r.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(Error::Format("not a field container (bad magic)".into()));
    }
    let version = read_u32(&mut r)?;
    if version != VERSION {
        return Err(Error::Format(format!("unsupported container version {version}")));
    }
    let dim = read_u32(&mut r)? as usize;
    let n = read_u32(&mut r)? as usize;
    let components = read_u32(&mut r)? as usize;
    let length = read_f64(&mut r)?;
    let time = read_f64(&mut r)?;
    let grid = Grid::new(dim, n, length)?;
    if components == 0 || components > 2 {
        return Err(Error::Format(format!("bad component count {components}")));
    }
    let mut values = Vec::with_capacity(components);
    for _ in 0..components {
        let mut c = Vec::with_capacity(grid.len());
        for _ in 0..grid.len() {
            c.push(read_f64(&mut r)?);
        }
        values.push(c);
    }
    Ok((SpectralField::from_values(grid, values)?, time))
}

/// One node per row: coordinates then component values.
pub fn write_csv<W: Write>(mut w: W, field: &SpectralField) -> Result<()> {
    let g = field.grid();
    let coords = if g.dim() == 1 { "x" } else { "x,y" };
    let comps: Vec<String> = (0..field.components()).map(|c| format!("v{c}")).collect();
    writeln!(w, "{coords},{}", comps.join(","))?;
    for i in 0..g.len() {
        let x = g.coords(i);
        let mut line = if g.dim() == 1 { format!("{:.17e}", x[0]) } else { format!("{:.17e},{:.17e}", x[0], x[1]) };
        for c in 0..field.components() {
            line.push_str(&format!(",{:.17e}", field.values(c)[i]));
        }
        writeln!(w, "{line}")?;
    }
    Ok(())
}
