//! Binary snapshot files.
//!
//! Layout, all little-endian: magic `FMHD`, version `u32`, `d: u32`, `M: u32`,
//! `L: f64`, `c: u32`, `real_valued: u8`, then `c * M^d` coefficients as
//! `(re: f64, im: f64)` in `(component, mode)` order with modes row-major in
//! FFT order. Coefficients follow the forward transform scaled by `M^-d`,
//! so the plain inverse FFT reproduces grid values.

use std::io::{Read, Write};
use std::path::Path;

use rustfft::num_complex::Complex64;

use crate::error::{Error, Result};
use crate::field::SpectralField;
use crate::grid::GridSpec;

pub const MAGIC: &[u8; 4] = b"FMHD";
pub const VERSION: u32 = 1;

pub fn write_to(w: &mut impl Write, f: &SpectralField) -> Result<()> {
    let g = f.grid();
    w.write_all(MAGIC)?;
    w.write_all(&VERSION.to_le_bytes())?;
    w.write_all(&(g.d as u32).to_le_bytes())?;
    w.write_all(&(g.m as u32).to_le_bytes())?;
    w.write_all(&g.l.to_le_bytes())?;
    w.write_all(&(f.ncomp() as u32).to_le_bytes())?;
    w.write_all(&[f.real_valued() as u8])?;
    let mut buf = Vec::with_capacity(16 * f.coeffs().len());
    for c in f.coeffs() {
        buf.extend_from_slice(&c.re.to_le_bytes());
        buf.extend_from_slice(&c.im.to_le_bytes());
    }
    w.write_all(&buf)?;
    Ok(())
}

fn read_u32(r: &mut impl Read) -> Result<u32> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b)?;
    Ok(u32::from_le_bytes(b))
}

pub fn read_from(r: &mut impl Read) -> Result<SpectralField> {
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(Error::Format("bad magic".into()));
    }
    let version = read_u32(r)?;
    if version != VERSION {
        return Err(Error::Format(format!("unsupported version {version}")));
    }
    let d = read_u32(r)? as usize;
    let m = read_u32(r)? as usize;
    let mut lb = [0u8; 8];
    r.read_exact(&mut lb)?;
    let l = f64::from_le_bytes(lb);
    let c = read_u32(r)? as usize;
    let mut flag = [0u8; 1];
    r.read_exact(&mut flag)?;
    let grid = GridSpec::new(d, m, l).map_err(|e| Error::Format(e.to_string()))?;
    if c == 0 || c > 9 {
        return Err(Error::Format(format!("component count {c}")));
    }
    let count = c * grid.len();
    let mut raw = vec![0u8; 16 * count];
    r.read_exact(&mut raw)?;
    let coeffs = raw
        .chunks_exact(16)
        .map(|ch| {
            let re = f64::from_le_bytes(ch[..8].try_into().unwrap());
            let im = f64::from_le_bytes(ch[8..].try_into().unwrap());
            Complex64::new(re, im)
        })
        .collect();
    let mut rest = Vec::new();
    r.read_to_end(&mut rest)?;
    if !rest.is_empty() {
        return Err(Error::Format(format!("{} trailing bytes", rest.len())));
    }
    SpectralField::from_coeffs(grid, c, coeffs, flag[0] != 0)
}

pub fn save(path: impl AsRef<Path>, f: &SpectralField) -> Result<()> {
    let mut file = std::io::BufWriter::new(std::fs::File::create(path)?);
    write_to(&mut file, f)?;
    file.flush()?;
    Ok(())
}

pub fn load(path: impl AsRef<Path>) -> Result<SpectralField> {
    let mut file = std::io::BufReader::new(std::fs::File::open(path)?);
    read_from(&mut file)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::random_field;

    #[test]
    fn roundtrip_bitwise() {
        let g = GridSpec::new(3, 4, 0.75).unwrap();
        let f = random_field(g, 9, 1.5, 2, 8);
        let mut buf = Vec::new();
        write_to(&mut buf, &f).unwrap();
        assert_eq!(&buf[..4], b"FMHD");
        assert_eq!(buf.len(), 4 + 4 + 4 + 4 + 8 + 4 + 1 + 16 * 9 * 64);
        let back = read_from(&mut buf.as_slice()).unwrap();
        assert_eq!(back, f);
    }

    #[test]
    fn rejects_garbage() {
        assert!(read_from(&mut &b"NOPE0000"[..]).is_err());
        let g = GridSpec::new(2, 4, 1.0).unwrap();
        let mut buf = Vec::new();
        write_to(&mut buf, &SpectralField::zeros(g, 1)).unwrap();
        buf.pop();
        assert!(read_from(&mut buf.as_slice()).is_err());
    }
}
