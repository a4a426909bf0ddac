//! KWF1 binary field dumps.
//!
//! Layout: the magic bytes `KWF1`, row count and column count as unsigned
//! 32-bit little-endian integers, then `rows·cols` IEEE-754 doubles in
//! little-endian, row-major order. The header is padded with four zero bytes
//! to 16 bytes. Grid fields are N×N (row = y index); mesh fields are V×1.

use std::io::{Read, Write};
use std::path::Path;

use crate::domain::{DiscreteDomain, ScalarField};
use crate::error::{Error, Result};

pub const MAGIC: [u8; 4] = *b"KWF1";
pub const HEADER_LEN: usize = 16;

pub fn write_kwf<W: Write>(mut w: W, rows: usize, cols: usize, values: &[f64]) -> Result<()> {
    if rows * cols != values.len() {
        return Err(Error::invalid(format!(
            "shape {rows}x{cols} does not match {} values",
            values.len()
        )));
    }
    let to_u32 = |v: usize| {
        u32::try_from(v).map_err(|_| Error::invalid(format!("dimension {v} exceeds u32")))
    };
    let mut header = [0u8; HEADER_LEN];
    header[..4].copy_from_slice(&MAGIC);
    header[4..8].copy_from_slice(&to_u32(rows)?.to_le_bytes());
    header[8..12].copy_from_slice(&to_u32(cols)?.to_le_bytes());
    w.write_all(&header)?;
    let mut body = Vec::with_capacity(values.len() * 8);
    for v in values {
        body.extend_from_slice(&v.to_le_bytes());
    }
    w.write_all(&body)?;
    Ok(())
}

pub fn read_kwf<R: Read>(mut r: R) -> Result<(usize, usize, Vec<f64>)> {
    let mut header = [0u8; HEADER_LEN];
    r.read_exact(&mut header)?;
    if header[..4] != MAGIC {
        return Err(Error::invalid("not a KWF1 file (bad magic)"));
    }
    let rows = u32::from_le_bytes(header[4..8].try_into().unwrap()) as usize;
    let cols = u32::from_le_bytes(header[8..12].try_into().unwrap()) as usize;
    let mut body = Vec::new();
    r.read_to_end(&mut body)?;
    if body.len() != rows * cols * 8 {
        return Err(Error::invalid(format!(
            "KWF1 body has {} bytes, expected {}",
            body.len(),
            rows * cols * 8
        )));
    }
    let values = body
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    Ok((rows, cols, values))
}

pub fn write_field(path: impl AsRef<Path>, dom: &DiscreteDomain, field: &ScalarField) -> Result<()> {
    dom.check(field)?;
    let (rows, cols) = dom.field_shape();
    let file = std::fs::File::create(path)?;
    write_kwf(std::io::BufWriter::new(file), rows, cols, field.values())
}

pub fn read_field(path: impl AsRef<Path>, dom: &DiscreteDomain) -> Result<ScalarField> {
    let file = std::fs::File::open(path)?;
    let (rows, cols, values) = read_kwf(std::io::BufReader::new(file))?;
    if (rows, cols) != dom.field_shape() {
        return Err(Error::invalid(format!(
            "field shape {rows}x{cols} does not match domain shape {:?}",
            dom.field_shape()
        )));
    }
    dom.field(values)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn header_layout_is_fixed() {
        let mut buf = Vec::new();
        write_kwf(&mut buf, 2, 1, &[1.0, -2.5]).unwrap();
        assert_eq!(&buf[..4], b"KWF1");
        assert_eq!(&buf[4..8], &[2, 0, 0, 0]);
        assert_eq!(&buf[8..12], &[1, 0, 0, 0]);
        assert_eq!(buf.len(), 16 + 16);
        assert_eq!(&buf[16..24], &1.0f64.to_le_bytes());
        let (r, c, v) = read_kwf(buf.as_slice()).unwrap();
        assert_eq!((r, c, v), (2, 1, vec![1.0, -2.5]));
    }

    #[test]
    fn rejects_bad_input() {
        assert!(write_kwf(Vec::new(), 2, 2, &[0.0]).is_err());
        let mut buf = Vec::new();
        write_kwf(&mut buf, 1, 1, &[0.0]).unwrap();
        buf[0] = b'X';
        assert!(read_kwf(buf.as_slice()).is_err());
        let mut buf = Vec::new();
        write_kwf(&mut buf, 1, 2, &[0.0, 1.0]).unwrap();
        buf.pop();
        assert!(read_kwf(buf.as_slice()).is_err());
    }
}
