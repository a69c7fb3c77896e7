use std::io::{self, Read, Write};

use nalgebra::DMatrix;

use super::Spectrum;

/// Leading bytes of a dense Fisher dump.
pub const DENSE_MAGIC: [u8; 4] = *b"FDM1";

/// Round-trip-exact decimal form (17 significant digits).
pub fn format_float(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else if x.is_nan() {
        "NaN".to_string()
    } else if x > 0.0 {
        "inf".to_string()
    } else {
        "-inf".to_string()
    }
}

/// `index,eigenvalue` rows, zero-based, nonincreasing eigenvalues.
pub fn write_spectrum_csv<W: Write>(mut out: W, spectrum: &Spectrum) -> io::Result<()> {
    writeln!(out, "index,eigenvalue")?;
    for (i, v) in spectrum.values().iter().enumerate() {
        writeln!(out, "{i},{}", format_float(*v))?;
    }
    Ok(())
}

/// 16-byte header (`FDM1`, u32 d, 8 reserved zero bytes; little endian)
/// followed by d² row-major f64 values.
pub fn write_dense_matrix<W: Write>(mut out: W, m: &DMatrix<f64>) -> io::Result<()> {
    if !m.is_square() {
        return Err(io::Error::new(io::ErrorKind::InvalidInput, "matrix is not square"));
    }
    let d = u32::try_from(m.nrows()).map_err(|_| io::Error::new(io::ErrorKind::InvalidInput, "matrix too large"))?;
    out.write_all(&DENSE_MAGIC)?;
    out.write_all(&d.to_le_bytes())?;
    out.write_all(&[0u8; 8])?;
    for r in 0..m.nrows() {
        for c in 0..m.ncols() {
            out.write_all(&m[(r, c)].to_le_bytes())?;
        }
    }
    Ok(())
}

pub fn read_dense_matrix<R: Read>(mut input: R) -> io::Result<DMatrix<f64>> {
    let mut header = [0u8; 16];
    input.read_exact(&mut header)?;
    if header[..4] != DENSE_MAGIC {
        return Err(io::Error::new(io::ErrorKind::InvalidData, "bad magic, expected FDM1"));
    }
    let d = u32::from_le_bytes(header[4..8].try_into().unwrap()) as usize;
    let mut buf = vec![0u8; d * d * 8];
    input.read_exact(&mut buf)?;
    let values: Vec<f64> = buf.chunks_exact(8).map(|b| f64::from_le_bytes(b.try_into().unwrap())).collect();
    Ok(DMatrix::from_row_slice(d, d, &values))
}
