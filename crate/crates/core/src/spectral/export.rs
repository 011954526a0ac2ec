//! Plot-ready files for spectra and eigenvectors.
//!
//! CSV files start with `#`-prefixed `key=value` metadata lines followed by a
//! header row. Eigenvector blobs are a little-endian `u64` header length, a
//! JSON header, then `rows·cols` complex entries as `(re, im)` `f64` pairs in
//! column-major order (one eigenvector after another).

use std::io::{self, Read, Write};

use ndarray::Array2;
use num_complex::Complex64 as c64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub fn write_metadata<W: Write>(w: &mut W, meta: &[(&str, String)]) -> io::Result<()> {
    for (k, v) in meta {
        writeln!(w, "# {k}={v}")?;
    }
    Ok(())
}

/// Columns `index,re,im`.
pub fn write_spectrum_csv<W: Write>(
    w: &mut W,
    eigenvalues: &[c64],
    meta: &[(&str, String)],
) -> io::Result<()> {
    write_metadata(w, meta)?;
    writeln!(w, "index,re,im")?;
    for (i, e) in eigenvalues.iter().enumerate() {
        writeln!(w, "{i},{},{}", e.re, e.im)?;
    }
    Ok(())
}

pub fn read_spectrum_csv<R: Read>(r: R) -> Result<Vec<c64>> {
    let mut text = String::new();
    io::BufReader::new(r).read_to_string(&mut text)?;
    let mut lines = text.lines().filter(|l| !l.starts_with('#'));
    match lines.next() {
        Some("index,re,im") => {}
        other => return Err(Error::Config(format!("unexpected spectrum header {other:?}"))),
    }
    lines
        .map(|line| {
            let cols: Vec<&str> = line.split(',').collect();
            let parse = |s: &str| {
                s.parse::<f64>()
                    .map_err(|e| Error::Config(format!("bad number {s:?}: {e}")))
            };
            if cols.len() != 3 {
                return Err(Error::Config(format!("bad spectrum row {line:?}")));
            }
            Ok(c64::new(parse(cols[1])?, parse(cols[2])?))
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MatrixHeader {
    pub dims: [usize; 2],
    pub dtype: String,
    pub order: String,
    pub param_hash: String,
}

pub fn write_matrix_blob<W: Write>(w: &mut W, m: &Array2<c64>, param_hash: &str) -> Result<()> {
    let header = MatrixHeader {
        dims: [m.nrows(), m.ncols()],
        dtype: "complex128-le".into(),
        order: "column-major".into(),
        param_hash: param_hash.into(),
    };
    let json = serde_json::to_vec(&header)?;
    w.write_all(&(json.len() as u64).to_le_bytes())?;
    w.write_all(&json)?;
    for col in m.columns() {
        for z in col {
            w.write_all(&z.re.to_le_bytes())?;
            w.write_all(&z.im.to_le_bytes())?;
        }
    }
    Ok(())
}

pub fn read_matrix_blob<R: Read>(r: &mut R) -> Result<(MatrixHeader, Array2<c64>)> {
    let mut len = [0u8; 8];
    r.read_exact(&mut len)?;
    let mut json = vec![0u8; u64::from_le_bytes(len) as usize];
    r.read_exact(&mut json)?;
    let header: MatrixHeader = serde_json::from_slice(&json)?;
    let [rows, cols] = header.dims;
    let mut m = Array2::zeros((rows, cols));
    let mut buf = [0u8; 16];
    for c in 0..cols {
        for rr in 0..rows {
            r.read_exact(&mut buf)?;
            let re = f64::from_le_bytes(buf[..8].try_into().expect("8 bytes"));
            let im = f64::from_le_bytes(buf[8..].try_into().expect("8 bytes"));
            m[[rr, c]] = c64::new(re, im);
        }
    }
    Ok((header, m))
}
