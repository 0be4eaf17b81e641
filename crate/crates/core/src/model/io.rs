//! Plain-text matrix and vector formats shared by the CLI tools.
//!
//! A matrix file starts with a line `m N` followed by `m` lines of `N`
//! space-separated decimals; a vector file starts with `N` followed by one
//! line of entries. Values are written in shortest round-trip form, so a
//! write/read cycle is lossless.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::{DenseMatrix, Error, Float, Result, SignalVector};

/// Writes a matrix in the `m N` header format.
pub fn write_matrix<F: Float, W: Write>(w: &mut W, a: &DenseMatrix<F>) -> Result<()> {
    writeln!(w, "{} {}", a.rows(), a.cols())?;
    for i in 0..a.rows() {
        let row = a.row(i);
        for (j, v) in row.iter().enumerate() {
            if j > 0 {
                write!(w, " ")?;
            }
            write!(w, "{v}")?;
        }
        writeln!(w)?;
    }
    Ok(())
}

/// Writes a vector in the `N` header format.
pub fn write_vector<F: Float, W: Write>(w: &mut W, z: &[F]) -> Result<()> {
    writeln!(w, "{}", z.len())?;
    for (j, v) in z.iter().enumerate() {
        if j > 0 {
            write!(w, " ")?;
        }
        write!(w, "{v}")?;
    }
    writeln!(w)?;
    Ok(())
}

fn parse_tokens<F: Float>(line: &str, expected: usize, what: &str) -> Result<Vec<F>> {
    let vals: Vec<F> = line
        .split_whitespace()
        .map(|t| {
            t.parse::<F>()
                .map_err(|_| Error::Parse(format!("bad {what} entry {t:?}")))
        })
        .collect::<Result<_>>()?;
    if vals.len() != expected {
        return Err(Error::Parse(format!(
            "{what} line has {} entries, expected {expected}",
            vals.len()
        )));
    }
    Ok(vals)
}

fn read_dims(line: &str, want: usize) -> Result<Vec<usize>> {
    let dims: Vec<usize> = line
        .split_whitespace()
        .map(|t| {
            t.parse::<usize>()
                .map_err(|_| Error::Parse(format!("bad dimension {t:?}")))
        })
        .collect::<Result<_>>()?;
    if dims.len() != want {
        return Err(Error::Parse(format!(
            "header has {} fields, expected {want}",
            dims.len()
        )));
    }
    Ok(dims)
}

/// Reads a matrix written by [`write_matrix`].
pub fn read_matrix<F: Float, R: Read>(r: R) -> Result<DenseMatrix<F>> {
    let mut lines = BufReader::new(r).lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::Parse("empty matrix file".into()))??;
    let dims = read_dims(&header, 2)?;
    let (m, n) = (dims[0], dims[1]);
    let mut data = Vec::with_capacity(m * n);
    for i in 0..m {
        let line = lines
            .next()
            .ok_or_else(|| Error::Parse(format!("matrix row {i} missing")))??;
        data.extend(parse_tokens::<F>(&line, n, "matrix")?);
    }
    DenseMatrix::new(m, n, data)
}

/// Reads a vector written by [`write_vector`].
pub fn read_vector<F: Float, R: Read>(r: R) -> Result<SignalVector<F>> {
    let mut lines = BufReader::new(r).lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::Parse("empty vector file".into()))??;
    let n = read_dims(&header, 1)?[0];
    let line = lines
        .next()
        .ok_or_else(|| Error::Parse("vector entries missing".into()))??;
    SignalVector::new(parse_tokens::<F>(&line, n, "vector")?)
}

/// Writes a matrix to a file path.
pub fn save_matrix<F: Float, P: AsRef<Path>>(path: P, a: &DenseMatrix<F>) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    write_matrix(&mut w, a)
}

/// Reads a matrix from a file path.
pub fn load_matrix<F: Float, P: AsRef<Path>>(path: P) -> Result<DenseMatrix<F>> {
    read_matrix(File::open(path)?)
}

/// Writes a vector to a file path.
pub fn save_vector<F: Float, P: AsRef<Path>>(path: P, z: &[F]) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    write_vector(&mut w, z)
}

/// Reads a vector from a file path.
pub fn load_vector<F: Float, P: AsRef<Path>>(path: P) -> Result<SignalVector<F>> {
    read_vector(File::open(path)?)
}
