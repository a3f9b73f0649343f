//! Matrix serialization: JSON (nested row arrays, complex entries as
//! `[re, im]` pairs) and headerless row-major CSV.

use std::io::{BufRead, Write};
use std::path::Path;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::{Error, Result};

pub fn matrix_to_rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..m.nrows())
        .map(|r| (0..m.ncols()).map(|c| m[(r, c)]).collect())
        .collect()
}

pub fn rows_to_matrix(rows: &[Vec<f64>]) -> Result<DMatrix<f64>> {
    let nr = rows.len();
    if nr == 0 {
        return Err(Error::Parse("empty matrix".into()));
    }
    let nc = rows[0].len();
    if rows.iter().any(|r| r.len() != nc) {
        return Err(Error::Parse("ragged matrix rows".into()));
    }
    Ok(DMatrix::from_fn(nr, nc, |r, c| rows[r][c]))
}

pub fn cmatrix_to_rows(m: &DMatrix<Complex64>) -> Vec<Vec<[f64; 2]>> {
    (0..m.nrows())
        .map(|r| {
            (0..m.ncols())
                .map(|c| {
                    let z = m[(r, c)];
                    [z.re, z.im]
                })
                .collect()
        })
        .collect()
}

pub fn rows_to_cmatrix(rows: &[Vec<[f64; 2]>]) -> Result<DMatrix<Complex64>> {
    let nr = rows.len();
    if nr == 0 {
        return Err(Error::Parse("empty matrix".into()));
    }
    let nc = rows[0].len();
    if rows.iter().any(|r| r.len() != nc) {
        return Err(Error::Parse("ragged matrix rows".into()));
    }
    Ok(DMatrix::from_fn(nr, nc, |r, c| {
        Complex64::new(rows[r][c][0], rows[r][c][1])
    }))
}

/// Serde adaptor: real matrix as nested row arrays.
pub mod mat_serde {
    use super::*;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(
        m: &DMatrix<f64>,
        s: S,
    ) -> std::result::Result<S::Ok, S::Error> {
        matrix_to_rows(m).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(
        d: D,
    ) -> std::result::Result<DMatrix<f64>, D::Error> {
        let rows = Vec::<Vec<f64>>::deserialize(d)?;
        rows_to_matrix(&rows).map_err(serde::de::Error::custom)
    }
}

/// Serde adaptor: complex matrix as nested `[re, im]` arrays.
pub mod cmat_serde {
    use super::*;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(
        m: &DMatrix<Complex64>,
        s: S,
    ) -> std::result::Result<S::Ok, S::Error> {
        cmatrix_to_rows(m).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(
        d: D,
    ) -> std::result::Result<DMatrix<Complex64>, D::Error> {
        let rows = Vec::<Vec<[f64; 2]>>::deserialize(d)?;
        rows_to_cmatrix(&rows).map_err(serde::de::Error::custom)
    }
}

pub fn write_matrix_csv<W: Write>(mut w: W, m: &DMatrix<f64>) -> Result<()> {
    for r in 0..m.nrows() {
        let row: Vec<String> = (0..m.ncols()).map(|c| format!("{:?}", m[(r, c)])).collect();
        writeln!(w, "{}", row.join(","))?;
    }
    Ok(())
}

pub fn read_matrix_csv<R: BufRead>(r: R) -> Result<DMatrix<f64>> {
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for line in r.lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let row = line
            .split(',')
            .map(|t| {
                t.trim()
                    .parse::<f64>()
                    .map_err(|e| Error::Parse(format!("bad csv number {t:?}: {e}")))
            })
            .collect::<Result<Vec<f64>>>()?;
        rows.push(row);
    }
    rows_to_matrix(&rows)
}

pub fn write_matrix_csv_file(path: &Path, m: &DMatrix<f64>) -> Result<()> {
    let f = std::fs::File::create(path)?;
    write_matrix_csv(std::io::BufWriter::new(f), m)
}

pub fn read_matrix_csv_file(path: &Path) -> Result<DMatrix<f64>> {
    let f = std::fs::File::open(path)?;
    read_matrix_csv(std::io::BufReader::new(f))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_round_trip() {
        let m = DMatrix::<f64>::from_row_slice(2, 3, &[1.5, -2.0, 0.25, 1e-17, 3.0, -0.125]);
        let mut buf = Vec::new();
        write_matrix_csv(&mut buf, &m).unwrap();
        let back = read_matrix_csv(buf.as_slice()).unwrap();
        assert_eq!(back, m);
    }
}
