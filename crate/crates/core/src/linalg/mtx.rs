//! Matrix Market coordinate format (`real general`, 1-based indices).

use std::io::{BufRead, Write};

use thiserror::Error;

use super::{LinalgError, SparseMatrix};

#[derive(Debug, Error)]
pub enum MtxError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error(transparent)]
    Structure(#[from] LinalgError),
}

const HEADER: &str = "%%MatrixMarket matrix coordinate real general";

pub fn write<W: Write>(a: &SparseMatrix, mut out: W) -> Result<(), MtxError> {
    writeln!(out, "{HEADER}")?;
    writeln!(out, "{} {} {}", a.rows(), a.cols(), a.nnz())?;
    for (i, j, v) in a.triplets() {
        writeln!(out, "{} {} {:.16e}", i + 1, j + 1, v)?;
    }
    Ok(())
}

pub fn read<R: BufRead>(input: R) -> Result<SparseMatrix, MtxError> {
    let mut lines = input.lines().enumerate();
    let parse_err = |line: usize, msg: &str| MtxError::Parse {
        line: line + 1,
        msg: msg.to_string(),
    };

    let (ln, header) = lines.next().ok_or_else(|| parse_err(0, "empty file"))?;
    let header = header?;
    let fields: Vec<String> = header.split_whitespace().map(str::to_ascii_lowercase).collect();
    if fields.len() < 5 || fields[0] != "%%matrixmarket" || fields[1] != "matrix" || fields[2] != "coordinate" {
        return Err(parse_err(ln, "expected '%%MatrixMarket matrix coordinate' header"));
    }
    if fields[3] != "real" && fields[3] != "integer" {
        return Err(parse_err(ln, "only real or integer fields are supported"));
    }
    if fields[4] != "general" {
        return Err(parse_err(ln, "only general symmetry is supported"));
    }

    let mut size: Option<(usize, usize, usize)> = None;
    let mut triplets = Vec::new();
    for (ln, line) in lines {
        let line = line?;
        let t = line.trim();
        if t.is_empty() || t.starts_with('%') {
            continue;
        }
        let parts: Vec<&str> = t.split_whitespace().collect();
        match size {
            None => {
                if parts.len() != 3 {
                    return Err(parse_err(ln, "expected 'rows cols nnz'"));
                }
                let p = |s: &str| s.parse::<usize>().map_err(|_| parse_err(ln, "bad size field"));
                size = Some((p(parts[0])?, p(parts[1])?, p(parts[2])?));
                triplets.reserve(size.unwrap().2);
            }
            Some((rows, cols, _)) => {
                if parts.len() != 3 {
                    return Err(parse_err(ln, "expected 'row col value'"));
                }
                let i: usize = parts[0].parse().map_err(|_| parse_err(ln, "bad row index"))?;
                let j: usize = parts[1].parse().map_err(|_| parse_err(ln, "bad column index"))?;
                let v: f64 = parts[2].parse().map_err(|_| parse_err(ln, "bad value"))?;
                if i == 0 || j == 0 || i > rows || j > cols {
                    return Err(parse_err(ln, "index out of range"));
                }
                triplets.push((i - 1, j - 1, v));
            }
        }
    }
    let (rows, cols, nnz) = size.ok_or_else(|| parse_err(0, "missing size line"))?;
    if triplets.len() != nnz {
        return Err(MtxError::Parse {
            line: 0,
            msg: format!("expected {nnz} entries, found {}", triplets.len()),
        });
    }
    Ok(SparseMatrix::from_triplets(rows, cols, &triplets)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_is_exact() {
        let a = SparseMatrix::from_triplets(3, 2, &[(0, 0, 0.1), (2, 0, -1.0 / 3.0), (1, 1, 1e-300)]).unwrap();
        let mut buf = Vec::new();
        write(&a, &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("%%MatrixMarket matrix coordinate real general\n3 2 3\n1 1 "));
        let b = read(&buf[..]).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn comments_and_bad_input() {
        let ok = "%%MatrixMarket matrix coordinate real general\n% hi\n2 2 1\n2 1 4.5\n";
        let a = read(ok.as_bytes()).unwrap();
        assert_eq!(a.to_dense()[(1, 0)], 4.5);

        let bad = "%%MatrixMarket matrix coordinate real general\n2 2 1\n3 1 4.5\n";
        assert!(matches!(read(bad.as_bytes()), Err(MtxError::Parse { line: 3, .. })));
        let short = "%%MatrixMarket matrix coordinate real general\n2 2 2\n1 1 4.5\n";
        assert!(read(short.as_bytes()).is_err());
        assert!(read("hello\n".as_bytes()).is_err());
    }
}
