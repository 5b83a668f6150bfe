//! Reading and writing dense matrices: Matrix Market, headerless CSV, raw binary.
//!
//! The binary layout is `u64 n_rows`, `u64 n_cols`, then `n_rows * n_cols`
//! `f64` values in row-major order, all little-endian.

use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::matrix::{is_zero, DenseMatrix};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Format {
    Mtx,
    Csv,
    Bin,
}

impl Format {
    pub fn name(self) -> &'static str {
        match self {
            Format::Mtx => "mtx",
            Format::Csv => "csv",
            Format::Bin => "bin",
        }
    }

    /// Guesses the format from a file extension.
    pub fn from_path(path: &Path) -> Option<Self> {
        let ext = path.extension()?.to_str()?.to_ascii_lowercase();
        match ext.as_str() {
            "mtx" | "mm" => Some(Format::Mtx),
            "csv" | "txt" => Some(Format::Csv),
            "bin" | "raw" => Some(Format::Bin),
            _ => None,
        }
    }
}

impl fmt::Display for Format {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "mtx" => Ok(Format::Mtx),
            "csv" => Ok(Format::Csv),
            "bin" => Ok(Format::Bin),
            _ => Err(Error::InvalidArgument(format!(
                "unknown matrix format '{s}'"
            ))),
        }
    }
}

fn resolve(path: &Path, format: Option<Format>) -> Result<Format> {
    format.or_else(|| Format::from_path(path)).ok_or_else(|| {
        Error::InvalidArgument(format!(
            "cannot tell the format of {}; pass one explicitly",
            path.display()
        ))
    })
}

pub fn read_matrix(path: &Path, format: Option<Format>) -> Result<DenseMatrix> {
    let format = resolve(path, format)?;
    read_from(BufReader::new(File::open(path)?), format)
}

pub fn write_matrix(path: &Path, m: &DenseMatrix, format: Option<Format>) -> Result<()> {
    let format = resolve(path, format)?;
    let mut w = BufWriter::new(File::create(path)?);
    write_to(&mut w, m, format)?;
    w.flush()?;
    Ok(())
}

pub fn read_from<R: BufRead>(r: R, format: Format) -> Result<DenseMatrix> {
    match format {
        Format::Mtx => read_mtx(r),
        Format::Csv => read_csv(r),
        Format::Bin => read_bin(r),
    }
}

pub fn write_to<W: Write>(w: &mut W, m: &DenseMatrix, format: Format) -> Result<()> {
    match format {
        Format::Mtx => write_mtx(w, m),
        Format::Csv => write_csv(w, m),
        Format::Bin => write_bin(w, m),
    }
}

fn malformed(msg: impl Into<String>) -> Error {
    Error::MalformedInput(msg.into())
}

fn parse_f64(tok: &str, line: usize) -> Result<f64> {
    tok.trim()
        .parse::<f64>()
        .map_err(|_| malformed(format!("line {line}: '{tok}' is not a number")))
}

fn read_csv<R: BufRead>(r: R) -> Result<DenseMatrix> {
    let mut entries = Vec::new();
    let (mut rows, mut cols) = (0usize, None);
    for (i, line) in r.lines().enumerate() {
        let line = line?;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let start = entries.len();
        for tok in line.split(',') {
            entries.push(parse_f64(tok, i + 1)?);
        }
        let n = entries.len() - start;
        match cols {
            None => cols = Some(n),
            Some(c) if c != n => {
                return Err(Error::DimensionMismatch {
                    expected: c,
                    actual: n,
                })
            }
            _ => {}
        }
        rows += 1;
    }
    let cols = cols.ok_or_else(|| malformed("empty CSV input"))?;
    DenseMatrix::new(rows, cols, entries)
}

fn write_csv<W: Write>(w: &mut W, m: &DenseMatrix) -> Result<()> {
    for r in 0..m.n_rows() {
        let row = m.row(r);
        for (c, v) in row.iter().enumerate() {
            if c > 0 {
                w.write_all(b",")?;
            }
            write!(w, "{v}")?;
        }
        w.write_all(b"\n")?;
    }
    Ok(())
}

#[derive(PartialEq)]
enum Symmetry {
    General,
    Symmetric,
    Skew,
}

fn read_mtx<R: BufRead>(r: R) -> Result<DenseMatrix> {
    let mut lines = r.lines().enumerate();
    let (_, header) = lines
        .next()
        .ok_or_else(|| malformed("empty Matrix Market input"))?;
    let header = header?.to_ascii_lowercase();
    let fields: Vec<&str> = header.split_whitespace().collect();
    if fields.len() < 5 || fields[0] != "%%matrixmarket" || fields[1] != "matrix" {
        return Err(malformed("missing %%MatrixMarket matrix header"));
    }
    let coordinate = match fields[2] {
        "coordinate" => true,
        "array" => false,
        f => return Err(malformed(format!("unsupported Matrix Market layout '{f}'"))),
    };
    let pattern = match fields[3] {
        "real" | "double" | "integer" => false,
        "pattern" if coordinate => true,
        f => return Err(malformed(format!("unsupported Matrix Market field '{f}'"))),
    };
    let symmetry = match fields[4] {
        "general" => Symmetry::General,
        "symmetric" => Symmetry::Symmetric,
        "skew-symmetric" => Symmetry::Skew,
        f => {
            return Err(malformed(format!(
                "unsupported Matrix Market symmetry '{f}'"
            )))
        }
    };

    let mut data = lines.filter_map(|(i, l)| match l {
        Ok(l) if l.trim().is_empty() || l.trim_start().starts_with('%') => None,
        other => Some((i + 1, other)),
    });
    let (line_no, size) = data.next().ok_or_else(|| malformed("missing size line"))?;
    let size = size?;
    let dims: Vec<usize> = size
        .split_whitespace()
        .map(|t| {
            t.parse()
                .map_err(|_| malformed(format!("line {line_no}: bad size '{t}'")))
        })
        .collect::<Result<_>>()?;
    let (n, m) = match dims.as_slice() {
        [n, m, _] if coordinate => (*n, *m),
        [n, m] if !coordinate => (*n, *m),
        _ => return Err(malformed(format!("line {line_no}: bad size line"))),
    };
    if symmetry != Symmetry::General && n != m {
        return Err(malformed("symmetric matrix must be square"));
    }
    let total = n
        .checked_mul(m)
        .ok_or_else(|| malformed("matrix dimensions overflow"))?;
    let mut entries = vec![0.0; total];

    if coordinate {
        let nnz = dims[2];
        let mut seen = 0usize;
        for (line_no, line) in data {
            let line = line?;
            let t: Vec<&str> = line.split_whitespace().collect();
            let want = if pattern { 2 } else { 3 };
            if t.len() != want {
                return Err(malformed(format!("line {line_no}: expected {want} fields")));
            }
            let idx = |s: &str, lim: usize| -> Result<usize> {
                s.parse::<usize>()
                    .ok()
                    .filter(|&v| (1..=lim).contains(&v))
                    .map(|v| v - 1)
                    .ok_or_else(|| malformed(format!("line {line_no}: index '{s}' out of range")))
            };
            let (i, j) = (idx(t[0], n)?, idx(t[1], m)?);
            let v = if pattern {
                1.0
            } else {
                parse_f64(t[2], line_no)?
            };
            entries[i * m + j] += v;
            if i != j {
                match symmetry {
                    Symmetry::General => {}
                    Symmetry::Symmetric => entries[j * m + i] += v,
                    Symmetry::Skew => entries[j * m + i] -= v,
                }
            }
            seen += 1;
        }
        if seen != nnz {
            return Err(malformed(format!("expected {nnz} entries, found {seen}")));
        }
    } else {
        // Column-major; symmetric files list only the lower triangle.
        let mut k = 0usize;
        let positions: Vec<(usize, usize)> = (0..m)
            .flat_map(|j| {
                let lo = match symmetry {
                    Symmetry::General => 0,
                    Symmetry::Symmetric => j,
                    Symmetry::Skew => j + 1,
                };
                (lo..n).map(move |i| (i, j))
            })
            .collect();
        for (line_no, line) in data {
            for tok in line?.split_whitespace() {
                let &(i, j) = positions
                    .get(k)
                    .ok_or_else(|| malformed(format!("line {line_no}: too many values")))?;
                let v = parse_f64(tok, line_no)?;
                entries[i * m + j] = v;
                match symmetry {
                    Symmetry::General => {}
                    Symmetry::Symmetric => entries[j * m + i] = v,
                    Symmetry::Skew => entries[j * m + i] = -v,
                }
                k += 1;
            }
        }
        if k != positions.len() {
            return Err(malformed(format!(
                "expected {} values, found {k}",
                positions.len()
            )));
        }
    }
    DenseMatrix::new(n, m, entries)
}

fn write_mtx<W: Write>(w: &mut W, m: &DenseMatrix) -> Result<()> {
    writeln!(w, "%%MatrixMarket matrix coordinate real general")?;
    writeln!(w, "{} {} {}", m.n_rows(), m.n_cols(), m.nnz())?;
    for r in 0..m.n_rows() {
        for (c, v) in m.row(r).iter().enumerate() {
            if !is_zero(*v) {
                writeln!(w, "{} {} {v}", r + 1, c + 1)?;
            }
        }
    }
    Ok(())
}

fn read_bin<R: Read>(mut r: R) -> Result<DenseMatrix> {
    let mut head = [0u8; 16];
    r.read_exact(&mut head)
        .map_err(|_| malformed("binary matrix shorter than its header"))?;
    let n = u64::from_le_bytes(head[..8].try_into().expect("8 bytes"));
    let m = u64::from_le_bytes(head[8..].try_into().expect("8 bytes"));
    let mut body = Vec::new();
    r.read_to_end(&mut body)?;
    let expected = n
        .checked_mul(m)
        .and_then(|t| t.checked_mul(8))
        .ok_or_else(|| malformed("matrix dimensions overflow"))?;
    if body.len() as u64 != expected {
        return Err(Error::DimensionMismatch {
            expected: expected as usize,
            actual: body.len(),
        });
    }
    let entries = body
        .chunks_exact(8)
        .map(|b| f64::from_le_bytes(b.try_into().expect("8 bytes")))
        .collect();
    DenseMatrix::new(n as usize, m as usize, entries)
}

fn write_bin<W: Write>(w: &mut W, m: &DenseMatrix) -> Result<()> {
    w.write_all(&(m.n_rows() as u64).to_le_bytes())?;
    w.write_all(&(m.n_cols() as u64).to_le_bytes())?;
    let mut buf = Vec::with_capacity(8 * m.entries().len());
    for v in m.entries() {
        buf.extend_from_slice(&v.to_le_bytes());
    }
    w.write_all(&buf)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::tests::example_matrix;

    fn roundtrip(m: &DenseMatrix, f: Format) -> DenseMatrix {
        let mut buf = Vec::new();
        write_to(&mut buf, m, f).unwrap();
        read_from(&buf[..], f).unwrap()
    }

    #[test]
    fn formats_roundtrip() {
        let m = example_matrix();
        for f in [Format::Mtx, Format::Csv, Format::Bin] {
            assert_eq!(roundtrip(&m, f), m, "{f}");
        }
        let odd = DenseMatrix::from_rows(&[vec![0.1 + 0.2, -1e-300, 12345.678]]).unwrap();
        for f in [Format::Mtx, Format::Csv, Format::Bin] {
            assert_eq!(roundtrip(&odd, f), odd, "{f}");
        }
    }

    #[test]
    fn csv_parsing() {
        let m = read_from(&b"1, 2,0\n\n0,0,3.5\n"[..], Format::Csv).unwrap();
        assert_eq!(m.entries(), &[1.0, 2.0, 0.0, 0.0, 0.0, 3.5]);
        assert!(matches!(
            read_from(&b"1,2\n3\n"[..], Format::Csv),
            Err(Error::DimensionMismatch {
                expected: 2,
                actual: 1
            })
        ));
        assert!(read_from(&b"1,x\n"[..], Format::Csv).is_err());
        assert!(read_from(&b""[..], Format::Csv).is_err());
        assert!(matches!(
            read_from(&b"1,NaN\n"[..], Format::Csv),
            Err(Error::NaN { .. })
        ));
    }

    #[test]
    fn mtx_variants() {
        let coo =
            b"%%MatrixMarket matrix coordinate real general\n% comment\n2 3 2\n1 1 1.5\n2 3 -2\n";
        let m = read_from(&coo[..], Format::Mtx).unwrap();
        assert_eq!(m.entries(), &[1.5, 0.0, 0.0, 0.0, 0.0, -2.0]);

        let arr = b"%%MatrixMarket matrix array real general\n2 2\n1\n2\n3\n4\n";
        let m = read_from(&arr[..], Format::Mtx).unwrap();
        assert_eq!(m.entries(), &[1.0, 3.0, 2.0, 4.0]);

        let sym = b"%%MatrixMarket matrix coordinate integer symmetric\n2 2 2\n1 1 5\n2 1 7\n";
        let m = read_from(&sym[..], Format::Mtx).unwrap();
        assert_eq!(m.entries(), &[5.0, 7.0, 7.0, 0.0]);

        let pat = b"%%MatrixMarket matrix coordinate pattern general\n2 2 1\n2 2\n";
        let m = read_from(&pat[..], Format::Mtx).unwrap();
        assert_eq!(m.entries(), &[0.0, 0.0, 0.0, 1.0]);

        let bad = b"%%MatrixMarket matrix coordinate real general\n2 2 1\n3 1 1\n";
        assert!(read_from(&bad[..], Format::Mtx).is_err());
        let short = b"%%MatrixMarket matrix coordinate real general\n2 2 2\n1 1 1\n";
        assert!(read_from(&short[..], Format::Mtx).is_err());
        assert!(read_from(&b"1 2 3\n"[..], Format::Mtx).is_err());
    }

    #[test]
    fn bin_errors() {
        assert!(read_from(&[0u8; 4][..], Format::Bin).is_err());
        let mut buf = Vec::new();
        write_to(&mut buf, &example_matrix(), Format::Bin).unwrap();
        assert!(matches!(
            read_from(&buf[..buf.len() - 1], Format::Bin),
            Err(Error::DimensionMismatch { .. })
        ));
        assert_eq!(buf.len(), 16 + 30 * 8);
    }

    #[test]
    fn format_detection() {
        assert_eq!(Format::from_path(Path::new("a/b.MTX")), Some(Format::Mtx));
        assert_eq!(Format::from_path(Path::new("x.csv")), Some(Format::Csv));
        assert_eq!(Format::from_path(Path::new("x.bin")), Some(Format::Bin));
        assert_eq!(Format::from_path(Path::new("x")), None);
        assert_eq!("CSV".parse::<Format>().unwrap(), Format::Csv);
    }
}
