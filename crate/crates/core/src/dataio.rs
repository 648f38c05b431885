//! Dense observation x feature matrices, CSV/TSV ingestion and the value
//! transforms applied to expression and image data before clustering.

use std::collections::HashSet;
use std::io::{Read, Write};
use std::path::Path;

use crate::error::{Error, Result};

/// Dense N x M matrix, observations in rows, row-major storage.
#[derive(Debug, Clone, PartialEq)]
pub struct DataMatrix {
    values: Vec<f64>,
    n_rows: usize,
    n_cols: usize,
    row_ids: Vec<String>,
    col_ids: Vec<String>,
}

impl DataMatrix {
    /// Builds a matrix after checking shape, finiteness and id uniqueness.
    pub fn new(
        n_rows: usize,
        n_cols: usize,
        values: Vec<f64>,
        row_ids: Vec<String>,
        col_ids: Vec<String>,
    ) -> Result<Self> {
        if n_rows < 2 || n_cols < 1 {
            return Err(Error::InvalidInput(format!(
                "matrix must have at least 2 rows and 1 column, got {n_rows}x{n_cols}"
            )));
        }
        if values.len() != n_rows * n_cols {
            return Err(Error::InvalidInput(format!(
                "expected {} values for a {n_rows}x{n_cols} matrix, got {}",
                n_rows * n_cols,
                values.len()
            )));
        }
        if row_ids.len() != n_rows || col_ids.len() != n_cols {
            return Err(Error::InvalidInput("id list length does not match shape".into()));
        }
        if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::BadCell {
                row: pos / n_cols,
                col: pos % n_cols,
                value: values[pos].to_string(),
            });
        }
        check_unique("row", &row_ids)?;
        check_unique("column", &col_ids)?;
        Ok(Self {
            values,
            n_rows,
            n_cols,
            row_ids,
            col_ids,
        })
    }

    /// Matrix with generated ids `o1..oN` and `f1..fM`.
    pub fn from_values(n_rows: usize, n_cols: usize, values: Vec<f64>) -> Result<Self> {
        Self::new(
            n_rows,
            n_cols,
            values,
            default_ids("o", n_rows),
            default_ids("f", n_cols),
        )
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn row_ids(&self) -> &[String] {
        &self.row_ids
    }

    pub fn col_ids(&self) -> &[String] {
        &self.col_ids
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.values[row * self.n_cols + col]
    }

    pub fn row(&self, row: usize) -> &[f64] {
        &self.values[row * self.n_cols..(row + 1) * self.n_cols]
    }

    /// Copies the submatrix `rows x cols` into a contiguous row-major buffer.
    pub fn gather(&self, rows: &[usize], cols: &[usize]) -> Vec<f64> {
        let mut out = Vec::with_capacity(rows.len() * cols.len());
        for &r in rows {
            let row = self.row(r);
            out.extend(cols.iter().map(|&c| row[c]));
        }
        out
    }

    pub fn transpose(&self) -> Self {
        let mut values = Vec::with_capacity(self.values.len());
        for c in 0..self.n_cols {
            values.extend((0..self.n_rows).map(|r| self.get(r, c)));
        }
        Self {
            values,
            n_rows: self.n_cols,
            n_cols: self.n_rows,
            row_ids: self.col_ids.clone(),
            col_ids: self.row_ids.clone(),
        }
    }

    fn map_values(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            values: self.values.iter().map(|&v| f(v)).collect(),
            ..self.clone()
        }
    }
}

fn default_ids(prefix: &str, n: usize) -> Vec<String> {
    (1..=n).map(|i| format!("{prefix}{i}")).collect()
}

fn check_unique(axis: &'static str, ids: &[String]) -> Result<()> {
    let mut seen = HashSet::with_capacity(ids.len());
    for id in ids {
        if !seen.insert(id.as_str()) {
            return Err(Error::DuplicateId {
                axis,
                id: id.clone(),
            });
        }
    }
    Ok(())
}

/// Layout of a delimited matrix file.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LoadOptions {
    pub delimiter: u8,
    /// First line holds column ids.
    pub header: bool,
    /// First column holds row ids.
    pub row_ids: bool,
    /// The file stores features in rows (genomics convention); transpose
    /// after reading so observations end up in rows.
    pub transpose: bool,
}

impl Default for LoadOptions {
    fn default() -> Self {
        Self {
            delimiter: b',',
            header: true,
            row_ids: true,
            transpose: false,
        }
    }
}

impl LoadOptions {
    /// Options for tab-separated files, otherwise default.
    pub fn tsv() -> Self {
        Self {
            delimiter: b'\t',
            ..Self::default()
        }
    }

    /// Picks the delimiter from the file extension (`.tsv`/`.tab` mean tab).
    pub fn for_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some("tsv") | Some("tab") => Self::tsv(),
            _ => Self::default(),
        }
    }
}

pub fn load_matrix(path: impl AsRef<Path>, options: LoadOptions) -> Result<DataMatrix> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_matrix(file, options)
}

/// Parses a delimited table from any reader.
pub fn read_matrix(reader: impl Read, options: LoadOptions) -> Result<DataMatrix> {
    let mut csv = csv::ReaderBuilder::new()
        .delimiter(options.delimiter)
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(reader);

    let skip = usize::from(options.row_ids);
    let mut col_ids: Option<Vec<String>> = None;
    let mut row_ids = Vec::new();
    let mut values = Vec::new();
    let mut width: Option<usize> = None;

    for (line, record) in csv.records().enumerate() {
        let record = record?;
        // Report 1-based line numbers as they appear in the file.
        let row = line + 1;
        if record.iter().all(str::is_empty) {
            continue;
        }
        if options.header && col_ids.is_none() {
            let ids: Vec<String> = record.iter().skip(skip).map(str::to_owned).collect();
            width = Some(ids.len());
            col_ids = Some(ids);
            continue;
        }
        let expected = *width.get_or_insert(record.len().saturating_sub(skip));
        if record.len() != expected + skip {
            return Err(Error::RaggedRow {
                row,
                found: record.len(),
                expected: expected + skip,
            });
        }
        if options.row_ids {
            row_ids.push(record[0].to_owned());
        }
        for (offset, cell) in record.iter().skip(skip).enumerate() {
            let parsed = cell.parse::<f64>().ok().filter(|v| v.is_finite());
            match parsed {
                Some(v) => values.push(v),
                None => {
                    return Err(Error::BadCell {
                        row,
                        col: offset + skip + 1,
                        value: cell.to_owned(),
                    })
                }
            }
        }
    }

    let n_cols = width.unwrap_or(0);
    let n_rows = values.len().checked_div(n_cols).unwrap_or(0);
    let col_ids = col_ids.unwrap_or_else(|| default_ids("f", n_cols));
    let row_ids = if options.row_ids {
        row_ids
    } else {
        default_ids("o", n_rows)
    };
    if options.transpose {
        // Validate in observation orientation, so the size check applies to
        // the transposed shape.
        let mut t = vec![0.0; values.len()];
        for r in 0..n_rows {
            for c in 0..n_cols {
                t[c * n_rows + r] = values[r * n_cols + c];
            }
        }
        DataMatrix::new(n_cols, n_rows, t, col_ids, row_ids)
    } else {
        DataMatrix::new(n_rows, n_cols, values, row_ids, col_ids)
    }
}

pub fn write_matrix(path: impl AsRef<Path>, m: &DataMatrix, options: LoadOptions) -> Result<()> {
    let path = path.as_ref();
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut out = std::io::BufWriter::new(file);
    write_matrix_to(&mut out, m, options).map_err(|e| Error::io(path, e))?;
    out.flush().map_err(|e| Error::io(path, e))
}

/// Writes `m` with the same layout conventions `read_matrix` accepts.
/// Values use the shortest representation that round-trips exactly.
pub fn write_matrix_to(out: &mut impl Write, m: &DataMatrix, options: LoadOptions) -> std::io::Result<()> {
    let m = if options.transpose {
        m.transpose()
    } else {
        m.clone()
    };
    let sep = options.delimiter as char;
    if options.header {
        let mut line = String::new();
        if options.row_ids {
            line.push_str("id");
            line.push(sep);
        }
        line.push_str(&m.col_ids.join(&sep.to_string()));
        writeln!(out, "{line}")?;
    }
    for r in 0..m.n_rows {
        let mut line = String::new();
        if options.row_ids {
            line.push_str(&m.row_ids[r]);
            line.push(sep);
        }
        for (c, v) in m.row(r).iter().enumerate() {
            if c > 0 {
                line.push(sep);
            }
            line.push_str(&v.to_string());
        }
        writeln!(out, "{line}")?;
    }
    Ok(())
}

/// Elementwise `log2(1 + x)`.
pub fn log2_plus_one(m: &DataMatrix) -> Result<DataMatrix> {
    if let Some(pos) = m.values.iter().position(|&v| v < 0.0) {
        return Err(Error::InvalidInput(format!(
            "log2(1+x) needs nonnegative values; found {} at row {}, column {}",
            m.values[pos],
            pos / m.n_cols,
            pos % m.n_cols
        )));
    }
    Ok(m.map_values(|v| v.ln_1p() / std::f64::consts::LN_2))
}

/// Global min-max rescale onto [0, 1].
pub fn rescale_unit(m: &DataMatrix) -> Result<DataMatrix> {
    let (lo, hi) = m
        .values
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    let range = hi - lo;
    if range <= 0.0 {
        return Err(Error::Degenerate(
            "cannot rescale a constant matrix (zero range)".into(),
        ));
    }
    Ok(m.map_values(|v| (v - lo) / range))
}
