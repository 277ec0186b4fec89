use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, ParseError, Result};

/// Nonzero positions of a square `n x n` matrix, sorted row-major without
/// duplicates.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SparsityPattern {
    n: usize,
    entries: Vec<(usize, usize)>,
}

impl SparsityPattern {
    pub fn new(n: usize, mut entries: Vec<(usize, usize)>) -> Result<Self> {
        if let Some(&(i, j)) = entries.iter().find(|&&(i, j)| i >= n || j >= n) {
            return Err(Error::InvalidArgument(format!("entry ({i},{j}) outside a {n}x{n} matrix")));
        }
        entries.sort_unstable();
        entries.dedup();
        Ok(Self { n, entries })
    }

    pub fn identity(n: usize) -> Self {
        Self {
            n,
            entries: (0..n).map(|i| (i, i)).collect(),
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    pub fn entries(&self) -> &[(usize, usize)] {
        &self.entries
    }

    /// The pattern plus every diagonal entry.
    pub fn with_diagonal(&self) -> Self {
        let mut entries = self.entries.clone();
        entries.extend((0..self.n).map(|i| (i, i)));
        entries.sort_unstable();
        entries.dedup();
        Self { n: self.n, entries }
    }

    /// Column indices of each row.
    pub fn rows(&self) -> Vec<Vec<usize>> {
        let mut rows = vec![Vec::new(); self.n];
        for &(i, j) in &self.entries {
            rows[i].push(j);
        }
        rows
    }
}

/// Every cell is nonzero independently with probability `q`.
pub fn random_pattern(n: usize, q: f64, seed: u64) -> Result<SparsityPattern> {
    if n == 0 {
        return Err(Error::InvalidArgument("matrix dimension must be positive".into()));
    }
    if !(q > 0.0 && q <= 1.0) {
        return Err(Error::InvalidArgument(format!("density {q} not in (0, 1]")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut entries = Vec::new();
    for i in 0..n {
        for j in 0..n {
            if rng.gen_bool(q) {
                entries.push((i, j));
            }
        }
    }
    Ok(SparsityPattern { n, entries })
}

/// Reads a MatrixMarket coordinate file. Values are ignored; `symmetric`
/// and `skew-symmetric` matrices are mirrored.
pub fn parse_matrix_market(text: &str) -> Result<SparsityPattern> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim()));
    let mut symmetric = false;
    let (size_ln, size_line) = loop {
        let (ln, line) = lines
            .next()
            .ok_or_else(|| ParseError::new(1, 1, "missing size line"))?;
        if line.starts_with("%%MatrixMarket") {
            let lower = line.to_ascii_lowercase();
            if !lower.contains("coordinate") {
                return Err(ParseError::new(ln, 1, "only coordinate matrices are supported").into());
            }
            symmetric = lower.contains("symmetric") || lower.contains("hermitian");
        } else if !line.is_empty() && !line.starts_with('%') {
            break (ln, line);
        }
    };
    let size: Vec<usize> = numbers(size_ln, size_line)?;
    let [rows, cols, nnz] = size[..] else {
        return Err(ParseError::new(size_ln, 1, "size line needs rows, columns and entry count").into());
    };
    if rows != cols {
        return Err(Error::InvalidArgument(format!("matrix is {rows}x{cols}, not square")));
    }
    let mut entries = Vec::with_capacity(nnz);
    for (ln, line) in lines.filter(|(_, l)| !l.is_empty() && !l.starts_with('%')) {
        let mut it = line.split_whitespace();
        let mut index = |col: usize| -> Result<usize> {
            let tok = it
                .next()
                .ok_or_else(|| ParseError::new(ln, 1, "expected row and column"))?;
            let k: usize = tok
                .parse()
                .map_err(|_| ParseError::new(ln, col, format!("bad index '{tok}'")))?;
            if k == 0 || k > rows {
                return Err(ParseError::new(ln, col, format!("index {k} out of range 1..={rows}")).into());
            }
            Ok(k - 1)
        };
        let i = index(1)?;
        let j = index(2)?;
        entries.push((i, j));
        if symmetric && i != j {
            entries.push((j, i));
        }
    }
    SparsityPattern::new(rows, entries)
}

pub fn load_matrix_market(path: impl AsRef<Path>) -> Result<SparsityPattern> {
    parse_matrix_market(&std::fs::read_to_string(path)?)
}

fn numbers(ln: usize, line: &str) -> Result<Vec<usize>> {
    line.split_whitespace()
        .map(|t| {
            t.parse()
                .map_err(|_| ParseError::new(ln, 1, format!("expected an integer, found '{t}'")).into())
        })
        .collect()
}
