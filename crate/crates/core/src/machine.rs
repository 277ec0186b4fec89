//! BSP machine parameters with a NUMA communication matrix.

use std::path::Path;

use num_integer::Integer;
use num_rational::Ratio;

use crate::error::{Error, ParseError, Result};

/// Rational NUMA coefficient.
pub type Lambda = Ratio<u64>;

/// `P` processors, per-unit communication cost `g`, per-superstep latency `l`
/// and the pairwise coefficient matrix `lambda`.
///
/// Costs are evaluated exactly. Every coefficient is stored a second time as
/// an integer multiple of `1 / denom()` where `denom()` is the least common
/// denominator of the matrix, so hot loops work on plain `u64`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MachineParams {
    p: usize,
    g: u64,
    l: u64,
    lambda: Vec<Vec<Lambda>>,
    scaled: Vec<u64>,
    denom: u64,
}

impl MachineParams {
    /// Uniform communication costs: `lambda[p][q] = 1` off the diagonal.
    pub fn uniform(p: usize, g: u64, l: u64) -> Result<Self> {
        let lambda = (0..p)
            .map(|i| {
                (0..p)
                    .map(|j| Lambda::from_integer(u64::from(i != j)))
                    .collect()
            })
            .collect();
        Self::with_lambda(p, g, l, lambda)
    }

    /// Binary-tree NUMA hierarchy, see [`numa_from_tree`].
    pub fn numa_tree(p: usize, g: u64, l: u64, delta: u64) -> Result<Self> {
        Self::with_lambda(p, g, l, numa_from_tree(p, delta)?)
    }

    pub fn with_lambda(p: usize, g: u64, l: u64, lambda: Vec<Vec<Lambda>>) -> Result<Self> {
        if p == 0 {
            return Err(Error::InvalidMachine("need at least one processor".into()));
        }
        if lambda.len() != p || lambda.iter().any(|row| row.len() != p) {
            return Err(Error::InvalidMachine(format!("lambda must be {p}x{p}")));
        }
        for (i, row) in lambda.iter().enumerate() {
            for (j, x) in row.iter().enumerate() {
                if i == j && *x != Lambda::from_integer(0) {
                    return Err(Error::InvalidMachine(format!("lambda[{i}][{i}] must be 0")));
                }
                if i != j && *x.numer() == 0 {
                    return Err(Error::InvalidMachine(format!(
                        "lambda[{i}][{j}] must be positive"
                    )));
                }
            }
        }
        let denom = lambda
            .iter()
            .flatten()
            .fold(1u64, |acc, x| acc.lcm(x.denom()));
        let scaled = lambda
            .iter()
            .flatten()
            .map(|x| x.numer() * (denom / x.denom()))
            .collect();
        Ok(Self {
            p,
            g,
            l,
            lambda,
            scaled,
            denom,
        })
    }

    pub fn num_processors(&self) -> usize {
        self.p
    }

    pub fn g(&self) -> u64 {
        self.g
    }

    pub fn latency(&self) -> u64 {
        self.l
    }

    pub fn lambda(&self, from: usize, to: usize) -> Lambda {
        self.lambda[from][to]
    }

    pub fn lambda_matrix(&self) -> &[Vec<Lambda>] {
        &self.lambda
    }

    /// Common denominator of all coefficients.
    pub fn denom(&self) -> u64 {
        self.denom
    }

    /// `lambda[from][to] * denom()`, always an integer.
    #[inline]
    pub fn scaled_lambda(&self, from: usize, to: usize) -> u64 {
        self.scaled[from * self.p + to]
    }

    /// True when every off-diagonal coefficient is 1.
    pub fn is_uniform(&self) -> bool {
        self.denom == 1
            && (0..self.p).all(|i| (0..self.p).all(|j| i == j || self.scaled_lambda(i, j) == 1))
    }

    /// Mean off-diagonal coefficient (1 for `P = 1`).
    pub fn mean_lambda(&self) -> f64 {
        if self.p < 2 {
            return 1.0;
        }
        let sum: u64 = self.scaled.iter().sum();
        sum as f64 / self.denom as f64 / (self.p * (self.p - 1)) as f64
    }

    pub fn with_g(&self, g: u64) -> Self {
        Self { g, ..self.clone() }
    }

    pub fn with_latency(&self, l: u64) -> Self {
        Self { l, ..self.clone() }
    }
}

/// Coefficients of a complete binary tree over `p` leaves: leaves whose
/// lowest common ancestor sits at height `h` get `delta^(h-1)`.
pub fn numa_from_tree(p: usize, delta: u64) -> Result<Vec<Vec<Lambda>>> {
    if p == 0 || !p.is_power_of_two() {
        return Err(Error::InvalidMachine(format!(
            "processor count {p} is not a power of two"
        )));
    }
    if delta == 0 {
        return Err(Error::InvalidMachine("delta must be at least 1".into()));
    }
    Ok((0..p)
        .map(|i| {
            (0..p)
                .map(|j| {
                    if i == j {
                        Lambda::from_integer(0)
                    } else {
                        let level = usize::BITS - 1 - (i ^ j).leading_zeros();
                        Lambda::from_integer(delta.pow(level))
                    }
                })
                .collect()
        })
        .collect())
}

/// Reads a whitespace-separated square matrix; entries are integers or
/// fractions `a/b`. Lines starting with `%` or `#` are skipped.
pub fn parse_lambda_matrix(text: &str) -> Result<Vec<Vec<Lambda>>> {
    let mut rows = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let t = line.trim();
        if t.is_empty() || t.starts_with('%') || t.starts_with('#') {
            continue;
        }
        let mut row = Vec::new();
        for tok in t.split_whitespace() {
            let col = tok.as_ptr() as usize - line.as_ptr() as usize + 1;
            let bad = || ParseError::new(i + 1, col, format!("invalid coefficient '{tok}'"));
            let value = match tok.split_once('/') {
                Some((a, b)) => {
                    let a: u64 = a.parse().map_err(|_| bad())?;
                    let b: u64 = b.parse().map_err(|_| bad())?;
                    if b == 0 {
                        return Err(bad().into());
                    }
                    Lambda::new(a, b)
                }
                None => Lambda::from_integer(tok.parse().map_err(|_| bad())?),
            };
            row.push(value);
        }
        rows.push(row);
    }
    Ok(rows)
}

pub fn load_lambda_matrix(path: impl AsRef<Path>) -> Result<Vec<Vec<Lambda>>> {
    parse_lambda_matrix(&std::fs::read_to_string(path)?)
}
