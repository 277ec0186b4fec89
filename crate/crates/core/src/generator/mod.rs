//! Fine-grained DAGs of sparse linear algebra kernels.
//!
//! Every node is a scalar: matrix and input-vector entries are sources of
//! work 1, every other node has work `indeg - 1` (the number of binary
//! operations needed to combine its inputs), and every node has
//! communication weight 1.

mod pattern;

pub use pattern::{load_matrix_market, parse_matrix_market, random_pattern, SparsityPattern};

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dag::{ComputationalDag, NodeId};
use crate::error::{Error, Result};

#[derive(Default)]
struct Builder {
    work: Vec<u64>,
    edges: Vec<(NodeId, NodeId)>,
}

impl Builder {
    fn source(&mut self) -> NodeId {
        self.work.push(1);
        self.work.len() - 1
    }

    fn op(&mut self, mut preds: Vec<NodeId>) -> NodeId {
        preds.sort_unstable();
        preds.dedup();
        debug_assert!(!preds.is_empty());
        let v = self.work.len();
        self.work.push(preds.len() as u64 - 1);
        self.edges.extend(preds.into_iter().map(|u| (u, v)));
        v
    }

    fn finish(self) -> ComputationalDag {
        let n = self.work.len();
        ComputationalDag::new(self.work, vec![1; n], &self.edges).expect("generator emits a DAG")
    }
}

/// Where the matrix entries of a multiplication come from.
enum MatrixSources {
    Fresh,
    Shared(Vec<Option<NodeId>>),
}

impl MatrixSources {
    fn new(shared: bool, nnz: usize) -> Self {
        if shared {
            MatrixSources::Shared(vec![None; nnz])
        } else {
            MatrixSources::Fresh
        }
    }

    fn get(&mut self, b: &mut Builder, k: usize) -> NodeId {
        match self {
            MatrixSources::Fresh => b.source(),
            MatrixSources::Shared(ids) => *ids[k].get_or_insert_with(|| b.source()),
        }
    }
}

/// One product `A x`. Entries `A_ij` with `x_j` absent (structurally zero)
/// are skipped. With `carry`, row `i`'s sum also takes `x_i` as an input,
/// and rows without products keep `x_i`. Node ids are allocated matrix
/// entries first, then products, then row sums.
fn multiply(
    b: &mut Builder,
    pattern: &SparsityPattern,
    a: &mut MatrixSources,
    x: &[Option<NodeId>],
    carry: bool,
) -> Vec<Option<NodeId>> {
    let live: Vec<(usize, (usize, usize))> = pattern
        .entries()
        .iter()
        .copied()
        .enumerate()
        .filter(|&(_, (_, j))| x[j].is_some())
        .collect();
    let a_ids: Vec<NodeId> = live.iter().map(|&(k, _)| a.get(b, k)).collect();
    let mut products: Vec<Vec<NodeId>> = vec![Vec::new(); pattern.dim()];
    for (&(_, (i, j)), &aij) in live.iter().zip(&a_ids) {
        let m = b.op(vec![aij, x[j].unwrap()]);
        products[i].push(m);
    }
    products
        .into_iter()
        .enumerate()
        .map(|(i, mut terms)| {
            if terms.is_empty() {
                return if carry { x[i] } else { None };
            }
            if carry {
                terms.extend(x[i]);
            }
            Some(b.op(terms))
        })
        .collect()
}

fn used_columns(pattern: &SparsityPattern) -> Vec<bool> {
    let mut used = vec![false; pattern.dim()];
    for &(_, j) in pattern.entries() {
        used[j] = true;
    }
    used
}

/// Sparse matrix times dense vector: one source per vector entry that
/// meets a nonzero and per nonzero, one product per nonzero and one sum
/// per nonempty row.
pub fn gen_spmv(pattern: &SparsityPattern) -> Result<ComputationalDag> {
    gen_exp(pattern, 1, false)
}

/// `A^k u` as `k` successive products. Row sums of one product are the
/// vector entries of the next. With `shared_matrix`, all products read the
/// same matrix-entry sources; otherwise every product reads fresh ones.
pub fn gen_exp(pattern: &SparsityPattern, k: usize, shared_matrix: bool) -> Result<ComputationalDag> {
    if pattern.nnz() == 0 {
        return Err(Error::InvalidArgument("empty sparsity pattern".into()));
    }
    if k < 1 {
        return Err(Error::InvalidArgument("need at least one product".into()));
    }
    let mut b = Builder::default();
    let mut x: Vec<Option<NodeId>> = used_columns(pattern)
        .into_iter()
        .map(|u| u.then(|| b.source()))
        .collect();
    let mut a = MatrixSources::new(shared_matrix, pattern.nnz());
    for _ in 0..k {
        x = multiply(&mut b, pattern, &mut a, &x, false);
    }
    Ok(b.finish())
}

/// Vertices within `k` hops of `source`, by `k` products with a vector whose
/// only nonzero is at `source`. Each row sum also takes the row's previous
/// entry, so a row stays in the frontier once reached.
pub fn gen_knn(pattern: &SparsityPattern, k: usize, source: usize, shared_matrix: bool) -> Result<ComputationalDag> {
    if k < 1 {
        return Err(Error::InvalidArgument("need at least one hop".into()));
    }
    if source >= pattern.dim() {
        return Err(Error::InvalidArgument(format!(
            "source {source} outside a {}-dimensional pattern",
            pattern.dim()
        )));
    }
    let mut b = Builder::default();
    let mut x = vec![None; pattern.dim()];
    x[source] = Some(b.source());
    let mut a = MatrixSources::new(shared_matrix, pattern.nnz());
    for _ in 0..k {
        x = multiply(&mut b, pattern, &mut a, &x, true);
    }
    Ok(b.finish())
}

fn dot(b: &mut Builder, u: &[NodeId], v: &[NodeId]) -> NodeId {
    let terms: Vec<NodeId> = u.iter().zip(v).map(|(&a, &c)| b.op(vec![a, c])).collect();
    b.op(terms)
}

/// `k` iterations of conjugate gradients from `x = 0`, so `r = p = b`
/// initially. Matrix entries are read from one set of sources; dot
/// products sum in a single node.
pub fn gen_cg(pattern: &SparsityPattern, k: usize) -> Result<ComputationalDag> {
    if k < 1 {
        return Err(Error::InvalidArgument("need at least one iteration".into()));
    }
    let rows = pattern.rows();
    if let Some(i) = rows.iter().position(Vec::is_empty) {
        return Err(Error::InvalidArgument(format!("row {i} of the pattern is empty")));
    }
    let n = pattern.dim();
    let mut b = Builder::default();
    let mut a = MatrixSources::new(true, pattern.nnz());
    let mut r: Vec<NodeId> = (0..n).map(|_| b.source()).collect();
    let mut p = r.clone();
    let mut x: Vec<Option<NodeId>> = vec![None; n];
    let mut rr = dot(&mut b, &r, &r);
    for _ in 0..k {
        let pv: Vec<Option<NodeId>> = p.iter().map(|&v| Some(v)).collect();
        let q: Vec<NodeId> = multiply(&mut b, pattern, &mut a, &pv, false)
            .into_iter()
            .map(|v| v.expect("rows are nonempty"))
            .collect();
        let pq = dot(&mut b, &p, &q);
        let alpha = b.op(vec![rr, pq]);
        for i in 0..n {
            let mut inputs = vec![alpha, p[i]];
            inputs.extend(x[i]);
            x[i] = Some(b.op(inputs));
        }
        for i in 0..n {
            r[i] = b.op(vec![r[i], alpha, q[i]]);
        }
        let rr_next = dot(&mut b, &r, &r);
        let beta = b.op(vec![rr_next, rr]);
        for i in 0..n {
            p[i] = b.op(vec![r[i], beta, p[i]]);
        }
        rr = rr_next;
    }
    Ok(b.finish())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GenKind {
    Spmv,
    Exp,
    Cg,
    Knn,
}

impl GenKind {
    pub const ALL: [GenKind; 4] = [GenKind::Spmv, GenKind::Exp, GenKind::Cg, GenKind::Knn];

    pub fn name(self) -> &'static str {
        match self {
            GenKind::Spmv => "spmv",
            GenKind::Exp => "exp",
            GenKind::Cg => "cg",
            GenKind::Knn => "knn",
        }
    }
}

impl fmt::Display for GenKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for GenKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        GenKind::ALL
            .into_iter()
            .find(|k| k.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::InvalidArgument(format!("unknown DAG kind '{s}' (spmv, exp, cg, knn)")))
    }
}

/// Parameters of a generated instance on a random pattern.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenSpec {
    pub kind: GenKind,
    /// Matrix dimension.
    pub n: usize,
    /// Probability of a nonzero.
    pub q: f64,
    /// Products or iterations; ignored for spmv.
    pub k: usize,
    pub seed: u64,
    /// kNN start vertex; defaults to the column with the most nonzeros.
    #[serde(default)]
    pub source: Option<usize>,
    #[serde(default)]
    pub shared_matrix: bool,
}

impl GenSpec {
    pub fn new(kind: GenKind, n: usize, q: f64, k: usize, seed: u64) -> Self {
        Self {
            kind,
            n,
            q,
            k,
            seed,
            source: None,
            shared_matrix: false,
        }
    }
}

/// Builds a DAG on a random pattern. For CG the diagonal is always
/// included, as a positive definite matrix has no zero on it.
pub fn generate(spec: &GenSpec) -> Result<ComputationalDag> {
    let mut pattern = random_pattern(spec.n, spec.q, spec.seed)?;
    if spec.kind == GenKind::Cg {
        pattern = pattern.with_diagonal();
    }
    generate_from(spec, &pattern)
}

/// Builds the DAG of `spec.kind` on a given pattern.
pub fn generate_from(spec: &GenSpec, pattern: &SparsityPattern) -> Result<ComputationalDag> {
    match spec.kind {
        GenKind::Spmv => gen_spmv(pattern),
        GenKind::Exp => gen_exp(pattern, spec.k, spec.shared_matrix),
        GenKind::Cg => gen_cg(pattern, spec.k),
        GenKind::Knn => {
            let source = spec.source.unwrap_or_else(|| busiest_column(pattern));
            gen_knn(pattern, spec.k, source, spec.shared_matrix)
        }
    }
}

fn busiest_column(pattern: &SparsityPattern) -> usize {
    let mut count = vec![0usize; pattern.dim()];
    for &(_, j) in pattern.entries() {
        count[j] += 1;
    }
    (0..count.len()).max_by_key(|&j| (count[j], std::cmp::Reverse(j))).unwrap_or(0)
}

/// Draws random parameters until the DAG has between `lo` and `hi` nodes.
/// Deterministic in `seed`.
pub fn generate_in_range(kind: GenKind, lo: usize, hi: usize, seed: u64) -> Result<(GenSpec, ComputationalDag)> {
    if lo > hi || hi < 2 {
        return Err(Error::InvalidArgument(format!("empty size range [{lo}, {hi}]")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..2000 {
        let target = rng.gen_range(lo..=hi) as f64;
        let degree: f64 = rng.gen_range(1.5..4.0);
        let k = match kind {
            GenKind::Spmv => 1,
            GenKind::Exp => rng.gen_range(2..=5),
            GenKind::Cg => rng.gen_range(1..=3),
            GenKind::Knn => rng.gen_range(2..=6),
        };
        // Rough node count per matrix row.
        let per_row = match kind {
            GenKind::Spmv => 2.0 * degree + 2.0,
            GenKind::Exp => k as f64 * (2.0 * degree + 1.0) + 1.0,
            GenKind::Cg => k as f64 * (degree + 9.0) + degree + 3.0,
            GenKind::Knn => k as f64 * (2.0 * degree + 1.0) * 0.6,
        };
        let n = ((target / per_row).round() as usize).max(1);
        let q = (degree / n as f64).min(1.0);
        let mut spec = GenSpec::new(kind, n, q, k, rng.gen());
        if kind == GenKind::Spmv {
            spec.k = 1;
        }
        let Ok(dag) = generate(&spec) else {
            continue;
        };
        if (lo..=hi).contains(&dag.num_nodes()) {
            return Ok((spec, dag));
        }
    }
    Err(Error::InvalidArgument(format!(
        "no {kind} instance with {lo}..={hi} nodes found"
    )))
}
