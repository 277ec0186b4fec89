//! Plain-text hyperDAG format.
//!
//! ```text
//! % comment lines start with '%'
//! <H> <PINS> <N>
//! <hyperedge> <node>      (PINS lines, first pin of a hyperedge is its source)
//! <node> <work> <comm>    (N lines, ascending node id)
//! ```
//!
//! A hyperedge with pins `(v, s1, .., sk)` stands for the edges `v -> si`.
//! The writer emits one hyperedge per node (sinks get a singleton), so the
//! output of [`write_hyperdag`] is a pure function of the DAG.

use std::fmt::Write as _;
use std::io::Read;
use std::path::Path;

use crate::dag::ComputationalDag;
use crate::error::{Error, ParseError, Result};

/// Parses a hyperDAG document.
pub fn parse_hyperdag(text: &str) -> Result<ComputationalDag> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l))
        .filter(|(_, l)| {
            let t = l.trim_start();
            !t.is_empty() && !t.starts_with('%')
        });

    let (hline, header) = lines
        .next()
        .ok_or_else(|| ParseError::new(1, 1, "missing header line"))?;
    let [h, pins, n] = fields::<3>(hline, header)?;
    let (h, pins, n) = (h as usize, pins as usize, n as usize);

    let mut members: Vec<Vec<(usize, usize)>> = vec![Vec::new(); h];
    for _ in 0..pins {
        let (ln, line) = lines
            .next()
            .ok_or_else(|| ParseError::new(hline, 1, format!("expected {pins} pin lines")))?;
        let [e, v] = fields::<2>(ln, line)?;
        let (e, v) = (e as usize, v as usize);
        if e >= h {
            return Err(ParseError::new(ln, column_of(line, 0), format!("hyperedge {e} out of range")).into());
        }
        if v >= n {
            return Err(ParseError::new(ln, column_of(line, 1), format!("pin node {v} out of range")).into());
        }
        members[e].push((v, ln));
    }
    if let Some(e) = members.iter().position(|m| m.is_empty()) {
        return Err(ParseError::new(hline, 1, format!("hyperedge {e} has no pins")).into());
    }

    let mut work = Vec::with_capacity(n);
    let mut comm = Vec::with_capacity(n);
    for expect in 0..n {
        let (ln, line) = lines
            .next()
            .ok_or_else(|| ParseError::new(hline, 1, format!("expected {n} node lines")))?;
        let [id, w, c] = fields::<3>(ln, line)?;
        if id as usize != expect {
            return Err(ParseError::new(
                ln,
                column_of(line, 0),
                format!("expected node {expect}, found {id}"),
            )
            .into());
        }
        work.push(w);
        comm.push(c);
    }
    if let Some((ln, _)) = lines.next() {
        return Err(ParseError::new(ln, 1, "trailing content").into());
    }

    let mut edges = Vec::new();
    for pinlist in &members {
        let src = pinlist[0].0;
        for &(dst, ln) in &pinlist[1..] {
            if dst == src {
                return Err(ParseError::new(ln, 1, format!("self-loop on node {src}")).into());
            }
            edges.push((src, dst));
        }
    }
    ComputationalDag::from_edges_merged(work, comm, &edges)
}

pub fn read_hyperdag<R: Read>(mut reader: R) -> Result<ComputationalDag> {
    let mut text = String::new();
    reader.read_to_string(&mut text)?;
    parse_hyperdag(&text)
}

pub fn load_hyperdag(path: impl AsRef<Path>) -> Result<ComputationalDag> {
    parse_hyperdag(&std::fs::read_to_string(path)?)
}

/// Serializes a DAG. Hyperedge `v` holds `v` followed by its successors in
/// ascending order.
pub fn write_hyperdag(dag: &ComputationalDag) -> String {
    let n = dag.num_nodes();
    let mut out = String::new();
    out.push_str("% hyperDAG\n");
    let _ = writeln!(out, "% {} nodes, {} edges", n, dag.num_edges());
    let _ = writeln!(out, "{} {} {}", n, n + dag.num_edges(), n);
    for v in dag.nodes() {
        let _ = writeln!(out, "{v} {v}");
        for &s in dag.successors(v) {
            let _ = writeln!(out, "{v} {s}");
        }
    }
    for v in dag.nodes() {
        let _ = writeln!(out, "{} {} {}", v, dag.work(v), dag.comm(v));
    }
    out
}

pub fn save_hyperdag(dag: &ComputationalDag, path: impl AsRef<Path>) -> Result<()> {
    std::fs::write(path, write_hyperdag(dag)).map_err(Error::from)
}

/// Splits a line into exactly `K` nonnegative integers.
fn fields<const K: usize>(ln: usize, line: &str) -> Result<[u64; K], ParseError> {
    let mut out = [0u64; K];
    let mut count = 0;
    for (start, tok) in tokens(line) {
        if count == K {
            return Err(ParseError::new(ln, start + 1, format!("expected {K} fields")));
        }
        out[count] = tok
            .parse::<u64>()
            .map_err(|_| ParseError::new(ln, start + 1, format!("invalid integer '{tok}'")))?;
        count += 1;
    }
    if count < K {
        return Err(ParseError::new(ln, line.len() + 1, format!("expected {K} fields")));
    }
    Ok(out)
}

fn tokens(line: &str) -> impl Iterator<Item = (usize, &str)> {
    line.split_whitespace()
        .map(move |t| (t.as_ptr() as usize - line.as_ptr() as usize, t))
}

fn column_of(line: &str, field: usize) -> usize {
    tokens(line).nth(field).map_or(1, |(c, _)| c + 1)
}
