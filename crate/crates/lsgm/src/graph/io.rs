//! Plain-text graph and vertex-pair files.
//!
//! Edge lists are whitespace-separated "u v" lines with an optional
//! "# n=<count>" header declaring the vertex count (needed to round-trip
//! isolated vertices). Pair files are two-column TSV, one (g1, g2) pair per
//! line; seed lists and ground-truth alignments both use them.

use crate::error::{Error, Result};
use crate::graph::SparseGraph;
use std::fs;
use std::io::Write;
use std::path::Path;

fn parse_err(path: &Path, line: usize, msg: impl Into<String>) -> Error {
    Error::Parse {
        path: path.display().to_string(),
        line,
        msg: msg.into(),
    }
}

pub fn load_edge_list(path: impl AsRef<Path>) -> Result<SparseGraph> {
    let path = path.as_ref();
    let text = fs::read_to_string(path)?;
    let mut declared_n: Option<usize> = None;
    let mut edges: Vec<(usize, usize, usize)> = Vec::new();
    let mut max_v = 0usize;
    for (idx, raw) in text.lines().enumerate() {
        let lineno = idx + 1;
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix('#') {
            if let Some(pos) = rest.find("n=") {
                let val = rest[pos + 2..]
                    .split_whitespace()
                    .next()
                    .unwrap_or("");
                let n: usize = val
                    .parse()
                    .map_err(|_| parse_err(path, lineno, format!("bad vertex count {val:?}")))?;
                if declared_n.replace(n).is_some_and(|old| old != n) {
                    return Err(parse_err(path, lineno, "conflicting n= declarations"));
                }
            }
            continue;
        }
        let mut it = line.split_whitespace();
        let (a, b) = match (it.next(), it.next(), it.next()) {
            (Some(a), Some(b), None) => (a, b),
            _ => return Err(parse_err(path, lineno, format!("expected \"u v\", got {line:?}"))),
        };
        let u: usize = a
            .parse()
            .map_err(|_| parse_err(path, lineno, format!("bad vertex id {a:?}")))?;
        let v: usize = b
            .parse()
            .map_err(|_| parse_err(path, lineno, format!("bad vertex id {b:?}")))?;
        if u == v {
            return Err(parse_err(path, lineno, format!("self-loop at vertex {u}")));
        }
        max_v = max_v.max(u).max(v);
        edges.push((u, v, lineno));
    }
    let n = match declared_n {
        Some(n) => n,
        None if edges.is_empty() => 0,
        None => max_v + 1,
    };
    let mut g = SparseGraph::new(n);
    for (u, v, lineno) in edges {
        if u >= n || v >= n {
            return Err(parse_err(
                path,
                lineno,
                format!("vertex {} exceeds declared n={n}", u.max(v)),
            ));
        }
        g.add_edge(u, v);
    }
    Ok(g)
}

/// Writes the header plus one "u v" line per edge, u < v, sorted.
pub fn save_edge_list(g: &SparseGraph, path: impl AsRef<Path>) -> Result<()> {
    let mut out = String::new();
    out.push_str(&format!("# n={}\n", g.n()));
    for (u, v) in g.edges() {
        out.push_str(&format!("{u} {v}\n"));
    }
    let mut f = fs::File::create(path.as_ref())?;
    f.write_all(out.as_bytes())?;
    Ok(())
}

/// Two-column TSV of vertex pairs, order preserved.
pub fn load_pairs_tsv(path: impl AsRef<Path>) -> Result<Vec<(usize, usize)>> {
    let path = path.as_ref();
    let text = fs::read_to_string(path)?;
    let mut pairs = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let lineno = idx + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut it = line.split_whitespace();
        let (a, b) = match (it.next(), it.next(), it.next()) {
            (Some(a), Some(b), None) => (a, b),
            _ => return Err(parse_err(path, lineno, format!("expected two columns, got {line:?}"))),
        };
        let u: usize = a
            .parse()
            .map_err(|_| parse_err(path, lineno, format!("bad vertex id {a:?}")))?;
        let v: usize = b
            .parse()
            .map_err(|_| parse_err(path, lineno, format!("bad vertex id {b:?}")))?;
        pairs.push((u, v));
    }
    Ok(pairs)
}

pub fn save_pairs_tsv(pairs: &[(usize, usize)], path: impl AsRef<Path>) -> Result<()> {
    let mut out = String::new();
    for &(u, v) in pairs {
        out.push_str(&format!("{u}\t{v}\n"));
    }
    let mut f = fs::File::create(path.as_ref())?;
    f.write_all(out.as_bytes())?;
    Ok(())
}
