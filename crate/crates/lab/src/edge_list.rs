//! Plain-text edge lists.
//!
//! ```text
//! n m directed|undirected
//! tail head weight
//! ...
//! ```
//!
//! Vertex ids are 0-based. Blank lines and lines starting with `#` are
//! ignored. Undirected edges become two opposing arcs of equal weight.

use std::io::{BufRead, Write};

use mmwc_core::graph::{Arc, GraphError, Orientation, WeightedDigraph};

#[derive(Debug, thiserror::Error)]
pub enum EdgeListError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("header declares {expected} edges but {found} were read")]
    Count { expected: usize, found: usize },
    #[error(transparent)]
    Graph(#[from] GraphError),
}

fn syntax(line: usize, message: impl Into<String>) -> EdgeListError {
    EdgeListError::Syntax { line, message: message.into() }
}

fn field<T: std::str::FromStr>(tok: Option<&str>, line: usize, what: &str) -> Result<T, EdgeListError> {
    let tok = tok.ok_or_else(|| syntax(line, format!("missing {what}")))?;
    tok.parse().map_err(|_| syntax(line, format!("bad {what} `{tok}`")))
}

pub fn read_edge_list<R: BufRead>(reader: R) -> Result<WeightedDigraph, EdgeListError> {
    let mut header: Option<(usize, usize, Orientation)> = None;
    let mut arcs = Vec::new();
    let mut last_line = 0;
    for (idx, line) in reader.lines().enumerate() {
        let line_no = idx + 1;
        last_line = line_no;
        let line = line?;
        let text = line.trim();
        if text.is_empty() || text.starts_with('#') {
            continue;
        }
        let mut toks = text.split_whitespace();
        match header {
            None => {
                let n: usize = field(toks.next(), line_no, "vertex count")?;
                let m: usize = field(toks.next(), line_no, "edge count")?;
                let orientation = match toks.next() {
                    Some("directed") => Orientation::Directed,
                    Some("undirected") => Orientation::Undirected,
                    Some(other) => return Err(syntax(line_no, format!("expected directed|undirected, got `{other}`"))),
                    None => return Err(syntax(line_no, "missing orientation")),
                };
                header = Some((n, m, orientation));
                arcs.reserve(m);
            }
            Some((_, m, _)) => {
                if arcs.len() == m {
                    return Err(EdgeListError::Count { expected: m, found: m + 1 });
                }
                let tail: u32 = field(toks.next(), line_no, "tail")?;
                let head: u32 = field(toks.next(), line_no, "head")?;
                let weight: f64 = field(toks.next(), line_no, "weight")?;
                arcs.push(Arc::new(tail, head, weight));
            }
        }
        if toks.next().is_some() {
            return Err(syntax(line_no, "trailing fields"));
        }
    }
    let (n, m, orientation) = header.ok_or_else(|| syntax(last_line.max(1), "missing header"))?;
    if arcs.len() != m {
        return Err(EdgeListError::Count { expected: m, found: arcs.len() });
    }
    Ok(match orientation {
        Orientation::Directed => WeightedDigraph::from_arcs(n, arcs)?,
        Orientation::Undirected => WeightedDigraph::from_edges(n, arcs)?,
    })
}

/// Write `g`; undirected graphs list each edge once with `tail < head`.
/// Weights use the shortest representation that parses back exactly.
pub fn write_edge_list<W: Write>(g: &WeightedDigraph, mut out: W) -> std::io::Result<()> {
    let undirected = g.orientation() == Orientation::Undirected;
    let keep = |a: &Arc| !undirected || a.tail < a.head;
    let m = g.arcs().filter(keep).count();
    let kind = if undirected { "undirected" } else { "directed" };
    writeln!(out, "{} {m} {kind}", g.n())?;
    for a in g.arcs().filter(keep) {
        writeln!(out, "{} {} {}", a.tail, a.head, a.weight)?;
    }
    out.flush()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reads_a_directed_list() {
        let g = read_edge_list("2 2 directed\n0 1 1.0\n1 0 3\n".as_bytes()).unwrap();
        assert_eq!(g.arc_count(), 2);
        assert_eq!(g.weight(1, 0), Some(3.0));
    }

    #[test]
    fn undirected_edges_expand() {
        let g = read_edge_list("# pair\n2 1 undirected\n\n0 1 0.5\n".as_bytes()).unwrap();
        assert_eq!(g.weight(0, 1), Some(0.5));
        assert_eq!(g.weight(1, 0), Some(0.5));
    }

    #[test]
    fn rejects_malformed_input() {
        assert!(matches!(read_edge_list("".as_bytes()), Err(EdgeListError::Syntax { .. })));
        assert!(matches!(read_edge_list("2 1 sideways\n".as_bytes()), Err(EdgeListError::Syntax { line: 1, .. })));
        assert!(matches!(read_edge_list("2 2 directed\n0 1 1\n".as_bytes()), Err(EdgeListError::Count { .. })));
        assert!(matches!(read_edge_list("2 1 directed\n0 1 x\n".as_bytes()), Err(EdgeListError::Syntax { line: 2, .. })));
        assert!(matches!(read_edge_list("2 1 directed\n0 0 1\n".as_bytes()), Err(EdgeListError::Graph(_))));
    }
}
