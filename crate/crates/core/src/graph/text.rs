//! Plain-text graph format.
//!
//! ```text
//! p 4
//! 0 -> 1
//! 2 -> 1
//! 1 -- 3
//! ```
//!
//! Blank lines and lines starting with `#` are ignored.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::nodeset::MAX_NODES;

use super::{Dag, UndirectedGraph};

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct MixedGraph {
    pub p: usize,
    pub arcs: Vec<(usize, usize)>,
    pub edges: Vec<(usize, usize)>,
}

impl MixedGraph {
    pub fn into_dag(self) -> Result<Dag> {
        if !self.edges.is_empty() {
            return Err(Error::InvalidGraph("undirected edge in a DAG file".into()));
        }
        Dag::from_arcs(self.p, &self.arcs)
    }

    /// Skeleton of the file; arc directions are dropped.
    pub fn into_undirected(self) -> Result<UndirectedGraph> {
        let mut all = self.edges;
        all.extend(self.arcs);
        UndirectedGraph::from_edges(self.p, &all)
    }
}

pub fn parse_graph_text(text: &str) -> Result<MixedGraph> {
    let mut p: Option<usize> = None;
    let mut g = MixedGraph::default();
    let mut seen = BTreeSet::new();
    for (ln, raw) in text.lines().enumerate() {
        let line_no = ln + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let err = |msg: String| Error::Parse { line: line_no, msg };
        let toks: Vec<&str> = line.split_whitespace().collect();
        let Some(n) = p else {
            match toks.as_slice() {
                ["p", n] => {
                    let n: usize = n.parse().map_err(|_| err(format!("bad node count {n:?}")))?;
                    if n > MAX_NODES {
                        return Err(err(format!("node count {n} exceeds {MAX_NODES}")));
                    }
                    p = Some(n);
                    g.p = n;
                    continue;
                }
                _ => return Err(err("expected header \"p <n>\"".into())),
            }
        };
        let [a, op, b] = toks.as_slice() else {
            return Err(err(format!("expected \"a -> b\" or \"a -- b\", got {line:?}")));
        };
        let a: usize = a.parse().map_err(|_| err(format!("bad node {a:?}")))?;
        let b: usize = b.parse().map_err(|_| err(format!("bad node {b:?}")))?;
        if a >= n || b >= n {
            return Err(err(format!("node out of range for p = {n}")));
        }
        if a == b {
            return Err(err(format!("self-loop at node {a}")));
        }
        if !seen.insert((a.min(b), a.max(b))) {
            return Err(err(format!("duplicate pair {{{a}, {b}}}")));
        }
        match *op {
            "->" => g.arcs.push((a, b)),
            "--" => g.edges.push((a.min(b), a.max(b))),
            other => return Err(err(format!("unknown edge marker {other:?}"))),
        }
    }
    if p.is_none() {
        return Err(Error::Parse {
            line: 0,
            msg: "missing header \"p <n>\"".into(),
        });
    }
    Ok(g)
}

pub fn write_graph_text(g: &MixedGraph) -> String {
    let mut s = format!("p {}\n", g.p);
    for &(a, b) in &g.arcs {
        let _ = writeln!(s, "{a} -> {b}");
    }
    for &(a, b) in &g.edges {
        let _ = writeln!(s, "{a} -- {b}");
    }
    s
}

impl Dag {
    pub fn to_text(&self) -> String {
        write_graph_text(&MixedGraph {
            p: self.p(),
            arcs: self.arcs(),
            edges: Vec::new(),
        })
    }
}

impl UndirectedGraph {
    pub fn to_text(&self) -> String {
        write_graph_text(&MixedGraph {
            p: self.p(),
            arcs: Vec::new(),
            edges: self.edges(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_mixed_file() {
        let g = parse_graph_text("# demo\np 4\n0 -> 1\n2 -> 1\n\n1 -- 3\n").unwrap();
        assert_eq!(g.p, 4);
        assert_eq!(g.arcs, vec![(0, 1), (2, 1)]);
        assert_eq!(g.edges, vec![(1, 3)]);
        assert_eq!(g.clone().into_undirected().unwrap().num_edges(), 3);
        assert!(g.into_dag().is_err());
    }

    #[test]
    fn rejects_duplicates_and_loops() {
        assert!(parse_graph_text("p 3\n0 -> 1\n1 -- 0\n").is_err());
        assert!(parse_graph_text("p 3\n2 -> 2\n").is_err());
        assert!(parse_graph_text("0 -> 1\n").is_err());
        assert!(parse_graph_text("p 2\n0 => 1\n").is_err());
        assert!(parse_graph_text("p 2\n0 -> 5\n").is_err());
    }

    #[test]
    fn dag_text_round_trip() {
        let d = Dag::from_arcs(3, &[(0, 1), (2, 1)]).unwrap();
        let back = parse_graph_text(&d.to_text()).unwrap().into_dag().unwrap();
        assert_eq!(back, d);
    }
}
