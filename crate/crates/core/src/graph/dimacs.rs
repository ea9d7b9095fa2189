//! 9th DIMACS challenge shortest-path format (`.gr` graphs and `.co`
//! coordinate companions). Vertex ids are 1-based on disk and 0-based in
//! memory. Arcs are symmetrized.

use std::fmt::Write as _;
use std::io::BufRead;

use super::{RoadGraph, VertexId, Weight};
use crate::{Error, Result};

pub fn load_dimacs(reader: impl BufRead) -> Result<RoadGraph> {
    let mut header: Option<(usize, usize)> = None;
    let mut arcs = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        let lineno = i + 1;
        let mut tok = line.split_whitespace();
        match tok.next() {
            None | Some("c") => {}
            Some("p") => {
                if header.is_some() {
                    return Err(Error::parse(lineno, "duplicate problem line"));
                }
                if tok.next() != Some("sp") {
                    return Err(Error::parse(lineno, "expected `p sp <n> <m>`"));
                }
                let n = parse_field::<usize>(tok.next(), lineno, "vertex count")?;
                let m = parse_field::<usize>(tok.next(), lineno, "arc count")?;
                if tok.next().is_some() {
                    return Err(Error::parse(lineno, "trailing fields in problem line"));
                }
                header = Some((n, m));
            }
            Some("a") => {
                let (n, _) = header.ok_or_else(|| Error::parse(lineno, "arc before problem line"))?;
                let u = parse_field::<u64>(tok.next(), lineno, "tail")?;
                let v = parse_field::<u64>(tok.next(), lineno, "head")?;
                let w = parse_field::<i64>(tok.next(), lineno, "weight")?;
                for x in [u, v] {
                    if x == 0 || x > n as u64 {
                        return Err(Error::parse(lineno, format!("vertex {x} out of range")));
                    }
                }
                if w <= 0 || w > Weight::MAX as i64 {
                    return Err(Error::parse(lineno, format!("non-positive or oversized weight {w}")));
                }
                arcs.push(((u - 1) as VertexId, (v - 1) as VertexId, w as Weight));
            }
            Some(other) => {
                return Err(Error::parse(lineno, format!("unknown line type `{other}`")));
            }
        }
    }
    let (n, m) = header.ok_or_else(|| Error::parse(0, "missing problem line"))?;
    if arcs.len() != m {
        return Err(Error::parse(
            0,
            format!("header declares {m} arcs, found {}", arcs.len()),
        ));
    }
    RoadGraph::from_edges(n, arcs)
}

pub fn load_dimacs_str(text: &str) -> Result<RoadGraph> {
    load_dimacs(text.as_bytes())
}

/// Reads a `.co` file (`p aux sp co <n>` plus `v <id> <x> <y>` lines).
pub fn load_coords(reader: impl BufRead, vertex_count: usize) -> Result<Vec<(i64, i64)>> {
    let mut coords = vec![None; vertex_count];
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        let lineno = i + 1;
        let mut tok = line.split_whitespace();
        match tok.next() {
            None | Some("c") | Some("p") => {}
            Some("v") => {
                let id = parse_field::<usize>(tok.next(), lineno, "vertex id")?;
                let x = parse_field::<i64>(tok.next(), lineno, "x")?;
                let y = parse_field::<i64>(tok.next(), lineno, "y")?;
                if id == 0 || id > vertex_count {
                    return Err(Error::parse(lineno, format!("vertex {id} out of range")));
                }
                coords[id - 1] = Some((x, y));
            }
            Some(other) => {
                return Err(Error::parse(lineno, format!("unknown line type `{other}`")));
            }
        }
    }
    coords
        .into_iter()
        .enumerate()
        .map(|(v, c)| c.ok_or_else(|| Error::parse(0, format!("vertex {} has no coordinate", v + 1))))
        .collect()
}

/// Writes both arc directions of every edge, as DIMACS road files do.
pub fn write_dimacs(graph: &RoadGraph) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "c generated by odin");
    let _ = writeln!(out, "p sp {} {}", graph.vertex_count(), graph.edge_count() * 2);
    for (u, v, w) in graph.edges() {
        let _ = writeln!(out, "a {} {} {}", u + 1, v + 1, w);
        let _ = writeln!(out, "a {} {} {}", v + 1, u + 1, w);
    }
    out
}

pub fn write_coords(coords: &[(i64, i64)]) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "p aux sp co {}", coords.len());
    for (i, (x, y)) in coords.iter().enumerate() {
        let _ = writeln!(out, "v {} {} {}", i + 1, x, y);
    }
    out
}

fn parse_field<T: std::str::FromStr>(tok: Option<&str>, line: usize, what: &str) -> Result<T> {
    let tok = tok.ok_or_else(|| Error::parse(line, format!("missing {what}")))?;
    tok.parse()
        .map_err(|_| Error::parse(line, format!("malformed {what} `{tok}`")))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn smallest_legal_file() {
        let g = load_dimacs_str("p sp 2 2\na 1 2 5\na 2 1 5\n").unwrap();
        assert_eq!(g.vertex_count(), 2);
        assert_eq!(g.edge_count(), 1);
        assert_eq!(g.edge_weight(0, 1), Some(5));
    }

    #[test]
    fn vertex_out_of_range_names_line() {
        let err = load_dimacs_str("c hi\np sp 2 2\na 1 3 4\na 3 1 4\n").unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("vertex 3 out of range"), "{msg}");
        assert!(msg.contains("line 3"), "{msg}");
    }

    #[test]
    fn rejects_bad_weights_and_headers() {
        assert!(load_dimacs_str("p sp 2 1\na 1 2 0\n").is_err());
        assert!(load_dimacs_str("p sp 2 1\na 1 2 -3\n").is_err());
        assert!(load_dimacs_str("p xx 2 1\na 1 2 3\n").is_err());
        assert!(load_dimacs_str("a 1 2 3\n").is_err());
        assert!(load_dimacs_str("p sp 2 3\na 1 2 3\n").is_err());
    }

    #[test]
    fn one_directional_arcs_are_symmetrized() {
        let g = load_dimacs_str("p sp 3 2\na 1 2 4\na 3 2 9\n").unwrap();
        assert_eq!(g.edge_weight(1, 0), Some(4));
        assert_eq!(g.edge_weight(1, 2), Some(9));
    }

    #[test]
    fn write_then_load_is_identity() {
        let g = RoadGraph::from_edges(4, [(0, 1, 3), (1, 2, 8), (0, 3, 2)]).unwrap();
        assert_eq!(load_dimacs_str(&write_dimacs(&g)).unwrap(), g);
        let c = vec![(0, 0), (5, -1), (2, 2), (9, 9)];
        assert_eq!(load_coords(write_coords(&c).as_bytes(), 4).unwrap(), c);
    }
}
