use std::collections::{BTreeMap, HashMap, VecDeque};

use super::{split, Builder, NodeId, PartitionParams, PartitionTree};
use crate::graph::{RoadGraph, VertexId};
use crate::{Error, Result};

pub(super) fn from_dump(graph: &RoadGraph, text: &str, m: usize, z: usize) -> Result<PartitionTree> {
    let n = graph.vertex_count();
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, "odin-partition v1")) => {}
        _ => return Err(Error::parse(1, "expected `odin-partition v1` header")),
    }
    let mut parent_of: Vec<Option<NodeId>> = Vec::new();
    let mut members: Vec<Vec<VertexId>> = Vec::new();
    for (i, line) in lines {
        let lineno = i + 1;
        if line.trim().is_empty() {
            continue;
        }
        let tok: Vec<&str> = line.split_whitespace().collect();
        if tok.len() < 7 || tok[0] != "node" || tok[2] != "parent" || tok[4] != "level" || tok[6] != "vertices" {
            return Err(Error::parse(lineno, "malformed node line"));
        }
        let id: usize = tok[1].parse().map_err(|_| Error::parse(lineno, "bad node id"))?;
        if id != parent_of.len() {
            return Err(Error::parse(lineno, "node ids must be consecutive"));
        }
        let parent = match tok[3] {
            "-" => None,
            p => Some(p.parse().map_err(|_| Error::parse(lineno, "bad parent id"))?),
        };
        let vs = tok[7..]
            .iter()
            .map(|t| t.parse::<VertexId>().map_err(|_| Error::parse(lineno, "bad vertex id")))
            .collect::<Result<Vec<_>>>()?;
        if vs.iter().any(|&v| v as usize >= n) {
            return Err(Error::parse(lineno, "vertex out of range"));
        }
        parent_of.push(parent);
        members.push(vs);
    }
    if parent_of.first() != Some(&None) {
        return Err(Error::parse(2, "first node must be the root"));
    }
    let mut children: Vec<Vec<NodeId>> = vec![Vec::new(); parent_of.len()];
    for (id, p) in parent_of.iter().enumerate().skip(1) {
        let p = p.ok_or_else(|| Error::Corrupt(format!("node {id} has no parent")))?;
        if p as usize >= id {
            return Err(Error::Corrupt(format!("node {id} listed before its parent")));
        }
        children[p as usize].push(id as NodeId);
    }

    let mut builder = Builder::new(graph, m, z);
    builder.add_root(n);
    let mut queue = VecDeque::from([0 as NodeId]);
    while let Some(id) = queue.pop_front() {
        let kids = &children[id as usize];
        if kids.is_empty() {
            continue;
        }
        let mut owner = HashMap::new();
        for (rank, &c) in kids.iter().enumerate() {
            for &v in &members[c as usize] {
                owner.insert(v, rank as u32);
            }
        }
        let labels = builder
            .slice(id)
            .iter()
            .map(|v| {
                owner
                    .get(v)
                    .copied()
                    .ok_or_else(|| Error::Corrupt(format!("vertex {v} of node {id} missing from children")))
            })
            .collect::<Result<Vec<_>>>()?;
        let made = builder.split(id, &labels);
        if made != *kids {
            return Err(Error::Corrupt(format!("children of node {id} are not breadth-first numbered")));
        }
        queue.extend(made);
    }
    let tree = builder.finish();
    for (id, vs) in members.iter().enumerate() {
        let mut a = vs.clone();
        let mut b = tree.vertices(id as NodeId).to_vec();
        a.sort_unstable();
        b.sort_unstable();
        if a != b {
            return Err(Error::Corrupt(format!("vertex set of node {id} inconsistent")));
        }
    }
    Ok(tree)
}

pub(super) fn from_paths(graph: &RoadGraph, text: &str, params: &PartitionParams) -> Result<PartitionTree> {
    super::validate(graph, params)?;
    let n = graph.vertex_count();
    let mut paths: Vec<Option<Vec<u32>>> = vec![None; n];
    for (i, line) in text.lines().enumerate() {
        let lineno = i + 1;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut tok = line.split_whitespace();
        let v: usize = tok
            .next()
            .and_then(|t| t.parse().ok())
            .ok_or_else(|| Error::parse(lineno, "bad vertex id"))?;
        let path = tok.next().ok_or_else(|| Error::parse(lineno, "missing node path"))?;
        if v >= n {
            return Err(Error::parse(lineno, format!("vertex {v} out of range")));
        }
        let comps = path
            .split('.')
            .map(|c| c.parse::<u32>().map_err(|_| Error::parse(lineno, format!("bad path `{path}`"))))
            .collect::<Result<Vec<_>>>()?;
        if paths[v].replace(comps).is_some() {
            return Err(Error::parse(lineno, format!("vertex {v} assigned twice")));
        }
    }
    if let Some(v) = paths.iter().position(Option::is_none) {
        return Err(Error::InvalidArgument(format!("vertex {v} has no partition entry")));
    }
    let paths: Vec<Vec<u32>> = paths.into_iter().map(Option::unwrap).collect();

    let mut builder = Builder::new(graph, params.m, params.z);
    builder.add_root(n);
    // (node, depth of path consumed, still following the imported paths)
    let mut queue = VecDeque::from([(0 as NodeId, 0usize, true)]);
    while let Some((id, depth, imported)) = queue.pop_front() {
        let vs = builder.slice(id).to_vec();
        let deeper = vs.iter().filter(|&&v| paths[v as usize].len() > depth).count();
        if imported && deeper == vs.len() && !vs.is_empty() {
            let mut rank = BTreeMap::new();
            for &v in &vs {
                rank.insert(paths[v as usize][depth], 0u32);
            }
            if rank.len() < 2 {
                // A single child would duplicate the node; skip the level.
                queue.push_front((id, depth + 1, true));
                continue;
            }
            for (i, r) in rank.values_mut().enumerate() {
                *r = i as u32;
            }
            let labels: Vec<u32> = vs.iter().map(|&v| rank[&paths[v as usize][depth]]).collect();
            for c in builder.split(id, &labels) {
                queue.push_back((c, depth + 1, true));
            }
        } else if imported && deeper != 0 {
            return Err(Error::InvalidArgument(format!(
                "node at depth {depth} mixes leaf vertices with deeper paths"
            )));
        } else if vs.len() > params.z {
            let labels = split(graph, &vs, params, id);
            for c in builder.split(id, &labels) {
                queue.push_back((c, depth, false));
            }
        }
    }
    Ok(builder.finish())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::synthetic::{generate, SyntheticSpec};

    #[test]
    fn imports_dotted_paths_and_splits_oversized_leaves() {
        let g = generate(&SyntheticSpec::new(100, 3));
        // Two top-level parts by parity, then part 0 split by v % 4.
        let mut text = String::new();
        for v in 0..100 {
            if v % 2 == 0 {
                text.push_str(&format!("{v} 0.{}\n", (v / 2) % 2));
            } else {
                text.push_str(&format!("{v} 1\n"));
            }
        }
        let params = PartitionParams::new(4, 30);
        let tree = PartitionTree::import(&g, &text, &params).unwrap();
        assert_eq!(tree.node(0).children.len(), 2);
        let c0 = tree.node(0).children[0];
        assert_eq!(tree.node(c0).children.len(), 2);
        for l in tree.leaves() {
            assert!(tree.vertices(l).len() <= 30);
        }
        // The odd half (50 vertices) was split by the built-in partitioner.
        let c1 = tree.node(0).children[1];
        assert_eq!(tree.node(c1).children.len(), 4);
    }

    #[test]
    fn import_errors() {
        let g = RoadGraph::from_edges(3, [(0, 1, 1), (1, 2, 1)]).unwrap();
        let p = PartitionParams::new(2, 2);
        assert!(PartitionTree::import(&g, "0 0\n1 1\n", &p).is_err());
        assert!(PartitionTree::import(&g, "0 0\n1 1\n2 x\n", &p).is_err());
        assert!(PartitionTree::import(&g, "0 0\n1 1\n2 1\n2 0\n", &p).is_err());
        assert!(PartitionTree::import(&g, "0 0\n1 1.0\n2 1\n", &p).is_err());
    }
}
