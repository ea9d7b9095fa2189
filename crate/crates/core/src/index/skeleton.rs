use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write;

use crate::graph::{Dist, VertexId, INF};

/// Shortcut graph of one node: a dense border-to-border matrix plus, for every
/// live vertex that is not a border, its distances to each border. Live
/// vertices are never joined to each other.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SkeletonGraph {
    borders: Vec<VertexId>,
    bb: Vec<Dist>,
    lives: BTreeSet<VertexId>,
    rows: BTreeMap<VertexId, Vec<Dist>>,
}

impl SkeletonGraph {
    /// `borders` must be ascending; `bb` is row-major `|borders|²`.
    pub fn new(borders: Vec<VertexId>, bb: Vec<Dist>) -> Self {
        debug_assert!(borders.windows(2).all(|w| w[0] < w[1]));
        assert_eq!(bb.len(), borders.len() * borders.len());
        SkeletonGraph {
            borders,
            bb,
            lives: BTreeSet::new(),
            rows: BTreeMap::new(),
        }
    }

    pub fn borders(&self) -> &[VertexId] {
        &self.borders
    }

    pub fn border_index(&self, v: VertexId) -> Option<usize> {
        self.borders.binary_search(&v).ok()
    }

    pub fn is_border(&self, v: VertexId) -> bool {
        self.border_index(v).is_some()
    }

    pub fn lives(&self) -> &BTreeSet<VertexId> {
        &self.lives
    }

    pub fn live_count(&self) -> usize {
        self.lives.len()
    }

    pub fn is_live(&self, v: VertexId) -> bool {
        self.lives.contains(&v)
    }

    #[inline]
    pub fn border_dist(&self, i: usize, j: usize) -> Dist {
        self.bb[i * self.borders.len() + j]
    }

    /// Distances from border `i` to every border, in `borders()` order.
    pub fn border_row(&self, i: usize) -> &[Dist] {
        let n = self.borders.len();
        &self.bb[i * n..(i + 1) * n]
    }

    /// Distances from a non-border live vertex to every border.
    pub fn live_row(&self, v: VertexId) -> Option<&[Dist]> {
        self.rows.get(&v).map(Vec::as_slice)
    }

    /// Non-border live vertices with their border rows.
    pub fn live_rows(&self) -> impl Iterator<Item = (VertexId, &[Dist])> + '_ {
        self.rows.iter().map(|(&v, r)| (v, r.as_slice()))
    }

    /// Distances from any skeleton vertex to every border.
    pub fn to_borders(&self, v: VertexId) -> Option<&[Dist]> {
        match self.border_index(v) {
            Some(i) => Some(self.border_row(i)),
            None => self.live_row(v),
        }
    }

    /// Adds a live vertex. Non-border vertices need their border row.
    pub fn insert_live(&mut self, v: VertexId, row: Option<Vec<Dist>>) {
        if !self.is_border(v) {
            let row = row.expect("non-border live vertex needs a border row");
            assert_eq!(row.len(), self.borders.len());
            self.rows.insert(v, row);
        }
        self.lives.insert(v);
    }

    /// Drops the live role. A border vertex keeps every edge it had.
    pub fn remove_live(&mut self, v: VertexId) -> bool {
        self.rows.remove(&v);
        self.lives.remove(&v)
    }

    /// Borders followed by the non-border lives.
    pub fn vertices(&self) -> impl Iterator<Item = VertexId> + '_ {
        self.borders.iter().copied().chain(self.rows.keys().copied())
    }

    pub fn vertex_count(&self) -> usize {
        self.borders.len() + self.rows.len()
    }

    /// Every border-border and border-live edge as `(u, v, w)` with `u < v`,
    /// sorted. Unreachable pairs carry `INF`.
    pub fn edges(&self) -> Vec<(VertexId, VertexId, Dist)> {
        let nb = self.borders.len();
        let mut out = Vec::with_capacity(nb * (nb.saturating_sub(1)) / 2 + nb * self.rows.len());
        for i in 0..nb {
            for j in i + 1..nb {
                out.push((self.borders[i], self.borders[j], self.border_dist(i, j)));
            }
        }
        for (&l, row) in &self.rows {
            for (i, &b) in self.borders.iter().enumerate() {
                out.push((l.min(b), l.max(b), row[i]));
            }
        }
        out.sort_unstable();
        out
    }

    pub fn finite_edge_count(&self) -> usize {
        self.edges().iter().filter(|e| e.2 != INF).count()
    }

    pub(crate) fn dump_into(&self, out: &mut String) {
        let _ = write!(out, "  borders");
        for b in &self.borders {
            let _ = write!(out, " {b}");
        }
        let _ = write!(out, "\n  lives");
        for l in &self.lives {
            let _ = write!(out, " {l}");
        }
        out.push('\n');
        for (u, v, w) in self.edges() {
            if w == INF {
                let _ = writeln!(out, "  edge {u} {v} inf");
            } else {
                let _ = writeln!(out, "  edge {u} {v} {w}");
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn border_live_roles() {
        let mut s = SkeletonGraph::new(vec![2, 5], vec![0, 7, 7, 0]);
        s.insert_live(9, Some(vec![3, 4]));
        s.insert_live(5, None);
        assert_eq!(s.live_count(), 2);
        assert_eq!(s.edges(), vec![(2, 5, 7), (2, 9, 3), (5, 9, 4)]);
        let before = s.edges();
        assert!(s.remove_live(5));
        assert_eq!(s.edges(), before);
        assert!(s.remove_live(9));
        assert_eq!(s.edges(), vec![(2, 5, 7)]);
        assert_eq!(s.to_borders(5), Some(&[7, 0][..]));
    }
}
