//! Multilevel m-way partitioner: heavy-edge-matching coarsening, greedy
//! region growing on the coarsest graph, and boundary refinement on the way
//! back up. The final level is rebalanced to hard vertex-count bounds.

use std::collections::BinaryHeap;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// Undirected graph with vertex and edge weights (edge weight = number of
/// original edges merged into it, not road length).
#[derive(Debug, Clone)]
pub(crate) struct WGraph {
    pub xadj: Vec<usize>,
    pub adj: Vec<u32>,
    pub ew: Vec<u32>,
    pub vw: Vec<u32>,
}

impl WGraph {
    /// Unit-weight graph from symmetric adjacency lists.
    pub fn from_adjacency(lists: &[Vec<u32>]) -> Self {
        let mut xadj = Vec::with_capacity(lists.len() + 1);
        xadj.push(0);
        let mut adj = Vec::new();
        for l in lists {
            adj.extend_from_slice(l);
            xadj.push(adj.len());
        }
        let ew = vec![1; adj.len()];
        WGraph {
            xadj,
            adj,
            ew,
            vw: vec![1; lists.len()],
        }
    }

    fn len(&self) -> usize {
        self.vw.len()
    }

    fn nbrs(&self, v: usize) -> impl Iterator<Item = (usize, u32)> + '_ {
        let r = self.xadj[v]..self.xadj[v + 1];
        self.adj[r.clone()]
            .iter()
            .map(|&u| u as usize)
            .zip(self.ew[r].iter().copied())
    }

    fn total_weight(&self) -> u64 {
        self.vw.iter().map(|&w| w as u64).sum()
    }
}

/// Vertex-count bounds each part must satisfy: `floor(n/(m·eps)) ..= ceil(n·eps/m)`,
/// clamped so every part is non-empty.
pub fn balance_bounds(n: usize, m: usize, eps: f64) -> (usize, usize) {
    let ideal = n as f64 / m as f64;
    let lo = ((ideal / eps).floor() as usize).max(1);
    let hi = ((ideal * eps).ceil() as usize).max(ideal.ceil() as usize);
    (lo.min(n / m), hi)
}

pub(crate) fn partition(g: &WGraph, m: usize, eps: f64, rng: &mut ChaCha8Rng) -> Vec<u32> {
    let n = g.len();
    debug_assert!(n >= m && m >= 2);

    // Coarsen.
    let target = (30 * m).max(120);
    let mut levels: Vec<WGraph> = vec![g.clone()];
    let mut maps: Vec<Vec<u32>> = Vec::new();
    loop {
        let cur = levels.last().unwrap();
        if cur.len() <= target {
            break;
        }
        let cap = ((cur.total_weight() as f64 * 1.5) / target as f64).ceil() as u32;
        let (coarse, map) = coarsen(cur, cap.max(2), rng);
        if coarse.len() as f64 > 0.9 * cur.len() as f64 {
            break;
        }
        maps.push(map);
        levels.push(coarse);
    }

    // Initial partition on the coarsest graph.
    let coarsest = levels.last().unwrap();
    let mut part = initial_partition(coarsest, m, rng);
    refine(coarsest, &mut part, m, eps, rng);

    // Uncoarsen and refine.
    for lvl in (0..maps.len()).rev() {
        let fine = &levels[lvl];
        let map = &maps[lvl];
        part = (0..fine.len()).map(|v| part[map[v] as usize]).collect();
        refine(fine, &mut part, m, eps, rng);
    }

    let (lo, hi) = balance_bounds(n, m, eps);
    rebalance(g, &mut part, m, lo, hi);
    refine_strict(g, &mut part, m, lo, hi, rng);
    part
}

fn coarsen(g: &WGraph, cap: u32, rng: &mut ChaCha8Rng) -> (WGraph, Vec<u32>) {
    let n = g.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    let mut mate = vec![u32::MAX; n];
    for &v in &order {
        if mate[v] != u32::MAX {
            continue;
        }
        let mut best: Option<(u32, std::cmp::Reverse<u32>, usize)> = None;
        for (u, w) in g.nbrs(v) {
            if u == v || mate[u] != u32::MAX || g.vw[v] + g.vw[u] > cap {
                continue;
            }
            let key = (w, std::cmp::Reverse(g.vw[u]), u);
            if best.is_none_or(|b| (key.0, key.1) > (b.0, b.1)) {
                best = Some(key);
            }
        }
        match best {
            Some((_, _, u)) => {
                mate[v] = u as u32;
                mate[u] = v as u32;
            }
            None => mate[v] = v as u32,
        }
    }

    let mut map = vec![u32::MAX; n];
    let mut nc = 0u32;
    for v in 0..n {
        if map[v] == u32::MAX {
            map[v] = nc;
            map[mate[v] as usize] = nc;
            nc += 1;
        }
    }

    let nc = nc as usize;
    let mut vw = vec![0u32; nc];
    let mut lists: Vec<Vec<(u32, u32)>> = vec![Vec::new(); nc];
    for v in 0..n {
        let cv = map[v] as usize;
        vw[cv] += g.vw[v];
        for (u, w) in g.nbrs(v) {
            let cu = map[u];
            if cu as usize != cv {
                lists[cv].push((cu, w));
            }
        }
    }
    let mut xadj = Vec::with_capacity(nc + 1);
    xadj.push(0);
    let mut adj = Vec::new();
    let mut ew = Vec::new();
    for l in &mut lists {
        l.sort_unstable();
        let mut i = 0;
        while i < l.len() {
            let mut j = i;
            let mut w = 0;
            while j < l.len() && l[j].0 == l[i].0 {
                w += l[j].1;
                j += 1;
            }
            adj.push(l[i].0);
            ew.push(w);
            i = j;
        }
        xadj.push(adj.len());
    }
    (WGraph { xadj, adj, ew, vw }, map)
}

fn initial_partition(g: &WGraph, m: usize, rng: &mut ChaCha8Rng) -> Vec<u32> {
    let mut best: Option<(u64, Vec<u32>)> = None;
    for trial in 0..6 {
        let part = grow(g, m, trial == 0, rng);
        let cut = edge_cut(g, &part);
        if best.as_ref().is_none_or(|b| cut < b.0) {
            best = Some((cut, part));
        }
    }
    best.unwrap().1
}

fn grow(g: &WGraph, m: usize, peripheral: bool, rng: &mut ChaCha8Rng) -> Vec<u32> {
    const NONE: u32 = u32::MAX;
    let n = g.len();
    let mut part = vec![NONE; n];
    let mut remaining = g.total_weight();
    let mut unassigned = n;
    for p in 0..m as u32 - 1 {
        let target = remaining / (m as u64 - p as u64);
        let mut weight = 0u64;
        let mut conn = vec![0u32; n];
        let mut heap: BinaryHeap<(u32, std::cmp::Reverse<u64>, usize)> = BinaryHeap::new();
        let mut seq = 0u64;
        while weight < target && unassigned > 0 {
            let v = match heap.pop() {
                Some((c, _, v)) if part[v] == NONE && c == conn[v] => v,
                Some(_) => continue,
                None => pick_seed(g, &part, peripheral, rng),
            };
            part[v] = p;
            weight += g.vw[v] as u64;
            unassigned -= 1;
            for (u, w) in g.nbrs(v) {
                if part[u] == NONE {
                    conn[u] += w;
                    seq += 1;
                    heap.push((conn[u], std::cmp::Reverse(seq), u));
                }
            }
        }
        remaining -= weight;
    }
    for x in part.iter_mut() {
        if *x == NONE {
            *x = m as u32 - 1;
        }
    }
    part
}

fn pick_seed(g: &WGraph, part: &[u32], peripheral: bool, rng: &mut ChaCha8Rng) -> usize {
    let free: Vec<usize> = (0..g.len()).filter(|&v| part[v] == u32::MAX).collect();
    let start = free[rng.gen_range(0..free.len())];
    if !peripheral {
        return start;
    }
    // Farthest unassigned vertex (BFS hops) from a random start.
    let mut seen = vec![false; g.len()];
    let mut queue = std::collections::VecDeque::from([start]);
    seen[start] = true;
    let mut last = start;
    while let Some(v) = queue.pop_front() {
        last = v;
        for (u, _) in g.nbrs(v) {
            if !seen[u] && part[u] == u32::MAX {
                seen[u] = true;
                queue.push_back(u);
            }
        }
    }
    last
}

pub(crate) fn edge_cut(g: &WGraph, part: &[u32]) -> u64 {
    let mut cut = 0u64;
    for v in 0..g.len() {
        for (u, w) in g.nbrs(v) {
            if part[u] != part[v] {
                cut += w as u64;
            }
        }
    }
    cut / 2
}

fn part_weights(g: &WGraph, part: &[u32], m: usize) -> Vec<u64> {
    let mut w = vec![0u64; m];
    for v in 0..g.len() {
        w[part[v] as usize] += g.vw[v] as u64;
    }
    w
}

/// Greedy boundary refinement with soft (weighted) balance.
fn refine(g: &WGraph, part: &mut [u32], m: usize, eps: f64, rng: &mut ChaCha8Rng) {
    let total = g.total_weight();
    let ideal = total as f64 / m as f64;
    let hi = (ideal * eps).ceil() as u64;
    let lo = (ideal / eps).floor() as u64;
    refine_with(g, part, m, lo, hi, rng);
}

fn refine_strict(g: &WGraph, part: &mut [u32], m: usize, lo: usize, hi: usize, rng: &mut ChaCha8Rng) {
    refine_with(g, part, m, lo as u64, hi as u64, rng);
}

fn refine_with(g: &WGraph, part: &mut [u32], m: usize, lo: u64, hi: u64, rng: &mut ChaCha8Rng) {
    let mut weights = part_weights(g, part, m);
    let mut order: Vec<usize> = (0..g.len()).collect();
    let mut conn = vec![0i64; m];
    for _pass in 0..8 {
        order.shuffle(rng);
        let mut moved = 0;
        for &v in &order {
            let cur = part[v] as usize;
            let mut boundary = false;
            for (u, w) in g.nbrs(v) {
                conn[part[u] as usize] += w as i64;
                boundary |= part[u] as usize != cur;
            }
            if boundary {
                let vw = g.vw[v] as u64;
                let mut best: Option<(i64, usize)> = None;
                for p in 0..m {
                    if p == cur || conn[p] == 0 {
                        continue;
                    }
                    if weights[p] + vw > hi || weights[cur] < lo + vw {
                        continue;
                    }
                    let gain = conn[p] - conn[cur];
                    let balances = weights[cur] > weights[p] + vw;
                    if (gain > 0 || (gain == 0 && balances))
                        && best.is_none_or(|b| gain > b.0) {
                            best = Some((gain, p));
                        }
                }
                if let Some((_, p)) = best {
                    part[v] = p as u32;
                    weights[cur] -= vw;
                    weights[p] += vw;
                    moved += 1;
                }
            }
            for (u, _) in g.nbrs(v) {
                conn[part[u] as usize] = 0;
            }
            conn[cur] = 0;
        }
        if moved == 0 {
            break;
        }
    }
}

/// Moves single vertices until every part size lies in `lo..=hi`.
/// Assumes unit vertex weights.
fn rebalance(g: &WGraph, part: &mut [u32], m: usize, lo: usize, hi: usize) {
    let mut sizes = vec![0usize; m];
    for &p in part.iter() {
        sizes[p as usize] += 1;
    }
    let mut guard = 4 * g.len() + 16;
    loop {
        guard -= 1;
        assert!(guard > 0, "rebalance failed to converge");
        let over = (0..m).filter(|&p| sizes[p] > hi).max_by_key(|&p| sizes[p]);
        let under = (0..m).filter(|&p| sizes[p] < lo).min_by_key(|&p| sizes[p]);
        // `target`: a fixed receiving part, or any part with room.
        let (from, target) = match (over, under) {
            (Some(p), _) => (p, None),
            (None, Some(q)) => {
                // Pull into `q` from the largest donor that can spare a vertex.
                let donor = (0..m)
                    .filter(|&p| p != q && sizes[p] > lo)
                    .max_by_key(|&p| sizes[p])
                    .expect("some part can donate");
                (donor, Some(q))
            }
            (None, None) => return,
        };
        let to_ok = |q: usize, sizes: &[usize]| match target {
            Some(t) => q == t,
            None => sizes[q] < hi,
        };
        // Best boundary vertex of `from` to an acceptable neighbour part.
        let mut best: Option<(i64, usize, usize)> = None;
        for v in 0..g.len() {
            if part[v] as usize != from {
                continue;
            }
            let mut conn = vec![0i64; m];
            for (u, w) in g.nbrs(v) {
                conn[part[u] as usize] += w as i64;
            }
            for q in 0..m {
                if q != from && conn[q] > 0 && to_ok(q, &sizes) {
                    let gain = conn[q] - conn[from];
                    if best.is_none_or(|b| gain > b.0) {
                        best = Some((gain, v, q));
                    }
                }
            }
        }
        let (v, q) = match best {
            Some((_, v, q)) => (v, q),
            None => {
                let q = (0..m)
                    .filter(|&q| q != from && to_ok(q, &sizes))
                    .min_by_key(|&q| sizes[q])
                    .expect("a receiving part exists");
                let v = (0..g.len()).find(|&v| part[v] as usize == from).unwrap();
                (v, q)
            }
        };
        part[v] = q as u32;
        sizes[from] -= 1;
        sizes[q] += 1;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    fn grid(side: usize) -> WGraph {
        let mut lists = vec![Vec::new(); side * side];
        for y in 0..side {
            for x in 0..side {
                let v = y * side + x;
                if x + 1 < side {
                    lists[v].push((v + 1) as u32);
                    lists[v + 1].push(v as u32);
                }
                if y + 1 < side {
                    lists[v].push((v + side) as u32);
                    lists[v + side].push(v as u32);
                }
            }
        }
        WGraph::from_adjacency(&lists)
    }

    #[test]
    fn grid_splits_balanced_with_small_cut() {
        let g = grid(30);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let part = partition(&g, 4, 1.1, &mut rng);
        let (lo, hi) = balance_bounds(900, 4, 1.1);
        let mut sizes = [0usize; 4];
        for &p in &part {
            sizes[p as usize] += 1;
        }
        assert!(sizes.iter().all(|&s| (lo..=hi).contains(&s)), "{sizes:?}");
        // A perfect quadrant split cuts 60 edges; stay within a small factor.
        assert!(edge_cut(&g, &part) < 150, "cut {}", edge_cut(&g, &part));
    }

    #[test]
    fn bounds_admit_a_feasible_assignment() {
        for n in 2..200 {
            for m in 2..=n.min(8) {
                let (lo, hi) = balance_bounds(n, m, 1.1);
                assert!(lo >= 1 && lo * m <= n && hi * m >= n, "n={n} m={m}");
            }
        }
    }

    #[test]
    fn disconnected_input_is_still_balanced() {
        let lists: Vec<Vec<u32>> = vec![Vec::new(); 50];
        let g = WGraph::from_adjacency(&lists);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let part = partition(&g, 3, 1.1, &mut rng);
        let (lo, hi) = balance_bounds(50, 3, 1.1);
        for p in 0..3 {
            let s = part.iter().filter(|&&x| x == p).count();
            assert!((lo..=hi).contains(&s));
        }
    }
}
