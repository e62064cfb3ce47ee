//! Fill-reducing symmetric orderings.

use std::collections::BTreeSet;

use super::SparsityPattern;

/// Minimum-degree ordering of the symmetrised pattern `A + A^T`.
///
/// Works on the explicit elimination graph. Ties are broken by the lowest
/// vertex index, so the ordering is a pure function of the pattern.
/// Returns `perm` with `perm[k]` = the original index eliminated k-th.
pub fn minimum_degree(pattern: &SparsityPattern) -> Vec<usize> {
    let n = pattern.rows();
    assert_eq!(n, pattern.cols(), "ordering needs a square pattern");
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); n];
    for r in 0..n {
        for &c in &pattern.col_idx()[pattern.row_range(r)] {
            if c != r {
                adj[r].push(c);
                adj[c].push(r);
            }
        }
    }
    for a in &mut adj {
        a.sort_unstable();
        a.dedup();
    }

    let mut heap: BTreeSet<(usize, usize)> = (0..n).map(|v| (adj[v].len(), v)).collect();
    let mut perm = Vec::with_capacity(n);
    let mut merged = Vec::new();
    while let Some((_, v)) = heap.pop_first() {
        perm.push(v);
        let clique = std::mem::take(&mut adj[v]);
        for &u in &clique {
            heap.remove(&(adj[u].len(), u));
            // adj[u] := (adj[u] ∪ clique) \ {u, v}
            merged.clear();
            let (a, b) = (&adj[u], &clique);
            let (mut i, mut j) = (0, 0);
            while i < a.len() || j < b.len() {
                let next = match (a.get(i), b.get(j)) {
                    (Some(&x), Some(&y)) if x == y => {
                        i += 1;
                        j += 1;
                        x
                    }
                    (Some(&x), Some(&y)) if x < y => {
                        i += 1;
                        x
                    }
                    (Some(&x), None) => {
                        i += 1;
                        x
                    }
                    (_, Some(&y)) => {
                        j += 1;
                        y
                    }
                    (None, None) => unreachable!(),
                };
                if next != u && next != v {
                    merged.push(next);
                }
            }
            std::mem::swap(&mut adj[u], &mut merged);
            heap.insert((adj[u].len(), u));
        }
    }
    perm
}

/// Symmetrised adjacency lists of a square pattern, without self loops.
pub fn adjacency(pattern: &SparsityPattern) -> Vec<Vec<usize>> {
    let n = pattern.rows();
    assert_eq!(n, pattern.cols(), "ordering needs a square pattern");
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); n];
    for r in 0..n {
        for &c in &pattern.col_idx()[pattern.row_range(r)] {
            if c != r {
                adj[r].push(c);
                adj[c].push(r);
            }
        }
    }
    for a in &mut adj {
        a.sort_unstable();
        a.dedup();
    }
    adj
}

/// Nested dissection with level-structure separators.
///
/// Each connected piece larger than `leaf` is split by the middle level of
/// a breadth-first search from a pseudo-peripheral vertex; the two halves
/// are ordered recursively and the separator last. Deterministic.
pub fn nested_dissection(adj: &[Vec<usize>], leaf: usize) -> Vec<usize> {
    let n = adj.len();
    let mut region = vec![0usize; n];
    let mut order = Vec::with_capacity(n);
    let mut next_region = 1;
    let mut level = vec![usize::MAX; n];
    let all: Vec<usize> = (0..n).collect();
    dissect(adj, all, 0, leaf.max(1), &mut region, &mut next_region, &mut level, &mut order);
    order
}

/// Breadth-first levels of the component of `start` inside `id`.
fn bfs_levels(adj: &[Vec<usize>], start: usize, id: usize, region: &[usize], level: &mut [usize]) -> Vec<Vec<usize>> {
    let mut levels = vec![vec![start]];
    level[start] = 0;
    loop {
        let mut next = Vec::new();
        for &v in levels.last().expect("nonempty") {
            for &w in &adj[v] {
                if region[w] == id && level[w] == usize::MAX {
                    level[w] = levels.len();
                    next.push(w);
                }
            }
        }
        if next.is_empty() {
            break;
        }
        next.sort_unstable();
        levels.push(next);
    }
    levels
}

#[allow(clippy::too_many_arguments)]
fn dissect(
    adj: &[Vec<usize>],
    nodes: Vec<usize>,
    id: usize,
    leaf: usize,
    region: &mut [usize],
    next_region: &mut usize,
    level: &mut [usize],
    order: &mut Vec<usize>,
) {
    if nodes.len() <= leaf {
        order.extend(nodes);
        return;
    }
    // split into connected components first
    let mut components = Vec::new();
    for &s in &nodes {
        if level[s] != usize::MAX {
            continue;
        }
        let levels = bfs_levels(adj, s, id, region, level);
        components.push(levels);
    }
    for &v in &nodes {
        level[v] = usize::MAX;
    }
    for comp in components {
        let size: usize = comp.iter().map(Vec::len).sum();
        let members: Vec<usize> = comp.into_iter().flatten().collect();
        if size <= leaf {
            order.extend(members);
            continue;
        }
        // pseudo-peripheral start: restart from a min-degree node of the last level
        let mut start = *members.iter().min().expect("nonempty");
        let mut levels = bfs_levels(adj, start, id, region, level);
        for _ in 0..4 {
            let far = *levels
                .last()
                .expect("nonempty")
                .iter()
                .min_by_key(|&&v| (adj[v].iter().filter(|&&w| region[w] == id).count(), v))
                .expect("nonempty");
            members.iter().for_each(|&v| level[v] = usize::MAX);
            let cand = bfs_levels(adj, far, id, region, level);
            if cand.len() <= levels.len() {
                members.iter().for_each(|&v| level[v] = usize::MAX);
                levels = bfs_levels(adj, start, id, region, level);
                break;
            }
            start = far;
            levels = cand;
        }
        if levels.len() < 3 {
            members.iter().for_each(|&v| level[v] = usize::MAX);
            order.extend(members);
            continue;
        }
        let mut acc = 0;
        let mut cut = 1;
        for (k, l) in levels.iter().enumerate() {
            acc += l.len();
            if 2 * acc > size {
                cut = k.clamp(1, levels.len() - 2);
                break;
            }
        }
        // separator vertices with no neighbour beyond the cut join the near side
        let mut near: Vec<usize> = levels[..cut].concat();
        let mut sep = Vec::new();
        for &v in &levels[cut] {
            if adj[v].iter().any(|&w| region[w] == id && level[w] == cut + 1) {
                sep.push(v);
            } else {
                near.push(v);
            }
        }
        let far: Vec<usize> = levels[cut + 1..].concat();
        members.iter().for_each(|&v| level[v] = usize::MAX);
        for part in [near, far] {
            let pid = *next_region;
            *next_region += 1;
            for &v in &part {
                region[v] = pid;
            }
            let mut part = part;
            part.sort_unstable();
            dissect(adj, part, pid, leaf, region, next_region, level, order);
        }
        order.extend(sep);
    }
}

/// Inverse of a permutation.
pub fn invert(perm: &[usize]) -> Vec<usize> {
    let mut inv = vec![0; perm.len()];
    for (k, &p) in perm.iter().enumerate() {
        inv[p] = k;
    }
    inv
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid_pattern(n: usize) -> SparsityPattern {
        let id = |i: usize, j: usize| j * n + i;
        let mut e = Vec::new();
        for j in 0..n {
            for i in 0..n {
                e.push((id(i, j), id(i, j)));
                if i + 1 < n {
                    e.push((id(i, j), id(i + 1, j)));
                }
                if j + 1 < n {
                    e.push((id(i, j), id(i, j + 1)));
                }
            }
        }
        SparsityPattern::from_entries(n * n, n * n, e).unwrap()
    }

    #[test]
    fn is_permutation() {
        let p = minimum_degree(&grid_pattern(7));
        let mut s = p.clone();
        s.sort_unstable();
        assert_eq!(s, (0..49).collect::<Vec<_>>());
        assert_eq!(invert(&invert(&p)), p);
    }

    #[test]
    fn corners_first_on_grid() {
        // corner vertices of a 5-point grid have the minimum degree 2
        let p = minimum_degree(&grid_pattern(4));
        assert_eq!(p[0], 0);
    }

    #[test]
    fn nested_dissection_is_permutation_with_less_fill() {
        let g = grid_pattern(20);
        let adj = adjacency(&g);
        let nd = nested_dissection(&adj, 8);
        let mut s = nd.clone();
        s.sort_unstable();
        assert_eq!(s, (0..400).collect::<Vec<_>>());
        assert_eq!(nd, nested_dissection(&adj, 8));
        let natural: Vec<usize> = (0..400).collect();
        assert!(symbolic_fill(&adj, &nd) < symbolic_fill(&adj, &natural));
    }

    /// Cholesky fill of `adj` under `order`, by explicit elimination.
    fn symbolic_fill(adj: &[Vec<usize>], order: &[usize]) -> usize {
        let pos = invert(order);
        let mut g: Vec<BTreeSet<usize>> = adj.iter().map(|a| a.iter().copied().collect()).collect();
        let mut fill = 0;
        for &v in order {
            let later: Vec<usize> = g[v].iter().copied().filter(|&w| pos[w] > pos[v]).collect();
            fill += later.len();
            for &a in &later {
                for &b in &later {
                    if a != b {
                        g[a].insert(b);
                    }
                }
            }
        }
        fill
    }

    #[test]
    fn deterministic() {
        let g = grid_pattern(9);
        assert_eq!(minimum_degree(&g), minimum_degree(&g));
    }
}
