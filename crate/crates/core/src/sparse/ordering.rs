//! Reverse Cuthill-McKee ordering on the symmetrized pattern of a square matrix.

use std::collections::VecDeque;

use super::SparseMatrix;

/// Adjacency lists of `A + Aᵀ` with the diagonal removed.
fn symmetric_adjacency(a: &SparseMatrix) -> Vec<Vec<usize>> {
    let n = a.nrows();
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); n];
    for r in 0..n {
        for &c in a.row(r).0 {
            if c != r {
                adj[r].push(c);
                adj[c].push(r);
            }
        }
    }
    for list in &mut adj {
        list.sort_unstable();
        list.dedup();
    }
    adj
}

/// Breadth-first level structure from `root`; returns (visit order, depth of last level).
fn bfs_levels(adj: &[Vec<usize>], root: usize, mark: &mut [usize], stamp: usize) -> (Vec<usize>, usize) {
    let mut order = vec![root];
    let mut level = vec![0usize];
    mark[root] = stamp;
    let mut head = 0;
    while head < order.len() {
        let v = order[head];
        let lv = level[head];
        head += 1;
        for &w in &adj[v] {
            if mark[w] != stamp {
                mark[w] = stamp;
                order.push(w);
                level.push(lv + 1);
            }
        }
    }
    let depth = *level.last().unwrap_or(&0);
    let last_level: Vec<usize> = order
        .iter()
        .zip(&level)
        .filter(|(_, &l)| l == depth)
        .map(|(&v, _)| v)
        .collect();
    (last_level, depth)
}

/// George-Liu pseudo-peripheral node search within the component of `start`.
fn pseudo_peripheral(adj: &[Vec<usize>], start: usize, mark: &mut [usize], stamp: &mut usize) -> usize {
    let mut root = start;
    *stamp += 1;
    let (mut last, mut depth) = bfs_levels(adj, root, mark, *stamp);
    loop {
        let candidate = *last
            .iter()
            .min_by_key(|&&v| (adj[v].len(), v))
            .expect("level structure is never empty");
        *stamp += 1;
        let (next_last, next_depth) = bfs_levels(adj, candidate, mark, *stamp);
        if next_depth <= depth {
            return root;
        }
        root = candidate;
        last = next_last;
        depth = next_depth;
    }
}

/// Reverse Cuthill-McKee permutation: `perm[new] = old`.
pub fn reverse_cuthill_mckee(a: &SparseMatrix) -> Vec<usize> {
    let n = a.nrows();
    let adj = symmetric_adjacency(a);
    let mut visited = vec![false; n];
    let mut mark = vec![0usize; n];
    let mut stamp = 0usize;
    let mut order = Vec::with_capacity(n);
    let mut queue = VecDeque::new();
    let mut nbrs = Vec::new();

    for seed in 0..n {
        if visited[seed] {
            continue;
        }
        let root = pseudo_peripheral(&adj, seed, &mut mark, &mut stamp);
        visited[root] = true;
        queue.push_back(root);
        while let Some(v) = queue.pop_front() {
            order.push(v);
            nbrs.clear();
            nbrs.extend(adj[v].iter().copied().filter(|&w| !visited[w]));
            nbrs.sort_unstable_by_key(|&w| (adj[w].len(), w));
            for &w in &nbrs {
                visited[w] = true;
                queue.push_back(w);
            }
        }
    }
    order.reverse();
    order
}

/// Lower and upper bandwidth of `A` under the symmetric permutation `perm`.
pub fn bandwidth(a: &SparseMatrix, perm: &[usize]) -> (usize, usize) {
    let mut inverse = vec![0usize; perm.len()];
    for (new, &old) in perm.iter().enumerate() {
        inverse[old] = new;
    }
    let (mut lower, mut upper) = (0usize, 0usize);
    for r in 0..a.nrows() {
        let rn = inverse[r];
        for &c in a.row(r).0 {
            let cn = inverse[c];
            if cn < rn {
                lower = lower.max(rn - cn);
            } else {
                upper = upper.max(cn - rn);
            }
        }
    }
    (lower, upper)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn path_graph_shuffled() -> SparseMatrix {
        // path 0-3-1-4-2 encoded with scattered labels
        let edges = [(0, 3), (3, 1), (1, 4), (4, 2)];
        let mut t: Vec<(usize, usize, f64)> = (0..5).map(|i| (i, i, 2.0)).collect();
        for &(a, b) in &edges {
            t.push((a, b, -1.0));
            t.push((b, a, -1.0));
        }
        SparseMatrix::assemble(&t, 5, 5).unwrap()
    }

    #[test]
    fn rcm_is_a_permutation() {
        let a = path_graph_shuffled();
        let mut p = reverse_cuthill_mckee(&a);
        p.sort_unstable();
        assert_eq!(p, vec![0, 1, 2, 3, 4]);
    }

    #[test]
    fn rcm_recovers_tridiagonal_band_for_a_path() {
        let a = path_graph_shuffled();
        let identity: Vec<usize> = (0..5).collect();
        assert!(bandwidth(&a, &identity).0 > 1);
        let p = reverse_cuthill_mckee(&a);
        assert_eq!(bandwidth(&a, &p), (1, 1));
    }

    #[test]
    fn disconnected_components_are_all_ordered() {
        let a = SparseMatrix::assemble(&[(0, 0, 1.0), (1, 1, 1.0), (2, 2, 1.0)], 3, 3).unwrap();
        let mut p = reverse_cuthill_mckee(&a);
        p.sort_unstable();
        assert_eq!(p, vec![0, 1, 2]);
    }
}
