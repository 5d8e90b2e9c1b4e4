//! Witness search for rank-matrix feasibility.
//!
//! Every row of a rank matrix imposes a chain of strict inequalities between
//! the distances from that row's point. With distances constrained to
//! `[1, 2]` the triangle inequality holds automatically, so a symmetric
//! distance table realizing the matrix exists iff the union of those chains
//! (over unordered pairs) is acyclic, and a gap of `margin` fits in the unit
//! range. The witness assigns each pair a value from its longest-path depth
//! in that order plus a sub-margin offset from a topological order, which
//! keeps every entry distinct.

use petgraph::algo::toposort;
use petgraph::graph::{DiGraph, NodeIndex};

use super::RankMatrix;

pub const DEFAULT_MARGIN: f64 = 1e-3;

fn pair_index(n: usize, a: usize, b: usize) -> usize {
    let (a, b) = if a < b { (a, b) } else { (b, a) };
    a * n - a * (a + 1) / 2 + (b - a - 1)
}

/// Returns a symmetric distance matrix with off-diagonal entries in `[1, 2]`
/// whose rank matrix is `r`, consecutive ranks in each row separated by at
/// least `margin`, and all pairwise distances distinct. `None` means no such
/// witness exists at this margin, which is not a proof of infeasibility at
/// smaller margins.
pub fn feasibility_search(r: &RankMatrix, margin: f64) -> Option<Vec<Vec<f64>>> {
    if !(margin > 0.0) || r.has_ties() {
        return None;
    }
    let n = r.n();
    if n == 1 {
        return Some(vec![vec![0.0]]);
    }
    let pairs = n * (n - 1) / 2;
    let mut graph: DiGraph<(usize, usize), ()> = DiGraph::with_capacity(pairs, n * n);
    for a in 0..n {
        for b in a + 1..n {
            graph.add_node((a, b));
        }
    }
    for i in 0..n {
        let order = r.order_from(i);
        for w in order[1..].windows(2) {
            let near = NodeIndex::new(pair_index(n, i, w[0]));
            let far = NodeIndex::new(pair_index(n, i, w[1]));
            graph.update_edge(near, far, ());
        }
    }
    let topo = toposort(&graph, None).ok()?;
    let mut depth = vec![0usize; pairs];
    for &v in &topo {
        let d = depth[v.index()];
        for next in graph.neighbors(v) {
            depth[next.index()] = depth[next.index()].max(d + 1);
        }
    }
    let max_depth = depth.iter().copied().max().unwrap_or(0) as f64;
    // depth steps of 2*margin, offsets below margin
    if 1.0 + 2.0 * margin * max_depth + margin > 2.0 {
        return None;
    }
    let mut dist = vec![vec![0.0; n]; n];
    for (pos, &v) in topo.iter().enumerate() {
        let (a, b) = graph[v];
        let value =
            1.0 + 2.0 * margin * depth[v.index()] as f64 + margin * pos as f64 / pairs as f64;
        dist[a][b] = value;
        dist[b][a] = value;
    }
    Some(dist)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spaces::rank_matrix_from_distances;

    #[test]
    fn pair_indexing_is_dense() {
        let n = 6;
        let mut seen = vec![false; n * (n - 1) / 2];
        for a in 0..n {
            for b in a + 1..n {
                assert_eq!(pair_index(n, a, b), pair_index(n, b, a));
                assert!(!std::mem::replace(&mut seen[pair_index(n, a, b)], true));
            }
        }
        assert!(seen.into_iter().all(|s| s));
    }

    #[test]
    fn latin_squares() {
        let symmetric = RankMatrix::new(vec![
            vec![1, 2, 3, 4],
            vec![2, 1, 4, 3],
            vec![3, 4, 1, 2],
            vec![4, 3, 2, 1],
        ])
        .unwrap();
        let d = feasibility_search(&symmetric, DEFAULT_MARGIN).expect("symmetric Latin square");
        assert_eq!(rank_matrix_from_distances(&d).unwrap(), symmetric);

        // swap two off-diagonal entries in each of the first two rows
        let asymmetric = RankMatrix::new(vec![
            vec![1, 2, 4, 3],
            vec![2, 1, 3, 4],
            vec![3, 4, 1, 2],
            vec![4, 3, 2, 1],
        ])
        .unwrap();
        assert!(!asymmetric.is_symmetric());
        assert!(feasibility_search(&asymmetric, DEFAULT_MARGIN).is_none());
    }

    #[test]
    fn margin_too_wide() {
        let symmetric = RankMatrix::new(vec![
            vec![1, 2, 3, 4],
            vec![2, 1, 4, 3],
            vec![3, 4, 1, 2],
            vec![4, 3, 2, 1],
        ])
        .unwrap();
        assert!(feasibility_search(&symmetric, 0.4).is_none());
        assert!(feasibility_search(&symmetric, -1.0).is_none());
    }
}
